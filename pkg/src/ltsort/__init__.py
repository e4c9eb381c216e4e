"""LT codes with greedy transmission sorting for high intermediate recovery."""

from .degree_distributions import (
    DegreeDistribution,
    point_mass,
    raptor_distribution,
    robust_soliton,
    sample_degree,
)
from .errors import CalibrationError, MalformedSymbolError, ParameterError
from .lt_codec import (
    DecoderState,
    EncodedSymbol,
    Encoder,
    RecoveryTrace,
    SourceBlock,
    decoder_ingest,
    generate_symbols,
    recovered_fraction,
)
from .scheduler import (
    BeliefState,
    Schedule,
    adapt_rate_decrease,
    adapt_rate_increase,
    baseline_schedule,
    build_schedule,
    decode_probability,
    precompute_offline_schedule,
    select_next,
    update_belief,
)
from .channel import ErasureProcess, transmit
from .experiments import (
    CurveAggregate,
    ExperimentConfig,
    aggregate_traces,
    calibrate_gamma_succ,
    emit_csv,
    run_experiment,
    run_trial,
    with_calibrated_gamma_succ,
)

__all__ = [name for name in dir() if not name.startswith("_")]
