"""Monte-Carlo harness: recovery-rate curves z(gamma) over the erasure channel.

A trial generates a source block and m = ceil(k * gamma_succ / (1 - eps))
encoded symbols, orders them per the configured scheduler mode, pushes them
through the channel (adapting on erasure-rate changes in sorted mode), and
records z after every delivery.  Trials aggregate onto a uniform gamma grid
by step interpolation, and the aggregate is written as CSV.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import degree_distributions, scheduler
from .channel import ErasureProcess, transmit
from .errors import CalibrationError, ParameterError
from .lt_codec import DecoderState, Encoder, RecoveryTrace, SourceBlock
from .scheduler import BeliefState, Schedule

GRID_STEP = 0.01
MODES = ("sorted", "random", "degree_ascending", "ideal")


@dataclass
class ExperimentConfig:
    k: int = 1000
    symbol_len: int = 16  # payload size does not affect recovery statistics
    distribution: dict = field(default_factory=lambda: {"kind": "robust_soliton", "c": 0.05, "delta": 0.01})
    epsilon: float = None
    erasure_process: list = None  # [{"at_index": int | "at_gamma_c": float, "epsilon": float}, ...]
    gamma_succ: object = "calibrate"
    mode: str = "sorted"
    trials: int = 100
    seed: int = 0
    out: str = "curves.csv"
    tie_mode: str = "seeded_random"
    engine: str = "auto"

    def __post_init__(self):
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if self.mode not in MODES:
            raise ParameterError(f"unknown scheduler mode: {self.mode!r}")
        if self.epsilon is None and self.erasure_process is None:
            raise ParameterError("config needs either epsilon or erasure_process")

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            raw = json.load(fh)
        known = cls.__dataclass_fields__
        unknown = set(raw) - set(known)
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)

    def build_process(self) -> ErasureProcess:
        if self.erasure_process is None:
            return ErasureProcess.constant(self.epsilon)
        segments = []
        prev_eps = None
        for entry in self.erasure_process:
            eps = entry["epsilon"]
            if "at_index" in entry:
                start = entry["at_index"]
            elif "at_gamma_c" in entry:
                if prev_eps is None:
                    raise ParameterError("first erasure segment must use at_index 0")
                # transmitted-count clock: k * gamma_c / (1 - eps_prev)
                start = math.floor(self.k * entry["at_gamma_c"] / (1.0 - prev_eps))
            else:
                raise ParameterError("erasure segment needs at_index or at_gamma_c")
            segments.append((start, eps))
            prev_eps = eps
        return ErasureProcess(segments=segments)

    def initial_epsilon(self) -> float:
        if self.erasure_process is not None:
            return self.erasure_process[0]["epsilon"]
        return self.epsilon

    def resolved_gamma_succ(self) -> float:
        if self.gamma_succ == "calibrate":
            raise ParameterError("gamma_succ not calibrated yet; run calibrate first")
        return float(self.gamma_succ)


@dataclass
class CurveAggregate:
    gammas: np.ndarray
    z_mean: np.ndarray
    z_std: np.ndarray
    trials: int


def _trial_rngs(seed_seq: np.random.SeedSequence):
    enc, chan, tie, adapt = (np.random.default_rng(s) for s in seed_seq.spawn(4))
    return enc, chan, tie, adapt


def run_trial(config: ExperimentConfig, seed_seq) -> RecoveryTrace:
    """One independent trial; seed_seq is a SeedSequence (or an int)."""
    if not isinstance(seed_seq, np.random.SeedSequence):
        seed_seq = np.random.SeedSequence(seed_seq)
    enc_rng, chan_rng, tie_rng, adapt_rng = _trial_rngs(seed_seq)

    k = config.k
    gamma_succ = config.resolved_gamma_succ()

    if config.mode == "ideal":
        trace = RecoveryTrace()
        for i in range(1, round(k * gamma_succ) + 1):
            gamma = i / k
            trace.append(gamma, min(gamma, 1.0), i - 1)
        return trace

    process = config.build_process()
    eps0 = config.initial_epsilon()
    m = math.ceil(k * gamma_succ / (1.0 - eps0))

    dist = degree_distributions.from_config(config.distribution, k)
    block = SourceBlock.random(k, config.symbol_len, enc_rng)
    encoder = Encoder(block, dist, enc_rng)
    symbols = encoder.generate(m)

    on_rate_change = None
    on_transmit = None
    if config.mode == "sorted":
        belief = BeliefState.fresh(k, eps0)
        sched = scheduler.build_schedule(
            symbols, eps0, config.tie_mode, tie_rng, config.engine
        )
        tx_count = [0]

        def on_transmit(sym, _belief=belief, _n=tx_count):
            scheduler.update_belief(_belief, sym)
            _n[0] += 1

        def on_rate_change(eps_new, remaining):
            if eps_new > belief.epsilon:
                gamma_c = tx_count[0] * (1.0 - belief.epsilon) / k
                queue, _ = scheduler.adapt_rate_increase(
                    remaining, belief, eps_new, k, gamma_succ, gamma_c, encoder,
                    config.tie_mode, adapt_rng, config.engine,
                )
            elif eps_new < belief.epsilon:
                queue, _ = scheduler.adapt_rate_decrease(
                    remaining, belief, eps_new, adapt_rng,
                    config.tie_mode, config.engine,
                )
            else:
                return None
            return queue
    elif config.mode in scheduler.BASELINE_MODES:
        sched = scheduler.baseline_schedule(symbols, config.mode, tie_rng)
    else:  # pragma: no cover
        raise ParameterError(config.mode)

    delivered = transmit(
        sched, symbols, process, chan_rng,
        on_rate_change=on_rate_change, on_transmit=on_transmit,
    )

    state = DecoderState(k, config.symbol_len)
    for tx_index, sym in delivered:
        state.ingest(sym, tx_index)
    return state.trace


def aggregate_traces(traces, step=GRID_STEP) -> CurveAggregate:
    """Step-interpolate each trace onto the uniform gamma grid and average.

    z is a step function of deliveries, so the last value at or before each
    grid point is carried forward (0 before the first delivery, the final
    value beyond the end of a trace)."""
    gamma_max = max((t.gammas[-1] if len(t) else 0.0) for t in traces)
    n_pts = int(math.floor(gamma_max / step + 1e-9)) + 1
    grid = np.round(np.arange(n_pts) * step, 10)
    rows = np.empty((len(traces), n_pts))
    for r, trace in enumerate(traces):
        gs = np.asarray(trace.gammas)
        zs = np.asarray(trace.zs)
        pos = np.searchsorted(gs, grid + 1e-12, side="right")
        rows[r] = np.where(pos > 0, zs[np.minimum(pos, len(zs)) - 1], 0.0)
    z_mean = rows.mean(axis=0)
    z_std = rows.std(axis=0, ddof=1) if len(traces) > 1 else np.zeros(n_pts)
    return CurveAggregate(gammas=grid, z_mean=z_mean, z_std=z_std, trials=len(traces))


def run_experiment(config: ExperimentConfig) -> CurveAggregate:
    """Run `trials` independent trials; per-trial seeds are spawned from the
    master seed so results are deterministic."""
    root = np.random.SeedSequence(config.seed)
    traces = [run_trial(config, child) for child in root.spawn(config.trials)]
    return aggregate_traces(traces)


def emit_csv(agg: CurveAggregate, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("gamma,z_mean,z_std,trials\n")
        if agg is None:
            return
        for g, zm, zs in zip(agg.gammas, agg.z_mean, agg.z_std):
            fh.write(f"{g:.6f},{zm:.6f},{zs:.6f},{agg.trials}\n")


def calibrate_gamma_succ(config: ExperimentConfig, min_trials=200, quantile=0.99,
                         gamma_cap=2.0) -> float:
    """Measure the overhead at which random-order lossless delivery fully
    recovers the block in >= `quantile` of trials.

    Returns the smallest grid gamma meeting the quantile; raises
    CalibrationError if none does by gamma_cap."""
    trials = max(min_trials, config.trials)
    k = config.k
    m = max(int(math.ceil(k * gamma_cap)), 1)
    dist = degree_distributions.from_config(config.distribution, k)
    root = np.random.SeedSequence(config.seed)

    full_at = []  # delivered count at which z first hit 1, or None
    for child in root.spawn(trials):
        enc_rng, _, tie_rng, _ = _trial_rngs(child)
        block = SourceBlock.random(k, config.symbol_len, enc_rng)
        symbols = Encoder(block, dist, enc_rng).generate(m)
        order = scheduler.baseline_schedule(symbols, "random", tie_rng)
        by_id = {s.id: s for s in symbols}
        state = DecoderState(k, config.symbol_len)
        hit = None
        for sid in order.order:
            state.ingest(by_id[sid])
            if len(state.recovered) == k:
                hit = state.delivered_count
                break
        full_at.append(hit)

    counts = sorted(c for c in full_at if c is not None)
    need = math.ceil(quantile * trials)
    if len(counts) < need:
        raise CalibrationError(
            f"only {len(counts)}/{trials} trials fully recovered by gamma={gamma_cap}"
        )
    threshold_count = counts[need - 1]
    return math.ceil(threshold_count / k / GRID_STEP - 1e-9) * GRID_STEP


def with_calibrated_gamma_succ(config: ExperimentConfig) -> ExperimentConfig:
    if config.gamma_succ == "calibrate":
        return replace(config, gamma_succ=calibrate_gamma_succ(config))
    return config
