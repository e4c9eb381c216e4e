import json
import math

import numpy as np
import pytest

from ltsort import (
    CalibrationError,
    ExperimentConfig,
    ParameterError,
    aggregate_traces,
    calibrate_gamma_succ,
    emit_csv,
    run_experiment,
    run_trial,
    with_calibrated_gamma_succ,
)
from ltsort.cli import main as cli_main
from ltsort.lt_codec import RecoveryTrace


def make_config(**overrides):
    base = dict(
        k=50,
        symbol_len=4,
        distribution={"kind": "robust_soliton", "c": 0.1, "delta": 0.5},
        epsilon=0.1,
        gamma_succ=2.0,
        mode="sorted",
        trials=2,
        seed=0,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestConfig:
    def test_rejects_unknown_keys(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"k": 10, "epsilon": 0.1, "bogus": 1}))
        with pytest.raises(ParameterError):
            ExperimentConfig.from_file(path)

    def test_needs_epsilon_or_process(self):
        with pytest.raises(ParameterError):
            ExperimentConfig(k=10)

    def test_bad_mode_and_trials(self):
        with pytest.raises(ParameterError):
            make_config(mode="bogus")
        with pytest.raises(ParameterError):
            make_config(trials=0)

    def test_uncalibrated_gamma_succ_rejected(self):
        with pytest.raises(ParameterError):
            make_config(gamma_succ="calibrate").resolved_gamma_succ()

    def test_build_process_boundary_on_transmitted_clock(self):
        cfg = make_config(
            k=1000,
            epsilon=None,
            erasure_process=[
                {"at_index": 0, "epsilon": 0.3},
                {"at_gamma_c": 0.5, "epsilon": 0.5},
            ],
        )
        proc = cfg.build_process()
        # floor(1000 * 0.5 / 0.7) = 714
        assert proc.segments == [(0, 0.3), (714, 0.5)]
        assert cfg.initial_epsilon() == 0.3

    def test_gamma_c_needs_preceding_segment(self):
        cfg = make_config(epsilon=None, erasure_process=[{"at_gamma_c": 0.5, "epsilon": 0.5}])
        with pytest.raises(ParameterError):
            cfg.build_process()


class TestTrials:
    def test_ideal_mode_is_exact(self):
        trace = run_trial(make_config(mode="ideal", k=100, gamma_succ=1.5), 7)
        assert trace.gammas == pytest.approx([i / 100 for i in range(1, 151)])
        assert trace.zs == pytest.approx([min(i / 100, 1.0) for i in range(1, 151)])

    def test_point_mass_degree_one_lossless_single_source(self):
        # k=1, every symbol is the source symbol: first delivery finishes
        cfg = make_config(
            k=1, distribution={"kind": "point_mass", "degree": 1},
            epsilon=0.0, gamma_succ=3.0, mode="random", trials=1,
        )
        trace = run_trial(cfg, 3)
        assert trace.zs[0] == 1.0

    @pytest.mark.parametrize("mode", ["sorted", "random", "degree_ascending"])
    def test_modes_reach_full_recovery_with_ample_overhead(self, mode):
        trace = run_trial(make_config(mode=mode, gamma_succ=3.0, epsilon=0.1), 11)
        assert trace.zs[-1] == 1.0

    def test_trace_gammas_count_received_symbols(self):
        cfg = make_config(mode="random", epsilon=0.3, gamma_succ=1.5, k=40)
        trace = run_trial(cfg, 5)
        m = math.ceil(40 * 1.5 / 0.7)
        assert len(trace) <= m
        assert trace.gammas == pytest.approx([i / 40 for i in range(1, len(trace) + 1)])

    def test_trial_is_seed_deterministic(self):
        cfg = make_config()
        a = run_trial(cfg, np.random.SeedSequence(9))
        b = run_trial(cfg, np.random.SeedSequence(9))
        assert a.zs == b.zs and a.gammas == b.gammas

    def test_varying_epsilon_increase_grows_queue(self):
        cfg = make_config(
            k=60, epsilon=None, gamma_succ=1.6, mode="sorted", trials=1,
            erasure_process=[
                {"at_index": 0, "epsilon": 0.1},
                {"at_gamma_c": 0.5, "epsilon": 0.4},
            ],
        )
        trace = run_trial(cfg, 13)
        # more symbols than the initial m can be received after injection
        m0 = math.ceil(60 * 1.6 / 0.9)
        assert trace.tx_indices[-1] >= m0


class TestAggregation:
    def test_step_interpolation_carries_last_value(self):
        t = RecoveryTrace()
        for g, z in [(0.02, 0.1), (0.05, 0.4), (0.10, 0.9)]:
            t.append(g, z, 0)
        agg = aggregate_traces([t])
        assert agg.gammas == pytest.approx(np.arange(11) * 0.01)
        expected = [0, 0, 0.1, 0.1, 0.1, 0.4, 0.4, 0.4, 0.4, 0.4, 0.9]
        assert agg.z_mean == pytest.approx(expected)

    def test_grid_point_at_exact_delivery_included(self):
        t = RecoveryTrace()
        t.append(0.01, 1.0, 0)
        agg = aggregate_traces([t])
        assert agg.z_mean == pytest.approx([0.0, 1.0])

    def test_mixed_lengths_use_longest_and_carry_final(self):
        a, b = RecoveryTrace(), RecoveryTrace()
        a.append(0.03, 0.5, 0)
        b.append(0.06, 1.0, 0)
        agg = aggregate_traces([a, b])
        assert len(agg.gammas) == 7
        assert agg.z_mean[-1] == pytest.approx((0.5 + 1.0) / 2)

    def test_row_count_for_gamma_110(self):
        t = RecoveryTrace()
        t.append(1.10, 1.0, 0)
        assert len(aggregate_traces([t]).gammas) == 111

    def test_single_trial_zero_std(self):
        t = RecoveryTrace()
        t.append(0.02, 1.0, 0)
        agg = aggregate_traces([t])
        assert np.all(agg.z_std == 0.0)


class TestExperimentAndCsv:
    def test_epsilon_ordering_statistical(self):
        # more erasure cannot help: mean z at gamma=0.5 decreasing in epsilon
        means = []
        for eps in (0.0, 0.3, 0.6):
            agg = run_experiment(make_config(epsilon=eps, trials=15, mode="random", seed=3))
            idx = int(round(0.5 / 0.01))
            means.append(agg.z_mean[idx])
        assert means[0] >= means[1] - 0.02 >= means[2] - 0.04

    def test_csv_byte_identical_across_runs(self, tmp_path):
        cfg = make_config(trials=3, seed=5)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        emit_csv(run_experiment(cfg), p1)
        emit_csv(run_experiment(cfg), p2)
        assert p1.read_bytes() == p2.read_bytes()
        first = p1.read_text().splitlines()
        assert first[0] == "gamma,z_mean,z_std,trials"
        assert first[1].startswith("0.000000,")
        assert first[1].endswith(",3")

    def test_empty_aggregate_writes_header_only(self, tmp_path):
        path = tmp_path / "empty.csv"
        emit_csv(None, path)
        assert path.read_text() == "gamma,z_mean,z_std,trials\n"


class TestCalibration:
    def test_single_source_symbol_calibrates_to_one(self):
        cfg = make_config(k=1, distribution={"kind": "point_mass", "degree": 1}, trials=1)
        assert calibrate_gamma_succ(cfg, min_trials=20) == pytest.approx(1.0)

    def test_coupon_collector_needs_overhead(self):
        cfg = make_config(k=20, distribution={"kind": "point_mass", "degree": 1})
        gamma = calibrate_gamma_succ(cfg, min_trials=50, gamma_cap=16.0)
        # 99th percentile of coupon collection sits well above k draws
        assert gamma > 1.3

    def test_unreachable_cap_raises(self):
        cfg = make_config(k=20, distribution={"kind": "point_mass", "degree": 1})
        with pytest.raises(CalibrationError):
            calibrate_gamma_succ(cfg, min_trials=50, gamma_cap=1.0)

    def test_with_calibrated_passthrough_and_fill(self):
        cfg = make_config(gamma_succ=1.5)
        assert with_calibrated_gamma_succ(cfg) is cfg
        cfg2 = make_config(
            k=1, distribution={"kind": "point_mass", "degree": 1}, gamma_succ="calibrate"
        )
        assert with_calibrated_gamma_succ(cfg2).gamma_succ == pytest.approx(1.0)


class TestCli:
    def write_config(self, tmp_path, **overrides):
        cfg = dict(
            k=30,
            symbol_len=2,
            distribution={"kind": "robust_soliton", "c": 0.1, "delta": 0.5},
            epsilon=0.1,
            gamma_succ=2.0,
            mode="random",
            trials=2,
            seed=1,
            out=str(tmp_path / "out.csv"),
        )
        cfg.update(overrides)
        path = tmp_path / "config.json"
        path.write_text(json.dumps(cfg))
        return path

    def test_run_writes_csv(self, tmp_path, capsys):
        path = self.write_config(tmp_path)
        assert cli_main(["run", "--config", str(path)]) == 0
        lines = (tmp_path / "out.csv").read_text().splitlines()
        assert lines[0] == "gamma,z_mean,z_std,trials"
        assert len(lines) > 10

    def test_run_overrides(self, tmp_path):
        path = self.write_config(tmp_path)
        out = tmp_path / "other.csv"
        assert cli_main(["run", "--config", str(path), "--trials", "1",
                         "--mode", "degree_ascending", "--out", str(out)]) == 0
        assert out.exists()
        assert out.read_text().splitlines()[1].endswith(",1")

    def test_calibrate_prints_value(self, tmp_path, capsys):
        path = self.write_config(
            tmp_path, k=1, distribution={"kind": "point_mass", "degree": 1},
            gamma_succ="calibrate", trials=30,
        )
        assert cli_main(["calibrate", "--config", str(path)]) == 0
        assert "1.0" in capsys.readouterr().out

    def test_bad_config_exits_nonzero(self, tmp_path, capsys):
        missing = tmp_path / "nope.json"
        assert cli_main(["run", "--config", str(missing)]) == 1
        assert capsys.readouterr().err != ""
