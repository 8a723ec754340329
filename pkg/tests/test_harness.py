import dataclasses

import numpy as np
import pytest

from sdtlearn.harness import (
    ExperimentConfig,
    budgets_for,
    find_depth_budget,
    run_experiment,
    run_sweep,
    sweep_grid,
    write_csv,
)

# First-run outputs of three canned configs, pinned as regression anchors.
GOLDEN = [
    (
        ExperimentConfig(n=6, s=4, m=2000, eps=0.2, method="find", stoch_fraction=0.3,
                         eta=0.0, adversary="none", seed=7, max_depth=4),
        '{"adversary": "none", "bound": 0.22207310194463545, "degree_budget": null, '
        '"depth_budget": 4, "eps": 0.2, "error_estimation": "exact", "eta": 0.0, '
        '"hypothesis_error": 0.022073101944635437, "m": 2000, "margin": -0.2, '
        '"method": "find", "n": 6, "opt": 0.022073101944635437, "s": 4, "seed": 7}',
    ),
    (
        ExperimentConfig(n=6, s=4, m=2000, eps=0.2, method="l2", stoch_fraction=0.3,
                         eta=0.05, adversary="label_flip_random", seed=11),
        '{"adversary": "label_flip_random", "bound": 1.873320053068151, '
        '"degree_budget": 5, "depth_budget": null, "eps": 0.2, '
        '"error_estimation": "exact", "eta": 0.05, "hypothesis_error": 0.0, '
        '"m": 2000, "margin": -1.873320053068151, "method": "l2", "n": 6, '
        '"opt": 0.0, "s": 4, "seed": 11}',
    ),
    (
        ExperimentConfig(n=6, s=4, m=2000, eps=0.25, method="l1", stoch_fraction=0.3,
                         eta=0.1, adversary="label_flip_margin", seed=13),
        '{"adversary": "label_flip_margin", "bound": 0.45, "degree_budget": 4, '
        '"depth_budget": null, "eps": 0.25, "error_estimation": "exact", "eta": 0.1, '
        '"hypothesis_error": 0.1875, "m": 2000, "margin": -0.2625, "method": "l1", '
        '"n": 6, "opt": 0.0, "s": 4, "seed": 13}',
    ),
]


class TestBudgets:
    def test_find_depth_budget(self):
        # s=8, eps=0.15: 45 stacked copies need depth 45*3 + log2(1/0.15),
        # far beyond any sensible cap.
        assert find_depth_budget(8, 0.15, 5) == 5
        assert find_depth_budget(8, 0.15, 1000) == 138
        assert find_depth_budget(1, 0.25, 10) == 2
        assert find_depth_budget(2, 0.5, 10) == 5

    def test_infeasible_feature_budget_reported_before_compute(self):
        cfg = ExperimentConfig(n=20, s=16, m=100, eps=0.05, method="l2", feature_cap=1000)
        with pytest.raises(ValueError, match="features"):
            budgets_for(cfg)
        with pytest.raises(ValueError, match="features"):
            run_experiment(cfg)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ExperimentConfig(n=0, s=4, m=10, eps=0.2)
        with pytest.raises(ValueError):
            ExperimentConfig(n=4, s=4, m=10, eps=0.2, eta=1.5)
        with pytest.raises(ValueError):
            ExperimentConfig(n=4, s=4, m=10, eps=0.2, method="boosting")
        with pytest.raises(ValueError):
            ExperimentConfig(n=4, s=4, m=10, eps=0.2, adversary="bribe")


class TestGoldenConfigs:
    @pytest.mark.parametrize("cfg,expected", GOLDEN, ids=["find", "l2", "l1"])
    def test_pinned_reports(self, cfg, expected):
        assert run_experiment(cfg).to_json() == expected


class TestDeterminism:
    def test_repeated_runs_byte_identical(self):
        cfg = GOLDEN[0][0]
        assert run_experiment(cfg).to_json() == run_experiment(cfg).to_json()

    def test_thread_count_does_not_leak_into_report(self):
        base = GOLDEN[0][0]
        single = run_experiment(dataclasses.replace(base, threads=1))
        multi = run_experiment(dataclasses.replace(base, threads=3))
        assert single.to_json() == multi.to_json()
        assert single.to_csv_row() == multi.to_csv_row()


class TestSweep:
    def test_eta_sweep_aggregates(self):
        base = ExperimentConfig(n=6, s=4, m=1500, eps=0.2, method="find",
                                stoch_fraction=0.4, eta=0.0,
                                adversary="label_flip_margin", seed=100, max_depth=3)
        reports, aggregates = run_sweep(sweep_grid(base, [0.0, 0.05, 0.1], 20))
        assert len(reports) == 60
        assert [a.eta for a in aggregates] == [0.0, 0.05, 0.1]
        assert all(a.trials == 20 for a in aggregates)
        # The guarantee holds throughout this sweep; noise still hurts the
        # raw error monotonically on average.
        assert all(a.success_rate == 1.0 for a in aggregates)
        errors = [a.mean_error for a in aggregates]
        assert errors[0] <= errors[1] <= errors[2]
        # Identical (method, eta) groups share the tree stream, so opt agrees.
        assert aggregates[0].mean_opt == pytest.approx(aggregates[2].mean_opt, abs=1e-12)

    def test_grid_seeds_are_distinct(self):
        base = GOLDEN[0][0]
        grid = sweep_grid(base, [0.0, 0.1], 3)
        assert len(grid) == 6
        assert sorted({cfg.seed for cfg in grid}) == [7, 8, 9]

    def test_csv_writing(self, tmp_path):
        reports = [run_experiment(GOLDEN[0][0])]
        path = tmp_path / "out.csv"
        write_csv(reports, str(path))
        lines = path.read_text().splitlines()
        assert len(lines) == 2
        assert lines[0].startswith("method,n,s,m,eta")
        assert lines[1].split(",")[0] == "find"
