"""Experiment orchestration: generate, corrupt, learn, evaluate, report.

A single seed fully determines an experiment: it is split into
independent streams for tree generation, sampling, corruption, and
learning, so identical configs produce byte-identical reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .data import Adversary, corrupt, draw_clean
from .evaluation import (
    DEFAULT_ENUMERATION_CAP,
    ErrorReport,
    exact_error,
    exact_opt,
    guarantee_margin,
    mc_error,
)
from .find import find
from .regression import degree_budget, learn_l1_pipeline, learn_l2_pipeline, feature_count
from .trees import StochasticTree, mean_on_points, pack_inputs, random_tree

METHODS = ("find", "l1", "l2")


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    s: int
    m: int
    eps: float
    method: str = "find"
    stoch_fraction: float = 0.3
    eta: float = 0.0
    adversary: str = "none"
    seed: int = 0
    trials: int = 1
    max_depth: int = 6
    feature_cap: int = 20_000
    threads: int = 1
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP
    mc_trials: int = 200_000

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.s < 1:
            raise ValueError("s must be positive")
        if self.m < 0:
            raise ValueError("m must be nonnegative")
        if not 0.0 < self.eps < 1.0:
            raise ValueError("eps must lie in (0, 1)")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")
        if not 0.0 <= self.stoch_fraction <= 1.0:
            raise ValueError("stoch_fraction must lie in [0, 1]")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        Adversary(self.adversary)  # raises on unknown kinds
        if self.trials < 1 or self.max_depth < 0 or self.threads < 1:
            raise ValueError("trials, max_depth, and threads must be positive")


def find_depth_budget(s: int, eps: float, max_depth: int) -> int:
    """Depth for the backtracking learner: ceil(log2(stacked_size / eps))
    with stacked_size = s^ceil(1/eps^2), clamped to the configured cap."""
    c = math.ceil(1.0 / (eps * eps))
    raw = c * math.log2(s) - math.log2(eps) if s > 1 else -math.log2(eps)
    return min(max_depth, max(0, math.ceil(raw - 1e-12)))


def budgets_for(cfg: ExperimentConfig) -> tuple[int | None, int | None]:
    """(depth budget, degree budget) for the configured method; validates
    feasibility before any data is generated."""
    if cfg.method == "find":
        return find_depth_budget(cfg.s, cfg.eps, cfg.max_depth), None
    degree = min(degree_budget(cfg.s, cfg.eps), cfg.n)
    count = feature_count(cfg.n, degree)
    if count > cfg.feature_cap:
        raise ValueError(
            f"method {cfg.method} needs {count} features at degree {degree}, "
            f"cap is {cfg.feature_cap}"
        )
    return None, degree


def run_experiment(cfg: ExperimentConfig) -> ErrorReport:
    depth, degree = budgets_for(cfg)

    streams = np.random.SeedSequence(cfg.seed).spawn(4)
    rng_tree, rng_sample, rng_corrupt, rng_eval = (np.random.default_rng(s) for s in streams)

    tree = random_tree(cfg.n, cfg.s, cfg.stoch_fraction, rng_tree)
    clean = draw_clean(tree, cfg.m, rng_sample)
    corrupted = corrupt(clean, cfg.eta, Adversary(cfg.adversary), tree, rng_corrupt)

    if cfg.method == "find":
        hypothesis = find(corrupted, depth, threads=cfg.threads).tree
    elif cfg.method == "l2":
        hypothesis = learn_l2_pipeline(corrupted, cfg.s, cfg.eps, cfg.feature_cap)
    else:
        hypothesis = learn_l1_pipeline(corrupted, cfg.s, cfg.eps, cfg.feature_cap)

    if cfg.n <= cfg.enumeration_cap:
        opt = exact_opt(tree, cfg.enumeration_cap)
        err = exact_error(tree, hypothesis, cfg.enumeration_cap)
        estimation = "exact"
    else:
        opt = _mc_opt(tree, cfg.mc_trials, rng_eval)
        err = mc_error(tree, hypothesis, cfg.mc_trials, rng_eval)[0]
        estimation = "monte_carlo"

    return guarantee_margin(
        method=cfg.method,
        tree_opt=opt,
        hypothesis_error=err,
        eta=cfg.eta,
        eps=cfg.eps,
        n=cfg.n,
        s=cfg.s,
        m=cfg.m,
        seed=cfg.seed,
        adversary=cfg.adversary,
        depth_budget=depth,
        degree_budget=degree,
        error_estimation=estimation,
    )


def _mc_opt(tree: StochasticTree, trials: int, rng: np.random.Generator) -> float:
    # Sampled inputs, exact per-point means: an unbiased estimate of the
    # Bayes error without enumerating {0,1}^n.
    xs = rng.integers(0, 2, size=(trials, tree.n), dtype=np.uint8)
    mu = mean_on_points(tree, pack_inputs(xs))
    return float(np.mean(np.minimum(mu, 1.0 - mu)))


@dataclass(frozen=True)
class SweepAggregate:
    method: str
    eta: float
    trials: int
    success_rate: float
    mean_opt: float
    mean_error: float


def sweep_grid(base: ExperimentConfig, etas: Sequence[float], trials: int) -> list[ExperimentConfig]:
    """One config per (eta, trial); trial i runs with seed base.seed + i."""
    return [
        replace(base, eta=eta, seed=base.seed + i, trials=1)
        for eta in etas
        for i in range(trials)
    ]


def run_sweep(configs: Iterable[ExperimentConfig]) -> tuple[list[ErrorReport], list[SweepAggregate]]:
    reports = [run_experiment(cfg) for cfg in configs]
    groups: dict[tuple[str, float], list[ErrorReport]] = {}
    for rep in reports:
        groups.setdefault((rep.method, rep.eta), []).append(rep)
    aggregates = [
        SweepAggregate(
            method=method,
            eta=eta,
            trials=len(reps),
            success_rate=sum(r.margin <= 0 for r in reps) / len(reps),
            mean_opt=sum(r.opt for r in reps) / len(reps),
            mean_error=sum(r.hypothesis_error for r in reps) / len(reps),
        )
        for (method, eta), reps in sorted(groups.items())
    ]
    return reports, aggregates


def write_csv(reports: Iterable[ErrorReport], path: str) -> None:
    with open(path, "w") as fh:
        fh.write(ErrorReport.csv_header() + "\n")
        for rep in reports:
            fh.write(rep.to_csv_row() + "\n")
