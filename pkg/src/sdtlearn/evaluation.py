"""Exact and Monte Carlo error measurement, plus guarantee accounting.

For n up to the enumeration cap every quantity here is computed exactly
by enumerating {0,1}^n: the Bayes error, the classification error of a
hypothesis against the target tree, and the mean-square/mean-absolute
distances used by the regression guarantees.  Randomized hypotheses are
integrated out in closed form rather than sampled.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Union

import numpy as np

from .regression import TruncatedPolyHypothesis
from .trees import StochasticTree, mean_vector, pack_inputs, sample

Hypothesis = Union[StochasticTree, TruncatedPolyHypothesis]

DEFAULT_ENUMERATION_CAP = 24


def _check_cap(n: int, cap: int) -> None:
    if n > cap:
        raise ValueError(
            f"exact enumeration over n={n} exceeds the cap {cap}; use mc_error instead"
        )


def exact_opt(tree: StochasticTree, cap: int = DEFAULT_ENUMERATION_CAP) -> float:
    """Bayes error: the exact average of min(mu, 1 - mu) over all inputs."""
    _check_cap(tree.n, cap)
    mu = mean_vector(tree)
    return float(np.mean(np.minimum(mu, 1.0 - mu)))


def hypothesis_mean_vector(hypothesis: Hypothesis, n: int) -> np.ndarray:
    """Pr[hypothesis outputs 1] over all 2^n inputs."""
    if isinstance(hypothesis, StochasticTree):
        if hypothesis.n != n:
            raise ValueError(f"hypothesis is over {hypothesis.n} variables, expected {n}")
        return mean_vector(hypothesis)
    if hypothesis.poly.n != n:
        raise ValueError(f"hypothesis is over {hypothesis.poly.n} variables, expected {n}")
    zs = np.arange(1 << n, dtype=np.int64)
    q = hypothesis.clamped_packed(zs)
    if hypothesis.mode == "rounded":
        return (q >= 0.5).astype(np.float64)
    return q


def exact_error(
    tree: StochasticTree, hypothesis: Hypothesis, cap: int = DEFAULT_ENUMERATION_CAP
) -> float:
    """Exact disagreement probability E_x Pr[tree(x) != hypothesis(x)].

    Uses q(1-mu) + (1-q)mu per input, where q is the hypothesis's own
    output probability; hypothesis randomness is never sampled.
    """
    _check_cap(tree.n, cap)
    mu = mean_vector(tree)
    q = hypothesis_mean_vector(hypothesis, tree.n)
    return float(np.mean(q + mu - 2.0 * q * mu))


def mc_error(
    tree: StochasticTree,
    hypothesis: Hypothesis,
    trials: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Monte Carlo disagreement estimate with its standard error."""
    if trials < 1:
        raise ValueError("need at least one trial")
    xs = rng.integers(0, 2, size=(trials, tree.n), dtype=np.uint8)
    y_true = np.fromiter((sample(tree, row, rng) for row in xs), dtype=np.uint8, count=trials)
    if isinstance(hypothesis, StochasticTree):
        y_hyp = np.fromiter(
            (sample(hypothesis, row, rng) for row in xs), dtype=np.uint8, count=trials
        )
    else:
        q = hypothesis.clamped_packed(pack_inputs(xs))
        if hypothesis.mode == "rounded":
            y_hyp = (q >= 0.5).astype(np.uint8)
        else:
            y_hyp = (rng.random(trials) < q).astype(np.uint8)
    estimate = float(np.mean(y_true != y_hyp))
    stderr = float(np.sqrt(max(estimate * (1.0 - estimate), 1e-12) / trials))
    return estimate, stderr


def guarantee_bound(method: str, opt: float, eta: float, eps: float) -> float:
    """The error level each learner is promised not to exceed."""
    if method == "find":
        return opt + 2.0 * eta + eps
    if method == "l2":
        return opt + 2.0 * np.sqrt(3.0 * eps + 2.0 * eta) + eps
    if method == "l1":
        return 2.0 * opt + 2.0 * eta + eps
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class ErrorReport:
    """One experiment's guarantee accounting; negative margin means the
    guarantee held."""

    method: str
    n: int
    s: int
    m: int
    eta: float
    eps: float
    seed: int
    adversary: str
    depth_budget: int | None
    degree_budget: int | None
    opt: float
    hypothesis_error: float
    bound: float
    margin: float
    error_estimation: str = "exact"

    def __post_init__(self) -> None:
        if not 0.0 <= self.opt <= 0.5 + 1e-12:
            raise ValueError(f"opt={self.opt} outside [0, 1/2]")
        if not 0.0 <= self.hypothesis_error <= 1.0 + 1e-12:
            raise ValueError(f"hypothesis_error={self.hypothesis_error} outside [0, 1]")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    CSV_FIELDS = (
        "method", "n", "s", "m", "eta", "eps", "seed", "adversary",
        "depth_budget", "degree_budget", "opt", "hypothesis_error",
        "bound", "margin", "error_estimation",
    )

    def to_csv_row(self) -> str:
        values = asdict(self)
        cells = []
        for f in self.CSV_FIELDS:
            v = values[f]
            if v is None:
                cells.append("")
            elif isinstance(v, float):
                cells.append(repr(v))
            else:
                cells.append(str(v))
        return ",".join(cells)

    @staticmethod
    def csv_header() -> str:
        return ",".join(ErrorReport.CSV_FIELDS)


def guarantee_margin(
    *,
    method: str,
    tree_opt: float,
    hypothesis_error: float,
    eta: float,
    eps: float,
    n: int,
    s: int,
    m: int,
    seed: int,
    adversary: str,
    depth_budget: int | None = None,
    degree_budget: int | None = None,
    error_estimation: str = "exact",
) -> ErrorReport:
    bound = float(guarantee_bound(method, tree_opt, eta, eps))
    return ErrorReport(
        method=method,
        n=n,
        s=s,
        m=m,
        eta=eta,
        eps=eps,
        seed=seed,
        adversary=adversary,
        depth_budget=depth_budget,
        degree_budget=degree_budget,
        opt=tree_opt,
        hypothesis_error=hypothesis_error,
        bound=bound,
        margin=hypothesis_error - bound,
        error_estimation=error_estimation,
    )
