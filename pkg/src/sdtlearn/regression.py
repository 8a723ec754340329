"""Low-degree polynomial regression learners and their hypotheses.

Both learners fit a degree-bounded multilinear polynomial to labeled
rows: ``l2_regress`` minimizes mean squared error (least squares on the
monomial feature expansion), ``l1_regress`` minimizes mean absolute
error (a linear program via the standard slack-variable split).  Rows
are grouped by distinct (input, label) pairs with integer weights first,
which leaves both optima unchanged and keeps the solves small.

Hypotheses clamp the fitted polynomial to [0,1]; the rounded mode
thresholds at one half, the randomized mode outputs 1 with the clamped
probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Literal, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .polynomials import (
    MultilinearPolynomial,
    feature_count,
    monomials,
    trunc,
    trunc_array,
)
from .trees import pack_inputs

if TYPE_CHECKING:
    from .data import Dataset

DEFAULT_FEATURE_CAP = 20_000

#: Absolute tolerance for the L1 optimality certificate.
L1_CERTIFICATE_TOL = 1e-9


class FeatureBudgetExceeded(Exception):
    """The monomial basis would be larger than the configured cap."""


class L1SolverError(Exception):
    """The LP solver failed; ``incumbent`` carries the best fallback if any."""

    def __init__(self, message: str, incumbent: MultilinearPolynomial | None = None):
        super().__init__(message)
        self.incumbent = incumbent


def _check_feature_budget(n: int, d: int, cap: int) -> None:
    count = feature_count(n, d)
    if count > cap:
        raise FeatureBudgetExceeded(
            f"degree {d} over {n} variables needs {count} features, cap is {cap}"
        )


def _grouped_rows(dataset: "Dataset") -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distinct (input, label) pairs with multiplicities."""
    zs = pack_inputs(dataset.xs)
    keys = zs * 2 + dataset.ys
    uniq, counts = np.unique(keys, return_counts=True)
    return uniq >> 1, (uniq & 1).astype(np.float64), counts.astype(np.float64)


def _design_matrix(zs: np.ndarray, monos: list[tuple[int, ...]]) -> np.ndarray:
    phi = np.empty((zs.size, len(monos)), dtype=np.float64)
    for j, mono in enumerate(monos):
        mask = 0
        for i in mono:
            mask |= 1 << i
        phi[:, j] = (zs & mask) == mask
    return phi


def _to_poly(n: int, d: int, monos: list[tuple[int, ...]], beta: np.ndarray) -> MultilinearPolynomial:
    coeffs = {mono: float(b) for mono, b in zip(monos, beta) if b != 0.0}
    return MultilinearPolynomial(n, d, coeffs)


def l2_regress(dataset: "Dataset", d: int, feature_cap: int = DEFAULT_FEATURE_CAP) -> MultilinearPolynomial:
    """Least-squares fit over degree-<= d monomials (minimum-norm on ties)."""
    if d > dataset.n:
        raise ValueError(f"degree {d} exceeds the variable count {dataset.n}")
    _check_feature_budget(dataset.n, d, feature_cap)
    monos = monomials(dataset.n, d)
    zs, ys, w = _grouped_rows(dataset)
    phi = _design_matrix(zs, monos)
    sw = np.sqrt(w)
    beta, *_ = np.linalg.lstsq(phi * sw[:, None], ys * sw, rcond=None)
    return _to_poly(dataset.n, d, monos, beta)


def l1_objective(poly: MultilinearPolynomial, dataset: "Dataset") -> float:
    """Mean absolute error of the polynomial against the dataset labels."""
    preds = poly.evaluate_packed(pack_inputs(dataset.xs))
    return float(np.mean(np.abs(preds - dataset.ys)))


def l2_objective(poly: MultilinearPolynomial, dataset: "Dataset") -> float:
    preds = poly.evaluate_packed(pack_inputs(dataset.xs))
    return float(np.mean((preds - dataset.ys) ** 2))


def l1_regress(dataset: "Dataset", d: int, feature_cap: int = DEFAULT_FEATURE_CAP) -> MultilinearPolynomial:
    """Least-absolute-deviations fit over degree-<= d monomials.

    Solved exactly as the LP  min sum_i w_i t_i  s.t.  -t <= phi b - y <= t.
    The result is certified against the least-squares solution: its L1
    objective must not exceed that feasible candidate's.
    """
    if d > dataset.n:
        raise ValueError(f"degree {d} exceeds the variable count {dataset.n}")
    _check_feature_budget(dataset.n, d, feature_cap)
    monos = monomials(dataset.n, d)
    zs, ys, w = _grouped_rows(dataset)
    phi = _design_matrix(zs, monos)
    g, f = phi.shape

    phi_s = sp.csr_matrix(phi)
    eye = sp.identity(g, format="csr")
    a_ub = sp.vstack([sp.hstack([phi_s, -eye]), sp.hstack([-phi_s, -eye])], format="csr")
    b_ub = np.concatenate([ys, -ys])
    c = np.concatenate([np.zeros(f), w])
    bounds = [(None, None)] * f + [(0, None)] * g

    res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not res.success:
        raise L1SolverError(f"LP solver failed: {res.message}", incumbent=None)
    poly = _to_poly(dataset.n, d, monos, res.x[:f])

    reference = l2_regress(dataset, d, feature_cap)
    if l1_objective(poly, dataset) > l1_objective(reference, dataset) + L1_CERTIFICATE_TOL:
        raise L1SolverError(
            "LP result is worse than the least-squares candidate", incumbent=poly
        )
    return poly


HypothesisMode = Literal["rounded", "randomized"]


@dataclass(frozen=True)
class TruncatedPolyHypothesis:
    """A fitted polynomial used as a classifier.

    rounded: predict round(trunc(p(x))), deterministically.
    randomized: predict 1 with probability trunc(p(x)).
    """

    poly: MultilinearPolynomial
    mode: HypothesisMode

    def __post_init__(self) -> None:
        if self.mode not in ("rounded", "randomized"):
            raise ValueError(f"unknown hypothesis mode {self.mode!r}")

    def clamped(self, x: Sequence[int]) -> float:
        return trunc(self.poly.evaluate(x))

    def clamped_packed(self, zs: np.ndarray) -> np.ndarray:
        return trunc_array(self.poly.evaluate_packed(zs))


def predict(
    hypothesis: TruncatedPolyHypothesis,
    x: Sequence[int],
    rng: np.random.Generator | None = None,
) -> int:
    q = hypothesis.clamped(x)
    if hypothesis.mode == "rounded":
        return int(q >= 0.5)
    if rng is None:
        raise ValueError("randomized prediction needs an rng")
    return int(rng.random() < q)


def degree_budget(s: int, eps: float) -> int:
    """ceil(log2(size / eps)), guarded against float slop on exact powers."""
    if s < 1 or not 0.0 < eps:
        raise ValueError("need size >= 1 and eps > 0")
    return max(0, math.ceil(math.log2(s / eps) - 1e-12))


def learn_l2_pipeline(
    dataset: "Dataset", s: int, eps: float, feature_cap: int = DEFAULT_FEATURE_CAP
) -> TruncatedPolyHypothesis:
    d = min(degree_budget(s, eps), dataset.n)
    return TruncatedPolyHypothesis(l2_regress(dataset, d, feature_cap), "rounded")


def learn_l1_pipeline(
    dataset: "Dataset", s: int, eps: float, feature_cap: int = DEFAULT_FEATURE_CAP
) -> TruncatedPolyHypothesis:
    d = min(degree_budget(s, eps), dataset.n)
    return TruncatedPolyHypothesis(l1_regress(dataset, d, feature_cap), "randomized")
