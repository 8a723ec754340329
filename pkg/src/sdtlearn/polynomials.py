"""Sparse multilinear polynomials over boolean inputs.

A polynomial is a map from monomials (sorted tuples of variable indices)
to real coefficients.  On x in {0,1}^n a monomial evaluates to the AND of
its variables, so every function {0,1}^n -> R has a unique multilinear
representation.  Degree-bounded instances of this class are the
hypothesis space for both regression learners.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence, Tuple

import numpy as np

Monomial = Tuple[int, ...]


def trunc(t: float) -> float:
    """Clamp a real number to the unit interval."""
    if t < 0.0:
        return 0.0
    if t > 1.0:
        return 1.0
    return float(t)


def trunc_array(values: np.ndarray) -> np.ndarray:
    return np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0)


def monomials(n: int, d: int) -> list[Monomial]:
    """All monomials over n variables of degree at most d, by (size, lex)."""
    out: list[Monomial] = []
    for k in range(min(n, d) + 1):
        out.extend(combinations(range(n), k))
    return out


def feature_count(n: int, d: int) -> int:
    return sum(math.comb(n, k) for k in range(min(n, d) + 1))


@dataclass(frozen=True)
class MultilinearPolynomial:
    """A degree-bounded multilinear polynomial in n boolean variables.

    ``coeffs`` maps sorted index tuples to coefficients; the empty tuple
    is the constant term.  Instances are immutable value objects.
    """

    n: int
    d: int
    coeffs: Mapping[Monomial, float]

    def __post_init__(self) -> None:
        if self.n < 0 or self.d < 0:
            raise ValueError("n and d must be nonnegative")
        clean: dict[Monomial, float] = {}
        for mono, c in self.coeffs.items():
            mono = tuple(mono)
            if list(mono) != sorted(set(mono)):
                raise ValueError(f"monomial {mono} is not a sorted set of indices")
            if len(mono) > self.d:
                raise ValueError(f"monomial {mono} exceeds degree bound {self.d}")
            if mono and (mono[0] < 0 or mono[-1] >= self.n):
                raise ValueError(f"monomial {mono} out of range for n={self.n}")
            clean[mono] = float(c)
        object.__setattr__(self, "coeffs", clean)

    @property
    def degree(self) -> int:
        return max((len(m) for m in self.coeffs), default=0)

    def evaluate(self, x: Sequence[int]) -> float:
        if len(x) != self.n:
            raise ValueError(f"input has length {len(x)}, expected {self.n}")
        total = 0.0
        for mono, c in self.coeffs.items():
            if all(x[i] for i in mono):
                total += c
        return total

    def evaluate_packed(self, zs: np.ndarray) -> np.ndarray:
        """Evaluate on packed inputs, where bit i of z is variable i."""
        zs = np.asarray(zs, dtype=np.int64)
        out = np.zeros(zs.shape, dtype=np.float64)
        for mono, c in self.coeffs.items():
            mask = 0
            for i in mono:
                mask |= 1 << i
            out += c * ((zs & mask) == mask)
        return out


def dump_polynomial(poly: MultilinearPolynomial) -> str:
    """Serialize as one `i,j,k:coeff` line per monomial (constant term has
    an empty index list).  `repr` of the coefficient round-trips exactly."""
    lines = [f"n={poly.n} d={poly.d}"]
    for mono in sorted(poly.coeffs, key=lambda m: (len(m), m)):
        lines.append(f"{','.join(str(i) for i in mono)}:{poly.coeffs[mono]!r}")
    return "\n".join(lines) + "\n"


def load_polynomial(text: str) -> MultilinearPolynomial:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = lines[0].split()
    n = int(header[0].removeprefix("n="))
    d = int(header[1].removeprefix("d="))
    coeffs: dict[Monomial, float] = {}
    for ln in lines[1:]:
        idx_part, coeff_part = ln.rsplit(":", 1)
        mono = tuple(int(i) for i in idx_part.split(",")) if idx_part else ()
        coeffs[mono] = float(coeff_part)
    return MultilinearPolynomial(n, d, coeffs)
