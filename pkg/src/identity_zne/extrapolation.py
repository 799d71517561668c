"""Extrapolation weights, polynomial fits and error budgets.

Weights are exact ``Fraction`` values; they only become floats when they
are combined with measured data.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .insertion import OperatorSet

MAX_RIIM_ORDER = 4


def richardson_weights(n_max: int) -> Tuple[Fraction, ...]:
    """``a(i) = prod_{j != i} (1 + 2j) / (2 (j - i))`` for ``i = 0..n_max``.

    ``sum_i a(i) <M>(1 + 2i)`` cancels depolarizing noise through
    ``eps^n_max``; the weights are the Lagrange basis at ``r = 0`` over the
    nodes ``r = 1, 3, ..., 1 + 2 n_max``.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    weights = []
    for i in range(n_max + 1):
        a = Fraction(1)
        for j in range(n_max + 1):
            if j != i:
                a *= Fraction(1 + 2 * j, 2 * (j - i))
        weights.append(a)
    return tuple(weights)


def _solve_exact(a: List[List[Fraction]], b: List[List[Fraction]]) -> List[List[Fraction]]:
    """Gauss-Jordan solve of ``a x = b`` over the rationals."""
    n = len(a)
    m = [list(row) + list(rhs) for row, rhs in zip(a, b)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            raise np.linalg.LinAlgError("singular system")
        m[col], m[pivot] = m[pivot], m[col]
        p = m[col][col]
        m[col] = [v / p for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [v - f * w for v, w in zip(m[r], m[col])]
    return [row[n:] for row in m]


def poly_weights(n_max: int, n_fit: int) -> Tuple[Fraction, ...]:
    """Effective weights of a degree-``n_fit`` least-squares fit in ``n``.

    The fit through ``(n, <M>(1 + 2n))`` for ``n = 0..n_max`` is evaluated at
    ``n = -1/2``; since that is linear in the data it equals
    ``sum_n w(n) <M>(1 + 2n)`` with the weights returned here.
    """
    if n_fit < 0 or n_max < 0:
        raise ValueError("n_fit and n_max must be non-negative")
    if n_fit > n_max:
        raise ValueError(f"n_fit={n_fit} needs at least {n_fit + 1} points, have {n_max + 1}")
    x = [[Fraction(n) ** i for i in range(n_fit + 1)] for n in range(n_max + 1)]
    xtx = [
        [sum(x[k][i] * x[k][j] for k in range(n_max + 1)) for j in range(n_fit + 1)]
        for i in range(n_fit + 1)
    ]
    xt = [[x[k][i] for k in range(n_max + 1)] for i in range(n_fit + 1)]
    pinv = _solve_exact(xtx, xt)
    target = [Fraction(-1, 2) ** i for i in range(n_fit + 1)]
    return tuple(
        sum(target[i] * pinv[i][n] for i in range(n_fit + 1)) for n in range(n_max + 1)
    )


def poly_fit_extrapolate(points: Sequence[Tuple[float, float]], n_fit: int) -> float:
    """Least-squares polynomial of degree ``n_fit`` in ``n``, read at ``n = -1/2``."""
    pts = [(float(n), float(v)) for n, v in points]
    ns = [n for n, _ in pts]
    if len(set(ns)) != len(ns):
        raise np.linalg.LinAlgError("duplicate n values make the fit singular")
    if len(pts) < n_fit + 1:
        raise ValueError(f"degree {n_fit} fit needs {n_fit + 1} points, got {len(pts)}")
    n_arr = np.array(ns)
    y = np.array([v for _, v in pts])
    # centre and scale n to keep the Vandermonde system well conditioned
    shift, scale = n_arr.mean(), max(np.ptp(n_arr), 1.0)
    design = np.vander((n_arr - shift) / scale, n_fit + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    at = (-0.5 - shift) / scale
    return float(np.polynomial.polynomial.polyval(at, coef))


# Each entry maps the number of CNOTs to the coefficient.
_TABLE: Dict[int, Dict[Tuple[int, ...], Callable[[int], Fraction]]] = {
    1: {(3,): lambda N: Fraction(-1, 2)},
    2: {
        (3,): lambda N: -Fraction(N + 4, 4),
        (5,): lambda N: Fraction(3, 8),
        (3, 3): lambda N: Fraction(1, 4),
    },
    3: {
        (3,): lambda N: -Fraction(N * N + 10 * N + 24, 16),
        (5,): lambda N: Fraction(3 * (N + 6), 16),
        (3, 3): lambda N: Fraction(N + 6, 8),
        (7,): lambda N: Fraction(-5, 16),
        (5, 3): lambda N: Fraction(-3, 16),
        (3, 3, 3): lambda N: Fraction(-1, 8),
    },
    4: {
        (3,): lambda N: -Fraction(N**3 + 18 * N**2 + 104 * N + 192, 96),
        (5,): lambda N: Fraction(3 * N * N + 32 * N + 154, 64),
        # constant term is 58: with 59 the linear order no longer cancels
        (3, 3): lambda N: Fraction(N * N + 14 * N + 58, 32),
        (7,): lambda N: Fraction(-45, 32),
        (5, 3): lambda N: -Fraction(3 * N + 29, 32),
        (3, 3, 3): lambda N: -Fraction(N + 8, 16),
        (9,): lambda N: Fraction(35, 128),
        (7, 3): lambda N: Fraction(0),
        (5, 5): lambda N: Fraction(29, 64),
        (5, 3, 3): lambda N: Fraction(3, 32),
        (3, 3, 3, 3): lambda N: Fraction(1, 16),
    },
}


@dataclass(frozen=True)
class RIIMCoefficientSet:
    """Coefficients ``a_S`` for the RIIM combination ``sum_S a_S O(S)``.

    ``O(S)`` is the sum of the observable over every placement of the
    operator set ``S``.  The empty set's coefficient follows from requiring
    the noiseless value to carry total weight one.
    """

    n_max: int
    n_cnots: int
    coefficients: Tuple[Tuple[OperatorSet, Fraction], ...]

    def __iter__(self):
        return iter(self.coefficients)

    def __getitem__(self, key) -> Fraction:
        if not isinstance(key, OperatorSet):
            key = OperatorSet(tuple(key))
        for s, a in self.coefficients:
            if s == key:
                return a
        raise KeyError(key)

    def as_dict(self) -> Dict[OperatorSet, Fraction]:
        return dict(self.coefficients)

    def placement_counts(self) -> Dict[OperatorSet, int]:
        return {s: s.placement_count(self.n_cnots) for s, _ in self.coefficients}

    @property
    def gate_budget(self) -> int:
        return self.n_cnots + 2 * self.n_max

    def per_circuit_weights(self) -> List[Fraction]:
        """Weight of every executed circuit in placement order."""
        return [a for s, a in self.coefficients for _ in range(s.placement_count(self.n_cnots))]


def riim_coefficients(n_max: int, n_cnots: int) -> RIIMCoefficientSet:
    """Coefficients through order ``n_max`` (1..4) for ``n_cnots`` CNOTs.

    The table entries hold for any ``n_cnots >= 1``.  No closed form is
    known beyond fourth order, so higher orders are rejected.
    """
    if not 1 <= n_max <= MAX_RIIM_ORDER:
        raise ValueError(f"RIIM coefficients are tabulated for n_max in 1..4, got {n_max}")
    if n_cnots < 1:
        raise ValueError(f"need at least one CNOT, got {n_cnots}")
    # sets with more entries than CNOTs have no placements and drop out
    coefs = [
        (OperatorSet(s), f(n_cnots)) for s, f in _TABLE[n_max].items() if len(s) <= n_cnots
    ]
    empty = 1 - sum(a * s.placement_count(n_cnots) for s, a in coefs)
    return RIIMCoefficientSet(n_max, n_cnots, tuple([(OperatorSet(()), empty)] + coefs))


def stat_error(weights: Iterable, n_meas: int) -> float:
    """Statistical error of ``sum_n a(n) <M>_n`` with unit per-shot variance."""
    if n_meas < 1:
        raise ValueError("n_meas must be >= 1")
    return math.sqrt(sum(float(a) ** 2 for a in weights)) / math.sqrt(n_meas)


def rescaled_stat_error(weights: Iterable, n_meas: int, per_circuit_std: Sequence[float]) -> float:
    """:func:`stat_error` with each term scaled by its circuit's shot spread."""
    weights = [float(a) for a in weights]
    if len(weights) != len(per_circuit_std):
        raise ValueError("need one standard deviation per weight")
    total = sum((a * s) ** 2 for a, s in zip(weights, per_circuit_std))
    return math.sqrt(total) / math.sqrt(n_meas)


def combined_error(eps: float, delta: float, n_max: int, weights: Iterable, n_meas: int) -> float:
    """Planning estimate ``max(delta, eps^(n_max+1), stat_error)``."""
    return max(abs(delta), abs(eps) ** (n_max + 1), stat_error(weights, n_meas))


def combine(weights: Sequence, values: Sequence[float]) -> float:
    if len(weights) != len(values):
        raise ValueError("weights and values differ in length")
    return float(sum(float(w) * v for w, v in zip(weights, values)))


def fiim_gate_budget(n_cnots: int, n_max: int) -> int:
    return (2 * n_max + 1) * n_cnots


def riim_gate_budget(n_cnots: int, n_max: int) -> int:
    return n_cnots + 2 * n_max


def linear_fit(xs: Sequence[float], ys: Sequence[float], errors: Sequence[float], at: float = 0.0):
    """Ordinary least-squares line with propagated per-point errors.

    Returns ``(value_at, value_error, slope, slope_error)`` where the
    errors come from the per-point standard errors, not the residuals.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    e = np.asarray(errors, dtype=float)
    if len(set(x.tolist())) < 2:
        raise ValueError("a line needs at least two distinct abscissae")
    dx = x - x.mean()
    sxx = dx @ dx
    c_slope = dx / sxx
    c_value = 1 / len(x) + (at - x.mean()) * c_slope
    return (
        float(c_value @ y),
        float(math.sqrt(np.sum((c_value * e) ** 2))),
        float(c_slope @ y),
        float(math.sqrt(np.sum((c_slope * e) ** 2))),
    )

