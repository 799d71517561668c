"""Zero-noise estimates from simulated FIIM and RIIM runs."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .circuit import Circuit
from .extrapolation import (
    combine,
    fiim_gate_budget,
    linear_fit,
    poly_fit_extrapolate,
    poly_weights,
    riim_coefficients,
)
from .insertion import InsertionPlan, apply_plan, fiim_transform, iter_placements, sample_placement
from .simulator import NoiseModel, Observable, evolve, expectation, sample_shots


@dataclass(frozen=True)
class Sampled:
    """Finite-shot execution.

    ``n_circuits`` bounds the number of RIIM placement circuits actually
    run (shared between operator sets in proportion to their placement
    counts); ``None`` runs one draw per placement.
    """

    seed: int
    n_meas: int
    n_circuits: Optional[int] = None

    def __post_init__(self):
        if self.n_meas < 1:
            raise ValueError("n_meas must be >= 1")


Mode = Optional[Sampled]  # None means exact expectation values


@dataclass(frozen=True)
class ZNEEstimate:
    value: float
    weights: Tuple[float, ...]
    stat_error: float
    gate_budget: int
    values: Tuple[float, ...] = ()
    errors: Tuple[float, ...] = ()


@dataclass(frozen=True)
class PoissonEstimate(ZNEEstimate):
    nus: Tuple[float, ...] = ()
    slope: float = math.nan
    slope_error: float = math.nan


def child_seed(seed: int, *path: int) -> int:
    """Deterministic sub-seed; independent of evaluation order."""
    return int(np.random.SeedSequence([seed, *path]).generate_state(1)[0])


class _Runner:
    """Evaluates circuits exactly or with shots; caches exact values."""

    def __init__(self, obs: Observable, noise: NoiseModel, init):
        self.obs, self.noise, self.init = obs, noise, init
        self._cache: Dict[Circuit, np.ndarray] = {}

    def state(self, circuit: Circuit) -> np.ndarray:
        rho = self._cache.get(circuit)
        if rho is None:
            rho = self._cache[circuit] = evolve(circuit, self.init, self.noise)
        return rho

    def exact(self, circuit: Circuit) -> float:
        return expectation(self.state(circuit), self.obs)

    def measure(self, circuit: Circuit, mode: Mode, seed: Optional[int] = None):
        """``(mean, std_error, per-shot std)``; errors are zero when exact."""
        if mode is None:
            return self.exact(circuit), 0.0, 0.0
        return tuple(sample_shots(self.state(circuit), self.obs, mode.n_meas, seed))


def fiim_estimate(
    circuit: Circuit,
    obs: Observable,
    noise: NoiseModel,
    n_max: int,
    n_fit: Optional[int] = None,
    mode: Mode = None,
    init: Union[int, str] = 0,
) -> ZNEEstimate:
    """Run ``r = 1, 3, ..., 1 + 2 n_max`` and extrapolate to ``r = 0``.

    Args:
        circuit: Base circuit.
        obs: Diagonal observable.
        noise: CNOT noise model.
        n_max: Largest insertion count ``n``.
        n_fit: Polynomial degree; defaults to ``n_max`` (Richardson).
        mode: ``None`` for exact values or :class:`Sampled` for shots.
        init: Initial basis state.
    """
    n_fit = n_max if n_fit is None else n_fit
    weights = tuple(float(w) for w in poly_weights(n_max, n_fit))
    runner = _Runner(obs, noise, init)
    values, errors = [], []
    for n in range(n_max + 1):
        seed = None if mode is None else child_seed(mode.seed, n)
        mean, err, _ = runner.measure(fiim_transform(circuit, 1 + 2 * n), mode, seed)
        values.append(mean)
        errors.append(err)
    value = poly_fit_extrapolate(list(enumerate(values)), n_fit)
    stat = math.sqrt(sum((w * e) ** 2 for w, e in zip(weights, errors)))
    return ZNEEstimate(
        value, weights, stat, fiim_gate_budget(circuit.cnot_count, n_max), tuple(values), tuple(errors)
    )


def _draw_counts(counts: Sequence[int], budget: int) -> List[int]:
    total = sum(counts)
    return [max(1, round(budget * c / total)) for c in counts]


def riim_estimate(
    circuit: Circuit,
    obs: Observable,
    noise: NoiseModel,
    n_max: int,
    mode: Mode = None,
    init: Union[int, str] = 0,
) -> ZNEEstimate:
    """Combine operator-set sums with the RIIM coefficients of order ``n_max``.

    In exact mode every placement is simulated.  In sampled mode each
    operator set gets a share of random placements proportional to its
    placement count; ``O(S)`` is estimated as count times the mean.

    ``weights`` and ``values`` are per operator set (empty set first), with
    ``values`` holding ``O(S)``.
    """
    n_cnots = circuit.cnot_count
    coefs = riim_coefficients(n_max, n_cnots)
    runner = _Runner(obs, noise, init)
    sets = [s for s, _ in coefs]
    weights = tuple(float(a) for _, a in coefs)
    counts = [s.placement_count(n_cnots) for s in sets]
    sums, variances = [], []
    if mode is None:
        for s in sets:
            sums.append(sum(runner.exact(apply_plan(circuit, p)) for p in iter_placements(n_cnots, s)))
            variances.append(0.0)
    else:
        draws = _draw_counts(counts, mode.n_circuits or sum(counts))
        for si, (s, count, k) in enumerate(zip(sets, counts, draws)):
            means, shot_vars = [], []
            for d in range(k):
                plan = sample_placement(n_cnots, s, child_seed(mode.seed, si, d, 0))
                m, err, _ = runner.measure(apply_plan(circuit, plan), mode, child_seed(mode.seed, si, d, 1))
                means.append(m)
                shot_vars.append(err**2)
            var_mean = np.var(means, ddof=1) / k if k > 1 else shot_vars[0]
            sums.append(count * float(np.mean(means)))
            variances.append(count**2 * float(var_mean))
    value = combine(weights, sums)
    stat = math.sqrt(sum(w * w * v for w, v in zip(weights, variances)))
    return ZNEEstimate(
        value, weights, stat, coefs.gate_budget, tuple(sums), tuple(math.sqrt(v) for v in variances)
    )


def riim_poisson_estimate(
    circuit: Circuit,
    obs: Observable,
    noise: NoiseModel,
    nu_values: Sequence[float],
    n_plans: int,
    seed: int,
    n_meas: Optional[int] = None,
    init: Union[int, str] = 0,
) -> PoissonEstimate:
    """Poisson-randomised insertion, linear in ``rho = 1 + 2 nu``, read at ``rho = 0``.

    Each plan is simulated exactly unless ``n_meas`` is given.  Point errors
    are standard errors of the mean over plans, and propagate linearly into
    the intercept and slope.
    """
    nus = [float(v) for v in nu_values]
    if len(set(nus)) < 2:
        raise ValueError("need at least two distinct nu values")
    if n_plans < 1:
        raise ValueError("n_plans must be >= 1")
    mode = None if n_meas is None else Sampled(seed, n_meas)
    runner = _Runner(obs, noise, init)
    n_cnots = circuit.cnot_count
    means, errors, budget = [], [], 0
    for k, nu in enumerate(nus):
        rng = np.random.default_rng(child_seed(seed, k))
        draws = 1 + 2 * rng.poisson(nu, size=(n_plans, n_cnots))
        budget = max(budget, int(draws.sum(axis=1).max()))
        vals = []
        for d, reps in enumerate(draws):
            c = apply_plan(circuit, InsertionPlan(tuple(reps)))
            shot_seed = None if mode is None else child_seed(seed, k, d)
            vals.append(runner.measure(c, mode, shot_seed)[0])
        means.append(float(np.mean(vals)))
        errors.append(float(np.std(vals, ddof=1) / math.sqrt(n_plans)) if n_plans > 1 else 0.0)
    rhos = [1 + 2 * nu for nu in nus]
    value, value_err, slope, slope_err = linear_fit(rhos, means, errors, at=0.0)
    x = np.asarray(rhos)
    dx = x - x.mean()
    weights = tuple(float(w) for w in 1 / len(x) - x.mean() * dx / (dx @ dx))
    return PoissonEstimate(
        value,
        weights,
        value_err,
        budget,
        tuple(means),
        tuple(errors),
        nus=tuple(nus),
        slope=slope,
        slope_error=slope_err,
    )
