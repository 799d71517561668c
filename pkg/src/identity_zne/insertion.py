"""Identity insertion: fixed (FIIM) and random (RIIM) CNOT repetition."""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from .circuit import Circuit


@dataclass(frozen=True)
class InsertionPlan:
    """Odd repetition count for each CNOT of a circuit, in circuit order."""

    reps: Tuple[int, ...]

    def __post_init__(self):
        reps = tuple(int(r) for r in self.reps)
        for r in reps:
            if r < 1 or r % 2 == 0:
                raise ValueError(f"repetition counts must be odd and >= 1, got {r}")
        object.__setattr__(self, "reps", reps)

    def __len__(self):
        return len(self.reps)

    def __iter__(self):
        return iter(self.reps)

    def __str__(self):
        return ",".join(map(str, self.reps))

    @classmethod
    def parse(cls, text: str) -> "InsertionPlan":
        """Inverse of ``str``: ``"3,1,1,5"``."""
        try:
            return cls(tuple(int(f) for f in text.split(",") if f.strip()))
        except ValueError as exc:
            raise ValueError(f"bad plan {text!r}: {exc}") from None

    @classmethod
    def ones(cls, n_cnots: int) -> "InsertionPlan":
        return cls((1,) * n_cnots)

    @classmethod
    def uniform(cls, n_cnots: int, r: int) -> "InsertionPlan":
        return cls((r,) * n_cnots)

    @property
    def gate_count(self) -> int:
        return sum(self.reps)


@dataclass(frozen=True)
class OperatorSet:
    """Multiset of excess repetition counts ``{e_1, ..., e_k}`` (odd, >= 3).

    Stored sorted in descending order so equal multisets compare equal.
    """

    excess: Tuple[int, ...] = ()

    def __post_init__(self):
        excess = tuple(sorted((int(e) for e in self.excess), reverse=True))
        for e in excess:
            if e < 3 or e % 2 == 0:
                raise ValueError(f"operator-set entries must be odd and >= 3, got {e}")
        object.__setattr__(self, "excess", excess)

    def __len__(self):
        return len(self.excess)

    def __str__(self):
        return "{" + ",".join(map(str, self.excess)) + "}"

    @property
    def order(self) -> int:
        """Number of extra CNOT pairs, ``sum (e_i - 1) / 2``."""
        return sum(e - 1 for e in self.excess) // 2

    def placement_count(self, n_cnots: int) -> int:
        """``N! / (prod m_e! * (N - k)!)`` for multiplicities ``m_e``."""
        k = len(self.excess)
        if k > n_cnots:
            return 0
        count = math.factorial(n_cnots) // math.factorial(n_cnots - k)
        for m in Counter(self.excess).values():
            count //= math.factorial(m)
        return count


def apply_plan(circuit: Circuit, plan: InsertionPlan) -> Circuit:
    """Replace the i-th CNOT by ``plan.reps[i]`` consecutive copies."""
    if len(plan) != circuit.cnot_count:
        raise ValueError(
            f"plan has {len(plan)} entries but the circuit has {circuit.cnot_count} CNOTs"
        )
    reps = iter(plan.reps)
    gates = []
    for g in circuit.gates:
        if g.is_cnot:
            gates.extend([g] * next(reps))
        else:
            gates.append(g)
    return Circuit(circuit.num_qubits, gates)


def fiim_transform(circuit: Circuit, r: int) -> Circuit:
    """Fixed identity insertion: every CNOT repeated ``r`` times."""
    if r < 1 or r % 2 == 0:
        raise ValueError(f"r must be odd and >= 1, got {r}")
    return apply_plan(circuit, InsertionPlan.uniform(circuit.cnot_count, r))


def plan_gate_count(plan: InsertionPlan) -> int:
    return plan.gate_count


def _check_fits(n_cnots: int, opset: OperatorSet):
    if len(opset) > n_cnots:
        raise ValueError(f"{opset} needs {len(opset)} CNOTs, circuit has {n_cnots}")


def riim_random_plan(n_cnots: int, nu: float, seed) -> InsertionPlan:
    """``r_i = 1 + 2 n_i`` with i.i.d. ``n_i ~ Poisson(nu)``."""
    if not nu >= 0:
        raise ValueError(f"nu must be >= 0, got {nu}")
    rng = np.random.default_rng(seed)
    return InsertionPlan(tuple(1 + 2 * rng.poisson(nu, size=n_cnots)))


def iter_placements(n_cnots: int, opset: OperatorSet) -> Iterator[InsertionPlan]:
    """Every distinct way to put the multiset on distinct CNOT positions.

    Equal values are interchangeable; unused positions get ``r = 1``.
    """
    _check_fits(n_cnots, opset)
    groups = sorted(Counter(opset.excess).items(), reverse=True)

    def place(free: Tuple[int, ...], gi: int, reps: List[int]):
        if gi == len(groups):
            yield InsertionPlan(tuple(reps))
            return
        value, mult = groups[gi]
        for chosen in itertools.combinations(free, mult):
            for p in chosen:
                reps[p] = value
            rest = tuple(p for p in free if p not in chosen)
            yield from place(rest, gi + 1, reps)
            for p in chosen:
                reps[p] = 1

    yield from place(tuple(range(n_cnots)), 0, [1] * n_cnots)


def enumerate_placements(n_cnots: int, opset: OperatorSet) -> List[InsertionPlan]:
    return list(iter_placements(n_cnots, opset))


def sample_placement(n_cnots: int, opset: OperatorSet, seed) -> InsertionPlan:
    """Uniform draw from :func:`enumerate_placements` without listing them.

    Every placement of a multiset is hit by the same number of ordered
    position tuples, so drawing distinct positions uniformly is enough.
    """
    _check_fits(n_cnots, opset)
    rng = np.random.default_rng(seed)
    reps = [1] * n_cnots
    positions = rng.choice(n_cnots, size=len(opset), replace=False)
    for p, e in zip(positions, opset.excess):
        reps[p] = e
    return InsertionPlan(tuple(reps))


def operator_sets(order: int) -> List[OperatorSet]:
    """All multisets with ``sum (e_i - 1) = 2 * order`` (integer partitions)."""

    def partitions(n, largest):
        if n == 0:
            yield ()
            return
        for part in range(min(n, largest), 0, -1):
            for rest in partitions(n - part, part):
                yield (part,) + rest

    return [OperatorSet(tuple(2 * p + 1 for p in parts)) for parts in partitions(order, order)]


def max_gate_count(plans: Sequence[InsertionPlan]) -> int:
    return max(p.gate_count for p in plans)
