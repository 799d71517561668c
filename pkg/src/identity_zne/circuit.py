"""Gate-list circuits and the benchmark circuit builders.

Basis-state labels put qubit 0 in the most significant bit: ``|10>`` is
qubit 0 in ``|1>`` and qubit 1 in ``|0>``, i.e. integer label 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

X, Y, Z, H, RZ, RY, CPHASE, CNOT = "X", "Y", "Z", "H", "RZ", "RY", "CPHASE", "CNOT"

_ONE_QUBIT = {X, Y, Z, H, RZ, RY}
_TWO_QUBIT = {CPHASE, CNOT}
_PARAMETRIC = {RZ, RY, CPHASE}
_SELF_INVERSE = {X, Y, Z, H, CNOT}

_FIXED_MATRICES = {
    X: np.array([[0, 1], [1, 0]], dtype=complex),
    Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    Z: np.array([[1, 0], [0, -1]], dtype=complex),
    H: np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
    CNOT: np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
}


@dataclass(frozen=True)
class Gate:
    """A single gate.

    Two-qubit gates list their qubits as ``(control, target)``.  Angles are
    in radians; ``RZ(t) = exp(-i t Z / 2)``, ``RY(t) = exp(-i t Y / 2)`` and
    ``CPHASE(t) = diag(1, 1, 1, exp(i t))``.
    """

    name: str
    qubits: Tuple[int, ...]
    angle: Optional[float] = None

    def __post_init__(self):
        if self.name in _ONE_QUBIT:
            arity = 1
        elif self.name in _TWO_QUBIT:
            arity = 2
        else:
            raise ValueError(f"unknown gate {self.name!r}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(self.qubits) != arity:
            raise ValueError(f"{self.name} acts on {arity} qubit(s), got {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise ValueError(f"negative qubit index in {self.qubits}")
        if arity == 2 and self.qubits[0] == self.qubits[1]:
            raise ValueError(f"{self.name} control and target must differ")
        if self.name in _PARAMETRIC:
            if self.angle is None or not math.isfinite(self.angle):
                raise ValueError(f"{self.name} needs a finite angle")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise ValueError(f"{self.name} takes no angle")

    @property
    def is_cnot(self) -> bool:
        return self.name == CNOT

    def matrix(self) -> np.ndarray:
        """Matrix on ``self.qubits``; the first listed qubit is the high bit."""
        if self.name in _FIXED_MATRICES:
            return _FIXED_MATRICES[self.name].copy()
        t = self.angle
        if self.name == RZ:
            return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])
        if self.name == RY:
            c, s = math.cos(t / 2), math.sin(t / 2)
            return np.array([[c, -s], [s, c]], dtype=complex)
        return np.diag([1, 1, 1, np.exp(1j * t)])

    def adjoint(self) -> "Gate":
        if self.name in _SELF_INVERSE:
            return self
        return Gate(self.name, self.qubits, -self.angle)

    def __str__(self):
        fields = [str(q) for q in self.qubits]
        if self.angle is not None:
            fields.append(repr(self.angle))
        return f"{self.name} {','.join(fields)}"


def x(q):
    return Gate(X, (q,))


def y(q):
    return Gate(Y, (q,))


def z(q):
    return Gate(Z, (q,))


def h(q):
    return Gate(H, (q,))


def rz(q, angle):
    return Gate(RZ, (q,), angle)


def ry(q, angle):
    return Gate(RY, (q,), angle)


def cphase(control, target, angle):
    return Gate(CPHASE, (control, target), angle)


def cnot(control, target):
    return Gate(CNOT, (control, target))


@dataclass(frozen=True)
class Circuit:
    """Ordered, immutable gate list on ``num_qubits`` qubits."""

    num_qubits: int
    gates: Tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("a circuit needs at least one qubit")
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.qubits) >= self.num_qubits:
                raise ValueError(f"{g} addresses a qubit outside 0..{self.num_qubits - 1}")

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.num_qubits != self.num_qubits:
            raise ValueError("cannot concatenate circuits of different widths")
        return Circuit(self.num_qubits, self.gates + other.gates)

    def __mul__(self, times: int) -> "Circuit":
        return Circuit(self.num_qubits, self.gates * times)

    @property
    def cnot_count(self) -> int:
        return sum(1 for g in self.gates if g.is_cnot)

    def adjoint(self) -> "Circuit":
        return Circuit(self.num_qubits, [g.adjoint() for g in reversed(self.gates)])

    def unitary(self) -> np.ndarray:
        """Dense ``2^n x 2^n`` unitary of the ideal circuit."""
        dim = 2**self.num_qubits
        u = np.eye(dim, dtype=complex)
        for g in self.gates:
            u = embed(g, self.num_qubits) @ u
        return u

    def dumps(self) -> str:
        """One gate per line, ``NAME q[,q2][,angle]``."""
        return "".join(f"{g}\n" for g in self.gates)

    @classmethod
    def loads(cls, text: str, num_qubits: Optional[int] = None) -> "Circuit":
        gates = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                name, _, rest = line.partition(" ")
                fields = [f.strip() for f in rest.split(",")] if rest.strip() else []
                arity = 2 if name in _TWO_QUBIT else 1
                qubits = tuple(int(f) for f in fields[:arity])
                angle = float(fields[arity]) if len(fields) > arity else None
                if len(fields) > arity + 1:
                    raise ValueError("too many fields")
                gates.append(Gate(name, qubits, angle))
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {line!r}: {exc}") from None
        if num_qubits is None:
            num_qubits = 1 + max((max(g.qubits) for g in gates), default=0)
        return cls(num_qubits, gates)


def embed(gate: Gate, num_qubits: int) -> np.ndarray:
    """Lift ``gate`` to the full register (qubit 0 most significant)."""
    n = num_qubits
    u = gate.matrix()
    if len(gate.qubits) == 1:
        (q,) = gate.qubits
        ops = [np.eye(2)] * n
        ops[q] = u
        return reduce(np.kron, ops)
    # generic two-qubit placement through a tensor permutation
    a, b = gate.qubits
    others = [q for q in range(n) if q not in (a, b)]
    full = np.kron(u, np.eye(2 ** (n - 2)))
    order = [a, b] + others
    t = full.reshape([2] * (2 * n))
    inv = np.argsort(order)
    t = t.transpose(list(inv) + [n + i for i in inv])
    return t.reshape(2**n, 2**n)


def cnot_count(circuit: Circuit) -> int:
    return circuit.cnot_count


def cancel_adjacent_cnots(circuit: Circuit) -> Circuit:
    """Drop pairs of identical CNOTs with no gate on either qubit in between.

    Cancellation cascades: removing a pair can expose a new adjacent pair.
    """
    out = []
    for g in circuit.gates:
        if g.is_cnot:
            for idx in range(len(out) - 1, -1, -1):
                prev = out[idx]
                if set(prev.qubits) & set(g.qubits):
                    if prev == g:
                        del out[idx]
                        g = None
                    break
            if g is None:
                continue
        out.append(g)
    return Circuit(circuit.num_qubits, out)


def build_double_cnot() -> Circuit:
    """``CNOT(0->1)`` then ``CNOT(1->0)``; run from ``|00>``."""
    return Circuit(2, [cnot(0, 1), cnot(1, 0)])


def build_four_cnot() -> Circuit:
    """The double-CNOT pattern twice; run from ``|10>``, ends in ``|11>``."""
    return Circuit(2, [cnot(0, 1), cnot(1, 0), cnot(0, 1), cnot(1, 0)])


def decompose_cphase(control: int, target: int, angle: float) -> list:
    """CPHASE as two RZ, then CNOT-RZ-CNOT (exact up to a global phase)."""
    return [
        rz(control, angle / 2),
        rz(target, angle / 2),
        cnot(control, target),
        rz(target, -angle / 2),
        cnot(control, target),
    ]


def swap_gates(a: int, b: int) -> list:
    lo, hi = sorted((a, b))
    return [cnot(hi, lo), cnot(lo, hi), cnot(hi, lo)]


def build_qft(num_qubits: int, swap_first: bool = False) -> Circuit:
    """Quantum Fourier transform ``|j> -> sum_k exp(2 pi i j k / N) |k> / sqrt(N)``.

    Controlled phases are decomposed into CNOT/RZ and the final qubit
    reversal into 3-CNOT swaps, so two qubits cost 5 CNOTs.  With
    ``swap_first`` the reversal is done up front and the rotation layers act
    on the relabelled qubits; the unitary is the same.
    """
    if num_qubits < 1:
        raise ValueError("QFT needs at least one qubit")
    n = num_qubits
    relabel = (lambda q: n - 1 - q) if swap_first else (lambda q: q)
    body = []
    for i in range(n):
        body.append(h(relabel(i)))
        for j in range(i + 1, n):
            body.extend(decompose_cphase(relabel(j), relabel(i), math.pi / 2 ** (j - i)))
    swaps = []
    for i in range(n // 2):
        swaps.extend(swap_gates(i, n - 1 - i))
    gates = swaps + body if swap_first else body + swaps
    return Circuit(n, gates)


@dataclass(frozen=True)
class PositionGrid:
    """Discretised position/momentum grid for the harmonic oscillator.

    Positions run from ``-x_max`` to ``x_max`` in ``2^n`` points.  Momenta
    follow the QFT output order (``numpy.fft.fftfreq`` layout) with spacing
    ``2 pi / (2^n dx)``.
    """

    num_qubits: int = 2
    x_max: float = 3.0

    @property
    def size(self) -> int:
        return 2**self.num_qubits

    @property
    def dx(self) -> float:
        return 2 * self.x_max / (self.size - 1)

    @property
    def dp(self) -> float:
        return 2 * math.pi / (self.size * self.dx)

    @property
    def positions(self) -> np.ndarray:
        return -self.x_max + self.dx * np.arange(self.size)

    @property
    def momenta(self) -> np.ndarray:
        return self.dp * np.fft.fftfreq(self.size, d=1.0 / self.size)

    def position_hamiltonian(self) -> np.ndarray:
        return np.diag(self.positions**2 / 2).astype(complex)

    def momentum_hamiltonian(self) -> np.ndarray:
        f = build_qft(self.num_qubits).unitary()
        return f.conj().T @ np.diag(self.momenta**2 / 2) @ f

    def hamiltonian(self) -> np.ndarray:
        return self.position_hamiltonian() + self.momentum_hamiltonian()

    def ground_state_samples(self) -> np.ndarray:
        psi = np.exp(-self.positions**2 / 2)
        return psi / np.linalg.norm(psi)


def _require_two_qubits(grid: PositionGrid):
    if grid.num_qubits != 2:
        raise ValueError("only 2-qubit grids are supported")


def diagonal_phase_gates(phases: Sequence[float]) -> list:
    """Gates for ``diag(exp(-i phases))`` on two qubits, global phase dropped.

    The phases are expanded as ``c0 + c1 Z0 + c2 Z1 + c3 Z0 Z1``; the single-Z
    terms become RZ rotations and the ZZ term a CNOT-RZ-CNOT block, which
    ends in a CNOT so a following swap can cancel against it.
    """
    phases = np.asarray(phases, dtype=float)
    if phases.shape != (4,):
        raise ValueError("expected four phases")
    z0 = np.array([1, 1, -1, -1])
    z1 = np.array([1, -1, 1, -1])
    c1 = phases @ z0 / 4
    c2 = phases @ z1 / 4
    c3 = phases @ (z0 * z1) / 4
    return [rz(0, 2 * c1), rz(1, 2 * c2), cnot(1, 0), rz(0, 2 * c3), cnot(1, 0)]


def build_trotter_step(time_step: float, grid: Optional[PositionGrid] = None) -> Circuit:
    """One first-order Trotter step ``exp(-i H_p dt) exp(-i H_x dt)``.

    Position phases, then QFT, momentum phases, inverse QFT.  Before
    :func:`cancel_adjacent_cnots` the step holds 14 CNOTs, 10 after.
    """
    grid = grid or PositionGrid()
    _require_two_qubits(grid)
    if not math.isfinite(time_step):
        raise ValueError("time_step must be finite")
    gates = diagonal_phase_gates(grid.positions**2 / 2 * time_step)
    gates += build_qft(2, swap_first=True).gates
    gates += diagonal_phase_gates(grid.momenta**2 / 2 * time_step)
    gates += build_qft(2).adjoint().gates
    return Circuit(2, gates)


def build_state_prep(grid: Optional[PositionGrid] = None) -> Circuit:
    """Two-CNOT preparation of the sampled Gaussian from ``|00>``.

    RY on qubit 0 sets the weight of each half of the grid; the
    RY-CNOT-RY-CNOT pair on qubit 1 is a uniformly controlled RY.
    """
    grid = grid or PositionGrid()
    _require_two_qubits(grid)
    a = grid.ground_state_samples()
    theta = 2 * math.atan2(math.hypot(a[2], a[3]), math.hypot(a[0], a[1]))
    theta0 = 2 * math.atan2(a[1], a[0])
    theta1 = 2 * math.atan2(a[3], a[2])
    return Circuit(
        2,
        [
            ry(0, theta),
            cnot(0, 1),
            ry(1, (theta0 - theta1) / 2),
            cnot(0, 1),
            ry(1, (theta0 + theta1) / 2),
        ],
    )


def build_trotter_circuit(
    total_time: float, steps: int, grid: Optional[PositionGrid] = None
) -> Circuit:
    """State prep, ``steps`` Trotter steps, inverse prep; CNOTs cancelled.

    Measuring ``|00>`` gives the overlap with the initial Gaussian.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    grid = grid or PositionGrid()
    prep = build_state_prep(grid)
    step = build_trotter_step(total_time / steps, grid)
    return cancel_adjacent_cnots(prep + step * steps + prep.adjoint())


def concat(circuits: Iterable[Circuit]) -> Circuit:
    return reduce(lambda a, b: a + b, circuits)
