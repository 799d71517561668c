"""Exact density-matrix evolution with noisy CNOTs, and shot sampling.

Density matrices are plain ``numpy`` arrays of shape ``(2^n, 2^n)``.  Only
CNOT gates carry noise; every other gate is applied as an ideal unitary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .circuit import Circuit, Gate, embed

PAULI_LABELS = "IXYZ"

# bit 0: Pauli flips the qubit (X, Y); bit 1: Pauli carries a Z sign (Y, Z)
_FLIPS = (False, True, True, False)
_SIGNS = (False, False, True, True)


class ChannelError(ValueError):
    """Raised for noise parameters that do not define a valid channel."""


@dataclass(frozen=True)
class PauliNoiseSpec:
    """Two-qubit Pauli error weights ``eps[i][j]`` for ``sigma_i (x) sigma_j``.

    The noisy CNOT maps ``rho`` to::

        (1 - sum(eps) / 16) U rho U + sum_ij eps_ij / 16 s_i s_j rho s_i s_j

    with ``s_i`` acting on the control and ``s_j`` on the target.  Indices
    run over ``I, X, Y, Z``.
    """

    eps: Tuple[Tuple[float, ...], ...]

    def __post_init__(self):
        arr = np.asarray(self.eps, dtype=float)
        if arr.shape != (4, 4):
            raise ChannelError(f"expected a 4x4 table of Pauli weights, got {arr.shape}")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ChannelError("Pauli weights must be finite and non-negative")
        if arr.sum() / 16 > 1 + 1e-12:
            raise ChannelError(f"total error weight {arr.sum() / 16:.6g} exceeds 1")
        object.__setattr__(self, "eps", tuple(tuple(float(v) for v in row) for row in arr))

    @classmethod
    def depolarizing(cls, eps: float) -> "PauliNoiseSpec":
        """All 16 weights equal: ``(1-eps) U rho U + eps I/4 (x) rho_rest``."""
        return cls(tuple((eps,) * 4 for _ in range(4)))

    @classmethod
    def noiseless(cls) -> "PauliNoiseSpec":
        return cls.depolarizing(0.0)

    def perturbed(self, pair: Union[str, Tuple[int, int]], delta: float) -> "PauliNoiseSpec":
        """Copy with ``delta`` added to one entry, e.g. ``pair="XI"``."""
        i, j = _pair_index(pair)
        arr = np.array(self.eps)
        arr[i, j] += delta
        return PauliNoiseSpec(arr)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.eps)

    @property
    def total(self) -> float:
        return float(np.sum(self.eps)) / 16

    @property
    def is_zero(self) -> bool:
        return not any(any(row) for row in self.eps)


def _pair_index(pair) -> Tuple[int, int]:
    if isinstance(pair, str):
        if len(pair) != 2 or any(c not in PAULI_LABELS for c in pair.upper()):
            raise ValueError(f"bad Pauli pair {pair!r}")
        return PAULI_LABELS.index(pair[0].upper()), PAULI_LABELS.index(pair[1].upper())
    i, j = pair
    return int(i), int(j)


@dataclass(frozen=True)
class Relaxation:
    """Thermal relaxation applied to every qubit after each CNOT."""

    t1: float = 50e-6
    t2: float = 70e-6
    gate_duration: float = 300e-9

    def __post_init__(self):
        _check_times(self.t1, self.t2, self.gate_duration)


def _check_times(t1, t2, duration):
    if not (t1 > 0 and t2 > 0):
        raise ChannelError("t1 and t2 must be positive")
    if duration < 0 or math.isnan(duration):
        raise ChannelError("duration must be non-negative")
    if t2 > 2 * t1:
        raise ChannelError(f"t2={t2} exceeds 2*t1={2 * t1}")


@dataclass(frozen=True)
class NoiseModel:
    """CNOT noise for a circuit.

    ``cnot`` applies to every CNOT unless ``pairs`` has an entry for the
    gate's ``(control, target)``.  Keying by qubit pair keeps the assignment
    stable when identity insertion duplicates gates.
    """

    cnot: PauliNoiseSpec = field(default_factory=PauliNoiseSpec.noiseless)
    pairs: Mapping[Tuple[int, int], PauliNoiseSpec] = field(default_factory=dict)
    relaxation: Optional[Relaxation] = None

    @classmethod
    def depolarizing(cls, eps: float, relaxation: Optional[Relaxation] = None) -> "NoiseModel":
        return cls(PauliNoiseSpec.depolarizing(eps), relaxation=relaxation)

    @classmethod
    def noiseless(cls) -> "NoiseModel":
        return cls()

    def spec_for(self, control: int, target: int) -> PauliNoiseSpec:
        return self.pairs.get((control, target), self.cnot)

    @property
    def is_noiseless(self) -> bool:
        return (
            self.cnot.is_zero
            and all(s.is_zero for s in self.pairs.values())
            and self.relaxation is None
        )


@dataclass(frozen=True)
class Observable:
    """Diagonal observable: one real weight per computational basis state."""

    weights: Tuple[float, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size < 2 or w.size & (w.size - 1):
            raise ValueError("need one weight per basis state of a qubit register")
        if not np.all(np.isfinite(w)):
            raise ValueError("observable weights must be finite")
        object.__setattr__(self, "weights", tuple(float(v) for v in w))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.weights)

    @property
    def num_qubits(self) -> int:
        return len(self.weights).bit_length() - 1

    @classmethod
    def integer(cls, num_qubits: int) -> "Observable":
        """Bitstring read as a binary number (``11 -> 3``)."""
        return cls(tuple(range(2**num_qubits)))

    @classmethod
    def qubit_sum(cls, num_qubits: int) -> "Observable":
        """``q0 + q1 + ...``: the number of qubits measured in ``|1>``."""
        return cls(tuple(bin(b).count("1") for b in range(2**num_qubits)))

    @classmethod
    def projector(cls, num_qubits: int, label: Union[int, str] = 0) -> "Observable":
        b = basis_index(label, num_qubits)
        w = [0.0] * 2**num_qubits
        w[b] = 1.0
        return cls(tuple(w))


def basis_index(label: Union[int, str], num_qubits: int) -> int:
    """Integer index of a basis label; strings are read qubit 0 first."""
    if isinstance(label, str):
        if len(label) != num_qubits or set(label) - {"0", "1"}:
            raise ValueError(f"bad basis label {label!r} for {num_qubits} qubits")
        index = int(label, 2)
    else:
        index = int(label)
    if not 0 <= index < 2**num_qubits:
        raise ValueError(f"basis state {label!r} out of range for {num_qubits} qubits")
    return index


def basis_density_matrix(label: Union[int, str], num_qubits: int) -> np.ndarray:
    rho = np.zeros((2**num_qubits,) * 2, dtype=complex)
    b = basis_index(label, num_qubits)
    rho[b, b] = 1.0
    return rho


def is_density_matrix(rho: np.ndarray, atol: float = 1e-12, eig_floor: float = -1e-10) -> bool:
    """Hermitian, unit trace and PSD up to the given tolerances."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    if np.abs(rho - rho.conj().T).max() > atol:
        return False
    if abs(np.trace(rho) - 1) > atol:
        return False
    return bool(np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() >= eig_floor)


def _num_qubits(rho: np.ndarray) -> int:
    dim = rho.shape[0]
    n = dim.bit_length() - 1
    if rho.shape != (dim, dim) or 2**n != dim:
        raise ValueError(f"not a qubit density matrix: shape {rho.shape}")
    return n


def _mask(qubit: int, n: int) -> int:
    return 1 << (n - 1 - qubit)


@lru_cache(maxsize=None)
def _cnot_permutation(control: int, target: int, n: int) -> np.ndarray:
    idx = np.arange(2**n)
    flip = (idx & _mask(control, n)) != 0
    return np.where(flip, idx ^ _mask(target, n), idx)


@lru_cache(maxsize=None)
def _pauli_twirl_terms(spec: PauliNoiseSpec, control: int, target: int, n: int):
    """Group ``sum eps_ij/16 P rho P`` by bit-flip mask.

    Conjugating by a Pauli string permutes basis indices (X/Y parts) and
    multiplies entry ``(a, b)`` by ``s(a) s(b)`` with ``s = +-1`` (Y/Z
    parts); Y's factors of ``i`` cancel between the two sides.
    """
    idx = np.arange(2**n)
    mc, mt = _mask(control, n), _mask(target, n)
    sign_c = np.where(idx & mc, -1.0, 1.0)
    sign_t = np.where(idx & mt, -1.0, 1.0)
    terms = {}
    for i in range(4):
        for j in range(4):
            w = spec.eps[i][j] / 16
            if w == 0:
                continue
            flip = (mc if _FLIPS[i] else 0) | (mt if _FLIPS[j] else 0)
            s = np.ones(2**n)
            if _SIGNS[i]:
                s = s * sign_c
            if _SIGNS[j]:
                s = s * sign_t
            terms[flip] = terms.get(flip, 0) + w * np.outer(s, s)
    return tuple((idx ^ flip, weight) for flip, weight in terms.items())


def apply_noisy_cnot(
    rho: np.ndarray, control: int, target: int, spec: PauliNoiseSpec
) -> np.ndarray:
    """One noisy CNOT on ``rho``; see :class:`PauliNoiseSpec` for the map."""
    n = _num_qubits(rho)
    if control == target:
        raise ValueError("control and target must differ")
    if not (0 <= control < n and 0 <= target < n):
        raise ValueError("qubit index out of range")
    perm = _cnot_permutation(control, target, n)
    ideal = rho[np.ix_(perm, perm)]
    if spec.is_zero:
        return ideal
    out = (1 - spec.total) * ideal
    for perm_p, weight in _pauli_twirl_terms(spec, control, target, n):
        out = out + weight * rho[np.ix_(perm_p, perm_p)]
    return out


def apply_unitary(rho: np.ndarray, gate: Gate) -> np.ndarray:
    u = _embedded(gate, _num_qubits(rho))
    return u @ rho @ u.conj().T


@lru_cache(maxsize=4096)
def _embedded(gate: Gate, n: int) -> np.ndarray:
    return embed(gate, n)


def _single_qubit_op(op: np.ndarray, qubit: int, n: int) -> np.ndarray:
    full = np.array([[1.0]])
    for q in range(n):
        full = np.kron(full, op if q == qubit else np.eye(2))
    return full


def apply_relaxation(
    rho: np.ndarray, qubits: Sequence[int], t1: float, t2: float, duration: float
) -> np.ndarray:
    """Amplitude damping then pure dephasing on each listed qubit.

    Populations relax with ``gamma = 1 - exp(-duration/t1)``; coherences end
    up multiplied by ``exp(-duration/t2)`` in total.
    """
    _check_times(t1, t2, duration)
    n = _num_qubits(rho)
    if duration == 0:
        return rho.copy()
    gamma = -math.expm1(-duration / t1)
    # extra dephasing on top of the sqrt(1-gamma) from damping
    rate = 1 / t2 - 1 / (2 * t1)
    lam = 1.0 if rate == 0 else math.exp(-duration * rate)
    k0 = np.array([[1, 0], [0, math.sqrt(1 - gamma)]])
    k1 = np.array([[0, math.sqrt(gamma)], [0, 0]])
    zero_weight = (1 + lam) / 2
    pz = np.diag([1.0, -1.0])
    for q in qubits:
        a0, a1 = _single_qubit_op(k0, q, n), _single_qubit_op(k1, q, n)
        rho = a0 @ rho @ a0.T + a1 @ rho @ a1.T
        if lam != 1.0:
            zq = _single_qubit_op(pz, q, n)
            rho = zero_weight * rho + (1 - zero_weight) * (zq @ rho @ zq)
    return rho


def evolve(
    circuit: Circuit,
    init: Union[int, str] = 0,
    noise: Optional[NoiseModel] = None,
) -> np.ndarray:
    """Final density matrix of ``circuit`` started in basis state ``init``."""
    noise = noise or NoiseModel()
    n = circuit.num_qubits
    rho = basis_density_matrix(init, n)
    relax = noise.relaxation
    everyone = range(n)
    for g in circuit.gates:
        if g.is_cnot:
            rho = apply_noisy_cnot(rho, *g.qubits, noise.spec_for(*g.qubits))
            if relax is not None:
                rho = apply_relaxation(rho, everyone, relax.t1, relax.t2, relax.gate_duration)
        else:
            rho = apply_unitary(rho, g)
    return rho


def expectation(rho: np.ndarray, obs: Observable) -> float:
    """``Tr(M rho)`` for a diagonal observable."""
    diag = np.real(np.diagonal(rho))
    if diag.size != len(obs.weights):
        raise ValueError(
            f"observable has {len(obs.weights)} weights, state has dimension {diag.size}"
        )
    return float(diag @ obs.array)


class ShotResult(NamedTuple):
    mean: float
    std_error: float
    std: float


def outcome_probabilities(rho: np.ndarray) -> np.ndarray:
    p = np.clip(np.real(np.diagonal(rho)), 0.0, None)
    return p / p.sum()


def sample_shots(rho: np.ndarray, obs: Observable, n_meas: int, seed) -> ShotResult:
    """Measure ``n_meas`` times in the computational basis.

    Returns the sample mean of the observable, its standard error and the
    per-shot sample standard deviation.  Identical seeds give identical
    results.
    """
    if n_meas < 1:
        raise ValueError("n_meas must be >= 1")
    p = outcome_probabilities(rho)
    if p.size != len(obs.weights):
        raise ValueError("observable and state dimensions differ")
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(n_meas, p)
    w = obs.array
    mean = float(counts @ w) / n_meas
    if n_meas == 1:
        return ShotResult(mean, 0.0, 0.0)
    var = float(counts @ (w - mean) ** 2) / (n_meas - 1)
    std = math.sqrt(max(var, 0.0))
    return ShotResult(mean, std / math.sqrt(n_meas), std)


def ideal_expectation(circuit: Circuit, obs: Observable, init: Union[int, str] = 0) -> float:
    """Noiseless value from the state vector ``U |init>``."""
    psi = circuit.unitary()[:, basis_index(init, circuit.num_qubits)]
    return float(np.abs(psi) ** 2 @ obs.array)
