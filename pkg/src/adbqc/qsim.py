"""Dense statevector simulation core.

Conventions, fixed across the whole package:

- Qubits are little-endian: qubit 0 is the least significant bit of the
  amplitude index, so ``|q1 q0>`` has index ``2*q1 + q0``.
- ``R_Z(t) = diag(1, e^{it})`` and
  ``R_X(t) = [[cos(t/2), -i sin(t/2)], [-i sin(t/2), cos(t/2)]]``.
- The general single-qubit state family is
  ``|+_{a,p}> = cos(a/2)|0> + e^{ip} sin(a/2)|1>`` and its orthogonal
  partner ``|-_{a,p}> = sin(a/2)|0> - e^{ip} cos(a/2)|1>`` is only used
  through measurement bases, which require a = pi/2.
- Measurement outcome bit 0 always means the first basis eigenstate.
- Multi-qubit gate matrices index their rows/columns with ``targets[0]``
  as the most significant bit.

States are value objects: every operation returns a new ``StateVector``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

ATOL_NORM = 1e-9
ATOL_UNITARY = 1e-10
ATOL_HERMITIAN = 1e-10
PSD_FLOOR = -1e-9
BRANCH_PROB_FLOOR = 1e-12
MAX_QUBITS = 16
BRANCH_BUDGET = 2**16

SQRT_HALF = 1.0 / math.sqrt(2.0)

_H = np.array([[SQRT_HALF, SQRT_HALF], [SQRT_HALF, -SQRT_HALF]], dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_CZ = np.diag([1, 1, 1, -1]).astype(complex)


def rz_matrix(theta: float) -> np.ndarray:
    return np.array([[1, 0], [0, np.exp(1j * theta)]], dtype=complex)


def rx_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def plus_state(polar: float, phase: float, sign: int = +1) -> np.ndarray:
    """Amplitudes of cos(polar/2)|0> + sign e^{i phase} sin(polar/2)|1>."""
    if sign not in (+1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    return np.array(
        [math.cos(polar / 2), sign * np.exp(1j * phase) * math.sin(polar / 2)],
        dtype=complex,
    )


@dataclass(frozen=True)
class StateVector:
    """Normalized pure state on ``num_qubits`` qubits."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.num_qubits < 0 or self.num_qubits > MAX_QUBITS:
            raise ValueError(f"num_qubits out of range: {self.num_qubits}")
        if amps.shape[0] != 2**self.num_qubits:
            raise ValueError(
                f"expected {2**self.num_qubits} amplitudes, got {amps.shape[0]}"
            )
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > ATOL_NORM:
            raise ValueError(f"state norm {norm} deviates from 1")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zero(cls, num_qubits: int) -> "StateVector":
        amps = np.zeros(2**num_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(num_qubits, amps)

    @classmethod
    def of(cls, amplitudes: Iterable[complex]) -> "StateVector":
        amps = np.asarray(list(amplitudes), dtype=complex)
        n = int(round(math.log2(amps.shape[0])))
        amps = amps / np.linalg.norm(amps)
        return cls(n, amps)

    def tensor(self, other: "StateVector") -> "StateVector":
        """Append ``other`` as the new most significant qubits."""
        return StateVector(
            self.num_qubits + other.num_qubits,
            np.kron(other.amplitudes, self.amplitudes),
        )

    def probability_weights(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class DensityMatrix:
    """Mixed state; validated Hermitian, unit trace, positive semidefinite."""

    num_qubits: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.entries, dtype=complex)
        dim = 2**self.num_qubits
        if m.shape != (dim, dim):
            raise ValueError(f"expected shape {(dim, dim)}, got {m.shape}")
        if not np.allclose(m, m.conj().T, atol=ATOL_HERMITIAN):
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-9 or abs(np.trace(m).imag) > 1e-9:
            raise ValueError(f"trace {np.trace(m)} deviates from 1")
        if float(np.linalg.eigvalsh(m).min()) < PSD_FLOOR:
            raise ValueError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "entries", m)

    @classmethod
    def from_pure(cls, state: StateVector) -> "DensityMatrix":
        v = state.amplitudes
        return cls(state.num_qubits, np.outer(v, v.conj()))


@dataclass(frozen=True)
class Gate:
    """Unitary with a kind label; ``matrix`` rows use targets[0] as high bit."""

    kind: str
    matrix: np.ndarray
    angle: float | None = None

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] & (m.shape[0] - 1):
            raise ValueError(f"matrix shape {m.shape} is not square power of two")
        if not np.allclose(m @ m.conj().T, np.eye(m.shape[0]), atol=1e-9):
            raise ValueError(f"{self.kind} matrix is not unitary")
        object.__setattr__(self, "matrix", m)

    @property
    def num_qubits(self) -> int:
        return int(round(math.log2(self.matrix.shape[0])))

    @classmethod
    def x(cls) -> "Gate":
        return cls("x", _X)

    @classmethod
    def y(cls) -> "Gate":
        return cls("y", _Y)

    @classmethod
    def z(cls) -> "Gate":
        return cls("z", _Z)

    @classmethod
    def h(cls) -> "Gate":
        return cls("h", _H)

    @classmethod
    def rz(cls, theta: float) -> "Gate":
        return cls("rz", rz_matrix(theta), angle=theta)

    @classmethod
    def rx(cls, theta: float) -> "Gate":
        return cls("rx", rx_matrix(theta), angle=theta)

    @classmethod
    def hrz(cls, theta: float) -> "Gate":
        return cls("hrz", _H @ rz_matrix(theta), angle=theta)

    @classmethod
    def cz(cls) -> "Gate":
        return cls("cz", _CZ)

    @classmethod
    def entangler(cls, variant: str = "hhcz") -> "Gate":
        """Two-qubit ancilla-register coupling: (H x H) CZ or CZ (H x H)."""
        hh = np.kron(_H, _H)
        if variant == "hhcz":
            return cls("entangler_hhcz", hh @ _CZ)
        if variant == "czhh":
            return cls("entangler_czhh", _CZ @ hh)
        raise ValueError(f"unknown entangler variant: {variant}")

    @classmethod
    def custom(cls, matrix: np.ndarray, kind: str = "custom") -> "Gate":
        return cls(kind, np.asarray(matrix, dtype=complex))


@dataclass(frozen=True)
class MeasurementBasis:
    """Orthonormal single-qubit basis; row 0 of ``eigenstates`` is outcome 0."""

    kind: str
    eigenstates: np.ndarray

    def __post_init__(self) -> None:
        e = np.asarray(self.eigenstates, dtype=complex)
        if e.shape != (2, 2):
            raise ValueError(f"eigenstates must be 2x2, got {e.shape}")
        object.__setattr__(self, "eigenstates", e)

    @classmethod
    def z(cls) -> "MeasurementBasis":
        return cls("z", np.eye(2, dtype=complex))

    @classmethod
    def x(cls) -> "MeasurementBasis":
        return cls("x", np.array([[1, 1], [1, -1]], dtype=complex) * SQRT_HALF)

    @classmethod
    def y(cls) -> "MeasurementBasis":
        return cls("y", np.array([[1, 1j], [1, -1j]], dtype=complex) * SQRT_HALF)

    @classmethod
    def rotated(cls, polar: float, phase: float) -> "MeasurementBasis":
        """Basis {cos(a/2)|0> +- e^{ip} sin(a/2)|1>}; orthogonal iff a = pi/2 mod pi."""
        plus = plus_state(polar, phase, +1)
        minus = np.array(
            [math.sin(polar / 2), -np.exp(1j * phase) * math.cos(polar / 2)],
            dtype=complex,
        )
        return cls("rotated", np.stack([plus, minus]))

    @classmethod
    def equatorial(cls, phase: float) -> "MeasurementBasis":
        return cls.rotated(math.pi / 2, phase)

    def is_orthonormal(self, atol: float = 1e-10) -> bool:
        e = self.eigenstates
        gram = e @ e.conj().T
        return bool(np.allclose(gram, np.eye(2), atol=atol))


def _apply_matrix(
    amps: np.ndarray, matrix: np.ndarray, targets: Sequence[int], n: int
) -> np.ndarray:
    k = len(targets)
    axes = [n - 1 - q for q in targets]
    psi = amps.reshape([2] * n)
    mat = matrix.reshape([2] * (2 * k))
    psi = np.tensordot(mat, psi, axes=(list(range(k, 2 * k)), axes))
    psi = np.moveaxis(psi, range(k), axes)
    return np.ascontiguousarray(psi).reshape(-1)


def apply_gate(state: StateVector, gate: Gate, targets: Sequence[int]) -> StateVector:
    """Apply ``gate`` to ``targets``; targets[0] is the gate's high bit."""
    targets = list(targets)
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate targets: {targets}")
    if len(targets) != gate.num_qubits:
        raise ValueError(
            f"gate acts on {gate.num_qubits} qubits, got targets {targets}"
        )
    for q in targets:
        if not 0 <= q < state.num_qubits:
            raise ValueError(f"target {q} out of range for {state.num_qubits} qubits")
    return StateVector(
        state.num_qubits,
        _apply_matrix(state.amplitudes, gate.matrix, targets, state.num_qubits),
    )


@dataclass(frozen=True)
class MeasureResult:
    outcome: int
    probability: float
    state: StateVector


def _outcome_probability(
    amps: np.ndarray, qubit: int, eigenstate: np.ndarray, n: int
) -> tuple[float, np.ndarray]:
    """Probability of projecting ``qubit`` onto ``eigenstate`` plus the
    overlap tensor (the state of the remaining qubits, unnormalized)."""
    axis = n - 1 - qubit
    psi = amps.reshape([2] * n)
    overlap = np.tensordot(eigenstate.conj(), psi, axes=([0], [axis]))
    p = float(np.vdot(overlap, overlap).real)
    return p, overlap


def measure(
    state: StateVector, qubit: int, basis: MeasurementBasis, coin: float
) -> MeasureResult:
    """Projectively measure ``qubit``; outcome 0 iff ``coin`` < P(outcome 0).

    The post-measurement state keeps the qubit, collapsed onto the winning
    eigenstate. Degenerate (non-orthonormal) bases are rejected.
    """
    if not 0.0 <= coin < 1.0:
        raise ValueError(f"coin must lie in [0, 1), got {coin}")
    if not 0 <= qubit < state.num_qubits:
        raise ValueError(f"qubit {qubit} out of range")
    if not basis.is_orthonormal():
        raise ValueError(f"degenerate measurement basis: {basis.kind}")
    n = state.num_qubits
    p0, overlap0 = _outcome_probability(state.amplitudes, qubit, basis.eigenstates[0], n)
    p0 = min(max(p0, 0.0), 1.0)
    outcome = 0 if coin < p0 else 1
    prob = p0 if outcome == 0 else 1.0 - p0
    if outcome == 0:
        overlap = overlap0
    else:
        _, overlap = _outcome_probability(state.amplitudes, qubit, basis.eigenstates[1], n)
    axis = n - 1 - qubit
    post = np.tensordot(basis.eigenstates[outcome], overlap, axes=0)
    post = np.moveaxis(post, 0, axis)
    post = post.reshape(-1) / math.sqrt(max(prob, BRANCH_PROB_FLOOR))
    return MeasureResult(outcome, prob, StateVector(n, post))


@dataclass(frozen=True)
class Branch:
    """One measurement-outcome path of a program."""

    outcomes: tuple[int, ...]
    probability: float
    final_state: StateVector


def enumerate_branches(
    initial: StateVector, program: Sequence[tuple]
) -> list[Branch]:
    """Exhaustively expand every measurement of ``program``.

    Steps are ``("gate", gate, targets)`` or ``("measure", qubit, basis)``.
    Zero-probability branches are dropped; the total branch count must stay
    within 2**16.
    """
    measure_count = sum(1 for step in program if step[0] == "measure")
    if 2**measure_count > BRANCH_BUDGET:
        raise ValueError(
            f"{measure_count} measurements exceed the branch budget of 2^16"
        )
    branches: list[Branch] = []

    def walk(state: StateVector, idx: int, outcomes: tuple[int, ...], prob: float):
        if prob < BRANCH_PROB_FLOOR:
            return
        if idx == len(program):
            branches.append(Branch(outcomes, prob, state))
            return
        step = program[idx]
        if step[0] == "gate":
            _, gate, targets = step
            walk(apply_gate(state, gate, targets), idx + 1, outcomes, prob)
        elif step[0] == "measure":
            _, qubit, basis = step
            for forced in (0, 1):
                coin = 0.0 if forced == 0 else 1.0 - 1e-15
                res = measure(state, qubit, basis, coin)
                if res.outcome != forced or res.probability < BRANCH_PROB_FLOOR:
                    continue
                walk(res.state, idx + 1, outcomes + (forced,), prob * res.probability)
        else:
            raise ValueError(f"unknown program step kind: {step[0]!r}")

    walk(initial, 0, (), 1.0)
    return branches


def partial_trace(state: StateVector, keep: Sequence[int]) -> DensityMatrix:
    """Reduced density matrix on ``keep``; keep[i] becomes output qubit i."""
    keep = list(keep)
    n = state.num_qubits
    if len(set(keep)) != len(keep) or any(not 0 <= q < n for q in keep):
        raise ValueError(f"invalid keep list: {keep}")
    if not keep:
        raise ValueError("keep must name at least one qubit")
    psi = state.amplitudes.reshape([2] * n)
    kept_axes = [n - 1 - q for q in reversed(keep)]
    other_axes = [ax for ax in range(n) if ax not in kept_axes]
    m = np.transpose(psi, kept_axes + other_axes).reshape(2 ** len(keep), -1)
    return DensityMatrix(len(keep), m @ m.conj().T)


def fidelity_up_to_phase(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2: 1 iff the states agree up to a global phase."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("states have different qubit counts")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def trace_distance(a: np.ndarray | DensityMatrix, b: np.ndarray | DensityMatrix) -> float:
    """(1/2)||a - b||_1 for density matrices (or raw Hermitian arrays)."""
    ma = a.entries if isinstance(a, DensityMatrix) else np.asarray(a)
    mb = b.entries if isinstance(b, DensityMatrix) else np.asarray(b)
    return 0.5 * float(np.abs(np.linalg.eigvalsh(ma - mb)).sum())


def haar_random_state(num_qubits: int, rng: np.random.Generator) -> StateVector:
    """Haar-distributed pure state via a normalized complex Gaussian vector."""
    dim = 2**num_qubits
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return StateVector(num_qubits, v / np.linalg.norm(v))
