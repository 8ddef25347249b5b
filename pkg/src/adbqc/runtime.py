"""Labeled-qubit runtime shared by gadget and protocol code.

A ``QuantumRuntime`` holds one joint statevector with string-labeled qubits
and an owner tag per qubit, so two-party protocols can be written once and
executed either by sampling measurement outcomes (``SampledOutcomes``) or by
exhaustively enumerating every outcome path (``enumerate_runs``, which
replays the whole computation once per path and therefore handles adaptive
protocols where later steps depend on earlier outcomes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .qsim import (
    ATOL_NORM,
    BRANCH_BUDGET,
    BRANCH_PROB_FLOOR,
    MAX_QUBITS,
    Gate,
    MeasurementBasis,
    StateVector,
)

PRODUCT_ATOL = 1e-9


class OutcomeSource:
    """Supplies measurement outcome bits and records the realized path."""

    def __init__(self) -> None:
        self.trace: list[tuple[int, float]] = []  # (bit, probability of bit 0)

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple(bit for bit, _ in self.trace)

    def take(self, p0: float) -> int:
        raise NotImplementedError


class SampledOutcomes(OutcomeSource):
    """Draws each outcome with Born probability from a generator or coin list."""

    def __init__(self, rng: np.random.Generator | None = None,
                 coins: Iterable[float] | None = None) -> None:
        super().__init__()
        if (rng is None) == (coins is None):
            raise ValueError("provide exactly one of rng or coins")
        self._rng = rng
        self._coins = iter(coins) if coins is not None else None

    def take(self, p0: float) -> int:
        if self._rng is not None:
            coin = float(self._rng.random())
        else:
            try:
                coin = float(next(self._coins))
            except StopIteration:
                raise ValueError("ran out of supplied coins") from None
        bit = 0 if coin < p0 else 1
        self.trace.append((bit, p0))
        return bit


class ReplayOutcomes(OutcomeSource):
    """Forces a prefix of outcomes, then greedily takes the first viable bit.

    Used by ``enumerate_runs``: re-running the computation with successively
    longer forced prefixes walks the whole outcome tree.
    """

    def __init__(self, prefix: Sequence[int], tol: float = BRANCH_PROB_FLOOR) -> None:
        super().__init__()
        self.prefix = tuple(prefix)
        self.tol = tol

    def take(self, p0: float) -> int:
        i = len(self.trace)
        if i < len(self.prefix):
            bit = self.prefix[i]
            if (p0 if bit == 0 else 1.0 - p0) < self.tol:
                raise ValueError(f"forced outcome {bit} at step {i} has zero probability")
        else:
            bit = 0 if p0 > self.tol else 1
        self.trace.append((bit, p0))
        return bit

    def path_probability(self) -> float:
        prob = 1.0
        for bit, p0 in self.trace:
            prob *= p0 if bit == 0 else 1.0 - p0
        return prob


class QuantumRuntime:
    """Joint state over labeled, owner-tagged qubits."""

    def __init__(self, outcomes: OutcomeSource) -> None:
        self.outcomes = outcomes
        self._amps: np.ndarray = np.ones(1, dtype=complex)
        self._labels: list[str] = []  # index in this list == qubit index
        self._owners: dict[str, str] = {}
        self.path_probability: float = 1.0

    @property
    def num_qubits(self) -> int:
        return len(self._labels)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self._labels)

    def owner_of(self, label: str) -> str:
        return self._owners[label]

    def index_of(self, label: str) -> int:
        return self._labels.index(label)

    def load(self, state: StateVector, labels: Sequence[str], owner: str) -> None:
        """Tensor a multi-qubit state in; labels[i] names its qubit i."""
        labels = list(labels)
        if len(labels) != state.num_qubits or len(set(labels)) != len(labels):
            raise ValueError("need one distinct label per loaded qubit")
        for lb in labels:
            if lb in self._owners:
                raise ValueError(f"label {lb!r} already in use")
        if self.num_qubits + state.num_qubits > MAX_QUBITS:
            raise ValueError("qubit budget of 16 exceeded")
        self._amps = np.kron(state.amplitudes, self._amps)
        self._labels.extend(labels)
        for lb in labels:
            self._owners[lb] = owner

    def add_qubit(self, label: str, amplitudes: np.ndarray, owner: str) -> None:
        """Append a fresh qubit (becomes the most significant one)."""
        if label in self._owners:
            raise ValueError(f"label {label!r} already in use")
        if self.num_qubits + 1 > MAX_QUBITS:
            raise ValueError("qubit budget of 16 exceeded")
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (2,) or abs(np.linalg.norm(amps) - 1.0) > ATOL_NORM:
            raise ValueError("new qubit needs a normalized 2-vector")
        self._amps = np.kron(amps, self._amps)
        self._labels.append(label)
        self._owners[label] = owner

    def apply(self, gate: Gate, labels: Sequence[str]) -> None:
        from .qsim import _apply_matrix

        targets = [self.index_of(lb) for lb in labels]
        self._amps = _apply_matrix(self._amps, gate.matrix, targets, self.num_qubits)

    def measure(self, label: str, basis: MeasurementBasis) -> tuple[int, float]:
        """Collapse ``label`` in ``basis``; returns (bit, probability of bit)."""
        if not basis.is_orthonormal():
            raise ValueError(f"degenerate measurement basis: {basis.kind}")
        n = self.num_qubits
        axis = n - 1 - self.index_of(label)
        psi = self._amps.reshape([2] * n)
        overlap0 = np.tensordot(basis.eigenstates[0].conj(), psi, axes=([0], [axis]))
        p0 = min(max(float(np.vdot(overlap0, overlap0).real), 0.0), 1.0)
        bit = self.outcomes.take(p0)
        prob = p0 if bit == 0 else 1.0 - p0
        if bit == 0:
            overlap = overlap0
        else:
            overlap = np.tensordot(basis.eigenstates[1].conj(), psi, axes=([0], [axis]))
        post = np.tensordot(basis.eigenstates[bit], overlap, axes=0)
        post = np.moveaxis(post, 0, axis)
        self._amps = post.reshape(-1) / math.sqrt(max(prob, BRANCH_PROB_FLOOR))
        self.path_probability *= prob
        return bit, prob

    def discard(self, label: str) -> None:
        """Remove a qubit that is in a product state with the rest."""
        n = self.num_qubits
        q = self.index_of(label)
        axis = n - 1 - q
        m = np.moveaxis(self._amps.reshape([2] * n), axis, 0).reshape(2, -1)
        rho = m @ m.conj().T
        purity = float(np.trace(rho @ rho).real)
        if purity < 1.0 - PRODUCT_ATOL:
            raise ValueError(
                f"qubit {label!r} is entangled (purity {purity}); cannot discard"
            )
        row = int(np.argmax(np.abs(np.diag(rho))))
        rest = m[row] / np.linalg.norm(m[row])
        self._amps = rest
        self._labels.pop(q)
        del self._owners[label]

    def transfer(self, label: str, new_owner: str) -> None:
        if label not in self._owners:
            raise ValueError(f"unknown qubit {label!r}")
        self._owners[label] = new_owner

    def owned_by(self, owner: str) -> list[str]:
        return [lb for lb in self._labels if self._owners[lb] == owner]

    def density(self, labels: Sequence[str]) -> np.ndarray:
        """Reduced density matrix over ``labels`` in qubit-index order."""
        from .qsim import partial_trace

        keep = sorted(self.index_of(lb) for lb in labels)
        if not keep:
            return np.ones((1, 1), dtype=complex)
        state = StateVector(self.num_qubits, self._amps)
        return partial_trace(state, keep).entries

    def density_of(self, owner: str) -> np.ndarray:
        return self.density(self.owned_by(owner))

    def snapshot(self, labels: Sequence[str] | None = None) -> StateVector:
        """Current state over ``labels`` (little-endian in the given order).

        The remaining qubits must be product with the requested ones; by
        default the whole register is returned.
        """
        if labels is None:
            return StateVector(self.num_qubits, self._amps)
        wanted = list(labels)
        n = self.num_qubits
        psi = self._amps.reshape([2] * n)
        axes = [n - 1 - self.index_of(lb) for lb in reversed(wanted)]
        other_axes = [ax for ax in range(n) if ax not in axes]
        m = np.transpose(psi, axes + other_axes).reshape(2 ** len(wanted), -1)
        if m.shape[1] == 1:
            vec = m[:, 0]
        else:
            col_norms = np.linalg.norm(m, axis=0)
            j = int(np.argmax(col_norms))
            vec = m[:, j] / col_norms[j]
            residual = m - np.outer(vec, vec.conj() @ m)
            if float(np.linalg.norm(residual)) > math.sqrt(PRODUCT_ATOL):
                raise ValueError(f"qubits {wanted} are entangled with the rest")
        return StateVector(len(wanted), vec / np.linalg.norm(vec))


@dataclass(frozen=True)
class RunBranch:
    """One outcome path of a replayed computation."""

    outcomes: tuple[int, ...]
    probability: float
    value: Any


def enumerate_runs(
    run_fn: Callable[[OutcomeSource], Any],
    branch_budget: int = BRANCH_BUDGET,
    tol: float = BRANCH_PROB_FLOOR,
) -> list[RunBranch]:
    """Enumerate every outcome path of ``run_fn``.

    ``run_fn`` must be deterministic apart from the outcomes it takes from
    the supplied source; it is re-executed once per path.
    """
    results: list[RunBranch] = []
    stack: list[tuple[int, ...]] = [()]
    while stack:
        prefix = stack.pop()
        src = ReplayOutcomes(prefix, tol=tol)
        value = run_fn(src)
        results.append(RunBranch(src.bits, src.path_probability(), value))
        if len(results) > branch_budget:
            raise ValueError(f"branch budget of {branch_budget} exceeded")
        for k in range(len(prefix), len(src.trace)):
            bit, p0 = src.trace[k]
            p_other = 1.0 - p0 if bit == 0 else p0
            if p_other > tol:
                stack.append(tuple(b for b, _ in src.trace[:k]) + (1 - bit,))
    results.sort(key=lambda br: br.outcomes)
    return results
