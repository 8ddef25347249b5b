"""Server deviation models and their detection statistics.

Covers the three implemented deviations:

- stray Paulis on the handed-over register (measure-only protocol), with
  exact escape combinatorics, the closed-form bound, and a Monte Carlo;
- report tampering (gate-only protocol), where every reported bit is
  correct only with some probability;
- the entangled-probe analysis of the lent-ancilla gadget, quantifying
  what a server that entangles the lent qubit with a memory could learn.

The Pauli analysis relies on the register layout using equal thirds:
computation slots, |0> traps, |+> traps. An X (or XZ) error flips exactly
the Z-basis readings, so it is caught by a |0> trap and invisible to a |+>
trap; Z errors are the mirror image; XZ errors are caught by both. Escape
therefore depends only on which role classes the error positions land in,
and a uniformly random layout with uniformly random disjoint error
positions is equivalent to fixed roles with uniform positions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

import numpy as np

from .qsim import Gate, StateVector, apply_gate

ATTACK_KINDS = ("x", "z", "xz")

# register position classes for the equal-thirds layout
_COMPUTE, _ZERO_TRAP, _PLUS_TRAP = 0, 1, 2


def apply_pauli_hits(
    state: StateVector, hits: tuple[tuple[str, int], ...]
) -> StateVector:
    """Apply (kind, qubit) Pauli errors; Z before X at each position."""
    for kind, pos in hits:
        if kind not in ATTACK_KINDS:
            raise ValueError(f"unknown Pauli kind {kind!r}")
        if "z" in kind:
            state = apply_gate(state, Gate.z(), [pos])
        if "x" in kind:
            state = apply_gate(state, Gate.x(), [pos])
    return state


def pauli_is_caught(kind: str, role_class: int) -> bool:
    """Whether an error of ``kind`` on a position of ``role_class`` trips it."""
    if role_class == _ZERO_TRAP:
        return "x" in kind
    if role_class == _PLUS_TRAP:
        return "z" in kind
    return False


def _thirds(num_qubits: int) -> int:
    if num_qubits % 3 != 0 or num_qubits <= 0:
        raise ValueError("the thirds layout needs a positive multiple of 3")
    return num_qubits // 3


def escape_counts(
    num_qubits: int, pauli_counts: tuple[int, int, int]
) -> tuple[int, int]:
    """(escaping placements, total placements) for the trap check.

    ``pauli_counts`` = (X, Z, XZ) errors on disjoint uniform positions of an
    equal-thirds register. X errors escape on computation or |+> positions,
    Z errors on computation or |0> positions, XZ only on computation slots.
    The counts are unreduced ordered placements, so the ratio reads directly
    off the combinatorics (e.g. 120/504 for three X errors on nine slots:
    504 ordered triples of positions, 120 of which avoid the |0> traps).
    """
    w = _thirds(num_qubits)
    a, b, c = pauli_counts
    if min(a, b, c) < 0 or a + b + c > num_qubits:
        raise ValueError(f"bad pauli counts {pauli_counts} for N={num_qubits}")
    total = comb(num_qubits, a) * comb(num_qubits - a, b) * comb(num_qubits - a - b, c)
    good = 0
    for i in range(min(a, w) + 1):  # X errors placed on computation slots
        for j in range(min(b, w) + 1):  # Z errors on computation slots
            used = i + j + c
            if used > w or a - i > w or b - j > w:
                continue
            ways = comb(w, i) * comb(w - i, j) * comb(w - i - j, c)
            ways *= comb(w, a - i)  # remaining X errors on |+> traps
            ways *= comb(w, b - j)  # remaining Z errors on |0> traps
            good += ways
    order = factorial(a) * factorial(b) * factorial(c)
    return good * order, total * order


def escape_probability_exact(
    num_qubits: int, pauli_counts: tuple[int, int, int]
) -> Fraction:
    """Exact probability that the trap check misses the whole attack."""
    good, total = escape_counts(num_qubits, pauli_counts)
    return Fraction(good, total)


def escape_bound(total_errors: int) -> float:
    """Closed-form ceiling on the escape probability for ``total_errors``."""
    if total_errors < 0:
        raise ValueError("error count must be non-negative")
    return (2.0 / 3.0) ** (total_errors / 3.0)


@dataclass(frozen=True)
class EscapeAnalysis:
    trials: int
    escaped: int
    estimate: float
    exact: float
    bound: float
    z_score: float


def simulate_escape(
    num_qubits: int,
    pauli_counts: tuple[int, int, int],
    trials: int,
    rng: np.random.Generator,
) -> EscapeAnalysis:
    """Monte Carlo of the detection process over random error positions.

    Samples the disjoint error positions exactly as a protocol run does and
    evaluates the deterministic caught/escaped predicate per trial (the
    layout symmetry above fixes the roles without loss of generality).
    """
    w = _thirds(num_qubits)
    a, b, c = pauli_counts
    if a + b + c > num_qubits:
        raise ValueError("more errors than positions")
    roles = np.array([_COMPUTE] * w + [_ZERO_TRAP] * w + [_PLUS_TRAP] * w)
    k = a + b + c
    escaped = 0
    for _ in range(trials):
        pos = rng.permutation(num_qubits)[:k]
        hit_roles = roles[pos]
        caught = (
            np.any(hit_roles[:a] == _ZERO_TRAP)
            or np.any(hit_roles[a : a + b] == _PLUS_TRAP)
            or np.any(hit_roles[a + b :] != _COMPUTE)
        )
        escaped += 0 if caught else 1
    exact = float(escape_probability_exact(num_qubits, pauli_counts))
    estimate = escaped / trials
    spread = math.sqrt(exact * (1.0 - exact) / trials)
    z = 0.0 if spread == 0.0 else (estimate - exact) / spread
    return EscapeAnalysis(
        trials, escaped, estimate, exact, escape_bound(a + b + c), z
    )


# ---------------------------------------------------------------------------
# Report tampering


def tamper_acceptance_exact(tamper_rate: float, trap_count: int) -> float:
    """Acceptance probability when every reported bit is correct only with
    probability ``tamper_rate``: all ``trap_count`` trap bits must survive."""
    if not 0.0 <= tamper_rate <= 1.0:
        raise ValueError("tamper rate must be in [0, 1]")
    if trap_count < 0:
        raise ValueError("trap count must be non-negative")
    return tamper_rate**trap_count


def simulate_tamper_acceptance(
    tamper_rate: float, trap_count: int, trials: int, rng: np.random.Generator
) -> float:
    """Monte Carlo of the tamper channel: fraction of runs with no trap bit
    flipped. Honest trap readings are deterministic, so a flip is an error."""
    flips = rng.random((trials, trap_count)) >= tamper_rate
    return float(np.mean(~np.any(flips, axis=1)))


# ---------------------------------------------------------------------------
# Entangled probe of the lent-ancilla gadget


def probe_gram(probe: StateVector, lent_qubit: int) -> np.ndarray:
    """Gram matrix of the server's post-rotation states across octants.

    ``probe`` is the joint state of the lent qubit and the server's memory.
    Entry (k, k') is the overlap of the joint states after the client turns
    the lent qubit k versus k' octants; |entries| < 1 mean the server can
    statistically distinguish angle hypotheses.
    """
    states = []
    for k in range(8):
        states.append(
            apply_gate(probe, Gate.rz(k * math.pi / 4.0), [lent_qubit]).amplitudes
        )
    gram = np.empty((8, 8), dtype=complex)
    for k in range(8):
        for kp in range(8):
            gram[k, kp] = np.vdot(states[k], states[kp])
    return gram


def probe_gram_closed_form(weight_one: float) -> np.ndarray:
    """Same Gram matrix from the lent qubit's |1> weight alone.

    G(k, k') = (1 - w) + w * exp(i (k' - k) pi / 4), with w the probability
    of the lent qubit being |1>. An honest unentangled |+> lend leaves the
    server no residual system at all; this form quantifies the best case
    for a server that keeps one.
    """
    if not -1e-12 <= weight_one <= 1.0 + 1e-12:
        raise ValueError("weight must be a probability")
    ks = np.arange(8)
    delta = ks[None, :] - ks[:, None]
    return (1.0 - weight_one) + weight_one * np.exp(1j * delta * math.pi / 4.0)


def lent_weight_one(probe: StateVector, lent_qubit: int) -> float:
    """Probability that the lent qubit of ``probe`` reads 1."""
    weights = probe.probability_weights()
    idx = np.arange(weights.shape[0])
    mask = (idx >> lent_qubit) & 1 == 1
    return float(np.sum(weights[mask]))


def distinguishability(gram: np.ndarray) -> float:
    """Best single-shot distinguishing advantage over octant pairs.

    For pure states with overlap G the optimal measurement separates them
    with trace distance sqrt(1 - |G|^2); this returns the maximum over all
    distinct pairs. 0 means perfectly blind, 1 means some pair is
    perfectly distinguishable.
    """
    best = 0.0
    for k in range(8):
        for kp in range(k + 1, 8):
            overlap = min(abs(gram[k, kp]), 1.0)
            best = max(best, math.sqrt(1.0 - overlap**2))
    return best
