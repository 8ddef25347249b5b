"""Measurement-driven gate gadgets and the algebra behind them.

Each gadget couples ancilla qubits to register qubits with the fixed
two-qubit entangler E = (H x H) CZ and consumes the ancillas by
measurement, leaving a gate on the register up to Pauli by-products that a
classical frame records. The building blocks:

- ``kraus_backaction``: the two back-action operators on the register for a
  single coupling, given the ancilla preparation and its measurement basis.
- ``gadget_hrz_sueki``: the prepare-only client's H R_Z(theta) gadget. A
  hiding angle and a pad bit make the announced angle uniform; the realized
  gate is X^(s2 xor pad) H R_Z(theta) exactly, on every outcome branch.
- ``gadget_cz``: CZ between two register qubits from one shared ancilla
  (outcome s leaves a Z^s by-product on the first qubit) followed by one
  Hadamard-cancelling |0> coupling on each qubit.
- ``frame_conjugate`` and ``PauliFrame``: pushing X/Z records through the
  gates the gadgets realize.
- ``decompose_unitary``: Z-X-Z Euler angles in this package's conventions,
  with an octant-snapping variant used to compile gate requests.

All angles at protocol boundaries are octant integers k, meaning k*pi/4.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .qsim import Gate, MeasurementBasis, StateVector, plus_state
from .runtime import QuantumRuntime, SampledOutcomes
from .transcript import ALICE, BOB, Transcript

OCTANT = math.pi / 4
EVEN_OCTANTS = (0, 2, 4, 6)
ODD_OCTANTS = (1, 3, 5, 7)

ENTANGLER = Gate.entangler("hhcz")


def octant_angle(k: int) -> float:
    return (k % 8) * OCTANT


@dataclass(frozen=True)
class AncillaPrep:
    """Single-qubit preparation cos(polar/2)|0> + sign e^{i phase} sin(polar/2)|1>."""

    polar: float
    phase: float
    sign: int = +1

    def amplitudes(self) -> np.ndarray:
        return plus_state(self.polar, self.phase, self.sign)


@dataclass(frozen=True)
class KrausPair:
    """Register back-action for outcomes 0 and 1 of one ancilla coupling."""

    k0: np.ndarray
    k1: np.ndarray

    def completeness_defect(self) -> float:
        s = self.k0.conj().T @ self.k0 + self.k1.conj().T @ self.k1
        return float(np.abs(s - np.eye(2)).max())


def kraus_backaction(
    prep: AncillaPrep, basis: MeasurementBasis, variant: str = "hhcz"
) -> KrausPair:
    """Back-action operators K_s = <s|_anc E (|prep>_anc x id_reg)."""
    if not basis.is_orthonormal():
        raise ValueError("measurement basis must be orthonormal")
    e4 = Gate.entangler(variant).matrix.reshape(2, 2, 2, 2)  # [a', r', a, r]
    p = prep.amplitudes()
    ks = [
        np.einsum("a,arbq,b->rq", basis.eigenstates[s].conj(), e4, p)
        for s in (0, 1)
    ]
    return KrausPair(ks[0], ks[1])


# ---------------------------------------------------------------------------
# Pauli frame


@dataclass(frozen=True)
class PauliFrame:
    """Records the pending X^x Z^z correction per qubit (up to global phase)."""

    x: tuple[int, ...]
    z: tuple[int, ...]

    @classmethod
    def identity(cls, n: int) -> "PauliFrame":
        return cls((0,) * n, (0,) * n)

    def flip_x(self, q: int) -> "PauliFrame":
        x = list(self.x)
        x[q] ^= 1
        return PauliFrame(tuple(x), self.z)

    def flip_z(self, q: int) -> "PauliFrame":
        z = list(self.z)
        z[q] ^= 1
        return PauliFrame(self.x, tuple(z))

    def matrix_on(self, state: StateVector) -> StateVector:
        """Apply the recorded correction to a state (for oracle checks)."""
        from .qsim import apply_gate

        out = state
        for q in range(state.num_qubits):
            if self.z[q]:
                out = apply_gate(out, Gate.z(), [q])
            if self.x[q]:
                out = apply_gate(out, Gate.x(), [q])
        return out


def frame_conjugate(
    frame: PauliFrame, gate_kind: str, targets: tuple[int, ...]
) -> tuple[PauliFrame, int]:
    """Push the frame through a gate about to be applied.

    Returns the updated frame plus the sign (+1 or -1) that must multiply
    the gate's angle (for rz/rx/hrz) so that gate-then-frame equals
    frame-then-original-gate up to global phase.
    """
    x, z = list(frame.x), list(frame.z)
    sign = +1
    if gate_kind == "h":
        (q,) = targets
        x[q], z[q] = z[q], x[q]
    elif gate_kind == "rz":
        (q,) = targets
        sign = -1 if x[q] else +1
    elif gate_kind == "rx":
        (q,) = targets
        sign = -1 if z[q] else +1
    elif gate_kind == "hrz":
        (q,) = targets
        sign = -1 if x[q] else +1
        x[q], z[q] = z[q], x[q]
    elif gate_kind == "cz":
        i, j = targets
        z[i] ^= x[j]
        z[j] ^= x[i]
    else:
        raise ValueError(f"frame conjugation not defined for gate {gate_kind!r}")
    return PauliFrame(tuple(x), tuple(z)), sign


# ---------------------------------------------------------------------------
# Gadget primitives on a runtime


def couple(rt: QuantumRuntime, ancilla: str, register: str) -> None:
    """Apply the entangler with the ancilla as the high matrix bit."""
    rt.apply(ENTANGLER, [ancilla, register])


def h_cancel(
    rt: QuantumRuntime,
    register: str,
    label: str,
    tape: Transcript | None = None,
    prep_party: str = BOB,
) -> None:
    """Couple a fresh |0> ancilla and discard it: a deterministic H."""
    rt.add_qubit(label, np.array([1, 0], dtype=complex), prep_party)
    if tape:
        tape.local(prep_party, op="prepare", qubit=label, which="zero")
        if prep_party != BOB:
            tape.transfer(prep_party, BOB, label)
    rt.transfer(label, BOB)
    couple(rt, label, register)
    if tape:
        tape.local(BOB, op="couple", qubits=[label, register])
    rt.discard(label)
    if tape:
        tape.local(BOB, op="discard", qubit=label)


@dataclass(frozen=True)
class SuekiHrzResult:
    theta_public: int  # announced octant
    outcomes: tuple[int, int]
    frame_delta: tuple[int, int]  # (x, z) delta on the target qubit


def announced_octant(
    target_octant: int,
    hiding_octant: int,
    pad_bit: int,
    s1: int,
    prep_sign: int = +1,
) -> int:
    """Octant the prepare-only client announces after the first outcome.

    Over uniform (hiding octant, pad bit) the result is uniform on all
    eight octants whatever the target octant: the map is exactly two-to-one.
    """
    sign1 = -1 if s1 else +1
    return (-(target_octant % 8) - sign1 * (prep_sign * (hiding_octant % 8) + 4 * pad_bit)) % 8


def sueki_hrz_on_runtime(
    rt: QuantumRuntime,
    target: str,
    target_octant: int,
    hiding_octant: int,
    pad_bit: int,
    prep_sign: int = +1,
    tape: Transcript | None = None,
    labels: tuple[str, str, str] = ("anc_hide", "anc_h", "anc_drive"),
) -> SuekiHrzResult:
    """Prepare-only client's H R_Z gadget; realizes X^(s2^pad) H R_Z(k pi/4).

    The client supplies all three ancillas. Its secrets (hiding octant, pad
    bit, prep sign) shape only the announced angle; the announced octant is
    uniform when hiding octant and pad bit are uniform.
    """
    a_hide, a_h, a_drive = labels
    k_target = target_octant % 8
    k_hide = hiding_octant % 8

    # hidden-rotation coupling
    rt.add_qubit(a_hide, plus_state(octant_angle(k_hide), math.pi / 2, prep_sign), ALICE)
    if tape:
        tape.local(ALICE, op="prepare", qubit=a_hide, which="hidden")
        tape.transfer(ALICE, BOB, a_hide)
    rt.transfer(a_hide, BOB)
    couple(rt, a_hide, target)
    s1, _ = rt.measure(a_hide, MeasurementBasis.z())
    if tape:
        tape.local(BOB, op="couple", qubits=[a_hide, target])
        tape.outcome(BOB, s1, qubit=a_hide)
        tape.msg(BOB, ALICE, outcome=s1)
    rt.discard(a_hide)

    # Hadamard-cancelling coupling
    h_cancel(rt, target, a_h, tape, prep_party=ALICE)

    # announced angle folds the secrets with the first outcome
    k_public = announced_octant(k_target, k_hide, pad_bit, s1, prep_sign)
    if tape:
        tape.msg(ALICE, BOB, theta_octant=k_public)

    # driven coupling measured in the announced equatorial basis
    rt.add_qubit(a_drive, plus_state(math.pi / 2, 0.0), ALICE)
    if tape:
        tape.local(ALICE, op="prepare", qubit=a_drive, which="plus")
        tape.transfer(ALICE, BOB, a_drive)
    rt.transfer(a_drive, BOB)
    couple(rt, a_drive, target)
    s2, _ = rt.measure(a_drive, MeasurementBasis.equatorial(octant_angle(k_public)))
    if tape:
        tape.local(BOB, op="couple", qubits=[a_drive, target])
        tape.outcome(BOB, s2, qubit=a_drive)
        tape.msg(BOB, ALICE, outcome=s2)
    rt.discard(a_drive)

    return SuekiHrzResult(k_public, (s1, s2), (s2 ^ pad_bit, 0))


@dataclass(frozen=True)
class CzResult:
    outcome: int
    frame_delta_z_first: int  # Z^s lands on the first target


def cz_on_runtime(
    rt: QuantumRuntime,
    target_i: str,
    target_j: str,
    tape: Transcript | None = None,
    prep_party: str = BOB,
    labels: tuple[str, str, str] = ("anc_cz", "anc_hi", "anc_hj"),
) -> CzResult:
    """CZ between two register qubits; realizes Z_i^s CZ_ij exactly.

    One |+> ancilla is coupled to both qubits and Z-measured (the outcome
    travels server to client); a |0> coupling on each qubit absorbs the
    leftover Hadamards.
    """
    a_cz, a_hi, a_hj = labels
    rt.add_qubit(a_cz, plus_state(math.pi / 2, 0.0), prep_party)
    if tape:
        tape.local(prep_party, op="prepare", qubit=a_cz, which="plus")
        if prep_party != BOB:
            tape.transfer(prep_party, BOB, a_cz)
    rt.transfer(a_cz, BOB)
    couple(rt, a_cz, target_i)
    couple(rt, a_cz, target_j)
    s, _ = rt.measure(a_cz, MeasurementBasis.z())
    if tape:
        tape.local(BOB, op="couple", qubits=[a_cz, target_i])
        tape.local(BOB, op="couple", qubits=[a_cz, target_j])
        tape.outcome(BOB, s, qubit=a_cz)
        tape.msg(BOB, ALICE, outcome=s)
    rt.discard(a_cz)
    h_cancel(rt, target_i, a_hi, tape, prep_party)
    h_cancel(rt, target_j, a_hj, tape, prep_party)
    return CzResult(s, s)


# ---------------------------------------------------------------------------
# Pure state-in/state-out wrappers


def _runtime_from_state(state: StateVector, coins) -> tuple[QuantumRuntime, list[str]]:
    rt = QuantumRuntime(SampledOutcomes(coins=coins))
    labels = [f"r{i}" for i in range(state.num_qubits)]
    rt.load(state, labels, BOB)
    return rt, labels


def gadget_hrz_sueki(
    state: StateVector,
    target: int,
    target_octant: int,
    hiding_octant: int,
    pad_bit: int,
    coins: tuple[float, float],
    prep_sign: int = +1,
) -> tuple[int, tuple[int, int], tuple[int, int], StateVector]:
    """State-level form of the prepare-only H R_Z gadget.

    Returns (announced octant, outcomes, frame delta on target, new state).
    """
    rt, labels = _runtime_from_state(state, coins)
    res = sueki_hrz_on_runtime(
        rt, labels[target], target_octant, hiding_octant, pad_bit, prep_sign
    )
    return res.theta_public, res.outcomes, res.frame_delta, rt.snapshot(labels)


def gadget_cz(
    state: StateVector, target_i: int, target_j: int, coin: float
) -> tuple[int, tuple[int, int], StateVector]:
    """State-level CZ gadget: returns (outcome, (z_i delta, z_j delta), state)."""
    rt, labels = _runtime_from_state(state, (coin,))
    res = cz_on_runtime(rt, labels[target_i], labels[target_j])
    return res.outcome, (res.frame_delta_z_first, 0), rt.snapshot(labels)


# ---------------------------------------------------------------------------
# Euler decomposition


@dataclass(frozen=True)
class EulerAngles:
    """U = e^{i alpha} R_Z(beta) R_X(gamma) R_Z(delta), all angles in [0, 2pi)."""

    alpha: float
    beta: float
    gamma: float
    delta: float

    def matrix(self) -> np.ndarray:
        from .qsim import rx_matrix, rz_matrix

        return (
            cmath.exp(1j * self.alpha)
            * rz_matrix(self.beta)
            @ rx_matrix(self.gamma)
            @ rz_matrix(self.delta)
        )


def _mod_2pi(t: float) -> float:
    return t % (2 * math.pi)


def decompose_unitary(u: np.ndarray, atol: float = 1e-9) -> EulerAngles:
    """Z-X-Z Euler angles of a 2x2 unitary.

    Degenerate cases are canonicalized: when the X rotation is 0 or pi the
    trailing Z angle is set to zero and the leading one carries the whole
    Z rotation.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or not np.allclose(u @ u.conj().T, np.eye(2), atol=1e-9):
        raise ValueError("expected a 2x2 unitary")
    a00, a01 = u[0, 0], u[0, 1]
    a10, a11 = u[1, 0], u[1, 1]
    gamma = 2.0 * math.atan2(abs(a01), abs(a00))
    tiny = 1e-12
    if abs(a01) <= tiny:  # diagonal: no X component
        alpha = cmath.phase(a00)
        angles = EulerAngles(
            _mod_2pi(alpha), _mod_2pi(cmath.phase(a11) - alpha), 0.0, 0.0
        )
    elif abs(a00) <= tiny:  # antidiagonal: full X flip
        alpha = cmath.phase(a01) + math.pi / 2
        beta = cmath.phase(a10) - alpha + math.pi / 2
        angles = EulerAngles(_mod_2pi(alpha), _mod_2pi(beta), math.pi, 0.0)
    else:
        alpha = cmath.phase(a00)
        delta = cmath.phase(a01) - alpha + math.pi / 2
        beta = cmath.phase(a10) - alpha + math.pi / 2
        angles = EulerAngles(
            _mod_2pi(alpha), _mod_2pi(beta), gamma, _mod_2pi(delta)
        )
    residue = float(np.abs(angles.matrix() - u).max())
    if residue > atol:
        raise ValueError(f"decomposition residue {residue} exceeds {atol}")
    return angles


def octant_euler(u: np.ndarray, atol: float = 1e-9) -> tuple[int, int, int]:
    """Euler angles snapped to octants (beta, gamma, delta as k*pi/4).

    Raises if the unitary is not expressible with octant angles.
    """
    angles = decompose_unitary(u)
    ks = []
    for t in (angles.beta, angles.gamma, angles.delta):
        k = round(t / OCTANT) % 8
        ks.append(int(k))
    snapped = EulerAngles(
        angles.alpha, octant_angle(ks[0]), octant_angle(ks[1]), octant_angle(ks[2])
    )
    m = snapped.matrix()
    phase = np.vdot(m.reshape(-1), u.reshape(-1))
    phase = phase / abs(phase)
    if float(np.abs(u - phase * m).max()) > atol:
        raise ValueError("unitary is not octant-decomposable")
    return tuple(ks)  # type: ignore[return-value]


NAMED_GATE_OCTANTS: dict[str, tuple[int, int, int]] = {
    "i": (0, 0, 0),
    "h": (2, 2, 2),
    "x": (0, 4, 0),
    "z": (4, 0, 0),
    "s": (2, 0, 0),
    "t": (1, 0, 0),
    "hx": (6, 2, 2),
}


def pattern_unitary(octants: tuple[int, int, int]) -> np.ndarray:
    """Unitary realized by the four-invocation pattern HRZ(0),HRZ(b),HRZ(g),HRZ(d).

    Equals R_Z(b) R_X(g) R_Z(d) up to the global phase e^{i g/2}.
    """
    kb, kg, kd = octants
    m = np.eye(2, dtype=complex)
    for k in (kd, kg, kb, 0):
        m = Gate.hrz(octant_angle(k)).matrix @ m
    return m
