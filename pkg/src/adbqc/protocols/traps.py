"""Trap placement and output decoding.

A layout assigns each register position a role: computation slot or trap.
Traps are single-qubit eigenstates prepared through the same gadget
pipeline as everything else; at the end they are measured in their own
basis and any frame-corrected mismatch is evidence of tampering.

The slot order is: computation slots first (in logical order), then traps.
``permutation[slot]`` is the physical register position of that slot, drawn
uniformly so the server cannot tell roles apart by position.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..gadgets import PauliFrame

# trap role -> (measurement basis, expected frame-corrected bit)
TRAP_STATES = {
    "zero": ("z", 0),
    "one": ("z", 1),
    "plus": ("x", 0),
    "minus": ("x", 1),
}

# trap role -> named preparation gate (applied to |0> by the final layer)
TRAP_PREP_GATE = {
    "zero": "i",
    "one": "x",
    "plus": "h",
    "minus": "hx",
}

P2_TRAP_ROLES = ("zero", "one", "plus", "minus")


@dataclass(frozen=True)
class TrapLayout:
    """Slot roles plus the slot-to-position permutation."""

    num_qubits: int
    permutation: tuple[int, ...]
    roles: tuple[str, ...]  # per slot: "compute" or a TRAP_STATES key

    def __post_init__(self) -> None:
        if sorted(self.permutation) != list(range(self.num_qubits)):
            raise ValueError("permutation must be a bijection on positions")
        if len(self.roles) != self.num_qubits:
            raise ValueError("need one role per slot")
        for role in self.roles:
            if role != "compute" and role not in TRAP_STATES:
                raise ValueError(f"unknown role {role!r}")

    @property
    def compute_slots(self) -> tuple[int, ...]:
        return tuple(s for s, r in enumerate(self.roles) if r == "compute")

    @property
    def trap_slots(self) -> tuple[int, ...]:
        return tuple(s for s, r in enumerate(self.roles) if r != "compute")

    def position_of_logical(self, q: int) -> int:
        return self.permutation[self.compute_slots[q]]

    def role_at_position(self, pos: int) -> str:
        return self.roles[self.permutation.index(pos)]

    def basis_plan(self, computation_plan: tuple[str, ...]) -> tuple[str, ...]:
        """Measurement basis per physical position."""
        bases = [""] * self.num_qubits
        for s, role in enumerate(self.roles):
            pos = self.permutation[s]
            if role == "compute":
                logical = self.compute_slots.index(s)
                bases[pos] = computation_plan[logical]
            else:
                bases[pos] = TRAP_STATES[role][0]
        return tuple(bases)


def place_traps(
    num_qubits: int, trap_count: int, protocol: str, rng: np.random.Generator
) -> TrapLayout:
    """Draw a fresh trap layout for one run.

    The measure-only protocol (p1) uses equal thirds: computation, |0>
    traps, |+> traps. The gate-only protocol (p2) draws each trap state
    uniformly from {|0>, |1>, |+>, |->}.
    """
    if protocol == "p1":
        if num_qubits % 3 != 0 or trap_count != 2 * num_qubits // 3:
            raise ValueError("p1 layouts need N divisible by 3 and 2N/3 traps")
        width = num_qubits // 3
        roles = ("compute",) * width + ("zero",) * width + ("plus",) * width
    elif protocol == "p2":
        if not 0 < trap_count < num_qubits:
            raise ValueError("p2 trap count must satisfy 0 < traps < N")
        width = num_qubits - trap_count
        trap_roles = tuple(
            P2_TRAP_ROLES[int(rng.integers(len(P2_TRAP_ROLES)))] for _ in range(trap_count)
        )
        roles = ("compute",) * width + trap_roles
    else:
        raise ValueError(f"protocol {protocol!r} does not place traps")
    permutation = tuple(int(p) for p in rng.permutation(num_qubits))
    return TrapLayout(num_qubits, permutation, roles)


@dataclass(frozen=True)
class DecodedOutput:
    computation_bits: tuple[int, ...]
    trap_errors: int
    trap_total: int
    failed_positions: tuple[int, ...]


def decode_output(
    raw_bits: tuple[int, ...],
    bases: tuple[str, ...],
    frame: PauliFrame,
    layout: TrapLayout,
) -> DecodedOutput:
    """Frame-correct the raw output bits, unscramble the permutation and
    check every trap.

    A pending X flips Z-basis results; a pending Z flips X-basis results.
    """
    n = layout.num_qubits
    if len(raw_bits) != n or len(bases) != n or len(frame.x) != n:
        raise ValueError("raw bits, bases and frame must cover every position")
    corrected = []
    for pos in range(n):
        flip = frame.x[pos] if bases[pos] == "z" else frame.z[pos]
        corrected.append(raw_bits[pos] ^ flip)
    computation: list[int] = []
    errors = 0
    failed: list[int] = []
    total = 0
    for s, role in enumerate(layout.roles):
        pos = layout.permutation[s]
        if role == "compute":
            computation.append(corrected[pos])
        else:
            total += 1
            expected_basis, expected_bit = TRAP_STATES[role]
            if bases[pos] != expected_basis:
                raise ValueError(
                    f"trap at position {pos} measured in {bases[pos]!r}, "
                    f"needs {expected_basis!r}"
                )
            if corrected[pos] != expected_bit:
                errors += 1
                failed.append(pos)
    return DecodedOutput(tuple(computation), errors, total, tuple(failed))
