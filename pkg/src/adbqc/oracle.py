"""Per-branch soundness tables for the measurement-driven gate gadgets.

Each gadget is replayed over every outcome path on a fixed input state; a
row records the path's outcomes, its exact probability, and the fidelity of
the frame-corrected output against the ideal gate. The ``oracle`` CLI
subcommand prints these tables and the acceptance suite sweeps them over
random inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import rng
from .gadgets import PauliFrame, cz_on_runtime, octant_angle, sueki_hrz_on_runtime
from .protocols.gate_client import p2_hrz_on_runtime
from .protocols.measure_client import p1_hrz_on_runtime
from .qsim import Gate, StateVector, apply_gate, fidelity_up_to_phase, haar_random_state
from .runtime import OutcomeSource, QuantumRuntime, enumerate_runs
from .transcript import BOB

GADGET_FIDELITY_ATOL = 1e-9

ORACLE_GADGETS = ("hrz-sueki", "p1-a", "p1-b", "p2", "cz")


@dataclass(frozen=True)
class BranchRow:
    """One outcome path of a single gadget application."""

    outcomes: tuple[int, ...]
    probability: float
    fidelity: float
    announced: int | None = None  # octant the prepare-only client discloses


def admissible_octants(gadget: str) -> tuple[int, ...]:
    """Octants a gadget can realize directly.

    The measure-only client's gadget splits by parity: the even octants ride
    on a computational first measurement, the odd ones on an equatorial one.
    The coupling gadget takes no angle at all.
    """
    if gadget not in ORACLE_GADGETS:
        raise ValueError(f"unknown gadget {gadget!r}")
    if gadget == "p1-a":
        return (0, 2, 4, 6)
    if gadget == "p1-b":
        return (1, 3, 5, 7)
    if gadget == "cz":
        return (0,)
    return tuple(range(8))


def branch_table(
    gadget: str,
    octant: int = 0,
    state: StateVector | None = None,
    hidden: tuple[int, int, int] | None = None,
    seed: int = 2026,
) -> tuple[BranchRow, ...]:
    """Enumerate every outcome branch of one gadget application.

    ``hidden`` pins the prepare-only client's secrets (hiding octant, pad
    bit, prep sign); when omitted they are drawn from ``seed``, as is the
    Haar-random input ``state``. Branch probabilities are exact.
    """
    if octant not in admissible_octants(gadget):
        raise ValueError(f"octant {octant} is not admissible for gadget {gadget!r}")
    num_qubits = 2 if gadget == "cz" else 1
    if state is None:
        state = haar_random_state(num_qubits, rng.stream(seed, "oracle-input"))
    if state.num_qubits != num_qubits:
        raise ValueError(f"gadget {gadget!r} acts on {num_qubits} qubit(s)")
    if hidden is None:
        draw = rng.stream(seed, "oracle-secrets")
        hidden = (int(draw.integers(8)), int(draw.integers(2)), -1 if draw.integers(2) else +1)

    if gadget == "cz":
        target = apply_gate(state, Gate.cz(), [1, 0])
    else:
        target = apply_gate(state, Gate.hrz(octant_angle(octant)), [0])

    def run(src: OutcomeSource):
        rt = QuantumRuntime(src)
        labels = [f"r{i}" for i in range(num_qubits)]
        rt.load(state, labels, BOB)
        announced = None
        if gadget == "hrz-sueki":
            res = sueki_hrz_on_runtime(
                rt, labels[0], octant, hidden[0], hidden[1], prep_sign=hidden[2]
            )
            frame = PauliFrame((res.frame_delta[0],), (res.frame_delta[1],))
            announced = res.theta_public
        elif gadget in ("p1-a", "p1-b"):
            frame = PauliFrame((p1_hrz_on_runtime(rt, labels[0], octant),), (0,))
        elif gadget == "p2":
            frame = PauliFrame((p2_hrz_on_runtime(rt, labels[0], octant),), (0,))
        else:
            res = cz_on_runtime(rt, labels[0], labels[1])
            frame = PauliFrame((0, 0), (res.frame_delta_z_first, 0))
        out = frame.matrix_on(rt.snapshot(labels))
        return fidelity_up_to_phase(out, target), announced

    rows = []
    for br in enumerate_runs(run):
        fid, announced = br.value
        rows.append(BranchRow(br.outcomes, br.probability, float(fid), announced))
    return tuple(rows)


def table_passes(rows) -> bool:
    return all(row.fidelity >= 1.0 - GADGET_FIDELITY_ATOL for row in rows)


def soundness_sweep(states_per_octant: int = 4, seed: int = 2026) -> tuple[float, int]:
    """Worst branch fidelity over every gadget, octant, and random input.

    Returns (worst fidelity, number of random input states consumed). With
    the default four states per admissible octant the sweep uses exactly
    100 inputs: 8 + 4 + 4 + 8 + 1 = 25 combinations times four.
    """
    worst = 1.0
    count = 0
    for gadget in ORACLE_GADGETS:
        width = 2 if gadget == "cz" else 1
        for octant in admissible_octants(gadget):
            for _ in range(states_per_octant):
                state = haar_random_state(width, rng.stream(seed, "oracle-sweep", count))
                draw = rng.stream(seed, "oracle-secrets", count)
                hidden = (
                    int(draw.integers(8)),
                    int(draw.integers(2)),
                    -1 if draw.integers(2) else +1,
                )
                rows = branch_table(gadget, octant, state=state, hidden=hidden)
                worst = min(worst, min(row.fidelity for row in rows))
                count += 1
    return worst, count
