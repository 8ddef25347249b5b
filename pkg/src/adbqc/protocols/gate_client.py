"""Gate-only client protocol (protocol 2).

The client owns a single fixed gate: the one-octant phase rotation. For
each hidden rotation the server couples a fresh |+> ancilla to the target
and lends the ancilla out; the client turns it k times and hands it back;
the server X-measures it and announces the outcome. The turn count never
appears on the wire, so the server learns nothing about the angle.

In a full run the client also adds a private half turn (four extra
octants) to each rotation with probability one half. That flips the X
by-product by a bit only the client knows, so the raw output bits the
server measures and reports at the end are one-time padded: their
statistics reveal nothing about the computation. The client's frame
absorbs the pads, so decoding is unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from ..gadgets import OCTANT, PauliFrame, couple
from ..qsim import Gate, MeasurementBasis, StateVector, plus_state
from ..runtime import OutcomeSource, QuantumRuntime, SampledOutcomes
from ..transcript import ALICE, BOB, Transcript
from .config import ProtocolConfig, VerificationReport
from .driver import (
    Session,
    compile_layers,
    new_session,
    prepare_register,
    register_label,
    run_grid,
)
from .traps import DecodedOutput, TrapLayout, decode_output, place_traps


def p2_hrz_on_runtime(
    rt: QuantumRuntime,
    target: str,
    octant: int,
    tape: Transcript | None = None,
    mint: Callable[[str], str] | None = None,
) -> int:
    """One gate-driven H R_Z(octant * pi/4); returns the X by-product.

    Exactly one qubit travels each way and one classical bit comes back.
    """
    octant %= 8
    anc = mint("g") if mint is not None else f"g_{target}"

    rt.add_qubit(anc, plus_state(math.pi / 2, 0.0), BOB)
    couple(rt, anc, target)
    rt.transfer(anc, ALICE)
    if tape:
        tape.local(BOB, op="prepare", qubit=anc, which="plus")
        tape.local(BOB, op="couple", qubits=[anc, target])
        tape.transfer(BOB, ALICE, anc)

    # the client's whole contribution: k turns of its fixed rotation
    rt.apply(Gate.rz(octant * OCTANT), [anc])
    rt.transfer(anc, BOB)
    if tape:
        tape.local(ALICE, op="rotate", qubit=anc, turns=octant)
        tape.transfer(ALICE, BOB, anc)

    s, _ = rt.measure(anc, MeasurementBasis.x())
    if tape:
        tape.outcome(BOB, s, qubit=anc)
        tape.msg(BOB, to=ALICE, outcome=s)
    rt.discard(anc)
    return s


def p2_hrz(
    state: StateVector, target: int, octant: int, coin: float
) -> tuple[int, int, StateVector]:
    """State-level form: returns (server outcome, X by-product, new state)."""
    rt = QuantumRuntime(SampledOutcomes(coins=(coin,)))
    labels = [f"r{i}" for i in range(state.num_qubits)]
    rt.load(state, labels, BOB)
    s = p2_hrz_on_runtime(rt, labels[target], octant)
    return s, s, rt.snapshot(labels)


def _hrz(session: Session, label: str, octant: int) -> int:
    # private half-turn pad: one-time-pads the by-product bit (see module
    # docstring); the returned delta accounts for it, the server cannot
    pad = int(session.alice_rng.integers(2))
    s = p2_hrz_on_runtime(
        session.rt, label, (octant + 4 * pad) % 8, session.tape, mint=session.fresh
    )
    return s ^ pad


@dataclass(frozen=True)
class P2RunResult:
    transcript: Transcript
    report: VerificationReport
    layout: TrapLayout
    frame: PauliFrame
    raw_bits: tuple[int, ...]
    decoded: DecodedOutput


def run_protocol2(
    config: ProtocolConfig, outcomes: OutcomeSource | None = None
) -> P2RunResult:
    if config.protocol != "p2":
        raise ValueError(f"config is for protocol {config.protocol!r}")
    session = new_session(config, outcomes)
    layout = place_traps(
        config.num_qubits, config.trap_count, "p2", session.alice_rng
    )
    prepare_register(session)
    layers = compile_layers(config, layout)
    frame = run_grid(session, layers, _hrz, cz_prep_party=BOB)

    # the client announces a basis per position; the server measures there
    # and reports, possibly lying with the tamper model
    adv = config.adversary
    bases = layout.basis_plan(config.plan())
    raw = []
    for pos in range(config.num_qubits):
        label = register_label(pos)
        session.tape.msg(ALICE, to=BOB, op="measure", qubit=label, basis=bases[pos])
        basis = MeasurementBasis.z() if bases[pos] == "z" else MeasurementBasis.x()
        bit, _ = session.rt.measure(label, basis)
        reported = bit
        if adv.kind == "trap_tamper":
            if session.adversary_rng.random() >= adv.tamper_rate:
                reported = bit ^ 1
        session.tape.outcome(BOB, reported, qubit=label)
        session.tape.msg(BOB, to=ALICE, op="report", qubit=label, bit=reported)
        raw.append(reported)

    decoded = decode_output(tuple(raw), bases, frame, layout)
    report = VerificationReport(
        accepted=decoded.trap_errors == 0,
        trap_errors=decoded.trap_errors,
        trap_total=decoded.trap_total,
        computation_bits=decoded.computation_bits,
        transcript_digest=session.tape.digest(),
    )
    return P2RunResult(session.tape, report, layout, frame, tuple(raw), decoded)
