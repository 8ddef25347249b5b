"""Shared two-party execution machinery for the three protocols.

A session bundles the joint quantum runtime, the transcript, and one named
random stream per decision maker (client choices, server choices,
adversary, measurement outcomes), all derived from the run seed so a rerun
or an outcome-enumeration replay repeats every choice exactly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..gadgets import NAMED_GATE_OCTANTS, PauliFrame, cz_on_runtime
from ..qsim import Gate
from ..rng import stream
from ..runtime import OutcomeSource, QuantumRuntime, SampledOutcomes
from ..transcript import BOB, Transcript
from .config import ProtocolConfig
from .schedule import Layer, schedule
from .traps import TRAP_PREP_GATE, TrapLayout


@dataclass
class Session:
    config: ProtocolConfig
    rt: QuantumRuntime
    tape: Transcript
    alice_rng: np.random.Generator
    bob_rng: np.random.Generator
    adversary_rng: np.random.Generator
    counter: "itertools.count[int]" = field(default_factory=itertools.count)

    def fresh(self, prefix: str) -> str:
        return f"{prefix}{next(self.counter)}"


def new_session(
    config: ProtocolConfig, outcomes: OutcomeSource | None = None
) -> Session:
    source = outcomes or SampledOutcomes(rng=stream(config.seed, "outcomes"))
    return Session(
        config=config,
        rt=QuantumRuntime(source),
        tape=Transcript(record=config.record_transcript),
        alice_rng=stream(config.seed, "alice"),
        bob_rng=stream(config.seed, "bob"),
        adversary_rng=stream(config.seed, "adversary"),
    )


def register_label(pos: int) -> str:
    return f"q{pos}"


def prepare_register(session: Session) -> list[str]:
    """Server initializes every register qubit to |0>."""
    labels = []
    for pos in range(session.config.num_qubits):
        label = register_label(pos)
        session.rt.add_qubit(label, np.array([1, 0], dtype=complex), BOB)
        labels.append(label)
    session.tape.local(BOB, op="prepare_register", width=session.config.num_qubits)
    return labels


@dataclass(frozen=True)
class PhysicalLayer:
    patterns: tuple[tuple[int, int, int], ...]  # octants per physical position
    czs: tuple[tuple[int, int], ...]  # physical position pairs


def compile_layers(
    config: ProtocolConfig, layout: TrapLayout | None
) -> tuple[PhysicalLayer, ...]:
    """Map scheduled logical layers onto physical positions, pad idle
    positions with identity patterns and append trap preparations in the
    final layer."""
    width = config.logical_width
    logical_layers: tuple[Layer, ...] = schedule(config.algorithm, width, config.depth)
    n = config.num_qubits
    out = []
    for idx, layer in enumerate(logical_layers):
        patterns = [(0, 0, 0)] * n
        for q, octants in layer.patterns:
            pos = layout.position_of_logical(q) if layout else q
            patterns[pos] = octants
        if layout and idx == config.depth - 1:
            for s in layout.trap_slots:
                pos = layout.permutation[s]
                patterns[pos] = NAMED_GATE_OCTANTS[TRAP_PREP_GATE[layout.roles[s]]]
        czs = tuple(
            (
                layout.position_of_logical(i) if layout else i,
                layout.position_of_logical(j) if layout else j,
            )
            for i, j in layer.czs
        )
        out.append(PhysicalLayer(tuple(patterns), czs))
    return tuple(out)


HrzFn = Callable[[Session, str, int], int]


def run_grid(
    session: Session,
    layers: tuple[PhysicalLayer, ...],
    hrz: HrzFn,
    cz_prep_party: str = BOB,
) -> PauliFrame:
    """Drive every pattern slot and CZ through gadgets, tracking the frame.

    Each pattern is four H R_Z invocations with angles (0, b, g, d); the
    frame's pending X flips the sign of the angle actually driven, and each
    invocation swaps the X/Z records and absorbs the gadget's by-product.
    """
    n = session.config.num_qubits
    x = [0] * n
    z = [0] * n
    for layer in layers:
        for pos in range(n):
            kb, kg, kd = layer.patterns[pos]
            label = register_label(pos)
            for k in (kd, kg, kb, 0):
                k_eff = k if x[pos] == 0 else (-k) % 8
                delta = hrz(session, label, k_eff)
                x[pos], z[pos] = delta ^ z[pos], x[pos]
        for pi, pj in layer.czs:
            res = cz_on_runtime(
                session.rt,
                register_label(pi),
                register_label(pj),
                session.tape,
                prep_party=cz_prep_party,
                labels=(session.fresh("c"), session.fresh("c"), session.fresh("c")),
            )
            z[pi] ^= x[pj] ^ res.frame_delta_z_first
            z[pj] ^= x[pi]
    return PauliFrame(tuple(x), tuple(z))


def sample_attack(
    session: Session,
) -> tuple[tuple[str, int], ...]:
    """Resolve the random-Pauli adversary to concrete (kind, position) hits."""
    adv = session.config.adversary
    if adv.kind != "random_pauli":
        return ()
    if adv.pauli_positions is not None:
        return adv.pauli_positions
    a, b, c = adv.pauli_counts
    order = [int(p) for p in session.adversary_rng.permutation(session.config.num_qubits)]
    hits = [("x", p) for p in order[:a]]
    hits += [("z", p) for p in order[a : a + b]]
    hits += [("xz", p) for p in order[a + b : a + b + c]]
    return tuple(hits)


def apply_attack(session: Session, hits: tuple[tuple[str, int], ...]) -> None:
    """Server deviation: stray Paulis on output positions before handover."""
    for kind, pos in hits:
        label = register_label(pos)
        if "z" in kind:
            session.rt.apply(Gate.z(), [label])
        if "x" in kind:
            session.rt.apply(Gate.x(), [label])
