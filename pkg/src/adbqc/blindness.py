"""Audits that check what the server's view reveals about hidden angles.

Four angles of attack:

- announced-angle uniformity for the prepare-only client (counting);
- no-signaling for the measure-only client: the server's combined
  classical/quantum view at every stage of the rotation gadget is
  identical whatever the octant (exact, via branch enumeration);
- transcript statistics for full protocol runs: a permutation test that
  the server-visible classical record does not separate two angle choices;
- the entangled-probe analysis of the lent-ancilla gadget, with the
  closed-form Gram matrix as the oracle.

Each audit also runs with a deliberately leaky variant in the tests, to
show it would catch a real leak.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .adversary import (
    distinguishability,
    lent_weight_one,
    probe_gram,
    probe_gram_closed_form,
)
from .gadgets import announced_octant
from .qsim import StateVector, haar_random_state
from .rng import stream
from .runtime import OutcomeSource, QuantumRuntime, enumerate_runs
from .transcript import ALICE, BOB, Transcript

NO_SIGNALING_ATOL = 1e-10
NULL_SIGMAS = 5.0

CAPABILITY_QUANTUM_ACTIONS = {
    "prepare_only": frozenset({"prepare", "discard"}),
    "measure_only": frozenset({"measure", "discard"}),
    "gate_only": frozenset({"rotate", "discard"}),
}


@dataclass(frozen=True)
class AuditResult:
    name: str
    passed: bool
    statistic: float
    threshold: float
    details: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Announced-angle uniformity (prepare-only client)


def audit_theta_uniformity() -> AuditResult:
    """The announced octant must cover all eight octants exactly twice over
    the client's sixteen (hiding octant, pad bit) secrets, for every target
    octant and first outcome: 8 targets x 2 outcomes x 8 coverage counts =
    128 deterministic checks, zero tolerance. The mirrored preparation sign
    is swept alongside without adding to the check count."""
    worst = 0
    checks = 0
    for sign in (+1, -1):
        for target in range(8):
            for s1 in (0, 1):
                seen = Counter(
                    announced_octant(target, hide, pad, s1, sign)
                    for hide in range(8)
                    for pad in (0, 1)
                )
                for k in range(8):
                    worst = max(worst, abs(seen.get(k, 0) - 2))
                    if sign == +1:
                        checks += 1
    return AuditResult(
        name="theta_uniformity",
        passed=worst == 0,
        statistic=float(worst),
        threshold=0.0,
        details={"checks": checks},
    )


# ---------------------------------------------------------------------------
# No-signaling through the measure-only rotation gadget


class _Halt(Exception):
    def __init__(self, key: tuple, rho: np.ndarray) -> None:
        self.key = key
        self.rho = rho


def _bob_view_blocks(
    octant: int, state: StateVector, step: int, leak: bool
) -> dict[tuple, np.ndarray]:
    """Server view at a gadget checkpoint, as subnormalized density blocks
    keyed by the server-visible classical record, summed over the client's
    unseen outcome branches."""
    from .protocols.measure_client import p1_hrz_on_runtime

    def run_fn(source: OutcomeSource):
        rt = QuantumRuntime(source)
        labels = [f"r{i}" for i in range(state.num_qubits)]
        rt.load(state, labels, BOB)
        tape = Transcript()

        def checkpoint(at: int) -> None:
            if at == step:
                key = tuple(tape.bob_classical_values())
                if leak:
                    key = key + (octant % 8,)
                raise _Halt(key, rt.density_of(BOB))

        p1_hrz_on_runtime(rt, labels[0], octant, tape, checkpoint=checkpoint)
        raise AssertionError(f"checkpoint {step} never reached")

    blocks: dict[tuple, np.ndarray] = {}
    for branch in enumerate_runs(_catching(run_fn)):
        halt = branch.value
        if halt.key in blocks:
            blocks[halt.key] = blocks[halt.key] + branch.probability * halt.rho
        else:
            blocks[halt.key] = branch.probability * halt.rho
    return blocks


def _catching(run_fn: Callable) -> Callable:
    def wrapped(source: OutcomeSource):
        try:
            run_fn(source)
        except _Halt as halt:
            return halt

    return wrapped


def block_trace_distance(
    a: dict[tuple, np.ndarray], b: dict[tuple, np.ndarray]
) -> float:
    """Trace distance between two classical-quantum block states."""
    total = 0.0
    for key in set(a) | set(b):
        if key in a and key in b:
            diff = a[key] - b[key]
        elif key in a:
            diff = a[key]
        else:
            diff = -b[key]
        total += 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
    return total


def audit_no_signaling(
    state: StateVector | None = None,
    octants: Sequence[int] = tuple(range(8)),
    steps: Sequence[int] = tuple(range(1, 10)),
    atol: float = NO_SIGNALING_ATOL,
    leak: bool = False,
    seed: int = 404,
) -> AuditResult:
    """Exact check that the server's view of the measure-only rotation
    gadget is octant-independent at every stage.

    Enumerates all client-outcome branches of the gadget truncated at each
    checkpoint and compares the server's classical-quantum view across all
    octant pairs by trace distance.
    """
    if state is None:
        state = haar_random_state(1, stream(seed, "no-signaling-state"))
    octants = [k % 8 for k in octants]
    worst = 0.0
    worst_at: tuple | None = None
    for step in steps:
        views = {k: _bob_view_blocks(k, state, step, leak) for k in octants}
        for i, ka in enumerate(octants):
            for kb in octants[i + 1 :]:
                dist = block_trace_distance(views[ka], views[kb])
                if dist > worst:
                    worst = dist
                    worst_at = (step, ka, kb)
    return AuditResult(
        name="no_signaling",
        passed=worst <= atol,
        statistic=worst,
        threshold=atol,
        details={"worst_at": worst_at, "steps": list(steps), "octants": octants},
    )


# ---------------------------------------------------------------------------
# Transcript statistics for full protocol runs


def transcript_signature(transcript: Transcript) -> tuple:
    """The server-visible classical record of one run, as a flat tuple."""
    return tuple(transcript.bob_classical_values())


def _empirical_tv(group_a: list[tuple], group_b: list[tuple]) -> float:
    ca, cb = Counter(group_a), Counter(group_b)
    keys = set(ca) | set(cb)
    na, nb = len(group_a), len(group_b)
    return 0.5 * sum(abs(ca[k] / na - cb[k] / nb) for k in keys)


def audit_transcript_tv(
    run_protocol: Callable,
    config_a,
    config_b,
    runs: int = 200,
    resamples: int = 200,
    seed: int = 1000,
    leak: bool = False,
) -> AuditResult:
    """Permutation test on server-visible transcripts of two angle choices.

    Two groups of runs (independent seeds) are reduced to their classical
    signatures; the observed total-variation distance is compared against a
    null distribution obtained by pooling and resplitting. With ``leak``
    the hidden octants are appended to each signature, which any working
    audit must flag.
    """

    def gather(config, base: int) -> list[tuple]:
        sigs = []
        for t in range(runs):
            res = run_protocol(config.with_seed(base + t))
            sig = transcript_signature(res.transcript)
            if leak:
                secret = tuple(
                    req.resolved_octants()
                    for req in config.algorithm
                    if req.kind == "su"
                )
                sig = sig + (secret,)
            sigs.append(sig)
        return sigs

    group_a = gather(config_a, seed)
    group_b = gather(config_b, seed + runs)
    observed = _empirical_tv(group_a, group_b)

    pool = group_a + group_b
    rng = stream(seed, "transcript-null")
    null = np.empty(resamples)
    for r in range(resamples):
        perm = rng.permutation(len(pool))
        half = len(pool) // 2
        left = [pool[i] for i in perm[:half]]
        right = [pool[i] for i in perm[half:]]
        null[r] = _empirical_tv(left, right)
    threshold = float(np.mean(null) + NULL_SIGMAS * np.std(null))
    return AuditResult(
        name="transcript_tv",
        passed=observed <= threshold,
        statistic=observed,
        threshold=threshold,
        details={"runs": runs, "null_mean": float(np.mean(null)),
                 "null_std": float(np.std(null))},
    )


def audit_gadget_view_tv(
    gadget: str,
    octant_a: int,
    octant_b: int,
    state: StateVector | None = None,
    atol: float = 1e-9,
    leak: bool = False,
) -> AuditResult:
    """Exact total variation between the server's views of one gadget.

    Runs a single rotation gadget at two different octants and compares
    the exact distributions of everything the server sees classically
    (outcomes it measures plus messages it receives), with the client's
    private coins marginalized by explicit enumeration. For the honest
    gadgets the distance must vanish; with ``leak`` the secret octant is
    appended to every view, which must push the distance to one.
    """
    from .protocols.gate_client import p2_hrz_on_runtime
    from .protocols.measure_client import p1_hrz_on_runtime
    from .gadgets import sueki_hrz_on_runtime

    if gadget not in ("hrz-sueki", "p1-a", "p1-b", "p2"):
        raise ValueError(f"gadget {gadget!r} has no angle to hide")
    for octant in (octant_a, octant_b):
        if gadget == "p1-a" and octant % 2:
            raise ValueError("the even-octant gadget needs even octants")
        if gadget == "p1-b" and not octant % 2:
            raise ValueError("the odd-octant gadget needs odd octants")
    if state is None:
        state = haar_random_state(1, stream(99, "gadget-view-input"))

    def distribution(octant: int) -> dict:
        probs: dict = {}

        def add(weight: float, drive: Callable) -> None:
            def body(src: OutcomeSource):
                rt = QuantumRuntime(src)
                rt.load(state, ["r0"], BOB)
                tape = Transcript()
                drive(rt, tape)
                return tuple(tape.bob_classical_values())

            for br in enumerate_runs(body):
                sig = br.value + ((octant,) if leak else ())
                probs[sig] = probs.get(sig, 0.0) + weight * br.probability

        if gadget == "hrz-sueki":
            coins = [(h, p, s) for h in range(8) for p in (0, 1) for s in (+1, -1)]
            for hiding, pad, sign in coins:
                add(
                    1.0 / len(coins),
                    lambda rt, tape, h=hiding, p=pad, g=sign: sueki_hrz_on_runtime(
                        rt, "r0", octant, h, p, g, tape
                    ),
                )
        elif gadget in ("p1-a", "p1-b"):
            add(1.0, lambda rt, tape: p1_hrz_on_runtime(rt, "r0", octant, tape))
        else:
            add(1.0, lambda rt, tape: p2_hrz_on_runtime(rt, "r0", octant, tape))
        return probs

    pa = distribution(octant_a)
    pb = distribution(octant_b)
    tv = 0.5 * sum(abs(pa.get(k, 0.0) - pb.get(k, 0.0)) for k in set(pa) | set(pb))
    return AuditResult(
        name="gadget_view_tv",
        passed=tv <= atol,
        statistic=float(tv),
        threshold=atol,
        details={"gadget": gadget, "views_a": len(pa), "views_b": len(pb)},
    )


# ---------------------------------------------------------------------------
# Entangled-probe analysis of the lent-ancilla gadget


def audit_probe_gram(
    num_probes: int = 100, atol: float = 1e-10, seed: int = 77
) -> AuditResult:
    """Check the closed-form probe Gram matrix against direct simulation.

    Random two-qubit probes (lent qubit plus server memory): the overlap
    pattern across the eight octant hypotheses must match
    (1 - w) + w exp(i (k' - k) pi / 4) entrywise.
    """
    rng = stream(seed, "probe-states")
    worst = 0.0
    sharpest = 0.0
    for _ in range(num_probes):
        probe = haar_random_state(2, rng)
        direct = probe_gram(probe, lent_qubit=0)
        closed = probe_gram_closed_form(lent_weight_one(probe, 0))
        worst = max(worst, float(np.max(np.abs(direct - closed))))
        sharpest = max(sharpest, distinguishability(direct))
    return AuditResult(
        name="probe_gram",
        passed=worst <= atol,
        statistic=worst,
        threshold=atol,
        details={"probes": num_probes, "max_distinguishability": sharpest},
    )


# ---------------------------------------------------------------------------
# Capability confinement


def client_quantum_actions(transcript: Transcript) -> set[str]:
    """Quantum operations the client performed, from its local record."""
    actions: set[str] = set()
    for ev in transcript.events:
        if ev.party != ALICE:
            continue
        if ev.kind == "outcome":
            actions.add("measure")
        elif ev.kind == "local":
            op = ev.payload.get("op")
            if op in ("prepare", "rotate", "discard", "measure"):
                actions.add(op)
    return actions


def client_to_server_traffic(transcript: Transcript) -> tuple[int, int]:
    """(classical messages, qubit transfers) sent client to server."""
    msgs = transfers = 0
    for ev in transcript.events:
        if ev.party == ALICE and ev.to == BOB:
            if ev.kind == "msg":
                msgs += 1
            elif ev.kind == "transfer":
                transfers += 1
    return msgs, transfers


def confirm_capability(transcript: Transcript, capability: str) -> AuditResult:
    """Check the client never used a quantum ability outside its class."""
    allowed = CAPABILITY_QUANTUM_ACTIONS.get(capability)
    if allowed is None:
        raise ValueError(f"unknown capability {capability!r}")
    used = client_quantum_actions(transcript)
    extra = used - allowed
    return AuditResult(
        name="capability_confinement",
        passed=not extra,
        statistic=float(len(extra)),
        threshold=0.0,
        details={"capability": capability, "used": sorted(used),
                 "violations": sorted(extra)},
    )
