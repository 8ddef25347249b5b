"""Direct (single-party) simulation of a configured algorithm.

Gives the ground-truth output distribution a protocol run must reproduce:
the scheduled patterns and CZs are applied as plain unitaries on the
logical register and the measurement statistics read off the final state.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import replace

from ..gadgets import pattern_unitary
from ..qsim import Gate, StateVector, apply_gate
from ..runtime import OutcomeSource, enumerate_runs
from .config import ProtocolConfig
from .schedule import schedule


def reference_state(config: ProtocolConfig) -> StateVector:
    """Run the algorithm as bare unitaries on |0...0> (logical width only)."""
    width = config.logical_width
    state = StateVector.zero(width)
    for layer in schedule(config.algorithm, width, config.depth):
        for q, octants in layer.patterns:
            state = apply_gate(state, Gate.custom(pattern_unitary(octants)), [q])
        for i, j in layer.czs:
            state = apply_gate(state, Gate.cz(), [i, j])
    return state


def reference_distribution(config: ProtocolConfig) -> dict[tuple[int, ...], float]:
    """Exact joint distribution of the logical output bits.

    Bit q of each key is logical qubit q, measured in its configured basis.
    """
    state = reference_state(config)
    for q, basis in enumerate(config.plan()):
        if basis == "x":
            state = apply_gate(state, Gate.h(), [q])
    weights = state.probability_weights()
    out: dict[tuple[int, ...], float] = {}
    for idx, w in enumerate(weights):
        if w <= 0.0:
            continue
        bits = tuple((idx >> q) & 1 for q in range(state.num_qubits))
        out[bits] = out.get(bits, 0.0) + float(w)
    return out


def enumerated_distribution(
    run_protocol, config: ProtocolConfig, branch_budget: int = 1 << 16
) -> dict[tuple[int, ...], float]:
    """Exact decoded-output distribution of a protocol, all branches.

    ``run_protocol`` is one of the three run entry points; every outcome
    path is replayed and the decoded computation bits accumulated with
    their path probabilities.
    """
    quiet = replace(config, record_transcript=False)

    def run_fn(source: OutcomeSource):
        return run_protocol(quiet, outcomes=source).report.computation_bits

    out: dict[tuple[int, ...], float] = {}
    for branch in enumerate_runs(run_fn, branch_budget=branch_budget):
        key = tuple(branch.value)
        out[key] = out.get(key, 0.0) + branch.probability
    return out


def sampled_distribution(
    run_protocol, config: ProtocolConfig, trials: int
) -> dict[tuple[int, ...], float]:
    """Monte Carlo decoded-output distribution over fresh seeds."""
    quiet = replace(config, record_transcript=False)
    counts: Counter = Counter()
    for t in range(trials):
        res = run_protocol(quiet.with_seed(config.seed + t))
        counts[tuple(res.report.computation_bits)] += 1
    return {bits: c / trials for bits, c in counts.items()}


def total_variation(
    p: dict[tuple[int, ...], float], q: dict[tuple[int, ...], float]
) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)
