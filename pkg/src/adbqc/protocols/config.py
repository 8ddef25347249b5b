"""Run configuration, manifests and reports for the three protocols.

``sueki`` is the prepare-only-client protocol (no traps), ``p1`` the
measure-only-client protocol (two thirds of the register are traps), and
``p2`` the gate-only-client protocol (a chosen number of traps). The
configuration pins everything a rerun needs: register width, layer count,
trap count, the gate requests, the output measurement plan, the adversary
and the root seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

from ..gadgets import NAMED_GATE_OCTANTS

PROTOCOLS = ("sueki", "p1", "p2")

CAPABILITY_BY_PROTOCOL = {
    "sueki": "prepare_only",
    "p1": "measure_only",
    "p2": "gate_only",
}


@dataclass(frozen=True)
class ClientCapability:
    """What the client is physically able to do."""

    kind: str  # prepare_only | measure_only | gate_only

    def __post_init__(self) -> None:
        if self.kind not in ("prepare_only", "measure_only", "gate_only"):
            raise ValueError(f"unknown capability {self.kind!r}")


@dataclass(frozen=True)
class GateRequest:
    """One algorithm step: a single-qubit pattern or a CZ between two qubits.

    Single-qubit requests carry Euler octants (beta, gamma, delta), meaning
    R_Z(b pi/4) R_X(g pi/4) R_Z(d pi/4), or a named gate that resolves to
    octants. Targets are logical computation-qubit indices.
    """

    kind: str  # "su" | "cz"
    targets: tuple[int, ...]
    octants: tuple[int, int, int] | None = None
    name: str | None = None

    def __post_init__(self) -> None:
        if self.kind == "su":
            if len(self.targets) != 1:
                raise ValueError("single-qubit request needs exactly one target")
            if (self.octants is None) == (self.name is None):
                raise ValueError("give either octants or a gate name")
            if self.name is not None and self.name not in NAMED_GATE_OCTANTS:
                raise ValueError(f"unknown gate name {self.name!r}")
            if self.octants is not None and (
                len(self.octants) != 3 or any(not 0 <= k <= 7 for k in self.octants)
            ):
                raise ValueError(f"octants must be three values in 0..7: {self.octants}")
        elif self.kind == "cz":
            if len(self.targets) != 2 or self.targets[0] == self.targets[1]:
                raise ValueError("cz needs two distinct targets")
            if self.octants is not None or self.name is not None:
                raise ValueError("cz takes no angles")
        else:
            raise ValueError(f"unknown request kind {self.kind!r}")

    @classmethod
    def single(cls, target: int, octants=None, name=None) -> "GateRequest":
        octs = tuple(octants) if octants is not None else None
        return cls("su", (target,), octs, name)

    @classmethod
    def cz_pair(cls, i: int, j: int) -> "GateRequest":
        return cls("cz", (i, j))

    def resolved_octants(self) -> tuple[int, int, int]:
        if self.kind != "su":
            raise ValueError("only single-qubit requests carry octants")
        if self.name is not None:
            return NAMED_GATE_OCTANTS[self.name]
        return self.octants  # type: ignore[return-value]


@dataclass(frozen=True)
class AdversaryConfig:
    """Server deviation model.

    - none: honest run.
    - random_pauli: X / Z / XZ errors on disjoint uniformly random output
      positions, counts given by ``pauli_counts``.
    - trap_tamper: every reported output bit is correct only with
      probability ``tamper_rate``, independently.
    - entangled_probe: analysis-only; a probe state for the gate-driving
      audit machinery. Not runnable inside a protocol run.
    """

    kind: str = "none"
    pauli_counts: tuple[int, int, int] = (0, 0, 0)
    tamper_rate: float = 0.0
    probe_amplitudes: tuple[complex, ...] | None = None
    pauli_positions: tuple[tuple[str, int], ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("none", "random_pauli", "trap_tamper", "entangled_probe"):
            raise ValueError(f"unknown adversary kind {self.kind!r}")
        if self.kind == "random_pauli":
            if any(c < 0 for c in self.pauli_counts):
                raise ValueError("pauli counts must be non-negative")
            if self.pauli_positions is not None:
                kinds = [k for k, _ in self.pauli_positions]
                spots = [p for _, p in self.pauli_positions]
                if any(k not in ("x", "z", "xz") for k in kinds):
                    raise ValueError("pauli position kinds must be x, z or xz")
                if len(set(spots)) != len(spots):
                    raise ValueError("pauli positions must be distinct")
        elif self.pauli_positions is not None:
            raise ValueError("pauli_positions only applies to random_pauli")
        if self.kind == "trap_tamper" and not 0.0 <= self.tamper_rate <= 1.0:
            raise ValueError(f"tamper rate {self.tamper_rate} outside [0, 1]")


HONEST = AdversaryConfig()


@dataclass(frozen=True)
class ProtocolConfig:
    """Everything that defines one run; the seed makes it reproducible."""

    protocol: str
    num_qubits: int
    depth: int
    trap_count: int | None = None
    seed: int = 0
    algorithm: tuple[GateRequest, ...] = ()
    output_bases: tuple[str, ...] | None = None
    adversary: AdversaryConfig = HONEST
    record_transcript: bool = True

    def __post_init__(self) -> None:
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if self.num_qubits < 1:
            raise ValueError("need at least one register qubit")
        if self.depth < 1:
            raise ValueError("need at least one layer")
        object.__setattr__(self, "algorithm", tuple(self.algorithm))
        # resolve the trap count
        if self.protocol == "sueki":
            if self.trap_count not in (None, 0):
                raise ValueError("the prepare-only protocol takes no traps")
            object.__setattr__(self, "trap_count", 0)
        elif self.protocol == "p1":
            if self.num_qubits % 3 != 0:
                raise ValueError("p1 needs a register width divisible by 3")
            required = 2 * self.num_qubits // 3
            if self.trap_count not in (None, required):
                raise ValueError(f"p1 fixes trap_count to 2N/3 = {required}")
            object.__setattr__(self, "trap_count", required)
        else:  # p2
            if self.trap_count is None:
                raise ValueError("p2 needs an explicit trap count")
            if not 0 < self.trap_count < self.num_qubits:
                raise ValueError("p2 trap count must satisfy 0 < traps < N")
        if self.logical_width < 1:
            raise ValueError("no computation qubits left after traps")
        for req in self.algorithm:
            if any(not 0 <= q < self.logical_width for q in req.targets):
                raise ValueError(
                    f"request targets {req.targets} outside logical width "
                    f"{self.logical_width}"
                )
        if self.output_bases is not None:
            bases = tuple(b.lower() for b in self.output_bases)
            if len(bases) != self.logical_width or any(b not in ("z", "x") for b in bases):
                raise ValueError("output_bases needs one of z/x per computation qubit")
            object.__setattr__(self, "output_bases", bases)
        if self.adversary.kind == "entangled_probe":
            raise ValueError(
                "the entangled-probe adversary is analysis-only; "
                "use the blindness audit entry points"
            )
        if self.adversary.kind == "random_pauli":
            if self.protocol != "p1":
                raise ValueError(
                    "the stray-Pauli adversary acts on the handed-over register, "
                    "which only p1 has"
                )
            if sum(self.adversary.pauli_counts) > self.num_qubits:
                raise ValueError("more Pauli errors than output positions")
            if self.adversary.pauli_positions is not None and any(
                not 0 <= p < self.num_qubits
                for _, p in self.adversary.pauli_positions
            ):
                raise ValueError("pauli position outside the register")
        if self.adversary.kind == "trap_tamper" and self.protocol != "p2":
            raise ValueError(
                "the report-tamper adversary corrupts server-reported bits, "
                "which only p2 has"
            )

    @property
    def logical_width(self) -> int:
        return self.num_qubits - (self.trap_count or 0)

    @property
    def capability(self) -> ClientCapability:
        return ClientCapability(CAPABILITY_BY_PROTOCOL[self.protocol])

    def plan(self) -> tuple[str, ...]:
        return self.output_bases or ("z",) * self.logical_width

    def with_seed(self, seed: int) -> "ProtocolConfig":
        return replace(self, seed=seed)


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of the trap check plus the decoded computation bits."""

    accepted: bool
    trap_errors: int
    trap_total: int
    computation_bits: tuple[int, ...]
    transcript_digest: str

    def as_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "trap_errors": self.trap_errors,
            "trap_total": self.trap_total,
            "computation_bits": list(self.computation_bits),
            "transcript_digest": self.transcript_digest,
        }


# ---------------------------------------------------------------------------
# Manifest (de)serialization


def config_to_dict(config: ProtocolConfig) -> dict:
    adv = config.adversary
    params: dict = {}
    if adv.kind == "random_pauli":
        params["pauli_counts"] = list(adv.pauli_counts)
        if adv.pauli_positions is not None:
            params["pauli_positions"] = [[k, p] for k, p in adv.pauli_positions]
    elif adv.kind == "trap_tamper":
        params["tamper_rate"] = adv.tamper_rate
    return {
        "protocol": config.protocol,
        "num_register_qubits": config.num_qubits,
        "depth": config.depth,
        "trap_count": config.trap_count,
        "seed": config.seed,
        "algorithm": [
            {
                "kind": r.kind,
                "targets": list(r.targets),
                **({"octants": list(r.octants)} if r.octants is not None else {}),
                **({"name": r.name} if r.name is not None else {}),
            }
            for r in config.algorithm
        ],
        "output_bases": list(config.output_bases) if config.output_bases else None,
        "adversary": {"kind": adv.kind, "params": params},
    }


def config_from_dict(data: dict) -> ProtocolConfig:
    adv_data = data.get("adversary") or {}
    # accept the parameters nested under "params" or flattened beside "kind"
    params = {**adv_data, **(adv_data.get("params") or {})}
    raw_positions = params.get("pauli_positions")
    adversary = AdversaryConfig(
        kind=adv_data.get("kind", "none"),
        pauli_counts=tuple(params.get("pauli_counts", (0, 0, 0))),
        tamper_rate=float(params.get("tamper_rate", 0.0)),
        pauli_positions=(
            tuple((str(k), int(p)) for k, p in raw_positions)
            if raw_positions is not None
            else None
        ),
    )
    algorithm = tuple(
        GateRequest(
            kind=r["kind"],
            targets=tuple(r["targets"]),
            octants=tuple(r["octants"]) if "octants" in r else None,
            name=r.get("name"),
        )
        for r in data.get("algorithm", ())
    )
    bases = data.get("output_bases")
    width = data.get("num_register_qubits", data.get("num_qubits"))
    if width is None:
        raise ValueError("config needs num_register_qubits")
    return ProtocolConfig(
        protocol=data["protocol"],
        num_qubits=int(width),
        depth=int(data["depth"]),
        trap_count=data.get("trap_count"),
        seed=int(data.get("seed", 0)),
        algorithm=algorithm,
        output_bases=tuple(bases) if bases else None,
        adversary=adversary,
    )


@dataclass(frozen=True)
class RunManifest:
    """Self-contained description of a run.

    Rerunning a manifest reproduces the transcript and report byte for
    byte; the creation timestamp is provenance only and takes no part in
    seeding or output.
    """

    config: ProtocolConfig
    tool: str = "adbqc"
    version: str = "0.1.0"
    created: str = ""  # ISO-8601, filled when the manifest is first written

    def to_json(self) -> str:
        return json.dumps(
            {
                "tool": self.tool,
                "version": self.version,
                "created": self.created,
                "config": config_to_dict(self.config),
            },
            sort_keys=True,
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        data = json.loads(text)
        return cls(
            config=config_from_dict(data["config"]),
            tool=data.get("tool", "adbqc"),
            version=data.get("version", "0.1.0"),
            created=data.get("created", ""),
        )
