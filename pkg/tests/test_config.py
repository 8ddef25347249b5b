"""Run configuration, manifest serialization, and transcript plumbing."""

import json

import pytest

from adbqc.protocols import (
    HONEST,
    AdversaryConfig,
    ClientCapability,
    GateRequest,
    ProtocolConfig,
    RunManifest,
    VerificationReport,
    config_from_dict,
    config_to_dict,
)
from adbqc.transcript import ALICE, BOB, Transcript

H_REQ = GateRequest.single(0, name="h")


# ---------------------------------------------------------------------------
# Gate requests


def test_single_request_resolves_named_gate():
    assert H_REQ.resolved_octants() == (2, 2, 2)
    explicit = GateRequest.single(0, octants=(1, 0, 0))
    assert explicit.resolved_octants() == (1, 0, 0)


def test_cz_request_has_no_octants():
    req = GateRequest.cz_pair(0, 1)
    assert req.targets == (0, 1)
    with pytest.raises(ValueError):
        req.resolved_octants()


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="su", targets=(0, 1), name="h"),
        dict(kind="su", targets=(0,)),  # neither octants nor name
        dict(kind="su", targets=(0,), octants=(1, 0, 0), name="h"),  # both
        dict(kind="su", targets=(0,), name="ccz"),
        dict(kind="su", targets=(0,), octants=(8, 0, 0)),
        dict(kind="su", targets=(0,), octants=(1, 0)),
        dict(kind="cz", targets=(1, 1)),
        dict(kind="cz", targets=(0,)),
        dict(kind="cz", targets=(0, 1), name="h"),
        dict(kind="swap", targets=(0, 1)),
    ],
)
def test_bad_requests_rejected(kwargs):
    with pytest.raises(ValueError):
        GateRequest(**kwargs)


# ---------------------------------------------------------------------------
# Adversary configuration


def test_adversary_validation():
    with pytest.raises(ValueError):
        AdversaryConfig(kind="byzantine")
    with pytest.raises(ValueError):
        AdversaryConfig(kind="random_pauli", pauli_counts=(-1, 0, 0))
    with pytest.raises(ValueError):
        AdversaryConfig(
            kind="random_pauli", pauli_counts=(1, 0, 0), pauli_positions=(("y", 0),)
        )
    with pytest.raises(ValueError):
        AdversaryConfig(
            kind="random_pauli",
            pauli_counts=(2, 0, 0),
            pauli_positions=(("x", 3), ("x", 3)),
        )
    with pytest.raises(ValueError):
        AdversaryConfig(kind="none", pauli_positions=(("x", 0),))
    with pytest.raises(ValueError):
        AdversaryConfig(kind="trap_tamper", tamper_rate=1.5)


def test_capability_validation():
    with pytest.raises(ValueError):
        ClientCapability("omnipotent")


# ---------------------------------------------------------------------------
# Protocol configuration


def test_trap_counts_by_protocol():
    sueki = ProtocolConfig("sueki", 2, 1)
    assert sueki.trap_count == 0
    assert sueki.logical_width == 2
    p1 = ProtocolConfig("p1", 9, 1)
    assert p1.trap_count == 6
    assert p1.logical_width == 3
    p2 = ProtocolConfig("p2", 4, 1, trap_count=3)
    assert p2.logical_width == 1


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(protocol="bqp", num_qubits=2, depth=1),
        dict(protocol="sueki", num_qubits=0, depth=1),
        dict(protocol="sueki", num_qubits=2, depth=0),
        dict(protocol="sueki", num_qubits=2, depth=1, trap_count=1),
        dict(protocol="p1", num_qubits=4, depth=1),  # width not divisible by 3
        dict(protocol="p1", num_qubits=9, depth=1, trap_count=3),  # 2N/3 is fixed
        dict(protocol="p2", num_qubits=4, depth=1),  # trap count required
        dict(protocol="p2", num_qubits=4, depth=1, trap_count=0),
        dict(protocol="p2", num_qubits=4, depth=1, trap_count=4),
    ],
)
def test_bad_configs_rejected(kwargs):
    with pytest.raises(ValueError):
        ProtocolConfig(**kwargs)


def test_algorithm_targets_checked_against_logical_width():
    with pytest.raises(ValueError):
        ProtocolConfig("p2", 4, 1, trap_count=3, algorithm=(GateRequest.single(1, name="h"),))
    ok = ProtocolConfig("p1", 9, 1, algorithm=(GateRequest.cz_pair(0, 2),))
    assert ok.logical_width == 3


def test_output_bases_validation():
    cfg = ProtocolConfig("p2", 4, 1, trap_count=2, output_bases=("Z", "x"))
    assert cfg.output_bases == ("z", "x")
    assert cfg.plan() == ("z", "x")
    with pytest.raises(ValueError):
        ProtocolConfig("p2", 4, 1, trap_count=2, output_bases=("z",))
    with pytest.raises(ValueError):
        ProtocolConfig("p2", 4, 1, trap_count=2, output_bases=("z", "y"))


def test_default_plan_is_all_z():
    assert ProtocolConfig("p1", 3, 1).plan() == ("z",)


def test_adversary_protocol_pairing():
    pauli = AdversaryConfig(kind="random_pauli", pauli_counts=(1, 0, 0))
    tamper = AdversaryConfig(kind="trap_tamper", tamper_rate=0.5)
    ProtocolConfig("p1", 3, 1, adversary=pauli)  # allowed
    ProtocolConfig("p2", 4, 1, trap_count=2, adversary=tamper)  # allowed
    with pytest.raises(ValueError):
        ProtocolConfig("p2", 4, 1, trap_count=2, adversary=pauli)
    with pytest.raises(ValueError):
        ProtocolConfig("p1", 3, 1, adversary=tamper)
    with pytest.raises(ValueError):
        ProtocolConfig("sueki", 2, 1, adversary=tamper)


def test_probe_adversary_not_runnable():
    probe = AdversaryConfig(kind="entangled_probe", probe_amplitudes=(1.0, 0.0))
    with pytest.raises(ValueError, match="analysis-only"):
        ProtocolConfig("p2", 4, 1, trap_count=2, adversary=probe)


def test_pauli_counts_bounded_by_register():
    adv = AdversaryConfig(kind="random_pauli", pauli_counts=(4, 0, 0))
    with pytest.raises(ValueError):
        ProtocolConfig("p1", 3, 1, adversary=adv)
    spot = AdversaryConfig(
        kind="random_pauli", pauli_counts=(1, 0, 0), pauli_positions=(("x", 5),)
    )
    with pytest.raises(ValueError):
        ProtocolConfig("p1", 3, 1, adversary=spot)


def test_with_seed_and_capability():
    cfg = ProtocolConfig("p1", 3, 1, seed=5)
    assert cfg.with_seed(11).seed == 11
    assert cfg.with_seed(11).protocol == "p1"
    assert cfg.capability.kind == "measure_only"
    assert ProtocolConfig("sueki", 1, 1).capability.kind == "prepare_only"
    assert ProtocolConfig("p2", 2, 1, trap_count=1).capability.kind == "gate_only"


# ---------------------------------------------------------------------------
# Serialization


ROUNDTRIP_CONFIGS = [
    ProtocolConfig("sueki", 2, 2, seed=3, algorithm=(H_REQ, GateRequest.cz_pair(0, 1))),
    ProtocolConfig(
        "p1",
        9,
        1,
        seed=8,
        algorithm=(GateRequest.single(2, octants=(1, 0, 0)),),
        adversary=AdversaryConfig(
            kind="random_pauli", pauli_counts=(1, 1, 0), pauli_positions=(("x", 0), ("z", 4))
        ),
    ),
    ProtocolConfig(
        "p2",
        4,
        1,
        trap_count=2,
        output_bases=("x", "z"),
        adversary=AdversaryConfig(kind="trap_tamper", tamper_rate=0.25),
    ),
]


@pytest.mark.parametrize("config", ROUNDTRIP_CONFIGS)
def test_config_dict_roundtrip(config):
    data = config_to_dict(config)
    json.dumps(data)  # must be JSON-clean
    assert config_from_dict(data) == config


def test_config_from_dict_accepts_qubit_alias():
    data = config_to_dict(ProtocolConfig("p1", 3, 1))
    data["num_qubits"] = data.pop("num_register_qubits")
    assert config_from_dict(data) == ProtocolConfig("p1", 3, 1)


def test_config_from_dict_accepts_flattened_adversary():
    data = config_to_dict(ROUNDTRIP_CONFIGS[2])
    adv = data["adversary"]
    adv.update(adv.pop("params"))
    assert config_from_dict(data) == ROUNDTRIP_CONFIGS[2]


def test_manifest_roundtrip():
    manifest = RunManifest(ROUNDTRIP_CONFIGS[1], created="2026-01-01T00:00:00Z")
    text = manifest.to_json()
    again = RunManifest.from_json(text)
    assert again.config == manifest.config
    assert again.tool == "adbqc"
    # serialization is deterministic
    assert RunManifest.from_json(text).to_json() == text


def test_report_as_dict():
    report = VerificationReport(True, 0, 6, (1, 0), "abc123")
    assert report.as_dict() == {
        "accepted": True,
        "trap_errors": 0,
        "trap_total": 6,
        "computation_bits": [1, 0],
        "transcript_digest": "abc123",
    }


# ---------------------------------------------------------------------------
# Transcripts


def test_transcript_event_ordering_and_kinds():
    tape = Transcript()
    tape.msg(ALICE, BOB, theta_octant=5)
    tape.transfer(BOB, ALICE, "q0")
    tape.local(ALICE, op="prepare", qubit="a0")
    tape.outcome(BOB, 1, qubit="q0")
    assert [ev.seq for ev in tape.events] == [0, 1, 2, 3]
    assert [ev.kind for ev in tape.events] == ["msg", "transfer", "local", "outcome"]
    assert tape.events[0].as_dict()["from"] == ALICE


def test_transcript_rejects_floats_on_the_wire():
    tape = Transcript()
    with pytest.raises(ValueError, match="wire-safe"):
        tape.msg(ALICE, BOB, theta=0.785)
    tape.msg(ALICE, BOB, octant=1, label="q0", flag=True)  # wire-safe payloads


def test_server_view_filters_client_locals():
    tape = Transcript()
    tape.local(ALICE, op="secret", octant=7)
    tape.msg(ALICE, BOB, announce=3)
    tape.local(BOB, op="couple")
    tape.outcome(ALICE, 0, qubit="e0")
    tape.outcome(BOB, 1, qubit="g0")
    kinds = [(ev.kind, ev.party) for ev in tape.bob_events()]
    assert kinds == [("msg", ALICE), ("local", BOB), ("outcome", BOB)]
    assert tape.bob_classical_values() == (3, 1, "g0")


def test_transcript_jsonl_and_digest():
    tape = Transcript()
    tape.msg(ALICE, BOB, octant=2)
    lines = tape.to_jsonl().splitlines()
    assert len(lines) == 1
    parsed = json.loads(lines[0])
    assert parsed["payload"] == {"octant": 2}
    digest = tape.digest()
    assert len(digest) == 64
    tape.msg(ALICE, BOB, octant=3)
    assert tape.digest() != digest


def test_unrecorded_transcript_stays_empty():
    tape = Transcript(record=False)
    tape.msg(ALICE, BOB, octant=2)
    tape.outcome(BOB, 1)
    assert tape.events == []
