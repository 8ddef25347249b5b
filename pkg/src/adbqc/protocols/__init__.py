"""Client-capability protocols, trap verification and shared machinery."""

from .config import (
    CAPABILITY_BY_PROTOCOL,
    HONEST,
    PROTOCOLS,
    AdversaryConfig,
    ClientCapability,
    GateRequest,
    ProtocolConfig,
    RunManifest,
    VerificationReport,
    config_from_dict,
    config_to_dict,
)
from .driver import Session, compile_layers, new_session, run_grid
from .gate_client import P2RunResult, p2_hrz, p2_hrz_on_runtime, run_protocol2
from .measure_client import (
    P1RunResult,
    classify_angle,
    p1_hrz,
    p1_hrz_on_runtime,
    run_protocol1,
    solve_phase_choice,
)
from .reference import (
    enumerated_distribution,
    reference_distribution,
    reference_state,
    sampled_distribution,
    total_variation,
)
from .schedule import Layer, schedule
from .sueki import SuekiRunResult, run_sueki
from .traps import (
    TRAP_STATES,
    DecodedOutput,
    TrapLayout,
    decode_output,
    place_traps,
)

__all__ = [
    "AdversaryConfig",
    "CAPABILITY_BY_PROTOCOL",
    "ClientCapability",
    "DecodedOutput",
    "GateRequest",
    "HONEST",
    "Layer",
    "P1RunResult",
    "P2RunResult",
    "PROTOCOLS",
    "ProtocolConfig",
    "RunManifest",
    "Session",
    "SuekiRunResult",
    "TRAP_STATES",
    "TrapLayout",
    "VerificationReport",
    "classify_angle",
    "compile_layers",
    "config_from_dict",
    "config_to_dict",
    "decode_output",
    "enumerated_distribution",
    "new_session",
    "p1_hrz",
    "p1_hrz_on_runtime",
    "p2_hrz",
    "p2_hrz_on_runtime",
    "place_traps",
    "reference_distribution",
    "reference_state",
    "run_grid",
    "run_protocol1",
    "run_protocol2",
    "run_sueki",
    "sampled_distribution",
    "schedule",
    "solve_phase_choice",
    "total_variation",
]
