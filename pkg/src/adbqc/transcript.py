"""Append-only protocol transcripts.

Every run produces an ordered event log with four kinds:

- ``msg``: a classical message between the parties. Payload values must be
  integers, booleans or short strings; angles travel as octant integers
  (multiples of pi/4), never as floats.
- ``transfer``: a qubit changing hands (label only, no state information).
- ``local``: a party's local operation (state prep, gate, deviation).
- ``outcome``: a measurement result produced by a party.

The server-side view of a transcript is what the protocols' blindness
arguments quantify over: everything the server sends, receives or locally
produces. Client-local events stay out of it.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

ALICE = "alice"  # client
BOB = "bob"  # server

_WIRE_TYPES = (int, bool, str)


@dataclass(frozen=True)
class Event:
    seq: int
    kind: str
    party: str  # actor; sender for msg/transfer
    to: str | None
    payload: dict

    def as_dict(self) -> dict:
        return {
            "seq": self.seq,
            "kind": self.kind,
            "from": self.party,
            "to": self.to,
            "payload": self.payload,
        }


class Transcript:
    """Ordered event log with monotonically increasing sequence numbers."""

    def __init__(self, record: bool = True) -> None:
        self.record = record
        self.events: list[Event] = []

    def _push(self, kind: str, party: str, to: str | None, payload: dict) -> None:
        if not self.record:
            return
        self.events.append(Event(len(self.events), kind, party, to, payload))

    def msg(self, party: str, to: str, **payload) -> None:
        for key, value in payload.items():
            if isinstance(value, bool):
                continue
            if not isinstance(value, _WIRE_TYPES) or isinstance(value, float):
                raise ValueError(
                    f"classical payload {key}={value!r} is not wire-safe "
                    "(integers, booleans and strings only)"
                )
        self._push("msg", party, to, payload)

    def transfer(self, party: str, to: str, label: str) -> None:
        self._push("transfer", party, to, {"qubit": label})

    def local(self, party: str, **payload) -> None:
        self._push("local", party, None, payload)

    def outcome(self, party: str, bit: int, **extra) -> None:
        self._push("outcome", party, None, {"bit": int(bit), **extra})

    def bob_events(self) -> list[Event]:
        """Events the server can see: all traffic plus its own local record."""
        visible = []
        for ev in self.events:
            if ev.kind in ("msg", "transfer"):
                visible.append(ev)
            elif ev.party == BOB:
                visible.append(ev)
        return visible

    def bob_classical_values(self) -> tuple:
        """Flat tuple of the classical values in the server's view, in order."""
        flat: list = []
        for ev in self.bob_events():
            if ev.kind in ("msg", "outcome"):
                for key in sorted(ev.payload):
                    flat.append(ev.payload[key])
        return tuple(flat)

    def to_jsonl(self) -> str:
        return "\n".join(
            json.dumps(ev.as_dict(), sort_keys=True, separators=(",", ":"))
            for ev in self.events
        )

    def digest(self) -> str:
        return hashlib.sha256(self.to_jsonl().encode("utf-8")).hexdigest()
