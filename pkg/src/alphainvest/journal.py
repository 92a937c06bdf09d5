"""Append-only JSON-lines event journal with checksums and replay.

Each line is one event: a monotone sequence number, an event kind
(created / quoted / executed), an arbitrary JSON payload, and a sha256
checksum over the canonical serialization of the first three fields.
Replaying the executed events of a journal through the database-manager
state machine reproduces the live state exactly.
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, List, Optional

from . import qpd
from .distributions import Alternative, AlternativeKind, Family, TestRequest, TestSpec
from .qpd import QpdConfig, QpdState, QpdVariant


class EventKind(str, Enum):
    CREATED = "created"
    QUOTED = "quoted"
    EXECUTED = "executed"


class JournalCorrupt(Exception):
    """Checksum mismatch, sequence gap, or malformed line."""


def _canonical(sequence_no: int, kind: str, payload: dict) -> str:
    return json.dumps({"sequence_no": sequence_no, "kind": kind,
                       "payload": payload}, sort_keys=True,
                      separators=(",", ":"))


def event_checksum(sequence_no: int, kind: str, payload: dict) -> str:
    return hashlib.sha256(_canonical(sequence_no, kind, payload).encode()).hexdigest()


@dataclass(frozen=True)
class JournalEvent:
    sequence_no: int
    kind: EventKind
    payload: dict
    checksum: str

    @staticmethod
    def make(sequence_no: int, kind: EventKind, payload: dict) -> "JournalEvent":
        return JournalEvent(sequence_no, kind, payload,
                            event_checksum(sequence_no, kind.value, payload))

    def valid(self) -> bool:
        return self.checksum == event_checksum(self.sequence_no, self.kind.value,
                                               self.payload)

    def to_line(self) -> str:
        return json.dumps({"sequence_no": self.sequence_no,
                           "kind": self.kind.value,
                           "payload": self.payload,
                           "checksum": self.checksum},
                          sort_keys=True, separators=(",", ":"))


# -- config / request serialization -----------------------------------------

def config_to_payload(config: QpdConfig) -> dict:
    return {"variant": config.variant.value, "alpha": config.alpha,
            "eta": config.eta, "q": config.q, "n0": config.n0,
            "k": config.k, "max_cost": config.max_cost}


def config_from_payload(payload: dict) -> QpdConfig:
    return QpdConfig(variant=QpdVariant(payload["variant"]),
                     alpha=payload["alpha"], eta=payload["eta"],
                     q=payload["q"], n0=payload["n0"], k=payload["k"],
                     max_cost=payload["max_cost"])


def request_to_payload(request: TestRequest) -> dict:
    spec = request.spec
    return {"family": spec.family.value,
            "null_value": spec.null_value,
            "alternative_kind": spec.alternative.kind.value,
            "alternative_theta": spec.alternative.theta,
            "sigma": spec.sigma,
            "effect_size": request.effect_size,
            "required_power": request.required_power}


def request_from_payload(payload: dict) -> TestRequest:
    alt = Alternative(AlternativeKind(payload["alternative_kind"]),
                      payload.get("alternative_theta"))
    spec = TestSpec(family=Family(payload["family"]),
                    null_value=payload["null_value"],
                    alternative=alt, sigma=payload.get("sigma"))
    return TestRequest(spec=spec, effect_size=payload["effect_size"],
                       required_power=payload["required_power"])


# -- file access -------------------------------------------------------------

class Journal:
    """One instance's event log. Append-only; reader validates integrity."""

    def __init__(self, path: str):
        self.path = path
        self._next_seq = 0
        if os.path.exists(path):
            events = self.read_all()
            self._next_seq = events[-1].sequence_no + 1 if events else 0

    def append(self, kind: EventKind, payload: dict, fsync: bool = False) -> JournalEvent:
        event = JournalEvent.make(self._next_seq, kind, payload)
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(event.to_line() + "\n")
            fh.flush()
            if fsync:
                os.fsync(fh.fileno())
        self._next_seq += 1
        return event

    def read_all(self) -> List[JournalEvent]:
        return list(iter_events(self.path))

    @property
    def next_sequence_no(self) -> int:
        return self._next_seq


def iter_events(path: str) -> Iterator[JournalEvent]:
    """Yield validated events; raises JournalCorrupt on any integrity fault."""
    expected = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
                event = JournalEvent(sequence_no=raw["sequence_no"],
                                     kind=EventKind(raw["kind"]),
                                     payload=raw["payload"],
                                     checksum=raw["checksum"])
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise JournalCorrupt(f"{path}:{lineno}: malformed event") from exc
            if event.sequence_no != expected:
                raise JournalCorrupt(
                    f"{path}:{lineno}: sequence gap (expected {expected}, "
                    f"got {event.sequence_no})")
            if not event.valid():
                raise JournalCorrupt(f"{path}:{lineno}: checksum mismatch")
            expected += 1
            yield event


def replay(path: str) -> QpdState:
    """Rebuild instance state from its journal.

    Quoted events are advisory and skipped; only created + executed events
    shape the state, so replay is idempotent under re-appended duplicates of
    in-flight quotes.
    """
    config: Optional[QpdConfig] = None
    state: Optional[QpdState] = None
    for event in iter_events(path):
        if event.kind == EventKind.CREATED:
            if config is not None:
                raise JournalCorrupt(f"{path}: duplicate created event")
            config = config_from_payload(event.payload["config"])
            state = qpd.init_state(config)
        elif event.kind == EventKind.EXECUTED:
            if state is None:
                raise JournalCorrupt(f"{path}: executed before created")
            request = request_from_payload(event.payload["request"])
            quote_p = event.payload["quote"]
            cq = qpd.CostQuote(cost=quote_p["cost"], level=quote_p["level"],
                               n_after=quote_p["n_after"],
                               stability_bound=quote_p.get("stability_bound"))
            state, _ = qpd.execute(state, request, event.payload["p_value"],
                                   precomputed=cq)
    if state is None:
        raise JournalCorrupt(f"{path}: journal has no created event")
    return state


def state_hash(state: QpdState) -> str:
    """Stable digest of the replay-relevant state fields."""
    doc = {"pool_a": state.pool_a, "pool_b": state.pool_b, "n": state.n,
           "tests_done": state.tests_done, "rejections": state.rejections}
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()
