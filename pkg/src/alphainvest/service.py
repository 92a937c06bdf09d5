"""HTTP+JSON service wrapping the database-manager state machine.

One instance = one journal file = one strictly serialized state machine.
Executes take a per-instance lock and carry an expected sequence number for
optimistic concurrency: a stale number gets a 409 and the client re-quotes.
The journal is written before the response, so a crash after the write but
before the reply replays to the executed state.
"""
from __future__ import annotations

import datetime as _dt
import os
import threading
import uuid
from dataclasses import dataclass, field
from typing import Dict, Optional

from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel, Field

from . import journal as jn
from . import qpd
from .journal import EventKind, Journal
from .qpd import InfeasibleRequest, QpdConfig, QpdState, QpdVariant


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


@dataclass
class Instance:
    instance_id: str
    config: QpdConfig
    state: QpdState
    journal: Journal
    created_at: str
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def state_sequence(self) -> int:
        """Number of executed tests; quotes are pinned against this."""
        return self.state.tests_done


class ConfigBody(BaseModel):
    variant: str
    alpha: float
    eta: Optional[float] = None
    q: float = 0.999
    n0: int = 1
    k: float = 1.0
    max_cost: int = 100_000
    instance_id: Optional[str] = None


class RequestBody(BaseModel):
    family: str = "z_known_sigma"
    null_value: float = 0.0
    alternative_kind: str = "unbounded_one_sided"
    alternative_theta: Optional[float] = None
    sigma: Optional[float] = 1.0
    effect_size: float
    required_power: float = Field(gt=0.0, lt=1.0)
    envelope_b: Optional[float] = None


class ExecuteBody(RequestBody):
    p_value: float
    expected_sequence_no: int


def _parse_request(body: RequestBody):
    payload = body.model_dump(exclude={"p_value", "expected_sequence_no",
                                       "envelope_b"}, exclude_none=False)
    try:
        return jn.request_from_payload(payload)
    except (ValueError, KeyError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def _quote_doc(cq: qpd.CostQuote, sequence_no: int) -> dict:
    return {"cost": cq.cost, "level": cq.level, "n_after": cq.n_after,
            "stability_bound": cq.stability_bound, "sequence_no": sequence_no}


def _state_doc(inst: Instance) -> dict:
    st = inst.state
    return {"instance_id": inst.instance_id,
            "variant": inst.config.variant.value,
            "pool_a": st.pool_a, "pool_b": st.pool_b,
            "wealth": st.pool_a + st.pool_b,
            "wealth_floor": qpd.wealth_floor(st),
            "n": st.n, "tests_done": st.tests_done,
            "rejections": st.rejections,
            "sequence_no": inst.state_sequence,
            "created_at": inst.created_at}


def create_app(data_dir: Optional[str] = None,
               default_max_cost: Optional[int] = None) -> FastAPI:
    """Build the service; replays any journals already in data_dir."""
    data_dir = data_dir or os.environ.get("ALPHAINVEST_DATA_DIR", "./qpd-data")
    if default_max_cost is None:
        default_max_cost = int(os.environ.get("ALPHAINVEST_MAX_COST", 100_000))
    os.makedirs(data_dir, exist_ok=True)

    app = FastAPI(title="alphainvest qpd service")
    instances: Dict[str, Instance] = {}
    app.state.instances = instances
    app.state.data_dir = data_dir

    def _recover():
        for name in sorted(os.listdir(data_dir)):
            if not name.endswith(".jsonl"):
                continue
            path = os.path.join(data_dir, name)
            events = list(jn.iter_events(path))
            if not events or events[0].kind != EventKind.CREATED:
                continue
            created = events[0].payload
            config = jn.config_from_payload(created["config"])
            instances[created["instance_id"]] = Instance(
                instance_id=created["instance_id"], config=config,
                state=jn.replay(path), journal=Journal(path),
                created_at=created.get("created_at", _now()))

    _recover()

    def _get(instance_id: str) -> Instance:
        inst = instances.get(instance_id)
        if inst is None:
            raise HTTPException(status_code=404,
                                detail=f"unknown instance {instance_id!r}")
        return inst

    @app.post("/instances", status_code=201)
    def create_instance(body: ConfigBody):
        instance_id = body.instance_id or uuid.uuid4().hex[:12]
        if instance_id in instances:
            raise HTTPException(status_code=409,
                                detail=f"instance {instance_id!r} exists")
        try:
            config = QpdConfig(variant=QpdVariant(body.variant),
                               alpha=body.alpha, eta=body.eta, q=body.q,
                               n0=body.n0, k=body.k,
                               max_cost=body.max_cost or default_max_cost)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        path = os.path.join(data_dir, f"{instance_id}.jsonl")
        if os.path.exists(path):
            raise HTTPException(status_code=409,
                                detail=f"journal for {instance_id!r} exists")
        journal = Journal(path)
        created_at = _now()
        journal.append(EventKind.CREATED,
                       {"instance_id": instance_id, "created_at": created_at,
                        "config": jn.config_to_payload(config)}, fsync=True)
        inst = Instance(instance_id=instance_id, config=config,
                        state=qpd.init_state(config), journal=journal,
                        created_at=created_at)
        instances[instance_id] = inst
        return _state_doc(inst)

    @app.get("/instances/{instance_id}/state")
    def get_state(instance_id: str):
        return _state_doc(_get(instance_id))

    @app.post("/instances/{instance_id}/quote")
    def post_quote(instance_id: str, body: RequestBody):
        inst = _get(instance_id)
        request = _parse_request(body)
        with inst.lock:
            seq = inst.state_sequence
            try:
                cq = qpd.quote(inst.state, request, envelope_b=body.envelope_b)
            except InfeasibleRequest:
                raise HTTPException(status_code=422, detail={
                    "infeasible": True, "max_cost": inst.config.max_cost})
            inst.journal.append(EventKind.QUOTED, {
                "request": jn.request_to_payload(request),
                "quote": _quote_doc(cq, seq)})
        return _quote_doc(cq, seq)

    @app.post("/instances/{instance_id}/execute")
    def post_execute(instance_id: str, body: ExecuteBody):
        inst = _get(instance_id)
        if not 0.0 <= body.p_value <= 1.0:
            raise HTTPException(status_code=422,
                                detail="p_value must be in [0, 1]")
        request = _parse_request(body)
        with inst.lock:
            seq = inst.state_sequence
            if body.expected_sequence_no != seq:
                raise HTTPException(status_code=409, detail={
                    "stale_sequence_no": body.expected_sequence_no,
                    "current_sequence_no": seq})
            try:
                cq = qpd.quote(inst.state, request, envelope_b=body.envelope_b)
            except InfeasibleRequest:
                raise HTTPException(status_code=422, detail={
                    "infeasible": True, "max_cost": inst.config.max_cost})
            new_state, entry = qpd.execute(inst.state, request, body.p_value,
                                           precomputed=cq)
            inst.journal.append(EventKind.EXECUTED, {
                "request": jn.request_to_payload(request),
                "quote": {"cost": cq.cost, "level": cq.level,
                          "n_after": cq.n_after,
                          "stability_bound": cq.stability_bound},
                "p_value": body.p_value}, fsync=True)
            inst.state = new_state
            return {"rejected": entry.rejected,
                    "level": cq.level, "cost": cq.cost, "n_after": cq.n_after,
                    "pool_a": new_state.pool_a, "pool_b": new_state.pool_b,
                    "sequence_no": new_state.tests_done,
                    "wealth_floor": qpd.wealth_floor(new_state)}

    @app.get("/instances/{instance_id}/ledger")
    def get_ledger(instance_id: str,
                   from_: int = Query(0, alias="from"),
                   to: Optional[int] = None):
        inst = _get(instance_id)
        with inst.lock:
            entries = inst.state.ledger
        hi = len(entries) if to is None else min(to, len(entries))
        lo = max(0, from_)
        out = []
        for i in range(lo, hi):
            e = entries[i]
            out.append({"sequence_no": i + 1,
                        "cost": e.quote.cost, "level": e.quote.level,
                        "n_after": e.quote.n_after, "p_value": e.p_value,
                        "rejected": e.rejected,
                        "pool_a_after": e.pool_a_after,
                        "pool_b_after": e.pool_b_after})
        return {"entries": out, "total": len(entries)}

    return app


def main(host: str = "127.0.0.1", port: int = 8077,
         data_dir: Optional[str] = None):
    import uvicorn

    uvicorn.run(create_app(data_dir=data_dir), host=host, port=port)
