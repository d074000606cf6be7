from __future__ import annotations

import json
import uuid
from datetime import datetime, timezone

from sqlalchemy import Column, Integer, String, Text, create_engine
from sqlalchemy.orm import declarative_base, sessionmaker

DATABASE_URL = "sqlite:///out/manifests.db"

engine = None
SessionLocal = sessionmaker()
Base = declarative_base()


class RunEvent(Base):
    """One append-only manifest event. A run is the fold of its events."""

    __tablename__ = "run_events"

    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(String, nullable=False, index=True)
    event = Column(String, nullable=False)  # started | finished | failed
    subcommand = Column(String, nullable=False)
    version = Column(String, nullable=False)
    config_json = Column(Text, default="{}")
    artifacts_json = Column(Text, default="[]")
    message = Column(Text, default="")
    created_at = Column(String, nullable=False)


def init_db(url: str = DATABASE_URL):
    """Bind the session factory to ``url`` and create the tables."""
    global engine
    connect_args = {"check_same_thread": False} if url.startswith("sqlite") else {}
    engine = create_engine(url, connect_args=connect_args)
    SessionLocal.configure(bind=engine)
    Base.metadata.create_all(bind=engine)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _append(run_id: str, event: str, subcommand: str, version: str, **fields) -> None:
    db = SessionLocal()
    try:
        db.add(
            RunEvent(
                run_id=run_id,
                event=event,
                subcommand=subcommand,
                version=version,
                created_at=_now(),
                **fields,
            )
        )
        db.commit()
    finally:
        db.close()


def start_run(subcommand: str, config: dict, version: str) -> str:
    run_id = str(uuid.uuid4())
    _append(run_id, "started", subcommand, version, config_json=json.dumps(config, sort_keys=True, default=str))
    return run_id


def finish_run(run_id: str, subcommand: str, version: str, artifacts: list[str]):
    _append(run_id, "finished", subcommand, version, artifacts_json=json.dumps(list(artifacts)))


def fail_run(run_id: str, subcommand: str, version: str, error_msg: str, artifacts: list[str] = ()):
    _append(run_id, "failed", subcommand, version, artifacts_json=json.dumps(list(artifacts)), message=error_msg)


def get_run(run_id: str) -> dict | None:
    db = SessionLocal()
    try:
        rows = db.query(RunEvent).filter(RunEvent.run_id == run_id).order_by(RunEvent.id).all()
        if not rows:
            return None
        return _fold(rows)
    finally:
        db.close()


def list_runs() -> list[dict]:
    db = SessionLocal()
    try:
        rows = db.query(RunEvent).order_by(RunEvent.id).all()
        grouped: dict[str, list[RunEvent]] = {}
        for row in rows:
            grouped.setdefault(row.run_id, []).append(row)
        return [_fold(events) for events in grouped.values()]
    finally:
        db.close()


def _fold(rows: list[RunEvent]) -> dict:
    first, last = rows[0], rows[-1]
    return {
        "run_id": first.run_id,
        "subcommand": first.subcommand,
        "version": first.version,
        "timestamp": first.created_at,
        "config": json.loads(first.config_json or "{}"),
        "status": "running" if last.event == "started" else last.event,
        "artifacts": json.loads(last.artifacts_json or "[]"),
        "error": last.message or "",
        "updated_at": last.created_at,
        "events": [r.event for r in rows],
    }
