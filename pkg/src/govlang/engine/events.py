"""Collaboration events and their JSON Lines wire format.

One event per line, each an object with a ``type`` discriminator and an
integer ``ts`` in logical minutes.  Canonical type names are ``open``,
``vote``, ``tick``, and ``cancel`` (``close`` is accepted as an alias for
``cancel``).  Unknown fields are ignored; unknown types and malformed lines
become per-line diagnostics, never exceptions.

Events must arrive in non-decreasing timestamp order.  Among events sharing
a timestamp, stream order decides: a vote stamped exactly at a deadline
counts only if it precedes the tick that resolves the collaboration.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union

from ..diagnostics import Diagnostic, error


class EventFormatError(ValueError):
    """Raised by :func:`event_from_obj` for a malformed event object."""


@dataclass(frozen=True)
class CollaborationOpened:
    ts: int
    collab_id: str
    scope_id: str
    candidates: tuple[str, ...] | None = None


@dataclass(frozen=True)
class VoteCast:
    ts: int
    collab_id: str
    participant_id: str
    value: bool | str
    rationale: str | None = None


@dataclass(frozen=True)
class Tick:
    ts: int


@dataclass(frozen=True)
class CollaborationCancelled:
    ts: int
    collab_id: str


Event = Union[CollaborationOpened, VoteCast, Tick, CollaborationCancelled]


def _require_str(obj: dict, key: str, what: str) -> str:
    value = obj.get(key)
    if not isinstance(value, str) or not value:
        raise EventFormatError(f"{what} needs a non-empty string {key!r}")
    return value


def _require_ts(obj: dict) -> int:
    ts = obj.get("ts")
    if isinstance(ts, bool) or not isinstance(ts, int):
        raise EventFormatError("event needs an integer 'ts' (logical minutes)")
    return ts


def event_from_obj(obj: dict) -> Event:
    """Decode one event object; raises :class:`EventFormatError` on bad input."""
    if not isinstance(obj, dict):
        raise EventFormatError("event must be a JSON object")
    kind = obj.get("type")
    if kind == "open":
        ts = _require_ts(obj)
        collab = _require_str(obj, "collab", "open event")
        scope = _require_str(obj, "scope", "open event")
        candidates = obj.get("candidates")
        if candidates is not None:
            if (
                not isinstance(candidates, list)
                or not candidates
                or not all(isinstance(c, str) for c in candidates)
            ):
                raise EventFormatError("'candidates' must be a non-empty list of strings")
            candidates = tuple(candidates)
        return CollaborationOpened(ts=ts, collab_id=collab, scope_id=scope, candidates=candidates)
    if kind == "vote":
        ts = _require_ts(obj)
        collab = _require_str(obj, "collab", "vote event")
        participant = _require_str(obj, "participant", "vote event")
        value = obj.get("value")
        if not isinstance(value, (bool, str)):
            raise EventFormatError("vote 'value' must be a boolean or a candidate id")
        rationale = obj.get("rationale")
        if rationale is not None and not isinstance(rationale, str):
            raise EventFormatError("'rationale' must be a string")
        return VoteCast(
            ts=ts,
            collab_id=collab,
            participant_id=participant,
            value=value,
            rationale=rationale,
        )
    if kind == "tick":
        return Tick(ts=_require_ts(obj))
    if kind in ("cancel", "close"):
        ts = _require_ts(obj)
        collab = _require_str(obj, "collab", "cancel event")
        return CollaborationCancelled(ts=ts, collab_id=collab)
    raise EventFormatError(f"unknown event type {kind!r}")


def event_to_obj(event: Event) -> dict:
    """Encode an event with a stable key order (type, ts, then payload)."""
    if isinstance(event, CollaborationOpened):
        obj = {"type": "open", "ts": event.ts, "collab": event.collab_id, "scope": event.scope_id}
        if event.candidates is not None:
            obj["candidates"] = list(event.candidates)
        return obj
    if isinstance(event, VoteCast):
        obj = {
            "type": "vote",
            "ts": event.ts,
            "collab": event.collab_id,
            "participant": event.participant_id,
            "value": event.value,
        }
        if event.rationale is not None:
            obj["rationale"] = event.rationale
        return obj
    if isinstance(event, Tick):
        return {"type": "tick", "ts": event.ts}
    return {"type": "cancel", "ts": event.ts, "collab": event.collab_id}


def write_event_log(events: list[Event]) -> str:
    lines = [json.dumps(event_to_obj(e), separators=(", ", ": ")) for e in events]
    return "".join(line + "\n" for line in lines)


def read_event_log(text: str, source: str | None = None) -> tuple[list[Event], list[Diagnostic]]:
    """Decode a JSON Lines event log, skipping (and reporting) bad lines."""
    events: list[Event] = []
    diagnostics: list[Diagnostic] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            diagnostics.append(
                error(
                    "events.bad-json",
                    f"line {lineno}: not valid JSON ({exc.msg})",
                    source=source,
                )
            )
            continue
        try:
            events.append(event_from_obj(obj))
        except EventFormatError as exc:
            diagnostics.append(
                error("events.bad-event", f"line {lineno}: {exc}", source=source)
            )
    return events, diagnostics
