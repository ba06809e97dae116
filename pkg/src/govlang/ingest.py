"""Offline translation of recorded platform webhooks into engine events.

Input is a JSON Lines file of recorded deliveries, each line an object with
``received_at`` (ISO-8601 UTC or epoch seconds) and the original ``payload``.
Pull-request and review payloads map onto collaboration events:

* PR opened               -> ``open`` (collab id ``owner/repo#number``)
* review approved         -> ``vote`` true, review body as rationale
* review changes required -> ``vote`` false
* review commented        -> no event (a comment takes no position)
* PR closed or merged     -> ``cancel`` (the platform preempted the process)

Repositories and logins are mapped through a small JSON config; anything
unmapped produces a diagnostic instead of an event, and every record yields
at least one of the two.  Timestamps become logical minutes counted from
the earliest record.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from fnmatch import fnmatchcase

from .diagnostics import Diagnostic, error, info, warning
from .engine.events import (
    CollaborationCancelled,
    CollaborationOpened,
    Event,
    Tick,
    VoteCast,
    write_event_log,
)
from .model import GovernanceModel


@dataclass(frozen=True)
class WebhookRecord:
    payload: dict
    received_at: int  # epoch seconds


@dataclass(frozen=True)
class MappingConfig:
    """Bindings from platform space into the governance model.

    ``scope_bindings`` maps repository patterns (exact names or shell-style
    globs, e.g. ``acme/*``) to scope ids; ``identity_bindings`` maps platform
    logins to participant ids.
    """

    scope_bindings: tuple[tuple[str, str], ...]
    identity_bindings: dict[str, str]

    def scope_for(self, repo: str) -> str | None:
        for pattern, scope_id in self.scope_bindings:
            if pattern == repo or fnmatchcase(repo, pattern):
                return scope_id
        return None


def load_mapping(obj: dict) -> tuple[MappingConfig, list[Diagnostic]]:
    diags: list[Diagnostic] = []
    scopes = obj.get("scopes", {})
    identities = obj.get("identities", {})
    if not isinstance(scopes, dict) or not isinstance(identities, dict):
        diags.append(
            error(
                "ingest.bad-config",
                "mapping config needs 'scopes' and 'identities' objects",
            )
        )
        return MappingConfig((), {}), diags
    config = MappingConfig(
        scope_bindings=tuple((str(k), str(v)) for k, v in scopes.items()),
        identity_bindings={str(k): str(v) for k, v in identities.items()},
    )
    return config, diags


def validate_mapping(config: MappingConfig, model: GovernanceModel) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    patterns = [p for p, _ in config.scope_bindings]
    for i, a in enumerate(patterns):
        for b in patterns[i + 1 :]:
            if fnmatchcase(a, b) or fnmatchcase(b, a):
                diags.append(
                    warning(
                        "ingest.overlapping-patterns",
                        f"repository patterns {a!r} and {b!r} overlap; the first "
                        "declared binding wins",
                    )
                )
    for pattern, scope_id in config.scope_bindings:
        if scope_id not in model.scopes:
            diags.append(
                error(
                    "ingest.unknown-scope",
                    f"binding {pattern!r} targets unknown scope {scope_id!r}",
                    subject=scope_id,
                )
            )
    for login, participant_id in config.identity_bindings.items():
        if participant_id not in model.participants:
            diags.append(
                error(
                    "ingest.unknown-participant",
                    f"login {login!r} is bound to unknown participant {participant_id!r}",
                    subject=participant_id,
                )
            )
    return diags


# ---------------------------------------------------------------------------
# Record decoding


def _parse_received_at(value) -> int | None:
    if isinstance(value, bool):
        return None
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        try:
            stamp = datetime.fromisoformat(value.replace("Z", "+00:00"))
        except ValueError:
            return None
        if stamp.tzinfo is None:
            stamp = stamp.replace(tzinfo=timezone.utc)
        return int(stamp.timestamp())
    return None


def read_webhook_log(
    text: str, source: str | None = None
) -> tuple[list[WebhookRecord], list[Diagnostic]]:
    records: list[WebhookRecord] = []
    diags: list[Diagnostic] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            diags.append(
                error(
                    "ingest.bad-record",
                    f"line {lineno}: not valid JSON ({exc.msg})",
                    source=source,
                )
            )
            continue
        received = _parse_received_at(obj.get("received_at")) if isinstance(obj, dict) else None
        payload = obj.get("payload") if isinstance(obj, dict) else None
        if received is None or not isinstance(payload, dict):
            diags.append(
                error(
                    "ingest.bad-record",
                    f"line {lineno}: record needs 'received_at' and an object 'payload'",
                    source=source,
                )
            )
            continue
        records.append(WebhookRecord(payload=payload, received_at=received))
    return records, diags


# ---------------------------------------------------------------------------
# Mapping


def _repo_and_number(payload: dict) -> tuple[str | None, int | None]:
    repo = payload.get("repository", {})
    full_name = repo.get("full_name") if isinstance(repo, dict) else None
    pr = payload.get("pull_request", {})
    number = pr.get("number") if isinstance(pr, dict) else None
    return (
        full_name if isinstance(full_name, str) else None,
        number if isinstance(number, int) else None,
    )


def map_webhook(
    record: WebhookRecord,
    config: MappingConfig,
    origin: int | None = None,
) -> tuple[list[Event], list[Diagnostic]]:
    """Translate one recorded delivery into engine events.

    ``origin`` is the epoch-seconds zero point of the log; it defaults to
    the record itself, so a lone record maps to t=0.
    """
    if origin is None:
        origin = record.received_at
    ts = max(0, (record.received_at - origin) // 60)
    payload = record.payload
    action = payload.get("action")
    repo, number = _repo_and_number(payload)
    if repo is None or number is None:
        return [], [
            warning(
                "ingest.unmapped-record",
                f"record at t={ts} has no pull request and repository; skipped",
            )
        ]
    collab_id = f"{repo}#{number}"
    scope_id = config.scope_for(repo)
    if scope_id is None:
        return [], [
            error(
                "ingest.unmapped-repository",
                f"repository {repo!r} has no scope binding; record skipped",
                subject=repo,
            )
        ]

    if "review" in payload and action == "submitted":
        review = payload.get("review")
        if not isinstance(review, dict):
            return [], [error("ingest.bad-record", f"record at t={ts} has a malformed review")]
        user = review.get("user", {})
        login = user.get("login") if isinstance(user, dict) else None
        if not isinstance(login, str):
            return [], [error("ingest.bad-record", f"record at t={ts} has a review without a user")]
        participant = config.identity_bindings.get(login)
        if participant is None:
            return [], [
                error(
                    "ingest.unmapped-identity",
                    f"login {login!r} has no participant binding; review skipped",
                    subject=login,
                )
            ]
        review_state = str(review.get("state", "")).lower()
        body = review.get("body")
        rationale = body if isinstance(body, str) and body else None
        if review_state == "approved":
            value = True
        elif review_state == "changes_requested":
            value = False
        elif review_state == "commented":
            return [], [
                info(
                    "ingest.no-position",
                    f"commented review by {login!r} on {collab_id!r} takes no position; "
                    "no vote emitted",
                    subject=login,
                )
            ]
        else:
            return [], [
                warning(
                    "ingest.unmapped-record",
                    f"review state {review_state!r} on {collab_id!r} is not mapped",
                )
            ]
        return [
            VoteCast(
                ts=ts,
                collab_id=collab_id,
                participant_id=participant,
                value=value,
                rationale=rationale,
            )
        ], []

    if "pull_request" in payload and action == "opened":
        return [CollaborationOpened(ts=ts, collab_id=collab_id, scope_id=scope_id)], []

    if "pull_request" in payload and action == "closed":
        return [CollaborationCancelled(ts=ts, collab_id=collab_id)], []

    return [], [
        warning(
            "ingest.unmapped-record",
            f"record at t={ts} (action {action!r}) is not mapped to any event",
        )
    ]


def max_deadline_minutes(model: GovernanceModel) -> int:
    longest = 0
    for policy in model.policies.values():
        deadline = policy.deadline()
        if deadline is not None:
            longest = max(longest, deadline.minutes)
    return longest


def translate_log(
    records: list[WebhookRecord],
    config: MappingConfig,
    model: GovernanceModel,
) -> tuple[str, list[Diagnostic]]:
    """Translate an ordered webhook log into a complete engine event log.

    A terminal tick at (last timestamp + longest policy deadline) is always
    appended so an offline simulation of the output terminates.
    """
    diags: list[Diagnostic] = []
    events: list[Event] = []
    origin = records[0].received_at if records else 0
    last_ts = 0
    previous = None
    for record in records:
        if previous is not None and record.received_at < previous:
            diags.append(
                error(
                    "ingest.out-of-order",
                    "webhook records are not ordered by received_at",
                )
            )
        previous = record.received_at
        mapped, record_diags = map_webhook(record, config, origin)
        events.extend(mapped)
        diags.extend(record_diags)
        last_ts = max(last_ts, (record.received_at - origin) // 60)
    events.append(Tick(ts=last_ts + max_deadline_minutes(model)))
    return write_event_log(events), diags
