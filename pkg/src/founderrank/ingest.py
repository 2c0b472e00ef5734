"""Email-metadata ingestion: bulk filtering, dedup, graph deltas, stage tracking.

Event logs are JSON Lines, one message per line::

    {"message_id": "...", "thread_id": "...", "timestamp": 1514764800,
     "from_addr": "ann@acme.io", "from_name": "Ann",
     "to": [...], "cc": [...], "bcc": [...],          # or "recipients": [...]
     "headers": ["List-Unsubscribe", ...],
     "return_path_domain": "mcsv.net",                # or "return_path": "bounce@mcsv.net"
     "body_text": "...", "sentiment": 0.4}

Only ``message_id``, ``timestamp``, ``from_addr`` and some recipient field
are required.
"""

from __future__ import annotations

import json
import logging
import os
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from email.utils import parseaddr
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Sequence

from .errors import InputError, MalformedEvent
from .fileio import atomic_write_text
from .graph import FLAG_FOUNDER, FLAG_INVESTOR, GraphDelta

log = logging.getLogger(__name__)

CONVERSATION_STAGES = (
    "My Wishlist",
    "Asked for Intro",
    "In Talks",
    "Need to Respond",
    "Pitching",
    "Committed",
    "Passed",
    "Not Interested",
)
STAGE_ORDER = {s: i for i, s in enumerate(CONVERSATION_STAGES)}

INCOMING = "incoming"
OUTGOING = "outgoing"

ADDRESS_RE = re.compile(r"^[a-z0-9!#$%&'*+/=?^_`{|}~.-]+@[a-z0-9-]+(\.[a-z0-9-]+)+$")

CONFIG_ENV = "FOUNDERRANK_CONFIG_DIR"


# -- configuration ---------------------------------------------------------

def _default_config() -> dict:
    text = resources.files("founderrank").joinpath("data/default_config.json").read_text("utf-8")
    return json.loads(text)


def load_config(path=None) -> dict:
    """Defaults overlaid with a user config file.

    Without an explicit path, ``$FOUNDERRANK_CONFIG_DIR/config.json`` is used
    when it exists. Each top-level section is merged key by key.
    """
    config = _default_config()
    if path is None and os.environ.get(CONFIG_ENV):
        candidate = Path(os.environ[CONFIG_ENV]) / "config.json"
        path = candidate if candidate.exists() else None
    if path is not None:
        try:
            user = json.loads(Path(path).read_text("utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot load config {path}: {exc}") from exc
        for section, values in user.items():
            if isinstance(values, dict) and isinstance(config.get(section), dict):
                config[section].update(values)
            else:
                config[section] = values
    return config


@dataclass(frozen=True)
class BulkRuleConfig:
    max_recipients: int = 5
    bulk_phrases: tuple[str, ...] = ()
    listserv_headers: tuple[str, ...] = ()
    bulk_vendor_domains: tuple[str, ...] = ()
    automated_local_parts: tuple[str, ...] = ()
    sender_name_aliases: tuple[str, ...] = ()
    transactional_domains: tuple[str, ...] = ()

    @classmethod
    def from_config(cls, config: Mapping | None = None) -> "BulkRuleConfig":
        section = (config or load_config())["bulk"]
        return cls(
            max_recipients=int(section.get("max_recipients", 5)),
            bulk_phrases=tuple(p.lower() for p in section.get("bulk_phrases", ())),
            listserv_headers=tuple(h.lower() for h in section.get("listserv_headers", ())),
            bulk_vendor_domains=tuple(d.lower() for d in section.get("bulk_vendor_domains", ())),
            automated_local_parts=tuple(p.lower() for p in section.get("automated_local_parts", ())),
            sender_name_aliases=tuple(a.lower() for a in section.get("sender_name_aliases", ())),
            transactional_domains=tuple(d.lower() for d in section.get("transactional_domains", ())),
        )


@dataclass(frozen=True)
class StageRules:
    incoming: tuple[tuple[str, tuple[str, ...]], ...]
    outgoing: tuple[tuple[str, tuple[str, ...]], ...]
    outgoing_default: str | None = None

    @classmethod
    def from_config(cls, config: Mapping | None = None) -> "StageRules":
        section = (config or load_config())["stages"]

        def table(rows):
            out = []
            for stage, phrases in rows:
                if stage not in STAGE_ORDER:
                    raise InputError(f"unknown conversation stage {stage!r} in stage rules")
                out.append((stage, tuple(_normalize_text(p) for p in phrases)))
            return tuple(out)

        default = section.get("outgoing_default")
        if default is not None and default not in STAGE_ORDER:
            raise InputError(f"unknown conversation stage {default!r}")
        return cls(table(section.get("incoming", ())), table(section.get("outgoing", ())), default)


# -- events ----------------------------------------------------------------

def normalize_address(raw: str) -> str:
    """Lowercase, trim, drop any display name, and strip a ``+tag`` suffix."""
    _, addr = parseaddr(str(raw).strip())
    addr = (addr or str(raw)).strip().lower()
    local, sep, domain = addr.rpartition("@")
    if not sep:
        return addr
    local = local.split("+", 1)[0]
    return f"{local}@{domain}"


def is_valid_address(addr: str) -> bool:
    return bool(ADDRESS_RE.match(addr))


def _domain(addr: str) -> str:
    return addr.rpartition("@")[2]


@dataclass(frozen=True)
class EmailEvent:
    message_id: str
    timestamp: float
    from_addr: str
    recipients: tuple[str, ...]
    thread_id: str = ""
    from_name: str = ""
    headers: frozenset = frozenset()
    return_path_domain: str = ""
    body_text: str | None = None
    sentiment: float | None = None

    @classmethod
    def from_record(cls, record: Mapping) -> "EmailEvent":
        """Build a normalized event from one log record.

        Raises ValueError with a reason when the record cannot be parsed.
        """
        if not isinstance(record, Mapping):
            raise ValueError("record is not an object")
        message_id = str(record.get("message_id") or "").strip()
        if not message_id:
            raise ValueError("missing message_id")
        if "from_addr" not in record:
            raise ValueError("missing from_addr")
        sender = normalize_address(record["from_addr"])

        if "recipients" in record:
            raw_recipients = list(record["recipients"] or [])
        elif any(k in record for k in ("to", "cc", "bcc")):
            raw_recipients = [*(record.get("to") or []), *(record.get("cc") or []), *(record.get("bcc") or [])]
        else:
            raise ValueError("missing recipients")
        if isinstance(raw_recipients, str):
            raise ValueError("recipients must be a list")
        recipients = []
        for r in raw_recipients:
            addr = normalize_address(r)
            # the sender CC'ing themselves is not an edge
            if addr != sender and addr not in recipients:
                recipients.append(addr)

        return_domain = record.get("return_path_domain")
        if not return_domain and record.get("return_path"):
            return_domain = _domain(normalize_address(record["return_path"]))
        sentiment = record.get("sentiment")
        if sentiment is not None:
            sentiment = float(sentiment)
            if not -1.0 <= sentiment <= 1.0:
                raise ValueError(f"sentiment {sentiment} outside [-1, 1]")
        body = record.get("body_text")
        return cls(
            message_id=message_id,
            timestamp=parse_timestamp(record.get("timestamp")),
            from_addr=sender,
            recipients=tuple(recipients),
            thread_id=str(record.get("thread_id") or ""),
            from_name=str(record.get("from_name") or ""),
            headers=frozenset(str(h) for h in record.get("headers") or ()),
            return_path_domain=str(return_domain or "").strip().lower(),
            body_text=None if body is None else str(body),
            sentiment=sentiment,
        )


def parse_timestamp(value) -> float:
    if value is None or isinstance(value, bool):
        raise ValueError("missing timestamp")
    if isinstance(value, (int, float)):
        return float(value)
    try:
        return float(value)
    except (TypeError, ValueError):
        pass
    try:
        dt = datetime.fromisoformat(str(value).replace("Z", "+00:00"))
    except ValueError as exc:
        raise ValueError(f"unparseable timestamp {value!r}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def event_problem(ev: EmailEvent) -> str | None:
    """Return why ``ev`` violates the event invariants, or None."""
    if not ev.message_id:
        return "empty message_id"
    if not is_valid_address(ev.from_addr):
        return f"invalid sender address {ev.from_addr!r}"
    for r in ev.recipients:
        if not is_valid_address(r):
            return f"invalid recipient address {r!r}"
    if len(set(ev.recipients)) != len(ev.recipients):
        return "duplicate recipients"
    if ev.from_addr in ev.recipients:
        return "sender listed as recipient"
    return None


def read_event_log(path) -> list:
    """Parse a JSONL event log.

    Returns one item per non-blank line: an :class:`EmailEvent`, or a
    :class:`MalformedEvent` describing why the line was rejected.
    """
    items: list = []
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read events {path}: {exc}") from exc
    with fh:
        index = 0
        for line in fh:
            if not line.strip():
                continue
            try:
                items.append(EmailEvent.from_record(json.loads(line)))
            except (json.JSONDecodeError, ValueError, TypeError) as exc:
                items.append(MalformedEvent(index, str(exc)))
            index += 1
    return items


# -- rules -----------------------------------------------------------------

def _normalize_text(text: str) -> str:
    text = text.replace("’", "'").replace("‘", "'").lower()
    return " ".join(text.split())


def _contains_phrase(text: str, phrase: str) -> bool:
    return re.search(r"(?<!\w)" + re.escape(phrase) + r"(?!\w)", text) is not None


def _domain_matches(domain: str, listed: Iterable[str]) -> bool:
    return any(domain == d or domain.endswith("." + d) for d in listed)


def bulk_reasons(msg: EmailEvent, config: BulkRuleConfig) -> list[str]:
    """Names of every bulk rule that fires for ``msg``."""
    reasons = []
    if len(msg.recipients) > config.max_recipients:
        reasons.append("recipients")
    if msg.body_text is not None:
        body = _normalize_text(msg.body_text)
        if any(_contains_phrase(body, p) for p in config.bulk_phrases):
            reasons.append("body_phrase")
    headers = {h.lower() for h in msg.headers}
    if headers.intersection(config.listserv_headers):
        reasons.append("listserv_header")
    if msg.return_path_domain and _domain_matches(msg.return_path_domain, config.bulk_vendor_domains):
        reasons.append("bulk_vendor")
    local = msg.from_addr.rpartition("@")[0]
    if local in config.automated_local_parts:
        reasons.append("automated_inbox")
    name = msg.from_name.lower()
    if name and any(_contains_phrase(name, a) for a in config.sender_name_aliases):
        reasons.append("sender_alias")
    if any(_domain_matches(_domain(a), config.transactional_domains) for a in (msg.from_addr, *msg.recipients)):
        reasons.append("transactional_domain")
    return reasons


def is_bulk(msg: EmailEvent, config: BulkRuleConfig | None = None) -> bool:
    return bool(bulk_reasons(msg, config or BulkRuleConfig.from_config()))


def guess_stage(msg: EmailEvent, direction: str, rules: StageRules | None = None) -> str | None:
    """Infer a conversation stage from keyword rules, first match wins."""
    rules = rules or StageRules.from_config()
    if direction not in (INCOMING, OUTGOING):
        raise ValueError(f"direction must be {INCOMING!r} or {OUTGOING!r}")
    table = rules.incoming if direction == INCOMING else rules.outgoing
    body = _normalize_text(msg.body_text or "")
    for stage, phrases in table:
        if any(_contains_phrase(body, p) for p in phrases):
            return stage
    if direction == OUTGOING:
        return rules.outgoing_default
    return None


def advance_stage(current: str | None, proposed: str | None) -> str | None:
    """Apply a proposed stage only if it does not move the conversation back."""
    if proposed is None:
        return current
    if current is None or STAGE_ORDER[proposed] > STAGE_ORDER[current]:
        return proposed
    return current


# -- ingestion -------------------------------------------------------------

@dataclass
class IngestState:
    """What survives between runs: seen message ids, cursors, known stages."""

    seen_message_ids: set = field(default_factory=set)
    history_cursor: dict = field(default_factory=dict)
    stages: dict = field(default_factory=dict)

    FILENAME = "state.json"

    def save(self, directory) -> None:
        data = {
            "version": 1,
            "seen_message_ids": sorted(self.seen_message_ids),
            "history_cursor": dict(sorted(self.history_cursor.items())),
            "stages": {f: dict(sorted(s.items())) for f, s in sorted(self.stages.items())},
        }
        atomic_write_text(Path(directory) / self.FILENAME, json.dumps(data, indent=1) + "\n")

    @classmethod
    def load(cls, directory) -> "IngestState":
        path = Path(directory) / cls.FILENAME
        if not path.exists():
            return cls()
        try:
            data = json.loads(path.read_text("utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot load ingest state {path}: {exc}") from exc
        return cls(set(data.get("seen_message_ids", [])), dict(data.get("history_cursor", {})),
                   {f: dict(s) for f, s in data.get("stages", {}).items()})


@dataclass(frozen=True)
class ConversationUpdate:
    founder: str
    investor: str
    message_id: str
    timestamp: float
    direction: str
    previous_stage: str | None
    stage: str | None

    def to_dict(self) -> dict:
        return {
            "founder": self.founder, "investor": self.investor, "message_id": self.message_id,
            "timestamp": self.timestamp, "direction": self.direction,
            "previous_stage": self.previous_stage, "stage": self.stage,
        }


@dataclass
class IngestStats:
    ingested: int = 0
    skipped_bulk: int = 0
    skipped_dup: int = 0
    skipped_window: int = 0
    malformed: int = 0
    errors: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "ingested": self.ingested, "skipped_bulk": self.skipped_bulk,
            "skipped_dup": self.skipped_dup, "skipped_window": self.skipped_window,
            "malformed": self.malformed,
            "errors": [{"index": e.index, "reason": e.reason} for e in self.errors],
        }


class IngestResult(NamedTuple):
    delta: GraphDelta
    updates: list
    stats: IngestStats


def ingest_events(
    events: Sequence,
    founder_addr: str,
    state: IngestState,
    config: Mapping | None = None,
    targets: Mapping[str, str | None] | None = None,
    since: float | None = None,
) -> IngestResult:
    """Turn one founder mailbox's events into a graph delta.

    ``events`` may hold :class:`EmailEvent` objects, raw record dicts, or
    :class:`MalformedEvent` placeholders from :func:`read_event_log`.
    ``targets`` maps tracked investor addresses to their current stage.
    ``state`` is updated in place; a second pass over the same events
    yields an empty delta.
    """
    config = config or load_config()
    bulk_rules = BulkRuleConfig.from_config(config)
    stage_rules = StageRules.from_config(config)
    founder = normalize_address(founder_addr)
    stats = IngestStats()
    edges: dict[tuple[str, str], int] = {}
    labels: dict[str, set] = {}
    updates: list[ConversationUpdate] = []

    target_stage = dict(state.stages.get(founder, {}))
    for addr, stage in (targets or {}).items():
        addr = normalize_address(addr)
        if stage is not None and stage not in STAGE_ORDER:
            raise InputError(f"unknown stage {stage!r} for target {addr}")
        target_stage[addr] = advance_stage(target_stage.get(addr), stage)

    for index, item in enumerate(events):
        if isinstance(item, MalformedEvent):
            stats.malformed += 1
            stats.errors.append(item)
            continue
        try:
            ev = item if isinstance(item, EmailEvent) else EmailEvent.from_record(item)
        except (ValueError, TypeError) as exc:
            ev, problem = None, str(exc)
        else:
            problem = event_problem(ev)
        if problem is not None:
            err = MalformedEvent(index, problem)
            log.warning("skipping malformed event: %s", err)
            stats.malformed += 1
            stats.errors.append(err)
            continue
        if since is not None and ev.timestamp < since:
            stats.skipped_window += 1
            continue
        if ev.message_id in state.seen_message_ids:
            stats.skipped_dup += 1
            continue
        state.seen_message_ids.add(ev.message_id)
        if bulk_reasons(ev, bulk_rules):
            stats.skipped_bulk += 1
            continue

        stats.ingested += 1
        for r in ev.recipients:
            edges[(ev.from_addr, r)] = edges.get((ev.from_addr, r), 0) + 1

        if ev.from_addr == founder:
            direction, touched = OUTGOING, [r for r in ev.recipients if r in target_stage]
        else:
            direction, touched = INCOMING, [ev.from_addr] if ev.from_addr in target_stage else []
        if touched:
            proposed = guess_stage(ev, direction, stage_rules)
            for investor in touched:
                before = target_stage[investor]
                after = advance_stage(before, proposed)
                target_stage[investor] = after
                labels.setdefault(investor, set()).add(FLAG_INVESTOR)
                updates.append(ConversationUpdate(founder, investor, ev.message_id, ev.timestamp,
                                                  direction, before, after))
        state.history_cursor[founder] = ev.thread_id or ev.message_id

    if stats.ingested:
        labels.setdefault(founder, set()).add(FLAG_FOUNDER)
    state.stages[founder] = {k: v for k, v in target_stage.items() if v is not None}
    delta = GraphDelta(edges, {n: frozenset(f) for n, f in labels.items()})
    return IngestResult(delta, updates, stats)
