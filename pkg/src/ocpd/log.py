"""Object-centric event logs: data model, JSON ingestion, flattening and editing."""

from __future__ import annotations

import heapq
import json
from collections import Counter
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Iterable, Mapping


class LogError(ValueError):
    """Raised for malformed or inconsistent event logs."""


@dataclass(frozen=True)
class Event:
    id: str
    activity: str
    timestamp: datetime
    omap: Mapping[str, frozenset] = field(default_factory=dict)
    vmap: Mapping[str, object] = field(default_factory=dict)

    def __hash__(self):
        return hash(self.id)

    def objects(self, ot: str) -> frozenset:
        # absent type means no objects
        return self.omap.get(ot, frozenset())

    def types(self) -> set[str]:
        return {ot for ot, objs in self.omap.items() if objs}


def _normalize_omap(omap: Mapping[str, Iterable[str]]) -> dict[str, frozenset]:
    return {ot: frozenset(objs) for ot, objs in omap.items() if objs}


def make_event(id, activity, timestamp, omap=None, vmap=None) -> Event:
    if isinstance(timestamp, str):
        timestamp = parse_timestamp(timestamp)
    return Event(id, activity, timestamp, _normalize_omap(omap or {}), dict(vmap or {}))


def parse_timestamp(text: str) -> datetime:
    try:
        ts = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError as exc:
        raise LogError(f"bad timestamp {text!r}") from exc
    if ts.tzinfo is not None:
        ts = ts.astimezone(timezone.utc).replace(tzinfo=None)
    return ts


class EventLog:
    """A set of events with a partial order.

    ``order`` is either the string ``"timestamp"`` (total order by timestamp,
    ties broken by event id) or a collection of ``(a, b)`` pairs meaning
    ``a`` precedes ``b``; the reflexive-transitive closure is taken.
    """

    def __init__(self, events: Iterable[Event] = (), order="timestamp"):
        by_id: dict[str, Event] = {}
        for e in events:
            if e.id in by_id:
                raise LogError(f"duplicate event id {e.id!r}")
            by_id[e.id] = e
        self._by_id = by_id
        self.events: tuple[Event, ...] = tuple(
            sorted(by_id.values(), key=lambda e: (e.timestamp, e.id)))
        self._type_of = self._check_types()
        if order == "timestamp":
            self.order = "timestamp"
            self._closure = None
        else:
            edges = frozenset((a, b) for a, b in order)
            self.order = edges
            self._closure = self._close(edges)

    def _check_types(self) -> dict[str, str]:
        type_of: dict[str, str] = {}
        for e in self.events:
            for ot, objs in e.omap.items():
                for oi in objs:
                    if type_of.setdefault(oi, ot) != ot:
                        raise LogError(
                            f"object {oi!r} appears under types {type_of[oi]!r} and {ot!r}")
        return type_of

    def _close(self, edges) -> dict[str, set[str]]:
        succ: dict[str, set[str]] = {eid: set() for eid in self._by_id}
        for a, b in edges:
            if a not in self._by_id or b not in self._by_id:
                raise LogError(f"order edge ({a!r}, {b!r}) references unknown event")
            if self._by_id[a].timestamp > self._by_id[b].timestamp:
                raise LogError(f"order edge ({a!r}, {b!r}) violates timestamps")
            if a != b:
                succ[a].add(b)
        closure = {}
        for start in succ:
            seen = {start}
            stack = [start]
            while stack:
                for nxt in succ[stack.pop()]:
                    if nxt not in seen:
                        seen.add(nxt)
                        stack.append(nxt)
            closure[start] = seen
        for a, reach in closure.items():
            for b in reach:
                if a != b and a in closure[b]:
                    raise LogError(f"order is cyclic between {a!r} and {b!r}")
        return closure

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def __contains__(self, eid):
        return eid in self._by_id

    def __getitem__(self, eid) -> Event:
        return self._by_id[eid]

    def __eq__(self, other):
        if not isinstance(other, EventLog):
            return NotImplemented
        return self.events == other.events and self._order_key() == other._order_key()

    def _order_key(self):
        if self._closure is None:
            return "timestamp"
        return frozenset((a, b) for a, reach in self._closure.items() for b in reach)

    def __repr__(self):
        return f"EventLog({len(self.events)} events)"

    @property
    def ids(self) -> set[str]:
        return set(self._by_id)

    def type_of(self, oi: str) -> str:
        return self._type_of[oi]

    def objects(self, ot: str | None = None) -> set[str]:
        return {oi for oi, t in self._type_of.items() if ot is None or t == ot}

    def activities(self) -> set[str]:
        return {e.activity for e in self.events}

    def precedes(self, a: str, b: str) -> bool:
        """Reflexive order test ``a ⪯ b``."""
        if self._closure is None:
            ea, eb = self._by_id[a], self._by_id[b]
            return (ea.timestamp, ea.id) <= (eb.timestamp, eb.id)
        return b in self._closure[a]

    def linearize(self) -> list[Event]:
        """Events in an order-consistent sequence, earliest timestamp (then id) first."""
        if self._closure is None:
            return list(self.events)
        indeg = Counter()
        for a, reach in self._closure.items():
            for b in reach:
                if a != b:
                    indeg[b] += 1
        heap = [(e.timestamp, e.id) for e in self.events if indeg[e.id] == 0]
        heapq.heapify(heap)
        out = []
        while heap:
            _, eid = heapq.heappop(heap)
            out.append(self._by_id[eid])
            for b in self._closure[eid]:
                if b != eid:
                    indeg[b] -= 1
                    if indeg[b] == 0:
                        heapq.heappush(heap, (self._by_id[b].timestamp, b))
        return out

    def restricted_order(self, keep: set[str]):
        if self._closure is None:
            return "timestamp"
        return [(a, b) for a, reach in self._closure.items() if a in keep
                for b in reach if b in keep and a != b]


@dataclass(frozen=True)
class SimpleEventLog:
    """Multiset of activity traces."""

    traces: Counter

    def __post_init__(self):
        if any(len(t) == 0 for t in self.traces):
            raise LogError("simple event log traces must be nonempty")

    @classmethod
    def of(cls, traces: Iterable[Iterable[str]]) -> "SimpleEventLog":
        return cls(Counter(tuple(t) for t in traces))

    def __len__(self):
        return sum(self.traces.values())

    def activities(self) -> set[str]:
        return {a for t in self.traces for a in t}


def object_types(log: EventLog) -> set[str]:
    return {ot for e in log.events for ot, objs in e.omap.items() if objs}


def flatten_by_object(log: EventLog, ot: str) -> dict[str, tuple[str, ...]]:
    if ot not in object_types(log):
        raise LogError(f"unknown object type {ot!r}")
    traces: dict[str, list[str]] = {}
    for e in log.linearize():
        for oi in e.objects(ot):
            traces.setdefault(oi, []).append(e.activity)
    return {oi: tuple(t) for oi, t in sorted(traces.items())}


def flatten(log: EventLog, ot: str) -> SimpleEventLog:
    return SimpleEventLog(Counter(flatten_by_object(log, ot).values()))


def remove_events(log: EventLog, ids: Iterable[str]) -> EventLog:
    ids = set(ids)
    keep = {e.id for e in log.events} - ids
    return EventLog([e for e in log.events if e.id in keep], log.restricted_order(keep))


def relabel_events(log: EventLog, ids: Iterable[str], act: str) -> EventLog:
    ids = set(ids)
    events = [replace(e, activity=act) if e.id in ids else e for e in log.events]
    return EventLog(events, log.restricted_order(log.ids))


# -- JSON document format ---------------------------------------------------

def log_from_dict(doc: Mapping) -> EventLog:
    if not isinstance(doc, Mapping) or not isinstance(doc.get("events"), list):
        raise LogError("log document must be an object with an 'events' array")
    events = []
    for raw in doc["events"]:
        try:
            eid, act, ts = raw["id"], raw["activity"], raw["timestamp"]
        except (KeyError, TypeError) as exc:
            raise LogError(f"malformed event {raw!r}") from exc
        if not all(isinstance(x, str) for x in (eid, act, ts)):
            raise LogError(f"malformed event {raw!r}")
        omap = raw.get("omap", {})
        if not isinstance(omap, Mapping) or not all(
                isinstance(v, list) and all(isinstance(o, str) for o in v) for v in omap.values()):
            raise LogError(f"malformed omap in event {eid!r}")
        vmap = raw.get("vmap", {})
        if not isinstance(vmap, Mapping) or not all(
                v is None or isinstance(v, (str, int, float, bool)) for v in vmap.values()):
            raise LogError(f"vmap of event {eid!r} must hold scalars")
        events.append(make_event(eid, act, ts, omap, vmap))
    order = doc.get("order", "timestamp")
    if order != "timestamp":
        if not isinstance(order, list) or not all(
                isinstance(p, list) and len(p) == 2 for p in order):
            raise LogError("order must be 'timestamp' or a list of [idA, idB] pairs")
        order = [tuple(p) for p in order]
    return EventLog(events, order)


def parse_log(text: str) -> EventLog:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LogError(f"invalid JSON: {exc}") from exc
    return log_from_dict(doc)


def read_log(path) -> EventLog:
    with open(path, encoding="utf-8") as fh:
        return parse_log(fh.read())


def log_to_dict(log: EventLog) -> dict:
    events = [{
        "id": e.id,
        "activity": e.activity,
        "timestamp": e.timestamp.isoformat(),
        "omap": {ot: sorted(objs) for ot, objs in sorted(e.omap.items())},
        "vmap": dict(e.vmap),
    } for e in log.events]
    if log.order == "timestamp":
        order = "timestamp"
    else:
        order = sorted([a, b] for a, b in log.order)
    return {"events": events, "order": order}


def serialize_log(log: EventLog) -> str:
    return json.dumps(log_to_dict(log), indent=2, ensure_ascii=False)
