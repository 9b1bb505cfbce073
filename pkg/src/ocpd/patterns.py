"""Detectors for interaction patterns that trip up per-type discovery and merge.

Three kinds are recognised:

``oiwl``
    A length-one loop ``act1 act2 act1`` for objects of ``ot1`` where only the
    repeated ``act1`` event interacts with the ``ot2`` object of the ``act2``
    event.
``oiwl_sub``
    The stricter variant with one filler event ``e4`` inside the loop window
    and no reuse of window activities outside of it.
``spurious``
    Two same-labelled events for different types that never share objects,
    while no event with that label ever relates both types.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .log import Event, EventLog, remove_events

KINDS = ("oiwl", "oiwl_sub", "spurious")


@dataclass(frozen=True)
class PatternMatch:
    kind: str
    events: tuple  # (e1, e2, e3, e4) with e4 possibly None, or (e1, e2)
    ot1: str
    ot2: str
    act1: str
    act2: str | None = None

    @property
    def key(self) -> tuple:
        """Activity/type quadruple the repairs work on."""
        return (self.act1, self.act2, self.ot1, self.ot2)

    def sort_key(self) -> tuple:
        return (self.kind, tuple(e or "" for e in self.events), self.ot1, self.ot2,
                self.act1, self.act2 or "")

    def event_ids(self) -> list[str]:
        return [e for e in self.events if e is not None]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "events": list(self.events), "ot1": self.ot1,
                "ot2": self.ot2, "act1": self.act1, "act2": self.act2}


def sort_matches(matches) -> list[PatternMatch]:
    return sorted(matches, key=PatternMatch.sort_key)


def matches_to_json(matches) -> str:
    return json.dumps([m.to_dict() for m in sort_matches(matches)], indent=2, ensure_ascii=False)


# -- formula pieces --------------------------------------------------------

def _strictly_ordered(log: EventLog, *events: Event) -> bool:
    return all(log.precedes(a.id, b.id) and a.timestamp < b.timestamp
               for a, b in zip(events, events[1:]))


def _loop_core(log, e1, e2, e3, ot1, ot2) -> bool:
    """Shared conditions: loop shape, ot1 object carried through, ot2 joined
    only on the repeat."""
    if len({e1.id, e2.id, e3.id}) < 3:
        return False
    if e1.activity != e3.activity or e2.activity == e1.activity:
        return False
    if not _strictly_ordered(log, e1, e2, e3):
        return False
    if not e1.objects(ot1) & e2.objects(ot1) & e3.objects(ot1):
        return False
    if e1.objects(ot2) & e2.objects(ot2) & e3.objects(ot2):
        return False
    return bool(e2.objects(ot2) & e3.objects(ot2))


def _no_prior_contact(log, e2, ot2, act1) -> bool:
    """Every ``act1`` event up to ``e2`` avoids the ot2 objects of ``e2``."""
    objs = e2.objects(ot2)
    return not any(e.activity == act1 and log.precedes(e.id, e2.id) and e.objects(ot2) & objs
                   for e in log)


def is_filler(log, e1, e2, e3, e4, ot1, ot2) -> bool:
    """``e4`` lies strictly inside the loop window and touches exactly one side."""
    if e4.id in (e1.id, e2.id, e3.id):
        return False
    if not _strictly_ordered(log, e1, e4, e3):
        return False
    own_side = bool(e4.objects(ot1) & e1.objects(ot1)) and not e4.objects(ot2)
    other_side = bool(e4.objects(ot2) & e2.objects(ot2)) and not e4.objects(ot1)
    return own_side or other_side


def _window_is_closed(log, e1, e3) -> bool:
    lo, hi = e1.timestamp, e3.timestamp
    inside = {e.activity for e in log if lo <= e.timestamp <= hi}
    return not any(e.activity in inside for e in log if e.timestamp < lo or e.timestamp > hi)


def holds_oiwl(log, e1, e2, e3, ot1, ot2) -> bool:
    return _loop_core(log, e1, e2, e3, ot1, ot2) and _no_prior_contact(log, e2, ot2, e1.activity)


def holds_oiwl_sub(log, e1, e2, e3, e4, ot1, ot2) -> bool:
    if not _loop_core(log, e1, e2, e3, ot1, ot2):
        return False
    if e4.activity in (e1.activity, e2.activity):
        return False
    return is_filler(log, e1, e2, e3, e4, ot1, ot2) and _window_is_closed(log, e1, e3)


def holds_spurious(log, e1, e2, ot1, ot2) -> bool:
    if e1.id == e2.id or ot1 == ot2 or e1.activity != e2.activity:
        return False
    if (e2.timestamp, e2.id) < (e1.timestamp, e1.id):
        return False
    if e1.objects(ot1) & e2.objects(ot1) or e1.objects(ot2) & e2.objects(ot2):
        return False
    if not (e1.objects(ot1) and e2.objects(ot2)):
        return False
    return not any(e.activity == e1.activity and e.objects(ot1) and e.objects(ot2) for e in log)


# -- detectors -------------------------------------------------------------

def _loop_triples(log: EventLog):
    by_act: dict[str, list[Event]] = {}
    for e in log:
        by_act.setdefault(e.activity, []).append(e)
    types = sorted({ot for e in log for ot in e.types()})
    for same in by_act.values():
        for e1 in same:
            for e3 in same:
                if not e1.timestamp < e3.timestamp:
                    continue
                for e2 in log:
                    if not e1.timestamp < e2.timestamp < e3.timestamp:
                        continue
                    for ot1 in types:
                        if not e1.objects(ot1) & e2.objects(ot1) & e3.objects(ot1):
                            continue
                        for ot2 in types:
                            if _loop_core(log, e1, e2, e3, ot1, ot2):
                                yield e1, e2, e3, ot1, ot2


def _fillers(log, e1, e2, e3, ot1, ot2):
    return [e4 for e4 in log if is_filler(log, e1, e2, e3, e4, ot1, ot2)]


def detect_oiwl(log: EventLog) -> set[PatternMatch]:
    out = set()
    for e1, e2, e3, ot1, ot2 in _loop_triples(log):
        if not _no_prior_contact(log, e2, ot2, e1.activity):
            continue
        fillers = _fillers(log, e1, e2, e3, ot1, ot2)
        e4 = fillers[0].id if fillers else None  # earliest, events are time-sorted
        out.add(PatternMatch("oiwl", (e1.id, e2.id, e3.id, e4), ot1, ot2,
                             e1.activity, e2.activity))
    return out


def detect_oiwl_sub(log: EventLog) -> set[PatternMatch]:
    out = set()
    for e1, e2, e3, ot1, ot2 in _loop_triples(log):
        if not _window_is_closed(log, e1, e3):
            continue
        for e4 in _fillers(log, e1, e2, e3, ot1, ot2):
            if e4.activity not in (e1.activity, e2.activity):
                out.add(PatternMatch("oiwl_sub", (e1.id, e2.id, e3.id, e4.id), ot1, ot2,
                                     e1.activity, e2.activity))
    return out


def detect_spurious(log: EventLog) -> set[PatternMatch]:
    by_act: dict[str, list[Event]] = {}
    for e in log:
        by_act.setdefault(e.activity, []).append(e)
    out = set()
    for act, same in by_act.items():
        for e1 in same:
            for e2 in same:
                for ot1 in sorted(e1.types()):
                    for ot2 in sorted(e2.types()):
                        if holds_spurious(log, e1, e2, ot1, ot2):
                            out.add(PatternMatch("spurious", (e1.id, e2.id), ot1, ot2, act))
    return out


DETECTORS = {"oiwl": detect_oiwl, "oiwl_sub": detect_oiwl_sub, "spurious": detect_spurious}


def detect(log: EventLog, kind: str) -> set[PatternMatch]:
    try:
        return DETECTORS[kind](log)
    except KeyError:
        raise ValueError(f"unknown pattern kind {kind!r}") from None


def detect_all(log: EventLog) -> list[PatternMatch]:
    return sort_matches(m for kind in KINDS for m in detect(log, kind))


def log_without(log: EventLog, kind: str) -> EventLog:
    """Drop every event taking part in a witness until no witness remains."""
    while True:
        matches = detect(log, kind)
        if not matches:
            return log
        log = remove_events(log, {eid for m in matches for eid in m.event_ids()})
