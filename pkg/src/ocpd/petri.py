"""Labeled and accepting Petri nets with classical firing semantics."""

from __future__ import annotations

import enum
import json
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping

DEFAULT_MAX_MARKINGS = 100_000


class NetError(ValueError):
    pass


class Multiset(Mapping):
    """Immutable, hashable multiset. Zero counts are dropped."""

    __slots__ = ("_items", "_hash")

    def __init__(self, items=()):
        if isinstance(items, Mapping):
            counts = Counter({k: v for k, v in items.items()})
        else:
            counts = Counter(items)
        for k, v in counts.items():
            if v < 0:
                raise ValueError(f"negative multiplicity for {k!r}")
        self._items = {k: v for k, v in counts.items() if v}
        self._hash = None

    def __getitem__(self, key):
        return self._items.get(key, 0)

    def __iter__(self):
        return iter(self._items)

    def __len__(self):
        return len(self._items)

    def __contains__(self, key):
        return key in self._items

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._items.items()))
        return self._hash

    def __eq__(self, other):
        if isinstance(other, Multiset):
            return self._items == other._items
        if isinstance(other, Mapping):
            return self._items == {k: v for k, v in other.items() if v}
        return NotImplemented

    def __le__(self, other):
        return all(other[k] >= v for k, v in self._items.items())

    def __add__(self, other):
        c = Counter(self._items)
        c.update(dict(other.items()) if isinstance(other, Mapping) else other)
        return Multiset(c)

    def __sub__(self, other):
        c = Counter(self._items)
        for k, v in (other.items() if isinstance(other, Mapping) else Counter(other).items()):
            c[k] -= v
            if c[k] < 0:
                raise ValueError(f"cannot remove {k!r}: not enough tokens")
        return Multiset(c)

    def size(self) -> int:
        return sum(self._items.values())

    def elements(self):
        return Counter(self._items).elements()

    def __repr__(self):
        inner = ", ".join(f"{k!r}: {v}" for k, v in sorted(self._items.items(), key=repr))
        return f"Multiset({{{inner}}})"


Marking = Multiset


@dataclass(frozen=True)
class LabeledPetriNet:
    places: frozenset
    transitions: frozenset
    arcs: frozenset
    labels: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "places", frozenset(self.places))
        object.__setattr__(self, "transitions", frozenset(self.transitions))
        object.__setattr__(self, "arcs", frozenset(tuple(a) for a in self.arcs))
        object.__setattr__(self, "labels", {t: l for t, l in dict(self.labels).items()
                                            if l is not None})
        if self.places & self.transitions:
            raise NetError(f"place/transition ids overlap: {sorted(self.places & self.transitions)}")
        for a, b in self.arcs:
            if not ((a in self.places and b in self.transitions)
                    or (a in self.transitions and b in self.places)):
                raise NetError(f"arc ({a!r}, {b!r}) must connect a place and a transition")
        unknown = set(self.labels) - self.transitions
        if unknown:
            raise NetError(f"labels for unknown transitions {sorted(unknown)}")
        pre: dict = {n: set() for n in self.places | self.transitions}
        post: dict = {n: set() for n in self.places | self.transitions}
        for a, b in self.arcs:
            post[a].add(b)
            pre[b].add(a)
        object.__setattr__(self, "_pre", {n: frozenset(s) for n, s in pre.items()})
        object.__setattr__(self, "_post", {n: frozenset(s) for n, s in post.items()})

    def __hash__(self):
        return hash((self.places, self.transitions, self.arcs,
                     frozenset(self.labels.items())))

    def __eq__(self, other):
        if not isinstance(other, LabeledPetriNet):
            return NotImplemented
        return (self.places == other.places and self.transitions == other.transitions
                and self.arcs == other.arcs and dict(self.labels) == dict(other.labels))

    def preset(self, node) -> frozenset:
        return self._pre[node]

    def postset(self, node) -> frozenset:
        return self._post[node]

    def label(self, t):
        """Activity label of ``t``; ``None`` for silent transitions."""
        return self.labels.get(t)

    def is_silent(self, t) -> bool:
        return t not in self.labels

    def transitions_labeled(self, act) -> list:
        return sorted(t for t, l in self.labels.items() if l == act)

    def nodes(self) -> frozenset:
        return self.places | self.transitions


@dataclass(frozen=True)
class AcceptingPetriNet:
    net: LabeledPetriNet
    m_init: Multiset
    m_final: Multiset

    def __post_init__(self):
        object.__setattr__(self, "m_init", Multiset(self.m_init))
        object.__setattr__(self, "m_final", Multiset(self.m_final))
        for m in (self.m_init, self.m_final):
            bad = set(m) - self.net.places
            if bad:
                raise NetError(f"marking references unknown places {sorted(bad)}")


def enabled_transitions(apn: AcceptingPetriNet, m: Marking) -> set:
    net = apn.net
    return {t for t in net.transitions if all(m[p] >= 1 for p in net.preset(t))}


def fire(apn: AcceptingPetriNet, m: Marking, t) -> Marking:
    net = apn.net
    if t not in net.transitions:
        raise NetError(f"unknown transition {t!r}")
    if not all(m[p] >= 1 for p in net.preset(t)):
        raise NetError(f"transition {t!r} is not enabled")
    return m - Counter(net.preset(t)) + Counter(net.postset(t))


@dataclass
class WFNetReport:
    ok: bool
    sources: list = field(default_factory=list)
    sinks: list = field(default_factory=list)
    not_from_source: list = field(default_factory=list)
    not_to_sink: list = field(default_factory=list)

    def __bool__(self):
        return self.ok

    def describe(self) -> str:
        if self.ok:
            return "WF-net"
        parts = []
        if len(self.sources) != 1:
            parts.append(f"source places {self.sources}")
        if len(self.sinks) != 1:
            parts.append(f"sink places {self.sinks}")
        if self.not_from_source:
            parts.append(f"unreachable from source: {self.not_from_source}")
        if self.not_to_sink:
            parts.append(f"cannot reach sink: {self.not_to_sink}")
        return "; ".join(parts)


def _reach(start, step) -> set:
    seen = {start}
    stack = [start]
    while stack:
        for nxt in step(stack.pop()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def is_wf_net(net: LabeledPetriNet) -> WFNetReport:
    sources = sorted(p for p in net.places if not net.preset(p))
    sinks = sorted(p for p in net.places if not net.postset(p))
    nodes = net.nodes()
    if len(sources) != 1 or len(sinks) != 1:
        return WFNetReport(False, sources, sinks)
    fwd = _reach(sources[0], net.postset)
    bwd = _reach(sinks[0], net.preset)
    not_from = sorted(nodes - fwd)
    not_to = sorted(nodes - bwd)
    return WFNetReport(not (not_from or not_to), sources, sinks, not_from, not_to)


class Status(enum.Enum):
    SOUND = "sound"
    UNSOUND = "unsound"
    UNKNOWN = "unknown"


@dataclass
class SoundnessVerdict:
    status: Status
    dead_transitions: list = field(default_factory=list)
    # a reachable marking from which the final marking cannot be reached
    stuck_marking: object = None
    reason: str = ""
    explored: int = 0
    fired: list = field(default_factory=list)

    @property
    def sound(self) -> bool:
        return self.status is Status.SOUND

    def summary(self) -> str:
        text = f"{self.status.value} ({self.explored} markings explored)"
        if self.reason:
            text += f": {self.reason}"
        return text


def explore(initial, successors, max_states):
    """Breadth-first state-space construction.

    Returns ``(edges, complete)`` where ``edges`` maps each visited state to a
    list of ``(action, successor)`` pairs.
    """
    edges = {}
    queue = deque([initial])
    edges[initial] = None
    while queue:
        state = queue.popleft()
        out = list(successors(state))
        edges[state] = out
        for _, nxt in out:
            if nxt not in edges:
                if len(edges) >= max_states:
                    return edges, False
                edges[nxt] = None
                queue.append(nxt)
    return edges, True


def verdict_from_graph(edges, final, transitions, describe=str,
                       action_transition=lambda a: a) -> SoundnessVerdict:
    """Option to complete and dead transitions over a fully explored graph."""
    fired = set()
    back: dict = {s: [] for s in edges}
    for src, out in edges.items():
        for action, dst in out:
            fired.add(action_transition(action))
            back[dst].append(src)
    dead = sorted(t for t in transitions if t not in fired)
    can_finish = _reach(final, lambda s: back[s]) if final in edges else set()
    stuck = None
    for s in edges:
        if s not in can_finish:
            stuck = s
            break
    reasons = []
    if stuck is not None:
        reasons.append(f"no option to complete from {describe(stuck)}")
    if dead:
        reasons.append(f"dead transitions {dead}")
    status = Status.UNSOUND if reasons else Status.SOUND
    return SoundnessVerdict(status, dead, stuck, "; ".join(reasons), len(edges), sorted(fired))


def is_sound_wf_net(apn: AcceptingPetriNet, max_markings: int = DEFAULT_MAX_MARKINGS) -> SoundnessVerdict:
    net = apn.net
    report = is_wf_net(net)
    if not report:
        raise NetError(f"not a WF-net: {report.describe()}")
    src, snk = report.sources[0], report.sinks[0]
    if apn.m_init != Multiset([src]) or apn.m_final != Multiset([snk]):
        raise NetError("markings must be [source] and [sink]")

    def successors(m):
        for t in sorted(enabled_transitions(apn, m)):
            yield t, fire(apn, m, t)

    edges, complete = explore(apn.m_init, successors, max_markings)
    if not complete:
        return SoundnessVerdict(Status.UNKNOWN, reason=f"exploration cap {max_markings} reached",
                                explored=len(edges))
    return verdict_from_graph(edges, apn.m_final, net.transitions)


def is_place_bordered_fragment(sub: LabeledPetriNet, net: LabeledPetriNet) -> bool:
    nodes = sub.nodes()
    if not nodes <= net.nodes() or not sub.places <= net.places:
        return False
    restricted = {(a, b) for a, b in net.arcs if a in nodes and b in nodes}
    if set(sub.arcs) != restricted:
        return False
    if any(sub.label(t) != net.label(t) for t in sub.transitions):
        return False
    for a, b in net.arcs:
        if (a in nodes) != (b in nodes):
            inner = a if a in nodes else b
            if inner not in sub.places:
                return False
    if not nodes:
        return True
    undirected = {n: set() for n in nodes}
    for a, b in sub.arcs:
        undirected[a].add(b)
        undirected[b].add(a)
    return _reach(next(iter(nodes)), undirected.__getitem__) == set(nodes)


def silent_closure(apn: AcceptingPetriNet, markings, max_markings: int) -> set:
    """Markings reachable from ``markings`` (one marking or a collection)
    by silent transitions only."""
    net = apn.net
    silent = [(t, Counter(net.preset(t)), Counter(net.postset(t)))
              for t in net.transitions if net.is_silent(t)]
    start = [markings] if isinstance(markings, Multiset) else list(markings)
    seen = set(start)
    stack = list(seen)
    while stack:
        cur = stack.pop()
        for t, pre, post in silent:
            if all(cur[p] >= 1 for p in pre):
                nxt = cur - pre + post
                if nxt not in seen:
                    if len(seen) >= max_markings:
                        raise NetError("silent closure exceeded the marking cap")
                    seen.add(nxt)
                    stack.append(nxt)
    return seen


def replays(apn: AcceptingPetriNet, trace: Iterable[str], max_markings: int = 10_000) -> bool:
    """True iff the trace leads from the initial to the final marking,
    interleaving silent transitions freely."""
    net = apn.net
    current = silent_closure(apn, apn.m_init, max_markings)
    for act in trace:
        fired = {fire(apn, m, t) for m in current for t in net.transitions_labeled(act)
                 if all(m[p] >= 1 for p in net.preset(t))}
        if not fired:
            return False
        current = silent_closure(apn, fired, max_markings)
    return apn.m_final in current


# -- interchange -------------------------------------------------------------

def apn_to_dict(apn: AcceptingPetriNet) -> dict:
    net = apn.net
    return {
        "places": [{"id": p} for p in sorted(net.places)],
        "transitions": [{"id": t, "label": net.label(t)} for t in sorted(net.transitions)],
        "arcs": sorted([a, b] for a, b in net.arcs),
        "m_init": dict(sorted(apn.m_init.items())),
        "m_final": dict(sorted(apn.m_final.items())),
    }


def net_from_dict(doc: Mapping) -> LabeledPetriNet:
    try:
        places = [p["id"] for p in doc["places"]]
        transitions = [t["id"] for t in doc["transitions"]]
        labels = {t["id"]: t.get("label") for t in doc["transitions"]}
        arcs = [tuple(a) for a in doc["arcs"]]
    except (KeyError, TypeError) as exc:
        raise NetError(f"malformed net document: {exc}") from exc
    return LabeledPetriNet(frozenset(places), frozenset(transitions), frozenset(arcs), labels)


def apn_from_dict(doc: Mapping) -> AcceptingPetriNet:
    return AcceptingPetriNet(net_from_dict(doc), Multiset(doc.get("m_init", {})),
                             Multiset(doc.get("m_final", {})))


def dumps_apn(apn: AcceptingPetriNet) -> str:
    return json.dumps(apn_to_dict(apn), indent=2, ensure_ascii=False)


def loads_apn(text: str) -> AcceptingPetriNet:
    return apn_from_dict(json.loads(text))
