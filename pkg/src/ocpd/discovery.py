"""Inductive Miner over simple event logs and process-tree to WF-net translation."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import count
from typing import Iterable

from .log import EventLog, LogError, SimpleEventLog, flatten, object_types
from .petri import AcceptingPetriNet, LabeledPetriNet, Multiset

SEQ, XOR, AND, LOOP = "->", "X", "+", "loop"
OPERATORS = (SEQ, XOR, AND, LOOP)


@dataclass(frozen=True)
class ProcessTree:
    """Operator node (``op`` set, ``children`` ordered) or leaf (``label``;
    ``None`` is the silent leaf)."""

    op: str | None = None
    children: tuple = ()
    label: str | None = None

    def __post_init__(self):
        if self.op is not None:
            if self.op not in OPERATORS:
                raise ValueError(f"unknown operator {self.op!r}")
            if len(self.children) < 2:
                raise ValueError(f"operator {self.op} needs at least two children")
        elif self.children:
            raise ValueError("leaves have no children")

    @property
    def is_leaf(self) -> bool:
        return self.op is None

    def __str__(self):
        if self.is_leaf:
            return "tau" if self.label is None else self.label
        return f"{self.op}({', '.join(str(c) for c in self.children)})"

    def leaves(self) -> list:
        if self.is_leaf:
            return [self]
        return [leaf for c in self.children for leaf in c.leaves()]


def leaf(label=None) -> ProcessTree:
    return ProcessTree(label=label)


def node(op, *children) -> ProcessTree:
    return ProcessTree(op=op, children=tuple(children))


TAU = leaf(None)


@dataclass
class DirectlyFollowsGraph:
    activities: set
    edges: Counter = field(default_factory=Counter)
    start: set = field(default_factory=set)
    end: set = field(default_factory=set)

    @classmethod
    def from_traces(cls, traces: Iterable[tuple]) -> "DirectlyFollowsGraph":
        dfg = cls(set())
        for trace in traces:
            if not trace:
                continue
            dfg.activities.update(trace)
            dfg.start.add(trace[0])
            dfg.end.add(trace[-1])
            for a, b in zip(trace, trace[1:]):
                dfg.edges[a, b] += 1
        return dfg

    def succ(self, a) -> set:
        return {b for (x, b) in self.edges if x == a}

    def has(self, a, b) -> bool:
        return (a, b) in self.edges


def _components(nodes, connected) -> list[set]:
    """Connected components of an undirected graph given as a predicate."""
    remaining = set(nodes)
    comps = []
    while remaining:
        seed = min(remaining)
        comp = {seed}
        stack = [seed]
        remaining.discard(seed)
        while stack:
            a = stack.pop()
            for b in list(remaining):
                if connected(a, b):
                    remaining.discard(b)
                    comp.add(b)
                    stack.append(b)
        comps.append(comp)
    return sorted(comps, key=min)


def _reachability(dfg: DirectlyFollowsGraph) -> dict:
    reach = {}
    for a in dfg.activities:
        seen = set()
        stack = [a]
        while stack:
            for b in dfg.succ(stack.pop()):
                if b not in seen:
                    seen.add(b)
                    stack.append(b)
        reach[a] = seen
    return reach


def xor_cut(dfg):
    comps = _components(dfg.activities, lambda a, b: dfg.has(a, b) or dfg.has(b, a))
    return comps if len(comps) > 1 else None


def sequence_cut(dfg):
    reach = _reachability(dfg)
    # activities that cannot reach each other belong to the same group
    groups = _components(dfg.activities,
                         lambda a, b: (b in reach[a]) == (a in reach[b]))
    if len(groups) < 2:
        return None

    def before(g, h):
        return all(b in reach[a] and a not in reach[b] for a in g for b in h)

    ordered = []
    pending = list(groups)
    while pending:
        firsts = [g for g in pending if all(before(g, h) for h in pending if h is not g)]
        if len(firsts) != 1:
            return None
        ordered.append(firsts[0])
        pending.remove(firsts[0])
    return ordered


def parallel_cut(dfg):
    comps = _components(dfg.activities,
                        lambda a, b: not (dfg.has(a, b) and dfg.has(b, a)))
    changed = True
    while changed and len(comps) > 1:
        changed = False
        for comp in comps:
            if not (comp & dfg.start and comp & dfg.end):
                other = next(c for c in comps if c is not comp)
                other |= comp
                comps = [c for c in comps if c is not comp]
                changed = True
                break
    if len(comps) < 2:
        return None
    return sorted(comps, key=min)


def loop_cut(dfg):
    do = set(dfg.start | dfg.end)
    rest = dfg.activities - do
    comps = _components(rest, lambda a, b: dfg.has(a, b) or dfg.has(b, a))
    redo = []
    for comp in comps:
        entries = {a for a in comp if any(dfg.has(x, a) for x in do)}
        exits = {a for a in comp if any(dfg.has(a, y) for y in do)}
        ok = bool(entries and exits)
        ok = ok and all(x in dfg.end for x in do for a in comp if dfg.has(x, a))
        ok = ok and all(y in dfg.start for y in do for a in comp if dfg.has(a, y))
        ok = ok and all(dfg.has(e, a) for e in dfg.end for a in entries)
        ok = ok and all(dfg.has(a, s) for a in exits for s in dfg.start)
        if ok:
            redo.append(comp)
        else:
            do |= comp
    if not redo:
        return None
    return [do] + sorted(redo, key=min)


def _split_xor(traces, groups):
    logs = [[] for _ in groups]
    for trace in traces:
        idx = next(i for i, g in enumerate(groups) if trace[0] in g)
        logs[idx].append(trace)
    return logs


def _split_project(traces, groups):
    return [[tuple(a for a in trace if a in g) for trace in traces] for g in groups]


def _split_loop(traces, groups):
    logs = [[] for _ in groups]
    for trace in traces:
        run, run_group = [], None
        for a in trace:
            g = next(i for i, grp in enumerate(groups) if a in grp)
            if g != run_group and run:
                logs[run_group].append(tuple(run))
                run = []
            run_group = g
            run.append(a)
        if run:
            logs[run_group].append(tuple(run))
    return logs


def inductive_miner(log) -> ProcessTree:
    """Basic Inductive Miner (no noise filtering)."""
    if isinstance(log, SimpleEventLog):
        traces = list(log.traces.elements())
    else:
        traces = [tuple(t) for t in log]
    if not traces:
        raise LogError("cannot discover from an empty log")
    return _im(traces)


def _im(traces) -> ProcessTree:
    nonempty = [t for t in traces if t]
    if not nonempty:
        return TAU
    if len(nonempty) < len(traces):
        return node(XOR, TAU, _im(nonempty))
    acts = {a for t in nonempty for a in t}
    if len(acts) == 1:
        (a,) = acts
        if all(len(t) == 1 for t in nonempty):
            return leaf(a)
        return node(LOOP, leaf(a), TAU)
    dfg = DirectlyFollowsGraph.from_traces(nonempty)
    groups = xor_cut(dfg)
    if groups:
        return node(XOR, *(_im(sub) for sub in _split_xor(nonempty, groups)))
    groups = sequence_cut(dfg)
    if groups:
        return node(SEQ, *(_im(sub) for sub in _split_project(nonempty, groups)))
    groups = parallel_cut(dfg)
    if groups:
        return node(AND, *(_im(sub) for sub in _split_project(nonempty, groups)))
    groups = loop_cut(dfg)
    if groups:
        return node(LOOP, *(_im(sub) for sub in _split_loop(nonempty, groups)))
    return node(LOOP, TAU, *(leaf(a) for a in sorted(acts)))


# -- translation -------------------------------------------------------------

class _Builder:
    def __init__(self, prefix: str):
        self.prefix = prefix
        self.places: list = []
        self.transitions: list = []
        self.arcs: set = set()
        self.labels: dict = {}
        self._p = count()
        self._t = count()
        self.source = self.new_place()
        self.sink = self.new_place()

    def new_place(self):
        p = f"{self.prefix}p_{next(self._p)}"
        self.places.append(p)
        return p

    def new_transition(self, label=None):
        if label is None:
            t = f"{self.prefix}tau_{next(self._t)}"
        else:
            t = label
            if t in self.transitions:
                raise ValueError(f"activity {label!r} occurs in more than one leaf")
            self.labels[t] = label
        self.transitions.append(t)
        return t

    def connect(self, pre, t, post):
        for p in pre:
            self.arcs.add((p, t))
        for p in post:
            self.arcs.add((t, p))

    def translate(self, tree, entry, exit_, entry_private, exit_private):
        """Wire ``tree`` between ``entry`` and ``exit_``.

        ``entry_private``: only this construct consumes from ``entry``.
        ``exit_private``: only this construct produces into ``exit_``.
        Returns ``(adds_entry_producer, adds_exit_consumer)``.
        """
        if tree.is_leaf:
            self.connect([entry], self.new_transition(tree.label), [exit_])
            return False, False
        kids = tree.children
        if tree.op == XOR:
            for child in kids:
                self.translate(child, entry, exit_, False, False)
            return False, False
        if tree.op == SEQ:
            produced_entry = consumed_exit = False
            cur, cur_private = entry, entry_private
            for i, child in enumerate(kids):
                last = i == len(kids) - 1
                nxt = exit_ if last else self.new_place()
                pe, ce = self.translate(child, cur, nxt, cur_private,
                                        exit_private if last else True)
                if i == 0:
                    produced_entry = pe
                if last:
                    consumed_exit = ce
                cur, cur_private = nxt, not ce
            return produced_entry, consumed_exit
        if tree.op == AND:
            starts = [self.new_place() for _ in kids]
            ends = [self.new_place() for _ in kids]
            self.connect([entry], self.new_transition(), starts)
            self.connect(ends, self.new_transition(), [exit_])
            for child, s, e in zip(kids, starts, ends):
                self.translate(child, s, e, True, True)
            return False, False
        # loop: body between `head` and `tail`, redo parts from `tail` back to `head`
        reuse_entry = entry_private and entry != self.source
        reuse_exit = exit_private and exit_ != self.sink
        head = entry if reuse_entry else self.new_place()
        tail = exit_ if reuse_exit else self.new_place()
        if not reuse_entry:
            self.connect([entry], self.new_transition(), [head])
        if not reuse_exit:
            self.connect([tail], self.new_transition(), [exit_])
        self.translate(kids[0], head, tail, True, True)
        for redo in kids[1:]:
            self.translate(redo, tail, head, False, False)
        return reuse_entry, reuse_exit


def tree_to_wf_net(tree: ProcessTree, prefix: str = "") -> AcceptingPetriNet:
    """Translate a process tree into an accepting WF-net.

    Visible transitions are identified by their label; places and silent
    transitions get ``prefix``-namespaced ids.
    """
    b = _Builder(prefix)
    b.translate(tree, b.source, b.sink, False, False)
    net = LabeledPetriNet(frozenset(b.places), frozenset(b.transitions),
                          frozenset(b.arcs), b.labels)
    return AcceptingPetriNet(net, Multiset([b.source]), Multiset([b.sink]))


def disc_per_type(log: EventLog) -> dict[str, AcceptingPetriNet]:
    if len(log) == 0:
        raise LogError("cannot discover from an empty log")
    return {ot: tree_to_wf_net(inductive_miner(flatten(log, ot)), prefix=f"{ot}::")
            for ot in sorted(object_types(log))}
