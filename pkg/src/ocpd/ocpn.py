"""Object-centric Petri nets: the base discovery pipeline, binding semantics,
structural checks, soundness by state-space search, and log replay."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from itertools import chain, combinations, product
from typing import Iterable, Mapping

from .discovery import disc_per_type
from .log import EventLog, LogError
from .petri import (
    DEFAULT_MAX_MARKINGS,
    AcceptingPetriNet,
    LabeledPetriNet,
    Multiset,
    NetError,
    SoundnessVerdict,
    Status,
    explore,
    is_wf_net,
    verdict_from_graph,
)

DEFAULT_MAX_BINDING_SUBSETS = 256


class BindingCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class ObjectCentricPetriNet:
    net: LabeledPetriNet
    place_types: Mapping[str, str]
    variable_arcs: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "place_types", dict(self.place_types))
        object.__setattr__(self, "variable_arcs", frozenset(tuple(a) for a in self.variable_arcs))
        missing = self.net.places - set(self.place_types)
        if missing:
            raise NetError(f"places without a type: {sorted(missing)}")
        extra = set(self.place_types) - self.net.places
        if extra:
            raise NetError(f"types for unknown places: {sorted(extra)}")
        if not self.variable_arcs <= self.net.arcs:
            raise NetError("variable arcs must be arcs of the net")

    def __hash__(self):
        return hash((self.net, frozenset(self.place_types.items()), self.variable_arcs))

    @property
    def types(self) -> list[str]:
        return sorted(set(self.place_types.values()))

    def pt(self, p) -> str:
        return self.place_types[p]

    def _arcs_of(self, t):
        return [(p, t) for p in self.net.preset(t)] + [(t, p) for p in self.net.postset(t)]

    def tpl(self, t) -> set[str]:
        return {self.pt(p) for p in self.net.preset(t) | self.net.postset(t)}

    def tpl_var(self, t) -> set[str]:
        return {self.pt(p if p != t else q) for p, q in self._arcs_of(t)
                if (p, q) in self.variable_arcs}

    def tpl_nv(self, t) -> set[str]:
        return {self.pt(p if p != t else q) for p, q in self._arcs_of(t)
                if (p, q) not in self.variable_arcs}

    def is_well_formed(self) -> tuple[bool, list]:
        bad = sorted(t for t in self.net.transitions if self.tpl_var(t) & self.tpl_nv(t))
        return not bad, bad


def _marking(tokens) -> Multiset:
    if isinstance(tokens, Mapping):
        return Multiset(tokens)
    return Multiset(tuple(tok) for tok in tokens)


@dataclass(frozen=True)
class AcceptingOCPN:
    ocpn: ObjectCentricPetriNet
    m_init: Multiset
    m_final: Multiset
    diagnostics: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "m_init", _marking(self.m_init))
        object.__setattr__(self, "m_final", _marking(self.m_final))
        check_marking(self.ocpn, self.m_init)
        check_marking(self.ocpn, self.m_final)
        seen: dict = {}
        for p, oi in chain(self.m_init, self.m_final):
            if seen.setdefault(oi, self.ocpn.pt(p)) != self.ocpn.pt(p):
                raise NetError(f"object {oi!r} marks places of different types")

    @property
    def net(self) -> LabeledPetriNet:
        return self.ocpn.net

    def population(self) -> dict[str, set]:
        pop: dict[str, set] = {}
        for p, oi in chain(self.m_init, self.m_final):
            pop.setdefault(self.ocpn.pt(p), set()).add(oi)
        return pop


def check_marking(ocpn: ObjectCentricPetriNet, m: Multiset):
    type_of: dict = {}
    for tok in m:
        p, oi = tok
        if p not in ocpn.net.places:
            raise NetError(f"token on unknown place {p!r}")
        if type_of.setdefault(oi, ocpn.pt(p)) != ocpn.pt(p):
            raise NetError(f"object {oi!r} sits in places of different types")


@dataclass(frozen=True, order=True)
class Binding:
    transition: str
    objects: tuple  # sorted ((type, tuple(sorted object ids)), ...)

    @classmethod
    def of(cls, t, b: Mapping[str, Iterable[str]]) -> "Binding":
        return cls(t, tuple(sorted((ot, tuple(sorted(objs))) for ot, objs in b.items())))

    def b(self, ot) -> tuple:
        for t, objs in self.objects:
            if t == ot:
                return objs
        return ()

    def as_dict(self) -> dict:
        return {ot: list(objs) for ot, objs in self.objects}

    def __str__(self):
        inner = ", ".join(f"{ot}={{{', '.join(objs)}}}" for ot, objs in self.objects)
        return f"({self.transition}, {inner})"


def cons(ocpn: ObjectCentricPetriNet, binding: Binding) -> Multiset:
    return Multiset((p, oi) for p in ocpn.net.preset(binding.transition)
                    for oi in binding.b(ocpn.pt(p)))


def prod(ocpn: ObjectCentricPetriNet, binding: Binding) -> Multiset:
    return Multiset((p, oi) for p in ocpn.net.postset(binding.transition)
                    for oi in binding.b(ocpn.pt(p)))


def _objects_in(m: Multiset, place) -> set:
    return {oi for (p, oi) in m if p == place}


def _nonempty_subsets(items, cap):
    items = sorted(items)
    if 2 ** len(items) - 1 > cap:
        raise BindingCapExceeded(f"{len(items)} objects exceed the binding subset cap {cap}")
    return [c for r in range(1, len(items) + 1) for c in combinations(items, r)]


def _type_options(ocpn, t, ot, m, population, max_subsets, fixed=None):
    """Admissible object selections for ``ot`` when firing ``t`` in ``m``."""
    inputs = [p for p in ocpn.net.preset(t) if ocpn.pt(p) == ot]
    if inputs:
        cands = set.intersection(*(_objects_in(m, p) for p in inputs))
    else:
        cands = set(population.get(ot, ()))
    variable = ot in ocpn.tpl_var(t) and ot not in ocpn.tpl_nv(t)
    if fixed is not None:
        fixed = tuple(sorted(fixed))
        ok = set(fixed) <= cands and (len(fixed) >= 1 if variable else len(fixed) == 1)
        return [fixed] if ok else []
    if variable:
        return _nonempty_subsets(cands, max_subsets)
    return [(oi,) for oi in sorted(cands)]


def _bindings_for(ocpn, t, m, population, max_subsets, fixed=None):
    types = sorted(ocpn.tpl(t))
    options = []
    for ot in types:
        opts = _type_options(ocpn, t, ot, m, population, max_subsets,
                             None if fixed is None or ot not in fixed else fixed[ot])
        if not opts:
            return []
        options.append(opts)
    out = []
    for combo in product(*options):
        binding = Binding(t, tuple(zip(types, combo)))
        if cons(ocpn, binding) <= m:
            out.append(binding)
    return out


def enabled_bindings(aocpn: AcceptingOCPN, m: Multiset,
                     max_binding_subsets: int = DEFAULT_MAX_BINDING_SUBSETS,
                     transitions=None) -> set[Binding]:
    ocpn = aocpn.ocpn
    pop = _population(aocpn, m)
    ts = sorted(ocpn.net.transitions if transitions is None else transitions)
    return {b for t in ts for b in _bindings_for(ocpn, t, m, pop, max_binding_subsets)}


def _population(aocpn, m) -> dict:
    pop = aocpn.population()
    for p, oi in m:
        pop.setdefault(aocpn.ocpn.pt(p), set()).add(oi)
    return pop


def fire_binding(aocpn: AcceptingOCPN, m: Multiset, binding: Binding) -> Multiset:
    ocpn = aocpn.ocpn
    t = binding.transition
    if t not in ocpn.net.transitions:
        raise NetError(f"unknown transition {t!r}")
    if {ot for ot, _ in binding.objects} != ocpn.tpl(t):
        raise NetError(f"binding {binding} does not cover the types around {t!r}")
    for ot, objs in binding.objects:
        if ot in ocpn.tpl_nv(t) and len(objs) != 1:
            raise NetError(f"binding {binding} needs exactly one {ot!r} object")
        if not objs:
            raise NetError(f"binding {binding} selects no {ot!r} object")
    c = cons(ocpn, binding)
    if not c <= m:
        raise NetError(f"binding {binding} is not enabled")
    return m - c + prod(ocpn, binding)


# -- base discovery pipeline --------------------------------------------------

def merge_nets(apns: Mapping[str, AcceptingPetriNet]) -> LabeledPetriNet:
    places, transitions, arcs, labels = set(), set(), set(), {}
    for ot in sorted(apns):
        net = apns[ot].net
        clash = places & net.places
        if clash:
            raise NetError(f"place ids collide when merging: {sorted(clash)}")
        places |= net.places
        rename = {}
        for t in net.transitions:
            lab = net.label(t)
            if lab is None:
                if t in transitions:
                    raise NetError(f"silent transition id {t!r} collides when merging")
                rename[t] = t
            else:
                rename[t] = lab
                labels[lab] = lab
            transitions.add(rename[t])
        for a, b in net.arcs:
            arcs.add((rename.get(a, a), rename.get(b, b)))
    if places & transitions:
        raise NetError(f"place and transition ids collide: {sorted(places & transitions)}")
    return LabeledPetriNet(frozenset(places), frozenset(transitions), frozenset(arcs), labels)


def place_types_of(apns: Mapping[str, AcceptingPetriNet]) -> dict[str, str]:
    return {p: ot for ot, apn in apns.items() for p in apn.net.places}


def identify_variable_arcs(net: LabeledPetriNet, place_types: Mapping[str, str],
                           log: EventLog) -> frozenset:
    multi = {(e.activity, ot) for e in log for ot, objs in e.omap.items() if len(objs) >= 2}
    out = set()
    for a, b in net.arcs:
        p, t = (a, b) if a in net.places else (b, a)
        lab = net.label(t)
        if lab is not None and (lab, place_types[p]) in multi:
            out.add((a, b))
    return frozenset(out)


def project_net(ocpn: ObjectCentricPetriNet, ot: str) -> LabeledPetriNet:
    net = ocpn.net
    places = {p for p in net.places if ocpn.pt(p) == ot}
    trans = {t for t in net.transitions if (net.preset(t) | net.postset(t)) & places}
    arcs = {(a, b) for a, b in net.arcs if (a in places and b in trans)
            or (a in trans and b in places)}
    return LabeledPetriNet(frozenset(places), frozenset(trans), frozenset(arcs),
                           {t: net.label(t) for t in trans})


def finalize(net: LabeledPetriNet, place_types: Mapping[str, str], var_arcs,
             log: EventLog) -> AcceptingOCPN:
    ocpn = ObjectCentricPetriNet(net, place_types, var_arcs)
    init, final, diags = [], [], []
    for ot in ocpn.types:
        proj = project_net(ocpn, ot)
        report = is_wf_net(proj)
        sources = [p for p in proj.places if not proj.preset(p)]
        sinks = [p for p in proj.places if not proj.postset(p)]
        if len(sources) != 1 or len(sinks) != 1:
            diags.append(f"{ot}: {report.describe()}; tokens placed on every source/sink")
        objs = sorted(log.objects(ot)) if ot in {log.type_of(o) for o in log.objects()} else []
        for oi in objs:
            init.extend((p, oi) for p in sorted(sources))
            final.extend((p, oi) for p in sorted(sinks))
    return AcceptingOCPN(ocpn, Multiset(init), Multiset(final), tuple(diags))


def ocpd_base(log: EventLog) -> AcceptingOCPN:
    if len(log) == 0:
        raise LogError("cannot discover from an empty log")
    apns = disc_per_type(log)
    net = merge_nets(apns)
    types = place_types_of(apns)
    return finalize(net, types, identify_variable_arcs(net, types, log), log)


def project(aocpn: AcceptingOCPN, ot: str) -> AcceptingPetriNet:
    ocpn = aocpn.ocpn
    if ot not in ocpn.types:
        raise NetError(f"unknown object type {ot!r}")
    net = project_net(ocpn, ot)

    def erase(m):
        return Multiset([p for (p, _) in m.elements() if ocpn.pt(p) == ot])

    return AcceptingPetriNet(net, erase(aocpn.m_init), erase(aocpn.m_final))


# -- structure and behaviour ---------------------------------------------------

@dataclass
class OCWFReport:
    ok: bool
    well_formed: bool = True
    not_well_formed: list = field(default_factory=list)
    projections: dict = field(default_factory=dict)
    weakly_connected: bool = True

    def __bool__(self):
        return self.ok

    def describe(self) -> str:
        if self.ok:
            return "object-centric WF-net"
        parts = []
        if not self.well_formed:
            parts.append(f"not well-formed at {self.not_well_formed}")
        for ot, rep in self.projections.items():
            if not rep:
                parts.append(f"{ot} projection: {rep.describe()}")
        if not self.weakly_connected:
            parts.append("not weakly connected")
        return "; ".join(parts)


def is_oc_wf_net(ocpn: ObjectCentricPetriNet) -> OCWFReport:
    wf, bad = ocpn.is_well_formed()
    reports = {ot: is_wf_net(project_net(ocpn, ot)) for ot in ocpn.types}
    net = ocpn.net
    nodes = net.nodes()
    connected = True
    if nodes:
        adj = {n: set() for n in nodes}
        for a, b in net.arcs:
            adj[a].add(b)
            adj[b].add(a)
        start = min(nodes)
        seen, stack = {start}, [start]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        connected = seen == set(nodes)
    ok = wf and connected and all(reports.values())
    return OCWFReport(ok, wf, bad, reports, connected)


def _describe_marking(m) -> str:
    return "[" + ", ".join(f"({p}, {oi})" + (f"^{n}" if n > 1 else "")
                           for (p, oi), n in sorted(m.items())) + "]"


def is_oc_sound(aocpn: AcceptingOCPN, max_markings: int = DEFAULT_MAX_MARKINGS,
                max_binding_subsets: int = DEFAULT_MAX_BINDING_SUBSETS) -> SoundnessVerdict:
    """Object-centric soundness relative to the object population of the
    initial marking."""
    ocpn = aocpn.ocpn
    report = is_oc_wf_net(ocpn)
    if not report:
        raise NetError(f"not an object-centric WF-net: {report.describe()}")
    sources = {ot: rep.sources[0] for ot, rep in report.projections.items()}
    sinks = {ot: rep.sinks[0] for ot, rep in report.projections.items()}
    misplaced = [tok for tok in aocpn.m_init if tok[0] != sources[ocpn.pt(tok[0])]]
    misplaced += [tok for tok in aocpn.m_final if tok[0] != sinks[ocpn.pt(tok[0])]]
    if misplaced:
        return SoundnessVerdict(Status.UNSOUND, reason=f"markings off source/sink: {misplaced}")
    pop = aocpn.population()

    def successors(m):
        for t in sorted(ocpn.net.transitions):
            for b in _bindings_for(ocpn, t, m, pop, max_binding_subsets):
                yield b, m - cons(ocpn, b) + prod(ocpn, b)

    try:
        edges, complete = explore(aocpn.m_init, successors, max_markings)
    except BindingCapExceeded as exc:
        return SoundnessVerdict(Status.UNKNOWN, reason=str(exc))
    if not complete:
        return SoundnessVerdict(Status.UNKNOWN, reason=f"exploration cap {max_markings} reached",
                                explored=len(edges))
    return verdict_from_graph(edges, aocpn.m_final, ocpn.net.transitions,
                              describe=_describe_marking,
                              action_transition=lambda b: b.transition)


# -- replay ----------------------------------------------------------------

@dataclass
class ReplayReport:
    success: bool
    failed_event: str | None = None
    reason: str = ""
    enabled: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"success": self.success, "failed_event": self.failed_event,
                "reason": self.reason, "enabled": self.enabled}


def _silent_closure(aocpn, markings, pop, max_markings, max_subsets):
    ocpn = aocpn.ocpn
    silent = sorted(t for t in ocpn.net.transitions if ocpn.net.is_silent(t))
    seen = set(markings)
    stack = list(markings)
    while stack:
        m = stack.pop()
        for t in silent:
            for b in _bindings_for(ocpn, t, m, pop, max_subsets):
                nxt = m - cons(ocpn, b) + prod(ocpn, b)
                if nxt not in seen:
                    if len(seen) >= max_markings:
                        raise BindingCapExceeded("replay state space exceeded the marking cap")
                    seen.add(nxt)
                    stack.append(nxt)
    return seen


def replay(aocpn: AcceptingOCPN, log: EventLog, max_markings: int = DEFAULT_MAX_MARKINGS,
           max_binding_subsets: int = DEFAULT_MAX_BINDING_SUBSETS) -> ReplayReport:
    """Replay the log in timestamp order.

    Each event fires a transition carrying its activity with the event's
    objects; types around the transition that the event does not mention are
    bound to objects available in the marking, and silent transitions may
    fire between events.
    """
    ocpn = aocpn.ocpn
    pop = aocpn.population()
    for e in log:
        for ot, objs in e.omap.items():
            pop.setdefault(ot, set()).update(objs)
    enabled = {}
    try:
        frontier = _silent_closure(aocpn, {aocpn.m_init}, pop, max_markings, max_binding_subsets)
        for e in log.linearize():
            candidates = ocpn.net.transitions_labeled(e.activity)
            if not candidates:
                enabled[e.id] = False
                return ReplayReport(False, e.id, f"no transition labeled {e.activity!r}", enabled)
            event_types = e.types()
            nxt = set()
            for t in candidates:
                if not event_types <= ocpn.tpl(t):
                    continue
                fixed = {ot: e.objects(ot) for ot in event_types}
                for m in frontier:
                    for b in _bindings_for(ocpn, t, m, pop, max_binding_subsets, fixed):
                        nxt.add(m - cons(ocpn, b) + prod(ocpn, b))
            enabled[e.id] = bool(nxt)
            if not nxt:
                return ReplayReport(False, e.id, f"no enabled binding for event {e.id}", enabled)
            frontier = _silent_closure(aocpn, nxt, pop, max_markings, max_binding_subsets)
    except BindingCapExceeded as exc:
        return ReplayReport(False, None, str(exc), enabled)
    if aocpn.m_final not in frontier:
        return ReplayReport(False, None, "final marking not reached", enabled)
    return ReplayReport(True, None, "", enabled)


# -- interchange ---------------------------------------------------------------

def aocpn_to_dict(aocpn: AcceptingOCPN) -> dict:
    net = aocpn.net
    return {
        "places": [{"id": p} for p in sorted(net.places)],
        "transitions": [{"id": t, "label": net.label(t)} for t in sorted(net.transitions)],
        "arcs": sorted([a, b] for a, b in net.arcs),
        "place_types": dict(sorted(aocpn.ocpn.place_types.items())),
        "variable_arcs": sorted([a, b] for a, b in aocpn.ocpn.variable_arcs),
        "m_init": sorted([p, oi] for (p, oi) in aocpn.m_init.elements()),
        "m_final": sorted([p, oi] for (p, oi) in aocpn.m_final.elements()),
    }


def aocpn_from_dict(doc: Mapping) -> AcceptingOCPN:
    from .petri import net_from_dict

    try:
        net = net_from_dict(doc)
        ocpn = ObjectCentricPetriNet(net, doc["place_types"],
                                     [tuple(a) for a in doc.get("variable_arcs", [])])
        return AcceptingOCPN(ocpn, Multiset(tuple(x) for x in doc.get("m_init", [])),
                             Multiset(tuple(x) for x in doc.get("m_final", [])))
    except (KeyError, TypeError) as exc:
        raise NetError(f"malformed net document: {exc}") from exc


def dumps_aocpn(aocpn: AcceptingOCPN) -> str:
    return json.dumps(aocpn_to_dict(aocpn), indent=2, ensure_ascii=False)


def loads_aocpn(text: str) -> AcceptingOCPN:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetError(f"invalid JSON: {exc}") from exc
    return aocpn_from_dict(doc)


# -- DOT ---------------------------------------------------------------------

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
           "#9467bd", "#8c564b", "#e377c2", "#17becf")


def type_colors(types: Iterable[str]) -> dict[str, str]:
    return {ot: PALETTE[i % len(PALETTE)] for i, ot in enumerate(sorted(types))}


def _q(s) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'



def to_dot(aocpn: AcceptingOCPN, name: str = "ocpn") -> str:
    ocpn = aocpn.ocpn
    net = ocpn.net
    colors = type_colors(ocpn.types)
    init = Counter(p for (p, _) in aocpn.m_init.elements())
    final = Counter(p for (p, _) in aocpn.m_final.elements())
    lines = [f"digraph {_q(name)} {{", "  rankdir=LR;",
             '  node [fontname="Helvetica"];', '  edge [arrowsize=0.7];']
    for p in sorted(net.places):
        attrs = [f"color={_q(colors[ocpn.pt(p)])}", "penwidth=2", "shape=circle",
                 f"label={_q(init[p] if init[p] else '')}",
                 f"tooltip={_q(p + ' : ' + ocpn.pt(p))}"]
        if final[p]:
            attrs.append(f'xlabel=<<font color="red"><sup>{final[p]}</sup></font>>')
        lines.append(f"  {_q(p)} [{', '.join(attrs)}];")
    for t in sorted(net.transitions):
        if net.is_silent(t):
            attrs = 'shape=box, style=filled, fillcolor=black, label="", width=0.15, height=0.5'
        else:
            attrs = f"shape=box, label={_q(net.label(t))}"
        lines.append(f"  {_q(t)} [{attrs}];")
    for a, b in sorted(net.arcs):
        p = a if a in net.places else b
        color = colors[ocpn.pt(p)]
        if (a, b) in ocpn.variable_arcs:
            style = f"color={_q(color + ':invis:' + color)}"
        else:
            style = f"color={_q(color)}"
        lines.append(f"  {_q(a)} -> {_q(b)} [{style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
