"""Repair pipelines on top of base discovery.

``da`` relabels the first loop occurrence so per-type discovery no longer
folds it into the loop, ``sa`` rewires the base net around the shared
transition, and ``si`` separates same-labelled events that never interact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .log import EventLog, relabel_events
from .ocpn import AcceptingOCPN, ObjectCentricPetriNet, ocpd_base
from .patterns import detect_oiwl, detect_spurious, sort_matches
from .petri import LabeledPetriNet, NetError


class RepairError(NetError):
    pass


@dataclass
class RepairTrace:
    variant: str
    matches: list = field(default_factory=list)
    fresh_labels: dict = field(default_factory=dict)  # original activity -> [fresh labels]
    edits: list = field(default_factory=list)
    note: str = ""

    def count(self, op: str) -> int:
        return sum(1 for e in self.edits if e["op"] == op)

    def to_dict(self) -> dict:
        return {"variant": self.variant, "matches": [m.to_dict() for m in self.matches],
                "fresh_labels": self.fresh_labels, "edits": self.edits, "note": self.note}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)

    def summary(self) -> str:
        lines = [f"variant {self.variant}: {len(self.matches)} match(es)"]
        if self.note:
            lines.append(self.note)
        for act, fresh in sorted(self.fresh_labels.items()):
            lines.append(f"relabelled {act!r} via {', '.join(fresh)}")
        for e in self.edits:
            target = e.get("node") or "->".join(e["arc"])
            lines.append(f"{e['op']} {target}")
        return "\n".join(lines)


def fresh_label(act: str, taken: set) -> str:
    k = 0
    while f"{act}#{k}" in taken:
        k += 1
    return f"{act}#{k}"


def relabel_transitions(aocpn: AcceptingOCPN, back: dict) -> AcceptingOCPN:
    """Replace transition labels per ``back`` (fresh -> original); ids stay."""
    net = aocpn.net
    labels = {t: back.get(net.label(t), net.label(t)) for t in net.transitions}
    ocpn = ObjectCentricPetriNet(
        LabeledPetriNet(net.places, net.transitions, net.arcs, labels),
        aocpn.ocpn.place_types, aocpn.ocpn.variable_arcs)
    return AcceptingOCPN(ocpn, aocpn.m_init, aocpn.m_final, aocpn.diagnostics)


def _dedup(matches) -> dict:
    groups: dict = {}
    for m in sort_matches(matches):
        groups.setdefault(m.key, []).append(m)
    return groups


def _relabel_and_discover(log: EventLog, classes, trace: RepairTrace):
    """``classes``: ordered (original activity, event ids) to give fresh labels."""
    taken = set(log.activities())
    back = {}
    done: set = set()
    for act, ids in classes:
        ids = set(ids) - done
        if not ids:
            continue
        label = fresh_label(act, taken)
        taken.add(label)
        back[label] = act
        trace.fresh_labels.setdefault(act, []).append(label)
        log = relabel_events(log, ids, label)
        done |= ids
    return relabel_transitions(ocpd_base(log), back)


def ocpd_da(log: EventLog):
    matches = detect_oiwl(log)
    trace = RepairTrace("da", sort_matches(matches))
    if not matches:
        trace.note = "no loop interaction found; base discovery used"
        return ocpd_base(log), trace
    by_triple: dict = {}
    for m in trace.matches:
        by_triple.setdefault((m.act1, m.ot1, m.ot2), set()).add(m.events[0])
    classes = [(act1, ids) for (act1, _, _), ids in sorted(by_triple.items())]
    return _relabel_and_discover(log, classes, trace), trace


def ocpd_si(log: EventLog):
    matches = detect_spurious(log)
    trace = RepairTrace("si", sort_matches(matches))
    if not matches:
        trace.note = "no spurious interaction found; base discovery used"
        return ocpd_base(log), trace
    classes = []
    for act, _, ot1, ot2 in _dedup(matches):
        ids = {e.id for e in log
               if e.activity == act and e.objects(ot2) and not e.objects(ot1)}
        classes.append((act, ids))
    return _relabel_and_discover(log, classes, trace), trace


# -- similar activity rewiring ----------------------------------------------

def _fresh_id(base: str, taken: set) -> str:
    k = 0
    while f"{base}{k}" in taken:
        k += 1
    return f"{base}{k}"


def similar_activity_transform(aocpn: AcceptingOCPN, ot1, ot2, act1, act2, edits=None):
    """Insert a loop-entry and loop-exit around the act1/act2 pair.

    A new ``ot1`` place sits after every ``act1`` transition and feeds a
    silent exit transition that also carries ``ot2`` out; a silent entry
    transition lets ``ot2`` reach the ``act1`` transition first.
    Markings are left untouched.
    """
    ocpn = aocpn.ocpn
    net = ocpn.net
    pt = ocpn.pt
    edits = [] if edits is None else edits
    te1s = net.transitions_labeled(act1)
    te2s = net.transitions_labeled(act2)
    if not te1s:
        raise RepairError(f"no transition labeled {act1!r}")
    if not te2s:
        raise RepairError(f"no transition labeled {act2!r}")
    post1 = {t: {p for p in net.postset(t) if pt(p) == ot1} for t in te1s}
    if not any(post1.values()):
        raise RepairError(f"transition {act1!r} has no {ot1!r} output place")
    nodes = net.places | net.transitions
    p1 = _fresh_id(f"{ot1}::sa_p", nodes)
    t1 = _fresh_id("sa_exit_", nodes | {p1})
    t2 = _fresh_id("sa_enter_", nodes | {p1, t1})

    removed = {(t, p) for t in te1s for p in post1[t]}
    pre2 = {p for t in te2s for p in net.preset(t) if pt(p) == ot2}
    post2 = {p for t in te2s for p in net.postset(t) if pt(p) == ot2}
    post1_ot2 = {(t, p) for t in te1s for p in net.postset(t) if pt(p) == ot2}

    # each new arc with the original arcs it stands in for
    added: dict = {}
    for t in te1s:
        added[(t, p1)] = {(t, p) for p in post1[t]}
    added[(p1, t1)] = set(removed)
    for t, p in removed:
        added.setdefault((t1, p), set()).add((t, p))
    for t, p in post1_ot2:
        added.setdefault((t1, p), set()).add((t, p))
    for p in pre2:
        orig = {(p, t) for t in te2s if (p, t) in net.arcs}
        added.setdefault((p, t1), set()).update(orig)
        added.setdefault((p, t2), set()).update(orig)
        for t in te1s:
            added.setdefault((t, p), set()).update(orig)
    for p in post2:
        added.setdefault((t2, p), set()).update((t, p) for t in te2s if (t, p) in net.arcs)

    arcs = (set(net.arcs) - removed) | set(added)
    new_arcs = {a for a in added if a not in net.arcs}
    var_closure = _closure(ocpn.variable_arcs)
    variable = {a for a in ocpn.variable_arcs if a in arcs}
    for arc in new_arcs:
        stand_ins = added[arc]
        if stand_ins and all(s in var_closure for s in stand_ins):
            variable.add(arc)

    labels = {t: net.label(t) for t in net.transitions}
    labels[t1] = labels[t2] = None
    new_net = LabeledPetriNet(net.places | {p1}, net.transitions | {t1, t2},
                              frozenset(arcs), labels)
    types = dict(ocpn.place_types)
    types[p1] = ot1

    edits.append({"op": "add_place", "node": p1})
    edits.append({"op": "add_transition", "node": t1})
    edits.append({"op": "add_transition", "node": t2})
    for a in sorted(removed):
        edits.append({"op": "remove_arc", "arc": list(a)})
    for a in sorted(new_arcs):
        edits.append({"op": "add_arc", "arc": list(a)})
    out = ObjectCentricPetriNet(new_net, types, variable)
    return AcceptingOCPN(out, aocpn.m_init, aocpn.m_final, aocpn.diagnostics)


def _closure(arcs) -> set:
    """Pairs connected by a nonempty path of the given arcs."""
    succ: dict = {}
    for a, b in arcs:
        succ.setdefault(a, set()).add(b)
    out = set()
    for start in succ:
        stack, seen = [start], set()
        while stack:
            for nxt in succ.get(stack.pop(), ()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        out |= {(start, n) for n in seen}
    return out


def ocpd_sa(log: EventLog):
    matches = detect_oiwl(log)
    trace = RepairTrace("sa", sort_matches(matches))
    aocpn = ocpd_base(log)
    if not matches:
        trace.note = "no loop interaction found; base discovery used"
        return aocpn, trace
    for act1, act2, ot1, ot2 in sorted(_dedup(matches)):
        try:
            aocpn = similar_activity_transform(aocpn, ot1, ot2, act1, act2, trace.edits)
        except RepairError as exc:
            raise RepairError(f"cannot repair match ({act1}, {act2}, {ot1}, {ot2}): {exc}") from exc
    return aocpn, trace


VARIANTS = {"base": lambda log: (ocpd_base(log), None), "da": ocpd_da,
            "sa": ocpd_sa, "si": ocpd_si}


def discover(log: EventLog, variant: str = "base"):
    try:
        return VARIANTS[variant](log)
    except KeyError:
        raise ValueError(f"unknown variant {variant!r}") from None


__all__ = ["RepairTrace", "RepairError", "ocpd_da", "ocpd_sa", "ocpd_si",
           "similar_activity_transform", "discover", "fresh_label"]
