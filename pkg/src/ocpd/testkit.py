"""Fixture logs and seeded generators for tests and demos."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from itertools import count

from .discovery import AND, LOOP, SEQ, XOR, leaf, node, tree_to_wf_net
from .log import EventLog, SimpleEventLog, make_event
from .ocpn import AcceptingOCPN, ObjectCentricPetriNet, merge_nets, place_types_of
from .patterns import detect_oiwl_sub, detect_spurious
from .petri import Multiset

EPOCH = datetime(2024, 1, 1)

L1_ROWS = [
    ("0ab63", "initialize", "2023-03-10T15:55:28", {"coordinator": ["151a3"]}),
    ("6b0b9", "receive request", "2023-03-10T15:55:29",
     {"coordinator": ["151a3"], "customer": ["0a3a3"]}),
    ("ddf21", "delegate request", "2023-03-10T15:55:30",
     {"coordinator": ["151a3"], "service provider": ["ec135"]}),
    ("kj875", "fail on request", "2023-03-11T11:00:31", {"service provider": ["ec135"]}),
    ("9c7f8", "receive request", "2023-03-11T11:00:32",
     {"coordinator": ["151a3"], "service provider": ["ec135"]}),
    ("207f2", "escalate request", "2023-03-11T11:00:33", {"coordinator": ["151a3"]}),
]

L2_ROWS = [
    ("b2589", "check statement", "2023-03-12T15:50:25", {"retail credit": ["a0287"]}),
    ("9e602", "check statement", "2023-03-12T15:50:26", {"corporate credit": ["677f7"]}),
    ("65145", "report to authority", "2023-03-12T15:50:37",
     {"retail credit": ["a0287"], "corporate credit": ["677f7"]}),
]


def fixture_l1() -> EventLog:
    """Coordinator/customer/service-provider log with a loop on request receipt."""
    return EventLog([make_event(*row) for row in L1_ROWS])


def fixture_l2() -> EventLog:
    """Two credit types sharing an unsynchronised statement check."""
    return EventLog([make_event(*row) for row in L2_ROWS])


# -- recipe-driven generation -------------------------------------------------

class RecipeError(ValueError):
    pass


@dataclass
class LogRecipe:
    """``templates`` maps each type to candidate activity sequences;
    ``interactions`` maps an activity to the types that perform it jointly."""

    types: list
    templates: dict
    interactions: dict = field(default_factory=dict)
    cases: int = 3
    loop: bool = False
    spurious: bool = False
    seed: int = 0

    def __post_init__(self):
        if not self.types:
            raise RecipeError("recipe needs at least one object type")
        for ot in self.types:
            if not self.templates.get(ot) or not all(self.templates[ot]):
                raise RecipeError(f"type {ot!r} needs nonempty templates")
        for act, ots in self.interactions.items():
            unknown = set(ots) - set(self.types)
            if unknown:
                raise RecipeError(f"interaction {act!r} names unknown types {sorted(unknown)}")
        if (self.loop or self.spurious) and len(self.types) < 2:
            raise RecipeError("pattern injection needs two object types")

    @classmethod
    def from_dict(cls, doc) -> "LogRecipe":
        return cls(list(doc["types"]), {k: [list(t) for t in v] for k, v in doc["templates"].items()},
                   {k: list(v) for k, v in doc.get("interactions", {}).items()},
                   doc.get("cases", 3), doc.get("loop", False), doc.get("spurious", False),
                   doc.get("seed", 0))

    @classmethod
    def loads(cls, text: str) -> "LogRecipe":
        return cls.from_dict(json.loads(text))


def _schedule(recipe: LogRecipe, traces: dict, rng) -> list:
    """Interleave per-type traces, firing interaction steps jointly."""
    pos = {ot: 0 for ot in traces}
    steps = []
    while any(pos[ot] < len(traces[ot]) for ot in traces):
        ready = []
        for ot in sorted(traces):
            if pos[ot] >= len(traces[ot]):
                continue
            act = traces[ot][pos[ot]]
            partners = [p for p in recipe.interactions.get(act, [ot]) if p in traces]
            if ot not in partners:
                partners = [ot]
            if all(pos[p] < len(traces[p]) and traces[p][pos[p]] == act for p in partners):
                ready.append((act, tuple(sorted(partners))))
        if not ready:
            raise RecipeError("templates cannot be synchronised on their interactions")
        act, partners = rng.choice(sorted(set(ready)))
        for p in partners:
            pos[p] += 1
        steps.append((act, partners))
    return steps


def gen_log(recipe: LogRecipe) -> EventLog:
    rng = random.Random(recipe.seed)
    ids = count()
    clock = count()
    events = []

    def emit(act, omap):
        n = next(ids)
        events.append(make_event(f"e{n:05d}", act, EPOCH + timedelta(seconds=next(clock)), omap))

    for case in range(recipe.cases):
        objs = {ot: f"{ot}-{case:03d}" for ot in recipe.types}
        if case == 0:
            ot1, ot2 = recipe.types[0], recipe.types[1] if len(recipe.types) > 1 else None
            if recipe.loop:
                for act, ots in (("loop_do", [ot1]), ("loop_redo", [ot1, ot2]),
                                 ("loop_fill", [ot2]), ("loop_do", [ot1, ot2])):
                    emit(act, {ot: [objs[ot]] for ot in ots})
            if recipe.spurious:
                emit("shared_step", {ot1: [objs[ot1]]})
                emit("shared_step", {ot2: [objs[ot2]]})
        traces = {ot: list(rng.choice(recipe.templates[ot])) for ot in recipe.types}
        for act, ots in _schedule(recipe, traces, rng):
            emit(act, {ot: [objs[ot]] for ot in ots})
    log = EventLog(events)
    _verify(recipe, log)
    return log


def _verify(recipe, log):
    has_loop = bool(detect_oiwl_sub(log))
    has_spurious = bool(detect_spurious(log))
    if recipe.loop and not has_loop:
        raise RecipeError("templates break the injected loop pattern")
    if recipe.spurious and not has_spurious:
        raise RecipeError("templates break the injected spurious interaction")
    if not recipe.loop and has_loop:
        raise RecipeError("templates themselves produce a loop interaction")
    if not recipe.spurious and has_spurious:
        raise RecipeError("templates themselves produce a spurious interaction")


def collaboration_recipe(loop=True, spurious=False, cases=2, seed=0) -> LogRecipe:
    """Coordinator, customer and service-provider roles as in the request-matching scenario."""
    return LogRecipe(
        types=["coordinator", "service provider", "customer"],
        templates={
            "coordinator": [["initialize", "receive order", "match", "confirm", "close"],
                            ["initialize", "receive order", "match", "confirm", "archive", "close"]],
            "service provider": [["match", "prepare", "confirm"]],
            "customer": [["place order", "receive order", "pay"]],
        },
        interactions={"receive order": ["coordinator", "customer"],
                      "match": ["coordinator", "service provider"],
                      "confirm": ["coordinator", "service provider"]},
        cases=cases, loop=loop, spurious=spurious, seed=seed)


def random_recipe(rng: random.Random) -> LogRecipe:
    """Two or three types, each with optional private steps around shared ones."""
    types = ["alpha", "beta", "gamma"][:rng.randint(2, 3)]
    shared = []
    for i in range(rng.randint(1, 3)):
        # the first shared step involves every type, keeping the net connected
        ots = types if i == 0 else sorted(rng.sample(types, rng.randint(2, len(types))))
        shared.append((f"sync{i}", ots))
    templates = {}
    for ot in types:
        mine = [act for act, ots in shared if ot in ots]
        variants = []
        for _ in range(rng.randint(1, 2)):
            seq = []
            for j, act in enumerate(mine + [None]):
                if rng.random() < 0.6:
                    seq.append(f"{ot}_step{j}")
                if act:
                    seq.append(act)
            variants.append(seq or [f"{ot}_step0"])
        templates[ot] = variants
    return LogRecipe(types, templates, dict(shared), cases=rng.randint(1, 2),
                     seed=rng.randrange(10 ** 6))


# -- random instances for property tests -------------------------------------

def random_simple_log(rng: random.Random, max_activities=6, max_traces=8,
                      max_length=10) -> SimpleEventLog:
    acts = "abcdef"[:rng.randint(1, max_activities)]
    traces = [tuple(rng.choice(acts) for _ in range(rng.randint(1, max_length)))
              for _ in range(rng.randint(1, max_traces))]
    return SimpleEventLog.of(traces)


def random_tree(rng: random.Random, labels: list):
    """Process tree using each label once."""
    if len(labels) == 1:
        return leaf(labels[0])
    k = rng.randint(1, len(labels) - 1)
    op = rng.choice((SEQ, SEQ, XOR, AND, LOOP))
    left, right = random_tree(rng, labels[:k]), random_tree(rng, labels[k:])
    if op == LOOP and rng.random() < 0.3:
        return node(LOOP, node(SEQ, left, right), leaf())
    return node(op, left, right)


def random_aocpn(rng: random.Random, max_objects=3, max_places=12) -> AcceptingOCPN:
    while True:
        types = ["A", "B"][:rng.randint(1, 2)]
        pool = ["x", "y", "z", "w"]
        label_sets = {ot: rng.sample(pool, rng.randint(1, 3)) for ot in types}
        if len(types) == 2 and not set(label_sets["A"]) & set(label_sets["B"]):
            continue
        apns = {ot: tree_to_wf_net(random_tree(rng, labels), prefix=f"{ot}::")
                for ot, labels in label_sets.items()}
        if sum(len(a.net.places) for a in apns.values()) > max_places:
            continue
        net = merge_nets(apns)
        ptypes = place_types_of(apns)
        variable = set()
        for t in net.transitions:
            for ot in types:
                arcs = {(a, b) for a, b in net.arcs if t in (a, b)
                        and ptypes[a if a != t else b] == ot}
                if arcs and rng.random() < 0.3:
                    variable |= arcs
        ocpn = ObjectCentricPetriNet(net, ptypes, variable)
        sizes = {ot: 1 for ot in types}
        for _ in range(rng.randint(0, max_objects - len(types))):
            sizes[rng.choice(types)] += 1
        init, final = [], []
        for ot in types:
            src = next(p for p in net.places if ptypes[p] == ot and not net.preset(p))
            snk = next(p for p in net.places if ptypes[p] == ot and not net.postset(p))
            for i in range(sizes[ot]):
                init.append((src, f"{ot.lower()}{i}"))
                final.append((snk, f"{ot.lower()}{i}"))
        return AcceptingOCPN(ocpn, Multiset(init), Multiset(final))


def random_small_log(rng: random.Random, max_events=8) -> EventLog:
    """Small logs over few activities, types and objects, with timestamp ties."""
    n = rng.randint(0, max_events)
    acts = ["a", "b", "c"]
    objects = {"T": ["t1", "t2"], "U": ["u1", "u2"]}
    events = []
    for i in range(n):
        omap = {}
        for ot, objs in objects.items():
            picked = [o for o in objs if rng.random() < 0.4]
            if picked:
                omap[ot] = picked
        if not omap:
            ot = rng.choice(sorted(objects))
            omap[ot] = [rng.choice(objects[ot])]
        ts = EPOCH + timedelta(seconds=rng.randint(0, n + 2))
        events.append(make_event(f"ev{i}", rng.choice(acts), ts, omap))
    return EventLog(events)


def loop_shaped_log(rng: random.Random, max_events=8) -> EventLog:
    """Random log seeded with an act1/act2/filler/act1 skeleton so loop
    witnesses show up often."""
    base = [("a", {"T": ["t1"]}), ("b", {"T": ["t1"], "U": ["u1"]}),
            ("c", {"U": ["u1"]}), ("a", {"T": ["t1"], "U": ["u1"]})]
    extra = random_small_log(rng, max_events - len(base))
    events = []
    for i, (act, omap) in enumerate(base):
        events.append(make_event(f"s{i}", act, EPOCH + timedelta(seconds=2 * i + 1), omap))
    for e in extra:
        if rng.random() < 0.5:
            events.append(e)
    return EventLog(events)
