import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from ocpd.discovery import SEQ, disc_per_type, leaf, node, tree_to_wf_net
from ocpd.extensions import ocpd_sa
from ocpd.log import EventLog, make_event
from ocpd.ocpn import (
    PALETTE,
    AcceptingOCPN,
    Binding,
    ObjectCentricPetriNet,
    dumps_aocpn,
    enabled_bindings,
    fire_binding,
    identify_variable_arcs,
    is_oc_sound,
    is_oc_wf_net,
    loads_aocpn,
    merge_nets,
    ocpd_base,
    place_types_of,
    project,
    replay,
    to_dot,
    type_colors,
)
from ocpd.petri import LabeledPetriNet, Multiset, NetError, Status, is_sound_wf_net
from ocpd.testkit import random_aocpn


def order_item_net(variable=True):
    """order: place_order -> ship ; item: pick -> ship, ship may take many items."""
    n = LabeledPetriNet(
        frozenset({"o0", "o1", "o2", "i0", "i1", "i2"}),
        frozenset({"place", "pick", "ship"}),
        frozenset({("o0", "place"), ("place", "o1"), ("o1", "ship"), ("ship", "o2"),
                   ("i0", "pick"), ("pick", "i1"), ("i1", "ship"), ("ship", "i2")}),
        {"place": "place", "pick": "pick", "ship": "ship"})
    types = {"o0": "order", "o1": "order", "o2": "order",
             "i0": "item", "i1": "item", "i2": "item"}
    var = {("i1", "ship"), ("ship", "i2")} if variable else set()
    ocpn = ObjectCentricPetriNet(n, types, var)
    init = Multiset([("o0", "o"), ("i0", "x"), ("i0", "y")])
    final = Multiset([("o2", "o"), ("i2", "x"), ("i2", "y")])
    return AcceptingOCPN(ocpn, init, final)


def test_tpl_sets():
    ocpn = order_item_net().ocpn
    assert ocpn.tpl("ship") == {"order", "item"}
    assert ocpn.tpl_var("ship") == {"item"}
    assert ocpn.tpl_nv("ship") == {"order"}
    assert ocpn.is_well_formed() == (True, [])


def test_not_well_formed_detected():
    a = order_item_net()
    bad = ObjectCentricPetriNet(a.net, a.ocpn.place_types, {("i1", "ship")})
    ok, where = bad.is_well_formed()
    assert not ok and where == ["ship"]
    assert not is_oc_wf_net(bad)


def test_variable_arc_binds_subsets():
    a = order_item_net()
    m = a.m_init
    for t in ("place", "pick", "pick"):
        b = sorted(enabled_bindings(a, m, transitions=[t]))[0]
        m = fire_binding(a, m, b)
    ships = enabled_bindings(a, m, transitions=["ship"])
    assert {b.b("item") for b in ships} == {("x",), ("y",), ("x", "y")}
    m = fire_binding(a, m, Binding.of("ship", {"order": ["o"], "item": ["x", "y"]}))
    assert m == a.m_final


def test_non_variable_binding_needs_single_object():
    a = order_item_net(variable=False)
    with pytest.raises(NetError):
        fire_binding(a, a.m_init, Binding.of("pick", {"item": ["x", "y"]}))
    with pytest.raises(NetError):
        fire_binding(a, a.m_init, Binding.of("ship", {"order": ["o"], "item": ["x"]}))


def test_variable_arc_can_strand_objects():
    # ship may take x alone and leave y without an order to ship with
    a = order_item_net()
    verdict = is_oc_sound(a)
    assert verdict.status is Status.UNSOUND
    assert verdict.dead_transitions == []
    assert verdict.sound == oracles.oc_sound(a)


def test_single_item_order_is_sound():
    a = order_item_net()
    one = AcceptingOCPN(a.ocpn, Multiset([("o0", "o"), ("i0", "x")]),
                        Multiset([("o2", "o"), ("i2", "x")]))
    assert is_oc_sound(one).status is Status.SOUND


def test_without_variable_arc_second_item_is_stuck():
    verdict = is_oc_sound(order_item_net(variable=False))
    assert verdict.status is Status.UNSOUND


def test_binding_cap_gives_unknown():
    verdict = is_oc_sound(order_item_net(), max_binding_subsets=2)
    assert verdict.status is Status.UNKNOWN


def test_marking_cap_gives_unknown():
    assert is_oc_sound(order_item_net(), max_markings=3).status is Status.UNKNOWN


def test_single_type_reduces_to_classical():
    apn = tree_to_wf_net(node(SEQ, leaf("a"), leaf("b")), prefix="T::")
    ocpn = ObjectCentricPetriNet(apn.net, {p: "T" for p in apn.net.places})
    (src,), (snk,) = list(apn.m_init), list(apn.m_final)
    a = AcceptingOCPN(ocpn, Multiset([(src, "t1")]), Multiset([(snk, "t1")]))
    assert is_oc_sound(a).sound == is_sound_wf_net(apn).sound == True


def test_marking_off_source_is_unsound():
    a = order_item_net()
    moved = AcceptingOCPN(a.ocpn, Multiset([("o1", "o"), ("i0", "x"), ("i0", "y")]), a.m_final)
    assert is_oc_sound(moved).status is Status.UNSOUND


def test_object_in_two_types_rejected():
    a = order_item_net()
    with pytest.raises(NetError):
        AcceptingOCPN(a.ocpn, Multiset([("o0", "x"), ("i0", "x")]), Multiset())


def test_non_wf_net_rejected_by_soundness():
    a = order_item_net()
    n = a.net
    extra = LabeledPetriNet(n.places | {"lonely"}, n.transitions, n.arcs,
                            {t: n.label(t) for t in n.transitions})
    ocpn = ObjectCentricPetriNet(extra, {**a.ocpn.place_types, "lonely": "order"},
                                 a.ocpn.variable_arcs)
    with pytest.raises(NetError):
        is_oc_sound(AcceptingOCPN(ocpn, a.m_init, a.m_final))


def test_base_pipeline_on_l1(l1):
    a = ocpd_base(l1)
    assert sorted(a.net.transitions) == ["delegate request", "escalate request",
                                         "fail on request", "initialize", "receive request"]
    assert a.ocpn.variable_arcs == frozenset()
    assert is_oc_wf_net(a.ocpn)
    assert a.m_init == Multiset([("coordinator::p_0", "151a3"), ("customer::p_0", "0a3a3"),
                                 ("service provider::p_0", "ec135")])
    assert a.ocpn.tpl("receive request") == {"coordinator", "customer", "service provider"}


def test_base_pipeline_on_l2_is_sound(l2):
    assert is_oc_sound(ocpd_base(l2)).sound


def test_variable_arcs_identified():
    log = EventLog([
        make_event("1", "create", "2024-01-01T00:00:01", {"order": ["o"]}),
        make_event("2", "pick", "2024-01-01T00:00:02", {"item": ["x"]}),
        make_event("3", "pick", "2024-01-01T00:00:03", {"item": ["y"]}),
        make_event("4", "ship", "2024-01-01T00:00:04", {"order": ["o"], "item": ["x", "y"]}),
    ])
    apns = disc_per_type(log)
    n = merge_nets(apns)
    var = identify_variable_arcs(n, place_types_of(apns), log)
    assert var and all("ship" in arc for arc in var)
    assert all(place_types_of(apns)[p if p != "ship" else q] == "item" for p, q in var)
    a = ocpd_base(log)
    assert replay(a, log).success
    assert is_oc_sound(a).sound == oracles.oc_sound(a)


def test_merge_rejects_place_collisions():
    apn = tree_to_wf_net(leaf("a"), prefix="same::")
    with pytest.raises(NetError):
        merge_nets({"A": apn, "B": apn})


def test_projection_of_l1(l1):
    a = ocpd_base(l1)
    proj = project(a, "customer")
    assert proj.net.transitions == frozenset({"receive request"})
    assert proj.m_init == Multiset(["customer::p_0"])
    with pytest.raises(NetError):
        project(a, "nope")


def test_replay_l1_on_base_fails_early(l1):
    report = replay(ocpd_base(l1), l1)
    assert not report.success
    assert report.failed_event == "6b0b9"
    assert report.enabled == {"0ab63": True, "6b0b9": False}


def test_replay_unknown_activity():
    a = order_item_net()
    log = EventLog([make_event("1", "teleport", "2024-01-01T00:00:00", {"order": ["o"]})])
    report = replay(a, log)
    assert not report.success and "teleport" in report.reason


def test_replay_empty_log_on_empty_net():
    empty = LabeledPetriNet(frozenset(), frozenset(), frozenset(), {})
    a = AcceptingOCPN(ObjectCentricPetriNet(empty, {}), Multiset(), Multiset())
    assert replay(a, EventLog([])).success


def test_replay_requires_final_marking():
    a = order_item_net()
    log = EventLog([make_event("1", "place", "2024-01-01T00:00:00", {"order": ["o"]})])
    report = replay(a, log)
    assert not report.success and report.failed_event is None


def test_json_round_trip(l1):
    a = ocpd_base(l1)
    again = loads_aocpn(dumps_aocpn(a))
    assert again == a
    with pytest.raises(NetError):
        loads_aocpn('{"places": []}')


def test_dot_output_is_stable_and_styled():
    a = order_item_net()
    text = to_dot(a)
    assert text == to_dot(loads_aocpn(dumps_aocpn(a)))
    colors = type_colors(["order", "item"])
    assert colors == {"item": PALETTE[0], "order": PALETTE[1]}
    assert f'"i1" -> "ship" [color="{PALETTE[0]}:invis:{PALETTE[0]}"]' in text
    assert '<font color="red"><sup>2</sup></font>' in text
    assert '"o0" [color="' + PALETTE[1] in text


def test_dot_silent_transition_filled(l1):
    a, _ = ocpd_sa(l1)
    assert "style=filled, fillcolor=black" in to_dot(a)


def test_palette_cycles():
    types = [f"t{i}" for i in range(10)]
    colors = type_colors(types)
    assert colors["t0"] == colors["t8"] == PALETTE[0]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_soundness_matches_binding_graph_oracle(seed):
    a = random_aocpn(random.Random(seed))
    verdict = is_oc_sound(a, max_markings=10 ** 6, max_binding_subsets=10 ** 6)
    assert verdict.sound == oracles.oc_sound(a)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_random_nets_round_trip(seed):
    a = random_aocpn(random.Random(seed))
    assert loads_aocpn(dumps_aocpn(a)) == a
    assert is_oc_wf_net(a.ocpn)
