import json
import random

import pytest

import oracles
from ocpd.extensions import ocpd_da, ocpd_si
from ocpd.ocpn import is_oc_sound, is_oc_wf_net, ocpd_base, replay
from ocpd.patterns import detect_oiwl_sub, detect_spurious
from ocpd.petri import Status
from ocpd.testkit import (
    LogRecipe,
    RecipeError,
    collaboration_recipe,
    gen_log,
    random_aocpn,
    random_recipe,
)


def test_generation_is_deterministic():
    recipe = collaboration_recipe(loop=True, spurious=True, seed=3)
    assert gen_log(recipe) == gen_log(recipe)
    assert gen_log(recipe) != gen_log(collaboration_recipe(loop=True, spurious=True, seed=4))


@pytest.mark.parametrize("loop, spurious", [(False, False), (True, False),
                                            (False, True), (True, True)])
def test_injected_patterns_are_detected(loop, spurious):
    log = gen_log(collaboration_recipe(loop=loop, spurious=spurious))
    assert bool(detect_oiwl_sub(log)) == loop
    assert bool(detect_spurious(log)) == spurious


def test_pattern_free_log_discovers_sound_net():
    log = gen_log(collaboration_recipe(loop=False))
    aocpn = ocpd_base(log)
    assert is_oc_sound(aocpn).status is Status.SOUND
    assert replay(aocpn, log).success


def test_injected_loop_repaired_by_relabelling():
    log = gen_log(collaboration_recipe(loop=True))
    assert is_oc_sound(ocpd_base(log)).status is Status.UNSOUND
    repaired, _ = ocpd_da(log)
    assert is_oc_sound(repaired).status is Status.SOUND


def test_injected_spurious_repaired_by_separation():
    log = gen_log(collaboration_recipe(loop=False, spurious=True))
    repaired, _ = ocpd_si(log)
    assert replay(repaired, log).success


@pytest.mark.parametrize("doc", [
    {"types": [], "templates": {}},
    {"types": ["A"], "templates": {"A": []}},
    {"types": ["A"], "templates": {"A": [["a"]]}, "interactions": {"a": ["B"]}},
    {"types": ["A"], "templates": {"A": [["a"]]}, "loop": True},
])
def test_invalid_recipes(doc):
    with pytest.raises(RecipeError):
        LogRecipe.from_dict(doc)


def test_unsynchronisable_templates():
    recipe = LogRecipe(["A", "B"], {"A": [["x", "y"]], "B": [["y", "x"]]},
                       {"x": ["A", "B"], "y": ["A", "B"]}, cases=1)
    with pytest.raises(RecipeError):
        gen_log(recipe)


def test_recipe_from_json():
    text = json.dumps({"types": ["A", "B"], "templates": {"A": [["a", "s"]], "B": [["s"]]},
                       "interactions": {"s": ["A", "B"]}, "cases": 2})
    log = gen_log(LogRecipe.loads(text))
    assert len(log) == 4
    assert {e.activity for e in log if len(e.types()) == 2} == {"s"}


@pytest.mark.parametrize("seed", range(20))
def test_random_recipes_generate(seed):
    log = gen_log(random_recipe(random.Random(seed)))
    assert len(log) > 0
    assert not detect_oiwl_sub(log) and not detect_spurious(log)


@pytest.mark.parametrize("seed", range(20))
def test_random_nets_are_workflow_nets(seed):
    aocpn = random_aocpn(random.Random(seed))
    assert is_oc_wf_net(aocpn.ocpn)
    assert aocpn.population()
    assert is_oc_sound(aocpn).sound == oracles.oc_sound(aocpn)
