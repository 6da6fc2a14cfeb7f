import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from macopp.model import (
    Actor, ActionPattern, Belief, ConditionalEffect, GroundAction, InapplicableActionError,
    InconsistentObservationError, ModelError, ObservationSymbol, SearchConfig, SensorModel,
    SensorRule, apply, belief_update, entails_goal, fluent, human_step_update, is_coarse, observe,
    touches_vocabulary,
)

F = fluent
NULL = ObservationSymbol("quiet", True)


def H(name, *args, **kw):
    return GroundAction(Actor.HUMAN, name, args, **kw)


def R(name, *args, **kw):
    return GroundAction(Actor.ROBOT, name, args, **kw)


def S(*names):
    return frozenset(F(n) for n in names)


# -- transitions ----------------------------------------------------------------

def test_fluent_parsing():
    assert F("at-h roomb") == ("at-h", ("roomb",))
    assert str(F("item-at medkit rooma")) == "(item-at medkit rooma)"


def test_apply_plain_effects():
    a = H("move-h", "corridor", "roomb", pre=S("at-h corridor"), add=S("at-h roomb"), delete=S("at-h corridor"))
    assert apply(S("at-h corridor", "x"), a) == S("at-h roomb", "x")


def test_apply_inapplicable_raises():
    a = H("move-h", "corridor", "roomb", pre=S("at-h corridor"))
    with pytest.raises(InapplicableActionError):
        apply(S("at-h roomb"), a)


# Four cases of a conditional effect: condition true/false x effect already present/absent.
# Hand-written truth table of the expected successor.
SEARCH_B = H("search", "roomb", pre=S("at-h roomb"),
             conditional=(ConditionalEffect(S("item-at medkit roomb"), S("holding medkit"),
                                            S("item-at medkit roomb")),))
TRUTH_TABLE = [
    (S("at-h roomb"), S("at-h roomb")),
    (S("at-h roomb", "holding medkit"), S("at-h roomb", "holding medkit")),
    (S("at-h roomb", "item-at medkit roomb"), S("at-h roomb", "holding medkit")),
    (S("at-h roomb", "item-at medkit roomb", "holding medkit"), S("at-h roomb", "holding medkit")),
]


@pytest.mark.parametrize("before,after", TRUTH_TABLE)
def test_conditional_effect_truth_table(before, after):
    assert apply(before, SEARCH_B) == after


def test_conditional_effect_uses_pre_state():
    # the first effect enables the second's condition only in the successor; it must not fire
    a = R("chain", conditional=(ConditionalEffect(S("p"), S("q")), ConditionalEffect(S("q"), S("r"))))
    assert apply(S("p"), a) == S("p", "q")


def test_action_validation():
    with pytest.raises(ModelError):
        R("bad", cost=Fraction(-1))
    with pytest.raises(ModelError):
        R("bad", add=S("p"), delete=S("p"))


def test_entails_goal():
    b = Belief([S("g", "a"), S("g", "b")])
    assert entails_goal(b, S("g"))
    assert not entails_goal(b, S("g", "a"))
    assert entails_goal(b, frozenset())


def test_belief_must_be_nonempty():
    with pytest.raises(ModelError):
        Belief([])


# -- sensor model ---------------------------------------------------------------

SHOW = R("show-wagon", "corridor")
PICK_A = R("pick", "medkit", "rooma", add=S("in-wagon medkit"))
INSPECT_A = R("inspect", "rooma")
SENSOR = SensorModel(
    rules=[
        SensorRule(ActionPattern("pick"), ObservationSymbol("robot-busy")),
        SensorRule(ActionPattern("inspect"), ObservationSymbol("robot-busy")),
        SensorRule(ActionPattern("show-wagon"), ObservationSymbol("wagon-has-medkit"), S("in-wagon medkit")),
        SensorRule(ActionPattern("show-wagon"), ObservationSymbol("wagon-empty")),
        SensorRule(ActionPattern("drop-wagon", ("rooma",)), ObservationSymbol("left-a")),
    ],
    default=NULL, null=NULL)


def test_observe_first_match_and_default():
    assert observe(PICK_A, S(), SENSOR).token == "robot-busy"
    assert observe(SHOW, S("in-wagon medkit"), SENSOR).token == "wagon-has-medkit"
    assert observe(SHOW, S(), SENSOR).token == "wagon-empty"
    assert observe(R("drop-wagon", "rooma"), S(), SENSOR).token == "left-a"
    assert observe(R("drop-wagon", "roomb"), S(), SENSOR) == NULL
    assert observe(R("move-r", "a", "b"), S(), SENSOR).is_null


def test_pattern_wildcards():
    p = ActionPattern("unload", (None, "s0"))
    assert p.matches(R("unload", "p1", "s0"))
    assert not p.matches(R("unload", "p1", "s1"))
    assert not p.matches(R("unload", "s0"))


def test_possible_symbols():
    assert {s.token for s in SENSOR.possible_symbols(SHOW)} == {"wagon-has-medkit", "wagon-empty"}
    assert SENSOR.possible_symbols(R("move-r", "a", "b")) == {NULL}


def test_single_null_symbol():
    with pytest.raises(ModelError):
        SensorModel([SensorRule(ActionPattern("x"), ObservationSymbol("other", True))], NULL, NULL)


def test_coarseness():
    assert is_coarse(SENSOR, [PICK_A, INSPECT_A])
    assert not is_coarse(SENSOR, [PICK_A, SHOW])


# -- belief update ----------------------------------------------------------------

def brute_force_update(belief, acting, obs, sensor):
    """Literal reading of the update set over every (state, action) pair."""
    if obs.is_null:
        return set(belief)
    return {apply(s, a) for s, a in itertools.product(belief, acting)
            if a.pre <= s and observe(a, apply(s, a), sensor) == obs}


def test_show_wagon_collapses_two_state_belief():
    in_b = S("item-at medkit roomb")
    in_wagon = S("in-wagon medkit")  # robot already loaded it from room C
    b = Belief([in_b, in_wagon])
    obs = ObservationSymbol("wagon-has-medkit")
    expected = brute_force_update(b, [SHOW], obs, SENSOR)
    assert expected == {in_wagon}
    assert belief_update(b, [SHOW], obs, SENSOR).states == frozenset(expected)
    other = belief_update(b, [SHOW], ObservationSymbol("wagon-empty"), SENSOR)
    assert other.states == {in_b}


def test_null_observation_is_identity():
    b = Belief([S("a"), S("b")])
    assert belief_update(b, [PICK_A], NULL, SENSOR) is b


def test_inconsistent_observation_raises():
    with pytest.raises(InconsistentObservationError):
        belief_update(Belief([S()]), [SHOW], ObservationSymbol("left-a"), SENSOR)


def test_coarse_update_mixes_candidate_actions():
    b = Belief([S("item-at medkit rooma"), S()])
    out = belief_update(b, [PICK_A, INSPECT_A], ObservationSymbol("robot-busy"), SENSOR)
    assert out.states == {S("item-at medkit rooma"), S("item-at medkit rooma", "in-wagon medkit"),
                          S(), S("in-wagon medkit")}


def test_human_step_update_progresses_and_filters():
    search = H("search", "rooma", conditional=(ConditionalEffect(S("item-at medkit rooma"), S("holding medkit"),
                                                                 S("item-at medkit rooma")),))
    sensor = SensorModel([SensorRule(ActionPattern("search"), ObservationSymbol("got"), S("holding medkit")),
                          SensorRule(ActionPattern("search"), ObservationSymbol("nothing"))], NULL, NULL)
    b = Belief([S("item-at medkit rooma"), S("item-at medkit roomb")])
    assert human_step_update(b, search, ObservationSymbol("got"), sensor).states == {S("holding medkit")}
    assert human_step_update(b, search, ObservationSymbol("nothing"), sensor).states == {S("item-at medkit roomb")}
    assert len(human_step_update(b, search, NULL, sensor)) == 2


# -- properties ----------------------------------------------------------------------

ATOMS = [F(f"p{i}") for i in range(4)]
VOCAB = frozenset(a.name for a in ATOMS)
atom_sets = st.frozensets(st.sampled_from(ATOMS), max_size=4)


@st.composite
def actions(draw):
    conds = tuple(ConditionalEffect(draw(atom_sets), draw(atom_sets))
                  for _ in range(draw(st.integers(0, 2))))
    add = draw(atom_sets)
    return R(f"a{draw(st.integers(0, 3))}", pre=draw(atom_sets), add=add,
             delete=draw(atom_sets) - add, conditional=conds)


sensors = st.builds(
    lambda picks: SensorModel(
        [SensorRule(ActionPattern(f"a{i}"), ObservationSymbol(tok), cond) for i, tok, cond in picks],
        NULL, NULL),
    st.lists(st.tuples(st.integers(0, 3), st.sampled_from(["x", "y"]),
                       st.one_of(st.none(), atom_sets)), max_size=5))


@settings(max_examples=200, deadline=None)
@given(st.lists(atom_sets, min_size=1, max_size=5), st.lists(actions(), min_size=1, max_size=4), sensors,
       st.data())
def test_update_is_sound_and_matches_definition(states, acting, sensor, data):
    # well-formed models: an action that changes tracked facts is never silent
    loud = {a.name for a in acting if touches_vocabulary(a, VOCAB)}
    sensor = SensorModel(sensor.rules + [SensorRule(ActionPattern(n), ObservationSymbol("z")) for n in sorted(loud)],
                         NULL, NULL)
    true_state = data.draw(st.sampled_from(states))
    applicable = [a for a in acting if a.pre <= true_state]
    if not applicable:
        return
    a = data.draw(st.sampled_from(applicable))
    nxt = apply(true_state, a)
    obs = observe(a, nxt, sensor)
    b = Belief(states)
    out = belief_update(b, acting, obs, sensor)
    assert nxt in out
    assert out.states == frozenset(brute_force_update(b, acting, obs, sensor))
    if obs.is_null:
        assert out == b


def test_silent_action_changing_tracked_facts_is_rejected(usar):
    from dataclasses import replace
    drop = next(a for a in usar.robot_actions if a.name == "drop-wagon")
    rules = [r for r in usar.sensor.rules if r.pattern.name != "drop-wagon"]
    with pytest.raises(ModelError, match="unobserved"):
        replace(usar, sensor=SensorModel(rules, usar.sensor.default, usar.sensor.null))
    assert touches_vocabulary(usar.robot_belief_actions[drop.key], usar.vocabulary)


def test_search_config_validation():
    assert SearchConfig(alpha=0.25).alpha == Fraction(1, 4)
    for bad in (dict(alpha=2), dict(budget=0), dict(n_best=0), dict(iterations=-1)):
        with pytest.raises(ModelError):
            SearchConfig(**bad)
