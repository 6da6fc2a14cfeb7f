"""Core MA-COPP types: fluents, states, actions, beliefs and the sensor model.

States are frozensets of ground fluents (closed world).  The human's belief is
an explicit set of states over the human's own fluent vocabulary, so robot-only
facts such as the robot's position never enter it.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Optional, Sequence


class ModelError(Exception):
    """Raised for ill-formed problems."""


class InapplicableActionError(ModelError):
    pass


class InconsistentObservationError(ModelError):
    """The observation is impossible from every state of the belief."""


class Fluent(NamedTuple):
    name: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return f"({self.name})"
        return f"({self.name} {' '.join(self.args)})"


def fluent(text: str) -> Fluent:
    """Build a fluent from ``"name arg1 arg2"`` (parentheses optional)."""
    parts = text.strip().strip("()").split()
    return Fluent(parts[0], tuple(parts[1:]))


WorldState = frozenset  # frozenset[Fluent]


def make_state(fluents: Iterable[Fluent]) -> frozenset:
    return frozenset(fluents)


def state_key(state: frozenset) -> tuple:
    """Canonical sorted form of a state, used for ordering and serialization."""
    return tuple(sorted(state))


class Actor(enum.Enum):
    ROBOT = "robot"
    HUMAN = "human"


@dataclass(frozen=True)
class ConditionalEffect:
    condition: frozenset
    add: frozenset = frozenset()
    delete: frozenset = frozenset()


@dataclass(frozen=True)
class GroundAction:
    actor: Actor
    name: str
    args: tuple[str, ...] = ()
    pre: frozenset = frozenset()
    add: frozenset = frozenset()
    delete: frozenset = frozenset()
    conditional: tuple[ConditionalEffect, ...] = ()
    cost: Fraction = Fraction(1)

    def __post_init__(self):
        if self.cost < 0:
            raise ModelError(f"negative cost on {self.label}")
        if self.add & self.delete:
            raise ModelError(f"{self.label} adds and deletes {sorted(self.add & self.delete)}")

    @property
    def label(self) -> str:
        return " ".join((self.name,) + self.args)

    @property
    def key(self) -> tuple[str, ...]:
        return (self.name,) + self.args

    def applicable(self, state: frozenset) -> bool:
        return self.pre <= state

    def __str__(self) -> str:
        return f"({self.label})"


def apply(state: frozenset, action: GroundAction) -> frozenset:
    """Successor of ``state`` under ``action``.

    Conditional effects are evaluated against the state before the transition.
    Deletes are applied before adds, so an effect that both deletes and adds
    a fluent leaves it true.
    """
    if not action.pre <= state:
        missing = ", ".join(str(f) for f in sorted(action.pre - state))
        raise InapplicableActionError(f"{action} not applicable: missing {missing}")
    add = set(action.add)
    delete = set(action.delete)
    for eff in action.conditional:
        if eff.condition <= state:
            add |= eff.add
            delete |= eff.delete
    return frozenset((state - delete) | add)


# -- beliefs -----------------------------------------------------------------

class Belief:
    """Non-empty, canonical set of world states."""

    __slots__ = ("states", "_hash")

    def __init__(self, states: Iterable[frozenset]):
        states = frozenset(states)
        if not states:
            raise InconsistentObservationError("empty belief")
        self.states = states
        self._hash = hash(states)

    def __eq__(self, other):
        return isinstance(other, Belief) and self.states == other.states

    def __hash__(self):
        return self._hash

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.sorted_states())

    def __contains__(self, state):
        return state in self.states

    def sorted_states(self) -> list[frozenset]:
        return sorted(self.states, key=state_key)

    @property
    def fully_observable(self) -> bool:
        return len(self.states) == 1

    def __repr__(self):
        return f"Belief({len(self.states)} states)"


def entails_goal(belief: Belief, goal: Iterable[Fluent]) -> bool:
    goal = frozenset(goal)
    return all(goal <= s for s in belief.states)


# -- observations and the sensor model ----------------------------------------

@dataclass(frozen=True, order=True)
class ObservationSymbol:
    token: str
    is_null: bool = False

    def __str__(self) -> str:
        return self.token


@dataclass(frozen=True)
class ActionPattern:
    """Matches ground actions by name and, optionally, by argument.

    ``args`` of ``None`` matches any arity; a ``None`` entry inside the tuple
    is a wildcard for that position.
    """
    name: str
    args: Optional[tuple[Optional[str], ...]] = None

    def matches(self, action: GroundAction) -> bool:
        if action.name != self.name:
            return False
        if self.args is None:
            return True
        if len(self.args) != len(action.args):
            return False
        return all(p is None or p == a for p, a in zip(self.args, action.args))

    def __str__(self) -> str:
        if self.args is None:
            return self.name
        inner = " ".join("?" if a is None else a for a in self.args)
        return f"({self.name} {inner})"


@dataclass(frozen=True)
class SensorRule:
    pattern: ActionPattern
    symbol: ObservationSymbol
    condition: Optional[frozenset] = None


@dataclass
class SensorModel:
    """Ordered rules, first match wins; ``default`` covers everything else."""

    rules: list[SensorRule]
    default: ObservationSymbol
    null: ObservationSymbol
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self.null.is_null:
            raise ModelError("sensor null symbol must be flagged as null")
        for rule in self.rules:
            if rule.symbol.is_null and rule.symbol != self.null:
                raise ModelError(f"second null symbol {rule.symbol}")
        if self.default.is_null and self.default != self.null:
            raise ModelError(f"second null symbol {self.default}")

    @property
    def symbols(self) -> frozenset:
        return frozenset([self.default, self.null] + [r.symbol for r in self.rules])

    def rules_for(self, action: GroundAction) -> tuple[SensorRule, ...]:
        key = action.key
        rules = self._cache.get(key)
        if rules is None:
            selected = []
            for rule in self.rules:
                if rule.pattern.matches(action):
                    selected.append(rule)
                    if rule.condition is None:
                        break
            rules = self._cache[key] = tuple(selected)
        return rules

    def possible_symbols(self, action: GroundAction) -> frozenset:
        """Every symbol ``action`` can emit over all states."""
        out = set()
        for rule in self.rules_for(action):
            out.add(rule.symbol)
            if rule.condition is None:
                return frozenset(out)
        out.add(self.default)
        return frozenset(out)

    def condition_predicates(self) -> set[str]:
        return {f.name for r in self.rules if r.condition for f in r.condition}


def observe(action: GroundAction, resulting_state: frozenset, sensor: SensorModel) -> ObservationSymbol:
    for rule in sensor.rules_for(action):
        if rule.condition is None or rule.condition <= resulting_state:
            return rule.symbol
    return sensor.default


def is_coarse(sensor: SensorModel, robot_actions: Iterable[GroundAction]) -> bool:
    """True when two distinct robot actions can emit the same symbol."""
    seen: dict[ObservationSymbol, tuple] = {}
    for action in robot_actions:
        for sym in sensor.possible_symbols(action):
            other = seen.setdefault(sym, action.key)
            if other != action.key:
                return True
    return False


def belief_update(belief: Belief, acting_set: Iterable[GroundAction],
                  observed: ObservationSymbol, sensor: SensorModel) -> Belief:
    """Human belief after an action from ``acting_set`` produced ``observed``.

    A null observation leaves the belief untouched.  Otherwise the result is
    every successor ``s'`` of a belief state under an applicable acting action
    whose observation on ``s'`` equals ``observed``.
    """
    if observed.is_null:
        return belief
    acting_set = list(acting_set)
    successors = set()
    for s in belief.states:
        for a in acting_set:
            if not a.pre <= s:
                continue
            s2 = apply(s, a)
            if observe(a, s2, sensor) == observed:
                successors.add(s2)
    if not successors:
        raise InconsistentObservationError(
            f"observation {observed} is impossible from a belief of {len(belief)} states")
    return Belief(successors)


def human_step_update(belief: Belief, action: GroundAction, observed: ObservationSymbol,
                      sensor: SensorModel) -> Belief:
    """Belief after the human executes her own ``action``.

    The human knows which action she took, so the belief is progressed through
    it even when the observation is null; a non-null observation additionally
    filters the successors.
    """
    successors = set()
    for s in belief.states:
        if not action.pre <= s:
            continue
        s2 = apply(s, action)
        if observed.is_null or observe(action, s2, sensor) == observed:
            successors.add(s2)
    if not successors:
        raise InconsistentObservationError(f"{action} with observation {observed} contradicts the belief")
    return Belief(successors)


# -- configuration and problem -----------------------------------------------

def _frac(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class SearchConfig:
    alpha: Fraction = Fraction(1, 2)
    budget: int = 15
    iterations: int = 10_000
    reward_const: Fraction = Fraction(100)
    cost_const: Fraction = Fraction(50)
    exploration: float = 2 ** 0.5
    uct_epsilon: float = 1e-6
    backprop_cost_scale: Fraction = Fraction(1)
    n_best: int = 3
    seed: int = 0
    count_observable_only: bool = False
    global_uct_count: bool = False
    planner_node_budget: int = 1_000_000

    def __post_init__(self):
        for name in ("alpha", "reward_const", "cost_const", "backprop_cost_scale"):
            object.__setattr__(self, name, _frac(getattr(self, name)))
        object.__setattr__(self, "exploration", float(self.exploration))
        object.__setattr__(self, "uct_epsilon", float(self.uct_epsilon))
        if not 0 <= self.alpha <= 1:
            raise ModelError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.budget < 1:
            raise ModelError("budget L must be >= 1")
        if self.iterations < 0:
            raise ModelError("iterations must be >= 0")
        if self.n_best < 1:
            raise ModelError("n_best must be >= 1")
        if self.uct_epsilon <= 0:
            raise ModelError("uct_epsilon must be positive")
        if self.backprop_cost_scale <= 0:
            raise ModelError("backprop_cost_scale must be positive")

    def replace(self, **changes) -> "SearchConfig":
        from dataclasses import replace
        return replace(self, **changes)


@dataclass
class MaCoppProblem:
    """A grounded multi-agent controlled observability planning problem.

    ``robot_actions`` transform the true (full) state.  ``robot_belief_actions``
    maps each robot action key to the variant the human uses to reason about
    it, defined over ``vocabulary`` only.  Human actions act on both.
    """

    name: str
    fluents: frozenset
    human_actions: tuple[GroundAction, ...]
    robot_actions: tuple[GroundAction, ...]
    robot_belief_actions: dict
    initial_state: frozenset
    initial_belief: Belief
    human_goal: frozenset
    sensor: SensorModel
    vocabulary: frozenset = frozenset()
    human_belief_actions: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    @property
    def observations(self) -> frozenset:
        return self.sensor.symbols

    @property
    def human_costs(self) -> dict:
        return {a.key: a.cost for a in self.human_actions}

    @property
    def robot_costs(self) -> dict:
        return {a.key: a.cost for a in self.robot_actions}

    def project(self, state: frozenset) -> frozenset:
        """Restrict a full state to the human's vocabulary."""
        if not self.vocabulary:
            return state
        return frozenset(f for f in state if f.name in self.vocabulary)

    def belief_variant(self, action: GroundAction) -> GroundAction:
        return self.robot_belief_actions[action.key]

    @property
    def human_plan_actions(self) -> tuple[GroundAction, ...]:
        """Human actions as she reasons about them (belief variants where given)."""
        return tuple(self.human_belief_actions.get(a.key, a) for a in self.human_actions)

    @property
    def robot_belief_set(self) -> tuple[GroundAction, ...]:
        return tuple(self.robot_belief_actions[a.key] for a in self.robot_actions)

    def validate(self) -> None:
        if self.project(self.initial_state) not in self.initial_belief:
            raise ModelError("initial belief does not contain the true initial state")
        if self.fluents and not self.human_goal <= self.fluents:
            raise ModelError(f"goal fluents not declared: {sorted(self.human_goal - self.fluents)}")
        if any(a.actor is not Actor.HUMAN for a in self.human_actions):
            raise ModelError("human action set contains a robot action")
        if any(a.actor is not Actor.ROBOT for a in self.robot_actions):
            raise ModelError("robot action set contains a human action")
        missing = [a.label for a in self.robot_actions if a.key not in self.robot_belief_actions]
        if missing:
            raise ModelError(f"robot actions without a belief variant: {missing[:5]}")
        if self.vocabulary:
            stray = self.sensor.condition_predicates() - self.vocabulary
            if stray:
                raise ModelError(f"sensor conditions use fluents the human cannot represent: {sorted(stray)}")
        # a silent robot action leaves the belief as is, so it must not change what she tracks
        for a in self.robot_actions:
            if self.sensor.null in self.sensor.possible_symbols(a) and touches_vocabulary(
                    self.robot_belief_actions[a.key], self.vocabulary):
                raise ModelError(f"{a} can be unobserved but changes facts the human tracks")
        if not is_coarse(self.sensor, self.robot_actions):
            raise ModelError("sensor model distinguishes every robot action; at least two must share a symbol")


def touches_vocabulary(action: GroundAction, vocabulary: frozenset) -> bool:
    """True when ``action`` may add or delete a fluent whose predicate is in ``vocabulary``."""
    effects = [action.add, action.delete]
    for eff in action.conditional:
        effects += [eff.add, eff.delete]
    return any(f.name in vocabulary for fs in effects for f in fs)


def action_sequence_key(actions: Sequence[GroundAction]) -> tuple:
    return tuple(a.key for a in actions)
