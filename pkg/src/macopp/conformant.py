"""Cost-optimal conformant planning over explicit beliefs.

The human is modelled as a planner that, from her current belief, finds the
cheapest action sequence that is applicable in and reaches the goal from every
state she considers possible.  Search is uniform-cost over beliefs with a
closed list keyed on the canonical belief.
"""
from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import count
from threading import Lock
from typing import Iterable, Optional, Sequence

from .model import Belief, GroundAction, InapplicableActionError, apply, entails_goal

log = logging.getLogger(__name__)

DEFAULT_NODE_BUDGET = 1_000_000


class SearchBudgetExceeded(Exception):
    """The planner ran out of nodes before proving the answer either way."""


@dataclass(frozen=True)
class ConformantPlan:
    steps: tuple[GroundAction, ...]
    cost: Fraction

    def __len__(self):
        return len(self.steps)

    @property
    def labels(self) -> list[str]:
        return [a.label for a in self.steps]


def strongly_applicable(belief: Belief, action: GroundAction) -> bool:
    pre = action.pre
    return all(pre <= s for s in belief.states)


def progress(belief: Belief, action: GroundAction) -> Belief:
    """Image of ``belief`` under ``action``; it must apply in every state."""
    if not strongly_applicable(belief, action):
        raise InapplicableActionError(f"{action} is not applicable in every state of the belief")
    return Belief(apply(s, action) for s in belief.states)


def conformant_plan(belief: Belief, goal: Iterable, actions: Sequence[GroundAction],
                    node_budget: int = DEFAULT_NODE_BUDGET) -> Optional[ConformantPlan]:
    """Minimum-cost conformant plan, or None when the goal is unreachable.

    Among equal-cost plans the one whose action-label sequence is
    lexicographically smallest is returned.  Raises
    :class:`SearchBudgetExceeded` after expanding ``node_budget`` beliefs.
    """
    goal = frozenset(goal)
    actions = sorted(actions, key=lambda a: a.key)
    tie = count()
    # entries: (g, label sequence, tiebreak, belief, path)
    frontier = [(Fraction(0), (), next(tie), belief, ())]
    best_g = {belief: Fraction(0)}
    closed = set()
    expanded = 0
    while frontier:
        g, labels, _, current, path = heapq.heappop(frontier)
        if current in closed:
            continue
        closed.add(current)
        if entails_goal(current, goal):
            return ConformantPlan(path, g)
        expanded += 1
        if expanded > node_budget:
            raise SearchBudgetExceeded(f"conformant search exceeded {node_budget} nodes")
        for a in actions:
            if not strongly_applicable(current, a):
                continue
            nxt = Belief(apply(s, a) for s in current.states)
            if nxt in closed:
                continue
            g2 = g + a.cost
            old = best_g.get(nxt)
            if old is not None and old < g2:
                continue
            best_g[nxt] = g2
            heapq.heappush(frontier, (g2, labels + (a.key,), next(tie), nxt, path + (a,)))
    return None


def validate_plan(plan: ConformantPlan | Sequence[GroundAction], belief: Belief, goal: Iterable) -> bool:
    """Independent check: strongly applicable step by step and goal-achieving."""
    steps = plan.steps if isinstance(plan, ConformantPlan) else tuple(plan)
    goal = frozenset(goal)
    states = list(belief.states)
    for a in steps:
        nxt = []
        for s in states:
            if not a.pre <= s:
                return False
            nxt.append(apply(s, a))
        states = nxt
    if isinstance(plan, ConformantPlan) and plan.cost != sum((a.cost for a in steps), Fraction(0)):
        return False
    return all(goal <= s for s in states)


class ConformantPlanner:
    """Memoizing wrapper: belief -> optimal plan (or None).

    Budget exhaustion is cached as None and counted in ``unknown``.
    """

    def __init__(self, goal: Iterable, actions: Sequence[GroundAction],
                 node_budget: int = DEFAULT_NODE_BUDGET):
        self.goal = frozenset(goal)
        self.actions = tuple(sorted(actions, key=lambda a: a.key))
        self.node_budget = node_budget
        self._cache: dict = {}
        self._lock = Lock()
        self.calls = 0
        self.unknown = 0

    def __call__(self, belief: Belief) -> Optional[ConformantPlan]:
        with self._lock:
            if belief in self._cache:
                return self._cache[belief]
        try:
            plan = conformant_plan(belief, self.goal, self.actions, self.node_budget)
        except SearchBudgetExceeded:
            log.warning("conformant planner budget exhausted on a belief of %d states", len(belief))
            with self._lock:
                self.unknown += 1
            plan = None
        with self._lock:
            self.calls += 1
            self._cache.setdefault(belief, plan)
        return plan

    def cost(self, belief: Belief) -> Optional[Fraction]:
        plan = self(belief)
        return None if plan is None else plan.cost
