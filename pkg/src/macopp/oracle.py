"""Exhaustive enumeration of robot prefixes, used to check the tree search."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .conformant import ConformantPlanner
from .model import MaCoppProblem, SearchConfig, apply, belief_update, observe

DEFAULT_ENUMERATION_CAP = 1_000_000


class EnumerationCapExceeded(Exception):
    pass


@dataclass
class OracleResult:
    objective: Optional[Fraction]
    prefix: Optional[tuple]
    human_cost: Optional[Fraction]
    solo_cost: Optional[Fraction]
    nodes: int

    @property
    def feasible(self) -> bool:
        return self.objective is not None


def brute_force_oracle(problem: MaCoppProblem, config: SearchConfig, max_depth: Optional[int] = None,
                       cap: int = DEFAULT_ENUMERATION_CAP) -> OracleResult:
    """Best objective over every robot prefix of length 1..max_depth with k < L.

    Each prefix is replayed from the true initial state; the human's belief is
    updated per step and her optimal conformant cost computed from the end
    belief.  Ties go to the lexicographically smallest prefix.
    """
    if max_depth is None:
        max_depth = config.budget - 1
    max_depth = min(max_depth, config.budget - 1)
    planner = ConformantPlanner(problem.human_goal, problem.human_plan_actions, config.planner_node_budget)
    solo = planner.cost(problem.initial_belief)
    acting = problem.robot_belief_set
    sensor = problem.sensor
    alpha = config.alpha
    robot = sorted(problem.robot_actions, key=lambda a: a.key)
    updates: dict = {}

    best_key, best = None, None
    nodes = 0
    # (state, belief, prefix, charged steps)
    stack = [(problem.initial_state, problem.initial_belief, (), 0)]
    while stack:
        state, belief, prefix, charged = stack.pop()
        if len(prefix) >= max_depth:
            continue
        for a in robot:
            if not a.pre <= state:
                continue
            nodes += 1
            if nodes > cap:
                raise EnumerationCapExceeded(f"more than {cap} robot prefixes")
            s2 = apply(state, a)
            obs = observe(a, s2, sensor)
            key = (belief, obs)
            b2 = updates.get(key)
            if b2 is None:
                b2 = updates[key] = belief_update(belief, acting, obs, sensor)
            steps = charged + (0 if config.count_observable_only and obs.is_null else 1)
            p2 = prefix + (a,)
            cost = planner.cost(b2)
            if cost is not None and (solo is None or cost < solo):
                value = alpha * steps + (1 - alpha) * cost
                cand = (value, tuple(x.key for x in p2))
                if best_key is None or cand < best_key:
                    best_key, best = cand, (p2, cost)
            stack.append((s2, b2, p2, steps))
    if best is None:
        return OracleResult(None, None, None, solo, nodes)
    return OracleResult(best_key[0], best[0], best[1], solo, nodes)
