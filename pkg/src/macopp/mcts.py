"""Utility-tree generation with single-player MCTS, and joint-plan extraction.

Each tree node holds the true state after a robot prefix together with the
human's simulated belief.  A simulation is one call to the human's conformant
planner from that belief: a plan cheaper than her solo plan earns the reward
constant minus a weighted cost, anything else earns only the failure cost.

Fully explored subtrees are marked exhausted and skipped by selection, so on
small instances the tree eventually enumerates every prefix within the budget.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .conformant import ConformantPlan, ConformantPlanner, validate_plan
from .model import (
    Belief, GroundAction, MaCoppProblem, ObservationSymbol, SearchConfig, apply,
    belief_update, entails_goal, observe,
)


@dataclass
class SimResult:
    plan: Optional[ConformantPlan]
    feasible: bool
    reward: Fraction
    cost: Fraction

    @property
    def human_cost(self) -> Optional[Fraction]:
        return None if self.plan is None else self.plan.cost


class Node:
    __slots__ = ("state", "belief", "depth", "action", "observation", "parent", "children",
                 "untried", "utility", "visits", "sim", "exhausted", "penalty_steps")

    def __init__(self, state, belief, depth=0, action=None, observation=None, parent=None,
                 penalty_steps=0):
        self.state = state
        self.belief = belief
        self.depth = depth
        self.action: Optional[GroundAction] = action
        self.observation: Optional[ObservationSymbol] = observation
        self.parent: Optional[Node] = parent
        self.children: list[Node] = []
        self.untried: list[GroundAction] = []
        self.utility = 0.0
        self.visits = 0
        self.sim: Optional[SimResult] = None
        self.exhausted = False
        self.penalty_steps = penalty_steps

    def path(self) -> list["Node"]:
        out, node = [], self
        while node is not None:
            out.append(node)
            node = node.parent
        return out[::-1]

    def prefix(self) -> list[GroundAction]:
        return [n.action for n in self.path()[1:]]

    def prefix_key(self) -> tuple:
        return tuple(a.key for a in self.prefix())

    def __repr__(self):
        return f"Node(depth={self.depth}, action={self.action}, visits={self.visits}, utility={self.utility:.3f})"


@dataclass
class UtilityTree:
    root: Node
    problem: MaCoppProblem
    config: SearchConfig
    solo_cost: Optional[Fraction]
    planner: ConformantPlanner
    iterations_run: int = 0
    backpropagations: int = 0
    max_simulated_depth: int = 0
    rng: random.Random = field(default_factory=random.Random, repr=False)
    _updates: dict = field(default_factory=dict, repr=False)

    def nodes(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def __len__(self):
        return sum(1 for _ in self.nodes())

    @property
    def complete(self) -> bool:
        return self.root.exhausted


def solo_baseline(problem: MaCoppProblem, planner: ConformantPlanner) -> Optional[Fraction]:
    """Human's optimal conformant cost from her initial belief (None if unsolvable)."""
    return planner.cost(problem.initial_belief)


def make_planner(problem: MaCoppProblem, config: SearchConfig) -> ConformantPlanner:
    return ConformantPlanner(problem.human_goal, problem.human_plan_actions, config.planner_node_budget)


def new_tree(problem: MaCoppProblem, config: SearchConfig, planner: Optional[ConformantPlanner] = None,
             solo_cost: Optional[Fraction] = None) -> UtilityTree:
    planner = planner or make_planner(problem, config)
    if solo_cost is None:
        solo_cost = solo_baseline(problem, planner)
    root = Node(problem.initial_state, problem.initial_belief)
    tree = UtilityTree(root, problem, config, solo_cost, planner, rng=random.Random(config.seed))
    _init_untried(tree, root)
    return tree


def _init_untried(tree: UtilityTree, node: Node) -> None:
    # children at depth L would never be simulated, so nodes at L-1 stay leaves
    if node.depth >= tree.config.budget - 1:
        node.untried = []
    else:
        node.untried = [a for a in tree.problem.robot_actions if a.pre <= node.state]
        tree.rng.shuffle(node.untried)
    if not node.untried:
        _mark_exhausted(node)


def _mark_exhausted(node: Optional[Node]) -> None:
    while node is not None and not node.untried and all(c.exhausted for c in node.children):
        node.exhausted = True
        node = node.parent


def uct_value(node: Node, parent_visits: int, exploration: float, epsilon: float) -> float:
    """utility/(visits+eps) + C*sqrt(ln(n)/visits); unvisited nodes score +inf."""
    if node.visits == 0:
        return math.inf
    exploit = node.utility / (node.visits + epsilon)
    if parent_visits <= 1:
        return exploit
    return exploit + exploration * math.sqrt(math.log(parent_visits) / node.visits)


def uct_select(tree: UtilityTree) -> tuple[Node, int]:
    """Descend by UCT to a node with untried actions (or a dead end)."""
    cfg = tree.config
    node = tree.root
    while not node.untried and node.depth < cfg.budget:
        live = [c for c in node.children if not c.exhausted]
        if not live:
            break
        n = tree.iterations_run if cfg.global_uct_count else node.visits
        best, best_val = None, -math.inf
        for child in sorted(live, key=lambda c: c.action.key):
            val = uct_value(child, n, cfg.exploration, cfg.uct_epsilon)
            if val > best_val:
                best, best_val = child, val
        node = best
    return node, node.depth


def _update(tree: UtilityTree, belief: Belief, obs: ObservationSymbol) -> Belief:
    key = (belief, obs)
    cached = tree._updates.get(key)
    if cached is None:
        problem = tree.problem
        cached = tree._updates[key] = belief_update(belief, problem.robot_belief_set, obs, problem.sensor)
    return cached


def child_for(tree: UtilityTree, node: Node, action: GroundAction) -> Node:
    """Build (without attaching) the successor node of ``node`` under ``action``."""
    state = apply(node.state, action)
    obs = observe(action, state, tree.problem.sensor)
    belief = _update(tree, node.belief, obs)
    charged = 0 if (tree.config.count_observable_only and obs.is_null) else 1
    return Node(state, belief, node.depth + 1, action, obs, node, node.penalty_steps + charged)


def expand(tree: UtilityTree, node: Node, depth: int) -> tuple[Node, int]:
    if not node.untried:
        raise ValueError("node has no untried robot actions")
    action = node.untried.pop(0)
    child = child_for(tree, node, action)
    node.children.append(child)
    _init_untried(tree, child)
    return child, depth + 1


def simulate(tree: UtilityTree, child: Node) -> SimResult:
    """Run the human's planner from the child's belief and score it."""
    if child.sim is not None:
        return child.sim
    cfg = tree.config
    plan = tree.planner(child.belief)
    solo = tree.solo_cost
    cheaper = plan is not None and (solo is None or plan.cost < solo)
    if cheaper and validate_plan(plan, child.belief, tree.problem.human_goal):
        reward = cfg.reward_const
        cost = cfg.alpha * child.penalty_steps + (1 - cfg.alpha) * plan.cost
        result = SimResult(plan, True, reward, cost)
    else:
        result = SimResult(plan, False, Fraction(0), cfg.cost_const)
    child.sim = result
    return result


def backpropagate(node: Node, value: float) -> None:
    while node is not None:
        node.utility += value
        node.visits += 1
        node = node.parent


def run_iteration(tree: UtilityTree) -> bool:
    """One select/expand/simulate/backpropagate round; False once the tree is exhausted."""
    if tree.root.exhausted:
        return False
    node, depth = uct_select(tree)
    tree.iterations_run += 1
    if not node.untried:
        # dead end: nothing left to expand below this node
        _mark_exhausted(node)
        return True
    child, child_depth = expand(tree, node, depth)
    cfg = tree.config
    if child_depth < cfg.budget:
        sim = simulate(tree, child)
        value = sim.reward - sim.cost * cfg.backprop_cost_scale
        backpropagate(child, float(value))
        tree.backpropagations += 1
        tree.max_simulated_depth = max(tree.max_simulated_depth, child_depth)
    return True


def build_utility_tree(problem: MaCoppProblem, config: SearchConfig,
                       planner: Optional[ConformantPlanner] = None,
                       solo_cost: Optional[Fraction] = None) -> UtilityTree:
    """Grow the utility tree for ``config.iterations`` rounds (fewer if exhausted)."""
    tree = new_tree(problem, config, planner, solo_cost)
    for _ in range(config.iterations):
        if not run_iteration(tree):
            break
    return tree


# -- extraction ----------------------------------------------------------------

@dataclass
class JointPlan:
    robot_prefix: tuple[GroundAction, ...]
    human_suffix: ConformantPlan
    solo_cost: Optional[Fraction]
    penalty_steps: int
    objective: Fraction
    observations: tuple[ObservationSymbol, ...] = ()
    belief_sizes: tuple[int, ...] = ()
    final_belief: Optional[Belief] = None

    @property
    def k(self) -> int:
        return len(self.robot_prefix)

    @property
    def T(self) -> int:
        return self.k + len(self.human_suffix)

    @property
    def suffix_cost(self) -> Fraction:
        return self.human_suffix.cost

    @property
    def cost_differential(self) -> Optional[Fraction]:
        if self.solo_cost is None:
            return None
        return self.suffix_cost - self.solo_cost


def objective(alpha: Fraction, steps: int, human_cost: Fraction) -> Fraction:
    """alpha * robot steps + (1 - alpha) * human cost."""
    return alpha * steps + (1 - alpha) * human_cost


def restricted_nodes(tree: UtilityTree, n_best: int) -> list[Node]:
    """Nodes reachable from the root through each node's ``n_best`` best children."""
    out, stack = [], [tree.root]
    while stack:
        node = stack.pop()
        out.append(node)
        ranked = sorted(node.children, key=lambda c: (-c.utility, -c.visits, c.action.key))
        stack.extend(reversed(ranked[:n_best]))
    return out


def node_is_feasible(tree: UtilityTree, node: Node) -> bool:
    if node.depth == 0 or node.depth >= tree.config.budget:
        return False
    sim = simulate(tree, node)
    return sim.feasible


def plan_for_node(tree: UtilityTree, node: Node) -> JointPlan:
    sim = simulate(tree, node)
    path = node.path()
    return JointPlan(
        robot_prefix=tuple(n.action for n in path[1:]),
        human_suffix=sim.plan,
        solo_cost=tree.solo_cost,
        penalty_steps=node.penalty_steps,
        objective=objective(tree.config.alpha, node.penalty_steps, sim.plan.cost),
        observations=tuple(n.observation for n in path[1:]),
        belief_sizes=tuple(len(n.belief) for n in path),
        final_belief=node.belief,
    )


def extract_joint_plan(tree: UtilityTree, n_best: Optional[int] = None) -> Optional[JointPlan]:
    """Best feasible joint plan in the n-best restriction of the tree, or None."""
    n_best = n_best or tree.config.n_best
    best, best_key = None, None
    for node in restricted_nodes(tree, n_best):
        if not node_is_feasible(tree, node):
            continue
        value = objective(tree.config.alpha, node.penalty_steps, node.sim.plan.cost)
        key = (value, node.prefix_key())
        if best_key is None or key < best_key:
            best, best_key = node, key
    return None if best is None else plan_for_node(tree, best)


def check_constraints(plan: JointPlan, problem: MaCoppProblem, config: SearchConfig,
                      planner: Optional[ConformantPlanner] = None) -> list[str]:
    """Re-derive the joint plan from scratch and list violated constraints."""
    problem_planner = planner or make_planner(problem, config)
    violations = []
    state, belief = problem.initial_state, problem.initial_belief
    for a in plan.robot_prefix:
        state = apply(state, a)
        belief = belief_update(belief, problem.robot_belief_set, observe(a, state, problem.sensor),
                               problem.sensor)
    solo = problem_planner.cost(problem.initial_belief)
    if solo is not None and not plan.suffix_cost - solo < 0:
        violations.append(f"cost differential {plan.suffix_cost - solo} is not negative")
    fresh = ConformantPlanner(problem.human_goal, problem.human_plan_actions, config.planner_node_budget)
    best_from_bk = fresh.cost(belief)
    if best_from_bk is None or best_from_bk != plan.suffix_cost:
        violations.append(f"suffix cost {plan.suffix_cost} differs from optimal cost {best_from_bk} from B_k")
    if not validate_plan(plan.human_suffix, belief, problem.human_goal):
        violations.append("human suffix is not a valid conformant plan from B_k")
    if not plan.k < config.budget:
        violations.append(f"prefix length {plan.k} is not below budget {config.budget}")
    if plan.solo_cost != solo:
        violations.append("recorded solo cost does not match recomputation")
    return violations


def tree_to_json(tree: UtilityTree) -> dict:
    ids = {}
    nodes = []
    for node in tree.nodes():
        ids[id(node)] = len(ids)
        sim = node.sim
        nodes.append({
            "id": ids[id(node)],
            "parent": ids[id(node.parent)] if node.parent is not None else None,
            "depth": node.depth,
            "action": node.action.label if node.action else None,
            "observation": node.observation.token if node.observation else None,
            "belief_size": len(node.belief),
            "utility": round(node.utility, 9),
            "visits": node.visits,
            "human_cost": None if sim is None or sim.plan is None else str(sim.plan.cost),
            "feasible": None if sim is None else sim.feasible,
            "exhausted": node.exhausted,
        })
    return {
        "problem": tree.problem.name,
        "iterations_run": tree.iterations_run,
        "backpropagations": tree.backpropagations,
        "solo_cost": None if tree.solo_cost is None else str(tree.solo_cost),
        "complete": tree.complete,
        "nodes": nodes,
    }


def dump_tree(tree: UtilityTree, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(tree_to_json(tree), fh, indent=1, sort_keys=True)
        fh.write("\n")
