"""Acceptance criteria, one test each; every test records a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""
import json
import random
import subprocess
import sys
import time
from dataclasses import replace
from fractions import Fraction

import pytest

from conftest import record
from test_conformant import exhaustive_optimum
from macopp import battery, harness, instances
from macopp.conformant import conformant_plan, validate_plan
from macopp.mcts import build_utility_tree, check_constraints, extract_joint_plan, make_planner
from macopp.model import (
    Belief, SearchConfig, SensorModel, apply, belief_update, human_step_update, observe,
)
from macopp.oracle import brute_force_oracle

BATTERY = battery.battery(50)


def branching(problem):
    """Largest number of applicable robot actions over states reachable by any agent."""
    acts = problem.robot_actions + problem.human_actions
    seen, frontier, widest = {problem.initial_state}, [problem.initial_state], 0
    while frontier:
        s = frontier.pop()
        widest = max(widest, sum(a.pre <= s for a in problem.robot_actions))
        for a in acts:
            if a.pre <= s:
                s2 = apply(s, a)
                if s2 not in seen:
                    seen.add(s2)
                    frontier.append(s2)
    return widest, len(seen)


def test_1_oracle_equivalence():
    start = time.perf_counter()
    rows, ok = [], True
    for inst in instances.SMALL:
        p = inst.load()
        width, n_states = branching(p)
        if not (width <= 6 and n_states <= 200 and inst.budget - 1 <= 4):
            continue  # outside the size limits of the criterion
        cfg = SearchConfig(iterations=20000, n_best=width, budget=inst.budget)
        plan = extract_joint_plan(build_utility_tree(p, cfg))
        mcts = plan.objective if plan else None
        oracle = brute_force_oracle(p, cfg).objective
        rows.append(f"{inst.name}={mcts}/{oracle}")
        ok &= mcts == oracle
    elapsed = time.perf_counter() - start
    ok &= len(rows) >= 5 and elapsed < 120
    record(1, "oracle equivalence", ok, f"{len(rows)} instances in {elapsed:.1f}s: " + " ".join(rows))
    assert ok


def test_2_constraint_suite():
    violations, plans = [], 0
    for g in BATTERY:
        p = g.load()
        cfg = SearchConfig(iterations=3000, budget=g.budget)
        planner = make_planner(p, cfg)
        plan = extract_joint_plan(build_utility_tree(p, cfg, planner))
        if plan is None:
            continue
        plans += 1
        violations += [f"{g.name}: {v}" for v in check_constraints(plan, p, cfg, planner)]
    ok = not violations and plans > 0
    record(2, "constraints on every returned plan", ok,
           f"{len(BATTERY)} instances, {plans} plans, {len(violations)} violations")
    assert ok, violations[:5]


def _trajectory(problem, rng, robot_steps, human_steps):
    """Random joint execution; yields (true projected state, belief, observation) per step."""
    state, belief = problem.initial_state, problem.initial_belief
    yield problem.project(state), belief, None, belief
    for _ in range(robot_steps):
        options = [a for a in problem.robot_actions if a.pre <= state]
        if not options:
            break
        a = rng.choice(options)
        state = apply(state, a)
        obs = observe(a, state, problem.sensor)
        prev, belief = belief, belief_update(belief, problem.robot_belief_set, obs, problem.sensor)
        yield problem.project(state), belief, obs, prev
    planned = {a.key: a for a in problem.human_plan_actions}
    for _ in range(human_steps):
        options = [a for a in problem.human_actions if a.pre <= state]
        if not options:
            break
        a = rng.choice(options)
        state = apply(state, a)
        obs = observe(a, state, problem.sensor)
        prev, belief = belief, human_step_update(belief, planned[a.key], obs, problem.sensor)
        yield problem.project(state), belief, obs, prev


def test_3_belief_soundness():
    rng = random.Random(2024)
    families = {f: [i for i in instances.BUNDLED.values() if i.family == f] for f in instances.DOMAIN_FAMILIES}
    unsound = identity = steps = 0
    for family, members in families.items():
        loaded = [(i, i.load()) for i in members]
        for n in range(1000):
            inst, p = loaded[n % len(loaded)]
            for truth, belief, obs, prev in _trajectory(p, rng, rng.randint(0, inst.budget - 1), rng.randint(0, 6)):
                steps += 1
                unsound += truth not in belief
                identity += obs is not None and obs.is_null and belief != prev
    ok = unsound == 0 and identity == 0
    record(3, "belief soundness", ok,
           f"3000 trajectories, {steps} steps, {unsound} unsound, {identity} null-identity failures")
    assert ok


def test_4_conformant_validity():
    checked = optimal_checked = bad = 0
    for inst in instances.SMALL:
        p = inst.load()
        tree = build_utility_tree(p, SearchConfig(iterations=20000, budget=inst.budget))
        beliefs = {n.belief for n in tree.nodes()}
        for b in beliefs:
            plan = conformant_plan(b, p.human_goal, p.human_plan_actions)
            if plan is None:
                continue
            checked += 1
            bad += not validate_plan(plan, b, p.human_goal)
            bad += not all(validate_plan(plan.steps, Belief([s]), p.human_goal) for s in b)
        if inst.family != "scout":  # scout beliefs take seconds each to enumerate
            for b in beliefs:
                plan = conformant_plan(b, p.human_goal, p.human_plan_actions)
                optimal_checked += 1
                bad += (plan.cost if plan is not None else None) != exhaustive_optimum(b, p.human_goal, p.human_plan_actions, 8)
        b0 = p.initial_belief
        optimal_checked += 1
        bad += conformant_plan(b0, p.human_goal, p.human_plan_actions).cost != exhaustive_optimum(
            b0, p.human_goal, p.human_plan_actions, 8)
    ok = bad == 0 and checked > 0
    record(4, "conformant validity and optimality", ok,
           f"{checked} plans validated per state, {optimal_checked} optimality checks, {bad} violations")
    assert ok


def test_5_usar_mechanism():
    start = time.perf_counter()
    p = instances.get("usar").load()
    cfg = SearchConfig(iterations=10000)
    result = harness.run_problem(p, cfg)
    plan = result.plan
    decrease = result.metrics.percent_decrease
    sizes = plan.belief_sizes if plan else ()
    collapsing = [plan.robot_prefix[i] for i in range(plan.k)
                  if not plan.observations[i].is_null and sizes[i + 1] < sizes[i]] if plan else []
    flipped = None
    if collapsing:
        name = collapsing[0].name
        rules = [r for r in p.sensor.rules if r.pattern.name != name]
        muted = replace(p, sensor=SensorModel(rules, p.sensor.default, p.sensor.null))
        flipped = harness.run_problem(muted, cfg).metrics.status
    elapsed = time.perf_counter() - start
    ok = (decrease is not None and decrease > 50 and bool(collapsing) and flipped == "no-assistance"
          and elapsed < 60)
    record(5, "USAR mechanism", ok,
           f"decrease {float(decrease or 0):.1f}%, collapsing action "
           f"{collapsing[0].label if collapsing else None}, muted run {flipped}, {elapsed:.1f}s")
    assert ok


def test_6_budget_compliance():
    deepest, longest, plans = 0, 0, 0
    for g in BATTERY:
        p = g.load()
        cfg = SearchConfig(iterations=1500, budget=15)
        tree = build_utility_tree(p, cfg)
        deepest = max(deepest, tree.max_simulated_depth, max(n.depth for n in tree.nodes()))
        plan = extract_joint_plan(tree)
        if plan:
            plans += 1
            longest = max(longest, plan.k)
    ok = deepest < 15 and longest < 15
    record(6, "L = 15 budget", ok, f"deepest node {deepest}, longest prefix {longest}, {plans} plans")
    assert ok


def test_7_determinism(tmp_path):
    args = [sys.executable, "-m", "macopp.cli", "plan", "--instance", "usar", "--iterations", "3000",
            "--seed", "11"]
    outs = [subprocess.run(args, capture_output=True, check=False).stdout for _ in range(2)]
    p = instances.get("usar-micro").load()
    cfg = SearchConfig(iterations=500, budget=5, seed=5)
    same_process = [harness.format_json(harness.run_problem(p, cfg)).encode() for _ in range(2)]
    ok = outs[0] == outs[1] and len(outs[0]) > 0 and same_process[0] == same_process[1]
    record(7, "byte-identical JSON", ok, f"{len(outs[0])} bytes per CLI report")
    assert ok


def test_8_alpha_sensitivity():
    p = instances.get("usar").load()
    planner = make_planner(p, SearchConfig())
    details, ok = [], True
    for alpha in (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1)):
        result = harness.run_problem(p, SearchConfig(alpha=alpha, iterations=10000), planner=planner)
        report = json.loads(harness.format_json(result))
        if report["status"] != "feasible":
            ok = False
            details.append(f"{alpha}: none")
            continue
        again = harness.metrics_from_report(report)
        reported = Fraction(report["metrics"]["objective_exact"])
        expected = alpha * again["k"] + (1 - alpha) * again["joint_human_cost"]
        ok &= reported == expected == again["objective"]
        details.append(f"{alpha}: {reported}")
    record(8, "alpha sensitivity", ok, ", ".join(details))
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s"]))
