"""End-to-end runs: parse, build the utility tree, extract, measure, report."""
from __future__ import annotations

import csv
import io
import json
import os
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .conformant import ConformantPlanner
from .mcts import (
    JointPlan, UtilityTree, build_utility_tree, extract_joint_plan, make_planner, objective,
)
from .model import (
    Belief, MaCoppProblem, SearchConfig, apply, belief_update, human_step_update, observe,
)
from .oracle import OracleResult, brute_force_oracle
from .pddl import DEFAULT_BELIEF_CAP, load_problem

CONFIG_ENV = "MACOPP_CONFIG"
CSV_HEADER = ["problem", "alpha", "solo_cost", "joint_human_cost", "pct_decrease",
              "joint_length", "iterations", "time_s"]

EXIT_FEASIBLE = 0
EXIT_ERROR = 1
EXIT_NO_ASSISTANCE = 2


@dataclass
class RunConfig:
    domain_r: Path
    domain_h: Path
    problem: Path
    sensors: Path
    search: SearchConfig = field(default_factory=SearchConfig)
    output_format: str = "json"
    oracle: bool = False
    oracle_depth: int = 4
    belief_cap: int = DEFAULT_BELIEF_CAP

    def __post_init__(self):
        for name in ("domain_r", "domain_h", "problem", "sensors"):
            path = Path(getattr(self, name))
            if not path.is_file():
                raise FileNotFoundError(f"{name.replace('_', '-')} file not found: {path}")
            setattr(self, name, path)
        if self.output_format not in ("json", "csv"):
            raise ValueError(f"unknown output format {self.output_format!r}")


@dataclass
class RunMetrics:
    problem: str
    alpha: Fraction
    solo_cost: Optional[Fraction]
    joint_human_cost: Optional[Fraction]
    k: Optional[int]
    joint_length: Optional[int]
    iterations: int
    wall_time: float
    objective: Optional[Fraction]
    feasible: bool

    @property
    def percent_decrease(self) -> Optional[Fraction]:
        if not self.feasible or not self.solo_cost:
            return None
        return 100 * (self.solo_cost - self.joint_human_cost) / self.solo_cost

    @property
    def status(self) -> str:
        return "feasible" if self.feasible else "no-assistance"


@dataclass
class RunResult:
    problem: MaCoppProblem
    config: SearchConfig
    metrics: RunMetrics
    plan: Optional[JointPlan]
    tree: UtilityTree
    trace: dict
    oracle: Optional[OracleResult] = None

    @property
    def exit_code(self) -> int:
        return EXIT_FEASIBLE if self.metrics.feasible else EXIT_NO_ASSISTANCE


def load_search_config(path: Optional[str | Path] = None, **overrides) -> SearchConfig:
    """SearchConfig from a JSON file (or ``$MACOPP_CONFIG``) with overrides applied."""
    values: dict = {}
    path = path or os.environ.get(CONFIG_ENV)
    if path:
        with open(path, encoding="utf-8") as fh:
            values.update(json.load(fh))
    values.update({k: v for k, v in overrides.items() if v is not None})
    for key in ("alpha", "reward_const", "cost_const", "backprop_cost_scale"):
        if isinstance(values.get(key), str):
            values[key] = Fraction(values[key])
    unknown = set(values) - set(SearchConfig.__dataclass_fields__)
    if unknown:
        raise ValueError(f"unknown search settings: {sorted(unknown)}")
    return SearchConfig(**values)


def build_trace(problem: MaCoppProblem, plan: Optional[JointPlan]) -> dict:
    """Replay a joint plan in the true world, tracking the human's belief."""
    sensor = problem.sensor
    state, belief = problem.initial_state, problem.initial_belief
    trace = {"initial_belief_size": len(belief), "robot": [], "human": []}
    if plan is None:
        return trace
    for i, action in enumerate(plan.robot_prefix, 1):
        state = apply(state, action)
        obs = observe(action, state, sensor)
        belief = belief_update(belief, problem.robot_belief_set, obs, sensor)
        trace["robot"].append({
            "step": i, "action": action.label, "observation": obs.token,
            "null": obs.is_null, "belief_size": len(belief),
        })
    base = {a.key: a for a in problem.human_actions}
    for i, planned in enumerate(plan.human_suffix.steps, len(plan.robot_prefix) + 1):
        action = base[planned.key]
        state = apply(state, action)
        obs = observe(action, state, sensor)
        belief = human_step_update(belief, planned, obs, sensor)
        trace["human"].append({
            "step": i, "action": action.label, "cost": str(planned.cost),
            "observation": obs.token, "belief_size": len(belief),
        })
    trace["goal_reached"] = problem.human_goal <= state
    return trace


def run_problem(problem: MaCoppProblem, search: SearchConfig, oracle: bool = False,
                oracle_depth: int = 4, planner: Optional[ConformantPlanner] = None) -> RunResult:
    planner = planner or make_planner(problem, search)
    solo = planner.cost(problem.initial_belief)
    start = time.perf_counter()
    tree = build_utility_tree(problem, search, planner, solo)
    plan = extract_joint_plan(tree)
    wall = time.perf_counter() - start
    metrics = RunMetrics(
        problem=problem.name,
        alpha=search.alpha,
        solo_cost=solo,
        joint_human_cost=plan.suffix_cost if plan else None,
        k=plan.k if plan else None,
        joint_length=plan.T if plan else None,
        iterations=tree.iterations_run,
        wall_time=wall,
        objective=plan.objective if plan else None,
        feasible=plan is not None,
    )
    oracle_result = brute_force_oracle(problem, search, max_depth=oracle_depth) if oracle else None
    return RunResult(problem, search, metrics, plan, tree, build_trace(problem, plan), oracle_result)


def run(config: RunConfig) -> RunResult:
    problem = load_problem(config.domain_r, config.domain_h, config.problem, config.sensors,
                           config.belief_cap)
    return run_problem(problem, config.search, config.oracle, config.oracle_depth)


# -- reports -------------------------------------------------------------------

def _num(x):
    if x is None:
        return None
    x = Fraction(x)
    return int(x) if x.denominator == 1 else float(x)


def _exact(x) -> Optional[str]:
    return None if x is None else str(Fraction(x))


def report_dict(result: RunResult, include_timing: bool = False) -> dict:
    m, cfg, plan = result.metrics, result.config, result.plan
    config = {k: (str(v) if isinstance(v, Fraction) else v) for k, v in asdict(cfg).items()}
    out = {
        "problem": m.problem,
        "status": m.status,
        "config": config,
        "metrics": {
            "solo_cost": _num(m.solo_cost),
            "joint_human_cost": _num(m.joint_human_cost),
            "pct_decrease": _num(m.percent_decrease),
            "joint_length": m.joint_length,
            "k": m.k,
            "penalty_steps": plan.penalty_steps if plan else None,
            "iterations": m.iterations,
            "objective": _num(m.objective),
            "objective_exact": _exact(m.objective),
            "cost_differential": _exact(plan.cost_differential) if plan else None,
            "feasible": m.feasible,
        },
        "trace": result.trace,
        "tree": {
            "nodes": len(result.tree),
            "iterations_run": result.tree.iterations_run,
            "backpropagations": result.tree.backpropagations,
            "max_simulated_depth": result.tree.max_simulated_depth,
            "complete": result.tree.complete,
        },
    }
    if include_timing:
        out["metrics"]["time_s"] = round(m.wall_time, 6)
    if result.oracle is not None:
        o = result.oracle
        out["oracle"] = {
            "objective_exact": _exact(o.objective),
            "prefix": [a.label for a in o.prefix] if o.prefix else None,
            "human_cost": _exact(o.human_cost),
            "prefixes_enumerated": o.nodes,
            "agrees": o.objective == m.objective,
        }
    return out


def format_json(result: RunResult, include_timing: bool = False) -> str:
    return json.dumps(report_dict(result, include_timing), indent=2, sort_keys=True) + "\n"


def csv_row(result: RunResult) -> list:
    m = result.metrics
    fmt = lambda x: "" if x is None else f"{float(x):g}"
    return [
        m.problem,
        fmt(m.alpha),
        fmt(m.solo_cost),
        fmt(m.joint_human_cost),
        "" if m.percent_decrease is None else f"{float(m.percent_decrease):.2f}",
        "" if m.joint_length is None else str(m.joint_length),
        str(m.iterations),
        f"{m.wall_time:.3f}",
    ]


def format_csv(results, header: bool = True) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if header:
        writer.writerow(CSV_HEADER)
    for r in results:
        writer.writerow(csv_row(r))
    return buf.getvalue()


def emit_report(result: RunResult, fmt: str = "json", include_timing: bool = False) -> str:
    if fmt == "json":
        return format_json(result, include_timing)
    if fmt == "csv":
        return format_csv([result])
    raise ValueError(f"unknown report format {fmt!r}")


def metrics_from_report(report: dict) -> dict:
    """Recompute the headline metrics from a JSON report's trace alone."""
    trace = report["trace"]
    alpha = Fraction(report["config"]["alpha"])
    if not trace["robot"]:
        return {"feasible": False}
    k = len(trace["robot"])
    charged = k
    if report["config"].get("count_observable_only"):
        charged = sum(1 for s in trace["robot"] if not s["null"])
    human_cost = sum((Fraction(s["cost"]) for s in trace["human"]), Fraction(0))
    solo = Fraction(report["metrics"]["solo_cost"])
    return {
        "feasible": True,
        "k": k,
        "joint_human_cost": human_cost,
        "joint_length": k + len(trace["human"]),
        "objective": objective(alpha, charged, human_cost),
        "pct_decrease": 100 * (solo - human_cost) / solo if solo else None,
    }
