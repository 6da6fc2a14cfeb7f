"""Seeded random instances over the bundled domains, for property checks."""
from __future__ import annotations

import random
from dataclasses import dataclass

from . import instances
from .model import MaCoppProblem
from .pddl import build_problem, parse_domain, parse_problem, parse_sensor


@dataclass
class GeneratedInstance:
    name: str
    family: str
    problem_text: str
    sensor_text: str
    budget: int

    def load(self) -> MaCoppProblem:
        d = instances.HERE / self.family
        dr = parse_domain((d / "domain-r.pddl").read_text(), "domain-r.pddl")
        dh = parse_domain((d / "domain-h.pddl").read_text(), "domain-h.pddl")
        spec = parse_problem(self.problem_text, [dr, dh], self.name)
        sensor = parse_sensor(self.sensor_text, [dr, dh], self.name + ".sensors")
        return build_problem(dr, dh, spec, sensor)


def _star(hub: str, rooms) -> str:
    return " ".join(f"(adjacent {hub} {r}) (adjacent {r} {hub})" for r in rooms)


def _usar(rng: random.Random, name: str) -> tuple[str, str]:
    rooms = [f"room{c}" for c in "abcd"[: rng.randint(2, 3)]]
    locations = ["corridor"] + rooms
    candidates = rng.sample(rooms, rng.randint(2, len(rooms)))
    truth = rng.choice(candidates)
    oneof = " ".join(f"(item-at medkit {r})" for r in sorted(candidates))
    problem = f"""(define (problem {name})
  (:domain usar)
  (:objects {' '.join(locations)} - location)
  (:init (at-h corridor) (at-r {rng.choice(locations)}) (has-wagon) (visible corridor)
    {_star('corridor', rooms)}
    (item-at extinguisher {rng.choice(rooms)})
    (oneof {oneof}))
  (:true-init (item-at medkit {truth}))
  (:goal (and (holding medkit))))
"""
    rules = ["(default quiet null)", "(rule pick robot-busy)", "(rule inspect robot-busy)"]
    if rng.random() < 0.8:
        rules += ["(rule show-wagon (condition (in-wagon medkit)) wagon-shows-medkit)",
                  "(rule show-wagon wagon-shows-no-medkit)"]
    rules += [f"(rule (drop-wagon {l}) wagon-left-{l})" for l in locations]
    rules += ["(rule move-h human-moved)", "(rule search (condition (holding medkit)) medkit-in-hand)",
              "(rule search nothing-found)"]
    return problem, "(sensor gen\n  " + "\n  ".join(rules) + ")\n"


def _scout(rng: random.Random, name: str) -> tuple[str, str]:
    rooms = [f"room{c}" for c in "abcd"[: rng.randint(2, 3)]]
    locations = ["corridor"] + rooms
    candidates = rng.sample(rooms, rng.randint(2, len(rooms)))
    truth = rng.choice(candidates)
    doors, unknown, true_open = [], [], []
    for r in rooms:
        u = rng.random()
        if u < 0.5:
            doors.append(f"(open {r})")
        elif u < 0.8:
            unknown.append(f"(unknown (open {r}))")
            if rng.random() < 0.5:
                true_open.append(f"(open {r})")
    oneof = " ".join(f"(item-at medkit {r})" for r in sorted(candidates))
    problem = f"""(define (problem {name})
  (:domain scout)
  (:objects {' '.join(locations)} - location)
  (:init (at-h corridor) (at-r {rng.choice(locations)}) (open corridor) {' '.join(doors)}
    {_star('corridor', rooms)}
    {' '.join(unknown)}
    (oneof {oneof}))
  (:true-init (item-at medkit {truth}) {' '.join(true_open)})
  (:goal (and (holding medkit))))
"""
    rules = ["(null silence)"]
    for r in rooms:
        if rng.random() < 0.85:
            rules += [f"(rule (report {r}) (condition (item-at medkit {r})) medkit-in-{r})",
                      f"(rule (report {r}) no-medkit-in-{r})"]
    rules.append("(rule report nothing-to-report)")
    rules += [f"(rule (unlock {l}) click-{l})" for l in locations]
    rules += ["(rule move-h human-moved)", "(rule force-door door-forced)",
              "(rule search (condition (holding medkit)) medkit-in-hand)", "(rule search nothing-found)"]
    return problem, "(sensor gen\n  " + "\n  ".join(rules) + ")\n"


def _driverlog(rng: random.Random, name: str) -> tuple[str, str]:
    sites = [f"s{i}" for i in range(rng.randint(2, 3))]
    links = " ".join(f"(link {a} {b}) (link {b} {a})" for a, b in zip(sites, sites[1:]))
    goal_site = rng.choice(sites)
    candidates = sorted(rng.sample(sites, 2))
    truth = rng.choice(candidates)
    problem = f"""(define (problem {name})
  (:domain driverlog)
  (:objects {' '.join(sites)} - site p1 - parcel)
  (:init (at-h {rng.choice(sites)}) (at-r {rng.choice(sites)}) {links}
    (oneof (at-p p1 {candidates[0]}) (at-p p1 {candidates[1]})))
  (:true-init (at-p p1 {truth}))
  (:goal (and (at-p p1 {goal_site}))))
"""
    rules = ["(default static null)", "(rule load-truck truck-loading)"]
    rules += [f"(rule (unload-truck ? {s}) truck-unloaded-{s})" for s in sites]
    if rng.random() < 0.85:
        rules += [f"(rule (radio p1 {s}) (condition (at-p p1 {s})) p1-at-{s})" for s in sites]
    rules += ["(rule (radio p1 ?) p1-not-here)", "(rule walk human-walked)",
              "(rule pick-up (condition (carrying p1)) has-p1)", "(rule pick-up empty-handed)",
              "(rule put-down put-down)"]
    return problem, "(sensor gen\n  " + "\n  ".join(rules) + ")\n"


_FAMILIES = {"usar": _usar, "scout": _scout, "driverlog": _driverlog}


def random_instance(seed: int, family: str | None = None, budget: int | None = None) -> GeneratedInstance:
    rng = random.Random(seed)
    family = family or rng.choice(sorted(_FAMILIES))
    name = f"gen-{family}-{seed}"
    problem, sensors = _FAMILIES[family](rng, name)
    return GeneratedInstance(name, family, problem, sensors, budget or rng.randint(3, 5))


def battery(n: int = 50, start_seed: int = 0, budget: int | None = None) -> list[GeneratedInstance]:
    return [random_instance(start_seed + i, budget=budget) for i in range(n)]
