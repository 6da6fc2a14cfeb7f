"""Bundled benchmark instances."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

HERE = Path(__file__).resolve().parent


@dataclass(frozen=True)
class Instance:
    name: str
    family: str
    problem: str
    sensors: str = "sensors.sexp"
    budget: int = 15
    small: bool = False

    @property
    def directory(self) -> Path:
        return HERE / self.family

    @property
    def paths(self) -> dict:
        d = self.directory
        return {
            "domain_r": d / "domain-r.pddl",
            "domain_h": d / "domain-h.pddl",
            "problem": d / self.problem,
            "sensors": d / self.sensors,
        }

    def load(self):
        from ..pddl import load_problem
        p = self.paths
        return load_problem(p["domain_r"], p["domain_h"], p["problem"], p["sensors"])


BUNDLED = {i.name: i for i in [
    Instance("usar", "usar", "problem.pddl"),
    Instance("usar-no-show", "usar", "problem.pddl", sensors="sensors-no-show.sexp"),
    Instance("driverlog", "driverlog", "problem.pddl"),
    # small enough for exhaustive enumeration of robot prefixes (depth <= 4)
    Instance("usar-micro", "usar", "problem-micro.pddl", budget=5, small=True),
    Instance("usar-micro-no-show", "usar", "problem-micro.pddl", sensors="sensors-no-show.sexp",
             budget=5, small=True),
    Instance("usar-far", "usar", "problem-far.pddl", budget=5, small=True),
    Instance("scout-micro", "scout", "problem-micro.pddl", budget=5, small=True),
    Instance("scout-door", "scout", "problem-door.pddl", budget=5, small=True),
    Instance("driverlog-mini", "driverlog", "problem-mini.pddl", budget=5, small=True),
]}

SMALL = [i for i in BUNDLED.values() if i.small]
DOMAIN_FAMILIES = ("usar", "scout", "driverlog")


def get(name: str) -> Instance:
    try:
        return BUNDLED[name]
    except KeyError:
        raise KeyError(f"unknown bundled instance {name!r}; choose from {sorted(BUNDLED)}") from None
