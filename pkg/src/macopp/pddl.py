"""Reader for the dual domain files, problem files and sensor files.

All three formats are s-expressions.  See ``docs/formats.md`` for the
grammars.  Every parse error carries the ``line:column`` of the offending
token.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .model import (
    ActionPattern, Actor, Belief, ConditionalEffect, Fluent, GroundAction,
    MaCoppProblem, ModelError, ObservationSymbol, SensorModel, SensorRule,
    is_coarse,
)

DEFAULT_BELIEF_CAP = 100_000
OBJECT_TYPE = "object"


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0, source: str = ""):
        self.line, self.col, self.source = line, col, source
        where = f"{source}:" if source else ""
        super().__init__(f"{where}{line}:{col}: {message}")


class ResourceError(Exception):
    """An expansion exceeded its configured cap."""


# -- lexer / reader ------------------------------------------------------------

class Symbol(str):
    """String token that remembers where it came from."""
    line = 0
    col = 0

    def __new__(cls, text, line=0, col=0):
        obj = super().__new__(cls, text)
        obj.line, obj.col = line, col
        return obj


class SList(list):
    line = 0
    col = 0


_TOKEN = re.compile(r"\s+|;[^\n]*|\(|\)|[^\s();]+")


def tokenize(text: str, source: str = "") -> list[Symbol]:
    tokens = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # pragma: no cover - the pattern accepts any character
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1, source)
        chunk = m.group()
        if not chunk.isspace() and not chunk.startswith(";"):
            tokens.append(Symbol(chunk.lower(), line, pos - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    return tokens


def read_sexprs(text: str, source: str = "") -> list:
    """Parse every top-level s-expression in ``text``."""
    stack: list[SList] = []
    top: list = []
    for tok in tokenize(text, source):
        if tok == "(":
            lst = SList()
            lst.line, lst.col = tok.line, tok.col
            stack.append(lst)
        elif tok == ")":
            if not stack:
                raise ParseError("unbalanced ')'", tok.line, tok.col, source)
            done = stack.pop()
            (stack[-1] if stack else top).append(done)
        else:
            (stack[-1] if stack else top).append(tok)
    if stack:
        raise ParseError("unclosed '('", stack[-1].line, stack[-1].col, source)
    return top


def _pos(node) -> tuple[int, int]:
    return getattr(node, "line", 0), getattr(node, "col", 0)


def _err(msg: str, node, source: str = "") -> ParseError:
    line, col = _pos(node)
    return ParseError(msg, line, col, source)


def _is_list(node) -> bool:
    return isinstance(node, list)


def _parse_number(tok, source="") -> Fraction:
    try:
        return Fraction(str(tok))
    except (ValueError, ZeroDivisionError):
        raise _err(f"expected a number, got {tok!r}", tok, source) from None


def _split_typed(items: Sequence, source: str, what: str) -> list[tuple[str, str]]:
    """``a b - t c`` -> [(a, t), (b, t), (c, object)]."""
    out, pending = [], []
    i = 0
    while i < len(items):
        tok = items[i]
        if _is_list(tok):
            raise _err(f"unexpected list in {what}", tok, source)
        if tok == "-":
            if i + 1 >= len(items) or _is_list(items[i + 1]):
                raise _err(f"missing type after '-' in {what}", tok, source)
            out.extend((str(p), str(items[i + 1])) for p in pending)
            pending = []
            i += 2
            continue
        pending.append(tok)
        i += 1
    out.extend((str(p), OBJECT_TYPE) for p in pending)
    return out


# -- domain --------------------------------------------------------------------

@dataclass(frozen=True)
class Predicate:
    name: str
    params: tuple[tuple[str, str], ...] = ()

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass(frozen=True)
class Atom:
    """Fluent template; arguments starting with ``?`` are variables."""
    name: str
    args: tuple[str, ...] = ()

    def ground(self, binding: dict) -> Fluent:
        return Fluent(self.name, tuple(binding.get(a, a) for a in self.args))

    def __str__(self):
        return f"({' '.join((self.name,) + self.args)})"


@dataclass(frozen=True)
class WhenTemplate:
    condition: tuple[Atom, ...]
    add: tuple[Atom, ...] = ()
    delete: tuple[Atom, ...] = ()


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple[tuple[str, str], ...]
    pre: tuple[Atom, ...]
    add: tuple[Atom, ...]
    delete: tuple[Atom, ...]
    conditional: tuple[WhenTemplate, ...] = ()
    belief_variant: bool = False
    actor: Actor = Actor.HUMAN
    cost: Fraction = Fraction(1)

    def atoms(self) -> Iterable[Atom]:
        yield from self.pre
        yield from self.add
        yield from self.delete
        for w in self.conditional:
            yield from w.condition
            yield from w.add
            yield from w.delete

    def effect_predicates(self) -> set[str]:
        names = {a.name for a in self.add} | {a.name for a in self.delete}
        for w in self.conditional:
            names |= {a.name for a in w.add} | {a.name for a in w.delete}
        return names


@dataclass
class Domain:
    name: str
    types: tuple[str, ...] = ()
    constants: dict = field(default_factory=dict)
    predicates: dict = field(default_factory=dict)
    schemas: list = field(default_factory=list)

    def schema(self, name: str, belief: bool = False) -> ActionSchema:
        for s in self.schemas:
            if s.name == name and s.belief_variant == belief:
                return s
        raise KeyError(name)


def _parse_atom(node, source: str) -> Atom:
    if not _is_list(node) or not node or _is_list(node[0]):
        raise _err("expected an atom like (pred arg ...)", node, source)
    if node[0] in ("and", "not", "when", "or", "forall", "exists"):
        raise _err(f"expected an atom, got '{node[0]}' formula", node, source)
    for arg in node[1:]:
        if _is_list(arg):
            raise _err("nested term in atom", arg, source)
    return Atom(str(node[0]), tuple(str(a) for a in node[1:]))


def _conjuncts(node, source: str) -> list:
    if _is_list(node) and node and node[0] == "and":
        return list(node[1:])
    if _is_list(node) and not node:
        return []
    return [node]


def _parse_precondition(node, source: str) -> tuple[Atom, ...]:
    out = []
    for c in _conjuncts(node, source):
        if _is_list(c) and c and c[0] == "not":
            raise _err("negative preconditions are not supported", c, source)
        out.append(_parse_atom(c, source))
    return tuple(out)


def _parse_literals(items, source: str) -> tuple[tuple[Atom, ...], tuple[Atom, ...]]:
    add, delete = [], []
    for c in items:
        if _is_list(c) and c and c[0] == "not":
            if len(c) != 2:
                raise _err("(not ...) takes one atom", c, source)
            delete.append(_parse_atom(c[1], source))
        else:
            add.append(_parse_atom(c, source))
    return tuple(add), tuple(delete)


def _parse_effect(node, source: str):
    plain, whens = [], []
    for c in _conjuncts(node, source):
        if _is_list(c) and c and c[0] == "when":
            if len(c) != 3:
                raise _err("(when <condition> <effect>) expected", c, source)
            cond = _parse_precondition(c[1], source)
            inner = _conjuncts(c[2], source)
            if any(_is_list(x) and x and x[0] == "when" for x in inner):
                raise _err("nested when", c, source)
            a, d = _parse_literals(inner, source)
            whens.append(WhenTemplate(cond, a, d))
        else:
            plain.append(c)
    add, delete = _parse_literals(plain, source)
    return add, delete, tuple(whens)


_ACTION_KEYS = {":parameters", ":precondition", ":effect", ":cost", ":actor", ":belief"}


def _parse_action(node, source: str, default_actor: Actor) -> ActionSchema:
    if len(node) < 2 or _is_list(node[1]):
        raise _err("action needs a name", node, source)
    name = str(node[1])
    fields: dict = {}
    belief = False
    i = 2
    while i < len(node):
        key = node[i]
        if _is_list(key) or key not in _ACTION_KEYS:
            raise _err(f"unexpected {key!r} in action {name}", key, source)
        if key == ":belief":
            belief = True
            i += 1
            continue
        if i + 1 >= len(node):
            raise _err(f"missing value for {key}", key, source)
        if key in fields:
            raise _err(f"duplicate {key} in action {name}", key, source)
        fields[key] = node[i + 1]
        i += 2
    params_node = fields.get(":parameters", SList())
    if not _is_list(params_node):
        raise _err(":parameters must be a list", params_node, source)
    params = tuple(_split_typed(params_node, source, f"parameters of {name}"))
    for var, _ in params:
        if not var.startswith("?"):
            raise _err(f"parameter {var} must start with '?'", params_node, source)
    pre = _parse_precondition(fields.get(":precondition", SList()), source)
    add, delete, whens = _parse_effect(fields.get(":effect", SList()), source)
    actor = default_actor
    if ":actor" in fields:
        tok = fields[":actor"]
        if tok not in ("robot", "human"):
            raise _err(f":actor must be robot or human, got {tok!r}", tok, source)
        actor = Actor(str(tok))
    cost = _parse_number(fields[":cost"], source) if ":cost" in fields else Fraction(1)
    if cost < 0:
        raise _err("negative action cost", fields[":cost"], source)
    return ActionSchema(name, params, pre, add, delete, whens, belief, actor, cost)


def parse_domain(text: str, source: str = "") -> Domain:
    """Parse a domain file into predicates and action schemas."""
    forms = read_sexprs(text, source)
    if len(forms) != 1 or not _is_list(forms[0]) or not forms[0] or forms[0][0] != "define":
        raise ParseError("expected a single (define (domain NAME) ...) form", 1, 1, source)
    form = forms[0]
    head = form[1] if len(form) > 1 else None
    if not (_is_list(head) and len(head) == 2 and head[0] == "domain"):
        raise _err("expected (domain NAME)", head if head is not None else form, source)
    domain = Domain(str(head[1]))
    default_actor = Actor.HUMAN
    action_nodes = []
    for section in form[2:]:
        if not _is_list(section) or not section:
            raise _err("expected a section", section, source)
        key = section[0]
        if key == ":requirements":
            continue
        if key == ":actor":
            if len(section) != 2 or section[1] not in ("robot", "human"):
                raise _err("(:actor robot|human) expected", section, source)
            default_actor = Actor(str(section[1]))
        elif key == ":types":
            domain.types = tuple(t for t, _ in _split_typed(section[1:], source, ":types"))
        elif key == ":constants":
            for obj, typ in _split_typed(section[1:], source, ":constants"):
                domain.constants[obj] = typ
        elif key == ":predicates":
            for p in section[1:]:
                if not _is_list(p) or not p or _is_list(p[0]):
                    raise _err("bad predicate declaration", p, source)
                name = str(p[0])
                if name in domain.predicates:
                    raise _err(f"duplicate predicate {name}", p, source)
                domain.predicates[name] = Predicate(name, tuple(_split_typed(p[1:], source, name)))
        elif key == ":action":
            action_nodes.append(section)
        else:
            raise _err(f"unknown domain section {key!r}", section, source)
    known_types = set(domain.types) | {OBJECT_TYPE}
    for obj, typ in domain.constants.items():
        if typ not in known_types:
            raise ParseError(f"constant {obj} has undeclared type {typ}", 0, 0, source)
    for pred in domain.predicates.values():
        for var, typ in pred.params:
            if typ not in known_types:
                raise ParseError(f"predicate {pred.name} uses undeclared type {typ}", 0, 0, source)
    seen = set()
    for node in action_nodes:
        schema = _parse_action(node, source, default_actor)
        ident = (schema.name, schema.belief_variant)
        if ident in seen:
            raise _err(f"duplicate action {schema.name}", node, source)
        seen.add(ident)
        _check_schema(schema, domain, node, source, known_types)
        domain.schemas.append(schema)
    return domain


def _check_schema(schema: ActionSchema, domain: Domain, node, source: str, known_types) -> None:
    ptypes = dict(schema.params)
    if len(ptypes) != len(schema.params):
        raise _err(f"repeated parameter in {schema.name}", node, source)
    for _, typ in schema.params:
        if typ not in known_types:
            raise _err(f"undeclared type {typ} in {schema.name}", node, source)
    for atom in schema.atoms():
        pred = domain.predicates.get(atom.name)
        if pred is None:
            raise _err(f"undeclared predicate {atom.name} in action {schema.name}", node, source)
        if pred.arity != len(atom.args):
            raise _err(f"arity mismatch: {atom.name} takes {pred.arity} arguments, "
                       f"{len(atom.args)} given in {schema.name}", node, source)
        for arg, (_, want) in zip(atom.args, pred.params):
            if arg.startswith("?"):
                if arg not in ptypes:
                    raise _err(f"unbound variable {arg} in {schema.name}", node, source)
                have = ptypes[arg]
            elif arg in domain.constants:
                have = domain.constants[arg]
            else:
                raise _err(f"unknown constant {arg} in {schema.name}", node, source)
            if want != OBJECT_TYPE and have != want:
                raise _err(f"type mismatch: {arg} is {have}, {atom.name} expects {want}", node, source)


def _fmt_typed(pairs) -> str:
    out = []
    for key, group in itertools.groupby(pairs, key=lambda p: p[1]):
        names = " ".join(n for n, _ in group)
        out.append(names if key == OBJECT_TYPE else f"{names} - {key}")
    return " ".join(out)


def _fmt_conj(atoms) -> str:
    return "(and " + " ".join(str(a) for a in atoms) + ")" if atoms else "(and)"


def format_domain(domain: Domain) -> str:
    """Render a domain back to text; ``parse_domain`` inverts it."""
    lines = [f"(define (domain {domain.name})"]
    if domain.types:
        lines.append(f"  (:types {' '.join(domain.types)})")
    if domain.constants:
        lines.append(f"  (:constants {_fmt_typed(domain.constants.items())})")
    preds = " ".join(
        f"({p.name}{' ' + _fmt_typed(p.params) if p.params else ''})" for p in domain.predicates.values())
    lines.append(f"  (:predicates {preds})")
    for s in domain.schemas:
        lines.append(f"  (:action {s.name}")
        lines.append(f"    :actor {s.actor.value}" + ("\n    :belief" if s.belief_variant else ""))
        lines.append(f"    :parameters ({_fmt_typed(s.params)})")
        lines.append(f"    :precondition {_fmt_conj(s.pre)}")
        effects = [str(a) for a in s.add] + [f"(not {a})" for a in s.delete]
        for w in s.conditional:
            inner = [str(a) for a in w.add] + [f"(not {a})" for a in w.delete]
            effects.append(f"(when {_fmt_conj(w.condition)} (and {' '.join(inner)}))")
        lines.append(f"    :effect (and {' '.join(effects)})")
        lines.append(f"    :cost {s.cost})")
    lines.append(")")
    return "\n".join(lines) + "\n"


# -- problem -------------------------------------------------------------------

@dataclass(frozen=True)
class InitSpec:
    known: frozenset
    unknown: tuple = ()
    oneof_groups: tuple = ()

    def expansion_count(self) -> int:
        """Number of states before duplicate elimination."""
        n = 2 ** len(self.unknown)
        for g in self.oneof_groups:
            n *= len(g)
        return n


@dataclass
class ProblemSpec:
    name: str
    domain_name: str
    objects: dict
    init: InitSpec
    true_init: Optional[frozenset]
    goal: frozenset


def _merge_predicates(domains: Sequence[Domain]) -> dict:
    preds: dict = {}
    for d in domains:
        for name, p in d.predicates.items():
            if name in preds and preds[name].arity != p.arity:
                raise ModelError(f"predicate {name} declared with different arities")
            preds.setdefault(name, p)
    return preds


def _ground_atom(node, objects: dict, preds: dict, source: str, what: str) -> Fluent:
    atom = _parse_atom(node, source)
    pred = preds.get(atom.name)
    if pred is None:
        raise _err(f"{what} references undeclared predicate {atom.name}", node, source)
    if pred.arity != len(atom.args):
        raise _err(f"arity mismatch: {atom.name} takes {pred.arity} arguments", node, source)
    for arg, (_, want) in zip(atom.args, pred.params):
        if arg.startswith("?"):
            raise _err(f"variable {arg} in ground {what}", node, source)
        if arg not in objects:
            raise _err(f"unknown object {arg} in {what}", node, source)
        if want != OBJECT_TYPE and objects[arg] != want:
            raise _err(f"type mismatch: {arg} is {objects[arg]}, {atom.name} expects {want}", node, source)
    return Fluent(atom.name, atom.args)


def parse_problem(text: str, domains: Sequence[Domain] | Domain, source: str = "") -> ProblemSpec:
    """Parse a problem file against one or more already-parsed domains."""
    if isinstance(domains, Domain):
        domains = [domains]
    forms = read_sexprs(text, source)
    if len(forms) != 1 or not _is_list(forms[0]) or not forms[0] or forms[0][0] != "define":
        raise ParseError("expected a single (define (problem NAME) ...) form", 1, 1, source)
    form = forms[0]
    head = form[1] if len(form) > 1 else None
    if not (_is_list(head) and len(head) == 2 and head[0] == "problem"):
        raise _err("expected (problem NAME)", head if head is not None else form, source)
    preds = _merge_predicates(domains)
    known_types = {OBJECT_TYPE}
    objects: dict = {}
    for d in domains:
        known_types |= set(d.types)
        objects.update(d.constants)
    name, domain_name = str(head[1]), ""
    init_node = true_node = goal_node = None
    for section in form[2:]:
        if not _is_list(section) or not section:
            raise _err("expected a section", section, source)
        key = section[0]
        if key == ":domain":
            domain_name = str(section[1])
        elif key == ":objects":
            for obj, typ in _split_typed(section[1:], source, ":objects"):
                if typ not in known_types:
                    raise _err(f"unknown object type {typ} for {obj}", section, source)
                objects[obj] = typ
        elif key == ":init":
            init_node = section
        elif key == ":true-init":
            true_node = section
        elif key == ":goal":
            goal_node = section
        else:
            raise _err(f"unknown problem section {key!r}", section, source)
    if init_node is None:
        raise ParseError("problem has no :init", 1, 1, source)
    if goal_node is None:
        raise ParseError("problem has no :goal", 1, 1, source)

    known, unknown, groups = set(), [], []
    for item in init_node[1:]:
        head_tok = item[0] if _is_list(item) and item else None
        if head_tok == "known":
            known.update(_ground_atom(x, objects, preds, source, "init") for x in item[1:])
        elif head_tok == "unknown":
            if len(item) != 2:
                raise _err("(unknown <atom>) takes one atom", item, source)
            unknown.append(_ground_atom(item[1], objects, preds, source, "init"))
        elif head_tok == "oneof":
            group = tuple(_ground_atom(x, objects, preds, source, "init") for x in item[1:])
            if len(set(group)) < 2:
                raise _err("oneof needs at least two distinct atoms", item, source)
            groups.append(group)
        else:
            known.add(_ground_atom(item, objects, preds, source, "init"))
    uncertain = set(unknown)
    for g in groups:
        if uncertain & set(g):
            raise _err("a fluent appears in more than one uncertainty clause", init_node, source)
        uncertain |= set(g)
    if uncertain & known:
        raise _err(f"uncertain fluent also listed as known: {sorted(map(str, uncertain & known))}",
                   init_node, source)
    init = InitSpec(frozenset(known), tuple(unknown), tuple(groups))

    true_init = None
    if true_node is not None:
        true_init = frozenset(_ground_atom(x, objects, preds, source, ":true-init") for x in true_node[1:])
        stray = true_init - uncertain
        if stray:
            raise _err(f":true-init lists fluents that are not uncertain: {sorted(map(str, stray))}",
                       true_node, source)
        for g in groups:
            if len(true_init & set(g)) != 1:
                raise _err("true-init must pick exactly one member of each oneof", true_node, source)
    elif uncertain:
        raise ParseError("problem with uncertainty needs :true-init", 1, 1, source)

    goal = frozenset(_ground_atom(x, objects, preds, source, "goal")
                     for x in _conjuncts(goal_node[1] if len(goal_node) == 2 else SList(goal_node[1:]), source))
    return ProblemSpec(name, domain_name, objects, init, true_init, goal)


def true_initial_state(problem: ProblemSpec) -> frozenset:
    return problem.init.known | (problem.true_init or frozenset())


def expand_initial_belief(init: InitSpec, cap: int = DEFAULT_BELIEF_CAP) -> Belief:
    """One state per combination of oneof choices and unknown valuations."""
    if init.expansion_count() > cap:
        raise ResourceError(f"initial belief would have {init.expansion_count()} states (cap {cap})")
    states = []
    for choice in itertools.product(*init.oneof_groups):
        for bits in itertools.product((False, True), repeat=len(init.unknown)):
            extra = {f for f, on in zip(init.unknown, bits) if on}
            states.append(init.known | frozenset(choice) | extra)
    return Belief(states)


# -- grounding -----------------------------------------------------------------

def static_predicates(schemas: Iterable[ActionSchema], preds: Iterable[str], init: Optional[InitSpec] = None) -> set:
    changing = set()
    for s in schemas:
        changing |= s.effect_predicates()
    if init is not None:
        changing |= {f.name for f in init.unknown}
        changing |= {f.name for g in init.oneof_groups for f in g}
    return set(preds) - changing


def ground(schemas: Iterable[ActionSchema], objects: dict, costs: Optional[dict] = None,
           static_facts: Optional[frozenset] = None, static: Optional[set] = None) -> list[GroundAction]:
    """Instantiate schemas over typed objects.

    When ``static_facts``/``static`` are given, instances whose static
    preconditions are not among the static facts are dropped.
    """
    costs = costs or {}
    by_type: dict = {}
    for obj, typ in sorted(objects.items()):
        by_type.setdefault(typ, []).append(obj)
    all_objects = sorted(objects)
    out = []
    for schema in schemas:
        domains = [all_objects if typ == OBJECT_TYPE else by_type.get(typ, []) for _, typ in schema.params]
        static_pre = [a for a in schema.pre if static and a.name in static]
        cost = Fraction(costs.get(schema.name, schema.cost))
        for combo in itertools.product(*domains):
            binding = {var: obj for (var, _), obj in zip(schema.params, combo)}
            if static_pre and any(a.ground(binding) not in static_facts for a in static_pre):
                continue
            out.append(_instantiate(schema, binding, tuple(combo), cost))
    return out


def _instantiate(schema: ActionSchema, binding: dict, args: tuple, cost: Fraction) -> GroundAction:
    g = lambda atoms: frozenset(a.ground(binding) for a in atoms)
    cond = tuple(ConditionalEffect(g(w.condition), g(w.add), g(w.delete)) for w in schema.conditional)
    add, delete = g(schema.add), g(schema.delete)
    # a fluent both added and deleted ends up true
    return GroundAction(schema.actor, schema.name, args, g(schema.pre), add, delete - add, cond, cost)


def project_action(action: GroundAction, vocabulary: frozenset) -> GroundAction:
    """Belief variant obtained by dropping fluents outside ``vocabulary``."""
    keep = lambda fs: frozenset(f for f in fs if f.name in vocabulary)
    cond = []
    for eff in action.conditional:
        if any(f.name not in vocabulary for f in eff.condition):
            raise ModelError(f"{action} has a conditional effect on facts the human cannot see; "
                             "give it an explicit :belief variant")
        cond.append(ConditionalEffect(eff.condition, keep(eff.add), keep(eff.delete)))
    return GroundAction(action.actor, action.name, action.args, keep(action.pre), keep(action.add),
                        keep(action.delete), tuple(cond), action.cost)


# -- sensor file ---------------------------------------------------------------

def _parse_pattern(node, source: str) -> ActionPattern:
    if _is_list(node):
        if not node or _is_list(node[0]):
            raise _err("bad action pattern", node, source)
        args = tuple(None if str(a).startswith("?") else str(a) for a in node[1:])
        return ActionPattern(str(node[0]), args)
    return ActionPattern(str(node))


def parse_sensor(text: str, domains: Sequence[Domain] | Domain = (), source: str = "",
                 robot_actions: Optional[Sequence[GroundAction]] = None) -> SensorModel:
    """Parse a sensor file into a total :class:`SensorModel`.

    If ``robot_actions`` is given the model is also checked for coarse
    observations over those actions.
    """
    if isinstance(domains, Domain):
        domains = [domains]
    forms = read_sexprs(text, source)
    if len(forms) == 1 and _is_list(forms[0]) and forms[0] and forms[0][0] == "sensor":
        forms = [f for f in forms[0][1:] if _is_list(f)] if len(forms[0]) > 1 else []
    action_names = {s.name for d in domains for s in d.schemas}
    preds = _merge_predicates(domains) if domains else {}
    null_tok = default = None
    raw_rules = []
    for form in forms:
        if not _is_list(form) or not form:
            raise _err("expected (default ...), (null ...) or (rule ...)", form, source)
        key = form[0]
        if key == "null":
            if len(form) != 2 or _is_list(form[1]):
                raise _err("(null TOKEN) expected", form, source)
            if null_tok is not None and null_tok != str(form[1]):
                raise _err("more than one null symbol", form, source)
            null_tok = str(form[1])
        elif key == "default":
            if len(form) not in (2, 3) or _is_list(form[1]):
                raise _err("(default TOKEN [null]) expected", form, source)
            if default is not None:
                raise _err("duplicate default", form, source)
            default = str(form[1])
            if len(form) == 3:
                if form[2] != "null":
                    raise _err(f"expected 'null', got {form[2]!r}", form[2], source)
                if null_tok is not None and null_tok != default:
                    raise _err("more than one null symbol", form, source)
                null_tok = default
        elif key == "rule":
            if len(form) not in (3, 4):
                raise _err("(rule ACTION [(condition ...)] TOKEN) expected", form, source)
            pattern = _parse_pattern(form[1], source)
            if action_names and pattern.name not in action_names:
                raise _err(f"rule references unknown action {pattern.name}", form[1], source)
            condition = None
            if len(form) == 4:
                cnode = form[2]
                if not (_is_list(cnode) and cnode and cnode[0] == "condition"):
                    raise _err("expected (condition <atoms>)", cnode, source)
                atoms = [_parse_atom(a, source) for a in cnode[1:]]
                for a in atoms:
                    if preds and a.name not in preds:
                        raise _err(f"condition uses undeclared predicate {a.name}", cnode, source)
                condition = frozenset(Fluent(a.name, a.args) for a in atoms)
            if _is_list(form[-1]):
                raise _err("observation token must be a symbol", form[-1], source)
            raw_rules.append((pattern, condition, str(form[-1])))
        else:
            raise _err(f"unknown sensor form {key!r}", form, source)
    if null_tok is None:
        raise ParseError("sensor file declares no null symbol", 1, 1, source)
    if default is None:
        default = null_tok

    sym = lambda tok: ObservationSymbol(tok, tok == null_tok)
    rules = [SensorRule(p, sym(tok), c) for p, c, tok in raw_rules]
    model = SensorModel(rules, sym(default), sym(null_tok))
    if robot_actions is not None and not is_coarse(model, robot_actions):
        raise ModelError("sensor model distinguishes every robot action; at least two must share a symbol")
    return model


# -- assembling a problem ------------------------------------------------------

def build_problem(domain_r: Domain, domain_h: Domain, spec: ProblemSpec, sensor: SensorModel,
                  belief_cap: int = DEFAULT_BELIEF_CAP) -> MaCoppProblem:
    """Ground both domains and assemble the MA-COPP problem.

    The human's vocabulary is the set of predicates declared in her domain.
    """
    vocabulary = frozenset(domain_h.predicates)
    schemas = domain_r.schemas + domain_h.schemas
    preds = _merge_predicates([domain_r, domain_h])
    static = static_predicates(schemas, preds, spec.init)
    static_facts = frozenset(f for f in spec.init.known if f.name in static)
    grounded = lambda ss: ground(ss, spec.objects, static_facts=static_facts, static=static)

    base = [s for s in schemas if not s.belief_variant]
    names = [s.name for s in base]
    dupes = {n for n in names if names.count(n) > 1}
    if dupes:
        raise ModelError(f"action defined in both domains: {sorted(dupes)}")
    variants = [s for s in schemas if s.belief_variant]
    for v in variants:
        if v.name not in names:
            raise ModelError(f"belief variant {v.name} has no base action")
    variant_names = [v.name for v in variants]
    if len(set(variant_names)) != len(variant_names):
        raise ModelError("more than one belief variant for an action")

    robot = sorted(grounded([s for s in base if s.actor is Actor.ROBOT]), key=lambda a: a.key)
    human = sorted(grounded([s for s in base if s.actor is Actor.HUMAN]), key=lambda a: a.key)
    explicit = {a.key: a for a in grounded(variants)}
    for v in variants:
        actor = next(s.actor for s in base if s.name == v.name)
        if v.actor is not actor:
            raise ModelError(f"belief variant {v.name} has a different actor than its base action")

    robot_belief = {}
    for a in robot:
        variant = explicit.get(a.key)
        if variant is None and a.name in variant_names:
            raise ModelError(f"belief variant of {a} was pruned during grounding")
        robot_belief[a.key] = variant or project_action(a, vocabulary)
    human_belief = {a.key: explicit[a.key] for a in human if a.key in explicit}

    true_state = true_initial_state(spec)
    full_belief = expand_initial_belief(spec.init, belief_cap)
    project = lambda s: frozenset(f for f in s if f.name in vocabulary)
    b0 = Belief(project(s) for s in full_belief.states)

    fluents = set()
    for name, pred in preds.items():
        doms = []
        for _, typ in pred.params:
            doms.append(sorted(o for o, t in spec.objects.items() if typ == OBJECT_TYPE or t == typ))
        fluents.update(Fluent(name, combo) for combo in itertools.product(*doms))

    problem = MaCoppProblem(
        name=spec.name,
        fluents=frozenset(fluents),
        human_actions=tuple(human),
        robot_actions=tuple(robot),
        robot_belief_actions=robot_belief,
        initial_state=true_state,
        initial_belief=b0,
        human_goal=spec.goal,
        sensor=sensor,
        vocabulary=vocabulary,
        human_belief_actions=human_belief,
    )
    return problem


def load_problem(domain_r: str | Path, domain_h: str | Path, problem: str | Path, sensors: str | Path,
                 belief_cap: int = DEFAULT_BELIEF_CAP) -> MaCoppProblem:
    paths = [Path(p) for p in (domain_r, domain_h, problem, sensors)]
    texts = [p.read_text(encoding="utf-8") for p in paths]
    dr = parse_domain(texts[0], str(paths[0]))
    dh = parse_domain(texts[1], str(paths[1]))
    spec = parse_problem(texts[2], [dr, dh], str(paths[2]))
    sensor = parse_sensor(texts[3], [dr, dh], str(paths[3]))
    return build_problem(dr, dh, spec, sensor, belief_cap)
