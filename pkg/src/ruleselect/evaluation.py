"""Rule evaluation on premise instances, builtin predicates, and error reports.

Evaluating a rule enumerates all variable assignments under which every
relational premise atom maps to a stored fact and every builtin atom holds,
then instantiates the conclusion.  Relational atoms bind variables; builtins
only filter.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Callable, Iterable, Optional

from .model import (
    BuiltinAtom,
    DataExample,
    ErrorReport,
    EvalLimits,
    EvaluationError,
    Fact,
    Instance,
    Rule,
    RuleSet,
    Selection,
    ValidationError,
    Value,
    check_selection,
    display_var,
)

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> frozenset:
    """Lowercase, split on non-alphanumeric runs, drop empties, deduplicate."""
    return frozenset(_TOKEN_RE.findall(text.lower()))


def _as_text(v: Value) -> str:
    if v.is_text:
        return v.data
    if isinstance(v.data, Decimal):
        return format(v.data, "f")
    return str(v.data)


def jaccard(x: Value, y: Value) -> Fraction:
    """Token-set Jaccard similarity in [0, 1]; two empty token sets count as equal."""
    a = tokenize(_as_text(x))
    b = tokenize(_as_text(y))
    if not a and not b:
        return Fraction(1)
    return Fraction(len(a & b), len(a | b))


def _value_cmp_geq(a: Value, b: Value) -> bool:
    # Numbers compare numerically, texts lexicographically; cross-kind is false.
    if a.is_text != b.is_text:
        return False
    return a.data >= b.data


def _value_cmp_leq(a: Value, b: Value) -> bool:
    if a.is_text != b.is_text:
        return False
    return a.data <= b.data


@dataclass(frozen=True)
class Builtin:
    name: str
    predicate: Callable


#: All builtin predicates are pure, deterministic, and total on Values.
BUILTINS: dict = {
    "neq": Builtin("neq", lambda vals, thr: vals[0] != vals[1]),
    "eq": Builtin("eq", lambda vals, thr: vals[0] == vals[1]),
    "jaccard_geq": Builtin("jaccard_geq", lambda vals, thr: jaccard(vals[0], vals[1]) >= thr),
    "geq": Builtin("geq", lambda vals, thr: _value_cmp_geq(vals[0], vals[1])),
    "leq": Builtin("leq", lambda vals, thr: _value_cmp_leq(vals[0], vals[1])),
}


def _check_limits(rules: Iterable[Rule], limits: Optional[EvalLimits]):
    if limits is None:
        return
    for r in rules:
        if len(r.premise) > limits.max_premise_atoms:
            raise ValidationError(
                f"rule {r.name}: premise has {len(r.premise)} atoms, "
                f"limit {limits.max_premise_atoms}")
        if len(r.head.terms) > limits.max_conclusion_arity:
            raise ValidationError(
                f"rule {r.name}: conclusion arity {len(r.head.terms)} exceeds "
                f"limit {limits.max_conclusion_arity}")


def _eval_builtin(atom: BuiltinAtom, binding: dict) -> bool:
    vals = tuple(binding[t.var] if t.is_var else t.const for t in atom.terms)
    return BUILTINS[atom.name].predicate(vals, atom.threshold)


def _pick_next_atom(remaining, bound, premise: Instance):
    # Most already-bound variables; tie-break smaller relation, then premise order.
    best = None
    for pos, atom in remaining:
        n_bound = len(set(atom.variables()) & bound)
        key = (-n_bound, len(premise.relation(atom.relation)), pos)
        if best is None or key < best[0]:
            best = (key, pos, atom)
    return best[1], best[2]


def eval_rule(rule: Rule, premise: Instance, limits: Optional[EvalLimits] = None) -> frozenset:
    """All conclusion facts derivable from the premise instance via this rule.

    Join order is greedy: at each step the unprocessed relational atom with
    the most already-bound variables is joined next (ties: smallest relation,
    then premise order), via an index on its bound positions.  Builtins are
    applied as soon as all their variables are bound.
    """
    _check_limits([rule], limits)
    unsafe = rule.unsafe_variables()
    if unsafe:
        shown = ", ".join(display_var(v) for v in unsafe)
        raise ValidationError(f"rule {rule.name} is unsafe: {shown} unbound")
    for atom in rule.relational_atoms():
        arity = premise.schema.get(atom.relation)
        if arity is None:
            raise EvaluationError(
                f"rule {rule.name} references unknown relation {atom.relation}")
        if arity != len(atom.terms):
            raise EvaluationError(
                f"rule {rule.name}: {atom.relation} has arity {arity}, "
                f"atom uses {len(atom.terms)}")

    by_relation: dict = {}
    for f in premise.facts:
        by_relation.setdefault(f.relation, []).append(f)

    bindings = [{}]
    bound: set = set()
    remaining = list(enumerate(rule.relational_atoms()))
    pending = list(rule.builtin_atoms())

    def apply_ready_builtins():
        nonlocal bindings, pending
        still = []
        for atom in pending:
            if set(atom.variables()) <= bound:
                bindings = [b for b in bindings if _eval_builtin(atom, b)]
            else:
                still.append(atom)
        pending = still

    apply_ready_builtins()
    while remaining and bindings:
        pos, atom = _pick_next_atom(remaining, bound, premise)
        remaining = [(p, a) for p, a in remaining if p != pos]

        fixed = []     # positions matched against the index key
        free = []      # positions binding new variables
        for i, t in enumerate(atom.terms):
            if t.is_var and t.var not in bound:
                free.append((i, t.var))
            else:
                fixed.append(i)
        index: dict = {}
        for f in by_relation.get(atom.relation, ()):
            key = tuple(f.args[i] for i in fixed)
            index.setdefault(key, []).append(f)

        new_bindings = []
        for b in bindings:
            key = tuple(
                b[atom.terms[i].var] if atom.terms[i].is_var else atom.terms[i].const
                for i in fixed)
            for f in index.get(key, ()):
                ext = dict(b)
                ok = True
                for i, name in free:
                    v = f.args[i]
                    if name in ext and ext[name] != v:
                        ok = False
                        break
                    ext[name] = v
                if ok:
                    new_bindings.append(ext)
        bindings = new_bindings
        bound |= {v for _, v in free}
        apply_ready_builtins()

    out = set()
    for b in bindings:
        args = tuple(b[t.var] if t.is_var else t.const for t in rule.head.terms)
        out.add(Fact(rule.head.relation, args))
    return frozenset(out)


class EvalCache:
    """Per-rule evaluation results for one (RuleSet, Instance) pair.

    Built once, then read-only; selection queries cost only set unions.
    """

    __slots__ = ("rules", "premise", "per_rule", "union")

    def __init__(self, rules: RuleSet, premise: Instance,
                 limits: Optional[EvalLimits] = None):
        _check_limits(rules.rules, limits)
        self.rules = rules
        self.premise = premise
        self.per_rule = {r.name: eval_rule(r, premise, limits) for r in rules.rules}
        self.union = frozenset().union(*self.per_rule.values()) if self.per_rule else frozenset()

    def matches(self, rules: RuleSet, premise: Instance) -> bool:
        return (self.rules is rules or self.rules == rules) and \
               (self.premise is premise or self.premise == premise)

    def eval_selection(self, selection: Selection) -> frozenset:
        if not selection:
            return frozenset()
        return frozenset().union(*(self.per_rule[name] for name in selection))


def _cache_for(rules: RuleSet, premise: Instance, cache: Optional[EvalCache],
               limits: Optional[EvalLimits] = None) -> EvalCache:
    if cache is None:
        return EvalCache(rules, premise, limits)
    if not cache.matches(rules, premise):
        raise ValidationError("evaluation cache belongs to a different rule set or instance")
    return cache


def eval_ruleset(rules: RuleSet, selection: Iterable[str], premise: Instance,
                 cache: Optional[EvalCache] = None,
                 limits: Optional[EvalLimits] = None) -> frozenset:
    """Union of per-rule outputs over the chosen rules."""
    sel = check_selection(rules, selection)
    cache = _cache_for(rules, premise, cache, limits)
    return cache.eval_selection(sel)


def compute_errors(rules: RuleSet, selection: Iterable[str], example: DataExample,
                   cache: Optional[EvalCache] = None,
                   limits: Optional[EvalLimits] = None) -> ErrorReport:
    """FP = produced facts absent from the truth; FN = truth facts not produced."""
    produced = eval_ruleset(rules, selection, example.premise, cache, limits)
    truth = example.truth.facts
    return ErrorReport(fp=produced - truth, fn=truth - produced)


@dataclass(frozen=True)
class Feasibility:
    ok: bool
    missing: frozenset


def check_fp_feasible(rules: RuleSet, example: DataExample,
                      cache: Optional[EvalCache] = None) -> Feasibility:
    """Whether the full rule set derives every truth fact (zero-FN is attainable)."""
    cache = _cache_for(rules, example.premise, cache)
    missing = example.truth.facts - cache.union
    return Feasibility(ok=not missing, missing=missing)
