"""Independent brute-force oracles used to check the package's fast paths.

Everything here works on plain Python sets and full enumeration, with no
imports from the solver/kernel modules, so oracle and implementation can only
agree by computing the same thing.
"""
from __future__ import annotations

import re
from fractions import Fraction
from itertools import product

from ruleselect.model import BuiltinAtom, Fact, RelationalAtom


def subsets_canonical(names):
    """All subsets in canonical order: rule i (list order) at bit i, mask ascending."""
    names = list(names)
    for m in range(1 << len(names)):
        yield frozenset(n for i, n in enumerate(names) if m >> i & 1)


def _oracle_tokens(text: str):
    return frozenset(re.findall(r"[^\W_]+", text.lower(), re.UNICODE))


def _oracle_value_text(v):
    from decimal import Decimal

    if isinstance(v.data, Decimal):
        return format(v.data, "f")
    return v.data if v.is_text else str(v.data)


def _oracle_builtin(atom: BuiltinAtom, env) -> bool:
    vals = tuple(env[t.var] if t.is_var else t.const for t in atom.terms)
    if atom.name == "neq":
        return vals[0] != vals[1]
    if atom.name == "eq":
        return vals[0] == vals[1]
    if atom.name == "jaccard_geq":
        a = _oracle_tokens(_oracle_value_text(vals[0]))
        b = _oracle_tokens(_oracle_value_text(vals[1]))
        sim = Fraction(1) if not a and not b else Fraction(len(a & b), len(a | b))
        return sim >= atom.threshold
    a, b = vals
    if a.is_text != b.is_text:
        return False
    return a.data >= b.data if atom.name == "geq" else a.data <= b.data


def naive_eval_rule(rule, premise) -> frozenset:
    """Try every assignment of rule variables over the premise's active domain."""
    adom = sorted({v for f in premise.facts for v in f.args},
                  key=lambda v: v.sort_key())
    variables = []
    for atom in list(rule.premise) + [rule.head]:
        for name in atom.variables():
            if name not in variables:
                variables.append(name)
    out = set()
    for combo in product(adom, repeat=len(variables)):
        env = dict(zip(variables, combo))
        ok = True
        for atom in rule.premise:
            if isinstance(atom, RelationalAtom):
                args = tuple(env[t.var] if t.is_var else t.const for t in atom.terms)
                if Fact(atom.relation, args) not in premise.facts:
                    ok = False
                    break
            else:
                if not _oracle_builtin(atom, env):
                    ok = False
                    break
        if ok:
            args = tuple(env[t.var] if t.is_var else t.const for t in rule.head.terms)
            out.add(Fact(rule.head.relation, args))
    return frozenset(out)


def subset_fp_fn(per_rule: dict, selection, truth: frozenset):
    produced = set()
    for name in selection:
        produced |= per_rule[name]
    return frozenset(produced - truth), frozenset(truth - produced)


def brute_force_optimum(names, per_rule: dict, truth: frozenset, fp_only: bool):
    """(optimum error, first canonical witness); witness None if nothing qualifies."""
    best = None
    for sel in subsets_canonical(names):
        fp, fn = subset_fp_fn(per_rule, sel, truth)
        if fp_only:
            if fn:
                continue
            err = len(fp)
        else:
            err = len(fp) + len(fn)
        if best is None or err < best[0]:
            best = (err, sel)
    return best if best is not None else (None, None)


def brute_force_front(names, per_rule: dict, sizes: dict, truth: frozenset,
                      fp_only: bool):
    """Non-dominated (error, size) pairs achieved by any qualifying selection."""
    pairs = {}
    for sel in subsets_canonical(names):
        fp, fn = subset_fp_fn(per_rule, sel, truth)
        if fp_only and fn:
            continue
        err = len(fp) if fp_only else len(fp) + len(fn)
        size = sum(sizes[n] for n in sel)
        pairs.setdefault((err, size), sel)
    front = set()
    for e, s in pairs:
        dominated = any(e2 <= e and s2 <= s and (e2, s2) != (e, s) for e2, s2 in pairs)
        if not dominated:
            front.add((e, s))
    return front, pairs


def brute_force_min_cover(universe, sets) -> int:
    """Smallest number of sets whose union covers the universe."""
    target = set(universe)
    best = None
    for m in range(1 << len(sets)):
        chosen = [s for i, s in enumerate(sets) if m >> i & 1]
        union = set().union(*chosen) if chosen else set()
        if target <= union and (best is None or len(chosen) < best):
            best = len(chosen)
    return best


def brute_force_rbsc_min(instance) -> int:
    """Minimum covered reds over all subsets that cover every blue element."""
    best = None
    n = len(instance.sets)
    for m in range(1 << n):
        union = set()
        for i in range(n):
            if m >> i & 1:
                union |= instance.sets[i][1]
        if instance.blue <= union:
            cost = len(union & instance.red)
            if best is None or cost < best:
                best = cost
    return best


def brute_force_pnpsc_min(instance) -> int:
    """Minimum (uncovered positives + covered negatives) over all subsets."""
    best = None
    n = len(instance.sets)
    for m in range(1 << n):
        union = set()
        for i in range(n):
            if m >> i & 1:
                union |= instance.sets[i][1]
        cost = len(instance.positive - union) + len(instance.negative & union)
        if best is None or cost < best:
            best = cost
    return best
