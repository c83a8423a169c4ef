"""Exact optimization and decision procedures by exhaustive subset enumeration.

All procedures here are exponential-time oracles over at most `max_rules`
rules: per-rule outputs are bit vectors over the fact universe
Eval(all rules, I) union J, and subsets are walked with incremental unions
and FP-count pruning.  Witnesses are canonical: the first optimal subset with
rule i (declaration order) at bit i, subsets ordered by ascending mask.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from ._bitset import PackedUniverse
from .evaluation import EvalCache, _cache_for, check_fp_feasible, compute_errors
from .model import (
    CapacityError,
    DataExample,
    InfeasibleError,
    ParetoPoint,
    RuleSet,
    Selection,
    ValidationError,
    check_selection,
    rule_size,
    ruleset_size,
)
from .parser import instance_digest

OBJECTIVES = ("fp", "fpfn")


@dataclass(frozen=True)
class ExactConfig:
    max_rules: int = 24
    objective: str = "fpfn"
    prune: bool = True

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ValidationError(f"objective must be one of {OBJECTIVES}")
        if self.max_rules < 1:
            raise ValidationError("max_rules must be positive")


@dataclass(frozen=True)
class FrontResult:
    """Pareto-optimal (error, size) points, sorted by ascending error."""

    points: tuple
    digest: str


@dataclass(frozen=True)
class BilevelResult:
    """Minimum error, then minimum size among minimum-error selections."""

    error: int
    size: int
    witness: Selection


def _prepare(rules: RuleSet, example: DataExample, config: ExactConfig,
             cache: Optional[EvalCache]):
    if len(rules) > config.max_rules:
        raise CapacityError(
            f"{len(rules)} rules exceed the enumeration cap of {config.max_rules}")
    cache = _cache_for(rules, example.premise, cache)
    if config.objective == "fp":
        feas = check_fp_feasible(rules, example, cache)
        if not feas.ok:
            raise InfeasibleError(feas.missing)
    universe = PackedUniverse(cache.union | example.truth.facts)
    rule_masks = universe.pack_rows([cache.per_rule[r.name] for r in rules.rules])
    j_mask = universe.pack(example.truth.facts)
    return cache, rule_masks, j_mask


def _mask_to_selection(rules: RuleSet, mask: int) -> Selection:
    return frozenset(r.name for i, r in enumerate(rules.rules) if mask >> i & 1)


def solve_exact(rules: RuleSet, example: DataExample,
                config: Optional[ExactConfig] = None,
                cache: Optional[EvalCache] = None) -> tuple:
    """Optimum error and its canonical witness selection."""
    config = config or ExactConfig()
    cache, rule_masks, j_mask = _prepare(rules, example, config, cache)
    err, mask = _kernels.solve_exact_masks(
        rule_masks, j_mask, fp_only=config.objective == "fp", prune=config.prune)
    if mask < 0:
        raise InfeasibleError(frozenset())  # unreachable given the precondition
    return err, _mask_to_selection(rules, mask)


def decision_bound(rules: RuleSet, example: DataExample, k: int, objective: str,
                   config: Optional[ExactConfig] = None) -> bool:
    """Is there a selection with error at most k?"""
    config = _with_objective(config, objective)
    err, _ = solve_exact(rules, example, config)
    return err <= k


def decision_exact_value(rules: RuleSet, example: DataExample, k: int, objective: str,
                         config: Optional[ExactConfig] = None) -> bool:
    """Is the optimum error exactly k?"""
    config = _with_objective(config, objective)
    err, _ = solve_exact(rules, example, config)
    return err == k


def _with_objective(config: Optional[ExactConfig], objective: str) -> ExactConfig:
    base = config or ExactConfig()
    return ExactConfig(max_rules=base.max_rules, objective=objective, prune=base.prune)


def _size_profile(rules: RuleSet, example: DataExample, config: ExactConfig,
                  cache: Optional[EvalCache]):
    cache, rule_masks, j_mask = _prepare(rules, example, config, cache)
    sizes = np.array([rule_size(r) for r in rules.rules], dtype=np.int64)
    return _kernels.size_profile_masks(
        rule_masks, sizes, j_mask, fp_only=config.objective == "fp")


def pareto_front(rules: RuleSet, example: DataExample,
                 config: Optional[ExactConfig] = None,
                 cache: Optional[EvalCache] = None) -> FrontResult:
    """All non-dominated (error, size) pairs with one canonical witness each.

    Size is the sum of premise-atom counts over the chosen rules.  In "fp"
    mode only zero-FN selections compete.
    """
    config = config or ExactConfig()
    best_err, witness = _size_profile(rules, example, config, cache)
    points = []
    best_so_far = None
    for s in range(len(best_err)):  # ascending size; keep strict error improvements
        e = int(best_err[s])
        if e < 0:
            continue
        if best_so_far is None or e < best_so_far:
            best_so_far = e
            points.append(ParetoPoint(
                error=e, size=s,
                witness=_mask_to_selection(rules, int(witness[s]))))
    points.sort(key=lambda p: p.error)
    return FrontResult(points=tuple(points), digest=instance_digest(rules, example))


def is_pareto_optimal(rules: RuleSet, example: DataExample, candidate,
                      config: Optional[ExactConfig] = None,
                      cache: Optional[EvalCache] = None) -> bool:
    """Is the candidate selection strictly dominated by no other selection?"""
    config = config or ExactConfig()
    sel = check_selection(rules, candidate)
    report = compute_errors(rules, sel, example, cache)
    if config.objective == "fp":
        if report.fn_count != 0:
            return False
        err = report.fp_count
    else:
        err = report.total
    size = ruleset_size(sel, rules)
    front = pareto_front(rules, example, config, cache)
    return any(p.error == err and p.size == size for p in front.points)


def pareto_membership(rules: RuleSet, example: DataExample, error: int, size: int,
                      config: Optional[ExactConfig] = None,
                      cache: Optional[EvalCache] = None) -> bool:
    """Is (error, size) a point of the Pareto front?"""
    front = pareto_front(rules, example, config, cache)
    return any(p.error == error and p.size == size for p in front.points)


def bilevel_optimum(rules: RuleSet, example: DataExample,
                    config: Optional[ExactConfig] = None,
                    cache: Optional[EvalCache] = None) -> BilevelResult:
    """Minimize error first, then size; the result is always a front point."""
    front = pareto_front(rules, example, config, cache)
    best = front.points[0]  # ascending error; front errors are pairwise distinct
    return BilevelResult(error=best.error, size=best.size, witness=best.witness)


def is_bilevel_optimal(rules: RuleSet, example: DataExample, candidate,
                       config: Optional[ExactConfig] = None,
                       cache: Optional[EvalCache] = None) -> bool:
    """Does the candidate attain the bi-level optimal (error, size) pair?"""
    config = config or ExactConfig()
    sel = check_selection(rules, candidate)
    report = compute_errors(rules, sel, example, cache)
    if config.objective == "fp":
        if report.fn_count != 0:
            return False
        err = report.fp_count
    else:
        err = report.total
    opt = bilevel_optimum(rules, example, config, cache)
    return err == opt.error and ruleset_size(sel, rules) == opt.size
