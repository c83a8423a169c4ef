from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ruleselect import (
    DataExample,
    EvalCache,
    EvalLimits,
    EvaluationError,
    Instance,
    ValidationError,
    Value,
    check_fp_feasible,
    compute_errors,
    eval_rule,
    eval_ruleset,
    fact,
    jaccard,
    parse_facts,
    parse_rules,
)
from ruleselect.generators import GenSeed, gen_random_ruleselect

from oracles import naive_eval_rule


def names(facts):
    return sorted(f.args[0].data for f in facts)


def test_eval_rule_f1(f1):
    rules, example = f1
    out = eval_rule(rules.rule("r1"), example.premise)
    assert names(out) == ["a1", "u1", "u2"]


def test_eval_rule_path_join():
    rules = parse_rules('rule p: E(x,z), E(z,y) -> F(x,y).')
    premise = parse_facts('E(1, 2)\nE(2, 3)')
    out = eval_rule(rules.rule("p"), premise)
    assert out == frozenset({fact("F", 1, 3)})


def test_eval_rule_empty_premise(f1):
    rules, _ = f1
    empty = Instance({"Set1": 1, "Set2": 1, "Set3": 1}, ())
    assert eval_rule(rules.rule("r1"), empty) == frozenset()


def test_eval_rule_unknown_relation(f1):
    rules, _ = f1
    with pytest.raises(EvaluationError):
        eval_rule(rules.rule("r1"), Instance({"Other": 1}, ()))


def test_eval_rule_respects_limits(f1):
    rules, example = f1
    eval_rule(rules.rule("r1"), example.premise, EvalLimits(1, 1))
    wide = parse_rules('rule w: E(x,z), E(z,y) -> F(x,y).')
    with pytest.raises(ValidationError):
        eval_rule(wide.rule("w"), parse_facts('E(1, 2)'), EvalLimits(1, 1))


def test_eval_ruleset_unions(f1):
    rules, example = f1
    out = eval_ruleset(rules, {"r1", "r2"}, example.premise)
    assert names(out) == ["a1", "a2", "u1", "u2", "u3"]
    assert eval_ruleset(rules, frozenset(), example.premise) == frozenset()
    assert len(eval_ruleset(rules, {"r1", "r2", "r3"}, example.premise)) == 6


def test_eval_cache_reuse_and_mismatch(f1):
    rules, example = f1
    cache = EvalCache(rules, example.premise)
    assert eval_ruleset(rules, {"r1"}, example.premise, cache) == cache.per_rule["r1"]
    other = parse_rules('rule q: Z(x) -> B(x).')
    with pytest.raises(ValidationError):
        eval_ruleset(other, {"q"}, example.premise, cache)


def test_compute_errors_f1(f1):
    rules, example = f1
    rep = compute_errors(rules, {"r1"}, example)
    assert (names(rep.fp), names(rep.fn), rep.total) == (["a1"], ["u3"], 2)
    rep0 = compute_errors(rules, frozenset(), example)
    assert rep0.fp == frozenset() and rep0.fn == example.truth.facts and rep0.total == 3
    rep12 = compute_errors(rules, {"r1", "r2"}, example)
    assert (names(rep12.fp), rep12.fn, rep12.total) == (["a1", "a2"], frozenset(), 2)


def test_check_fp_feasible(f1):
    rules, example = f1
    assert check_fp_feasible(rules, example).ok
    extra = Instance({"B": 1}, list(example.truth.facts) + [fact("B", "zz")])
    feas = check_fp_feasible(rules, DataExample(example.premise, extra))
    assert not feas.ok and names(feas.missing) == ["zz"]
    none = parse_rules("")
    feas2 = check_fp_feasible(none, DataExample(Instance.empty(), extra))
    assert not feas2.ok and feas2.missing == extra.facts


def test_jaccard_values():
    assert jaccard(Value("univ of california"), Value("univ of california")) == 1
    assert jaccard(Value("department of medicine stanford"),
                   Value("school of medicine stanford")) == Fraction(3, 5)
    assert jaccard(Value(""), Value("")) == 1
    assert jaccard(Value(42), Value("42")) == 1  # numbers are rendered to text


def test_builtin_comparisons():
    rules = parse_rules(
        'rule g: N(x), geq(x, 3) -> Big(x).\n'
        'rule l: N(x), leq(x, 3) -> Small(x).\n'
        'rule t: W(x), geq(x, 0) -> Never(x).\n')
    premise = parse_facts('N(2)\nN(3)\nN(4)\nW("abc")')
    assert names(eval_rule(rules.rule("g"), premise)) == [3, 4]
    assert names(eval_rule(rules.rule("l"), premise)) == [2, 3]
    assert eval_rule(rules.rule("t"), premise) == frozenset()  # cross-kind is false


def test_jaccard_filter_in_rule():
    rules = parse_rules(
        'rule s: A(x,u), A(y,v), neq(x,y), jaccard_geq(u,v,0.5) -> L(x,y).')
    premise = parse_facts(
        'A("p1", "dept of medicine stanford")\n'
        'A("p2", "school of medicine stanford")\n'
        'A("p3", "univ of california")\n')
    out = eval_rule(rules.rule("s"), premise)
    pairs = sorted((f.args[0].data, f.args[1].data) for f in out)
    assert pairs == [("p1", "p2"), ("p2", "p1")]


@given(st.text(max_size=40), st.text(max_size=40))
def test_jaccard_properties(a, b):
    va, vb = Value(a), Value(b)
    sim = jaccard(va, vb)
    assert 0 <= sim <= 1
    assert sim == jaccard(vb, va)
    assert jaccard(va, va) == 1


@given(st.integers(min_value=0, max_value=10**6),
       st.lists(st.sampled_from(["r1", "r2", "r3", "r4", "j1"]), unique=True),
       st.lists(st.sampled_from(["r1", "r2", "r3", "r4", "j1"]), unique=True))
def test_eval_monotone_in_selection(seed, a, b):
    rules, example = gen_random_ruleselect(
        GenSeed(seed=seed, n_universe=5, n_sets=5, density=0.4,
                fp_noise=0.3, fn_noise=0.1, join_rules=1))
    cache = EvalCache(rules, example.premise)
    small = frozenset(a)
    large = small | frozenset(b)
    assert cache.eval_selection(small) <= cache.eval_selection(large)
    rep_s = compute_errors(rules, small, example, cache)
    rep_l = compute_errors(rules, large, example, cache)
    assert rep_l.fn_count <= rep_s.fn_count
    assert rep_l.fp_count >= rep_s.fp_count


@given(st.integers(min_value=0, max_value=10**6))
def test_error_report_consistency(seed):
    rules, example = gen_random_ruleselect(
        GenSeed(seed=seed, n_universe=6, n_sets=4, density=0.4,
                fp_noise=0.2, fn_noise=0.2, join_rules=1))
    cache = EvalCache(rules, example.premise)
    rep = compute_errors(rules, frozenset(rules.names()), example, cache)
    assert rep.fp & example.truth.facts == frozenset()
    assert rep.fn <= example.truth.facts
    assert rep.total == rep.fp_count + rep.fn_count
    assert (rep.fn_count == 0) == check_fp_feasible(rules, example, cache).ok


RULE_CORPUS = [
    'rule a: P(x) -> Out(x).',
    'rule b: P(x), Q(x) -> Out(x).',
    'rule c: R(x,y), Q(y) -> Out(x).',
    'rule d: R(x,y), R(y,z) -> Pair(x,z).',
    'rule e: R(x,y), neq(x,y) -> Pair(x,y).',
    'rule f: P(x), R(x,y), leq(y, 3) -> Out(y).',
    'rule g: R(x,x) -> Out(x).',
    'rule h: P(x), Q(y), jaccard_geq(x, y, 0.5) -> Pair(x,y).',
    'rule i: R(_, y) -> Out(y).',
]


@given(st.integers(min_value=0, max_value=10**6),
       st.sampled_from(RULE_CORPUS))
def test_eval_rule_matches_naive_oracle(seed, rule_text):
    import random

    rng = random.Random(seed)
    consts = ['"a b"', '"b c"', '"c"', "1", "2", "3"]
    lines = []
    for rel, arity in (("P", 1), ("Q", 1), ("R", 2)):
        for _ in range(rng.randrange(0, 7)):
            args = ", ".join(rng.choice(consts) for _ in range(arity))
            lines.append(f"{rel}({args})")
    premise = parse_facts("\n".join(lines), schema={"P": 1, "Q": 1, "R": 2})
    rules = parse_rules(rule_text)
    (rule,) = rules.rules
    assert eval_rule(rule, premise) == naive_eval_rule(rule, premise)
