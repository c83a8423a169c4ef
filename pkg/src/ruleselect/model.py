"""Core domain types: values, facts, instances, rule ASTs, selections, error reports.

Everything here is immutable after construction and safe to share across threads.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterable, Iterator, Mapping, Optional, Union


class ValidationError(ValueError):
    """A domain object violates its invariants (unsafe rule, bad schema, unknown name)."""


class EvaluationError(ValueError):
    """A rule references a relation the premise instance does not provide."""


class CapacityError(RuntimeError):
    """An exhaustive solver was asked to enumerate more rules than its configured cap."""


class InfeasibleError(RuntimeError):
    """FP-mode requires the full rule set to cover the truth instance; it does not."""

    def __init__(self, missing: frozenset):
        self.missing = missing
        super().__init__(f"{len(missing)} truth fact(s) not derivable by any rule")


class CoverageError(RuntimeError):
    """A blue element of a red-blue instance is not contained in any set."""


#: Builtin predicate names reserved by the rule language.  Semantics live in
#: the evaluation module; the model and parser only need the registry keys.
BUILTIN_NAMES = frozenset({"neq", "eq", "jaccard_geq", "geq", "leq"})

#: Number of terms each builtin takes (jaccard_geq additionally takes a
#: decimal threshold literal, which is not a term).
BUILTIN_TERM_COUNTS = {"neq": 2, "eq": 2, "jaccard_geq": 2, "geq": 2, "leq": 2}

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class Value:
    """A constant: UTF-8 text, or a number (64-bit integer or exact decimal).

    Equality is strict across kinds: text "1" never equals number 1.  Numbers
    compare to each other by numeric value (int 1 == Decimal("1.0")).
    """

    data: Union[str, int, Decimal]

    def __post_init__(self):
        d = self.data
        if isinstance(d, bool) or not isinstance(d, (str, int, Decimal)):
            raise ValidationError(f"unsupported value payload {d!r}")
        if isinstance(d, int) and not INT64_MIN <= d <= INT64_MAX:
            raise ValidationError(f"integer {d} outside the 64-bit range")

    @property
    def is_text(self) -> bool:
        return isinstance(self.data, str)

    def sort_key(self):
        # Total order: numbers before texts; numbers numerically, texts by code point.
        if self.is_text:
            return (1, self.data)
        return (0, self.data)

    def __repr__(self):
        return f"Value({self.data!r})"


@dataclass(frozen=True)
class Fact:
    """One tuple of a named relation; facts have set semantics inside an Instance."""

    relation: str
    args: tuple

    def __post_init__(self):
        if not self.relation:
            raise ValidationError("fact needs a relation name")
        for a in self.args:
            if not isinstance(a, Value):
                raise ValidationError(f"fact argument {a!r} is not a Value")

    def sort_key(self):
        return (self.relation, tuple(a.sort_key() for a in self.args))


def fact(relation: str, *args) -> Fact:
    """Convenience constructor: wraps raw str/int/Decimal args into Values."""
    return Fact(relation, tuple(a if isinstance(a, Value) else Value(a) for a in args))


class Instance:
    """A set of facts together with the schema (relation name -> arity) they obey."""

    __slots__ = ("schema", "facts")

    def __init__(self, schema: Mapping[str, int], facts: Iterable[Fact]):
        self.schema = dict(schema)
        self.facts = frozenset(facts)
        for name, arity in self.schema.items():
            if arity < 1:
                raise ValidationError(f"relation {name} has arity {arity} < 1")
        for f in self.facts:
            arity = self.schema.get(f.relation)
            if arity is None:
                raise ValidationError(f"fact over undeclared relation {f.relation}")
            if arity != len(f.args):
                raise ValidationError(
                    f"fact {f.relation}/{len(f.args)} does not match declared arity {arity}"
                )

    @classmethod
    def from_facts(cls, facts: Iterable[Fact], schema: Optional[Mapping[str, int]] = None):
        """Build an instance, inferring the schema from the facts when not given."""
        facts = list(facts)
        if schema is None:
            inferred: dict[str, int] = {}
            for f in facts:
                known = inferred.setdefault(f.relation, len(f.args))
                if known != len(f.args):
                    raise ValidationError(
                        f"relation {f.relation} used with arities {known} and {len(f.args)}"
                    )
            schema = inferred
        return cls(schema, facts)

    @classmethod
    def empty(cls, schema: Optional[Mapping[str, int]] = None):
        return cls(schema or {}, ())

    def relation(self, name: str) -> frozenset:
        return frozenset(f for f in self.facts if f.relation == name)

    def __len__(self):
        return len(self.facts)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return self.schema == other.schema and self.facts == other.facts

    def __hash__(self):
        return hash((frozenset(self.schema.items()), self.facts))

    def __repr__(self):
        return f"Instance({len(self.schema)} relations, {len(self.facts)} facts)"


@dataclass(frozen=True)
class Term:
    """A variable or a constant in an atom.  Exactly one of var/const is set."""

    var: Optional[str] = None
    const: Optional[Value] = None

    def __post_init__(self):
        if (self.var is None) == (self.const is None):
            raise ValidationError("term must be exactly one of variable or constant")

    @property
    def is_var(self) -> bool:
        return self.var is not None


def var(name: str) -> Term:
    return Term(var=name)


def const(v) -> Term:
    return Term(const=v if isinstance(v, Value) else Value(v))


@dataclass(frozen=True)
class RelationalAtom:
    relation: str
    terms: tuple

    def __post_init__(self):
        if not self.terms:
            raise ValidationError(f"atom {self.relation}() needs at least one term")

    def variables(self) -> Iterator[str]:
        for t in self.terms:
            if t.is_var:
                yield t.var


@dataclass(frozen=True)
class BuiltinAtom:
    name: str
    terms: tuple
    threshold: Optional[Decimal] = None

    def __post_init__(self):
        if self.name not in BUILTIN_NAMES:
            raise ValidationError(f"unknown builtin {self.name!r}")
        want = BUILTIN_TERM_COUNTS[self.name]
        if len(self.terms) != want:
            raise ValidationError(f"builtin {self.name} takes {want} terms")
        if (self.name == "jaccard_geq") != (self.threshold is not None):
            raise ValidationError(f"builtin {self.name}: bad threshold usage")

    def variables(self) -> Iterator[str]:
        for t in self.terms:
            if t.is_var:
                yield t.var


Atom = Union[RelationalAtom, BuiltinAtom]


@dataclass(frozen=True)
class Rule:
    """A Horn rule: conjunctive premise over the premise schema, single conclusion atom.

    Safety (every conclusion/builtin variable bound by a relational premise
    atom) is checked by `validate` and at parse time, not at construction, so
    that invalid rules can be represented and reported on.
    """

    name: str
    premise: tuple
    head: RelationalAtom

    def __post_init__(self):
        if not self.name:
            raise ValidationError("rule needs a name")
        if not self.premise:
            raise ValidationError(f"rule {self.name}: premise must be non-empty")

    def relational_atoms(self) -> list:
        return [a for a in self.premise if isinstance(a, RelationalAtom)]

    def builtin_atoms(self) -> list:
        return [a for a in self.premise if isinstance(a, BuiltinAtom)]

    def unsafe_variables(self) -> list:
        """Conclusion/builtin variables not bound by any relational premise atom."""
        bound = {v for a in self.relational_atoms() for v in a.variables()}
        unsafe = []
        for v in self.head.variables():
            if v not in bound and v not in unsafe:
                unsafe.append(v)
        for a in self.builtin_atoms():
            for v in a.variables():
                if v not in bound and v not in unsafe:
                    unsafe.append(v)
        return unsafe


class RuleSet:
    """An ordered collection of uniquely named rules over disjoint schemas S and T."""

    __slots__ = ("rules", "premise_schema", "conclusion_schema", "_by_name")

    def __init__(self, rules: Iterable[Rule], premise_schema: Mapping[str, int],
                 conclusion_schema: Mapping[str, int]):
        self.rules = tuple(rules)
        self.premise_schema = dict(premise_schema)
        self.conclusion_schema = dict(conclusion_schema)
        self._by_name = {}
        for r in self.rules:
            if r.name in self._by_name:
                raise ValidationError(f"duplicate rule name {r.name!r}")
            self._by_name[r.name] = r
        overlap = set(self.premise_schema) & set(self.conclusion_schema)
        if overlap:
            raise ValidationError(
                f"premise and conclusion schemas overlap on {sorted(overlap)}"
            )

    @classmethod
    def infer(cls, rules: Iterable[Rule]) -> "RuleSet":
        """Infer schemas from atom usage: premise relations -> S, conclusions -> T."""
        rules = tuple(rules)
        prem: dict[str, int] = {}
        conc: dict[str, int] = {}
        for r in rules:
            for a in r.relational_atoms():
                known = prem.setdefault(a.relation, len(a.terms))
                if known != len(a.terms):
                    raise ValidationError(
                        f"relation {a.relation} used with arities {known} and {len(a.terms)}"
                    )
            known = conc.setdefault(r.head.relation, len(r.head.terms))
            if known != len(r.head.terms):
                raise ValidationError(
                    f"relation {r.head.relation} used with arities "
                    f"{known} and {len(r.head.terms)}"
                )
        return cls(rules, prem, conc)

    def names(self) -> tuple:
        return tuple(r.name for r in self.rules)

    def rule(self, name: str) -> Rule:
        try:
            return self._by_name[name]
        except KeyError:
            raise ValidationError(f"unknown rule name {name!r}") from None

    def __len__(self):
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def __eq__(self, other):
        if not isinstance(other, RuleSet):
            return NotImplemented
        return (self.rules == other.rules
                and self.premise_schema == other.premise_schema
                and self.conclusion_schema == other.conclusion_schema)

    def __repr__(self):
        return f"RuleSet({len(self.rules)} rules)"


@dataclass(frozen=True)
class DataExample:
    """A premise instance paired with a ground-truth conclusion instance."""

    premise: Instance
    truth: Instance


#: A selection is the set of chosen rule names.
Selection = frozenset


def check_selection(rules: RuleSet, selection: Iterable[str]) -> Selection:
    """Normalize to a frozenset and reject names that are not in the rule set."""
    sel = frozenset(selection)
    unknown = sel - set(rules.names())
    if unknown:
        raise ValidationError(f"selection references unknown rules {sorted(unknown)}")
    return sel


@dataclass(frozen=True)
class ErrorReport:
    """False positives and false negatives of a selection against a data example."""

    fp: frozenset
    fn: frozenset

    @property
    def fp_count(self) -> int:
        return len(self.fp)

    @property
    def fn_count(self) -> int:
        return len(self.fn)

    @property
    def total(self) -> int:
        return len(self.fp) + len(self.fn)


@dataclass(frozen=True)
class EvalLimits:
    """Bounds that keep evaluation polynomial: atoms per premise, conclusion arity."""

    max_premise_atoms: int
    max_conclusion_arity: int

    def __post_init__(self):
        if self.max_premise_atoms < 1 or self.max_conclusion_arity < 1:
            raise ValidationError("evaluation limits must be positive")


@dataclass(frozen=True)
class ParetoPoint:
    """An (error, size) pair, optionally with a selection realizing it."""

    error: int
    size: int
    witness: Optional[Selection] = None


def display_var(name: str) -> str:
    """Render a variable for messages; parser-generated anonymous vars show as `_`."""
    return "_" if name.startswith("_#") else name


@dataclass(frozen=True)
class Violation:
    rule: Optional[str]
    reason: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations


def rule_size(rule: Rule) -> int:
    """Number of premise atoms, relational and builtin alike."""
    return len(rule.premise)


def ruleset_size(selection: Iterable[str], rules: RuleSet) -> int:
    """Sum of rule sizes over the chosen rules; 0 for the empty selection."""
    sel = check_selection(rules, selection)
    return sum(rule_size(rules.rule(name)) for name in sel)


def validate(rules: RuleSet, limits: Optional[EvalLimits] = None) -> ValidationReport:
    """Check safety, schema disjointness, and (when given) evaluation limits.

    Returns a report rather than raising, so that every violation can be
    listed with the offending rule's name.
    """
    violations = []
    overlap = set(rules.premise_schema) & set(rules.conclusion_schema)
    if overlap:
        violations.append(Violation(None, f"schemas overlap on {sorted(overlap)}"))
    for r in rules.rules:
        for a in r.relational_atoms():
            arity = rules.premise_schema.get(a.relation)
            if arity is None:
                violations.append(Violation(r.name, f"undeclared premise relation {a.relation}"))
            elif arity != len(a.terms):
                violations.append(Violation(
                    r.name, f"{a.relation} used with arity {len(a.terms)}, declared {arity}"))
        arity = rules.conclusion_schema.get(r.head.relation)
        if arity is None:
            violations.append(Violation(r.name, f"undeclared conclusion relation {r.head.relation}"))
        elif arity != len(r.head.terms):
            violations.append(Violation(
                r.name, f"{r.head.relation} used with arity {len(r.head.terms)}, declared {arity}"))
        unsafe = r.unsafe_variables()
        if unsafe:
            shown = ", ".join(display_var(v) for v in unsafe)
            violations.append(Violation(r.name, f"unsafe: {shown} unbound"))
        if limits is not None:
            if rule_size(r) > limits.max_premise_atoms:
                violations.append(Violation(
                    r.name,
                    f"premise has {rule_size(r)} atoms, limit {limits.max_premise_atoms}"))
            if len(r.head.terms) > limits.max_conclusion_arity:
                violations.append(Violation(
                    r.name,
                    f"conclusion arity {len(r.head.terms)} exceeds limit "
                    f"{limits.max_conclusion_arity}"))
    return ValidationReport(tuple(violations))
