"""Weighted temporal knowledge bases, the support-weight function and grounding.

A knowledge base pairs every formula with a certainty weight in ``[0, 1]``:
ground literals as facts, implications with variables as rules.  Grounding
produces the *maximal instantiation*: the facts plus every rule instance
whose premises are all derivable, weighted by the weakest link used to build
it.  Any subset of the maximal instantiation is a *state* that the semantics
layer can score.

Weights are exact fractions constructed from decimal strings, so grounding
and support weights never pick up binary floating point drift.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .kernel import (
    Constant,
    Formula,
    Literal,
    Rule,
    Signature,
    TEMPORAL_SORT,
    TimePoint,
    _match_literal,
    closure_literals,
    match_premises,
    substitute,
    substitute_literal,
    validate_signature,
)
from .temporal import Timeline

Weight = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


class NetworkError(Exception):
    """Invalid knowledge-base content."""


class NotDerivableError(NetworkError):
    """The target of a support-weight query is not derivable."""


def as_weight(value: Union[str, int, Fraction]) -> Weight:
    """Parse a certainty weight; decimal strings stay exact."""
    w = Fraction(value)
    if not ZERO <= w <= ONE:
        raise NetworkError(f"weight {value!r} outside [0, 1]")
    return w


def weight_str(w: Union[Fraction, float]) -> str:
    """Render a weight or score as a decimal string without float drift."""
    if isinstance(w, float):
        return format(w, ".12g")
    if w.denominator == 1:
        return str(w.numerator)
    # Weights come from decimal strings, so the denominator is 2^a * 5^b.
    den = w.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return format(float(w), ".12g")
    digits = max(twos, fives)
    scaled = w.numerator * 10**digits // w.denominator
    sign = "-" if scaled < 0 else ""
    text = str(abs(scaled)).rjust(digits + 1, "0")
    whole, frac = text[:-digits], text[-digits:].rstrip("0")
    return f"{sign}{whole}.{frac}" if frac else sign + whole


@dataclass(frozen=True)
class WeightedFormula:
    """A formula paired with its certainty."""

    formula: Formula
    weight: Weight

    def __post_init__(self) -> None:
        if not ZERO <= self.weight <= ONE:
            raise NetworkError(f"weight {self.weight} outside [0, 1]")

    def __str__(self) -> str:
        return f"({self.formula}, {weight_str(self.weight)})"


Instantiation = frozenset[WeightedFormula]


def _term_key(t):
    if isinstance(t, TimePoint):
        return (0, t.value, "")
    if isinstance(t, Constant):
        return (1, 0, t.name)
    return (2, 0, t.name)


def _literal_key(lit: Literal):
    return (
        lit.predicate,
        tuple(_term_key(a) for a in lit.args),
        _term_key(lit.lower),
        _term_key(lit.upper),
        0 if lit.positive else 1,
    )


def formula_key(f: Formula):
    """Total order over formulae: facts first, then rules, each structurally."""
    if isinstance(f, Literal):
        return (0, _literal_key(f))
    return (
        1,
        (
            f.label or "",
            tuple(_literal_key(p) for p in f.premises),
            _literal_key(f.conclusion),
        ),
    )


def canonical_order(items: Iterable[WeightedFormula]) -> tuple[WeightedFormula, ...]:
    """Deterministic serialization order of weighted formulae."""
    return tuple(sorted(items, key=lambda wf: (formula_key(wf.formula), wf.weight)))


@dataclass(frozen=True)
class TMLN:
    """A temporal knowledge base: weighted ground facts and weighted rules."""

    signature: Signature
    timeline: Timeline
    facts: frozenset[WeightedFormula] = frozenset()
    rules: frozenset[WeightedFormula] = frozenset()

    def validate(self) -> list[str]:
        """Structural report: empty iff every invariant holds."""
        report = validate_signature(self.signature)
        seen: dict[Formula, Weight] = {}
        for wf in self.facts:
            f = wf.formula
            if not isinstance(f, Literal):
                report.append(f"fact {f} is not a literal")
                continue
            if not f.is_ground:
                report.append(f"fact {f} is not ground")
            report.extend(self._check_literal(f))
            if f in seen and seen[f] != wf.weight:
                report.append(f"fact {f} declared with conflicting weights")
            seen[f] = wf.weight
        for wf in self.rules:
            r = wf.formula
            if not isinstance(r, Rule):
                report.append(f"rule entry {r} is not a rule")
                continue
            if not r.variables():
                report.append(f"rule {r} has no variables")
            for lit in (*r.premises, r.conclusion):
                report.extend(self._check_literal(lit))
        return report

    def _check_literal(self, lit: Literal) -> list[str]:
        report = []
        sig = self.signature
        if lit.predicate not in sig.predicates:
            return [f"unknown predicate {lit.predicate!r}"]
        expected = sig.predicates[lit.predicate]
        if len(lit.args) != len(expected):
            report.append(
                f"{lit.predicate!r} takes {len(expected) + 2} arguments, got {len(lit.args) + 2}"
            )
            return report
        for term, sort in zip(lit.args, expected):
            if isinstance(term, TimePoint):
                report.append(f"time point {term} in non-temporal position of {lit}")
            elif term.sort != sort:
                report.append(f"{term} has sort {term.sort!r}, expected {sort!r} in {lit}")
            if isinstance(term, Constant) and term.name not in sig.constants:
                report.append(f"unknown constant {term.name!r}")
        for bound in (lit.lower, lit.upper):
            if isinstance(bound, TimePoint) and bound.value not in self.timeline:
                report.append(f"time point {bound} of {lit} outside the timeline")
        if isinstance(lit.lower, TimePoint) and isinstance(lit.upper, TimePoint):
            if lit.lower.value > lit.upper.value:
                report.append(f"inverted bounds in {lit}")
        return report


def tf(items: Union[TMLN, Iterable[WeightedFormula]]) -> frozenset[Formula]:
    """Project away the weights, merging duplicate formulae."""
    return frozenset(wf.formula for wf in _weighted(items))


def _weighted(items: Union[TMLN, Iterable[WeightedFormula]]) -> tuple[WeightedFormula, ...]:
    if isinstance(items, TMLN):
        return canonical_order(items.facts | items.rules)
    return canonical_order(items)


def _derivations(
    target: Literal,
    items: Sequence[WeightedFormula],
    universe: frozenset[Literal],
    goals: frozenset[Literal],
) -> list[frozenset[WeightedFormula]]:
    """All support sets for ``target``: derivation trees over ``items``.

    ``goals`` guards against revisiting a literal on the same derivation
    path; such trees are redundant for minimal-support purposes.
    """
    if target in goals:
        return []
    goals = goals | {target}
    supports: list[frozenset[WeightedFormula]] = []
    for wf in items:
        f = wf.formula
        if isinstance(f, Literal):
            if f == target:
                supports.append(frozenset({wf}))
            continue
        head_binding: dict = {}
        if not _match_literal(f.conclusion, target, head_binding):
            continue
        for binding in match_premises(f.premises, universe, head_binding):
            premise_choices: list[list[frozenset[WeightedFormula]]] = []
            feasible = True
            for p in f.premises:
                ground_p = substitute_literal(p, binding)
                choice = _derivations(ground_p, items, universe, goals)
                if not choice:
                    feasible = False
                    break
                premise_choices.append(choice)
            if not feasible:
                continue
            combos: list[frozenset[WeightedFormula]] = [frozenset({wf})]
            for choice in premise_choices:
                combos = [c | extra for c in combos for extra in choice]
            supports.extend(combos)
    return supports


def minimal_supports(
    target: Literal, items: Union[TMLN, Iterable[WeightedFormula]]
) -> list[frozenset[WeightedFormula]]:
    """Inclusion-minimal subsets whose formulae entail ``target``."""
    seq = _weighted(items)
    universe = closure_literals(tf(seq))
    if target not in universe:
        return []
    all_supports = _derivations(target, seq, universe, frozenset())
    minimal = [
        s for s in all_supports if not any(o < s for o in all_supports)
    ]
    out: list[frozenset[WeightedFormula]] = []
    for s in minimal:
        if s not in out:
            out.append(s)
    return out


def weight_of(target: Literal, items: Union[TMLN, Iterable[WeightedFormula]]) -> Weight:
    """Maximal weight at which ``target`` is deducible.

    Maximum over the inclusion-minimal entailing subsets of the minimum
    weight inside each subset.  Raises when the target is not derivable.
    """
    supports = minimal_supports(target, items)
    if not supports:
        raise NotDerivableError(f"{target} is not derivable")
    return max(min(wf.weight for wf in s) for s in supports)


def _conclusion_bindings(rule: Rule, binding: dict, M: TMLN) -> list[dict]:
    """Extend a premise binding over variables that occur only in the conclusion."""
    free = [v for v in rule.conclusion.variables() if v not in binding]
    if not free:
        return [binding]
    out = [binding]
    for var in free:
        if var.sort == TEMPORAL_SORT:
            values = [TimePoint(t) for t in range(M.timeline.lower, M.timeline.upper + 1)]
        else:
            values = [
                Constant(name, sort)
                for name, sort in sorted(M.signature.constants.items())
                if sort == var.sort
            ]
        extended = []
        for b in out:
            for v in values:
                nb = dict(b)
                nb[var] = v
                extended.append(nb)
        out = extended
    return out


def ground(M: TMLN) -> Instantiation:
    """The maximal instantiation: facts plus every derivable rule instance.

    A rule instance qualifies when each instantiated premise is in the
    derivability closure of the knowledge base; its weight is the minimum of
    the rule's weight and the support weights of its premises.  Two bindings
    yielding the same ground rule are merged, keeping the larger weight.
    """
    universe = closure_literals(tf(M))
    instances: dict[Rule, Weight] = {}
    for wf in M.rules:
        rule = wf.formula
        assert isinstance(rule, Rule)
        for binding in match_premises(rule.premises, universe):
            for full in _conclusion_bindings(rule, binding, M):
                gr = substitute(rule, full)
                w = min(
                    (weight_of(p, M) for p in gr.premises),
                    default=ONE,
                )
                w = min(wf.weight, w)
                if gr not in instances or instances[gr] < w:
                    instances[gr] = w
    members = set(M.facts) | {WeightedFormula(r, w) for r, w in instances.items()}
    return frozenset(members)
