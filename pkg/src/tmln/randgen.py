"""Seeded random inputs for property suites and audits.

Generated knowledge bases are small by design: a handful of constants and
predicates over a short timeline, so complementary literals collide often
and the consistency relations get exercised on interesting overlaps.  Rules
are range-restricted (conclusion variables occur in premises) and always
labeled.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Optional

from .kernel import Constant, Formula, Literal, Rule, Signature, TEMPORAL_SORT, TimePoint, Variable
from .network import TMLN, WeightedFormula, ground
from .semantics import AuditSample
from .temporal import Timeline

OBJECT_SORT = "Obj"

_FRESH_PREFIX = "Zx"


def random_weight(rng: random.Random, nonzero: bool = False) -> Fraction:
    lo = 1 if nonzero else 0
    return Fraction(rng.randint(lo, 10), 10)


def _interval(rng: random.Random, timeline: Timeline) -> tuple[TimePoint, TimePoint]:
    a = rng.randint(timeline.lower, timeline.upper)
    b = rng.randint(timeline.lower, timeline.upper)
    return TimePoint(min(a, b)), TimePoint(max(a, b))


def _constants(count: int) -> list[Constant]:
    return [Constant(name, OBJECT_SORT) for name in ("A", "B", "C")[:count]]


def random_literal(
    rng: random.Random,
    timeline: Timeline,
    predicates: list[tuple[str, int]],
    constants: list[Constant],
) -> Literal:
    name, arity = rng.choice(predicates)
    args = tuple(rng.choice(constants) for _ in range(arity))
    lower, upper = _interval(rng, timeline)
    return Literal(rng.random() < 0.7, name, args, lower, upper)


def random_formula_set(
    rng: random.Random,
    timeline: Optional[Timeline] = None,
    max_literals: int = 6,
    allow_rules: bool = True,
) -> list[Formula]:
    """Ground formulae with frequent complementary collisions."""
    timeline = timeline or Timeline(0, 12)
    predicates = [("P", 1), ("Q", 1), ("S", 2)][: rng.randint(1, 3)]
    constants = _constants(rng.randint(1, 2))
    out: list[Formula] = [
        random_literal(rng, timeline, predicates, constants)
        for _ in range(rng.randint(0, max_literals))
    ]
    if allow_rules and rng.random() < 0.4 and out:
        premises = tuple(
            rng.choice([f for f in out if isinstance(f, Literal)])
            for _ in range(rng.randint(1, 2))
        )
        head = random_literal(rng, timeline, predicates, constants)
        out.append(Rule(premises, head, label="G"))
    return out


def random_tmln(
    rng: random.Random,
    max_mi: int = 12,
    certain_rules: bool = False,
    max_facts: int = 6,
    max_rules: int = 2,
) -> TMLN:
    """A valid knowledge base whose maximal instantiation fits ``max_mi``.

    Rule premises are lifted from generated facts (first argument abstracted
    to a variable, bounds to variables), so most rules actually instantiate
    and grounding, support weights and the consistency relations all get
    non-trivial inputs.
    """
    while True:
        timeline = Timeline(0, rng.randint(6, 12))
        constants = _constants(rng.randint(1, 3))
        arities = {f"P{i}": rng.randint(1, 2) for i in range(rng.randint(2, 4))}
        signature = Signature(
            sorts=frozenset({OBJECT_SORT, TEMPORAL_SORT}),
            constants={c.name: c.sort for c in constants},
            predicates={n: (OBJECT_SORT,) * a for n, a in arities.items()},
        )
        predicates = [(n, a) for n, a in sorted(arities.items())]

        facts: dict[Literal, Fraction] = {}
        for _ in range(rng.randint(2, max_facts)):
            lit = random_literal(rng, timeline, predicates, constants)
            facts.setdefault(lit, random_weight(rng))
        fact_list = sorted(facts, key=str)

        rules: list[WeightedFormula] = []
        x = Variable("x", OBJECT_SORT)
        for r in range(rng.randint(0, max_rules)):
            templates = [
                fact_list[rng.randrange(len(fact_list))]
                for _ in range(rng.randint(1, 2))
            ]
            premises = []
            for i, template in enumerate(templates):
                args = tuple(
                    x if j == 0 else t for j, t in enumerate(template.args)
                )
                t1 = Variable(f"t{2 * i}", TEMPORAL_SORT)
                t2 = Variable(f"t{2 * i + 1}", TEMPORAL_SORT)
                premises.append(Literal(template.positive, template.predicate, args, t1, t2))
            head_name, head_arity = rng.choice(predicates)
            head_args = tuple(x for _ in range(head_arity))
            if rng.random() < 0.5:
                bounds = (TimePoint(timeline.lower), TimePoint(timeline.upper))
            else:
                bounds = _interval(rng, timeline)
            head = Literal(rng.random() < 0.6, head_name, head_args, *bounds)
            rule = Rule(tuple(premises), head, label=f"R{r + 1}")
            weight = Fraction(1) if certain_rules else random_weight(rng, nonzero=True)
            rules.append(WeightedFormula(rule, weight))

        M = TMLN(
            signature=signature,
            timeline=timeline,
            facts=frozenset(WeightedFormula(l, w) for l, w in facts.items()),
            rules=frozenset(rules),
        )
        if M.validate():
            continue
        size = len(ground(M))
        if size > max_mi:
            continue
        # Bias toward states with real structure; keep a few tiny ones.
        if size >= 3 or rng.random() < 0.1:
            return M


def fresh_predicate_fact(
    M: TMLN, rng: random.Random, weight: Fraction
) -> tuple[TMLN, WeightedFormula]:
    """Extend the signature with an unused predicate and assert one fact on it.

    The new literal cannot complete any rule premise or contradict anything,
    so it is novel under bound homogenization and consistent with every
    state.
    """
    n = 0
    while f"{_FRESH_PREFIX}{n}" in M.signature.predicates:
        n += 1
    name = f"{_FRESH_PREFIX}{n}"
    constants = sorted(M.signature.constants) or ["A"]
    const_name = rng.choice(constants)
    const_sort = M.signature.constants.get(const_name, OBJECT_SORT)
    lower = TimePoint(rng.randint(M.timeline.lower, M.timeline.upper))
    upper = TimePoint(rng.randint(lower.value, M.timeline.upper))
    lit = Literal(True, name, (Constant(const_name, const_sort),), lower, upper)
    wf = WeightedFormula(lit, weight)
    signature = Signature(
        sorts=M.signature.sorts,
        constants=dict(M.signature.constants) or {const_name: const_sort},
        predicates={**M.signature.predicates, name: (const_sort,)},
    )
    extended = TMLN(
        signature=signature,
        timeline=M.timeline,
        facts=M.facts | {wf},
        rules=M.rules,
    )
    return extended, wf


def random_instantiation(
    rng: random.Random, timeline: Optional[Timeline] = None, max_size: int = 5
) -> tuple[WeightedFormula, ...]:
    """A small ground state: weighted literals plus an occasional ground rule."""
    timeline = timeline or Timeline(0, 12)
    formulae = random_formula_set(rng, timeline, max_literals=max_size)
    return tuple(WeightedFormula(f, random_weight(rng)) for f in formulae)


def random_audit_samples(rng: random.Random, count: int) -> list[AuditSample]:
    """States paired with fresh-predicate extensions for the audit conditions."""
    timeline = Timeline(0, 12)
    samples = []
    for i in range(count):
        items = random_instantiation(rng, timeline)
        lower, upper = _interval(rng, timeline)
        fresh = Literal(
            True,
            f"{_FRESH_PREFIX}fresh",
            (Constant("A", OBJECT_SORT),),
            lower,
            upper,
        )
        samples.append(
            AuditSample(
                items=items,
                timeline=timeline,
                fresh=fresh,
                fresh_weight=random_weight(rng, nonzero=True),
            )
        )
    return samples


def random_weight_tuples(rng: random.Random, count: int) -> list[tuple[Fraction, ...]]:
    out = []
    for _ in range(count):
        out.append(tuple(random_weight(rng) for _ in range(rng.randint(0, 6))))
    return out
