"""Hypothesis strategies for temporal knowledge-base values."""

from fractions import Fraction

from hypothesis import strategies as st

from tmln.kernel import Constant, Literal, Rule, TimePoint
from tmln.network import WeightedFormula
from tmln.temporal import Timeline

TIMELINE = Timeline(0, 12)

OBJ = "Obj"

constants = st.sampled_from([Constant(n, OBJ) for n in ("A", "B", "C")])
predicates = st.sampled_from(["P", "Q", "S"])
weights = st.integers(min_value=0, max_value=10).map(lambda k: Fraction(k, 10))


@st.composite
def intervals(draw):
    a = draw(st.integers(TIMELINE.lower, TIMELINE.upper))
    b = draw(st.integers(TIMELINE.lower, TIMELINE.upper))
    return TimePoint(min(a, b)), TimePoint(max(a, b))


@st.composite
def literals(draw):
    lower, upper = draw(intervals())
    return Literal(
        draw(st.booleans()),
        draw(predicates),
        (draw(constants),),
        lower,
        upper,
    )


@st.composite
def formula_sets(draw, max_size=6, with_rules=True):
    lits = draw(st.lists(literals(), max_size=max_size))
    out = list(dict.fromkeys(lits))
    if with_rules and out and draw(st.booleans()):
        k = draw(st.integers(1, min(2, len(out))))
        head = draw(literals())
        out.append(Rule(tuple(out[:k]), head, label="G"))
    return out


@st.composite
def instantiations(draw, max_size=5):
    formulae = draw(formula_sets(max_size=max_size))
    return tuple(WeightedFormula(f, draw(weights)) for f in formulae)


weight_tuples = st.lists(weights, min_size=0, max_size=6).map(tuple)
