"""Timeline, time intervals, homogenization and temporal consistency relations.

Time is a bounded discrete axis of integers.  The interval extractor turns a
pair of bounds into the closed range of points between them; all interval set
operations are done by range arithmetic on the bound pairs, never by
materializing point sets.

Consistency between a set of formulae is judged on complementary literal
pairs in the derivability closure: ``P(args, t1, t1')`` against
``!P(args, t2, t2')``.  Four relations are supported:

* ``pCon``  -- every pair leaves time on both sides (neither interval
  swallows the other);
* ``tCon``  -- every pair is disjoint;
* ``pInc``  -- some pair overlaps;
* ``tInc``  -- some pair covers exactly the same interval.

``tCon`` and ``pInc`` are complements; ``tCon => pCon => !tInc`` and dually
``tInc => !pCon => pInc``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Iterator

from .kernel import (
    Formula,
    GroundnessError,
    Literal,
    Rule,
    TimePoint,
    closure_literals,
)


class TemporalError(Exception):
    """Invalid interval or timeline usage."""


@dataclass(frozen=True)
class Timeline:
    """Inclusive integer bounds of the time axis."""

    lower: int
    upper: int

    def __post_init__(self) -> None:
        if self.lower > self.upper:
            raise TemporalError(f"timeline bounds inverted: {self.lower} > {self.upper}")

    def __contains__(self, value: int) -> bool:
        return self.lower <= value <= self.upper

    def span(self) -> "TimeInterval":
        return TimeInterval(self.lower, self.upper)


@dataclass(frozen=True)
class TimeInterval:
    """Closed, non-empty range of integer time points."""

    lower: int
    upper: int

    def __post_init__(self) -> None:
        if self.lower > self.upper:
            raise TemporalError(f"inverted bounds: {self.lower} > {self.upper}")

    def __len__(self) -> int:
        return self.upper - self.lower + 1

    def __iter__(self) -> Iterator[int]:
        return iter(range(self.lower, self.upper + 1))

    def intersects(self, other: "TimeInterval") -> bool:
        return max(self.lower, other.lower) <= min(self.upper, other.upper)

    def difference_nonempty(self, other: "TimeInterval") -> bool:
        """True iff some point of ``self`` lies outside ``other``."""
        return self.lower < other.lower or self.upper > other.upper


def ti(t1: int | TimePoint, t2: int | TimePoint, timeline: Timeline | None = None) -> TimeInterval:
    """Extract the interval of time points between two bounds.

    Bounds must not be inverted and, when a timeline is given, must lie on it.
    """
    lo = t1.value if isinstance(t1, TimePoint) else t1
    hi = t2.value if isinstance(t2, TimePoint) else t2
    if lo > hi:
        raise TemporalError(f"inverted bounds: {lo} > {hi}")
    if timeline is not None and (lo not in timeline or hi not in timeline):
        raise TemporalError(f"bounds [{lo}, {hi}] outside timeline [{timeline.lower}, {timeline.upper}]")
    return TimeInterval(lo, hi)


class Relation(enum.Enum):
    """The four temporal (in)consistency relations."""

    PCON = "pCon"
    TCON = "tCon"
    PINC = "pInc"
    TINC = "tInc"

    @classmethod
    def from_token(cls, token: str) -> "Relation":
        for member in cls:
            if member.value == token:
                return member
        raise ValueError(f"unknown relation {token!r}")


@dataclass(frozen=True)
class RelationKind:
    """A relation, optionally negated (``!pCon`` etc.)."""

    relation: Relation
    negated: bool = False

    @classmethod
    def from_token(cls, token: str) -> "RelationKind":
        negated = token.startswith("!")
        return cls(Relation.from_token(token.lstrip("!")), negated)

    def __str__(self) -> str:
        return ("!" if self.negated else "") + self.relation.value


def tau(formulae: Iterable[Formula], timeline: Timeline) -> frozenset[Formula]:
    """Homogenize bounds: every literal occurrence gets the maximal interval.

    Applies to facts and to literals inside rules alike; idempotent.
    """
    lo, hi = TimePoint(timeline.lower), TimePoint(timeline.upper)

    def widen(lit: Literal) -> Literal:
        return lit.with_bounds(lo, hi)

    out: set[Formula] = set()
    for f in formulae:
        if isinstance(f, Literal):
            out.add(widen(f))
        else:
            out.add(Rule(tuple(widen(p) for p in f.premises), widen(f.conclusion), f.label))
    return frozenset(out)


def complementary_pairs(
    literals: Iterable[Literal],
) -> Iterator[tuple[TimeInterval, TimeInterval]]:
    """Interval pairs of complementary literals (same predicate and args)."""
    by_atom: dict[tuple[str, tuple], list[Literal]] = {}
    for lit in literals:
        by_atom.setdefault((lit.predicate, lit.args), []).append(lit)
    for group in by_atom.values():
        positives = [l for l in group if l.positive]
        negatives = [l for l in group if not l.positive]
        for p in positives:
            for n in negatives:
                yield ti(p.lower, p.upper), ti(n.lower, n.upper)


def _evaluate(relation: Relation, pairs: list[tuple[TimeInterval, TimeInterval]]) -> bool:
    if relation is Relation.PCON:
        return all(
            a.difference_nonempty(b) and b.difference_nonempty(a) for a, b in pairs
        )
    if relation is Relation.TCON:
        return all(not a.intersects(b) for a, b in pairs)
    if relation is Relation.PINC:
        return any(a.intersects(b) for a, b in pairs)
    return any(a == b for a, b in pairs)


def relation_holds(kind: RelationKind, formulae: Iterable[Formula]) -> bool:
    """Evaluate a consistency relation on the closure of ground formulae.

    The scan quantifies over complementary literal pairs of the derivability
    closure; with no such pair the consistency relations hold vacuously and
    the inconsistency relations fail.
    """
    formulae = list(formulae)
    for f in formulae:
        if isinstance(f, Literal) and not f.is_ground:
            raise GroundnessError(f"non-ground literal {f}")
        if isinstance(f, Rule) and not f.is_ground:
            raise GroundnessError(f"non-ground rule {f}")
    pairs = list(complementary_pairs(closure_literals(formulae)))
    value = _evaluate(kind.relation, pairs)
    return not value if kind.negated else value
