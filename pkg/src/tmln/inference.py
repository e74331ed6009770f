"""Most-probable-state inference over subsets of the maximal instantiation.

A knowledge base is grounded and every subset of the result is a candidate
state; inference keeps the inclusion-maximal states of maximal strength under
a chosen parametric semantics.  The exhaustive search scores every subset;
the pruned search is a branch-and-bound over the inclusion order that returns
identical results for the shipped (monotone) components.

Subsets are represented as bitmasks over the canonically ordered members of
the maximal instantiation; derivability closures are computed on interned
literal bitsets and memoized, so sweeping many semantics over one knowledge
base shares all the expensive work.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from .kernel import Constant, Literal, Rule, TimePoint, closure_literals
from .network import (
    Instantiation,
    TMLN,
    WeightedFormula,
    Weight,
    ZERO,
    canonical_order,
    formula_key,
    ground,
    tf,
    weight_of,
)
from .semantics import (
    Aggregator,
    ParametricSemantics,
    SCORE_TOLERANCE,
    Score,
    Selector,
    Validator,
)
from .temporal import Relation, ti

DEFAULT_EXHAUSTIVE_BOUND = 20
BOUND_ENV_VAR = "TMLN_EXHAUSTIVE_BOUND"


class InferenceError(Exception):
    """Unusable inference request."""


class BoundExceededError(InferenceError):
    """The instantiation is too large for exhaustive search."""


class QueryError(InferenceError):
    """Malformed conclusion query pattern."""


def exhaustive_bound(override: Optional[int] = None) -> int:
    if override is not None:
        return override
    raw = os.environ.get(BOUND_ENV_VAR)
    return int(raw) if raw else DEFAULT_EXHAUSTIVE_BOUND


@dataclass(frozen=True)
class MapEntry:
    """One optimal state, split for display by selector contribution."""

    instantiation: Instantiation
    effective: tuple[WeightedFormula, ...]
    suppressed: tuple[WeightedFormula, ...]


@dataclass(frozen=True)
class MapResult:
    """The inclusion-maximal argmax states and their shared strength."""

    entries: tuple[MapEntry, ...]
    strength: Score

    @property
    def instantiations(self) -> tuple[Instantiation, ...]:
        return tuple(e.instantiation for e in self.entries)


class _Universe:
    """Interned view of a ground instantiation for subset sweeps.

    Literals appearing anywhere (facts, premises, conclusions) get one bit
    each; closures and pairwise interval relations are then pure integer
    work, memoized across subsets.
    """

    def __init__(self, members: Sequence[WeightedFormula]):
        self.members = tuple(members)
        self.weights = tuple(wf.weight for wf in self.members)
        self.n = len(self.members)

        lit_ids: dict[Literal, int] = {}

        def intern(lit: Literal) -> int:
            if lit not in lit_ids:
                lit_ids[lit] = len(lit_ids)
            return lit_ids[lit]

        self.fact_bit: list[int] = []
        self.prem_mask: list[int] = []
        self.concl_bit: list[int] = []
        self.is_rule: list[bool] = []
        for wf in self.members:
            f = wf.formula
            if isinstance(f, Literal):
                self.fact_bit.append(1 << intern(f))
                self.prem_mask.append(0)
                self.concl_bit.append(0)
                self.is_rule.append(False)
            else:
                assert isinstance(f, Rule) and f.is_ground
                mask = 0
                for p in f.premises:
                    mask |= 1 << intern(p)
                self.fact_bit.append(0)
                self.prem_mask.append(mask)
                self.concl_bit.append(1 << intern(f.conclusion))
                self.is_rule.append(True)

        # Complementary literal pairs with their interval relationships.
        by_atom: dict[tuple[str, tuple], list[Literal]] = {}
        for lit in lit_ids:
            by_atom.setdefault((lit.predicate, lit.args), []).append(lit)
        self.pairs: list[tuple[int, int, bool, bool, bool]] = []
        for group in by_atom.values():
            for pos in (l for l in group if l.positive):
                for neg in (l for l in group if not l.positive):
                    a = ti(pos.lower, pos.upper)
                    b = ti(neg.lower, neg.upper)
                    self.pairs.append(
                        (
                            1 << lit_ids[pos],
                            1 << lit_ids[neg],
                            a == b,
                            a.intersects(b),
                            a.difference_nonempty(b) and b.difference_nonempty(a),
                        )
                    )
        self._closure: dict[int, int] = {}
        self._rule_indices = [i for i in range(self.n) if self.is_rule[i]]

    def closure_bits(self, mask: int) -> int:
        cached = self._closure.get(mask)
        if cached is not None:
            return cached
        lits = 0
        for i in range(self.n):
            if mask >> i & 1:
                lits |= self.fact_bit[i]
        changed = True
        while changed:
            changed = False
            for i in self._rule_indices:
                if mask >> i & 1:
                    concl = self.concl_bit[i]
                    if concl & ~lits and not self.prem_mask[i] & ~lits:
                        lits |= concl
                        changed = True
        self._closure[mask] = lits
        return lits

    def relation_flags(self, mask: int) -> tuple[bool, bool, bool, bool]:
        """(tCon, pCon, pInc, tInc) on the closure of the subset."""
        lits = self.closure_bits(mask)
        tcon = pcon = True
        pinc = tinc = False
        for pos_bit, neg_bit, equal, overlap, pcon_ok in self.pairs:
            if lits & pos_bit and lits & neg_bit:
                if overlap:
                    tcon = False
                    pinc = True
                if equal:
                    tinc = True
                if not pcon_ok:
                    pcon = False
        return tcon, pcon, pinc, tinc

    def accepts(self, relation: Relation, mask: int) -> bool:
        tcon, pcon, pinc, tinc = self.relation_flags(mask)
        if relation is Relation.TCON:
            return tcon
        if relation is Relation.PCON:
            return pcon
        if relation is Relation.PINC:
            return not pinc
        return not tinc

    def member_indices(self, mask: int) -> list[int]:
        return [i for i in range(self.n) if mask >> i & 1]

    def slots(self, selector: Selector, mask: int) -> tuple[Weight, ...]:
        """Selector output for the subset, in canonical member order."""
        if selector.kind == "id":
            return tuple(self.weights[i] for i in self.member_indices(mask))
        if selector.kind == "thresh":
            return tuple(
                max(self.weights[i] - selector.alpha, ZERO)
                for i in self.member_indices(mask)
            )
        out = []
        for i in self.member_indices(mask):
            if self.is_rule[i]:
                rest = self.closure_bits(mask & ~(1 << i))
                out.append(self.weights[i] if not self.prem_mask[i] & ~rest else ZERO)
            else:
                out.append(self.weights[i])
        return tuple(out)

    def strength(self, tps: ParametricSemantics, mask: int) -> Score:
        if not self.accepts(tps.validator.relation, mask):
            return ZERO
        return tps.aggregator(self.slots(tps.selector, mask))

    def subset(self, mask: int) -> Instantiation:
        return frozenset(self.members[i] for i in self.member_indices(mask))


def _maximal_masks(masks: list[int]) -> list[int]:
    kept: list[int] = []
    for mask in sorted(masks, key=lambda m: -bin(m).count("1")):
        if not any(mask != k and mask & ~k == 0 for k in kept):
            kept.append(mask)
    return kept


def _entry(universe: _Universe, tps: ParametricSemantics, mask: int) -> MapEntry:
    members = [universe.members[i] for i in universe.member_indices(mask)]
    slots = universe.slots(tps.selector, mask)
    effective = tuple(wf for wf, s in zip(members, slots) if s != ZERO)
    suppressed = tuple(wf for wf, s in zip(members, slots) if s == ZERO)
    return MapEntry(frozenset(members), effective, suppressed)


def _result(universe: _Universe, tps: ParametricSemantics, argmax: list[int]) -> MapResult:
    maximal = _maximal_masks(argmax)
    entries = [_entry(universe, tps, m) for m in maximal]
    entries.sort(key=lambda e: tuple(formula_key(wf.formula) for wf in canonical_order(e.instantiation)))
    strength = universe.strength(tps, maximal[0]) if maximal else ZERO
    return MapResult(tuple(entries), strength)


def _universe_of(M: Union[TMLN, Instantiation]) -> _Universe:
    members = ground(M) if isinstance(M, TMLN) else frozenset(M)
    return _Universe(canonical_order(members))


def map_batch(
    M: Union[TMLN, Instantiation],
    semantics: Sequence[ParametricSemantics],
    bound: Optional[int] = None,
) -> list[MapResult]:
    """Exhaustive inference for several semantics in one subset sweep.

    Selector and aggregator work is shared between semantics that differ
    only in their validator, so a full component sweep costs little more
    than a single search.
    """
    universe = _universe_of(M)
    limit = exhaustive_bound(bound)
    if universe.n > limit:
        raise BoundExceededError(
            f"instantiation has {universe.n} formulae, over the exhaustive "
            f"bound {limit}; use the pruned search"
        )
    selector_key = {}
    agg_key = {}
    plans = []
    for tps in semantics:
        skey = (tps.selector.kind, tps.selector.alpha)
        selector_key.setdefault(skey, tps.selector)
        akey = (skey, tps.aggregator.kind, tps.aggregator.alpha)
        agg_key.setdefault(akey, (skey, tps.aggregator))
        plans.append((tps.validator.relation, akey))

    total = 1 << universe.n
    scores_per_tps: list[list[Score]] = [[] for _ in semantics]
    for mask in range(total):
        flags = universe.relation_flags(mask)
        tcon, pcon, pinc, tinc = flags
        accepted = {
            Relation.TCON: tcon,
            Relation.PCON: pcon,
            Relation.PINC: not pinc,
            Relation.TINC: not tinc,
        }
        slots = {
            skey: universe.slots(sel, mask) for skey, sel in selector_key.items()
        }
        aggregated = {
            akey: agg(slots[skey]) for akey, (skey, agg) in agg_key.items()
        }
        for k, (relation, akey) in enumerate(plans):
            scores_per_tps[k].append(aggregated[akey] if accepted[relation] else ZERO)

    results = []
    for k, tps in enumerate(semantics):
        scores = scores_per_tps[k]
        best = max(float(s) for s in scores)
        argmax = [m for m in range(total) if float(scores[m]) >= best - SCORE_TOLERANCE]
        results.append(_result(universe, tps, argmax))
    return results


def map_exhaustive(
    M: Union[TMLN, Instantiation],
    tps: ParametricSemantics,
    bound: Optional[int] = None,
) -> MapResult:
    """Score every subset of the maximal instantiation; keep the best states."""
    return map_batch(M, [tps], bound)[0]


def _check_prunable(tps: ParametricSemantics) -> None:
    if not (
        isinstance(tps.validator, Validator)
        and isinstance(tps.selector, Selector)
        and isinstance(tps.aggregator, Aggregator)
    ):
        raise InferenceError(
            "pruned search needs the shipped component families; custom "
            "components carry no monotonicity certificate"
        )


def map_pruned(M: Union[TMLN, Instantiation], tps: ParametricSemantics) -> MapResult:
    """Branch-and-bound over the inclusion order; equals the exhaustive result.

    Sound because, for the shipped components, a consistency violation is
    persistent under supersets (closures only grow) and the aggregator is
    monotone and symmetric, so the score of any extension is bounded by
    aggregating every remaining weight at its selector ceiling.
    """
    _check_prunable(tps)
    universe = _universe_of(M)
    n = universe.n
    ceilings = [tps.selector.slot_ceiling(w) for w in universe.weights]
    # suffix_ceilings[d] = ceilings of the formulae still undecided at depth d
    suffix: list[list[Weight]] = [[] for _ in range(n + 1)]
    for d in range(n - 1, -1, -1):
        suffix[d] = suffix[d + 1] + [ceilings[d]]

    def optimistic(mask: int, depth: int) -> float:
        chosen = [ceilings[i] for i in universe.member_indices(mask)]
        return float(tps.aggregator(tuple(chosen + suffix[depth])))

    best = 0.0  # the empty state always scores zero

    def search_value(mask: int, depth: int) -> None:
        nonlocal best
        if depth == n:
            best = max(best, float(universe.strength(tps, mask)))
            return
        if optimistic(mask, depth) <= best:
            return
        if best > SCORE_TOLERANCE and not universe.accepts(tps.validator.relation, mask):
            return
        search_value(mask | (1 << depth), depth + 1)
        search_value(mask, depth + 1)

    search_value(0, 0)

    if best <= SCORE_TOLERANCE:
        # Every subset scores zero, so the full instantiation is the single
        # inclusion-maximal argmax state.
        return _result(universe, tps, [(1 << n) - 1])

    argmax: list[int] = []

    def collect(mask: int, depth: int) -> None:
        if depth == n:
            if float(universe.strength(tps, mask)) >= best - SCORE_TOLERANCE:
                argmax.append(mask)
            return
        if optimistic(mask, depth) < best - SCORE_TOLERANCE:
            return
        if not universe.accepts(tps.validator.relation, mask):
            return
        collect(mask | (1 << depth), depth + 1)
        collect(mask, depth + 1)

    collect(0, 0)
    return _result(universe, tps, argmax)


# --- conclusion queries -------------------------------------------------------

_QUERY_RE = re.compile(
    r"^\s*([!+]?)\s*([A-Z][A-Za-z0-9_]*)\s*(?:\(\s*(.*?)\s*\))?\s*$"
)


@dataclass(frozen=True)
class Query:
    """A literal pattern: predicate, optional polarity, per-position terms.

    Each term is a constant name, a time point, or ``None`` for a wildcard;
    ``terms`` of ``None`` matches any arity.
    """

    predicate: str
    terms: Optional[tuple[Optional[Union[str, int]], ...]] = None
    positive: Optional[bool] = None

    def matches(self, lit: Literal) -> bool:
        if lit.predicate != self.predicate:
            return False
        if self.positive is not None and lit.positive != self.positive:
            return False
        if self.terms is None:
            return True
        positions = tuple(lit.args) + (lit.lower, lit.upper)
        if len(positions) != len(self.terms):
            return False
        for want, got in zip(self.terms, positions):
            if want is None:
                continue
            if isinstance(want, int):
                if not (isinstance(got, TimePoint) and got.value == want):
                    return False
            elif not (isinstance(got, Constant) and got.name == want):
                return False
        return True


def parse_query(text: str, tmin: Optional[int] = None, tmax: Optional[int] = None) -> Query:
    """Parse a pattern like ``PeasantFamily(*, *, *)`` or ``!Studied(NO, CoN, *, *)``."""
    m = _QUERY_RE.match(text)
    if not m:
        raise QueryError(f"malformed query pattern {text!r}")
    sign, predicate, body = m.groups()
    positive = {"": None, "+": True, "!": False}[sign]
    if body is None:
        return Query(predicate, None, positive)
    if body == "":
        raise QueryError(f"empty argument list in query {text!r}")
    terms: list[Optional[Union[str, int]]] = []
    for raw in (p.strip() for p in body.split(",")):
        if raw == "*":
            terms.append(None)
        elif raw == "TMIN":
            if tmin is None:
                raise QueryError("TMIN in query but no timeline given")
            terms.append(tmin)
        elif raw == "TMAX":
            if tmax is None:
                raise QueryError("TMAX in query but no timeline given")
            terms.append(tmax)
        elif re.fullmatch(r"-?\d+", raw):
            terms.append(int(raw))
        elif re.fullmatch(r"[A-Z][A-Za-z0-9_]*", raw):
            terms.append(raw)
        else:
            raise QueryError(f"bad term {raw!r} in query {text!r}")
    return Query(predicate, tuple(terms), positive)


def conclusions(
    instantiation: Iterable[WeightedFormula], query: Query
) -> tuple[tuple[Literal, Weight], ...]:
    """Derivable literals matching the pattern, with their support weights.

    Weights are computed against the given state only, so a conclusion is as
    strong as its best derivation within that state.
    """
    items = canonical_order(instantiation)
    derived = closure_literals(tf(items))
    out = []
    for lit in derived:
        if query.matches(lit):
            out.append((lit, weight_of(lit, items)))
    out.sort(key=lambda pair: formula_key(pair[0]))
    return tuple(out)
