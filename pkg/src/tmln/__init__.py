"""Temporal Markov logic networks: grounding, parametric semantics, inference."""

from .kernel import (
    Binding,
    Constant,
    Formula,
    Literal,
    Rule,
    Signature,
    TimePoint,
    Variable,
    derive_closure,
    entails,
    substitute,
    validate_signature,
)
from .network import (
    Instantiation,
    TMLN,
    WeightedFormula,
    ground,
    tf,
    weight_of,
)
from .semantics import (
    Aggregator,
    ParametricSemantics,
    Selector,
    Validator,
    audit_well_behaved,
    strength,
)
from .inference import (
    MapResult,
    Query,
    conclusions,
    map_exhaustive,
    map_pruned,
    parse_query,
)
from .temporal import Relation, RelationKind, TimeInterval, Timeline, relation_holds, tau, ti
from .kbformat import ParseDiagnostic, ParseOutcome, SourceSpan, parse, serialize

__all__ = [
    "Aggregator",
    "Binding",
    "Constant",
    "Formula",
    "Instantiation",
    "Literal",
    "MapResult",
    "ParametricSemantics",
    "ParseDiagnostic",
    "ParseOutcome",
    "Query",
    "Relation",
    "RelationKind",
    "Rule",
    "Selector",
    "Signature",
    "SourceSpan",
    "TMLN",
    "TimeInterval",
    "TimePoint",
    "Timeline",
    "Validator",
    "Variable",
    "WeightedFormula",
    "audit_well_behaved",
    "conclusions",
    "derive_closure",
    "entails",
    "ground",
    "map_exhaustive",
    "map_pruned",
    "parse",
    "parse_query",
    "relation_holds",
    "serialize",
    "strength",
    "substitute",
    "tau",
    "tf",
    "ti",
    "validate_signature",
    "weight_of",
]
