"""Exact calculus of homological vector fields on graded super charts."""

from .graded_algebra import (
    EVEN,
    ODD,
    Coordinate,
    GradedAlgebraError,
    GradedContext,
    Polynomial,
    partial_derivative,
    poly_mul,
    substitute,
)
from .vector_fields import (
    CoordinateChange,
    VectorField,
    apply,
    check_f_related,
    commutator,
    is_homological,
    negative_part,
    nonnegative_part,
    pushforward_basis_field,
    weight_decompose,
)
from .derived_structure import (
    HigherAlgebroid,
    TwoLayerStructure,
    anchors_agree,
    derived_bracket2,
    derived_d,
    higher_derived_bracket,
    linfty_brackets,
    recover_Q,
    two_layer,
    verify_two_layer,
)
from .algebroid import (
    AlgebroidChart,
    Section,
    algebroid_anchor,
    algebroid_bracket,
    check_algebroid_morphism,
    embed_section,
    verify_algebroid_axioms,
)
from .parsing import parse_document

__version__ = "0.1.0"

__all__ = [
    "EVEN",
    "ODD",
    "Coordinate",
    "GradedAlgebraError",
    "GradedContext",
    "Polynomial",
    "partial_derivative",
    "poly_mul",
    "substitute",
    "CoordinateChange",
    "VectorField",
    "apply",
    "check_f_related",
    "commutator",
    "is_homological",
    "negative_part",
    "nonnegative_part",
    "pushforward_basis_field",
    "weight_decompose",
    "HigherAlgebroid",
    "TwoLayerStructure",
    "anchors_agree",
    "derived_bracket2",
    "derived_d",
    "higher_derived_bracket",
    "linfty_brackets",
    "recover_Q",
    "two_layer",
    "verify_two_layer",
    "AlgebroidChart",
    "Section",
    "algebroid_anchor",
    "algebroid_bracket",
    "check_algebroid_morphism",
    "embed_section",
    "verify_algebroid_axioms",
    "parse_document",
]
