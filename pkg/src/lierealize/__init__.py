"""Realizations of sl(2,R), so(3) and their direct sums with A1 by vector fields.

Exact symbolic kernel (trigonometric polynomials over Q), vector-field
operations, structure constants, the realization catalog, and mechanical
checks of the classification proofs.
"""
from .algebra import (
    ALGEBRAS, AlgebraTag, StructureConstants, identify, killing_form, signature, validate, verify_realization,
)
from .catalog import get_entry, instantiate, list_catalog, load_catalog, verify_all, verify_entry
from .liefield import (
    PointMap, VectorField, constant_relations, express_in_span, flow_rk4, generic_rank, lie_bracket,
    match_basis, pushforward, pushforward_check,
)
from .parser import ParseError, parse_expr, parse_field, parse_field_list
from .symexpr import Expr, Ratio, SingularPointError, ratio_equal

__version__ = "0.1.0"

__all__ = [
    "ALGEBRAS", "AlgebraTag", "StructureConstants", "identify", "killing_form", "signature", "validate",
    "verify_realization", "get_entry", "instantiate", "list_catalog", "load_catalog", "verify_all",
    "verify_entry", "PointMap", "VectorField", "constant_relations", "express_in_span", "flow_rk4",
    "generic_rank", "lie_bracket", "match_basis", "pushforward", "pushforward_check", "ParseError",
    "parse_expr", "parse_field", "parse_field_list", "Expr", "Ratio", "SingularPointError", "ratio_equal",
]
