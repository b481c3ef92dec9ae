"""Exact differential algebra of curvature polynomials, Lie and Hamiltonian
structures on plane-curve variation fields, and a planar filament simulator."""

from .diffalg import (
    ONE,
    ZERO,
    G,
    K,
    DegenerateGrid,
    DiffMonomial,
    DiffPoly,
    Functional,
    NotExact,
    antiderivative,
    euler_derivative,
    evaluate,
    is_exact,
    kder,
    normal_form,
    total_derivative,
)
from .exprio import ParseError, format_field, format_functional, format_poly, parse, parse_field

__version__ = "0.1.0"

__all__ = [
    "ONE", "ZERO", "G", "K", "DegenerateGrid", "DiffMonomial", "DiffPoly", "Functional",
    "NotExact", "antiderivative", "euler_derivative", "evaluate", "is_exact", "kder",
    "normal_form", "total_derivative", "ParseError", "format_field", "format_functional",
    "format_poly", "parse", "parse_field",
]
