"""Counting and classifying minimal elliptic curves over F_q(t) by discriminant height."""

from .formula import FormulaValue, closed_form, conjecture_main_term, residuals
from .gf import FieldSpec, field_make, parse_field
from .model import WeierstrassModel, is_minimal, parse_model

__version__ = "0.1.0"

__all__ = [
    "FieldSpec",
    "FormulaValue",
    "WeierstrassModel",
    "closed_form",
    "conjecture_main_term",
    "field_make",
    "is_minimal",
    "parse_field",
    "parse_model",
    "residuals",
]
