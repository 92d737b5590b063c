"""Exact evaluation of the minimal-model counting function and its main terms.

All arithmetic is in ``fractions.Fraction``. Heights only take the values
B = q^(12n), so every fractional power of B is an exact integer power of q.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .gf import FieldSpec, delta

TERM_NAMES = ("main_56", "sub_16", "term_12", "term_13", "const_6", "const_4")

RANK_CLASSES = ("r0_T0", "r1_T0", "r2plus", "T_nonzero")


@dataclass(frozen=True)
class FormulaValue:
    q: int
    n: int
    terms: dict[str, Fraction]
    total: Fraction

    @property
    def is_integer(self) -> bool:
        return self.total.denominator == 1

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "n": self.n,
            "terms": {k: _fmt(v) for k, v in self.terms.items()},
            "total": _fmt(self.total),
            "is_integer": self.is_integer,
        }


def _fmt(x: Fraction) -> int | str:
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def level_of_height(spec: FieldSpec, B: int) -> int:
    """n with B = q^(12n); anything else is refused."""
    q12 = spec.q**12
    n, b = 0, 1
    while b < B:
        b *= q12
        n += 1
    if b != B:
        raise ValueError(f"height {B} is not of the form q^(12n) for q = {spec.q}")
    return n


def closed_form(spec: FieldSpec, n: int) -> FormulaValue:
    if n < 0:
        raise ValueError("n must be >= 0")
    q = spec.q
    d6, d4 = delta(6, spec), delta(4, spec)
    b56, b12, b13, b16 = q ** (10 * n), q ** (6 * n), q ** (4 * n), q ** (2 * n)
    terms = {
        "main_56": 2 * Fraction(q**9 - 1, q**8 - q**7) * b56,
        "sub_16": Fraction(-2 * b16),
        "term_12": d6 * 4 * Fraction(q**5 - 1, q**5 - q**4) * b12,
        "term_13": d4 * 2 * Fraction(q**3 - 1, q**3 - q**2) * b13,
        "const_6": Fraction(d6 * 4),
        "const_4": Fraction(d4 * 2),
    }
    return FormulaValue(q, n, terms, sum(terms.values(), Fraction(0)))


def closed_form_at_height(spec: FieldSpec, B: int) -> FormulaValue:
    return closed_form(spec, level_of_height(spec, B))


def conjecture_main_term(spec: FieldSpec, n: int) -> Fraction:
    """Predicted leading count for each of the rank-0 and rank-1 torsion-free classes."""
    if n < 1:
        raise ValueError("main term is defined for n >= 1")
    q = spec.q
    return Fraction(q**9 - 1, q**8 - q**7) * q ** (10 * n)


def residuals(observed: Mapping[str, int | Fraction], spec: FieldSpec, n: int) -> dict:
    """Residuals of observed class counts against the conjectured main term.

    ``observed`` needs the keys r0_T0, r1_T0, r2plus and T_nonzero.
    """
    missing = [k for k in RANK_CLASSES if k not in observed]
    if missing:
        raise KeyError(f"missing rank classes: {missing}")
    q = spec.q
    main = conjecture_main_term(spec, n)
    report: dict = {"q": q, "n": n, "main_term": _fmt(main), "classes": {}}
    for key in ("r0_T0", "r1_T0"):
        obs = Fraction(observed[key])
        res = obs - main
        report["classes"][key] = {
            "observed": _fmt(obs),
            "residual": _fmt(res),
            "residual_over_q6n": _fmt(res / q ** (6 * n)),
            "residual_over_q4n": _fmt(res / q ** (4 * n)),
            "residual_over_q2n": _fmt(res / q ** (2 * n)),
        }
    for key in ("r2plus", "T_nonzero"):
        obs = Fraction(observed[key])
        report["classes"][key] = {"observed": _fmt(obs), "ratio_over_q10n": _fmt(obs / q ** (10 * n))}
    return report
