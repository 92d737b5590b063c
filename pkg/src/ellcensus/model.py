"""Short Weierstrass models y^2 = x^3 + A x + B over P^1_{F_q}.

A model of level n has deg A <= 4n and deg B <= 6n, i.e. A and B are
sections of O(4n) and O(6n). Its discriminant is a section of O(12n), so
the height is q^(12n) regardless of the affine degree of Delta.
Two models are isomorphic iff they differ by (A, B) -> (l^4 A, l^6 B) for
some l in F_q^*.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from .gf import FieldElement, FieldSpec, parse_field
from .polyring import INF, NEG_INF, Poly, factor, gcd


class SingularModelError(ValueError):
    """The discriminant vanishes identically."""


class FamilyClass(enum.Enum):
    NONISOTRIVIAL = "NONISOTRIVIAL"
    ISOTRIVIAL_J0 = "ISOTRIVIAL_J0"
    ISOTRIVIAL_J1728 = "ISOTRIVIAL_J1728"
    ISOTRIVIAL_OTHER = "ISOTRIVIAL_OTHER"


def _disc(A: Poly, B: Poly) -> Poly:
    return (A**3 * 4 + B**2 * 27) * -16


@dataclass(frozen=True)
class WeierstrassModel:
    spec: FieldSpec
    n: int
    A: Poly
    B: Poly

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("level n must be >= 0")
        if self.A.spec != self.spec or self.B.spec != self.spec:
            raise ValueError("coefficients must live over the model's field")
        if self.A.degree > 4 * self.n or self.B.degree > 6 * self.n:
            raise ValueError(f"degree bounds deg A <= {4 * self.n}, deg B <= {6 * self.n} violated")
        if _disc(self.A, self.B).is_zero():
            raise SingularModelError("discriminant is identically zero")

    @classmethod
    def from_ints(cls, spec: FieldSpec, n: int, A, B) -> WeierstrassModel:
        return cls(spec, n, Poly(spec, A), Poly(spec, B))

    def encode(self) -> str:
        return f"q={self.spec.label};n={self.n};A={self.A.to_text()};B={self.B.to_text()}"

    def __str__(self):
        return self.encode()

    def key(self) -> tuple[int, ...]:
        """Total order used for canonical representatives."""
        return self.A.padded(4 * self.n + 1) + self.B.padded(6 * self.n + 1)


_ENC = re.compile(r"\s*q=([^;]+);\s*n=(\d+);\s*A=(\[[^\]]*\]);\s*B=(\[[^\]]*\])\s*")


def parse_model(text: str) -> WeierstrassModel:
    """Parse ``q=<p^e>;n=<n>;A=[..];B=[..]``."""
    m = _ENC.fullmatch(text)
    if not m:
        raise ValueError(f"cannot parse curve encoding {text!r}")
    spec = parse_field(m.group(1))
    n = int(m.group(2))
    return WeierstrassModel(spec, n, Poly.parse(spec, m.group(3)), Poly.parse(spec, m.group(4)))


def discriminant(m: WeierstrassModel) -> Poly:
    return _disc(m.A, m.B)


@dataclass(frozen=True)
class JInvariant:
    numerator: Poly
    denominator: Poly
    constant: bool

    def value(self) -> int | None:
        """Index of the constant j-value, or None when j varies."""
        if not self.constant:
            return None
        if self.numerator.is_zero():
            return 0
        F = self.numerator.spec
        return F.div(self.numerator.coeffs[0], self.denominator.coeffs[0])


def j_invariant(m: WeierstrassModel) -> JInvariant:
    """j = 6912 A^3 / (4 A^3 + 27 B^2) in lowest terms with monic denominator."""
    num = m.A**3 * 6912
    den = m.A**3 * 4 + m.B**2 * 27
    g = gcd(num, den)
    num, den = num // g, den // g
    inv = m.spec.inv(den.lc)
    num, den = num.scale(inv), den.scale(inv)
    constant = num.is_zero() or (num.degree <= 0 and den.degree == 0)
    return JInvariant(num, den, constant)


def height(m: WeierstrassModel) -> int:
    return m.spec.q ** (12 * m.n)


def infinity_deficits(m: WeierstrassModel) -> tuple[float, float, float]:
    """Valuations of A, B, Delta at t = infinity for the level-n sections."""
    return (4 * m.n - m.A.degree, 6 * m.n - m.B.degree, 12 * m.n - discriminant(m).degree)


def _minimal_at_infinity(m: WeierstrassModel) -> bool:
    return not (4 * m.n - m.A.degree >= 4 and 6 * m.n - m.B.degree >= 6)


def is_minimal(m: WeierstrassModel) -> bool:
    """No place (finite or infinite) where v(A) >= 4 and v(B) >= 6."""
    if not _minimal_at_infinity(m):
        return False
    g = gcd(m.A, m.B)
    if g.degree < 1:
        return True
    for pi, _ in factor(g):
        if _val(m.A, pi) >= 4 and _val(m.B, pi) >= 6:
            return False
    return True


def _val(f: Poly, pi: Poly):
    from .polyring import _valuation_unchecked

    return _valuation_unchecked(f, pi)


def twist_act(m: WeierstrassModel, lam) -> WeierstrassModel:
    """(A, B) -> (lam^4 A, lam^6 B)."""
    lv = lam.value if isinstance(lam, FieldElement) else int(lam)
    if isinstance(lam, FieldElement) and lam.owner != m.spec:
        raise ValueError("scalar from a different field")
    if lv == 0:
        raise ValueError("twist scalar must be nonzero")
    F = m.spec
    return WeierstrassModel(F, m.n, m.A.scale(F.pow(lv, 4)), m.B.scale(F.pow(lv, 6)))


def orbit(m: WeierstrassModel) -> list[WeierstrassModel]:
    """Distinct models in the F_q^* orbit, in order of first appearance."""
    seen: dict[tuple, WeierstrassModel] = {}
    for lam in range(1, m.spec.q):
        tw = twist_act(m, lam)
        seen.setdefault(tw.key(), tw)
    return list(seen.values())


def stabilizer_order(m: WeierstrassModel) -> int:
    F = m.spec
    count = 0
    for lam in range(1, F.q):
        if m.A.scale(F.pow(lam, 4)) == m.A and m.B.scale(F.pow(lam, 6)) == m.B:
            count += 1
    return count


def canonical_rep(m: WeierstrassModel) -> WeierstrassModel:
    return min((twist_act(m, lam) for lam in range(1, m.spec.q)), key=WeierstrassModel.key)


def classify_family(m: WeierstrassModel) -> FamilyClass:
    if m.A.is_zero():
        return FamilyClass.ISOTRIVIAL_J0
    if m.B.is_zero():
        return FamilyClass.ISOTRIVIAL_J1728
    if j_invariant(m).constant:
        return FamilyClass.ISOTRIVIAL_OTHER
    return FamilyClass.NONISOTRIVIAL


__all__ = [
    "FamilyClass",
    "INF",
    "JInvariant",
    "NEG_INF",
    "SingularModelError",
    "WeierstrassModel",
    "canonical_rep",
    "classify_family",
    "discriminant",
    "height",
    "infinity_deficits",
    "is_minimal",
    "j_invariant",
    "orbit",
    "parse_model",
    "stabilizer_order",
    "twist_act",
]
