"""Local and global invariants of a minimal model over F_q(t).

Local data comes from valuations of A, B and the discriminant at each place.
The L-polynomial is assembled from point-count power sums over P^1(F_{q^k}):
log L(T) = sum_k S_k T^k / k with S_k the sum of fiber traces over every
F_{q^k}-point of the base, including the bad ones (whose traces are +1, -1
or 0 and reproduce the local factors). Only the low half of the coefficients
is computed directly; the rest follows from the functional equation
c_{N-i} = eps q^(N-2i) c_i once the sign eps is pinned down.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterator

import numpy as np

from .gf import FieldElement, FieldSpec, embedding, extension
from .logfield import MAX_LOG_FIELD, LogField, log_field
from .model import WeierstrassModel, discriminant, is_minimal
from .polyring import INF, Poly, _squarefree, _valuation_unchecked, factor, gcd, irreducibles, is_irreducible, roots

DEFAULT_TORSION_PLACES = 40


class InvariantError(Exception):
    """A per-curve computation could not complete; ``code`` says why."""

    def __init__(self, code: str, message: str = ""):
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code


class Reduction(enum.Enum):
    GOOD = "GOOD"
    MULT_SPLIT = "MULT_SPLIT"
    MULT_NONSPLIT = "MULT_NONSPLIT"
    ADDITIVE = "ADDITIVE"


@dataclass(frozen=True)
class Place:
    """A closed point of P^1: a monic irreducible pi, or infinity (pi is None)."""

    pi: Poly | None = None

    def __post_init__(self):
        if self.pi is not None and not (self.pi.is_monic() and is_irreducible(self.pi)):
            raise ValueError("finite places need a monic irreducible polynomial")

    @property
    def kind(self) -> str:
        return "INFINITY" if self.pi is None else "FINITE"

    @property
    def degree(self) -> int:
        return 1 if self.pi is None else self.pi.degree

    def label(self) -> str:
        return "inf" if self.pi is None else self.pi.to_text()


INFINITY = Place(None)


@dataclass(frozen=True)
class LocalData:
    place: Place
    reduction: Reduction
    conductor_exponent: int
    trace: int

    def to_dict(self) -> dict:
        return {
            "place": self.place.label(),
            "degree": self.place.degree,
            "reduction": self.reduction.value,
            "conductor_exponent": self.conductor_exponent,
            "trace": self.trace,
        }


# --- valuations and residue fields ------------------------------------------------


def _valuations(m: WeierstrassModel, v: Place):
    D = discriminant(m)
    if v.pi is None:
        n = m.n
        return 4 * n - m.A.degree, 6 * n - m.B.degree, 12 * n - D.degree
    return (
        _valuation_unchecked(m.A, v.pi),
        _valuation_unchecked(m.B, v.pi),
        _valuation_unchecked(D, v.pi),
    )


def residue_curve(m: WeierstrassModel, v: Place) -> tuple[FieldSpec, int, int]:
    """The residue field of v and the indices of A, B reduced at v.

    Finite places are realized inside F_{q^d} through the smallest root of pi;
    at infinity the leading coefficients of the flipped model are used.
    """
    spec = m.spec
    if v.pi is None:
        return spec, m.A.coeff(4 * m.n), m.B.coeff(6 * m.n)
    big, emb = extension(spec, v.pi.degree)
    root = min(roots(Poly(big, [emb.index(c) for c in v.pi.coeffs])))
    x = FieldElement(big, root)
    return big, _eval_in(m.A, x, emb), _eval_in(m.B, x, emb)


def _residue(m: WeierstrassModel, v: Place) -> tuple[LogField, int, int]:
    big, a, b = residue_curve(m, v)
    F = log_field(big.p, big.e)
    return F, F.log_of(a), F.log_of(b)


def _eval_in(f: Poly, x: FieldElement, emb) -> int:
    big = x.owner
    acc = 0
    for c in reversed(f.coeffs):
        acc = big.add(big.mul(acc, x.value), emb.index(c))
    return acc


def reduction_at(m: WeierstrassModel, v: Place) -> LocalData:
    vA, vB, vD = _valuations(m, v)
    if vD == 0:
        return LocalData(v, Reduction.GOOD, 0, fiber_trace(m, v))
    if vA > 0 and vB > 0:
        return LocalData(v, Reduction.ADDITIVE, 2, 0)
    # node at x0 = -3b/(2a); tangent slopes are the square roots of 3 x0 = -9b/(2a)
    if _residue_chi(m, v, m.B * -9, m.A * 2) == 1:
        return LocalData(v, Reduction.MULT_SPLIT, 1, 1)
    return LocalData(v, Reduction.MULT_NONSPLIT, 1, -1)


def _residue_chi(m: WeierstrassModel, v: Place, num: Poly, den: Poly) -> int:
    """Quadratic character of num/den in the residue field at v (den a unit there)."""
    spec = m.spec
    if v.pi is None:
        top_num, top_den = num.coeff(6 * m.n), den.coeff(4 * m.n)
        return spec.chi(spec.div(top_num, top_den))
    pi = v.pi
    Qv = spec.q**pi.degree
    # Euler's criterion inside F_q[t]/(pi), with den^-1 = den^(Qv - 2)
    u = ((num % pi) * (den % pi).powmod(Qv - 2, pi)) % pi
    r = u.powmod((Qv - 1) // 2, pi)
    return 0 if r.is_zero() else (1 if r == Poly.one(spec) else -1)


def bad_places(m: WeierstrassModel) -> list[Place]:
    D = discriminant(m)
    out = [Place(pi) for pi, _ in factor(D)] if D.degree >= 1 else []
    if 12 * m.n - D.degree > 0:
        out.append(INFINITY)
    return out


def local_data(m: WeierstrassModel) -> list[LocalData]:
    """Local data at every bad place: finite ones by (degree, lex), then infinity."""
    return [reduction_at(m, v) for v in bad_places(m)]


def _rad_degree(f: Poly) -> int:
    if f.degree < 1:
        return 0
    return sum(len(g) - 1 for g, _ in _squarefree(f.spec, f.monic().coeffs))


def conductor_degree(m: WeierstrassModel) -> int:
    """Degree of the conductor: multiplicative places count once, additive twice."""
    if not is_minimal(m):
        raise InvariantError("NOT_MINIMAL", m.encode())
    D = discriminant(m)
    # finite part: every bad place once, additive ones (pi | gcd(A, B)) once more
    total = _rad_degree(D) + _rad_degree(gcd(m.A, m.B))
    vA, vB, vD = _valuations(m, INFINITY)
    if vD > 0:
        total += 2 if (vA > 0 and vB > 0) else 1
    if total == 0:
        raise InvariantError("CONSTANT_CURVE", m.encode())
    return total


def conductor_degree_from_local_data(m: WeierstrassModel) -> int:
    return sum(ld.conductor_exponent * ld.place.degree for ld in local_data(m))


# --- fibers -----------------------------------------------------------------------


def fiber_trace(m: WeierstrassModel, v: Place) -> int:
    """q^d + 1 - #E_v(F_{q^d}) at a good place, by the character sum."""
    vA, vB, vD = _valuations(m, v)
    if vD != 0:
        raise InvariantError("BAD_PLACE", f"{v.label()} is a place of bad reduction")
    if m.spec.q**v.degree > MAX_LOG_FIELD:
        raise InvariantError("BUDGET", f"residue field at {v.label()} is too large")
    F, a, b = _residue(m, v)
    tr = F.cubic_trace(a, b)
    if tr * tr > 4 * F.Q:
        raise AssertionError(f"Hasse bound violated at {v.label()}")  # pragma: no cover
    return tr


def naive_point_count(spec: FieldSpec, a: int, b: int) -> int:
    """Projective points of y^2 = x^3 + a x + b over ``spec`` by exhaustion."""
    roots_of: dict[int, int] = {}
    for y in range(spec.q):
        s = spec.mul(y, y)
        roots_of[s] = roots_of.get(s, 0) + 1
    count = 1
    for x in range(spec.q):
        rhs = spec.add(spec.add(spec.mul(spec.mul(x, x), x), spec.mul(a, x)), b)
        count += roots_of.get(rhs, 0)
    return count


# --- L-polynomial -------------------------------------------------------------------


@dataclass(frozen=True)
class LPolynomial:
    q: int
    coeffs: tuple[int, ...]
    N: int
    epsilon: int
    analytic_rank: int
    direct: tuple[int, ...] = ()
    validated_index: int | None = None

    def paired(self) -> bool:
        q, c, N, eps = self.q, self.coeffs, self.N, self.epsilon
        return all(c[N - i] * q ** max(0, 2 * i - N) == eps * q ** max(0, N - 2 * i) * c[i] for i in range(N + 1))

    def value(self, T: Fraction) -> Fraction:
        return sum((Fraction(c) * T**i for i, c in enumerate(self.coeffs)), Fraction(0))

    def inverse_root_moduli(self) -> list[float]:
        """|1/T0| over the roots T0 of L, with multiplicity, sorted."""
        if self.N == 0:
            return []
        import sympy

        T = sympy.Symbol("T")
        poly = sympy.Poly(list(reversed(self.coeffs)), T, domain="ZZ")
        out = []
        for fac, mult in poly.sqf_list()[1]:
            rs = np.roots([float(x) for x in fac.all_coeffs()])
            out.extend([1.0 / abs(r) for r in rs] * mult)
        return sorted(out)

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "N": self.N,
            "coeffs": list(self.coeffs),
            "epsilon": self.epsilon,
            "analytic_rank": self.analytic_rank,
            "direct_terms": len(self.direct) - 1,
            "validated_index": self.validated_index,
        }


def max_direct_degree(spec: FieldSpec) -> int:
    k = 1
    while spec.q ** (k + 1) <= MAX_LOG_FIELD:
        k += 1
    return k


def _coeff_logs(F: LogField, emb, f: Poly) -> list[int]:
    return [F.log_of(emb.index(c)) for c in f.coeffs]


def power_sum(m: WeierstrassModel, k: int) -> int:
    """Sum of fiber traces over all F_{q^k}-points of P^1, Hasse-checked at good ones."""
    spec = m.spec
    F = log_field(spec.p, spec.e * k)
    emb = embedding(spec, F.spec)
    # fibers over t and t^q are conjugate, so one representative per orbit suffices
    t, weight = F.frobenius_orbits(spec.q)
    weight = np.append(weight, 1)
    a = F.horner(_coeff_logs(F, emb, m.A), t)
    b = F.horner(_coeff_logs(F, emb, m.B), t)
    a_inf = F.log_of(emb.index(m.A.coeff(4 * m.n)))
    b_inf = F.log_of(emb.index(m.B.coeff(6 * m.n)))
    a = np.append(a, a_inf)
    b = np.append(b, b_inf)
    tr = F.traces(a, b)
    good = ~F.is_singular(a, b)
    if np.any(tr[good] ** 2 > 4 * F.Q):
        raise InvariantError("HASSE", f"trace exceeds 2 sqrt({F.Q}) for {m.encode()}")
    return int((tr * weight).sum())


class _Coefficients:
    """Dirichlet coefficients c_0, c_1, ... of L, extended on demand."""

    def __init__(self, m: WeierstrassModel, max_degree: int):
        self.m = m
        self.max_degree = max_degree
        self.S: list[int] = [0]
        self.c: list[int] = [1]

    def upto(self, i: int) -> list[int]:
        while len(self.c) <= i:
            k = len(self.c)
            if k > self.max_degree:
                raise InvariantError("BUDGET", f"coefficient c_{k} needs F_{{q^{k}}}")
            self.S.append(power_sum(self.m, k))
            total = sum(self.S[j] * self.c[k - j] for j in range(1, k + 1))
            if total % k:
                raise InvariantError("NON_INTEGRAL", f"c_{k} = {total}/{k}")  # pragma: no cover
            self.c.append(total // k)
        return self.c


def _order_at_inverse_q(coeffs: list[int], q: int) -> int:
    """Multiplicity of the factor (1 - qT), by exact synthetic division."""
    r = 0
    cur = list(coeffs)
    while len(cur) > 1:
        deg = len(cur) - 1
        if sum(c * q ** (deg - i) for i, c in enumerate(cur)) != 0:
            break
        b = [cur[0]]
        for i in range(1, deg):
            b.append(cur[i] + q * b[-1])
        cur = b
        r += 1
    return r


def l_polynomial(m: WeierstrassModel, max_degree: int | None = None) -> LPolynomial:
    q = m.spec.q
    N = conductor_degree(m) - 4
    if N < 0:
        raise InvariantError("NEGATIVE_DEGREE", f"conductor degree {N + 4} for {m.encode()}")
    cs = _Coefficients(m, max_degree or max_direct_degree(m.spec))

    if N == 0:
        c = cs.upto(1)
        if c[1] != 0:
            raise InvariantError("VALIDATION_FAILED", f"c_1 = {c[1]} but L has degree 0")
        return LPolynomial(q, (1,), 0, 1, 0, tuple(c), 1)

    c = cs.upto(math.ceil(N / 2))
    eps = None
    if N % 2 == 0 and c[N // 2] != 0:
        eps = 1  # the middle coefficient is paired with itself
    else:
        for j in range(N // 2 + 1, N + 1):
            if c[N - j] == 0:
                continue
            try:
                c = cs.upto(j)
            except InvariantError as exc:
                raise InvariantError("SIGN_UNDETERMINED", str(exc)) from exc
            ratio = Fraction(c[j], q ** (2 * j - N) * c[N - j])
            if ratio not in (1, -1):
                raise InvariantError("FUNCTIONAL_EQUATION", f"c_{j}/c_{N - j} ratio {ratio}")
            eps = int(ratio)
            break
    if eps is None:  # pragma: no cover - c_0 = 1 always terminates the loop
        raise InvariantError("SIGN_UNDETERMINED", m.encode())

    full = [c[i] if 2 * i <= N else eps * q ** (2 * i - N) * c[N - i] for i in range(N + 1)]
    for i in range(len(c)):
        if i <= N and c[i] != full[i]:
            raise InvariantError("VALIDATION_FAILED", f"direct c_{i} = {c[i]}, completed {full[i]}")
    extra = len(c)
    c = cs.upto(extra)
    expected = full[extra] if extra <= N else 0
    if c[extra] != expected:
        raise InvariantError("VALIDATION_FAILED", f"direct c_{extra} = {c[extra]}, completed {expected}")
    return LPolynomial(q, tuple(full), N, eps, _order_at_inverse_q(full, q), tuple(c), extra)


def euler_product_coefficients(m: WeierstrassModel, degree: int) -> list[int]:
    """c_0..c_degree from the Euler product over places of degree <= ``degree``.

    Each place contributes its own local factor; traces come from
    ``reduction_at``. Independent of the power-sum route used by l_polynomial.
    """
    series = [Fraction(0)] * (degree + 1)
    series[0] = Fraction(1)
    q = m.spec.q

    def mul_inverse(local: list[int]):
        # series <- series / local, with local[0] = 1
        out = [Fraction(0)] * (degree + 1)
        for i in range(degree + 1):
            acc = series[i]
            for j in range(1, min(i, len(local) - 1) + 1):
                acc -= local[j] * out[i - j]
            out[i] = acc
        series[:] = out

    places = [INFINITY] + [Place(pi) for d in range(1, degree + 1) for pi in irreducibles(m.spec, d)]
    for v in places:
        d = v.degree
        ld = reduction_at(m, v)
        local = [0] * (2 * d + 1)
        local[0] = 1
        if ld.reduction is Reduction.GOOD:
            local[d] = -ld.trace
            local[2 * d] = q**d
        elif ld.reduction is not Reduction.ADDITIVE:
            local[d] = -ld.trace
        mul_inverse(local)
    out = []
    for x in series:
        if x.denominator != 1:  # pragma: no cover
            raise InvariantError("NON_INTEGRAL", str(x))
        out.append(int(x))
    return out


# --- torsion -----------------------------------------------------------------------------


@dataclass(frozen=True)
class TorsionReport:
    upper_bound: int
    places_used: int
    two_torsion: tuple[Poly, ...] = ()
    three_torsion: tuple[Poly, ...] = ()
    point_counts: tuple[int, ...] = field(default=(), repr=False)

    @property
    def found_order(self) -> int:
        return (1 + len(self.two_torsion)) * (1 + 2 * len(self.three_torsion))

    @property
    def certified_trivial(self) -> bool:
        return self.upper_bound == 1

    def to_dict(self) -> dict:
        return {
            "upper_bound": self.upper_bound,
            "places_used": self.places_used,
            "found_order": self.found_order,
            "two_torsion_x": [x.to_text() for x in self.two_torsion],
            "three_torsion_x": [x.to_text() for x in self.three_torsion],
            "certified_trivial": self.certified_trivial,
        }


def places_in_order(spec: FieldSpec) -> Iterator[Place]:
    """Degree-1 finite places in lex order, then infinity, then higher degrees."""
    for pi in irreducibles(spec, 1):
        yield Place(pi)
    yield INFINITY
    d = 2
    while True:
        for pi in irreducibles(spec, d):
            yield Place(pi)
        d += 1


def _place_trace(m: WeierstrassModel, v: Place) -> int:
    F, a, b = _residue(m, v)
    return int(F.traces(a, b))


def _polynomial_roots(m: WeierstrassModel, value_roots, check) -> list[Poly]:
    """Polynomials x of degree <= 2n with check(x), found by interpolation.

    value_roots(t0) lists the admissible values of x(t0) in F_q. If F_q has
    fewer than 2n + 1 points every candidate is tried instead.
    """
    spec, n = m.spec, m.n
    D = 2 * n
    if spec.q >= D + 1:
        nodes = list(range(D + 1))
        choices = [value_roots(t0) for t0 in nodes]
        cands = (_interpolate(spec, nodes, vals) for vals in product(*choices))
    else:
        cands = (Poly(spec, cs) for cs in product(range(spec.q), repeat=D + 1))
    found = {x.coeffs: x for x in cands if x.degree <= D and check(x)}
    return sorted(found.values(), key=Poly.sort_key)


def _interpolate(spec: FieldSpec, nodes: list[int], vals) -> Poly:
    t = Poly.t(spec)
    acc = Poly.zero(spec)
    for i, xi in enumerate(nodes):
        term = Poly.constant(spec, vals[i]) if spec.e == 1 else Poly(spec, [vals[i]])
        for j, xj in enumerate(nodes):
            if i != j:
                xj_p = Poly(spec, [xj]) if spec.e > 1 else Poly.constant(spec, xj)
                term = term * (t - xj_p)
                term = term.scale(spec.inv(spec.sub(xi, xj)))
        acc = acc + term
    return acc


def _field_roots(spec: FieldSpec, coeffs: list[int]) -> list[int]:
    return [x for x in range(spec.q) if _horner(spec, coeffs, x) == 0]


def _horner(spec: FieldSpec, coeffs, x: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = spec.add(spec.mul(acc, x), c)
    return acc


def _is_square(f: Poly) -> bool:
    if f.is_zero():
        return True
    if f.spec.chi(f.lc) != 1:
        return False
    return all(mult % 2 == 0 for _, mult in factor(f.monic())) if f.degree >= 1 else True


def torsion_bound(m: WeierstrassModel, budget: int = DEFAULT_TORSION_PLACES) -> TorsionReport:
    if budget < 2:
        raise ValueError("torsion budget must be at least 2 places")
    spec, q = m.spec, m.spec.q
    ub, used, counts = 0, 0, []
    for v in places_in_order(spec):
        if used >= budget or ub == 1 or v.degree > max_direct_degree(spec):
            break
        if _valuations(m, v)[2] != 0:
            continue
        count = q**v.degree + 1 - _place_trace(m, v)
        counts.append(count)
        ub = math.gcd(ub, count)
        used += 1
    if used == 0:
        raise InvariantError("BUDGET", "no good place within the place budget")

    A, B = m.A, m.B
    cubic = lambda x: x**3 + A * x + B  # noqa: E731
    psi3 = lambda x: x**4 * 3 + A * x**2 * 6 + B * x * 12 - A**2  # noqa: E731

    def fiber_roots(make):
        def at(t0):
            a, b = _horner(spec, A.coeffs, t0), _horner(spec, B.coeffs, t0)
            return _field_roots(spec, make(a, b))

        return at

    two = _polynomial_roots(
        m,
        fiber_roots(lambda a, b: [b, a, 0, 1]),
        lambda x: cubic(x).is_zero(),
    )
    three = _polynomial_roots(
        m,
        fiber_roots(
            lambda a, b: [spec.neg(spec.mul(a, a)), spec.mul(spec.from_int(12), b), spec.mul(spec.from_int(6), a), 0, spec.from_int(3)]
        ),
        lambda x: psi3(x).is_zero() and not cubic(x).is_zero() and _is_square(cubic(x)),
    )
    return TorsionReport(ub, used, tuple(two), tuple(three), tuple(counts))


__all__ = [
    "INFINITY",
    "InvariantError",
    "LPolynomial",
    "LocalData",
    "Place",
    "Reduction",
    "TorsionReport",
    "bad_places",
    "conductor_degree",
    "conductor_degree_from_local_data",
    "euler_product_coefficients",
    "fiber_trace",
    "l_polynomial",
    "local_data",
    "naive_point_count",
    "places_in_order",
    "power_sum",
    "reduction_at",
    "residue_curve",
    "torsion_bound",
]
