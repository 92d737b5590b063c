import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ellcensus.gf import field_make
from ellcensus.invariants import (
    INFINITY,
    InvariantError,
    Place,
    Reduction,
    bad_places,
    conductor_degree,
    conductor_degree_from_local_data,
    euler_product_coefficients,
    fiber_trace,
    l_polynomial,
    local_data,
    naive_point_count,
    places_in_order,
    reduction_at,
    residue_curve,
    torsion_bound,
)
from ellcensus.model import SingularModelError, WeierstrassModel, is_minimal, parse_model, twist_act
from ellcensus.polyring import Poly, irreducibles
from oracles import brute_torsion_x, count_points_prime

F5, F7 = field_make(5), field_make(7)
EX1 = parse_model("q=5;n=1;A=[1];B=[0,1]")
EX2 = parse_model("q=5;n=1;A=[];B=[0,1]")


def random_minimal(rng, spec, n):
    while True:
        A = [rng.randrange(spec.q) for _ in range(4 * n + 1)]
        B = [rng.randrange(spec.q) for _ in range(6 * n + 1)]
        try:
            m = WeierstrassModel.from_ints(spec, n, A, B)
        except SingularModelError:
            continue
        if is_minimal(m):
            return m


curves = st.builds(lambda s: random_minimal(random.Random(s), F5, 1), st.integers(0, 2**32))
curves_any = st.builds(
    lambda s, q, n: random_minimal(random.Random(s), field_make(q), n),
    st.integers(0, 2**32),
    st.sampled_from([5, 7]),
    st.sampled_from([1, 1, 2]),
)


# --- local data ------------------------------------------------------------------


def test_local_data_examples():
    ld = local_data(EX1)
    assert [(d.place.label(), d.reduction, d.conductor_exponent) for d in ld] == [
        ("[2,0,1]", Reduction.MULT_NONSPLIT, 1),
        ("inf", Reduction.ADDITIVE, 2),
    ]
    assert conductor_degree(EX1) == 4
    ld = local_data(EX2)
    assert [(d.place.label(), d.reduction) for d in ld] == [("[0,1]", Reduction.ADDITIVE), ("inf", Reduction.ADDITIVE)]
    assert conductor_degree(EX2) == 4
    good = reduction_at(EX1, Place(Poly(F5, [0, 1])))
    assert good.reduction is Reduction.GOOD and good.conductor_exponent == 0


def test_place_validation():
    with pytest.raises(ValueError):
        Place(Poly(F5, [1, 0, 1]))  # t^2 + 1 = (t - 2)(t - 3)
    with pytest.raises(ValueError):
        Place(Poly(F5, [2, 2]))
    assert INFINITY.degree == 1 and INFINITY.kind == "INFINITY"


@given(curves_any)
def test_conductor_two_routes(m):
    try:
        fast = conductor_degree(m)
    except InvariantError as exc:
        assert exc.code == "CONSTANT_CURVE"
        assert conductor_degree_from_local_data(m) == 0
        return
    assert fast == conductor_degree_from_local_data(m)
    assert fast >= 1


@given(curves_any)
def test_local_data_invariants(m):
    for d in local_data(m):
        assert d.reduction is not Reduction.GOOD
        if d.reduction is Reduction.ADDITIVE:
            assert (d.conductor_exponent, d.trace) == (2, 0)
        else:
            assert d.conductor_exponent == 1
            assert d.trace == (1 if d.reduction is Reduction.MULT_SPLIT else -1)


@given(curves)
def test_conductor_twist_invariant(m):
    c = conductor_degree(m)
    assert all(conductor_degree(twist_act(m, lam)) == c for lam in range(2, 5))


def test_multiplicative_traces_count_points():
    # at a node the smooth points number q^d - a_v, with a_v = +1 split, -1 non-split
    rng = random.Random(8)
    seen = set()
    for _ in range(60):
        m = random_minimal(rng, F5, 1)
        for d in local_data(m):
            if d.reduction is Reduction.ADDITIVE or d.place.degree > 4:
                continue
            big, a, b = residue_curve(m, d.place)
            assert naive_point_count(big, a, b) == big.q + 1 - d.trace
            seen.add(d.reduction)
    assert seen == {Reduction.MULT_SPLIT, Reduction.MULT_NONSPLIT}


def test_constant_and_nonminimal_errors():
    with pytest.raises(InvariantError) as exc:
        conductor_degree(parse_model("q=5;n=0;A=[1];B=[1]"))
    assert exc.value.code == "CONSTANT_CURVE"
    with pytest.raises(InvariantError) as exc:
        l_polynomial(parse_model("q=5;n=0;A=[1];B=[1]"))
    assert exc.value.code == "CONSTANT_CURVE"
    s = Poly(F5, [1, 1])
    with pytest.raises(InvariantError) as exc:
        conductor_degree(WeierstrassModel(F5, 1, s**4, s**6))
    assert exc.value.code == "NOT_MINIMAL"


# --- fibers --------------------------------------------------------------------------


def test_fiber_examples():
    # A = 1, B = t: the fiber at t = 0 is y^2 = x^3 + x, at t = 1 it is y^2 = x^3 + x + 1
    assert fiber_trace(EX1, Place(Poly(F5, [0, 1]))) == 2
    assert fiber_trace(EX1, Place(Poly(F5, [4, 1]))) == -3
    assert count_points_prime(5, 1, 0) == 4
    assert count_points_prime(5, 1, 1) == 9
    with pytest.raises(InvariantError) as exc:
        fiber_trace(EX1, INFINITY)
    assert exc.value.code == "BAD_PLACE"


@pytest.mark.parametrize("spec,max_deg", [(F5, 3), (F7, 2), (field_make(5, 2), 2)], ids=["5", "7", "25"])
def test_fiber_trace_matches_naive_count(spec, max_deg):
    rng = random.Random(spec.q)
    done = 0
    while done < 40:
        m = random_minimal(rng, spec, 1)
        d = rng.randint(1, max_deg)
        v = Place(rng.choice(irreducibles(spec, d)))
        if reduction_at(m, v).reduction is not Reduction.GOOD:
            continue
        big, a, b = residue_curve(m, v)
        a_v = fiber_trace(m, v)
        assert big.q + 1 - a_v == naive_point_count(big, a, b)
        assert a_v * a_v <= 4 * big.q
        done += 1


def test_degree_one_fibers_match_prime_field_count():
    rng = random.Random(3)
    for _ in range(30):
        m = random_minimal(rng, F7, 1)
        for r in range(7):
            v = Place(Poly(F7, [(-r) % 7, 1]))
            if reduction_at(m, v).reduction is Reduction.GOOD:
                a = sum(c * r**i for i, c in enumerate(m.A.coeffs)) % 7
                b = sum(c * r**i for i, c in enumerate(m.B.coeffs)) % 7
                assert fiber_trace(m, v) == 8 - count_points_prime(7, a, b)


# --- L-polynomial --------------------------------------------------------------------


def test_l_polynomial_example_degree_zero():
    L = l_polynomial(EX1)
    assert (L.N, L.coeffs, L.analytic_rank, L.epsilon) == (0, (1,), 0, 1)


@given(curves)
def test_l_polynomial_properties(m):
    L = l_polynomial(m)
    q = 5
    assert L.N == conductor_degree(m) - 4 >= 0
    assert L.coeffs[0] == 1 and len(L.coeffs) == L.N + 1
    assert all(isinstance(c, int) for c in L.coeffs)
    assert L.paired()
    for i in range(L.N + 1):
        assert L.coeffs[L.N - i] * q ** max(0, 2 * i - L.N) == L.epsilon * q ** max(0, L.N - 2 * i) * L.coeffs[i]
    # the completed polynomial agrees with every coefficient computed directly
    for i, c in enumerate(L.direct):
        assert c == (L.coeffs[i] if i <= L.N else 0)
    assert L.validated_index == len(L.direct) - 1
    # exact rank: L vanishes to that order at 1/q and the sign matches the parity
    r = L.analytic_rank
    assert r <= L.N
    assert (r % 2 == 1) == (L.epsilon == -1)
    if r:
        assert L.value(Fraction(1, q)) == 0
    else:
        assert L.value(Fraction(1, q)) != 0


@given(curves)
def test_inverse_roots_have_modulus_q(m):
    # weight-2 normalization: with the pairing c_{N-i} = eps q^(N-2i) c_i the
    # inverse roots have absolute value q
    L = l_polynomial(m)
    for mod in L.inverse_root_moduli():
        assert abs(mod - 5) < 1e-6 * 5


@settings(max_examples=25)
@given(curves)
def test_l_polynomial_matches_euler_product(m):
    L = l_polynomial(m)
    deg = 3
    euler = euler_product_coefficients(m, deg)
    padded = list(L.coeffs) + [0] * (deg + 1)
    assert euler == padded[: deg + 1]


def test_l_polynomial_twist_invariant():
    rng = random.Random(100)
    for _ in range(100):
        m = random_minimal(rng, F5, 1)
        L = l_polynomial(m)
        for lam in range(2, 5):
            assert l_polynomial(twist_act(m, lam)) == L


def test_l_polynomial_q7():
    rng = random.Random(9)
    for _ in range(4):
        m = random_minimal(rng, F7, 1)
        L = l_polynomial(m)
        assert L.paired()
        assert all(abs(x - 7) < 1e-6 * 7 for x in L.inverse_root_moduli())
        assert euler_product_coefficients(m, 2) == (list(L.coeffs) + [0, 0, 0])[:3]


def test_level_two_reports_budget_instead_of_guessing():
    # N can reach 20 at level 2, beyond the largest field with lookup tables
    rng = random.Random(9)
    outcomes = set()
    for _ in range(4):
        m = random_minimal(rng, F5, 2)
        try:
            L = l_polynomial(m)
        except InvariantError as exc:
            assert exc.code in ("BUDGET", "SIGN_UNDETERMINED")
            outcomes.add(exc.code)
        else:
            assert L.paired() and L.N <= 18
            outcomes.add("ok")
    assert outcomes


def test_sign_never_guessed_when_budget_is_short():
    rng = random.Random(4)
    codes = set()
    for _ in range(40):
        m = random_minimal(rng, F5, 1)
        L = l_polynomial(m)
        if L.N < 2:
            continue
        try:
            short = l_polynomial(m, max_degree=math.ceil(L.N / 2))
        except InvariantError as exc:
            codes.add(exc.code)
            assert exc.code in ("SIGN_UNDETERMINED", "BUDGET")
        else:
            assert short == L
    assert codes


# --- torsion ---------------------------------------------------------------------------


def test_torsion_examples():
    rep = torsion_bound(EX1)
    assert rep.point_counts[:2] == (4, 9)
    assert rep.upper_bound == 1 and rep.certified_trivial and rep.found_order == 1
    rep = torsion_bound(EX2)
    assert rep.two_torsion == ()
    with pytest.raises(ValueError):
        torsion_bound(EX1, budget=1)


def test_place_order():
    it = places_in_order(F5)
    first = [next(it) for _ in range(8)]
    assert [v.label() for v in first[:6]] == ["[0,1]", "[1,1]", "[2,1]", "[3,1]", "[4,1]", "inf"]
    assert first[6].degree == 2


@settings(max_examples=40)
@given(curves)
def test_torsion_search_matches_exhaustive(m):
    rep = torsion_bound(m)
    two, three = brute_torsion_x(5, 1, m.A.coeffs, m.B.coeffs)
    assert sorted(x.coeffs for x in rep.two_torsion) == [tuple(x) for x in two]
    assert sorted(x.coeffs for x in rep.three_torsion) == [tuple(x) for x in three]
    assert rep.upper_bound % rep.found_order == 0
    if rep.certified_trivial:
        assert rep.found_order == 1


def test_constructed_torsion():
    t = Poly.t(F5)
    # 2-torsion at x = t: B = -(t^3 + A t)
    A = Poly(F5, [1, 0, 2])
    m = WeierstrassModel(F5, 1, A, -(t**3 + A * t))
    rep = torsion_bound(m)
    assert t in rep.two_torsion
    assert rep.upper_bound % 2 == 0 and not rep.certified_trivial
    # 3-torsion at x = 0 when A = 0 and B is a square
    s = Poly(F5, [1, 2, 0, 1])
    m = WeierstrassModel(F5, 1, Poly.zero(F5), s**2)
    rep = torsion_bound(m)
    assert Poly.zero(F5) in rep.three_torsion
    assert rep.upper_bound % 3 == 0 and rep.found_order % 3 == 0


def test_torsion_upper_bound_is_gcd_of_counts():
    rng = random.Random(12)
    for _ in range(20):
        m = random_minimal(rng, F5, 1)
        rep = torsion_bound(m, budget=6)
        assert rep.places_used == len(rep.point_counts) <= 6
        assert rep.upper_bound == math.gcd(*rep.point_counts)
