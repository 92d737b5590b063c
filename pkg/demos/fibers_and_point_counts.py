"""
Point counts on the fibers of one curve
=======================================

Take y^2 = x^3 + x + t over F_5(t) and look at it one place at a time.
"""

from ellcensus.gf import field_make
from ellcensus.invariants import Place, fiber_trace, local_data, naive_point_count, reduction_at, residue_curve
from ellcensus.model import discriminant, parse_model
from ellcensus.polyring import irreducibles

m = parse_model("q=5;n=1;A=[1];B=[0,1]")
print(m, "discriminant", discriminant(m))

# the bad places: one quadratic place and infinity
for ld in local_data(m):
    print(ld.place.label(), ld.reduction.value, "f =", ld.conductor_exponent, "a =", ld.trace)

# good fibers of degree 1 and 2, counted twice: character sum and brute force
F5 = field_make(5)
for d in (1, 2):
    for pi in irreducibles(F5, d)[:4]:
        v = Place(pi)
        if reduction_at(m, v).reduction.value != "GOOD":
            continue
        big, a, b = residue_curve(m, v)
        a_v = fiber_trace(m, v)
        print(f"{pi.to_text():>10}  a_v = {a_v:3d}  #E = {big.q + 1 - a_v:3d}  naive {naive_point_count(big, a, b)}")
