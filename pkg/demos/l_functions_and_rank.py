"""
L-polynomials and analytic rank
===============================

A handful of random minimal curves at q = 5, level 1.
"""

import numpy as np

from ellcensus.gf import field_make
from ellcensus.invariants import euler_product_coefficients, l_polynomial
from ellcensus.survey import sample_classes

F5 = field_make(5)
for m in sample_classes(F5, 1, 6, seed=3):
    L = l_polynomial(m)
    print(m)
    print("   c =", list(L.coeffs), " eps =", L.epsilon, " rank =", L.analytic_rank)
    # the low coefficients again, this time from the Euler product over places
    print("   Euler product c_0..c_2:", euler_product_coefficients(m, 2))
    moduli = np.array(L.inverse_root_moduli())
    if moduli.size:
        print("   inverse roots have modulus", np.round(moduli, 12).min(), "..", np.round(moduli, 12).max())
