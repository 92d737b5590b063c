"""
Counting minimal models by brute force
======================================

Compare the Burnside census with the exact closed form at q = 5.
Level 1 sweeps 5^12 pairs and takes a few seconds.
"""

from ellcensus.census import shell_count
from ellcensus.formula import closed_form
from ellcensus.gf import field_make

F5 = field_make(5)

# level 0: constant curves, where the closed form is not even an integer
r0 = shell_count(F5, 0)
print("n=0 brute force", r0.shell_classes, "closed form", closed_form(F5, 0).total)

# level 1: shells add up
r1 = shell_count(F5, 1, chunks=16)
total = r0.shell_classes + r1.shell_classes
cf = closed_form(F5, 1)
print("n=1 shell", r1.shell_classes, r1.per_family)
print("cumulative", total, "closed form", cf.total, "match" if total == cf.total else "MISMATCH")
for name, value in cf.terms.items():
    print(f"  {name:8s} {value}")
