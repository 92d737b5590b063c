"""
A small rank and torsion survey
===============================

Sample classes uniformly at q = 5, level 1, classify each by analytic rank
and torsion, and set the counts against the conjectured main term.
"""

from ellcensus.gf import field_make
from ellcensus.survey import SurveyMode, compare_to_conjecture, run_survey, torsion_free_density

F5 = field_make(5)
records, agg = run_survey(F5, 1, SurveyMode.sample(400, seed=1))
print(agg.counts)

rep = compare_to_conjecture(agg)
for k, v in rep["observed_fractions"].items():
    print(f"{k:22s} {v:.3f}")
print("predicted share of each rank class:", round(rep["predicted_fraction_per_rank_class"], 3))

# residuals against the main term, after scaling the sample to the shell
for k, row in rep["residuals"]["classes"].items():
    print(k, row)

print(torsion_free_density([agg])[0])
