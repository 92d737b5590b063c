import csv
import io
import json

import pytest

from ellcensus import survey
from ellcensus.census import BudgetExceeded, index_of, shell_count
from ellcensus.formula import conjecture_main_term
from ellcensus.gf import field_make
from ellcensus.model import canonical_rep, is_minimal, parse_model
from ellcensus.polyring import Poly
from ellcensus.survey import (
    BUCKETS,
    CSV_COLUMNS,
    SurveyAggregate,
    SurveyMode,
    SurveyRecord,
    classify,
    compare_to_conjecture,
    parse_mode,
    records_csv,
    run_survey,
    sample_classes,
    torsion_free_density,
    wilson_interval,
)

F5 = field_make(5)


@pytest.fixture(scope="module")
def small():
    return run_survey(F5, 1, SurveyMode.sample(80, 7))


def test_sample_is_deterministic(small):
    recs, agg = small
    again, agg2 = run_survey(F5, 1, SurveyMode.sample(80, 7))
    assert again == recs
    assert agg2.to_dict() == agg.to_dict()
    other, _ = run_survey(F5, 1, SurveyMode.sample(80, 8))
    assert other != recs


def test_threads_do_not_change_records(small):
    recs, _ = small
    par, _ = run_survey(F5, 1, SurveyMode.sample(80, 7), threads=3)
    assert par == recs


def test_sampled_curves_are_distinct_canonical_minimal():
    curves = sample_classes(F5, 1, 200, 3)
    assert len({m.key() for m in curves}) == 200
    for m in curves:
        assert is_minimal(m) and canonical_rep(m) == m


def test_records_are_canonical_and_partitioned(small):
    recs, agg = small
    assert agg.total_classes == len(recs) == 80
    assert sum(agg.counts.values()) == agg.total_classes
    assert set(agg.counts) == set(BUCKETS)
    for r in recs:
        m = parse_model(r.encoding)
        assert canonical_rep(m) == m and is_minimal(m)
        assert r.bucket in BUCKETS
        if r.bucket == "UNRESOLVED":
            assert r.reason
        elif r.rank >= 2:
            assert r.bucket == "r2plus"
        elif r.certified:
            assert r.bucket == f"r{r.rank}_T0"
        else:
            assert r.bucket == "T_nonzero" and r.found_torsion > 1
        if r.torsion_bound is not None:
            assert r.torsion_bound % r.found_torsion == 0


def test_classification_table_on_known_curves():
    rec = classify(parse_model("q=5;n=1;A=[1];B=[0,1]"))
    assert (rec.rank, rec.certified, rec.bucket, rec.N, rec.conductor_deg) == (0, True, "r0_T0", 0, 4)
    s = Poly(F5, [1, 2, 0, 1])
    m = canonical_rep(parse_model(f"q=5;n=1;A=[];B={(s ** 2).to_text()}"))
    rec = classify(m)
    assert rec.found_torsion % 3 == 0
    assert rec.bucket in ("T_nonzero", "r2plus")


def test_cache_resume(tmp_path, small):
    recs, agg = small
    path = tmp_path / "cache.ndjson"
    part, _ = run_survey(F5, 1, SurveyMode.sample(30, 7), cache=path)
    assert len(path.read_text().splitlines()) == 30
    warm, agg_warm = run_survey(F5, 1, SurveyMode.sample(80, 7), cache=path)
    assert warm == recs and agg_warm.to_dict() == agg.to_dict()
    assert len(path.read_text().splitlines()) == 80
    again, _ = run_survey(F5, 1, SurveyMode.sample(80, 7), cache=path)
    assert again == recs
    assert len(path.read_text().splitlines()) == 80
    line = path.read_text().splitlines()[0]
    assert SurveyRecord.from_json(line).to_json() == line


def test_full_mode_counts_match_census(monkeypatch):
    def stub(args):
        spec, n, A, B, _ = args
        return SurveyRecord(spec.label, n, A, B, "X", None, None, None, 0, 1, True, 1, "r0_T0")

    monkeypatch.setattr(survey, "_classify_task", stub)
    slices = [index_of(Poly(F5, [0, 1, 0, 0, 1]), 5), 7]
    recs, agg = run_survey(F5, 1, SurveyMode.full(), a_indices=slices)
    assert agg.total_classes == shell_count(F5, 1, a_indices=slices).shell_classes == len(recs)


def test_csv_columns(small):
    recs, _ = small
    text = records_csv(recs)
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert list(CSV_COLUMNS) == "q,n,A,B,family,conductor_deg,N,eps,rank,torsion_bound,certified,bucket".split(",")
    assert len(rows) == len(recs) + 1
    assert json.loads(rows[1][2]) == list(recs[0].A)


def test_compare_guards_and_synthetic_fractions():
    agg = SurveyAggregate(F5, 1, SurveyMode.full())
    agg.counts["UNRESOLVED"] = 10
    rep = compare_to_conjecture(agg)
    assert rep["coverage"] == 0 and rep["observed_fractions"] is None
    agg = SurveyAggregate(F5, 1, SurveyMode.full())
    agg.counts.update(r0_T0=7, r1_T0=7)
    rep = compare_to_conjecture(agg)
    f = rep["observed_fractions"]
    assert (f["r0_T0"], f["r1_T0"], f["r2plus"], f["T_nonzero"]) == (0.5, 0.5, 0, 0)
    assert rep["residuals"]["main_term"] == conjecture_main_term(F5, 1) == 61035125


def test_compare_scales_samples(small):
    _, agg = small
    rep = compare_to_conjecture(agg)
    assert 0 < rep["predicted_fraction_per_rank_class"] < 1
    assert set(rep["residuals"]["classes"]) == {"r0_T0", "r1_T0", "r2plus", "T_nonzero"}


def test_torsion_free_density():
    agg = SurveyAggregate(F5, 1, SurveyMode.full())
    for _ in range(5):
        agg.add(SurveyRecord("5", 1, (1,), (0, 1), "X", 4, 0, 1, 0, 1, True, 1, "r0_T0"))
    empty = SurveyAggregate(F5, 1, SurveyMode.full())
    rows = torsion_free_density([agg, empty])
    assert rows[0]["fraction"] == 1
    assert rows[1]["fraction"] is None and rows[1]["wilson_95"] is None
    lo, hi = rows[0]["wilson_95"]
    assert lo < 1 and hi == pytest.approx(1)


def test_wilson_interval_against_closed_form():
    import math

    k, n, z = 930, 1000, 1.959963984540054
    p = k / n
    centre = (p + z * z / (2 * n)) / (1 + z * z / n)
    half = z / (1 + z * z / n) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    lo, hi = wilson_interval(k, n)
    assert lo == pytest.approx(centre - half, abs=1e-9)
    assert hi == pytest.approx(centre + half, abs=1e-9)


def test_aggregate_merge():
    a = SurveyAggregate(F5, 1, SurveyMode.full())
    b = SurveyAggregate(F5, 1, SurveyMode.full())
    a.counts["r0_T0"] = 3
    b.counts["r0_T0"] = 2
    b.counts["UNRESOLVED"] = 1
    b.reasons["BUDGET"] = 1
    m = a.merge(b)
    assert m.counts["r0_T0"] == 5 and m.total_classes == 6 and m.reasons == {"BUDGET": 1}
    assert a.merge(b).to_dict() == b.merge(a).to_dict()


def test_mode_parsing_and_errors():
    assert parse_mode(None, None).kind == "FULL"
    assert parse_mode(10, 1) == SurveyMode.sample(10, 1)
    with pytest.raises(ValueError):
        parse_mode(10, None)
    with pytest.raises(ValueError):
        run_survey(F5, 0, SurveyMode.sample(5, 1))
    with pytest.raises(BudgetExceeded):
        sample_classes(F5, 1, 100, 1, budget=50)
