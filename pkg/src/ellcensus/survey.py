"""Rank and torsion survey over isomorphism classes of minimal models.

Each class is represented by its canonical model. A record stores the
invariants needed to place it in one bucket of the partition

    r0_T0, r1_T0   analytic rank 0 / 1 with torsion certified trivial
    r2plus         analytic rank >= 2, any torsion
    T_nonzero      rank 0 or 1 with an explicit nontrivial torsion point
    UNRESOLVED     anything that could not be decided, with a reason code

Ranks are analytic ranks (order of vanishing of L at T = 1/q). They bound the
Mordell-Weil rank from above and agree with it at level n = 1.
"""

from __future__ import annotations

import csv
import io
import json
import math
import multiprocessing as mp
import os
import random
from collections import Counter
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .census import DEFAULT_BUDGET, BudgetExceeded, enumerate_minimal, poly_from_index, space_shape
from .formula import closed_form, conjecture_main_term, residuals
from .gf import FieldSpec, parse_field
from .invariants import DEFAULT_TORSION_PLACES, InvariantError, conductor_degree, l_polynomial, torsion_bound
from .model import SingularModelError, WeierstrassModel, canonical_rep, classify_family, is_minimal

BUCKETS = ("r0_T0", "r1_T0", "r2plus", "T_nonzero", "UNRESOLVED")
CSV_COLUMNS = ("q", "n", "A", "B", "family", "conductor_deg", "N", "eps", "rank", "torsion_bound", "certified", "bucket")


@dataclass(frozen=True)
class SurveyMode:
    kind: str = "SAMPLE"
    size: int = 0
    seed: int = 0

    @classmethod
    def full(cls) -> SurveyMode:
        return cls("FULL")

    @classmethod
    def sample(cls, size: int, seed: int) -> SurveyMode:
        if size < 1:
            raise ValueError("sample size must be positive")
        return cls("SAMPLE", size, seed)

    def to_dict(self) -> dict:
        return {"kind": self.kind} if self.kind == "FULL" else {"kind": self.kind, "size": self.size, "seed": self.seed}


@dataclass(frozen=True)
class SurveyRecord:
    q: str
    n: int
    A: tuple[int, ...]
    B: tuple[int, ...]
    family: str
    conductor_deg: int | None
    N: int | None
    eps: int | None
    rank: int | None
    torsion_bound: int | None
    certified: bool
    found_torsion: int
    bucket: str
    reason: str | None = None

    @property
    def encoding(self) -> str:
        return f"q={self.q};n={self.n};A=[{','.join(map(str, self.A))}];B=[{','.join(map(str, self.B))}]"

    @property
    def key(self) -> tuple:
        return (self.q, self.n, self.A, self.B)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> SurveyRecord:
        d = json.loads(line)
        d["A"], d["B"] = tuple(d["A"]), tuple(d["B"])
        return cls(**d)


@dataclass
class SurveyAggregate:
    spec: FieldSpec
    n: int
    mode: SurveyMode
    counts: dict[str, int] = field(default_factory=lambda: dict.fromkeys(BUCKETS, 0))
    reasons: dict[str, int] = field(default_factory=dict)
    certified_trivial: int = 0

    @property
    def total_classes(self) -> int:
        return sum(self.counts.values())

    @property
    def resolved(self) -> int:
        return self.total_classes - self.counts["UNRESOLVED"]

    def add(self, rec: SurveyRecord) -> None:
        self.counts[rec.bucket] += 1
        if rec.reason:
            self.reasons[rec.reason] = self.reasons.get(rec.reason, 0) + 1
        if rec.certified:
            self.certified_trivial += 1

    def merge(self, other: SurveyAggregate) -> SurveyAggregate:
        out = SurveyAggregate(self.spec, self.n, self.mode)
        for agg in (self, other):
            for k, v in agg.counts.items():
                out.counts[k] += v
            for k, v in agg.reasons.items():
                out.reasons[k] = out.reasons.get(k, 0) + v
            out.certified_trivial += agg.certified_trivial
        return out

    def to_dict(self) -> dict:
        return {
            "q": self.spec.label,
            "n": self.n,
            "mode": self.mode.to_dict(),
            "counts": dict(self.counts),
            "reasons": dict(sorted(self.reasons.items())),
            "certified_trivial": self.certified_trivial,
            "total_classes": self.total_classes,
        }


# --- per-curve classification -----------------------------------------------------


def classify(m: WeierstrassModel, torsion_places: int = DEFAULT_TORSION_PLACES) -> SurveyRecord:
    base = dict(q=m.spec.label, n=m.n, A=m.A.coeffs, B=m.B.coeffs, family=classify_family(m).value)
    cond = N = eps = rank = ub = None
    certified, found = False, 1
    reason = None
    try:
        tor = torsion_bound(m, torsion_places)
        ub, certified, found = tor.upper_bound, tor.certified_trivial, tor.found_order
    except InvariantError as exc:
        reason = exc.code
    try:
        cond = conductor_degree(m)
        L = l_polynomial(m)
        N, eps, rank = L.N, L.epsilon, L.analytic_rank
    except InvariantError as exc:
        reason = exc.code
    if reason is not None:
        bucket = "UNRESOLVED"
    elif rank >= 2:
        bucket = "r2plus"
    elif certified:
        bucket = f"r{rank}_T0"
    elif found > 1:
        bucket = "T_nonzero"
    else:
        bucket, reason = "UNRESOLVED", "TORSION_UNCERTIFIED"
    return SurveyRecord(
        **base,
        conductor_deg=cond,
        N=N,
        eps=eps,
        rank=rank,
        torsion_bound=ub,
        certified=certified,
        found_torsion=found,
        bucket=bucket,
        reason=reason,
    )


def _classify_task(args) -> SurveyRecord:
    spec, n, A, B, places = args
    return classify(WeierstrassModel.from_ints(spec, n, A, B), places)


# --- curve streams -------------------------------------------------------------------


def sample_classes(spec: FieldSpec, n: int, size: int, seed: int, budget: int = DEFAULT_BUDGET) -> list[WeierstrassModel]:
    """Uniform sample of distinct classes of minimal models of level n.

    A pair is drawn uniformly and kept only if it is minimal and equal to its
    canonical representative. Every class has exactly one canonical pair, so
    accepted classes are uniform over classes.
    """
    na, nb = space_shape(spec, n)
    rng = random.Random(seed)
    seen: set[tuple] = set()
    out: list[WeierstrassModel] = []
    draws = 0
    while len(out) < size:
        draws += 1
        if draws > budget:
            raise BudgetExceeded(draws, budget, 1e4)
        a, b = rng.randrange(na), rng.randrange(nb)
        try:
            m = WeierstrassModel(spec, n, poly_from_index(spec, a, 4 * n + 1), poly_from_index(spec, b, 6 * n + 1))
        except SingularModelError:
            continue
        k = m.key()
        if k in seen or not is_minimal(m) or canonical_rep(m).key() != k:
            continue
        seen.add(k)
        out.append(m)
    return out


def _load_cache(path: Path | None) -> dict[tuple, SurveyRecord]:
    if path is None or not path.exists():
        return {}
    out = {}
    with path.open() as fh:
        for line in fh:
            line = line.strip()
            if line:
                rec = SurveyRecord.from_json(line)
                out[rec.key] = rec
    return out


def _warm(spec: FieldSpec) -> None:
    # build the shared field tables once so forked workers inherit them
    from .invariants import max_direct_degree
    from .logfield import log_field

    for k in range(1, max_direct_degree(spec) + 1):
        log_field(spec.p, spec.e * k)._class_tables()


def run_survey(
    spec: FieldSpec,
    n: int,
    mode: SurveyMode,
    budget: int = DEFAULT_BUDGET,
    *,
    threads: int = 1,
    cache: str | os.PathLike | None = None,
    torsion_places: int = DEFAULT_TORSION_PLACES,
    a_indices: Iterable[int] | None = None,
) -> tuple[list[SurveyRecord], SurveyAggregate]:
    if n < 1:
        raise ValueError("rank classification needs n >= 1 (level 0 curves are constant)")
    if mode.kind == "FULL":
        curves: Sequence[WeierstrassModel] = list(enumerate_minimal(spec, n, a_indices=a_indices, budget=budget))
    elif mode.kind == "SAMPLE":
        curves = sample_classes(spec, n, mode.size, mode.seed, budget)
    else:
        raise ValueError(f"unknown survey mode {mode.kind!r}")

    path = Path(cache) if cache is not None else None
    known = _load_cache(path)
    todo = [m for m in curves if (m.spec.label, n, m.A.coeffs, m.B.coeffs) not in known]
    tasks = [(spec, n, m.A.coeffs, m.B.coeffs, torsion_places) for m in todo]
    fresh: list[SurveyRecord]
    if threads > 1 and len(tasks) > 1:
        _warm(spec)
        with mp.get_context("fork").Pool(threads) as pool:
            fresh = list(pool.imap(_classify_task, tasks, chunksize=16))
    else:
        fresh = [_classify_task(t) for t in tasks]
    if path is not None and fresh:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("a") as fh:
            for rec in fresh:
                fh.write(rec.to_json() + "\n")
    for rec in fresh:
        known[rec.key] = rec

    records = [known[(m.spec.label, n, m.A.coeffs, m.B.coeffs)] for m in curves]
    agg = SurveyAggregate(spec, n, mode)
    for rec in records:
        agg.add(rec)
    return records, agg


# --- reports -------------------------------------------------------------------------


def _ratio(a: int, b: int):
    return None if b == 0 else a / b


def compare_to_conjecture(agg: SurveyAggregate) -> dict:
    resolved = agg.resolved
    coverage = _ratio(resolved, agg.total_classes) or 0.0
    report: dict = {
        "q": agg.spec.label,
        "n": agg.n,
        "mode": agg.mode.to_dict(),
        "total_classes": agg.total_classes,
        "resolved": resolved,
        "coverage": coverage,
        "unresolved_reasons": dict(sorted(agg.reasons.items())),
    }
    if resolved == 0:
        report["observed_fractions"] = None
        report["note"] = "no resolved curves; fractions withheld"
        return report
    c = agg.counts
    report["observed_fractions"] = {
        "r0_T0": c["r0_T0"] / resolved,
        "r1_T0": c["r1_T0"] / resolved,
        "r2plus": c["r2plus"] / resolved,
        "T_nonzero": c["T_nonzero"] / resolved,
        "unresolved_of_total": c["UNRESOLVED"] / agg.total_classes,
    }
    main = conjecture_main_term(agg.spec, agg.n)
    total = closed_form(agg.spec, agg.n).total - closed_form(agg.spec, agg.n - 1).total
    report["predicted_fraction_per_rank_class"] = float(main / total)
    if agg.mode.kind == "FULL":
        observed = {k: c[k] for k in ("r0_T0", "r1_T0", "r2plus", "T_nonzero")}
        report["scale"] = 1
    else:
        # scale sample fractions up to the exact shell class count
        observed = {k: Fraction(c[k], resolved) * total for k in ("r0_T0", "r1_T0", "r2plus", "T_nonzero")}
        report["scale"] = str(total / resolved)
    report["residuals"] = residuals(observed, agg.spec, agg.n)
    return report


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float] | None:
    if trials == 0:
        return None
    from scipy.stats import binomtest

    ci = binomtest(successes, trials).proportion_ci(confidence, method="wilson")
    return (float(ci.low), float(ci.high))


def torsion_free_density(aggs: Iterable[SurveyAggregate]) -> list[dict]:
    """Per-shell fraction of torsion-resolved classes whose torsion is certified trivial.

    A class is torsion-resolved unless its reason code is TORSION_UNCERTIFIED
    or a torsion budget failure. No monotonicity in n is implied.
    """
    rows = []
    for agg in aggs:
        resolved = agg.total_classes - agg.reasons.get("TORSION_UNCERTIFIED", 0)
        frac = _ratio(agg.certified_trivial, resolved)
        rows.append(
            {
                "q": agg.spec.label,
                "n": agg.n,
                "mode": agg.mode.to_dict(),
                "torsion_resolved": resolved,
                "certified_trivial": agg.certified_trivial,
                "fraction": frac,
                "wilson_95": wilson_interval(agg.certified_trivial, resolved),
            }
        )
    return rows


def records_csv(records: Iterable[SurveyRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(
            [
                r.q,
                r.n,
                json.dumps(list(r.A), separators=(",", ":")),
                json.dumps(list(r.B), separators=(",", ":")),
                r.family,
                "" if r.conductor_deg is None else r.conductor_deg,
                "" if r.N is None else r.N,
                "" if r.eps is None else r.eps,
                "" if r.rank is None else r.rank,
                "" if r.torsion_bound is None else r.torsion_bound,
                int(r.certified),
                r.bucket,
            ]
        )
    return buf.getvalue()


def parse_mode(sample: int | None, seed: int | None) -> SurveyMode:
    if sample is None:
        return SurveyMode.full()
    if seed is None:
        raise ValueError("SAMPLE mode needs an explicit seed")
    return SurveyMode.sample(sample, seed)


__all__ = [
    "BUCKETS",
    "CSV_COLUMNS",
    "SurveyAggregate",
    "SurveyMode",
    "SurveyRecord",
    "classify",
    "compare_to_conjecture",
    "parse_field",
    "parse_mode",
    "records_csv",
    "run_survey",
    "sample_classes",
    "torsion_free_density",
    "wilson_interval",
]
