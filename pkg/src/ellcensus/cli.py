"""Command-line front end: ``ellcensus <subcommand> [flags]``.

Exit codes: 0 success, 1 usage or operational error, 2 a verification
MISMATCH. ``--json`` output never contains timings, so identical
invocations give identical bytes.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from . import census, formula, invariants, survey
from .gf import FieldError, delta, parse_field
from .model import classify_family, discriminant, is_minimal, j_invariant, parse_model
from .polyring import irreducibles

EXIT_OK, EXIT_ERROR, EXIT_MISMATCH = 0, 1, 2
DEFAULT_CHUNKS = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ERROR)


def _emit(args, payload: dict, text: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True, default=_jsonable))
    else:
        print(text)


def _jsonable(x):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _table(rows: list[list], header: list[str]) -> str:
    cols = [header] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cols) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cols)


# --- subcommands ---------------------------------------------------------------------


def cmd_field_info(args) -> int:
    F = parse_field(args.q)
    counts = {str(d): len(irreducibles(F, d)) for d in range(1, 4)}
    payload = {
        "q": F.q,
        "p": F.p,
        "e": F.e,
        "label": F.label,
        "modulus": list(F.modulus),
        "primitive_element": F.primitive_index(),
        "delta4": delta(4, F),
        "delta6": delta(6, F),
        "irreducibles_by_degree": counts,
    }
    text = "\n".join(
        [
            f"F_{F.label}: p = {F.p}, e = {F.e}, q = {F.q}",
            f"modulus (ascending coefficients): {list(F.modulus)}",
            f"primitive element index: {F.primitive_index()}",
            f"delta(4) = {delta(4, F)}, delta(6) = {delta(6, F)}",
            "monic irreducibles of degree 1..3: " + ", ".join(str(v) for v in counts.values()),
        ]
    )
    _emit(args, payload, text)
    return EXIT_OK


def cmd_formula(args) -> int:
    F = parse_field(args.q)
    v = formula.closed_form(F, args.n)
    d = v.to_dict()
    rows = [[k, d["terms"][k]] for k in formula.TERM_NAMES]
    text = _table(rows, ["term", "value"]) + f"\ntotal = {d['total']}  (integer: {v.is_integer})"
    _emit(args, d, text)
    return EXIT_OK


def cmd_enumerate(args) -> int:
    F = parse_field(args.q)
    fams = args.family or None
    out = []
    for m in census.enumerate_minimal(F, args.n, fams, budget=args.budget, budget_override=args.force):
        out.append({"encoding": m.encode(), "family": classify_family(m).value})
        if args.limit and len(out) >= args.limit:
            break
    if args.format == "csv":
        print("encoding,family")
        for r in out:
            print(f"\"{r['encoding']}\",{r['family']}")
    else:
        _emit(args, {"q": F.label, "n": args.n, "count": len(out), "curves": out}, "\n".join(f"{r['encoding']}  {r['family']}" for r in out))
    return EXIT_OK


def _shell(F, n, args):
    return census.shell_count(
        F, n, chunks=args.chunks, threads=args.threads, budget=args.budget, budget_override=args.force, method=args.method
    )


def cmd_count(args) -> int:
    F = parse_field(args.q)
    levels = range(args.n + 1) if args.cumulative else [args.n]
    shells = [_shell(F, n, args) for n in levels]
    total = sum(s.shell_classes for s in shells)
    payload = {"q": F.label, "n": args.n, "cumulative": args.cumulative, "classes": total, "shells": [s.to_dict(include_elapsed=False) for s in shells]}
    lines = [f"n={s.n}: {s.shell_classes} classes from {s.minimal_pairs} minimal pairs ({s.method}, {s.elapsed:.2f} s)" for s in shells]
    lines.append(f"total = {total}")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_verify(args) -> int:
    F = parse_field(args.q)
    shells = [_shell(F, n, args) for n in range(args.n + 1)]
    brute = sum(s.shell_classes for s in shells)
    fv = formula.closed_form(F, args.n)
    match = fv.is_integer and fv.total == brute
    families = {f.value: sum(s.per_family[f.value] for s in shells) for f in census.FAMILIES}
    payload = {
        "q": F.label,
        "n": args.n,
        "status": "MATCH" if match else "MISMATCH",
        "brute_force": brute,
        "closed_form": fv.to_dict(),
        "difference": formula._fmt(fv.total - brute),
        "per_shell": [{"n": s.n, "classes": s.shell_classes, "per_family": s.per_family} for s in shells],
        "per_family_cumulative": families,
    }
    lines = [
        f"{'MATCH' if match else 'MISMATCH'}: brute force {brute} vs closed form {formula._fmt(fv.total)}",
        _table([[k, formula._fmt(fv.terms[k])] for k in formula.TERM_NAMES], ["term", "value"]),
        _table([[s.n, s.shell_classes] + [s.per_family[f.value] for f in census.FAMILIES] for s in shells], ["n", "classes"] + [f.value for f in census.FAMILIES]),
        f"checked at {time.strftime('%Y-%m-%d %H:%M:%S')}",
    ]
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if match else EXIT_MISMATCH


def cmd_curve(args) -> int:
    m = parse_model(args.spec)
    jv = j_invariant(m)
    payload: dict = {
        "encoding": m.encode(),
        "discriminant": discriminant(m).to_text(),
        "j": {"numerator": jv.numerator.to_text(), "denominator": jv.denominator.to_text(), "constant": jv.constant, "value": jv.value()},
        "family": classify_family(m).value,
        "minimal": is_minimal(m),
    }
    lines = [
        m.encode(),
        f"discriminant: {payload['discriminant']}",
        f"j = {jv.numerator.to_text()} / {jv.denominator.to_text()}" + (f" (constant {jv.value()})" if jv.constant else ""),
        f"family: {payload['family']}, minimal: {payload['minimal']}",
    ]
    if payload["minimal"]:
        lds = invariants.local_data(m)
        payload["local_data"] = [ld.to_dict() for ld in lds]
        lines.append(_table([[d["place"], d["degree"], d["reduction"], d["conductor_exponent"], d["trace"]] for d in payload["local_data"]], ["place", "deg", "reduction", "f_v", "a_v"]))
        try:
            payload["conductor_degree"] = invariants.conductor_degree(m)
            L = invariants.l_polynomial(m)
            payload["analytic_rank"] = L.analytic_rank
            payload["epsilon"] = L.epsilon
            payload["N"] = L.N
            lines.append(f"conductor degree {payload['conductor_degree']}, N = {L.N}, eps = {L.epsilon}, analytic rank {L.analytic_rank}")
        except invariants.InvariantError as exc:
            payload["error"] = exc.code
            lines.append(f"invariants unavailable: {exc}")
        try:
            tor = invariants.torsion_bound(m, args.torsion_places)
            payload["torsion"] = tor.to_dict()
            lines.append(f"torsion: upper bound {tor.upper_bound}, found order {tor.found_order}, certified trivial {tor.certified_trivial}")
        except invariants.InvariantError as exc:
            payload["torsion_error"] = exc.code
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_lfunction(args) -> int:
    m = parse_model(args.spec)
    L = invariants.l_polynomial(m)
    moduli = [round(x, 10) for x in L.inverse_root_moduli()]
    payload = L.to_dict() | {"encoding": m.encode(), "inverse_root_moduli": moduli}
    lines = [
        f"L(T) coefficients c_0..c_{L.N}: {list(L.coeffs)}",
        f"N = {L.N}, eps = {L.epsilon}, analytic rank = {L.analytic_rank}",
        f"inverse root moduli: {', '.join(f'{x:.10f}' for x in moduli) or '(none)'}",
    ]
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_survey(args) -> int:
    F = parse_field(args.q)
    mode = survey.parse_mode(args.sample, args.seed)
    t0 = time.perf_counter()
    records, agg = survey.run_survey(F, args.n, mode, args.budget, threads=args.threads, cache=args.cache, torsion_places=args.torsion_places)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(survey.records_csv(records))
    if args.format == "csv":
        sys.stdout.write(survey.records_csv(records))
        return EXIT_OK
    report = survey.compare_to_conjecture(agg)
    density = survey.torsion_free_density([agg])
    payload = {"aggregate": agg.to_dict(), "comparison": report, "torsion_free_density": density}
    rows = [[k, v] for k, v in agg.counts.items()]
    lines = [
        f"survey q={F.label} n={args.n} {mode.to_dict()} in {time.perf_counter() - t0:.1f} s",
        _table(rows, ["bucket", "classes"]),
        f"unresolved reasons: {dict(agg.reasons) or 'none'}",
        f"torsion-free fraction: {density[0]['fraction']} (95% Wilson {density[0]['wilson_95']})",
    ]
    if report.get("observed_fractions"):
        lines.append("observed fractions: " + ", ".join(f"{k}={v:.4f}" for k, v in report["observed_fractions"].items()))
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_residuals(args) -> int:
    F = parse_field(args.q)
    text = args.counts
    if not text.lstrip().startswith("{"):
        with open(text) as fh:
            text = fh.read()
    data = json.loads(text)
    counts = data.get("aggregate", {}).get("counts", data.get("counts", data))
    rep = formula.residuals(counts, F, args.n)
    rows = []
    for k, v in rep["classes"].items():
        rows.append([k] + [v.get(c, "") for c in ("observed", "residual", "residual_over_q6n", "residual_over_q4n", "residual_over_q2n", "ratio_over_q10n")])
    table = _table(rows, ["class", "observed", "residual", "/q^6n", "/q^4n", "/q^2n", "/q^10n"])
    _emit(args, rep, f"main term {rep['main_term']}\n{table}")
    return EXIT_OK


# --- parser ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    threads_default = census.default_threads()
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--json", dest="format", action="store_const", const="json", help="shorthand for --format json")

    field_args = _Parser(add_help=False)
    field_args.add_argument("--q", required=True, help="field size, as p^e or a prime power")

    level = _Parser(add_help=False)
    level.add_argument("--n", type=int, required=True, help="level: heights up to q^(12n)")

    run = _Parser(add_help=False)
    run.add_argument("--threads", type=int, default=threads_default, help="worker processes (env ELLCENSUS_THREADS)")
    run.add_argument("--budget", type=int, default=census.DEFAULT_BUDGET, help="maximum pairs to scan or draw")
    run.add_argument("--force", "--budget-override", dest="force", action="store_true", help="run even when the budget is exceeded")

    census_args = _Parser(add_help=False)
    census_args.add_argument("--chunks", type=int, default=DEFAULT_CHUNKS)
    census_args.add_argument("--method", choices=("auto", "fast", "general"), default="auto")

    parser = _Parser(prog="ellcensus", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("field-info", parents=[common, field_args], help="field parameters")
    p.set_defaults(func=cmd_field_info)
    p = sub.add_parser("formula", parents=[common, field_args, level], help="exact closed-form count")
    p.set_defaults(func=cmd_formula)
    p = sub.add_parser("enumerate", parents=[common, field_args, level, run], help="list canonical minimal models")
    p.add_argument("--family", action="append", choices=[f.value for f in census.FAMILIES])
    p.add_argument("--limit", type=int, default=0)
    p.set_defaults(func=cmd_enumerate)
    p = sub.add_parser("count", parents=[common, field_args, level, run, census_args], help="Burnside census of a shell")
    p.add_argument("--cumulative", action="store_true", help="sum shells 0..n")
    p.set_defaults(func=cmd_count)
    p = sub.add_parser("verify", parents=[common, field_args, level, run, census_args], help="census against closed form")
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser("curve", parents=[common], help="invariants of one curve")
    p.add_argument("--spec", required=True, help='curve encoding, e.g. "q=5;n=1;A=[1];B=[0,1]"')
    p.add_argument("--torsion-places", type=int, default=invariants.DEFAULT_TORSION_PLACES)
    p.set_defaults(func=cmd_curve)
    p = sub.add_parser("lfunction", parents=[common], help="L-polynomial of one curve")
    p.add_argument("--spec", required=True)
    p.set_defaults(func=cmd_lfunction)
    p = sub.add_parser("survey", parents=[common, field_args, level, run], help="rank and torsion survey")
    p.add_argument("--sample", type=int, default=None, help="sample size; omit for a full sweep")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--cache", default=None, help="NDJSON results cache")
    p.add_argument("--csv", default=None, help="also write records as CSV to this path")
    p.add_argument("--torsion-places", type=int, default=invariants.DEFAULT_TORSION_PLACES)
    p.set_defaults(func=cmd_survey)
    p = sub.add_parser("residuals", parents=[common, field_args, level], help="residuals against the main term")
    p.add_argument("--counts", required=True, help="JSON object of class counts, or a file holding survey --json output")
    p.set_defaults(func=cmd_residuals)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, FieldError, census.BudgetExceeded, invariants.InvariantError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
