"""Command-line front end.

Exit codes: 0 success, 1 domain or validation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from decimal import Decimal, localcontext
from fractions import Fraction

from .analysis import ScanSpec, evaluate_gf, penney_search, scan_patterns, scan_probability
from .errors import PatternWaitsError, ValidationError
from .instance import load_instance
from .linear_system import solve_instance
from .model import Pattern, validate, validate_a1, validate_a2
from .oracle import exact_distribution, simulate


def decimal_str(v) -> str:
    """15 significant digits; exact rationals are divided in decimal, not via float."""
    if isinstance(v, Fraction):
        with localcontext() as ctx:
            ctx.prec = 40
            d = Decimal(v.numerator) / Decimal(v.denominator)
        return format(d, ".15g") if d != 0 else "0"
    return format(float(v), ".15g")


def exact_str(v) -> str:
    return str(v if isinstance(v, Fraction) else Fraction(v))


def number(v) -> dict:
    return {"exact": exact_str(v), "decimal": decimal_str(v)}


def _z_arg(text: str) -> Fraction:
    try:
        z = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None
    if z < 1:
        raise argparse.ArgumentTypeError(f"z must be >= 1, got {text!r}")
    return z


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _load(args, need_patterns: bool = True):
    chain, collection = load_instance(args.file, exact=not args.float)
    if need_patterns and collection is None:
        raise ValidationError(f"{args.file}: no patterns defined")
    return chain, collection


def _emit(args, doc: dict, lines: list[str]) -> None:
    if args.json:
        print(json.dumps(doc, indent=2))
    else:
        print("\n".join(lines))


def _header(chain, collection) -> list[str]:
    alpha = chain.alphabet
    pats = "  ".join(f"{K.name}={alpha.render(K.symbols)}" for K in collection)
    mode = "exact" if chain.exact else "float"
    return [f"states: {' '.join(alpha.symbols)}   patterns: {pats}   mode: {mode}"]


def cmd_analyze(args) -> int:
    chain, collection = _load(args)
    sol = solve_instance(chain, collection, z=1)
    alpha = chain.alphabet
    lines = _header(chain, collection)
    lines.append("stopping probabilities (z = 1)")
    for name, v in sol.f.items():
        lines.append(f"  f_{name} = {exact_str(v)}    {decimal_str(v)}")
    lines.append("mean sojourn before tau")
    for i, v in enumerate(sol.F):
        lines.append(f"  F_{alpha.label(i)} = {exact_str(v)}    {decimal_str(v)}")
    lines.append(f"E(tau) = {exact_str(sol.mean_tau)}    {decimal_str(sol.mean_tau)}")
    doc = {
        "mode": sol.mode,
        "z": "1",
        "f": {name: number(v) for name, v in sol.f.items()},
        "F": {alpha.label(i): number(v) for i, v in enumerate(sol.F)},
        "mean_tau": number(sol.mean_tau),
        "gf": [],
    }
    for z in args.z or []:
        point = evaluate_gf(chain, collection, z if chain.exact else float(z), check=False)
        lines.append(f"z = {exact_str(z)}: f(z) = {exact_str(point.f_total)}    {decimal_str(point.f_total)}"
                     f";  F(z) = {exact_str(point.F_total)}    {decimal_str(point.F_total)}")
        for name, v in point.per_pattern.items():
            lines.append(f"  f_{name}(z) = {exact_str(v)}    {decimal_str(v)}")
        doc["gf"].append({
            "z": exact_str(z),
            "f_total": number(point.f_total),
            "F_total": number(point.F_total),
            "per_pattern": {name: number(v) for name, v in point.per_pattern.items()},
        })
    _emit(args, doc, lines)
    return 0


def cmd_distribution(args) -> int:
    chain, collection = _load(args)
    validate_a1(collection)
    validate_a2(chain, collection)
    table = exact_distribution(chain, collection, args.n_max)
    names = collection.names
    rows = [["n"] + [f"S_{name}" for name in names] + ["P(tau<=n)"]]
    doc_rows = []
    for n in range(1, table.horizon + 1):
        row = table.pattern_rows[n - 1]
        cum = table.stop_by(n)
        rows.append([str(n)] + [exact_str(row[name]) for name in names] + [exact_str(cum)])
        doc_rows.append({"n": n, "S": {name: number(row[name]) for name in names},
                         "cumulative": number(cum)})
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    lines = _header(chain, collection)
    lines += ["  ".join(cell.rjust(w) for cell, w in zip(r, widths)) for r in rows]
    total = table.stop_by(table.horizon)
    lines.append(f"P(tau <= {table.horizon}) = {exact_str(total)}    {decimal_str(total)}")
    _emit(args, {"horizon": table.horizon, "rows": doc_rows, "cumulative": number(total)}, lines)
    return 0


def cmd_simulate(args) -> int:
    chain, collection = _load(args)
    validate_a1(collection)
    validate_a2(chain, collection)
    res = simulate(chain, collection, args.trials, args.seed, workers=args.workers)
    validate(chain, collection)
    exact = solve_instance(chain, collection, z=1, check=False)
    emp_mean = Fraction(res.total_steps, res.trials)
    lines = _header(chain, collection)
    lines.append(f"trials = {res.trials}   seed = {res.seed}")
    if res.trials == 1:
        lines.append(f"tau = {res.total_steps}")
    lines.append(f"{'quantity':<12}{'empirical':>20}{'std err':>14}{'exact':>20}{'z-score':>10}")

    def row(label, emp, se, ex):
        zscore = (float(emp) - float(ex)) / se if se > 0 else 0.0
        lines.append(f"{label:<12}{float(emp):>20.10f}{se:>14.3e}{float(ex):>20.10f}{zscore:>10.2f}")
        return {"empirical": number(emp), "std_err": decimal_str(se), "exact": number(ex),
                "z_score": format(zscore, ".6f")}

    doc = {"trials": res.trials, "seed": res.seed,
           "mean_tau": row("E(tau)", emp_mean, res.mean_se, exact.mean_tau), "stop": {}}
    for name in collection.names:
        emp = Fraction(res.counts[name], res.trials)
        doc["stop"][name] = row(f"f_{name}", emp, res.stop_se[name], exact.f[name])
    _emit(args, doc, lines)
    return 0


def _opponent(args, chain, collection) -> Pattern:
    if collection is not None:
        try:
            return collection.by_name(args.opponent)
        except KeyError:
            pass
    return Pattern(args.opponent, chain.alphabet.parse_word(args.opponent))


def cmd_penney(args) -> int:
    chain, collection = _load(args, need_patterns=False)
    opponent = _opponent(args, chain, collection)
    report = penney_search(chain, opponent, args.length)
    alpha = chain.alphabet
    lines = [f"opponent: {opponent.name} = {alpha.render(opponent.symbols)}",
             f"{'reply':<16}{'P(win)':>16}{'decimal':>20}"]
    for cand, p in report.candidates:
        lines.append(f"{cand.name:<16}{exact_str(p):>16}{decimal_str(p):>20}")
    for cand, reason in report.excluded:
        lines.append(f"excluded: {cand.name} ({reason})")
    lines.append(f"best reply: {report.best.name} wins with {exact_str(report.best_prob)}")
    doc = {
        "opponent": alpha.render(opponent.symbols),
        "candidates": [{"reply": c.name, "win": number(p)} for c, p in report.candidates],
        "excluded": [{"reply": c.name, "reason": r} for c, r in report.excluded],
        "best": report.best.name,
        "best_prob": number(report.best_prob),
    }
    _emit(args, doc, lines)
    return 0


def cmd_scan(args) -> int:
    chain, _ = _load(args, need_patterns=False)
    spec = ScanSpec(args.window, args.threshold, args.horizon)
    collection = scan_patterns(spec, chain.alphabet)
    prob = scan_probability(chain, spec)
    words = ", ".join(collection.names)
    lines = [f"C = {{{words}}}",
             f"P(S_{spec.horizon} >= {spec.threshold}) = P(tau_C <= {spec.horizon}) = "
             f"{exact_str(prob)}    {decimal_str(prob)}"]
    doc = {"window": spec.window, "threshold": spec.threshold, "horizon": spec.horizon,
           "patterns": collection.names, "probability": number(prob)}
    _emit(args, doc, lines)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="instance JSON file")
    common.add_argument("--json", action="store_true", help="structured report on stdout")
    common.add_argument("--float", action="store_true", help="binary floating-point mode")

    parser = argparse.ArgumentParser(
        prog="pattern-waits",
        description="Waiting times and stopping probabilities for patterns in Markov chains.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="f_K, F_i and E(tau); generating functions")
    p.add_argument("--z", type=_z_arg, action="append", help="extra evaluation point (repeatable)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("distribution", parents=[common], help="P(tau = tau_K = n) for n <= N")
    p.add_argument("--n-max", type=_positive, required=True)
    p.set_defaults(func=cmd_distribution)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo check against exact values")
    p.add_argument("--trials", type=_positive, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_positive, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("penney", parents=[common], help="best reply in Penney's game")
    p.add_argument("--opponent", required=True, help="pattern name from the file, or a word")
    p.add_argument("--length", type=_positive)
    p.set_defaults(func=cmd_penney)

    p = sub.add_parser("scan", parents=[common], help="scan statistic threshold probability")
    p.add_argument("--window", type=int, required=True)
    p.add_argument("--threshold", type=int, required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.set_defaults(func=cmd_scan)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (PatternWaitsError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
