"""Command-line front end.

    alphaleak measure sibson-mi --alpha 2 bsc025.json
    alphaleak leakage max --alpha 1,2,inf --oracle bsc025.json
    alphaleak verify robustness --trials 1000 --seed 7
    alphaleak sweep max --alpha log:1.01:100:25,inf bsc025.json

Exit codes: 0 success, 1 a theorem-backed check found violations, 2 bad
input (schema or arguments), 3 conditioning on a zero-probability event,
4 solver non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import capacity, experiments, measures
from .distfile import SchemaError, load_distribution
from .prob_core import (
    Alpha,
    AlphaDomainError,
    LogBase,
    ValidationError,
    ZeroProbabilityEventError,
    condition_on_event,
    marginalize,
)

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_ZERO_EVENT, EXIT_NO_CONVERGENCE = 0, 1, 2, 3, 4

CSV_COLUMNS = ["alpha", "value", "base", "method", "gap", "iterations"]
MEASURES = ["renyi-entropy", "arimoto-cond-entropy", "sibson-mi", "arimoto-mi", "cond-arimoto-mi", "event-sibson-mi"]
LEAKAGES = ["max", "cond-max"]
SUITES = ["robustness", "dpi", "composition", "witness", "bsc", "thm1", "counterexample"]
# composition is a conjecture: it reports findings but never fails the run
THEOREM_SUITES = {"robustness", "dpi", "thm1", "bsc", "witness", "counterexample"}


class CliError(Exception):
    def __init__(self, message, code=EXIT_INPUT):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def parse_alpha_spec(spec: str) -> list[Alpha]:
    """Comma-separated orders: numbers, ``inf``, or ``log:START:STOP:N`` ranges."""
    out = []
    for token in spec.split(","):
        token = token.strip()
        if not token:
            continue
        if token.startswith("log:"):
            try:
                _, lo, hi, n = token.split(":")
                grid = np.geomspace(float(lo), float(hi), int(n))
            except ValueError:
                raise CliError(f"bad log-spaced alpha range {token!r}; use log:START:STOP:N") from None
            out.extend(Alpha(float(v)) for v in grid)
        else:
            try:
                out.append(Alpha.parse(token))
            except AlphaDomainError as exc:
                raise CliError(str(exc)) from None
    if not out:
        raise CliError("empty alpha specification")
    return out


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _common(p: argparse.ArgumentParser, alpha_default: str) -> None:
    p.add_argument("--alpha", default=alpha_default, help="orders: 2 | 1,2,inf | log:1.01:100:20,inf")
    p.add_argument("--base", choices=["bits", "nats"], default="bits")
    p.add_argument("--format", choices=["table", "csv", "json"], default="table")
    p.add_argument("--out", help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="alphaleak", description="Tunable information-leakage measures.")
    sub = parser.add_subparsers(dest="command", required=True)

    m = sub.add_parser("measure", help="evaluate an entropy or mutual information")
    m.add_argument("name", choices=MEASURES)
    m.add_argument("file")
    m.add_argument("--z", help="Z label for event-sibson-mi")
    _common(m, "1")

    lk = sub.add_parser("leakage", help="maximal or conditional maximal alpha-leakage")
    lk.add_argument("variant", choices=LEAKAGES)
    lk.add_argument("file")
    lk.add_argument("--tol", type=_positive_float, default=capacity.DEFAULT_TOL)
    lk.add_argument("--oracle", action="store_true", help="add a grid-oracle column (max only)")
    lk.add_argument("--resolution", type=int, default=200)
    lk.add_argument("--max-iter", type=_positive_int, default=capacity.MAX_ITER)
    _common(lk, "1")

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=SUITES)
    v.add_argument("--trials", type=_positive_int, default=1000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tol", type=_positive_float)
    v.add_argument("--sizes", default="2,2,2", help="|X|,|Y|,|Z| for random instances")
    v.add_argument("--p", type=float, default=0.25)
    v.add_argument("--q", type=float, default=0.25)
    v.add_argument("--per-trial", action="store_true")
    _common(v, "")

    s = sub.add_parser("sweep", help="value of a quantity over an alpha grid (CSV curve)")
    s.add_argument("quantity", choices=MEASURES + LEAKAGES)
    s.add_argument("file")
    s.add_argument("--z")
    s.add_argument("--tol", type=_positive_float, default=capacity.DEFAULT_TOL)
    _common(s, "log:1:100:25,inf")
    s.add_argument("--max-iter", type=_positive_int, default=capacity.MAX_ITER)
    s.set_defaults(format="csv", oracle=False, resolution=200)
    return parser


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _find_z(j, token):
    if token is None:
        raise CliError("event-sibson-mi needs --z")
    for z in j.z_labels:
        if str(z) == token:
            return z
    raise CliError(f"--z {token!r} is not one of {[str(z) for z in j.z_labels]}")


def _measure_value(name, j, alpha, base, z=None) -> float:
    px, ch = marginalize(j, "XY").split()
    if name == "renyi-entropy":
        return measures.renyi_entropy(px, alpha, base).value
    if name == "arimoto-cond-entropy":
        return measures.arimoto_cond_entropy(px, ch, alpha, base).value
    if name == "sibson-mi":
        return measures.sibson_mi(px, ch, alpha, base).value
    if name == "arimoto-mi":
        return measures.arimoto_mi(px, ch, alpha, base).value
    if name == "cond-arimoto-mi":
        return measures.conditional_arimoto_mi(j, alpha, base).value
    if name == "event-sibson-mi":
        z = _find_z(j, z)
        condition_on_event(j, z)
        return measures.event_conditional_sibson_mi(j, z, alpha, base).value
    raise CliError(f"unknown measure {name!r}")


def _row(alpha, value, base, method="closed_form", gap=0.0, iterations=0, **extra) -> dict:
    row = {"alpha": str(alpha), "value": value, "base": base.value, "method": method,
           "gap": gap, "iterations": iterations}
    row.update(extra)
    return row


def cmd_measure(args) -> tuple[list[dict], int]:
    j = load_distribution(args.file)
    base = LogBase.parse(args.base)
    rows = [_row(a, _measure_value(args.name, j, a, base, args.z), base) for a in parse_alpha_spec(args.alpha)]
    return rows, EXIT_OK


def cmd_leakage(args, variant=None) -> tuple[list[dict], int]:
    variant = variant or args.variant
    j = load_distribution(args.file)
    base = LogBase.parse(args.base)
    rows = []
    for a in parse_alpha_spec(args.alpha):
        if variant == "max":
            px, ch = marginalize(j, "XY").split()
            r = capacity.maximal_alpha_leakage(px, ch, a, base, args.tol, args.max_iter)
            extra = {}
            if args.oracle:
                if a.is_one:
                    oracle = r.value.value
                else:
                    oracle = capacity.grid_oracle_capacity(
                        [x for x, p in zip(px.labels, px.probs) if p > 0], ch, a, base, args.resolution
                    ).value.value
                extra = {"oracle": oracle, "oracle_diff": r.value.value - oracle}
            rows.append(_row(a, r.value.value, base, r.method.value, r.certificate_gap, r.iterations, **extra))
        else:
            r = capacity.conditional_maximal_alpha_leakage(j, a, base, args.tol, args.max_iter)
            if r.per_z:
                best = r.per_z[r.argmax_z]
                gap = max(res.certificate_gap for res in r.per_z.values())
                iters = sum(res.iterations for res in r.per_z.values())
                rows.append(_row(a, r.value.value, base, best.method.value, gap, iters, argmax_z=str(r.argmax_z)))
            else:
                rows.append(_row(a, r.value.value, base, "closed_form", 0.0, 0, argmax_z=""))
    return rows, EXIT_OK


def cmd_sweep(args) -> tuple[list[dict], int]:
    if args.quantity in LEAKAGES:
        return cmd_leakage(args, variant=args.quantity)
    args.name = args.quantity
    return cmd_measure(args)


def _sizes(text):
    try:
        sizes = [int(s) for s in text.split(",")]
    except ValueError:
        raise CliError(f"--sizes must be three integers, got {text!r}") from None
    if len(sizes) != 3:
        raise CliError(f"--sizes must be three integers, got {text!r}")
    return sizes


def cmd_verify(args) -> tuple[experiments.TrialReport, int]:
    base = LogBase.parse(args.base)
    alphas = parse_alpha_spec(args.alpha) if args.alpha else None
    suite = args.suite
    if suite == "bsc":
        report = experiments.verify_bsc(args.p, args.q, alphas or (1, 1.5, 2, 5, 20, math.inf),
                                        args.tol or 1e-6, base)
    elif suite == "witness":
        report = experiments.verify_witness(args.p, args.q, alphas[0] if alphas else 2, base=base)
    elif suite == "counterexample":
        report = experiments.verify_counterexample_nonmarkov(
            alphas=alphas or (1, 1.5, 2, 5, 20, math.inf), base=base)
    else:
        nx, ny, nz = _sizes(args.sizes)
        defaults = {
            "robustness": ((1, 1.5, 2, 5, math.inf), 1e-7, experiments.verify_robustness_theorem),
            "dpi": ((0.5, 1, 1.5, 2, 5, math.inf), 1e-9, experiments.verify_sibson_dpi),
            "thm1": ((1, 1.5, 2, 5, math.inf), 1e-9, experiments.verify_conditional_leakage_identity),
            "composition": ((1, 2, math.inf), 1e-7, experiments.verify_composition_conjecture),
        }
        default_alphas, default_tol, fn = defaults[suite]
        cfg = experiments.TrialConfig(nx, ny, nz, tuple(alphas or default_alphas), args.trials,
                                      args.seed, args.tol or default_tol)
        report = fn(cfg, base)
    code = EXIT_OK
    if suite in THEOREM_SUITES and not report.ok:
        code = EXIT_VIOLATION
    return report, code


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render_rows(rows: list[dict], fmt: str, meta: dict) -> str:
    extra = [k for k in rows[0] if k not in CSV_COLUMNS] if rows else []
    columns = CSV_COLUMNS + extra
    if fmt == "json":
        return json.dumps({**meta, "rows": rows}, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in columns])
        return buf.getvalue()
    cells = [[c for c in columns]] + [
        [format(r[c], ".10g") if isinstance(r[c], float) else str(r[c]) for c in columns] for r in rows
    ]
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
    return "".join("  ".join(s.rjust(wd) for s, wd in zip(row, widths)) + "\n" for row in cells)


def render_report(report: experiments.TrialReport, fmt: str, per_trial: bool) -> str:
    d = report.to_dict(per_trial=per_trial)
    if fmt == "json":
        return json.dumps(d, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["suite", "trial", "alpha", "lhs", "rhs", "violated", "base"])
        for r in report.records:
            w.writerow([report.suite, r.trial, str(r.alpha), repr(r.lhs), repr(r.rhs), int(r.violated),
                        report.base.value])
        return buf.getvalue()
    lines = []
    if report.experimental:
        lines.append("EXPERIMENTAL: conjecture check; violations are findings, not failures")
    for key in ("suite", "relation", "trials", "alpha", "violations", "max_violation", "max_excess",
                "seed", "tolerance", "base"):
        val = d[key]
        if isinstance(val, list):
            val = ",".join(val)
        lines.append(f"{key + ':':<15}{val}")
    if d["failures"]:
        lines.append(f"{'failures:':<15}{len(d['failures'])}")
    return "\n".join(lines) + "\n"


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            report, code = cmd_verify(args)
            _emit(render_report(report, args.format, args.per_trial), args.out)
            return code
        handler = {"measure": cmd_measure, "leakage": cmd_leakage, "sweep": cmd_sweep}[args.command]
        rows, code = handler(args)
        meta = {"command": args.command, "base": args.base}
        _emit(render_rows(rows, args.format, meta), args.out)
        return code
    except SchemaError as exc:
        print(f"alphaleak: schema error in field '{exc.field}': {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ZeroProbabilityEventError as exc:
        print(f"alphaleak: {exc}", file=sys.stderr)
        return EXIT_ZERO_EVENT
    except capacity.ConvergenceError as exc:
        print(f"alphaleak: solver did not converge: {exc} (iterations={exc.iterations}, gap={exc.gap:.3g}, "
              f"value={exc.value:.6g})", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except CliError as exc:
        print(f"alphaleak: {exc}", file=sys.stderr)
        return exc.code
    except (ValidationError, AlphaDomainError, FileNotFoundError) as exc:
        print(f"alphaleak: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
