"""Command-line interface: ``blfr <command> [options]``.

JSON on stdout is the canonical output; ``--format csv`` and ``--format text``
render the same report. Exit status is 0 on success, 1 when the computation
failed or the report carries a flagged cell, and 2 for invalid input.
"""

import argparse
import csv
import io
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .data import ingest_data
from .distribution import FAMILIES, BLFR, GE, GLFR, GR, LFR, BlfrParams, Family
from .estimation import FitOptions, fit
from .exceptions import BlfrError, DomainError
from .expansions import moment_series
from .gof import (
    ClippingWarning,
    compare_models,
    empirical_cdf,
    gof_report,
    lr_test,
    reports_to_csv,
    ttt_signature,
    ttt_transform,
    two_column_csv,
)
from .sampling import ALGORITHM_ID, RngState, sample_blfr
from .study import StudyConfig, emit_study_table, load_study_config, run_study

DEFAULT_SEED = FitOptions().seed
EXIT_OK, EXIT_FLAGGED, EXIT_USAGE = 0, 1, 2

# module that owns each command, reported in error objects
OWNER = {
    "fit": "estimation",
    "compare": "gof-model-selection",
    "simulate": "sampling",
    "ttt": "gof-model-selection",
    "moments": "moments-expansions",
    "study": "mc-study",
    "aarset-repro": "gof-model-selection",
}

LR_NULLS = (LFR, GR, GE, GLFR)


class CommandError(Exception):
    def __init__(self, kind, message, status=EXIT_USAGE, details=None, module=None):
        super().__init__(message)
        self.kind = kind
        self.module = module
        self.status = status
        self.details = details


def _finite(obj):
    """Replace NaN and infinities by None so the output is strict JSON."""
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def dumps(doc):
    return json.dumps(_finite(doc), indent=2, allow_nan=False) + "\n"


def _text(doc, indent=0):
    """Indented ``key: value`` rendering of a JSON document."""
    pad = "  " * indent
    lines = []
    for key, value in doc.items():
        if isinstance(value, dict):
            lines.append(f"{pad}{key}:")
            lines.append(_text(value, indent + 1))
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            lines.append(f"{pad}{key}:")
            for item in value:
                lines.append(_text(item, indent + 1))
                lines.append("")
        else:
            if isinstance(value, float):
                value = f"{value:.6g}"
            elif isinstance(value, list) and len(value) > 12:
                value = f"[{len(value)} values]"
            lines.append(f"{pad}{key}: {value}")
    return "\n".join(line for line in lines if line is not None).rstrip("\n")


def _table_text(reports):
    head = f"{'family':<9}{'k':>2}{'-2logL':>10}{'AIC':>10}{'AICC':>10}{'BIC':>10}{'K-S':>8}{'p':>8}{'AD':>8}{'CM':>8}"
    rows = [head]
    for r in reports:
        d = _finite(r.to_dict() if hasattr(r, "to_dict") else r)
        if d["error"]:
            rows.append(f"{d['family']:<9}{d['k']:>2}  failed: {d['error']}")
            continue
        rows.append(
            f"{d['family']:<9}{d['k']:>2}{d['minus2loglik']:>10.3f}{d['aic']:>10.3f}{d['aicc']:>10.3f}"
            f"{d['bic']:>10.3f}{d['ks_stat']:>8.4f}{d['ks_pvalue']:>8.4f}{d['ad_stat']:>8.4f}{d['cm_stat']:>8.4f}"
        )
    return "\n".join(rows)


def _params(args):
    try:
        return BlfrParams(a=args.a, b=args.b, alpha=args.alpha, beta=args.beta)
    except DomainError as exc:
        raise CommandError("DomainError", str(exc)) from None


def _family(name):
    try:
        return Family.get(name)
    except (DomainError, KeyError) as exc:
        raise CommandError("DomainError", str(exc)) from None


def _families(spec):
    if spec.strip().lower() == "all":
        return list(FAMILIES.values())
    return [_family(s) for s in spec.split(",") if s.strip()]


def _data(path):
    try:
        return ingest_data(path)
    except DomainError as exc:
        raise CommandError("DomainError", str(exc), module="cli") from None


def _options(args):
    return FitOptions(n_starts=args.n_starts, seed=args.seed, confidence_level=args.confidence_level)


def cmd_fit(args):
    data = _data(args.data)
    res = fit(_family(args.family), data, _options(args))
    doc = res.to_dict(include_starts=args.starts)
    doc["seed"] = args.seed
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ClippingWarning)
        doc["gof"] = gof_report(res, data).to_dict()
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["param", "estimate", "std_error", "wald_lower", "wald_upper", "log_lower", "log_upper"])
        for p in res.family.free_params:
            se = res.std_errors[p] if res.std_errors else math.nan
            ci = res.conf_intervals[p] if res.conf_intervals else {"wald": [math.nan] * 2, "log_scale": [math.nan] * 2}
            w.writerow([p, getattr(res.theta_hat, p), se, *ci["wald"], *ci["log_scale"]])
        return buf.getvalue(), EXIT_OK
    return doc, EXIT_OK


def cmd_compare(args):
    data = _data(args.data)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ClippingWarning)
        reports = compare_models(data, _families(args.families), _options(args))
    status = EXIT_OK if all(r.ok for r in reports) else EXIT_FLAGGED
    if args.format == "csv":
        return reports_to_csv(reports), status
    if args.format == "text":
        return _table_text(reports) + "\n", status
    doc = {
        "seed": args.seed,
        "n": data.n,
        "data": args.data,
        "ranking": [r.family.tag for r in reports],
        "reports": [r.to_dict() for r in reports],
    }
    return doc, status


def cmd_simulate(args):
    params = _params(args)
    if args.n < 1:
        raise CommandError("DomainError", "--n must be positive")
    values = sample_blfr(args.n, params, RngState(args.seed))
    if args.format == "csv":
        return "x\n" + "".join(f"{v!r}\n" for v in values.tolist()), EXIT_OK
    if args.format == "text":
        return "".join(f"{v!r}\n" for v in values.tolist()), EXIT_OK
    return {"seed": args.seed, "algorithm": ALGORITHM_ID, "params": params.to_dict(), "n": args.n, "values": values.tolist()}, EXIT_OK


def cmd_ttt(args):
    data = _data(args.data)
    curve = ttt_transform(data)
    signature, _ = ttt_signature(data)
    if args.format == "csv":
        return two_column_csv(curve, ("i_over_n", "ttt")), EXIT_OK
    return {
        "n": data.n,
        "data": args.data,
        "signature": signature,
        "ttt": curve.tolist(),
        "ecdf": empirical_cdf(data).tolist(),
    }, EXIT_OK


def cmd_moments(args):
    params = _params(args)
    orders = sorted(set(args.k))
    if any(k < 1 for k in orders):
        raise CommandError("DomainError", "moment orders must be positive integers")
    moments = {}
    for k in sorted(set(orders) | {1, 2}):
        s = moment_series(k, params, args.tol)
        moments[k] = {"value": s.value, "terms": s.truncation_index, "tail_bound": s.tail_bound, "exact": s.exact}
    m1, m2 = moments[1]["value"], moments[2]["value"]
    doc = {
        "params": params.to_dict(),
        "moments": {str(k): moments[k] for k in orders},
        "mean": m1,
        "variance": m2 - m1 * m1,
    }
    if args.format == "csv":
        return two_column_csv([(k, moments[k]["value"]) for k in orders], ("k", "moment")), EXIT_OK
    return doc, EXIT_OK


def cmd_study(args):
    overrides = {
        "replications": args.replications,
        "seed": args.seed,
        "workers": args.workers,
        "n_starts": args.n_starts,
        "n_grid": args.n_grid,
    }
    try:
        if args.config:
            cfg = load_study_config(args.config, **overrides)
        else:
            kw = {k: v for k, v in overrides.items() if v is not None and k != "n_starts"}
            if "n_grid" in kw:
                kw["n_grid"] = [int(v) for v in kw["n_grid"].replace(",", " ").split()]
            cfg = StudyConfig(**kw)
            if args.n_starts is not None:
                cfg = StudyConfig(**{**kw, "fit_options": FitOptions(n_starts=args.n_starts)})
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        raise CommandError(type(exc).__name__, str(exc)) from None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = run_study(cfg)
    status = EXIT_FLAGGED if result.warnings else EXIT_OK
    if args.format == "csv":
        return emit_study_table(result, "csv"), status
    doc = json.loads(emit_study_table(result, "json"))
    doc["config"] = cfg.to_dict()
    return doc, status


def aarset_report(seed=DEFAULT_SEED, n_starts=FitOptions().n_starts, out_dir=None):
    """Fit every family to the Aarset sample; returns ``(document, reports, flagged)``."""
    data = ingest_data("aarset")
    opts = FitOptions(n_starts=n_starts, seed=seed)
    flagged = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ClippingWarning)
        ranked = compare_models(data, list(FAMILIES.values()), opts)
    by_tag = {r.family.tag: r for r in ranked}
    table = [by_tag[f.tag] for f in FAMILIES.values()]
    for r in table:
        if not r.ok:
            flagged.append(f"{r.family.tag}: {r.error}")
    lr = []
    alt = by_tag[BLFR.tag]
    for null in LR_NULLS:
        rep = by_tag[null.tag]
        if not (rep.ok and alt.ok):
            lr.append({"null_family": null.tag, "alt_family": BLFR.tag, "error": "fit unavailable"})
            continue
        try:
            lr.append(lr_test(rep.fit, alt.fit).to_dict())
        except BlfrError as exc:
            lr.append({"null_family": null.tag, "alt_family": BLFR.tag, "error": str(exc)})
            flagged.append(f"LR {null.tag} vs {BLFR.tag}: {exc}")
    signature, _ = ttt_signature(data)
    doc = {
        "seed": seed,
        "n": data.n,
        "table": [r.to_dict() for r in table],
        "ranking": [r.family.tag for r in ranked],
        "lr_tests": lr,
        "ttt_signature": signature,
        "flagged": flagged,
    }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        files = {
            "ttt": out / "aarset_ttt.csv",
            "ecdf": out / "aarset_ecdf.csv",
            "table": out / "aarset_table.csv",
        }
        files["ttt"].write_text(two_column_csv(ttt_transform(data), ("i_over_n", "ttt")))
        files["ecdf"].write_text(two_column_csv(empirical_cdf(data), ("x", "ecdf")))
        files["table"].write_text(reports_to_csv(table))
        doc["files"] = {k: str(v) for k, v in files.items()}
    return doc, table, flagged


def cmd_aarset_repro(args):
    doc, table, flagged = aarset_report(args.seed, args.n_starts, args.out_dir)
    status = EXIT_FLAGGED if flagged else EXIT_OK
    if args.format == "csv":
        return reports_to_csv(table), status
    if args.format == "text":
        lines = [_table_text(table), "", "likelihood-ratio tests against BLFR:"]
        for t in doc["lr_tests"]:
            if "error" in t:
                lines.append(f"  {t['null_family']:<9} failed: {t['error']}")
            else:
                lines.append(f"  {t['null_family']:<9} LR = {t['lr_stat']:.3f}  df = {t['df']}  p = {t['pvalue']:.3g}")
        lines += ["", f"ranking by AIC: {' > '.join(doc['ranking'])}", f"TTT second-difference signs: {doc['ttt_signature']}"]
        lines += [f"flagged: {f}" for f in flagged]
        return "\n".join(lines) + "\n", status
    return doc, status


def _add_params(p):
    for name in ("a", "b", "alpha", "beta"):
        p.add_argument(f"--{name}", type=float, required=True)


def _add_fit_options(p, seed=True):
    p.add_argument("--n-starts", type=int, default=FitOptions().n_starts, help="optimizer starts (default %(default)s)")
    p.add_argument("--confidence-level", type=float, default=0.95)
    if seed:
        p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for the jittered restarts")


def build_parser():
    parser = argparse.ArgumentParser(prog="blfr", description="Beta linear failure rate distribution toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--format", choices=("json", "csv", "text"), default="json")
        p.set_defaults(func=func)
        return p

    p = add("fit", cmd_fit, "Maximum-likelihood fit of one family.")
    p.add_argument("--family", default="blfr")
    p.add_argument("--data", required=True, help="data file, or 'aarset'")
    p.add_argument("--starts", action="store_true", help="include every optimizer start in the report")
    _add_fit_options(p)

    p = add("compare", cmd_compare, "Fit several families and rank them by AIC.")
    p.add_argument("--data", required=True, help="data file, or 'aarset'")
    p.add_argument("--families", default="all", help="comma-separated family names, or 'all'")
    _add_fit_options(p)

    p = add("simulate", cmd_simulate, "Draw a seeded BLFR sample.")
    p.add_argument("--n", type=int, required=True)
    _add_params(p)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p = add("ttt", cmd_ttt, "Scaled total-time-on-test curve and its convexity signature.")
    p.add_argument("--data", required=True, help="data file, or 'aarset'")

    p = add("moments", cmd_moments, "Raw moments from the mixture series.")
    _add_params(p)
    p.add_argument("--k", type=int, nargs="+", default=[1, 2, 3, 4])
    p.add_argument("--tol", type=float, default=1e-10)

    p = add("study", cmd_study, "Monte Carlo study of the estimators.")
    p.add_argument("--config", help="JSON or key = value config file")
    p.add_argument("--replications", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--n-grid", help="sample sizes, e.g. '30,200'")
    p.add_argument("--n-starts", type=int)
    p.add_argument("--workers", type=int)

    p = add("aarset-repro", cmd_aarset_repro, "Fit all seven families to the Aarset data, with LR tests and TTT.")
    p.add_argument("--out-dir", help="also write TTT, ECDF and table CSVs here")
    p.add_argument("--n-starts", type=int, default=FitOptions().n_starts)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    return parser


def _error_doc(kind, module, message, details=None):
    err = {"type": kind, "module": module, "message": message}
    if details is not None:
        err["details"] = details
    return {"error": err}


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    module = OWNER[args.command]
    try:
        out, status = args.func(args)
    except CommandError as exc:
        out, status = _error_doc(exc.kind, exc.module or module, str(exc), exc.details), exc.status
    except DomainError as exc:
        out, status = _error_doc(type(exc).__name__, module, str(exc)), EXIT_USAGE
    except BlfrError as exc:
        details = getattr(exc, "diagnostics", None) or None
        out, status = _error_doc(type(exc).__name__, module, str(exc), details), EXIT_FLAGGED
    if isinstance(out, dict) and "error" in out:
        print(f"blfr {args.command}: {out['error']['type']}: {out['error']['message']}", file=stderr)
        stdout.write(dumps(out))
        return status
    if isinstance(out, str):
        stdout.write(out)
    elif args.format == "text":
        stdout.write(_text(_finite(out)) + "\n")
    else:
        stdout.write(dumps(out))
    return status


if __name__ == "__main__":
    sys.exit(main())
