"""Command-line interface: CSV in, deterministic JSON (or tidy CSV) out.

Seven subcommands cover the pipeline: `describe` (one variable:
quartiles, LP moments, tail index, normality flag, QIQ grid), `depend`
(comoment matrix, correlations, LPINFOR, copula grid), `regress` (series
regression curve), `cquantile` (conditional mean and quantile curves plus
extreme-slice modality flags), `fit` (comparison density against a
reference family, MaxEnt parameters, skew-G density grid), `twosample`
(the full two-sample report with classification curve), and
`bayes-update` (conjugate-normal posterior from summary flags).

Output is reproducible byte for byte: floats are rendered with %.10g,
key order is fixed, and the only randomness (none in the default
payloads) is governed by --seed. Exit codes: 0 success, 2 input problems
(files, columns, flag values), 3 computation failures.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import compdensity as cdmod
from . import copula as cpmod
from . import twosample as tsmod
from .datasets import fixture_path
from .empirical import (informative_quantile, make_sample, mid_quantile,
                        quartile_summary)
from .errors import (EmptyAfterFilter, FileNotFound, InputError,
                     LPStatsError, MissingColumn)
from .lp import lhermite_normality, lp_moments
from .scores import build_score_basis

__all__ = ["Dataset", "ingest_csv", "main"]

SCHEMA_VERSION = "1"


class Dataset:
    """Named numeric columns of equal length plus a parse report."""

    __slots__ = ("columns", "source", "kept", "dropped", "reasons")

    def __init__(self, columns, source, kept, dropped, reasons):
        self.columns = columns
        self.source = source
        self.kept = kept
        self.dropped = dropped
        self.reasons = reasons


def ingest_csv(path, columns) -> Dataset:
    """Parse the requested columns, dropping rows that fail to be numeric.

    The file needs a header row; unknown column names report the
    available ones. Rows with short length, empty fields, or non-numeric
    entries (NaN and infinities included) in the requested columns are
    dropped and counted by reason.
    """
    p = Path(path)
    if not p.is_file():
        raise FileNotFound(f"no such file: {path}")
    with p.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyAfterFilter(f"{path} is empty")
        header = [h.strip() for h in header]
        for name in columns:
            if name not in header:
                raise MissingColumn(name, header)
        idx = [header.index(name) for name in columns]
        out = [[] for _ in columns]
        dropped = 0
        reasons = {}

        def drop(reason):
            nonlocal dropped
            dropped += 1
            reasons[reason] = reasons.get(reason, 0) + 1

        for row in reader:
            if not row:
                continue
            if any(i >= len(row) for i in idx):
                drop("short_row")
                continue
            fields = [row[i].strip() for i in idx]
            if any(not f for f in fields):
                drop("empty_field")
                continue
            try:
                values = [float(f) for f in fields]
            except ValueError:
                drop("non_numeric")
                continue
            if not all(math.isfinite(v) for v in values):
                drop("non_numeric")
                continue
            for slot, v in zip(out, values):
                slot.append(v)
    kept = len(out[0]) if out else 0
    if kept == 0:
        raise EmptyAfterFilter(f"no usable rows in {path} for {columns}")
    return Dataset(
        columns={name: np.array(vals) for name, vals in zip(columns, out)},
        source=str(path), kept=kept, dropped=dropped, reasons=reasons,
    )


# ---------------------------------------------------------------------------
# deterministic serialization

def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    v = float(x)
    if math.isnan(v) or math.isinf(v):
        raise LPStatsError("non-finite value reached the serializer")
    return f"{v:.10g}"


def _jsonify(obj, parts):
    if obj is None:
        parts.append("null")
    elif isinstance(obj, str):
        parts.append(json.dumps(obj))
    elif isinstance(obj, (bool, np.bool_, int, np.integer, float, np.floating)):
        parts.append(_num(obj))
    elif isinstance(obj, dict):
        parts.append("{")
        for i, (key, val) in enumerate(obj.items()):
            if i:
                parts.append(",")
            parts.append(json.dumps(str(key)))
            parts.append(":")
            _jsonify(val, parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        parts.append("[")
        for i, val in enumerate(obj):
            if i:
                parts.append(",")
            _jsonify(val, parts)
        parts.append("]")
    else:
        raise LPStatsError(f"cannot serialize {type(obj).__name__}")


def render_json(envelope) -> str:
    parts = []
    _jsonify(envelope, parts)
    parts.append("\n")
    return "".join(parts)


def render_csv(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_num(v) if not isinstance(v, str) else v
                              for v in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommand payloads

def _grid_u(n: int) -> np.ndarray:
    return (np.arange(int(n)) + 0.5) / int(n)


def _load(args, names):
    ds = ingest_csv(args.data, names)
    warnings = []
    if ds.dropped:
        detail = ", ".join(f"{k}: {v}" for k, v in sorted(ds.reasons.items()))
        warnings.append(f"dropped {ds.dropped} rows ({detail})")
    return ds, warnings


def cmd_describe(args):
    ds, warnings = _load(args, [args.col])
    s = make_sample(ds.columns[args.col])
    b = build_score_basis(s, args.order)
    mom = lp_moments(s, b)
    q = quartile_summary(s)
    grid = _grid_u(args.grid)
    lh = lhermite_normality(s)
    payload = {
        "column": args.col,
        "n": s.n,
        "distinct": s.r,
        "mean": s.mean,
        "sd": s.sd,
        "quartiles": {"q1": q.q1, "q2": q.q2, "q3": q.q3,
                      "mq": q.mq, "dq": q.dq},
        "lp_moments": mom.moments,
        "tail_index": mom.tail_index,
        "lp_square_sum": float(np.sum(mom.moments ** 2)),
        "lhermite": {"statistic": lh.statistic,
                     "significant": lh.significant},
        "qiq_grid": {
            "u": grid,
            "qmid": mid_quantile(s, grid),
            "qiq": informative_quantile(s, grid),
        },
    }
    if b.max_order < args.order:
        warnings.append(f"score basis truncated at order {b.max_order}")
    return payload, warnings


def cmd_depend(args):
    ds, warnings = _load(args, [args.x, args.y])
    x, y = ds.columns[args.x], ds.columns[args.y]
    mod = cpmod.fit_copula(x, y, order=args.order, rule=args.select)
    from .lp import correlations
    cor = correlations(x, y)
    grid = _grid_u(args.grid)
    uu, vv = np.meshgrid(grid, grid, indexing="ij")
    cop = cpmod.eval_copula(mod, uu.ravel(), vv.ravel()).reshape(uu.shape)
    payload = {
        "n": x.size,
        "correlations": {
            "pearson": cor.pearson,
            "spearman_mid": cor.spearman_mid,
            "gini_xy": cor.gini_xy,
            "gini_yx": cor.gini_yx,
        },
        "comoments": {
            "order_x": mod.lpm.entries.shape[0],
            "order_y": mod.lpm.entries.shape[1],
            "rule": mod.lpm.rule,
            "entries": mod.lpm.entries,
            "selected": mod.lpm.selected,
            "lpinfor": mod.lpm.lpinfor,
        },
        "copula_grid": {"u": grid, "v": grid, "density": cop},
    }
    return payload, warnings


def cmd_regress(args):
    ds, warnings = _load(args, [args.x, args.y])
    x, y = ds.columns[args.x], ds.columns[args.y]
    sx = make_sample(x)
    bx = build_score_basis(sx, args.order)
    fit = cpmod.series_regression(x, y, bx, rule=args.select)
    payload = {
        "n": x.size,
        "ybar": fit.ybar,
        "y_sd": fit.y_sd,
        "coefficients": fit.coefficients,
        "selected": fit.selected,
        "curve": {"x": sx.values, "fitted": fit.predict(sx.values)},
    }
    return payload, warnings


def cmd_cquantile(args):
    ds, warnings = _load(args, [args.x, args.y])
    x, y = ds.columns[args.x], ds.columns[args.y]
    mod = cpmod.fit_copula(x, y, order=args.order, rule=args.select)
    us = mod.sx.fmid
    means, table = cpmod.quantile_curves(mod, us, args.p)
    quantiles = {f"{p:.10g}": table[:, j] for j, p in enumerate(args.p)}
    extreme = []
    for u in (0.05, 0.95):
        count, where = cpmod.slice_modes(mod, u)
        extreme.append({"u": u, "modes": count, "bimodal": count >= 2,
                        "mode_values": where})
    payload = {
        "n": x.size,
        "curve": {"x": mod.sx.values, "u": us, "mean": means,
                  "quantiles": quantiles},
        "extreme_slices": extreme,
    }
    return payload, warnings


def cmd_fit(args):
    ds, warnings = _load(args, [args.col])
    s = make_sample(ds.columns[args.col])
    g = cdmod.fit_reference(args.g, s)
    mod = cdmod.maxent_fit(cdmod.l2_fit(s, g, args.order, rule=args.select))
    grid = _grid_u(args.grid)
    xs = np.linspace(float(s.values[0]), float(s.values[-1]), int(args.grid))
    gu, fu = cdmod.pp_grid(s, g)
    payload = {
        "column": args.col,
        "n": s.n,
        "g": {"kind": g.kind, "params": dict(sorted(g.params.items()))},
        "c": mod.c,
        "selected": mod.selected,
        "gof": cdmod.gof_distance(mod),
        "maxent": {
            "theta0": mod.theta0,
            "theta": mod.theta,
            "iterations": mod.maxent_iterations,
            "residual": mod.maxent_residual,
        },
        "pp_grid": {"g": gu, "f": fu},
        "dhat_grid": {
            "u": grid,
            "l2": cdmod.eval_density(mod, grid, "l2"),
            "clipped": cdmod.eval_density(mod, grid, "l2_clipped"),
            "maxent": cdmod.eval_density(mod, grid, "maxent"),
        },
        "density_grid": {
            "x": xs,
            "g_pdf": g.pdf(xs),
            "skew_g": cdmod.skew_g_density(mod, xs),
        },
    }
    return payload, warnings


def cmd_twosample(args):
    ds, warnings = _load(args, [args.y, args.group])
    y, grp = ds.columns[args.y], ds.columns[args.group]
    rep = tsmod.analyze(grp, y, m=args.order, rule=args.select,
                        small_sample=args.small_sample)
    dens = tsmod.two_sample_comp_density(grp, y, m=args.order,
                                         rule=args.select)
    payload = {
        "n": y.size,
        "labels": list(rep.labels),
        "groups": [
            {"label": rep.labels[0], "n": rep.g1.n, "mean": rep.g1.m,
             "var": rep.g1.v},
            {"label": rep.labels[1], "n": rep.g2.n, "mean": rep.g2.m,
             "var": rep.g2.v},
        ],
        "combined": {
            "n": rep.combined.n, "tau1": rep.combined.tau1,
            "tau2": rep.combined.tau2, "mean": rep.combined.m,
            "var": rep.combined.v, "vpool": rep.combined.vpool,
        },
        "student": {"t_core": rep.t, "t_scaled": rep.t_scaled,
                    "df": rep.combined.n - 2},
        "correlation": {"r": rep.r, "r2": rep.r2,
                        "identities_ok": rep.identities_ok},
        "wilcoxon": {"w": rep.w, "z": rep.z_stat},
        "high_order": {"c": dens.c, "lp1k": dens.lp1k,
                       "selected": dens.selected},
        "classification": {
            "prior": dens.tau,
            "y": dens.sy.values,
            "density": dens.atom_density,
            "posterior": tsmod.classify(dens, dens.sy.values),
        },
    }
    return payload, warnings


def cmd_bayes_update(args):
    prior = tsmod.BayesNormalState(n_eff=args.prior_n, m=args.prior_mean,
                                   v=args.prior_var)
    data = tsmod.GroupSummary(n=args.n, m=args.mean, v=args.var)
    post = tsmod.bayes_normal_update(prior, data)
    payload = {
        "prior": {"n_eff": prior.n_eff, "mean": prior.m, "var": prior.v},
        "data": {"n": data.n, "mean": data.m, "var": data.v},
        "posterior": {"n_eff": post.n_eff, "mean": post.m, "var": post.v},
    }
    return payload, []


# ---------------------------------------------------------------------------
# tidy CSV projections of the grid payloads

def _csv_view(name, payload):
    if name == "describe":
        g = payload["qiq_grid"]
        return ["u", "qmid", "qiq"], list(zip(g["u"], g["qmid"], g["qiq"]))
    if name == "depend":
        cm = payload["comoments"]
        rows = []
        for j in range(cm["order_x"]):
            for k in range(cm["order_y"]):
                rows.append((j + 1, k + 1, cm["entries"][j][k],
                             bool(cm["selected"][j][k])))
        return ["j", "k", "lp", "selected"], rows
    if name == "regress":
        c = payload["curve"]
        return ["x", "fitted"], list(zip(c["x"], c["fitted"]))
    if name == "cquantile":
        c = payload["curve"]
        header = ["x", "u", "mean"] + [f"p{k}" for k in c["quantiles"]]
        cols = [c["x"], c["u"], c["mean"]] + list(c["quantiles"].values())
        return header, list(zip(*cols))
    if name == "fit":
        d = payload["density_grid"]
        return ["x", "g_pdf", "skew_g"], list(zip(d["x"], d["g_pdf"],
                                                  d["skew_g"]))
    if name == "twosample":
        c = payload["classification"]
        return ["y", "density", "posterior"], list(zip(c["y"], c["density"],
                                                       c["posterior"]))
    if name == "bayes-update":
        p = payload["posterior"]
        return ["n_eff", "mean", "var"], [(p["n_eff"], p["mean"], p["var"])]
    raise LPStatsError(f"no csv view for {name}")


# ---------------------------------------------------------------------------
# parser and dispatch

def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _prob_list(text):
    try:
        ps = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))
    if not ps or any(not 0.0 < p < 1.0 for p in ps):
        raise argparse.ArgumentTypeError(
            "probabilities must lie strictly between 0 and 1"
        )
    return ps


def _add_common(sub, grid_default=101, order_default=4):
    sub.add_argument("--data", default=fixture_path(),
                     help="CSV file (default: the bundled example table)")
    sub.add_argument("--order", type=_positive_int, default=order_default,
                     help=f"series order (default {order_default})")
    sub.add_argument("--grid", type=_positive_int, default=grid_default,
                     help=f"grid size for emitted curves (default {grid_default})")
    sub.add_argument("--seed", type=int, default=42,
                     help="seed echoed into the output envelope (default 42)")
    sub.add_argument("--select", choices=["aic", "bic", "none"],
                     default="aic", help="coefficient selection rule")
    sub.add_argument("--format", choices=["json", "csv"], default="json")
    sub.add_argument("--out", default=None, help="write output to a file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lpstats",
        description="Rank-based nonparametric statistics on CSV columns.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("describe", help="one-variable diagnostics")
    p.add_argument("--col", required=True)
    _add_common(p, order_default=5)
    p.set_defaults(handler=cmd_describe)

    p = subs.add_parser("depend", help="dependence diagnostics of a pair")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    _add_common(p, grid_default=51)
    p.set_defaults(handler=cmd_depend)

    p = subs.add_parser("regress", help="orthogonal series regression")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    _add_common(p)
    p.set_defaults(handler=cmd_regress)

    p = subs.add_parser("cquantile", help="conditional mean/quantile curves")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--p", type=_prob_list, default=[.05, .25, .5, .75, .95],
                   help="comma-separated probabilities")
    _add_common(p)
    p.set_defaults(handler=cmd_cquantile)

    p = subs.add_parser("fit", help="comparison density against a reference")
    p.add_argument("--col", required=True)
    p.add_argument("--g", choices=["normal", "exponential", "uniform"],
                   required=True)
    _add_common(p)
    p.set_defaults(handler=cmd_fit)

    p = subs.add_parser("twosample", help="two-group analysis of a response")
    p.add_argument("--y", required=True)
    p.add_argument("--group", required=True)
    p.add_argument("--small-sample", action="store_true",
                   help="scale the Wilcoxon z by sqrt(n-1) instead of sqrt(n)")
    _add_common(p)
    p.set_defaults(handler=cmd_twosample)

    p = subs.add_parser("bayes-update", help="conjugate-normal belief update")
    p.add_argument("--prior-n", type=float, required=True)
    p.add_argument("--prior-mean", type=float, required=True)
    p.add_argument("--prior-var", type=float, required=True)
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--mean", type=float, required=True)
    p.add_argument("--var", type=float, required=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_bayes_update)

    return parser


_ECHO_SKIP = {"handler", "command", "format", "out", "seed"}


def _echo_args(args) -> dict:
    echo = {}
    for key in sorted(vars(args)):
        if key in _ECHO_SKIP:
            continue
        value = getattr(args, key)
        if isinstance(value, Path):
            value = str(value)
        echo[key] = value
    return echo


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        payload, warnings = args.handler(args)
        envelope = {
            "schema_version": SCHEMA_VERSION,
            "command": {
                "name": args.command,
                "seed": args.seed,
                "args": _echo_args(args),
            },
            "payload": payload,
            "warnings": warnings,
        }
        if args.format == "csv":
            header, rows = _csv_view(args.command, payload)
            text = render_csv(header, rows)
        else:
            text = render_json(envelope)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LPStatsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
