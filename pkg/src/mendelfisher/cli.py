"""Command-line entry point.

Every subcommand writes CSV (or JSON with ``--json``) to stdout or to
``--output``.  The first line of every output is a ``#`` comment holding
the run manifest as JSON: subcommand, parameters, master seed, package
version and a sha256 digest of the body that follows.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import hashlib
import io
import json
import math
import os
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__, rng
from .approx import approx_total_pvalue, model_a_moments, qstar_moments_quadrature, table10
from .chisq import (binomial_chisq, binomial_pvalue, observed_pvalues, signed_chi,
                    table5_deterministic, table_v)
from .dataset import Dataset, DatasetError, export_csv, export_json, load_embedded, parse_csv
from .estimation import estimate, validate_estimator
from .exactdist import max_of_two_distribution, mixture_distribution, per_experiment_distribution
from .ks import ecdf, jitter_ties, ks_test
from .models import BiasedTheory, ModelA, ModelB, Null, f0_cdf, parse_model, vectorized_cdf
from .montecarlo import SimConfig, edwards_qq_samples, simulate_pvalues

__all__ = ["main", "run", "read_output", "OUTPUT_DIR_ENV"]

#: relative ``--output`` paths are resolved under this directory when set
OUTPUT_DIR_ENV = "MENDELFISHER_OUTPUT_DIR"


class _Usage(Exception):
    """Invalid combination of otherwise well-formed arguments."""


# ---------------------------------------------------------------------------
# argument types


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("seed must be nonnegative")
    return v


def _unit(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {v}")
    return v


def _open_unit(text: str) -> float:
    v = _unit(text)
    if v in (0.0, 1.0):
        raise argparse.ArgumentTypeError(f"must lie strictly inside (0, 1), got {v}")
    return v


def _finite(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError("must be finite")
    return v


# ---------------------------------------------------------------------------
# output


def _num(v: Any) -> Any:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def _csv_body(header: Sequence[str], rows) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(v) for v in row])
    return buf.getvalue().encode("utf-8")


def _jsonable(v: Any) -> Any:
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def _json_body(obj: Any) -> bytes:
    return (json.dumps(_jsonable(obj), indent=2) + "\n").encode("utf-8")


def _manifest(args: argparse.Namespace, body: bytes) -> bytes:
    params = {k: v for k, v in sorted(vars(args).items())
              if k not in ("command", "handler", "subparser", "threads", "output", "seed")}
    doc = {
        "subcommand": args.command,
        "parameters": _jsonable(params),
        "master_seed": args.seed,
        "artifact_version": __version__,
        "output_digest": "sha256:" + hashlib.sha256(body).hexdigest(),
    }
    return ("# " + json.dumps(doc, sort_keys=True) + "\n").encode("utf-8")


def read_output(data: bytes | str) -> tuple[dict, str]:
    """Split CLI output into (manifest, body) and verify the digest."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    first, _, body = data.partition("\n")
    if not first.startswith("# "):
        raise ValueError("output does not start with a manifest line")
    manifest = json.loads(first[2:])
    digest = "sha256:" + hashlib.sha256(body.encode("utf-8")).hexdigest()
    if digest != manifest.get("output_digest"):
        raise ValueError("output digest mismatch")
    return manifest, body


def _emit(args: argparse.Namespace, body: bytes, stdout) -> None:
    data = _manifest(args, body) + body
    if args.output:
        path = Path(args.output)
        root = os.environ.get(OUTPUT_DIR_ENV)
        if root and not path.is_absolute():
            path = Path(root) / path
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    else:
        stdout.write(data)
        stdout.flush()


# ---------------------------------------------------------------------------
# helpers


def _dataset(args) -> Dataset:
    if args.data is None:
        return load_embedded()
    try:
        return parse_csv(Path(args.data).read_bytes())
    except OSError as exc:
        raise _Usage(f"cannot read {args.data}: {exc.strerror}") from None


def _grouped_dataset(args, fisher: bool) -> Dataset:
    """Dataset for the group tables, which need all experiment groups.

    A binomial CSV cannot carry the multinomial counts behind the Fisher
    grouping; a file that reproduces the embedded table gets its layout.
    """
    ds = _dataset(args)
    if args.data is None:
        return ds
    embedded = load_embedded()
    if ds.binomials == embedded.binomials:
        return embedded
    try:
        ds.validate_full()
    except DatasetError as exc:
        raise DatasetError(f"group tables need the complete 84-experiment table: {exc}") from None
    if fisher:
        raise DatasetError("the Fisher grouping needs multinomial counts that a binomial CSV "
                           "does not carry; use --grouping edwards")
    return ds


def _model_from_flags(kind: str, alpha: float | None, beta: float | None):
    if kind in ("null", "uniform"):
        return Null()
    if kind == "a":
        if alpha is None:
            raise _Usage("--model a needs --alpha")
        return ModelA(alpha)
    if kind == "b":
        if beta is None:
            raise _Usage("--model b needs --beta")
        return ModelB(beta)
    raise _Usage(f"unknown model {kind!r}")


def _model_label(model) -> str:
    if isinstance(model, ModelA):
        return f"model-a:{model.alpha!r}"
    if isinstance(model, ModelB):
        return f"model-b:{model.beta!r}"
    return "uniform"


# ---------------------------------------------------------------------------
# subcommands


def cmd_dataset(args) -> bytes:
    ds = _dataset(args)
    if args.raw:
        return export_json(ds) if args.json else export_csv(ds)
    rows = []
    for b in sorted(ds.binomials, key=lambda b: b.id):
        rows.append({
            "id": b.id, "group": b.group.short, "trait": b.trait, "n": b.n, "n1": b.n1,
            "p0": f"{b.p0.numerator}/{b.p0.denominator}",
            "chisq": binomial_chisq(b).value, "signed_chi": signed_chi(b),
            "p_value": binomial_pvalue(b),
        })
    if args.json:
        return _json_body(rows)
    header = list(rows[0]) if rows else ["id"]
    return _csv_body(header, ([r[h] for h in header] for r in rows))


def cmd_table5(args) -> bytes:
    ds = _grouped_dataset(args, fisher=True)
    if args.table_v:
        rows = [{"group": r.label, "df": r.df, "chisq": r.chisq, "p_chisq": r.p_chisq}
                for r in table_v(ds)]
    else:
        rows = [{"group": r.label, "df": r.df,
                 "chisq_fisher": r.fisher.chisq, "p_fisher": r.fisher.p_chisq,
                 "chisq_edwards": r.edwards.chisq, "p_edwards": r.edwards.p_chisq}
                for r in table5_deterministic(ds)]
    if args.mc_reps:
        fish = simulate_pvalues(ds, SimConfig(Null(), args.mc_reps, args.seed, "fisher"),
                                args.threads)
        edw = simulate_pvalues(ds, SimConfig(Null(), args.mc_reps, args.seed, "edwards"),
                               args.threads)
        for r in rows:
            r["p_mc_fisher"] = fish[r["group"]].p
            r["p_mc_edwards"] = edw[r["group"]].p
    if args.json:
        return _json_body(rows)
    header = list(rows[0])
    return _csv_body(header, ([r[h] for h in header] for r in rows))


def cmd_mc(args) -> bytes:
    ds = _grouped_dataset(args, fisher=args.grouping == "fisher")
    model = _model_from_flags(args.model, args.alpha, args.beta)
    if args.grouping == "fisher" and not isinstance(model, Null):
        raise _Usage("--grouping fisher supports --model null only")
    res = simulate_pvalues(ds, SimConfig(model, args.reps, args.seed, args.grouping),
                           args.threads)
    rows = [{"group": e.label, "df": e.df, "chisq_obs": e.chisq_obs, "p_mc": e.p, "se": e.se,
             "exceed_count": e.exceed_count, "reps": e.reps} for e in res.values()]
    if args.json:
        return _json_body(rows)
    header = list(rows[0])
    return _csv_body(header, ([r[h] for h in header] for r in rows))


def _parse_against(text: str):
    try:
        return parse_model(text)
    except ValueError as exc:
        raise _Usage(str(exc)) from None


def cmd_ks(args) -> bytes:
    ds = _dataset(args)
    model = _parse_against(args.against)
    jseed = None if args.no_jitter else args.seed
    r = ks_test(observed_pvalues(ds), model.cdf, jitter_seed=jseed)
    out = {"against": _model_label(model), "d": r.d, "n": r.n, "p": r.p, "jitter_seed": r.jitter_seed}
    if args.json:
        return _json_body(out)
    return _csv_body(list(out), [list(out.values())])


def cmd_ecdf(args) -> bytes:
    ds = _dataset(args)
    x = np.asarray(observed_pvalues(ds))
    if args.jitter:
        x = np.clip(jitter_ties(x, seed=args.seed), 0.0, 1.0)
    e = ecdf(x)
    if args.json:
        return _json_body({"x": e.x, "ecdf": e.heights})
    return _csv_body(["x", "ecdf"], e.steps())


def cmd_model_cdf(args) -> bytes:
    x = np.arange(args.grid + 1) / args.grid
    if args.model == "biased":
        missing = [f for f in ("n", "p0", "p1", "alpha") if getattr(args, f) is None]
        if missing:
            raise _Usage("--model biased needs " + ", ".join("--" + m for m in missing))
        t = BiasedTheory(args.n, args.p0, args.p1, args.alpha)
        f0 = [f0_cdf(t, v) for v in x]
        fs = [t.cdf(v) for v in x]
        if args.json:
            return _json_body({"x": x, "f0": f0, "cdf": fs, "delta": t.delta, "eta": t.eta})
        return _csv_body(["x", "f0", "cdf"], zip(x, f0, fs))
    model = _model_from_flags(args.model, args.alpha, args.beta)
    f = vectorized_cdf(model, x)
    if args.json:
        return _json_body({"model": _model_label(model), "x": x, "cdf": f})
    return _csv_body(["x", "cdf"], zip(x, f))


def cmd_estimate(args) -> bytes:
    ds = _dataset(args)
    r = estimate(observed_pvalues(ds), args.family, args.grid, args.ci, jitter_seed=args.seed)
    if args.json:
        doc = r.to_dict()
        if args.with_curve:
            doc["curve"] = {"theta": r.theta, "d": r.d, "p": r.p}
        return _json_body(doc)
    return _csv_body(["theta", "d", "p"], zip(r.theta, r.d, r.p))


def cmd_validate(args) -> bytes:
    ds = _dataset(args)
    s = validate_estimator(ds, args.alpha, args.samples, args.ci, args.seed, args.grid)
    out = s.to_dict()
    if args.json:
        if args.with_estimates:
            out["estimates"] = s.estimates
        return _json_body(out)
    return _csv_body(list(out), [list(out.values())])


def cmd_exact_dist(args) -> bytes:
    ds = _dataset(args)
    if args.experiment is not None or args.n is not None:
        if args.experiment is not None:
            try:
                b = ds.by_id(args.experiment)
            except KeyError:
                raise _Usage(f"no experiment with id {args.experiment}") from None
            n, p0 = b.n, float(b.p0)
        elif args.p0 is None:
            raise _Usage("--n needs --p0")
        else:
            n, p0 = args.n, args.p0
        dist = per_experiment_distribution(n, p0)
        if args.max_of_two:
            dist = max_of_two_distribution(dist)
    else:
        dist = mixture_distribution(ds, args.truncate, args.max_of_two)
    if args.json:
        return _json_body({
            "support_size": len(dist) + dist.truncated_atoms,
            "truncated_atoms": dist.truncated_atoms,
            "truncated_mass": dist.truncated_mass,
            "p_value": dist.pvalues, "mass": dist.masses, "cdf": dist.cdf_values,
        })
    return _csv_body(["p_value", "mass", "cdf"], dist.rows())


def cmd_approx(args) -> bytes:
    if args.what == "table10":
        rows = table10(args.q_obs, args.m)
        if args.json:
            return _json_body(rows)
        header = list(rows[0])
        return _csv_body(header, ([r[h] for h in header] for r in rows))
    if args.alpha is None:
        raise _Usage("approx needs --alpha or the 'table10' target")
    mom = model_a_moments(args.alpha)
    out = mom.to_dict()
    out["q_obs"] = args.q_obs
    out["m"] = args.m
    out["p_normal"] = approx_total_pvalue(args.alpha, args.q_obs, args.m)
    if args.quadrature:
        mass, mu, var = qstar_moments_quadrature(args.alpha)
        out.update(quad_mass=mass, quad_mu=mu, quad_sigma2=var)
    if args.json:
        return _json_body(out)
    return _csv_body(list(out), [list(out.values())])


def cmd_qq(args) -> bytes:
    ds = _dataset(args)
    model = "normal" if args.model == "normal" else _model_from_flags(args.model, args.alpha, args.beta)
    q = edwards_qq_samples(ds, model, args.samples, args.seed)
    if args.json:
        doc = {"quantile": q.quantiles, "synthetic": q.synthetic, "observed": q.observed}
        if args.all_samples:
            doc["samples"] = q.samples
        return _json_body(doc)
    header = ["quantile", "synthetic", "observed"]
    cols = [q.quantiles, q.synthetic, q.observed]
    if args.all_samples:
        header += [f"s{i + 1}" for i in range(q.samples.shape[0])]
        cols += list(q.samples)
    return _csv_body(header, zip(*cols))


# ---------------------------------------------------------------------------
# parser


def _add_model_flags(p, choices):
    p.add_argument("--model", choices=choices, default=choices[0])
    p.add_argument("--alpha", type=_unit, help="Model A threshold")
    p.add_argument("--beta", type=_unit, help="Model B repetition probability")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit JSON instead of CSV")
    common.add_argument("--seed", type=_seed, default=rng.DEFAULT_SEED,
                        help=f"master seed (default {rng.DEFAULT_SEED})")
    common.add_argument("--threads", type=_positive_int, default=None,
                        help="worker threads for simulation (default: all cores)")
    common.add_argument("--output", "-o", help=f"write to a file (relative to ${OUTPUT_DIR_ENV} if set)")
    common.add_argument("--data", help="binomial dataset CSV instead of the embedded table")

    parser = argparse.ArgumentParser(prog="mendelfisher",
                                     description="Chi-square, K-S and selection-model analysis of Mendel's data.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name: str, handler: Callable, help: str):
        p = sub.add_parser(name, parents=[common], help=help, description=help)
        p.set_defaults(handler=handler, subparser=p)
        return p

    p = add("dataset", cmd_dataset, "per-experiment table with signed chi and p-values")
    p.add_argument("--raw", action="store_true", help="round-trippable dataset export only")

    p = add("table5", cmd_table5, "grouped chi-square totals, Fisher and binomial groupings")
    p.add_argument("--table-v", action="store_true", help="single-grouping layout with PV row")
    p.add_argument("--mc-reps", type=_positive_int, default=None,
                   help="add null Monte Carlo p-values with this many replicates")

    p = add("mc", cmd_mc, "Monte Carlo p-values of the grouped totals")
    _add_model_flags(p, ["null", "a", "b"])
    p.add_argument("--reps", type=_positive_int, default=1_000_000)
    p.add_argument("--grouping", choices=["edwards", "fisher"], default="edwards")

    p = add("ks", cmd_ks, "K-S test of the observed p-values against a model CDF")
    p.add_argument("--against", default="uniform", help="uniform | model-a:ALPHA | model-b:BETA")
    p.add_argument("--no-jitter", action="store_true", help="skip the tie-breaking jitter")

    p = add("ecdf", cmd_ecdf, "empirical CDF step points of the observed p-values")
    p.add_argument("--jitter", action="store_true", help="apply the tie-breaking jitter first")

    p = add("model-cdf", cmd_model_cdf, "model CDF on an equally spaced grid")
    _add_model_flags(p, ["uniform", "a", "b", "biased"])
    p.add_argument("--grid", type=_positive_int, default=1000, help="number of grid cells")
    p.add_argument("--n", type=_positive_int, help="trials (biased theory)")
    p.add_argument("--p0", type=_open_unit, help="hypothesized ratio (biased theory)")
    p.add_argument("--p1", type=_open_unit, help="true ratio (biased theory)")

    p = add("estimate", cmd_estimate, "minimum K-S distance estimate with confidence set")
    p.add_argument("--family", choices=["a", "b"], default="a")
    p.add_argument("--grid", type=_open_unit, default=0.001, help="grid width")
    p.add_argument("--ci", type=_open_unit, default=0.90, help="confidence level")
    p.add_argument("--with-curve", action="store_true", help="include the curve in JSON output")

    p = add("validate", cmd_validate, "simulation study of the Model A estimator")
    p.add_argument("--alpha", type=_unit, default=0.2)
    p.add_argument("--samples", type=_positive_int, default=1000)
    p.add_argument("--grid", type=_open_unit, default=0.001)
    p.add_argument("--ci", type=_open_unit, default=0.90)
    p.add_argument("--with-estimates", action="store_true")

    p = add("exact-dist", cmd_exact_dist, "exact discrete distribution of chi-square p-values")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--experiment", type=_positive_int, help="experiment id")
    g.add_argument("--mixture", action="store_true", help="equal-weight pool of all experiments (default)")
    g.add_argument("--n", type=_positive_int, help="trials of an ad hoc experiment (with --p0)")
    p.add_argument("--p0", type=_open_unit)
    p.add_argument("--max-of-two", action="store_true")
    p.add_argument("--truncate", type=_unit, default=0.001,
                   help="drop lowest atoms while cumulative mass is below this (mixture)")

    p = add("approx", cmd_approx, "normal approximation under Model A")
    p.add_argument("what", nargs="?", choices=["table10"], help="emit the three-row summary table")
    p.add_argument("--alpha", type=_unit)
    p.add_argument("--q-obs", type=_finite, default=41.3376)
    p.add_argument("--m", type=_positive_int, default=84)
    p.add_argument("--quadrature", action="store_true", help="add numerical-integration cross-check")

    p = add("qq", cmd_qq, "normal QQ data for signed chi values")
    _add_model_flags(p, ["null", "normal", "a", "b"])
    p.add_argument("--samples", type=_positive_int, default=100)
    p.add_argument("--all-samples", action="store_true", help="emit every sorted sample")

    return parser


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout.buffer
    stderr = stderr if stderr is not None else sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stderr(stderr):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        body = args.handler(args)
    except _Usage as exc:
        args.subparser.print_usage(stderr)
        print(f"mendelfisher {args.command}: error: {exc}", file=stderr)
        return 2
    except (DatasetError, ArithmeticError, FloatingPointError, ValueError) as exc:
        print(f"mendelfisher {args.command}: failed: {exc}", file=stderr)
        return 1
    _emit(args, body, stdout)
    return 0


def main() -> None:
    try:
        code = run()
        sys.stdout.flush()
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        code = 0
    sys.exit(code)
