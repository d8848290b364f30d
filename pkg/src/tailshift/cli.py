"""Command line front end.

Subcommands:

* estimate   one estimation per beta level, written as CSV rows
* crossval   pick h from a grid by replication cv at one level
* benchmark  relative-error-vs-beta tables for both methods, plus the
             naive sample count needed to match the importance error
* varratio   replication cv of both methods side by side

Every run writes a manifest.json next to its CSVs holding the fully
resolved configuration; passing that manifest back via --config reproduces
the CSVs byte for byte.  Exit codes: 0 success, 1 usage or configuration
error, 2 estimation failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .distributions import CorrelationMatrix, DistributionSpec
from .errors import ConfigError, DomainError, EstimationError, WeightsFileError
from .estimators import ISConfig, estimate
from .harness import (
    AffineH, ExperimentConfig, FixedH, GridH, REPLICATION_COLUMNS, SUMMARY_COLUMNS,
    cross_validate_h, derive_seed, relative_rmse, run_replications, summarize,
    variance_ratio_study, write_rows_csv,
)
from .losses import LossModel, ReluNetParams, load_relu_params

_LOSS_KINDS = ("pert7", "linear", "relu_net")
_PATTERNS = ("tridiagonal", "equicorrelated", "identity")

VARRATIO_COLUMNS = ("beta", "cv_is", "cv_naive", "naive_status")
CROSSVAL_COLUMNS = ("h", "cv", "n_ok", "status", "selected")


@dataclass(frozen=True)
class RunSpec:
    """A parsed configuration: experiment plus method choice."""

    experiment: ExperimentConfig
    method: str                  # "is", "naive" or "both"
    resolved: dict               # JSON-ready config that rebuilds this spec

    @property
    def methods(self):
        return ("is", "naive") if self.method == "both" else (self.method,)


def _require(doc, field, types, where=""):
    name = f"{where}.{field}" if where else field
    if field not in doc:
        raise ConfigError("required entry is missing", field=name)
    value = doc[field]
    if types is not None and not isinstance(value, types):
        raise ConfigError(f"expected {types}, got {type(value).__name__}", field=name)
    return value


def _parse_correlation(spec, dim):
    if isinstance(spec, str):
        spec = {"pattern": spec}
    if not isinstance(spec, dict):
        raise ConfigError("must be a pattern name, a pattern object or a matrix object",
                          field="dist.correlation")
    try:
        if "matrix" in spec:
            return CorrelationMatrix(spec["matrix"])
        pattern = _require(spec, "pattern", str, where="dist.correlation")
        if pattern not in _PATTERNS:
            raise ConfigError(f"unknown pattern {pattern!r}, expected one of {_PATTERNS}",
                              field="dist.correlation.pattern")
        if pattern == "identity":
            return CorrelationMatrix.identity(dim)
        c = float(_require(spec, "c", (int, float), where="dist.correlation"))
        if pattern == "tridiagonal":
            return CorrelationMatrix.tridiagonal(dim, c)
        return CorrelationMatrix.equicorrelated(dim, c)
    except DomainError as exc:
        raise ConfigError(str(exc), field="dist.correlation") from None


def _parse_loss(spec, base_dir):
    if not isinstance(spec, dict):
        raise ConfigError("must be an object", field="loss")
    kind = _require(spec, "kind", str, where="loss")
    if kind not in _LOSS_KINDS:
        raise ConfigError(f"unknown kind {kind!r}, expected one of {_LOSS_KINDS}", field="loss.kind")
    rho = float(spec.get("rho", 1.0))
    resolved = {"kind": kind, "rho": rho}
    try:
        if kind == "pert7":
            return LossModel.pert7(rho=rho), resolved
        if kind == "linear":
            return LossModel.linear(rho=rho), resolved
        if "weights" in spec:
            w = spec["weights"]
            params = ReluNetParams(
                W1=np.asarray(w["W1"], dtype=float).reshape(
                    int(w["dims"]["hidden"]), int(w["dims"]["d"])),
                b1=w["b1"], w2=w["w2"], b2=w["b2"],
            )
        else:
            rel = Path(_require(spec, "weights_file", str, where="loss"))
            path = rel if rel.is_absolute() else base_dir / rel
            params = load_relu_params(path)
        resolved["weights"] = {
            "dims": {"d": params.dim, "hidden": params.hidden},
            "W1": [float(v) for v in params.W1.ravel()],
            "b1": [float(v) for v in params.b1],
            "w2": [float(v) for v in params.w2],
            "b2": params.b2,
        }
        return LossModel.relu_net(params, rho=rho), resolved
    except FileNotFoundError as exc:
        raise ConfigError(f"weights file not found: {exc}", field="loss.weights_file") from None
    except (WeightsFileError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad network weights: {exc}", field="loss") from None
    except DomainError as exc:
        raise ConfigError(str(exc), field="loss") from None


def _parse_h_rule(spec):
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return FixedH(float(spec)), {"fixed": float(spec)}
    if isinstance(spec, dict):
        if "fixed" in spec:
            return FixedH(float(spec["fixed"])), {"fixed": float(spec["fixed"])}
        if "grid" in spec:
            try:
                grid = GridH(tuple(float(v) for v in spec["grid"]))
            except (TypeError, ValueError, DomainError) as exc:
                raise ConfigError(f"bad h grid: {exc}", field="h.grid") from None
            return grid, {"grid": list(grid.values)}
        if "affine" in spec:
            aff = spec["affine"]
            try:
                if isinstance(aff, dict):
                    rule = AffineH(float(aff["intercept"]), float(aff["slope"]))
                else:
                    a, b = aff
                    rule = AffineH(float(a), float(b))
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"bad affine h rule: {exc}", field="h.affine") from None
            return rule, {"affine": {"intercept": rule.intercept, "slope": rule.slope}}
    raise ConfigError("must be a number, {'fixed': v}, {'grid': [...]} or "
                      "{'affine': {'intercept': a, 'slope': b}}", field="h")


_TOP_KEYS = {"dist", "loss", "betas", "n", "reps", "h", "seed", "method", "threads"}


def parse_config(path, overrides=None):
    """Read and validate a run configuration (or a manifest) from JSON.

    overrides maps {"seed", "method", "betas", "h", "threads"} to values
    from the command line; they are applied before validation and recorded
    in the resolved configuration.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse error: not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ConfigError("config parse error: top level must be an object")
    if "resolved_config" in doc:       # a manifest reproduces its own run
        doc = doc["resolved_config"]
        if not isinstance(doc, dict):
            raise ConfigError("manifest holds no usable resolved_config")

    unknown = sorted(set(doc) - _TOP_KEYS)
    if unknown:
        raise ConfigError(f"unknown entries: {', '.join(unknown)}", field=unknown[0])

    for key, value in (overrides or {}).items():
        if value is not None:
            doc = {**doc, key: value}

    dist_doc = _require(doc, "dist", dict)
    alphas_spec = _require(dist_doc, "alphas", (list, dict), where="dist")
    if isinstance(alphas_spec, dict):
        try:
            alphas = [float(alphas_spec["value"])] * int(alphas_spec["dim"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad alphas object: {exc}", field="dist.alphas") from None
    else:
        alphas = [float(a) for a in alphas_spec]
    if not alphas:
        raise ConfigError("needs at least one entry", field="dist.alphas")
    correlation = _parse_correlation(
        _require(dist_doc, "correlation", None, where="dist"), len(alphas))
    try:
        dist = DistributionSpec.from_alphas(alphas, correlation)
    except DomainError as exc:
        raise ConfigError(str(exc), field="dist") from None

    loss, loss_resolved = _parse_loss(_require(doc, "loss", dict), path.parent)

    betas_spec = _require(doc, "betas", (list, int, float))
    betas = [float(b) for b in (betas_spec if isinstance(betas_spec, list) else [betas_spec])]
    if not betas:
        raise ConfigError("needs at least one level", field="betas")
    for b in betas:
        if not (math.isfinite(b) and 0.0 < b < 1.0):
            raise ConfigError(f"levels must lie in (0, 1), got {b!r}", field="betas")

    method = doc.get("method", "is")
    if method not in ("is", "naive", "both"):
        raise ConfigError(f"must be 'is', 'naive' or 'both', got {method!r}", field="method")
    if method != "naive":
        for b in betas:
            if b >= 1.0 / math.e:
                raise ConfigError(
                    f"beta must be < 1/e for importance sampling, got {b:g}", field="betas")

    h_rule, h_resolved = _parse_h_rule(doc["h"]) if "h" in doc else (None, None)
    if h_rule is None and method != "naive":
        raise ConfigError("required for the importance method", field="h")
    if h_rule is None:
        h_rule = FixedH(float("nan"))    # never consulted on the naive path

    n = _require(doc, "n", (int, float))
    if n != int(n):
        raise ConfigError(f"must be a whole number, got {n!r}", field="n")
    n = int(n)
    reps = int(doc.get("reps", 50))
    seed = int(doc.get("seed", 0))
    threads = int(doc.get("threads", 1))
    try:
        experiment = ExperimentConfig(
            dist=dist, loss=loss, betas=tuple(betas), n=n, h_rule=h_rule,
            reps=reps, base_seed=seed, threads=threads,
        )
    except DomainError as exc:
        raise ConfigError(str(exc)) from None

    resolved = {
        "dist": {
            "alphas": alphas,
            "correlation": ({"matrix": [[float(v) for v in row] for row in correlation.matrix]}
                            if "matrix" in (dist_doc.get("correlation") or {})
                            else dist_doc["correlation"]),
        },
        "loss": loss_resolved,
        "betas": betas,
        "n": int(n),
        "reps": reps,
        "seed": seed,
        "method": method,
        "threads": threads,
    }
    if h_resolved is not None:
        resolved["h"] = h_resolved
    return RunSpec(experiment=experiment, method=method, resolved=resolved)


def _write_manifest(out_dir, command, config_path, spec, outputs, wall_seconds):
    manifest = {
        "command": command,
        "config_path": str(config_path),
        "package_version": __version__,
        "outputs": [str(p) for p in outputs],
        "wall_seconds": wall_seconds,
        "resolved_config": spec.resolved,
    }
    path = out_dir / "manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return path


def _reject_grid(spec):
    if "is" in spec.methods and isinstance(spec.experiment.h_rule, GridH):
        raise ConfigError(
            "an h grid only works with the crossval command; fix h (or pass --h)", field="h")


def cmd_estimate(spec, out_dir):
    """One estimation per (method, beta); rows flagged on failure."""
    _reject_grid(spec)
    exp = spec.experiment
    rows, failures = [], 0
    for method in spec.methods:
        for bi, beta in enumerate(exp.betas):
            h = exp.h_rule.h_for(beta) if method == "is" else None
            seed = derive_seed(exp.base_seed, bi, method, rep=0)
            try:
                rep = estimate(exp.dist, exp.loss,
                               ISConfig(beta=beta, n=exp.n, seed=seed, h=h), method=method)
                rows.append((method, beta, rep.h, exp.n, 0, seed,
                             rep.var_hat, rep.cvar_hat, rep.cvar_se, "ok"))
                print(f"{method:>5}  beta={beta:<12g} var={rep.var_hat:<12.6g} "
                      f"cvar={rep.cvar_hat:<12.6g} se={rep.cvar_se:.3g}")
            except EstimationError as exc:
                failures += 1
                rows.append((method, beta, h, exp.n, 0, seed,
                             float("nan"), float("nan"), float("nan"), _status_of(exc)))
                print(f"{method:>5}  beta={beta:<12g} FAILED: {exc}")
    out = out_dir / "estimates.csv"
    write_rows_csv(out, REPLICATION_COLUMNS, rows)
    return (2 if failures else 0), [out]


def _status_of(exc):
    from .errors import FeasibilityError
    return "infeasible" if isinstance(exc, FeasibilityError) else "tail-mass"


def cmd_crossval(spec, out_dir):
    """Cross-validate h on the grid at the smallest configured beta."""
    exp = spec.experiment
    if not isinstance(exp.h_rule, GridH):
        raise ConfigError("crossval needs an h grid ({'grid': [...]})", field="h")
    beta = min(exp.betas)
    result = cross_validate_h(exp, exp.h_rule, beta)
    rows = [(e.h, e.cv, e.n_ok, e.status, int(e.h == result.selected_h)) for e in result.entries]
    out = out_dir / "crossval.csv"
    write_rows_csv(out, CROSSVAL_COLUMNS, rows)
    print(f"beta={beta:g}: selected h = {result.selected_h:g}")
    for e in result.entries:
        mark = " <-- selected" if e.h == result.selected_h else ""
        print(f"  h={e.h:<6g} cv={e.cv:<10.4g} {e.status}{mark}")
    return 0, [out]


def cmd_benchmark(spec, out_dir):
    """Error-vs-beta tables for both methods plus the naive matching size."""
    _reject_grid(spec)
    exp = spec.experiment
    tables = [run_replications(exp, m) for m in spec.methods]
    all_rows = [r for t in tables for r in t.rows]
    rep_path = out_dir / "replications.csv"
    write_rows_csv(rep_path, REPLICATION_COLUMNS, [
        (r.method, r.beta, r.h, r.n, r.rep, r.seed, r.var_hat, r.cvar_hat, r.cvar_se, r.status)
        for r in all_rows
    ])
    summary_rows = []
    for table in tables:
        summary_rows.extend(summarize(table))

    match_info = None
    if "is" in spec.methods and "naive" in spec.methods:
        match_info = _naive_matching_n(spec, summary_rows)
        if match_info is not None:
            summary_rows.append(match_info["row"])

    sum_path = out_dir / "summary.csv"
    write_rows_csv(sum_path, SUMMARY_COLUMNS,
                   [tuple(row[c] for c in SUMMARY_COLUMNS) for row in summary_rows])
    for row in summary_rows:
        print(f"{row['method']:>5}  beta={row['beta']:<12g} n={row['n']:<8d} "
              f"rel_rmse_cvar={row['rel_rmse_cvar']:<10.4g} mean_cvar={row['mean_cvar']:.6g}")
    if match_info is not None:
        if match_info["matched"]:
            print(f"naive matches the importance error at beta={match_info['beta']:g} "
                  f"with n = {match_info['n']}")
        else:
            print(f"naive match budget exhausted at beta={match_info['beta']:g}: "
                  f"n = {match_info['n']} still above the importance error")
    return 0, [rep_path, sum_path]


def _naive_matching_n(spec, summary_rows, max_factor=64, hard_cap=512_000):
    """Double the naive n at the largest beta until its cv matches the
    importance cv (or the budget runs out); returns a summary row."""
    exp = spec.experiment
    beta = max(exp.betas)
    target = next((r["rel_rmse_cvar"] for r in summary_rows
                   if r["method"] == "is" and r["beta"] == beta), float("nan"))
    if not math.isfinite(target):
        return None
    reps = min(exp.reps, 20)
    budget = max(max_factor * exp.n, hard_cap)
    n = exp.n
    cv, mean_cvar, matched = float("nan"), float("nan"), False
    while True:
        if n * beta >= 5:
            sub = replace(exp, betas=(beta,), n=n, reps=reps)
            table = run_replications(sub, "naive")
            vals = table.values("cvar_hat", beta, "naive")
            if vals.size >= 2 and vals.mean() != 0:
                cv = relative_rmse(vals)
                mean_cvar = float(vals.mean())
            matched = math.isfinite(cv) and cv <= target
        if matched or n * 2 > budget:
            return {
                "beta": beta, "n": n, "matched": matched,
                "row": {"method": "naive-match", "beta": beta, "h": None, "n": n,
                        "reps": reps, "rel_rmse_var": float("nan"), "rel_rmse_cvar": cv,
                        "mean_cvar": mean_cvar},
            }
        n *= 2


def cmd_varratio(spec, out_dir):
    """Replication cv of both methods at every beta."""
    exp = spec.experiment
    if isinstance(exp.h_rule, GridH):   # this command always runs the importance path
        raise ConfigError(
            "an h grid only works with the crossval command; fix h (or pass --h)", field="h")
    rows = variance_ratio_study(exp)
    out = out_dir / "varratio.csv"
    write_rows_csv(out, VARRATIO_COLUMNS,
                   [(r.beta, r.cv_is, r.cv_naive, r.naive_status) for r in rows])
    for r in rows:
        print(f"beta={r.beta:<12g} cv_is={r.cv_is:<10.4g} cv_naive={r.cv_naive:<10.4g} "
              f"({r.naive_status})")
    return 0, [out]


_COMMANDS = {
    "estimate": cmd_estimate,
    "crossval": cmd_crossval,
    "benchmark": cmd_benchmark,
    "varratio": cmd_varratio,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tailshift",
        description="Importance sampling for value-at-risk and cvar of heavy tails.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__.splitlines()[0].lower())
        p.add_argument("--config", required=True, help="JSON run configuration (or a manifest)")
        p.add_argument("--seed", type=int, default=None, help="override the base seed")
        p.add_argument("--threads", type=int, default=None, help="worker threads for replications")
        p.add_argument("--out", default=".", help="directory for CSV and manifest outputs")
        p.add_argument("--method", choices=("is", "naive", "both"), default=None,
                       help="override the configured method")
        p.add_argument("--beta", type=float, action="append", default=None,
                       help="override the beta levels (repeatable)")
        p.add_argument("--h", type=float, default=None, help="override h with a fixed value")
    return parser


def main(argv=None):
    """Run the command line; returns the exit code instead of exiting."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    overrides = {
        "seed": args.seed,
        "threads": args.threads,
        "method": args.method,
        "betas": args.beta,
        "h": args.h,
    }
    try:
        spec = parse_config(args.config, overrides)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        started = time.perf_counter()
        code, outputs = _COMMANDS[args.command](spec, out_dir)
        manifest = _write_manifest(out_dir, args.command, args.config, spec, outputs,
                                   time.perf_counter() - started)
        print(f"wrote {', '.join(str(p) for p in outputs)} and {manifest}")
        return code
    except (ConfigError, WeightsFileError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (EstimationError, DomainError) as exc:
        print(f"estimation error: {exc}", file=sys.stderr)
        return 2


def cli_entry():
    sys.exit(main())
