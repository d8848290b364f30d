"""Replication experiments: error tables, h selection, naive comparisons.

Every replication derives its own seed from (base_seed, beta index, method,
replication index) through numpy's SeedSequence, so tables are reproducible
bit for bit, independent of worker count and of which subset of levels is
run.  Failed replications are recorded with a status tag instead of
aborting the table; a level with more than half of its replications failed
is flagged.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, EstimationError, FeasibilityError
from .estimators import ISConfig, estimate
from .losses import LossModel
from .transform import extrapolation_factor

__all__ = [
    "FixedH",
    "AffineH",
    "GridH",
    "pert_h_rule",
    "ExperimentConfig",
    "ReplicationRow",
    "ReplicationTable",
    "derive_seed",
    "run_replications",
    "relative_rmse",
    "summarize",
    "CrossValEntry",
    "CrossValResult",
    "cross_validate_h",
    "VarianceRatioRow",
    "variance_ratio_study",
]

_METHOD_CODES = {"is": 0, "naive": 1}

REPLICATION_COLUMNS = (
    "method", "beta", "h", "n", "rep", "seed", "var_hat", "cvar_hat", "cvar_se", "status",
)
SUMMARY_COLUMNS = (
    "method", "beta", "h", "n", "reps", "rel_rmse_var", "rel_rmse_cvar", "mean_cvar",
)


@dataclass(frozen=True)
class FixedH:
    """The same h at every level."""

    value: float

    def h_for(self, beta):
        return self.value


@dataclass(frozen=True)
class AffineH:
    """h(beta) = intercept + slope * log(1/beta)."""

    intercept: float
    slope: float

    def h_for(self, beta):
        return self.intercept + self.slope * math.log(1.0 / beta)


@dataclass(frozen=True)
class GridH:
    """Candidate h values; resolve one with cross_validate_h before running."""

    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise DomainError("h grid must not be empty")
        object.__setattr__(self, "values", vals)

    def h_for(self, beta):
        raise DomainError(
            "an h grid does not fix h; run cross_validate_h first and use the selected value"
        )


def pert_h_rule(beta):
    """h(beta) = 2 + 0.6 log(1/beta), the affine rule for the project network runs.

    beta = 1 is admitted (the log term vanishes and the rule returns 2) even
    though no estimation accepts it; the rule itself is just arithmetic.
    """
    if not 0.0 < beta <= 1.0:
        raise DomainError(f"beta must lie in (0, 1], got {beta!r}")
    return 2.0 + 0.6 * math.log(1.0 / beta)


@dataclass(frozen=True)
class ExperimentConfig:
    """A replication study: input model, loss, levels and sizes."""

    dist: object
    loss: LossModel
    betas: tuple
    n: int
    h_rule: object
    reps: int = 50
    base_seed: int = 0
    threads: int = 1

    def __post_init__(self):
        betas = tuple(float(b) for b in np.atleast_1d(np.asarray(self.betas, dtype=float)))
        if not betas:
            raise DomainError("at least one beta level is required")
        object.__setattr__(self, "betas", betas)
        for name in ("n", "reps", "threads"):
            value = int(getattr(self, name))
            if value < 1:
                raise DomainError(f"{name} must be positive, got {value}")
            object.__setattr__(self, name, value)
        object.__setattr__(self, "base_seed", int(self.base_seed))


def derive_seed(base_seed, beta_index, method, rep):
    """Stable per-replication seed from (base seed, level, method, replication)."""
    code = _METHOD_CODES[method]
    ss = np.random.SeedSequence([int(base_seed), int(beta_index), code, int(rep)])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class ReplicationRow:
    method: str
    beta: float
    h: float | None
    n: int
    rep: int
    seed: int
    var_hat: float
    cvar_hat: float
    cvar_se: float
    status: str


@dataclass
class ReplicationTable:
    """Rows of replication results in deterministic (beta, rep) order."""

    rows: list

    def rows_for(self, beta=None, method=None):
        out = self.rows
        if beta is not None:
            out = [r for r in out if r.beta == beta]
        if method is not None:
            out = [r for r in out if r.method == method]
        return out

    def values(self, field, beta=None, method=None):
        """Array of one field over the successful rows."""
        rows = [r for r in self.rows_for(beta, method) if r.status == "ok"]
        return np.array([getattr(r, field) for r in rows], dtype=float)

    def failure_fraction(self, beta, method=None):
        rows = self.rows_for(beta, method)
        if not rows:
            raise DomainError(f"no rows at beta = {beta!r}")
        return sum(r.status != "ok" for r in rows) / len(rows)

    def flagged(self, beta, method=None):
        """True when more than half of the replications at this level failed."""
        return self.failure_fraction(beta, method) > 0.5

    def write_csv(self, path):
        write_rows_csv(path, REPLICATION_COLUMNS, [
            (r.method, r.beta, r.h, r.n, r.rep, r.seed, r.var_hat, r.cvar_hat, r.cvar_se, r.status)
            for r in self.rows
        ])


def _format_cell(value):
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_rows_csv(path, columns, rows):
    """Write a CSV deterministically: repr floats, stable order, no clock."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format_cell(v) for v in row])


def _one_replication(dist, loss, method, beta, h, n, rep, seed):
    try:
        report = estimate(dist, loss, ISConfig(beta=beta, n=n, seed=seed, h=h), method=method)
        return ReplicationRow(
            method=method, beta=beta, h=report.h, n=n, rep=rep, seed=seed,
            var_hat=report.var_hat, cvar_hat=report.cvar_hat, cvar_se=report.cvar_se,
            status="ok",
        )
    except FeasibilityError:
        status = "infeasible"
        return ReplicationRow(
            method=method, beta=beta, h=h, n=n, rep=rep, seed=seed,
            var_hat=float("nan"), cvar_hat=float("nan"), cvar_se=float("nan"),
            status=status,
        )
    except EstimationError:
        status = "tail-mass"
        return ReplicationRow(
            method=method, beta=beta, h=h, n=n, rep=rep, seed=seed,
            var_hat=float("nan"), cvar_hat=float("nan"), cvar_se=float("nan"),
            status=status,
        )


def run_replications(config, method):
    """Run reps independent estimations at every beta level.

    The naive method is attempted only where n * beta >= 5; infeasible
    levels still get their rows, tagged "infeasible", so downstream
    summaries can flag them.  Estimation failures inside a replication
    (too little tail mass) are recorded the same way rather than aborting.
    """
    if method not in _METHOD_CODES:
        raise DomainError(f"method must be one of {sorted(_METHOD_CODES)}, got {method!r}")
    tasks = []
    for bi, beta in enumerate(config.betas):
        h = config.h_rule.h_for(beta) if method == "is" else None
        for rep in range(config.reps):
            seed = derive_seed(config.base_seed, bi, method, rep)
            tasks.append((config.dist, config.loss, method, beta, h, config.n, rep, seed))
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            rows = list(pool.map(lambda t: _one_replication(*t), tasks))
    else:
        rows = [_one_replication(*t) for t in tasks]
    return ReplicationTable(rows=rows)


def relative_rmse(values, reference=None):
    """Relative root mean squared error of replicated estimates.

    Without a reference: sample standard deviation (n - 1 divisor) around
    the replication mean, divided by the mean (the usual coefficient of
    variation).  With a reference: sqrt(mean((v - reference)^2)) divided by
    the mean of the values.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise DomainError("values must be a nonempty 1-d collection")
    if np.any(~np.isfinite(v)):
        raise DomainError("values must be finite")
    mean = float(v.mean())
    if mean == 0.0:
        raise DomainError("relative error undefined: mean of values is zero")
    if reference is None:
        if v.size < 2:
            raise DomainError("need at least two values without a reference")
        return float(v.std(ddof=1) / mean)
    return float(math.sqrt(float(np.mean((v - float(reference)) ** 2))) / mean)


def summarize(table):
    """Aggregate a replication table into one row per (method, beta).

    Relative errors follow the no-reference convention; levels with fewer
    than two successful replications report nan errors.
    """
    keys = []
    for r in table.rows:
        k = (r.method, r.beta)
        if k not in keys:
            keys.append(k)
    out = []
    for method, beta in keys:
        rows = table.rows_for(beta, method)
        ok = [r for r in rows if r.status == "ok"]
        var_vals = np.array([r.var_hat for r in ok])
        cvar_vals = np.array([r.cvar_hat for r in ok])
        if len(ok) >= 2 and var_vals.mean() != 0 and cvar_vals.mean() != 0:
            rrv = relative_rmse(var_vals)
            rrc = relative_rmse(cvar_vals)
        else:
            rrv = rrc = float("nan")
        out.append({
            "method": method,
            "beta": beta,
            "h": rows[0].h,
            "n": rows[0].n,
            "reps": len(rows),
            "rel_rmse_var": rrv,
            "rel_rmse_cvar": rrc,
            "mean_cvar": float(cvar_vals.mean()) if len(ok) else float("nan"),
        })
    return out


@dataclass(frozen=True)
class CrossValEntry:
    h: float
    cv: float
    status: str        # "ok", "skipped: no outward extrapolation", "failed"
    n_ok: int = 0


@dataclass(frozen=True)
class CrossValResult:
    beta: float
    selected_h: float
    entries: tuple


def _select_h(entries):
    """Smallest-cv entry; exact ties go to the smaller h."""
    ok = [e for e in entries if e.status == "ok"]
    if not ok:
        raise EstimationError("cross-validation failed at every h grid point")
    best = min(ok, key=lambda e: (e.cv, e.h))
    return best.h


def cross_validate_h(config, grid, beta, reps_cv=20):
    """Pick h from a grid by minimizing the replication cv of the cvar.

    Each grid point runs reps_cv importance replications at the one level
    beta, reusing the same derived seeds (common random numbers), and
    scores the spread of the cvar estimates.  Grid points whose stretch
    factor would not push outward are skipped; if every point fails, an
    EstimationError is raised.
    """
    values = grid.values if isinstance(grid, GridH) else tuple(float(v) for v in grid)
    if not values:
        raise DomainError("h grid must not be empty")
    entries = []
    for h in values:
        try:
            extrapolation_factor(beta, h)
        except DomainError:
            entries.append(CrossValEntry(h=h, cv=float("nan"), status="skipped: no outward extrapolation"))
            continue
        sub = replace(config, betas=(beta,), h_rule=FixedH(h), reps=reps_cv)
        table = run_replications(sub, "is")
        vals = table.values("cvar_hat", beta, "is")
        if vals.size < 2 or vals.mean() == 0:
            entries.append(CrossValEntry(h=h, cv=float("nan"), status="failed", n_ok=int(vals.size)))
            continue
        entries.append(CrossValEntry(h=h, cv=relative_rmse(vals), status="ok", n_ok=int(vals.size)))
    return CrossValResult(beta=beta, selected_h=_select_h(entries), entries=tuple(entries))


@dataclass(frozen=True)
class VarianceRatioRow:
    beta: float
    cv_is: float
    cv_naive: float          # nan when not feasible or failed
    naive_status: str        # "ok", "infeasible", "failed"


def variance_ratio_study(config):
    """Replication cv of the importance and naive methods, level by level.

    The naive column is filled only where n * beta >= 5; other levels are
    flagged infeasible instead of being run.
    """
    is_table = run_replications(config, "is")
    naive_table = run_replications(config, "naive")
    out = []
    for beta in config.betas:
        vals_is = is_table.values("cvar_hat", beta, "is")
        cv_is = relative_rmse(vals_is) if vals_is.size >= 2 and vals_is.mean() != 0 else float("nan")
        if config.n * beta < 5:
            out.append(VarianceRatioRow(beta=beta, cv_is=cv_is, cv_naive=float("nan"),
                                        naive_status="infeasible"))
            continue
        vals_nv = naive_table.values("cvar_hat", beta, "naive")
        if vals_nv.size >= 2 and vals_nv.mean() != 0:
            out.append(VarianceRatioRow(beta=beta, cv_is=cv_is, cv_naive=relative_rmse(vals_nv),
                                        naive_status="ok"))
        else:
            out.append(VarianceRatioRow(beta=beta, cv_is=cv_is, cv_naive=float("nan"),
                                        naive_status="failed"))
    return out
