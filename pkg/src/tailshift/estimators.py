"""Weighted tail estimators and the one-shot estimation entry point.

The estimators consume weighted loss samples (loss, log weight).  With all
log weights zero they reduce to the plain empirical estimators, so the
naive path is the weighted path with unit weights.

Conventions, fixed here and relied on by the tests:

* tail probabilities use the strict inequality loss > u;
* the value at risk is attained at a sample point: the smallest sampled
  loss v whose estimated tail probability is <= beta (the tail just below
  v then exceeds beta by construction);
* weights are accumulated after subtracting the maximal log weight, and
  comparisons against beta happen in linear space so that exact ties
  (e.g. unit weights with beta * n integral) resolve exactly;
* sample variances use the n - 1 divisor;
* weights are never clipped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .distributions import sample_inputs
from .errors import DomainError, FeasibilityError, TailMassError
from .losses import LossModel
from .transform import TransformParams, extrapolate, extrapolation_factor, log_likelihood_ratio

__all__ = [
    "WeightedLossSample",
    "ISConfig",
    "EstimateReport",
    "tail_probability",
    "value_at_risk",
    "cvar",
    "cvar_standard_error",
    "naive_var_cvar",
    "estimate",
]

NAIVE_MIN_TAIL_COUNT = 5.0


@dataclass(frozen=True)
class WeightedLossSample:
    """One sampled loss with its log importance weight (0 for plain sampling)."""

    loss: float
    log_weight: float = 0.0


def _as_arrays(samples):
    """Split samples into (losses, log_weights) float arrays.

    Accepts a sequence of WeightedLossSample or a pair of equal-length
    arrays (losses, log_weights).
    """
    if isinstance(samples, tuple) and len(samples) == 2:
        losses = np.asarray(samples[0], dtype=float)
        logw = np.asarray(samples[1], dtype=float)
    else:
        pairs = [(s.loss, s.log_weight) for s in samples]
        arr = np.array(pairs, dtype=float).reshape(len(pairs), 2)
        losses, logw = arr[:, 0], arr[:, 1]
    if losses.ndim != 1 or losses.shape != logw.shape:
        raise DomainError(
            f"need equal-length 1-d losses and log weights, got {losses.shape} and {logw.shape}"
        )
    if losses.size == 0:
        raise DomainError("need at least one sample")
    if np.any(~np.isfinite(losses)) or np.any(np.isnan(logw)) or np.any(logw == np.inf):
        raise DomainError("losses must be finite and log weights must not be nan or +inf")
    return losses, logw


def _check_beta(beta):
    if not (isinstance(beta, (int, float)) and math.isfinite(beta) and 0.0 < beta < 1.0):
        raise DomainError(f"beta must lie in (0, 1), got {beta!r}")
    return float(beta)


def tail_probability(samples, u):
    """Weighted estimate of P(loss > u): mean of weight * indicator(loss > u)."""
    losses, logw = _as_arrays(samples)
    mask = losses > u
    if not np.any(mask):
        return 0.0
    return float(np.exp(logsumexp(logw[mask]) - math.log(losses.size)))


def value_at_risk(samples, beta):
    """Smallest sampled loss whose weighted tail probability is <= beta.

    Requires the total weighted mass mean(weights) to exceed beta, else
    every threshold would qualify; failing that raises TailMassError
    ("beta too large for sampled tail mass").
    """
    losses, logw = _as_arrays(samples)
    beta = _check_beta(beta)
    n = losses.size
    if logsumexp(logw) - math.log(n) <= math.log(beta):
        raise TailMassError(
            f"beta too large for sampled tail mass: mean weight <= beta = {beta:g}"
        )
    m = float(logw.max())
    scaled = np.exp(logw - m)          # in (0, 1], so suffix sums stay bounded by n
    order = np.argsort(losses, kind="stable")
    uniq, start = np.unique(losses[order], return_index=True)
    mass = np.add.reduceat(scaled[order], start)
    above = np.cumsum(mass[::-1])[::-1]
    above = np.concatenate([above[1:], [0.0]])   # scaled mass strictly above uniq[j]
    with np.errstate(over="ignore"):
        threshold = beta * n * np.exp(-m)        # compare in linear space for exact ties
    return float(uniq[int(np.argmax(above <= threshold))])


def cvar(samples, beta, var):
    """Tail average var + mean(weight * (loss - var)+) / beta."""
    losses, logw = _as_arrays(samples)
    beta = _check_beta(beta)
    n = losses.size
    m = float(logw.max())
    if m == -np.inf:
        return float(var)
    excess = np.maximum(losses - var, 0.0)
    shifted = float(np.exp(logw - m) @ excess)
    if shifted == 0.0:
        # nothing above var: exp(m) may be inf here and inf * 0 is nan
        return float(var)
    with np.errstate(over="ignore"):
        return float(var + np.exp(m) * shifted / (n * beta))


def cvar_standard_error(samples, beta, var):
    """Plug-in standard error of the cvar estimate.

    sqrt(sample variance of weight * (loss - var)+ over n) / beta, with the
    n - 1 divisor.  A single sample has no variance estimate, so n >= 2.
    """
    losses, logw = _as_arrays(samples)
    beta = _check_beta(beta)
    n = losses.size
    if n < 2:
        raise DomainError("standard error needs at least two samples")
    m = float(logw.max())
    if m == -np.inf:
        return 0.0
    terms = np.exp(logw - m) * np.maximum(losses - var, 0.0)
    spread = math.sqrt(np.var(terms, ddof=1) / n)
    if spread == 0.0:
        return 0.0
    with np.errstate(over="ignore"):
        return float(np.exp(m) * spread / beta)


def naive_var_cvar(losses, beta):
    """Plain empirical (value at risk, cvar) at level beta: unit weights."""
    losses = np.asarray(losses, dtype=float)
    pair = (losses, np.zeros(losses.shape))
    v = value_at_risk(pair, beta)
    return v, cvar(pair, beta, v)


@dataclass(frozen=True)
class ISConfig:
    """Parameters of one estimation run.

    h may stay None for the naive method (it is ignored there).
    """

    beta: float
    n: int
    seed: int
    h: float | None = None

    def __post_init__(self):
        _check_beta(self.beta)
        if not (isinstance(self.n, (int, np.integer)) and int(self.n) >= 1):
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        if not isinstance(self.seed, (int, np.integer)) or int(self.seed) < 0:
            raise DomainError(f"seed must be a nonnegative integer, got {self.seed!r}")
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "seed", int(self.seed))
        if self.h is not None:
            object.__setattr__(self, "h", float(self.h))


@dataclass(frozen=True)
class EstimateReport:
    """Result of one run: estimates plus everything needed to rerun it."""

    method: str
    beta: float
    h: float | None
    n: int
    seed: int
    var_hat: float
    cvar_hat: float
    cvar_se: float


def estimate(dist, loss, config, method="is", r_override=None):
    """Run one estimation and report (value at risk, cvar, standard error).

    Parameters
    ----------
    dist : DistributionSpec
    loss : LossModel
    config : ISConfig
    method : {"is", "naive"}
        "is" stretches the samples outward with factor
        extrapolation_factor(beta, h) and reweights them; "naive" evaluates
        the loss on the raw samples with unit weights and refuses to run
        when n * beta < 5 (the empirical tail would hold fewer than five
        samples, giving meaningless quantiles).
    r_override : float, optional
        Forces the stretch factor (test hook; r_override=1.0 makes the
        importance path reproduce the naive path exactly, seed for seed).

    Raises
    ------
    FeasibilityError
        Naive method at infeasible n * beta.
    TailMassError
        The weighted sample carries too little mass for the level beta.
    """
    if method not in ("is", "naive"):
        raise DomainError(f"method must be 'is' or 'naive', got {method!r}")
    if not isinstance(loss, LossModel):
        raise DomainError("loss must be a LossModel")
    h = config.h
    if method == "naive":
        if config.n * config.beta < NAIVE_MIN_TAIL_COUNT:
            raise FeasibilityError(
                f"naive estimation infeasible: n*beta = {config.n * config.beta:.4g} < "
                f"{NAIVE_MIN_TAIL_COUNT:g}; increase n or use the importance method"
            )
        h = None
        losses = loss(sample_inputs(config.n, dist, config.seed))
        logw = np.zeros(config.n)
    else:
        if r_override is None:
            if h is None:
                raise DomainError("the importance method needs h (or an explicit r_override)")
            r = extrapolation_factor(config.beta, h)
        else:
            r = r_override
        params = TransformParams(r=r, rho=loss.rho)
        X = sample_inputs(config.n, dist, config.seed)
        Z = extrapolate(X, params)
        logw = log_likelihood_ratio(X, dist, params)
        losses = loss(Z)
    pair = (np.asarray(losses, dtype=float), logw)
    v = value_at_risk(pair, config.beta)
    c = cvar(pair, config.beta, v)
    se = cvar_standard_error(pair, config.beta, v)
    return EstimateReport(
        method=method, beta=config.beta, h=h, n=config.n, seed=config.seed,
        var_hat=v, cvar_hat=c, cvar_se=se,
    )
