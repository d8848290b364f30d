"""Outward stretch of samples toward the tail, with its change of measure.

The map sends x to x * r**e(x) componentwise, where the exponents

    e_i(x) = log(1 + |x_i|) / (rho * max_j log(1 + |x_j|))

lie in [0, 1/rho].  The largest component is stretched by the full factor
r**(1/rho) and smaller ones by less, so a single run reaches far out into
the tail without collapsing the sample cloud onto one ray.  rho compensates
losses that grow like a power: with rho = 1 the stretched losses grow
roughly like r itself.

``log_likelihood_ratio`` returns the log importance weight that makes
averages over stretched samples unbiased for the original distribution:
log density at the image, minus log density at the source, plus the log
Jacobian determinant of the map.  Everything is computed in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import joint_log_density
from .errors import DomainError

__all__ = [
    "TransformParams",
    "extrapolation_factor",
    "stretch_exponents",
    "extrapolate",
    "log_jacobian",
    "log_likelihood_ratio",
]


def extrapolation_factor(beta, h):
    """Stretch factor r = h * log log(1/beta) for tail level beta.

    Requires beta < 1/e (otherwise the iterated logarithm is not positive)
    and a resulting r > 1 (otherwise nothing is pushed outward).
    """
    if not (isinstance(beta, (int, float)) and math.isfinite(beta) and 0.0 < beta < 1.0):
        raise DomainError(f"beta must lie in (0, 1), got {beta!r}")
    if beta >= 1.0 / math.e:
        raise DomainError(
            f"extrapolation undefined for beta >= 1/e (got beta = {beta:g}); "
            "log log(1/beta) is not positive there"
        )
    r = h * math.log(math.log(1.0 / beta))
    if r <= 1.0:
        raise DomainError(
            f"no outward extrapolation: r = h*log log(1/beta) = {r:.6g} <= 1; "
            "increase h or decrease beta"
        )
    return r


@dataclass(frozen=True)
class TransformParams:
    """Stretch factor r >= 1 and loss scaling exponent rho > 0.

    r = 1 is the identity map (useful in tests: the importance path then
    reproduces plain sampling exactly); r < 1 would pull samples inward
    and is rejected.
    """

    r: float
    rho: float = 1.0

    def __post_init__(self):
        if not (isinstance(self.r, (int, float)) and math.isfinite(self.r) and self.r >= 1.0):
            raise DomainError(f"r must be finite and >= 1, got {self.r!r}")
        if not (isinstance(self.rho, (int, float)) and math.isfinite(self.rho) and self.rho > 0.0):
            raise DomainError(f"rho must be positive and finite, got {self.rho!r}")
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "rho", float(self.rho))


def _log1p_abs(x):
    x = np.asarray(x, dtype=float)
    if x.ndim not in (1, 2) or x.shape[-1] == 0:
        raise DomainError(f"x must be a nonempty vector or batch of vectors, got shape {np.shape(x)}")
    if np.any(~np.isfinite(x)):
        raise DomainError("x components must be finite")
    logs = np.log1p(np.abs(x))
    M = np.max(logs, axis=-1, keepdims=True)
    if np.any(M == 0.0):
        raise DomainError("x must have at least one nonzero component")
    return x, logs, M


def stretch_exponents(x, rho):
    """Componentwise stretch exponents e(x) = log1p(|x|) / (rho * max log1p(|x|)).

    The maximum over i of rho * e_i(x) is 1: the dominant component always
    gets the full stretch.  Ties in the maximum take the smallest index,
    which does not change the value.  Accepts shape (d,) or (n, d).
    """
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho!r}")
    _, logs, M = _log1p_abs(x)
    return (logs / M) / rho


def extrapolate(x, params):
    """Apply the stretch: x * r**e(x) componentwise."""
    e = stretch_exponents(x, params.rho)
    return np.asarray(x, dtype=float) * params.r ** e


def log_jacobian(x, params):
    """Log absolute Jacobian determinant of the stretch at x.

    The derivative matrix is diagonal except in the column of the dominant
    component, and its determinant reduces to

        r**(sum_i e_i(x)) * prod_i d_i / max_i d_i,
        d_i = 1 + (log(r) / (rho * max_j log1p(|x_j|))) * |x_i| / (1 + |x_i|),

    where the dominant component is exactly the argmax of d_i.  All factors
    are >= 1 for r >= 1, so the product is accumulated with log1p.  Returns
    a float for shape (d,), an (n,) array for shape (n, d); exactly 0.0 when
    r = 1 and exactly log(r) in one dimension with rho = 1.
    """
    x, logs, M = _log1p_abs(x)
    logr = math.log(params.r)
    c = logr / (params.rho * M)
    g = np.abs(x) / (1.0 + np.abs(x))
    log_diag = np.log1p(c * g)
    esum = np.sum(logs, axis=-1) / (params.rho * M[..., 0])
    out = np.sum(log_diag, axis=-1) + esum * logr - np.max(log_diag, axis=-1)
    return float(out) if out.ndim == 0 else out


def log_likelihood_ratio(x, dist, params):
    """Log importance weight of the stretched sample rooted at x.

    log f(extrapolate(x)) - log f(x) + log_jacobian(x), with f the joint
    input density.  Exactly 0.0 for r = 1.  Accepts (d,) or (n, d).
    """
    z = extrapolate(x, params)
    return joint_log_density(z, dist) - joint_log_density(x, dist) + log_jacobian(x, params)
