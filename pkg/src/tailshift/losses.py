"""Loss functions treated as black boxes by the estimators.

Built-ins: the 7-activity project completion time, the plain portfolio sum,
and a one-hidden-layer ReLU network.  Arbitrary callables can be wrapped
with an explicit scaling exponent rho.  All built-ins accept a vector (d,)
or a batch (n, d) and return a float or an (n,) array.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, WeightsDimensionError, WeightsFormatError

__all__ = [
    "PERT_DIM",
    "pert_completion_time",
    "linear_loss",
    "relu_net_loss",
    "ReluNetParams",
    "load_relu_params",
    "save_relu_params",
    "synthetic_relu_params",
    "LossModel",
]

PERT_DIM = 7


def _check_dim(x, dim, what):
    x = np.asarray(x, dtype=float)
    if x.ndim not in (1, 2) or x.shape[-1] != dim:
        raise DomainError(f"{what} expects vectors of {dim} components, got shape {x.shape}")
    return x


def pert_completion_time(x):
    """Longest path through the fixed 7-activity precedence network.

    x1 -> {x2, x3, x4} -> {x5 (after x2 or x3), x6 (after x3 or x4)} -> x7,
    so the completion time is
    x1 + x7 + max(x5 + max(x2, x3), x6 + max(x3, x4)).
    """
    x = _check_dim(x, PERT_DIM, "pert_completion_time")
    upper = x[..., 4] + np.maximum(x[..., 1], x[..., 2])
    lower = x[..., 5] + np.maximum(x[..., 2], x[..., 3])
    out = x[..., 0] + x[..., 6] + np.maximum(upper, lower)
    return float(out) if out.ndim == 0 else out


def linear_loss(x):
    """Sum of all components."""
    x = np.asarray(x, dtype=float)
    if x.ndim not in (1, 2) or x.shape[-1] == 0:
        raise DomainError(f"linear_loss expects a nonempty vector or batch, got shape {x.shape}")
    out = np.sum(x, axis=-1)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class ReluNetParams:
    """Weights of a one-hidden-layer ReLU network w2' relu(W1 x + b1) + b2.

    Equality is identity; compare weight arrays directly when needed.
    """

    W1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float = 0.0

    def __post_init__(self):
        W1 = np.asarray(self.W1, dtype=float)
        b1 = np.asarray(self.b1, dtype=float)
        w2 = np.asarray(self.w2, dtype=float)
        if W1.ndim != 2:
            raise WeightsDimensionError(f"W1 must be 2-d (hidden, d), got shape {W1.shape}")
        hidden = W1.shape[0]
        if b1.shape != (hidden,):
            raise WeightsDimensionError(f"b1 must have shape ({hidden},), got {b1.shape}")
        if w2.shape != (hidden,):
            raise WeightsDimensionError(f"w2 must have shape ({hidden},), got {w2.shape}")
        if not (np.all(np.isfinite(W1)) and np.all(np.isfinite(b1)) and np.all(np.isfinite(w2))
                and math.isfinite(float(self.b2))):
            raise WeightsFormatError("network weights must be finite numbers")
        for arr in (W1, b1, w2):
            arr.setflags(write=False)
        object.__setattr__(self, "W1", W1)
        object.__setattr__(self, "b1", b1)
        object.__setattr__(self, "w2", w2)
        object.__setattr__(self, "b2", float(self.b2))

    @property
    def dim(self):
        return self.W1.shape[1]

    @property
    def hidden(self):
        return self.W1.shape[0]


def relu_net_loss(x, params):
    """Evaluate w2' relu(W1 x + b1) + b2 at x (vector or batch)."""
    x = _check_dim(x, params.dim, "relu_net_loss")
    out = np.maximum(x @ params.W1.T + params.b1, 0.0) @ params.w2 + params.b2
    return float(out) if out.ndim == 0 else out


def load_relu_params(path):
    """Read network weights from a JSON file.

    Layout: {"dims": {"d": ..., "hidden": ...}, "W1": row-major flat list
    (nested rows also accepted), "b1": list, "w2": list, "b2": number}.
    Raises FileNotFoundError for a missing file, WeightsFormatError for
    malformed content and WeightsDimensionError for inconsistent shapes.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise WeightsFormatError(f"weights file {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise WeightsFormatError(f"weights file {path} must hold a JSON object")
    missing = [k for k in ("dims", "W1", "b1", "w2", "b2") if k not in doc]
    if missing:
        raise WeightsFormatError(f"weights file {path} is missing keys: {', '.join(missing)}")
    dims = doc["dims"]
    if not (isinstance(dims, dict) and "d" in dims and "hidden" in dims):
        raise WeightsFormatError(f"weights file {path}: 'dims' must hold 'd' and 'hidden'")
    try:
        d, hidden = int(dims["d"]), int(dims["hidden"])
        W1 = np.asarray(doc["W1"], dtype=float)
        b1 = np.asarray(doc["b1"], dtype=float)
        w2 = np.asarray(doc["w2"], dtype=float)
        b2 = float(doc["b2"])
    except (TypeError, ValueError) as exc:
        raise WeightsFormatError(f"weights file {path} holds non-numeric entries: {exc}") from None
    if W1.ndim == 1:
        if W1.size != hidden * d:
            raise WeightsDimensionError(
                f"weights file {path}: W1 has {W1.size} entries, expected hidden*d = {hidden * d}"
            )
        W1 = W1.reshape(hidden, d)
    elif W1.shape != (hidden, d):
        raise WeightsDimensionError(
            f"weights file {path}: W1 has shape {W1.shape}, expected ({hidden}, {d})"
        )
    return ReluNetParams(W1=W1, b1=b1, w2=w2, b2=b2)


def save_relu_params(params, path):
    """Write network weights as JSON (floats round-trip exactly)."""
    doc = {
        "dims": {"d": params.dim, "hidden": params.hidden},
        "W1": [float(v) for v in params.W1.ravel()],
        "b1": [float(v) for v in params.b1],
        "w2": [float(v) for v in params.w2],
        "b2": params.b2,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def synthetic_relu_params(dim, hidden, seed, nonnegative="output"):
    """Seeded random network for experiments.

    nonnegative="output" keeps only the output layer w2 nonnegative (the
    loss can then decrease in some directions); "all" makes every weight
    nonnegative, which gives a loss monotone in each input.
    """
    if nonnegative not in ("output", "all"):
        raise ValueError(f"nonnegative must be 'output' or 'all', got {nonnegative!r}")
    rng = np.random.default_rng(seed)
    W1 = rng.standard_normal((hidden, dim)) / math.sqrt(dim)
    if nonnegative == "all":
        W1 = np.abs(W1)
    b1 = 0.1 * rng.standard_normal(hidden)
    w2 = np.abs(rng.standard_normal(hidden)) / math.sqrt(hidden)
    return ReluNetParams(W1=W1, b1=b1, w2=w2, b2=0.0)


@dataclass(frozen=True)
class LossModel:
    """A loss with the metadata the sampler needs.

    kind is one of "pert7", "linear", "relu_net", "external"; rho is the
    scaling exponent handed to the stretch map (1 for losses that grow
    linearly along rays, which covers all built-ins).
    """

    kind: str
    rho: float = 1.0
    relu: ReluNetParams | None = None
    func: object = None

    def __post_init__(self):
        if self.kind not in ("pert7", "linear", "relu_net", "external"):
            raise DomainError(f"unknown loss kind {self.kind!r}")
        if not (isinstance(self.rho, (int, float)) and math.isfinite(self.rho) and self.rho > 0):
            raise DomainError(f"rho must be positive and finite, got {self.rho!r}")
        if self.kind == "relu_net" and not isinstance(self.relu, ReluNetParams):
            raise DomainError("relu_net losses need ReluNetParams")
        if self.kind == "external" and not callable(self.func):
            raise DomainError("external losses need a callable")
        object.__setattr__(self, "rho", float(self.rho))

    @classmethod
    def pert7(cls, rho=1.0):
        return cls(kind="pert7", rho=rho)

    @classmethod
    def linear(cls, rho=1.0):
        return cls(kind="linear", rho=rho)

    @classmethod
    def relu_net(cls, params, rho=1.0):
        return cls(kind="relu_net", rho=rho, relu=params)

    @classmethod
    def external(cls, func, rho):
        """Register a deterministic vector-to-scalar callable with its rho."""
        return cls(kind="external", rho=rho, func=func)

    def __call__(self, x):
        if self.kind == "pert7":
            return pert_completion_time(x)
        if self.kind == "linear":
            return linear_loss(x)
        if self.kind == "relu_net":
            return relu_net_loss(x, self.relu)
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return float(self.func(x))
        return np.array([float(self.func(row)) for row in x])
