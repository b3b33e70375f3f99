"""Finite truncations of sequence space.

Sequences are plain 1-d float arrays of a fixed length N. Weights are
wrapped in :class:`WeightSequence` so that the lower bound ``w0`` travels
with them.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sparsetik.errors import DimensionError, PreconditionError


def as_sequence(u, name="u") -> np.ndarray:
    """Validate and convert to a finite 1-d float array of length >= 1."""
    arr = np.asarray(u, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1 or arr.size < 1:
        raise DimensionError(f"{name} must be a non-empty 1-d sequence, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise PreconditionError(f"{name} has non-finite entries")
    return arr


def check_same_length(a: np.ndarray, b: np.ndarray, what="sequences"):
    if a.shape[0] != b.shape[0]:
        raise DimensionError(f"length mismatch between {what}: {a.shape[0]} != {b.shape[0]}")


@dataclass(frozen=True)
class WeightSequence:
    values: np.ndarray

    def __post_init__(self):
        vals = as_sequence(self.values, "weights")
        if np.any(vals <= 0):
            raise PreconditionError("weights must be strictly positive")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def uniform(cls, n: int, value: float = 1.0) -> "WeightSequence":
        return cls(np.full(int(n), float(value)))

    @property
    def w0(self) -> float:
        return float(self.values.min())

    def __len__(self):
        return self.values.shape[0]


def as_weights(w, n: int) -> WeightSequence:
    """Accept a WeightSequence, a scalar (uniform weight) or an array."""
    if isinstance(w, WeightSequence):
        ws = w
    elif np.ndim(w) == 0:
        ws = WeightSequence.uniform(n, float(w))
    else:
        ws = WeightSequence(np.asarray(w, dtype=float))
    if len(ws) != n:
        raise DimensionError(f"weights have length {len(ws)}, expected {n}")
    return ws


def weighted_p_norm_power(u, w, p: float) -> float:
    """Return sum_k w_k |u_k|^p (the p-th power of the weighted norm)."""
    u = as_sequence(u)
    w = as_weights(w, u.shape[0])
    if not p > 0:
        raise PreconditionError(f"p must be positive, got {p}")
    return float(np.sum(w.values * np.abs(u) ** p))


def support_count(u, w) -> float:
    """Weighted number of nonzero entries. Compares against 0 exactly."""
    u = as_sequence(u)
    w = as_weights(w, u.shape[0])
    return float(np.sum(w.values[u != 0]))


def multivalued_sign_contains(x: float, s: float) -> bool:
    """True iff s lies in Sgn(x), the set-valued sign ([-1, 1] at zero)."""
    if x > 0:
        return s == 1
    if x < 0:
        return s == -1
    return -1 <= s <= 1
