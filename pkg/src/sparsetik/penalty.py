"""Penalty functionals and the distances used in the convergence-rate
estimates: the Bregman distance ``R`` of the weighted 1-norm, the Taylor
remainder ``T`` of the quadratic fidelity, and the lower bound
``R + T >= lambda * ||u - u_plus||_1^2`` on a 1-norm ball.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sparsetik.errors import FBIViolationError, PreconditionError
from sparsetik.operators import fbi_check, restricted_smallest_singular_value
from sparsetik.seqspace import (
    WeightSequence,
    as_sequence,
    as_weights,
    check_same_length,
    support_count,
    weighted_p_norm_power,
)

INEQ_SLACK = 1e-12


@dataclass(frozen=True)
class WeightedPenalty:
    p: float
    w: WeightSequence

    def __post_init__(self):
        if not 0 <= self.p <= 2:
            raise PreconditionError(f"p must lie in [0, 2], got {self.p}")
        if not isinstance(self.w, WeightSequence):
            object.__setattr__(self, "w", WeightSequence(np.asarray(self.w, dtype=float)))

    @classmethod
    def uniform(cls, p: float, n: int, value: float = 1.0):
        return cls(p, WeightSequence.uniform(n, value))

    def __len__(self):
        return len(self.w)

    def value(self, u) -> float:
        if self.p == 0:
            return support_count(u, self.w)
        return weighted_p_norm_power(u, self.w, self.p)


@dataclass(frozen=True)
class BregmanTaylorConstants:
    c_tilde: float
    lam: float
    M: float
    K_norm: float
    w0: float
    support: tuple

    @property
    def lambda_(self):
        return self.lam


def kappa(p: float, C: float, L: float) -> float:
    """Constant of the local strong-convexity estimate for |t|^p, 1 < p <= 2."""
    if not 1 < p <= 2:
        raise PreconditionError(f"kappa needs 1 < p <= 2, got {p}")
    if not (C > 0 and L > 0):
        raise PreconditionError("C and L must be positive")
    return p * (p - 1) / (2 * (C + L) ** (2 - p))


def p_inequality_slack(p, C, L, s, t):
    """|t|^p - |s|^p - p sgn(s)|s|^(p-1)(t-s) - kappa |t-s|^2 (vectorized)."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(s) > C) or np.any(np.abs(t - s) > L):
        raise PreconditionError("need |s| <= C and |t - s| <= L")
    k = kappa(p, C, L)
    lin = p * np.sign(s) * np.abs(s) ** (p - 1) * (t - s)
    return np.abs(t) ** p - np.abs(s) ** p - lin - k * (t - s) ** 2


def check_p_inequality(p, C, L, s, t) -> bool:
    return bool(np.all(p_inequality_slack(p, C, L, s, t) >= -INEQ_SLACK))


def bregman_R(pen: WeightedPenalty, u, u_plus) -> float:
    """Bregman distance of the weighted 1-norm at ``u_plus`` with the
    subgradient ``w * sgn(u_plus)``."""
    if pen.p != 1:
        raise PreconditionError("bregman_R is defined for p = 1")
    u = as_sequence(u)
    up = as_sequence(u_plus, "u_plus")
    check_same_length(u, up)
    w = as_weights(pen.w, u.shape[0]).values
    return float(np.sum(w * np.abs(u)) - np.sum(w * np.abs(up)) - np.sum(w * np.sign(up) * (u - up)))


def bregman_distance(pen: WeightedPenalty, u, u_plus) -> float:
    """D(u, u_plus) = J(u) - J(u_plus) - <xi, u - u_plus> with xi from
    :func:`subgradient_element` (canonical sgn(0) = 0 at p = 1)."""
    u = as_sequence(u)
    up = as_sequence(u_plus, "u_plus")
    check_same_length(u, up)
    xi = subgradient_element(pen, up)
    return pen.value(u) - pen.value(up) - float(xi @ (u - up))


def taylor_T(K, u, u_plus) -> float:
    u = as_sequence(u)
    up = as_sequence(u_plus, "u_plus")
    check_same_length(u, up)
    r = K.apply(u - up)
    return float(r @ r)


def subgradient_element(pen: WeightedPenalty, u) -> np.ndarray:
    """w p sgn(u) |u|^(p-1), with the selection 0 at zeros when p = 1."""
    if not 1 <= pen.p <= 2:
        raise PreconditionError("subgradient_element needs 1 <= p <= 2")
    u = as_sequence(u)
    w = as_weights(pen.w, u.shape[0]).values
    if pen.p == 1:
        return w * np.sign(u)
    return w * pen.p * np.sign(u) * np.abs(u) ** (pen.p - 1)


def bregman_taylor_lambda(K, u_plus, w, M: float) -> BregmanTaylorConstants:
    """Certified constant in ``R(u) + T(u) >= lambda ||u - u_plus||_1^2``,
    valid for ``||u - u_plus||_1 <= M``.

    The restricted injectivity constant on the support I is converted from
    the 2-norm to the 1-norm with the factor |I|.
    """
    up = as_sequence(u_plus, "u_plus")
    ws = as_weights(w, up.shape[0])
    if not M > 0:
        raise PreconditionError("M must be positive")
    support = np.flatnonzero(up)
    if support.size == 0:
        raise PreconditionError("u_plus has empty support")
    if not fbi_check(K, support):
        raise FBIViolationError("operator is not injective on the support of u_plus")
    smin = restricted_smallest_singular_value(K, support)
    c_tilde = smin**2 / support.size
    knorm = K.norm()
    w0 = ws.w0
    lam = 1.0 / max(2.0 / c_tilde, (M / w0) * (2 * knorm**2 / c_tilde + 1))
    return BregmanTaylorConstants(c_tilde=c_tilde, lam=lam, M=float(M), K_norm=knorm, w0=w0,
                                  support=tuple(int(i) for i in support))
