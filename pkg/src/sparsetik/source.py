"""Source conditions ``w sgn(u+)|u+|^(p-1) = K* theta`` and the constant rho."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sparsetik.errors import PreconditionError
from sparsetik.operators import DiagonalOperator
from sparsetik.penalty import WeightedPenalty
from sparsetik.seqspace import as_sequence, as_weights

HOLD_RTOL = 1e-8


@dataclass(frozen=True)
class SourceCertificate:
    theta: np.ndarray
    residual: float
    rho: float
    holds: bool


def source_element(pen: WeightedPenalty, u_plus) -> np.ndarray:
    up = as_sequence(u_plus, "u_plus")
    w = as_weights(pen.w, up.shape[0]).values
    if pen.p == 1:
        return w * np.sign(up)
    return w * np.sign(up) * np.abs(up) ** (pen.p - 1)


def rho_from_theta(theta, p: float) -> float:
    nrm = float(np.linalg.norm(theta))
    return nrm / 2 if p == 1 else nrm * p / 2


def verify_source(K, u_plus, pen: WeightedPenalty) -> SourceCertificate:
    """Least-squares fit of ``K* theta`` to the source element.

    ``residual`` is the sup-norm misfit; the condition holds when it is at
    most ``1e-8 * (1 + ||xi||_inf)``.
    """
    if not 1 <= pen.p <= 2:
        raise PreconditionError("source condition is defined for 1 <= p <= 2")
    xi = source_element(pen, u_plus)
    if isinstance(K, DiagonalOperator):
        s = K.singular_values
        theta = np.zeros_like(xi)
        pos = s > 0
        theta[pos] = xi[pos] / s[pos]
    else:
        # K* theta = xi  <=>  A^T theta = xi; lstsq uses an SVD
        theta = np.linalg.lstsq(K.matrix.T, xi, rcond=None)[0]
    misfit = K.adjoint(theta) - xi
    residual = float(np.max(np.abs(misfit)))
    holds = residual <= HOLD_RTOL * (1 + float(np.max(np.abs(xi))))
    return SourceCertificate(theta=theta, residual=residual, rho=rho_from_theta(theta, pen.p), holds=holds)


def construct_sourced_instance(K: DiagonalOperator, support, signs, magnitudes, pen: WeightedPenalty):
    """Build ``u_plus`` with the given support, signs and magnitudes, plus
    the exact source element ``theta`` for a diagonal operator."""
    s = K.singular_values
    support = np.asarray(list(support), dtype=int)
    signs = np.asarray(list(signs), dtype=float)
    magnitudes = np.asarray(list(magnitudes), dtype=float)
    if not (support.shape == signs.shape == magnitudes.shape):
        raise PreconditionError("support, signs and magnitudes must have equal length")
    if support.size and (support.min() < 0 or support.max() >= s.shape[0]):
        raise PreconditionError("support index out of range")
    if np.any(np.abs(signs) != 1):
        raise PreconditionError("signs must be +1 or -1")
    if np.any(magnitudes <= 0):
        raise PreconditionError("magnitudes must be positive")
    if support.size and np.any(s[support] == 0):
        raise PreconditionError("support touches a zero singular value")
    u_plus = np.zeros(s.shape[0])
    u_plus[support] = signs * magnitudes
    xi = source_element(pen, u_plus)
    theta = np.zeros_like(xi)
    theta[support] = xi[support] / s[support]
    residual = float(np.max(np.abs(K.adjoint(theta) - xi)))
    cert = SourceCertificate(theta=theta, residual=residual, rho=rho_from_theta(theta, pen.p),
                             holds=residual <= HOLD_RTOL * (1 + float(np.max(np.abs(xi)))))
    return u_plus, cert


def lp_membership_diagnostic(u_plus, pen: WeightedPenalty, q: float, v) -> float:
    """Partial sum ``sum v_k w_k^q |u+_k|^(q(p-1))`` (informational)."""
    if not q > 1:
        raise PreconditionError("q must exceed 1")
    if not 1 < pen.p <= 2:
        raise PreconditionError("diagnostic needs 1 < p <= 2")
    up = as_sequence(u_plus, "u_plus")
    w = as_weights(pen.w, up.shape[0]).values
    v = as_weights(v, up.shape[0]).values
    nz = up != 0
    return float(np.sum(v[nz] * w[nz] ** q * np.abs(up[nz]) ** (q * (pen.p - 1))))
