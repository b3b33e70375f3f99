"""Minimizers of ``Psi(u) = ||K u - g||^2 + alpha * sum_k w_k |u_k|^p``.

``solve_iterative`` is a proximal-gradient (iterated thresholding) scheme
for 1 <= p <= 2 and any operator. ``solve_diagonal`` is exact for diagonal
operators and every 0 <= p <= 2.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from sparsetik.errors import (
    DimensionError,
    DivergenceError,
    PreconditionError,
    UnsupportedCaseError,
)
from sparsetik.operators import DiagonalOperator
from sparsetik.penalty import WeightedPenalty
from sparsetik.seqspace import as_sequence
from sparsetik.thresholding import threshold_array

logger = logging.getLogger(__name__)

STEP_SAFETY = 0.9
DESCENT_SLACK = 1e-12


@dataclass(frozen=True)
class RegularizedProblem:
    operator: object
    data: np.ndarray
    alpha: float
    penalty: WeightedPenalty
    delta: float = 0.0

    def __post_init__(self):
        g = as_sequence(self.data, "data")
        object.__setattr__(self, "data", g)
        M, N = self.operator.shape
        if g.shape[0] != M:
            raise DimensionError(f"data has length {g.shape[0]}, operator maps into R^{M}")
        if len(self.penalty) != N:
            raise DimensionError(f"penalty weights have length {len(self.penalty)}, expected {N}")
        if not (self.alpha > 0 and np.isfinite(self.alpha)):
            raise PreconditionError(f"alpha must be positive, got {self.alpha}")
        if self.delta < 0:
            raise PreconditionError("delta must be non-negative")

    @property
    def p(self):
        return self.penalty.p

    @property
    def weights(self):
        return self.penalty.w.values

    def residual(self, u):
        return self.operator.apply(u) - self.data

    def objective(self, u) -> float:
        r = self.residual(u)
        return float(r @ r + self.alpha * self.penalty.value(u))


@dataclass
class SolveResult:
    u: np.ndarray
    objective: float
    iterations: int
    certificate_residual: float
    converged: bool
    history: list = field(default_factory=list, repr=False)


def optimality_certificate(prob: RegularizedProblem, u) -> float:
    """Sup-norm violation of ``-2 K*(Ku - g) in alpha w p Sgn(u)|u|^(p-1)``."""
    p = prob.p
    if p < 1:
        raise PreconditionError("optimality certificate needs p >= 1")
    u = as_sequence(u)
    lhs = -2 * prob.operator.adjoint(prob.residual(u))
    aw = prob.alpha * prob.weights
    if p > 1:
        rhs = aw * p * np.sign(u) * np.abs(u) ** (p - 1)
        return float(np.max(np.abs(lhs - rhs)))
    at_zero = u == 0
    viol = np.where(
        at_zero,
        np.maximum(np.abs(lhs) - aw, 0.0),
        np.abs(lhs - aw * np.sign(u)),
    )
    return float(viol.max())


def solve_iterative(prob: RegularizedProblem, u0=None, max_iter: int = 100_000,
                    tol: float = 1e-10, keep_history: bool = False) -> SolveResult:
    """Iterated thresholding with step ``0.9 / (2 ||K||^2)``.

    Converged means the last step moved less than ``tol`` in the 2-norm and
    the optimality certificate is at most ``10 * tol``.
    """
    p = prob.p
    if not 1 <= p <= 2:
        raise UnsupportedCaseError(
            f"iterative solver needs 1 <= p <= 2 (got p={p}); for p < 1 a minimizer may not exist")
    if not tol > 0:
        raise PreconditionError("tol must be positive")
    K = prob.operator
    N = K.shape[1]
    u = np.zeros(N) if u0 is None else as_sequence(u0, "u0").copy()
    if u.shape[0] != N:
        raise DimensionError("u0 has the wrong length")
    step = STEP_SAFETY / (2 * K.norm() ** 2)
    thresh = 2 * step * prob.alpha * prob.weights

    psi = prob.objective(u)
    history = [psi] if keep_history else []
    cert = np.inf
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        z = u - step * 2 * K.adjoint(prob.residual(u))
        u_new = threshold_array(p, thresh, z)
        if not np.all(np.isfinite(u_new)):
            raise DivergenceError(f"non-finite iterate at iteration {it}")
        psi_new = prob.objective(u_new)
        if psi_new > psi + DESCENT_SLACK * max(1.0, abs(psi)):
            raise DivergenceError(
                f"objective increased at iteration {it}: {psi!r} -> {psi_new!r}")
        change = float(np.linalg.norm(u_new - u))
        u, psi = u_new, psi_new
        if keep_history:
            history.append(psi)
        if change <= tol:
            cert = optimality_certificate(prob, u)
            if cert <= 10 * tol:
                converged = True
                break
    else:
        cert = optimality_certificate(prob, u)
    if not converged:
        logger.warning("solve_iterative stopped after %d iterations (certificate %.3g)", it, cert)
    return SolveResult(u=u, objective=psi, iterations=it, certificate_residual=cert,
                       converged=converged, history=history)


def solve_diagonal(prob: RegularizedProblem) -> SolveResult:
    """Exact componentwise minimizer for a diagonal operator.

    With y = sigma_k u_k each component decouples into a scalar thresholding
    problem with parameter ``alpha w_k / sigma_k^p``.
    """
    K = prob.operator
    if not isinstance(K, DiagonalOperator):
        raise UnsupportedCaseError("solve_diagonal needs a DiagonalOperator")
    s = K.singular_values
    g = prob.data
    pos = s > 0
    u = np.zeros_like(g)
    eff = prob.alpha * prob.weights[pos] / s[pos] ** prob.p
    u[pos] = threshold_array(prob.p, eff, g[pos]) / s[pos]
    cert = optimality_certificate(prob, u) if prob.p >= 1 else float("nan")
    return SolveResult(u=u, objective=prob.objective(u), iterations=0,
                       certificate_residual=cert, converged=True)


@dataclass
class SupportReport:
    support: list
    size: int
    violations: list


def minimizer_support_check(result: SolveResult, prob: RegularizedProblem,
                            tol: float = 1e-10) -> SupportReport:
    """Support of a computed minimizer; for p = 1 every support index must
    have ``|2 K*(Ku - g)|_k = alpha w_k`` (indices failing by more than
    ``10 * tol`` are listed as violations)."""
    u = result.u
    support = [int(i) for i in np.flatnonzero(u)]
    violations = []
    if prob.p == 1 and support:
        grad = np.abs(2 * prob.operator.adjoint(prob.residual(u)))
        aw = prob.alpha * prob.weights
        idx = np.asarray(support)
        bad = np.abs(grad[idx] - aw[idx]) > 10 * tol
        violations = [int(i) for i in idx[bad]]
    return SupportReport(support=support, size=len(support), violations=violations)
