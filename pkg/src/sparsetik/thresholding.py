r"""Generalized thresholding :math:`H^p_\alpha(x) = \arg\min_y (y-x)^2 + \alpha|y|^p`.

Closed forms are used for p = 0 (hard threshold) and p = 1 (soft
threshold). For 1 < p <= 2 the result is the inverse of

    G(y) = y + (alpha p / 2) sgn(y) |y|^(p-1),

and for 0 < p < 1 it is either 0 or the largest-magnitude preimage under
G, depending on which side of the jump point ``alpha_eff`` the input lies.
Inverting G is done by a vectorized safeguarded Newton iteration with
bisection fallback.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sparsetik.errors import MultivaluedPointError, PreconditionError

ROOT_RTOL = 1e-12
_MAX_ROOT_ITER = 200
_TINY = float(np.nextafter(0.0, 1.0))


@dataclass(frozen=True)
class ThresholdSpec:
    p: float
    alpha: float

    def __post_init__(self):
        if not 0 <= self.p <= 2:
            raise PreconditionError(f"p must lie in [0, 2], got {self.p}")
        if not self.alpha > 0 or not np.isfinite(self.alpha):
            raise PreconditionError(f"alpha must be positive and finite, got {self.alpha}")


def g_map(spec: ThresholdSpec, y: float) -> float:
    p, alpha = spec.p, spec.alpha
    if p <= 0:
        raise PreconditionError("g_map needs p > 0")
    if p < 1 and y == 0:
        raise MultivaluedPointError("G is multivalued at 0 for p < 1")
    return float(y + 0.5 * alpha * p * np.sign(y) * abs(y) ** (p - 1))


def effective_threshold(spec: ThresholdSpec) -> float:
    """Jump location of the thresholding map for p < 1."""
    p, alpha = spec.p, spec.alpha
    if p >= 1:
        raise PreconditionError("effective threshold is defined only for p < 1")
    if p == 0:
        return float(np.sqrt(alpha))
    return float((2 - p) / (2 - 2 * p) * (alpha * (1 - p)) ** (1 / (2 - p)))


def _critical_point(p, alpha):
    """Minimizer of G on (0, inf) when 0 < p < 1."""
    return (alpha * p * (1 - p) / 2) ** (1 / (2 - p))


def _invert_g(p, c, target, lo, hi):
    """Solve y + c y^(p-1) = target on [lo, hi] (all positive arrays).

    The bracket must satisfy f(lo) <= 0 <= f(hi) with G monotone on it.
    Iteration starts at ``hi``. Fallback steps bisect geometrically while
    the bracket spans more than a factor of 4, since roots can be many
    orders of magnitude below the input when p is close to 1.
    """
    target = np.asarray(target, dtype=float)
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    tol = ROOT_RTOL * (1 + target)
    y = hi.copy()
    f = y + c * y ** (p - 1) - target
    active = np.abs(f) > tol
    for _ in range(_MAX_ROOT_ITER):
        if not active.any():
            break
        ya, fa, la, ha = y[active], f[active], lo[active], hi[active]
        ca = c[active]
        neg = fa < 0
        la = np.where(neg, ya, la)
        ha = np.where(neg, ha, ya)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            d = 1 + ca * (p - 1) * ya ** (p - 2)
            yn = ya - fa / d
            mid = np.where(ha > 4 * la, np.exp(0.5 * (np.log(la) + np.log(ha))), 0.5 * (la + ha))
        bad = ~np.isfinite(yn) | (yn <= la) | (yn >= ha)
        yn = np.where(bad, mid, yn)
        fn = yn + ca * yn ** (p - 1) - target[active]
        y[active], f[active], lo[active], hi[active] = yn, fn, la, ha
        width = hi - lo
        active &= (np.abs(f) > tol) & (width > 4 * np.finfo(float).eps * hi)
    return y


def threshold_array(p: float, alpha, x) -> np.ndarray:
    """Vectorized thresholding with per-entry ``alpha`` (broadcast against ``x``)."""
    if not 0 <= p <= 2:
        raise PreconditionError(f"p must lie in [0, 2], got {p}")
    x = np.asarray(x, dtype=float)
    alpha = np.broadcast_to(np.asarray(alpha, dtype=float), x.shape)
    if np.any(alpha <= 0):
        raise PreconditionError("alpha must be positive")
    ax = np.abs(x)
    out = np.zeros_like(x)
    if p == 0:
        keep = ax > np.sqrt(alpha)
        out[keep] = x[keep]
        return out
    if p == 1:
        return np.sign(x) * np.maximum(ax - alpha / 2, 0.0)
    c = 0.5 * alpha * p
    if p > 1:
        nz = ax > 0
        # roots below the smallest subnormal are returned as that number
        lo = np.full(int(nz.sum()), _TINY)
        y = _invert_g(p, c[nz], ax[nz], lo, ax[nz])
    else:
        a_eff = (2 - p) / (2 - 2 * p) * (alpha * (1 - p)) ** (1 / (2 - p))
        nz = ax > a_eff
        y = _invert_g(p, c[nz], ax[nz], _critical_point(p, alpha[nz]), ax[nz])
    out[nz] = np.sign(x[nz]) * y
    return out


def threshold(spec: ThresholdSpec, x: float) -> float:
    """Global minimizer of ``y -> (y - x)^2 + alpha |y|^p``.

    At the jump (p < 1 and |x| equal to the effective threshold) the
    value 0 is returned.
    """
    return float(threshold_array(spec.p, spec.alpha, np.array([x]))[0])


def scalar_objective(spec: ThresholdSpec, y, x):
    y = np.asarray(y, dtype=float)
    if spec.p == 0:
        pen = (y != 0).astype(float)
    else:
        pen = np.abs(y) ** spec.p
    return (y - x) ** 2 + spec.alpha * pen


def oracle_threshold(spec: ThresholdSpec, x: float, grid_halfwidth: float | None = None,
                     grid_points: int = 200_001) -> float:
    """Brute-force minimizer of the scalar objective over a uniform grid.

    The grid always contains 0; ties go to the smaller magnitude.
    """
    if grid_halfwidth is None:
        grid_halfwidth = 2 * abs(x) + 1
    if grid_points < 100_000:
        raise PreconditionError("oracle grid needs at least 1e5 points")
    if grid_halfwidth < 2 * abs(x) + 1:
        raise PreconditionError("oracle grid must cover [-(2|x|+1), 2|x|+1]")
    grid = np.append(np.linspace(-grid_halfwidth, grid_halfwidth, grid_points), 0.0)
    vals = scalar_objective(spec, grid, x)
    best = np.flatnonzero(vals == vals.min())
    return float(grid[best[np.argmin(np.abs(grid[best]))]])


def oracle_spacing(x: float, grid_halfwidth: float | None = None, grid_points: int = 200_001) -> float:
    if grid_halfwidth is None:
        grid_halfwidth = 2 * abs(x) + 1
    return 2 * grid_halfwidth / (grid_points - 1)
