"""Experiment harness.

* :func:`run_rate_experiment` sweeps the noise level on a diagonal testbed
  with an exactly sourced sparse solution and checks the a priori bounds
  row by row.
* :func:`run_pinv_regularization_sweep` drives alpha to 0 on exact data for
  p < 1 and measures the distance to the pseudo-inverse solution.
* :func:`run_nonexistence_demo` and :func:`run_constrained_nonconvergence_demo`
  exhibit the failure of p = 0 regularization for an operator whose columns
  form a fine net on the unit sphere.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from sparsetik.errors import BoundViolationError, NetTooCoarseError, PreconditionError
from sparsetik.operators import DiagonalOperator, build_dense_net, pseudo_inverse_apply
from sparsetik.penalty import WeightedPenalty, bregman_taylor_lambda, kappa
from sparsetik.solvers import RegularizedProblem, solve_diagonal, solve_iterative
from sparsetik.source import construct_sourced_instance
from sparsetik.thresholding import effective_threshold, ThresholdSpec

RATE_COLUMNS = ("delta", "alpha", "residual_norm", "err2_weighted", "err1", "bound_data", "bound_recon")
CROSSCHECK_TOL = 1e-8


def fit_loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(ys) against log(xs)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.size < 3:
        raise PreconditionError("need at least three (x, y) pairs of equal length")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise PreconditionError("log-log fit needs positive values")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def sphere_noise(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    e = rng.standard_normal(n)
    return e * (radius / np.linalg.norm(e))


def inverse_kappa_table(ps, C=1.0, L=1.0):
    return {float(p): 1.0 / kappa(p, C, L) for p in ps}


# --------------------------------------------------------------------------
# convergence rates


@dataclass
class RateExperimentConfig:
    p: float = 1.0
    N: int = 200
    sigma_decay: float = 1.0
    support: tuple = (1, 2, 3, 4, 5)
    values: tuple = (1.0, -2.0, 0.5, 3.0, -1.0)
    weights: float = 1.0
    delta_grid: tuple = tuple(np.logspace(-1, -5, 9))
    alpha_rule: float = 1.0
    noise_seed: int = 0
    trials_per_delta: int = 10
    noise: str = "sphere"
    crosscheck: bool = True
    # acceptance bands for the fitted slopes; None means "derive from p"
    band_err2_weighted: tuple | None = None
    band_err2: tuple | None = None
    band_err1: tuple | None = None

    def __post_init__(self):
        self.support = tuple(int(k) for k in self.support)
        self.values = tuple(float(v) for v in self.values)
        self.delta_grid = tuple(float(d) for d in self.delta_grid)
        self.validate()

    def validate(self):
        if not 1 <= self.p <= 2:
            raise PreconditionError("rate experiments need 1 <= p <= 2")
        if self.N < 1:
            raise PreconditionError("N must be positive")
        if len(self.support) != len(self.values) or not self.support:
            raise PreconditionError("support and values must be nonempty and of equal length")
        if min(self.support) < 1 or max(self.support) > self.N:
            raise PreconditionError("support indices must lie in [1, N]")
        if len(set(self.support)) != len(self.support):
            raise PreconditionError("support indices must be distinct")
        if any(v == 0 for v in self.values):
            raise PreconditionError("support values must be nonzero")
        d = np.asarray(self.delta_grid)
        if d.size < 1 or np.any(d <= 0) or np.any(np.diff(d) >= 0):
            raise PreconditionError("delta_grid must be strictly decreasing and positive")
        if not self.alpha_rule > 0:
            raise PreconditionError("alpha_rule must be positive")
        if self.trials_per_delta < 1:
            raise PreconditionError("trials_per_delta must be at least 1")
        if not self.weights > 0:
            raise PreconditionError("weights must be positive")
        if self.noise not in ("sphere", "none"):
            raise PreconditionError("noise must be 'sphere' or 'none'")
        if self.p == 1 and self.alpha_rule * d.max() >= 1:
            raise PreconditionError("the p = 1 bound needs alpha < 1 on the whole grid")

    def bands(self):
        """Acceptance bands: +-0.1 around the theoretical slope, +-0.2 for
        squared quantities."""
        return {
            "err2_weighted": self.band_err2_weighted or (0.8, 1.2),
            "err2": self.band_err2 or (0.4, 0.6),
            "err1": self.band_err1 or (0.4, 0.6),
        }


@dataclass
class RateReport:
    config: RateExperimentConfig
    rows: list
    slope2: float
    slope1: float
    slope_err2_weighted: float
    rho: float
    constants: dict
    crosscheck_max_diff: float | None
    bounds_ok: bool = True
    mean_errors: dict = field(default_factory=dict)

    def slopes_in_bands(self) -> dict:
        b = self.config.bands()
        out = {"err1": b["err1"][0] <= self.slope1 <= b["err1"][1]}
        if self.config.p > 1:
            out["err2_weighted"] = b["err2_weighted"][0] <= self.slope_err2_weighted <= b["err2_weighted"][1]
            out["err2"] = b["err2"][0] <= self.slope2 <= b["err2"][1]
        return out

    @property
    def ok(self) -> bool:
        return self.bounds_ok and all(self.slopes_in_bands().values())

    def summary(self) -> dict:
        s = {
            "p": self.config.p,
            "slope2": self.slope2,
            "slope1": self.slope1,
            "slope_err2_weighted": self.slope_err2_weighted,
            "rho": self.rho,
        }
        s.update(self.constants)
        if self.crosscheck_max_diff is not None:
            s["crosscheck_max_diff"] = self.crosscheck_max_diff
        for k, v in self.slopes_in_bands().items():
            s[f"band_{k}_ok"] = v
        s["bounds_ok"] = self.bounds_ok
        return s

    def to_csv(self) -> str:
        return rows_to_csv(RATE_COLUMNS, self.rows, self.summary())


def build_rate_testbed(cfg: RateExperimentConfig):
    k = np.arange(1, cfg.N + 1, dtype=float)
    K = DiagonalOperator(k ** (-cfg.sigma_decay))
    pen = WeightedPenalty.uniform(cfg.p, cfg.N, cfg.weights)
    idx = [s - 1 for s in cfg.support]
    vals = np.asarray(cfg.values)
    u_plus, cert = construct_sourced_instance(K, idx, np.sign(vals), np.abs(vals), pen)
    return K, pen, u_plus, cert


def run_rate_experiment(cfg: RateExperimentConfig) -> RateReport:
    """Sweep ``delta`` and record errors against the a priori bounds.

    Raises :class:`BoundViolationError` carrying the offending row if the
    data-side bound or the reconstruction bound fails anywhere.
    """
    K, pen, u_plus, cert = build_rate_testbed(cfg)
    rho = cert.rho
    w = pen.w.values
    C = float(np.max(np.abs(u_plus)))
    constants = {}
    bt = None
    if cfg.p == 1:
        M = 2 * float(np.sum(np.abs(u_plus))) + 1
        bt = bregman_taylor_lambda(K, u_plus, pen.w, M)
        constants.update(lambda_=bt.lam, c_tilde=bt.c_tilde, M=M)
    rng = np.random.default_rng(cfg.noise_seed)
    g_clean = K.apply(u_plus)

    rows = []
    per_delta = {"err2_weighted": [], "err2": [], "err1": []}
    crosscheck_diff = None
    inv_kappa_max = 0.0
    for i, delta in enumerate(cfg.delta_grid):
        alpha = cfg.alpha_rule * delta
        acc = {"err2_weighted": 0.0, "err2": 0.0, "err1": 0.0}
        for trial in range(cfg.trials_per_delta):
            e = sphere_noise(rng, cfg.N, delta) if cfg.noise == "sphere" else np.zeros(cfg.N)
            prob = RegularizedProblem(K, g_clean + e, alpha, pen, delta=delta)
            res = solve_diagonal(prob)
            u = res.u
            if cfg.crosscheck and i == 0 and trial == 0:
                it = solve_iterative(prob, tol=1e-12, max_iter=200_000)
                crosscheck_diff = float(np.linalg.norm(it.u - u))
                if crosscheck_diff > CROSSCHECK_TOL:
                    raise BoundViolationError(
                        f"iterative and diagonal solvers disagree by {crosscheck_diff:.3g}")
            diff = u - u_plus
            row = {
                "delta": delta,
                "alpha": alpha,
                "residual_norm": float(np.linalg.norm(prob.residual(u))),
                "err2_weighted": float(np.sum(w * diff**2)),
                "err1": float(np.sum(np.abs(diff))),
                "bound_data": delta + 2 * alpha * rho,
            }
            if cfg.p > 1:
                L = max(float(np.max(np.abs(diff))), np.finfo(float).tiny)
                kap = kappa(cfg.p, C, L)
                inv_kappa_max = max(inv_kappa_max, 1 / kap)
                row["bound_recon"] = (delta + alpha * rho) ** 2 / (alpha * kap)
                recon_ok = row["err2_weighted"] <= row["bound_recon"]
            else:
                if row["err1"] > bt.M:
                    raise BoundViolationError("iterate left the 1-norm ball of the Bregman-Taylor estimate", row)
                row["bound_recon"] = (delta + alpha * rho) ** 2 / (bt.lam * alpha * (1 - alpha))
                recon_ok = row["err1"] ** 2 <= row["bound_recon"]
            if not row["residual_norm"] <= row["bound_data"]:
                raise BoundViolationError("data-side bound violated", row)
            if not recon_ok:
                raise BoundViolationError("reconstruction bound violated", row)
            rows.append(row)
            acc["err2_weighted"] += row["err2_weighted"]
            acc["err2"] += float(np.linalg.norm(diff))
            acc["err1"] += row["err1"]
        for k in per_delta:
            per_delta[k].append(acc[k] / cfg.trials_per_delta)
    if cfg.p > 1:
        constants["inv_kappa_max"] = inv_kappa_max

    def slope(key):
        ys = per_delta[key]
        if len(ys) < 3 or min(ys) <= 0:
            return float("nan")
        return fit_loglog_slope(cfg.delta_grid, ys)

    return RateReport(
        config=cfg,
        rows=rows,
        slope2=slope("err2"),
        slope1=slope("err1"),
        slope_err2_weighted=slope("err2_weighted"),
        rho=rho,
        constants=constants,
        crosscheck_max_diff=crosscheck_diff,
        mean_errors=per_delta,
    )


# --------------------------------------------------------------------------
# alpha -> 0 on exact data, p < 1


@dataclass
class SweepReport:
    p: float
    rows: list
    activation_alpha: float
    final_ok: bool
    monotone: bool

    @property
    def ok(self):
        return self.final_ok and self.monotone

    def to_csv(self) -> str:
        return rows_to_csv(("alpha", "error"), self.rows, {
            "p": self.p, "activation_alpha": self.activation_alpha,
            "monotone": self.monotone, "final_ok": self.final_ok})


def activation_alpha(K: DiagonalOperator, u_star, p: float) -> float:
    """Largest alpha below which every nonzero component passes the jump of
    its thresholding map (for p = 0 this is min over the support of
    ``(sigma_k u_k)^2``)."""
    s = K.singular_values
    g = np.abs(s * u_star)
    idx = np.flatnonzero(g)
    if idx.size == 0:
        return float("inf")
    if p == 0:
        return float(np.min(g[idx] ** 2))
    # alpha_eff(a) = c_p a^(1/(2-p)) with a = alpha / sigma^p
    c_p = effective_threshold(ThresholdSpec(p, 1.0))
    return float(np.min((g[idx] / c_p) ** (2 - p) * s[idx] ** p))


def run_pinv_regularization_sweep(K: DiagonalOperator, u_star, p: float, alpha_grid,
                                  final_tol: float = 1e-6, slack: float = 1e-12) -> SweepReport:
    if not 0 <= p < 1:
        raise PreconditionError("the pseudo-inverse sweep is for 0 <= p < 1")
    alphas = np.asarray(alpha_grid, dtype=float)
    if alphas.size < 1 or np.any(alphas <= 0) or np.any(np.diff(alphas) >= 0):
        raise PreconditionError("alpha_grid must be strictly decreasing and positive")
    u_star = np.asarray(u_star, dtype=float)
    g = K.apply(u_star)
    target = pseudo_inverse_apply(K, g)
    pen = WeightedPenalty.uniform(p, K.shape[1])
    rows = []
    for a in alphas:
        u = solve_diagonal(RegularizedProblem(K, g, float(a), pen)).u
        rows.append({"alpha": float(a), "error": float(np.linalg.norm(u - target))})
    errs = np.array([r["error"] for r in rows])
    monotone = bool(np.all(np.diff(errs) <= slack))
    act = activation_alpha(K, u_star, p)
    final_ok = True
    if alphas[-1] < act:
        final_ok = bool(errs[-1] <= final_tol) and (p != 0 or errs[-1] == 0)
    return SweepReport(p=p, rows=rows, activation_alpha=act, final_ok=final_ok, monotone=monotone)


# --------------------------------------------------------------------------
# p = 0 with a dense net of columns


def _draw_generic_direction(rng, M, nets, max_tries=100):
    for _ in range(max_tries):
        g = rng.standard_normal(M)
        g /= np.linalg.norm(g)
        if all(np.max(np.abs(net.matrix.T @ g)) < 1 - 1e-12 for net in nets):
            return g
    raise PreconditionError("could not draw data that is not parallel to a net column")


@dataclass
class NonexistenceReport:
    alpha: float
    g_norm: float
    rows: list

    def to_csv(self) -> str:
        return rows_to_csv(("L", "resolution", "m", "gap", "psi_zero", "psi_multi"), self.rows,
                           {"alpha": self.alpha, "g_norm": self.g_norm})


def run_nonexistence_demo(M: int, net_sizes, alpha: float, g_seed: int = 0,
                          g_norm: float = 1.0) -> NonexistenceReport:
    """Infimum of the p = 0 functional over 1-sparse vectors as the net refines.

    For each net the best 1-sparse value is ``alpha + ||g||^2 min_k (1 - <g/||g||, h_k>^2)``
    (optimal coefficient ``<g, h_k>``). It must stay strictly above ``alpha``
    and below both ``Psi(0) = ||g||^2`` and the ``2 alpha`` floor of vectors
    with two or more nonzeros, so the infimum ``alpha`` is never attained.
    """
    if not g_norm**2 > alpha:
        raise PreconditionError("need ||g||^2 > alpha; otherwise u = 0 is a minimizer")
    if alpha <= 0:
        raise PreconditionError("alpha must be positive")
    sizes = [int(L) for L in net_sizes]
    nets = [build_dense_net(M, L, seed=g_seed) for L in sizes]
    rng = np.random.default_rng(g_seed)
    ghat = _draw_generic_direction(rng, M, nets)
    g = g_norm * ghat
    psi_zero = float(g @ g)
    rows = []
    for L, net in zip(sizes, nets):
        cos = net.matrix.T @ ghat
        m = float(alpha + psi_zero * np.min(1 - cos**2))
        rows.append({"L": L, "resolution": net.resolution, "m": m, "gap": m - alpha,
                     "psi_zero": psi_zero, "psi_multi": 2 * alpha})
    gaps = [r["gap"] for r in rows]
    for r in rows:
        if not r["gap"] > 0:
            raise BoundViolationError("infimum attained: data parallel to a column", r)
        if not min(psi_zero, 2 * alpha) > r["m"]:
            raise BoundViolationError("a 0-sparse or multi-sparse vector beats the 1-sparse family", r)
    if any(b > a for a, b in zip(gaps, gaps[1:])):
        raise BoundViolationError("gap increased under net refinement", rows)
    if not gaps[-1] < 0.01 * alpha:
        raise BoundViolationError("finest net does not approach the infimum", rows[-1])
    return NonexistenceReport(alpha=alpha, g_norm=g_norm, rows=rows)


@dataclass
class ConstrainedReport:
    tau: float
    L: int
    resolution: float
    rows: list

    def to_csv(self) -> str:
        return rows_to_csv(("delta", "epsilon", "index", "coefficient", "residual", "distance",
                            "distance_unit"), self.rows,
                           {"tau": self.tau, "L": self.L, "resolution": self.resolution})


def run_constrained_nonconvergence_demo(M: int, L: int, tau: float, delta_grid,
                                        seed: int = 0) -> ConstrainedReport:
    """Feasible 1-sparse solutions of the constrained p = 0 problem that
    stay away from the true solution ``e_1`` as the noise vanishes."""
    if not tau > 1:
        raise PreconditionError("tau must exceed 1")
    deltas = np.asarray(delta_grid, dtype=float)
    if np.any(deltas <= 0):
        raise PreconditionError("noise levels must be positive")
    net = build_dense_net(M, L, seed=seed)
    H = net.matrix
    g_plus = H[:, 0]
    u_plus = np.zeros(L)
    u_plus[0] = 1.0
    rng = np.random.default_rng(seed)
    rows = []
    for delta in deltas:
        g_delta = g_plus + sphere_noise(rng, M, delta)
        eps = tau * delta
        dist = np.linalg.norm(H - g_delta[:, None], axis=0)
        dist[0] = np.inf
        l = int(np.argmin(dist))
        if dist[l] > eps:
            raise NetTooCoarseError(
                f"no column other than h_1 within eps={eps:.3g} of the data at delta={delta:.3g}; increase L")
        d = float(g_delta @ H[:, l])
        residual = float(np.linalg.norm(d * H[:, l] - g_delta))
        if residual > eps:
            d = 1.0
            residual = float(dist[l])
        u = np.zeros(L)
        u[l] = d
        u_unit = np.zeros(L)
        u_unit[l] = 1.0
        rows.append({"delta": float(delta), "epsilon": eps, "index": l, "coefficient": d,
                     "residual": residual, "distance": float(np.linalg.norm(u - u_plus)),
                     "distance_unit": float(np.linalg.norm(u_unit - u_plus))})
    for r in rows:
        if not r["distance"] >= 1:
            raise BoundViolationError("constrained solution approached u+", r)
        if abs(r["distance_unit"] - math.sqrt(2)) > 1e-9:
            raise BoundViolationError("unit-coefficient distance differs from sqrt(2)", r)
    return ConstrainedReport(tau=tau, L=L, resolution=net.resolution, rows=rows)


# --------------------------------------------------------------------------
# CSV


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def rows_to_csv(columns, rows, summary=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([format_value(r[c]) for c in columns])
    for k, v in (summary or {}).items():
        buf.write(f"# {k} {format_value(v)}\n")
    return buf.getvalue()
