"""Brute-force reference solvers used to certify the closed-form routines.

These deliberately share no code with the production paths: the cone
projections here are plain sort-based implementations compiled with numba,
and the prox oracle is a long-run projected subgradient method.  They are
shipped (not test-only) so the CLI `check` mode can certify user instances.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .epigraph import ConePoint

__all__ = [
    "OracleReport",
    "KktResiduals",
    "oracle_prox_subgradient",
    "oracle_grid_min",
    "kkt_residual",
]


@dataclass(frozen=True)
class OracleReport:
    oracle_objective: float
    candidate_objective: float
    gap: float  # candidate - oracle; may be slightly negative (oracle is approximate)
    iterations: int


# ---------------------------------------------------------------------------
# numba kernels (sort-based projections, independent of the epigraph module)


@njit(cache=True)
def _nb_proj_l2(x, s):
    nx = 0.0
    for i in range(x.shape[0]):
        nx += x[i] * x[i]
    nx = np.sqrt(nx)
    if nx <= s:
        return x.copy(), s
    if nx <= -s:
        return np.zeros_like(x), 0.0
    t = 0.5 * (nx + s)
    return (t / nx) * x, t


@njit(cache=True)
def _nb_l1_root(ax, beta, gamma):
    # root of F(t) = sum(max(ax_i - t, 0)) - beta*t - gamma; F is decreasing
    # in t, so scanning breakpoints in descending order meets F >= 0 exactly
    # once, at the segment containing the root
    srt = np.sort(ax)[::-1]
    d = srt.shape[0]
    css = 0.0
    for k in range(d):
        css += srt[k]
        if css - (k + 1 + beta) * srt[k] - gamma >= 0.0:
            if k == 0:
                return -gamma / beta
            return (css - srt[k] - gamma) / (k + beta)
    return (css - gamma) / (d + beta)


@njit(cache=True)
def _nb_proj_l1(x, s):
    ax = np.abs(x)
    if ax.sum() <= s:
        return x.copy(), s
    tau = _nb_l1_root(ax, 1.0, s)
    w = np.sign(x) * np.maximum(ax - tau, 0.0)
    t = tau + s
    n1 = np.abs(w).sum()
    if t < n1:
        t = n1
    return w, t


@njit(cache=True)
def _nb_proj_linf(x, s):
    pw, pl = _nb_proj_l1(-x, -s)
    return x + pw, s + pl


@njit(cache=True)
def _nb_project(qcode, x, s):
    if qcode == 1:
        return _nb_proj_l1(x, s)
    if qcode == 2:
        return _nb_proj_l2(x, s)
    return _nb_proj_linf(x, s)


@njit(cache=True)
def _nb_objective(w, lam, z, kappa, w_bar, lam_bar, alpha, U, V, c):
    wz = 0.0
    nw2 = 0.0
    dist = 0.0
    for i in range(w.shape[0]):
        wz += w[i] * z[i]
        nw2 += w[i] * w[i]
        dw = w[i] - w_bar[i]
        dist += dw * dw
    h = max(1.0 - wz, 1.0 + wz - lam * kappa)
    if h < 0.0:
        h = 0.0
    dl = lam - lam_bar
    return h + 0.5 * c * nw2 + (U * dist + V * dl * dl) / (2.0 * alpha)


@njit(cache=True)
def _nb_prox_subgrad(z, w_bar, lam_bar, alpha, kappa, qcode, U, V, c, iters, beta0):
    w, lam = _nb_project(qcode, w_bar.copy(), lam_bar)
    best_w = w.copy()
    best_lam = lam
    best_obj = _nb_objective(w, lam, z, kappa, w_bar, lam_bar, alpha, U, V, c)
    d = z.shape[0]
    g = np.empty(d)
    for t in range(1, iters):
        wz = 0.0
        for i in range(d):
            wz += w[i] * z[i]
        h1 = 1.0 - wz
        h2 = 1.0 + wz - lam * kappa
        # active piece, ties to the smaller index
        if h1 >= h2 and h1 >= 0.0:
            for i in range(d):
                g[i] = -z[i]
            glam = 0.0
        elif h2 > h1 and h2 >= 0.0:
            for i in range(d):
                g[i] = z[i]
            glam = -kappa
        else:
            for i in range(d):
                g[i] = 0.0
            glam = 0.0
        step = beta0 / np.sqrt(t)
        for i in range(d):
            g[i] += c * w[i] + U * (w[i] - w_bar[i]) / alpha
            w[i] -= step * g[i]
        glam += V * (lam - lam_bar) / alpha
        lam -= step * glam
        w, lam = _nb_project(qcode, w, lam)
        obj = _nb_objective(w, lam, z, kappa, w_bar, lam_bar, alpha, U, V, c)
        if obj < best_obj:
            best_obj = obj
            for i in range(d):
                best_w[i] = w[i]
            best_lam = lam
    return best_w, best_lam, best_obj


def _qcode(q: float) -> int:
    if q == 1:
        return 1
    if q == 2:
        return 2
    if q == np.inf:
        return 3
    raise ValueError(f"unsupported norm selector q={q!r}")


def oracle_prox_subgradient(inst, iters: int, c: float = 0.0) -> tuple[ConePoint, float]:
    """Long-run projected subgradient on a single-sample prox objective.

    Certifies prox_point_* outputs: runs `iters - 1` steps beta_t = beta0/sqrt(t)
    from the projected center and returns the best iterate found together with
    its objective.  `c` adds an explicit (c/2)||w||^2 term so the *untransformed*
    c > 0 objective can be certified without going through rescale_for_c.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    z = np.asarray(inst.z, dtype=float)
    w_bar = np.asarray(inst.w_bar, dtype=float)
    # crude per-instance Lipschitz estimate for the step scale
    reach = float(np.linalg.norm(w_bar)) + abs(inst.lam_bar) + 1.0
    lip = float(np.sqrt(z @ z + inst.kappa**2))
    lip += (max(inst.weight_w, inst.weight_lam) / inst.alpha + c) * reach
    beta0 = 1.0 / lip
    w, lam, obj = _nb_prox_subgrad(
        z, w_bar, float(inst.lam_bar), float(inst.alpha), float(inst.kappa),
        _qcode(inst.q), float(inst.weight_w), float(inst.weight_lam), float(c),
        int(iters), beta0,
    )
    return ConePoint(w, float(lam)), float(obj)


# ---------------------------------------------------------------------------
# grid oracle


def oracle_grid_min(objective, box, resolution: int, q: float):
    """Exhaustive minimization over a cone-feasible uniform grid, d <= 3.

    `objective` must accept batched arrays (w of shape (m, d), lam of shape
    (m,)) and return m values.  `box` is ((w_lo, w_hi), (lam_lo, lam_hi)) with
    scalar or per-coordinate w bounds.
    """
    (w_lo, w_hi), (lam_lo, lam_hi) = box
    w_lo = np.atleast_1d(np.asarray(w_lo, dtype=float))
    w_hi = np.atleast_1d(np.asarray(w_hi, dtype=float))
    d = w_lo.shape[0]
    if d > 3:
        raise ValueError("grid oracle supports d <= 3 only")
    if resolution < 10:
        raise ValueError("resolution must be >= 10")
    axes = [np.linspace(w_lo[i], w_hi[i], resolution) for i in range(d)]
    axes.append(np.linspace(lam_lo, lam_hi, resolution))
    mesh = np.meshgrid(*axes, indexing="ij")
    w = np.stack([m.reshape(-1) for m in mesh[:d]], axis=1)
    lam = mesh[d].reshape(-1)
    if q == 1:
        feas = np.abs(w).sum(axis=1) <= lam
    elif q == 2:
        feas = np.sqrt((w * w).sum(axis=1)) <= lam
    elif q == np.inf:
        feas = np.abs(w).max(axis=1) <= lam
    else:
        raise ValueError(f"unsupported norm selector q={q!r}")
    if not feas.any():
        raise ValueError("no cone-feasible grid point inside the box")
    w, lam = w[feas], lam[feas]
    vals = np.asarray(objective(w, lam), dtype=float)
    k = int(np.argmin(vals))
    return (w[k].copy(), float(lam[k])), float(vals[k])


# ---------------------------------------------------------------------------
# KKT residuals for the equality-constrained two-piece subproblem


@dataclass(frozen=True)
class KktResiduals:
    stationarity_w: float
    stationarity_lam: float
    primal_eq: float
    primal_cone: float
    comp_slack: float
    dual_feas: float

    def max(self) -> float:
        return max(
            self.stationarity_w, self.stationarity_lam, self.primal_eq,
            self.primal_cone, self.comp_slack, self.dual_feas,
        )


_PATTERNS = {
    (1, 2): ("shift_z", lambda kappa: (kappa / 2.0, 0.0)),
    (1, 3): ("plain", lambda kappa: (0.0, 1.0)),
    (2, 3): ("plain", lambda kappa: (kappa, -1.0)),
}


def kkt_residual(inst, candidate: ConePoint, multipliers, pattern) -> KktResiduals:
    """Residuals of the KKT system for a two-piece active pattern.

    The subproblem is min (U/2)||w - c_w||^2 + (V/2)(lam - c_lam)^2 subject to
    w'z = a*lam + b and ||w||_2 <= lam, where the center absorbs the active
    pieces' common affine value.  Multipliers follow the squared-form cone
    constraint (mu2 multiplies ||w||^2 - lam^2).
    """
    key = tuple(sorted(pattern))
    if key not in _PATTERNS:
        raise ValueError(f"unsupported active pattern {pattern!r}")
    kind, ab = _PATTERNS[key]
    a, b = ab(inst.kappa)
    U, V = inst.weight_w, inst.weight_lam
    z = np.asarray(inst.z, dtype=float)
    c_w = np.asarray(inst.w_bar, dtype=float)
    c_lam = float(inst.lam_bar)
    if kind == "shift_z":
        c_w = c_w + (inst.alpha / U) * z
    w, lam = np.asarray(candidate.w, dtype=float), float(candidate.lam)
    mu1, mu2 = float(multipliers.mu1), float(multipliers.mu2)
    nw = float(np.linalg.norm(w))
    scale = 1.0 + abs(lam) + nw + float(np.linalg.norm(z))
    return KktResiduals(
        stationarity_w=float(np.linalg.norm(U * (w - c_w) + mu1 * z + 2.0 * mu2 * w)) / scale,
        stationarity_lam=abs(V * (lam - c_lam) - a * mu1 - 2.0 * mu2 * lam) / scale,
        primal_eq=abs(float(w @ z) - a * lam - b) / scale,
        primal_cone=max(nw - lam, 0.0) / scale,
        comp_slack=abs(mu2 * (nw * nw - lam * lam)) / scale,
        dual_feas=max(-mu2, 0.0),
    )
