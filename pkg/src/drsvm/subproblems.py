"""Exact solvers for the single-sample proximal point updates.

Each update minimizes one sample's three-piece hinge plus a quadratic
proximal penalty over the cone {||w||_q <= lam}.  The minimizer is found by
enumerating active-piece patterns: cone projections of shifted centers for
single-piece patterns, an equality-constrained KKT system (quartic in the
cone multiplier) for two-piece patterns under q=2, a one-dimensional
modified secant search for two-piece patterns under q in {1, inf}, and a
ball/hyperplane projection when all three pieces are active.

Prox weights (weight_w, weight_lam) generalize the solvers to the
anisotropic penalty (weight_w/2a)||w - w_bar||^2 + (weight_lam/2a)(lam -
lam_bar)^2; the c > 0 regularizer reduces to exactly this form (see
rescale_for_c).
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .epigraph import ConePoint, _piecewise_root, _proj_l1_raw, _proj_l2_raw, _proj_linf_raw
from .quartic import solve_quartic_real_roots

__all__ = [
    "ProxInstance",
    "KktPair",
    "DegenerateKappaError",
    "InfeasibleSubproblemError",
    "NumericalFailureError",
    "CascadeError",
    "eval_hinge_pieces",
    "solve_quartic_real_roots",
    "ppa_l2",
    "ball_hyperplane_l2",
    "p_sigma",
    "msa_secant",
    "equality_ball_projection",
    "prox_point_l2",
    "prox_point_l1",
    "prox_point_linf",
    "prox_point",
    "rescale_for_c",
    "set_fault_injection",
]

_ACCEPT_RTOL = 1e-9  # slack for the cascade acceptance checks at region boundaries
_MSA_XI = 1e-10
_MSA_MAX_ITER = 200


class DegenerateKappaError(ValueError):
    """A cascade case requiring 2/kappa was reached with kappa = 0."""


class InfeasibleSubproblemError(ValueError):
    """A hyperplane/ball intersection required by a subproblem is empty."""


class NumericalFailureError(RuntimeError):
    """A root search exhausted its iteration budget."""

    def __init__(self, message: str, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class CascadeError(RuntimeError):
    """No active-piece pattern accepted; indicates an internal bug."""


_FAULTS = ("case5-lambda",)
_inject_fault: str | None = None


def set_fault_injection(name: str | None) -> None:
    """Testing hook: force a known-wrong branch so invariant suites can
    demonstrate detection.  Pass None to restore normal operation."""
    global _inject_fault
    if name is not None and name not in _FAULTS:
        raise ValueError(f"unknown fault {name!r}; known: {_FAULTS}")
    _inject_fault = name


@dataclass(frozen=True)
class ProxInstance:
    """One single-sample prox subproblem.

    Minimize max(1 - w'z, 1 + w'z - lam*kappa, 0)
      + (weight_w/(2*alpha))*||w - w_bar||^2
      + (weight_lam/(2*alpha))*(lam - lam_bar)^2
    subject to ||w||_q <= lam.
    """

    z: np.ndarray
    w_bar: np.ndarray
    lam_bar: float
    alpha: float
    kappa: float
    q: float
    weight_w: float = 1.0
    weight_lam: float = 1.0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.kappa < 0:
            raise ValueError("kappa must be nonnegative")
        if self.weight_w <= 0 or self.weight_lam <= 0:
            raise ValueError("prox weights must be positive")
        if self.q not in (1, 2, np.inf):
            raise ValueError(f"unsupported norm selector q={self.q!r}")


@dataclass(frozen=True)
class KktPair:
    mu1: float
    mu2: float


def eval_hinge_pieces(w: np.ndarray, lam: float, z: np.ndarray, kappa: float):
    """The three affine pieces (h1, h2, h3) whose max is the hinge term."""
    wz = float(w @ z)
    return 1.0 - wz, 1.0 + wz - lam * kappa, 0.0


def prox_objective(inst: ProxInstance, w: np.ndarray, lam: float, c: float = 0.0) -> float:
    """Value of the prox subproblem objective at (w, lam)."""
    h1, h2, h3 = eval_hinge_pieces(w, lam, inst.z, inst.kappa)
    dw = w - inst.w_bar
    dl = lam - inst.lam_bar
    quad = (inst.weight_w * float(dw @ dw) + inst.weight_lam * dl * dl) / (2.0 * inst.alpha)
    return max(h1, h2, h3) + quad + 0.5 * c * float(w @ w)


# ---------------------------------------------------------------------------
# weighted cone projections: argmin U*||y - x||^2 + V*(t - s)^2 over the cone


def _wproj_l2(x, s, U, V):
    if U == V:
        return _proj_l2_raw(x, s)
    nx = float(np.linalg.norm(x))
    if nx <= s:
        return x.copy(), s
    if U * nx + V * s <= 0.0:
        return np.zeros_like(x), 0.0
    t = (U * nx + V * s) / (U + V)
    return (t / nx) * x, t


def _wproj_l1(x, s, U, V):
    if U == V:
        return _proj_l1_raw(x, s)
    ax = np.abs(x)
    if ax.sum() <= s:
        return x.copy(), s
    tau = _piecewise_root(ax, U / V, s)
    w = np.sign(x) * np.maximum(ax - tau, 0.0)
    t = s + (U / V) * tau
    n1 = float(np.abs(w).sum())
    if t < n1:
        t = n1
    return w, t


def _wproj_linf(x, s, U, V):
    if U == V:
        return _proj_linf_raw(x, s)
    ax = np.abs(x)
    if (ax.max() if ax.size else 0.0) <= s:
        return x.copy(), s
    if U * ax.sum() + V * s <= 0.0:
        return np.zeros_like(x), 0.0
    t = _piecewise_root(ax, V / U, -(V / U) * s)
    return np.clip(x, -t, t), t


def _wproj(q, x, s, U, V):
    if q == 1:
        return _wproj_l1(x, s, U, V)
    if q == 2:
        return _wproj_l2(x, s, U, V)
    return _wproj_linf(x, s, U, V)


# ---------------------------------------------------------------------------
# q = 2 two-piece KKT solver


def _ppa_quartic_coeffs(A, B, C, a, b, lam_bar, U, V):
    # norm-equality condition ||w(m)|| = lam(m) cleared of denominators:
    # R(m) = ||U*w_bar*D - N*z||^2 - t1^2*(B*V*lam_bar + a*U*C - a*b*t1)^2
    # with t1 = U+2m, t2 = V-2m, D = a^2*t1 + B*t2, N = U*C*t2 - a*V*lam_bar*t1
    # - b*t1*t2; the vector norm expands through A, B, C.
    t1 = np.array([U, 2.0])
    t2 = np.array([V, -2.0])
    D = npoly.polyadd(a * a * t1, B * t2)
    N = npoly.polysub(npoly.polysub(U * C * t2, a * V * lam_bar * t1), b * npoly.polymul(t1, t2))
    lhs = npoly.polyadd(
        npoly.polysub(U * U * A * npoly.polymul(D, D), 2.0 * U * C * npoly.polymul(D, N)),
        B * npoly.polymul(N, N),
    )
    inner = npoly.polysub(np.array([B * V * lam_bar + a * U * C]), a * b * t1)
    rhs = npoly.polymul(npoly.polymul(t1, t1), npoly.polymul(inner, inner))
    coeffs = npoly.polysub(lhs, rhs)
    coeffs = np.pad(coeffs, (0, 5 - coeffs.size))
    return coeffs[::-1]  # descending, degree 4


def ppa_l2(w_bar, lam_bar, z, a, b, weight_w: float = 1.0, weight_lam: float = 1.0):
    """Minimize (U/2)||w - w_bar||^2 + (V/2)(lam - lam_bar)^2 subject to
    w'z = a*lam + b and ||w||_2 <= lam.

    Returns (ConePoint, KktPair) or None when no KKT point exists (the
    caller's two-piece pattern is not optimal and the cascade advances).
    """
    U, V = float(weight_w), float(weight_lam)
    if U <= 0 or V <= 0:
        raise ValueError("prox weights must be positive")
    z = np.asarray(z, dtype=float)
    w_bar = np.asarray(w_bar, dtype=float)
    lam_bar = float(lam_bar)
    B = float(z @ z)
    C = float(w_bar @ z)
    scale = 1.0 + abs(lam_bar) + float(np.linalg.norm(w_bar)) + np.sqrt(B) + abs(a) + abs(b)

    denom0 = a * a * U + B * V
    if denom0 <= 1e-14 * scale:
        # constraint degenerates to 0 = b; vacuous when b = 0
        if abs(b) > 1e-12 * scale:
            return None
        w, lam = _wproj_l2(w_bar, lam_bar, U, V)
        nw = float(np.linalg.norm(w))
        mu2 = 0.0
        if lam > 0.0 and nw >= lam * (1.0 - 1e-12):
            mu2 = max(V * (lam - lam_bar) / (2.0 * lam), 0.0)
        return ConePoint(w, lam), KktPair(0.0, mu2)

    mu1_0 = (U * C * V - a * V * lam_bar * U - b * U * V) / denom0
    w0 = w_bar - (mu1_0 / U) * z
    lam0 = lam_bar + (a * mu1_0) / V
    nw0 = float(np.linalg.norm(w0))
    if nw0 <= lam0 * (1.0 + 1e-12) + 1e-15 * scale:
        return ConePoint(w0, max(lam0, nw0)), KktPair(mu1_0, 0.0)

    A = float(w_bar @ w_bar)
    best = None
    if abs(b) <= 1e-12 * scale:
        # cone apex candidate: (0, 0) is feasible when b = 0 and can be
        # optimal without any smooth KKT point (the cone is not
        # differentiable there); multipliers are not unique at the apex
        best = (U * A + V * lam_bar * lam_bar, np.zeros_like(w_bar), 0.0, 0.0, 0.0)
    coeffs = _ppa_quartic_coeffs(A, B, C, a, b, lam_bar, U, V)
    if not np.any(coeffs):
        if best is not None:
            _, w, lam, m, mu1 = best
            return ConePoint(w, lam), KktPair(mu1, m)
        return None
    def reconstruct(m):
        t1 = U + 2.0 * m
        t2 = V - 2.0 * m
        if abs(t2) <= 1e-12 * (V + 2.0 * m):
            return None
        D = a * a * t1 + B * t2
        if abs(D) <= 1e-12 * (a * a * t1 + B * (V + 2.0 * m)):
            return None
        mu1 = (U * C * t2 - a * V * lam_bar * t1 - b * t1 * t2) / D
        w = (U * w_bar - mu1 * z) / t1
        lam = (V * lam_bar + a * mu1) / t2
        return w, lam, mu1

    for m in solve_quartic_real_roots(*coeffs):
        if m <= 0.0:
            continue
        rec = reconstruct(m)
        if rec is None:
            continue
        w, lam, mu1 = rec
        # secant polish on the raw norm-equality residual: the quartic root
        # alone leaves ||w|| - lam at ~1e-6 relative, which leaks into the
        # complementary-slackness residual downstream
        g = float(w @ w) - lam * lam
        m_lo = m * (1.0 + 1e-7) + 1e-14
        for _ in range(8):
            rec2 = reconstruct(m_lo)
            if rec2 is None:
                break
            g2 = float(rec2[0] @ rec2[0]) - rec2[1] * rec2[1]
            if g2 == g:
                break
            m_new = m - g * (m_lo - m) / (g2 - g)
            if not np.isfinite(m_new) or m_new <= 0.0:
                break
            rec_new = reconstruct(m_new)
            if rec_new is None:
                break
            g_new = float(rec_new[0] @ rec_new[0]) - rec_new[1] * rec_new[1]
            if abs(g_new) >= abs(g):
                break
            m_lo, m, g = m, m_new, g_new
            w, lam, mu1 = rec_new
            if abs(g) <= 1e-15 * (1.0 + lam * lam):
                break
        if lam < -1e-9 * scale:
            continue
        nw = float(np.linalg.norm(w))
        if abs(nw - lam) > 1e-6 * max(1.0, nw, abs(lam)):
            continue
        if abs(float(w @ z) - a * lam - b) > 1e-6 * scale:
            continue
        dw = w - w_bar
        obj = U * float(dw @ dw) + V * (lam - lam_bar) ** 2
        if best is None or obj < best[0] - 1e-12 * (1.0 + abs(best[0])) or (
            abs(obj - best[0]) <= 1e-12 * (1.0 + abs(best[0])) and m < best[3]
        ):
            best = (obj, w, lam, m, mu1)
    if best is None:
        return None
    _, w, lam, m, mu1 = best
    return ConePoint(w, max(lam, 0.0)), KktPair(mu1, m)


def ball_hyperplane_l2(b: float, radius: float, w_bar, z) -> np.ndarray:
    """Minimize ||w - w_bar||^2 subject to w'z = b and ||w||_2 <= radius."""
    z = np.asarray(z, dtype=float)
    w_bar = np.asarray(w_bar, dtype=float)
    nz2 = float(z @ z)
    if nz2 == 0.0:
        raise ValueError("z must be nonzero")
    if radius < 0.0:
        raise ValueError("radius must be nonnegative")
    nz = np.sqrt(nz2)
    if abs(b) > radius * nz * (1.0 + 1e-12) + 1e-15:
        raise InfeasibleSubproblemError(
            f"hyperplane w'z={b} does not meet the radius-{radius} ball"
        )
    if abs(b) >= radius * nz * (1.0 - 1e-12):
        # tangency: the intersection is the single point closest to the origin
        return (b / nz2) * z
    A = w_bar - ((float(w_bar @ z) - b) / nz2) * z
    nA = float(np.linalg.norm(A))
    if nA <= radius * (1.0 + 1e-12) + 1e-15:
        return A
    Bv = (2.0 * b / nz2) * z
    aq = 4.0 * radius * radius - float(Bv @ Bv)
    bq = 4.0 * radius * radius - 2.0 * float(A @ Bv)
    cq = radius * radius - nA * nA
    beta = None
    for r in solve_quartic_real_roots(0.0, 0.0, aq, bq, cq):
        if r > 0.0 and (beta is None or r < beta):
            beta = r
    if beta is None:
        raise NumericalFailureError("no positive root in the ball/hyperplane quadratic")
    return (A + beta * Bv) / (1.0 + 2.0 * beta)


# ---------------------------------------------------------------------------
# q in {1, inf}: sigma-parameterized search


def _p_raw(sigma, w_c, l_c, z_arg, a, alpha, U, V, q):
    w, lam = _wproj(q, w_c - (sigma * alpha / U) * z_arg, l_c + (sigma * alpha / V) * a, U, V)
    return float(w @ z_arg) - a * lam, w, lam


def p_sigma(sigma: float, inst: ProxInstance, a: float, b: float):
    """Residual p(sigma) = w_hat(sigma)'z - a*lam_hat(sigma) - b of the
    sigma-parameterized projection, together with the projected point."""
    val, w, lam = _p_raw(
        float(sigma), inst.w_bar, inst.lam_bar, inst.z, a,
        inst.alpha, inst.weight_w, inst.weight_lam, inst.q,
    )
    return val - b, ConePoint(w, lam)


def _msa_raw(w_c, l_c, z_arg, a, b, xi, alpha, U, V, q):
    p0, w, lam = _p_raw(0.0, w_c, l_c, z_arg, a, alpha, U, V, q)
    p0 -= b
    if p0 <= xi:
        return w, lam, 0.0
    p1, w1, lam1 = _p_raw(1.0, w_c, l_c, z_arg, a, alpha, U, V, q)
    p1 -= b
    if p1 >= 0.0:
        return None
    sigma_l, r_l = 0.0, -p0
    sigma_u, r_u = 1.0, -p1
    s = 1.0 - r_l / r_u
    sigma = sigma_u - (sigma_u - sigma_l) / s
    pv, w, lam = _p_raw(sigma, w_c, l_c, z_arg, a, alpha, U, V, q)
    r = -(pv - b)
    it = 0
    while abs(r) > xi:
        if sigma_u <= np.nextafter(sigma_l, np.inf):
            # bracket resolved to adjacent floats: |p| is limited by the
            # conditioning of w'z at this scale, not by the search
            break
        it += 1
        if it > _MSA_MAX_ITER:
            raise NumericalFailureError(
                "secant iteration budget exhausted", bracket=(sigma_l, sigma_u)
            )
        if r > 0.0:
            if s <= 2.0:
                sigma_u, r_u = sigma, r
                s = 1.0 - r_l / r_u
                nxt = sigma_u - (sigma_u - sigma_l) / s
            else:
                s_aux = max(r_u / r - 1.0, 0.1)
                dsig = (sigma_u - sigma) / s_aux
                sigma_u, r_u = sigma, r
                nxt = max(sigma_u - dsig, 0.6 * sigma_l + 0.4 * sigma_u)
                s = None
        else:
            if s >= 2.0:
                sigma_l, r_l = sigma, r
                s = 1.0 - r_l / r_u
                nxt = sigma_u - (sigma_u - sigma_l) / s
            else:
                s_aux = max(r_l / r - 1.0, 0.1)
                dsig = (sigma - sigma_l) / s_aux
                sigma_l, r_l = sigma, r
                nxt = max(sigma_l + dsig, 0.6 * sigma_u + 0.4 * sigma_l)
                s = None
        if not sigma_l < nxt < sigma_u:
            # step left (or degenerated onto) the bracket; bisect instead
            nxt = 0.5 * (sigma_l + sigma_u)
            s = 2.0
        elif s is None:
            s = (sigma_u - sigma_l) / (sigma_u - nxt)
        sigma = nxt
        pv, w, lam = _p_raw(sigma, w_c, l_c, z_arg, a, alpha, U, V, q)
        r = -(pv - b)
    return w, lam, sigma


def msa_secant(w_bar, lam_bar, z, a: float, b: float, xi: float, inst: ProxInstance):
    """Modified secant search for the two-piece subproblem multiplier.

    (w_bar, lam_bar) is the piece-absorbed center; z, a, b define the active
    constraint w'z <= a*lam + b.  Returns (ConePoint, sigma*) with sigma* in
    [0, 1), or None when p(1) >= 0 (the pattern is invalid and the caller
    advances).  Raises NumericalFailureError past the iteration cap.
    """
    if xi <= 0:
        raise ValueError("xi must be positive")
    res = _msa_raw(
        np.asarray(w_bar, dtype=float), float(lam_bar), np.asarray(z, dtype=float),
        float(a), float(b), float(xi), inst.alpha, inst.weight_w, inst.weight_lam, inst.q,
    )
    if res is None:
        return None
    w, lam, sigma = res
    return ConePoint(w, lam), sigma


# ---------------------------------------------------------------------------
# equality-constrained ball projection (q in {1, inf}) for the all-active case


def _ball_proj(q, x, radius):
    if q == 1:
        ax = np.abs(x)
        if ax.sum() <= radius:
            return x.copy()
        tau = _piecewise_root(ax, 0.0, radius)
        return np.sign(x) * np.maximum(ax - tau, 0.0)
    return np.clip(x, -radius, radius)


def _tangent_face_point(w_bar, z, rhs, radius, q):
    # |rhs| = radius * dualnorm(z): the feasible set is the face of the ball
    # supported by z (sign-flipped for negative rhs); project w_bar onto it
    sgn = 1.0 if rhs >= 0 else -1.0
    if q == np.inf:
        w = np.clip(w_bar, -radius, radius)
        active = z != 0.0
        w[active] = sgn * radius * np.sign(z[active])
        return w
    amax = np.max(np.abs(z))
    face = np.abs(z) >= amax * (1.0 - 1e-12)
    v = sgn * np.sign(z[face]) * w_bar[face]
    # projection onto the simplex {y >= 0, sum y = radius}
    theta = _piecewise_root(v, 0.0, radius)
    y = np.maximum(v - theta, 0.0)
    w = np.zeros_like(w_bar)
    w[face] = sgn * np.sign(z[face]) * y
    return w


def equality_ball_projection(w_bar, z, rhs: float, radius: float, q) -> np.ndarray:
    """Minimize ||w - w_bar||^2 subject to w'z = rhs and ||w||_q <= radius.

    Secant/bisection search on the hyperplane multiplier; each evaluation
    projects onto the q-ball.
    """
    if q not in (1, np.inf):
        raise ValueError("equality_ball_projection supports q in {1, inf}")
    z = np.asarray(z, dtype=float)
    w_bar = np.asarray(w_bar, dtype=float)
    nz2 = float(z @ z)
    if nz2 == 0.0:
        raise ValueError("z must be nonzero")
    if radius < 0.0:
        raise ValueError("radius must be nonnegative")
    dual = float(np.max(np.abs(z))) if q == 1 else float(np.abs(z).sum())
    support = radius * dual
    tol_feas = 1e-12 * (1.0 + support)
    if abs(rhs) > support + tol_feas:
        raise InfeasibleSubproblemError(
            f"hyperplane w'z={rhs} does not meet the radius-{radius} ball"
        )
    if abs(rhs) >= support * (1.0 - 1e-10):
        return _tangent_face_point(w_bar, z, rhs, radius, q)

    xi = 1e-11 * (1.0 + abs(rhs) + support)

    def phi(nu):
        w = _ball_proj(q, w_bar - nu * z, radius)
        return float(w @ z) - rhs, w

    f0, w0 = phi(0.0)
    if abs(f0) <= xi:
        return w0
    # phi is non-increasing in nu; expand geometrically to bracket the root
    step = (abs(f0) / nz2) + 1.0 / np.sqrt(nz2)
    if f0 > 0.0:
        lo, f_lo = 0.0, f0
        hi = step
        f_hi, w_hi = phi(hi)
        it = 0
        while f_hi > 0.0:
            lo, f_lo = hi, f_hi
            step *= 2.0
            hi += step
            f_hi, w_hi = phi(hi)
            it += 1
            if it > 200:
                raise NumericalFailureError("bracket expansion failed", bracket=(lo, hi))
        if abs(f_hi) <= xi:
            return w_hi
    else:
        hi, f_hi = 0.0, f0
        lo = -step
        f_lo, w_lo = phi(lo)
        it = 0
        while f_lo < 0.0:
            hi, f_hi = lo, f_lo
            step *= 2.0
            lo -= step
            f_lo, w_lo = phi(lo)
            it += 1
            if it > 200:
                raise NumericalFailureError("bracket expansion failed", bracket=(lo, hi))
        if abs(f_lo) <= xi:
            return w_lo
    # safeguarded secant on [lo, hi] with f_lo > 0 > f_hi
    w = w0
    for _ in range(_MSA_MAX_ITER):
        width = hi - lo
        if f_lo - f_hi != 0.0:
            nu = lo + width * f_lo / (f_lo - f_hi)
            if not lo < nu < hi:
                nu = 0.5 * (lo + hi)
        else:
            nu = 0.5 * (lo + hi)
        f, w = phi(nu)
        if abs(f) <= xi or hi - lo <= 1e-15 * (1.0 + abs(lo) + abs(hi)):
            return w
        if f > 0.0:
            lo, f_lo = nu, f
        else:
            hi, f_hi = nu, f
        if hi - lo > 0.7 * width:
            # secant is crawling along a plateau edge; force shrinkage
            nu = 0.5 * (lo + hi)
            f, w = phi(nu)
            if abs(f) <= xi:
                return w
            if f > 0.0:
                lo, f_lo = nu, f
            else:
                hi, f_hi = nu, f
    raise NumericalFailureError("secant iteration budget exhausted", bracket=(lo, hi))


# ---------------------------------------------------------------------------
# cascades


def _accept_tol(lam_kappa: float, wz: float) -> float:
    return _ACCEPT_RTOL * (1.0 + abs(lam_kappa) + abs(wz))


_GOLDEN = 0.5 * (3.0 - np.sqrt(5.0))


def _apex_optimal_l2(z, w_bar, lam_bar, alpha, kappa, U, V) -> bool:
    # (0, 0) minimizes the two-piece prox iff some piece weight theta in
    # [0, 1] puts the negated (sub)gradient inside the cone's polar:
    # ||(U/a)w_bar - (2*theta - 1)z||_2 + theta*kappa + (V/a)lam_bar <= 0.
    # The left side is convex in theta; golden-section suffices.
    v0 = (U / alpha) * w_bar + z
    t0 = (V / alpha) * lam_bar

    def h(th):
        u = v0 - (2.0 * th) * z
        return float(np.linalg.norm(u)) + t0 + th * kappa

    lo, hi = 0.0, 1.0
    x1 = lo + _GOLDEN * (hi - lo)
    x2 = hi - _GOLDEN * (hi - lo)
    f1, f2 = h(x1), h(x2)
    for _ in range(90):
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = lo + _GOLDEN * (hi - lo)
            f1 = h(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = hi - _GOLDEN * (hi - lo)
            f2 = h(x2)
    hmin = min(f1, f2, h(lo), h(hi))
    scale = 1.0 + float(np.linalg.norm(v0)) + abs(t0) + kappa
    return hmin <= 1e-9 * scale


def _weight_ok(sigma: float) -> bool:
    return -1e-9 <= sigma <= 1.0 + 1e-9


def _is_apex(w, lam, scale) -> bool:
    return abs(lam) <= 1e-11 * scale and float(np.abs(w).max(initial=0.0)) <= 1e-11 * scale


def _prox_l2_raw(z, w_bar, lam_bar, alpha, kappa, U, V, diag=None):
    # single-piece patterns: projections of piece-shifted centers
    w, lam = _wproj_l2(w_bar + (alpha / U) * z, lam_bar, U, V)
    wz, lk = float(w @ z), lam * kappa
    if wz <= min(0.5 * lk, 1.0) + _accept_tol(lk, wz):
        return w, lam
    w, lam = _wproj_l2(w_bar - (alpha / U) * z, lam_bar + (alpha / V) * kappa, U, V)
    wz, lk = float(w @ z), lam * kappa
    if wz >= max(0.5 * lk, lk - 1.0) - _accept_tol(lk, wz):
        return w, lam
    w, lam = _wproj_l2(w_bar, lam_bar, U, V)
    wz, lk = float(w @ z), lam * kappa
    tol = _accept_tol(lk, wz)
    if 1.0 - tol <= wz <= lk - 1.0 + tol and lk >= 2.0 - tol:
        return w, lam
    # Two-piece patterns via the equality-constrained KKT system.  The
    # equality multiplier must also encode a convex piece weight, otherwise
    # the candidate solves the wrong relaxation: sigma2 = mu1/(2a) for the
    # (1,2) tie, sigma1 = -mu1/a for (1,3), sigma2 = mu1/a for (2,3).
    res = ppa_l2(w_bar + (alpha / U) * z, lam_bar, z, 0.5 * kappa, 0.0, U, V)
    if res is not None:
        pt, kkt = res
        w, lam = pt.as_tuple()
        wz, lk = float(w @ z), lam * kappa
        tol = _accept_tol(lk, wz)
        if _is_apex(w, lam, 1.0 + abs(lam_bar)):
            # the reconstruction formulas assume a smooth boundary point
            dual_ok = _apex_optimal_l2(z, w_bar, lam_bar, alpha, kappa, U, V)
        else:
            dual_ok = _weight_ok(kkt.mu1 / (2.0 * alpha))
        if dual_ok and lk - 1.0 - tol <= wz <= 1.0 + tol and lk <= 2.0 + tol:
            return w, lam
    res = ppa_l2(w_bar, lam_bar, z, 0.0, 1.0, U, V)
    if res is not None:
        pt, kkt = res
        w, lam = pt.as_tuple()
        wz, lk = float(w @ z), lam * kappa
        tol = _accept_tol(lk, wz)
        if (_weight_ok(-kkt.mu1 / alpha)
                and wz <= min(0.5 * lk, lk - 1.0) + tol and lk >= 2.0 - tol):
            return w, lam
    res = ppa_l2(w_bar, lam_bar, z, kappa, -1.0, U, V)
    if res is not None:
        pt, kkt = res
        w, lam = pt.as_tuple()
        wz, lk = float(w @ z), lam * kappa
        tol = _accept_tol(lk, wz)
        if (_weight_ok(kkt.mu1 / alpha)
                and wz >= max(0.5 * lk, 1.0) - tol and lk >= 2.0 - tol):
            return w, lam
    # all three pieces active: lam is pinned at 2/kappa
    if kappa == 0.0:
        raise DegenerateKappaError("triple-active case needs 2/kappa but kappa = 0")
    lam = (0.5 * kappa) if _inject_fault == "case5-lambda" else (2.0 / kappa)
    try:
        w = ball_hyperplane_l2(1.0, 2.0 / kappa, w_bar, z)
    except (InfeasibleSubproblemError, ValueError) as exc:
        raise CascadeError(f"no case accepted (final ball/hyperplane step: {exc})") from exc
    return w, lam


def _prox_l1q_raw(z, w_bar, lam_bar, alpha, kappa, U, V, q):
    # Case 1: pieces 1 and 3 inactive
    w, lam = _wproj(q, w_bar - (alpha / U) * z, lam_bar + (alpha / V) * kappa, U, V)
    wz, lk = float(w @ z), lam * kappa
    if wz >= max(lk - 1.0, 0.5 * lk) - _accept_tol(lk, wz):
        return w, lam
    # Case 2: piece 1 active, piece 3 inactive.  The tie constraint h2 <= h1
    # reads w'(2z) <= kappa*lam + 0; passing its gradient form keeps the
    # multiplier equal to the piece-2 weight, so sigma* in [0, 1] covers the
    # whole tie range (with (z, kappa/2) it only reaches weight 1/2).
    res = _msa_raw(w_bar + (alpha / U) * z, lam_bar, 2.0 * z, kappa, 0.0, _MSA_XI, alpha, U, V, q)
    if res is not None:
        w, lam, _ = res
        wz = float(w @ z)
        if wz <= 1.0 + _accept_tol(lam * kappa, wz):
            return w, lam
    # Case 3: piece 1 inactive, piece 3 active
    res = _msa_raw(w_bar, lam_bar, z, kappa, -1.0, _MSA_XI, alpha, U, V, q)
    if res is not None:
        w, lam, _ = res
        wz = float(w @ z)
        if wz >= 1.0 - _accept_tol(lam * kappa, wz):
            return w, lam
    # Case 4: piece 2 inactive, piece 3 active
    res = _msa_raw(w_bar, lam_bar, -z, 0.0, -1.0, _MSA_XI, alpha, U, V, q)
    if res is not None:
        w, lam, _ = res
        lk = lam * kappa
        if lk >= 2.0 - _accept_tol(lk, float(w @ z)):
            return w, lam
    # Case 5: all pieces active
    if kappa == 0.0:
        raise DegenerateKappaError("triple-active case needs 2/kappa but kappa = 0")
    lam = (0.5 * kappa) if _inject_fault == "case5-lambda" else (2.0 / kappa)
    try:
        w = equality_ball_projection(w_bar, z, 1.0, 2.0 / kappa, q)
    except (InfeasibleSubproblemError, ValueError) as exc:
        raise CascadeError(f"no case accepted (final equality/ball step: {exc})") from exc
    return w, lam


def prox_point_l2(inst: ProxInstance) -> ConePoint:
    """Exact single-sample prox update for q = 2."""
    if inst.q != 2:
        raise ValueError("prox_point_l2 requires q = 2")
    w, lam = _prox_l2_raw(
        np.asarray(inst.z, dtype=float), np.asarray(inst.w_bar, dtype=float),
        float(inst.lam_bar), inst.alpha, inst.kappa, inst.weight_w, inst.weight_lam,
    )
    return ConePoint(w, lam)


def prox_point_l1(inst: ProxInstance) -> ConePoint:
    """Exact single-sample prox update for q = 1."""
    if inst.q != 1:
        raise ValueError("prox_point_l1 requires q = 1")
    w, lam = _prox_l1q_raw(
        np.asarray(inst.z, dtype=float), np.asarray(inst.w_bar, dtype=float),
        float(inst.lam_bar), inst.alpha, inst.kappa, inst.weight_w, inst.weight_lam, 1,
    )
    return ConePoint(w, lam)


def prox_point_linf(inst: ProxInstance) -> ConePoint:
    """Exact single-sample prox update for q = inf."""
    if inst.q != np.inf:
        raise ValueError("prox_point_linf requires q = inf")
    w, lam = _prox_l1q_raw(
        np.asarray(inst.z, dtype=float), np.asarray(inst.w_bar, dtype=float),
        float(inst.lam_bar), inst.alpha, inst.kappa, inst.weight_w, inst.weight_lam, np.inf,
    )
    return ConePoint(w, lam)


def prox_point(inst: ProxInstance) -> ConePoint:
    if inst.q == 1:
        return prox_point_l1(inst)
    if inst.q == 2:
        return prox_point_l2(inst)
    return prox_point_linf(inst)


def rescale_for_c(inst: ProxInstance, c: float) -> ProxInstance:
    """Fold a (c/2)||w||^2 regularizer into the prox weights.

    (c/2)||w||^2 + (U/2a)||w - w_bar||^2 equals, up to a constant,
    ((U + a*c)/2a)||w - U*w_bar/(U + a*c)||^2, so the c > 0 update is the
    c = 0 update with a heavier w-block weight and a shrunk w-center; kappa,
    lam_bar and the cone are untouched and the solution maps back as-is.
    """
    if c < 0:
        raise ValueError("c must be nonnegative")
    if c == 0:
        return inst
    scaled = inst.weight_w + inst.alpha * c
    return dataclasses.replace(
        inst,
        w_bar=np.asarray(inst.w_bar, dtype=float) * (inst.weight_w / scaled),
        weight_w=scaled,
    )
