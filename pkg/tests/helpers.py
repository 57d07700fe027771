"""Independent reference solutions for cross-checking, via cvxpy/CLARABEL."""
import cvxpy as cp
import numpy as np


def sharp_orthogonal_instance(seed=11, d=20, copies=10):
    """Synthetic instance whose minimum is a sharp polyhedral vertex with a
    closed-form optimum.

    Each coordinate j is pinned by `copies` samples z = a_j e_j; kappa is
    chosen so the piece-1 and piece-2 hinge kinks coincide at w_j = 1/a_j,
    and epsilon is small enough that the stationarity multipliers are
    strictly interior.  Then w*_j = 1/a_j, lam* = sum_j 1/a_j and
    f* = epsilon * lam* exactly.

    Returns (z_matrix, kappa, epsilon, w_star, lam_star, f_star).
    """
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.9, 1.1, size=d)
    Z = np.zeros((d * copies, d))
    for j in range(d):
        Z[j * copies : (j + 1) * copies, j] = a[j]
    Z = Z[rng.permutation(d * copies)]
    lam_star = float(np.sum(1.0 / a))
    kappa = 2.0 / lam_star
    epsilon = 0.04
    return Z, kappa, epsilon, 1.0 / a, lam_star, epsilon * lam_star


def cone_constraint(w, lam, q):
    if q == 1:
        return cp.norm1(w) <= lam
    if q == 2:
        return cp.norm2(w) <= lam
    return cp.norm_inf(w) <= lam


def cvx_prox_min(inst, c=0.0):
    """Reference optimum of the single-sample prox subproblem."""
    w = cp.Variable(inst.z.shape[0])
    lam = cp.Variable()
    hinge = cp.maximum(1 - w @ inst.z, 1 + w @ inst.z - lam * inst.kappa, 0)
    quad = (
        inst.weight_w * cp.sum_squares(w - inst.w_bar)
        + inst.weight_lam * cp.square(lam - inst.lam_bar)
    ) / (2 * inst.alpha)
    prob = cp.Problem(
        cp.Minimize(hinge + quad + 0.5 * c * cp.sum_squares(w)),
        [cone_constraint(w, lam, inst.q)],
    )
    prob.solve(solver=cp.CLARABEL)
    assert prob.status in ("optimal", "optimal_inaccurate"), prob.status
    return float(prob.value)


def cvx_equality_min(w_bar, lam_bar, z, a, b, U, V, q=2):
    """Reference for the equality-tied weighted projection; None if infeasible."""
    w = cp.Variable(len(w_bar))
    lam = cp.Variable()
    obj = U * cp.sum_squares(w - w_bar) + V * cp.square(lam - lam_bar)
    prob = cp.Problem(
        cp.Minimize(obj), [w @ z == a * lam + b, cone_constraint(w, lam, q)]
    )
    prob.solve(solver=cp.CLARABEL)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        return None
    return float(prob.value), np.asarray(w.value), float(lam.value)


def cvx_ball_hyperplane_min(w_bar, z, rhs, radius, q=2):
    w = cp.Variable(len(w_bar))
    norm = {1: cp.norm1, 2: cp.norm2, np.inf: cp.norm_inf}[q]
    prob = cp.Problem(
        cp.Minimize(cp.sum_squares(w - w_bar)), [w @ z == rhs, norm(w) <= radius]
    )
    prob.solve(solver=cp.CLARABEL)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        return None
    return float(prob.value), np.asarray(w.value)


def cvx_drsvm_min(Z, q, c, kappa, epsilon):
    """Reference optimum of the full finite-sum problem."""
    n, d = Z.shape
    w = cp.Variable(d)
    lam = cp.Variable()
    hinge = cp.sum(
        cp.maximum(1 - Z @ w, 1 + Z @ w - lam * kappa, np.zeros(n))
    ) / n
    prob = cp.Problem(
        cp.Minimize(lam * epsilon + hinge + 0.5 * c * cp.sum_squares(w)),
        [cone_constraint(w, lam, q)],
    )
    prob.solve(solver=cp.CLARABEL)
    assert prob.status in ("optimal", "optimal_inaccurate"), prob.status
    return float(prob.value)
