"""Euclidean projections onto the norm cones L_q = {(w, lam): ||w||_q <= lam}.

The l2 projection is a three-branch closed form.  The l1 projection reduces
to a univariate piecewise-linear root-finding problem over the breakpoints
{|x_i|}, solved in expected linear time by quick-select partitioning (a
sort-based path is kept for differential testing).  The l-infinity
projection follows from the Moreau decomposition against the l1 cone.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConePoint",
    "proj_cone_l2",
    "proj_cone_l1",
    "proj_cone_linf",
    "cone_norm",
    "set_l1_root_strategy",
    "l1_root_work",
    "reset_l1_root_work",
]


@dataclass(frozen=True)
class ConePoint:
    """A pair (w, lam); feasible for q when ||w||_q <= lam."""

    w: np.ndarray
    lam: float

    def as_tuple(self) -> tuple[np.ndarray, float]:
        return self.w, self.lam


def cone_norm(w: np.ndarray, q: float) -> float:
    if q == 1:
        return float(np.sum(np.abs(w)))
    if q == 2:
        return float(np.linalg.norm(w))
    if q == np.inf:
        return float(np.max(np.abs(w))) if w.size else 0.0
    raise ValueError(f"unsupported norm selector q={q!r}")


# ---------------------------------------------------------------------------
# piecewise-linear root finder shared by the l1/l-infinity paths
#
# Solves F(t) = sum_i max(a_i - t, 0) - beta*t - gamma = 0 for its unique
# root, given a_i >= 0, beta > 0 and F(0) > 0.  F is strictly decreasing
# where it matters, so the root exists and is positive.

_l1_strategy = "quickselect"
_l1_work = 0


def set_l1_root_strategy(name: str) -> None:
    """Select 'quickselect' (default) or 'sort' for the l1 root search."""
    global _l1_strategy
    if name not in ("quickselect", "sort"):
        raise ValueError(f"unknown l1 root strategy {name!r}")
    _l1_strategy = name


def l1_root_work() -> int:
    """Breakpoints examined by the quick-select path since the last reset."""
    return _l1_work


def reset_l1_root_work() -> None:
    global _l1_work
    _l1_work = 0


def _piecewise_root_quickselect(a: np.ndarray, beta: float, gamma: float) -> float:
    global _l1_work
    cand = a
    n_hi = 0
    s_hi = 0.0
    while cand.size:
        _l1_work += cand.size
        # median-of-three pivot over first/middle/last; deterministic so the
        # work counter (and run timing) is reproducible
        if cand.size >= 3:
            c0, c1, c2 = cand[0], cand[cand.size // 2], cand[-1]
            pivot = max(min(c0, c1), min(max(c0, c1), c2))
        else:
            pivot = cand[0]
        hi = cand[cand > pivot]
        f_pivot = s_hi + hi.sum() - (n_hi + hi.size) * pivot - beta * pivot - gamma
        if f_pivot > 0.0:
            # root above the pivot: everything <= pivot is inactive there
            cand = hi
        elif f_pivot < 0.0:
            # root below the pivot: everything >= pivot stays active
            ge = cand[cand >= pivot]
            n_hi += ge.size
            s_hi += ge.sum()
            cand = cand[cand < pivot]
        else:
            return float(pivot)
    return (s_hi - gamma) / (n_hi + beta)


def _piecewise_root_sort(a: np.ndarray, beta: float, gamma: float) -> float:
    srt = np.sort(a)[::-1]
    css = np.cumsum(srt)
    # F at the k-th breakpoint (top-k strictly above): css[k-1] - k*t - beta*t - gamma
    f_at = css - (np.arange(1, a.size + 1) + beta) * srt - gamma
    k = int(np.searchsorted(f_at, 0.0, side="left"))
    # root sits on the segment where the top-k entries are active
    if k == 0:
        return -gamma / beta
    return (css[k - 1] - gamma) / (k + beta)


def _piecewise_root(a: np.ndarray, beta: float, gamma: float) -> float:
    if _l1_strategy == "sort":
        return _piecewise_root_sort(a, beta, gamma)
    return _piecewise_root_quickselect(a, beta, gamma)


# ---------------------------------------------------------------------------
# public projections


def proj_cone_l2(x: np.ndarray, s: float) -> ConePoint:
    """Project (x, s) onto {(w, lam): ||w||_2 <= lam}."""
    w, lam = _proj_l2_raw(np.asarray(x, dtype=float), float(s))
    return ConePoint(w, lam)


def _proj_l2_raw(x: np.ndarray, s: float) -> tuple[np.ndarray, float]:
    nx = float(np.linalg.norm(x))
    if nx <= s:
        return x.copy(), s
    if nx <= -s:
        return np.zeros_like(x), 0.0
    t = 0.5 * (nx + s)
    return (t / nx) * x, t


def proj_cone_l1(x: np.ndarray, s: float) -> ConePoint:
    """Project (x, s) onto {(w, lam): ||w||_1 <= lam}."""
    w, lam = _proj_l1_raw(np.asarray(x, dtype=float), float(s))
    return ConePoint(w, lam)


def _proj_l1_raw(x: np.ndarray, s: float) -> tuple[np.ndarray, float]:
    ax = np.abs(x)
    if ax.sum() <= s:
        return x.copy(), s
    tau = _piecewise_root(ax, 1.0, s)
    w = np.sign(x) * np.maximum(ax - tau, 0.0)
    # t = tau + s equals ||w||_1 at the root; clamp pure-rounding defects
    t = tau + s
    n1 = float(np.abs(w).sum())
    if t < n1:
        t = n1
    return w, t


def proj_cone_linf(x: np.ndarray, s: float) -> ConePoint:
    """Project (x, s) onto {(w, lam): ||w||_inf <= lam} via Moreau."""
    w, lam = _proj_linf_raw(np.asarray(x, dtype=float), float(s))
    return ConePoint(w, lam)


def _proj_linf_raw(x: np.ndarray, s: float) -> tuple[np.ndarray, float]:
    # (x, s) = proj_cone(x, s) + proj_polar(x, s), and the polar of the
    # l-infinity cone is the negated l1 cone
    pw, pl = _proj_l1_raw(-x, -s)
    return x + pw, s + pl
