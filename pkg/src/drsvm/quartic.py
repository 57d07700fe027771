"""Closed-form real-root solvers for polynomials up to degree four.

Ferrari's method with a resolvent cubic, followed by Newton polish on the
original polynomial.  Near-zero leading coefficients trigger degree
reduction so callers can pass degenerate quartics directly.
"""
from __future__ import annotations

import math

__all__ = ["solve_quartic_real_roots"]

_COLLAPSE = 1e-12  # relative threshold for treating a leading coefficient as zero


def _poly_eval(coeffs, x: float) -> float:
    acc = 0.0
    for c in coeffs:
        acc = acc * x + c
    return acc


def _newton_polish(coeffs, x: float, steps: int = 24) -> float:
    # near-double roots converge only linearly, so allow many steps but
    # keep the best iterate in case a step overshoots past the pair
    n = len(coeffs) - 1
    deriv = [c * (n - i) for i, c in enumerate(coeffs[:-1])]
    best, best_val = x, abs(_poly_eval(coeffs, x))
    for _ in range(steps):
        fp = _poly_eval(deriv, x)
        if fp == 0.0:
            break
        step = _poly_eval(coeffs, x) / fp
        x -= step
        val = abs(_poly_eval(coeffs, x))
        if val < best_val:
            best, best_val = x, val
        if abs(step) <= 1e-15 * (1.0 + abs(x)):
            break
    return best


def _real_roots_quadratic(a: float, b: float, c: float) -> list[float]:
    if a == 0.0:
        return [] if b == 0.0 else [-c / b]
    disc = b * b - 4.0 * a * c
    scale = b * b + abs(4.0 * a * c)
    if disc < -1e-12 * max(scale, 1.0):
        return []
    if disc < 0.0:
        disc = 0.0
    # citardauq form avoids cancellation for the small-magnitude root
    sq = math.sqrt(disc)
    qq = -0.5 * (b + math.copysign(sq, b)) if b != 0.0 else 0.5 * sq
    if qq == 0.0:
        return [0.0] if disc == 0.0 else [sq / (2 * a), -sq / (2 * a)]
    r1 = qq / a
    r2 = c / qq
    return [r1] if disc == 0.0 else [r1, r2]


def _real_roots_cubic(a: float, b: float, c: float, d: float) -> list[float]:
    # depressed form t^3 + p t + q with x = t - b/(3a)
    b, c, d = b / a, c / a, d / a
    shift = b / 3.0
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if disc > 0.0:
        u = -q / 2.0 + math.sqrt(disc)
        v = -q / 2.0 - math.sqrt(disc)
        t = math.copysign(abs(u) ** (1 / 3), u) + math.copysign(abs(v) ** (1 / 3), v)
        roots = [t - shift]
    elif p == 0.0 and q == 0.0:
        roots = [-shift]
    else:
        # three real roots; trigonometric form needs p < 0 here
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * m)
        arg = min(1.0, max(-1.0, arg))
        theta = math.acos(arg) / 3.0
        roots = [m * math.cos(theta - 2.0 * math.pi * k / 3.0) - shift for k in range(3)]
    return roots


def solve_quartic_real_roots(p1: float, p2: float, p3: float, p4: float, p5: float) -> list[float]:
    """All real roots of p1*u^4 + p2*u^3 + p3*u^2 + p4*u + p5.

    Roots come back ascending, each reported once.  Returns [] when no real
    root exists.
    Each returned root u satisfies |poly(u)| <= 1e-8 * max(1, sum|p_i||u|^deg).
    """
    coeffs = [float(p1), float(p2), float(p3), float(p4), float(p5)]
    top = max(abs(c) for c in coeffs)
    if top == 0.0:
        raise ValueError("all coefficients are zero")
    coeffs = [c / top for c in coeffs]

    # degree collapse
    while len(coeffs) > 1 and abs(coeffs[0]) <= _COLLAPSE:
        coeffs = coeffs[1:]
    deg = len(coeffs) - 1
    if deg == 0:
        return []
    if deg == 1:
        raw = [-coeffs[1] / coeffs[0]]
    elif deg == 2:
        raw = _real_roots_quadratic(*coeffs)
    elif deg == 3:
        raw = _real_roots_cubic(*coeffs)
    else:
        raw = _ferrari(coeffs)

    out: list[float] = []
    for r in raw:
        r = _newton_polish(coeffs, r)
        scale = max(1.0, sum(abs(c) * abs(r) ** (deg - i) for i, c in enumerate(coeffs)))
        if abs(_poly_eval(coeffs, r)) > 1e-8 * scale:
            continue
        if not any(abs(r - o) <= 1e-9 * (1.0 + abs(o)) for o in out):
            out.append(r)
    out.sort()
    return out


def _ferrari(coeffs) -> list[float]:
    _, b, c, d, e = (coeffs[0],) + tuple(x / coeffs[0] for x in coeffs[1:])
    # depressed quartic y^4 + p y^2 + q y + r with u = y - b/4
    shift = b / 4.0
    p = c - 3.0 * b * b / 8.0
    q = d - b * c / 2.0 + b**3 / 8.0
    r = e - b * d / 4.0 + b * b * c / 16.0 - 3.0 * b**4 / 256.0

    qscale = max(1.0, abs(p), abs(r))
    if abs(q) <= 1e-14 * qscale:
        # biquadratic
        ys: list[float] = []
        us = _real_roots_quadratic(1.0, p, r)
        if not us and p < 0.0:
            us = [-p / 2.0]  # vertex; polish recovers near-double pairs
        for u in us:
            if u > 0.0:
                ys.extend([math.sqrt(u), -math.sqrt(u)])
            elif u > -1e-12 * qscale:
                ys.append(0.0)
        return [y - shift for y in ys]

    # resolvent cubic 8m^3 + 8p m^2 + (2p^2 - 8r) m - q^2 = 0 has a positive
    # real root when q != 0; take the largest so sqrt(2m) is well scaled
    ms = [m for m in _real_roots_cubic(8.0, 8.0 * p, 2.0 * p * p - 8.0 * r, -q * q) if m > 0.0]
    if not ms:
        return []
    # the factor constants below cancel to near zero when the quartic has a
    # close real pair, so the cubic root needs full accuracy; polish it on
    # the undepressed resolvent where evaluation is cancellation-free
    m = max(ms)
    lin = 2.0 * p * p - 8.0 * r
    for _ in range(8):
        f = ((8.0 * m + 8.0 * p) * m + lin) * m - q * q
        fp = (24.0 * m + 16.0 * p) * m + lin
        if fp == 0.0:
            break
        step = f / fp
        if m - step <= 0.0:
            break
        m -= step
        if abs(step) <= 1e-15 * (1.0 + abs(m)):
            break
    s2 = math.sqrt(2.0 * m)
    bq = q / (4.0 * m)  # the factorization is (y^2 -+ s2*y + (p/2 + m +- s2*bq))
    ys: list[float] = []
    for sb, cq in ((-s2, p / 2.0 + m + s2 * bq), (s2, p / 2.0 + m - s2 * bq)):
        rs = _real_roots_quadratic(1.0, sb, cq)
        if not rs:
            # a real pair rounded to negative discriminant sits within
            # polish range of the vertex; complex pairs fail the residual
            # gate downstream, so the extra candidate is harmless
            rs = [-0.5 * sb]
        ys += rs
    return [y - shift for y in ys]
