"""Command-line interface: solve DRSVM instances, generate synthetic data,
run schedule grid benchmarks, and self-certify the solvers on randomized
property suites.

stdout carries machine-readable output only (JSON results, CSV leaderboards,
PASS/FAIL report lines); diagnostics go to stderr.  Exit codes: 0 success,
1 property failure (check), 2 configuration error, 3 data error, 4 numerical
failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .data import (
    DataError,
    ParseError,
    Sample,
    _gen_raw,
    gen_synthetic,
    load_dataset,
    write_libsvm,
)
from .epigraph import ConePoint, cone_norm, proj_cone_l1, proj_cone_l2, proj_cone_linf
from .oracles import kkt_residual, oracle_prox_subgradient
from .solver import (
    Constant,
    Geometric,
    Iterate,
    PolyHarmonic,
    PolySqrt,
    PRESETS,
    ProblemConfig,
    SwitchRule,
    objective,
    run_hybrid,
    run_ippa,
    run_isg,
)
from .subproblems import (
    CascadeError,
    DegenerateKappaError,
    InfeasibleSubproblemError,
    KktPair,
    NumericalFailureError,
    ProxInstance,
    msa_secant,
    p_sigma,
    prox_objective,
    prox_point,
    rescale_for_c,
    set_fault_injection,
)

EXIT_OK = 0
EXIT_PROPERTY = 1
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

_NUMERIC_ERRORS = (
    DegenerateKappaError,
    InfeasibleSubproblemError,
    NumericalFailureError,
    CascadeError,
    FloatingPointError,
)


def _parse_q(text: str):
    if text == "1":
        return 1
    if text == "2":
        return 2
    if text in ("inf", "Inf", "INF"):
        return np.inf
    raise argparse.ArgumentTypeError(f"q must be 1, 2 or inf, got {text!r}")


def _q_repr(q) -> str:
    return "inf" if q == np.inf else str(int(q))


def parse_schedule(text: str):
    """Schedule spec: geometric:A0,RHO | polyharmonic:G | polysqrt:G | constant:A."""
    kind, _, rest = text.partition(":")
    try:
        vals = [float(v) for v in rest.split(",")] if rest else []
        if kind == "geometric" and len(vals) == 2:
            return Geometric(vals[0], vals[1])
        if kind == "polyharmonic" and len(vals) == 1:
            return PolyHarmonic(vals[0])
        if kind == "polysqrt" and len(vals) == 1:
            return PolySqrt(vals[0])
        if kind == "constant" and len(vals) == 1:
            return Constant(vals[0])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad schedule {text!r}: {exc}") from exc
    raise argparse.ArgumentTypeError(
        f"bad schedule {text!r}; expected geometric:A0,RHO | polyharmonic:G"
        " | polysqrt:G | constant:A"
    )


def _schedule_repr(s) -> str:
    if isinstance(s, Geometric):
        return f"geometric:{s.alpha0!r},{s.rho!r}"
    if isinstance(s, PolyHarmonic):
        return f"polyharmonic:{s.gamma!r}"
    if isinstance(s, PolySqrt):
        return f"polysqrt:{s.gamma!r}"
    return f"constant:{s.alpha!r}"


def _parse_synthetic(text: str) -> dict:
    spec = {}
    for part in text.split(","):
        key, _, val = part.partition("=")
        if key not in ("n", "d", "sigma") or not val:
            raise argparse.ArgumentTypeError(
                f"bad synthetic spec {text!r}; expected n=N,d=D,sigma=S"
            )
        spec[key] = val
    try:
        return {
            "n": int(spec.get("n", 0)),
            "d": int(spec.get("d", 0)),
            "sigma": float(spec.get("sigma", 0.5)),
        }
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad synthetic spec {text!r}: {exc}") from exc


def _resolve_seed(seed: int) -> int:
    env = os.environ.get("DRSVM_SEED")
    if env is None:
        return seed
    try:
        return int(env)
    except ValueError:
        raise ValueError(f"DRSVM_SEED must be an integer, got {env!r}")


def _load_problem_data(args, seed):
    """Dataset from --data or --synthetic; (dataset, source descriptor)."""
    if args.data is not None:
        ds = load_dataset(args.data, getattr(args, "d", None))
        return ds, {"data": str(args.data)}
    spec = args.synthetic
    if spec is None:
        raise ValueError("need --data or --synthetic")
    if spec["n"] < 1 or spec["d"] < 1 or spec["sigma"] < 0:
        raise ValueError("synthetic spec needs n >= 1, d >= 1, sigma >= 0")
    ds, _ = gen_synthetic(spec["n"], spec["d"], spec["sigma"], seed=seed)
    return ds, {"synthetic": spec, "seed": seed}


def _pick_schedules(args, q):
    preset = PRESETS[q]
    isg = args.isg_schedule or args.schedule or preset["isg_schedule"]
    ippa = args.ippa_schedule or args.schedule or preset["ippa_schedule"]
    batch = args.batch_size if args.batch_size is not None else preset["batch_size"]
    return isg, ippa, batch


def _run_algo(ds, cfg, args, seed):
    isg_sched, ippa_sched, batch = _pick_schedules(args, cfg.q)
    common = dict(
        epochs=args.epochs,
        seed=seed,
        stall_tol=args.stall_tol,
        shuffle=args.shuffle,
        target_objective=args.target,
    )
    if args.algo == "isg":
        return run_isg(ds, cfg, isg_sched, batch_size=batch, **common)
    if args.algo == "ippa":
        return run_ippa(ds, cfg, ippa_sched, **common)
    rule = SwitchRule(
        max_isg_epochs=args.switch_epochs if args.switch_epochs is not None
        else args.epochs // 2,
        window=args.switch_window,
        rel_improvement=args.switch_improvement,
    )
    return run_hybrid(
        ds, cfg, isg_sched, ippa_sched, batch_size=batch, switch_rule=rule, **common
    )


def cmd_solve(args) -> int:
    try:
        seed = _resolve_seed(args.seed)
        cfg = ProblemConfig(q=args.q, c=args.c, kappa=args.kappa, epsilon=args.epsilon)
        if args.epochs < 0 or (args.batch_size is not None and args.batch_size < 1):
            raise ValueError("epochs must be >= 0 and batch-size >= 1")
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        ds, source = _load_problem_data(args, seed)
    except (ParseError, DataError, OSError) as exc:
        if args.data is None:
            print(f"configuration error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        point, trace = _run_algo(ds, cfg, args, seed)
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NUMERIC_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    isg_sched, ippa_sched, batch = _pick_schedules(args, cfg.q)
    result = {
        "algo": args.algo,
        "source": source,
        "q": _q_repr(cfg.q),
        "c": cfg.c,
        "kappa": cfg.kappa,
        "epsilon": cfg.epsilon,
        "isg_schedule": _schedule_repr(isg_sched),
        "ippa_schedule": _schedule_repr(ippa_sched),
        "batch_size": batch,
        "seed": seed,
        "objective": objective(ds, cfg, point),
        "lam": point.lam,
        "w": [float(v) for v in point.w],
        "status": trace.status,
        "epochs_run": len(trace.records),
        "switch_epoch": trace.switch_epoch,
    }
    text = json.dumps(result, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    if args.trace:
        Path(args.trace).write_text(trace.to_csv(), encoding="utf-8")
    return EXIT_OK


def cmd_gen(args) -> int:
    try:
        seed = _resolve_seed(args.seed)
        if args.n < 1 or args.d < 1 or args.sigma < 0:
            raise ValueError("gen needs n >= 1, d >= 1, sigma >= 0")
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    X, y, w_star = _gen_raw(args.n, args.d, args.sigma, seed)
    samples = [
        Sample(label=int(y[i]), features={j + 1: float(X[i, j]) for j in range(args.d)})
        for i in range(args.n)
    ]
    meta_path = Path(str(args.out) + ".meta.json")
    try:
        write_libsvm(samples, args.out)
        meta = {
            "n": args.n,
            "d": args.d,
            "sigma": args.sigma,
            "seed": seed,
            "w_star": [float(v) for v in w_star],
        }
        meta_path.write_text(json.dumps(meta, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    print(json.dumps({"data": str(args.out), "meta": str(meta_path)}, sort_keys=True))
    return EXIT_OK


# --- bench -----------------------------------------------------------------

_CELL_KEYS = {"algo", "schedule", "isg_schedule", "ippa_schedule", "batch_size",
              "switch_epochs"}


def _expand_grid(spec) -> list[dict]:
    if isinstance(spec, list):
        cells = spec
    elif isinstance(spec, dict):
        keys = list(spec)
        if not keys:
            raise ValueError("grid spec is empty")
        for k in keys:
            if not isinstance(spec[k], list):
                raise ValueError(f"grid field {k!r} must be a list")
        cells = [{}]
        for k in keys:
            cells = [dict(c, **{k: v}) for c in cells for v in spec[k]]
    else:
        raise ValueError("grid spec must be a JSON list of cells or dict of lists")
    if not cells:
        raise ValueError("grid spec is empty")
    for cell in cells:
        if not isinstance(cell, dict):
            raise ValueError("each grid cell must be an object")
        unknown = set(cell) - _CELL_KEYS
        if unknown:
            raise ValueError(f"unknown grid cell fields: {sorted(unknown)}")
        algo = cell.get("algo", "ippa")
        if algo not in ("isg", "ippa", "hybrid"):
            raise ValueError(f"unknown algo {algo!r}")
        # validate schedule specs eagerly so a bad grid fails before any run
        for key in ("schedule", "isg_schedule", "ippa_schedule"):
            if key in cell:
                parse_schedule(cell[key])
        if "batch_size" in cell and int(cell["batch_size"]) < 1:
            raise ValueError("batch_size must be >= 1")
    return cells


def _bench_worker(payload: dict) -> dict:
    cell = payload["cell"]
    q = _parse_q(payload["q"])
    if payload["data"] is not None:
        ds = load_dataset(payload["data"], payload["dim"])
    else:
        spec = payload["synthetic"]
        ds, _ = gen_synthetic(spec["n"], spec["d"], spec["sigma"], seed=payload["seed"])
    cfg = ProblemConfig(q=q, c=payload["c"], kappa=payload["kappa"],
                        epsilon=payload["epsilon"])
    preset = PRESETS[q]
    algo = cell.get("algo", "ippa")
    base = cell.get("schedule")
    isg_sched = parse_schedule(cell.get("isg_schedule", base) or
                               _schedule_repr(preset["isg_schedule"]))
    ippa_sched = parse_schedule(cell.get("ippa_schedule", base) or
                                _schedule_repr(preset["ippa_schedule"]))
    batch = int(cell.get("batch_size", preset["batch_size"]))
    sched_desc = (cell.get("schedule") or
                  f"{_schedule_repr(isg_sched)}+{_schedule_repr(ippa_sched)}")
    common = dict(epochs=payload["epochs"], seed=payload["seed"],
                  stall_tol=payload["stall_tol"])
    t0 = time.perf_counter()
    try:
        if algo == "isg":
            pt, tr = run_isg(ds, cfg, isg_sched, batch_size=batch, **common)
        elif algo == "ippa":
            pt, tr = run_ippa(ds, cfg, ippa_sched, **common)
        else:
            rule = SwitchRule(cell.get("switch_epochs", payload["epochs"] // 2))
            pt, tr = run_hybrid(ds, cfg, isg_sched, ippa_sched, batch_size=batch,
                                switch_rule=rule, **common)
        obj, status, epochs_run = objective(ds, cfg, pt), tr.status, len(tr.records)
    except _NUMERIC_ERRORS as exc:
        obj, status, epochs_run = float("inf"), f"error:{type(exc).__name__}", 0
    return {
        "algo": algo,
        "schedule": sched_desc,
        "batch_size": batch,
        "objective": obj,
        "wall_ms": (time.perf_counter() - t0) * 1e3,
        "epochs_to_stall": epochs_run,
        "status": status,
    }


def cmd_bench(args) -> int:
    try:
        seed = _resolve_seed(args.seed)
        ProblemConfig(q=args.q, c=args.c, kappa=args.kappa, epsilon=args.epsilon)
        grid_text = Path(args.grid).read_text(encoding="utf-8")
        cells = _expand_grid(json.loads(grid_text))
        if args.jobs < 1 or args.epochs < 0:
            raise ValueError("jobs must be >= 1 and epochs >= 0")
        if args.data is None:
            spec = args.synthetic
            if spec is None or spec["n"] < 1 or spec["d"] < 1 or spec["sigma"] < 0:
                raise ValueError("synthetic spec needs n >= 1, d >= 1, sigma >= 0")
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, argparse.ArgumentTypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    payloads = [
        {
            "cell": cell,
            "data": str(args.data) if args.data is not None else None,
            "dim": args.d,
            "synthetic": args.synthetic,
            "q": _q_repr(args.q),
            "c": args.c,
            "kappa": args.kappa,
            "epsilon": args.epsilon,
            "epochs": args.epochs,
            "seed": seed,
            "stall_tol": args.stall_tol,
        }
        for cell in cells
    ]
    try:
        if args.jobs == 1:
            rows = [_bench_worker(p) for p in payloads]
        else:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                rows = list(pool.map(_bench_worker, payloads))
    except (ParseError, DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    order = sorted(range(len(rows)), key=lambda i: (rows[i]["objective"], i))
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "algo", "schedule", "batch_size", "objective",
                         "wall_ms", "epochs_to_stall", "status"])
        for rank, i in enumerate(order, start=1):
            r = rows[i]
            writer.writerow([rank, r["algo"], r["schedule"], r["batch_size"],
                             repr(r["objective"]), f"{r['wall_ms']:.3f}",
                             r["epochs_to_stall"], r["status"]])
    best = rows[order[0]]
    best_config = {
        "algo": best["algo"],
        "schedule": best["schedule"],
        "batch_size": best["batch_size"],
        "q": _q_repr(args.q),
        "c": args.c,
        "kappa": args.kappa,
        "epsilon": args.epsilon,
        "epochs": args.epochs,
        "seed": seed,
        "objective": best["objective"],
        "status": best["status"],
    }
    print(json.dumps(best_config, sort_keys=True))
    if args.best:
        Path(args.best).write_text(json.dumps(best_config, sort_keys=True) + "\n",
                                   encoding="utf-8")
    return EXIT_OK


# --- check -----------------------------------------------------------------

_PROJ = {1: proj_cone_l1, 2: proj_cone_l2, np.inf: proj_cone_linf}


def _instance_json(inst: ProxInstance, **extra) -> str:
    payload = {
        "z": [float(v) for v in inst.z],
        "w_bar": [float(v) for v in inst.w_bar],
        "lam_bar": inst.lam_bar,
        "alpha": inst.alpha,
        "kappa": inst.kappa,
        "q": _q_repr(inst.q),
        "weight_w": inst.weight_w,
        "weight_lam": inst.weight_lam,
    }
    payload.update(extra)
    return json.dumps(payload, sort_keys=True)


def _random_prox_instance(rng, q) -> ProxInstance:
    d = int(rng.integers(1, 7))
    return ProxInstance(
        z=rng.normal(size=d) * rng.choice([0.3, 1.0, 3.0]),
        w_bar=rng.normal(size=d) * rng.choice([0.3, 1.0, 5.0]),
        lam_bar=float(rng.normal() * rng.choice([0.3, 1.0, 5.0])),
        alpha=float(rng.choice([1e-2, 0.1, 1.0, 10.0])),
        kappa=float(rng.choice([0.0, 0.5, 1.0, 2.0])),
        q=q,
    )


def _check_projections(rng, count):
    for q in (1, 2, np.inf):
        proj = _PROJ[q]
        for _ in range(count):
            d = int(rng.integers(1, 9))
            x = rng.normal(size=d) * rng.choice([0.3, 1.0, 10.0])
            s = float(rng.normal() * rng.choice([0.5, 2.0]))
            u = rng.normal(size=d)
            t = float(rng.normal())
            p = proj(x, s)
            if cone_norm(p.w, q) > p.lam + 1e-12:
                yield "projection-feasibility", (q, x, s)
            p2 = proj(p.w, p.lam)
            if (np.abs(p2.w - p.w).max(initial=0.0) > 1e-12
                    or abs(p2.lam - p.lam) > 1e-12):
                yield "projection-idempotence", (q, x, s)
            pu = proj(u, t)
            lhs = float((p.w - pu.w) @ (p.w - pu.w)) + (p.lam - pu.lam) ** 2
            rhs = float((x - u) @ (x - u)) + (s - t) ** 2
            if lhs > rhs * (1 + 1e-12) + 1e-12:
                yield "projection-nonexpansiveness", (q, x, s)


def _run_check(args, seed) -> int:
    failures = []

    def report(name, bad, detail=""):
        if bad is None:
            print(f"PASS {name}")
        else:
            failures.append(name)
            print(f"FAIL {name} {detail}")

    rng = np.random.default_rng(seed)
    proj_bad = {name: None for name in (
        "projection-feasibility", "projection-idempotence",
        "projection-nonexpansiveness")}
    for name, payload in _check_projections(rng, args.proj_instances):
        if proj_bad[name] is None:
            q, x, s = payload
            proj_bad[name] = json.dumps(
                {"q": _q_repr(q), "x": [float(v) for v in x], "s": s}, sort_keys=True)
    for name in proj_bad:
        report(name, proj_bad[name], proj_bad[name] or "")

    # exact prox never worse than the projected-subgradient oracle
    bad = None
    for q in (1, 2, np.inf):
        for c in (0.0, 1.0):
            for _ in range(args.prox_instances):
                inst = _random_prox_instance(rng, q)
                try:
                    work = rescale_for_c(inst, c) if c > 0 else inst
                    pt = prox_point(work)
                    cand = prox_objective(inst, pt.w, pt.lam, c=c)
                except _NUMERIC_ERRORS as exc:
                    bad = bad or _instance_json(inst, c=c, error=type(exc).__name__)
                    continue
                _, ref = oracle_prox_subgradient(inst, args.oracle_iters, c=c)
                if cand > ref + 1e-6 * (1.0 + abs(ref)):
                    bad = bad or _instance_json(inst, c=c, candidate=cand, oracle=ref)
    report("prox-oracle-equivalence", bad, bad or "")

    # triple-active centers built from stationarity: optimum is (w*, 2/kappa)
    bad = None
    for q in (1, 2, np.inf):
        made = 0
        while made < args.case5_instances:
            d = int(rng.integers(2, 5))
            z = rng.normal(size=d)
            nz = float(z @ z)
            if nz < 0.25:
                continue
            t = rng.normal(size=d)
            t -= ((t @ z) / nz) * z
            w_star = z / nz + 0.1 * t
            if cone_norm(w_star, q) > 1.8:
                continue
            made += 1
            th1, th2 = rng.uniform(0.05, 0.45, size=2)
            inst = ProxInstance(
                z=z, w_bar=w_star + (th2 - th1) * z, lam_bar=2.0 - th2,
                alpha=1.0, kappa=1.0, q=q,
            )
            try:
                pt = prox_point(inst)
            except _NUMERIC_ERRORS as exc:
                bad = bad or _instance_json(inst, error=type(exc).__name__)
                continue
            if (abs(pt.lam - 2.0) > 1e-7
                    or np.abs(pt.w - w_star).max() > 1e-6 * (1 + np.abs(w_star).max())):
                bad = bad or _instance_json(inst, lam=float(pt.lam),
                                            lam_expected=2.0)
    report("case5-lambda", bad, bad or "")

    # p(sigma) non-increasing; secant root in [0,1] and matching bisection
    bad = None
    for _ in range(args.sigma_instances):
        q = rng.choice([1, np.inf])
        inst = _random_prox_instance(rng, q)
        a = float(rng.choice([0.0, inst.kappa, inst.kappa / 2.0]))
        b = float(rng.choice([0.0, 1.0, -1.0]))
        grid = np.linspace(0.0, 1.0, 21)
        vals = [p_sigma(s, inst, a, b)[0] for s in grid]
        if any(v2 > v1 + 1e-10 * (1 + abs(v1)) for v1, v2 in zip(vals, vals[1:])):
            bad = bad or _instance_json(inst, a=a, b=b)
            continue
        if not (vals[0] > 1e-10 and vals[-1] < 0.0):
            continue
        try:
            res = msa_secant(inst.w_bar, inst.lam_bar, inst.z, a, b, 1e-12, inst)
        except _NUMERIC_ERRORS as exc:
            bad = bad or _instance_json(inst, a=a, b=b, error=type(exc).__name__)
            continue
        if res is None:
            bad = bad or _instance_json(inst, a=a, b=b, error="no-root")
            continue
        pt, sigma = res
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if p_sigma(mid, inst, a, b)[0] > 0.0:
                lo = mid
            else:
                hi = mid
        ref = 0.5 * (lo + hi)
        val, ref_pt = p_sigma(ref, inst, a, b)
        same_point = (
            np.abs(pt.w - ref_pt.w).max(initial=0.0)
            <= 1e-7 * (1 + np.abs(ref_pt.w).max(initial=0.0))
            and abs(pt.lam - ref_pt.lam) <= 1e-7 * (1 + abs(ref_pt.lam))
        )
        if not (0.0 <= sigma <= 1.0) or (abs(sigma - ref) > 1e-8 and not same_point):
            bad = bad or _instance_json(inst, a=a, b=b, sigma=float(sigma),
                                        bisection=float(ref))
    report("sigma-monotone-secant", bad, bad or "")

    # cone-interior stationary points (mu2 = 0) must have ~zero KKT residuals
    bad = None
    for _ in range(max(1, args.sigma_instances // 10)):
        d = int(rng.integers(1, 5))
        z = rng.normal(size=d)
        nz = float(z @ z)
        if nz < 1e-3:
            continue
        kappa = float(rng.uniform(0.2, 2.0))
        lam = float(rng.uniform(1.0, 2.0))
        mu1 = float(rng.normal())
        for pattern, a_c, b_c in (((1, 3), 0.0, 1.0), ((2, 3), kappa, -1.0)):
            w = ((a_c * lam + b_c) / nz) * z
            if cone_norm(w, 2) >= lam:
                continue
            inst = ProxInstance(
                z=z, w_bar=w + mu1 * z, lam_bar=lam - a_c * mu1,
                alpha=1.0, kappa=kappa, q=2,
            )
            res = kkt_residual(inst, ConePoint(w, lam), KktPair(mu1, 0.0), pattern)
            if res.max() > 1e-10:
                bad = bad or _instance_json(inst, pattern=list(pattern),
                                            residual=float(res.max()))
    report("kkt-stationary-residual", bad, bad or "")

    return EXIT_PROPERTY if failures else EXIT_OK


def cmd_check(args) -> int:
    try:
        seed = _resolve_seed(args.seed)
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    set_fault_injection(args.inject_fault)
    try:
        return _run_check(args, seed)
    finally:
        set_fault_injection(None)


def _add_problem_flags(p, data_required=True):
    p.add_argument("--data", type=Path, help="LIBSVM dataset path")
    p.add_argument("--synthetic", type=_parse_synthetic, metavar="n=N,d=D,sigma=S",
                   help="generate the dataset instead of reading one")
    p.add_argument("--d", type=int, default=None,
                   help="feature dimension override for --data")
    p.add_argument("--q", type=_parse_q, required=True, help="transport norm: 1, 2 or inf")
    p.add_argument("--c", type=float, default=0.0, help="ridge weight")
    p.add_argument("--kappa", type=float, default=1.0, help="label-flip cost")
    p.add_argument("--epsilon", type=float, default=0.1, help="Wasserstein radius")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drsvm",
        description="Distributionally robust SVM solvers (incremental subgradient,"
                    " proximal point, and hybrid).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="run one algorithm on one dataset")
    _add_problem_flags(ps)
    ps.add_argument("--algo", choices=("isg", "ippa", "hybrid"), required=True)
    ps.add_argument("--schedule", type=parse_schedule, default=None,
                    help="step schedule for both phases (see parse_schedule)")
    ps.add_argument("--isg-schedule", type=parse_schedule, default=None)
    ps.add_argument("--ippa-schedule", type=parse_schedule, default=None)
    ps.add_argument("--batch-size", type=int, default=None)
    ps.add_argument("--epochs", type=int, default=200)
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--shuffle", action="store_true")
    ps.add_argument("--stall-tol", type=float, default=1e-9)
    ps.add_argument("--target", type=float, default=None,
                    help="stop once the objective reaches this value")
    ps.add_argument("--switch-epochs", type=int, default=None,
                    help="hybrid: max subgradient epochs (default epochs/2)")
    ps.add_argument("--switch-window", type=int, default=5)
    ps.add_argument("--switch-improvement", type=float, default=1e-4)
    ps.add_argument("--out", type=Path, default=None, help="result JSON path")
    ps.add_argument("--trace", type=Path, default=None, help="per-epoch CSV path")
    ps.set_defaults(func=cmd_solve)

    pg = sub.add_parser("gen", help="write a synthetic dataset in LIBSVM format")
    pg.add_argument("--n", type=int, required=True)
    pg.add_argument("--d", type=int, required=True)
    pg.add_argument("--sigma", type=float, default=0.5)
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--out", type=Path, required=True)
    pg.set_defaults(func=cmd_gen)

    pb = sub.add_parser("bench", help="grid-search schedules/algorithms")
    _add_problem_flags(pb)
    pb.add_argument("--grid", type=Path, required=True,
                    help="JSON grid: list of cells or dict of lists")
    pb.add_argument("--epochs", type=int, default=100)
    pb.add_argument("--seed", type=int, default=0)
    pb.add_argument("--stall-tol", type=float, default=1e-9)
    pb.add_argument("--jobs", type=int, default=1)
    pb.add_argument("--out", type=Path, required=True, help="leaderboard CSV path")
    pb.add_argument("--best", type=Path, default=None,
                    help="also write the winning run config JSON here")
    pb.set_defaults(func=cmd_bench)

    pc = sub.add_parser("check", help="randomized self-certification suites")
    pc.add_argument("--seed", type=int, default=0)
    pc.add_argument("--proj-instances", type=int, default=400,
                    help="projection property instances per norm")
    pc.add_argument("--prox-instances", type=int, default=12,
                    help="prox-vs-oracle instances per (q, c) configuration")
    pc.add_argument("--sigma-instances", type=int, default=300)
    pc.add_argument("--case5-instances", type=int, default=3,
                    help="triple-active instances per norm")
    pc.add_argument("--oracle-iters", type=int, default=60000)
    pc.add_argument("--inject-fault", choices=("case5-lambda",), default=None,
                    help="force a known-wrong branch to demonstrate detection")
    pc.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
