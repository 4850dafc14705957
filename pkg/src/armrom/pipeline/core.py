"""Offline / online / bench / report stages driven by a RunConfig."""
from concurrent.futures import ProcessPoolExecutor
import csv
from functools import partial
import json
import logging
import math
import os
import time

import numpy as np

from .. import basis as B
from .. import cavity as C
from .. import elliptic as E
from ..errors import ArmError, ConfigError, NoValidSubdomain, ReportError
from ..numerics import SvdResult
from ..sampling import WeightingKernel, nearest_reference, uniform_grid
from .config import RunConfig
from .store import RNG_ALGORITHM, SnapshotStore, read_arms, write_arms

log = logging.getLogger(__name__)

BENCH_COLUMNS = ["mu1", "mu2", "method", "k", "sigma", "rel_error", "iters",
                 "online_time_s", "full_time_s", "status"]


def draw_test_points(cfg):
    """Seeded uniform draws from the configured parameter domain (or the explicit list)."""
    if cfg.test_points:
        return np.atleast_2d(np.asarray(cfg.test_points, dtype=float))
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    return cfg.domain.sample(cfg.test_count, rng)


def _map(fn, items, workers):
    """Lazily yield ``fn(x)`` in input order, in worker processes if requested."""
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            yield from pool.map(fn, items)
    else:
        for x in items:
            yield fn(x)


def _cavity_problem(cfg, mu):
    nx, ny = cfg.grid
    return C.CavityProblem(nx, ny, cfg.lx, float(mu[1]), float(mu[0]), cfg.dt, scheme=cfg.scheme)


# -- offline -------------------------------------------------------------------

def _elliptic_task(args):
    grid_n, mu, tol = args
    p = E.EllipticProblem(grid_n, mu)
    try:
        u = E.solve_full(p, tol=tol)
    except ArmError as exc:
        return None, str(exc)
    return (u, p.nonlinear(u), p.nonlinear_derivative(u)), None


def _cavity_task(args):
    cfg, mu = args
    p = _cavity_problem(cfg, mu)
    try:
        times, snaps, _ = C.simulate(p, cfg.t_end, cfg.record_every)
    except ArmError as exc:
        return None, str(exc)
    return (times, snaps), None


def offline(cfg, params=None):
    """Full solves at every training parameter, persisted as a snapshot store."""
    params = uniform_grid(cfg.train_domain, cfg.train_counts) if params is None else np.atleast_2d(params)
    store = SnapshotStore(cfg.out)
    meta = {"problem": cfg.problem, "config": cfg.to_dict(), "rng": RNG_ALGORITHM, "skipped": []}
    kept, arrays, files = [], {}, {}
    if cfg.problem == "elliptic":
        results = _map(_elliptic_task, [(cfg.grid[0], mu, cfg.tol) for mu in params], cfg.workers)
        cols = ([], [], [])
        for mu, (res, err) in zip(params, results):
            if res is None:
                log.warning("training point %s skipped: %s", mu.tolist(), err)
                meta["skipped"].append({"mu": mu.tolist(), "error": err})
                continue
            kept.append(mu)
            for c, r in zip(cols, res):
                c.append(r)
        arrays.update(states=np.column_stack(cols[0]), nonlinear=np.column_stack(cols[1]),
                      jacobian_diag=np.column_stack(cols[2]))
    else:
        results = _map(_cavity_task, [(cfg, mu) for mu in params], cfg.workers)
        times = None
        for j, (mu, (res, err)) in enumerate(zip(params, results)):
            log.info("trajectory %d/%d at %s", j + 1, len(params), mu.tolist())
            if res is None:
                log.warning("training point %s skipped: %s", mu.tolist(), err)
                meta["skipped"].append({"mu": mu.tolist(), "error": err})
                continue
            times = res[0]
            name = f"traj_{len(kept):03d}"
            files[name] = store.put(name, res[1])        # written now, not held in memory
            kept.append(mu)
        if times is not None:
            arrays["times"] = times
    if not kept:
        raise ArmError("every training solve failed")
    arrays["params"] = np.array(kept)
    meta["params"] = [list(map(float, mu)) for mu in kept]
    store.write(arrays, meta, files)
    return store


def load_elliptic(cfg):
    arrays, man = SnapshotStore(cfg.out).load()
    if man["problem"] != "elliptic":
        raise ConfigError(f"store at {cfg.out} holds a {man['problem']} problem")
    return B.SnapshotEnsemble(arrays["params"], arrays["states"], arrays["nonlinear"],
                              arrays["jacobian_diag"])


def load_cavity(cfg):
    """(params, times, trajectories); trajectories are read-only memory maps."""
    arrays, man = SnapshotStore(cfg.out).load(mmap=True)
    if man["problem"] != "cavity":
        raise ConfigError(f"store at {cfg.out} holds a {man['problem']} problem")
    params = np.array(arrays["params"])
    trajs = [arrays[f"traj_{i:03d}"] for i in range(len(params))]
    return params, np.array(arrays["times"]).ravel(), trajs


# -- elliptic helpers ------------------------------------------------------------

def _split(method):
    basis_kind, solver = method.split("-")
    return basis_kind, {"chord": "reduced_chord", "newton": "reduced_newton"}.get(solver, solver)


def _elliptic_models(cfg, ens, basis_kind, k, m, sigma, centers, cache):
    return E.offline_build(ens, cfg.make_kernel(sigma), k, m, cfg.domain, cfg.grid[0],
                           method=basis_kind, neighbor_count=cfg.lrm_neighbors,
                           centers=centers, cache=cache)


def _ensure_model(models, cfg, ens, basis_kind, k, m, sigma, mu, cache, spare=2):
    """Build the subdomain models an online solve at ``mu`` may visit.

    That is the nearest non-constant subdomain plus ``spare`` fallbacks for
    the restart rule of the online solver.  Returns the nearest usable index.
    """
    excluded, usable = set(), []
    while len(usable) <= spare and len(excluded) < ens.size:
        i = nearest_reference(np.asarray(mu), ens.params, cfg.domain, excluded)
        if models[i] is None:
            op = _operator(cfg)
            models[i] = E.build_subdomain_model(ens, i, cfg.make_kernel(sigma), k, m, cfg.domain,
                                                op.lap, op.forcing, basis_kind, cfg.lrm_neighbors,
                                                cache=cache)
        excluded.add(i)
        if not models[i].constant_flag:
            usable.append(i)
    if not usable:
        raise NoValidSubdomain("every subdomain model is flagged constant")
    return usable[0]


_OPS = {}


def _operator(cfg):
    n = cfg.grid[0]
    if n not in _OPS:
        _OPS[n] = E.EllipticProblem(n, (1.0, 1.0))
    return _OPS[n]


# -- cavity helpers ----------------------------------------------------------------

def _cavity_segments(cfg, params, times, trajs):
    """Nominal windows and per-segment ensembles holding only compressed POD modes.

    The modes are cached as ``.arms`` files under ``<out>/segments`` and
    memory-mapped, so raw snapshot windows are never held in memory together.
    The cache is keyed on the windows, the truncation settings and the store
    checksums.
    """
    nominal, extended = B.segment_windows(cfg.t_end, cfg.segment_count, cfg.segment_overlap)
    root = os.path.join(cfg.out, "segments")
    index_path = os.path.join(root, "index.json")
    key = json.loads(json.dumps({"windows": extended, "mode_tol": cfg.mode_tol,
                                 "max_modes": cfg.max_modes,
                                 "store": SnapshotStore(cfg.out).manifest()["files"]}))
    index = None
    if os.path.exists(index_path):
        with open(index_path) as fh:
            index = json.load(fh)
        if index.get("key") != key:
            index = None
    if index is None:
        os.makedirs(root, exist_ok=True)
        segments = []
        for s, window in enumerate(extended):
            entries = []
            for i, x in enumerate(trajs):
                part = np.asarray(B.segment_trajectories(x, times, [window])[0])
                tb = B.trajectory_basis(part, cfg.mode_tol, cfg.max_modes)
                write_arms(os.path.join(root, f"seg{s:02d}_traj{i:03d}.arms"), tb.phi)
                entries.append({"sigma": tb.sigma.tolist(), "tail": tb.tail})
            segments.append(entries)
        index = {"key": key, "segments": segments}
        with open(index_path, "w") as fh:
            json.dump(index, fh)
    ens = []
    for s, entries in enumerate(index["segments"]):
        bases = [B.TrajectoryBasis(read_arms(os.path.join(root, f"seg{s:02d}_traj{i:03d}.arms"), True),
                                   np.array(e["sigma"]), e["tail"]) for i, e in enumerate(entries)]
        ens.append(B.TrajectoryEnsemble(params, [None] * len(params), bases))
    return nominal, ens


def _cavity_rom_solve(cfg, p, params, nominal, ens, basis_kind, k, sigma, frames=None):
    """Segmented ROM solve to t_end; ``frames`` caches information-matrix SVDs across calls."""
    center = nearest_reference(np.array([p.re, p.ly]), params, cfg.domain)
    kernel = cfg.make_kernel(sigma) if basis_kind == "arm" else WeightingKernel.uniform()
    frames = {} if frames is None else frames
    roms = []
    for s, (e, seg) in enumerate(zip(ens, nominal)):
        key = (s, center if basis_kind == "arm" else None, kernel)
        if key not in frames:
            res = C.rom_frame(e, center, kernel, cfg.domain)
            width = max(cfg.ks + [k])                       # keep only the columns any k needs
            frames[key] = SvdResult(res.u[:, :width].copy(), res.sigma, None)
        roms.append(C.build_rom(e, seg, center, kernel, k, p, cfg.domain, cap=True,
                                frame=frames[key]))
    _, coeffs, last = C.integrate_rom(roms, np.zeros(roms[0].k), (0.0, cfg.t_end), p.dt)
    capped = min(r.k for r in roms) < k
    if capped:
        log.info("k=%d capped to the information-matrix rank in %d of %d segments", k,
                 sum(r.k < k for r in roms), len(roms))
    return last.basis @ coeffs[-1], last, center, capped


# -- online --------------------------------------------------------------------

def online(cfg, mu, method=None, k=None, m=None, sigma=None):
    """Reduced solve at one parameter; writes the lifted solution and a JSON report."""
    method = method or cfg.methods[0]
    k = k or cfg.k
    m = m or (2 * k if k != cfg.k else cfg.m)
    sigma = cfg.sigma if sigma is None else sigma
    mu = np.asarray(mu, dtype=float)
    basis_kind, solver = _split(method)
    os.makedirs(cfg.out, exist_ok=True)
    tag = f"online_{method}_k{k}_" + "_".join(f"{x:g}" for x in mu)
    if cfg.problem == "elliptic":
        if solver not in ("reduced_chord", "reduced_newton"):
            raise ConfigError(f"method {method!r} does not apply to the elliptic problem")
        ens = load_elliptic(cfg)
        models = [None] * ens.size
        _ensure_model(models, cfg, ens, basis_kind, k, m, sigma, mu, {})
        rep = E.online_solve(models, ens.params, mu, cfg.domain, solver, cfg.tol, cfg.max_iter)
        solution = rep.solution
        reference = E.solve_full(_operator(cfg).with_mu(mu), tol=cfg.tol)
        write_arms(os.path.join(cfg.out, tag + "_error.arms"), reference - solution)
        info = {"rel_error": E.relative_error(reference, solution), "iterations": rep.iterations,
                "converged": rep.converged, "stagnated": rep.stagnated, "restarts": rep.restarts,
                "wall_time_s": rep.wall_time, "subdomain": rep.subdomain,
                "step_history": rep.residual_history}
    else:
        if solver != "galerkin":
            raise ConfigError(f"method {method!r} does not apply to the cavity problem")
        params, times, trajs = load_cavity(cfg)
        nominal, ens = _cavity_segments(cfg, params, times, trajs)
        p = _cavity_problem(cfg, mu)
        t0 = time.perf_counter()
        solution, rom, center, capped = _cavity_rom_solve(cfg, p, params, nominal, ens, basis_kind,
                                                          k, sigma)
        info = {"wall_time_s": time.perf_counter() - t0, "subdomain": center, "t_end": cfg.t_end,
                "capped": capped, "final_k": rom.k}
        psi = C.embed(p, C.poisson_solve(p, solution))
        u, v = C.velocities(p, psi)
        _write_profiles(os.path.join(cfg.out, tag + "_profiles.csv"), p, u, v)
    write_arms(os.path.join(cfg.out, tag + ".arms"), solution)
    info.update(mu=mu.tolist(), method=method, k=k, m=m, sigma=sigma, problem=cfg.problem)
    with open(os.path.join(cfg.out, tag + ".json"), "w") as fh:
        json.dump(info, fh, indent=2, sort_keys=True)
    return solution, info


def _write_profiles(path, p, u, v):
    """Velocity along the vertical and horizontal centre lines."""
    i_mid, j_mid = (p.nx - 1) // 2 - 1, (p.ny - 1) // 2 - 1
    x, y = p.grid()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["line", "coord", "velocity"])
        for j in range(u.shape[1]):
            w.writerow(["u(x=mid,y)", repr(float(y[0, j + 1])), repr(float(u[i_mid, j]))])
        for i in range(v.shape[0]):
            w.writerow(["v(x,y=mid)", repr(float(x[i + 1, 0])), repr(float(v[i, j_mid]))])


# -- bench ---------------------------------------------------------------------

def _row(mu, method, k, sigma, err, iters, t_on, t_full, status="ok", timing=True):
    if not timing:
        t_on = t_full = math.nan
    return {"mu1": repr(float(mu[0])), "mu2": repr(float(mu[1])), "method": method, "k": k,
            "sigma": "" if sigma is None else repr(float(sigma)), "rel_error": repr(float(err)),
            "iters": iters, "online_time_s": repr(float(t_on)), "full_time_s": repr(float(t_full)),
            "status": status}


def bench_elliptic(cfg, tests=None, references=None):
    """Records for every (test point, method, k, sigma); returns (rows, references)."""
    ens = load_elliptic(cfg)
    tests = draw_test_points(cfg) if tests is None else np.atleast_2d(tests)
    op = _operator(cfg)
    if references is None:
        references = []
        for mu in tests:
            p = op.with_mu(mu)
            t0 = time.perf_counter()
            u = E.solve_full(p, tol=cfg.tol)
            references.append((u, time.perf_counter() - t0))
    row = partial(_row, timing=cfg.timing)
    rows = []
    caches = {}
    kinds = sorted({_split(mth)[0] for mth in cfg.methods})
    for kind in kinds:
        sigmas = cfg.sigmas if kind == "arm" else [None]
        solvers = [(_split(mth)[1], mth) for mth in cfg.methods if _split(mth)[0] == kind]
        for sigma in sigmas:
            cache = caches.setdefault((kind, sigma), {})
            for k in cfg.ks:
                m = cfg.m_for(k)
                models = [None] * ens.size
                for mu, (u, t_full) in zip(tests, references):
                    i = _ensure_model(models, cfg, ens, kind, k, m, sigma, mu, cache)
                    proj = B.relative_projection_error(models[i].basis, u)
                    rows.append(row(mu, f"{kind}-projection", k, sigma, proj, 0, 0.0, t_full))
                    for solver, name in solvers:
                        try:
                            rep = E.online_solve(models, ens.params, mu, cfg.domain, solver,
                                                 cfg.tol, cfg.max_iter)
                            status = ("stagnated" if rep.stagnated
                                      else "restarted" if rep.restarts else "ok")
                            rows.append(row(mu, name, k, sigma, E.relative_error(u, rep.solution),
                                             rep.iterations, rep.wall_time, t_full, status))
                        except ArmError as exc:
                            log.warning("%s failed at %s: %s", name, mu.tolist(), exc)
                            rows.append(row(mu, name, k, sigma, math.nan, 0, 0.0, t_full, "failed"))
    return rows, references


def timing_elliptic(cfg, mu=None, ks=None, sigma=None):
    """Per-iteration wall time of reduced chord / Newton vs a full Newton step."""
    ens = load_elliptic(cfg)
    mu = np.asarray(mu if mu is not None else draw_test_points(cfg)[0], dtype=float)
    sigma = cfg.sigma if sigma is None else sigma
    p = _operator(cfg).with_mu(mu)
    u = E.solve_full(p, tol=cfg.tol)
    full = E.time_full_newton_iteration(p, u)
    out = []
    cache = {}
    for k in ks or cfg.ks:
        models = [None] * ens.size
        _ensure_model(models, cfg, ens, "arm", k, cfg.m_for(k), sigma, mu, cache)
        tc = E.time_per_iteration(models, ens.params, mu, cfg.domain, "reduced_chord")
        tn = E.time_per_iteration(models, ens.params, mu, cfg.domain, "reduced_newton")
        out.append({"k": k, "chord_iter_s": tc, "newton_iter_s": tn, "full_newton_iter_s": full,
                    "chord_over_newton": tc / tn, "chord_over_full": tc / full,
                    "newton_over_full": tn / full})
    return out


def bench_cavity(cfg, tests=None, references=None):
    params, times, trajs = load_cavity(cfg)
    tests = draw_test_points(cfg) if tests is None else np.atleast_2d(tests)
    nominal, ens = _cavity_segments(cfg, params, times, trajs)
    if references is None:
        references = []
        for mu in tests:
            p = _cavity_problem(cfg, mu)
            t0 = time.perf_counter()
            _, _, state = C.simulate(p, cfg.t_end, record_every=10**9)
            references.append((state.interior.copy(), time.perf_counter() - t0))
    row = partial(_row, timing=cfg.timing)
    rows, frames = [], {}
    for mth in cfg.methods:
        kind, _ = _split(mth)
        for sigma in (cfg.sigmas if kind == "arm" else [None]):
            for k in cfg.ks:
                for mu, (w_ref, t_full) in zip(tests, references):
                    p = _cavity_problem(cfg, mu)
                    t0 = time.perf_counter()
                    try:
                        w, rom, _, capped = _cavity_rom_solve(cfg, p, params, nominal, ens, kind,
                                                              k, sigma, frames)
                    except ArmError as exc:
                        log.warning("%s failed at %s: %s", mth, mu.tolist(), exc)
                        rows.append(row(mu, mth, k, sigma, math.nan, 0, 0.0, t_full, "failed"))
                        continue
                    t_on = time.perf_counter() - t0
                    nrm = np.linalg.norm(w_ref)
                    rows.append(row(mu, mth, k, sigma, np.linalg.norm(w - w_ref) / nrm,
                                     int(round(cfg.t_end / cfg.dt)), t_on, t_full,
                                     "capped" if capped else "ok"))
                    proj = np.linalg.norm(w_ref - rom.basis @ (rom.basis.T @ w_ref)) / nrm
                    rows.append(row(mu, f"{kind}-projection", k, sigma, proj, 0, 0.0, t_full))
    return rows, references


def write_csv(path, rows, columns=BENCH_COLUMNS):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(r)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _mean(rows, key, cast=float):
    return repr(float(np.mean([cast(r[key]) for r in rows]))) if rows else "nan"


def summarize(rows):
    """Mean error / iterations / times per (method, k, sigma)."""
    groups = {}
    for r in rows:
        groups.setdefault((r["method"], int(r["k"]), r["sigma"]), []).append(r)
    out = []
    for (mth, k, sigma), rs in sorted(groups.items()):
        ok = [r for r in rs if r["status"] != "failed"]
        out.append({"method": mth, "k": k, "sigma": sigma, "count": len(rs),
                    "failed": len(rs) - len(ok), "mean_rel_error": _mean(ok, "rel_error"),
                    "mean_iters": _mean(ok, "iters", int),
                    "mean_online_time_s": _mean(ok, "online_time_s"),
                    "mean_full_time_s": _mean(rs, "full_time_s")})
    return out


SUMMARY_COLUMNS = ["method", "k", "sigma", "count", "failed", "mean_rel_error", "mean_iters",
                   "mean_online_time_s", "mean_full_time_s"]


def bench(cfg):
    """Run the configured benchmark and write bench.csv / summary.csv (and timing.csv)."""
    os.makedirs(cfg.out, exist_ok=True)
    if cfg.problem == "elliptic":
        rows, _ = bench_elliptic(cfg)
        timing = timing_elliptic(cfg)
        with open(os.path.join(cfg.out, "timing.csv"), "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(timing[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(timing)
    else:
        rows, _ = bench_cavity(cfg)
    path = os.path.join(cfg.out, "bench.csv")
    write_csv(path, rows)
    write_csv(os.path.join(cfg.out, "summary.csv"), summarize(rows), SUMMARY_COLUMNS)
    return path


# -- report --------------------------------------------------------------------

def _fmt(x):
    return "nan" if not np.isfinite(x) else f"{x:.2E}"


def error_table(rows, method):
    """Mean relative error with rows = k and columns = sigma for one method."""
    sub = [r for r in rows if r["method"] == method and r["status"] != "failed"]
    ks = sorted({int(r["k"]) for r in sub})
    sigmas = sorted({r["sigma"] for r in sub}, key=lambda s: float(s) if s else math.inf)
    table = {}
    for r in sub:
        table.setdefault((int(r["k"]), r["sigma"]), []).append(float(r["rel_error"]))
    grid = [[float(np.mean(table[(k, s)])) if (k, s) in table else math.nan for s in sigmas]
            for k in ks]
    return ks, sigmas, grid


def singular_value_curves(cfg, count=None):
    """Normalized singular values: global matrix vs the average over ARM subdomains.

    Returns a dict of name -> 1-D array (for the elliptic problem both solution
    and nonlinear snapshots, for the cavity the information matrices averaged
    over time segments).
    """
    curves = {}
    if cfg.problem == "elliptic":
        ens = load_elliptic(cfg)
        kernel = cfg.make_kernel()
        for name, data in (("solution", ens.states), ("nonlinear", ens.nonlinear)):
            curves[f"grm_{name}"] = B.normalized_singular_values(np.linalg.svd(data, compute_uv=False))
            acc = []
            for i in range(ens.size):
                xa, _ = B.weighted_snapshots(data, ens.params, i, kernel, cfg.domain)
                acc.append(B.normalized_singular_values(np.linalg.svd(xa, compute_uv=False)))
            curves[f"arm_{name}"] = np.mean(acc, axis=0)
    else:
        params, times, trajs = load_cavity(cfg)
        _, ens = _cavity_segments(cfg, params, times, trajs)
        g, a = [], []
        for e in ens:
            info = B.information_matrix(e, 0, WeightingKernel.uniform(), cfg.domain)
            g.append(B.normalized_singular_values(np.linalg.svd(info, compute_uv=False)))
            for i in range(len(params)):
                info = B.information_matrix(e, i, cfg.make_kernel(), cfg.domain)
                a.append(B.normalized_singular_values(np.linalg.svd(info, compute_uv=False)))
        width = min(min(len(s) for s in g), min(len(s) for s in a))
        curves["grm_information"] = np.mean([s[:width] for s in g], axis=0)
        curves["arm_information"] = np.mean([s[:width] for s in a], axis=0)
    if count:
        curves = {key: val[:count] for key, val in curves.items()}
    return curves


def report(csv_paths, out_dir, cfg=None):
    """Markdown tables of mean errors and scaled run times; CSV of singular-value decay."""
    rows = []
    for path in csv_paths:
        part = read_csv(path)
        if part:
            missing = set(BENCH_COLUMNS) - set(part[0])
            if missing:
                raise ReportError(f"{path} lacks columns {sorted(missing)}")
        rows.extend(part)
    if not rows:
        raise ReportError("no benchmark records found")
    os.makedirs(out_dir, exist_ok=True)
    lines = ["# Benchmark report", ""]
    methods = sorted({r["method"] for r in rows})
    for mth in methods:
        ks, sigmas, grid = error_table(rows, mth)
        lines += [f"## Mean relative error: {mth}", "",
                  "| k | " + " | ".join(s or "-" for s in sigmas) + " |",
                  "|---|" + "---|" * len(sigmas)]
        for k, vals in zip(ks, grid):
            lines.append(f"| {k} | " + " | ".join(_fmt(v) for v in vals) + " |")
        lines.append("")
        with open(os.path.join(out_dir, f"table_{mth}.csv"), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k"] + [s or "none" for s in sigmas])
            for k, vals in zip(ks, grid):
                w.writerow([k] + [repr(v) for v in vals])
    summ = summarize(rows)
    lines += ["## Scaled online time (mean online / mean full)", "", "| method | k | sigma | ratio |",
              "|---|---|---|---|"]
    for s in summ:
        if s["method"].endswith("projection"):
            continue
        ratio = float(s["mean_online_time_s"]) / float(s["mean_full_time_s"])
        lines.append(f"| {s['method']} | {s['k']} | {s['sigma'] or '-'} | {_fmt(ratio)} |")
    lines.append("")
    if cfg is not None:
        curves = singular_value_curves(cfg)
        width = max(len(v) for v in curves.values())
        with open(os.path.join(out_dir, "singular_values.csv"), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            names = sorted(curves)
            w.writerow(["index"] + names)
            for i in range(width):
                w.writerow([i + 1] + [repr(float(curves[n][i])) if i < len(curves[n]) else ""
                                      for n in names])
    path = os.path.join(out_dir, "report.md")
    with open(path, "w") as fh:
        fh.write("\n".join(lines))
    return path
