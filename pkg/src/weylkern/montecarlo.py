"""Path-simulation oracles for the chamber kernels.

Two processes are simulated in the orthonormal span frame of the root
system: plain Brownian motion killed at the chamber walls (variance 2t,
wall crossings detected with Brownian-bridge corrections) and the Dyson
process with drift 2 sum_a a/<a,x> (per-path adaptive Euler steps that
shrink near the walls).  Sampling is organized in fixed-size blocks, one
Philox stream per block, merged in block order, so results are bit-exact
for a given seed no matter how many worker threads run the blocks.

The comparison helpers bin the samples into equal-predicted-mass cells
and run a chi-square test against the closed-form densities; the PDE
helper checks the heat/Laplace equations by finite differences instead
of paths.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import chi2

from weylkern.kernels import DomainError, kernel_w, kernel_w_batch
from weylkern.quadrature import arc_span_frame, ball_bounds, gauss_nodes
from weylkern.rootsys import RootSystem, as_vector, dot, pi_over, regularity

DT_FLOOR_HALVINGS = 12   # a path aborts after this many halvings of its step
PROCESSES = ("killed", "dyson")
STOPS = ("time", "exit")


@dataclass(frozen=True)
class SimConfig:
    system: str
    process: str            # "killed" | "dyson"
    stop: str               # "time" (fixed horizon) | "exit" (first exit from unit ball)
    x0: tuple
    horizon: float | None
    n_paths: int
    dt: float
    seed: int
    block_size: int = 8192
    threads: int = 0        # 0: WEYLKERN_THREADS or a modest default

    def to_dict(self) -> dict:
        return {
            "system": self.system, "process": self.process, "stop": self.stop,
            "x0": ",".join(str(c) for c in self.x0), "horizon": self.horizon,
            "n_paths": self.n_paths, "dt": self.dt, "seed": self.seed,
            "block_size": self.block_size,
        }


@dataclass
class EmpiricalMeasure:
    config: SimConfig
    points: np.ndarray      # ambient coordinates of finished paths
    n_killed: int
    n_aborted: int
    elapsed: float

    @property
    def n_finished(self) -> int:
        return len(self.points)


@dataclass
class ComparisonReport:
    statistic: float
    dof: int
    threshold: float
    alpha: float
    pvalue: float
    observed: np.ndarray
    expected: np.ndarray
    n_used: int
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.statistic <= self.threshold


# ---------------------------------------------------------------------------
# geometry in the span frame


def _span_frame(rs: RootSystem):
    """(basis (ambient, d), unit wall normals (gamma, d), root matrix (gamma, d))."""
    B = rs.span_basis()
    A = rs.roots_np() @ B
    norms = np.linalg.norm(A, axis=1)
    return B, A / norms[:, None], A


def _rng_for_block(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(
        np.random.SeedSequence(entropy=seed, spawn_key=(block,))))


def _thread_count(requested: int) -> int:
    if requested > 0:
        return requested
    env = os.environ.get("WEYLKERN_THREADS", "")
    if env.strip():
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def _block_sizes(n: int, block: int) -> list[int]:
    full, rem = divmod(n, block)
    return [block] * full + ([rem] if rem else [])


# ---------------------------------------------------------------------------
# killed Brownian motion


def _killed_block(u0, normals, t, dt, m, rng, stop):
    """One block of killed paths; returns (positions, alive mask, n_killed)."""
    d = u0.shape[0]
    u = np.tile(u0, (m, 1))
    alive = np.ones(m, dtype=bool)
    root_dt = math.sqrt(2.0 * dt)
    steps = max(1, int(round(t / dt)))
    h = t / steps
    root_h = math.sqrt(2.0 * h)
    exited = np.zeros(m, dtype=bool)
    if stop == "exit":
        # safety valve only: killed paths leave the ball or die long before this
        steps = int(512.0 / dt) + 1000

    a = u @ normals.T
    k = 0
    while k < steps:
        k += 1
        g = rng.standard_normal((m, d))
        un = u + root_h * g if stop == "time" else u + root_dt * g
        un[~alive] = u[~alive]
        an = un @ normals.T
        uu = rng.random((m, normals.shape[0]))
        log_keep = -a * an / (h if stop == "time" else dt)
        kill = (uu < np.exp(np.minimum(log_keep, 0.0))).any(axis=1)
        if stop == "exit":
            r_old = np.sqrt(np.einsum("ij,ij->i", u, u))
            r_new = np.sqrt(np.einsum("ij,ij->i", un, un))
            crossed = r_new >= 1.0
            # bridge correction at the sphere, mirroring the wall one: a
            # step ending inside may still have touched |x| = 1 in between
            ub = rng.random(m)
            p_touch = np.exp(np.minimum(-(1.0 - r_old) * (1.0 - r_new) / dt, 0.0))
            out = alive & ~kill & (crossed | (ub < p_touch))
            if out.any():
                du = un[out] - u[out]
                bq = np.einsum("ij,ij->i", u[out], du)
                aq = np.einsum("ij,ij->i", du, du)
                cq = r_old[out] ** 2 - 1.0
                disc = bq * bq - aq * cq
                s = np.where(disc >= 0.0, (-bq + np.sqrt(np.maximum(disc, 0.0))) / aq,
                             np.clip(-bq / aq, 0.0, 1.0))
                hit = u[out] + s[:, None] * du
                hit /= np.linalg.norm(hit, axis=1)[:, None]
                un[out] = hit
                exited |= out
                alive &= ~out
        alive &= ~kill
        u = un
        a = an
        if stop == "exit" and not alive.any():
            break
    if stop == "exit":
        return u[exited], exited, int(m - exited.sum())
    return u[alive], alive, int(m - alive.sum())


# ---------------------------------------------------------------------------
# Dyson process


def _dyson_block(u0, normals, roots_span, t, dt, m, rng, stop):
    """One block of Dyson paths with per-path clocks and shrinking steps."""
    d = u0.shape[0]
    u = np.tile(u0, (m, 1))
    clock = np.zeros(m)
    halvings = np.zeros(m, dtype=np.int64)
    aborted = np.zeros(m, dtype=bool)
    done = np.zeros(m, dtype=bool)
    horizon = t if stop == "time" else 16.0
    max_rounds = 200_000 + int(64.0 * horizon / dt)

    rounds = 0
    while True:
        active = ~(done | aborted)
        if not active.any() or rounds >= max_rounds:
            aborted |= active
            break
        rounds += 1
        g = rng.standard_normal((m, d))
        dist = (u @ normals.T).min(axis=1)
        step = np.minimum(dt * np.exp2(-halvings.astype(float)), 0.1 * dist * dist)
        if stop == "time":
            step = np.minimum(step, t - clock)
        step = np.maximum(step, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            dots = u @ roots_span.T
            drift = 2.0 * ((1.0 / dots) @ roots_span)
            drift[~active] = 0.0
        un = u + drift * step[:, None] + np.sqrt(2.0 * step)[:, None] * g
        ok = active & ((un @ normals.T).min(axis=1) > 0.0)
        bad = active & ~ok
        r_old = np.sqrt(np.einsum("ij,ij->i", u, u))
        u[ok] = un[ok]
        clock[ok] += step[ok]
        halvings[ok] = 0
        halvings[bad] += 1
        aborted |= bad & (halvings > DT_FLOOR_HALVINGS)
        if stop == "time":
            done |= ok & (clock >= t * (1.0 - 1e-12))
        else:
            r_new = np.sqrt(np.einsum("ij,ij->i", u, u))
            ub = rng.random(m)
            with np.errstate(divide="ignore", invalid="ignore"):
                p_touch = np.exp(np.minimum(
                    -(1.0 - r_old) * (1.0 - r_new) / np.maximum(step, 1e-300), 0.0))
            out = ok & ((r_new >= 1.0) | (ub < p_touch))
            if out.any():
                u[out] /= np.linalg.norm(u[out], axis=1)[:, None]
            done |= out
    return u[done], done, int(aborted.sum())


# ---------------------------------------------------------------------------
# the public entry point


def simulate(rs: RootSystem, process: str, x0: Sequence, *, horizon: float | None = None,
             n_paths: int = 100_000, dt: float = 1e-3, seed: int = 0,
             stop: str = "time", block_size: int = 8192,
             threads: int = 0) -> EmpiricalMeasure:
    """Sample killed or Dyson paths started at a regular chamber point.

    stop="time" returns positions at the fixed horizon (killed paths that
    survive); stop="exit" returns first-exit positions on the unit sphere,
    so x0 must then lie inside the unit ball.  Results are reproducible
    per (seed, block_size), independent of the thread count.
    """
    if process not in PROCESSES:
        raise DomainError(f"unknown process {process!r}; expected one of {PROCESSES}")
    if stop not in STOPS:
        raise DomainError(f"unknown stop rule {stop!r}; expected one of {STOPS}")
    xq = as_vector(x0)
    if regularity(rs, xq) <= 0:
        raise DomainError("simulation starts at a regular interior point")
    if stop == "time":
        if horizon is None or horizon <= 0:
            raise DomainError("stop='time' needs a positive horizon")
    else:
        if float(dot(xq, xq)) >= 1.0:
            raise DomainError("stop='exit' starts inside the unit ball")
    B, normals, roots_span = _span_frame(rs)
    u0 = np.array([float(c) for c in xq]) @ B
    cfg = SimConfig(rs.name, process, stop, tuple(float(c) for c in xq),
                    horizon, n_paths, dt, seed, block_size, threads)
    t = horizon if horizon is not None else 0.0

    def run(idx_size):
        b, msize = idx_size
        rng = _rng_for_block(seed, b)
        if process == "killed":
            return _killed_block(u0, normals, t, dt, msize, rng, stop)
        return _dyson_block(u0, normals, roots_span, t, dt, msize, rng, stop)

    t0 = time.time()
    sizes = list(enumerate(_block_sizes(n_paths, block_size)))
    workers = _thread_count(threads)
    if workers == 1 or len(sizes) == 1:
        results = [run(s) for s in sizes]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, sizes))

    span_pts = np.concatenate([r[0] for r in results]) if results else np.zeros((0, B.shape[1]))
    lost = sum(r[2] for r in results)
    points = span_pts @ B.T
    if process == "killed":
        n_killed, n_aborted = lost, 0
    else:
        n_killed, n_aborted = 0, lost
    return EmpiricalMeasure(cfg, points, n_killed, n_aborted, time.time() - t0)


# ---------------------------------------------------------------------------
# binning against the predicted densities


def _chi_square(observed: np.ndarray, expected: np.ndarray, alpha: float,
                detail: dict) -> ComparisonReport:
    stat = float(np.sum((observed - expected) ** 2 / expected))
    dof = len(observed) - 1
    return ComparisonReport(stat, dof, float(chi2.isf(alpha, dof)), alpha,
                            float(chi2.sf(stat, dof)), observed, expected,
                            int(observed.sum()), detail)


def _quantile_edges(grid: np.ndarray, weights: np.ndarray, n_bins: int) -> np.ndarray:
    """Edges splitting a sampled 1-d density into equal-mass bins."""
    cum = np.concatenate([[0.0], np.cumsum(weights)])
    cum /= cum[-1]
    # grid midpoints frame the cells the weights belong to
    levels = np.arange(1, n_bins) / n_bins
    edges = np.interp(levels, cum[1:], grid)
    return edges


def exit_density_arc(rs: RootSystem, process: str, x0: Sequence, thetas: np.ndarray,
                     frame=None) -> np.ndarray:
    """Predicted exit density per unit arclength at angles on the chamber arc."""
    u1, u2, _ = frame if frame is not None else arc_span_frame(rs)
    pts = np.outer(np.cos(thetas), u1) + np.outer(np.sin(thetas), u2)
    xq = as_vector(x0)
    vals = kernel_w_batch(rs, "poisson", xq, pts)
    piy = np.prod(pts @ rs.roots_np().T, axis=1)
    if process == "dyson":
        return rs.weyl_order * piy * piy * vals
    pix = float(pi_over(rs, xq))
    return rs.weyl_order * pix * piy * vals


def compare_exit(rs: RootSystem, measure: EmpiricalMeasure, n_bins: int = 40,
                 alpha: float = 0.01, grid_n: int = 4000) -> ComparisonReport:
    """Chi-square test of simulated exit angles against the Poisson law.

    Rank 2: bins have equal predicted mass; one corner bin at each end of
    the arc is built and then dropped (the corner cells are wide and carry
    the worst discretization bias), and the rest renormalized.

    Rank 1: the exit set is the single point where sphere meets chamber,
    so the location match is exact (zero tolerance) and the statistic is
    the squared z-score of the survivor count against the exact exit
    probability (x0 for the killed process, 1 for the conditioned one).
    """
    if measure.config.stop != "exit":
        raise DomainError("measure was not produced with stop='exit'")
    if len(rs.fundamental_weights) == 1:
        return _compare_exit_rank1(rs, measure, alpha)
    if len(rs.fundamental_weights) != 2:
        raise DomainError("exit comparison is implemented for rank <= 2")
    process = measure.config.process
    frame = arc_span_frame(rs)
    u1, u2, theta_max = frame
    # predicted density on a fine arc grid
    th, w = gauss_nodes(0.0, theta_max, grid_n)
    dens = exit_density_arc(rs, process, measure.config.x0, th, frame)
    edges = _quantile_edges(th, dens * w, n_bins + 2)
    inner = edges          # n_bins+1 interior edges bound n_bins kept bins
    # observed angles
    pts = measure.points
    x1 = pts @ u1
    x2 = pts @ u2
    ang = np.arctan2(x2, x1)
    counts, _ = np.histogram(ang, bins=inner)
    kept_mass_parts = []
    for lo, hi in zip(inner[:-1], inner[1:]):
        tt, ww = gauss_nodes(float(lo), float(hi), 40)
        kept_mass_parts.append(float(np.dot(ww, exit_density_arc(rs, process, measure.config.x0, tt, frame))))
    cell = np.array(kept_mass_parts)
    n_used = int(counts.sum())
    expected = cell / cell.sum() * n_used
    return _chi_square(counts.astype(float), expected,
                       alpha, {"edges": inner, "theta_max": theta_max,
                               "dropped": 2, "process": process})


def _compare_exit_rank1(rs: RootSystem, measure: EmpiricalMeasure,
                        alpha: float) -> ComparisonReport:
    from scipy.stats import chi2

    pts = measure.points
    radii = np.linalg.norm(pts, axis=1) if len(pts) else np.zeros(0)
    loc_err = float(np.max(np.abs(radii - 1.0))) if len(pts) else 0.0
    n = measure.config.n_paths
    k = len(pts)
    if measure.config.process == "dyson":
        p = 1.0
    else:
        xq = as_vector(measure.config.x0)
        p = math.sqrt(float(dot(xq, xq)))
    if p >= 1.0:
        stat = 0.0 if (k == n and loc_err == 0.0) else math.inf
    else:
        stat = (k - n * p) ** 2 / (n * p * (1.0 - p))
        if loc_err > 0.0:
            stat = math.inf
    threshold = float(chi2.isf(alpha, 1))
    pvalue = float(chi2.sf(stat, 1)) if math.isfinite(stat) else 0.0
    return ComparisonReport(
        statistic=stat, dof=1, threshold=threshold, alpha=alpha, pvalue=pvalue,
        observed=np.array([float(k)]), expected=np.array([n * p]), n_used=k,
        detail={"max_location_error": loc_err, "exit_probability": p,
                "process": measure.config.process})


def _omega_coords(rs: RootSystem, points: np.ndarray) -> np.ndarray:
    """Fundamental-weight coordinates a_i = <Y, alpha_i_check> of sample points."""
    duals = []
    for a in rs.simple_roots:
        n2 = dot(a, a)
        duals.append([float(2 * c / n2) for c in a])
    return points @ np.array(duals).T


def final_density(rs: RootSystem, process: str, x0: Sequence, t: float,
                  points: np.ndarray) -> np.ndarray:
    """Predicted (unnormalized) final-time density at ambient points."""
    xq = as_vector(x0)
    vals = kernel_w_batch(rs, "heat", xq, points, t=t)
    piy = np.prod(points @ rs.roots_np().T, axis=1)
    if process == "dyson":
        return rs.weyl_order * piy * piy * vals
    pix = float(pi_over(rs, xq))
    return rs.weyl_order * pix * piy * vals


def compare_density(rs: RootSystem, measure: EmpiricalMeasure, n_bins: int = 40,
                    alpha: float = 0.01, pad: float = 10.0) -> ComparisonReport:
    """Chi-square test of final-time samples against the heat-kernel density.

    Cells have equal predicted mass: quantile slabs in the first
    fundamental-weight coordinate, then conditional quantiles in the
    second (rank 2); plain quantile bins in rank 1.  Expected masses are
    re-integrated per cell with fresh Gauss-Legendre nodes.
    """
    if measure.config.stop != "time":
        raise DomainError("measure was not produced with stop='time'")
    process = measure.config.process
    t = measure.config.horizon
    x0 = measure.config.x0
    rank = len(rs.fundamental_weights)
    if rank > 2:
        raise DomainError("density comparison is implemented for rank <= 2")
    xq = as_vector(x0)
    radius = math.sqrt(float(dot(xq, xq))) + pad * math.sqrt(2.0 * t * rs.intrinsic_dim)
    bounds = ball_bounds(rs, radius)
    wm = np.array([[float(c) for c in w] for w in rs.fundamental_weights])

    def dens_at_coords(a: np.ndarray) -> np.ndarray:
        return final_density(rs, process, x0, t, a @ wm)

    coords = _omega_coords(rs, measure.points)

    if rank == 1:
        grid, gw = gauss_nodes(0.0, bounds[0], 2000)
        dens = dens_at_coords(grid[:, None])
        edges = _quantile_edges(grid, dens * gw, n_bins)
        full_edges = np.concatenate([[0.0], edges, [bounds[0]]])
        counts, _ = np.histogram(coords[:, 0], bins=full_edges)
        cell = []
        for lo, hi in zip(full_edges[:-1], full_edges[1:]):
            xs, ws = gauss_nodes(float(lo), float(hi), 60)
            cell.append(float(np.dot(ws, dens_at_coords(xs[:, None]))))
        cell = np.array(cell)
        expected = cell / cell.sum() * counts.sum()
        return _chi_square(counts.astype(float), expected, alpha,
                           {"edges": full_edges, "process": process})

    n1 = int(round(math.sqrt(n_bins * 1.6)))
    n2 = max(2, n_bins // n1)
    n1 = n_bins // n2
    if n1 * n2 != n_bins:
        raise DomainError(f"cannot factor {n_bins} bins into a rank-2 grid")
    g1, w1 = gauss_nodes(0.0, bounds[0], 600)
    g2, w2 = gauss_nodes(0.0, bounds[1], 600)
    A1, A2 = np.meshgrid(g1, g2, indexing="ij")
    dens_grid = dens_at_coords(np.stack([A1.ravel(), A2.ravel()], axis=1)).reshape(len(g1), len(g2))
    marg1 = dens_grid @ w2
    e1 = np.concatenate([[0.0], _quantile_edges(g1, marg1 * w1, n1), [bounds[0]]])
    slab_of = np.clip(np.searchsorted(e1, coords[:, 0], side="right") - 1, 0, n1 - 1)
    counts = np.zeros((n1, n2))
    cell = np.zeros((n1, n2))
    for i in range(n1):
        lo1, hi1 = float(e1[i]), float(e1[i + 1])
        xs1, ws1 = gauss_nodes(lo1, hi1, 60)
        strip = dens_at_coords(
            np.stack([np.repeat(xs1, len(g2)), np.tile(g2, len(xs1))], axis=1)
        ).reshape(len(xs1), len(g2))
        cond = ws1 @ strip
        e2 = np.concatenate([[0.0], _quantile_edges(g2, cond * w2, n2), [bounds[1]]])
        sel = coords[slab_of == i]
        idx = np.clip(np.searchsorted(e2, sel[:, 1], side="right") - 1, 0, n2 - 1)
        for j in range(n2):
            counts[i, j] = np.sum(idx == j)
            xs2, ws2 = gauss_nodes(float(e2[j]), float(e2[j + 1]), 40)
            block = dens_at_coords(
                np.stack([np.repeat(xs1, len(xs2)), np.tile(xs2, len(xs1))], axis=1)
            ).reshape(len(xs1), len(xs2))
            cell[i, j] = float(ws1 @ block @ ws2)
    counts = counts.ravel()
    cell = cell.ravel()
    expected = cell / cell.sum() * counts.sum()
    return _chi_square(counts, expected, alpha,
                       {"grid": (n1, n2), "process": process, "radius": radius})


# ---------------------------------------------------------------------------
# PDE residual oracle


@dataclass(frozen=True)
class ResidualReport:
    residual: float         # |defect| / scale
    defect: float
    scale: float
    h: float

    @property
    def passed(self) -> bool:
        return self.residual < 1e-4


def pde_residual(rs: RootSystem, kind: str, X: Sequence, Y: Sequence,
                 t: float | None = None, h: float = 1e-3) -> ResidualReport:
    """Finite-difference check that pi * K^W solves its defining equation.

    f = pi(.) K^W with the alternating sum un-divided is smooth across the
    walls; the heat case checks d_t f = Lap f (the process runs at
    variance 2t), the elliptic kernels check Lap f = 0.  Derivatives act
    on Y for heat/newton/green and on X for poisson; second differences
    run along an orthonormal basis of the root span.
    """
    B = rs.span_basis()
    d = rs.intrinsic_dim
    in_x = kind == "poisson"
    base = np.array([float(c) for c in as_vector(X if in_x else Y)])
    other = as_vector(Y if in_x else X)

    # finite differences divide by h^2, so float-path cancellation noise
    # gets amplified; switch to the exact-geometry path when the probe
    # shows the alternating sum losing more than a few digits
    probe = kernel_w(rs, kind, X, Y, t=t)
    method = "hp" if probe.cancellation > 1e4 else None
    bits = None
    if method == "hp":
        bits = int(160 + math.log2(max(probe.cancellation, 2.0)))

    def f(pt: np.ndarray, tt: float | None) -> float:
        p = tuple(pt)
        args = (p, other) if in_x else (other, p)
        v = kernel_w(rs, kind, args[0], args[1], t=tt, method=method, precision=bits).value
        return v * float(pi_over(rs, as_vector(p)))

    t_args = t if kind == "heat" else None
    center = f(base, t_args)
    lap = 0.0
    second_scale = 0.0
    for k in range(d):
        e = B[:, k]
        plus = f(base + h * e, t_args)
        minus = f(base - h * e, t_args)
        dd = (plus - 2.0 * center + minus) / (h * h)
        lap += dd
        second_scale += abs(dd)
    if kind == "heat":
        if t is None or t <= h:
            raise DomainError("heat residual needs t > h")
        dt_f = (f(base, t + h) - f(base, t - h)) / (2.0 * h)
        defect = dt_f - lap
        scale = second_scale + abs(dt_f)
    else:
        defect = lap
        scale = second_scale
    if scale == 0.0:
        scale = abs(center) / (h * h) if center != 0.0 else 1.0
    return ResidualReport(abs(defect) / scale, defect, scale, h)
