"""Sharp radial curves for the 2D constant-field problems.

mu_EL(alpha), p > 2: decaying positive solution of
    -v'' - v'/r + (B^2 r^2/4 + alpha) v = v^(p-1),   mu = (|v|_p^p)^(1-2/p).
beta(nu), 1 < p < 2: compactly supported solution of
    -v'' - v'/r + (B^2 r^2/4) v = nu v - v^(p-1),    beta = (|v|_p^p)^(1-2/p),
and nu_EL(beta) as the inverse.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .curves import BoundCurve, invert_curve, monotonicity_violations
from .errors import CurveError, DomainError, InputError, SolverError
from .ground_states import _cfg, compute_C_p
from .profiles import RadialProfile, SolverConfig, weighted_integral
from .shooting import (CROSSED, REBOUND, RadialEquation, ShootOutcome, bisect_amplitude, compact_profile,
                       decaying_profile, find_bracket, ode_residual, scan_brackets, shoot)

__all__ = ["ShootOutcome", "ELPoint", "shoot_supercritical", "shoot_subcritical", "solve_mu_el",
           "solve_nu_el", "nu_el_at_beta", "build_curve", "invert_curve", "el_r_max"]


@dataclass
class ELPoint:
    parameter: float
    value: float
    amplitude: float
    profile: RadialProfile
    support_radius: float | None = None
    problem: str = "mu"
    p: float = 3.0
    B: float = 1.0
    metadata: dict = field(default_factory=dict)


def _check_field(B):
    if not (B >= 0 and math.isfinite(B)):
        raise DomainError(f"field strength must be finite and >= 0, got {B}")


def el_r_max(B: float, alpha: float, floor: float = 8.0) -> float:
    """Window with B^2 r^2/4 >= 50 (|alpha| + 1)."""
    if B <= 0:
        return max(floor, 40.0)
    return max(floor, math.sqrt(200.0 * (abs(alpha) + 1.0)) / B)


def _mu_equation(p, B, alpha):
    if not p > 2:
        raise DomainError(f"mu problem needs p > 2, got {p}")
    _check_field(B)
    if not alpha > -B:
        raise DomainError(f"alpha = {alpha} must exceed -B = {-B}")
    if B == 0 and alpha <= 0:
        raise DomainError("alpha must be positive at zero field")
    return RadialEquation(2, p, alpha, 0.25 * B * B, 1.0)


def _nu_equation(p, B, nu):
    if not 1 < p < 2:
        raise DomainError(f"nu problem needs 1 < p < 2, got {p}")
    _check_field(B)
    if not nu > B:
        raise DomainError(f"nu = {nu} must exceed the gap B = {B}")
    return RadialEquation(2, p, -nu, 0.25 * B * B, -1.0)


def shoot_supercritical(p: float, B: float, alpha: float, a: float,
                        config: SolverConfig | None = None) -> ShootOutcome:
    eq = _mu_equation(p, B, alpha)
    cfg = _cfg(config)
    if B > 0:
        cfg = cfg.updated(r_max=el_r_max(B, alpha, cfg.r_max_floor))
    return shoot(eq, a, cfg)


def shoot_subcritical(p: float, B: float, nu: float, a: float, config: SolverConfig | None = None,
                      touch_tol: float = 1e-10) -> ShootOutcome:
    """One trajectory; |v|, |v'| < touch_tol * a together count as tangential touchdown."""
    eq = _nu_equation(p, B, nu)
    return shoot(eq, a, _cfg(config), touch_tol=touch_tol)


def solve_mu_el(p: float, B: float, alpha: float, config: SolverConfig | None = None) -> ELPoint:
    eq = _mu_equation(p, B, alpha)
    cfg = _cfg(config)
    if B > 0:
        cfg = cfg.updated(r_max=el_r_max(B, alpha, cfg.r_max_floor))
    # profile width shrinks like alpha^(-1/2); keep the interpolant resolved
    cfg = cfg.updated(h_max=cfg.h_max / max(1.0, abs(alpha) + B) ** 0.6)
    # zero-field scaling suggests a ~ max(alpha, B)^(1/(p-2))
    guess = max(alpha + B, 1e-3) ** (1.0 / (p - 2.0))
    lo, hi = find_bracket(eq, cfg, guess=guess)
    lo, hi, iters = bisect_amplitude(eq, cfg, lo, hi)
    prof, meta = decaying_profile(eq, lo, hi, cfg)
    res = ode_residual(eq, prof)
    if res > cfg.residual_tol:
        raise SolverError(f"ODE residual {res:.3g} exceeds {cfg.residual_tol:g} at alpha={alpha}")
    I = weighted_integral(prof, p, cfg.quad_tol)
    # the exponential tail past the cut uses the local rate, an overestimate
    # under harmonic confinement, so mu is biased upward by at most this much
    v_end, dv_end = prof.values[-1], prof.derivative_values[-1]
    tail = 0.0
    if v_end > 0 and dv_end < 0:
        r_end = prof.nodes[-1]
        k = -p * dv_end / v_end
        tail = 2.0 * math.pi * v_end ** p * (r_end / k + 1.0 / k ** 2)
    value = I ** (1.0 - 2.0 / p)
    prof.metadata.update(ode_residual=res, bisection_steps=iters, r_max=cfg.r_max,
                         tail_fraction=tail / I, mu_bias_bound=value * (1.0 - 2.0 / p) * tail / I)
    return ELPoint(alpha, value, prof.initial_amplitude, prof, None, "mu", p, B,
                   {"ode_residual": res, "truncation_radius": meta["truncation_radius"],
                    "integral_p": I, "tail_fraction": tail / I})


def _compact_candidate(eq, cfg, lo, hi, p):
    lo, hi, iters = bisect_amplitude(eq, cfg, lo, hi)
    prof, meta = compact_profile(eq, lo, hi, cfg)
    I = weighted_integral(prof, p, cfg.quad_tol)
    return prof, meta, I, iters


def solve_nu_el(p: float, B: float, nu: float, config: SolverConfig | None = None,
                scan: bool = True) -> ELPoint:
    """Compact-support solution; among touchdown candidates the one with least |v|_p^p is kept."""
    eq = _nu_equation(p, B, nu)
    cfg = _cfg(config)
    if B > 0:
        cfg = cfg.updated(r_max=max(cfg.r_max, 2.0 * math.sqrt(4.0 * nu) / B + 4.0))
    try:
        lo, hi = find_bracket(eq, cfg, guess=1.0)
    except SolverError as exc:
        raise SolverError(f"no touchdown bracket for p={p}, B={B}, nu={nu}: {exc}") from exc
    brackets = [(lo, hi)]
    if scan:
        # look for further rebound/crossed transitions in a window 4x wider each way
        found, _ = scan_brackets(eq, cfg, lo[0] / 4.0, hi[0] * 4.0, 25)
        for b in found:
            if not (b[0][0] <= hi[0] and b[1][0] >= lo[0]):
                brackets.append(b)
    best = None
    for b in brackets:
        cand = _compact_candidate(eq, cfg, b[0], b[1], p)
        if cand[1]["touchdown_residual"] > cfg.touch_tol:
            continue
        if best is None or cand[2] < best[2]:
            best = cand
    if best is None:
        raise SolverError(f"no candidate met the touchdown tolerance for nu={nu}")
    prof, meta, I, iters = best
    res = ode_residual(eq, prof)
    if res > cfg.residual_tol:
        raise SolverError(f"ODE residual {res:.3g} exceeds {cfg.residual_tol:g} at nu={nu}")
    value = I ** (1.0 - 2.0 / p)
    prof.metadata.update(ode_residual=res, bisection_steps=iters, touchdown_candidates=len(brackets))
    return ELPoint(nu, value, prof.initial_amplitude, prof, prof.support_radius, "nu", p, B,
                   {"ode_residual": res, "integral_p": I, "touchdown_residual": meta["touchdown_residual"],
                    "support_radius_uncertainty": meta["support_radius_uncertainty"],
                    "touchdown_candidates": len(brackets)})


def nu_el_at_beta(p: float, B: float, beta: float, config: SolverConfig | None = None,
                  bracket: tuple[float, float] | None = None, xtol: float = 1e-12) -> ELPoint:
    """Solve beta(nu) = beta for nu.  The returned point carries nu as ``parameter``;
    ``metadata['nu']`` repeats it and ``value`` is the attained beta."""
    if not (beta > 0 and math.isfinite(beta)):
        raise DomainError(f"beta must be positive and finite, got {beta}")
    _check_field(B)
    if not B > 0:
        raise DomainError("nu_EL needs B > 0")
    cfg = _cfg(config)
    cache = {}

    def g(nu):
        if nu not in cache:
            cache[nu] = solve_nu_el(p, B, nu, cfg)
        return math.log(cache[nu].value / beta)

    floor = B * (1.0 + 1e-9)
    lo, hi = bracket if bracket else (1.5 * B, 2.0 * B + 1.0)
    lo = max(lo, floor)
    hi = max(hi, lo * (1.0 + 1e-6))
    for _ in range(60):
        if g(lo) <= 0:
            break
        lo = B + 0.5 * (lo - B)
    else:
        raise SolverError(f"beta = {beta} is below the reachable range near nu = B")
    for _ in range(60):
        if g(hi) >= 0:
            break
        hi = B + 2.0 * (hi - B)
    else:
        raise SolverError(f"no nu with beta(nu) >= {beta}")
    nu = brentq(g, lo, hi, xtol=xtol * B, rtol=1e-13, maxiter=200)
    pt = cache.get(nu) or solve_nu_el(p, B, nu, cfg)
    pt.metadata["nu"] = nu
    pt.metadata["beta_target"] = beta
    return pt


def _run(solver, x, config):
    return solver(x, config)


def _solve_all(solver, grid, config, workers):
    if workers and workers > 1 and len(grid) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_run, [solver] * len(grid), grid, [config] * len(grid)))
    return [solver(x, config) for x in grid]


def build_curve(solver, parameter_grid, config: SolverConfig | None = None, workers: int | None = None,
                refine: bool = True) -> BoundCurve:
    """Sample solver(x, config) -> ELPoint on a grid and assemble a BoundCurve.

    mu solvers give an alpha-curve of mu; nu solvers are sampled in nu and the
    result is stored as the inverse curve beta -> nu.  A local decrease in the
    samples triggers one re-solve of the offending nodes with tighter
    tolerances; a decrease that survives is reported as a CurveError.
    """
    grid = np.asarray(parameter_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise InputError("parameter grid needs at least two points")
    if np.any(np.diff(grid) <= 0):
        raise InputError("parameter grid must be strictly increasing")
    cfg = _cfg(config)
    points = _solve_all(solver, grid.tolist(), cfg, workers)
    values = np.array([pt.value for pt in points])
    problem = points[0].problem
    bad = monotonicity_violations(values)
    if bad and refine:
        tight = cfg.updated(rtol=cfg.rtol * 0.1, quad_tol=cfg.quad_tol * 0.1)
        redo = sorted({j for i in bad for j in (i, i + 1)})
        for j in redo:
            points[j] = solver(float(grid[j]), tight)
        values = np.array([pt.value for pt in points])
        bad = monotonicity_violations(values)
    if bad:
        raise CurveError(f"sampled {problem} curve is not increasing at nodes "
                         f"{[(float(grid[i]), float(values[i]), float(values[i + 1])) for i in bad]}")
    p, B = points[0].p, points[0].B
    C = compute_C_p(2, p).C_p
    meta = {"p": p, "B": B, "residuals": [pt.metadata.get("ode_residual") for pt in points],
            "amplitudes": [pt.amplitude for pt in points]}
    if problem == "mu":
        return BoundCurve("alpha", grid, values, "sharp-numeric", f"mu_EL shooting, p={p}, B={B}",
                          True, {"left": (-B, 0.0), "right": (C, 2.0 / p)}, meta)
    meta["nu"] = grid.tolist()
    meta["support_radii"] = [pt.support_radius for pt in points]
    return BoundCurve("beta", values, grid, "sharp-numeric", f"nu_EL shooting (inverse of beta(nu)), p={p}, B={B}",
                      True, {"left": (0.0, B), "right": (C, p / 2.0)}, meta)
