"""Amplitude shooting for the radial equations

    v'' = -(d-1) v'/r + (kappa + b2q r^2) v - s |v|^(p-2) v,   v(0) = a, v'(0) = 0.

s = +1 with kappa = alpha covers the decaying (p > 2) problems, s = -1 with
kappa = -nu the compact-support (p < 2) ones.  b2q = B^2/4 adds the harmonic
confinement of a constant magnetic field (d = 2 only).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .errors import IntegrationError, SolverError
from .profiles import RadialProfile, SolverConfig, _hermite_eval

_EMPTY = np.zeros(1)

CROSSED = "crossed"
REBOUND = "rebound"
DECAY = "converged-decay"
TOUCHDOWN = "tangential-touchdown"

_CODE_NAMES = {K.CROSSED: CROSSED, K.REBOUND: REBOUND, K.DECAYED: DECAY, K.TOUCHDOWN: TOUCHDOWN}


@dataclass(frozen=True)
class RadialEquation:
    d: int
    p: float
    kappa: float
    b2q: float = 0.0
    s: float = 1.0

    @property
    def params(self):
        return np.array([self.d, self.p, self.kappa, self.b2q, self.s], dtype=float)

    def rhs(self, r, v, dv):
        """v'' from the equation (vectorized)."""
        v = np.asarray(v, dtype=float)
        nl = np.abs(v) ** (self.p - 2.0) * v if self.p >= 2 else np.sign(v) * np.abs(v) ** (self.p - 1.0)
        return -(self.d - 1) * dv / r + (self.kappa + self.b2q * r * r) * v - self.s * nl

    def origin_data(self, a, r0):
        # two-term series v = a + c2 r^2
        c2 = (self.kappa * a - self.s * a ** (self.p - 1.0)) / (2.0 * self.d)
        return a + c2 * r0 * r0, 2.0 * c2 * r0


@dataclass
class ShootOutcome:
    classification: str
    event_radius: float
    profile: RadialProfile
    amplitude: float = 0.0
    code: int = -1
    diagnostics: dict = field(default_factory=dict)


def shoot(eq: RadialEquation, a: float, config: SolverConfig, r_end: float | None = None,
          touch_tol: float = 0.0, decay_tol: float = 0.0) -> ShootOutcome:
    """Integrate one trajectory and classify it.

    Trajectories that reach ``r_end`` without an event are extended (doubling the
    window up to ``config.r_max_limit``) before giving up.
    """
    if not (a > 0 and math.isfinite(a)):
        raise SolverError(f"amplitude must be positive and finite, got {a}")
    r0 = config.r0
    v0, dv0 = eq.origin_data(a, r0)
    r_end = config.r_max if r_end is None else r_end
    while True:
        code, er, n, rs, vs, dvs, d2vs, _ = K.integrate_radial(
            K.MODEL_GROUND, eq.params, _EMPTY, _EMPTY, _EMPTY, _EMPTY,
            r0, v0, dv0, r_end, config.rtol, config.atol_rel * a, config.h_max,
            K.MODE_SHOOT, a, touch_tol, decay_tol, config.max_steps)
        if code == K.END_REACHED and r_end < config.r_max_limit:
            r_end = min(2.0 * r_end, config.r_max_limit)
            continue
        break
    if code in (K.STEP_FAILURE, K.MAX_STEPS, K.BLOWUP):
        raise IntegrationError(
            f"radial integration failed (code {code}) at r={er:.6g} for a={a:.17g}, "
            f"p={eq.p}, kappa={eq.kappa}, b2q={eq.b2q}")
    if code == K.END_REACHED:
        raise SolverError(f"no classifying event before r={r_end:g} for a={a:.17g}")
    prof = RadialProfile(rs.copy(), vs.copy(), dvs.copy(), a, math.inf, eq.d, d2vs.copy())
    return ShootOutcome(_CODE_NAMES[code], float(er), prof, a, int(code),
                        {"v_end": float(vs[-1]), "dv_end": float(dvs[-1]), "steps": int(n)})


def find_bracket(eq: RadialEquation, config: SolverConfig, guess: float = 1.0, factor: float = 2.0):
    """Geometric search for adjacent amplitudes classified rebound (low) and crossed (high)."""
    a = min(max(guess, config.amp_min), config.amp_max)
    out = shoot(eq, a, config)
    if out.classification == CROSSED:
        hi, hi_out = a, out
        while True:
            a = hi / factor
            if a < config.amp_min:
                raise SolverError(f"no rebound amplitude found down to {config.amp_min:g}")
            out = shoot(eq, a, config)
            if out.classification == REBOUND:
                return (a, out), (hi, hi_out)
            hi, hi_out = a, out
    lo, lo_out = a, out
    while True:
        a = lo * factor
        if a > config.amp_max:
            raise SolverError(f"no crossing amplitude found up to {config.amp_max:g}")
        out = shoot(eq, a, config)
        if out.classification == CROSSED:
            return (lo, lo_out), (a, out)
        lo, lo_out = a, out


def scan_brackets(eq: RadialEquation, config: SolverConfig, a_min: float, a_max: float, n: int):
    """All rebound/crossed transitions on a geometric amplitude grid."""
    grid = np.geomspace(a_min, a_max, n)
    outs = [shoot(eq, float(a), config) for a in grid]
    found = []
    for i in range(n - 1):
        c0, c1 = outs[i].classification, outs[i + 1].classification
        if c0 == REBOUND and c1 == CROSSED:
            found.append(((float(grid[i]), outs[i]), (float(grid[i + 1]), outs[i + 1])))
    return found, [o.classification for o in outs]


def bisect_amplitude(eq: RadialEquation, config: SolverConfig, lo, hi):
    """Bisect a rebound/crossed bracket down to ``config.bracket_tol`` (or machine resolution)."""
    (a_lo, out_lo), (a_hi, out_hi) = lo, hi
    iters = 0
    while True:
        if a_hi - a_lo <= config.bracket_tol * a_hi:
            break
        mid = 0.5 * (a_lo + a_hi)
        if mid <= a_lo or mid >= a_hi:
            break
        out = shoot(eq, mid, config)
        iters += 1
        if out.classification == CROSSED:
            a_hi, out_hi = mid, out
        elif out.classification == REBOUND:
            a_lo, out_lo = mid, out
        else:
            raise SolverError(f"unexpected classification {out.classification} during bisection")
        if iters > 400:
            raise SolverError("bisection did not terminate")
    if out_lo.classification != REBOUND or out_hi.classification != CROSSED:
        raise SolverError("bracket endpoints lost their opposite classifications")
    return (a_lo, out_lo), (a_hi, out_hi), iters


def _interp_on(profile: RadialProfile, r):
    return _hermite_eval(profile.nodes, profile.values, profile.derivative_values,
                         profile.second_derivative_values, r)[0]


def decaying_profile(eq: RadialEquation, lo, hi, config: SolverConfig) -> tuple[RadialProfile, dict]:
    """Assemble the decaying solution from a converged bracket.

    Both bracket trajectories agree with the true solution until round-off driven
    divergence sets in; the profile is cut where they separate by more than
    ``mismatch_tol`` relative, or where v drops below ``decay_tol * a``.
    """
    (a_lo, out_lo), (a_hi, out_hi) = lo, hi
    p_hi, p_lo = out_hi.profile, out_lo.profile
    r_common = min(p_hi.nodes[-1], p_lo.nodes[-1])
    xs = p_hi.nodes
    vs = p_hi.values
    mask = xs <= r_common
    other = _interp_on(p_lo, xs[mask])
    rel = np.abs(other - vs[mask]) / np.maximum(np.abs(vs[mask]), 1e-300)
    bad = np.nonzero((rel > config.mismatch_tol) | (vs[mask] <= config.decay_tol * a_hi))[0]
    cut = int(bad[0]) if bad.size else int(mask.sum())
    cut = max(cut, 2)
    reason = "mismatch" if bad.size and vs[mask][bad[0]] > config.decay_tol * a_hi else "decay"
    prof = RadialProfile(xs[:cut].copy(), vs[:cut].copy(), p_hi.derivative_values[:cut].copy(),
                         0.5 * (a_lo + a_hi), math.inf, eq.d, p_hi.second_derivative_values[:cut].copy())
    meta = {
        "truncation_radius": float(xs[cut - 1]),
        "truncation_value_rel": float(vs[cut - 1] / a_hi),
        "truncation_reason": reason,
        "bracket": [a_lo, a_hi],
        "bracket_rel_width": (a_hi - a_lo) / a_hi,
        "n_nodes": int(cut),
    }
    prof.metadata.update(meta)
    return prof, meta


def _support_extrapolation(eq: RadialEquation, prof: RadialProfile, noise: float) -> list[float]:
    """Free-boundary radius R from the local law v ~ c (R - r)^k, k = 2/(2-p).

    Along the trajectory R(r) = r - k v/v' tends to R with an O((R-r)^2) error;
    a low-order fit of R(r) is solved for the fixed point R(r) = r.  Only points
    where the nonlinearity dominates the linear term (rho < rho_max) and v sits
    well above the round-off layer (``noise``) are used.  One estimate per usable
    window is returned, so their scatter measures the window sensitivity.
    """
    k = 2.0 / (2.0 - eq.p)
    xs, vs, dvs = prof.nodes, prof.values, prof.derivative_values
    rho = np.abs(eq.kappa + eq.b2q * xs * xs) * np.abs(vs) ** (2.0 - eq.p)
    base = (vs > 1e4 * noise) & (dvs < 0)
    out = []
    for rho_max in (0.01, 0.03, 0.1, 0.3):
        idx = np.nonzero(base & (rho < rho_max))[0]
        if idx.size < 6:
            continue
        rs = xs[idx]
        est = rs - k * vs[idx] / dvs[idx]
        x = rs - rs[-1]
        coef = np.polyfit(x, est - rs[-1], 3 if idx.size >= 12 else 2)
        coef[-2] -= 1.0
        roots = np.roots(coef)
        roots = roots[np.abs(roots.imag) < 1e-12].real
        if roots.size == 0:
            continue
        guess = est[-1] - rs[-1]
        out.append(float(rs[-1] + roots[np.argmin(np.abs(roots - guess))]))
        if len(out) == 2:
            break
    return out


def compact_profile(eq: RadialEquation, lo, hi, config: SolverConfig) -> tuple[RadialProfile, dict]:
    """Assemble the compactly supported solution from a converged bracket.

    The rebound-side trajectory stops where v' = 0 with v tiny, which is a
    numerical tangential touchdown.  Its location is ill-conditioned in a, so the
    free-boundary radius is taken from :func:`_support_extrapolation` on both
    bracket trajectories (two fit windows each); the half-range of the
    estimates is reported as the uncertainty.
    """
    (a_lo, out_lo), (a_hi, out_hi) = lo, hi
    prof_lo, prof_hi = out_lo.profile, out_hi.profile
    a = a_lo
    v_event = float(prof_lo.values[-1])
    dv_event = float(prof_lo.derivative_values[-1])
    touch_res = max(abs(v_event), abs(dv_event)) / a
    k = 2.0 / (2.0 - eq.p)
    cross_slope = abs(float(prof_hi.derivative_values[-1]))
    noise_lo = max(abs(v_event), 1e-16 * a)
    # value scale at which the crossing trajectory departs, from v' ~ v^((k-1)/k)
    noise_hi = max(cross_slope ** (k / (k - 1.0)), 1e-16 * a)
    estimates = _support_extrapolation(eq, prof_lo, noise_lo) + _support_extrapolation(eq, prof_hi, noise_hi)
    r_event = float(out_lo.event_radius)
    estimates = [r for r in estimates if r_event * 0.98 < r < r_event * 1.05]
    if estimates:
        R = float(np.median(estimates))
        R_unc = 0.5 * (max(estimates) - min(estimates)) if len(estimates) > 1 else abs(R - r_event)
    else:
        R, R_unc = r_event, abs(r_event - float(out_hi.event_radius))

    xs, vs, dvs = prof_lo.nodes, prof_lo.values, prof_lo.derivative_values
    d2s = prof_lo.second_derivative_values
    keep = (xs < R) & (vs > 1e3 * noise_lo)
    last = int(np.nonzero(keep)[0][-1]) + 1 if np.any(keep) else 1
    nodes = np.append(xs[:last], R)
    values = np.append(vs[:last], 0.0)
    dvalues = np.append(dvs[:last], 0.0)
    d2values = np.append(d2s[:last], 0.0)
    prof = RadialProfile(nodes, values, dvalues, a, R, eq.d, d2values)
    meta = {
        "support_radius": R,
        "support_radius_uncertainty": R_unc,
        "touchdown_residual": touch_res,
        "crossing_slope_rel": cross_slope / a_hi,
        "rebound_radius": r_event,
        "crossing_radius": float(out_hi.event_radius),
        "bracket": [a_lo, a_hi],
        "bracket_rel_width": (a_hi - a_lo) / a_hi,
        "n_nodes": int(nodes.size),
    }
    prof.metadata.update(meta)
    return prof, meta


def ode_residual(eq: RadialEquation, profile: RadialProfile, layer: float = 1e-8,
                 floor_tol: float = 1e-10, details: bool = False):
    """Max over interval midpoints of |v'' - rhs(v, v')|, using the interpolant.

    Measured relative to a * max(1, |kappa|, a^(p-2)), the size of the terms of
    the equation at the origin, so large spectral parameters are not penalized.

    Skipped: intervals whose round-off floor (see below) exceeds ``floor_tol``,
    which happens only for the shortest steps next to the origin, and (compact
    profiles) the free-boundary layer v < layer * a where v ~ (R - r)^(2/(2-p))
    is not smooth.  With ``details`` a dict with the skipped radii is returned too.
    """
    xs = profile.nodes
    if xs.size < 2:
        return 0.0
    a = profile.initial_amplitude
    scale = a * max(1.0, abs(eq.kappa), a ** (eq.p - 2.0))
    h = np.diff(xs)
    mids = 0.5 * (xs[:-1] + xs[1:])
    v, dv, d2v = _hermite_eval(xs, profile.values, profile.derivative_values,
                               profile.second_derivative_values, mids)
    # round-off floor of the diagnostic: eps |v| / h enters the interpolated v'
    # and is amplified by (d-1)/r; eps |v'| / h enters the interpolated v''
    eps = np.finfo(float).eps
    vmax = np.maximum(np.abs(profile.values[:-1]), np.abs(profile.values[1:]))
    dvmax = np.maximum(np.abs(profile.derivative_values[:-1]), np.abs(profile.derivative_values[1:]))
    floor = 4.0 * eps * (vmax * (eq.d - 1) / (mids * h) + dvmax / h + np.abs(d2v)) / scale
    ok = floor < floor_tol
    if profile.is_compact:
        ok &= v > layer * a
        ok[-1] = False
    res = np.abs(d2v - eq.rhs(mids, v, dv))[ok]
    value = float(np.max(res) / scale) if res.size else 0.0
    if not details:
        return value
    skipped = mids[~ok]
    return value, {"checked": int(ok.sum()), "skipped": int((~ok).sum()),
                   "skipped_below": float(skipped[skipped < 0.5 * xs[-1]].max()) if np.any(skipped < 0.5 * xs[-1]) else 0.0}
