"""Linear stability of the radial optimizer against angular-momentum-one perturbations.

The perturbation problem on L^2((0, inf), r dr) is

    -v'' - v'/r + ((m/r - B r/2)^2 + alpha) v - (p/2) psi0^(p-2) v = mu v,  m = 1.

With v = r w it becomes a four-dimensional radial problem for w,
    -w'' - 3 w'/r + (-m B + B^2 r^2/4 + alpha - (p/2) psi0^(p-2)) w = mu w,
which is regular at the origin.  Both solvers below work with w.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import _kernels as K
from .errors import AccuracyError, InputError, IntegrationError, SolverError
from .profiles import RadialProfile, radial_quadrature
from .shooting import RadialEquation, ode_residual


@dataclass(frozen=True)
class StabilityConfig:
    fd_step: float = 0.01
    richardson_levels: int = 3
    r_margin: float = 50.0
    agreement_tol: float = 1e-6
    shoot_rtol: float = 1e-12
    shoot_h_max: float = 0.02
    bisect_tol: float = 1e-13
    max_steps: int = 400_000


@dataclass
class StabilityResult:
    alpha: float
    mu_eig: float
    base_profile_ref: str
    method: str
    discretization: dict
    mu_fd: float = math.nan
    mu_shoot: float = math.nan
    eigenfunction: RadialProfile | None = None
    metadata: dict = field(default_factory=dict)


def _base_profile(psi0, p, B, alpha, check=True) -> tuple[RadialProfile, str]:
    """Accept an ELPoint or a RadialProfile; reject profiles that do not match (p, B, alpha)."""
    prof = getattr(psi0, "profile", psi0)
    if not isinstance(prof, RadialProfile):
        raise InputError("psi0 must be an ELPoint or a RadialProfile")
    if hasattr(psi0, "profile"):
        if psi0.problem != "mu" or psi0.p != p or psi0.B != B or psi0.parameter != alpha:
            raise InputError(f"psi0 was computed for (p={psi0.p}, B={psi0.B}, alpha={psi0.parameter}), "
                             f"not (p={p}, B={B}, alpha={alpha})")
    if prof.is_compact or prof.d != 2 or prof.second_derivative_values is None:
        raise InputError("psi0 must be a decaying 2D profile with second derivatives")
    if check:
        res = ode_residual(RadialEquation(2, p, alpha, 0.25 * B * B, 1.0), prof)
        if res > 1e-6:
            raise InputError(f"psi0 does not solve the Euler-Lagrange equation for "
                             f"(p={p}, B={B}, alpha={alpha}): residual {res:.3g}")
    ref = f"mu_EL(p={p!r}, B={B!r}, alpha={alpha!r}), a={prof.initial_amplitude!r}"
    return prof, ref


def _potential(prof, p, B, alpha, m, scale):
    """q(r) of the w-equation (without mu)."""
    def q(r):
        psi = prof.evaluate(r)[0]
        nl = 0.5 * p * np.abs(psi) ** (p - 2.0) if scale != 0.0 else 0.0
        return -m * B + 0.25 * B * B * r * r + alpha - scale * nl
    return q


def _r_max(prof, p, B, alpha, m, scale, margin, level):
    """Radius where the harmonic part of q exceeds a crude bound on mu by ``margin``."""
    psi_max = float(np.max(np.abs(prof.values)))
    depth = scale * 0.5 * p * psi_max ** (p - 2.0)
    mu_bound = alpha + (2 * level + 3) * B + abs(m) * B
    if B > 0:
        return 2.0 * math.sqrt(max(mu_bound + margin + depth + B - alpha, 1.0)) / B
    raise InputError("stability analysis needs B > 0 (otherwise the spectrum is not discrete)")


def fd_eigenvalues(q, r_max: float, h: float, count: int = 1) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Lowest eigenvalues of -w'' - 3w'/r + q w on (0, r_max), w(r_max) = 0.

    Cell-centred grid r_i = (i - 1/2) h; the r^3 flux vanishes at the origin,
    the Dirichlet value sits on the outer face.  The generalized problem
    K w = mu diag(r^3) w is symmetrized with diag(r^(3/2)).
    """
    n = int(round(r_max / h))
    h = r_max / n
    r = (np.arange(1, n + 1) - 0.5) * h
    faces = np.arange(1, n + 1) * h
    f3 = faces ** 3
    w3 = r ** 3
    diag = np.empty(n)
    diag[0] = f3[0]
    diag[1:] = f3[1:] + f3[:-1]
    diag[-1] = f3[-2] + 2.0 * f3[-1]
    diag = diag / (h * h) / w3 + q(r)
    off = -f3[:-1] / (h * h) / np.sqrt(w3[:-1] * w3[1:])
    vals, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, count - 1))
    # back to w and a positive sign at the origin
    vecs = vecs / np.sqrt(w3)[:, None]
    vecs = vecs * np.sign(vecs[0])[None, :]
    # the tridiagonal eigenvalues carry rounding of order eps / h^2; the Rayleigh
    # quotient in difference form does not, and is exact to second order in the vector
    dw = np.diff(vecs, axis=0)
    energy = (f3[:-1, None] * dw ** 2).sum(axis=0) + 2.0 * f3[-1] * vecs[-1] ** 2
    energy = energy / (h * h) + (q(r)[:, None] * w3[:, None] * vecs ** 2).sum(axis=0)
    vals = energy / (w3[:, None] * vecs ** 2).sum(axis=0)
    return vals, r, vecs


def _richardson(q, r_max, h, levels, level):
    ests = []
    hs = []
    for j in range(levels):
        hj = h / 2 ** j
        vals, _, _ = fd_eigenvalues(q, r_max, hj, level + 1)
        ests.append(float(vals[level]))
        hs.append(r_max / int(round(r_max / hj)))
    # second-order scheme: eliminate the h^2 term (and h^4 with three levels)
    t1 = [(4.0 * ests[j + 1] - ests[j]) / 3.0 for j in range(len(ests) - 1)]
    if len(t1) >= 2:
        best = (16.0 * t1[-1] - t1[-2]) / 15.0
        err = abs(t1[-1] - t1[-2])
    elif t1:
        best, err = t1[-1], abs(ests[-1] - ests[-2])
    else:
        best, err = ests[-1], math.nan
    return best, err, ests, hs


def _sector_params(p, B, alpha, mu, m):
    return np.array([p, B, alpha, mu, m], dtype=float)


def _shoot_sector(tabs, params, q0, r_max, cfg: StabilityConfig):
    r0 = 1e-6
    mu = params[3]
    w0 = 1.0
    dw0 = 0.25 * (q0 - mu) * r0
    out = K.integrate_radial(K.MODEL_SECTOR, params, tabs[0], tabs[1], tabs[2], tabs[3],
                             r0, w0, dw0, r_max, cfg.shoot_rtol, 1e-300, cfg.shoot_h_max,
                             K.MODE_FREE, 1.0, 0.0, 0.0, cfg.max_steps)
    code = out[0]
    if code in (K.STEP_FAILURE, K.MAX_STEPS):
        raise IntegrationError(f"sector integration failed (code {code}) at r={out[1]:.6g}, mu={mu!r}")
    return out


def _nodes_of(out):
    """Zeros of w in (0, r_max], counting w(r_max) <= 0 as one more."""
    code, _, n, rs, ws, dws, d2ws, changes = out
    extra = 1 if (code == K.END_REACHED and ws[-1] <= 0.0 and changes % 2 == 0) else 0
    return changes + extra


def shoot_eigenvalue(prof, p, B, alpha, r_max, m=1, scale=1.0, level=0, cfg: StabilityConfig | None = None,
                     guess: float | None = None):
    """Bisection on mu by counting nodes of w on (0, r_max] (Dirichlet at r_max)."""
    cfg = cfg or StabilityConfig()
    if scale == 0.0:
        # table of zeros: the nonlinear term drops out exactly
        tabs = (np.array([0.0, 1.0]), np.zeros(2), np.zeros(2), np.zeros(2))
        pp = 3.0
    else:
        tabs = (prof.nodes, prof.values * scale ** (1.0 / (p - 2.0)), prof.derivative_values * scale ** (1.0 / (p - 2.0)),
                prof.second_derivative_values * scale ** (1.0 / (p - 2.0)))
        pp = p
    psi_origin = float(tabs[1][0])
    q0 = -m * B + alpha - (0.5 * pp * abs(psi_origin) ** (pp - 2.0) if psi_origin != 0.0 else 0.0)

    def count(mu):
        return _nodes_of(_shoot_sector(tabs, _sector_params(pp, B, alpha, mu, m), q0, r_max, cfg))

    span = max(1.0, abs(guess) if guess is not None else 1.0)
    lo = (guess if guess is not None else alpha) - span
    hi = (guess if guess is not None else alpha) + span
    for _ in range(200):
        if count(lo) <= level:
            break
        lo -= 2.0 * (hi - lo)
    else:
        raise SolverError("could not bracket the eigenvalue from below")
    for _ in range(200):
        if count(hi) > level:
            break
        hi += 2.0 * (hi - lo)
    else:
        raise SolverError("could not bracket the eigenvalue from above")
    while hi - lo > cfg.bisect_tol * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if count(mid) > level:
            hi = mid
        else:
            lo = mid
    out_lo = _shoot_sector(tabs, _sector_params(pp, B, alpha, lo, m), q0, r_max, cfg)
    out_hi = _shoot_sector(tabs, _sector_params(pp, B, alpha, hi, m), q0, r_max, cfg)
    return 0.5 * (lo + hi), (lo, hi), out_lo, out_hi


def _eigenfunction(out_lo, out_hi, mismatch=1e-3) -> RadialProfile:
    """v = r w from the two bracketing trajectories.

    Cut where they separate (relative to the local size of w) or where w turns
    upward, whichever comes first; beyond that the growing mode dominates.
    """
    rs, ws, dws, d2ws = (np.asarray(a) for a in out_lo[3:7])
    other = np.interp(rs, np.asarray(out_hi[3]), np.asarray(out_hi[4]))
    bad = np.abs(other - ws) > mismatch * np.abs(ws)
    started = np.cumsum(dws < 0) > 0
    bad |= started & (dws > 0) & (ws > 0)
    idx = np.nonzero(bad)[0]
    cut = int(idx[0]) if idx.size else rs.size
    cut = max(cut, 4)
    rs, ws, dws, d2ws = rs[:cut], ws[:cut], dws[:cut], d2ws[:cut]
    v = rs * ws
    dv = ws + rs * dws
    d2v = 2.0 * dws + rs * d2ws
    # normalize so that v'(0) = 1
    s = 1.0 / ws[0]
    prof = RadialProfile(rs, v * s, dv * s, 0.0, math.inf, 2, d2v * s)
    prof.metadata.update(cut_radius=float(rs[-1]), cut_value=float(v[-1] * s))
    return prof


def lowest_c1_eigenvalue(psi0, p: float, B: float, alpha: float, config: StabilityConfig | None = None,
                         m: int = 1, nonlinearity_scale: float = 1.0, level: int = 0,
                         check_base: bool = True) -> StabilityResult:
    """Bottom (or ``level``-th) eigenvalue of the perturbation operator.

    Finite differences with Richardson extrapolation, cross-checked by
    shooting with node counting; both use Dirichlet data at the same r_max.
    ``nonlinearity_scale`` multiplies the psi0 term (0 drops it).
    """
    cfg = config or StabilityConfig()
    if not p > 2:
        raise InputError("stability analysis needs p > 2")
    if m not in (1, -1):
        raise InputError("only the m = +1 and m = -1 sectors are supported")
    if not nonlinearity_scale >= 0:
        raise InputError("nonlinearity_scale must be >= 0")
    prof, ref = _base_profile(psi0, p, B, alpha, check=check_base and nonlinearity_scale != 0.0)
    r_max = _r_max(prof, p, B, alpha, m, nonlinearity_scale, cfg.r_margin, level)
    q = _potential(prof, p, B, alpha, m, nonlinearity_scale)
    mu_fd, fd_err, ests, hs = _richardson(q, r_max, cfg.fd_step, cfg.richardson_levels, level)
    mu_sh, bracket, out_lo, out_hi = shoot_eigenvalue(prof, p, B, alpha, r_max, m, nonlinearity_scale,
                                                      level, cfg, guess=mu_fd)
    disagreement = abs(mu_fd - mu_sh) / max(1.0, abs(mu_sh))
    if disagreement > cfg.agreement_tol:
        raise AccuracyError(f"finite-difference ({mu_fd:.12g}) and shooting ({mu_sh:.12g}) eigenvalues "
                            f"differ by {disagreement:.3g} relative at alpha={alpha}")
    eig = _eigenfunction(out_lo, out_hi) if level == 0 else None
    disc = {"r_max": r_max, "fd_steps": hs, "fd_raw": ests, "fd_extrapolation_error": fd_err,
            "shoot_bracket": list(bracket), "shoot_rtol": cfg.shoot_rtol, "m": m, "level": level,
            "nonlinearity_scale": nonlinearity_scale}
    return StabilityResult(alpha, mu_sh, ref, "finite-difference+shooting", disc, mu_fd, mu_sh, eig,
                           {"disagreement": disagreement})


def quadratic_form_check(psi0, p: float, B: float, alpha: float, v_test: RadialProfile,
                         m: int = 1, nonlinearity_scale: float = 1.0, rtol: float = 1e-11,
                         return_norm: bool = False):
    """Integral of [v'^2 + ((m/r - B r/2)^2 + alpha) v^2 - (p/2) psi0^(p-2) v^2] r dr.

    v_test is taken as zero beyond its last node.  With ``return_norm`` the pair
    (form, integral of v^2 r dr) is returned.
    """
    prof, _ = _base_profile(psi0, p, B, alpha, check=False)
    if not isinstance(v_test, RadialProfile):
        raise InputError("v_test must be a RadialProfile")
    xs = v_test.nodes
    if xs.size < 2:
        raise InputError("v_test needs at least two nodes")
    v0 = abs(float(v_test.values[0]))
    vmax = float(np.max(np.abs(v_test.values)))
    # the (m/r)^2 weight needs v(r) = O(r) at the origin
    if vmax == 0.0:
        return (0.0, 0.0) if return_norm else 0.0
    slope = float(np.max(np.abs(v_test.derivative_values)))
    if v0 > 2.0 * xs[0] * slope + 1e-14 * vmax:
        raise InputError("v_test does not vanish at the origin; the singular weight makes the form diverge")
    grid = np.union1d(xs, prof.nodes[(prof.nodes > xs[0]) & (prof.nodes < xs[-1])])

    def form(r):
        v, dv, _ = v_test.evaluate(r)
        psi = prof.evaluate(r)[0]
        nl = 0.5 * p * np.abs(psi) ** (p - 2.0) * nonlinearity_scale
        w = (m / r - 0.5 * B * r) ** 2 + alpha - nl
        return (dv * dv + w * v * v) * r

    def norm(r):
        v = v_test.evaluate(r)[0]
        return v * v * r

    F = radial_quadrature(grid, form, rtol=rtol, max_levels=8)
    N = radial_quadrature(grid, norm, rtol=rtol, max_levels=8)
    # below the first node v ~ v'(x0) r, so the form contributes about (v'^2 + m^2 v'^2) x0^2 / 2
    dv0 = float(v_test.derivative_values[0])
    F += (1.0 + m * m) * dv0 * dv0 * xs[0] ** 2 / 2.0
    return (F, N) if return_norm else F
