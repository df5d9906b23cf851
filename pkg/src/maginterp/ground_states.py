"""Zero-field Gagliardo-Nirenberg constants from radial ground states.

For p > 2 the optimizer of (|grad u|^2 + |u|_2^2) / |u|_p^2 solves
-u'' - (d-1)u'/r + u = u^(p-1) and C_p = (|u|_p^p)^(1-2/p).
For 1 < p < 2 the optimizer of (|grad u|^2 + |u|_p^2) / |u|_2^2 is a rescaled
copy of the compactly supported solution of -w'' - (d-1)w'/r + w^(p-1) = w.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError, InputError, SolverError, UnsupportedParameterError
from .profiles import RadialProfile, SolverConfig, gradient_integral, sphere_area, weighted_integral
from .shooting import (RadialEquation, bisect_amplitude, compact_profile, decaying_profile,
                       find_bracket, ode_residual, scan_brackets)

LOG_2PI_E2 = math.log(2.0 * math.pi) + 2.0


def critical_exponent(d: int) -> float:
    if d == 2:
        return math.inf
    if d == 3:
        return 6.0
    raise InputError(f"dimension must be 2 or 3, got {d}")


def check_exponent(d: int, p: float, allow_two: bool = False) -> None:
    crit = critical_exponent(d)
    if not math.isfinite(p) or p <= 1.0:
        raise DomainError(f"exponent p must exceed 1, got {p}")
    if p == 2.0 and not allow_two:
        raise DomainError("p = 2 is not allowed here")
    if p >= crit:
        raise UnsupportedParameterError(f"p = {p} is not below the critical exponent {crit} for d = {d}")


@dataclass(frozen=True)
class ProblemParams:
    """Dimension, exponent, field strength and spectral gap.

    For a constant field the gap is the field strength, so ``Lambda`` defaults to ``B``.
    """

    d: int
    p: float
    B: float = 0.0
    Lambda: float | None = None

    def __post_init__(self):
        if self.d not in (2, 3):
            raise InputError(f"dimension must be 2 or 3, got {self.d}")
        check_exponent(self.d, self.p, allow_two=True)
        if not (self.B >= 0 and math.isfinite(self.B)):
            raise DomainError(f"field strength must be finite and >= 0, got {self.B}")
        if self.Lambda is None:
            object.__setattr__(self, "Lambda", float(self.B))
        if self.Lambda < 0 or (self.B > 0 and not self.Lambda > 0):
            raise DomainError(f"spectral gap must be positive when B > 0, got {self.Lambda}")

    @property
    def theta(self) -> float:
        return 2.0 / self.p

    @property
    def q(self) -> float:
        """Hoelder conjugate exponent paired with p."""
        if self.p > 2:
            return self.p / (self.p - 2.0)
        if self.p < 2:
            return self.p / (2.0 - self.p)
        return math.inf

    @property
    def constant_field(self) -> bool:
        return self.Lambda == self.B


@dataclass(frozen=True)
class GNConstants:
    C_p: float
    S_p: float
    solver_residual: float = 0.0
    grid_spec: dict = field(default_factory=dict, compare=False, hash=False)
    d: int = 2
    p: float = 2.0


def _cfg(config):
    if config is None:
        return SolverConfig()
    if isinstance(config, dict):
        return SolverConfig.from_dict(config)
    return config


def solve_ground_state_supercritical(d: int, p: float, config: SolverConfig | None = None) -> RadialProfile:
    """Positive decaying solution of -u'' - (d-1)u'/r + u = u^(p-1)."""
    if d not in (2, 3):
        raise InputError(f"dimension must be 2 or 3, got {d}")
    check_exponent(d, p)
    if p < 2:
        raise DomainError("supercritical solve needs p > 2")
    cfg = _cfg(config)
    eq = RadialEquation(d, p, 1.0, 0.0, 1.0)
    lo, hi = find_bracket(eq, cfg, guess=2.0)
    lo, hi, iters = bisect_amplitude(eq, cfg, lo, hi)
    prof, meta = decaying_profile(eq, lo, hi, cfg)
    res = ode_residual(eq, prof)
    prof.metadata.update(ode_residual=res, bisection_steps=iters, equation="ground")
    if res > cfg.residual_tol:
        raise SolverError(f"ground state ODE residual {res:.3g} exceeds {cfg.residual_tol:g}")
    return prof


def solve_ground_state_subcritical(d: int, p: float, config: SolverConfig | None = None,
                                   scan: bool = True) -> RadialProfile:
    """Compactly supported solution of -w'' - (d-1)w'/r + w^(p-1) = w (w >= 0).

    With ``scan`` the amplitude axis is swept for further touchdown brackets;
    extra candidates are flagged in the metadata, the first one is returned.
    """
    if d not in (2, 3):
        raise InputError(f"dimension must be 2 or 3, got {d}")
    check_exponent(d, p)
    if p > 2:
        raise DomainError("subcritical solve needs 1 < p < 2")
    cfg = _cfg(config)
    eq = RadialEquation(d, p, -1.0, 0.0, -1.0)
    try:
        lo, hi = find_bracket(eq, cfg, guess=2.0)
    except SolverError as exc:
        raise SolverError(f"no tangential touchdown bracket for d={d}, p={p}: {exc}") from exc
    n_candidates = 1
    if scan:
        found, _ = scan_brackets(eq, cfg, lo[0] / 64.0, hi[0] * 64.0, 49)
        n_candidates = max(1, len(found))
    lo, hi, iters = bisect_amplitude(eq, cfg, lo, hi)
    prof, meta = compact_profile(eq, lo, hi, cfg)
    res = ode_residual(eq, prof)
    prof.metadata.update(ode_residual=res, bisection_steps=iters, equation="compact",
                         touchdown_candidates=n_candidates, multiple_candidates=n_candidates > 1)
    if meta["touchdown_residual"] > cfg.touch_tol:
        raise SolverError(f"touchdown residual {meta['touchdown_residual']:.3g} above {cfg.touch_tol:g}; "
                          f"bracket {meta['bracket']}")
    if res > cfg.residual_tol:
        raise SolverError(f"compact state ODE residual {res:.3g} exceeds {cfg.residual_tol:g}")
    return prof


def compute_S_p(d: int, p: float, C_p: float) -> float:
    """Scale-invariant constant from C_p (closed form, both sides of p = 2)."""
    if d not in (2, 3):
        raise InputError(f"dimension must be 2 or 3, got {d}")
    check_exponent(d, p, allow_two=True)
    if not C_p > 0:
        raise DomainError("C_p must be positive")
    if p == 2.0:
        return float(C_p)
    if p > 2:
        g = d * (p - 2.0)
        t = g / (2.0 * p)
        return (2.0 * p - g) ** (1.0 - t) * g ** t * C_p / (2.0 * p)
    g = d * (2.0 - p)
    n = g + 2.0 * p
    return (2.0 * p) ** (2.0 * p / n) * g ** (g / n) * C_p / n


def subcritical_scaling(d: int, p: float, I: float) -> tuple[float, float]:
    """(C_p, lambda) for u = m w(lambda x), with w the nu = 1 compact state and I = |w|_p^p.

    The Lagrange multiplier of the p < 2 quotient equals lambda^2, and
    lambda^(2 + d(2-p)/p) = I^((2-p)/p).
    """
    C = I ** (2.0 * (2.0 - p) / (2.0 * p + d * (2.0 - p)))
    return C, math.sqrt(C)


def _compute_C_p(d: int, p: float, cfg: SolverConfig) -> GNConstants:
    if p == 2.0:
        return GNConstants(1.0, 1.0, 0.0, {"method": "limit"}, d, p)
    if p > 2:
        prof = solve_ground_state_supercritical(d, p, cfg)
        I = weighted_integral(prof, p, cfg.quad_tol)
        C = I ** (1.0 - 2.0 / p)
    else:
        prof = solve_ground_state_subcritical(d, p, cfg)
        I = weighted_integral(prof, p, cfg.quad_tol)
        C, _ = subcritical_scaling(d, p, I)
    meta = {k: v for k, v in prof.metadata.items() if k != "bracket"}
    meta.update(amplitude=prof.initial_amplitude, integral_p=I, n_nodes=int(prof.nodes.size),
                r_max=float(prof.nodes[-1]))
    return GNConstants(C, compute_S_p(d, p, C), float(prof.metadata["ode_residual"]), meta, d, p)


@lru_cache(maxsize=256)
def _compute_C_p_cached(d, p, cfg):
    return _compute_C_p(d, p, cfg)


def compute_C_p(d: int, p: float, config: SolverConfig | None = None) -> GNConstants:
    """Optimal zero-field Gagliardo-Nirenberg constant C_p with S_p and solver metadata."""
    if d not in (2, 3):
        raise InputError(f"dimension must be 2 or 3, got {d}")
    check_exponent(d, float(p), allow_two=True)
    return _compute_C_p_cached(int(d), float(p), _cfg(config))


def normalized_minimizer(d: int, p: float, config: SolverConfig | None = None) -> RadialProfile:
    """The optimizer of the zero-field quotient, rescaled so that |u|_p^p = 1."""
    cfg = _cfg(config)
    if p > 2:
        w = solve_ground_state_supercritical(d, p, cfg)
        lam = 1.0
        I = weighted_integral(w, p, cfg.quad_tol)
    else:
        w = solve_ground_state_subcritical(d, p, cfg, scan=False)
        I = weighted_integral(w, p, cfg.quad_tol)
        _, lam = subcritical_scaling(d, p, I)
    # u(r) = m w(lam r): |u|_p^p = m^p I lam^(-d)
    m = (lam ** d / I) ** (1.0 / p)
    d2 = None if w.second_derivative_values is None else m * lam * lam * w.second_derivative_values
    R = w.support_radius / lam if w.is_compact else math.inf
    return RadialProfile(w.nodes / lam, m * w.values, m * lam * w.derivative_values,
                         m * w.initial_amplitude, R, d, d2, {"scale": lam, "multiplier": m})


def rayleigh_quotient(profile: RadialProfile, p: float, rtol: float = 1e-10) -> float:
    """Zero-field quotient whose minimum is C_p, evaluated on a profile."""
    g = gradient_integral(profile, rtol)
    n2 = weighted_integral(profile, 2.0, rtol)
    npp = weighted_integral(profile, p, rtol) ** (2.0 / p)
    if p > 2:
        return (g + n2) / npp
    return (g + npp) / n2


def cp_expansion(d: int, eps: float, log_constant: float = LOG_2PI_E2) -> float:
    """1 - (d/4) eps log eps + (d/4) eps * log_constant, the small-eps form of C_(2+eps)."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    return 1.0 - 0.25 * d * eps * math.log(eps) + 0.25 * d * eps * log_constant


def xi_zero_field(d: int, gamma: float) -> float:
    """Euclidean log-Sobolev constant (d/2) gamma log(pi e^2 / gamma)."""
    if d not in (2, 3):
        raise InputError(f"dimension must be 2 or 3, got {d}")
    if not gamma > 0:
        raise InputError(f"gamma must be positive, got {gamma}")
    return 0.5 * d * gamma * (math.log(math.pi / gamma) + 2.0)


__all__ = [
    "ProblemParams", "GNConstants", "solve_ground_state_supercritical", "solve_ground_state_subcritical",
    "compute_C_p", "compute_S_p", "xi_zero_field", "normalized_minimizer", "rayleigh_quotient",
    "cp_expansion", "subcritical_scaling", "check_exponent", "critical_exponent", "sphere_area",
]
