"""Closed-form lower and upper bounds for the magnetic interpolation constants.

Lower bounds: mu_interp / nu_interp (gap + diamagnetic inequality, any field),
mu_LT / nu_LT (Loss-Thaller splitting, 2D constant field), the exact 2D
constant-field log-Sobolev constant.  Upper bounds: Gaussian trial states.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .errors import DomainError, InputError, SolverError
from .ground_states import GNConstants, ProblemParams, xi_zero_field

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class LossThallerMix:
    p: float
    eta: float
    c: float
    c_star: float | None = None
    residual: float = 0.0


@dataclass(frozen=True)
class GaussianOptimum:
    theta: float
    sigma: float
    quotient_value: float
    kappa: float | None = None
    stationarity: float = 0.0


def _positive(name, x):
    if not (x > 0 and math.isfinite(x)):
        raise DomainError(f"{name} must be positive and finite, got {x}")


def mix_constant(p: float, eta: float) -> LossThallerMix:
    """Maximizer c of (1-c^2)^(1-2/p) (alpha + c B)^(2/p), eta = alpha (p-2) / (2B).

    Root of (p-1) c^2 + 2 eta c - 1 = 0 in (0, 1]; p = 2 is the log-Sobolev limit.
    """
    if not p >= 2:
        raise DomainError(f"mix_constant needs p >= 2, got {p}")
    disc = eta * eta + p - 1.0
    if not disc >= 0 or not math.isfinite(eta):
        raise InputError(f"negative discriminant for p={p}, eta={eta}")
    root = math.sqrt(disc)
    # both closed forms are exact; pick the one without cancellation
    c = 1.0 / (eta + root) if eta >= 0 else (root - eta) / (p - 1.0)
    return LossThallerMix(p, eta, c, residual=(p - 1.0) * c * c + 2.0 * eta * c - 1.0)


def mix_constant_forms(p: float, eta: float) -> tuple[float, float]:
    root = math.sqrt(eta * eta + p - 1.0)
    return (root - eta) / (p - 1.0), 1.0 / (eta + root)


# ---- p > 2 -------------------------------------------------------------

def _gamma(params: ProblemParams) -> float:
    return params.d * (params.p - 2.0) / (2.0 * params.p)


def alpha_kink(params: ProblemParams) -> float:
    g = _gamma(params)
    return params.Lambda * (1.0 - g) / g


def _check_sup(params: ProblemParams, gn: GNConstants):
    if not params.p > 2:
        raise DomainError("this bound needs p > 2")
    _positive("Lambda", params.Lambda)
    _positive("C_p", gn.C_p)


def mu_interp(params: ProblemParams, gn: GNConstants, alpha: float) -> float:
    """max over t of C_p (1-t)^g (alpha + t Lambda)^(1-g), g = d(p-2)/(2p)."""
    _check_sup(params, gn)
    lam = params.Lambda
    if alpha < -lam:
        raise DomainError(f"alpha = {alpha} below -Lambda = {-lam}")
    if alpha == -lam:
        return 0.0
    g = _gamma(params)
    if alpha <= alpha_kink(params):
        return gn.S_p * (alpha + lam) * lam ** (-g)
    return gn.C_p * alpha ** (1.0 - g)


def mu_interp_branches(params: ProblemParams, gn: GNConstants, alpha: float) -> tuple[float, float]:
    """(linear branch, power branch) evaluated at the same alpha."""
    g = _gamma(params)
    lam = params.Lambda
    return gn.S_p * (alpha + lam) * lam ** (-g), gn.C_p * alpha ** (1.0 - g)


def mu_LT(p: float, B: float, alpha: float, gn: GNConstants) -> float:
    """Loss-Thaller lower bound C_p (1-c^2)^(1-2/p) (alpha + cB)^(2/p), 2D constant field."""
    if not p > 2:
        raise DomainError("mu_LT needs p > 2")
    _positive("B", B)
    if not alpha > -B:
        raise DomainError(f"alpha = {alpha} must exceed -B = {-B}")
    c = mix_constant(p, alpha * (p - 2.0) / (2.0 * B)).c
    return gn.C_p * (1.0 - c * c) ** (1.0 - 2.0 / p) * (alpha + c * B) ** (2.0 / p)


def gn_magnetic_bound(params: ProblemParams, gn: GNConstants, alpha: float, theta_interp: float) -> float:
    """Constant in (|grad_A psi|^2 + alpha|psi|^2)^(theta/2) |psi|_2^(1-theta) >= K |psi|_p."""
    _check_sup(params, gn)
    p = params.p
    if not (1.0 - 2.0 / p <= theta_interp < 1.0):
        raise DomainError(f"theta must lie in [1-2/p, 1), got {theta_interp}")
    if not alpha > -params.Lambda:
        raise DomainError("alpha must exceed -Lambda")
    mi = mu_interp(params, gn, alpha)
    factor = min(1.0, (1.0 + alpha / params.Lambda) ** (1.0 - 2.0 / p))
    return mi ** (0.25 * (p * theta_interp - p + 2.0)) * (factor * gn.S_p) ** (0.25 * p * (1.0 - theta_interp))


# ---- 1 < p < 2 ---------------------------------------------------------

def _check_sub(params: ProblemParams, gn: GNConstants):
    if not 1 < params.p < 2:
        raise DomainError("this bound needs 1 < p < 2")
    _positive("Lambda", params.Lambda)
    _positive("C_p", gn.C_p)


def beta_star(params: ProblemParams, gn: GNConstants) -> float:
    _check_sub(params, gn)
    d, p = params.d, params.p
    n = 2.0 * p + d * (2.0 - p)
    return (n / (d * (2.0 - p)) * params.Lambda / gn.C_p) ** (n / (2.0 * p))


def nu_interp_branches(params: ProblemParams, gn: GNConstants, beta: float) -> tuple[float, float]:
    """(affine branch, power branch) at beta."""
    d, p, lam = params.d, params.p, params.Lambda
    g = d * (2.0 - p)
    n = 2.0 * p + g
    e = n / (2.0 * p)
    affine = lam + beta * lam ** (d * (p - 2.0) / (2.0 * p)) * (2.0 * p / g) * (g / n) ** e * gn.C_p ** e
    power = gn.C_p * beta ** (2.0 * p / n)
    return affine, power


def nu_interp(params: ProblemParams, gn: GNConstants, beta: float) -> float:
    _check_sub(params, gn)
    if beta < 0:
        raise DomainError(f"beta must be >= 0, got {beta}")
    if beta == 0:
        return float(params.Lambda)
    affine, power = nu_interp_branches(params, gn, beta)
    return affine if beta <= beta_star(params, gn) else power


def nu_LT_mix(p: float, B: float, beta: float, gn: GNConstants) -> LossThallerMix:
    """c_* solving c / (1-c^2)^(p/2) = B / ((2-p) C_p beta^(p/2))."""
    if not 1 < p < 2:
        raise DomainError("nu_LT needs 1 < p < 2")
    _positive("B", B)
    _positive("beta", beta)
    rhs = B / ((2.0 - p) * gn.C_p * beta ** (p / 2.0))

    # log form keeps the equation well scaled when c_* is near 0 or 1
    def h(c):
        return math.log(c) - 0.5 * p * math.log1p(-c * c) - math.log(rhs)

    lo, hi = 1e-300, 1.0 - 1e-16
    if not (h(lo) < 0 < h(hi)):
        # the solution sits closer to an endpoint than double precision resolves
        if h(hi) <= 0:
            return LossThallerMix(p, float("nan"), 1.0, 1.0, 0.0)
        raise SolverError(f"c_* not bracketed for p={p}, B={B}, beta={beta}")
    c = brentq(h, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=500)
    res = c / (1.0 - c * c) ** (p / 2.0) / rhs - 1.0
    return LossThallerMix(p, float("nan"), c, c, res)


def nu_LT(p: float, B: float, beta: float, gn: GNConstants) -> float:
    c = nu_LT_mix(p, B, beta, gn).c_star
    return c * B + gn.C_p * beta ** (p / 2.0) * (1.0 - c * c) ** (1.0 - p / 2.0)


# ---- log-Sobolev --------------------------------------------------------

def xi_constant_field(B: float, gamma: float) -> float:
    """Optimal 2D constant-field log-Sobolev constant.

    B c + gamma log(2 pi e^2 c / B), c = sqrt(eta^2 + 1) - eta, eta = gamma / B.
    Attained by exp(-B r^2 / (4c)); tends to xi_zero_field(2, gamma) as B -> 0.
    """
    if not (B > 0 and math.isfinite(B)):
        raise DomainError(f"B must be positive, got {B}")
    if gamma < 0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")
    if gamma == 0:
        return float(B)
    c = mix_constant(2.0, gamma / B).c
    return B * c + gamma * (LOG_2PI + 2.0 + math.log(c / B))


def xi_optimizer_scale(B: float, gamma: float) -> float:
    """s such that exp(-s r^2/4) attains xi_constant_field: s = gamma + sqrt(gamma^2 + B^2)."""
    return gamma + math.hypot(gamma, B)


def xi_lower_bound(d: int, B: float, gamma: float, constant_field: bool = True) -> float:
    """Exact value for the 2D constant field, zero-field constant otherwise (diamagnetic)."""
    if d == 2 and constant_field and B > 0:
        return xi_constant_field(B, gamma)
    return xi_zero_field(d, gamma)


# ---- Gaussian upper bounds ----------------------------------------------

def mu_gauss(p: float, B: float, alpha: float) -> GaussianOptimum:
    """Best Gaussian exp(-r^2/(2 sigma)) for the p > 2 quotient, 2D constant field."""
    if not p > 2:
        raise DomainError("mu_gauss needs p > 2")
    _positive("B", B)
    if not alpha > -B:
        raise DomainError(f"alpha = {alpha} must exceed -B = {-B}")
    th = 2.0 / p
    a = (2.0 - th) * B * B
    b = 4.0 * alpha * (1.0 - th)
    c = -4.0 * th
    disc = b * b - 4.0 * a * c
    if disc < 0:
        raise DomainError("no positive stationary scale")
    # positive root of a s^2 + b s + c = 0, written without cancellation
    sq = math.sqrt(disc)
    sigma = (-b + sq) / (2.0 * a) if b <= 0 else (2.0 * c) / (-b - sq)
    if not sigma > 0:
        raise DomainError("no positive stationary scale")
    f = B * B * sigma ** (2.0 - th) + 4.0 * alpha * sigma ** (1.0 - th) + 4.0 * sigma ** (-th)
    value = 0.125 * (2.0 * math.pi) ** (1.0 - th) * p ** th * f
    stat = (a * sigma * sigma + b * sigma + c) / max(abs(a * sigma * sigma), abs(c))
    return GaussianOptimum(th, sigma, value, None, stat)


def sigma_plus(alpha: float, theta: float, B: float = 1.0) -> float:
    """Positive root of (2-theta) B^2 s^2 + 4 alpha (1-theta) s - 4 theta = 0."""
    return 2.0 * (math.sqrt(alpha * alpha * (1.0 - theta) ** 2 + theta * (2.0 - theta) * B * B)
                  - alpha * (1.0 - theta)) / ((2.0 - theta) * B * B)


def gauss_quotient_sub(sigma: float, p: float, B: float, beta: float) -> float:
    """Q(sigma) = 1/sigma + B^2 sigma/4 + beta theta^theta pi^(theta-1) sigma^(theta-1)."""
    th = 2.0 / p
    k = beta * th ** th * math.pi ** (th - 1.0)
    return 1.0 / sigma + 0.25 * B * B * sigma + k * sigma ** (th - 1.0)


def nu_gauss(p: float, B: float, beta: float) -> GaussianOptimum:
    """Best Gaussian exp(-r^2/(2 sigma)) for the 1 < p < 2 quotient, 2D constant field."""
    if not 1 < p < 2:
        raise DomainError("nu_gauss needs 1 < p < 2")
    if B < 0:
        raise DomainError("B must be >= 0")
    if not beta > 0:
        raise DomainError("beta must be positive")
    th = 2.0 / p
    k = beta * th ** th * math.pi ** (th - 1.0)

    # sigma^2 Q'(sigma), increasing in sigma
    def h(s):
        return -1.0 + 0.25 * B * B * s * s + k * (th - 1.0) * s ** th

    lo, hi = 1e-3, 1.0
    while h(lo) > 0:
        lo *= 0.5
        if lo < 1e-300:
            raise SolverError("minimizer not bracketed from below")
    while h(hi) < 0:
        hi *= 2.0
        if hi > 1e300:
            raise SolverError("minimizer not bracketed from above")
    sigma = brentq(h, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=500)
    value = gauss_quotient_sub(sigma, p, B, beta)
    return GaussianOptimum(th, sigma, value, k, h(sigma))
