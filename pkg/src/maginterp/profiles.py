"""Radial profiles on nonuniform grids, their interpolants and weighted integrals."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Any

import numpy as np

from .errors import InputError, IntegrationError


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and windows shared by every shooting solve.

    Plain record, serializable with :meth:`to_dict` / :meth:`from_dict`.
    """

    rtol: float = 1e-11
    atol_rel: float = 1e-14
    bracket_tol: float = 1e-15
    quad_tol: float = 1e-10
    r0: float = 1e-6
    r_max: float = 40.0
    r_max_floor: float = 8.0
    r_max_limit: float = 2000.0
    h_max: float = 0.02
    amp_min: float = 1e-8
    amp_max: float = 1e8
    decay_tol: float = 1e-14
    mismatch_tol: float = 1e-7
    touch_tol: float = 1e-8
    residual_tol: float = 1e-8
    max_steps: int = 400_000

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict | None) -> "SolverConfig":
        if not data:
            return cls()
        known = {f.name: f.type for f in fields(cls)}
        unknown = set(data) - set(known)
        if unknown:
            raise InputError(f"unknown solver config keys: {sorted(unknown)}")
        kw = {}
        for k, v in data.items():
            kw[k] = int(v) if k == "max_steps" else float(v)
        return cls(**kw)

    def updated(self, **kw) -> "SolverConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)


def sphere_area(d: int) -> float:
    if d == 2:
        return 2.0 * math.pi
    if d == 3:
        return 4.0 * math.pi
    raise InputError(f"dimension must be 2 or 3, got {d}")


def _hermite_eval(xs, f, df, d2f, x):
    """Vectorized Hermite interpolation (quintic with d2f, cubic without).

    Returns (value, first derivative, second derivative) at x, which must lie
    inside [xs[0], xs[-1]].
    """
    x = np.asarray(x, dtype=float)
    i = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, len(xs) - 2)
    x0 = xs[i]
    h = xs[i + 1] - x0
    t = (x - x0) / h
    f0, f1 = f[i], f[i + 1]
    g0, g1 = df[i] * h, df[i + 1] * h
    if d2f is None:
        t2 = t * t
        t3 = t2 * t
        val = (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * g0 + (-2 * t3 + 3 * t2) * f1 + (t3 - t2) * g1
        der = (6 * t2 - 6 * t) * f0 + (3 * t2 - 4 * t + 1) * g0 + (-6 * t2 + 6 * t) * f1 + (3 * t2 - 2 * t) * g1
        sec = (12 * t - 6) * f0 + (6 * t - 4) * g0 + (-12 * t + 6) * f1 + (6 * t - 2) * g1
        return val, der / h, sec / (h * h)
    s0, s1 = d2f[i] * h * h, d2f[i + 1] * h * h
    t2 = t * t
    t3 = t2 * t
    t4 = t3 * t
    t5 = t4 * t
    val = ((1 - 10 * t3 + 15 * t4 - 6 * t5) * f0
           + (t - 6 * t3 + 8 * t4 - 3 * t5) * g0
           + (0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5) * s0
           + (10 * t3 - 15 * t4 + 6 * t5) * f1
           + (-4 * t3 + 7 * t4 - 3 * t5) * g1
           + (0.5 * t3 - t4 + 0.5 * t5) * s1)
    der = ((-30 * t2 + 60 * t3 - 30 * t4) * f0
           + (1 - 18 * t2 + 32 * t3 - 15 * t4) * g0
           + (t - 4.5 * t2 + 6 * t3 - 2.5 * t4) * s0
           + (30 * t2 - 60 * t3 + 30 * t4) * f1
           + (-12 * t2 + 28 * t3 - 15 * t4) * g1
           + (1.5 * t2 - 4 * t3 + 2.5 * t4) * s1)
    sec = ((-60 * t + 180 * t2 - 120 * t3) * f0
           + (-36 * t + 96 * t2 - 60 * t3) * g0
           + (1 - 9 * t + 18 * t2 - 10 * t3) * s0
           + (60 * t - 180 * t2 + 120 * t3) * f1
           + (-24 * t + 84 * t2 - 60 * t3) * g1
           + (3 * t - 12 * t2 + 10 * t3) * s1)
    return val, der / h, sec / (h * h)


@dataclass
class RadialProfile:
    """A radial function v(r) sampled on a strictly increasing grid.

    ``support_radius`` is ``math.inf`` for profiles decaying at infinity, and the
    finite edge R for compactly supported ones (v is taken as 0 beyond R).
    When ``second_derivative_values`` is present the interpolant is quintic
    Hermite, otherwise cubic Hermite.
    """

    nodes: np.ndarray
    values: np.ndarray
    derivative_values: np.ndarray
    initial_amplitude: float
    support_radius: float = math.inf
    d: int = 2
    second_derivative_values: np.ndarray | None = None
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.derivative_values = np.asarray(self.derivative_values, dtype=float)
        if self.second_derivative_values is not None:
            self.second_derivative_values = np.asarray(self.second_derivative_values, dtype=float)
        n = self.nodes.size
        if n == 0:
            raise InputError("profile grid is empty")
        if self.values.shape != (n,) or self.derivative_values.shape != (n,):
            raise InputError("nodes, values and derivative_values must have equal length")
        if self.second_derivative_values is not None and self.second_derivative_values.shape != (n,):
            raise InputError("second_derivative_values has the wrong length")
        if n > 1 and np.any(np.diff(self.nodes) <= 0):
            raise InputError("profile nodes must be strictly increasing")
        if self.nodes[0] < 0:
            raise InputError("profile nodes must be nonnegative")
        if self.d not in (2, 3):
            raise InputError(f"dimension must be 2 or 3, got {self.d}")

    @classmethod
    def from_callable(cls, func, dfunc, nodes, d=2, support_radius=math.inf, d2func=None):
        nodes = np.asarray(nodes, dtype=float)
        d2 = None if d2func is None else d2func(nodes)
        return cls(nodes, func(nodes), dfunc(nodes), float(func(np.array([0.0]))[0]),
                   support_radius, d, d2)

    @property
    def is_compact(self) -> bool:
        return math.isfinite(self.support_radius)

    def __call__(self, r):
        return self.evaluate(r)[0]

    def evaluate(self, r):
        """(v, v', v'') at r; constant extension below the first node, zero beyond the grid."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        v = np.zeros_like(r)
        dv = np.zeros_like(r)
        d2v = np.zeros_like(r)
        xs = self.nodes
        if xs.size == 1:
            v[r <= xs[0]] = self.values[0]
            return v, dv, d2v
        left = r < xs[0]
        v[left] = self.values[0]
        inside = (r >= xs[0]) & (r <= xs[-1])
        if np.any(inside):
            a, b, c = _hermite_eval(xs, self.values, self.derivative_values,
                                    self.second_derivative_values, r[inside])
            v[inside], dv[inside], d2v[inside] = a, b, c
        return v, dv, d2v


# Gauss-Legendre rules on [0, 1]
def _gl_rule(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _composite(xs, integrand, n_gl, n_sub):
    """Sum of n_gl-point Gauss rules on n_sub equal pieces of every grid interval."""
    t, w = _gl_rule(n_gl)
    sub = np.arange(n_sub)[:, None]
    tt = ((sub + t[None, :]) / n_sub).ravel()
    ww = np.tile(w, n_sub) / n_sub
    h = np.diff(xs)
    pts = xs[:-1, None] + h[:, None] * tt[None, :]
    vals = integrand(pts.ravel()).reshape(pts.shape)
    if not np.all(np.isfinite(vals)):
        raise IntegrationError("non-finite integrand in quadrature")
    return float(np.sum(h * (vals @ ww)))


def radial_quadrature(xs, integrand, rtol=1e-10, max_levels=6) -> float:
    """Integral of a smooth integrand over [xs[0], xs[-1]] following the grid.

    Composite Gauss-Legendre; pieces are halved until two successive levels agree
    to ``rtol`` relative.
    """
    xs = np.asarray(xs, dtype=float)
    if xs.size < 2:
        return 0.0
    prev = _composite(xs, integrand, 8, 1)
    n_sub = 1
    for _ in range(max_levels):
        n_sub *= 2
        cur = _composite(xs, integrand, 8, n_sub)
        if abs(cur - prev) <= rtol * max(abs(cur), 1e-300):
            return cur
        prev = cur
    raise IntegrationError(f"quadrature did not converge to {rtol:g} after {max_levels} refinements")


def _exponential_tail(v_end, dv_end, r_end, q, d):
    """Integral of |v|^q r^(d-1) over (r_end, inf) for v ~ v_end exp(-k (r - r_end))."""
    if v_end <= 0.0 or dv_end >= 0.0:
        return 0.0
    k = q * (-dv_end / v_end)
    base = v_end ** q
    if d == 2:
        return base * (r_end / k + 1.0 / k ** 2)
    return base * (r_end ** 2 / k + 2.0 * r_end / k ** 2 + 2.0 / k ** 3)


def weighted_integral(profile: RadialProfile, exponent: float, rtol: float = 1e-10) -> float:
    """|S^{d-1}| * integral of |v|^exponent r^(d-1) dr over (0, inf)."""
    if not exponent > 0:
        raise InputError("exponent must be positive")
    if profile.nodes.size == 0:
        raise InputError("profile grid is empty")
    if not (np.all(np.isfinite(profile.values)) and np.all(np.isfinite(profile.derivative_values))):
        raise IntegrationError("profile contains non-finite values")
    d = profile.d
    xs = profile.nodes
    if profile.is_compact:
        xs = xs[xs <= profile.support_radius]
        if xs.size == 0 or xs[-1] < profile.support_radius:
            xs = np.append(xs, profile.support_radius)
    q = float(exponent)

    def f(r):
        v = profile.evaluate(r)[0]
        return np.abs(v) ** q * r ** (d - 1)

    total = radial_quadrature(xs, f, rtol=rtol)
    # the disc/ball below the first node, where v is held at values[0]
    total += abs(profile.values[0]) ** q * xs[0] ** d / d
    if not profile.is_compact:
        total += _exponential_tail(profile.values[-1], profile.derivative_values[-1], xs[-1], q, d)
    if not math.isfinite(total):
        raise IntegrationError("weighted integral is not finite")
    return sphere_area(d) * total


def gradient_integral(profile: RadialProfile, rtol: float = 1e-10) -> float:
    """|S^{d-1}| * integral of v'^2 r^(d-1) dr."""
    d = profile.d
    xs = profile.nodes
    if profile.is_compact:
        xs = xs[xs <= profile.support_radius]

    def f(r):
        return profile.evaluate(r)[1] ** 2 * r ** (d - 1)

    total = radial_quadrature(xs, f, rtol=rtol)
    if not profile.is_compact:
        v, dv = profile.values[-1], profile.derivative_values[-1]
        if v > 0 and dv < 0:
            k = -dv / v
            total += k * k * _exponential_tail(v, dv, xs[-1], 2.0, d)
    return sphere_area(d) * total
