"""Independent reference computations used only by the tests.

They rely on scipy's general-purpose integrators so they share no code with
the package's own kernels.
"""
import math

import numpy as np
from scipy.integrate import quad, solve_ivp


def shoot_decaying(d, p, kappa, b2q=0.0, a_lo=0.1, a_hi=20.0, r_max=30.0, iters=60, s=1.0):
    """Amplitude of the positive solution of
    v'' + (d-1)v'/r = (kappa + b2q r^2) v - s v^(p-1) that neither crosses zero nor
    rebounds, by bisection.  s = 1 gives decaying states, s = -1 (p < 2) compact ones."""
    def rhs(r, y):
        v, dv = y
        return [dv, -(d - 1) * dv / r + (kappa + b2q * r * r) * v - s * math.copysign(abs(v) ** (p - 1), v)]

    def cross(r, y):
        return y[0]
    cross.terminal = True

    def rebound(r, y):
        return y[1] if y[0] > 0 else -1.0
    rebound.terminal = True
    rebound.direction = 1

    def classify(a):
        r0 = 1e-6
        c2 = (kappa * a - s * a ** (p - 1)) / (2 * d)
        sol = solve_ivp(rhs, (r0, r_max), [a + c2 * r0 * r0, 2 * c2 * r0], method="DOP853",
                        rtol=1e-12, atol=1e-14 * a, events=[cross, rebound], dense_output=True)
        if sol.t_events[0].size:
            return "crossed", sol
        return "rebound", sol

    lo, hi = a_lo, a_hi
    assert classify(lo)[0] == "rebound" and classify(hi)[0] == "crossed"
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if classify(mid)[0] == "crossed":
            hi = mid
        else:
            lo = mid
    return lo, hi, classify(lo)[1], classify(hi)[1]


def decaying_integral(d, p, kappa, b2q=0.0, exponent=None, **kw):
    """|S^{d-1}| * integral of v^exponent r^(d-1) over the part where both bracketing
    trajectories agree (to ~1e-8 relative)."""
    exponent = p if exponent is None else exponent
    lo, hi, s_lo, s_hi = shoot_decaying(d, p, kappa, b2q, **kw)
    # cut where the two trajectories separate
    rs = np.linspace(1e-6, min(s_lo.t[-1], s_hi.t[-1]), 4000)
    v_lo = s_lo.sol(rs)[0]
    v_hi = s_hi.sol(rs)[0]
    sep = np.abs(v_lo - v_hi) > 1e-3 * np.abs(v_lo)
    cut = rs[np.argmax(sep)] if np.any(sep) else rs[-1]
    f = lambda r: abs(s_lo.sol(r)[0]) ** exponent * r ** (d - 1)
    val, _ = quad(f, 1e-6, cut, limit=400, epsabs=0, epsrel=1e-12)
    area = 2 * math.pi if d == 2 else 4 * math.pi
    return area * val, lo, cut


def gaussian_quotient_super(p, B, alpha, sigma):
    """(|grad_A u|^2 + alpha|u|^2) / |u|_p^2 for u = exp(-r^2/(2 sigma)), 2D, by quadrature.

    For radial u the magnetic term adds (B^2 r^2 / 4)|u|^2."""
    u = lambda r: math.exp(-r * r / (2 * sigma))
    du = lambda r: -r / sigma * u(r)
    R = 40 * math.sqrt(sigma)
    g = quad(lambda r: (du(r) ** 2 + (0.25 * B * B * r * r + alpha) * u(r) ** 2) * r, 0, R,
             epsabs=0, epsrel=1e-13, limit=200)[0]
    n = quad(lambda r: u(r) ** p * r, 0, R, epsabs=0, epsrel=1e-13, limit=200)[0]
    return (2 * math.pi * g) / (2 * math.pi * n) ** (2 / p)


def gaussian_quotient_sub(p, B, beta, sigma):
    """(|grad_A u|^2 + beta |u|_p^2) / |u|_2^2 for u = exp(-r^2/(2 sigma)), 2D, by quadrature."""
    u = lambda r: math.exp(-r * r / (2 * sigma))
    du = lambda r: -r / sigma * u(r)
    R = 40 * math.sqrt(sigma)
    g = quad(lambda r: (du(r) ** 2 + 0.25 * B * B * r * r * u(r) ** 2) * r, 0, R,
             epsabs=0, epsrel=1e-13, limit=200)[0]
    n2 = quad(lambda r: u(r) ** 2 * r, 0, R, epsabs=0, epsrel=1e-13, limit=200)[0]
    npp = quad(lambda r: u(r) ** p * r, 0, R, epsabs=0, epsrel=1e-13, limit=200)[0]
    return (2 * math.pi * g + beta * (2 * math.pi * npp) ** (2 / p)) / (2 * math.pi * n2)


def radial_integral(f, d, r_max, breaks=()):
    """|S^{d-1}| * integral of f(r) r^(d-1) on [0, r_max] with optional breakpoints."""
    pts = sorted({0.0, *[b for b in breaks if 0 < b < r_max], r_max})
    total = 0.0
    for a, b in zip(pts, pts[1:]):
        total += quad(lambda r: f(r) * r ** (d - 1), a, b, epsabs=0, epsrel=1e-13, limit=400)[0]
    return (2 * math.pi if d == 2 else 4 * math.pi) * total


def compact_integral(d, p, kappa=-1.0, b2q=0.0, a_lo=0.05, a_hi=50.0, r_max=60.0):
    """|S^{d-1}| * integral of v^p r^(d-1) for the compactly supported state, and its edge."""
    lo, hi, s_lo, s_hi = shoot_decaying(d, p, kappa, b2q, a_lo, a_hi, r_max, iters=70, s=-1.0)
    edge = min(s_lo.t[-1], s_hi.t[-1])
    f = lambda r: max(s_lo.sol(r)[0], 0.0) ** p * r ** (d - 1)
    val, _ = quad(f, 1e-6, edge, limit=400, epsabs=0, epsrel=1e-12)
    area = 2 * math.pi if d == 2 else 4 * math.pi
    return area * val, lo, edge
