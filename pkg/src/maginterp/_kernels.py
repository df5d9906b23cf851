"""Hot loops: adaptive Dormand-Prince 5(4) radial integrator with shooting events.

Everything here is written against plain numpy arrays and scalars so the same
source runs compiled (numba) or interpreted, see :mod:`maginterp._accel`.

Two right-hand sides are supported, selected by ``model``:

``MODEL_GROUND`` -- y = (v, v') for
    v'' = -(d-1) v'/r + (kappa + b2q r^2) v - s |v|^(p-2) v
with params = [d, p, kappa, b2q, s].  kappa = alpha, s = +1 gives the
supercritical ground-state equation; kappa = -nu, s = -1 the sublinear one.

``MODEL_SECTOR`` -- y = (w, w') with v = r w the angular-momentum-m (|m| = 1)
radial component, for
    w'' = -3 w'/r + (-m B + B^2 r^2/4 + alpha - mu - (p/2) psi0(r)^(p-2)) w
with params = [p, B, alpha, mu, m].  psi0 is read from a quintic Hermite table.
"""
import numpy as np

from ._accel import njit

MODEL_GROUND = 0
MODEL_SECTOR = 1

# termination codes
END_REACHED = 0
CROSSED = 1
REBOUND = 2
TOUCHDOWN = 3
DECAYED = 4
BLOWUP = 5
STEP_FAILURE = 6
MAX_STEPS = 7

MODE_SHOOT = 0
MODE_FREE = 1

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                                49.0 / 176.0, -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1 = 71.0 / 57600.0
_E3 = -71.0 / 16695.0
_E4 = 71.0 / 1920.0
_E5 = -17253.0 / 339200.0
_E6 = 22.0 / 525.0
_E7 = -1.0 / 40.0


@njit(cache=True)
def hermite5_eval(x, xs, f, df, d2f):
    """Quintic Hermite interpolant (value, slope) of tabulated data at x.

    Outside the table the end values are held (left) or zero is returned (right).
    """
    n = xs.shape[0]
    if x <= xs[0]:
        return f[0], df[0]
    if x >= xs[n - 1]:
        return 0.0, 0.0
    lo = 0
    hi = n - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if xs[mid] <= x:
            lo = mid
        else:
            hi = mid
    h = xs[hi] - xs[lo]
    t = (x - xs[lo]) / h
    t2 = t * t
    t3 = t2 * t
    t4 = t3 * t
    t5 = t4 * t
    h00 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5
    h10 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5
    h20 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5
    h01 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5
    h11 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5
    h21 = 0.5 * t3 - t4 + 0.5 * t5
    val = (h00 * f[lo] + h10 * h * df[lo] + h20 * h * h * d2f[lo]
           + h01 * f[hi] + h11 * h * df[hi] + h21 * h * h * d2f[hi])
    g00 = (-30.0 * t2 + 60.0 * t3 - 30.0 * t4) / h
    g10 = (1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4) / h
    g20 = (t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4) / h
    g01 = (30.0 * t2 - 60.0 * t3 + 30.0 * t4) / h
    g11 = (-12.0 * t2 + 28.0 * t3 - 15.0 * t4) / h
    g21 = (1.5 * t2 - 4.0 * t3 + 2.5 * t4) / h
    der = (g00 * f[lo] + g10 * h * df[lo] + g20 * h * h * d2f[lo]
           + g01 * f[hi] + g11 * h * df[hi] + g21 * h * h * d2f[hi])
    return val, der


@njit(cache=True)
def _rhs(model, r, y0, y1, params, tab_r, tab_v, tab_dv, tab_d2v):
    if model == MODEL_GROUND:
        d = params[0]
        p = params[1]
        kappa = params[2]
        b2q = params[3]
        s = params[4]
        av = abs(y0)
        nl = 0.0
        if av > 0.0:
            nl = av ** (p - 2.0) * y0
        return -(d - 1.0) * y1 / r + (kappa + b2q * r * r) * y0 - s * nl
    p = params[0]
    B = params[1]
    alpha = params[2]
    mu = params[3]
    m = params[4]
    psi, _ = hermite5_eval(r, tab_r, tab_v, tab_dv, tab_d2v)
    apsi = abs(psi)
    nl = 0.0
    if apsi > 0.0:
        nl = 0.5 * p * apsi ** (p - 2.0)
    q = -m * B + 0.25 * B * B * r * r + alpha - mu - nl
    return -3.0 * y1 / r + q * y0


@njit(cache=True)
def _cubic_root(h, f0, d0, f1, d1):
    """Fraction t in [0, 1] where the cubic Hermite through (f0, d0), (f1, d1) vanishes."""
    lo = 0.0
    hi = 1.0
    flo = f0
    for _ in range(80):
        t = 0.5 * (lo + hi)
        t2 = t * t
        t3 = t2 * t
        val = ((2.0 * t3 - 3.0 * t2 + 1.0) * f0 + (t3 - 2.0 * t2 + t) * h * d0
               + (-2.0 * t3 + 3.0 * t2) * f1 + (t3 - t2) * h * d1)
        if (val > 0.0) == (flo > 0.0):
            lo = t
            flo = val
        else:
            hi = t
    return 0.5 * (lo + hi)


@njit(cache=True)
def _cubic_eval(t, h, f0, d0, f1, d1):
    t2 = t * t
    t3 = t2 * t
    return ((2.0 * t3 - 3.0 * t2 + 1.0) * f0 + (t3 - 2.0 * t2 + t) * h * d0
            + (-2.0 * t3 + 3.0 * t2) * f1 + (t3 - t2) * h * d1)


@njit(cache=True)
def integrate_radial(model, params, tab_r, tab_v, tab_dv, tab_d2v,
                     r0, v0, dv0, r_end, rtol, atol, h_max, mode,
                     scale, touch_tol, decay_tol, max_steps):
    """Integrate one radial trajectory from r0 to r_end.

    In MODE_SHOOT the run stops at the first classifying event:
    v crossing zero downwards (CROSSED), v' turning from negative to
    non-negative while v > 0 (REBOUND), |v| and |v'| both below
    touch_tol*scale (TOUCHDOWN), or |v| below decay_tol*scale (DECAYED).
    In MODE_FREE it runs to r_end and counts sign changes of v.

    Returns (code, event_r, n_stored, rs, vs, dvs, d2vs, sign_changes).
    """
    rs = np.empty(max_steps + 2)
    vs = np.empty(max_steps + 2)
    dvs = np.empty(max_steps + 2)
    d2vs = np.empty(max_steps + 2)

    r = r0
    y0 = v0
    y1 = dv0
    k1a = y1
    k1b = _rhs(model, r, y0, y1, params, tab_r, tab_v, tab_dv, tab_d2v)
    rs[0] = r
    vs[0] = y0
    dvs[0] = y1
    d2vs[0] = k1b
    n = 1
    sign_changes = 0

    if mode == MODE_SHOOT and dv0 >= 0.0 and k1b >= 0.0 and y0 > 0.0:
        return REBOUND, r, n, rs[:n], vs[:n], dvs[:n], d2vs[:n], 0

    span = r_end - r0
    # the origin series is accurate far beyond r0, so start with a moderate step
    h = min(h_max, 1e-3 * span, 1e-3)
    seen_descent = dv0 < 0.0 or k1b < 0.0
    code = END_REACHED
    event_r = r_end
    steps = 0
    while r < r_end:
        if steps >= max_steps:
            code = MAX_STEPS
            event_r = r
            break
        if r + h > r_end:
            h = r_end - r
        # stages
        ya = y0 + h * _A21 * k1a
        yb = y1 + h * _A21 * k1b
        k2a = yb
        k2b = _rhs(model, r + _C2 * h, ya, yb, params, tab_r, tab_v, tab_dv, tab_d2v)
        ya = y0 + h * (_A31 * k1a + _A32 * k2a)
        yb = y1 + h * (_A31 * k1b + _A32 * k2b)
        k3a = yb
        k3b = _rhs(model, r + _C3 * h, ya, yb, params, tab_r, tab_v, tab_dv, tab_d2v)
        ya = y0 + h * (_A41 * k1a + _A42 * k2a + _A43 * k3a)
        yb = y1 + h * (_A41 * k1b + _A42 * k2b + _A43 * k3b)
        k4a = yb
        k4b = _rhs(model, r + _C4 * h, ya, yb, params, tab_r, tab_v, tab_dv, tab_d2v)
        ya = y0 + h * (_A51 * k1a + _A52 * k2a + _A53 * k3a + _A54 * k4a)
        yb = y1 + h * (_A51 * k1b + _A52 * k2b + _A53 * k3b + _A54 * k4b)
        k5a = yb
        k5b = _rhs(model, r + _C5 * h, ya, yb, params, tab_r, tab_v, tab_dv, tab_d2v)
        ya = y0 + h * (_A61 * k1a + _A62 * k2a + _A63 * k3a + _A64 * k4a + _A65 * k5a)
        yb = y1 + h * (_A61 * k1b + _A62 * k2b + _A63 * k3b + _A64 * k4b + _A65 * k5b)
        k6a = yb
        k6b = _rhs(model, r + h, ya, yb, params, tab_r, tab_v, tab_dv, tab_d2v)
        n0 = y0 + h * (_B1 * k1a + _B3 * k3a + _B4 * k4a + _B5 * k5a + _B6 * k6a)
        n1 = y1 + h * (_B1 * k1b + _B3 * k3b + _B4 * k4b + _B5 * k5b + _B6 * k6b)
        k7a = n1
        k7b = _rhs(model, r + h, n0, n1, params, tab_r, tab_v, tab_dv, tab_d2v)
        e0 = h * (_E1 * k1a + _E3 * k3a + _E4 * k4a + _E5 * k5a + _E6 * k6a + _E7 * k7a)
        e1 = h * (_E1 * k1b + _E3 * k3b + _E4 * k4b + _E5 * k5b + _E6 * k6b + _E7 * k7b)
        sc0 = atol + rtol * max(abs(y0), abs(n0))
        if model == MODEL_SECTOR:
            # w' starts at O(r^3) when the potential vanishes at the origin; relative
            # control alone would chase rounding noise, so floor the scale at |w|
            sc1 = atol + rtol * max(abs(y1), abs(n1), abs(y0), abs(n0))
        else:
            sc1 = atol + rtol * max(abs(y1), abs(n1))
        err = max(abs(e0) / sc0, abs(e1) / sc1)
        if not np.isfinite(err):
            h *= 0.25
            if h < 1e-14 * max(1.0, r):
                code = STEP_FAILURE
                event_r = r
                break
            continue
        if err > 1.0:
            fac = max(0.2, 0.9 * err ** (-0.2))
            h *= fac
            if h < 1e-14 * max(1.0, r):
                code = STEP_FAILURE
                event_r = r
                break
            continue

        # accepted step r -> r + h
        steps += 1
        r_new = r + h
        stop = False
        if mode == MODE_SHOOT:
            if n0 < 0.0 and y0 >= 0.0:
                t = _cubic_root(h, y0, y1, n0, n1)
                re = r + t * h
                dve = _cubic_eval(t, h, y1, k1b, n1, k7b)
                rs[n] = re
                vs[n] = 0.0
                dvs[n] = dve
                d2vs[n] = _rhs(model, re, 0.0, dve, params, tab_r, tab_v, tab_dv, tab_d2v)
                n += 1
                code = CROSSED
                event_r = re
                stop = True
            elif seen_descent and n1 >= 0.0 and y1 < 0.0 and n0 > 0.0:
                t = _cubic_root(h, y1, k1b, n1, k7b)
                re = r + t * h
                ve = _cubic_eval(t, h, y0, y1, n0, n1)
                rs[n] = re
                vs[n] = ve
                dvs[n] = 0.0
                d2vs[n] = _rhs(model, re, ve, 0.0, params, tab_r, tab_v, tab_dv, tab_d2v)
                n += 1
                code = REBOUND
                event_r = re
                stop = True
        if stop:
            break
        if n1 < 0.0 or k7b < 0.0:
            seen_descent = True
        if (n0 > 0.0) != (y0 > 0.0) and n0 != 0.0:
            sign_changes += 1
        r = r_new
        y0 = n0
        y1 = n1
        k1a = k7a
        k1b = k7b
        rs[n] = r
        vs[n] = y0
        dvs[n] = y1
        d2vs[n] = k1b
        n += 1
        if mode == MODE_SHOOT:
            if abs(y0) <= touch_tol * scale and abs(y1) <= touch_tol * scale:
                code = TOUCHDOWN
                event_r = r
                break
            if abs(y0) <= decay_tol * scale:
                code = DECAYED
                event_r = r
                break
        if abs(y0) > 1e280:
            code = BLOWUP
            event_r = r
            break
        if n >= max_steps + 1:
            code = MAX_STEPS
            event_r = r
            break
        fac = 5.0
        if err > 0.0:
            fac = min(5.0, 0.9 * err ** (-0.2))
        h = min(h * fac, h_max)
    return code, event_r, n, rs[:n], vs[:n], dvs[:n], d2vs[:n], sign_changes
