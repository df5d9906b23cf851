"""Sampled bound curves, monotone interpolation and inversion."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import CurveError, InputError, RangeError

PARAMETER_NAMES = ("alpha", "beta", "gamma")
KINDS = ("lower", "upper", "sharp-numeric")


@dataclass
class BoundCurve:
    """Samples (x_i, y_i) of a bound as a function of alpha, beta or gamma.

    ``asymptotics`` optionally holds the known behaviour past both ends:
    ``{"left": (x0, y0), "right": (coef, power)}`` meaning the curve starts from
    (x0, y0) and behaves like coef * x**power for large x.
    """

    parameter_name: str
    parameters: np.ndarray
    values: np.ndarray
    kind: str = "sharp-numeric"
    provenance: str = ""
    monotone: bool = True
    asymptotics: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.parameters = np.asarray(self.parameters, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.parameter_name not in PARAMETER_NAMES:
            raise InputError(f"parameter_name must be one of {PARAMETER_NAMES}")
        if self.kind not in KINDS:
            raise InputError(f"kind must be one of {KINDS}")
        if self.parameters.ndim != 1 or self.parameters.shape != self.values.shape:
            raise InputError("parameters and values must be 1-D arrays of equal length")
        if self.parameters.size < 2:
            raise InputError("a curve needs at least two samples")
        if np.any(np.diff(self.parameters) <= 0):
            raise InputError("curve parameters must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise CurveError("curve values must be finite")
        if self.monotone:
            bad = monotonicity_violations(self.values)
            if bad:
                raise CurveError(f"samples of a monotone bound decrease at indices {bad}")

    @property
    def samples(self):
        return list(zip(self.parameters.tolist(), self.values.tolist()))

    def interpolant(self):
        return PchipInterpolator(self.parameters, self.values, extrapolate=False)

    def __call__(self, x):
        return evaluate_curve(self, x)[0]


def monotonicity_violations(values) -> list[int]:
    """Indices i with values[i+1] <= values[i]."""
    return [int(i) for i in np.nonzero(np.diff(np.asarray(values, dtype=float)) <= 0)[0]]


def second_differences(x, y):
    """Divided second differences on a nonuniform grid."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = np.diff(y) / np.diff(x)
    return 2.0 * np.diff(s) / (x[2:] - x[:-2])


def evaluate_curve(curve: BoundCurve, x: float, extend: bool = False) -> tuple[float, bool]:
    """Curve value at x and whether the asymptotic extension was used."""
    xs, ys = curve.parameters, curve.values
    if xs[0] <= x <= xs[-1]:
        return float(curve.interpolant()(x)), False
    if not extend:
        raise RangeError(f"{curve.parameter_name} = {x} outside the sampled range [{xs[0]}, {xs[-1]}]")
    if x < xs[0]:
        left = curve.asymptotics.get("left")
        if left is None:
            raise RangeError(f"no left asymptotics for {x} < {xs[0]}")
        x0, y0 = left
        if x < x0:
            raise RangeError(f"{curve.parameter_name} = {x} below the curve's domain start {x0}")
        # chord from the known endpoint; below a concave curve
        return float(y0 + (ys[0] - y0) * (x - x0) / (xs[0] - x0)), True
    right = curve.asymptotics.get("right")
    if right is None:
        raise RangeError(f"no right asymptotics for {x} > {xs[-1]}")
    coef, power = right
    return float(coef * x ** power), True


def invert_curve(curve: BoundCurve, target: float, extend: bool = False) -> float:
    """Parameter x with curve(x) = target (monotone interpolant plus bracketed root)."""
    return invert_curve_tagged(curve, target, extend)[0]


def invert_curve_tagged(curve: BoundCurve, target: float, extend: bool = False) -> tuple[float, bool]:
    xs, ys = curve.parameters, curve.values
    bad = monotonicity_violations(ys)
    if bad:
        raise CurveError(f"cannot invert a non-monotone curve (decrease at indices {bad})")
    if not math.isfinite(target):
        raise InputError("target must be finite")
    if ys[0] <= target <= ys[-1]:
        if target == ys[0]:
            return float(xs[0]), False
        if target == ys[-1]:
            return float(xs[-1]), False
        f = curve.interpolant()
        i = int(np.searchsorted(ys, target)) - 1
        x = brentq(lambda t: float(f(t)) - target, xs[i], xs[i + 1], xtol=1e-15, rtol=1e-15, maxiter=200)
        return float(x), False
    if not extend:
        raise RangeError(f"value {target} outside the sampled range [{ys[0]}, {ys[-1]}]")
    if target < ys[0]:
        left = curve.asymptotics.get("left")
        if left is None or target < left[1]:
            raise RangeError(f"value {target} below the curve's range")
        x0, y0 = left
        return float(x0 + (xs[0] - x0) * (target - y0) / (ys[0] - y0)), True
    right = curve.asymptotics.get("right")
    if right is None:
        raise RangeError(f"value {target} above the sampled range and no asymptotics")
    coef, power = right
    return float((target / coef) ** (1.0 / power)), True
