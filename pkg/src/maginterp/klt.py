"""Keller-Lieb-Thirring type lower bounds on the principal eigenvalue of -Delta_A + phi.

Potentials are radial and piecewise linear between nodes, with a declared
model for r beyond the last node:

    none        phi = 0
    constant    phi = phi(r_N)
    power:k     phi = o + (phi(r_N) - o) (r / r_N)^k,  o = tail_offset (default 0)
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import gamma as gamma_fn, gammaincc

from . import bounds
from .curves import BoundCurve, evaluate_curve, invert_curve_tagged
from .errors import DomainError, InputError, IntegrabilityError, PreconditionError
from .ground_states import GNConstants, ProblemParams, xi_zero_field
from .profiles import radial_quadrature, sphere_area

CASES = ("i", "ii", "iii", "i-threshold", "ii-threshold")
SOURCES = ("closed-form-interp", "closed-form-LT", "EL-curve")


@dataclass(frozen=True)
class PotentialGrid:
    nodes: np.ndarray
    values: np.ndarray
    d: int = 2
    tail_model: str = "none"
    tail_exponent: float = 0.0
    tail_offset: float = 0.0

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        if nodes.ndim != 1 or nodes.shape != values.shape or nodes.size < 2:
            raise InputError("potential needs at least two (r, phi) samples of equal length")
        if not (np.all(np.isfinite(nodes)) and np.all(np.isfinite(values))):
            raise InputError("potential samples must be finite")
        if nodes[0] < 0 or np.any(np.diff(nodes) <= 0):
            raise InputError("potential radii must be nonnegative and strictly increasing")
        if self.d not in (2, 3):
            raise InputError(f"dimension must be 2 or 3, got {self.d}")
        if self.tail_model not in ("none", "constant", "power"):
            raise InputError(f"unknown tail model {self.tail_model!r}")
        if not (math.isfinite(self.tail_exponent) and math.isfinite(self.tail_offset)):
            raise InputError("tail parameters must be finite")
        if self.tail_offset != 0 and self.tail_model != "power":
            raise InputError("a tail offset only applies to the power tail")
        if self.tail_model == "power" and nodes[-1] <= 0:
            raise InputError("power tail needs a positive last radius")

    @classmethod
    def from_function(cls, func, nodes, d=2, tail="none", tail_offset=0.0):
        model, k = parse_tail(tail)
        nodes = np.asarray(nodes, dtype=float)
        return cls(nodes, func(nodes), d, model, k, tail_offset)

    def _with(self, values, offset):
        return PotentialGrid(self.nodes, values, self.d, self.tail_model, self.tail_exponent, offset)

    def shifted(self, s: float) -> "PotentialGrid":
        """phi + s everywhere, tail included."""
        if self.tail_model == "none" and s != 0:
            raise InputError("tail model 'none' pins phi = 0 beyond the grid; shift a power tail instead")
        return self._with(self.values + s, self.tail_offset + s if self.tail_model == "power" else 0.0)

    def scaled(self, t: float) -> "PotentialGrid":
        return self._with(t * self.values, t * self.tail_offset)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.interp(r, self.nodes, self.values)
        far = r > self.nodes[-1]
        if np.any(far):
            out = np.where(far, self._tail(r), out)
        return out

    def _tail(self, r):
        rN, fN = self.nodes[-1], self.values[-1]
        if self.tail_model == "none":
            return np.zeros_like(r)
        if self.tail_model == "constant":
            return np.full_like(r, fN)
        o = self.tail_offset
        return o + (fN - o) * (np.maximum(r, rN) / rN) ** self.tail_exponent

    @property
    def tail_description(self) -> str:
        return f"power:{self.tail_exponent:.17g}" if self.tail_model == "power" else self.tail_model


def parse_tail(text) -> tuple[str, float]:
    if isinstance(text, tuple):
        return text
    t = str(text).strip()
    if t in ("none", "constant"):
        return t, 0.0
    if t.startswith("power:"):
        try:
            k = float(t.split(":", 1)[1])
        except ValueError as exc:
            raise InputError(f"bad power-tail exponent in {t!r}") from exc
        if not math.isfinite(k):
            raise InputError("power-tail exponent must be finite")
        return "power", k
    raise InputError(f"tail model must be none, constant or power:<k>, got {t!r}")


# ---- quadrature helpers --------------------------------------------------

def _crossings(nodes, values, level):
    """Radii where the piecewise-linear phi crosses ``level``."""
    a, b = values[:-1] - level, values[1:] - level
    idx = np.nonzero(a * b < 0)[0]
    t = a[idx] / (a[idx] - b[idx])
    return nodes[idx] + t * (nodes[idx + 1] - nodes[idx])


def _grid_integral(pot: PotentialGrid, integrand, breaks=(), rtol=1e-12) -> float:
    xs = np.union1d(pot.nodes, np.asarray(breaks, dtype=float))
    d = pot.d

    def f(r):
        return integrand(pot(r)) * r ** (d - 1)

    total = radial_quadrature(xs, f, rtol=rtol, max_levels=8)
    if xs[0] > 0:
        # inner disc/ball: phi held at its first value
        total += float(integrand(np.array([pot.values[0]]))[0]) * xs[0] ** d / d
    return total


def _tail_between(pot: PotentialGrid, integrand, r_end, rtol=1e-12) -> float:
    rN = pot.nodes[-1]
    if r_end <= rN:
        return 0.0
    # geometric pieces keep the Gauss rules well resolved on long spans
    xs = np.unique(np.concatenate([np.geomspace(rN, r_end, 65), np.linspace(rN, r_end, 65)]))
    d = pot.d
    return radial_quadrature(xs, lambda r: integrand(pot(r)) * r ** (d - 1), rtol=rtol, max_levels=8)


def _power_tail_integral(c, power, rN, d, R=None):
    """Integral of c (r/rN)^power r^(d-1) over (R, inf), R >= rN; needs power + d < 0."""
    if power + d >= 0:
        raise IntegrabilityError(f"tail ~ r^{power:g} is not integrable against r^{d - 1} dr")
    R = rN if R is None else R
    return c * rN ** d * (R / rN) ** (power + d) / (-(power + d))


# ---- norms ---------------------------------------------------------------

def _positive_part_integral(pot: PotentialGrid, q: float, lam: float) -> float:
    """|S| * integral of ((lam - phi)_+)^q r^(d-1) dr."""
    def integrand(phi):
        return np.maximum(lam - phi, 0.0) ** q

    total = _grid_integral(pot, integrand, _crossings(pot.nodes, pot.values, lam))
    rN, fN, d = pot.nodes[-1], pot.values[-1], pot.d
    model, k, o = pot.tail_model, pot.tail_exponent, pot.tail_offset
    a = fN - o
    if model == "none":
        if lam > 0:
            raise IntegrabilityError(f"(lambda - phi)_+ tends to lambda = {lam} > 0 at infinity")
    elif model == "constant" or k == 0 or a == 0:
        if lam > fN:
            raise IntegrabilityError("constant tail below lambda: the positive part is not integrable")
    elif k < 0:
        # phi -> o monotonically
        if lam > o:
            raise IntegrabilityError(f"(lambda - phi)_+ tends to {lam - o} > 0 at infinity")
        if lam == o and a < 0:
            total += _power_tail_integral((-a) ** q, k * q, rN, d)
        elif fN < lam:
            r_star = rN * ((lam - o) / a) ** (1.0 / k)
            total += _tail_between(pot, integrand, r_star)
    else:
        # k > 0: phi -> +inf if a > 0, -inf if a < 0
        if a < 0:
            raise IntegrabilityError("tail tends to -inf: the positive part is not integrable")
        if fN < lam:
            r_star = rN * ((lam - o) / a) ** (1.0 / k)
            total += _tail_between(pot, integrand, r_star)
    return sphere_area(d) * total


def lq_norm_negative_part(potential: PotentialGrid, q: float) -> float:
    """(integral of |min(phi, 0)|^q dx)^(1/q)."""
    if not q >= 1:
        raise DomainError(f"q must be >= 1, got {q}")
    return _positive_part_integral(potential, q, 0.0) ** (1.0 / q)


def lq_plus_norm(potential: PotentialGrid, q: float, lam: float) -> float:
    """(integral over {lam > phi} of (lam - phi)^q dx)^(1/q)."""
    if not q >= 1:
        raise DomainError(f"q must be >= 1, got {q}")
    if not math.isfinite(lam):
        raise InputError("lambda must be finite")
    return _positive_part_integral(potential, q, lam) ** (1.0 / q)


def lq_norm_inverse(potential: PotentialGrid, q: float) -> float:
    """(integral of phi^(-q) dx)^(1/q) for phi > 0."""
    if not q >= 1:
        raise DomainError(f"q must be >= 1, got {q}")
    pot = potential
    if np.any(pot.values <= 0):
        raise DomainError("phi must be positive for the inverse norm")
    model, k, o = pot.tail_model, pot.tail_exponent, pot.tail_offset
    rN, fN, d = pot.nodes[-1], pot.values[-1], pot.d
    a = fN - o
    if model == "none":
        raise DomainError("tail model 'none' sets phi = 0 beyond the grid; the inverse norm is undefined")
    if model == "constant" or k == 0 or a == 0 or (k < 0 and o > 0):
        raise IntegrabilityError("phi tends to a positive constant: phi^(-q) is not integrable")
    if a < 0 or (k < 0 and o <= 0):
        raise DomainError("the tail reaches phi <= 0")
    total = _grid_integral(pot, lambda phi: phi ** (-q))
    # phi^(-q) = a^(-q) s^(-kq) (1 + x)^(-q), s = r/rN, x = (o/a) s^(-k);
    # integrate numerically until |x| <= 1e-5, then three terms of the binomial series
    R = rN * max(1.0, (1e5 * abs(o / a)) ** (1.0 / k)) if o != 0 else rN
    total += _tail_between(pot, lambda phi: phi ** (-q), R)
    c0 = a ** (-q)
    x0 = o / a
    for j, coef in enumerate((1.0, -q, 0.5 * q * (q + 1.0))):
        if j and o == 0:
            break
        total += _power_tail_integral(c0 * coef * x0 ** j, -k * q - j * k, rN, d, R)
    return (sphere_area(d) * total) ** (1.0 / q)


def gibbs_integral(potential: PotentialGrid, gamma: float) -> float:
    """Integral of exp(-phi/gamma) dx."""
    if not gamma > 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    pot = potential
    model, k, o = pot.tail_model, pot.tail_exponent, pot.tail_offset
    rN, fN, d = pot.nodes[-1], pot.values[-1], pot.d
    a = fN - o
    if model in ("none", "constant") or k <= 0 or a <= 0:
        raise IntegrabilityError("exp(-phi/gamma) is not integrable unless phi grows to +inf")
    total = _grid_integral(pot, lambda phi: np.exp(-phi / gamma))
    # exp(-o/gamma) (rN^d / k) (gamma/a)^(d/k) Gamma(d/k, a/gamma)
    s = d / k
    total += math.exp(-o / gamma) * rN ** d / k * (gamma / a) ** s * gamma_fn(s) * gammaincc(s, a / gamma)
    return sphere_area(d) * total


# ---- bounds --------------------------------------------------------------

@dataclass
class KLTBound:
    case: str
    input_norm: float
    bound_value: float
    bound_source: str
    asymptotic_extended: bool = False
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.case not in CASES:
            raise InputError(f"unknown case {self.case!r}")
        self.input_norm = float(self.input_norm)
        self.bound_value = float(self.bound_value)
        self.asymptotic_extended = bool(self.asymptotic_extended)
        if not math.isfinite(self.bound_value):
            raise DomainError(f"bound is not finite ({self.bound_value})")


def _source_name(source) -> str:
    if isinstance(source, BoundCurve):
        return "EL-curve"
    s = str(source)
    aliases = {"interp": "closed-form-interp", "LT": "closed-form-LT", "lt": "closed-form-LT",
               "closed-form": "closed-form-interp"}
    s = aliases.get(s, s)
    if s not in SOURCES or s == "EL-curve":
        raise InputError(f"bound source must be 'interp', 'LT' or a BoundCurve, got {source!r}")
    return s


def _mu_LT_inverse(params: ProblemParams, gn: GNConstants, mu: float) -> float:
    """alpha with mu_LT(alpha) = mu (mu_LT increases from 0 at -B)."""
    B, p = params.B, params.p
    if mu == 0:
        return -B
    lo = -B * (1.0 - 1e-15)
    hi = max(1.0, B)
    while bounds.mu_LT(p, B, hi, gn) < mu:
        hi *= 2.0
    return brentq(lambda a: bounds.mu_LT(p, B, a, gn) - mu, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=500)


def case_i_branches(params: ProblemParams, gn: GNConstants, norm_V: float) -> tuple[float, float, float]:
    """(small-norm branch, large-norm branch, threshold) of the closed-form case-i bound."""
    d, q, lam = params.d, params.q, params.Lambda
    small = lam - lam ** (d / (2.0 * q)) * norm_V / gn.S_p
    large = -(norm_V / gn.C_p) ** (2.0 * q / (2.0 * q - d))
    thr = (2.0 * q / d) * lam ** (1.0 - d / (2.0 * q)) * gn.S_p
    return small, large, thr


def _check_constant_field(params, what):
    if params.d != 2 or not params.constant_field or params.B <= 0:
        raise DomainError(f"{what} needs d = 2 and a constant field B > 0")


def klt_case_i(params: ProblemParams, gn: GNConstants, norm_V: float, source="interp") -> KLTBound:
    """lambda_{A,V} >= -alpha_B(|V_-|_q), q = p/(p-2)."""
    if not params.p > 2:
        raise DomainError("case i needs p > 2")
    if not (norm_V >= 0 and math.isfinite(norm_V)):
        raise DomainError(f"norm must be finite and >= 0, got {norm_V}")
    q = params.q
    if not q > params.d / 2.0:
        raise DomainError(f"q = {q} must exceed d/2")
    name = _source_name(source)
    extended = False
    if name == "closed-form-interp":
        if not params.Lambda > 0:
            raise DomainError("the interpolation bound needs a positive spectral gap")
        small, large, thr = case_i_branches(params, gn, norm_V)
        value = float(params.Lambda) if norm_V == 0 else (small if norm_V <= thr else large)
    elif name == "closed-form-LT":
        _check_constant_field(params, "the Loss-Thaller bound")
        value = -_mu_LT_inverse(params, gn, norm_V)
        if norm_V == 0:
            value = float(params.B)
    else:
        if norm_V == 0:
            value = float(params.Lambda)
        else:
            alpha, extended = invert_curve_tagged(source, norm_V, extend=True)
            value = -alpha
    return KLTBound("i", norm_V, value, name, extended, {"q": q})


def klt_case_ii(params: ProblemParams, gn: GNConstants, inv_norm: float, source="interp") -> KLTBound:
    """lambda_{A,W} >= nu_B(beta), beta = |W^(-1)|_q^(-1), q = p/(2-p)."""
    if not 1 < params.p < 2:
        raise DomainError("case ii needs 1 < p < 2")
    if not (inv_norm >= 0 and math.isfinite(inv_norm)):
        raise DomainError(f"inverse norm must be finite and >= 0, got {inv_norm}")
    name = _source_name(source)
    extended = False
    if inv_norm == 0:
        value = float(params.Lambda)
    elif name == "closed-form-interp":
        value = bounds.nu_interp(params, gn, inv_norm)
    elif name == "closed-form-LT":
        _check_constant_field(params, "the Loss-Thaller bound")
        value = bounds.nu_LT(params.p, params.B, inv_norm, gn)
    else:
        value, extended = evaluate_curve(source, inv_norm, extend=True)
    return KLTBound("ii", inv_norm, value, name, extended, {"q": params.q})


def klt_case_iii(B: float, gamma: float, gibbs: float, d: int = 2, constant_field: bool = True) -> KLTBound:
    """lambda_{A,W} >= xi_B(gamma) - gamma log(integral of exp(-W/gamma))."""
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    if not (gibbs > 0 and math.isfinite(gibbs)):
        raise DomainError("the Gibbs integral must be positive and finite")
    if d == 2 and constant_field and B > 0:
        xi, src = bounds.xi_constant_field(B, gamma), "closed-form-LT"
    else:
        xi, src = xi_zero_field(d, gamma), "closed-form-interp"
    return KLTBound("iii", gibbs, xi - gamma * math.log(gibbs), src, False, {"xi": xi, "gamma": gamma})


def _tail_infimum(pot: PotentialGrid) -> float:
    model, k = pot.tail_model, pot.tail_exponent
    fN = pot.values[-1]
    if model == "none":
        return 0.0
    if model == "constant" or k == 0:
        return fN
    a = fN - pot.tail_offset
    if k < 0:
        return min(fN, pot.tail_offset)
    return fN if a >= 0 else -math.inf


def klt_threshold_case(params: ProblemParams, gn: GNConstants, potential: PotentialGrid, q: float,
                       lam: float, case: str, source="interp") -> KLTBound:
    """Shifted bounds valid for every lambda: lambda - alpha_B(|lambda - phi|_{q,+}) or
    lambda + nu_B(|(phi - lambda)^(-1)|_q^(-1))."""
    if abs(q - params.q) > 1e-12 * max(1.0, params.q):
        raise InputError(f"q = {q} does not match p = {params.p} (expected {params.q})")
    if potential.d != params.d:
        raise InputError("potential dimension differs from the problem dimension")
    if case == "i":
        n = lq_plus_norm(potential, q, lam)
        inner = klt_case_i(params, gn, n, source)
        return KLTBound("i-threshold", n, lam + inner.bound_value, inner.bound_source,
                        inner.asymptotic_extended, {"lambda": lam, "q": q})
    if case == "ii":
        shifted = potential.values - lam
        tail_below = _tail_infimum(potential) < lam
        if np.any(shifted < 0) or tail_below:
            raise PreconditionError(f"case ii needs phi >= lambda everywhere; violated for lambda = {lam}")
        if np.any(shifted == 0):
            n_inv = 0.0
        else:
            if potential.tail_model == "none":
                raise DomainError("tail model 'none' leaves |(phi - lambda)^(-1)|_q undefined")
            pot = potential.shifted(-lam) if lam != 0 else potential
            n_inv = 1.0 / lq_norm_inverse(pot, q)
        inner = klt_case_ii(params, gn, n_inv, source)
        return KLTBound("ii-threshold", n_inv, lam + inner.bound_value, inner.bound_source,
                        inner.asymptotic_extended, {"lambda": lam, "q": q})
    raise InputError(f"case must be 'i' or 'ii', got {case!r}")
