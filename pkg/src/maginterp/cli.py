"""Command-line sweeps: Gagliardo-Nirenberg constants, the mu/nu/xi bound curves,
the stability curve and KLT bounds from potential files.

Exit codes: 0 all nodes solved and every ordering check passed, 1 a node failed
or an ordering was violated, 2 invalid input (nothing is solved).
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__, bounds
from ._accel import backend_name
from .el_solver import build_curve, nu_el_at_beta, solve_mu_el, solve_nu_el
from .errors import InputError, IntegrabilityError, MagInterpError, PreconditionError
from .ground_states import ProblemParams, check_exponent, compute_C_p, xi_zero_field
from .io import SCHEMA_VERSION, read_potential, render
from .klt import (KLTBound, gibbs_integral, klt_case_i, klt_case_ii, klt_case_iii, klt_threshold_case,
                  lq_norm_inverse, lq_norm_negative_part)
from .profiles import SolverConfig
from .stability import StabilityConfig, lowest_c1_eigenvalue

SUBCOMMANDS = ("gn", "mu-curve", "nu-curve", "xi-curve", "stability-curve", "klt")
ORDER_RTOL = 1e-9

COLUMNS = {
    "gn": ["d", "p", "C_p", "S_p", "solver_residual", "status"],
    "mu-curve": ["alpha", "mu_interp", "mu_LT", "mu_EL", "mu_Gauss",
                 "log10_interp_over_EL", "log10_LT_over_EL", "log10_Gauss_over_EL", "ordered", "status"],
    "nu-curve": ["beta", "nu_interp", "nu_LT", "nu_EL", "nu_Gauss",
                 "log10_interp_over_EL", "log10_LT_over_EL", "log10_Gauss_over_EL", "ordered", "status"],
    "xi-curve": ["gamma", "xi_B", "xi_zero_field", "ordered", "status"],
    "stability-curve": ["alpha", "mu_eig", "mu_fd", "mu_shoot", "positive", "status"],
    "klt": ["lambda", "input_norm", "bound_value", "asymptotic_extended", "status"],
}
FIG_COLUMNS = {
    "mu-curve": ["mu_interp_fig", "mu_LT_fig", "mu_EL_fig", "mu_Gauss_fig"],
    "nu-curve": ["beta_fig"],
}


@dataclass
class SweepSpec:
    subcommand: str
    d: int = 2
    p: float = 3.0
    B: float = 1.0
    lo: float | None = None
    hi: float | None = None
    steps: int = 2
    spacing: str = "linear"
    solver: SolverConfig = field(default_factory=SolverConfig)
    stability: StabilityConfig = field(default_factory=StabilityConfig)
    fmt: str = "csv"
    out: str | None = None
    workers: int = 1
    fig_axes: bool = False
    extra: dict = field(default_factory=dict)

    def grid(self) -> np.ndarray:
        if self.steps < 2:
            raise InputError("steps must be >= 2")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.hi > self.lo):
            raise InputError(f"need finite min < max, got [{self.lo}, {self.hi}]")
        if self.spacing == "linear":
            return np.linspace(self.lo, self.hi, self.steps)
        if self.spacing != "log":
            raise InputError(f"spacing must be linear or log, got {self.spacing!r}")
        # log spacing of the distance to the left end of the domain
        shift = self.B if self.subcommand in ("mu-curve", "stability-curve") else 0.0
        if not self.lo + shift > 0:
            raise InputError("log spacing needs min above the domain start")
        return np.geomspace(self.lo + shift, self.hi + shift, self.steps) - shift

    def metadata(self) -> dict:
        meta = {"tool": "maginterp", "version": __version__, "schema": SCHEMA_VERSION,
                "subcommand": self.subcommand, "backend": backend_name(),
                "params": {"d": self.d, "p": self.p, "B": self.B},
                "solver_config": self.solver.to_dict()}
        if self.lo is not None:
            meta["grid"] = {"min": self.lo, "max": self.hi, "steps": self.steps, "spacing": self.spacing}
        if self.subcommand == "stability-curve":
            meta["stability_config"] = dataclasses.asdict(self.stability)
        if self.extra:
            meta["options"] = self.extra
        return meta


# ---- node evaluators (module level so worker processes can import them) ----

def _ordered(*vals) -> bool:
    return all(a <= b * (1.0 + ORDER_RTOL) + 1e-300 for a, b in zip(vals, vals[1:]))


def _log_ratios(vals, ref):
    return [math.log10(v / ref) if v > 0 and ref > 0 else math.nan for v in vals]


def _mu_node(p, B, solver, alpha):
    params = ProblemParams(2, p, B)
    gn = compute_C_p(2, p)
    mi = bounds.mu_interp(params, gn, alpha)
    ml = bounds.mu_LT(p, B, alpha, gn)
    me = solve_mu_el(p, B, alpha, solver).value
    mg = bounds.mu_gauss(p, B, alpha).quotient_value
    vals = [mi, ml, me, mg]
    return vals + _log_ratios([mi, ml, mg], me) + [_ordered(*vals)]


def _nu_node(p, B, solver, beta):
    params = ProblemParams(2, p, B)
    gn = compute_C_p(2, p)
    ni = bounds.nu_interp(params, gn, beta)
    nl = bounds.nu_LT(p, B, beta, gn)
    ng = bounds.nu_gauss(p, B, beta).quotient_value
    pt = nu_el_at_beta(p, B, beta, solver, bracket=(min(ni, nl) * (1 - 1e-3), ng * (1 + 1e-3)))
    ne = pt.metadata["nu"]
    vals = [ni, nl, ne, ng]
    return vals + _log_ratios([ni, nl, ng], ne) + [_ordered(*vals)]


def _xi_node(B, gamma):
    xb = bounds.xi_constant_field(B, gamma)
    xz = xi_zero_field(2, gamma)
    return [xb, xz, xz <= xb * (1.0 + ORDER_RTOL)]


def _stability_node(p, B, solver, stab, alpha):
    pt = solve_mu_el(p, B, alpha, solver)
    res = lowest_c1_eigenvalue(pt, p, B, alpha, stab)
    return [res.mu_eig, res.mu_fd, res.mu_shoot, res.mu_eig > 0]


def _gn_node(d, solver, p):
    gn = compute_C_p(d, p, solver)
    return [d, p, gn.C_p, gn.S_p, gn.solver_residual]


def _guarded(func, x):
    try:
        return func(x), None
    except (MagInterpError, ArithmeticError, ValueError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _evaluate(func, xs, workers):
    xs = [float(x) for x in xs]
    if workers and workers > 1 and len(xs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_guarded, [func] * len(xs), xs))
    return [_guarded(func, x) for x in xs]


# ---- validation ------------------------------------------------------------

def validate(spec: SweepSpec) -> None:
    """Raise InputError for anything that would fail before a single solve."""
    sub = spec.subcommand
    if sub not in SUBCOMMANDS:
        raise InputError(f"unknown subcommand {sub!r}")
    if spec.fmt not in ("csv", "json"):
        raise InputError(f"format must be csv or json, got {spec.fmt!r}")
    if spec.workers < 1:
        raise InputError("workers must be >= 1")
    if not (math.isfinite(spec.B) and spec.B >= 0):
        raise InputError(f"B must be finite and >= 0, got {spec.B}")
    if sub == "gn":
        if spec.d not in (2, 3):
            raise InputError("d must be 2 or 3")
        for p in spec.grid() if spec.lo is not None else [spec.p]:
            check_exponent(spec.d, float(p))
        return
    if sub == "klt":
        return
    xs = spec.grid()
    if sub in ("mu-curve", "nu-curve", "stability-curve") and spec.d != 2:
        raise InputError(f"{sub} is defined for the 2D constant field; got d={spec.d}")
    if sub in ("mu-curve", "stability-curve"):
        if not spec.p > 2:
            raise InputError(f"{sub} needs p > 2, got {spec.p}")
        check_exponent(2, spec.p)
        if not spec.B > 0:
            raise InputError(f"{sub} needs B > 0")
        if not xs[0] > -spec.B:
            raise InputError(f"alpha range must lie in (-B, inf); alpha_min = {xs[0]} <= -B = {-spec.B}")
    elif sub == "nu-curve":
        if not 1 < spec.p < 2:
            raise InputError(f"nu-curve needs 1 < p < 2, got {spec.p}")
        if not spec.B > 0:
            raise InputError("nu-curve needs B > 0")
        if not xs[0] > 0:
            raise InputError(f"beta range must be positive; beta_min = {xs[0]}")
    elif sub == "xi-curve":
        if not spec.B > 0:
            raise InputError("xi-curve needs B > 0")
        if not xs[0] > 0:
            raise InputError(f"gamma range must be positive; gamma_min = {xs[0]}")


# ---- runners -----------------------------------------------------------------

def _assemble(spec: SweepSpec, xs, results, node_width) -> tuple[dict, list[str], list[list], int]:
    columns = list(COLUMNS[spec.subcommand])
    fig = spec.fig_axes and spec.subcommand in FIG_COLUMNS
    if fig:
        columns = columns[:-1] + FIG_COLUMNS[spec.subcommand] + columns[-1:]
    rows, failures, violations = [], [], []
    for i, (x, (vals, err)) in enumerate(zip(xs, results)):
        if vals is None:
            vals = [math.nan] * node_width
            failures.append({"index": i, "x": float(x), "error": err})
        elif not vals[-1] and spec.subcommand != "gn":
            violations.append(i)
        row = ([] if spec.subcommand == "gn" else [float(x)]) + list(vals)
        if fig:
            row += _fig_columns(spec, float(x), vals)
        rows.append(row + ["ok" if err is None else "failed"])
    meta = spec.metadata()
    meta["failures"] = failures
    meta["ordering_violations"] = violations
    code = 1 if failures or violations else 0
    return meta, columns, rows, code


def _fig_columns(spec, x, vals):
    p = spec.p
    if spec.subcommand == "mu-curve":
        s = (2.0 * math.pi) ** (2.0 / p - 1.0)
        return [s * v for v in vals[:4]]
    return [(2.0 * math.pi) ** (1.0 - 2.0 / p) * x]


def run_sweep(spec: SweepSpec) -> tuple[dict, list[str], list[list], int]:
    validate(spec)
    sub = spec.subcommand
    if sub == "gn":
        ps = spec.grid() if spec.lo is not None else np.array([spec.p])
        results = _evaluate(partial(_gn_node, spec.d, spec.solver), ps, spec.workers)
        return _assemble(spec, ps, results, 5)
    xs = spec.grid()
    if sub == "mu-curve":
        func, width = partial(_mu_node, spec.p, spec.B, spec.solver), 8
    elif sub == "nu-curve":
        func, width = partial(_nu_node, spec.p, spec.B, spec.solver), 8
    elif sub == "xi-curve":
        func, width = partial(_xi_node, spec.B), 3
    else:
        func, width = partial(_stability_node, spec.p, spec.B, spec.solver, spec.stability), 4
    return _assemble(spec, xs, _evaluate(func, xs, spec.workers), width)


def _el_curve(case, p, B, solver, steps, workers):
    if case in ("i", "i-threshold"):
        alphas = np.geomspace(0.05 * B, 20.0 + B, steps) - B
        return build_curve(partial(solve_mu_el, p, B), alphas, solver, workers)
    nus = B + np.geomspace(1e-3 * B, 40.0, steps)
    return build_curve(partial(solve_nu_el, p, B), nus, solver, workers)


def run_klt(spec: SweepSpec, potential_file) -> tuple[dict, list[str], list[list], int, list[str]]:
    """KLT bound(s) for a potential file; also returns a human-readable report."""
    opts = spec.extra
    case = opts["case"]
    pot = read_potential(potential_file)
    d = pot.d
    if case != "iii":
        if not spec.p > 1 or spec.p == 2:
            raise InputError("p must be > 1 and != 2")
        params = ProblemParams(d, spec.p, spec.B, opts.get("Lambda"))
        if case in ("i", "i-threshold") and not spec.p > 2:
            raise InputError("case i needs p > 2")
        if case in ("ii", "ii-threshold") and not spec.p < 2:
            raise InputError("case ii needs p < 2")
        gn = compute_C_p(d, spec.p, spec.solver)
    src = opts["source"]
    if src == "EL":
        if case == "iii":
            raise InputError("case iii has no curve source; it uses the log-Sobolev constant")
        if d != 2 or not spec.B > 0:
            raise InputError("the EL-curve source needs d = 2 and B > 0")
        src = _el_curve(case, spec.p, spec.B, spec.solver, opts.get("curve_steps", 24), spec.workers)

    rows, results = [], []
    if case == "i":
        b = klt_case_i(params, gn, lq_norm_negative_part(pot, params.q), src)
        results.append((0.0, b))
    elif case == "ii":
        n = lq_norm_inverse(pot, params.q)
        b = klt_case_ii(params, gn, 1.0 / n, src)
        results.append((0.0, b))
    elif case == "iii":
        gamma = opts.get("gamma")
        if gamma is None or not gamma > 0:
            raise InputError("case iii needs --gamma > 0")
        b = klt_case_iii(spec.B, gamma, gibbs_integral(pot, gamma), d, constant_field=spec.B > 0 and d == 2)
        results.append((0.0, b))
    else:
        lams = spec.grid() if spec.lo is not None else np.array([opts.get("lambda", 0.0)])
        if spec.lo is not None and not np.any(lams == 0.0):
            lams = np.union1d(lams, [0.0])
        for lam in lams:
            try:
                results.append((float(lam), klt_threshold_case(params, gn, pot, params.q, float(lam),
                                                               case.split("-")[0], src)))
            except (IntegrabilityError, PreconditionError) as exc:
                # this lambda is simply not admissible for the potential
                results.append((float(lam), ("infeasible", f"{type(exc).__name__}: {exc}")))
            except MagInterpError as exc:
                results.append((float(lam), ("failed", f"{type(exc).__name__}: {exc}")))
    failures, infeasible = [], []
    for lam, b in results:
        if isinstance(b, KLTBound):
            rows.append([lam, b.input_norm, b.bound_value, b.asymptotic_extended, "ok"])
        else:
            (failures if b[0] == "failed" else infeasible).append({"lambda": lam, "error": b[1]})
            rows.append([lam, math.nan, math.nan, False, b[0]])
    good = [(lam, b) for lam, b in results if isinstance(b, KLTBound)]
    meta = spec.metadata()
    meta["potential"] = {"file": Path(potential_file).name, "d": d, "tail": pot.tail_description,
                         "tail_offset": pot.tail_offset, "nodes": int(pot.nodes.size)}
    meta["failures"] = failures
    meta["infeasible"] = infeasible
    report = []
    if good:
        lam, best = max(good, key=lambda t: t[1].bound_value)
        meta["best"] = {"lambda": lam, "bound_value": best.bound_value, "bound_source": best.bound_source,
                        "case": best.case, "input_norm": best.input_norm,
                        "asymptotic_extended": bool(best.asymptotic_extended)}
        at0 = [b for l0, b in good if l0 == 0.0]
        report = [f"case: {best.case}", f"input_norm: {best.input_norm!r}", f"bound_source: {best.bound_source}",
                  f"bound_value: {best.bound_value!r}", f"asymptotic_extended: {bool(best.asymptotic_extended)}"]
        if len(good) > 1:
            report.append(f"best_lambda: {lam!r}")
            if at0:
                report.append(f"bound_at_lambda_0: {at0[0].bound_value!r}")
    code = 1 if failures or not good else 0
    return meta, COLUMNS["klt"], rows, code, report


# ---- argument handling ---------------------------------------------------------

def _add_common(sp, range_name=None):
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--p", type=float, default=None)
    sp.add_argument("--B", type=float, default=1.0)
    if range_name:
        sp.add_argument(f"--{range_name}-min", dest="rmin", type=float, default=None)
        sp.add_argument(f"--{range_name}-max", dest="rmax_range", type=float, default=None)
        sp.add_argument("--steps", type=int, default=None)
        sp.add_argument("--spacing", choices=("linear", "log"), default="linear")
    sp.add_argument("--tol", type=float, default=None, help="relative ODE tolerance")
    sp.add_argument("--rmax", type=float, default=None, help="integration window (lower bound when field-driven)")
    sp.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    sp.add_argument("--out", default=None, help="output file (default stdout)")
    sp.add_argument("--config", default=None, help="JSON file with 'solver' and 'stability' sections")
    sp.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="maginterp", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"maginterp {__version__}")
    sub = ap.add_subparsers(dest="subcommand", required=True)
    sp = sub.add_parser("gn", help="Gagliardo-Nirenberg constants C_p, S_p")
    _add_common(sp, "p")
    for name, rng, text in (("mu-curve", "alpha", "mu bounds (interp, LT, EL, Gauss) against alpha"),
                            ("nu-curve", "beta", "nu bounds (interp, LT, EL, Gauss) against beta"),
                            ("xi-curve", "gamma", "log-Sobolev constant xi_B against gamma"),
                            ("stability-curve", "alpha", "lowest perturbation eigenvalue against alpha")):
        sp = sub.add_parser(name, help=text)
        _add_common(sp, rng)
        if name in FIG_COLUMNS:
            sp.add_argument("--fig-axes", action="store_true", help="append figure-normalized columns")
    sp = sub.add_parser("klt", help="KLT eigenvalue lower bound for a radial potential file")
    _add_common(sp, "lambda")
    sp.add_argument("--potential", required=True)
    sp.add_argument("--case", choices=("i", "ii", "iii", "i-threshold", "ii-threshold"), required=True)
    sp.add_argument("--source", choices=("interp", "LT", "EL"), default="interp")
    sp.add_argument("--gamma", type=float, default=None)
    sp.add_argument("--lambda", dest="lam", type=float, default=0.0)
    sp.add_argument("--Lambda", type=float, default=None, help="spectral gap (default B)")
    sp.add_argument("--curve-steps", type=int, default=24)
    return ap


DEFAULT_RANGES = {
    "mu-curve": (-0.9, 10.0, 50, 3.0),
    "stability-curve": (-0.99, 5.0, 15, 3.0),
    "nu-curve": (0.01, 10.0, 20, 1.4),
    "xi-curve": (0.01, 10.0, 50, 3.0),
    "gn": (None, None, 2, 3.0),
    "klt": (None, None, 2, 3.0),
}


def _load_config(path):
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict) or set(data) - {"solver", "stability"}:
        raise InputError("config must be a JSON object with optional 'solver' and 'stability' sections")
    return data


def spec_from_args(args) -> SweepSpec:
    sub = args.subcommand
    lo, hi, steps, p_default = DEFAULT_RANGES[sub]
    # defaults < config file < flags
    conf = _load_config(args.config)
    solver = SolverConfig.from_dict(conf.get("solver"))
    solver = solver.updated(rtol=args.tol)
    if args.rmax is not None:
        solver = solver.updated(r_max=args.rmax, r_max_floor=args.rmax)
    stab_data = conf.get("stability") or {}
    known = {f.name for f in dataclasses.fields(StabilityConfig)}
    if set(stab_data) - known:
        raise InputError(f"unknown stability config keys: {sorted(set(stab_data) - known)}")
    stab = StabilityConfig(**stab_data)
    rmin = args.rmin if args.rmin is not None else lo
    rmax = args.rmax_range if args.rmax_range is not None else hi
    if sub in ("gn", "klt") and (args.rmin is None) != (args.rmax_range is None):
        raise InputError("give both range ends or neither")
    spec = SweepSpec(sub, args.d, args.p if args.p is not None else p_default, args.B, rmin, rmax,
                     args.steps if args.steps is not None else steps, args.spacing, solver, stab,
                     args.fmt, args.out, args.workers, getattr(args, "fig_axes", False))
    if sub == "klt":
        spec.extra = {"case": args.case, "source": args.source, "gamma": args.gamma, "lambda": args.lam,
                      "Lambda": args.Lambda, "curve_steps": args.curve_steps}
        if rmin is None and args.steps is None:
            spec.steps = 2
    return spec


def _emit(spec, text):
    if spec.out:
        Path(spec.out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = spec_from_args(args)
        if spec.subcommand == "klt":
            meta, cols, rows, code, report = run_klt(spec, args.potential)
            print("\n".join(report))
            if spec.out:
                _emit(spec, render(spec.fmt, meta, cols, rows))
        else:
            meta, cols, rows, code = run_sweep(spec)
            _emit(spec, render(spec.fmt, meta, cols, rows))
    except InputError as exc:
        print(f"maginterp: error: {exc}", file=sys.stderr)
        return 2
    except MagInterpError as exc:
        print(f"maginterp: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for f in meta.get("failures", []):
        print(f"maginterp: node failed: {f}", file=sys.stderr)
    if meta.get("ordering_violations"):
        print(f"maginterp: ordering violated at rows {meta['ordering_violations']}", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
