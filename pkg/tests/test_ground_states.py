import json
import math

import numpy as np
import pytest

from conftest import run_python_backend
from oracles import compact_integral, decaying_integral, gaussian_quotient_super
from maginterp.errors import DomainError, InputError, UnsupportedParameterError
from maginterp.ground_states import (ProblemParams, compute_C_p, compute_S_p, cp_expansion, normalized_minimizer,
                                     rayleigh_quotient, solve_ground_state_subcritical,
                                     solve_ground_state_supercritical, xi_zero_field)
from maginterp.profiles import RadialProfile, gradient_integral, weighted_integral


def test_cp_supercritical_against_independent_shooting(gn3):
    I, a, _ = decaying_integral(2, 3.0, 1.0)
    assert gn3.C_p == pytest.approx(I ** (1 / 3), rel=1e-9)
    assert gn3.grid_spec["amplitude"] == pytest.approx(a, rel=1e-8)


def test_cp_three_dimensions_against_independent_shooting():
    gn = compute_C_p(3, 4.0)
    I, _, _ = decaying_integral(3, 4.0, 1.0, a_hi=10.0)
    assert gn.C_p == pytest.approx(I ** 0.5, rel=1e-9)


def test_cp_subcritical_against_independent_shooting(gn14):
    p, d = 1.4, 2
    I, a, edge = compact_integral(d, p)
    assert gn14.C_p == pytest.approx(I ** (2 * (2 - p) / (2 * p + d * (2 - p))), rel=1e-9)
    prof = solve_ground_state_subcritical(d, p)
    assert prof.initial_amplitude == pytest.approx(a, rel=1e-8)
    # the event-based oracle edge sits just inside the true support
    assert edge < prof.support_radius < edge * 1.01


@pytest.mark.parametrize("d,p", [(2, 3.0), (2, 1.4), (3, 1.5), (3, 4.0)])
def test_minimizer_attains_cp(d, p):
    gn = compute_C_p(d, p)
    u = normalized_minimizer(d, p)
    assert weighted_integral(u, p) == pytest.approx(1.0, rel=1e-9)
    assert rayleigh_quotient(u, p) == pytest.approx(gn.C_p, rel=1e-8)


def test_gaussian_trials_never_beat_the_optimum(gn3):
    # C_p is an infimum over all trial functions
    qs = [gaussian_quotient_super(3.0, 0.0, 1.0, s) for s in np.geomspace(0.2, 5.0, 25)]
    assert min(qs) > gn3.C_p
    assert min(qs) < 1.02 * gn3.C_p


@pytest.mark.parametrize("d,p", [(2, 3.0), (3, 4.0), (2, 1.4), (3, 1.5)])
def test_S_p_is_the_scale_invariant_constant(d, p):
    gn = compute_C_p(d, p)
    u = normalized_minimizer(d, p)
    g, n2 = gradient_integral(u), weighted_integral(u, 2.0)
    np_ = weighted_integral(u, p) ** (2 / p)
    if p > 2:
        t = d * (p - 2) / (2 * p)
        S = g ** t * n2 ** (1 - t) / np_
    else:
        # |grad u|^(2 t) |u|_p^(2(1-t)) / |u|_2^2 with the dual exponent
        t = d * (2 - p) / (2 * p + d * (2 - p))
        S = g ** t * np_ ** (1 - t) / n2
    assert S == pytest.approx(gn.S_p, rel=1e-8)


def test_S_p_closed_form_at_two():
    assert compute_S_p(2, 2.0, 1.0) == 1.0
    assert compute_C_p(2, 2.0).C_p == 1.0


def test_cp_expansion_approaches_cp():
    errs = [abs(compute_C_p(2, 2 + e).C_p - cp_expansion(2, e)) for e in (0.04, 0.02)]
    assert errs[1] < errs[0]


def test_xi_zero_field_value():
    assert xi_zero_field(2, 1.0) == pytest.approx(math.log(math.pi) + 2.0, rel=1e-15)
    assert xi_zero_field(3, 2.0) == pytest.approx(3.0 * (math.log(math.pi / 2) + 2.0), rel=1e-15)


def test_parameter_validation():
    with pytest.raises(UnsupportedParameterError):
        compute_C_p(3, 6.0)
    with pytest.raises(DomainError):
        compute_C_p(2, 1.0)
    with pytest.raises(InputError):
        compute_C_p(4, 3.0)
    with pytest.raises(DomainError):
        solve_ground_state_supercritical(2, 1.5)
    with pytest.raises(DomainError):
        ProblemParams(2, 3.0, 1.0, Lambda=0.0)
    assert ProblemParams(2, 3.0, 2.0).Lambda == 2.0
    assert ProblemParams(2, 3.0, 1.0).q == 3.0
    assert ProblemParams(2, 1.5, 1.0).q == 3.0


def test_python_backend_reproduces_numba_backend(gn3, gn14):
    out = run_python_backend(
        "import json; from maginterp._accel import backend_name; from maginterp.ground_states import compute_C_p;"
        "print(json.dumps([backend_name(), compute_C_p(2, 3.0).C_p, compute_C_p(2, 1.4).C_p]))")
    name, c3, c14 = json.loads(out)
    assert name == "python"
    assert c3 == pytest.approx(gn3.C_p, rel=1e-13)
    assert c14 == pytest.approx(gn14.C_p, rel=1e-13)


@pytest.mark.parametrize("d, exact", [(2, math.pi), (3, math.pi ** 1.5)])
def test_weighted_integral_of_a_gaussian(d, exact):
    # |v|^2 = exp(-r^2): the angular factor times the radial moment
    r = np.linspace(0.0, 9.0, 181)
    g = lambda x: np.exp(-x * x / 2)
    u = RadialProfile.from_callable(g, lambda x: -x * g(x), r, d, d2func=lambda x: (x * x - 1) * g(x))
    assert weighted_integral(u, 2.0) == pytest.approx(exact, rel=1e-9)
