import math
import warnings
from dataclasses import replace

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from confgen import configs, make_config
from ionwire import (coupling_constant, coupling_constant_oracle, field_at_ion, geometry_alpha, geometry_beta,
                     induced_charge, induced_wire_potential, interaction_energy, species_constants,
                     wire_and_site_potentials)
from ionwire.electrostatics import (WireCharge, height_log, induced_charge_slope, pair_gamma,
                                    total_interaction_energy)
from ionwire.errors import AccuracyWarning, DomainError
from ionwire.physmodel import E_CHARGE, EPSILON_0, TrapGeometry

H, A, L, H0 = 200e-6, 12.5e-6, 10e-3, 150e-6
CA = species_constants("Ca40+")


def _symbolic_gamma():
    """Half the mixed derivative of U1 + U2, differentiated exactly."""
    q, eps, Hs, a, Ls, h1, h2 = sp.symbols("q epsilon H a L h1 h2", positive=True)
    alpha = sp.log((2 * Hs - a) / a)
    log = lambda h: sp.log((Hs + h) / (Hs - h))
    v_ind = q / (2 * sp.pi * eps * Ls) * (log(h1) + log(h2))
    total = q * v_ind / alpha * (log(h1) + log(h2))
    expr = sp.Rational(1, 2) * sp.diff(total, h1, h2)
    return sp.lambdify((q, eps, Hs, a, Ls, h1, h2), expr, "mpmath")


SYMBOLIC_GAMMA = _symbolic_gamma()


def log_ratio(H_, h):
    """ln((H+h)/(H-h)) without cancellation for small h."""
    return math.log1p(h / H_) - math.log1p(-h / H_)


def symbolic_gamma(cfg):
    g = cfg.geometry
    return float(SYMBOLIC_GAMMA(cfg.charge, EPSILON_0, g.wire_height, g.wire_radius, g.wire_length,
                                *g.ion_heights))


def test_alpha_values():
    assert geometry_alpha(H, A) == pytest.approx(math.log(31), rel=1e-15)
    assert geometry_alpha(H, A) == pytest.approx(3.434, abs=5e-4)
    assert geometry_alpha(H, H) == 0.0
    assert geometry_alpha(H, 2 * H / 3) == pytest.approx(math.log(2), rel=1e-14)
    for bad in (0.0, -1e-6, 2 * H):
        with pytest.raises(DomainError):
            geometry_alpha(H, bad)


def test_beta_values():
    alpha = math.log(31)
    assert geometry_beta(H, H0, alpha) == pytest.approx(2 * H**2 / (alpha * (H**2 - H0**2)), rel=1e-15)
    assert geometry_beta(H, H0, alpha) == pytest.approx(1.331, abs=5e-4)
    assert geometry_beta(H, 0.0, alpha) == pytest.approx(2 / alpha, rel=1e-15)
    with pytest.raises(DomainError):
        geometry_beta(H, H, alpha)
    assert geometry_beta(H, H * (1 - 1e-9), alpha) > 1e8


def test_height_log():
    for h in (0.0, 1e-12, 1e-9, 50e-6, 150e-6, 199e-6):
        assert height_log(H, h) == pytest.approx(log_ratio(H, h), rel=1e-13, abs=1e-300)
    assert height_log(H, 150e-6) == pytest.approx(math.log(7), rel=1e-14)
    with pytest.raises(DomainError):
        height_log(H, H)


def test_wire_and_site_potentials():
    geom = TrapGeometry(H, A, L, (H0, 0.0))
    V, phis = wire_and_site_potentials(1e-12, geom)
    assert V == pytest.approx(math.log(31) / (2 * math.pi * EPSILON_0) * 1e-12, rel=1e-14)
    assert V == pytest.approx(61.7e-3, rel=1e-3)
    assert phis[1] == 0.0
    assert wire_and_site_potentials(WireCharge(0.0), geom) == (0.0, (0.0, 0.0))


def test_induced_wire_potential(cfg):
    v = induced_wire_potential(CA, cfg.geometry)
    expected = 1.602176634e-19 / (2 * math.pi * 8.8541878128e-12 * 0.01) * 2 * math.log(350 / 50)
    assert v == pytest.approx(expected, rel=1e-13)
    assert v == pytest.approx(1.12e-6, rel=1e-2)
    ground = replace(cfg.geometry, ion_heights=(0.0, 0.0))
    assert induced_wire_potential(CA, ground) == 0.0


def test_induced_potential_is_additive(cfg):
    both = induced_wire_potential(CA, cfg.geometry)
    single = induced_wire_potential(CA, replace(cfg.geometry, ion_heights=(H0,)))
    assert both == pytest.approx(2 * single, rel=1e-15)


def test_interaction_energy(cfg):
    v = induced_wire_potential(CA, cfg.geometry)
    u = interaction_energy(v, cfg.geometry, 0)
    assert u == pytest.approx(E_CHARGE * v * math.log(7) / math.log(31), rel=1e-13)
    assert u == pytest.approx(1.0e-25, rel=0.05)
    assert interaction_energy(0.0, cfg.geometry, 0) == 0.0
    assert interaction_energy(v, replace(cfg.geometry, ion_heights=(0.0, H0)), 0) == 0.0


def test_gamma_typical(cfg):
    result = coupling_constant(cfg)
    assert result.gamma == pytest.approx(symbolic_gamma(cfg), rel=1e-12)
    assert result.gamma == pytest.approx(7.0e-18, rel=0.01)
    assert result.alpha == pytest.approx(math.log(31))
    assert result.beta == pytest.approx((1.3313, 1.3313), rel=1e-4)
    assert result.validity.ok and not result.validity.warnings


def test_gamma_symmetric_under_swap(cfg):
    a = make_config(H, A / H, L / H, (0.3, 0.8), 1e6)
    b = make_config(H, A / H, L / H, (0.8, 0.3), 1e6)
    assert coupling_constant(a).gamma == coupling_constant(b).gamma


def test_gamma_with_ions_on_the_plane():
    cfg = make_config(H, A / H, L / H, (0.0, 0.0), 1e6)
    expected = 2 * E_CHARGE**2 / (math.pi * EPSILON_0 * math.log(31) * L * H**2)
    assert coupling_constant(cfg).gamma == pytest.approx(expected, rel=1e-14)
    assert coupling_constant_oracle(cfg) == pytest.approx(expected, rel=1e-6)


def test_gamma_needs_two_ions(cfg):
    with pytest.raises(DomainError):
        coupling_constant(replace(cfg, geometry=replace(cfg.geometry, ion_heights=(H0,))).with_omegas([1.0]))


def test_oracle_typical(cfg):
    gamma = coupling_constant(cfg).gamma
    assert coupling_constant_oracle(cfg, step=50e-9) == pytest.approx(gamma, rel=1e-6)
    assert coupling_constant_oracle(cfg) == pytest.approx(gamma, rel=1e-6)


def test_oracle_error_is_high_order(cfg):
    # A 4th-order stencil: halving the step cuts the truncation error by >= 4x.
    gamma = symbolic_gamma(cfg)
    errors = [abs(coupling_constant_oracle(cfg, step=s) - gamma) for s in (1e-6, 0.5e-6)]
    assert errors[1] < errors[0] / 4


def test_oracle_step_checks(cfg):
    with pytest.warns(AccuracyWarning):
        coupling_constant_oracle(cfg, step=2e-6)
    with pytest.raises(DomainError):
        coupling_constant_oracle(cfg, step=30e-6)
    with pytest.raises(DomainError):
        coupling_constant_oracle(cfg, step=0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        coupling_constant_oracle(cfg)


def test_gamma_agrees_with_quadratic_fit(cfg):
    # Third route: least-squares quadratic surface through U(h1, h2).
    s = 2e-7
    offsets = np.array([(i, j) for i in range(-3, 4) for j in range(-3, 4)], float) * s
    u = np.array([total_interaction_energy(cfg, (H0 + x, H0 + y)) for x, y in offsets])
    x, y = offsets.T
    design = np.column_stack([np.ones_like(x), x, y, x * x, x * y, y * y, x**3, x * x * y, x * y * y, y**3])
    coeffs = np.linalg.lstsq(design, u, rcond=None)[0]
    assert 0.5 * coeffs[4] == pytest.approx(coupling_constant(cfg).gamma, rel=1e-5)


def test_induced_charge_values():
    assert induced_charge(CA, H, A, 0.0) == 0.0
    q = induced_charge(CA, H, A, H0)
    assert q == pytest.approx(-E_CHARGE * math.log(7) / math.log(31), rel=1e-14)
    assert q / E_CHARGE == pytest.approx(-0.567, abs=1e-3)


def test_induced_charge_slope_matches_finite_difference():
    d = 1e-9
    numeric = (induced_charge(CA, H, A, H0 + d) - induced_charge(CA, H, A, H0 - d)) / (2 * d)
    assert induced_charge_slope(CA, H, A, H0) == pytest.approx(numeric, rel=1e-7)


def test_field_at_ion():
    alpha = math.log(31)
    assert field_at_ion(0.0, H, H0, alpha) == 0.0
    e = field_at_ion(1e-6, H, H0, alpha)
    assert abs(e) == pytest.approx(6.66e-3, rel=1e-3)
    # E = -dPhi/dh, Phi(h) = V ln((H+h)/(H-h))/alpha
    phi = lambda h: 1e-6 * math.log((H + h) / (H - h)) / alpha
    d = 1e-9
    assert e == pytest.approx(-(phi(H0 + d) - phi(H0 - d)) / (2 * d), rel=1e-7)


@given(st.floats(1e-5, 1e-2), st.floats(1e-3, 0.99), st.floats(0.0, 0.999))
def test_reciprocity(H_, a_frac, h_frac):
    a, h = a_frac * H_, h_frac * H_
    geom = TrapGeometry(H_, a, 10 * H_, (h,))
    V, (phi,) = wire_and_site_potentials(1e-12, geom)
    ratio = -induced_charge(CA, H_, a, h) / E_CHARGE
    assert phi / V == pytest.approx(ratio, rel=1e-12, abs=1e-300)
    assert ratio == pytest.approx(log_ratio(H_, h) / math.log((2 * H_ - a) / a), rel=1e-10, abs=1e-300)


@settings(max_examples=50)
@given(configs())
def test_gamma_matches_symbolic_and_oracle(cfg):
    gamma = coupling_constant(cfg).gamma
    assert gamma == pytest.approx(symbolic_gamma(cfg), rel=1e-11)
    assert coupling_constant_oracle(cfg) == pytest.approx(gamma, rel=1e-6)


@given(configs(), st.floats(0.01, 100.0))
def test_inverse_cube_scaling(cfg, k):
    assert coupling_constant(cfg.scaled(k)).gamma == pytest.approx(coupling_constant(cfg).gamma / k**3, rel=1e-9)


@given(st.floats(0.0, 0.95), st.floats(0.0, 0.95), st.floats(1e-3, 0.04))
def test_gamma_monotone_in_height_and_length(f1, f2, step):
    base = coupling_constant(make_config(H, 0.05, 50, (f1, f2), 1e6)).gamma
    assert coupling_constant(make_config(H, 0.05, 50, (f1 + step, f2), 1e6)).gamma > base
    assert coupling_constant(make_config(H, 0.05, 50, (f1, f2 + step), 1e6)).gamma > base
    assert coupling_constant(make_config(H, 0.05, 50 * (1 + step), (f1, f2), 1e6)).gamma < base


def test_pair_gamma_domain():
    with pytest.raises(DomainError):
        pair_gamma(E_CHARGE, H, A, 0.0, H0, H0)
    with pytest.raises(DomainError):
        pair_gamma(E_CHARGE, H, A, L, H, H0)
