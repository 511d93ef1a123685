import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from confgen import configs, make_config
from ionwire import exchange_time, typical_config
from ionwire.circuit import (CircuitEquivalent, CircuitState, beat_period, branch_capacitances,
                             circuit_equivalent, circuit_state_from_ions, exchange_rate_circuit, ion_equivalent_LC,
                             leakage_decay_constant, network_frequencies, quality_factor, simulate_circuit,
                             wire_capacitance)
from ionwire.decoherence import noise_budget
from ionwire.dynamics import ClassicalState, as_oscillators, classical_trajectory, desk_scaled
from ionwire.errors import DomainError, ResonanceError
from ionwire.physmodel import E_CHARGE, EPSILON_0


@pytest.fixture
def lossless():
    return desk_scaled(typical_config(wire_resistance=0.0, leakage_resistance=math.inf), 1e-3)


def test_ion_lc_typical(cfg):
    L, C = ion_equivalent_LC(cfg, 0)
    beta = 2 * 200e-6**2 / (math.log(31) * (200e-6**2 - 150e-6**2))
    assert L == pytest.approx(cfg.mass * 200e-6**2 / (E_CHARGE * beta) ** 2, rel=1e-14)
    assert L == pytest.approx(6e4, rel=0.05)
    assert C == pytest.approx(4e-19, rel=0.1)
    assert 1 / math.sqrt(L * C) == pytest.approx(cfg.modes.omegas[0], rel=1e-14)


def test_ion_lc_frequency_dependence(cfg):
    L, C = ion_equivalent_LC(cfg, 0)
    w = cfg.modes.omegas[0]
    L2, C2 = ion_equivalent_LC(cfg.with_omegas([2 * w, 2 * w]), 0)
    assert L2 == L
    assert C2 == pytest.approx(C / 4, rel=1e-15)


def test_wire_capacitance(cfg):
    C = wire_capacitance(cfg.geometry)
    assert C == pytest.approx(2 * math.pi * EPSILON_0 * 0.01 / math.log(31), rel=1e-15)
    assert C == pytest.approx(1.6e-13, rel=0.02)
    longer = replace(cfg.geometry, wire_length=0.02)
    assert wire_capacitance(longer) == pytest.approx(2 * C, rel=1e-15)
    with pytest.raises(DomainError):
        wire_capacitance(replace(cfg.geometry, wire_radius=2 * cfg.geometry.wire_height))


def test_quality_factor(cfg):
    Q = quality_factor(cfg)
    assert Q == pytest.approx(6e11, rel=0.05)
    assert quality_factor(cfg.with_environment(wire_resistance=0.3)) == pytest.approx(2 * Q, rel=1e-14)
    with pytest.raises(DomainError):
        quality_factor(cfg.with_environment(wire_resistance=0.0))
    assert circuit_equivalent(cfg.with_environment(wire_resistance=0.0)).quality_factor == math.inf


def test_circuit_exchange_rate(cfg):
    rate = exchange_rate_circuit(cfg)
    assert rate == pytest.approx(5.3, rel=0.02)
    assert 1 / rate == pytest.approx(0.19, rel=0.05)
    # C_i does not depend on L, so doubling L doubles C alone.
    longer = replace(cfg, geometry=replace(cfg.geometry, wire_length=0.02))
    assert exchange_rate_circuit(longer) == pytest.approx(rate / 2, rel=1e-14)
    w = cfg.modes.omegas[0]
    with pytest.raises(ResonanceError):
        exchange_rate_circuit(cfg.with_omegas([w, 1.1 * w]))


def test_leakage_decay(cfg):
    circ = circuit_equivalent(cfg)
    tau = leakage_decay_constant(circ)
    assert tau == pytest.approx(4 * 1e13 * circ.wire_capacitance, rel=1e-15)
    assert tau == pytest.approx(6.5, rel=0.01)
    assert leakage_decay_constant(replace(circ, leakage_resistance=2e13)) == pytest.approx(2 * tau, rel=1e-15)
    assert tau > exchange_time(cfg).t_ex
    assert noise_budget(cfg).verdicts["leakage"] == "ok"


@settings(max_examples=100)
@given(configs())
def test_route_identity(cfg):
    assert exchange_rate_circuit(cfg) == pytest.approx(exchange_time(cfg).rate, rel=1e-9)


def test_route_identity_unequal_heights():
    cfg = make_config(200e-6, 0.0625, 50, (0.2, 0.9), 1e6)
    assert exchange_rate_circuit(cfg) == pytest.approx(exchange_time(cfg).rate, rel=1e-12)


# --- network simulation -----------------------------------------------------------

def test_quiescent_network_stays_at_rest(lossless):
    circ = circuit_equivalent(lossless)
    trace = simulate_circuit(circ, CircuitState.quiescent(2), np.linspace(0, 1e-3, 11))
    assert not np.any(trace.currents) and not np.any(trace.charges) and not np.any(trace.stored_energy)


def test_absorbed_wire_load_restores_trap_frequency(lossless):
    circ = circuit_equivalent(lossless)
    wp, wm = network_frequencies(circ)
    w = lossless.modes.omegas[0]
    osc = as_oscillators(lossless)
    assert wp * wm == pytest.approx(w**2 * math.sqrt(1 - osc.coupling_ratio**2), rel=1e-9)
    assert beat_period(circ) == pytest.approx(2 * exchange_time(lossless).t_ex, rel=1e-6)
    # Bare branches: the common mode is stiffened by the wire load, the
    # antisymmetric mode leaves node A at rest and keeps the bare frequency.
    bare_p, bare_m = network_frequencies(circ, absorb_wire_load=False)
    assert bare_p > wp
    assert bare_m == pytest.approx(w, rel=1e-9)
    Cb = branch_capacitances(circ)
    assert 1 / Cb[0] == pytest.approx(1 / circ.capacitances[0] - 1 / circ.wire_capacitance, rel=1e-12)


def test_energy_transfer_between_branches(lossless):
    circ = circuit_equivalent(lossless)
    t_ex = exchange_time(lossless).t_ex
    start = circuit_state_from_ions(circ, (1e-8, 0.0), (0.0, 0.0))
    trace = simulate_circuit(circ, start, [0.0, t_ex, 2 * t_ex])
    e = trace.branch_energies
    assert e[1, 0] / e[0, 0] < 1e-4
    assert abs(e[2, 0] / e[0, 0] - 1) < 1e-4


def test_lossless_energy_conserved(lossless):
    circ = circuit_equivalent(lossless)
    t_ex = exchange_time(lossless).t_ex
    start = CircuitState((1e-20, -3e-21), (2e-26, 0.0))
    trace = simulate_circuit(circ, start, np.linspace(0, 2 * t_ex, 3001))
    e = trace.stored_energy
    assert np.max(np.abs(e - e[0])) / e[0] < 1e-8


def test_radau_matches_modal(lossless):
    circ = circuit_equivalent(lossless)
    start = circuit_state_from_ions(circ, (1e-8, 0.0), (0.0, 0.0))
    times = np.linspace(0, 40 * 2 * math.pi / lossless.modes.omegas[0], 401)
    exact = simulate_circuit(circ, start, times)
    stepped = simulate_circuit(circ, start, times, method="radau")
    scale = np.max(np.abs(exact.currents))
    assert np.max(np.abs(stepped.currents - exact.currents)) / scale < 1e-6


def test_currents_map_onto_velocities(lossless):
    circ = circuit_equivalent(lossless)
    osc = as_oscillators(lossless)
    t = np.linspace(0, 2 * exchange_time(lossless).t_ex, 5001)
    ions = classical_trajectory(osc, ClassicalState((1e-8, -2e-9), (3e-28, 0.0)), t)
    start = circuit_state_from_ions(circ, (1e-8, -2e-9), (3e-28 / osc.mass, 0.0))
    trace = simulate_circuit(circ, start, t)
    v = ions.velocities(osc.mass)
    assert np.max(np.abs(trace.velocities(circ) - v)) / np.max(np.abs(v)) < 1e-6
    y = ions.positions
    assert np.max(np.abs(trace.displacements(circ) - y)) / np.max(np.abs(y)) < 1e-6


def test_kirchhoff_charge_balance(lossless):
    circ = circuit_equivalent(lossless)
    start = circuit_state_from_ions(circ, (1e-8, 3e-9), (0.0, 0.0))
    trace = simulate_circuit(circ, start, np.linspace(0, 1e-2, 101))
    # With no leakage the wire holds exactly the charge that left the branches.
    balance = trace.wire_charge - trace.charges.sum(axis=1)
    assert np.max(np.abs(balance)) < 1e-12 * np.max(np.abs(trace.charges))


def single_branch(Q, omega=2 * math.pi * 1e4):
    L = 1.0
    C = 1 / (omega**2 * L)
    R = math.sqrt(L / C) / Q
    return CircuitEquivalent((L,), (C,), 1e3 * C, R, math.inf, (1.0,)), omega


@pytest.mark.parametrize("Q", [1e2, 1e3, 1e4])
def test_decay_time_matches_quality_factor(Q):
    circ, omega = single_branch(Q)
    Cb = branch_capacitances(circ)[0]
    w_loaded = 1 / math.sqrt(circ.inductances[0] * 1 / (1 / Cb + 1 / circ.wire_capacitance))
    assert w_loaded == pytest.approx(omega, rel=1e-12)
    tau_amp = 2 * Q / omega
    times = np.linspace(0, 3 * tau_amp, 20001)
    trace = simulate_circuit(circ, CircuitState((0.0,), (1e-9,)), times)
    e = trace.stored_energy
    assert np.all(np.diff(e) <= 1e-12 * e[0])
    # 1/e of the energy after Q/w; the current amplitude falls by 1/e after 2Q/w
    t_energy = times[np.argmax(e < e[0] / math.e)]
    assert t_energy == pytest.approx(Q / omega, rel=0.1)
    peaks = np.abs(trace.currents[:, 0])
    late = times > tau_amp
    assert peaks[late].max() == pytest.approx(peaks.max() / math.e, rel=0.1)


def test_lossy_two_branch_energy_decays(lossless):
    circ = circuit_equivalent(lossless).with_resistance(1e12)
    start = circuit_state_from_ions(circ, (1e-8, 0.0), (0.0, 0.0))
    trace = simulate_circuit(circ, start, np.linspace(0, 0.2, 2001))
    e = trace.stored_energy
    assert np.all(np.diff(e) <= 1e-12 * e[0])
    assert e[-1] < e[0]


def test_simulation_errors(lossless):
    circ = circuit_equivalent(lossless)
    with pytest.raises(DomainError):
        simulate_circuit(circ, CircuitState.quiescent(3), [0.0])
    with pytest.raises(ValueError):
        simulate_circuit(circ, CircuitState.quiescent(2), [0.0], method="euler")
    with pytest.raises(DomainError):
        simulate_circuit(replace(circ, inductances=(0.0, 1.0)), CircuitState.quiescent(2), [0.0])


def test_initial_row_is_exact(lossless):
    circ = circuit_equivalent(lossless)
    start = CircuitState((1e-20, 0.0), (2e-26, -1e-26))
    trace = simulate_circuit(circ, start, [0.0, 1e-3])
    assert tuple(trace.currents[0]) == start.currents
    assert tuple(trace.charges[0]) == start.charges
