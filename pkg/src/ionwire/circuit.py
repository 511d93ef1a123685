"""Equivalent-circuit picture: each ion is a series LC branch tied to a common
node A, which reaches ground through the wire resistance R in series with the
wire capacitance C shunted by the leakage resistance R_g.

Branch current I_i corresponds to ion velocity through I_i = (e beta_i / H) v_i,
and branch charge q_i to ion displacement in the same way.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp

from .electrostatics import geometry_alpha, geometry_beta
from .errors import DomainError, ResonanceError, SolverError
from .physmodel import EPSILON_0, SystemConfig, TrapGeometry, is_resonant, require_valid

LOSSLESS_DRIFT_LIMIT = 1e-6


@dataclass(frozen=True)
class CircuitEquivalent:
    inductances: tuple[float, ...]
    capacitances: tuple[float, ...]
    wire_capacitance: float
    wire_resistance: float
    leakage_resistance: float
    charge_per_displacement: tuple[float, ...]  # e beta_i / H, C/m

    @property
    def n_branches(self) -> int:
        return len(self.inductances)

    @property
    def quality_factors(self) -> tuple[float, ...]:
        """R^-1 sqrt(L_i/C_i); infinite for an ideal wire."""
        if self.wire_resistance == 0:
            return tuple(math.inf for _ in self.inductances)
        return tuple(math.sqrt(L / C) / self.wire_resistance for L, C in zip(self.inductances, self.capacitances))

    @property
    def quality_factor(self) -> float:
        return min(self.quality_factors)

    @property
    def branch_frequencies(self) -> tuple[float, ...]:
        return tuple(1 / math.sqrt(L * C) for L, C in zip(self.inductances, self.capacitances))

    def lossless(self) -> "CircuitEquivalent":
        return replace(self, wire_resistance=0.0, leakage_resistance=math.inf)

    def with_resistance(self, R: float) -> "CircuitEquivalent":
        return replace(self, wire_resistance=R)


def ion_equivalent_LC(cfg: SystemConfig, i: int) -> tuple[float, float]:
    """(L_i, C_i) = (m H^2 / (e beta_i)^2, 1/(w_i^2 L_i))."""
    require_valid(cfg)
    g = cfg.geometry
    H = g.wire_height
    beta = geometry_beta(H, g.ion_heights[i], geometry_alpha(H, g.wire_radius))
    L = cfg.mass * H**2 / (beta * cfg.charge) ** 2
    C = 1 / (cfg.modes.omegas[i] ** 2 * L)
    return L, C


def wire_capacitance(geom: TrapGeometry) -> float:
    """Capacitance of the wire to the ground plane, 2 pi eps0 L / alpha."""
    if not geom.wire_length > 0:
        raise DomainError(f"wire length must be positive, got {geom.wire_length!r}")
    return 2 * math.pi * EPSILON_0 * geom.wire_length / geometry_alpha(geom.wire_height, geom.wire_radius)


def circuit_equivalent(cfg: SystemConfig) -> CircuitEquivalent:
    require_valid(cfg)
    g = cfg.geometry
    H = g.wire_height
    alpha = geometry_alpha(H, g.wire_radius)
    pairs = [ion_equivalent_LC(cfg, i) for i in range(cfg.n_ions)]
    k = tuple(abs(cfg.charge) * geometry_beta(H, h, alpha) / H for h in g.ion_heights)
    return CircuitEquivalent(
        inductances=tuple(p[0] for p in pairs),
        capacitances=tuple(p[1] for p in pairs),
        wire_capacitance=wire_capacitance(g),
        wire_resistance=cfg.environment.wire_resistance,
        leakage_resistance=cfg.environment.leakage_resistance,
        charge_per_displacement=k,
    )


def quality_factor(cfg: SystemConfig, i: int = 0) -> float:
    R = cfg.environment.wire_resistance
    if R == 0:
        raise DomainError("quality factor is undefined (infinite) for a resistance-free wire")
    L, C = ion_equivalent_LC(cfg, i)
    return math.sqrt(L / C) / R


def exchange_rate_circuit(cfg: SystemConfig) -> float:
    """1/t_ex = 2 nu C_eff / C with C_eff = sqrt(C_1 C_2)."""
    require_valid(cfg)
    if cfg.n_ions != 2:
        raise DomainError("circuit exchange rate is defined for two ions")
    if not is_resonant(cfg.modes.omegas):
        raise ResonanceError("circuit exchange rate requires resonant ions")
    nu = cfg.modes.frequencies[0]
    C1 = ion_equivalent_LC(cfg, 0)[1]
    C2 = ion_equivalent_LC(cfg, 1)[1]
    return 2 * nu * math.sqrt(C1 * C2) / wire_capacitance(cfg.geometry)


def leakage_decay_constant(circ: CircuitEquivalent) -> float:
    """Current decay constant 4 R_g C of the leaky floating wire."""
    return 4 * circ.leakage_resistance * circ.wire_capacitance


# --- network simulation -----------------------------------------------------

@dataclass(frozen=True)
class CircuitState:
    """Branch currents and charges; ``node_voltage`` defaults to the value for a
    wire holding exactly the charge displaced from the branches."""

    currents: tuple[float, ...]
    charges: tuple[float, ...]
    node_voltage: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "currents", tuple(float(v) for v in self.currents))
        object.__setattr__(self, "charges", tuple(float(v) for v in self.charges))
        if len(self.currents) != len(self.charges):
            raise ValueError("currents and charges must have one entry per branch")

    @classmethod
    def quiescent(cls, n: int) -> "CircuitState":
        return cls((0.0,) * n, (0.0,) * n)


@dataclass(frozen=True)
class CircuitTrace:
    times: np.ndarray
    charges: np.ndarray  # (T, N)
    currents: np.ndarray  # (T, N)
    wire_charge: np.ndarray  # (T,)
    node_voltage: np.ndarray  # (T,)
    branch_energies: np.ndarray  # (T, N): L I^2/2 + q^2/(2 C_branch)
    stored_energy: np.ndarray  # (T,)

    def velocities(self, circ: CircuitEquivalent) -> np.ndarray:
        return self.currents / np.asarray(circ.charge_per_displacement)

    def displacements(self, circ: CircuitEquivalent) -> np.ndarray:
        return self.charges / np.asarray(circ.charge_per_displacement)


def branch_capacitances(circ: CircuitEquivalent, absorb_wire_load: bool = True) -> np.ndarray:
    """Series capacitances used in the network.

    With ``absorb_wire_load`` the static loading by the wire capacitance is
    absorbed, 1/C_i' = 1/C_i - 1/C, so that each branch loaded by C rings at the
    configured secular frequency (the measured trap frequency already includes
    the wire). Otherwise the bare C_i are used.
    """
    Ci = np.asarray(circ.capacitances, dtype=float)
    if not absorb_wire_load:
        return Ci
    inv = 1 / Ci - 1 / circ.wire_capacitance
    if np.any(inv <= 0):
        raise DomainError("ion capacitance is not small compared with the wire capacitance")
    return 1 / inv


def _system_matrix(circ: CircuitEquivalent, Cb: np.ndarray) -> np.ndarray:
    n = circ.n_branches
    L = np.asarray(circ.inductances)
    C = circ.wire_capacitance
    R = circ.wire_resistance
    Rg = circ.leakage_resistance
    # x = [q_1..q_n, I_1..I_n, Q_wire]
    A = np.zeros((2 * n + 1, 2 * n + 1))
    A[:n, n:2 * n] = np.eye(n)
    for i in range(n):
        A[n + i, i] = -1 / (L[i] * Cb[i])
        A[n + i, n:2 * n] = -R / L[i]
        A[n + i, 2 * n] = -1 / (L[i] * C)
    A[2 * n, n:2 * n] = 1.0
    if math.isfinite(Rg):
        A[2 * n, 2 * n] = -1 / (Rg * C)
    return A


def network_frequencies(circ: CircuitEquivalent, absorb_wire_load: bool = True) -> np.ndarray:
    """Natural angular frequencies of the lossless network, descending."""
    lossless = circ.lossless()
    A = _system_matrix(lossless, branch_capacitances(lossless, absorb_wire_load))
    w = np.abs(np.linalg.eigvals(A).imag)
    w = np.sort(w[w > 0])[::-1]
    return w[::2]


def beat_period(circ: CircuitEquivalent, absorb_wire_load: bool = True) -> float:
    """Period of the energy beat between two branches, 2 pi / (w_+ - w_-)."""
    if circ.n_branches != 2:
        raise DomainError("beat period is defined for two branches")
    wp, wm = network_frequencies(circ, absorb_wire_load)
    return 2 * math.pi / (wp - wm)


def _initial_vector(circ: CircuitEquivalent, initial: CircuitState) -> np.ndarray:
    n = circ.n_branches
    if len(initial.currents) != n:
        raise DomainError(f"initial state has {len(initial.currents)} branches, circuit has {n}")
    q = np.asarray(initial.charges)
    I = np.asarray(initial.currents)
    if initial.node_voltage is None:
        Q = q.sum()
    else:
        Q = circ.wire_capacitance * (initial.node_voltage - circ.wire_resistance * I.sum())
    return np.concatenate([q, I, [Q]])


def _trace(circ: CircuitEquivalent, Cb: np.ndarray, times: np.ndarray, X: np.ndarray) -> CircuitTrace:
    n = circ.n_branches
    q, I, Q = X[:, :n], X[:, n:2 * n], X[:, 2 * n]
    L = np.asarray(circ.inductances)
    C = circ.wire_capacitance
    V = circ.wire_resistance * I.sum(axis=1) + Q / C
    branch = 0.5 * L * I**2 + 0.5 * q**2 / Cb
    stored = branch.sum(axis=1) + 0.5 * Q**2 / C
    return CircuitTrace(times, q, I, Q, V, branch, stored)


def _modal_solution(A: np.ndarray, x0: np.ndarray, times: np.ndarray, scale: np.ndarray, rate: float) -> np.ndarray:
    # nondimensionalise: time in units of 1/rate, state rescaled so A is O(1)
    S = np.diag(scale)
    Sinv = np.diag(1 / scale)
    B = Sinv @ A @ S / rate
    evals, V = np.linalg.eig(B)
    coeffs = np.linalg.solve(V, Sinv @ x0)
    tau = rate * times
    Y = (np.exp(np.outer(tau, evals)) * coeffs) @ V.T
    X = np.real(Y) @ S.T
    X[times == 0] = x0
    return X


def simulate_circuit(circ: CircuitEquivalent, initial: CircuitState, times, *,
                     absorb_wire_load: bool = True, method: str = "modal",
                     rtol: float = 1e-9) -> CircuitTrace:
    """Time-domain response of the network at every entry of ``times``.

    ``method="modal"`` uses the exact propagator of the linear network
    (eigen-decomposition of its system matrix). ``method="radau"`` integrates
    with an adaptive implicit Runge-Kutta scheme at relative tolerance
    ``rtol`` and checks energy drift when the network is lossless.
    """
    if any(L <= 0 for L in circ.inductances) or any(C <= 0 for C in circ.capacitances) or circ.wire_capacitance <= 0:
        raise DomainError("network needs positive inductances and capacitances")
    t = np.atleast_1d(np.asarray(times, dtype=float))
    Cb = branch_capacitances(circ, absorb_wire_load)
    A = _system_matrix(circ, Cb)
    x0 = _initial_vector(circ, initial)
    n = circ.n_branches
    rate = float(max(1 / math.sqrt(L * C) for L, C in zip(circ.inductances, Cb)))
    q_scale = max(np.max(np.abs(x0[:n])), np.max(np.abs(x0[n:2 * n])) / rate, abs(x0[-1]), 1e-300)
    scale = np.concatenate([np.full(n, q_scale), np.full(n, q_scale * rate), [q_scale]])

    if method == "modal":
        X = _modal_solution(A, x0, t, scale, rate)
    elif method == "radau":
        S_inv = 1 / scale
        B = (A * scale[None, :]) * S_inv[:, None] / rate
        sol = solve_ivp(lambda s, y: B @ y, (0.0, rate * t.max()), x0 * S_inv, method="Radau",
                        t_eval=rate * t, rtol=rtol, atol=rtol * 1e-3, jac=B)
        if not sol.success:
            raise SolverError(f"network integration failed: {sol.message}")
        X = (sol.y.T) * scale
    else:
        raise ValueError(f"unknown method {method!r}")

    trace = _trace(circ, Cb, t, X)
    lossless = circ.wire_resistance == 0 and not math.isfinite(circ.leakage_resistance)
    e0 = trace.stored_energy[0]
    if e0 > 0:
        if lossless:
            drift = float(np.max(np.abs(trace.stored_energy - e0)) / e0)
            if drift > LOSSLESS_DRIFT_LIMIT:
                raise SolverError(f"energy drift {drift:.3g} in lossless network exceeds {LOSSLESS_DRIFT_LIMIT:g}", drift)
        else:
            rise = float(np.max(np.diff(trace.stored_energy), initial=0.0) / e0)
            if rise > LOSSLESS_DRIFT_LIMIT:
                raise SolverError(f"stored energy rose by {rise:.3g} of its initial value in a lossy network", rise)
    return trace


def circuit_state_from_ions(circ: CircuitEquivalent, positions, velocities) -> CircuitState:
    """Branch charges/currents equivalent to ion displacements/velocities."""
    k = np.asarray(circ.charge_per_displacement)
    return CircuitState(tuple(k * np.asarray(velocities)), tuple(k * np.asarray(positions)))
