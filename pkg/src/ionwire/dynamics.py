"""Coupled motion of wire-coupled ions.

    H = sum_i [p_i^2/2m + m w_i^2 y_i^2/2] + sum_{i<j} gamma_ij y_i y_j

Three levels of description are provided: the exact classical normal-mode
solution, a truncated two-mode Fock-space propagator (exact diagonalisation,
no time stepping), and the rotating-wave (beam-splitter) evolution. All
propagators are pure functions of (system, state, time).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .electrostatics import coupling_constant, pair_gamma
from .errors import DomainError, ResonanceError, TruncationError, UnstableCouplingError
from .physmodel import HBAR, SystemConfig, ValidationIssue, is_resonant, require_valid, validate_config

TOP_LAYER_LIMIT = 1e-6
INITIAL_MARGIN = 1e-8
NORM_TOL = 1e-9


@dataclass(frozen=True)
class CouplingMatrix:
    """Symmetric N x N matrix of pairwise couplings (N/m) with zero diagonal."""

    gamma: np.ndarray
    pair_warnings: dict = field(default_factory=dict)

    def __post_init__(self):
        g = np.array(self.gamma, dtype=float)
        g.setflags(write=False)
        object.__setattr__(self, "gamma", g)

    @property
    def n(self) -> int:
        return self.gamma.shape[0]


def build_n_ion_coupling(cfg: SystemConfig) -> CouplingMatrix:
    """Pairwise coupling constants for N individually trapped ions.

    Every pair uses the two-ion closed form with its own heights; there is no
    fall-off with separation, so each pair carries the validity warnings that
    apply to it.
    """
    report = require_valid(cfg)
    g = cfg.geometry
    n = g.n_ions
    if n < 2:
        raise DomainError("need at least two ions")
    mat = np.zeros((n, n))
    global_warnings = tuple(w for w in report.warnings if w.code != "separation_limit")
    pair_warnings = {}
    for i in range(n):
        for j in range(i + 1, n):
            mat[i, j] = mat[j, i] = pair_gamma(cfg.charge, g.wire_height, g.wire_radius, g.wire_length,
                                                g.ion_heights[i], g.ion_heights[j])
            warns = list(global_warnings)
            d = g.separation(i, j)
            if d is not None and d < 10 * g.wire_height:
                warns.append(ValidationIssue("separation_limit",
                                             f"ions {i + 1},{j + 1}: separation {d:g} m < 10*H"))
            pair_warnings[(i, j)] = tuple(warns)
    return CouplingMatrix(mat, pair_warnings)


@dataclass(frozen=True)
class CoupledOscillators:
    """Identical-mass oscillators with bilinear position coupling."""

    mass: float
    omegas: tuple[float, ...]
    coupling: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "omegas", tuple(float(w) for w in self.omegas))
        c = np.array(self.coupling, dtype=float)
        if c.ndim == 0:
            c = np.array([[0.0, float(c)], [float(c), 0.0]])
        if c.shape != (len(self.omegas), len(self.omegas)):
            raise ValueError(f"coupling matrix shape {c.shape} does not match {len(self.omegas)} modes")
        if not np.allclose(c, c.T, rtol=0, atol=0) or np.any(np.diag(c) != 0):
            raise ValueError("coupling matrix must be symmetric with zero diagonal")
        c.setflags(write=False)
        object.__setattr__(self, "coupling", c)

    @classmethod
    def from_config(cls, cfg: SystemConfig) -> "CoupledOscillators":
        return cls(cfg.mass, cfg.modes.omegas, build_n_ion_coupling(cfg).gamma)

    @classmethod
    def two_ion(cls, mass: float, omega1: float, omega2: float, gamma: float) -> "CoupledOscillators":
        return cls(mass, (omega1, omega2), gamma)

    @property
    def n(self) -> int:
        return len(self.omegas)

    @property
    def gamma(self) -> float:
        """Coupling of the first pair."""
        return float(self.coupling[0, 1])

    @property
    def coupling_ratio(self) -> float:
        """gamma / (m w1 w2): the dimensionless coupling strength."""
        return self.gamma / (self.mass * self.omegas[0] * self.omegas[1])

    def stiffness(self) -> np.ndarray:
        return np.diag(self.mass * np.square(self.omegas)) + self.coupling

    def with_omegas(self, omegas: Sequence[float]) -> "CoupledOscillators":
        return replace(self, omegas=tuple(omegas))

    def position_scales(self) -> np.ndarray:
        """Oscillator lengths sqrt(hbar / 2 m w_i)."""
        return np.sqrt(HBAR / (2 * self.mass * np.asarray(self.omegas)))


System = Union[SystemConfig, CoupledOscillators]


def as_oscillators(system: System) -> CoupledOscillators:
    if isinstance(system, CoupledOscillators):
        return system
    return CoupledOscillators.from_config(system)


def desk_scaled(cfg: SystemConfig, coupling_ratio: float) -> SystemConfig:
    """Same geometry and species, with all secular frequencies lowered (or
    raised) to a common value w such that gamma/(m w^2) = ``coupling_ratio``.

    Makes the beat period only ~1/ratio oscillations long so that the full
    dynamics can be propagated cheaply, while gamma itself is unchanged.
    """
    gamma = coupling_constant(cfg).gamma
    omega = math.sqrt(gamma / (cfg.mass * coupling_ratio))
    return cfg.with_omegas([omega] * cfg.n_ions)


# --- exchange time and phase ------------------------------------------------

@dataclass(frozen=True)
class ExchangeResult:
    t_ex: float
    theta: float
    gamma: float
    resonant: bool = True

    @property
    def theta_wrapped(self) -> float:
        """Theta reduced to (-pi, pi]."""
        return wrap_phase(self.theta)[0]

    @property
    def winding(self) -> int:
        return wrap_phase(self.theta)[1]

    @property
    def rate(self) -> float:
        return 1.0 / self.t_ex


def wrap_phase(phi: float) -> tuple[float, int]:
    """Split ``phi`` into a value in (-pi, pi] and an integer number of turns."""
    turns = math.ceil((phi - math.pi) / (2 * math.pi))
    wrapped = phi - 2 * math.pi * turns
    if wrapped <= -math.pi:
        wrapped += 2 * math.pi
        turns -= 1
    return wrapped, turns


def _require_resonant(osc: CoupledOscillators, what: str) -> float:
    if osc.n != 2:
        raise DomainError(f"{what} is defined for two ions, got {osc.n}")
    if not is_resonant(osc.omegas):
        raise ResonanceError(f"{what} requires resonant ions (w1 = w2); "
                             "use evolve_classical or evolve_quantum for detuned systems")
    return osc.omegas[0]


def exchange_time(system: System) -> ExchangeResult:
    """Time for a complete swap of motional states between two resonant ions,
    and the phase Theta = pi (m w^2/gamma + 1/2) acquired on the way."""
    osc = as_oscillators(system)
    omega = _require_resonant(osc, "exchange_time")
    gamma = osc.gamma
    if not gamma > 0:
        raise DomainError("exchange needs a positive coupling constant")
    m = osc.mass
    t_ex = math.pi * omega * m / gamma
    theta = math.pi * (m * omega**2 / gamma + 0.5)
    return ExchangeResult(t_ex=t_ex, theta=theta, gamma=gamma, resonant=True)


def theta_sensitivity(system: System) -> float:
    """d Theta / d gamma (rad per N/m)."""
    osc = as_oscillators(system)
    omega = _require_resonant(osc, "theta_sensitivity")
    return -math.pi * osc.mass * omega**2 / osc.gamma**2


# --- classical --------------------------------------------------------------

@dataclass(frozen=True)
class ClassicalState:
    positions: tuple[float, ...]
    momenta: tuple[float, ...]

    def __post_init__(self):
        y = tuple(float(v) for v in self.positions)
        p = tuple(float(v) for v in self.momenta)
        if len(y) != len(p):
            raise ValueError("positions and momenta must have the same length")
        if not all(math.isfinite(v) for v in y + p):
            raise ValueError("classical state must be finite")
        object.__setattr__(self, "positions", y)
        object.__setattr__(self, "momenta", p)

    @classmethod
    def displaced(cls, n: int, ion: int, y0: float) -> "ClassicalState":
        y = [0.0] * n
        y[ion] = y0
        return cls(tuple(y), (0.0,) * n)


@dataclass(frozen=True)
class ClassicalTrajectory:
    times: np.ndarray
    positions: np.ndarray  # (T, N)
    momenta: np.ndarray  # (T, N)

    def state(self, k: int) -> ClassicalState:
        return ClassicalState(tuple(self.positions[k]), tuple(self.momenta[k]))

    def velocities(self, mass: float) -> np.ndarray:
        return self.momenta / mass


def ion_energies(system: System, positions, momenta) -> np.ndarray:
    """Uncoupled oscillator energy of each ion, p^2/2m + m w^2 y^2/2 (last axis = ion)."""
    osc = as_oscillators(system)
    y = np.asarray(positions)
    p = np.asarray(momenta)
    w2 = np.square(osc.omegas)
    return p**2 / (2 * osc.mass) + 0.5 * osc.mass * w2 * y**2


def total_energy(system: System, positions, momenta) -> np.ndarray:
    osc = as_oscillators(system)
    y = np.asarray(positions, dtype=float)
    p = np.asarray(momenta, dtype=float)
    kinetic = np.sum(p**2, axis=-1) / (2 * osc.mass)
    potential = 0.5 * np.einsum("...i,ij,...j->...", y, osc.stiffness(), y)
    return kinetic + potential


def two_ion_normal_modes(system: System) -> tuple[float, float, float]:
    """(w_plus, w_minus, mixing angle) of the two-ion quadratic form.

    w_pm^2 = (w1^2 + w2^2)/2 +- sqrt(((w1^2 - w2^2)/2)^2 + (gamma/m)^2); the
    w_plus eigenvector is (cos angle, sin angle).
    """
    osc = as_oscillators(system)
    w1, w2 = osc.omegas
    g = osc.gamma / osc.mass
    mean = 0.5 * (w1**2 + w2**2)
    half_diff = 0.5 * (w1**2 - w2**2)
    root = math.hypot(half_diff, g)
    wp2, wm2 = mean + root, mean - root
    if wm2 <= 0:
        raise UnstableCouplingError(f"coupling gamma={osc.gamma:g} N/m exceeds m*w1*w2; "
                                    "a normal-mode frequency is imaginary")
    angle = 0.5 * math.atan2(2 * g, w1**2 - w2**2)
    return math.sqrt(wp2), math.sqrt(wm2), angle


def _propagate_modes(modes: np.ndarray, freqs: np.ndarray, mass: float, y0, p0, times) -> tuple[np.ndarray, np.ndarray]:
    t = np.atleast_1d(np.asarray(times, dtype=float))
    q0 = modes.T @ np.asarray(y0, dtype=float)
    P0 = modes.T @ np.asarray(p0, dtype=float)
    phase = np.outer(t, freqs)
    c, s = np.cos(phase), np.sin(phase)
    q = q0 * c + P0 / (mass * freqs) * s
    P = P0 * c - mass * freqs * q0 * s
    y, p = q @ modes.T, P @ modes.T
    y[t == 0] = y0
    p[t == 0] = p0
    return y, p


def classical_trajectory(system: System, state: ClassicalState, times) -> ClassicalTrajectory:
    """Exact two-ion solution at every entry of ``times``."""
    osc = as_oscillators(system)
    if osc.n != 2 or len(state.positions) != 2:
        raise DomainError("classical_trajectory is the two-ion solution; use normal_mode_trajectory for N ions")
    wp, wm, angle = two_ion_normal_modes(osc)
    c, s = math.cos(angle), math.sin(angle)
    modes = np.array([[c, -s], [s, c]])
    t = np.atleast_1d(np.asarray(times, dtype=float))
    y, p = _propagate_modes(modes, np.array([wp, wm]), osc.mass, state.positions, state.momenta, t)
    return ClassicalTrajectory(t, y, p)


def evolve_classical(system: System, state: ClassicalState, t: float) -> ClassicalState:
    return classical_trajectory(system, state, [t]).state(0)


def normal_mode_trajectory(system: System, state: ClassicalState, times) -> ClassicalTrajectory:
    """Exact solution for any number of ions via eigendecomposition of K/m."""
    osc = as_oscillators(system)
    if len(state.positions) != osc.n:
        raise DomainError(f"state has {len(state.positions)} ions, system has {osc.n}")
    evals, modes = np.linalg.eigh(osc.stiffness() / osc.mass)
    if np.any(evals <= 0):
        raise UnstableCouplingError("coupling matrix makes the quadratic form indefinite")
    t = np.atleast_1d(np.asarray(times, dtype=float))
    y, p = _propagate_modes(modes, np.sqrt(evals), osc.mass, state.positions, state.momenta, t)
    return ClassicalTrajectory(t, y, p)


def evolve_normal_modes(system: System, state: ClassicalState, t: float) -> ClassicalState:
    return normal_mode_trajectory(system, state, [t]).state(0)


# --- Fock-space states ------------------------------------------------------

def fock_ket(n: int, n_max: int) -> np.ndarray:
    if not 0 <= n <= n_max:
        raise DomainError(f"Fock level {n} outside truncation 0..{n_max}")
    ket = np.zeros(n_max + 1, dtype=complex)
    ket[n] = 1.0
    return ket


def coherent_ket(mu: complex, n_max: int, check_margin: bool = True) -> np.ndarray:
    """Truncated coherent state, renormalised on the kept levels."""
    mu = complex(mu)
    if check_margin and abs(mu) ** 2 > n_max / 4:
        raise TruncationError(f"|mu|^2 = {abs(mu) ** 2:g} exceeds n_max/4 = {n_max / 4:g}")
    n = np.arange(n_max + 1)
    log_fact = np.array([math.lgamma(k + 1) for k in n])
    if mu == 0:
        return fock_ket(0, n_max)
    log_amp = n * math.log(abs(mu)) - 0.5 * log_fact
    ket = np.exp(log_amp - 0.5 * abs(mu) ** 2) * np.exp(1j * n * np.angle(mu))
    return ket / np.linalg.norm(ket)


def superposition_ket(levels: Sequence[int], n_max: int, phases: Sequence[float] | None = None) -> np.ndarray:
    """Equal-weight superposition of Fock levels, e.g. (|0> + |n>)/sqrt(2)."""
    ket = np.zeros(n_max + 1, dtype=complex)
    phases = phases or [0.0] * len(levels)
    for n, phi in zip(levels, phases):
        ket += np.exp(1j * phi) * fock_ket(n, n_max)
    return ket / np.linalg.norm(ket)


@dataclass(frozen=True)
class QuantumState:
    """Two-mode state; ``amplitudes[n1, n2]`` is the coefficient of |n1, n2>."""

    amplitudes: np.ndarray

    def __post_init__(self):
        c = np.array(self.amplitudes, dtype=complex)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] < 2:
            raise ValueError(f"amplitudes must be a square (n_max+1)^2 array with n_max >= 1, got {c.shape}")
        norm = float(np.sum(np.abs(c) ** 2))
        if abs(norm - 1) > NORM_TOL:
            raise ValueError(f"state is not normalised (norm^2 = {norm:.12g})")
        c.setflags(write=False)
        object.__setattr__(self, "amplitudes", c)

    @classmethod
    def product(cls, ket1, ket2) -> "QuantumState":
        return cls(np.outer(ket1, ket2))

    @classmethod
    def fock(cls, n1: int, n2: int, n_max: int) -> "QuantumState":
        return cls.product(fock_ket(n1, n_max), fock_ket(n2, n_max))

    @property
    def n_max(self) -> int:
        return self.amplitudes.shape[0] - 1

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def reduced_density_matrix(self, mode: int) -> np.ndarray:
        c = self.amplitudes
        return c @ c.conj().T if mode == 0 else c.T @ c.conj()

    def fidelity(self, mode: int, ket) -> float:
        """<psi| rho_mode |psi> for a pure target state of one mode."""
        ket = np.asarray(ket, dtype=complex)
        return float(np.real(ket.conj() @ self.reduced_density_matrix(mode) @ ket))

    def mean_occupations(self) -> tuple[float, float]:
        p = np.abs(self.amplitudes) ** 2
        n = np.arange(self.n_max + 1)
        return float(np.sum(p.sum(axis=1) * n)), float(np.sum(p.sum(axis=0) * n))

    def expect_annihilation(self, mode: int) -> complex:
        rho = self.reduced_density_matrix(mode)
        a = _lowering(self.n_max)
        return complex(np.trace(rho @ a))

    def top_layer_population(self, layers: int = 1) -> float:
        p = np.abs(self.amplitudes) ** 2
        cut = self.n_max + 1 - layers
        return float(p[cut:, :].sum() + p[:cut, cut:].sum())


@lru_cache(maxsize=32)
def _lowering(n_max: int) -> np.ndarray:
    a = np.diag(np.sqrt(np.arange(1, n_max + 1)), k=1)
    a.setflags(write=False)
    return a


def _check_initial_margin(state: QuantumState) -> None:
    leak = state.top_layer_population(layers=2)
    if leak > INITIAL_MARGIN:
        raise TruncationError(f"initial population {leak:.3g} in the top two Fock layers; increase n_max")


def _check_leak(amplitudes: np.ndarray, times) -> None:
    p = np.abs(amplitudes) ** 2
    top = p[:, -1, :].sum(axis=-1) + p[:, :-1, -1].sum(axis=-1)
    worst = int(np.argmax(top))
    if top[worst] > TOP_LAYER_LIMIT:
        raise TruncationError(f"top Fock layer population {top[worst]:.3g} at t={times[worst]:g} s "
                              f"exceeds {TOP_LAYER_LIMIT:g}; increase n_max")


@dataclass(frozen=True)
class QuantumTrajectory:
    times: np.ndarray
    amplitudes: np.ndarray  # (T, n_max+1, n_max+1)

    def state(self, k: int) -> QuantumState:
        return QuantumState(self.amplitudes[k])

    def mean_occupations(self) -> np.ndarray:
        p = np.abs(self.amplitudes) ** 2
        n = np.arange(self.amplitudes.shape[1])
        return np.stack([np.einsum("tij,i->t", p, n), np.einsum("tij,j->t", p, n)], axis=1)

    def norms(self) -> np.ndarray:
        return np.sqrt(np.sum(np.abs(self.amplitudes) ** 2, axis=(1, 2)))


class FockPropagator:
    """Exact propagator of the truncated two-mode Hamiltonian

        H/hbar = w1 a^dag a + w2 b^dag b + gamma x1 x2 (a + a^dag)(b + b^dag) / hbar

    obtained by one Hermitian diagonalisation. Energies are measured in units
    of hbar w1 and time in units of 1/w1 to keep the matrix well scaled.
    """

    def __init__(self, system: System, n_max: int):
        osc = as_oscillators(system)
        if osc.n != 2:
            raise DomainError("the Fock propagator handles two modes")
        self.system = osc
        self.n_max = n_max
        w1, w2 = osc.omegas
        self.omega_ref = w1
        dim = n_max + 1
        a = _lowering(n_max)
        num = np.diag(np.arange(dim, dtype=float))
        eye = np.eye(dim)
        x = a + a.T
        kappa = osc.gamma / (2 * osc.mass * math.sqrt(w1 * w2)) / w1
        h = np.kron(num, eye) + (w2 / w1) * np.kron(eye, num) + kappa * np.kron(x, x)
        self.energies, self.vectors = np.linalg.eigh(h)

    def propagate(self, state: QuantumState, times) -> QuantumTrajectory:
        if state.n_max != self.n_max:
            raise DomainError(f"state truncation {state.n_max} does not match propagator {self.n_max}")
        t = np.atleast_1d(np.asarray(times, dtype=float))
        coeffs = self.vectors.conj().T @ state.amplitudes.reshape(-1)
        phases = np.exp(-1j * np.outer(self.omega_ref * t, self.energies))
        out = ((phases * coeffs) @ self.vectors.T).reshape(len(t), self.n_max + 1, self.n_max + 1)
        out[t == 0] = state.amplitudes
        return QuantumTrajectory(t, out)


def quantum_trajectory(system: System, state: QuantumState, times) -> QuantumTrajectory:
    _check_initial_margin(state)
    traj = FockPropagator(system, state.n_max).propagate(state, times)
    _check_leak(traj.amplitudes, traj.times)
    return traj


def evolve_quantum(system: System, state: QuantumState, t: float) -> QuantumState:
    """Apply exp(-i H t / hbar) of the full (non-RWA) two-ion Hamiltonian."""
    return quantum_trajectory(system, state, [t]).state(0)


# --- rotating-wave approximation --------------------------------------------

@lru_cache(maxsize=256)
def _hopping_eigensystem(total: int) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of (a^dag b + a b^dag) restricted to n1 + n2 = total,
    in the basis n1 = 0..total."""
    n1 = np.arange(1, total + 1)
    off = np.sqrt(n1 * (total - n1 + 1.0))
    T = np.diag(off, 1) + np.diag(off, -1)
    evals, evecs = np.linalg.eigh(T)
    evals = np.round(evals)  # spectrum is exactly total, total-2, ..., -total
    evals.setflags(write=False)
    evecs.setflags(write=False)
    return evals, evecs


def rwa_trajectory(system: System, state: QuantumState, times) -> QuantumTrajectory:
    """Beam-splitter evolution under hbar w (a^dag a + b^dag b) + hbar g (a^dag b + a b^dag),
    g = gamma/(2 m w).

    The free rotation at w is kept so that results are in the same (lab) frame
    as evolve_quantum; in the frame rotating at w the mode operators obey
    a(t) = a cos(gt) - i b sin(gt). Each total-excitation block is evolved
    exactly in an untruncated block, then projected back onto n1, n2 <= n_max.
    """
    osc = as_oscillators(system)
    omega = _require_resonant(osc, "evolve_rwa")
    _check_initial_margin(state)
    g = osc.gamma / (2 * osc.mass * omega)
    t = np.atleast_1d(np.asarray(times, dtype=float))
    n_max = state.n_max
    c = state.amplitudes
    out = np.zeros((len(t), n_max + 1, n_max + 1), dtype=complex)
    lost = np.zeros(len(t))
    for total in range(2 * n_max + 1):
        lo = max(0, total - n_max)
        hi = min(total, n_max)
        n1_kept = np.arange(lo, hi + 1)
        block_in = np.zeros(total + 1, dtype=complex)
        block_in[n1_kept] = c[n1_kept, total - n1_kept]
        if not np.any(block_in):
            continue
        evals, evecs = _hopping_eigensystem(total)
        coeffs = evecs.T @ block_in
        # free rotation exp(-i w total t), reduced mod 2 pi before exponentiating
        free = np.mod(omega * t * total, 2 * np.pi)
        phases = np.exp(-1j * (free[:, None] + np.outer(g * t, evals)))
        block_out = (phases * coeffs) @ evecs.T
        out[:, n1_kept, total - n1_kept] = block_out[:, n1_kept]
        mask = np.ones(total + 1, dtype=bool)
        mask[n1_kept] = False
        lost += np.sum(np.abs(block_out[:, mask]) ** 2, axis=1)
    if np.any(lost > TOP_LAYER_LIMIT):
        k = int(np.argmax(lost))
        raise TruncationError(f"population {lost[k]:.3g} left the truncated basis at t={t[k]:g} s; increase n_max")
    out[t == 0] = c
    _check_leak(out, t)
    return QuantumTrajectory(t, out)


def evolve_rwa(system: System, state: QuantumState, t: float) -> QuantumState:
    return rwa_trajectory(system, state, [t]).state(0)


def coherent_exchange(system: System, mu: complex, n_max: int | None = None) -> tuple[float, complex]:
    """Send |mu> (x) |0> through one exchange time in the RWA and return
    (t_ex, amplitude of the coherent state now held by ion 2)."""
    osc = as_oscillators(system)
    result = exchange_time(osc)
    if n_max is None:
        n_max = default_n_max(mu)
    psi = QuantumState.product(coherent_ket(mu, n_max), fock_ket(0, n_max))
    out = evolve_rwa(osc, psi, result.t_ex)
    return result.t_ex, out.expect_annihilation(1)


def default_n_max(mu: complex = 0.0, fock_level: int = 0) -> int:
    """Truncation with a comfortable margin: 4|mu|^2 + 20, at least 20 levels
    and at least 10 above any Fock level in the initial state."""
    return max(20, math.ceil(4 * abs(mu) ** 2 + 20), fock_level + 10)


def mean_positions(system: System, traj: QuantumTrajectory) -> np.ndarray:
    """<y_i>(t) = 2 x_i Re<a_i>, shape (T, 2)."""
    osc = as_oscillators(system)
    scales = osc.position_scales()
    a = _lowering(traj.amplitudes.shape[1] - 1)
    c = traj.amplitudes
    a1 = np.einsum("tij,ik,tkj->t", c.conj(), a, c)
    a2 = np.einsum("tij,jk,tik->t", c.conj(), a, c)
    return 2 * np.stack([scales[0] * a1.real, scales[1] * a2.real], axis=1)


def rwa_error_metric(system: System, t_grid=None) -> float:
    """Largest deviation of ion 1's energy fraction between the exact classical
    solution and the RWA envelope cos^2(W t/2), W = gamma/(m w), on ``t_grid``.

    Initial condition: ion 1 displaced, ion 2 at rest. The default grid spans
    two exchange times with 64 samples per oscillation period.
    """
    osc = as_oscillators(system)
    ex = exchange_time(osc)
    omega = osc.omegas[0]
    if t_grid is None:
        periods = 2 * ex.t_ex * omega / (2 * math.pi)
        t_grid = np.linspace(0.0, 2 * ex.t_ex, int(64 * periods) + 2)
    t = np.asarray(t_grid, dtype=float)
    state = ClassicalState.displaced(2, 0, 1e-9)
    traj = classical_trajectory(osc, state, t)
    e_total = float(total_energy(osc, state.positions, state.momenta))
    e1 = ion_energies(osc, traj.positions, traj.momenta)[:, 0] / e_total
    big_omega = osc.gamma / (osc.mass * omega)
    envelope = np.cos(big_omega * t / 2) ** 2
    return float(np.max(np.abs(e1 - envelope)))
