"""Decoherence budget: Ohmic loss of the induced current, Johnson-noise heating,
and leakage of the floating wire to ground, each compared with the exchange time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .circuit import circuit_equivalent, ion_equivalent_LC, leakage_decay_constant
from .dynamics import exchange_time
from .electrostatics import geometry_alpha, geometry_beta
from .physmodel import BOLTZMANN_K, HBAR, PLANCK_H, Environment, SystemConfig, require_valid

ROOM_TEMPERATURE = 300.0
DEFAULT_CRYO_TEMPERATURE = 4.0

OK = "ok"
MARGINAL = "marginal"
BLOCKING = "blocking"
_RANK = {OK: 0, MARGINAL: 1, BLOCKING: 2}


@dataclass(frozen=True)
class VerdictPolicy:
    """A timescale is ``ok`` above ``ok_factor * t_ex``, ``blocking`` below
    ``blocking_factor * t_ex`` and ``marginal`` in between."""

    ok_factor: float = 10.0
    blocking_factor: float = 0.1

    def classify(self, timescale: float, t_ex: float) -> str:
        if timescale > self.ok_factor * t_ex:
            return OK
        if timescale >= self.blocking_factor * t_ex:
            return MARGINAL
        return BLOCKING


def verdict_rank(verdict: str) -> int:
    return _RANK[verdict]


def effective_resistance(env: Environment, temperature: float | None = None) -> float:
    """Wire resistance at ``temperature``.

    Phonon-limited resistivity is taken linear in T above the residual floor
    R_300 / resistivity_ratio: R(T) = R_300 * max(T/300 K, 1/ratio).
    """
    T = env.temperature if temperature is None else temperature
    return env.wire_resistance * max(T / ROOM_TEMPERATURE, 1.0 / env.resistivity_ratio)


def induced_current_amplitude(cfg: SystemConfig, i: int = 0) -> float:
    """Current amplitude e sqrt(hbar w/m) beta/H induced by an ion with about one motional quantum."""
    require_valid(cfg)
    g = cfg.geometry
    H = g.wire_height
    beta = geometry_beta(H, g.ion_heights[i], geometry_alpha(H, g.wire_radius))
    omega = cfg.modes.omegas[i]
    return abs(cfg.charge) * math.sqrt(HBAR * omega / cfg.mass) * beta / H


def dissipation_time(cfg: SystemConfig, i: int = 0, resistance: float | None = None) -> float:
    """Time to dissipate one quantum hbar w at the mean power I^2 R / 2 of a
    sinusoidal current of amplitude I. Infinite for a resistance-free wire."""
    R = cfg.environment.wire_resistance if resistance is None else resistance
    if R == 0:
        return math.inf
    I = induced_current_amplitude(cfg, i)
    # divide step by step: tiny R overflows to inf instead of underflowing to 0
    return HBAR * cfg.modes.omegas[i] / (0.5 * I**2) / R


def johnson_heating_time(cfg: SystemConfig, temperature: float | None = None, i: int = 0,
                         resistance: float | None = None) -> float:
    """Seconds per motional quantum gained from Johnson noise:
    tau = h Q / (k T) = h sqrt(L_i/C_i) / (k T R).

    ``resistance`` defaults to the configured wire resistance, used as given.
    Infinite when T = 0 or R = 0.
    """
    T = cfg.environment.temperature if temperature is None else temperature
    R = cfg.environment.wire_resistance if resistance is None else resistance
    if T == 0 or R == 0:
        return math.inf
    L, C = ion_equivalent_LC(cfg, i)
    return PLANCK_H * math.sqrt(L / C) / BOLTZMANN_K / T / R


def cryo_heating_time(cfg: SystemConfig, cryo_temperature: float = DEFAULT_CRYO_TEMPERATURE, i: int = 0) -> float:
    """Johnson heating time at ``cryo_temperature`` with the room-temperature
    resistance reduced by the resistivity ratio."""
    env = cfg.environment
    return johnson_heating_time(cfg, cryo_temperature, i, resistance=env.wire_resistance / env.resistivity_ratio)


@dataclass(frozen=True)
class NoiseBudget:
    induced_current: float
    dissipation_time: float
    johnson_heating_time: float
    cryo_heating_time: float
    leakage_decay: float
    exchange_time: float
    temperature: float
    effective_resistance: float
    anomalous_heating_time: float | None = None
    margins: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)

    @property
    def blocking(self) -> bool:
        return BLOCKING in self.verdicts.values()

    @property
    def worst_verdict(self) -> str:
        return max(self.verdicts.values(), key=verdict_rank)


def noise_budget(cfg: SystemConfig, policy: VerdictPolicy | None = None,
                 cryo_temperature: float = DEFAULT_CRYO_TEMPERATURE) -> NoiseBudget:
    """Compare every decoherence timescale with the exchange time at the
    configured temperature (resistance adjusted to that temperature)."""
    policy = policy or VerdictPolicy()
    require_valid(cfg)
    env = cfg.environment
    t_ex = exchange_time(cfg).t_ex
    R_T = effective_resistance(env)
    timescales = {
        "dissipation": dissipation_time(cfg, resistance=R_T),
        "johnson": johnson_heating_time(cfg, env.temperature, resistance=R_T),
        "leakage": leakage_decay_constant(circuit_equivalent(cfg)),
    }
    anomalous = None
    if env.anomalous_rate is not None:
        anomalous = math.inf if env.anomalous_rate == 0 else 1.0 / env.anomalous_rate
        timescales["anomalous"] = anomalous
    margins = {k: v / t_ex for k, v in timescales.items()}
    verdicts = {k: policy.classify(v, t_ex) for k, v in timescales.items()}
    return NoiseBudget(
        induced_current=induced_current_amplitude(cfg),
        dissipation_time=timescales["dissipation"],
        johnson_heating_time=timescales["johnson"],
        cryo_heating_time=cryo_heating_time(cfg, cryo_temperature),
        leakage_decay=timescales["leakage"],
        exchange_time=t_ex,
        temperature=env.temperature,
        effective_resistance=R_T,
        anomalous_heating_time=anomalous,
        margins=margins,
        verdicts=verdicts,
    )
