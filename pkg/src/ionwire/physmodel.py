"""Physical constants, ion species and the validated system configuration.

Everything is SI internally. Engineering units only appear at the config-file
boundary (see :mod:`ionwire.configfile`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

from .errors import ConfigError, UnknownSpeciesError

# Validity-regime heuristics: "much greater than" is read as a factor of 10.
LONG_WIRE_FACTOR = 10.0
SEPARATION_FACTOR = 10.0
THIN_WIRE_FRACTION = 0.2


@dataclass(frozen=True)
class PhysicalConstants:
    elementary_charge: float = 1.602176634e-19
    vacuum_permittivity: float = 8.8541878128e-12
    planck_h: float = 6.62607015e-34
    planck_hbar: float = 1.0545718176461565e-34
    boltzmann_k: float = 1.380649e-23
    atomic_mass_unit: float = 1.66053906660e-27


CONSTANTS = PhysicalConstants()
E_CHARGE = CONSTANTS.elementary_charge
EPSILON_0 = CONSTANTS.vacuum_permittivity
PLANCK_H = CONSTANTS.planck_h
HBAR = CONSTANTS.planck_hbar
BOLTZMANN_K = CONSTANTS.boltzmann_k
AMU = CONSTANTS.atomic_mass_unit


@dataclass(frozen=True)
class IonSpecies:
    name: str
    mass: float
    charge: float = E_CHARGE

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"ion mass must be positive, got {self.mass}")
        if self.charge == 0:
            raise ValueError("ion charge must be non-zero")


# Atomic masses in u. Only singly charged species are tabulated.
_SPECIES_MASS_U = {
    "Ca40+": 39.9626,
    "Ca43+": 42.958766,
    "Be9+": 9.0121831,
    "Mg24+": 23.985042,
    "Sr88+": 87.905612,
    "Ba138+": 137.905247,
    "Yb171+": 170.936331,
}


def known_species() -> tuple[str, ...]:
    return tuple(_SPECIES_MASS_U)


def species_constants(name: str) -> IonSpecies:
    """Look up a built-in ion species by label, e.g. ``"Ca40+"``."""
    try:
        mass_u = _SPECIES_MASS_U[name]
    except KeyError:
        raise UnknownSpeciesError(name, known_species()) from None
    return IonSpecies(name=name, mass=mass_u * AMU, charge=E_CHARGE)


@dataclass(frozen=True)
class TrapGeometry:
    """Wire of radius ``wire_radius`` and length ``wire_length`` at ``wire_height``
    above a ground plane, with one ion per entry of ``ion_heights``.

    ``ion_separations`` is optional and, when given, lists the horizontal
    distances d_ij for i < j in row-major order: (d01, d02, ..., d12, ...).
    """

    wire_height: float
    wire_radius: float
    wire_length: float
    ion_heights: tuple[float, ...]
    ion_separations: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "ion_heights", tuple(float(h) for h in self.ion_heights))
        if self.ion_separations is not None:
            object.__setattr__(self, "ion_separations", tuple(float(d) for d in self.ion_separations))

    @property
    def n_ions(self) -> int:
        return len(self.ion_heights)

    def separation(self, i: int, j: int) -> float | None:
        if self.ion_separations is None or i == j:
            return None
        i, j = min(i, j), max(i, j)
        n = self.n_ions
        index = i * n - i * (i + 1) // 2 + (j - i - 1)
        return self.ion_separations[index]

    def scaled(self, k: float) -> "TrapGeometry":
        """All lengths multiplied by ``k``."""
        seps = None if self.ion_separations is None else tuple(k * d for d in self.ion_separations)
        return TrapGeometry(
            wire_height=k * self.wire_height,
            wire_radius=k * self.wire_radius,
            wire_length=k * self.wire_length,
            ion_heights=tuple(k * h for h in self.ion_heights),
            ion_separations=seps,
        )


@dataclass(frozen=True)
class ModeSpec:
    """Secular angular frequencies, one per ion (rad/s)."""

    omegas: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "omegas", tuple(float(w) for w in self.omegas))

    @classmethod
    def from_frequencies(cls, nus: Sequence[float]) -> "ModeSpec":
        return cls(tuple(2.0 * math.pi * nu for nu in nus))

    @property
    def frequencies(self) -> tuple[float, ...]:
        return tuple(w / (2.0 * math.pi) for w in self.omegas)


@dataclass(frozen=True)
class Environment:
    """Thermal and resistive environment of the wire.

    ``wire_resistance`` is the room-temperature (300 K) value. ``anomalous_rate``
    is an optional measured heating rate in quanta/s from sources other than
    Johnson noise; it is only reported, never modelled.
    """

    temperature: float = 300.0
    wire_resistance: float = 0.0
    leakage_resistance: float = 1e13
    resistivity_ratio: float = 50.0
    anomalous_rate: float | None = None


@dataclass(frozen=True)
class SystemConfig:
    species: IonSpecies
    geometry: TrapGeometry
    modes: ModeSpec
    environment: Environment = field(default_factory=Environment)

    @property
    def n_ions(self) -> int:
        return self.geometry.n_ions

    @property
    def mass(self) -> float:
        return self.species.mass

    @property
    def charge(self) -> float:
        return self.species.charge

    def scaled(self, k: float) -> "SystemConfig":
        return replace(self, geometry=self.geometry.scaled(k))

    def with_omegas(self, omegas: Sequence[float]) -> "SystemConfig":
        return replace(self, modes=ModeSpec(tuple(omegas)))

    def with_environment(self, **changes) -> "SystemConfig":
        return replace(self, environment=replace(self.environment, **changes))


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    message: str

    def __str__(self):
        return self.message


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[ValidationIssue, ...] = ()
    warnings: tuple[ValidationIssue, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.errors

    def codes(self) -> set[str]:
        return {issue.code for issue in self.errors + self.warnings}


def _finite_positive(value) -> bool:
    return isinstance(value, (int, float)) and math.isfinite(value) and value > 0


def validate_config(cfg: SystemConfig) -> ValidationReport:
    """Check hard invariants (errors) and validity-regime heuristics (warnings).

    Never raises; every problem found is listed in the returned report.
    """
    errors: list[ValidationIssue] = []
    warnings: list[ValidationIssue] = []

    def err(code, msg):
        errors.append(ValidationIssue(code, msg))

    def warn(code, msg):
        warnings.append(ValidationIssue(code, msg))

    g = cfg.geometry
    H, a, L = g.wire_height, g.wire_radius, g.wire_length
    dims_ok = True
    for label, value in (("wire height H", H), ("wire radius a", a), ("wire length L", L)):
        if not _finite_positive(value):
            err("non_positive_dimension", f"{label} must be finite and positive, got {value!r}")
            dims_ok = False

    if g.n_ions < 1:
        err("no_ions", "at least one ion height is required")
    if _finite_positive(H) and _finite_positive(a) and a >= H:
        err("wire_radius_too_large", f"wire radius a={a:g} m must be smaller than wire height H={H:g} m")

    for i, h in enumerate(g.ion_heights):
        if not math.isfinite(h):
            err("non_finite_height", f"ion {i + 1}: height is not finite")
        elif h < 0:
            err("negative_height", f"ion {i + 1}: height h0={h:g} m is below the ground plane")
        elif _finite_positive(H) and h >= H:
            err("ion_at_wire_height", f"ion {i + 1}: ion at wire height (h0={h:g} m >= H={H:g} m)")

    if g.ion_separations is not None:
        expected = g.n_ions * (g.n_ions - 1) // 2
        if len(g.ion_separations) != expected:
            err("separation_count", f"expected {expected} pairwise separations, got {len(g.ion_separations)}")
        else:
            for d in g.ion_separations:
                if not _finite_positive(d):
                    err("non_positive_separation", f"ion separation must be positive, got {d!r}")

    omegas = cfg.modes.omegas
    if len(omegas) != g.n_ions:
        err("mode_count", f"{len(omegas)} secular frequencies given for {g.n_ions} ions")
    for i, w in enumerate(omegas):
        if not _finite_positive(w):
            err("non_positive_frequency", f"ion {i + 1}: secular frequency must be positive, got {w!r}")

    env = cfg.environment
    if not (math.isfinite(env.temperature) and env.temperature >= 0):
        err("bad_temperature", f"temperature must be >= 0 K, got {env.temperature!r}")
    if not (math.isfinite(env.wire_resistance) and env.wire_resistance >= 0):
        err("bad_resistance", f"wire resistance must be >= 0, got {env.wire_resistance!r}")
    if not env.leakage_resistance > 0:
        err("bad_leakage_resistance", f"leakage resistance must be > 0, got {env.leakage_resistance!r}")
    if not (math.isfinite(env.resistivity_ratio) and env.resistivity_ratio >= 1):
        err("bad_resistivity_ratio", f"resistivity ratio must be >= 1, got {env.resistivity_ratio!r}")
    if env.anomalous_rate is not None and not (math.isfinite(env.anomalous_rate) and env.anomalous_rate >= 0):
        err("bad_anomalous_rate", f"anomalous heating rate must be >= 0, got {env.anomalous_rate!r}")

    if dims_ok:
        if L < LONG_WIRE_FACTOR * H:
            warn("long_wire_limit", f"long-wire limit violated: L={L:g} m < {LONG_WIRE_FACTOR:g}*H")
        if a > THIN_WIRE_FRACTION * H:
            warn("thin_wire_limit", f"thin-wire limit violated: a={a:g} m > H/{1 / THIN_WIRE_FRACTION:g}")
        if g.ion_separations is not None and not any(e.code.endswith("separation") or e.code == "separation_count" for e in errors):
            for d in g.ion_separations:
                if d < SEPARATION_FACTOR * H:
                    warn("separation_limit", f"ion separation limit violated: d={d:g} m < {SEPARATION_FACTOR:g}*H")
                if d >= L:
                    warn("separation_exceeds_wire", f"ion separation d={d:g} m is not shorter than the wire (L={L:g} m)")

    return ValidationReport(tuple(errors), tuple(warnings))


def require_valid(cfg: SystemConfig) -> ValidationReport:
    """Return the validation report, raising :class:`ConfigError` if it has errors."""
    report = validate_config(cfg)
    if report.errors:
        raise ConfigError([str(e) for e in report.errors])
    return report


def is_resonant(omegas: Sequence[float], rtol: float = 1e-9) -> bool:
    w0 = omegas[0]
    return all(abs(w - w0) <= rtol * abs(w0) for w in omegas)


def typical_config(**environment) -> SystemConfig:
    """Two 40Ca+ ions in a representative surface-trap geometry: H = 200 um,
    h0 = 150 um, L = 10 mm, a = 12.5 um, omega = 2 pi x 1 MHz, R = 0.6 Ohm."""
    env = {"wire_resistance": 0.6}
    env.update(environment)
    return SystemConfig(
        species=species_constants("Ca40+"),
        geometry=TrapGeometry(200e-6, 12.5e-6, 10e-3, (150e-6, 150e-6)),
        modes=ModeSpec.from_frequencies((1e6, 1e6)),
        environment=Environment(**env),
    )
