"""Electrostatics of a thin wire parallel to a grounded plane with point-like ions below it.

Sign convention: heights and displacements are measured upward, away from the
ground plane. The long-wire limit L, d >> H, a is assumed throughout.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import AccuracyWarning, DomainError
from .physmodel import E_CHARGE, EPSILON_0, IonSpecies, SystemConfig, TrapGeometry, ValidationReport, require_valid


@dataclass(frozen=True)
class WireCharge:
    linear_density: float


@dataclass(frozen=True)
class CouplingResult:
    alpha: float
    beta: tuple[float, ...]
    gamma: float
    validity: ValidationReport


def geometry_alpha(H: float, a: float) -> float:
    """ln((2H - a)/a)."""
    if not (a > 0 and a < 2 * H):
        raise DomainError(f"geometry constant needs 0 < a < 2H (a={a!r}, H={H!r})")
    return math.log((2 * H - a) / a)


def _check_height(H: float, h: float) -> None:
    if not (0 <= h < H):
        raise DomainError(f"ion height must satisfy 0 <= h < H (h={h!r}, H={H!r})")


def height_log(H: float, h: float) -> float:
    """ln((H + h)/(H - h)), evaluated as 2 atanh(h/H) for accuracy near h = 0."""
    _check_height(H, h)
    return 2.0 * math.atanh(h / H)


def _height_log_unchecked(H: float, h: float) -> float:
    # Oracle path: the displaced height may dip below zero by a few steps.
    return math.log((H + h) / (H - h))


def geometry_beta(H: float, h: float, alpha: float) -> float:
    """2H^2 / (alpha (H^2 - h^2))."""
    _check_height(H, h)
    if not alpha > 0:
        raise DomainError(f"geometry constant alpha must be positive, got {alpha!r}")
    return 2 * H**2 / (alpha * (H**2 - h**2))


def wire_and_site_potentials(lam: float | WireCharge, geom: TrapGeometry) -> tuple[float, tuple[float, ...]]:
    """Potential of a wire carrying ``lam`` C/m and the potentials it produces
    at every (uncharged) ion site."""
    if isinstance(lam, WireCharge):
        lam = lam.linear_density
    H = geom.wire_height
    prefactor = lam / (2 * math.pi * EPSILON_0)
    V = prefactor * geometry_alpha(H, geom.wire_radius)
    phis = tuple(prefactor * height_log(H, h) for h in geom.ion_heights)
    return V, phis


def _induced_potential(charge: float, H: float, L: float, heights) -> float:
    return charge / (2 * math.pi * EPSILON_0 * L) * sum(_height_log_unchecked(H, h) for h in heights)


def induced_wire_potential(species: IonSpecies, geom: TrapGeometry) -> float:
    """Potential of the neutral floating wire when every ion carries its charge.

    Obtained from the wire/site potentials by reciprocity; additive over ions.
    """
    for h in geom.ion_heights:
        _check_height(geom.wire_height, h)
    return _induced_potential(species.charge, geom.wire_height, geom.wire_length, geom.ion_heights)


def interaction_energy(v_induced: float, geom: TrapGeometry, i: int, charge: float | None = None) -> float:
    """Energy of ion ``i`` in the potential of the floating wire."""
    q = E_CHARGE if charge is None else charge
    alpha = geometry_alpha(geom.wire_height, geom.wire_radius)
    return q * v_induced / alpha * height_log(geom.wire_height, geom.ion_heights[i])


def pair_gamma(charge: float, H: float, a: float, L: float, h_i: float, h_j: float) -> float:
    """Closed-form wire-mediated coupling constant for one pair of ions (N/m)."""
    _check_height(H, h_i)
    _check_height(H, h_j)
    if not L > 0:
        raise DomainError(f"wire length must be positive, got {L!r}")
    alpha = geometry_alpha(H, a)
    return 2 * charge**2 * H**2 / (math.pi * EPSILON_0 * alpha * L * (H**2 - h_i**2) * (H**2 - h_j**2))


def coupling_constant(cfg: SystemConfig, pair: tuple[int, int] = (0, 1)) -> CouplingResult:
    """Coupling constant gamma for the ion pair ``pair`` (includes the 1/2 that
    avoids counting the mutual energy twice)."""
    report = require_valid(cfg)
    g = cfg.geometry
    if g.n_ions < 2:
        raise DomainError("coupling needs at least two ions")
    i, j = pair
    H = g.wire_height
    alpha = geometry_alpha(H, g.wire_radius)
    betas = tuple(geometry_beta(H, h, alpha) for h in g.ion_heights)
    gamma = pair_gamma(cfg.charge, H, g.wire_radius, g.wire_length, g.ion_heights[i], g.ion_heights[j])
    return CouplingResult(alpha=alpha, beta=betas, gamma=gamma, validity=report)


def total_interaction_energy(cfg: SystemConfig, heights) -> float:
    """U_1 + U_2 + ... for the ions placed at ``heights`` (no domain checks)."""
    g = cfg.geometry
    H = g.wire_height
    alpha = geometry_alpha(H, g.wire_radius)
    v_ind = _induced_potential(cfg.charge, H, g.wire_length, heights)
    return sum(cfg.charge * v_ind / alpha * _height_log_unchecked(H, h) for h in heights)


_FIVE_POINT = ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0))


def coupling_constant_oracle(cfg: SystemConfig, step: float | None = None, pair: tuple[int, int] = (0, 1)) -> float:
    """Brute-force gamma: half the mixed second derivative of the total
    interaction energy, by nested 5-point central differences.

    ``step`` defaults to (H - max h0)/1000.
    """
    require_valid(cfg)
    g = cfg.geometry
    i, j = pair
    H = g.wire_height
    heights0 = list(g.ion_heights)
    clearance = H - max(heights0[i], heights0[j])
    if step is None:
        step = clearance / 1e3
    if not step > 0:
        raise DomainError(f"finite-difference step must be positive, got {step!r}")
    if 2 * step >= clearance:
        raise DomainError(f"finite-difference step {step:g} m reaches the wire")
    if step > clearance / 50:
        warnings.warn(f"step {step:g} m is coarse relative to the ion-wire gap {clearance:g} m", AccuracyWarning, stacklevel=2)

    total = 0.0
    for ki, wi in _FIVE_POINT:
        for kj, wj in _FIVE_POINT:
            heights = list(heights0)
            heights[i] += ki * step
            heights[j] += kj * step
            total += wi * wj * total_interaction_energy(cfg, heights)
    mixed = total / (12 * step) ** 2
    return 0.5 * mixed


def induced_charge(species: IonSpecies, H: float, a: float, h: float) -> float:
    """Charge drawn onto the wire by one ion at height ``h``."""
    return -species.charge / geometry_alpha(H, a) * height_log(H, h)


def induced_charge_slope(species: IonSpecies, H: float, a: float, h: float) -> float:
    """d q_ind / d h = -e beta / H; the induced current is this times the ion velocity."""
    alpha = geometry_alpha(H, a)
    return -species.charge * geometry_beta(H, h, alpha) / H


def field_at_ion(v_wire: float, H: float, h: float, alpha: float) -> float:
    """Vertical field at height ``h`` when the wire sits at potential ``v_wire``."""
    return -geometry_beta(H, h, alpha) / H * v_wire
