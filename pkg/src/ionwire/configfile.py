"""Line-oriented ``key = value unit`` configuration files.

Four sections are recognised::

    [geometry]
    H  = 200 um
    a  = 12.5 um
    L  = 10 mm
    h0 = 150, 150 um        # one height per ion
    d  = 1 mm               # optional pairwise separations d01, d02, ..., d12, ...

    [species]
    name = Ca40+

    [modes]
    omega = 1 MHz           # Hz-type units give w = 2 pi nu; rad/s is taken as w

    [environment]
    T = 300 K
    R = 0.6 Ohm             # room-temperature wire resistance
    Rg = 1e13 Ohm
    ratio = 50
    anomalous_rate = 10 1/s # optional

Values are converted to SI at parse time.
"""
from __future__ import annotations

import math
import re
from decimal import Decimal
from dataclasses import dataclass

from .errors import ConfigError, UnknownSpeciesError
from .physmodel import Environment, ModeSpec, SystemConfig, TrapGeometry, species_constants

TWO_PI = 2 * math.pi

# Decimal factors are given as strings and applied exactly (one rounding).
UNITS = {
    "length": {"m": "1", "cm": "1e-2", "mm": "1e-3", "um": "1e-6", "µm": "1e-6", "μm": "1e-6", "nm": "1e-9"},
    "frequency": {"Hz": TWO_PI, "kHz": TWO_PI * 1e3, "MHz": TWO_PI * 1e6, "GHz": TWO_PI * 1e9,
                  "rad/s": "1", "krad/s": "1e3", "Mrad/s": "1e6"},
    "temperature": {"K": "1", "mK": "1e-3", "uK": "1e-6", "µK": "1e-6"},
    "resistance": {"Ohm": "1", "ohm": "1", "Ω": "1", "mOhm": "1e-3", "kOhm": "1e3", "MOhm": "1e6",
                   "GOhm": "1e9", "TOhm": "1e12"},
    "rate": {"1/s": "1", "/s": "1", "quanta/s": "1", "Hz": "1"},
    "dimensionless": {"": "1", "1": "1"},
}

# Units written by dump_config; all have factor 1 so values round-trip exactly.
SI_UNIT = {"length": "m", "frequency": "rad/s", "temperature": "K", "resistance": "Ohm",
           "rate": "1/s", "dimensionless": ""}


@dataclass(frozen=True)
class KeySpec:
    section: str
    key: str
    dimension: str  # one of UNITS or "text"
    is_list: bool = False
    required: bool = False


KEYS = [
    KeySpec("geometry", "H", "length", required=True),
    KeySpec("geometry", "a", "length", required=True),
    KeySpec("geometry", "L", "length", required=True),
    KeySpec("geometry", "h0", "length", is_list=True, required=True),
    KeySpec("geometry", "d", "length", is_list=True),
    KeySpec("species", "name", "text"),
    KeySpec("modes", "omega", "frequency", is_list=True, required=True),
    KeySpec("environment", "T", "temperature"),
    KeySpec("environment", "R", "resistance"),
    KeySpec("environment", "Rg", "resistance"),
    KeySpec("environment", "ratio", "dimensionless"),
    KeySpec("environment", "anomalous_rate", "rate"),
]
_KEY_INDEX = {(k.section, k.key): k for k in KEYS}
SECTIONS = ("geometry", "species", "modes", "environment")

DEFAULT_SPECIES = "Ca40+"

_NUMBER = re.compile(r"^\s*([-+]?(?:(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?|inf))\s*(.*?)\s*$")


def parse_quantity(text: str, dimension: str) -> float:
    """Convert ``"200 um"`` to 2e-4 for ``dimension="length"``. Raises ValueError."""
    match = _NUMBER.match(text)
    if not match:
        raise ValueError(f"cannot read a number from {text.strip()!r}")
    number, unit = match.groups()
    units = UNITS[dimension]
    if unit not in units:
        accepted = ", ".join(u for u in units if u) or "none"
        if not unit:
            raise ValueError(f"missing unit for {dimension} value {number!r}; accepted units: {accepted}")
        raise ValueError(f"unknown {dimension} unit {unit!r}; accepted units: {accepted}")
    factor = units[unit]
    if isinstance(factor, str):
        if number.lstrip("+-") == "inf":
            return float(number)
        return float(Decimal(number) * Decimal(factor))
    return float(number) * factor


def _parse_list(text: str, dimension: str) -> tuple[float, ...]:
    items = [s.strip() for s in text.split(",")]
    if any(not s for s in items):
        raise ValueError("empty entry in comma-separated list")
    last = _NUMBER.match(items[-1])
    shared_unit = last.group(2) if last else ""
    values = []
    for item in items:
        m = _NUMBER.match(item)
        if m and not m.group(2) and shared_unit:
            item = f"{m.group(1)} {shared_unit}"
        values.append(parse_quantity(item, dimension))
    return tuple(values)


def _strip_comment(line: str) -> str:
    for marker in ("#", ";"):
        pos = line.find(marker)
        if pos >= 0:
            line = line[:pos]
    return line.strip()


def parse_config(text: str) -> SystemConfig:
    """Parse configuration text into an SI :class:`SystemConfig`.

    All problems are collected and raised together as one :class:`ConfigError`,
    with line numbers where a line is at fault.
    """
    errors: list[str] = []
    values: dict[tuple[str, str], object] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                errors.append(f"line {lineno}: malformed section header {line!r}")
                continue
            name = line[1:-1].strip()
            if name not in SECTIONS:
                errors.append(f"line {lineno}: unknown section [{name}]; valid sections: "
                              + ", ".join(f"[{s}]" for s in SECTIONS))
                section = None
                continue
            section = name
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value unit', got {line!r}")
            continue
        key, _, value = (part.strip() for part in line.partition("="))
        if section is None:
            errors.append(f"line {lineno}: key {key!r} outside of a known section")
            continue
        spec = _KEY_INDEX.get((section, key))
        if spec is None:
            valid = ", ".join(k.key for k in KEYS if k.section == section)
            errors.append(f"line {lineno}: unknown key {key!r} in [{section}]; valid keys: {valid}")
            continue
        if (section, key) in values:
            errors.append(f"line {lineno}: duplicate key {key!r} in [{section}]")
            continue
        if not value:
            errors.append(f"line {lineno}: no value given for {key!r}")
            continue
        try:
            if spec.dimension == "text":
                values[(section, key)] = value
            elif spec.is_list:
                values[(section, key)] = _parse_list(value, spec.dimension)
            else:
                values[(section, key)] = parse_quantity(value, spec.dimension)
        except ValueError as exc:
            errors.append(f"line {lineno}: {key}: {exc}")

    for spec in KEYS:
        if spec.required and (spec.section, spec.key) not in values:
            if not any(e.split(": ", 1)[-1].startswith(f"{spec.key}:") for e in errors):
                errors.append(f"missing required key {spec.key!r} in [{spec.section}]")

    species = None
    name = values.get(("species", "name"), DEFAULT_SPECIES)
    try:
        species = species_constants(name)
    except UnknownSpeciesError as exc:
        errors.append(str(exc))

    if errors:
        raise ConfigError(errors)

    heights = values[("geometry", "h0")]
    omegas = values[("modes", "omega")]
    if len(omegas) == 1 and len(heights) > 1:
        omegas = omegas * len(heights)
    env_defaults = Environment()
    env = Environment(
        temperature=values.get(("environment", "T"), env_defaults.temperature),
        wire_resistance=values.get(("environment", "R"), env_defaults.wire_resistance),
        leakage_resistance=values.get(("environment", "Rg"), env_defaults.leakage_resistance),
        resistivity_ratio=values.get(("environment", "ratio"), env_defaults.resistivity_ratio),
        anomalous_rate=values.get(("environment", "anomalous_rate")),
    )
    return SystemConfig(
        species=species,
        geometry=TrapGeometry(
            wire_height=values[("geometry", "H")],
            wire_radius=values[("geometry", "a")],
            wire_length=values[("geometry", "L")],
            ion_heights=heights,
            ion_separations=values.get(("geometry", "d")),
        ),
        modes=ModeSpec(omegas),
        environment=env,
    )


def load_config(path) -> SystemConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _fmt(values, dimension):
    unit = SI_UNIT[dimension]
    if isinstance(values, tuple):
        body = ", ".join(repr(float(v)) for v in values)
    else:
        body = repr(float(values))
    return f"{body} {unit}".rstrip()


def dump_config(cfg: SystemConfig) -> str:
    """Serialise ``cfg`` in SI units; parse_config(dump_config(cfg)) == cfg."""
    g, env = cfg.geometry, cfg.environment
    lines = [
        "[geometry]",
        f"H = {_fmt(g.wire_height, 'length')}",
        f"a = {_fmt(g.wire_radius, 'length')}",
        f"L = {_fmt(g.wire_length, 'length')}",
        f"h0 = {_fmt(g.ion_heights, 'length')}",
    ]
    if g.ion_separations is not None:
        lines.append(f"d = {_fmt(g.ion_separations, 'length')}")
    lines += [
        "",
        "[species]",
        f"name = {cfg.species.name}",
        "",
        "[modes]",
        f"omega = {_fmt(cfg.modes.omegas, 'frequency')}",
        "",
        "[environment]",
        f"T = {_fmt(env.temperature, 'temperature')}",
        f"R = {_fmt(env.wire_resistance, 'resistance')}",
        f"Rg = {_fmt(env.leakage_resistance, 'resistance')}",
        f"ratio = {_fmt(env.resistivity_ratio, 'dimensionless')}",
    ]
    if env.anomalous_rate is not None:
        lines.append(f"anomalous_rate = {_fmt(env.anomalous_rate, 'rate')}")
    return "\n".join(lines) + "\n"
