"""``ionwire`` command-line front end.

Exit codes: 0 success, 1 input/config error, 2 budget contains a blocking
verdict, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import circuit, decoherence, dynamics
from .configfile import dump_config, load_config, parse_quantity
from .electrostatics import coupling_constant
from .errors import ConfigError, IonWireError, NumericalError
from .physmodel import HBAR, SystemConfig, is_resonant, validate_config

EXIT_OK, EXIT_INPUT, EXIT_BLOCKING, EXIT_NUMERICAL = 0, 1, 2, 3

SWEEP_AXES = {
    "H": "length", "h0": "length", "L": "length", "a": "length", "omega": "frequency",
    "T": "temperature", "R": "resistance", "Rg": "resistance", "scale": "dimensionless",
}

MODES = ("classical", "quantum", "rwa", "circuit")
FORMATS = ("csv", "json", "text")


class UsageError(IonWireError):
    pass


# --- formatting and output ----------------------------------------------------

def format_value(x) -> str:
    """Locale-independent scientific notation with 9 significant digits."""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.8e}"


def _json_value(x):
    if isinstance(x, str) or x is None:
        return x
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(format_value(x))


def render_rows(columns: list[str], rows: list[list], fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
        return buf.getvalue()
    if fmt == "json":
        objs = [{c: _json_value(v) for c, v in zip(columns, row)} for row in rows]
        return json.dumps(objs, indent=1) + "\n"
    cells = [columns] + [[format_value(v) for v in row] for row in rows]
    widths = [max(len(r[k]) for r in cells) for k in range(len(columns))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells) + "\n"


def write_output(text: str, path: str | None) -> None:
    """Write to ``path`` atomically (temp file + rename), or to stdout."""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".ionwire-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --- budget ---------------------------------------------------------------------

def budget_rows(cfg: SystemConfig) -> tuple[list[list], decoherence.NoiseBudget]:
    coupling = coupling_constant(cfg)
    ex = dynamics.exchange_time(cfg)
    circ = circuit.circuit_equivalent(cfg)
    nb = decoherence.noise_budget(cfg)
    rows: list[list] = [
        ["alpha", coupling.alpha, ""],
        *[[f"beta_{i + 1}", b, ""] for i, b in enumerate(coupling.beta)],
        ["gamma", coupling.gamma, "N/m"],
        ["coupling_ratio", coupling.gamma / (cfg.mass * cfg.modes.omegas[0] * cfg.modes.omegas[1]), ""],
        ["t_ex", ex.t_ex, "s"],
        ["exchange_rate_circuit", circuit.exchange_rate_circuit(cfg), "1/s"],
        ["theta_wrapped", ex.theta_wrapped, "rad"],
        ["theta_winding", ex.winding, "turns"],
        ["theta_sensitivity", dynamics.theta_sensitivity(cfg), "rad/(N/m)"],
    ]
    for i, (L, C) in enumerate(zip(circ.inductances, circ.capacitances)):
        rows += [[f"L_{i + 1}", L, "H"], [f"C_{i + 1}", C, "F"]]
    rows += [
        ["C_wire", circ.wire_capacitance, "F"],
        ["R", circ.wire_resistance, "Ohm"],
        ["R_effective", nb.effective_resistance, "Ohm"],
        ["Rg", circ.leakage_resistance, "Ohm"],
        ["Q", circ.quality_factor, ""],
        ["temperature", nb.temperature, "K"],
        ["induced_current", nb.induced_current, "A"],
        ["dissipation_time", nb.dissipation_time, "s"],
        ["johnson_heating_time", nb.johnson_heating_time, "s/quantum"],
        ["cryo_heating_time", nb.cryo_heating_time, "s/quantum"],
        ["leakage_decay", nb.leakage_decay, "s"],
    ]
    if nb.anomalous_heating_time is not None:
        rows.append(["anomalous_heating_time", nb.anomalous_heating_time, "s/quantum"])
    for name, margin in nb.margins.items():
        rows.append([f"margin_{name}", margin, "t_ex"])
    for name, verdict in nb.verdicts.items():
        rows.append([f"verdict_{name}", verdict, ""])
    for warning in validate_config(cfg).warnings:
        rows.append(["warning", warning.message, ""])
    return rows, nb


def _budget_text(cfg: SystemConfig, rows: list[list]) -> str:
    out = [f"ionwire budget: {cfg.n_ions} x {cfg.species.name}"]
    width = max(len(r[0]) for r in rows)
    for name, value, unit in rows:
        out.append(f"  {name.ljust(width)}  {format_value(value)} {unit}".rstrip())
    return "\n".join(out) + "\n"


def cmd_budget(args) -> int:
    cfg = load_config(args.config)
    if args.dump_config:
        write_output(dump_config(cfg), args.output)
        return EXIT_OK
    rows, nb = budget_rows(cfg)
    fmt = args.format or "text"
    text = _budget_text(cfg, rows) if fmt == "text" else render_rows(["quantity", "value", "unit"], rows, fmt)
    write_output(text, args.output)
    return EXIT_BLOCKING if nb.blocking else EXIT_OK


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    report = validate_config(cfg)
    rows = [["error", e.code, e.message] for e in report.errors]
    rows += [["warning", w.code, w.message] for w in report.warnings]
    fmt = args.format or "text"
    if fmt == "text":
        lines = [f"{kind}: {msg}" for kind, _, msg in rows] or ["configuration OK"]
        text = "\n".join(lines) + "\n"
    else:
        text = render_rows(["severity", "code", "message"], rows, fmt)
    write_output(text, args.output)
    return EXIT_INPUT if report.errors else EXIT_OK


# --- simulate -------------------------------------------------------------------

@dataclass(frozen=True)
class InitialSpec:
    kind: str  # fock | coherent | displaced | superposition
    value: complex


def parse_initial(spec: str) -> InitialSpec:
    parts = spec.replace(":", " ").replace("=", " ").split(None, 1)
    if len(parts) != 2:
        raise UsageError(f"initial state {spec!r}: expected 'fock N', 'coherent MU', 'displaced Y0' or 'superposition N'")
    kind, value = parts[0].lower(), parts[1].strip()
    try:
        if kind in ("fock", "superposition"):
            n = int(value)
            if n < 0:
                raise ValueError
            return InitialSpec(kind, n)
        if kind == "coherent":
            return InitialSpec(kind, complex(value.replace(" ", "")))
        if kind == "displaced":
            try:
                y0 = parse_quantity(value, "length")
            except ValueError:
                y0 = float(value)
            return InitialSpec(kind, y0)
    except ValueError:
        raise UsageError(f"initial state {spec!r}: cannot read value {value!r}") from None
    raise UsageError(f"initial state {spec!r}: unknown kind {kind!r}")


def _classical_initial(osc: dynamics.CoupledOscillators, init: InitialSpec) -> dynamics.ClassicalState:
    m, w = osc.mass, osc.omegas[0]
    x0 = math.sqrt(HBAR / (2 * m * w))
    if init.kind == "fock":
        y, p = math.sqrt(2 * init.value.real * HBAR / (m * w)), 0.0
    elif init.kind == "coherent":
        y, p = 2 * x0 * init.value.real, math.sqrt(2 * HBAR * m * w) * init.value.imag
    elif init.kind == "displaced":
        y, p = init.value.real, 0.0
    else:
        raise UsageError(f"initial state {init.kind!r} has no classical counterpart")
    return dynamics.ClassicalState((y, 0.0), (p, 0.0))


def _quantum_initial(osc: dynamics.CoupledOscillators, init: InitialSpec, n_max: int | None) -> dynamics.QuantumState:
    if init.kind == "displaced":
        x0 = math.sqrt(HBAR / (2 * osc.mass * osc.omegas[0]))
        init = InitialSpec("coherent", complex(init.value.real / (2 * x0)))
    if init.kind == "coherent":
        n_max = n_max or dynamics.default_n_max(mu=init.value)
        ket = dynamics.coherent_ket(init.value, n_max)
    else:
        level = int(init.value.real)
        n_max = n_max or dynamics.default_n_max(fock_level=level)
        if init.kind == "fock":
            ket = dynamics.fock_ket(level, n_max)
        else:
            ket = dynamics.superposition_ket([0, level], n_max)
    return dynamics.QuantumState.product(ket, dynamics.fock_ket(0, n_max))


def _default_tmax(osc: dynamics.CoupledOscillators) -> float:
    w = math.sqrt(osc.omegas[0] * osc.omegas[1])
    return 2 * math.pi * osc.mass * w / osc.gamma


def simulate_table(cfg: SystemConfig, mode: str, init: InitialSpec, tmax: float | None,
                   samples: int, n_max: int | None = None) -> tuple[list[str], list[list]]:
    if mode not in MODES:
        raise UsageError(f"unknown mode {mode!r}; choose from {', '.join(MODES)}")
    if cfg.n_ions != 2:
        raise UsageError("simulate handles two ions")
    osc = dynamics.as_oscillators(cfg)
    tmax = _default_tmax(osc) if tmax is None else tmax
    if tmax < 0 or samples < 1:
        raise UsageError("tmax must be >= 0 and samples >= 1")
    times = np.array([0.0]) if tmax == 0 else np.linspace(0.0, tmax, max(samples, 2))

    if mode == "classical":
        traj = dynamics.classical_trajectory(osc, _classical_initial(osc, init), times)
        e = dynamics.ion_energies(osc, traj.positions, traj.momenta)
        v = traj.velocities(osc.mass)
        cols = ["t [s]", "y1 [m]", "y2 [m]", "v1 [m/s]", "v2 [m/s]", "E1 [J]", "E2 [J]"]
        data = np.column_stack([times, traj.positions, v, e])
    elif mode in ("quantum", "rwa"):
        psi = _quantum_initial(osc, init, n_max)
        prop = dynamics.quantum_trajectory if mode == "quantum" else dynamics.rwa_trajectory
        traj = prop(osc, psi, times)
        cols = ["t [s]", "n1 [quanta]", "n2 [quanta]", "<y1> [m]", "<y2> [m]", "norm [1]"]
        data = np.column_stack([times, traj.mean_occupations(), dynamics.mean_positions(osc, traj), traj.norms()])
    else:
        circ = circuit.circuit_equivalent(cfg)
        cls = _classical_initial(osc, init)
        start = circuit.circuit_state_from_ions(circ, cls.positions, np.asarray(cls.momenta) / osc.mass)
        trace = circuit.simulate_circuit(circ, start, times)
        cols = ["t [s]", "I1 [A]", "I2 [A]", "q1 [C]", "q2 [C]", "V_A [V]", "E1 [J]", "E2 [J]",
                "v1_equiv [m/s]", "v2_equiv [m/s]"]
        data = np.column_stack([times, trace.currents, trace.charges, trace.node_voltage,
                                trace.branch_energies, trace.velocities(circ)])
    return cols, data.tolist()


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    init = parse_initial(args.initial)
    cols, rows = simulate_table(cfg, args.mode, init, args.tmax, args.samples, args.nmax)
    write_output(render_rows(cols, rows, args.format or "csv"), args.output)
    return EXIT_OK


# --- sweep ------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepAxis:
    name: str
    values: tuple[float, ...]


def _axis_value(text: str, dimension: str) -> float:
    try:
        return parse_quantity(text, dimension)
    except ValueError:
        return float(text)  # bare number: SI (rad/s for omega)


def parse_sweep(spec: str, random_points: int = 0, seed: int = 0) -> list[SweepAxis]:
    """Parse ``AXIS=START:STOP:STEPS[,...]``. With ``random_points`` > 0 each axis
    instead holds that many seeded uniform draws from [START, STOP], sorted."""
    rng = np.random.default_rng(seed)
    axes = []
    for part in spec.split(","):
        if not part.strip():
            continue
        name, sep, bounds = part.partition("=")
        name = name.strip()
        if not sep or name not in SWEEP_AXES:
            raise UsageError(f"unknown sweep axis {name!r}; valid axes: {', '.join(SWEEP_AXES)}")
        bits = bounds.split(":")
        if len(bits) != 3:
            raise UsageError(f"sweep {part!r}: expected AXIS=START:STOP:STEPS")
        try:
            start = _axis_value(bits[0].strip(), SWEEP_AXES[name])
            stop = _axis_value(bits[1].strip(), SWEEP_AXES[name])
            steps = int(bits[2])
        except ValueError as exc:
            raise UsageError(f"sweep {part!r}: {exc}") from None
        if steps < 2:
            raise UsageError(f"sweep {part!r}: steps must be >= 2")
        if random_points:
            values = np.sort(rng.uniform(min(start, stop), max(start, stop), random_points))
        else:
            values = np.linspace(start, stop, steps)
        axes.append(SweepAxis(name, tuple(values.tolist())))
    if not 1 <= len(axes) <= 2:
        raise UsageError("give one or two sweep axes")
    if len({a.name for a in axes}) != len(axes):
        raise UsageError("sweep axes must be distinct")
    return axes


def apply_parameter(cfg: SystemConfig, name: str, value: float) -> SystemConfig:
    g = cfg.geometry
    if name == "H":
        return replace(cfg, geometry=replace(g, wire_height=value))
    if name == "a":
        return replace(cfg, geometry=replace(g, wire_radius=value))
    if name == "L":
        return replace(cfg, geometry=replace(g, wire_length=value))
    if name == "h0":
        return replace(cfg, geometry=replace(g, ion_heights=(value,) * g.n_ions))
    if name == "omega":
        return cfg.with_omegas([value] * cfg.n_ions)
    if name == "T":
        return cfg.with_environment(temperature=value)
    if name == "R":
        return cfg.with_environment(wire_resistance=value)
    if name == "Rg":
        return cfg.with_environment(leakage_resistance=value)
    if name == "scale":
        return cfg.scaled(value)
    raise UsageError(f"unknown sweep axis {name!r}")


SWEEP_RESULTS = ["gamma [N/m]", "t_ex [s]", "Q [1]", "tau_johnson [s/quantum]", "tau_dissipation [s]",
                 "leakage_decay [s]", "verdict_dissipation", "verdict_johnson", "verdict_leakage"]


def sweep_point(cfg: SystemConfig) -> list:
    gamma = coupling_constant(cfg).gamma
    nb = decoherence.noise_budget(cfg)
    q = circuit.circuit_equivalent(cfg).quality_factor
    return [gamma, nb.exchange_time, q, nb.johnson_heating_time, nb.dissipation_time, nb.leakage_decay,
            nb.verdicts["dissipation"], nb.verdicts["johnson"], nb.verdicts["leakage"]]


def sweep_table(cfg: SystemConfig, axes: list[SweepAxis], jobs: int = 1) -> tuple[list[str], list[list]]:
    grid = list(itertools.product(*(a.values for a in axes)))
    configs = []
    errors = []
    for point in grid:
        c = cfg
        for axis, value in zip(axes, point):
            c = apply_parameter(c, axis.name, value)
        report = validate_config(c)
        if report.errors:
            where = ", ".join(f"{a.name}={format_value(v)}" for a, v in zip(axes, point))
            errors += [f"{where}: {e}" for e in report.errors]
        elif not is_resonant(c.modes.omegas):
            errors.append("sweep needs resonant ions")
        configs.append(c)
    if errors:
        raise ConfigError(errors)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(sweep_point, configs))
    else:
        results = [sweep_point(c) for c in configs]
    cols = [f"{a.name}" for a in axes] + SWEEP_RESULTS
    rows = [list(point) + res for point, res in zip(grid, results)]
    return cols, rows


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if not args.sweep:
        raise UsageError("sweep needs --sweep AXIS=START:STOP:STEPS[,...]")
    cols, rows = sweep_table(cfg, parse_sweep(args.sweep, args.random, args.seed), args.jobs)
    write_output(render_rows(cols, rows, args.format or "csv"), args.output)
    return EXIT_OK


# --- entry point ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ionwire", description="Wire-coupled trapped-ion design budgets and simulations.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="configuration file (key = value unit)")
        p.add_argument("--output", help="output file (default: stdout)")
        p.add_argument("--format", choices=FORMATS, help="output format")
        p.add_argument("--seed", type=int, default=0, help="seed for randomised sweeps")

    p = sub.add_parser("budget", help="coupling, circuit and decoherence budget")
    common(p)
    p.add_argument("--dump-config", action="store_true", help="echo the parsed configuration in SI units")
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("validate", help="check a configuration")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="time trace of the coupled motion")
    common(p)
    p.add_argument("--mode", choices=MODES, default="classical")
    p.add_argument("--initial", default="fock 1", help="'fock N', 'coherent MU', 'displaced Y0' or 'superposition N'")
    p.add_argument("--tmax", type=float, help="end time in s (default: two exchange times)")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--nmax", type=int, help="Fock truncation for quantum/rwa modes")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="tabulate the budget over a parameter grid")
    common(p)
    p.add_argument("--sweep", help="AXIS=START:STOP:STEPS[,AXIS=...]; axes: " + ", ".join(SWEEP_AXES))
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--random", type=int, default=0, metavar="N",
                   help="draw N seeded random values per axis instead of a regular grid")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        for msg in exc.errors:
            print(f"ionwire: error: {msg}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"ionwire: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (IonWireError, OSError) as exc:
        print(f"ionwire: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
