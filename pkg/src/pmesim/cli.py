"""Scenario runner: `pme <command> --config <path> [--out] [--format] [--seed] [--threads]`.

Commands
--------
protocol-sim    herald table for one protocol configuration
geometry-sweep  grating exposure fraction along one swept geometry axis
tradeoff-curve  normalized trap strength + exposure along the fixed-height curve
grating-design  chirped tooth table with fabrication flags
rate-table      analytic vs simulated herald probabilities for all kinds

Configs are JSON.  Quantities may be bare numbers (SI base units) or strings
with a unit suffix ("62 um", "493 nm", "10 GHz"), normalized at parse time.
Unknown keys are rejected.  Exit codes: 0 ok, 2 schema violation, 3 numerical
failure, 4 I/O failure.  Each output is accompanied by a
`<output>.manifest.json` recording the config hash, seed, and tool version.

Schema (fields marked * are required)
-------------------------------------
protocol-sim:
    kind* (number|time-bin|polarization|frequency), enhanced_analyzer (bool),
    wavelength (length), frequency_splitting (frequency), mode_overlap (float),
    analyzer_transmissivity (float), crosstalk_db (float <= 0),
    bin_separation (time), lifetime (time), thermal_fidelity_factor (float),
    nodes* (list of exactly 2):
        excitation_probability* (float), branching_ratio (float),
        solid_angle_fraction (float), transmission (float),
        detector_efficiency (float), path_offset (length),
        qubit_frequency_offset (frequency)
geometry-sweep:
    rf_gap* (length), rf_width* (length), grating_length (length),
    sweep* {axis*: grating_length|rf_gap|rf_width, start*, stop* (length),
            num* (int >= 2)}
tradeoff-curve:
    ion_height* (length), grating_length* (length), voltage (voltage),
    drive_frequency (frequency), charge_to_mass (float),
    sweep* {axis*: rf_gap, start*, stop* (length), num* (int >= 2)}
grating-design:
    wavelength* (length), effective_index* (float), ion_x (length),
    ion_distance* (length), span* [length, length], min_pitch (length)
rate-table:
    excitation_probability (float), branching_ratio (float), epsilon (float),
    two_photon_excitation (float)
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .grating import GratingSpec, tooth_positions
from .protocols import (
    KINDS,
    NodeParams,
    ProtocolConfig,
    analytic_herald_prob,
    rate_ratio_number_vs_two_photon,
    run_protocol,
)
from .trap import (
    ApertureSpec,
    TrapGeometry,
    ion_height,
    radial_frequency,
    rf_width_for_gap,
    solid_angle_fraction,
)

COMMANDS = ("protocol-sim", "geometry-sweep", "grating-design", "rate-table",
            "tradeoff-curve")

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


class SchemaError(ValueError):
    """Raised when a scenario config violates the published schema."""


# ---------------------------------------------------------------------------
# unit-aware value parsing

_UNIT_TABLES = {
    "length": {"m": 1.0, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "nm": 1e-9,
               "pm": 1e-12, "cm": 1e-2},
    "frequency": {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9, "thz": 1e12},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9,
             "ps": 1e-12},
    "voltage": {"v": 1.0, "kv": 1e3, "mv": 1e-3},
}


def _parse_quantity(value, family: str, path: str) -> float:
    """Bare numbers are SI base units; strings carry a unit suffix."""
    if isinstance(value, bool):
        raise SchemaError(f"{path}: expected a quantity, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        parts = value.split()
        if len(parts) != 2:
            raise SchemaError(f"{path}: quantity string must be '<number> <unit>', "
                              f"got {value!r}")
        try:
            magnitude = float(parts[0])
        except ValueError:
            raise SchemaError(f"{path}: {parts[0]!r} is not a number") from None
        table = _UNIT_TABLES[family]
        unit = parts[1].lower() if parts[1].lower() in table else parts[1]
        if unit not in table:
            raise SchemaError(f"{path}: unknown {family} unit {parts[1]!r} "
                              f"(known: {sorted(table)})")
        return magnitude * table[unit]
    raise SchemaError(f"{path}: expected a number or '<number> <unit>' string")


def _expect(config: dict, path: str, known: dict, diagnostics: list[str]):
    """Check key set and collect parsed values; `known` maps key -> parser."""
    if not isinstance(config, dict):
        diagnostics.append(f"{path or '<root>'}: expected an object")
        return {}
    for key in config:
        if key not in known:
            diagnostics.append(f"{path}{key}: unknown key")
    values = {}
    for key, parser in known.items():
        if key in config:
            try:
                values[key] = parser(config[key], f"{path}{key}")
            except SchemaError as err:
                diagnostics.append(str(err))
    return values


def _float_field(value, path, lo=None, hi=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{path}: expected a number")
    value = float(value)
    if lo is not None and value < lo:
        raise SchemaError(f"{path}: must be >= {lo}")
    if hi is not None and value > hi:
        raise SchemaError(f"{path}: must be <= {hi}")
    return value


def _int_field(value, path, lo=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{path}: expected an integer")
    if lo is not None and value < lo:
        raise SchemaError(f"{path}: must be >= {lo}")
    return value


def _bool_field(value, path):
    if not isinstance(value, bool):
        raise SchemaError(f"{path}: expected true/false")
    return value


def _str_choice(choices):
    def parse(value, path):
        if value not in choices:
            raise SchemaError(f"{path}: must be one of {sorted(choices)}")
        return value
    return parse


def _quantity(family, lo=None):
    def parse(value, path):
        parsed = _parse_quantity(value, family, path)
        if lo is not None and parsed < lo:
            raise SchemaError(f"{path}: must be >= {lo}")
        return parsed
    return parse


def _sweep_field(axes):
    def parse(value, path, axes=axes):
        diagnostics: list[str] = []
        fields = _expect(value, f"{path}.", {
            "axis": _str_choice(axes),
            "start": _quantity("length"),
            "stop": _quantity("length"),
            "num": lambda v, p: _int_field(v, p, lo=2),
        }, diagnostics)
        for key in ("axis", "start", "stop", "num"):
            if key not in fields and not any(key in d for d in diagnostics):
                diagnostics.append(f"{path}.{key}: required key missing")
        if diagnostics:
            raise SchemaError("; ".join(diagnostics))
        return fields
    return parse


def _node_field(value, path):
    diagnostics: list[str] = []
    fields = _expect(value, f"{path}.", {
        "excitation_probability": lambda v, p: _float_field(v, p, 0.0, 1.0),
        "branching_ratio": lambda v, p: _float_field(v, p, 0.0, 1.0),
        "solid_angle_fraction": lambda v, p: _float_field(v, p, 0.0, 0.5),
        "transmission": lambda v, p: _float_field(v, p, 0.0, 1.0),
        "detector_efficiency": lambda v, p: _float_field(v, p, 0.0, 1.0),
        "path_offset": _quantity("length"),
        "qubit_frequency_offset": _quantity("frequency"),
    }, diagnostics)
    if "excitation_probability" not in fields \
            and not any("excitation_probability" in d for d in diagnostics):
        diagnostics.append(f"{path}.excitation_probability: required key missing")
    if diagnostics:
        raise SchemaError("; ".join(diagnostics))
    return fields


def _nodes_field(value, path):
    if not isinstance(value, list) or len(value) != 2:
        raise SchemaError(f"{path}: expected a list of exactly 2 node objects")
    return [_node_field(node, f"{path}[{i}]") for i, node in enumerate(value)]


def _span_field(value, path):
    if not isinstance(value, list) or len(value) != 2:
        raise SchemaError(f"{path}: expected [x_min, x_max]")
    lo = _parse_quantity(value[0], "length", f"{path}[0]")
    hi = _parse_quantity(value[1], "length", f"{path}[1]")
    if not lo < hi:
        raise SchemaError(f"{path}: span must satisfy x_min < x_max")
    return (lo, hi)


_SCHEMAS = {
    "protocol-sim": {
        "fields": {
            "kind": _str_choice(KINDS),
            "enhanced_analyzer": _bool_field,
            "wavelength": _quantity("length", lo=0.0),
            "frequency_splitting": _quantity("frequency"),
            "mode_overlap": lambda v, p: _float_field(v, p, 0.0, 1.0),
            "analyzer_transmissivity": lambda v, p: _float_field(v, p, 0.0, 1.0),
            "crosstalk_db": lambda v, p: _float_field(v, p, hi=0.0),
            "bin_separation": _quantity("time", lo=0.0),
            "lifetime": _quantity("time", lo=0.0),
            "thermal_fidelity_factor": lambda v, p: _float_field(v, p, 0.0, 1.0),
            "nodes": _nodes_field,
        },
        "required": ("kind", "nodes"),
    },
    "geometry-sweep": {
        "fields": {
            "rf_gap": _quantity("length", lo=0.0),
            "rf_width": _quantity("length", lo=0.0),
            "grating_length": _quantity("length", lo=0.0),
            "sweep": _sweep_field(("grating_length", "rf_gap", "rf_width")),
        },
        "required": ("rf_gap", "rf_width", "sweep"),
    },
    "tradeoff-curve": {
        "fields": {
            "ion_height": _quantity("length", lo=0.0),
            "grating_length": _quantity("length", lo=0.0),
            "voltage": _quantity("voltage", lo=0.0),
            "drive_frequency": _quantity("frequency", lo=0.0),
            "charge_to_mass": lambda v, p: _float_field(v, p, lo=0.0),
            "sweep": _sweep_field(("rf_gap",)),
        },
        "required": ("ion_height", "grating_length", "sweep"),
    },
    "grating-design": {
        "fields": {
            "wavelength": _quantity("length", lo=0.0),
            "effective_index": lambda v, p: _float_field(v, p, lo=1.0),
            "ion_x": _quantity("length"),
            "ion_distance": _quantity("length", lo=0.0),
            "span": _span_field,
            "min_pitch": _quantity("length", lo=0.0),
        },
        "required": ("wavelength", "effective_index", "ion_distance", "span"),
    },
    "rate-table": {
        "fields": {
            "excitation_probability": lambda v, p: _float_field(v, p, 0.0, 1.0),
            "branching_ratio": lambda v, p: _float_field(v, p, 0.0, 1.0),
            "epsilon": lambda v, p: _float_field(v, p, 0.0, 1.0),
            "two_photon_excitation": lambda v, p: _float_field(v, p, 0.0, 1.0),
        },
        "required": (),
    },
}


def validate(command: str, config: dict) -> list[str]:
    """Pure schema validation; empty list means `run` would accept the config."""
    if command not in _SCHEMAS:
        return [f"unknown command {command!r}"]
    schema = _SCHEMAS[command]
    diagnostics: list[str] = []
    values = _expect(config, "", schema["fields"], diagnostics)
    for key in schema["required"]:
        if key not in config:
            diagnostics.append(f"{key}: required key missing")
    if diagnostics:
        return diagnostics

    # cross-field physics checks
    if command == "protocol-sim":
        try:
            _protocol_config(values)
        except ValueError as err:
            diagnostics.append(str(err))
    elif command == "geometry-sweep":
        axis = values["sweep"]["axis"]
        if axis != "grating_length" and "grating_length" not in values:
            diagnostics.append("grating_length: required unless it is the sweep axis")
    return diagnostics


# ---------------------------------------------------------------------------
# command execution


def _protocol_config(values: dict) -> ProtocolConfig:
    nodes = []
    for fields in values["nodes"]:
        nodes.append(NodeParams(
            excitation_probability=fields["excitation_probability"],
            branching_ratio=fields.get("branching_ratio", 1.0),
            solid_angle_fraction=fields.get("solid_angle_fraction", 0.061),
            transmission=fields.get("transmission", 1.0),
            detector_efficiency=fields.get("detector_efficiency", 1.0),
            path_offset=fields.get("path_offset", 0.0),
            qubit_frequency_offset=fields.get("qubit_frequency_offset", 0.0),
        ))
    chi_db = values.get("crosstalk_db")
    crosstalk = 0.0 if chi_db is None else 10.0 ** (chi_db / 20.0)
    return ProtocolConfig(
        kind=values["kind"],
        node0=nodes[0],
        node1=nodes[1],
        wavelength=values.get("wavelength", 493e-9),
        frequency_splitting=values.get("frequency_splitting", 9.9e9),
        mode_overlap=values.get("mode_overlap", 1.0),
        analyzer_transmissivity=values.get("analyzer_transmissivity", 0.5),
        crosstalk=crosstalk,
        enhanced_analyzer=values.get("enhanced_analyzer", False),
        bin_separation=values.get("bin_separation", 100e-9),
        lifetime=values.get("lifetime", 8e-9),
        thermal_fidelity_factor=values.get("thermal_fidelity_factor", 1.0),
    )


def _sweep_grid(sweep: dict) -> np.ndarray:
    return np.linspace(sweep["start"], sweep["stop"], sweep["num"])


def _map_ordered(func, items, threads: int):
    """Evaluate func over items, possibly concurrently, preserving order."""
    if threads <= 1:
        return [func(item) for item in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


def _run_protocol_sim(values, seed, threads):
    config = _protocol_config(values)
    table = run_protocol(config)
    rows = [("pattern", "probability", "valid", "target", "correction", "fidelity")]
    for entry in table.entries:
        rows.append(("+".join(entry.pattern) or "none",
                     entry.probability, int(entry.valid),
                     entry.target or "", entry.correction or "",
                     entry.fidelity if entry.fidelity is not None else ""))
    payload = {
        "kind": table.kind,
        "total_success": table.total_success,
        "analytic_herald_prob": analytic_herald_prob(config),
        "entries": [
            {
                "pattern": list(entry.pattern),
                "probability": entry.probability,
                "valid": entry.valid,
                "target": entry.target,
                "correction": entry.correction,
                "fidelity": entry.fidelity,
                "ion_state_re": np.real(entry.ion_state).tolist(),
                "ion_state_im": np.imag(entry.ion_state).tolist(),
            }
            for entry in table.entries
        ],
    }
    return rows, payload


def _run_geometry_sweep(values, seed, threads):
    axis = values["sweep"]["axis"]
    grid = _sweep_grid(values["sweep"])
    base = {
        "rf_gap": values["rf_gap"],
        "rf_width": values["rf_width"],
        "grating_length": values.get("grating_length", 100e-6),
    }

    def point(value):
        params = dict(base)
        params[axis] = value
        gap_um = params["rf_gap"] * 1e6
        width_um = params["rf_width"] * 1e6
        length_um = params["grating_length"] * 1e6
        height_um = ion_height(gap_um, width_um)
        exposure = solid_angle_fraction(ApertureSpec(length=length_um,
                                                     width=gap_um,
                                                     height=height_um))
        return (value * 1e6, height_um, exposure)

    results = _map_ordered(point, grid, threads)
    rows = [(f"{axis}_um", "ion_height_um", "exposure_fraction")]
    rows.extend(results)
    payload = {"axis": axis,
               "points": [dict(zip(rows[0], r)) for r in results]}
    return rows, payload


def _run_tradeoff_curve(values, seed, threads):
    height_um = values["ion_height"] * 1e6
    length_um = values["grating_length"] * 1e6
    voltage = values.get("voltage", 50.0)
    drive = 2.0 * math.pi * values.get("drive_frequency", 50e6)
    qm = values.get("charge_to_mass", 7.0e5)
    grid = _sweep_grid(values["sweep"]) * 1e6  # to um

    def point(gap_um):
        width_um = rf_width_for_gap(gap_um, height_um)
        geometry = TrapGeometry(gap=gap_um, rf_width=width_um, voltage=voltage,
                                drive_frequency=drive, charge_to_mass=qm,
                                grating_length=length_um)
        omega = radial_frequency(geometry)
        exposure = solid_angle_fraction(geometry.aperture())
        return gap_um, width_um, omega, exposure

    results = _map_ordered(point, grid, threads)
    peak = max(r[2] for r in results)
    rows = [("rf_gap_um", "rf_width_um", "radial_frequency_normalized",
             "exposure_fraction")]
    rows.extend((g, w, om / peak, ex) for g, w, om, ex in results)
    payload = {"points": [dict(zip(rows[0], r)) for r in rows[1:]]}
    return rows, payload


def _run_grating_design(values, seed, threads):
    spec = GratingSpec(
        wavelength_nm=values["wavelength"] * 1e9,
        effective_index=values["effective_index"],
        ion_x_um=values.get("ion_x", 0.0) * 1e6,
        ion_distance_um=values["ion_distance"] * 1e6,
        span_um=(values["span"][0] * 1e6, values["span"][1] * 1e6),
        min_pitch_nm=values.get("min_pitch", 240e-9) * 1e9,
    )
    teeth = tooth_positions(spec)
    rows = [("index", "x_um", "pitch_nm", "angle_deg", "fabricable")]
    rows.extend((t.index, t.x_um, t.pitch_nm, t.angle_deg, int(t.fabricable))
                for t in teeth)
    payload = {"teeth": [dict(zip(rows[0], r)) for r in rows[1:]],
               "n_violations": sum(1 for t in teeth if not t.fabricable)}
    return rows, payload


def _run_rate_table(values, seed, threads):
    p_e = values.get("excitation_probability", 0.05)
    gamma = values.get("branching_ratio", 1.0)
    epsilon = values.get("epsilon", 0.01)
    p_e2 = values.get("two_photon_excitation", 1.0)

    def node(p):
        return NodeParams(excitation_probability=p, branching_ratio=gamma,
                          solid_angle_fraction=epsilon, transmission=1.0,
                          detector_efficiency=1.0)

    rows = [("kind", "enhanced", "analytic_herald_prob", "engine_total_success",
             "relative_error")]
    records = []
    for kind in KINDS:
        p = p_e if kind == "number" else p_e2
        enhanced = kind in ("polarization", "frequency")
        config = ProtocolConfig(kind=kind, node0=node(p), node1=node(p),
                                enhanced_analyzer=enhanced)
        analytic = analytic_herald_prob(config)
        engine = run_protocol(config).total_success
        rel = abs(engine - analytic) / analytic if analytic else 0.0
        rows.append((kind, int(enhanced), analytic, engine, rel))
        records.append({"kind": kind, "enhanced": enhanced, "analytic": analytic,
                        "engine": engine, "relative_error": rel})
    ratio = rate_ratio_number_vs_two_photon(p_e, epsilon, branching=gamma)
    payload = {"rows": records,
               "number_vs_two_photon_rate_ratio": ratio}
    rows.append(("number_vs_two_photon_ratio", "", ratio, "", ""))
    return rows, payload


_RUNNERS = {
    "protocol-sim": _run_protocol_sim,
    "geometry-sweep": _run_geometry_sweep,
    "tradeoff-curve": _run_tradeoff_curve,
    "grating-design": _run_grating_design,
    "rate-table": _run_rate_table,
}

_DEFAULT_FORMAT = {
    "protocol-sim": "json",
    "geometry-sweep": "csv",
    "tradeoff-curve": "csv",
    "grating-design": "csv",
    "rate-table": "csv",
}


def _format_cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _write_output(path: Path, fmt: str, rows, payload):
    if fmt == "csv":
        text = "\n".join(",".join(_format_cell(c) for c in row) for row in rows)
        path.write_text(text + "\n")
    else:
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_manifest(out_path: Path, command: str, config_bytes: bytes,
                    seed: int, fmt: str, n_rows: int):
    manifest = {
        "command": command,
        "config_sha256": hashlib.sha256(config_bytes).hexdigest(),
        "seed": seed,
        "version": __version__,
        "format": fmt,
        "output": out_path.name,
        "rows": n_rows,
    }
    manifest_path = out_path.with_name(out_path.name + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest_path


def run(command: str, config: dict, out_path: Path, fmt: str, seed: int,
        threads: int, config_bytes: bytes) -> list[Path]:
    """Validate, execute, and write the output plus its manifest."""
    diagnostics = validate(command, config)
    if diagnostics:
        raise SchemaError("; ".join(diagnostics))
    schema = _SCHEMAS[command]
    errors: list[str] = []
    values = _expect(config, "", schema["fields"], errors)
    rows, payload = _RUNNERS[command](values, seed, threads)
    _write_output(out_path, fmt, rows, payload)
    manifest = _write_manifest(out_path, command, config_bytes, seed, fmt,
                               len(rows) - 1)
    return [out_path, manifest]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pme",
        description="Photon-mediated-entanglement scenario runner")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON scenario file")
    parser.add_argument("--out", default=None, help="output path")
    parser.add_argument("--format", choices=("csv", "json"), default=None)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config_bytes = Path(args.config).read_bytes()
    except OSError as err:
        print(f"error: cannot read config: {err}", file=sys.stderr)
        return EXIT_IO
    try:
        config = json.loads(config_bytes)
    except json.JSONDecodeError as err:
        print(f"error: config is not valid JSON: {err}", file=sys.stderr)
        return EXIT_SCHEMA

    fmt = args.format or _DEFAULT_FORMAT[args.command]
    out_path = Path(args.out) if args.out else Path(f"{args.command}.{fmt}")

    try:
        outputs = run(args.command, config, out_path, fmt, args.seed,
                      max(args.threads, 1), config_bytes)
    except SchemaError as err:
        print(f"schema error: {err}", file=sys.stderr)
        return EXIT_SCHEMA
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as err:
        print(f"numerical error: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    for path in outputs:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
