"""Command-line front end: experiment configs, orchestration, report emission.

One subcommand per capability; every run validates its parameter block
before any computation starts, writes its reports plus a manifest
(inputs, versions, wall time) into the output directory, and is
deterministic given (config, seed).  Exit codes: 0 success, 1 validation
error, 2 runtime error; validation messages name the offending field.

Configuration is JSON (--config) with command-line flags overriding
config fields.  Reports are CSV/JSON per the module interfaces plus a
minimal log-log SVG decay plot.
"""

import argparse
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .oscillation import (
    OscillationReport,
    classify_exact_order,
    estimate_oscillation_profile,
    refine_local,
    report_to_json,
)
from .padic import PadicAffineSystem, affine_minimality_check, orbit_residue_census
from .polyphase import (
    ErgodicAverageSeries,
    PhasePolynomial,
    fourier_bohr_scan,
    geometric_checkpoints,
    weighted_exponential_average,
)
from .probabilistic import (
    Distribution,
    RandomSequenceSpec,
    growth_exponent,
    lsk_empirical_sup,
    subnormality_margin,
)
from .sequences import (
    ComplexSequence,
    cesaro_l1_norm,
    liouville_sequence,
    mobius_sequence,
    polynomial_phase_sequence,
    rademacher_sequence,
    read_sequence,
    write_sequence,
)
from .torus import (
    CharacterObservable,
    SkewShiftSystem,
    TimePolynomial,
    build_tower,
    multiple_ergodic_average,
    verify_factorization,
)

COMMANDS = (
    "generate",
    "average",
    "scan-spectrum",
    "estimate-order",
    "simulate-torus",
    "verify-tower",
    "multi-average",
    "simulate-padic",
    "census",
    "lsk-check",
    "subnormal-check",
)


class ConfigError(ValueError):
    """Invalid configuration; message names the offending field."""


@dataclass
class ExperimentConfig:
    """Validated run request: command tag plus its parameter block."""

    command: str
    params: dict = field(default_factory=dict)
    out_dir: str = "."
    seed: int | None = None
    checkpoints: tuple[int, ...] | None = None
    threads: int | None = None

    def serialize(self) -> str:
        payload = asdict(self)
        if payload["checkpoints"] is not None:
            payload["checkpoints"] = list(payload["checkpoints"])
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @classmethod
    def parse(cls, text: str) -> "ExperimentConfig":
        data = json.loads(text)
        if "command" not in data:
            raise ConfigError("command: missing from config")
        cps = data.get("checkpoints")
        return cls(
            command=data["command"],
            params=dict(data.get("params", {})),
            out_dir=data.get("out_dir", "."),
            seed=data.get("seed"),
            checkpoints=tuple(cps) if cps is not None else None,
            threads=data.get("threads"),
        )


# ---------------------------------------------------------------------------
# report emission


def _svg_plot(curves, xlabel: str, ylabel: str) -> str:
    """Log-log decay plot: one labeled polyline per curve."""
    width, height = 640, 480
    left, right, top, bottom = 70, 20, 20, 50
    points = [
        (math.log10(x), math.log10(y))
        for _, xs, ys in curves
        for x, y in zip(xs, ys)
        if x > 0 and y > 0
    ]
    if not points:
        points = [(0.0, 0.0), (1.0, 1.0)]
    x_lo = min(p[0] for p in points)
    x_hi = max(p[0] for p in points)
    y_lo = min(p[1] for p in points)
    y_hi = max(p[1] for p in points)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0

    def sx(v):
        return left + (v - x_lo) / (x_hi - x_lo) * (width - left - right)

    def sy(v):
        return height - bottom - (v - y_lo) / (y_hi - y_lo) * (height - top - bottom)

    palette = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{left}" y1="{height - bottom}" x2="{width - right}" y2="{height - bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{height - bottom}" stroke="black"/>',
        f'<text x="{(left + width - right) / 2:.0f}" y="{height - 12}" text-anchor="middle">{xlabel} (log scale)</text>',
        f'<text x="16" y="{(top + height - bottom) / 2:.0f}" text-anchor="middle" transform="rotate(-90 16 {(top + height - bottom) / 2:.0f})">{ylabel} (log scale)</text>',
        f'<text x="{left}" y="{height - bottom + 16}" text-anchor="middle">{10 ** x_lo:.3g}</text>',
        f'<text x="{width - right}" y="{height - bottom + 16}" text-anchor="middle">{10 ** x_hi:.3g}</text>',
        f'<text x="{left - 6}" y="{height - bottom}" text-anchor="end">{10 ** y_lo:.3g}</text>',
        f'<text x="{left - 6}" y="{top + 10}" text-anchor="end">{10 ** y_hi:.3g}</text>',
    ]
    for idx, (label, xs, ys) in enumerate(curves):
        color = palette[idx % len(palette)]
        pts = " ".join(
            f"{sx(math.log10(x)):.2f},{sy(math.log10(y)):.2f}"
            for x, y in zip(xs, ys)
            if x > 0 and y > 0
        )
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>'
        )
        parts.append(
            f'<text x="{width - right - 4}" y="{top + 16 + 16 * idx}" text-anchor="end" fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_report(value, fmt: str, path) -> Path:
    """Write a series or report in the requested format; returns the path."""
    path = Path(path)
    if isinstance(value, ErgodicAverageSeries):
        if fmt == "csv":
            path.write_text(value.to_csv(), encoding="utf-8")
        elif fmt == "json":
            payload = [
                {"n": n, "re": a.real, "im": a.imag, "modulus": abs(a)}
                for n, a in zip(value.checkpoints, value.averages)
            ]
            path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        elif fmt == "svg":
            curve = ("average", list(value.checkpoints), [max(m, 1e-300) for m in value.moduli])
            path.write_text(_svg_plot([curve], "n", "modulus"), encoding="utf-8")
        else:
            raise ValueError(f"format: unsupported pairing {fmt!r} for a series")
        return path
    if isinstance(value, OscillationReport):
        if fmt == "json":
            path.write_text(report_to_json(value), encoding="utf-8")
        elif fmt == "svg":
            curves = [
                (
                    f"degree {prof.degree}",
                    [est.n for est in prof.estimates],
                    [max(est.sup, 1e-300) for est in prof.estimates],
                )
                for prof in value.degrees
            ]
            path.write_text(_svg_plot(curves, "n", "sup"), encoding="utf-8")
        else:
            raise ValueError(f"format: unsupported pairing {fmt!r} for a report")
        return path
    raise ValueError(f"format: no emitter for {type(value).__name__}")


def _write_csv(path: Path, header: str, rows) -> Path:
    lines = [header]
    for row in rows:
        lines.append(",".join(_csv_cell(cell) for cell in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _csv_cell(cell) -> str:
    if isinstance(cell, float):
        return f"{cell:.17g}"
    return str(cell)


# ---------------------------------------------------------------------------
# parameter handling


def _require(params: dict, name: str, kind, default=None):
    if name not in params or params[name] is None:
        if default is not None:
            return default
        raise ConfigError(f"{name}: required parameter missing")
    try:
        return kind(params[name])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def _parse_int_list(text) -> tuple[int, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(int(v) for v in text)
    return tuple(int(part) for part in str(text).split(",") if part.strip())


def _parse_float_list(text) -> tuple[float, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    return tuple(float(part) for part in str(text).split(",") if part.strip())


def _load_weights(params: dict, length: int, seed: int | None) -> ComplexSequence:
    generator = _require(params, "generator", str)
    if generator == "mobius":
        return mobius_sequence(length)
    if generator == "liouville":
        return liouville_sequence(length)
    if generator == "rademacher":
        actual_seed = params.get("seed", seed)
        if actual_seed is None:
            raise ConfigError("seed: required for rademacher weights")
        return rademacher_sequence(int(actual_seed), length)
    if generator == "polyphase":
        alpha = _require(params, "alpha", float)
        power = _require(params, "power", int)
        return polynomial_phase_sequence(alpha, power, length)
    if generator == "file":
        path = _require(params, "path", str)
        seq = read_sequence(path)
        if seq.length < length:
            raise ConfigError(
                f"path: file holds {seq.length} values, {length} required"
            )
        return seq
    raise ConfigError(f"generator: unknown generator {generator!r}")


def _checkpoints_or_default(config: ExperimentConfig, n: int) -> tuple[int, ...]:
    if config.checkpoints:
        cps = tuple(int(c) for c in config.checkpoints)
        if any(c < 1 for c in cps) or any(b <= a for a, b in zip(cps, cps[1:])):
            raise ConfigError("checkpoints: must be strictly increasing and >= 1")
        if cps[-1] > n:
            raise ConfigError(f"checkpoints: {cps[-1]} exceeds n = {n}")
        return cps
    return geometric_checkpoints(max(1, n // 16), n)


# ---------------------------------------------------------------------------
# subcommand runners (validate first, then compute)


def _run_generate(config: ExperimentConfig, out: Path) -> list[Path]:
    n = _require(config.params, "n", int)
    if n < 1:
        raise ConfigError("n: must be >= 1")
    seq = _load_weights(config.params, n, config.seed)
    path = out / "sequence.txt"
    write_sequence(path, ComplexSequence(seq.values[:n], seq.provenance))
    return [path]

def _run_average(config: ExperimentConfig, out: Path) -> list[Path]:
    n = _require(config.params, "n", int)
    coeffs = _parse_float_list(_require(config.params, "coeffs", lambda v: v))
    if not coeffs:
        raise ConfigError("coeffs: at least one coefficient required")
    try:
        poly = PhasePolynomial(coeffs)
    except ValueError as exc:
        raise ConfigError(f"coeffs: {exc}") from exc
    cps = _checkpoints_or_default(config, n)
    seq = _load_weights(config.params, n, config.seed)
    series = weighted_exponential_average(seq, poly, cps)
    paths = [
        emit_report(series, "csv", out / "average.csv"),
        emit_report(series, "svg", out / "average.svg"),
    ]
    return paths


def _run_scan_spectrum(config: ExperimentConfig, out: Path) -> list[Path]:
    n = _require(config.params, "n", int)
    m = _require(config.params, "grid-size", int, default=1024)
    if m < 2:
        raise ConfigError("grid-size: must be >= 2")
    refine = bool(config.params.get("refine", False))
    seq = _load_weights(config.params, n, config.seed)
    scan = fourier_bohr_scan(seq, m, n)
    rows = [(f"{freq:.17g}", modulus) for freq, modulus in scan]
    paths = [_write_csv(out / "spectrum.csv", "frequency,modulus", rows)]
    if refine:
        top_freq, top_mod = scan[0]
        refined, coeffs = refine_local(
            seq, 1, (0.0, top_freq), n, initial_step=1.0 / m
        )
        payload = {
            "grid_peak_frequency": top_freq,
            "grid_peak_modulus": top_mod,
            "refined_frequency": coeffs[1],
            "refined_modulus": refined,
        }
        p = out / "spectrum_refined.json"
        p.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        paths.append(p)
    return paths


def _run_estimate_order(config: ExperimentConfig, out: Path) -> list[Path]:
    n = _require(config.params, "n", int)
    d_max = _require(config.params, "d-max", int, default=2)
    if d_max < 1:
        raise ConfigError("d-max: must be >= 1")
    grid = config.params.get("grid")
    cps = _checkpoints_or_default(config, n)
    if len(cps) < 3:
        raise ConfigError("checkpoints: at least 3 required")
    seq = _load_weights(config.params, n, config.seed)
    report = estimate_oscillation_profile(
        seq, d_max, cps, grid_per_dim=int(grid) if grid else None
    )
    order = classify_exact_order(report)
    paths = [
        emit_report(report, "json", out / "oscillation.json"),
        emit_report(report, "svg", out / "oscillation.svg"),
    ]
    verdict_path = out / "order.json"
    verdict_path.write_text(
        json.dumps({"classification": order}, indent=2) + "\n", encoding="utf-8"
    )
    paths.append(verdict_path)
    return paths


def _torus_system(params: dict) -> SkewShiftSystem:
    m = _require(params, "m", int)
    alpha = _require(params, "alpha", float)
    if m < 1:
        raise ConfigError("m: must be >= 1")
    return SkewShiftSystem(m, alpha)


def _torus_point(params: dict, system: SkewShiftSystem) -> tuple[float, ...]:
    x = _parse_float_list(_require(params, "x", lambda v: v))
    if len(x) != system.dimension:
        raise ConfigError(f"x: expected {system.dimension} coordinates")
    return x


def _run_simulate_torus(config: ExperimentConfig, out: Path) -> list[Path]:
    system = _torus_system(config.params)
    x = _torus_point(config.params, system)
    steps = _require(config.params, "steps", int)
    if steps < 1:
        raise ConfigError("steps: must be >= 1")
    rows = []
    point = x
    for n in range(steps):
        rows.append((n, *point))
        point = system.step(point)
    header = "n," + ",".join(f"x{i + 1}" for i in range(system.dimension))
    return [_write_csv(out / "orbit.csv", header, rows)]


def _run_verify_tower(config: ExperimentConfig, out: Path) -> list[Path]:
    system = _torus_system(config.params)
    x = _torus_point(config.params, system)
    freqs = _parse_int_list(_require(config.params, "freqs", lambda v: v))
    if len(freqs) != system.dimension:
        raise ConfigError(f"freqs: expected {system.dimension} entries")
    if not any(freqs):
        raise ConfigError("freqs: zero frequency vector has no tower")
    n_max = _require(config.params, "n-max", int, default=1000)
    tower = build_tower(system, CharacterObservable(freqs))
    deviation = verify_factorization(tower, x, n_max)
    payload = {
        "order": tower.order,
        "n_max": n_max,
        "max_deviation": deviation,
        "levels": [
            {"constant_phase": float(lvl.constant_phase), "frequencies": list(lvl.frequencies)}
            for lvl in tower.levels
        ],
    }
    path = out / "tower.json"
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return [path]


def _run_multi_average(config: ExperimentConfig, out: Path) -> list[Path]:
    params = config.params
    system = _torus_system(params)
    x = _torus_point(params, system)
    chars_spec = params.get("chars")
    qs_spec = params.get("qs")
    if not chars_spec:
        raise ConfigError("chars: required parameter missing")
    if not qs_spec:
        raise ConfigError("qs: required parameter missing")
    chars = [CharacterObservable(_parse_int_list(c)) for c in chars_spec]
    qs = [TimePolynomial(_parse_int_list(q)) for q in qs_spec]
    if len(chars) != len(qs):
        raise ConfigError("qs: needs one time polynomial per character")
    if "ell" in params and int(params["ell"]) != len(chars):
        raise ConfigError(f"ell: {params['ell']} does not match {len(chars)} characters")
    for char in chars:
        if len(char.frequencies) != system.dimension:
            raise ConfigError(f"chars: expected {system.dimension} entries per vector")
    weights_spec = params.get("weights")
    if not isinstance(weights_spec, dict):
        raise ConfigError("weights: required parameter block missing")
    n = _require(params, "n", int)
    cps = _checkpoints_or_default(config, n)
    seq = _load_weights(weights_spec, n, config.seed)
    series = multiple_ergodic_average(system, chars, qs, x, seq, cps)
    return [
        emit_report(series, "csv", out / "multi_average.csv"),
        emit_report(series, "svg", out / "multi_average.svg"),
    ]


def _padic_system(params: dict) -> PadicAffineSystem:
    p = _require(params, "p", int)
    a = _require(params, "a", int)
    b = _require(params, "b", int)
    precision = _require(params, "precision", int, default=24)
    if precision < 1:
        raise ConfigError("precision: must be >= 1")
    try:
        return PadicAffineSystem.from_ints(p, a, b, precision=precision)
    except ValueError as exc:
        raise ConfigError(f"p: {exc}") from exc


def _run_simulate_padic(config: ExperimentConfig, out: Path) -> list[Path]:
    system = _padic_system(config.params)
    x0 = _require(config.params, "x0", int)
    steps = _require(config.params, "steps", int)
    if steps < 1:
        raise ConfigError("steps: must be >= 1")
    rows = []
    x = x0 % system.prime**system.precision
    for n in range(steps):
        rows.append((n, x))
        x = system.step_int(x, system.precision)
    try:
        minimal = affine_minimality_check(system.a.value, system.b.value, system.prime)
    except ValueError:
        minimal = None
    paths = [_write_csv(out / "padic_orbit.csv", "n,value", rows)]
    info = out / "padic_system.json"
    info.write_text(
        json.dumps(
            {
                "p": system.prime,
                "precision": system.precision,
                "a": system.a.value,
                "b": system.b.value,
                "minimal": minimal,
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    paths.append(info)
    return paths


def _run_census(config: ExperimentConfig, out: Path) -> list[Path]:
    system = _padic_system(config.params)
    x0 = _require(config.params, "x0", int)
    level = _require(config.params, "level", int)
    steps = _require(config.params, "steps", int)
    if not 0 <= level <= system.precision:
        raise ConfigError("level: must be in [0, precision]")
    if steps < 1:
        raise ConfigError("steps: must be >= 1")
    census = orbit_residue_census(system, x0, level, steps)
    rows = [(residue, count) for residue, count in sorted(census.items())]
    return [_write_csv(out / "census.csv", "residue,count", rows)]


def _run_lsk_check(config: ExperimentConfig, out: Path) -> list[Path]:
    params = config.params
    seeds = _parse_int_list(params.get("seeds", config.seed if config.seed is not None else ""))
    if not seeds:
        raise ConfigError("seeds: at least one seed required")
    degree = _require(params, "d", int)
    if degree < 1:
        raise ConfigError("d: must be >= 1")
    n_list = _parse_int_list(_require(params, "n-list", lambda v: v))
    if not n_list:
        raise ConfigError("n-list: at least one length required")
    grid = _require(params, "grid", int, default=16)
    rows = []
    slopes = {}
    for seed in seeds:
        spec = RandomSequenceSpec(Distribution("rademacher"), seed, max(n_list))
        sups = lsk_empirical_sup(spec, degree, n_list, grid)
        for n, sup in sups:
            ratio = sup / math.sqrt(n * math.log(n))
            rows.append((seed, degree, n, sup, ratio))
        slopes[seed] = growth_exponent(sups) if len(sups) >= 3 else None
    paths = [_write_csv(out / "lsk.csv", "seed,d,n,sup,ratio", rows)]
    slopes_path = out / "lsk_slopes.json"
    slopes_path.write_text(
        json.dumps({str(k): v for k, v in slopes.items()}, indent=2) + "\n",
        encoding="utf-8",
    )
    paths.append(slopes_path)
    return paths


def _run_subnormal_check(config: ExperimentConfig, out: Path) -> list[Path]:
    params = config.params
    kind = _require(params, "distribution", str)
    scale = float(params.get("scale", 1.0))
    lambdas = _parse_float_list(params.get("lambdas", "0.25,0.5,1,2,4"))
    if not lambdas:
        raise ConfigError("lambdas: at least one value required")
    try:
        dist = Distribution(kind, scale)
    except ValueError as exc:
        raise ConfigError(f"distribution: {exc}") from exc
    margins = subnormality_margin(dist, lambdas)
    rows = [(lam, margin) for lam, margin in margins]
    paths = [_write_csv(out / "subnormal.csv", "lambda,margin", rows)]
    verdict = all(margin >= 0 for _, margin in margins)
    vp = out / "subnormal.json"
    vp.write_text(
        json.dumps({"subnormal_on_grid": verdict}, indent=2) + "\n", encoding="utf-8"
    )
    paths.append(vp)
    return paths


_RUNNERS = {
    "generate": _run_generate,
    "average": _run_average,
    "scan-spectrum": _run_scan_spectrum,
    "estimate-order": _run_estimate_order,
    "simulate-torus": _run_simulate_torus,
    "verify-tower": _run_verify_tower,
    "multi-average": _run_multi_average,
    "simulate-padic": _run_simulate_padic,
    "census": _run_census,
    "lsk-check": _run_lsk_check,
    "subnormal-check": _run_subnormal_check,
}


def run_experiment(config: ExperimentConfig) -> tuple[int, list[Path]]:
    """Validate and execute one experiment; returns (exit status, outputs)."""
    if config.command not in _RUNNERS:
        raise ConfigError(f"command: unknown command {config.command!r}")
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    outputs = _RUNNERS[config.command](config, out)
    elapsed = time.perf_counter() - started
    manifest = {
        "command": config.command,
        "config": json.loads(config.serialize()),
        "versions": {
            "oscillab": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
        "wall_time_seconds": elapsed,
        "outputs": [str(p) for p in outputs],
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    return 0, outputs


# ---------------------------------------------------------------------------
# argument parsing

_COMMON_FLAGS = ("--config", "--out", "--seed", "--threads", "--checkpoints")

_SUBCOMMAND_FLAGS = {
    "generate": ("--generator", "--n", "--alpha", "--power", "--path"),
    "average": ("--generator", "--n", "--coeffs", "--alpha", "--power", "--path"),
    "scan-spectrum": ("--generator", "--n", "--grid-size", "--refine", "--alpha", "--power", "--path"),
    "estimate-order": ("--generator", "--n", "--d-max", "--grid", "--alpha", "--power", "--path"),
    "simulate-torus": ("--m", "--alpha", "--x", "--steps"),
    "verify-tower": ("--m", "--alpha", "--x", "--freqs", "--n-max"),
    "multi-average": ("--m", "--alpha", "--x", "--chars", "--qs", "--n", "--weights"),
    "simulate-padic": ("--p", "--a", "--b", "--precision", "--x0", "--steps"),
    "census": ("--p", "--a", "--b", "--precision", "--x0", "--level", "--steps"),
    "lsk-check": ("--seeds", "--d", "--n-list", "--grid"),
    "subnormal-check": ("--distribution", "--scale", "--lambdas"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oscillab",
        description="Oscillating-sequence experiments: averages, towers, p-adic orbits.",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    for command in COMMANDS:
        sub = subparsers.add_parser(command, help=f"run the {command} experiment")
        sub.add_argument("--config", help="JSON config file; flags override its fields")
        sub.add_argument("--out", help="output directory (default: current)")
        sub.add_argument("--seed", type=int, help="64-bit seed for random weights")
        sub.add_argument("--threads", type=int, help="bound on internal parallelism")
        sub.add_argument("--checkpoints", help="comma-separated checkpoint lengths")
        for flag in _SUBCOMMAND_FLAGS[command]:
            name = flag.lstrip("-")
            if flag == "--refine":
                sub.add_argument(flag, action="store_true", help="polish the top frequency")
            elif flag in ("--chars", "--qs"):
                sub.add_argument(flag, action="append", help=f"{name} (repeatable, comma-separated ints)")
            else:
                sub.add_argument(flag, help=name.replace("-", " "))
    return parser


def _config_from_args(args) -> ExperimentConfig:
    if args.config:
        config = ExperimentConfig.parse(Path(args.config).read_text(encoding="utf-8"))
        if config.command != args.command:
            raise ConfigError(
                f"command: config says {config.command!r}, flags say {args.command!r}"
            )
    else:
        config = ExperimentConfig(command=args.command)
    skip = {"command", "config", "out", "seed", "threads", "checkpoints"}
    for key, value in vars(args).items():
        if key in skip or value in (None, False):
            continue
        config.params[key.replace("_", "-")] = value
    if args.out:
        config.out_dir = args.out
    if args.seed is not None:
        config.seed = args.seed
    if args.threads is not None:
        config.threads = args.threads
    if args.checkpoints:
        config.checkpoints = _parse_int_list(args.checkpoints)
    if args.command == "multi-average" and "weights" in config.params:
        weights = config.params["weights"]
        if isinstance(weights, str):
            config.params["weights"] = json.loads(weights)
    return config


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return 1
    try:
        config = _config_from_args(args)
        run_experiment(config)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failures map to exit 2
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
