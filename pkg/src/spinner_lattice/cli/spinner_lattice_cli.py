import argparse
import json
import logging
import os
import sys
from logging.config import fileConfig
from typing import List, Optional

import numpy as np

from ..band_analysis import (
    alpha_sweep_diagonal,
    band_gaps,
    branch_ranges,
    compute_surfaces,
    slowness_contours,
)
from ..bloch_dispersion import (
    bloch_dispersion,
    classify_regime,
    compare_with_scan,
    expected_branch_count,
)
from ..continuum import (
    build_scene,
    diagonal_profile,
    field_amplitude,
    scene_report,
    solve,
    sweep_coating_alpha,
)
from ..continuum.metrics import diagonal_points
from ..continuum.reporting import reference_config
from ..gyro_spinner import (
    SpinnerBody,
    compatible_spin_rate,
    gyro_residuals,
    precession_rate,
    signed_spinner_constant,
)
from ..lattice_geometry import BlochVector, LatticeSpec
from .export_utils import export_csv, export_grid, export_plotdata, write_json, write_manifest
from .run_config import (
    Command,
    ConfigError,
    RunConfig,
    apply_overrides,
    parse_config,
    resolved_parameters,
    serialize_config,
)

_DEFAULT_OUTPUT = "spinner_lattice_out"


def _init_logging():
    fileConfig(os.path.join(os.path.dirname(os.path.abspath(__file__)), "logging.conf"))
    logging.info("Logging initialized")


def _table(
    config: RunConfig, out: str, name: str, header: List[str], rows: List[list], artifacts: List[str]
):
    artifacts.append(export_csv(os.path.join(out, f"{name}.csv"), header, rows))
    if config.plotdata:
        artifacts.append(export_plotdata(os.path.join(out, f"{name}.dat"), header, rows))


def _omega_header(count: int) -> List[str]:
    return [f"omega_{j + 1}" for j in range(count)]


def _window(config: RunConfig):
    bands = config.section("bands")
    keys = ["k1l_min", "k1l_max", "k2l_min", "k2l_max"]
    given = [bands[key] is not None for key in keys]
    if not any(given):
        return None
    if not all(given):
        raise ConfigError(f"A k window needs all of {keys}")
    return (bands["k1l_min"], bands["k1l_max"]), (bands["k2l_min"], bands["k2l_max"])


def _run_gyro(config: RunConfig, out: str, artifacts: List[str]) -> dict:
    spinner = config.section("spinner")
    body = SpinnerBody.from_config(spinner)
    omega = spinner["omega"]
    spin_rate = compatible_spin_rate(body, omega)
    phi_dot = precession_rate(body, spin_rate)
    first, second = gyro_residuals(body, omega)
    alpha = signed_spinner_constant(body)
    header = [
        "I0", "I", "h", "omega", "branch", "spin_rate", "precession_rate", "alpha",
        "precession_residual", "frequency_residual",
    ]
    row = [
        body.I0, body.I, body.h, omega, body.sign_branch.value, spin_rate, phi_dot, alpha,
        first, second,
    ]
    _table(config, out, "gyro", header, [row], artifacts)
    return {"spin_rate": spin_rate, "precession_rate": phi_dot, "alpha": alpha}


def _run_dispersion(config: RunConfig, out: str, artifacts: List[str]) -> dict:
    spec = LatticeSpec.from_config(config.section("lattice"))
    settings = config.section("dispersion")
    k = BlochVector.from_scaled(settings["k1l"], settings["k2l"], spec.l)
    branches = bloch_dispersion(k, spec)
    width = expected_branch_count(spec)
    header = ["k1l", "k2l", "regime", "discarded"] + _omega_header(width)
    row = [settings["k1l"], settings["k2l"], branches.regime.value, branches.discarded]
    _table(config, out, "dispersion", header, [row + list(branches.omegas)], artifacts)
    summary = {"regime": branches.regime.value, "omegas": list(branches.omegas)}
    if settings["oracle"]:
        comparison = compare_with_scan(k, spec, settings["omega_max"], settings["n_steps"])
        rows = [["solver", w] for w in comparison["solver"]] + [
            ["scan", w] for w in comparison["scan"]
        ]
        _table(config, out, "oracle", ["method", "omega"], rows, artifacts)
        summary["oracle"] = comparison
    return summary


def _surfaces(config: RunConfig, spec: LatticeSpec, resolution: int):
    return compute_surfaces(spec, resolution, _window(config), config.threads)


def _run_bands(config: RunConfig, out: str, artifacts: List[str]) -> dict:
    spec = LatticeSpec.from_config(config.section("lattice"))
    surfaces = _surfaces(config, spec, config.section("bands")["resolution"])
    header = ["k1l", "k2l"] + _omega_header(surfaces.max_branches)
    rows = [
        [k.k1 * spec.l, k.k2 * spec.l] + list(omegas)
        for k, omegas in zip(surfaces.k_grid, surfaces.branches)
    ]
    _table(config, out, "bands", header, rows, artifacts)
    return {
        "regime": classify_regime(spec).value,
        "branch_ranges": [list(r) for r in branch_ranges(surfaces)],
    }


def _run_gaps(config: RunConfig, out: str, artifacts: List[str]) -> dict:
    spec = LatticeSpec.from_config(config.section("lattice"))
    settings = config.section("bands")
    surfaces = _surfaces(config, spec, settings["resolution"])
    omega_max = settings["omega_max"]
    if omega_max is None:
        omega_max = max(high for _, high in branch_ranges(surfaces))
    gaps = band_gaps(
        surfaces,
        omega_max,
        threshold=settings["gap_threshold"],
        probe_points=settings["probe_points"],
        seed=config.seed,
    )
    rows = [[g.omega_low, g.omega_high, g.width] for g in gaps]
    _table(config, out, "gaps", ["omega_low", "omega_high", "width"], rows, artifacts)
    return {"regime": classify_regime(spec).value, "gaps": rows, "omega_max": omega_max}


def _run_sweep(config: RunConfig, out: str, artifacts: List[str]) -> dict:
    spec = LatticeSpec.from_config(config.section("lattice"))
    settings = config.section("sweep")
    alphas = np.linspace(settings["alpha_min"], settings["alpha_max"], settings["alpha_steps"])
    kls = np.linspace(settings["kl_min"], settings["kl_max"], settings["kl_steps"])
    sweep = alpha_sweep_diagonal(spec, alphas, kls, config.threads)
    header = ["alpha", "kl"] + _omega_header(sweep.max_branches)
    rows = [
        [alpha, kl] + list(sweep.branches[a][q])
        for a, alpha in enumerate(sweep.alphas)
        for q, kl in enumerate(sweep.kls)
    ]
    _table(config, out, "sweep_alpha", header, rows, artifacts)
    return {"alphas": len(alphas), "kls": len(kls), "max_branches": sweep.max_branches}


def _run_contours(config: RunConfig, out: str, artifacts: List[str]) -> dict:
    spec = LatticeSpec.from_config(config.section("lattice"))
    settings = config.section("contours")
    if not settings["levels"]:
        raise ConfigError("The contours command needs [contours] levels")
    surfaces = _surfaces(config, spec, settings["resolution"])
    contours = slowness_contours(surfaces, settings["levels"])
    rows = []
    counts = {}
    for branch, levels in contours.items():
        for level, polylines in levels.items():
            counts[f"{branch + 1}:{level!r}"] = len(polylines)
            for index, polyline in enumerate(polylines):
                for k1, k2 in polyline:
                    rows.append([branch + 1, level, index, k1 * spec.l, k2 * spec.l])
    _table(config, out, "contours", ["branch", "level", "polyline", "k1l", "k2l"], rows, artifacts)
    return {"polylines": counts}


def _run_continuum(config: RunConfig, out: str, artifacts: List[str]) -> dict:
    scene_config = config.scene_sections()
    report_settings = config.section("report")
    scene = build_scene(scene_config)
    field = solve(scene)
    reference = None
    if report_settings["reference"] and scene.inclusion is not None:
        reference = solve(build_scene(reference_config(scene_config)))
    samples = report_settings["profile_samples"]
    artifacts.extend(export_grid(out, "amplitude", field_amplitude(field), scene.spacing, field.origin))
    x, y = diagonal_points(field, samples)
    profile = diagonal_profile(field, samples)
    rows = [[index / (samples - 1), px, py, a] for index, (px, py, a) in enumerate(zip(x, y, profile))]
    _table(config, out, "profile", ["t", "x", "y", "amplitude"], rows, artifacts)
    report = scene_report(
        scene, field, samples, report_settings["shadow_half_angle"], reference
    )
    if report_settings["sweep_alphas"]:
        sweep = sweep_coating_alpha(
            scene_config,
            report_settings["sweep_alphas"],
            report_settings["shadow_half_angle"],
            config.threads,
        )
        rows = [[r["alpha"], r["shadow_metric"], r["residual"]] for r in sweep]
        _table(config, out, "coating_sweep", ["alpha", "shadow_metric", "residual"], rows, artifacts)
        report["coating_sweep"] = sweep
    artifacts.append(write_json(os.path.join(out, "report.json"), report))
    return report


_HANDLERS = {
    Command.GYRO: _run_gyro,
    Command.DISPERSION: _run_dispersion,
    Command.BANDS: _run_bands,
    Command.GAPS: _run_gaps,
    Command.SWEEP_ALPHA: _run_sweep,
    Command.CONTOURS: _run_contours,
    Command.CONTINUUM: _run_continuum,
}


def run(config: RunConfig) -> int:
    """
    Executes a resolved configuration and writes its artifacts plus a manifest.

    Returns:
        int: 0 on success, 1 on failure (a JSON error object is printed to stderr).
    """
    try:
        if config.command is None:
            raise ConfigError("No command given")
        out = config.output or _DEFAULT_OUTPUT
        os.makedirs(out, exist_ok=True)
        artifacts: List[str] = []
        logging.info(f"Running '{config.command.value}' into {out}")
        summary = _HANDLERS[config.command](config, out, artifacts)
        write_manifest(out, resolved_parameters(config), serialize_config(config), artifacts)
        sys.stdout.write(json.dumps({"command": config.command.value, "summary": summary}, default=str) + "\n")
        return 0
    except Exception as e:
        logging.error(f"Run failed: {e}")
        sys.stderr.write(json.dumps({"error": str(e), "type": type(e).__name__}) + "\n")
        return 1


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinner-lattice",
        description="Dispersion, band gaps and chiral continuum scattering of gyroscopic lattices",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config", "--spec", "--scene", dest="config", help="key = value configuration file"
    )
    common.add_argument("--out", help="output directory")
    common.add_argument("--plotdata", action="store_true", help="also write whitespace tables")
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override one configuration value",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    gyro = commands.add_parser(Command.GYRO.value, parents=[common], help="gyroscope constants")
    for flag in ["i0", "i", "h", "omega"]:
        gyro.add_argument(f"--{flag}", type=float)
    gyro.add_argument("--branch", choices=["plus", "minus"])

    dispersion = commands.add_parser(
        Command.DISPERSION.value, parents=[common], help="branches at one Bloch vector"
    )
    dispersion.add_argument("--k", metavar="K1L,K2L", help="dimensionless Bloch vector")
    dispersion.add_argument("--oracle", action="store_true", help="cross-check with a determinant scan")

    for command, text in [
        (Command.BANDS, "dispersion surfaces"),
        (Command.GAPS, "total band gaps"),
        (Command.CONTOURS, "slowness contours"),
    ]:
        sub = commands.add_parser(command.value, parents=[common], help=text)
        sub.add_argument("--window", metavar="K1MIN,K1MAX,K2MIN,K2MAX", help="(k1 l, k2 l) window")

    commands.add_parser(
        Command.SWEEP_ALPHA.value, parents=[common], help="omega(alpha, k) along k1 = k2"
    )
    continuum = commands.add_parser(
        Command.CONTINUUM.value, parents=[common], help="chiral continuum scattering"
    )
    continuum.add_argument(
        "--paper-scale", "--full-scale", dest="full_scale", action="store_true", help="run at omega = 50"
    )
    return parser


def _split_floats(text: str, count: int, flag: str) -> List[str]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != count:
        raise ConfigError(f"{flag} expects {count} comma-separated numbers. Received: '{text}'")
    return parts


def _flag_overrides(args: argparse.Namespace) -> List[str]:
    overrides = [f"command={args.command}"]
    if args.out:
        overrides.append(f"output={args.out}")
    if args.plotdata:
        overrides.append("plotdata=true")
    if args.command == Command.GYRO.value:
        for flag in ["i0", "i", "h", "omega", "branch"]:
            value = getattr(args, flag)
            if value is not None:
                overrides.append(f"spinner.{flag}={value}")
    if getattr(args, "k", None):
        k1l, k2l = _split_floats(args.k, 2, "--k")
        overrides += [f"dispersion.k1l={k1l}", f"dispersion.k2l={k2l}"]
    if getattr(args, "oracle", False):
        overrides.append("dispersion.oracle=true")
    if getattr(args, "window", None):
        values = _split_floats(args.window, 4, "--window")
        keys = ["k1l_min", "k1l_max", "k2l_min", "k2l_max"]
        overrides += [f"bands.{key}={value}" for key, value in zip(keys, values)]
    if getattr(args, "full_scale", False):
        overrides.append("domain.full_scale=true")
    return overrides


def main(argv: Optional[List[str]] = None) -> int:
    _init_logging()
    args = _parser().parse_args(argv)
    try:
        text = ""
        if args.config:
            with open(args.config, encoding="utf-8") as f:
                text = f.read()
        config = parse_config(text)
        config = apply_overrides(config, _flag_overrides(args) + args.overrides)
    except (OSError, ValueError) as e:
        logging.error(f"Invalid configuration: {e}")
        sys.stderr.write(json.dumps({"error": str(e), "type": type(e).__name__}) + "\n")
        return 1
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
