"""Modebeam command line.

Subcommands map onto the library's top-level capabilities: resonance,
pattern, steer, ecc, run (full scenario), presets, and serve (MCP server).
Exit codes: 0 success, 2 configuration error, 3 infeasible steering,
4 numeric failure.
"""

import argparse
import contextlib
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from modebeam import __version__
from modebeam.config import DEFAULT_BEND_RADIUS_MM, GAIN_NORMALIZATIONS, LOG_PREFIX, log_level, parse_grid
from modebeam.core.geometry import PRESETS, preset
from modebeam.core.numerics import make_sphere_grid
from modebeam.errors import ConfigError, ModebeamError, NumericError, OpenBeamError
from modebeam.features.beamform import ExcitationVector, port_fields, synthesize
from modebeam.features.metrics import beamwidth, ecc_matrix, make_cut, peak_direction
from modebeam.features.scenario import (
    Scenario,
    SteeringTarget,
    parse_scenario,
    resonance_summary,
    run_scenario,
    solve_target,
    to_json,
    write_cut_csv,
)

logger = logging.getLogger("modebeam")


def _common_parser(top_level: bool) -> argparse.ArgumentParser:
    # subcommands repeat the global flags; suppressed defaults keep values given before the subcommand
    unset = None if top_level else argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", default=unset, help="Scenario JSON file")
    common.add_argument("--out", default=unset, help="Output directory (falls back to MODEBEAM_OUT)")
    common.add_argument("--grid", default=unset, help="Sphere grid as <n_theta>x<n_phi> (default 64x128)")
    common.add_argument("--seedless", action="store_true", default=False if top_level else argparse.SUPPRESS,
                        help="Accepted for compatibility; every algorithm is deterministic")
    common.add_argument("--strict", action="store_true", default=False if top_level else argparse.SUPPRESS,
                        help="Treat floating point warnings as numeric failures")
    common.add_argument("-v", "--verbose", action="count", default=0 if top_level else argparse.SUPPRESS)
    return common


def _antenna_parser() -> argparse.ArgumentParser:
    target = argparse.ArgumentParser(add_help=False)
    target.add_argument("--antenna", choices=sorted(PRESETS), default="antenna1")
    target.add_argument("--configuration", choices=["A", "B", "C"], default="A",
                        help="A flat, B bent along x (curves in xz), C bent along y (curves in yz)")
    target.add_argument("--bend-radius", type=float, default=None, help="Bend radius in mm (default 10)")
    target.add_argument("--frequency", type=float, default=None, help="GHz (default: design or bent frequency)")
    target.add_argument("--eps-r", type=float, default=None)
    target.add_argument("--ring-boundary", choices=["shorted", "magnetic"], default=None)
    target.add_argument("--normalization", choices=GAIN_NORMALIZATIONS, default=None,
                        help="Per-mode gain normalization (default elevation_anchor)")
    return target


def build_parser() -> argparse.ArgumentParser:
    common, target = _common_parser(top_level=False), _antenna_parser()
    parser = argparse.ArgumentParser(prog="modebeam", description="Multimode MIMO antenna beamforming simulator",
                                     parents=[_common_parser(top_level=True)])
    parser.add_argument("--version", action="version", version=f"modebeam {__version__}")
    sub = parser.add_subparsers(dest="command")

    sub.add_parser("resonance", parents=[common, target], help="Flat and bent resonant frequencies")

    pattern = sub.add_parser("pattern", parents=[common, target], help="Pattern cut of driven ports")
    pattern.add_argument("--port", action="append", required=True, help="Port to drive with unit weight (repeatable)")
    pattern.add_argument("--plane", choices=["xz", "yz", "horizontal"], default="xz")
    pattern.add_argument("--elevation", type=float, default=60.0, help="Elevation of horizontal cuts, deg")

    steer = sub.add_parser("steer", parents=[common, target], help="Solve steering weights")
    group = steer.add_mutually_exclusive_group(required=True)
    group.add_argument("--theta", type=float, help="Elevation target in deg (antenna1)")
    group.add_argument("--azimuth", type=float, help="Azimuth target in deg (antenna2)")
    steer.add_argument("--plane", choices=["xz", "yz"], default="xz")
    steer.add_argument("--allowed-ports", nargs="+", default=None)

    sub.add_parser("ecc", parents=[common, target], help="Envelope correlation for every port pair")
    sub.add_parser("run", parents=[common], help="Run a full scenario")
    sub.add_parser("presets", parents=[common], help="Dump antenna layouts")
    sub.add_parser("serve", parents=[common], help="Start the MCP tool server on stdio")
    return parser


def _scenario_for(args) -> Scenario:
    """Scenario from --scenario, else from the antenna flags."""
    if args.scenario:
        scenario = parse_scenario(args.scenario)
    else:
        radius = args.bend_radius
        if args.configuration != "A" and radius is None:
            radius = DEFAULT_BEND_RADIUS_MM
        if args.configuration == "A" and radius is not None:
            raise ConfigError("configuration A is flat and takes no --bend-radius")
        resonance = {}
        if args.eps_r is not None:
            resonance["eps_r"] = args.eps_r
        if args.ring_boundary is not None:
            resonance["ring_boundary"] = args.ring_boundary
        scenario = Scenario(antenna=args.antenna, configuration=args.configuration,
                            bend_radius=radius, resonance=resonance, steering=[])
    if getattr(args, "normalization", None) is not None:
        scenario.normalization = args.normalization
    if getattr(args, "frequency", None) is not None:
        scenario.frequency = args.frequency
    if args.grid:
        scenario.grid = parse_grid(args.grid)
    return scenario


def _emit(data) -> None:
    sys.stdout.write(to_json(data) + "\n")


def cmd_resonance(args) -> int:
    scenario = _scenario_for(args)
    layout, model = scenario.layout(), scenario.resonance_model()
    _emit({
        "antenna": layout.name,
        "configuration": scenario.configuration,
        "design_frequency_ghz": layout.design_frequency,
        "model": model.to_dict(),
        "radiators": resonance_summary(layout, model, scenario.bend),
    })
    return 0


def _maybe_write_cut(args, cut, name: str) -> None:
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_cut_csv(out / name, cut)
        logger.info("wrote %s", out / name)


def cmd_pattern(args) -> int:
    scenario = _scenario_for(args)
    layout, bend = scenario.layout(), scenario.bend
    f = scenario.resolved_frequency()
    exc = ExcitationVector({port: 1.0 for port in args.port})
    fields = port_fields(layout, f, bend, scenario.samples)
    cut = make_cut(synthesize(layout, exc, f, bend, fields), args.plane, elevation=args.elevation)
    _maybe_write_cut(args, cut, f"pattern_{'_'.join(args.port)}_{args.plane}.csv")
    try:
        width = beamwidth(cut)
        hp, one_sided = width.width, width.one_sided
    except OpenBeamError:
        hp, one_sided = None, False
    _emit({
        "antenna": layout.name,
        "ports": list(args.port),
        "plane": cut.plane,
        "frequency_ghz": f,
        "peak_direction_deg": peak_direction(cut),
        "hpbw_deg": hp,
        "hpbw_one_sided": one_sided,
    })
    return 0


def cmd_steer(args) -> int:
    """Solve one target; a --scenario supplies ports, samples and azimuth elevation."""
    scenario = _scenario_for(args)
    if args.allowed_ports is not None:
        scenario.allowed_ports = tuple(args.allowed_ports)
    layout, bend = scenario.layout(), scenario.bend
    f = scenario.resolved_frequency()
    if args.azimuth is not None:
        target = SteeringTarget("azimuth", args.azimuth)
    else:
        target = SteeringTarget("elevation", args.theta, args.plane)
    solution = solve_target(scenario, target, layout, f, bend)
    _maybe_write_cut(args, solution.cut, f"steer_{target.tag}.csv")
    _emit(solution.to_dict())
    return 0


def cmd_ecc(args) -> int:
    scenario = _scenario_for(args)
    layout, bend = scenario.layout(), scenario.bend
    f = scenario.resolved_frequency()
    grid = make_sphere_grid(*scenario.grid)
    _emit({
        "antenna": layout.name,
        "configuration": scenario.configuration,
        "frequency_ghz": f,
        "ecc": ecc_matrix(port_fields(layout, f, bend, scenario.samples), grid),
    })
    return 0


def cmd_run(args) -> int:
    if not args.scenario:
        raise ConfigError("run needs --scenario <path>")
    scenario = parse_scenario(args.scenario)
    if args.grid:
        scenario.grid = parse_grid(args.grid)
    result = run_scenario(scenario, args.out)
    if result.exit_code == 0:
        sys.stderr.write(f"{LOG_PREFIX} Wrote {len(result.files)} files to {result.out_dir}\n")
    return result.exit_code


def cmd_presets(args) -> int:
    _emit({name: preset(name).to_dict() for name in sorted(PRESETS)})
    return 0


def cmd_serve(args) -> int:
    from modebeam.server import main as serve

    serve()
    return 0


COMMANDS = {
    "resonance": cmd_resonance,
    "pattern": cmd_pattern,
    "steer": cmd_steer,
    "ecc": cmd_ecc,
    "run": cmd_run,
    "presets": cmd_presets,
    "serve": cmd_serve,
}


@contextlib.contextmanager
def _numeric_mode(strict: bool):
    if not strict:
        yield
        return
    with np.errstate(divide="raise", over="raise", invalid="raise"), warnings.catch_warnings():
        warnings.simplefilter("error", RuntimeWarning)
        yield


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(stream=sys.stderr, format=f"{LOG_PREFIX} %(message)s", level=log_level(args.verbose))

    command = args.command
    if command is None:
        if not args.scenario:
            parser.print_help(sys.stderr)
            return 2
        command = "run"
    try:
        with _numeric_mode(args.strict):
            return COMMANDS[command](args)
    except ModebeamError as e:
        sys.stderr.write(f"{LOG_PREFIX} Error: {e}\n")
        return e.exit_code
    except (FloatingPointError, RuntimeWarning) as e:
        error = NumericError(f"floating point failure: {e}")
        sys.stderr.write(f"{LOG_PREFIX} Error: {error}\n")
        return error.exit_code
