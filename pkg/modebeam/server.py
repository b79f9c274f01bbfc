"""Modebeam -- MCP tool server.

Exposes the simulator's capabilities (layout presets, resonance estimates,
pattern cuts, steering solutions, envelope correlation and full scenario
runs) as MCP tools over stdio. Every tool returns JSON text, or an
"[Modebeam] Error: ..." line when the request is invalid.
"""

import sys
import time

from mcp.server import FastMCP

from modebeam.config import LOG_PREFIX
from modebeam.core.geometry import PRESETS, preset
from modebeam.core.numerics import make_sphere_grid
from modebeam.errors import ModebeamError
from modebeam.features.beamform import ExcitationVector, port_fields, synthesize
from modebeam.features.metrics import ecc_matrix, make_cut, peak_direction
from modebeam.features.scenario import (
    SteeringTarget,
    resonance_summary,
    run_scenario as do_run,
    scenario_from_dict,
    solve_target,
    to_json,
)

mcp = FastMCP("modebeam")


def _scenario(antenna: str, configuration: str, bend_radius: float | None, normalization: str | None = None):
    data = {"antenna": antenna, "configuration": configuration, "steering": []}
    if normalization is not None:
        data["normalization"] = normalization
    if bend_radius is not None and configuration != "A":
        data["bend_radius"] = bend_radius
    return scenario_from_dict(data, source="request")


@mcp.tool()
async def list_presets() -> str:
    """List the built-in antenna layouts with ports, modes and dimensions."""
    return to_json({name: preset(name).to_dict() for name in sorted(PRESETS)})


@mcp.tool()
async def resonance(antenna: str = "antenna1", configuration: str = "A", bend_radius: float | None = None) -> str:
    """Flat and bent resonant frequencies per radiator.

    Args:
        antenna: "antenna1" or "antenna2".
        configuration: "A" flat, "B" bent along x (curves in xz), "C" bent along y.
        bend_radius: Bend radius in mm for B/C (default 10).
    """
    try:
        scenario = _scenario(antenna, configuration, bend_radius)
        layout, model = scenario.layout(), scenario.resonance_model()
        return to_json({
            "antenna": layout.name,
            "configuration": configuration,
            "model": model.to_dict(),
            "radiators": resonance_summary(layout, model, scenario.bend),
        })
    except ModebeamError as e:
        return f"{LOG_PREFIX} Error: {e}"


@mcp.tool()
async def pattern_cut(antenna: str, ports: list[str], plane: str = "xz", configuration: str = "A",
                      bend_radius: float | None = None) -> str:
    """Peak-normalized pattern cut of the given ports driven with unit weights.

    Args:
        antenna: "antenna1" or "antenna2".
        ports: Port ids to drive, e.g. ["F1", "F3"].
        plane: "xz", "yz" or "horizontal" (60 deg elevation).
        configuration: "A", "B" or "C".
        bend_radius: Bend radius in mm for B/C.
    """
    try:
        scenario = _scenario(antenna, configuration, bend_radius)
        layout, bend = scenario.layout(), scenario.bend
        f = scenario.resolved_frequency()
        cut = make_cut(synthesize(layout, ExcitationVector({p: 1.0 for p in ports}), f, bend), plane)
        return to_json({
            "plane": cut.plane,
            "frequency_ghz": f,
            "peak_direction_deg": peak_direction(cut),
            "angles_deg": cut.angles.tolist(),
            "power_db": cut.power_db.tolist(),
        })
    except ModebeamError as e:
        return f"{LOG_PREFIX} Error: {e}"


@mcp.tool()
async def steer(antenna: str, target_deg: float, plane: str = "xz", configuration: str = "A",
                bend_radius: float | None = None, allowed_ports: list[str] | None = None,
                normalization: str | None = None) -> str:
    """Solve steering weights.

    antenna1 steers in elevation within the xz or yz plane; antenna2 steers in
    azimuth (plane is ignored).

    Args:
        antenna: "antenna1" or "antenna2".
        target_deg: Elevation (antenna1) or azimuth (antenna2) target in degrees.
        plane: "xz" or "yz" for elevation steering.
        configuration: "A", "B" or "C".
        bend_radius: Bend radius in mm for B/C.
        allowed_ports: Optional subset of ports the solver may use.
        normalization: "elevation_anchor" (default) or "equal_power" gain per mode.
    """
    try:
        scenario = _scenario(antenna, configuration, bend_radius, normalization)
        layout, bend = scenario.layout(), scenario.bend
        f = scenario.resolved_frequency()
        t0 = time.time()
        if allowed_ports is not None:
            scenario.allowed_ports = tuple(allowed_ports)
        if layout.name == "antenna2":
            target = SteeringTarget("azimuth", target_deg)
        else:
            target = SteeringTarget("elevation", target_deg, plane)
        solution = solve_target(scenario, target, layout, f, bend)
        sys.stderr.write(f"{LOG_PREFIX} Steered {layout.name} to {target_deg} deg in {time.time() - t0:.1f}s\n")
        return to_json(solution.to_dict())
    except ModebeamError as e:
        return f"{LOG_PREFIX} Error: {e}"


@mcp.tool()
async def ecc(antenna: str = "antenna1", configuration: str = "A", bend_radius: float | None = None) -> str:
    """Envelope correlation coefficient for every port pair.

    Args:
        antenna: "antenna1" or "antenna2".
        configuration: "A", "B" or "C".
        bend_radius: Bend radius in mm for B/C.
    """
    try:
        scenario = _scenario(antenna, configuration, bend_radius)
        layout, bend = scenario.layout(), scenario.bend
        f = scenario.resolved_frequency()
        fields = port_fields(layout, f, bend, scenario.samples)
        return to_json({"frequency_ghz": f, "ecc": ecc_matrix(fields, make_sphere_grid(*scenario.grid))})
    except ModebeamError as e:
        return f"{LOG_PREFIX} Error: {e}"


@mcp.tool()
async def run_scenario(scenario: dict, out_dir: str = "") -> str:
    """Run a full scenario document and write cuts, report and manifest.

    Args:
        scenario: Scenario object (same schema as scenario JSON files).
        out_dir: Output directory; falls back to the scenario's "output" or MODEBEAM_OUT.
    """
    try:
        parsed = scenario_from_dict(scenario, source="request")
    except ModebeamError as e:
        return f"{LOG_PREFIX} Error: {e}"
    sys.stderr.write(f"{LOG_PREFIX} Running {parsed.antenna} configuration {parsed.configuration}\n")
    result = do_run(parsed, out_dir or None)
    return to_json({
        "exit_code": result.exit_code,
        "out_dir": str(result.out_dir),
        "files": result.files,
        "error": result.error,
    })


def main():
    """Run the MCP server on stdio."""
    mcp.run(transport="stdio")


if __name__ == "__main__":
    main()
