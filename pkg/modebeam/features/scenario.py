"""Scenario files and the end-to-end run.

A scenario is one strict JSON document naming an antenna preset, a bend
configuration (A flat, B bent along x, C bent along y), steering targets,
resonance overrides and the gain normalization. A run writes one CSV cut per
target, report.json and a manifest.json that lists every emitted file with
its sha256. Outputs of an earlier run in the same directory are removed first.
"""

import hashlib
import json
import logging
import math
import platform
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np
import scipy

from modebeam import __version__
from modebeam.config import (
    AZIMUTH_ELEVATION_DEG,
    DEFAULT_BEND_RADIUS_MM,
    DEFAULT_GAIN_NORMALIZATION,
    default_grid,
    default_samples,
    output_dir,
    parse_grid,
)
from modebeam.core.geometry import FLAT, BendSpec, preset
from modebeam.core.modes import ResonanceModel, bent_frequency, calibrate_resonance, resonant_frequency
from modebeam.core.numerics import make_sphere_grid
from modebeam.errors import ConfigError, InfeasibleError, ModebeamError, NumericError
from modebeam.features.beamform import SteeringSolution, port_fields, steer_azimuth, steer_elevation, synthesize
from modebeam.features.metrics import PatternCut, build_report, ecc_matrix

logger = logging.getLogger(__name__)

# configuration -> cylinder axis; B bends along x, so the board curves in xz
CONFIGURATIONS = {"A": None, "B": "y", "C": "x"}
TOP_LEVEL_KEYS = {
    "antenna", "configuration", "bend_radius", "frequency", "steering", "allowed_ports",
    "resonance", "output", "grid", "samples", "azimuth_elevation", "normalization",
}
RESONANCE_KEYS = {"eps_r", "loss_tangent", "slot_loading", "bend_coefficient", "ring_boundary"}
CSV_HEADER = "angle_deg,power_db,e_theta_re,e_theta_im,e_phi_re,e_phi_im"
OUTPUT_PATTERNS = ("cut_[0-9][0-9]*_*.csv", "report.json", "error.json", "manifest.json")
DEFAULT_STEERING = {
    "antenna1": ({"plane": "xz", "theta": 20.0}, {"plane": "xz", "theta": -20.0}),
    "antenna2": ({"azimuth": 0.0}, {"azimuth": 45.0}, {"azimuth": 90.0}),
}


@dataclass(frozen=True)
class SteeringTarget:
    kind: str  # "elevation" or "azimuth"
    angle: float
    plane: str = "horizontal"

    @property
    def tag(self) -> str:
        if self.kind == "azimuth":
            return f"az_{self.angle:+06.1f}"
        return f"{self.plane}_{self.angle:+06.1f}"

    def to_dict(self) -> dict:
        if self.kind == "azimuth":
            return {"azimuth": self.angle}
        return {"plane": self.plane, "theta": self.angle}


@dataclass
class Scenario:
    antenna: str
    configuration: str = "A"
    bend_radius: float | None = None
    frequency: float | str = "auto"
    steering: list[SteeringTarget] = field(default_factory=list)
    allowed_ports: tuple[str, ...] | None = None
    resonance: dict[str, Any] = field(default_factory=dict)
    output: str | None = None
    grid: tuple[int, int] = field(default_factory=default_grid)
    samples: int = field(default_factory=default_samples)
    azimuth_elevation: float = AZIMUTH_ELEVATION_DEG
    normalization: str = DEFAULT_GAIN_NORMALIZATION

    @property
    def bend(self) -> BendSpec:
        axis = CONFIGURATIONS[self.configuration]
        if axis is None:
            return FLAT
        return BendSpec(axis=axis, radius=self.bend_radius)

    def layout(self):
        return preset(self.antenna, self.normalization)

    def resonance_model(self) -> ResonanceModel:
        """Calibrated model unless slot loading is given explicitly."""
        overrides = dict(self.resonance)
        slot_loading = overrides.pop("slot_loading", None)
        model = ResonanceModel(**overrides)
        if slot_loading is not None:
            return replace(model, slot_loading={"patch": 1.0, "ring": 1.0, **slot_loading})
        return calibrate_resonance(self.layout(), model)

    def resolved_frequency(self, model: ResonanceModel | None = None) -> float:
        """Explicit frequency, else the design frequency shifted by the bend."""
        if self.frequency != "auto":
            return float(self.frequency)
        layout = self.layout()
        return bent_frequency(layout.design_frequency, layout, self.bend, model or self.resonance_model())

    def to_dict(self) -> dict:
        return {
            "antenna": self.antenna,
            "configuration": self.configuration,
            "bend": self.bend.to_dict(),
            "frequency": self.frequency,
            "steering": [t.to_dict() for t in self.steering],
            "allowed_ports": "all" if self.allowed_ports is None else list(self.allowed_ports),
            "resonance": dict(sorted(self.resonance.items())),
            "grid": f"{self.grid[0]}x{self.grid[1]}",
            "samples": self.samples,
            "azimuth_elevation": self.azimuth_elevation,
            "normalization": self.normalization,
        }


# ── Parsing ──────────────────────────────────────────────────────────

def _number(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{name} must be a finite number, got {value!r}")
    return float(value)


def _parse_target(item, index: int) -> SteeringTarget:
    where = f"steering[{index}]"
    if not isinstance(item, dict):
        raise ConfigError(f"{where} must be an object")
    if set(item) == {"azimuth"}:
        return SteeringTarget("azimuth", _number(item["azimuth"], f"{where}.azimuth"))
    if set(item) == {"plane", "theta"}:
        if item["plane"] not in ("xz", "yz"):
            raise ConfigError(f"{where}.plane must be xz or yz, got {item['plane']!r}")
        return SteeringTarget("elevation", _number(item["theta"], f"{where}.theta"), item["plane"])
    raise ConfigError(f"{where} must be {{'azimuth': deg}} or {{'plane': 'xz'|'yz', 'theta': deg}}, got keys {sorted(item)}")


def scenario_from_dict(data: dict, source: str = "<scenario>") -> Scenario:
    """Validate a decoded scenario document and fill defaults."""
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be an object")
    unknown = sorted(set(data) - TOP_LEVEL_KEYS)
    if unknown:
        raise ConfigError(f"{source}: unknown key(s) {', '.join(unknown)}")
    if "antenna" not in data:
        raise ConfigError(f"{source}: missing required key 'antenna'")
    normalization = data.get("normalization", DEFAULT_GAIN_NORMALIZATION)
    if not isinstance(normalization, str):
        raise ConfigError(f"{source}: normalization must be a string")
    layout = preset(data["antenna"], normalization)

    configuration = data.get("configuration", "A")
    if configuration not in CONFIGURATIONS:
        raise ConfigError(f"{source}: configuration must be A, B or C, got {configuration!r}")
    bend_radius = data.get("bend_radius")
    if configuration == "A":
        if bend_radius is not None:
            raise ConfigError(f"{source}: configuration A is flat and takes no bend_radius")
    else:
        bend_radius = DEFAULT_BEND_RADIUS_MM if bend_radius is None else _number(bend_radius, "bend_radius")
        BendSpec(axis=CONFIGURATIONS[configuration], radius=bend_radius)

    frequency = data.get("frequency", "auto")
    if frequency != "auto":
        frequency = _number(frequency, "frequency")
        if frequency <= 0:
            raise ConfigError(f"{source}: frequency must be positive")

    raw_steering = data.get("steering", DEFAULT_STEERING[layout.name])
    if not isinstance(raw_steering, (list, tuple)):
        raise ConfigError(f"{source}: steering must be a list")
    steering = [_parse_target(item, i) for i, item in enumerate(raw_steering)]

    allowed = data.get("allowed_ports", "all")
    if allowed == "all":
        allowed_ports = None
    elif isinstance(allowed, list):
        bad = [p for p in allowed if p not in layout.port_ids]
        if bad:
            raise ConfigError(f"{source}: allowed_ports names unknown port(s) {', '.join(map(str, bad))} "
                              f"for {layout.name} ({', '.join(layout.port_ids)})")
        allowed_ports = tuple(p for p in layout.port_ids if p in allowed)
    else:
        raise ConfigError(f"{source}: allowed_ports must be \"all\" or a list of port ids")

    resonance = data.get("resonance", {})
    if not isinstance(resonance, dict):
        raise ConfigError(f"{source}: resonance must be an object")
    unknown = sorted(set(resonance) - RESONANCE_KEYS)
    if unknown:
        raise ConfigError(f"{source}: unknown resonance key(s) {', '.join(unknown)}")
    for key in ("eps_r", "loss_tangent", "bend_coefficient"):
        if key in resonance:
            _number(resonance[key], f"resonance.{key}")
    if "ring_boundary" in resonance and not isinstance(resonance["ring_boundary"], str):
        raise ConfigError(f"{source}: resonance.ring_boundary must be a string")
    if "slot_loading" in resonance:
        slots = resonance["slot_loading"]
        if not isinstance(slots, dict):
            raise ConfigError(f"{source}: resonance.slot_loading must map patch/ring to numbers")
        for radiator, value in slots.items():
            _number(value, f"resonance.slot_loading.{radiator}")

    grid = parse_grid(data["grid"]) if "grid" in data else default_grid()
    samples = data.get("samples", default_samples())
    if isinstance(samples, bool) or not isinstance(samples, int):
        raise ConfigError(f"{source}: samples must be an integer")

    scenario = Scenario(
        antenna=layout.name,
        configuration=configuration,
        bend_radius=bend_radius,
        frequency=frequency,
        steering=steering,
        allowed_ports=allowed_ports,
        resonance=dict(resonance),
        output=data.get("output"),
        grid=grid,
        samples=samples,
        azimuth_elevation=_number(data.get("azimuth_elevation", AZIMUTH_ELEVATION_DEG), "azimuth_elevation"),
        normalization=normalization,
    )
    scenario.resonance_model()
    return scenario


def parse_scenario(path: str | Path) -> Scenario:
    """Load and validate a scenario file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read scenario {path}: {e.strerror}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
    return scenario_from_dict(data, source=str(path))


# ── Writers ──────────────────────────────────────────────────────────

def _clean(value):
    """Round floats for stable, diff-friendly JSON."""
    if isinstance(value, float):
        return round(value, 9) + 0.0
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.generic):
        return _clean(value.item())
    return value


def to_json(data) -> str:
    return json.dumps(_clean(data), indent=2, sort_keys=True)


def write_json(path: Path, data: dict) -> None:
    path.write_text(to_json(data) + "\n")


def write_cut_csv(path: Path, cut: PatternCut) -> None:
    lines = [CSV_HEADER]
    e = cut.fields
    for i, angle in enumerate(cut.angles):
        et, ep = (e.e_theta[i], e.e_phi[i]) if e is not None else (0j, 0j)
        values = [et.real, et.imag, ep.real, ep.imag]
        lines.append(f"{angle + 0.0:.1f},{cut.power_db[i] + 0.0:.6f}," + ",".join(f"{v + 0.0:.9e}" for v in values))
    path.write_text("\n".join(lines) + "\n")


def _listed_outputs(manifest: Path) -> set[str]:
    try:
        entries = json.loads(manifest.read_text()).get("files", [])
    except (OSError, json.JSONDecodeError, AttributeError):
        logger.warning("ignoring unreadable %s", manifest)
        return set()
    if not isinstance(entries, list):
        return set()
    return {e["path"] for e in entries if isinstance(e, dict) and isinstance(e.get("path"), str)}


def clear_previous_outputs(out: Path) -> list[str]:
    """Delete what an earlier run wrote to out: its manifest entries and the run's own file names."""
    stale = _listed_outputs(out / "manifest.json") if (out / "manifest.json").is_file() else set()
    for pattern in OUTPUT_PATTERNS:
        stale.update(p.name for p in out.glob(pattern))
    removed = []
    for name in sorted(stale):
        path = out / name
        # manifest paths are bare file names inside out
        if Path(name).name != name or not path.is_file():
            continue
        path.unlink()
        removed.append(name)
    return removed


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out: Path, files: list[str], params: dict, status: str) -> Path:
    manifest = {
        "status": status,
        "parameters": params,
        "versions": {
            "modebeam": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "files": [{"path": name, "sha256": _sha256(out / name)} for name in sorted(files)],
    }
    path = out / "manifest.json"
    write_json(path, manifest)
    return path


# ── Run ──────────────────────────────────────────────────────────────

@dataclass
class RunResult:
    exit_code: int
    out_dir: Path
    files: list[str]
    error: dict | None = None


def solve_target(scenario: Scenario, target: SteeringTarget, layout, f: float, bend: BendSpec,
                 fields=None) -> SteeringSolution:
    """Solve one steering target with the scenario's port set and azimuth elevation."""
    if fields is None:
        fields = port_fields(layout, f, bend, scenario.samples)
    if target.kind == "azimuth":
        if scenario.allowed_ports is not None:
            missing = [m.port for m in layout.modes if m.port not in scenario.allowed_ports]
            if missing:
                raise InfeasibleError(f"azimuth steering drives every port; excluded: {', '.join(missing)}")
        return steer_azimuth(layout, target.angle, f, bend, elevation=scenario.azimuth_elevation, fields=fields)
    return steer_elevation(layout, target.plane, target.angle, f, bend,
                           allowed_ports=scenario.allowed_ports, fields=fields)


def resonance_summary(layout, model: ResonanceModel, bend: BendSpec) -> dict:
    summary = {}
    for mode in layout.modes:
        if mode.radiator in summary:
            continue
        flat = resonant_frequency(layout, mode, model)
        summary[mode.radiator] = {
            "family": mode.family,
            "flat_ghz": flat,
            "bent_ghz": bent_frequency(flat, layout, bend, model),
            "slot_loading": model.loading(mode.radiator),
        }
    return summary


def run_scenario(scenario: Scenario, out_dir: str | Path | None = None) -> RunResult:
    """Run every steering target and write cuts, report and manifest."""
    out = output_dir(str(out_dir) if out_dir else None, scenario.output)
    out.mkdir(parents=True, exist_ok=True)
    removed = clear_previous_outputs(out)
    if removed:
        logger.info("removed %d files from an earlier run in %s", len(removed), out)
    files: list[str] = []
    params = scenario.to_dict()
    try:
        layout = scenario.layout()
        bend = scenario.bend
        model = scenario.resonance_model()
        f = scenario.resolved_frequency(model)
        params["resolved_frequency_ghz"] = f
        logger.info("running %s configuration %s at %.4f GHz", layout.name, scenario.configuration, f)

        fields = port_fields(layout, f, bend, scenario.samples)
        grid = make_sphere_grid(*scenario.grid)
        eccs = ecc_matrix(fields, grid)

        targets = []
        for index, target in enumerate(scenario.steering, start=1):
            solution = solve_target(scenario, target, layout, f, bend, fields)
            name = f"cut_{index:02d}_{target.tag}.csv"
            write_cut_csv(out / name, solution.cut)
            files.append(name)
            field_ = synthesize(layout, solution.excitation, f, bend, fields)
            report = build_report(field_, solution.cut, grid, eccs)
            targets.append({
                "cut_file": name,
                "cut_plane": solution.cut.plane,
                "solution": solution.to_dict(),
                "metrics": report.to_dict(),
            })
            logger.info("target %s: peak %.2f deg", target.tag, solution.achieved_peak)

        report_doc = {
            "antenna": layout.name,
            "configuration": scenario.configuration,
            "frequency_ghz": f,
            "resonance": {"model": model.to_dict(), "radiators": resonance_summary(layout, model, bend)},
            "ecc": eccs,
            "targets": targets,
        }
        write_json(out / "report.json", report_doc)
        files.append("report.json")
        write_manifest(out, files, params, "ok")
        return RunResult(0, out, files)
    except (ModebeamError, FloatingPointError) as e:
        error = e if isinstance(e, ModebeamError) else NumericError(f"floating point failure: {e}")
        logger.error("%s", error)
        record = error.to_record()
        write_json(out / "error.json", record)
        files.append("error.json")
        write_manifest(out, files, params, "error")
        return RunResult(error.exit_code, out, files, record)
