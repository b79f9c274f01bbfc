"""Antenna layouts and the cylindrical bend transform.

Two presets describe the concentric patch/ring boards. The bend wraps the
board around a cylinder tangent to its center line; arc length along the
bent direction is preserved.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from modebeam.config import (
    C_MM_PER_NS,
    DEFAULT_GAIN_NORMALIZATION,
    GAIN_NORMALIZATIONS,
    MIN_BEND_RADIUS_MM,
)
from modebeam.core.modes import ModeSpec, elevation_balance, unit_power_gain
from modebeam.errors import ConfigError, GeometryError

PORT_IDS = ("F1", "F2", "F3", "F4")
RADIATORS = ("patch", "ring")
PORT_COUNTS = {"antenna1": 4, "antenna2": 3}


@dataclass(frozen=True)
class PortDef:
    id: str
    position: tuple[float, float]
    radiator: str

    def __post_init__(self):
        if self.id not in PORT_IDS:
            raise ConfigError(f"unknown port id {self.id!r}")
        if self.radiator not in RADIATORS:
            raise ConfigError(f"port radiator must be patch or ring, got {self.radiator!r}")

    @property
    def radius(self) -> float:
        return math.hypot(*self.position)


@dataclass(frozen=True)
class AntennaLayout:
    """Full antenna description. Lengths in mm, frequency in GHz."""

    name: str
    board_side: float
    substrate_thickness: float
    patch_diameter: float
    ring_inner_diameter: float
    ring_outer_diameter: float
    ports: tuple[PortDef, ...]
    modes: tuple[ModeSpec, ...]
    design_frequency: float
    metal_thickness: float = 0.06
    patch_short_radius: float | None = None
    ring_short_radius: float | None = None
    features: tuple[str, ...] = field(default=())
    gain_normalization: str = DEFAULT_GAIN_NORMALIZATION

    def __post_init__(self):
        if self.name not in PORT_COUNTS:
            raise GeometryError(f"unknown layout name {self.name!r}")
        if self.ring_inner_diameter <= self.patch_diameter:
            raise GeometryError("ring inner diameter must exceed the patch diameter")
        if self.ring_outer_diameter <= self.ring_inner_diameter:
            raise GeometryError("ring outer diameter must exceed its inner diameter")
        if self.ring_outer_diameter > self.board_side:
            raise GeometryError("ring outer diameter exceeds the board")
        if len(self.ports) != PORT_COUNTS[self.name]:
            raise GeometryError(f"{self.name} needs {PORT_COUNTS[self.name]} ports, got {len(self.ports)}")
        for port in self.ports:
            if port.radiator == "patch":
                inside = port.radius <= self.patch_diameter / 2.0
            else:
                inside = self.ring_inner_diameter / 2.0 <= port.radius <= self.ring_outer_diameter / 2.0
            if not inside:
                raise GeometryError(f"port {port.id} at {port.position} lies outside its {port.radiator}")
        _check_normalization(self.gain_normalization)
        ids = self.port_ids
        for mode in self.modes:
            if mode.port not in ids:
                raise GeometryError(f"mode attached to unknown port {mode.port}")

    @property
    def port_ids(self) -> tuple[str, ...]:
        return tuple(p.id for p in self.ports)

    def port(self, port_id: str) -> PortDef:
        for p in self.ports:
            if p.id == port_id:
                return p
        raise ConfigError(f"{self.name} has no port {port_id!r}; ports are {', '.join(self.port_ids)}")

    def mode_for(self, port_id: str) -> ModeSpec:
        self.port(port_id)
        for m in self.modes:
            if m.port == port_id:
                return m
        raise ConfigError(f"port {port_id} carries no mode")

    def to_dict(self) -> dict:
        data = asdict(self)
        data["ports"] = [{"id": p.id, "position": list(p.position), "radiator": p.radiator} for p in self.ports]
        data["modes"] = [asdict(m) for m in self.modes]
        data["features"] = list(self.features)
        data["electrical_size"] = electrical_size(self)
        return data


@dataclass(frozen=True)
class BendSpec:
    """Cylindrical bend. axis is the cylinder axis: "y" curves the board in xz.

    flat disables bending.
    """

    axis: str = "x"
    radius: float = 10.0
    flat: bool = False

    def __post_init__(self):
        if self.axis not in ("x", "y"):
            raise GeometryError(f"bend axis must be x or y, got {self.axis!r}")
        if not self.flat and self.radius < MIN_BEND_RADIUS_MM:
            raise GeometryError(f"bend radius {self.radius} mm below minimum {MIN_BEND_RADIUS_MM} mm")

    @classmethod
    def flat_board(cls) -> "BendSpec":
        return cls(flat=True)

    def to_dict(self) -> dict:
        if self.flat:
            return {"flat": True}
        return {"flat": False, "axis": self.axis, "radius": self.radius}


FLAT = BendSpec.flat_board()


def electrical_size(layout: AntennaLayout) -> float:
    """Board side in free-space wavelengths at the design frequency."""
    return layout.board_side / (C_MM_PER_NS / layout.design_frequency)


# ── Presets ──────────────────────────────────────────────────────────

def _check_normalization(normalization: str) -> None:
    if normalization not in GAIN_NORMALIZATIONS:
        raise ConfigError(f"normalization must be one of {', '.join(GAIN_NORMALIZATIONS)}, got {normalization!r}")


def _normalized(modes: list[ModeSpec], f: float) -> list[ModeSpec]:
    return [replace(m, gain_scale=unit_power_gain(m, f)) for m in modes]


def build_antenna1(normalization: str = DEFAULT_GAIN_NORMALIZATION) -> AntennaLayout:
    """34 mm board: TM11 patch (F1, F2) inside a shorted TM21 ring (F3, F4)."""
    _check_normalization(normalization)
    f = 5.7
    a_patch, a_ring = 17.0 / 2.0, 34.0 / 2.0
    patch = _normalized(
        [
            ModeSpec("F1", "patch_tm11", 1, "cos", a_patch),
            ModeSpec("F2", "patch_tm11", 1, "sin", a_patch),
        ],
        f,
    )
    ring = _normalized(
        [
            ModeSpec("F3", "ring_tm21", 2, "cos", a_ring),
            ModeSpec("F4", "ring_tm21", 2, "sin", a_ring),
        ],
        f,
    )
    if normalization == "elevation_anchor":
        # ring amplitude set relative to the patch so the quadrature pair peaks at the anchor
        balance = elevation_balance(patch[0], ring[0], f)
        ring = [replace(m, gain_scale=balance * patch[0].gain_scale) for m in ring]
    return AntennaLayout(
        name="antenna1",
        board_side=34.0,
        substrate_thickness=0.5,
        patch_diameter=17.0,
        ring_inner_diameter=18.0,
        ring_outer_diameter=34.0,
        ports=(
            PortDef("F1", (3.5, 0.0), "patch"),
            PortDef("F2", (0.0, 3.5), "patch"),
            PortDef("F3", (13.0, 0.0), "ring"),
            PortDef("F4", (-9.2, 9.2), "ring"),
        ),
        modes=tuple(patch + ring),
        design_frequency=f,
        ring_short_radius=9.0 + 0.6,
        features=(
            "T-slots on the patch for TM11 tuning",
            "eight shorting vias on the ring, 0.6 mm from the inner edge, 45 deg apart",
        ),
        gain_normalization=normalization,
    )


def build_antenna2(normalization: str = DEFAULT_GAIN_NORMALIZATION) -> AntennaLayout:
    """37 mm board: center-fed shorted monopole patch (F1) inside a TM21 ring (F2, F3).

    No patch/ring pair steers in elevation, so both normalizations give equal
    radiated power per mode.
    """
    _check_normalization(normalization)
    f = 5.76
    modes = _normalized(
        [
            ModeSpec("F1", "patch_tm01_monopole", 0, "cos", 17.3 / 2.0),
            ModeSpec("F2", "ring_tm21", 2, "cos", 34.0 / 2.0),
            ModeSpec("F3", "ring_tm21", 2, "sin", 34.0 / 2.0),
        ],
        f,
    )
    return AntennaLayout(
        name="antenna2",
        board_side=37.0,
        substrate_thickness=0.5,
        patch_diameter=17.3,
        ring_inner_diameter=19.0,
        ring_outer_diameter=34.0,
        ports=(
            PortDef("F1", (0.0, 0.0), "patch"),
            PortDef("F2", (-13.5, 0.0), "ring"),
            PortDef("F3", (9.5, -9.5), "ring"),
        ),
        modes=tuple(modes),
        design_frequency=f,
        patch_short_radius=5.0,
        ring_short_radius=9.5 + 0.6,
        features=(
            "four shorting vias on the patch at 5 mm radius, 90 deg apart",
            "shorting vias on the ring, 0.6 mm from the inner edge",
            "tuning slots on the ring",
        ),
        gain_normalization=normalization,
    )


PRESETS = {"antenna1": build_antenna1, "antenna2": build_antenna2}


def preset(name: str, normalization: str = DEFAULT_GAIN_NORMALIZATION) -> AntennaLayout:
    try:
        build = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown antenna {name!r}; choose from {', '.join(PRESETS)}") from None
    return build(normalization)


# ── Bending ──────────────────────────────────────────────────────────

def _rotation(axis: str, t: np.ndarray) -> np.ndarray:
    c, s = np.cos(t), np.sin(t)
    one, zero = np.ones_like(t), np.zeros_like(t)
    if axis == "x":
        rows = [[one, zero, zero], [zero, c, -s], [zero, s, c]]
    else:
        rows = [[c, zero, -s], [zero, one, zero], [s, zero, c]]
    return np.moveaxis(np.array(rows), (0, 1), (-2, -1))


def bend_points(points: np.ndarray, bend: BendSpec) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized bend_map over an (N, 3) array; returns positions and (N, 3, 3) frames."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if bend.flat:
        return pts.copy(), np.broadcast_to(np.eye(3), (len(pts), 3, 3)).copy()
    R = bend.radius
    wrap = 1 if bend.axis == "x" else 0
    s, z = pts[:, wrap], pts[:, 2]
    if np.any(np.abs(s) > math.pi * R + 1e-12):
        raise GeometryError(f"bend over-wraps: |s| exceeds pi*R = {math.pi * R:.3f} mm")
    t = s / R
    out = pts.copy()
    out[:, wrap] = (R - z) * np.sin(t)
    out[:, 2] = R - (R - z) * np.cos(t)
    return out, _rotation(bend.axis, t)


def bend_map(p, bend: BendSpec) -> tuple[np.ndarray, np.ndarray]:
    """Map one flat point (mm) onto the bent board; returns (position, frame rotation)."""
    pos, frames = bend_points(np.asarray(p, dtype=float).reshape(1, 3), bend)
    return pos[0], frames[0]


def unbend_map(q, bend: BendSpec) -> np.ndarray:
    """Analytic inverse of bend_map."""
    q = np.asarray(q, dtype=float)
    if bend.flat:
        return q.copy()
    R = bend.radius
    wrap = 1 if bend.axis == "x" else 0
    lateral, height = q[..., wrap], R - q[..., 2]
    out = q.copy()
    out[..., wrap] = R * np.arctan2(lateral, height)
    out[..., 2] = R - np.hypot(lateral, height)
    return out


def chord_factor(layout: AntennaLayout, bend: BendSpec) -> float:
    """Chord over arc length of the bent board, 2R sin(L/2R) / L."""
    if bend.flat:
        return 1.0
    L, R = layout.board_side, bend.radius
    return 2.0 * R * math.sin(L / (2.0 * R)) / L
