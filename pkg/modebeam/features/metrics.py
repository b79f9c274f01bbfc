"""Pattern cuts and figures of merit: peak direction, half-power beamwidth,
front-to-back ratio, directivity and envelope correlation."""

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy import optimize

from modebeam.config import AZIMUTH_ELEVATION_DEG, CUT_STEP_DEG, HALF_POWER_DB, POWER_FLOOR_DB
from modebeam.core.farfield import Complex2Vec, FarField, SampledFarField
from modebeam.core.numerics import SphereGrid
from modebeam.errors import ConfigError, DegenerateError, InsufficientSpanError, OpenBeamError

PLANE_AZIMUTH = {"xz": (0.0, math.pi), "yz": (0.5 * math.pi, 1.5 * math.pi)}


@dataclass(frozen=True, eq=False)
class PatternCut:
    """Peak-normalized power along one cut, dB clamped at the power floor."""

    plane: str
    angles: np.ndarray
    power_db: np.ndarray
    fields: Complex2Vec | None = None
    peak_power: float = 1.0
    closed: bool = False

    @classmethod
    def from_power(cls, angles, power, plane: str = "synthetic", fields: Complex2Vec | None = None,
                   closed: bool | None = None) -> "PatternCut":
        angles = np.asarray(angles, dtype=float)
        power = np.asarray(power, dtype=float)
        if angles.shape != power.shape or angles.size < 3:
            raise ConfigError("cut needs matching angle and power arrays with at least 3 samples")
        if np.any(np.diff(angles) <= 0):
            raise ConfigError("cut angles must be strictly increasing")
        peak = float(power.max())
        if not peak > 0:
            raise DegenerateError("cut carries no power")
        if closed is None:
            step = float(np.median(np.diff(angles)))
            closed = angles[-1] - angles[0] + step >= 360.0 - 1e-9
        floor = 10.0 ** (POWER_FLOOR_DB / 10.0)
        power_db = 10.0 * np.log10(np.maximum(power / peak, floor))
        return cls(plane, angles, power_db, fields, peak, bool(closed))

    @property
    def step(self) -> float:
        return float(self.angles[1] - self.angles[0])

    @property
    def linear(self) -> np.ndarray:
        return 10.0 ** (self.power_db / 10.0)


@dataclass(frozen=True)
class BeamWidth:
    width: float
    lower: float | None
    upper: float | None
    one_sided: bool


@dataclass
class MetricsReport:
    peak_direction: float
    hpbw: float | None
    hpbw_one_sided: bool
    front_to_back: float | None
    directivity: float
    ecc_matrix: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "peak_direction_deg": self.peak_direction,
            "hpbw_deg": self.hpbw,
            "hpbw_one_sided": self.hpbw_one_sided,
            "front_to_back_db": self.front_to_back,
            "directivity_dbi": self.directivity,
            "ecc": dict(sorted(self.ecc_matrix.items())),
        }


# ── Cuts ─────────────────────────────────────────────────────────────

def cut_points(plane: str, step: float = CUT_STEP_DEG, elevation: float = AZIMUTH_ELEVATION_DEG):
    """Angles (deg) and the (theta, phi) points of a named cut."""
    if plane in PLANE_AZIMUTH:
        angles = np.arange(-180.0, 180.0, step)
        front, back = PLANE_AZIMUTH[plane]
        theta = np.radians(np.abs(angles))
        phi = np.where(angles >= 0.0, front, back)
        return angles, theta, phi
    if plane == "horizontal":
        angles = np.arange(0.0, 360.0, step)
        return angles, np.full_like(angles, math.radians(elevation)), np.radians(angles)
    raise ConfigError(f"unknown cut plane {plane!r}; use xz, yz or horizontal")


def make_cut(field: FarField, plane: str, step: float = CUT_STEP_DEG,
             elevation: float = AZIMUTH_ELEVATION_DEG) -> PatternCut:
    angles, theta, phi = cut_points(plane, step, elevation)
    e = field(theta, phi)
    name = f"horizontal@{elevation:g}" if plane == "horizontal" else plane
    return PatternCut.from_power(angles, e.power(), plane=name, fields=e, closed=True)


# ── Peak and beamwidth ───────────────────────────────────────────────

def _wrap(angle: float, start: float) -> float:
    return start + (angle - start) % 360.0


def _neighbors(cut: PatternCut, i: int) -> tuple[int | None, int | None]:
    n = len(cut.angles)
    if cut.closed:
        return (i - 1) % n, (i + 1) % n
    return (i - 1 if i > 0 else None), (i + 1 if i < n - 1 else None)


def peak_direction(cut: PatternCut) -> float:
    """Angle of maximum power, parabolically refined; ties go to the smaller angle."""
    p = cut.linear
    if np.ptp(cut.power_db) == 0.0:
        raise DegenerateError(f"{cut.plane} cut is flat, no peak")
    i = int(np.argmax(p))
    left, right = _neighbors(cut, i)
    angle = float(cut.angles[i])
    if left is not None and right is not None:
        denom = p[left] - 2.0 * p[i] + p[right]
        if denom < 0.0:
            offset = 0.5 * (p[left] - p[right]) / denom
            angle += float(np.clip(offset, -0.5, 0.5)) * cut.step
    return _wrap(angle, float(cut.angles[0])) if cut.closed else angle


def _half_power_distance(cut: PatternCut, i: int, direction: int) -> float | None:
    p = cut.linear
    level = 10.0 ** (HALF_POWER_DB / 10.0)
    n = len(p)
    prev = i
    for walked in range(1, n):
        j = i + direction * walked
        if cut.closed:
            j %= n
        elif not 0 <= j < n:
            return None
        if p[j] < level:
            frac = (p[prev] - level) / (p[prev] - p[j])
            return (walked - 1 + frac) * cut.step
        prev = j
    return None


def beamwidth(cut: PatternCut) -> BeamWidth:
    """Half-power beamwidth around the main peak, with crossing angles."""
    if np.ptp(cut.power_db) == 0.0:
        raise OpenBeamError(f"{cut.plane} cut has no half-power crossing")
    i = int(np.argmax(cut.linear))
    lower = _half_power_distance(cut, i, -1)
    upper = _half_power_distance(cut, i, +1)
    if lower is None and upper is None:
        raise OpenBeamError(f"{cut.plane} cut has no half-power crossing")
    center = float(cut.angles[i])
    if lower is None or upper is None:
        half = upper if lower is None else lower
        return BeamWidth(
            width=2.0 * half,
            lower=None if lower is None else center - lower,
            upper=None if upper is None else center + upper,
            one_sided=True,
        )
    return BeamWidth(width=lower + upper, lower=center - lower, upper=center + upper, one_sided=False)


def hpbw(cut: PatternCut) -> float:
    return beamwidth(cut).width


def front_to_back(cut: PatternCut) -> float:
    """Peak power minus power 180 deg away, in dB."""
    if not cut.closed:
        raise InsufficientSpanError(f"{cut.plane} cut spans less than 360 deg")
    peak = peak_direction(cut)
    back = np.interp(peak + 180.0, cut.angles, cut.power_db, period=360.0)
    return float(cut.power_db.max() - back)


# ── Sphere integrals ─────────────────────────────────────────────────

def _sampled(field: FarField | SampledFarField, grid: SphereGrid) -> SampledFarField:
    return field if isinstance(field, SampledFarField) else field.sample(grid)


def directivity(field: FarField, grid: SphereGrid) -> float:
    """10 log10(4 pi max U / integral U), with the grid maximum refined locally."""
    sampled = field.sample(grid)
    total = sampled.total_power()
    if not total > 0:
        raise DegenerateError("field radiates no power")
    power = sampled.power
    th, ph = grid.mesh()
    idx = np.unravel_index(np.argmax(power), power.shape)
    u_max, start = float(power[idx]), (float(th[idx]), float(ph[idx]))
    for pole in (0.0, math.pi):
        value = float(field.power(pole, 0.0))
        if value > u_max:
            u_max, start = value, (pole, 0.0)

    def negative_u(x):
        return -float(field.power(np.clip(x[0], 0.0, math.pi), x[1]))

    result = optimize.minimize(negative_u, np.array(start), method="Nelder-Mead",
                               options={"xatol": 1e-9, "fatol": 1e-15 * u_max, "maxiter": 2000})
    u_max = max(u_max, -float(result.fun))
    return 10.0 * math.log10(4.0 * math.pi * u_max / total)


def ecc(field_i: FarField | SampledFarField, field_j: FarField | SampledFarField, grid: SphereGrid) -> float:
    """Envelope correlation from the full-sphere vector overlap."""
    a, b = _sampled(field_i, grid), _sampled(field_j, grid)
    p_a, p_b = a.total_power(), b.total_power()
    if not (p_a > 0 and p_b > 0):
        raise DegenerateError("ECC needs two radiating fields")
    value = abs(a.inner(b)) ** 2 / (p_a * p_b)
    return float(min(max(value, 0.0), 1.0))


def ecc_matrix(fields: Mapping[str, FarField], grid: SphereGrid) -> dict[str, float]:
    """ECC for every port pair, keyed "F1-F2"."""
    sampled = {port: _sampled(f, grid) for port, f in sorted(fields.items())}
    return {f"{p}-{q}": ecc(sampled[p], sampled[q], grid) for p, q in itertools.combinations(sampled, 2)}


def build_report(field: FarField, cut: PatternCut, grid: SphereGrid, ecc_values: dict[str, float]) -> MetricsReport:
    """MetricsReport for one synthesized pattern and its cut."""
    try:
        width = beamwidth(cut)
        hp, one_sided = width.width, width.one_sided
    except OpenBeamError:
        hp, one_sided = None, False
    try:
        fb = front_to_back(cut)
    except InsufficientSpanError:
        fb = None
    return MetricsReport(
        peak_direction=peak_direction(cut),
        hpbw=hp,
        hpbw_one_sided=one_sided,
        front_to_back=fb,
        directivity=directivity(field, grid),
        ecc_matrix=dict(ecc_values),
    )
