"""Port-field superposition and steering-weight solvers.

Elevation steering pairs one broadside TM11 port with one phase-varying TM21
port; azimuth steering drives the TM21 ring pair with closed-form weights and
phases the monopole port against it. Both solvers scan a phase grid, refine
parabolically, and break ties deterministically.
"""

import cmath
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

import numpy as np

from modebeam.config import (
    AZIMUTH_ELEVATION_DEG,
    AZIMUTH_PHASE_STEP_DEG,
    ELEVATION_MAX_DEG,
    ELEVATION_PHASE_STEP_DEG,
    TIE_RTOL,
    default_samples,
)
from modebeam.core.farfield import FarField
from modebeam.core.geometry import FLAT, AntennaLayout, BendSpec
from modebeam.core.modes import ResonanceModel, bent_frequency, mode_field
from modebeam.errors import ConfigError, InfeasibleError
from modebeam.features.conformal import conformal_farfield, sample_aperture
from modebeam.features.metrics import PLANE_AZIMUTH, PatternCut, make_cut, peak_direction

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExcitationVector:
    """Complex weight per port; ports not listed are driven with exactly 0."""

    weights: dict[str, complex]

    def __post_init__(self):
        if not any(abs(w) > 0 for w in self.weights.values()):
            raise ConfigError("excitation needs at least one nonzero weight")

    def weight(self, port: str) -> complex:
        return complex(self.weights.get(port, 0.0))

    def with_weight(self, port: str, value: complex) -> "ExcitationVector":
        return ExcitationVector({**self.weights, port: complex(value)})

    def scaled(self, alpha: complex) -> "ExcitationVector":
        return ExcitationVector({p: alpha * w for p, w in self.weights.items()})

    def to_dict(self) -> dict:
        return {
            port: {"amplitude": abs(w), "phase_deg": math.degrees(cmath.phase(w)) % 360.0 if w else 0.0}
            for port, w in sorted(self.weights.items())
        }


@dataclass
class SteeringSolution:
    excitation: ExcitationVector
    target: dict
    achieved_peak: float
    peak_gain_rel: float
    solver_trace: dict = field(default_factory=dict)
    cut: PatternCut | None = None

    def to_dict(self) -> dict:
        return {
            "excitation": self.excitation.to_dict(),
            "target": dict(self.target),
            "achieved_peak_deg": self.achieved_peak,
            "peak_gain_rel_db": self.peak_gain_rel,
            "solver": dict(self.solver_trace),
        }


# ── Port fields ──────────────────────────────────────────────────────

def resolve_frequency(layout: AntennaLayout, bend: BendSpec, f: float | None = None,
                      model: ResonanceModel | None = None) -> float:
    """Explicit frequency, else the design frequency shifted by the bend."""
    if f is not None:
        if f <= 0:
            raise ConfigError("frequency must be positive")
        return float(f)
    return bent_frequency(layout.design_frequency, layout, bend, model or ResonanceModel())


@lru_cache(maxsize=32)
def _port_fields(layout: AntennaLayout, f: float, bend: BendSpec, n_samples: int) -> dict[str, FarField]:
    if bend.flat:
        return {m.port: mode_field(m, f) for m in layout.modes}
    logger.info("building conformal fields for %s (%s bend, R=%g mm) at %.4f GHz",
                layout.name, bend.axis, bend.radius, f)
    return {
        m.port: conformal_farfield(sample_aperture(layout, m, n_samples), bend, f)
        for m in layout.modes
    }


def port_fields(layout: AntennaLayout, f: float, bend: BendSpec = FLAT,
                n_samples: int | None = None) -> dict[str, FarField]:
    """Per-port far fields: closed form when flat, conformal when bent."""
    return dict(_port_fields(layout, float(f), bend, n_samples or default_samples()))


def _check_ports(layout: AntennaLayout, ports) -> None:
    for port in ports:
        layout.port(port)


def synthesize(layout: AntennaLayout, exc: ExcitationVector, f: float | None = None,
               bend: BendSpec = FLAT, fields: Mapping[str, FarField] | None = None) -> FarField:
    """Weighted superposition sum_p w_p E_p."""
    _check_ports(layout, exc.weights)
    if fields is None:
        fields = port_fields(layout, resolve_frequency(layout, bend, f), bend)
    active = [port for port in layout.port_ids if exc.weight(port) != 0]
    return FarField.combine([(exc.weight(port), fields[port]) for port in active], label="+".join(active))


def _cut(field_: FarField, plane: str, elevation: float) -> PatternCut:
    return make_cut(field_, plane, elevation=elevation)


def _gain_rel(cut: PatternCut, fields: Mapping[str, FarField], plane: str, elevation: float) -> float:
    best_single = max(_cut(f, plane, elevation).peak_power for f in fields.values())
    return 10.0 * math.log10(cut.peak_power / best_single)


def _refine(values: np.ndarray, i: int) -> float:
    """Parabolic offset (in grid steps) around a maximum of a periodic sequence."""
    n = len(values)
    left, mid, right = values[(i - 1) % n], values[i], values[(i + 1) % n]
    denom = left - 2.0 * mid + right
    if denom >= -TIE_RTOL * max(abs(mid), 1e-300):
        return 0.0
    return float(np.clip(0.5 * (left - right) / denom, -0.5, 0.5))


def _pair_power(e_a, e_b, phases: np.ndarray) -> np.ndarray:
    rot = np.exp(1j * phases)
    return np.abs(e_a.e_theta + rot * e_b.e_theta) ** 2 + np.abs(e_a.e_phi + rot * e_b.e_phi) ** 2


# ── Azimuth ──────────────────────────────────────────────────────────

def _ring_pair(layout: AntennaLayout) -> tuple[str, str, str]:
    monopole = [m.port for m in layout.modes if m.order == 0]
    ring_cos = [m.port for m in layout.modes if m.family == "ring_tm21" and m.orientation == "cos"]
    ring_sin = [m.port for m in layout.modes if m.family == "ring_tm21" and m.orientation == "sin"]
    if not (monopole and ring_cos and ring_sin):
        raise ConfigError(f"{layout.name} lacks the n=0 and n=2 mode set azimuth steering needs")
    return monopole[0], ring_cos[0], ring_sin[0]


def steer_azimuth(layout: AntennaLayout, phi0: float, f: float | None = None, bend: BendSpec = FLAT,
                  elevation: float = AZIMUTH_ELEVATION_DEG,
                  fields: Mapping[str, FarField] | None = None) -> SteeringSolution:
    """Steer the conical beam towards azimuth phi0 (deg)."""
    p_mono, p_cos, p_sin = _ring_pair(layout)
    f = resolve_frequency(layout, bend, f)
    if fields is None:
        fields = port_fields(layout, f, bend)

    two_phi0 = 2.0 * math.radians(phi0)
    w_cos, w_sin = math.cos(two_phi0), math.sin(two_phi0)
    ring = FarField.combine([(w_cos, fields[p_cos]), (w_sin, fields[p_sin])])
    theta_e, phi_t = math.radians(elevation), math.radians(phi0)
    e_ring, e_mono = ring(theta_e, phi_t), fields[p_mono](theta_e, phi_t)

    step = math.radians(AZIMUTH_PHASE_STEP_DEG)
    phases = np.arange(0.0, 2.0 * math.pi - 0.5 * step, step)
    power = _pair_power(e_ring, e_mono, phases)
    i = int(np.argmax(power))
    alpha = (phases[i] + _refine(power, i) * step) % (2.0 * math.pi)

    exc = ExcitationVector({p_mono: cmath.exp(1j * alpha), p_cos: w_cos, p_sin: w_sin})
    cut = _cut(synthesize(layout, exc, f, bend, fields), "horizontal", elevation)
    achieved = peak_direction(cut)
    logger.debug("azimuth %.1f deg: monopole phase %.3f deg, peak %.2f deg", phi0, math.degrees(alpha), achieved)
    return SteeringSolution(
        excitation=exc,
        target={"kind": "azimuth", "azimuth_deg": phi0, "elevation_deg": elevation},
        achieved_peak=achieved,
        peak_gain_rel=_gain_rel(cut, fields, "horizontal", elevation),
        solver_trace={
            "phase_step_deg": AZIMUTH_PHASE_STEP_DEG,
            "evaluations": int(len(phases)),
            "monopole_phase_deg": math.degrees(alpha),
            "frequency_ghz": f,
        },
        cut=cut,
    )


# ── Elevation ────────────────────────────────────────────────────────

def plane_azimuth(plane: str, theta0: float) -> float:
    if plane not in PLANE_AZIMUTH:
        raise ConfigError(f"elevation plane must be xz or yz, got {plane!r}")
    front, back = PLANE_AZIMUTH[plane]
    return front if theta0 >= 0 else back


def steer_elevation(layout: AntennaLayout, plane: str, theta0: float, f: float | None = None,
                    bend: BendSpec = FLAT, allowed_ports=None,
                    fields: Mapping[str, FarField] | None = None) -> SteeringSolution:
    """Steer the beam to elevation theta0 (deg) within the xz or yz plane."""
    if abs(theta0) > ELEVATION_MAX_DEG:
        raise ConfigError(f"|theta0| must be <= {ELEVATION_MAX_DEG} deg, got {theta0}")
    phi_t = plane_azimuth(plane, theta0)
    allowed = layout.port_ids if allowed_ports is None else tuple(allowed_ports)
    _check_ports(layout, allowed)
    broadside = [m.port for m in layout.modes if m.family == "patch_tm11" and m.port in allowed]
    varying = [m.port for m in layout.modes if m.family == "ring_tm21" and m.port in allowed]
    if not broadside or not varying:
        raise InfeasibleError(
            f"elevation steering needs a TM11 and a TM21 port among {', '.join(sorted(allowed)) or 'none'}"
        )

    f = resolve_frequency(layout, bend, f)
    if fields is None:
        fields = port_fields(layout, f, bend)
    theta_t = math.radians(abs(theta0))
    step = math.radians(ELEVATION_PHASE_STEP_DEG)
    phases = np.arange(0.0, 2.0 * math.pi - 0.5 * step, step)

    best = None
    for p in broadside:
        e_p = fields[p](theta_t, phi_t)
        for q in varying:
            e_q = fields[q](theta_t, phi_t)
            power = _pair_power(e_p, e_q, phases)
            i = int(np.argmax(power))
            psi = (phases[i] + _refine(power, i) * step) % (2.0 * math.pi)
            value = float(_pair_power(e_p, e_q, np.array([psi]))[0])
            if best is None or value > best[0] * (1.0 + TIE_RTOL):
                best = (value, p, q, psi)
    _, p, q, psi = best

    exc = ExcitationVector({p: 1.0, q: cmath.exp(1j * psi)})
    cut = _cut(synthesize(layout, exc, f, bend, fields), plane, AZIMUTH_ELEVATION_DEG)
    achieved = peak_direction(cut)
    logger.debug("elevation %s %.1f deg: %s+%s psi=%.2f deg, peak %.2f deg",
                 plane, theta0, p, q, math.degrees(psi), achieved)
    return SteeringSolution(
        excitation=exc,
        target={"kind": "elevation", "plane": plane, "theta_deg": theta0},
        achieved_peak=achieved,
        peak_gain_rel=_gain_rel(cut, fields, plane, AZIMUTH_ELEVATION_DEG),
        solver_trace={
            "phase_step_deg": ELEVATION_PHASE_STEP_DEG,
            "pairs": len(broadside) * len(varying),
            "evaluations": len(broadside) * len(varying) * int(len(phases)),
            "pair": [p, q],
            "tm21_phase_deg": math.degrees(psi),
            "frequency_ghz": f,
        },
        cut=cut,
    )


# ── Sweeps ───────────────────────────────────────────────────────────

def phase_sweep(layout: AntennaLayout, base_exc: ExcitationVector, port: str, f: float | None = None,
                bend: BendSpec = FLAT, n_steps: int = 36, plane: str = "xz", span: float = 2.0 * math.pi,
                elevation: float = AZIMUTH_ELEVATION_DEG,
                fields: Mapping[str, FarField] | None = None) -> list[tuple[float, float]]:
    """Peak direction (deg) as one port's phase (rad) advances from its base value."""
    if n_steps < 1:
        raise ConfigError("n_steps must be >= 1")
    layout.port(port)
    f = resolve_frequency(layout, bend, f)
    if fields is None:
        fields = port_fields(layout, f, bend)
    base = base_exc.weight(port)
    amplitude, phase0 = abs(base), cmath.phase(base)
    phases = phase0 + np.linspace(0.0, span, n_steps, endpoint=False)
    results = []
    for phase in phases:
        exc = base_exc.with_weight(port, amplitude * cmath.exp(1j * phase)) if amplitude else base_exc
        cut = _cut(synthesize(layout, exc, f, bend, fields), plane, elevation)
        results.append((float(phase), peak_direction(cut)))
    return results
