"""Cavity-model modal far fields and resonance estimation.

Each radiating mode is represented by an equivalent magnetic current ring of
radius a with cos(n phi') or sin(n phi') weighting. Its closed-form far field
(k = 2 pi f / c, u = k a sin(theta)) for the cos orientation is

    E_theta = g j^n [J_{n+1}(u) - J_{n-1}(u)] cos(n phi)
    E_phi   = g j^n [J_{n-1}(u) + J_{n+1}(u)] cos(theta) sin(n phi)

and the sin orientation is the cos mode rotated by pi / (2n). Fields below the
ground plane are scaled by the ground taper.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from modebeam.config import (
    C_MM_PER_NS,
    DEFAULT_BEND_COEFFICIENT,
    DEFAULT_EPS_R,
    DEFAULT_LOSS_TANGENT,
    DEFAULT_RING_BOUNDARY,
    ELEVATION_ANCHOR_DEG,
    RESONANCE_K_RANGE,
    RESONANCE_K_STEP,
    RING_BOUNDARIES,
    default_grid,
    wavenumber,
)
from modebeam.core.farfield import Complex2Vec, FarField, ground_taper
from modebeam.core.numerics import (
    bessel_deriv,
    bessel_j,
    bessel_j_signed,
    bessel_y,
    make_sphere_grid,
    scan_first_root,
)
from modebeam.errors import BracketError, ConfigError, ResonanceError

if TYPE_CHECKING:
    from modebeam.core.geometry import AntennaLayout, BendSpec

logger = logging.getLogger(__name__)

FAMILIES = {
    "patch_tm11": (1, "patch"),
    "ring_tm21": (2, "ring"),
    "patch_tm01_monopole": (0, "patch"),
}
ORIENTATIONS = ("cos", "sin")


@dataclass(frozen=True)
class ModeSpec:
    """One radiating mode attached to a feed port."""

    port: str
    family: str
    order: int
    orientation: str
    effective_radius: float
    gain_scale: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown mode family {self.family!r}")
        if self.order != FAMILIES[self.family][0]:
            raise ConfigError(
                f"{self.family} has azimuthal order {FAMILIES[self.family][0]}, got {self.order}"
            )
        if self.orientation not in ORIENTATIONS:
            raise ConfigError(f"orientation must be cos or sin, got {self.orientation!r}")
        if self.order == 0 and self.orientation != "cos":
            raise ConfigError("an n=0 mode has no sin orientation")
        if self.effective_radius <= 0:
            raise ConfigError("effective_radius must be positive")
        if self.gain_scale <= 0:
            raise ConfigError("gain_scale must be positive")

    @property
    def radiator(self) -> str:
        return FAMILIES[self.family][1]

    @property
    def label(self) -> str:
        return f"{self.port}:{self.family}:{self.orientation}"


@dataclass(frozen=True)
class ResonanceModel:
    """Substrate and calibration parameters for the resonance estimates."""

    eps_r: float = DEFAULT_EPS_R
    loss_tangent: float = DEFAULT_LOSS_TANGENT
    slot_loading: dict[str, float] = field(default_factory=lambda: {"patch": 1.0, "ring": 1.0})
    bend_coefficient: float = DEFAULT_BEND_COEFFICIENT
    ring_boundary: str = DEFAULT_RING_BOUNDARY

    def __post_init__(self):
        if self.eps_r < 1.0:
            raise ConfigError(f"eps_r must be >= 1, got {self.eps_r}")
        if self.loss_tangent < 0.0:
            raise ConfigError("loss_tangent must be non-negative")
        for radiator, value in self.slot_loading.items():
            if radiator not in ("patch", "ring"):
                raise ConfigError(f"slot_loading key must be patch or ring, got {radiator!r}")
            if not 0.0 < value <= 1.0:
                raise ConfigError(f"slot_loading[{radiator}] must lie in (0, 1], got {value:.4f}")
        if self.bend_coefficient < 0.0:
            raise ConfigError("bend_coefficient must be non-negative")
        if self.ring_boundary not in RING_BOUNDARIES:
            raise ConfigError(f"ring_boundary must be one of {RING_BOUNDARIES}")

    def loading(self, radiator: str) -> float:
        return self.slot_loading.get(radiator, 1.0)

    def to_dict(self) -> dict:
        return {
            "eps_r": self.eps_r,
            "loss_tangent": self.loss_tangent,
            "slot_loading": dict(sorted(self.slot_loading.items())),
            "bend_coefficient": self.bend_coefficient,
            "ring_boundary": self.ring_boundary,
        }


# ── Far fields ───────────────────────────────────────────────────────

def _modal_components(mode: ModeSpec, k: float, theta: np.ndarray, phi: np.ndarray):
    n = mode.order
    u = k * mode.effective_radius * np.abs(np.sin(theta))
    j_up = bessel_j_signed(n + 1, u)
    j_down = bessel_j_signed(n - 1, u)
    amp = mode.gain_scale * (1j ** n) * ground_taper(theta)
    if mode.orientation == "cos":
        az_theta, az_phi = np.cos(n * phi), np.sin(n * phi)
    else:
        az_theta, az_phi = np.sin(n * phi), -np.cos(n * phi)
    e_theta = amp * (j_up - j_down) * az_theta
    e_phi = amp * (j_down + j_up) * np.cos(theta) * az_phi
    return e_theta, e_phi


def eval_mode_farfield(mode: ModeSpec, f: float, theta, phi) -> Complex2Vec:
    """Closed-form modal far field at (theta, phi) in radians."""
    theta_arr = np.asarray(theta, dtype=float)
    if np.any(theta_arr < 0.0) or np.any(theta_arr > math.pi + 1e-12):
        raise ConfigError("theta must lie in [0, pi]")
    return mode_field(mode, f)(theta, phi)


def mode_field(mode: ModeSpec, f: float) -> FarField:
    """FarField evaluator for a mode at frequency f (GHz)."""
    k = wavenumber(f)
    return FarField(lambda th, ph: _modal_components(mode, k, th, ph), label=mode.label)


def mode_phase_profile(
    mode: ModeSpec | Sequence[tuple[ModeSpec, complex]],
    theta: float,
    phi_samples: Iterable[float],
    f: float = 5.7,
) -> np.ndarray:
    """Unwrapped azimuthal phase of a mode or of a weighted mode combination."""
    terms = [(1.0, mode)] if isinstance(mode, ModeSpec) else [(w, m) for m, w in mode]
    combined = FarField.combine([(w, mode_field(m, f)) for w, m in terms])
    return combined.phase_profile(theta, np.asarray(list(phi_samples), dtype=float))


# ── Resonance ────────────────────────────────────────────────────────

def _patch_tm11_equation(layout: AntennaLayout):
    a = layout.patch_diameter / 2.0
    return lambda k: bessel_deriv("J", 1, k * a)


def _ring_equation(layout: AntennaLayout, boundary: str, n: int = 2):
    b = layout.ring_outer_diameter / 2.0
    if boundary == "magnetic":
        a = layout.ring_inner_diameter / 2.0
        return lambda k: (
            bessel_deriv("J", n, k * a) * bessel_deriv("Y", n, k * b)
            - bessel_deriv("J", n, k * b) * bessel_deriv("Y", n, k * a)
        )
    a = layout.ring_short_radius or layout.ring_inner_diameter / 2.0
    return lambda k: (
        bessel_j(n, k * a) * bessel_deriv("Y", n, k * b)
        - bessel_deriv("J", n, k * b) * bessel_y(n, k * a)
    )


def _monopole_equation(layout: AntennaLayout):
    b = layout.patch_diameter / 2.0
    a = layout.patch_short_radius
    if not a:
        raise ResonanceError(f"{layout.name} has no patch shorting radius for the monopole mode")
    return lambda k: (
        bessel_j(0, k * a) * bessel_deriv("Y", 0, k * b)
        - bessel_deriv("J", 0, k * b) * bessel_y(0, k * a)
    )


def eigen_wavenumber(layout: AntennaLayout, mode: ModeSpec, model: ResonanceModel) -> float:
    """First root k (rad/mm) of the mode family's characteristic equation."""
    if mode.family == "patch_tm11":
        equation = _patch_tm11_equation(layout)
    elif mode.family == "ring_tm21":
        equation = _ring_equation(layout, model.ring_boundary)
    else:
        equation = _monopole_equation(layout)
    lo, hi = RESONANCE_K_RANGE
    try:
        return scan_first_root(equation, lo, hi, RESONANCE_K_STEP)
    except BracketError as e:
        raise ResonanceError(f"{mode.family} on {layout.name}: {e}") from e


def resonant_frequency(layout: AntennaLayout, mode: ModeSpec, model: ResonanceModel) -> float:
    """Flat resonant frequency in GHz, f = k c / (2 pi sqrt(eps_r)) * slot_loading."""
    k = eigen_wavenumber(layout, mode, model)
    return k * C_MM_PER_NS / (2.0 * math.pi * math.sqrt(model.eps_r)) * model.loading(mode.radiator)


def calibrate_resonance(layout: AntennaLayout, model: ResonanceModel | None = None) -> ResonanceModel:
    """Slot loading per radiator so that flat resonances hit the design frequency."""
    model = model or ResonanceModel()
    unloaded = replace(model, slot_loading={"patch": 1.0, "ring": 1.0})
    loading = {}
    for mode in layout.modes:
        if mode.radiator in loading:
            continue
        f0 = resonant_frequency(layout, mode, unloaded)
        loading[mode.radiator] = layout.design_frequency / f0
        logger.debug("%s %s unloaded %.4f GHz, slot loading %.4f", layout.name, mode.family, f0, loading[mode.radiator])
    return replace(model, slot_loading=loading)


def bent_frequency(f_flat: float, layout: AntennaLayout, bend: BendSpec, model: ResonanceModel) -> float:
    """Bent center frequency f_flat * (1 - kappa (L / 2R)^2)."""
    if f_flat <= 0:
        raise ConfigError("f_flat must be positive")
    if bend.flat:
        return f_flat
    x = layout.board_side / (2.0 * bend.radius)
    return f_flat * (1.0 - model.bend_coefficient * x * x)


def calibrate_bend_coefficient(f_flat: float, f_bent: float, layout: AntennaLayout, bend: BendSpec) -> float:
    """Invert the curvature law for kappa from one flat/bent anchor pair."""
    if bend.flat:
        raise ConfigError("calibrating the bend coefficient needs a bent configuration")
    x = layout.board_side / (2.0 * bend.radius)
    return (1.0 - f_bent / f_flat) / (x * x)


# ── Gain normalization ───────────────────────────────────────────────

def unit_power_gain(mode: ModeSpec, f: float) -> float:
    """gain_scale giving the mode unit radiated power on the default grid."""
    grid = make_sphere_grid(*default_grid())
    power = mode_field(replace(mode, gain_scale=1.0), f).sample(grid).total_power()
    return 1.0 / math.sqrt(power)


def elevation_balance(
    patch_mode: ModeSpec,
    ring_mode: ModeSpec,
    f: float,
    anchor_deg: float = ELEVATION_ANCHOR_DEG,
) -> float:
    """Ring/patch gain ratio placing the quadrature pair's beam peak at anchor_deg.

    In the steering plane the in-phase-quadrature pair radiates
    E ~ g_p J_p'(k a_p sin t) + g_r J_r'(k a_r sin t); the peak sits where the
    theta derivative vanishes, which fixes g_r / g_p.
    """
    k = wavenumber(f)
    s = math.sin(math.radians(anchor_deg))
    a_p, a_r = patch_mode.effective_radius, ring_mode.effective_radius
    curv_p = bessel_deriv("J", patch_mode.order, k * a_p * s, order=2)
    curv_r = bessel_deriv("J", ring_mode.order, k * a_r * s, order=2)
    ratio = -a_p * curv_p / (a_r * curv_r)
    if not ratio > 0:
        raise ConfigError(f"no positive ring/patch balance puts the beam at {anchor_deg} deg")
    return ratio
