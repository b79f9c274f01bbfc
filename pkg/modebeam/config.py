"""Modebeam centralized configuration.

Single source of truth for physical constants, model defaults, environment
lookups and small shared helpers used across the codebase (numerics, modes,
conformal, beamform, metrics, scenario, cli, server).
"""

import math
import os
from pathlib import Path

from modebeam.errors import ConfigError

# ── Physical constants ───────────────────────────────────────────────
# Speed of light in mm/ns, so that c / f[GHz] is a wavelength in mm.
C_MM_PER_NS = 299.792458

# ── Substrate defaults (PDMS) ────────────────────────────────────────
DEFAULT_EPS_R = 2.72
DEFAULT_LOSS_TANGENT = 0.02
DEFAULT_BEND_COEFFICIENT = 0.01520
RING_BOUNDARIES = ("shorted", "magnetic")
DEFAULT_RING_BOUNDARY = "shorted"

# ── Ground plane ─────────────────────────────────────────────────────
BACKLOBE_FACTOR = 0.2
TAPER_START_DEG = 90.0
TAPER_STOP_DEG = 95.0

# ── Special functions ────────────────────────────────────────────────
BESSEL_MAX_ORDER = 12
BESSEL_MAX_ARG = 200.0

# ── Quadrature and sampling ──────────────────────────────────────────
DEFAULT_GRID = (64, 128)
MIN_GRID = (8, 16)
DEFAULT_APERTURE_SAMPLES = 256

# ── Resonance search ─────────────────────────────────────────────────
RESONANCE_K_RANGE = (0.02, 2.0)  # rad/mm
RESONANCE_K_STEP = 1e-3

# ── Steering ─────────────────────────────────────────────────────────
AZIMUTH_ELEVATION_DEG = 60.0
AZIMUTH_PHASE_STEP_DEG = 1.0
ELEVATION_PHASE_STEP_DEG = 2.0
ELEVATION_MAX_DEG = 60.0
ELEVATION_ANCHOR_DEG = 20.0
TIE_RTOL = 1e-12

# ── Gain normalization ───────────────────────────────────────────────
# equal_power: every mode radiates unit power.
# elevation_anchor: equal power, then antenna1 ring modes rescaled so the
# unit-weight quadrature pair peaks at ELEVATION_ANCHOR_DEG.
GAIN_NORMALIZATIONS = ("elevation_anchor", "equal_power")
DEFAULT_GAIN_NORMALIZATION = "elevation_anchor"

# ── Metrics ──────────────────────────────────────────────────────────
HALF_POWER_DB = 10.0 * math.log10(0.5)
POWER_FLOOR_DB = -60.0
CUT_STEP_DEG = 1.0

# ── Bending ──────────────────────────────────────────────────────────
MIN_BEND_RADIUS_MM = 5.0
DEFAULT_BEND_RADIUS_MM = 10.0

# ── Outputs ──────────────────────────────────────────────────────────
DEFAULT_OUT_DIR = "modebeam-out"
LOG_PREFIX = "[Modebeam]"


def wavenumber(f_ghz: float) -> float:
    """Free-space wavenumber in rad/mm for a frequency in GHz."""
    return 2.0 * math.pi * f_ghz / C_MM_PER_NS


def wavelength(f_ghz: float) -> float:
    """Free-space wavelength in mm."""
    return C_MM_PER_NS / f_ghz


def parse_grid(text: str) -> tuple[int, int]:
    """Parse a `<n_theta>x<n_phi>` grid string."""
    parts = str(text).lower().split("x")
    if len(parts) != 2:
        raise ConfigError(f"grid must look like 64x128, got {text!r}")
    try:
        n_theta, n_phi = int(parts[0]), int(parts[1])
    except ValueError:
        raise ConfigError(f"grid must look like 64x128, got {text!r}") from None
    if n_theta < MIN_GRID[0] or n_phi < MIN_GRID[1]:
        raise ConfigError(
            f"grid {n_theta}x{n_phi} below minimum {MIN_GRID[0]}x{MIN_GRID[1]}"
        )
    return n_theta, n_phi


def default_grid() -> tuple[int, int]:
    """Quadrature grid size, overridable with MODEBEAM_GRID."""
    env = os.environ.get("MODEBEAM_GRID", "")
    return parse_grid(env) if env else DEFAULT_GRID


def default_samples() -> int:
    """Aperture samples per ring, overridable with MODEBEAM_SAMPLES."""
    env = os.environ.get("MODEBEAM_SAMPLES", "")
    if not env:
        return DEFAULT_APERTURE_SAMPLES
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"MODEBEAM_SAMPLES must be an integer, got {env!r}") from None


def output_dir(cli_value: str | None = None, scenario_value: str | None = None) -> Path:
    """Resolve the output directory: flag, then scenario, then MODEBEAM_OUT."""
    for value in (cli_value, scenario_value, os.environ.get("MODEBEAM_OUT")):
        if value:
            return Path(value)
    return Path(DEFAULT_OUT_DIR)


def log_level(verbose: int = 0) -> str:
    """Logging level name from -v count or MODEBEAM_LOG_LEVEL."""
    if verbose >= 2:
        return "DEBUG"
    if verbose == 1:
        return "INFO"
    return os.environ.get("MODEBEAM_LOG_LEVEL", "WARNING").upper()
