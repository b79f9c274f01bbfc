"""Far fields of bent antennas from a discretized magnetic current ring.

Each mode becomes N equally spaced tangential magnetic dipoles at its
effective radius, weighted cos(n phi') or sin(n phi'). Positions and local
frames are carried through the bend map and the radiation integral

    E_theta = (-j / pi) sum_m w_m (t_m . phi_hat)   exp(j k r_hat . r_m)
    E_phi   = ( j / pi) sum_m w_m (t_m . theta_hat) exp(j k r_hat . r_m)

is summed per observation point in a fixed order. In the flat limit this is
the periodic trapezoid rule for the closed-form modal field.
"""

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from modebeam.config import default_grid, default_samples, wavenumber
from modebeam.core.farfield import FarField, ground_taper, unit_vectors
from modebeam.core.geometry import AntennaLayout, BendSpec, bend_points
from modebeam.core.modes import ModeSpec
from modebeam.core.numerics import make_sphere_grid
from modebeam.errors import ConfigError

logger = logging.getLogger(__name__)

_BLOCK = 4096


@dataclass(frozen=True, eq=False)
class ApertureSampleSet:
    """Sampled magnetic current ring of one mode."""

    positions: np.ndarray  # (N, 3) mm
    moments: np.ndarray  # (N,) complex, includes the d(phi') weight
    tangents: np.ndarray  # (N, 3) unit current directions
    frames: np.ndarray  # (N, 3, 3) local surface frames
    mode: ModeSpec

    @property
    def sample_count(self) -> int:
        return len(self.moments)

    @property
    def is_planar(self) -> bool:
        return bool(np.allclose(self.positions[:, 2], 0.0))


def sample_aperture(layout: AntennaLayout, mode: ModeSpec, n_samples: int | None = None) -> ApertureSampleSet:
    """Ring samples for a mode, starting at phi' = 0."""
    if mode.port not in layout.port_ids:
        raise ConfigError(f"mode port {mode.port} not on {layout.name}")
    n_samples = n_samples or default_samples()
    minimum = 16 * (mode.order + 1)
    if n_samples < minimum:
        raise ConfigError(f"{mode.family} needs at least {minimum} aperture samples, got {n_samples}")

    phi_p = 2.0 * math.pi * np.arange(n_samples) / n_samples
    a = mode.effective_radius
    positions = np.column_stack([a * np.cos(phi_p), a * np.sin(phi_p), np.zeros(n_samples)])
    tangents = np.column_stack([-np.sin(phi_p), np.cos(phi_p), np.zeros(n_samples)])
    azimuthal = np.cos(mode.order * phi_p) if mode.orientation == "cos" else np.sin(mode.order * phi_p)
    moments = (mode.gain_scale * azimuthal * (2.0 * math.pi / n_samples)).astype(complex)
    frames = np.broadcast_to(np.eye(3), (n_samples, 3, 3)).copy()
    return ApertureSampleSet(positions, moments, tangents, frames, mode)


def rotate_aperture(samples: ApertureSampleSet, delta: float) -> ApertureSampleSet:
    """Rigid rotation of a sample set about z by delta radians."""
    c, s = math.cos(delta), math.sin(delta)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return replace(
        samples,
        positions=samples.positions @ rot.T,
        tangents=samples.tangents @ rot.T,
        frames=np.einsum("ij,njk->nik", rot, samples.frames),
    )


def _bent(samples: ApertureSampleSet, bend: BendSpec) -> ApertureSampleSet:
    positions, rotations = bend_points(samples.positions, bend)
    return replace(
        samples,
        positions=positions,
        tangents=np.einsum("nij,nj->ni", rotations, samples.tangents),
        frames=np.einsum("nij,njk->nik", rotations, samples.frames),
    )


def _radiate(samples: ApertureSampleSet, k: float):
    def evaluate(theta: np.ndarray, phi: np.ndarray):
        th, ph = theta.ravel(), phi.ravel()
        e_theta = np.empty(th.shape, dtype=complex)
        e_phi = np.empty(th.shape, dtype=complex)
        for start in range(0, len(th), _BLOCK):
            sl = slice(start, start + _BLOCK)
            r_hat, theta_hat, phi_hat = unit_vectors(th[sl], ph[sl])
            phase = np.exp(1j * k * (r_hat @ samples.positions.T))
            weighted = phase * samples.moments
            e_theta[sl] = (-1j / math.pi) * np.sum(weighted * (phi_hat @ samples.tangents.T), axis=1)
            e_phi[sl] = (1j / math.pi) * np.sum(weighted * (theta_hat @ samples.tangents.T), axis=1)
        taper = ground_taper(th)
        return (e_theta * taper).reshape(theta.shape), (e_phi * taper).reshape(theta.shape)

    return evaluate


def conformal_farfield(samples: ApertureSampleSet, bend: BendSpec, f: float) -> FarField:
    """Far field of a sample set carried onto the bent board at frequency f (GHz).

    Bent fields are rescaled to the radiated power of the flat set, so bending
    redistributes power without creating it.
    """
    if f <= 0:
        raise ConfigError("frequency must be positive")
    k = wavenumber(f)
    label = f"{samples.mode.label}@conformal"
    if bend.flat:
        return FarField(_radiate(samples, k), label=label)

    bent = _bent(samples, bend)
    grid = make_sphere_grid(*default_grid())
    flat_power = FarField(_radiate(samples, k)).sample(grid).total_power()
    bent_power = FarField(_radiate(bent, k)).sample(grid).total_power()
    scale = math.sqrt(flat_power / bent_power)
    logger.debug("%s bent %s R=%.1f power scale %.4f", samples.mode.label, bend.axis, bend.radius, scale)
    return FarField(_radiate(bent, k), label=label).scaled(scale)
