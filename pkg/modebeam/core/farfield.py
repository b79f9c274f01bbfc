"""Far-field evaluator contract shared by modes, conformal, beamform and metrics."""

from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple

import numpy as np

from modebeam.config import BACKLOBE_FACTOR, TAPER_START_DEG, TAPER_STOP_DEG
from modebeam.core.numerics import SphereGrid


class Complex2Vec(NamedTuple):
    """Complex (E_theta, E_phi) pair; scalars or equally shaped arrays."""

    e_theta: complex | np.ndarray
    e_phi: complex | np.ndarray

    def power(self):
        return np.abs(self.e_theta) ** 2 + np.abs(self.e_phi) ** 2


Evaluator = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


def ground_taper(theta) -> np.ndarray:
    """Back-lobe attenuation: 1 above the ground, linear ramp to the back-lobe factor."""
    deg = np.degrees(np.asarray(theta, dtype=float))
    t = np.clip((deg - TAPER_START_DEG) / (TAPER_STOP_DEG - TAPER_START_DEG), 0.0, 1.0)
    return 1.0 - (1.0 - BACKLOBE_FACTOR) * t


def unit_vectors(theta: np.ndarray, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """r_hat, theta_hat, phi_hat as (..., 3) arrays."""
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    r_hat = np.stack([st * cp, st * sp, ct], axis=-1)
    theta_hat = np.stack([ct * cp, ct * sp, -st], axis=-1)
    phi_hat = np.stack([-sp, cp, np.zeros_like(sp)], axis=-1)
    return r_hat, theta_hat, phi_hat


class FarField:
    """Callable far field E(theta, phi) -> Complex2Vec.

    Fields are linear objects: they add, scale by complex weights and sample
    onto a SphereGrid.
    """

    def __init__(self, evaluator: Evaluator, label: str = ""):
        self._evaluator = evaluator
        self.label = label

    def __call__(self, theta, phi) -> Complex2Vec:
        scalar = np.ndim(theta) == 0 and np.ndim(phi) == 0
        th, ph = np.broadcast_arrays(np.asarray(theta, dtype=float), np.asarray(phi, dtype=float))
        e_theta, e_phi = self._evaluator(np.atleast_1d(th), np.atleast_1d(ph))
        e_theta = np.asarray(e_theta, dtype=complex).reshape(th.shape)
        e_phi = np.asarray(e_phi, dtype=complex).reshape(th.shape)
        if scalar:
            return Complex2Vec(complex(e_theta), complex(e_phi))
        return Complex2Vec(e_theta, e_phi)

    def power(self, theta, phi):
        return self(theta, phi).power()

    def scaled(self, weight: complex) -> "FarField":
        return FarField.combine([(weight, self)], label=self.label)

    def __add__(self, other: "FarField") -> "FarField":
        return FarField.combine([(1.0, self), (1.0, other)])

    def __mul__(self, weight: complex) -> "FarField":
        return self.scaled(weight)

    __rmul__ = __mul__

    def rotated(self, delta: float) -> "FarField":
        """Field rotated rigidly about z by delta radians."""
        return FarField(lambda th, ph: self._evaluator(th, ph - delta), label=self.label)

    def sample(self, grid: SphereGrid) -> "SampledFarField":
        th, ph = grid.mesh()
        e = self(th, ph)
        return SampledFarField(grid=grid, e_theta=e.e_theta, e_phi=e.e_phi)

    def phase_profile(self, theta: float, phis) -> np.ndarray:
        """Unwrapped phase of the dominant polarization along an azimuth ring."""
        phis = np.asarray(phis, dtype=float)
        e = self(np.full_like(phis, theta), phis)
        dominant = e.e_theta
        if np.sum(np.abs(e.e_phi) ** 2) > np.sum(np.abs(e.e_theta) ** 2):
            dominant = e.e_phi
        return np.unwrap(np.angle(dominant))

    @staticmethod
    def combine(terms: Iterable[tuple[complex, "FarField"]], label: str = "") -> "FarField":
        """Weighted sum of fields, evaluated in the given order."""
        terms = [(complex(w), f) for w, f in terms if w != 0]

        def evaluate(theta, phi):
            e_theta = np.zeros(theta.shape, dtype=complex)
            e_phi = np.zeros(theta.shape, dtype=complex)
            for weight, field in terms:
                e = field(theta, phi)
                e_theta += weight * e.e_theta
                e_phi += weight * e.e_phi
            return e_theta, e_phi

        return FarField(evaluate, label=label)


@dataclass(frozen=True, eq=False)
class SampledFarField:
    """Far field sampled on a SphereGrid mesh."""

    grid: SphereGrid
    e_theta: np.ndarray
    e_phi: np.ndarray

    @property
    def power(self) -> np.ndarray:
        return np.abs(self.e_theta) ** 2 + np.abs(self.e_phi) ** 2

    def total_power(self) -> float:
        return float(self.grid.integrate(self.power))

    def inner(self, other: "SampledFarField") -> complex:
        """Sphere integral of E_self . conj(E_other) over both polarizations."""
        product = self.e_theta * np.conj(other.e_theta) + self.e_phi * np.conj(other.e_phi)
        return complex(self.grid.integrate(product))


def radiated_power(field: FarField, grid: SphereGrid) -> float:
    return field.sample(grid).total_power()
