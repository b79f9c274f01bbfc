"""Special functions, sphere quadrature and root finding.

Thin, range-checked wrappers around scipy.special and scipy.optimize. Every
other module goes through these so that domain violations surface as
modebeam errors instead of silent NaNs.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import optimize, special

from modebeam.config import (
    BESSEL_MAX_ARG,
    BESSEL_MAX_ORDER,
    MIN_GRID,
    TAPER_START_DEG,
    TAPER_STOP_DEG,
)
from modebeam.errors import BracketError, ConfigError, DomainError, NumericError

logger = logging.getLogger(__name__)


# ── Bessel functions ─────────────────────────────────────────────────

def _check_order(n: int) -> int:
    if int(n) != n or not 0 <= n <= BESSEL_MAX_ORDER:
        raise DomainError(f"Bessel order must be an integer in [0, {BESSEL_MAX_ORDER}], got {n}")
    return int(n)


def _check_argument(x, *, positive: bool) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("Bessel argument must be finite")
    if positive and np.any(arr <= 0.0):
        raise DomainError("second-kind Bessel functions need x > 0")
    if np.any(arr < 0.0):
        raise DomainError("Bessel argument must be non-negative")
    if np.any(arr > BESSEL_MAX_ARG):
        raise DomainError(f"Bessel argument above {BESSEL_MAX_ARG}")
    return arr


def _scalar_or_array(value: np.ndarray, like):
    return float(value) if np.ndim(like) == 0 else value


def bessel_j(n: int, x):
    """First-kind Bessel function J_n(x) for 0 <= n <= 12, 0 <= x <= 200."""
    n = _check_order(n)
    arr = _check_argument(x, positive=False)
    return _scalar_or_array(special.jv(n, arr), x)


def bessel_j_signed(n: int, x):
    """J_n(x) for integer orders of either sign, via J_{-n} = (-1)^n J_n."""
    value = bessel_j(abs(n), x)
    return -value if n < 0 and n % 2 else value


def bessel_y(n: int, x):
    """Second-kind Bessel function Y_n(x), x > 0."""
    n = _check_order(n)
    arr = _check_argument(x, positive=True)
    return _scalar_or_array(special.yv(n, arr), x)


def bessel_deriv(kind: str, n: int, x, order: int = 1):
    """Derivative of J_n or Y_n with respect to x.

    Args:
        kind: "J" or "Y".
        n: Bessel order.
        x: Argument (scalar or array).
        order: Derivative order (1 or 2).
    """
    n = _check_order(n)
    kind = kind.upper()
    if kind == "J":
        arr = _check_argument(x, positive=False)
        value = special.jvp(n, arr, order)
    elif kind == "Y":
        arr = _check_argument(x, positive=True)
        value = special.yvp(n, arr, order)
    else:
        raise DomainError(f"unknown Bessel kind {kind!r}, expected J or Y")
    return _scalar_or_array(value, x)


# ── Sphere quadrature ────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Product grid: Gauss–Legendre panels in cos(theta), uniform phi."""

    n_theta: int
    n_phi: int
    theta: np.ndarray
    phi: np.ndarray
    theta_weights: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        """Solid-angle weights, shape (n_theta, n_phi), in sr."""
        return np.outer(self.theta_weights, np.full(self.n_phi, 2.0 * math.pi / self.n_phi))

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.theta, self.phi, indexing="ij")

    @property
    def nodes(self) -> np.ndarray:
        """(N, 3) array of (theta, phi, weight) rows."""
        th, ph = self.mesh()
        return np.column_stack([th.ravel(), ph.ravel(), self.weights.ravel()])

    def integrate(self, values: np.ndarray):
        """Sphere integral of values sampled on mesh()."""
        return np.sum(np.asarray(values) * self.weights)


def _panel_counts(n_theta: int, n_breaks: int) -> list[int]:
    if n_breaks == 0:
        return [n_theta]
    n_mid = max(2, n_theta // 16)
    n_upper = (n_theta - n_mid + 1) // 2
    return [n_upper, n_mid, n_theta - n_mid - n_upper]


def make_sphere_grid(
    n_theta: int,
    n_phi: int,
    breaks_deg: tuple[float, float] | None = (TAPER_START_DEG, TAPER_STOP_DEG),
) -> SphereGrid:
    """Build a sphere quadrature grid.

    The colatitude rule is composite Gauss–Legendre in cos(theta), split at
    the ground-taper kinks so tapered patterns stay smooth on every panel.
    Pass breaks_deg=None for a single panel.
    """
    if n_theta < MIN_GRID[0] or n_phi < MIN_GRID[1]:
        raise ConfigError(
            f"sphere grid needs n_theta >= {MIN_GRID[0]} and n_phi >= {MIN_GRID[1]}, "
            f"got ({n_theta}, {n_phi})"
        )
    edges = [1.0, -1.0]
    if breaks_deg:
        edges = [1.0] + [math.cos(math.radians(b)) for b in breaks_deg] + [-1.0]
    counts = _panel_counts(n_theta, len(edges) - 2)

    mus, wts = [], []
    for (top, bottom), count in zip(zip(edges[:-1], edges[1:]), counts):
        x, w = leggauss(count)
        half = 0.5 * (top - bottom)
        mus.append(bottom + half * (x + 1.0))
        wts.append(half * w)
    mu = np.concatenate(mus)
    theta = np.arccos(mu)
    order = np.argsort(theta)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    return SphereGrid(
        n_theta=n_theta,
        n_phi=n_phi,
        theta=theta[order],
        phi=phi,
        theta_weights=np.concatenate(wts)[order],
    )


# ── Root finding ─────────────────────────────────────────────────────

def find_root_bracketed(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12) -> float:
    """Root of f inside [lo, hi] (Brent: bisection safeguarded secant steps)."""
    if tol <= 0:
        raise ConfigError("root tolerance must be positive")
    f_lo, f_hi = float(f(lo)), float(f(hi))
    if f_lo == 0.0:
        return float(lo)
    if f_hi == 0.0:
        return float(hi)
    if not np.isfinite(f_lo) or not np.isfinite(f_hi) or f_lo * f_hi > 0:
        raise BracketError(f"no sign change on [{lo}, {hi}]: f={f_lo:.3e}, {f_hi:.3e}")
    result = optimize.root_scalar(f, bracket=[lo, hi], method="brentq", xtol=tol)
    if not result.converged:
        raise NumericError(f"root search did not converge: {result.flag}")
    return float(result.root)


def scan_first_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    step: float,
    tol: float = 1e-12,
) -> float:
    """First root of f above lo: scan for a sign change, then bracket it."""
    xs = np.arange(lo, hi + 0.5 * step, step)
    values = np.array([f(x) for x in xs], dtype=float)
    signs = np.sign(values)
    changes = np.nonzero(signs[:-1] * signs[1:] <= 0)[0]
    if changes.size == 0:
        raise BracketError(f"no sign change found on [{lo}, {hi}]")
    i = int(changes[0])
    logger.debug("root bracket [%.6f, %.6f]", xs[i], xs[i + 1])
    return find_root_bracketed(f, float(xs[i]), float(xs[i + 1]), tol)
