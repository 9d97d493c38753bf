"""Screen probability densities for a two-slit experiment whose enclosed
magnetic flux is in a superposition of "up" and "down" states.

Every density here is a combination of three geometry-only components

    A(x) = |psi+|^2 + |psi-|^2
    B(x) = 2 Re(psi+* psi-)
    C(x) = -2 Im(psi+* psi-)

with the flux entering only through cos(phi) and sin(phi):

    up pattern      A + B cos(phi) + C sin(phi)
    down pattern    A + B cos(phi) - C sin(phi)
    superposition   A + B cos(phi) + C sin(phi) cos(theta)

where cos^2(theta/2) is the probability of the "up" flux.  The relative
phase omega between the up and down flux branches never enters any
density; the superposition density equals the classical mixture of up and
down patterns with weights cos^2(theta/2) and sin^2(theta/2).

The "up" label is tied to the observable: the up pattern's fringes shift
toward negative x (left) as phi grows from 0, matching a negatively
charged particle circling a flux pointing along +z.

phi is stored as a magnitude (>= 0): all densities depend only on |phi|,
so signed physical fluxes map onto (direction, |phi|).  Flux parameters
are converted from physical quantities in gaussian units; that conversion
is the only place physical constants enter this module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .slits import ApertureGeometry, slit_amplitude_pair

# gaussian-unit constants used only by flux_parameter
HBAR_CGS = 1.054571817e-27       # erg s
SPEED_OF_LIGHT_CGS = 2.99792458e10   # cm / s

# negative density values above this (relative to the peak) are treated as
# rounding residue of the cancellation near fringe minima
_NEGATIVE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class FluxState:
    """Superposition parameters of the enclosed flux.

    theta in [0, pi]: up-amplitude cos(theta/2), down-amplitude
    sin(theta/2).  omega in [0, 2 pi): relative phase between the two flux
    branches (never observable at the screen).  phi >= 0: flux-parameter
    magnitude.
    """

    theta: float
    phi: float
    omega: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.theta) and 0.0 <= self.theta <= np.pi):
            raise DomainError(f"theta must lie in [0, pi], got {self.theta!r}")
        if not (np.isfinite(self.omega) and 0.0 <= self.omega < 2.0 * np.pi):
            raise DomainError(f"omega must lie in [0, 2 pi), got {self.omega!r}")
        if not (np.isfinite(self.phi) and self.phi >= 0.0):
            raise DomainError(f"phi must be non-negative, got {self.phi!r}")


@dataclass(frozen=True)
class PhysicalFlux:
    """A definite magnetic flux and probe charge in gaussian units
    (maxwell and statcoulomb)."""

    flux: float
    charge: float

    def __post_init__(self):
        if not np.isfinite(self.flux):
            raise DomainError(f"flux must be finite, got {self.flux!r}")
        if not (np.isfinite(self.charge) and self.charge != 0.0):
            raise DomainError(f"charge must be finite and nonzero, got {self.charge!r}")


@dataclass(frozen=True)
class ScreenGrid:
    """Strictly increasing screen positions, m."""

    positions: np.ndarray

    def __post_init__(self):
        positions = np.asarray(self.positions, dtype=float)
        if positions.ndim != 1 or positions.size == 0:
            raise DomainError("a screen grid needs at least one position")
        if not np.all(np.isfinite(positions)):
            raise DomainError("screen grid positions must be finite")
        if positions.size > 1 and not np.all(np.diff(positions) > 0):
            raise DomainError("screen grid positions must be strictly increasing")
        object.__setattr__(self, "positions", positions)

    @classmethod
    def uniform(cls, x_min, x_max, n) -> "ScreenGrid":
        if not (np.isfinite(x_min) and np.isfinite(x_max) and x_min < x_max):
            raise DomainError(f"invalid window [{x_min!r}, {x_max!r}]")
        if n < 1:
            raise DomainError("grid needs at least one point")
        return cls(np.linspace(x_min, x_max, int(n)))


@dataclass(frozen=True)
class DensityGrid:
    """A probability density (unnormalized) sampled on a screen grid."""

    positions: np.ndarray
    values: np.ndarray
    geometry: ApertureGeometry
    flux: FluxState

    def __post_init__(self):
        positions = np.asarray(self.positions, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if positions.shape != values.shape or positions.ndim != 1:
            raise DomainError("positions and values must be 1-D and equal length")
        if positions.size > 1 and not np.all(np.diff(positions) > 0):
            raise DomainError("positions must be strictly increasing")
        peak = float(np.max(values, initial=0.0))
        if np.any(values < -_NEGATIVE_TOLERANCE * max(peak, 1.0)):
            raise DomainError("density values must be non-negative")
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "values", values)


def flux_parameter(physical: PhysicalFlux) -> float:
    """Dimensionless flux parameter q Phi / (hbar c) of a physical flux."""
    return physical.charge * physical.flux / (HBAR_CGS * SPEED_OF_LIGHT_CGS)


def pattern_components(geometry: ApertureGeometry, x):
    """The three geometry-only components (A, B, C) at screen positions x.

    A = |psi+|^2 + |psi-|^2, B = 2 Re(psi+* psi-), C = -2 Im(psi+* psi-).
    Every density in this module is A + B cos(phi) + C sin(phi) * w with a
    weight w in [-1, 1].
    """
    psi_plus, psi_minus = slit_amplitude_pair(geometry, x)
    # Spelled out in real arithmetic rather than complex products: numpy's
    # complex multiply may contract to FMA, which breaks the exact mirror
    # symmetry (A, B even and C odd under x -> -x) at the last bit.
    re_p, im_p = psi_plus.real, psi_plus.imag
    re_m, im_m = psi_minus.real, psi_minus.imag
    a = (re_p * re_p + im_p * im_p) + (re_m * re_m + im_m * im_m)
    b = 2.0 * (re_p * re_m + im_p * im_m)
    c = -2.0 * (re_p * im_m - im_p * re_m)
    return a, b, c


def _as_positions(x):
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    return scalar, xs


def basis_density(geometry: ApertureGeometry, phi, direction, x):
    """Screen density for a definite ("up" or "down") flux of magnitude phi.

    The up pattern shifts left (toward negative x) with growing phi, the
    down pattern right.  Scalar x gives a float, array x an array.
    """
    phi = float(phi)
    if not (np.isfinite(phi) and phi >= 0.0):
        raise DomainError(f"phi must be non-negative, got {phi!r}")
    if direction not in ("up", "down"):
        raise DomainError(f"direction must be 'up' or 'down', got {direction!r}")
    scalar, xs = _as_positions(x)
    a, b, c = pattern_components(geometry, xs)
    sign = 1.0 if direction == "up" else -1.0
    values = a + b * np.cos(phi) + sign * c * np.sin(phi)
    return float(values[0]) if scalar else values


def density(geometry: ApertureGeometry, flux: FluxState, x):
    """Screen density for a superposed flux; independent of flux.omega."""
    scalar, xs = _as_positions(x)
    a, b, c = pattern_components(geometry, xs)
    values = a + b * np.cos(flux.phi) + c * np.sin(flux.phi) * np.cos(flux.theta)
    return float(values[0]) if scalar else values


def mixture_density(geometry: ApertureGeometry, phi, p_up, x):
    """Classical mixture p_up * up-pattern + (1 - p_up) * down-pattern."""
    p_up = float(p_up)
    if not (np.isfinite(p_up) and 0.0 <= p_up <= 1.0):
        raise DomainError(f"p_up must lie in [0, 1], got {p_up!r}")
    scalar, xs = _as_positions(x)
    up = basis_density(geometry, phi, "up", xs)
    down = basis_density(geometry, phi, "down", xs)
    values = p_up * up + (1.0 - p_up) * down
    return float(values[0]) if scalar else values


def density_grid(geometry: ApertureGeometry, flux: FluxState, grid: ScreenGrid) -> DensityGrid:
    """Superposition density evaluated on a screen grid."""
    values = density(geometry, flux, grid.positions)
    return DensityGrid(positions=grid.positions, values=values, geometry=geometry, flux=flux)


def center_of_mass(grid: DensityGrid) -> float:
    """Trapezoid-weighted first moment of a density grid, m."""
    weight = np.trapezoid(grid.values, grid.positions)
    if weight <= 0.0:
        raise DomainError("center of mass of an all-zero density is undefined")
    return float(np.trapezoid(grid.positions * grid.values, grid.positions) / weight)
