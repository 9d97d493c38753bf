"""Finite-width two-slit screen amplitudes.

Geometry: a point source a distance ``l`` behind the slit plane, two slits
of half-width ``b`` centred at ±``x0`` on the slit plane, and a screen a
distance ``L`` beyond it.  The y-motion is treated classically; the
transverse amplitude at screen position ``x`` for the slit on the right
(``plus``) or left (``minus``) is

    psi±(x) = (-i N / sqrt(M)) * exp(i pi x^2 / (lambda (L+l)))
              * [E(beta (x0 + b ∓ rx)) - E(beta (x0 - b ∓ rx))]

with r = l/(L+l), E the complex Fresnel integral, and

    N = sqrt(1 / (2 lambda (l+L)))        amplitude scale, m^-1/2
    beta = sqrt((2/lambda)(1/l + 1/L))    Fresnel argument scale, m^-1
    M = 4 b / (lambda l)                  normalization factor

All lengths are SI meters.  The common quadratic phase factor cancels in
every density but is kept by default so the amplitude is the literal
expression above; ``with_common_phase=False`` drops it (the densities must
not change, which the tests exercise).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .fresnel import _fresnel_ei_array

# Planck constant, J s (exact SI value)
PLANCK_CONSTANT = 6.62607015e-34

# Default screen window, m.  Covers roughly 14 fringes of the Jonsson
# layout (fringe spacing ~2.75e-6 m there).
DEFAULT_WINDOW = (-2.0e-5, 2.0e-5)


@dataclass(frozen=True)
class ApertureGeometry:
    """Source / slit / screen layout, SI meters.

    ``slit_half_separation`` is the distance from the optical axis to each
    slit centre, so the centre-to-centre slit separation is twice it.
    """

    source_to_slit: float
    slit_to_screen: float
    slit_half_width: float
    slit_half_separation: float
    wavelength: float

    def __post_init__(self):
        for name in (
            "source_to_slit",
            "slit_to_screen",
            "slit_half_width",
            "slit_half_separation",
            "wavelength",
        ):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")
        if self.slit_half_separation <= self.slit_half_width:
            raise DomainError(
                "slit_half_separation must exceed slit_half_width "
                "(the two slits must be distinct and clear of the axis)"
            )

    @classmethod
    def jonsson(cls) -> "ApertureGeometry":
        """The Jonsson electron-diffraction layout used for all defaults:
        l = 10 m, L = 1 m, b = 0.25 um, x0 = 1 um, wavelength = 5 pm."""
        return cls(
            source_to_slit=10.0,
            slit_to_screen=1.0,
            slit_half_width=0.25e-6,
            slit_half_separation=1.0e-6,
            wavelength=5.0e-12,
        )


@dataclass(frozen=True)
class GeometryConstants:
    """Derived constants of an aperture geometry (see module docstring)."""

    amplitude_scale: float    # N, m^-1/2
    fresnel_scale: float      # beta, m^-1
    normalization: float      # M, dimensionless

    def __post_init__(self):
        for name in ("amplitude_scale", "fresnel_scale", "normalization"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")


def de_broglie_wavelength(mass, speed):
    """De Broglie wavelength h/(m v) in meters for SI mass and speed.

    Raises :class:`DomainError` for non-positive mass or speed.
    """
    mass = float(mass)
    speed = float(speed)
    if not (np.isfinite(mass) and mass > 0):
        raise DomainError(f"mass must be positive and finite, got {mass!r}")
    if not (np.isfinite(speed) and speed > 0):
        raise DomainError(f"speed must be positive and finite, got {speed!r}")
    return PLANCK_CONSTANT / (mass * speed)


def geometry_constants(geometry: ApertureGeometry) -> GeometryConstants:
    """Amplitude scale N, Fresnel argument scale beta, and normalization M."""
    l = geometry.source_to_slit
    big_l = geometry.slit_to_screen
    lam = geometry.wavelength
    return GeometryConstants(
        amplitude_scale=np.sqrt(1.0 / (2.0 * lam * (l + big_l))),
        fresnel_scale=np.sqrt((2.0 / lam) * (1.0 / l + 1.0 / big_l)),
        normalization=4.0 * geometry.slit_half_width / (lam * l),
    )


def _validate_positions(x):
    x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    if x.size and not np.all(np.isfinite(x)):
        raise DomainError("screen positions must be finite")
    return x


def slit_amplitude_pair(geometry: ApertureGeometry, x, with_common_phase=True):
    """Both slit amplitudes (psi_plus, psi_minus) at screen positions x.

    Parameters
    ----------
    geometry : ApertureGeometry
    x : array_like of float
        Screen positions, m.
    with_common_phase : bool
        Keep the common factor exp(i pi x^2/(lambda (L+l))).  It cancels in
        every density; dropping it must leave |psi±|^2 and psi+* psi-
        unchanged.

    Returns
    -------
    (numpy.ndarray, numpy.ndarray) of complex
    """
    x = _validate_positions(x)
    consts = geometry_constants(geometry)
    l = geometry.source_to_slit
    big_l = geometry.slit_to_screen
    projected = (l / (l + big_l)) * x
    outer = geometry.slit_half_separation + geometry.slit_half_width
    inner = geometry.slit_half_separation - geometry.slit_half_width
    beta = consts.fresnel_scale
    args = np.concatenate([
        beta * (outer - projected),
        beta * (inner - projected),
        beta * (outer + projected),
        beta * (inner + projected),
    ])
    ei = _fresnel_ei_array(args).reshape(4, x.size)
    prefactor = -1j * consts.amplitude_scale / np.sqrt(consts.normalization)
    if with_common_phase:
        phase = np.exp(1j * np.pi * x * x / (geometry.wavelength * (big_l + l)))
        prefactor = prefactor * phase
    psi_plus = prefactor * (ei[0] - ei[1])
    psi_minus = prefactor * (ei[2] - ei[3])
    return psi_plus, psi_minus


def slit_amplitude(geometry: ApertureGeometry, slit, x, with_common_phase=True):
    """Amplitude psi_plus or psi_minus at screen position(s) x.

    ``slit`` is ``"plus"`` (right slit, centred at +x0) or ``"minus"``.
    Scalar x gives a complex scalar; array x gives a complex array.
    """
    if slit not in ("plus", "minus"):
        raise DomainError(f"slit must be 'plus' or 'minus', got {slit!r}")
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    plus, minus = slit_amplitude_pair(geometry, xs, with_common_phase)
    out = plus if slit == "plus" else minus
    return complex(out[0]) if scalar else out
