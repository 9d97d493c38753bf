"""Two-slit interference with an enclosed magnetic flux in superposition.

Screen patterns for definite and superposed flux states, seeded electron
arrival simulation, and likelihood inference of the superposition angles
from accumulated hits.
"""

from ._version import __version__
from .errors import DegenerateDistributionError, DomainError
from .fresnel import fresnel_ei, fresnel_ei_grid
from .inference import (
    Checkpoint,
    HypothesisResult,
    LikelihoodSurface,
    SequentialTrace,
    canonical_angles,
    discriminate,
    fit_mle,
    log_likelihood,
    segment_slopes,
    sequential_trace,
)
from .pattern import (
    DensityGrid,
    FluxState,
    PhysicalFlux,
    ScreenGrid,
    basis_density,
    center_of_mass,
    density,
    density_grid,
    flux_parameter,
    mixture_density,
    pattern_components,
)
from .sampling import (
    DEFAULT_GRID_POINTS,
    HitSet,
    SampleConfig,
    normalized_pdf_cdf,
    sample_hits,
    uniform_variates,
)
from .slits import (
    DEFAULT_WINDOW,
    ApertureGeometry,
    GeometryConstants,
    de_broglie_wavelength,
    geometry_constants,
    slit_amplitude,
    slit_amplitude_pair,
)

__all__ = [
    "__version__",
    "ApertureGeometry",
    "Checkpoint",
    "DEFAULT_GRID_POINTS",
    "DEFAULT_WINDOW",
    "DegenerateDistributionError",
    "DensityGrid",
    "DomainError",
    "FluxState",
    "GeometryConstants",
    "HitSet",
    "HypothesisResult",
    "LikelihoodSurface",
    "PhysicalFlux",
    "SampleConfig",
    "ScreenGrid",
    "SequentialTrace",
    "basis_density",
    "canonical_angles",
    "center_of_mass",
    "de_broglie_wavelength",
    "density",
    "density_grid",
    "discriminate",
    "fit_mle",
    "flux_parameter",
    "fresnel_ei",
    "fresnel_ei_grid",
    "geometry_constants",
    "log_likelihood",
    "mixture_density",
    "normalized_pdf_cdf",
    "pattern_components",
    "sample_hits",
    "segment_slopes",
    "sequential_trace",
    "slit_amplitude",
    "slit_amplitude_pair",
    "uniform_variates",
]
