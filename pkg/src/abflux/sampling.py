"""Seeded generation of simulated electron arrival positions.

Hits are drawn from the window-normalized screen density by inverse-CDF
transform of counter-based uniform variates: variate i is a pure function
of (seed, i) via a splitmix64 mix, so any hit is reproducible in isolation
and generation order, chunking, and worker count cannot change the output.

The density is tabulated on a dense uniform grid (8192 points by default);
the CDF is the cumulative trapezoid of that table, taken piecewise-linear
between nodes.  Likelihood code normalizes over the same grid so sampling
and inference share one domain.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDistributionError, DomainError
from .pattern import FluxState, density
from .slits import DEFAULT_WINDOW, ApertureGeometry

DEFAULT_GRID_POINTS = 8192

_SPLITMIX_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SPLITMIX_MULT1 = np.uint64(0xBF58476D1CE4E5B9)
_SPLITMIX_MULT2 = np.uint64(0x94D049BB133111EB)
_TWO_POW_53 = float(1 << 53)


@dataclass(frozen=True)
class SampleConfig:
    """Window, tabulation resolution, hit count, and seed for a run."""

    window: tuple = DEFAULT_WINDOW
    grid_points: int = DEFAULT_GRID_POINTS
    n_hits: int = 0
    seed: int = 0

    def __post_init__(self):
        x_min, x_max = (float(v) for v in self.window)
        if not (np.isfinite(x_min) and np.isfinite(x_max) and x_min < x_max):
            raise DomainError(f"window must satisfy x_min < x_max, got {self.window!r}")
        object.__setattr__(self, "window", (x_min, x_max))
        if int(self.grid_points) < 2:
            raise DomainError("grid_points must be at least 2")
        object.__setattr__(self, "grid_points", int(self.grid_points))
        if int(self.n_hits) < 0:
            raise DomainError("n_hits must be non-negative")
        object.__setattr__(self, "n_hits", int(self.n_hits))
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must fit an unsigned 64-bit integer")
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True)
class HitSet:
    """Ordered simulated arrival positions plus everything that produced
    them (geometry, flux state, sampling configuration)."""

    positions: np.ndarray
    config: SampleConfig
    flux: FluxState
    geometry: ApertureGeometry

    def __post_init__(self):
        positions = np.asarray(self.positions, dtype=float)
        if positions.ndim != 1:
            raise DomainError("hit positions must be a 1-D array")
        if positions.size != self.config.n_hits:
            raise DomainError(
                f"hit count {positions.size} does not match config.n_hits {self.config.n_hits}"
            )
        x_min, x_max = self.config.window
        if positions.size and not (
            np.all(positions >= x_min) and np.all(positions <= x_max)
        ):
            raise DomainError("hit positions must lie inside the window")
        object.__setattr__(self, "positions", positions)

    def __len__(self):
        return self.positions.size


@dataclass(frozen=True)
class GriddedDistribution:
    """Window-normalized density table: pdf at grid nodes and the
    piecewise-linear CDF through the cumulative-trapezoid node values."""

    positions: np.ndarray
    pdf: np.ndarray
    cdf: np.ndarray

    def pdf_at(self, x):
        return np.interp(x, self.positions, self.pdf)

    def cdf_at(self, x):
        return np.interp(x, self.positions, self.cdf, left=0.0, right=1.0)

    def ppf(self, u):
        """Inverse CDF (piecewise-linear interpolation between nodes)."""
        return np.interp(u, self.cdf, self.positions)


def _distribution_from_values(positions, values):
    """Build a GriddedDistribution from raw density samples on a grid."""
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise DegenerateDistributionError("density values must be finite")
    values = np.maximum(values, 0.0)   # rounding residue at fringe minima
    total = np.trapezoid(values, positions)
    if not (np.isfinite(total) and total > 0.0):
        raise DegenerateDistributionError(
            "density integrates to zero on the window; no distribution exists"
        )
    pdf = values / total
    steps = np.diff(positions)
    node_mass = np.concatenate([[0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * steps)])
    cdf = node_mass / node_mass[-1]
    return GriddedDistribution(positions=positions, pdf=pdf, cdf=cdf)


def normalized_pdf_cdf(geometry, flux, window, grid_points=DEFAULT_GRID_POINTS):
    """Window-normalized pdf and piecewise-linear cdf of the screen density.

    Raises :class:`DegenerateDistributionError` if the density integrates
    to zero over the window.
    """
    x_min, x_max = (float(v) for v in window)
    if not (np.isfinite(x_min) and np.isfinite(x_max) and x_min < x_max):
        raise DomainError(f"window must satisfy x_min < x_max, got {window!r}")
    if int(grid_points) < 2:
        raise DomainError("grid_points must be at least 2")
    positions = np.linspace(x_min, x_max, int(grid_points))
    return _distribution_from_values(positions, density(geometry, flux, positions))


def uniform_variates(seed, start, stop):
    """Counter-based uniforms in [0, 1) for hit indices [start, stop).

    Variate i depends only on (seed, i) — splitmix64 of seed + (i+1)*gamma
    — so any index range can be generated independently and identically.
    """
    if not 0 <= start <= stop:
        raise DomainError("need 0 <= start <= stop")
    idx = np.arange(start, stop, dtype=np.uint64)
    z = np.uint64(seed) + (idx + np.uint64(1)) * _SPLITMIX_GAMMA
    z = (z ^ (z >> np.uint64(30))) * _SPLITMIX_MULT1
    z = (z ^ (z >> np.uint64(27))) * _SPLITMIX_MULT2
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) / _TWO_POW_53


def sample_hits(geometry, flux, config: SampleConfig, workers=None) -> HitSet:
    """Draw config.n_hits arrival positions from the window-normalized
    density by inverse-CDF transform of the counter-based variates.

    ``workers`` > 1 splits the hit-index range across a thread pool; since
    variate i depends only on (seed, i), the result is bit-identical for
    any worker count.  Identical (geometry, flux, config) always give a
    bit-identical HitSet.
    """
    dist = normalized_pdf_cdf(geometry, flux, config.window, config.grid_points)
    n = config.n_hits

    def chunk(start, stop):
        return dist.ppf(uniform_variates(config.seed, start, stop))

    workers = 1 if workers is None else int(workers)
    if workers <= 1 or n < 2 * workers:
        positions = chunk(0, n)
    else:
        bounds = np.linspace(0, n, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(chunk, bounds[:-1], bounds[1:])
        positions = np.concatenate(list(parts))
    return HitSet(positions=positions, config=config, flux=flux, geometry=geometry)
