"""Command-line front end.

Subcommands: pattern, figure3, figure4, simulate, infer, discriminate,
sweep.  All parameters come from built-in defaults (the thought-experiment
geometry), optionally overridden by a JSON config file (``--config``),
optionally overridden again by explicit flags.  Every output file carries
a ``# key=value`` provenance block sufficient to regenerate it.

Exit codes: 0 success, 1 usage error, 2 domain/validation error, 3 I/O
error.  ``main(argv)`` returns the code; the console script wraps it.
"""

from __future__ import annotations

import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import click
import numpy as np

from ._version import __version__
from .errors import DomainError
from .inference import discriminate as run_discriminate
from .inference import fit_mle
from .io import (
    format_number,
    geometry_comments,
    read_hits_csv,
    window_comments,
    write_hits_csv,
    write_hypothesis_csv,
    write_panel_csv,
    write_pattern_csv,
    write_pgm,
    write_surface_csv,
)
from .pattern import FluxState, ScreenGrid, density_grid, pattern_components
from .sampling import SampleConfig, sample_hits
from .slits import ApertureGeometry

_DEFAULTS = {
    "source_to_slit_m": 10.0,
    "slit_to_screen_m": 1.0,
    "wavelength_m": 5.0e-12,
    "slit_half_width_m": 0.25e-6,
    "slit_half_separation_m": 1.0e-6,
    "theta": 0.0,
    "phi": 0.0,
    "omega": 0.0,
    "window_min_m": -2.0e-5,
    "window_max_m": 2.0e-5,
    "grid_points": 8192,
    "screen_points": 512,
    "param_points": 256,
    "n_hits": 10000,
    "seed": 0,
    "theta_points": 181,
    "phi_points": 181,
    "scan_points": 91,
    "workers": None,
}
_INT_KEYS = frozenset(
    {
        "grid_points",
        "screen_points",
        "param_points",
        "n_hits",
        "seed",
        "theta_points",
        "phi_points",
        "scan_points",
    }
)
_MATCH_KEYS = (
    "source_to_slit_m",
    "slit_to_screen_m",
    "wavelength_m",
    "slit_half_width_m",
    "slit_half_separation_m",
    "window_min_m",
    "window_max_m",
)
_STRIPE_ROWS = 64   # pattern heatmaps repeat the single density row this often


@dataclass(frozen=True)
class RunConfig:
    """Merged parameter set plus the keys the user set explicitly."""

    values: dict
    explicit: frozenset

    def __getitem__(self, key):
        return self.values[key]

    def geometry(self) -> ApertureGeometry:
        return ApertureGeometry(
            source_to_slit=self.values["source_to_slit_m"],
            slit_to_screen=self.values["slit_to_screen_m"],
            slit_half_width=self.values["slit_half_width_m"],
            slit_half_separation=self.values["slit_half_separation_m"],
            wavelength=self.values["wavelength_m"],
        )

    def flux(self) -> FluxState:
        return FluxState(
            theta=self.values["theta"],
            phi=self.values["phi"],
            omega=self.values["omega"],
        )

    def window(self):
        return (self.values["window_min_m"], self.values["window_max_m"])

    def sample_config(self) -> SampleConfig:
        return SampleConfig(
            window=self.window(),
            grid_points=self.values["grid_points"],
            n_hits=self.values["n_hits"],
            seed=self.values["seed"],
        )

    def workers(self) -> int:
        value = self.values.get("workers")
        if value is None:
            return os.cpu_count() or 1
        return max(1, int(value))


def _merge(config_path, overrides) -> RunConfig:
    """Defaults, then JSON config fields, then explicit flag values."""
    values = dict(_DEFAULTS)
    explicit = set()
    if config_path is not None:
        with open(config_path, "r", encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise DomainError(f"{config_path}: invalid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise DomainError(f"{config_path}: config must be a JSON object")
        unknown = sorted(set(doc) - set(_DEFAULTS))
        if unknown:
            raise DomainError(
                f"{config_path}: unknown config keys: {', '.join(unknown)}"
            )
        for key, value in doc.items():
            if value is not None:
                values[key] = value
                explicit.add(key)
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
            explicit.add(key)
    for key in _INT_KEYS:
        value = values[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise DomainError(f"config key '{key}' must be an integer")
        if isinstance(value, float):
            if not value.is_integer():
                raise DomainError(f"config key '{key}' must be an integer")
            value = int(value)
        values[key] = int(value)
    for key in set(_DEFAULTS) - _INT_KEYS - {"workers"}:
        value = values[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise DomainError(f"config key '{key}' must be a number")
        values[key] = float(value)
    if values["workers"] is not None:
        try:
            values["workers"] = int(values["workers"])
        except (TypeError, ValueError):
            raise DomainError("config key 'workers' must be an integer") from None
        if values["workers"] < 1:
            raise DomainError("config key 'workers' must be at least 1")
    return RunConfig(values=values, explicit=frozenset(explicit))


def _add_options(options):
    def wrap(func):
        for option in reversed(options):
            func = option(func)
        return func

    return wrap


_CONFIG_OPTIONS = [
    click.option(
        "--config",
        "config_path",
        metavar="JSON",
        default=None,
        help="JSON config file; explicit flags override its fields.",
    ),
    click.option(
        "--source-to-slit",
        "source_to_slit_m",
        type=float,
        default=None,
        metavar="M",
        help="Source to slit-plane distance in meters.",
    ),
    click.option(
        "--slit-to-screen",
        "slit_to_screen_m",
        type=float,
        default=None,
        metavar="M",
        help="Slit-plane to screen distance in meters.",
    ),
    click.option(
        "--wavelength",
        "wavelength_m",
        type=float,
        default=None,
        metavar="M",
        help="De Broglie wavelength in meters.",
    ),
    click.option(
        "--slit-half-width",
        "slit_half_width_m",
        type=float,
        default=None,
        metavar="M",
        help="Half-width of each slit in meters.",
    ),
    click.option(
        "--slit-half-separation",
        "slit_half_separation_m",
        type=float,
        default=None,
        metavar="M",
        help="Half-distance between slit centers in meters.",
    ),
    click.option(
        "--window-min",
        "window_min_m",
        type=float,
        default=None,
        metavar="M",
        help="Lower edge of the screen window in meters.",
    ),
    click.option(
        "--window-max",
        "window_max_m",
        type=float,
        default=None,
        metavar="M",
        help="Upper edge of the screen window in meters.",
    ),
    click.option(
        "--grid-points",
        "grid_points",
        type=int,
        default=None,
        help="Density-grid resolution for sampling and likelihoods.",
    ),
    click.option(
        "--workers",
        type=int,
        default=None,
        envvar="ABFLUX_WORKERS",
        help="Thread count for data-parallel work (env: ABFLUX_WORKERS).",
    ),
]
_FLUX_OPTIONS = [
    click.option("--theta", type=float, default=None,
                 help="Flux superposition angle in [0, pi] (radians)."),
    click.option("--phi", type=float, default=None,
                 help="Flux phase magnitude (radians)."),
    click.option("--omega", type=float, default=None,
                 help="Relative superposition phase (recorded, never observable)."),
]
_SAMPLE_OPTIONS = [
    click.option("--n-hits", "n_hits", type=int, default=None,
                 help="Number of electron arrivals to draw."),
    click.option("--seed", type=int, default=None,
                 help="64-bit unsigned sampling seed."),
]
_SCREEN_OPTION = click.option(
    "--screen-points",
    "screen_points",
    type=int,
    default=None,
    help="Number of screen positions per emitted curve.",
)
_PARAM_OPTION = click.option(
    "--param-points",
    "param_points",
    type=int,
    default=None,
    help="Number of parameter values per figure panel.",
)
_INFER_OPTIONS = [
    click.option("--theta-points", "theta_points", type=int, default=None,
                 help="Theta resolution of the likelihood scan."),
    click.option("--phi-points", "phi_points", type=int, default=None,
                 help="Phi resolution of the likelihood scan."),
    click.option("--scan-points", "scan_points", type=int, default=None,
                 help="Per-axis resolution of the internal scans in discriminate."),
    click.option(
        "--allow-mismatch",
        is_flag=True,
        help="Analyze under the configured model even if the hits file "
        "provenance disagrees with it.",
    ),
]


@click.group()
@click.version_option(version=__version__, prog_name="abflux")
def cli():
    """Two-slit interference with a superposed enclosed magnetic flux."""


def _pgm_path(csv_path):
    stem, _ = os.path.splitext(str(csv_path))
    return stem + ".pgm"


def _echo_wrote(path):
    click.echo(f"wrote {path}")


@cli.command()
@_add_options(_CONFIG_OPTIONS + _FLUX_OPTIONS + [_SCREEN_OPTION])
@click.option("--out", "out_path", default="pattern.csv", show_default=True,
              help="Output CSV path.")
@click.option("--heatmap", is_flag=True,
              help="Also write the density as a fringe-stripe graymap.")
def pattern(out_path, heatmap, **kwargs):
    """Screen density for one flux state, as x_m,density rows."""
    run = _merge(kwargs.pop("config_path"), kwargs)
    grid = density_grid(
        run.geometry(), run.flux(),
        ScreenGrid.uniform(*run.window(), run["screen_points"]),
    )
    write_pattern_csv(out_path, grid, run.flux(), [("command", "pattern")])
    _echo_wrote(out_path)
    if heatmap:
        write_pgm(_pgm_path(out_path), np.tile(grid.values, (_STRIPE_ROWS, 1)))
        _echo_wrote(_pgm_path(out_path))


def _panel_comments(command, run, panel_key, panel_value):
    return (
        [("command", command), (panel_key, format_number(panel_value))]
        + geometry_comments(run.geometry())
        + window_comments(run.window())
        + [
            ("screen_points", format_number(run["screen_points"])),
            ("param_points", format_number(run["param_points"])),
        ]
    )


@cli.command()
@_add_options(_CONFIG_OPTIONS + [_SCREEN_OPTION, _PARAM_OPTION])
@click.option("--out-dir", "out_dir", default=".", show_default=True,
              help="Directory for the three panel CSVs.")
@click.option("--heatmap", is_flag=True, help="Also write one graymap per panel.")
def figure3(out_dir, heatmap, **kwargs):
    """Density panels over (x, phi in [0, 2 pi]) for theta in {0, pi, pi/2}."""
    run = _merge(kwargs.pop("config_path"), kwargs)
    x = np.linspace(*run.window(), run["screen_points"])
    comp_a, comp_b, comp_c = pattern_components(run.geometry(), x)
    phis = np.linspace(0.0, 2.0 * np.pi, run["param_points"])
    for name, theta in (("theta_0", 0.0), ("theta_pi", np.pi),
                        ("theta_pi_2", np.pi / 2.0)):
        matrix = (
            comp_a[None, :]
            + np.cos(phis)[:, None] * comp_b[None, :]
            + (np.sin(phis) * np.cos(theta))[:, None] * comp_c[None, :]
        )
        path = os.path.join(out_dir, f"figure3_{name}.csv")
        write_panel_csv(path, x, "phi", phis, matrix,
                        _panel_comments("figure3", run, "panel_theta", theta))
        _echo_wrote(path)
        if heatmap:
            write_pgm(_pgm_path(path), matrix)
            _echo_wrote(_pgm_path(path))


@cli.command()
@_add_options(_CONFIG_OPTIONS + [_SCREEN_OPTION, _PARAM_OPTION])
@click.option("--out-dir", "out_dir", default=".", show_default=True,
              help="Directory for the three panel CSVs.")
@click.option("--heatmap", is_flag=True, help="Also write one graymap per panel.")
def figure4(out_dir, heatmap, **kwargs):
    """Density panels over (x, theta in [0, pi]) for phi in {pi/4, pi/2, pi}."""
    run = _merge(kwargs.pop("config_path"), kwargs)
    x = np.linspace(*run.window(), run["screen_points"])
    comp_a, comp_b, comp_c = pattern_components(run.geometry(), x)
    thetas = np.linspace(0.0, np.pi, run["param_points"])
    for name, phi in (("phi_pi_4", np.pi / 4.0), ("phi_pi_2", np.pi / 2.0),
                      ("phi_pi", np.pi)):
        matrix = (
            comp_a[None, :]
            + np.cos(phi) * comp_b[None, :]
            + (np.sin(phi) * np.cos(thetas))[:, None] * comp_c[None, :]
        )
        path = os.path.join(out_dir, f"figure4_{name}.csv")
        write_panel_csv(path, x, "theta", thetas, matrix,
                        _panel_comments("figure4", run, "panel_phi", phi))
        _echo_wrote(path)
        if heatmap:
            write_pgm(_pgm_path(path), matrix)
            _echo_wrote(_pgm_path(path))


@cli.command()
@_add_options(_CONFIG_OPTIONS + _FLUX_OPTIONS + _SAMPLE_OPTIONS)
@click.option("--out", "out_path", default="hits.csv", show_default=True,
              help="Output CSV path.")
def simulate(out_path, **kwargs):
    """Draw seeded electron arrivals and write an index,x_m CSV."""
    run = _merge(kwargs.pop("config_path"), kwargs)
    hits = sample_hits(run.geometry(), run.flux(), run.sample_config(),
                       workers=run.workers())
    write_hits_csv(out_path, hits)
    click.echo(f"wrote {out_path} ({len(hits)} hits)")


def _load_hits(path, run, allow_mismatch):
    """Read a hits file and reconcile its provenance with the config.

    Explicitly configured geometry/window values must agree with the file;
    on disagreement the run is refused unless --allow-mismatch was passed,
    in which case the configured model is used as given.  Values the user
    did not set are adopted from the file.
    """
    hits = read_hits_csv(path)
    file_values = {
        "source_to_slit_m": hits.geometry.source_to_slit,
        "slit_to_screen_m": hits.geometry.slit_to_screen,
        "wavelength_m": hits.geometry.wavelength,
        "slit_half_width_m": hits.geometry.slit_half_width,
        "slit_half_separation_m": hits.geometry.slit_half_separation,
        "window_min_m": hits.config.window[0],
        "window_max_m": hits.config.window[1],
    }
    mismatched = []
    for key in _MATCH_KEYS:
        if key not in run.explicit:
            continue
        configured = float(run[key])
        recorded = file_values[key]
        scale = max(abs(configured), abs(recorded))
        if abs(configured - recorded) > 1e-12 * scale:
            mismatched.append(
                f"{key}: configured {configured!r}, file has {recorded!r}"
            )
    if mismatched:
        if not allow_mismatch:
            raise DomainError(
                f"{path}: provenance mismatch; " + "; ".join(mismatched)
                + " (pass --allow-mismatch to analyze under the configured model)"
            )
        return hits, run.geometry(), run.window()
    return hits, hits.geometry, hits.config.window


@cli.command()
@click.argument("hits_file")
@_add_options(_CONFIG_OPTIONS + _INFER_OPTIONS)
@click.option("--out", "out_path", default="surface.csv", show_default=True,
              help="Output CSV path for the likelihood surface.")
def infer(hits_file, out_path, allow_mismatch, **kwargs):
    """Likelihood surface and maximum-likelihood angles for a hits file."""
    run = _merge(kwargs.pop("config_path"), kwargs)
    hits, geometry, window = _load_hits(hits_file, run, allow_mismatch)
    surface = fit_mle(
        hits, geometry=geometry, window=window,
        theta_points=run["theta_points"], phi_points=run["phi_points"],
        grid_points=run["grid_points"],
    )
    comments = (
        [("command", "infer"), ("input", str(hits_file))]
        + geometry_comments(geometry)
        + window_comments(window)
        + [("grid_points", format_number(run["grid_points"]))]
    )
    write_surface_csv(out_path, surface, comments)
    _echo_wrote(out_path)
    click.echo(
        "theta_hat=%.6f phi_hat=%.6f loglik_max=%.6f theta_flat=%s"
        % (surface.theta_hat, surface.phi_hat, surface.loglik_max,
           surface.theta_flat)
    )


@cli.command()
@click.argument("hits_file")
@_add_options(_CONFIG_OPTIONS + _INFER_OPTIONS)
@click.option("--out", "out_path", default="discriminate.csv", show_default=True,
              help="Output CSV path for the comparison row.")
def discriminate(hits_file, out_path, allow_mismatch, **kwargs):
    """Superposition-vs-definite-flux likelihood comparison for a hits file."""
    run = _merge(kwargs.pop("config_path"), kwargs)
    hits, geometry, window = _load_hits(hits_file, run, allow_mismatch)
    result = run_discriminate(
        hits, geometry=geometry, window=window,
        scan_points=run["scan_points"], phi_points=run["phi_points"],
        grid_points=run["grid_points"],
    )
    comments = (
        [("command", "discriminate"), ("input", str(hits_file))]
        + geometry_comments(geometry)
        + window_comments(window)
        + [
            ("grid_points", format_number(run["grid_points"])),
            ("scan_points", format_number(run["scan_points"])),
        ]
    )
    write_hypothesis_csv(out_path, result, comments)
    _echo_wrote(out_path)
    click.echo(
        "llr=%.6f n_hits=%d definite_direction=%s"
        % (result.llr, result.n_hits, result.definite_direction)
    )


def _parse_angle_list(text, flag):
    try:
        values = [float(part) for part in str(text).split(",") if part.strip()]
    except ValueError:
        raise DomainError(
            f"--{flag} must be a comma-separated list of radians, got {text!r}"
        ) from None
    if not values:
        raise DomainError(f"--{flag} must name at least one angle")
    return values


@cli.command()
@_add_options(_CONFIG_OPTIONS + [_SCREEN_OPTION])
@click.option("--thetas", "thetas_text", default="0", show_default=True,
              help="Comma-separated theta values (radians).")
@click.option("--phis", "phis_text", default="0", show_default=True,
              help="Comma-separated phi values (radians).")
@click.option("--out-dir", "out_dir", default=".", show_default=True,
              help="Directory for the per-point CSVs.")
def sweep(thetas_text, phis_text, out_dir, **kwargs):
    """Pattern CSVs for every (theta, phi) combination, in parallel."""
    run = _merge(kwargs.pop("config_path"), kwargs)
    thetas = _parse_angle_list(thetas_text, "thetas")
    phis = _parse_angle_list(phis_text, "phis")
    geometry = run.geometry()
    screen = ScreenGrid.uniform(*run.window(), run["screen_points"])
    points = [(theta, phi) for theta in thetas for phi in phis]

    def emit(point):
        theta, phi = point
        flux = FluxState(theta=theta, phi=phi, omega=run["omega"])
        grid = density_grid(geometry, flux, screen)
        path = os.path.join(
            out_dir, f"sweep_theta_{theta:.6g}_phi_{phi:.6g}.csv"
        )
        write_pattern_csv(path, grid, flux, [("command", "sweep")])
        return path

    with ThreadPoolExecutor(max_workers=run.workers()) as pool:
        for path in pool.map(emit, points):
            _echo_wrote(path)


def main(argv=None) -> int:
    """Run the CLI and map failures to documented exit codes."""
    try:
        cli.main(args=argv, prog_name="abflux", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return 1
    except DomainError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except OSError as exc:
        click.echo(f"i/o error: {exc}", err=True)
        return 3
    return 0


def entrypoint():
    sys.exit(main(sys.argv[1:]))
