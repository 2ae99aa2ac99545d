"""Spectral calculus on the unit-area round sphere."""

from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from lumpvol.core.config import get_settings
from lumpvol.core.exceptions import NonZeroMeanException, ValidationException
from lumpvol.core.logging import get_logger
from lumpvol.models.sphere import (
    ComplexArray,
    ScalarField,
    SphereGrid,
    Values,
    build_sphere_grid,
)

logger = get_logger(__name__)

POISSON_MEAN_TOL = 1e-8


@lru_cache(maxsize=16)
def _cached_grid(L: int) -> SphereGrid:
    return build_sphere_grid(L)


def build_grid(L: int) -> SphereGrid:
    """Build (or reuse) the band-limit L quadrature grid."""
    if isinstance(L, bool) or not isinstance(L, (int, np.integer)) or L < 0:
        raise ValidationException(
            f"band-limit must be a non-negative integer, got {L}", field="L"
        )
    return _cached_grid(int(L))


def spherical_harmonic(grid: SphereGrid, l: int, m: int) -> ScalarField:
    """Y_l^m on the grid, orthonormal on the sphere of area 4 pi."""
    if abs(m) > l or l > grid.L:
        raise ValidationException(
            f"no harmonic (l={l}, m={m}) at L={grid.L}", field="l"
        )
    phase = np.exp(1j * m * grid.longitude)
    values = grid.legendre[abs(m), l][:, None] * phase[None, :]
    return ScalarField(grid, values)


def integrate(f: ScalarField) -> complex:
    """Integral over the unit-area sphere."""
    return f.grid.integrate(f.values)


def _as_values(f: ScalarField, values: ComplexArray) -> Values:
    return values.real if np.isrealobj(f.values) else values


def laplacian(f: ScalarField) -> ScalarField:
    """Positive Laplacian: eigenvalue 4 pi l(l+1) on degree-l harmonics."""
    grid = f.grid
    coeffs = grid.analyze(f.values) * grid.eigenvalues
    return ScalarField(grid, _as_values(f, grid.synthesize(coeffs)))


def poisson_solve(
    rhs: ScalarField, tol: float = POISSON_MEAN_TOL, project_mean: bool = False
) -> ScalarField:
    """Zero-mean solution of laplacian(f) = rhs.

    With project_mean the discrete mean of rhs is removed instead of checked,
    for sources that are zero-mean analytically but not under quadrature.
    """
    grid = rhs.grid
    mean = integrate(rhs)
    scale = max(1.0, rhs.sup())
    if project_mean:
        if abs(mean) > tol * scale:
            logger.debug("poisson_mean_projected", mean=abs(mean), scale=scale)
    elif abs(mean) > tol * scale:
        raise NonZeroMeanException(mean, tol * scale)
    coeffs = grid.analyze(rhs.values)
    coeffs[0, :] = 0.0
    coeffs[1:] /= grid.eigenvalues[1:]
    return ScalarField(grid, _as_values(rhs, grid.synthesize(coeffs)))


def conformal_derivative(f: ScalarField) -> ScalarField:
    """D f = (1 + |z|^2) df/dz = -e^{-i lam} (df/dt + (i / sin t) df/dlam)."""
    grid = f.grid
    coeffs = grid.analyze(f.values)
    d_theta = grid.synthesize(coeffs, table="dlegendre")
    ms = np.arange(-grid.L, grid.L + 1)
    d_lam = grid.synthesize(coeffs * (1j * ms)[None, :])
    sin = np.sin(grid.colatitude)[:, None]
    phase = np.exp(-1j * grid.longitude)[None, :]
    return ScalarField(grid, -phase * (d_theta + 1j * d_lam / sin))


def integrate_converged(
    integrand: Callable[[SphereGrid], complex],
    L: int,
    rel_tol: Optional[float] = None,
    max_doublings: int = 3,
) -> tuple[complex, int, float]:
    """Integrate a non-band-limited integrand with L-doubling until converged.

    Returns (value, final band-limit, last relative change).
    """
    rel_tol = rel_tol if rel_tol is not None else get_settings().REFINEMENT_TOL
    value = integrand(build_grid(L))
    change = float("inf")
    for _ in range(max_doublings):
        L *= 2
        refined = integrand(build_grid(L))
        change = abs(refined - value) / max(abs(refined), 1e-300)
        value = refined
        if change < rel_tol:
            break
    else:
        logger.info("quadrature_not_converged", band_limit=L, change=change)
    return value, L, change
