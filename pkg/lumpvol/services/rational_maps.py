"""Rational maps S^2 -> CP^k: evaluation, reduction, pullback fields."""

import math
from typing import Optional, Sequence

import numpy as np

from lumpvol.core.config import fs_scale, get_settings
from lumpvol.core.exceptions import (
    DegenerateTupleException,
    SingularFieldException,
    ValidationException,
)
from lumpvol.core.logging import get_logger
from lumpvol.models.rational_map import Divisor, ModuliChart, PolyTuple, RootLocation
from lumpvol.models.sphere import ComplexArray, FloatArray, ScalarField, SphereGrid
from lumpvol.services.sphere_geometry import integrate

logger = get_logger(__name__)

CLUSTER_TOL = 1e-4


def evaluate(P: PolyTuple, z: complex) -> ComplexArray:
    """(p_0(z), ..., p_k(z)); at z = infinity the leading coefficients."""
    if isinstance(z, float) and math.isinf(z):
        return P.coeffs[:, 0].copy()
    return np.array([np.polyval(row, z) for row in P.coeffs], dtype=np.complex128)


def evaluate_north(P: PolyTuple, w: complex) -> ComplexArray:
    """Tuple in the chart w = 1/z: z^r p_i(1/w) = sum_j c_ij w^j."""
    return np.array([np.polyval(row[::-1], w) for row in P.coeffs], dtype=np.complex128)


def homogeneous_values(coeffs: ComplexArray, grid: SphereGrid) -> ComplexArray:
    """p(z) / (1 + |z|^2)^{d/2} on the grid for rows of degree <= d.

    Evaluated as sum_j c_j Z0^{d-j} Z1^j so nodes near z = infinity stay bounded.
    Input (rows, d+1), output (rows, nlat, nlon).
    """
    coeffs = np.atleast_2d(coeffs)
    d = coeffs.shape[1] - 1
    j = np.arange(d + 1)[:, None, None]
    monomials = grid.Z0[None] ** (d - j) * grid.Z1[None] ** j
    return np.einsum("ij,jab->iab", coeffs, monomials, optimize=True)


def sections(P: PolyTuple, grid: SphereGrid) -> ComplexArray:
    """Unit-normalized sections sigma_i = p_i / (1 + |z|^2)^{r/2}."""
    return homogeneous_values(P.coeffs, grid)


def section_norm_field(P: PolyTuple, grid: SphereGrid) -> ScalarField:
    """n(z) = sum_i |p_i(z)|^2 / (1 + |z|^2)^r."""
    sigma = sections(P, grid)
    return ScalarField(grid, np.sum(np.abs(sigma) ** 2, axis=0))


def boundary_proximity(P: PolyTuple, grid: SphereGrid) -> float:
    """min n / max n over the grid; 0 on the boundary of the moduli space."""
    n = section_norm_field(P, grid).values
    return float(np.min(n) / np.max(n))


def derivative_coeffs(P: PolyTuple) -> ComplexArray:
    """Coefficients of p_i' as rows of degree <= r - 1."""
    if P.r == 0:
        return np.zeros((P.k + 1, 1), dtype=np.complex128)
    return np.array([np.polyder(row) for row in P.coeffs], dtype=np.complex128)


def wronskian_coeffs(P: PolyTuple) -> ComplexArray:
    """Rows p_i p_j' - p_j p_i' (i < j), each padded to degree 2r - 2."""
    r = P.r
    if r == 0:
        return np.zeros((1, 1), dtype=np.complex128)
    deriv = derivative_coeffs(P)
    width = 2 * r - 1
    rows = []
    for i in range(P.k + 1):
        for j in range(i + 1, P.k + 1):
            w = np.polysub(
                np.polymul(P.coeffs[i], deriv[j]), np.polymul(P.coeffs[j], deriv[i])
            )
            w = np.atleast_1d(w)[-width:]
            rows.append(np.concatenate([np.zeros(width - w.size), w]))
    return np.array(rows, dtype=np.complex128)


def interior_norm(
    P: PolyTuple, grid: SphereGrid, sing_tol: Optional[float]
) -> FloatArray:
    tol = sing_tol if sing_tol is not None else get_settings().SING_TOL
    n = section_norm_field(P, grid).values
    scale = float(np.max(n))
    if scale == 0.0 or float(np.min(n)) < tol * scale:
        raise SingularFieldException(float(np.min(n)), tol * max(scale, 1.0))
    return n


def curvature_field(
    P: PolyTuple, grid: SphereGrid, sing_tol: Optional[float] = None
) -> ScalarField:
    """sqrt(-1) Lambda F_H = 2 pi r - (1/2) Delta log n, with integral 2 pi r.

    Evaluated through the Wronskians: 2 pi sum_{i<j} |W_ij|^2 (1+|z|^2)^{2-2r} / n^2.
    """
    n = interior_norm(P, grid, sing_tol)
    if P.r == 0:
        return ScalarField(grid, np.zeros(grid.shape))
    W = homogeneous_values(wronskian_coeffs(P), grid)
    return ScalarField(grid, 2.0 * np.pi * np.sum(np.abs(W) ** 2, axis=0) / n**2)


def extended_curvature(
    P: PolyTuple, grid: SphereGrid, sing_tol: Optional[float] = None
) -> ScalarField:
    """Curvature of the reduced tuple: the smooth extension across a stratum."""
    _, reduced = reduce(P)
    return curvature_field(reduced, grid, sing_tol)


def energy_density(
    P: PolyTuple, grid: SphereGrid, normalization: Optional[str] = None
) -> ScalarField:
    """|d phi|^2 of the holomorphic map: twice the pulled-back area density."""
    kappa = fs_scale(normalization or get_settings().TARGET_FS_NORMALIZATION)
    curv = curvature_field(P, grid)
    return ScalarField(grid, kappa * curv.values)


def energy(
    P: PolyTuple, grid: SphereGrid, normalization: Optional[str] = None
) -> float:
    """Dirichlet energy; 2r (unit-area target) or 2 pi r (quotient target)."""
    return integrate(energy_density(P, grid, normalization)).real


def variation(chart: ModuliChart, alpha: int) -> ComplexArray:
    """Unit coefficient direction e_{i(alpha), j(alpha)} of a chart coordinate."""
    directions = chart.directions()
    if not 0 <= alpha < len(directions):
        raise ValidationException(
            f"chart direction {alpha} outside 0..{len(directions) - 1}", field="alpha"
        )
    i, j = directions[alpha]
    direction = np.zeros((chart.k + 1, chart.r + 1), dtype=np.complex128)
    direction[i, j] = 1.0
    return direction


def variation_for_entry(chart: ModuliChart, entry: tuple[int, int]) -> ComplexArray:
    """Direction of a coefficient entry; rejects the chart-fixed entry."""
    if entry == chart.fixed_entry:
        raise ValidationException(
            f"coefficient {entry} is fixed by the chart", field="alpha"
        )
    return variation(chart, chart.directions().index(entry))


def variation_sections(chart: ModuliChart, grid: SphereGrid) -> ComplexArray:
    """Normalized sections of every chart direction, shape (q, k+1, nlat, nlon)."""
    out = np.zeros((chart.q, chart.k + 1) + grid.shape, dtype=np.complex128)
    mono = homogeneous_values(np.eye(chart.r + 1, dtype=np.complex128), grid)
    for alpha, (i, j) in enumerate(chart.directions()):
        out[alpha, i] = mono[j]
    return out


def variation_derivative_sections(chart: ModuliChart, grid: SphereGrid) -> ComplexArray:
    """Normalized z-derivatives of every direction (degree r - 1 normalization)."""
    out = np.zeros((chart.q, chart.k + 1) + grid.shape, dtype=np.complex128)
    if chart.r == 0:
        return out
    for alpha, (i, j) in enumerate(chart.directions()):
        power = chart.r - j
        if power == 0:
            continue
        row = np.zeros(chart.r, dtype=np.complex128)
        row[j] = power  # d/dz z^power = power z^{power-1}
        out[alpha, i] = homogeneous_values(row[None, :], grid)[0]
    return out


def _trim(row: ComplexArray, tol: float) -> ComplexArray:
    nz = np.flatnonzero(np.abs(row) > tol)
    return row[nz[0] :] if nz.size else np.zeros(0, dtype=np.complex128)


def _vanishing_order(row: ComplexArray, c: complex, tol: float, cap: int) -> int:
    """Number of consecutive derivatives of row vanishing at c (relative test)."""
    order = 0
    poly = row
    while order < cap and poly.size > 1:
        scale = np.sum(np.abs(poly) * max(1.0, abs(c)) ** np.arange(poly.size)[::-1])
        if abs(np.polyval(poly, c)) > tol * scale:
            break
        order += 1
        poly = np.polyder(poly)
    return order


def _cluster(roots: ComplexArray) -> list[tuple[complex, int]]:
    remaining = list(roots)
    clusters: list[tuple[complex, int]] = []
    while remaining:
        seed = remaining.pop(0)
        members = [seed]
        keep = []
        for other in remaining:
            if abs(other - seed) <= CLUSTER_TOL * max(1.0, abs(seed)):
                members.append(other)
            else:
                keep.append(other)
        remaining = keep
        clusters.append((complex(np.mean(members)), len(members)))
    return clusters


def reduce(P: PolyTuple, root_tol: Optional[float] = None) -> tuple[Divisor, PolyTuple]:
    """Split off the common-root divisor E and return the coprime remainder.

    deg E + deg(reduced) = r. Multiplicity at infinity is r minus the largest
    row degree.
    """
    tol = root_tol if root_tol is not None else get_settings().ROOT_TOL
    scale = float(np.max(np.abs(P.coeffs)))
    if scale == 0.0:
        raise DegenerateTupleException(P.k, P.r)

    trimmed = [_trim(row, tol * scale) for row in P.coeffs]
    nonzero = [row for row in trimmed if row.size]
    max_degree = max(row.size - 1 for row in nonzero)
    points: list[tuple[RootLocation, int]] = []
    if max_degree < P.r:
        points.append((math.inf, P.r - max_degree))

    lowest = min(nonzero, key=lambda row: row.size)
    finite: list[tuple[complex, int]] = []
    if lowest.size > 1:
        for center, size in _cluster(np.roots(lowest)):
            mult = min(_vanishing_order(row, center, tol, size) for row in nonzero)
            if mult > 0:
                finite.append((center, mult))
    points.extend(finite)

    reduced_rows = []
    for row in trimmed:
        quotient = row
        if row.size:
            for center, mult in finite:
                for _ in range(mult):
                    quotient, _ = np.polydiv(quotient, np.array([1.0, -center]))
        reduced_rows.append(quotient)

    divisor = Divisor(tuple(points))
    r_new = P.r - divisor.degree
    coeffs = np.zeros((P.k + 1, r_new + 1), dtype=np.complex128)
    for i, row in enumerate(reduced_rows):
        row = np.atleast_1d(row)[-(r_new + 1) :]
        if row.size:
            coeffs[i, r_new + 1 - row.size :] = row
    if divisor.degree:
        logger.debug("tuple_reduced", divisor_degree=divisor.degree, degree=r_new)
    return divisor, PolyTuple(coeffs)


def strata_parameter_count(P: PolyTuple) -> int:
    """Dimension of the stratum Sym^l x Hol_{r-l} containing P: q - k l."""
    divisor, _ = reduce(P)
    l = divisor.degree
    return l + (P.k + 1) * (P.r - l) + P.k


def random_tuple(
    rng: np.random.Generator,
    k: int,
    r: int,
    base: Optional[Sequence[Sequence[complex]]] = None,
    spread: float = 1.0,
) -> PolyTuple:
    """Complex Gaussian tuple, optionally a perturbation of ``base``."""
    shape = (k + 1, r + 1)
    noise = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    noise *= spread / math.sqrt(2.0)
    if base is None:
        return PolyTuple(noise)
    return PolyTuple(np.asarray(base, dtype=np.complex128) + noise)
