"""Limiting L2 metric on the moduli space and its Fubini-Study reference."""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from lumpvol.core.config import fs_scale, get_settings
from lumpvol.core.exceptions import LumpVolException, NonHermitianException
from lumpvol.core.logging import get_logger
from lumpvol.models.metric import MetricMatrix
from lumpvol.models.rational_map import ModuliChart, PolyTuple
from lumpvol.models.sphere import ComplexArray, FloatArray, SphereGrid
from lumpvol.services.rational_maps import (
    boundary_proximity,
    interior_norm,
    sections,
    variation_sections,
)
from lumpvol.services.sphere_geometry import build_grid

logger = get_logger(__name__)

HERMITIAN_TOL = 1e-8
CLAMP_TOL = 1e-10


def projected_variations(
    P: PolyTuple, chart: ModuliChart, grid: SphereGrid, sing_tol: Optional[float] = None
) -> tuple[ComplexArray, ComplexArray, FloatArray]:
    """Chart variations with their component along the section removed.

    Returns (v_perp, sigma, n) with v_perp of shape (q, k+1, nlat, nlon);
    <v_perp_a, v_perp_b> / n is the pointwise quotient Fubini-Study pairing.
    """
    n = interior_norm(P, grid, sing_tol)
    sigma = sections(P, grid)
    V = variation_sections(chart, grid)
    along = np.einsum("aipq,ipq->apq", V, sigma.conj()) / n
    return V - along[:, None] * sigma[None], sigma, n


def fs_pairing(v_perp: ComplexArray, n: FloatArray) -> ComplexArray:
    """Pointwise (<v,w>|p|^2 - <v,p><p,w>) / |p|^4, shape (q, q, nlat, nlon)."""
    return np.einsum("aipq,bipq->abpq", v_perp, v_perp.conj()) / n


def orthogonality_defect(
    v_perp: ComplexArray, sigma: ComplexArray, n: FloatArray
) -> float:
    """max |<v_perp, sigma>| / n over directions and nodes."""
    inner = np.einsum("aipq,ipq->apq", v_perp, sigma.conj())
    return float(np.max(np.abs(inner) / n, initial=0.0))


def l2_metric_matrix(
    P: PolyTuple,
    grid: SphereGrid,
    chart: Optional[ModuliChart] = None,
    normalization: Optional[str] = None,
    sing_tol: Optional[float] = None,
    estimate_error: bool = False,
) -> MetricMatrix:
    """G[a][b] = kappa * int <d_a p, d_b p>_FS dvol over the unit-area sphere."""
    chart = chart or ModuliChart.containing(P)
    kappa = fs_scale(normalization or get_settings().TARGET_FS_NORMALIZATION)
    v_perp, sigma, n = projected_variations(P, chart, grid, sing_tol)
    G = kappa * np.einsum(
        "aipq,bipq,pq->ab", v_perp, v_perp.conj(), grid.weights / n, optimize=True
    )
    diagnostics = {
        "band_limit": grid.L,
        "boundary_proximity": float(np.min(n) / np.max(n)),
        "orthogonality_defect": orthogonality_defect(v_perp, sigma, n),
        "quadrature_error": None,
    }
    if estimate_error:
        finer = l2_metric_matrix(
            P, build_grid(2 * grid.L), chart, normalization, sing_tol
        )
        diagnostics["quadrature_error"] = float(
            np.max(np.abs(finer.matrix - G)) / max(np.max(np.abs(finer.matrix)), 1e-300)
        )
    return MetricMatrix(G, chart, diagnostics)


def fs_reference_metric(w: ComplexArray) -> MetricMatrix:
    """[delta (1 + |w|^2) - conj(w_a) w_b] / (1 + |w|^2)^2 in the same chart."""
    w = np.asarray(w, dtype=np.complex128)
    s = 1.0 + float(np.sum(np.abs(w) ** 2))
    G = (np.eye(w.size) * s - np.outer(w.conj(), w)) / s**2
    return MetricMatrix(G)


def volume_density(G: MetricMatrix) -> float:
    """det G for a Hermitian matrix, clamped to 0 within -1e-10."""
    scale = max(1.0, float(np.max(np.abs(G.matrix), initial=0.0)))
    defect = G.hermitian_defect()
    if defect > HERMITIAN_TOL * scale:
        raise NonHermitianException(defect, HERMITIAN_TOL * scale)
    det = float(np.linalg.det(0.5 * (G.matrix + G.matrix.conj().T)).real)
    if -CLAMP_TOL <= det < 0.0:
        return 0.0
    return det


def density_ratio(G: MetricMatrix, w: ComplexArray) -> float:
    """det G / det G_ref(w): chart-invariant volume density against Fubini-Study."""
    w = np.asarray(w, dtype=np.complex128)
    ref_det = (1.0 + float(np.sum(np.abs(w) ** 2))) ** (-(w.size + 1))
    return volume_density(G) / ref_det


@dataclass(frozen=True)
class GuardedValue:
    """A grid quantity re-evaluated at doubled band-limits near the boundary."""

    value: float
    proximity: float
    band_limit: int
    refinements: int
    error_estimate: Optional[float]


RETRYABLE = (LumpVolException, np.linalg.LinAlgError, FloatingPointError)


def guarded_evaluation(
    P: PolyTuple,
    L: int,
    evaluate: Callable[[SphereGrid], float],
    boundary_ratio: Optional[float] = None,
    max_refinements: Optional[int] = None,
    rel_tol: Optional[float] = None,
) -> GuardedValue:
    """Evaluate on the band-limit L grid, doubling L for near-boundary tuples.

    A numerical failure at one band-limit is retried at the next doubling;
    the last failure is re-raised when every band-limit fails.
    """
    settings = get_settings()
    if boundary_ratio is None:
        boundary_ratio = settings.BOUNDARY_RATIO
    if max_refinements is None:
        max_refinements = settings.MAX_BOUNDARY_REFINEMENTS
    rel_tol = rel_tol if rel_tol is not None else settings.REFINEMENT_TOL

    grid = build_grid(L)
    proximity = boundary_proximity(P, grid)
    near_boundary = proximity < boundary_ratio
    value: Optional[float] = None
    failure: Optional[BaseException] = None
    try:
        value = evaluate(grid)
    except RETRYABLE as exc:
        failure = exc
    if value is not None and not near_boundary:
        return GuardedValue(value, proximity, L, 0, None)

    change: Optional[float] = None
    refinements = 0
    while refinements < max_refinements:
        if failure is not None:
            logger.info(
                "evaluation_failed",
                band_limit=L,
                error=getattr(failure, "error_code", type(failure).__name__),
            )
        L *= 2
        refinements += 1
        try:
            refined = evaluate(build_grid(L))
        except RETRYABLE as exc:
            failure = exc
            continue
        failure = None
        if value is not None:
            change = abs(refined - value) / max(abs(refined), 1e-300)
        value = refined
        if not near_boundary or (change is not None and change < rel_tol):
            break
    if value is None:
        assert failure is not None
        raise failure
    logger.info(
        "band_limit_refinement",
        proximity=proximity,
        band_limit=L,
        refinements=refinements,
        change=change,
    )
    return GuardedValue(value, proximity, L, refinements, change)
