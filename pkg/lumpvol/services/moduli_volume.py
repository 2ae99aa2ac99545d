"""Monte Carlo volumes of the moduli space against the Fubini-Study measure."""

import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Sequence

import numpy as np

from lumpvol.core.config import get_settings
from lumpvol.core.exceptions import ValidationException
from lumpvol.core.logging import get_logger
from lumpvol.models.rational_map import ModuliChart
from lumpvol.models.sphere import ComplexArray, SphereGrid
from lumpvol.models.volume import SampleRecord, VolumeEstimate
from lumpvol.models.vortex import VortexConfig
from lumpvol.services.kw_vortex import norm_function, psi_solve, vortex_metric
from lumpvol.services.l2_metric import (
    density_ratio,
    fs_reference_metric,
    guarded_evaluation,
    l2_metric_matrix,
)
from lumpvol.tasks.sampling import SampleTask, run_samples
from lumpvol.tasks.solver_tasks import robust_kw_solve

logger = get_logger(__name__)


@dataclass(frozen=True)
class ChartSample:
    """FS-uniform point of CP^q in the chart fixing its largest entry."""

    fixed: int
    w: ComplexArray


def fs_volume(q: int) -> float:
    """pi^q / q!: Fubini-Study volume of CP^q."""
    return math.pi**q / math.factorial(q)


def sample_parameter(q: int, rng: np.random.Generator) -> ChartSample:
    """Projectivized standard complex Gaussian in C^{q+1}."""
    if q < 1:
        raise ValidationException(f"q must be >= 1, got {q}", field="q")
    g = rng.standard_normal(q + 1) + 1j * rng.standard_normal(q + 1)
    fixed = int(np.argmax(np.abs(g)))
    return ChartSample(fixed, np.delete(g / g[fixed], fixed))


def _summarize(
    records: Sequence[SampleRecord],
    prefactor: float,
    seed: int,
    L: int,
    config: Dict[str, Any],
) -> VolumeEstimate:
    ratios = np.array([r.ratio for r in records if not r.failed], dtype=float)
    failures = sum(1 for r in records if r.failed)
    m = ratios.size
    mean = prefactor * float(np.sum(ratios)) / m if m else float("nan")
    stderr = float("nan")
    if m > 1:
        stderr = prefactor * float(np.std(ratios, ddof=1)) / math.sqrt(m)
    boundary = sum(1 for r in records if r.near_boundary)
    total = len(records)
    max_failures = get_settings().MAX_FAILURE_FRACTION
    valid = m > 0 and (failures / total if total else 0.0) <= max_failures
    estimate = VolumeEstimate(
        mean=mean,
        stderr=stderr,
        n_samples=m,
        seed=seed,
        boundary_fraction=boundary / total if total else 0.0,
        failures=failures,
        grid_L=L,
        valid=valid,
        config={**config, "prefactor": prefactor},
        samples=tuple(records),
    )
    if not valid:
        logger.warning(
            "estimate_invalid",
            failures=failures,
            n=total,
            max_failure_fraction=max_failures,
        )
    logger.info("volume_estimate", mean=mean, stderr=stderr, n=m, failures=failures)
    return estimate


def _moduli_run(
    r: int,
    k: int,
    n: int,
    seed: int,
    L: int,
    threads: Optional[int],
    ratio: Callable[[ModuliChart, ComplexArray, SphereGrid], float],
    config: Dict[str, Any],
) -> VolumeEstimate:
    if r < 1 or k < 1:
        raise ValidationException(
            f"need r >= 1 and k >= 1 (got r={r}, k={k})", field="r"
        )
    q = (k + 1) * (r + 1) - 1

    def evaluate(index: int, rng: np.random.Generator) -> SampleRecord:
        point = sample_parameter(q, rng)
        chart = ModuliChart(k, r, point.fixed)
        P = chart.to_tuple(point.w)
        guarded = guarded_evaluation(P, L, lambda grid: ratio(chart, point.w, grid))
        return SampleRecord(
            index=index,
            ratio=guarded.value,
            proximity=guarded.proximity,
            band_limit=guarded.band_limit,
            refinements=guarded.refinements,
            error_estimate=guarded.error_estimate,
        )

    records = run_samples(SampleTask(seed, evaluate), n, threads)
    config = {"r": r, "k": k, "q": q, "n": n, **config}
    return _summarize(records, fs_volume(q), seed, L, config)


def mc_volume_l2(
    r: int,
    k: int,
    n: int,
    seed: int,
    L: Optional[int] = None,
    threads: Optional[int] = None,
    normalization: Optional[str] = None,
) -> VolumeEstimate:
    """(pi^q/q!) E_FS[det G_L2 / det G_ref] over the parameter CP^q."""
    settings = get_settings()
    L = L if L is not None else settings.GRID_L
    normalization = normalization or settings.TARGET_FS_NORMALIZATION

    def ratio(chart: ModuliChart, w: ComplexArray, grid: SphereGrid) -> float:
        P = chart.to_tuple(w)
        return density_ratio(l2_metric_matrix(P, grid, chart, normalization), w)

    config = {"mode": "l2", "normalization": normalization}
    return _moduli_run(r, k, n, seed, L, threads, ratio, config)


def mc_volume_vortex(
    r: int,
    k: int,
    s2: float,
    n: int,
    seed: int,
    L: Optional[int] = None,
    threads: Optional[int] = None,
    normalization: Optional[str] = None,
) -> VolumeEstimate:
    """(pi^q/q!) E_FS[det g_s / det G_ref] at coupling s^2."""
    settings = get_settings()
    L = L if L is not None else settings.GRID_L
    normalization = normalization or settings.TARGET_FS_NORMALIZATION
    cfg = VortexConfig(s2, r, k)
    cfg.validate()

    def ratio(chart: ModuliChart, w: ComplexArray, grid: SphereGrid) -> float:
        P = chart.to_tuple(w)
        h = norm_function(P, grid, psi_solve(P, grid))
        sol = robust_kw_solve(h, cfg)
        report = vortex_metric(P, cfg, grid, chart, normalization, solution=sol)
        return density_ratio(report.g, w)

    config = {"mode": "vortex", "s2": s2, "normalization": normalization}
    return _moduli_run(r, k, n, seed, L, threads, ratio, config)


def calibrate_cpq(
    q: int,
    n: int,
    seed: int,
    mode: str = "ratio",
    threads: Optional[int] = None,
) -> VolumeEstimate:
    """Run the density-ratio pipeline with the Fubini-Study metric as the unknown.

    'ratio': FS-uniform samples, integrand det G_ref / det G_ref = 1.
    'polydisc': w uniform in the unit polydisc; the q+1 largest-entry charts
    tile CP^q, so the integrand is (q+1) pi^q det G_ref(w).
    """
    if q < 1:
        raise ValidationException(f"q must be >= 1, got {q}", field="q")
    if mode not in ("ratio", "polydisc"):
        raise ValidationException(f"unknown calibration mode {mode!r}", field="mode")

    def evaluate(index: int, rng: np.random.Generator) -> SampleRecord:
        if mode == "ratio":
            point = sample_parameter(q, rng)
            value = density_ratio(fs_reference_metric(point.w), point.w)
        else:
            radius = np.sqrt(rng.random(q))
            angle = 2.0 * np.pi * rng.random(q)
            w = radius * np.exp(1j * angle)
            value = float(np.linalg.det(fs_reference_metric(w).matrix).real)
        return SampleRecord(index=index, ratio=value)

    prefactor = fs_volume(q) if mode == "ratio" else (q + 1) * math.pi**q
    records = run_samples(SampleTask(seed, evaluate), n, threads)
    config = {"mode": f"calibrate-{mode}", "q": q, "n": n}
    return _summarize(records, prefactor, seed, 0, config)


def trimmed_mean(estimate: VolumeEstimate, fraction: float) -> float:
    """Mean after dropping the worst ``fraction`` of samples by boundary proximity."""
    kept = [s for s in estimate.samples if not s.failed]
    drop = int(math.floor(fraction * len(kept)))
    kept = sorted(kept, key=lambda s: (s.proximity, s.index))[drop:]
    kept.sort(key=lambda s: s.index)
    ratios = np.array([s.ratio for s in kept], dtype=float)
    return float(estimate.config["prefactor"] * np.sum(ratios) / ratios.size)


@dataclass(frozen=True)
class ConventionAudit:
    """Per-dimension scale factors c_q = (estimate / expected)^{1/q}."""

    factors: Dict[int, float]
    errors: Dict[int, float]
    common: float
    consistent: bool
    mis_pinned: bool


def convention_audit(
    entries: Sequence[tuple[int, VolumeEstimate, float]], sigmas: float = 3.0
) -> ConventionAudit:
    """Decide whether deviations from the expected volumes share one factor c."""
    factors: Dict[int, float] = {}
    errors: Dict[int, float] = {}
    for q, estimate, expected in entries:
        c = (estimate.mean / expected) ** (1.0 / q)
        factors[q] = c
        errors[q] = c * estimate.relative_error / q
    qs = sorted(factors)
    consistent = all(
        abs(factors[a] - factors[b]) <= sigmas * math.hypot(errors[a], errors[b])
        for i, a in enumerate(qs)
        for b in qs[i + 1 :]
    )
    weights = np.array([1.0 / max(errors[q], 1e-300) ** 2 for q in qs])
    values = np.array([factors[q] for q in qs])
    common = float(np.sum(weights * values) / np.sum(weights))
    spread = float(1.0 / math.sqrt(np.sum(weights)))
    mis_pinned = consistent and abs(common - 1.0) > sigmas * spread
    logger.info(
        "convention_audit", factors=factors, common=common, consistent=consistent
    )
    return ConventionAudit(factors, errors, common, consistent, mis_pinned)
