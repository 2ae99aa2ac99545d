"""Large-coupling sweeps: vortex metric and gauge field against their limits."""

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from lumpvol.core.config import get_settings
from lumpvol.core.exceptions import (
    DomainException,
    LumpVolException,
    ValidationException,
)
from lumpvol.core.logging import get_logger
from lumpvol.models.rational_map import ModuliChart, PolyTuple
from lumpvol.models.vortex import VortexConfig
from lumpvol.services.kw_vortex import (
    approx_solution,
    limit_solution,
    norm_function,
    psi_solve,
    vortex_metric,
)
from lumpvol.services.l2_metric import l2_metric_matrix
from lumpvol.services.sphere_geometry import build_grid
from lumpvol.tasks.solver_tasks import robust_kw_solve

logger = get_logger(__name__)

COLUMNS = ("g_diff", "phi_v_diff", "phi_inf_diff", "u_alpha_sup")


@dataclass(frozen=True)
class SweepRow:
    """Distances from the large-coupling limits at one s^2."""

    s2: float
    g_diff: float
    phi_v_diff: float
    phi_inf_diff: float
    u_alpha_sup: float
    slope: float
    residual: float
    iterations: int
    note: Optional[str] = None


@dataclass(frozen=True)
class SweepResult:
    """Sweep rows in increasing s^2 with least-squares log-log slopes."""

    rows: tuple[SweepRow, ...]
    slopes: Dict[str, Optional[float]] = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(row, name) for row in self.rows], dtype=float)

    def monotone_decreasing(self, name: str) -> bool:
        values = self.column(name)
        return bool(np.all(np.diff(values) <= 0.0))


def geometric_s2(r: int, lo: float = 8.0, hi: float = 512.0) -> list[float]:
    """{lo pi, 2 lo pi, ..., hi pi} * r."""
    if lo <= 0 or hi < lo:
        raise ValidationException(f"invalid sweep range [{lo}, {hi}]", field="s2")
    count = int(round(math.log2(hi / lo))) + 1
    return [lo * 2.0**i * math.pi * r for i in range(count)]


def fitted_slope(s2: Sequence[float], values: Sequence[float]) -> Optional[float]:
    """Least-squares slope of log(value) against log(s); None below two points."""
    x = 0.5 * np.log(np.asarray(s2, dtype=float))
    y = np.asarray(values, dtype=float)
    keep = np.isfinite(y) & (y > 0.0)
    if np.count_nonzero(keep) < 2:
        return None
    slope, _ = np.polyfit(x[keep], np.log(y[keep]), 1)
    return float(slope)


def _local_slopes(s2: Sequence[float], values: Sequence[float]) -> list[float]:
    slopes = [float("nan")]
    for i in range(1, len(values)):
        a, b = values[i - 1], values[i]
        if a > 0.0 and b > 0.0 and math.isfinite(a) and math.isfinite(b):
            slopes.append(math.log(b / a) / (0.5 * math.log(s2[i] / s2[i - 1])))
        else:
            slopes.append(float("nan"))
    return slopes


def sweep(
    P: PolyTuple,
    s2_values: Sequence[float],
    L: Optional[int] = None,
    normalization: Optional[str] = None,
) -> SweepResult:
    """Evaluate g_s, phi_s, v_s and phi_infinity along a sweep of couplings."""
    settings = get_settings()
    L = L if L is not None else settings.GRID_L
    s2_values = sorted(float(s) for s in s2_values)
    if not s2_values:
        raise ValidationException("empty coupling sweep", field="s2")

    grid = build_grid(L)
    chart = ModuliChart.containing(P)
    G = l2_metric_matrix(P, grid, chart, normalization).matrix
    h = norm_function(P, grid, psi_solve(P, grid))
    phi_inf = limit_solution(h).values

    raw: list[tuple[float, float, float, float, float, float, int, Optional[str]]] = []
    for s2 in s2_values:
        cfg = VortexConfig(s2, P.r, P.k)
        nan = float("nan")
        try:
            sol = robust_kw_solve(h, cfg)
            report = vortex_metric(P, cfg, grid, chart, normalization, solution=sol)
        except LumpVolException as exc:
            logger.warning("sweep_point_failed", s2=s2, error=exc.error_code)
            raw.append((s2, nan, nan, nan, nan, nan, 0, f"{exc.error_code}: {exc}"))
            continue
        phi = sol.phi.values.real
        note: Optional[str] = None
        try:
            v, _ = approx_solution(h, cfg)
            phi_v = float(np.max(np.abs(phi - v.values)))
        except DomainException as exc:
            logger.warning("approx_solution_undefined", s2=s2)
            phi_v, note = nan, f"{exc.error_code}: {exc}"
        u_sup = max(
            float(np.max(np.abs(report.solution.u_derivative(a).values)))
            for a in range(chart.q)
        )
        raw.append(
            (
                s2,
                float(np.max(np.abs(report.g.matrix - G))),
                phi_v,
                float(np.max(np.abs(phi - phi_inf))),
                u_sup,
                sol.residual,
                sol.iterations,
                note,
            )
        )
        logger.info("sweep_point", s2=s2, g_diff=raw[-1][1], residual=sol.residual)

    local = _local_slopes(s2_values, [row[1] for row in raw])
    rows = tuple(
        SweepRow(s2, g, pv, pi, ua, slope, res, it, note)
        for (s2, g, pv, pi, ua, res, it, note), slope in zip(raw, local)
    )
    result = SweepResult(rows)
    slopes = {name: fitted_slope(s2_values, result.column(name)) for name in COLUMNS}
    return SweepResult(rows, slopes)
