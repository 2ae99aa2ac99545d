"""Pydantic schemas for command reports."""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from lumpvol.models.metric import MetricMatrix
from lumpvol.models.volume import VolumeEstimate
from lumpvol.models.vortex import KWSolution, VortexMetricReport
from lumpvol.schemas.maps import ComplexValue, complex_matrix
from lumpvol.services.convergence import SweepResult


class MetricReport(BaseModel):
    """Hermitian metric matrix with its quadrature diagnostics."""

    q: int = Field(description="Complex dimension of the moduli chart")
    chart_fixed: Optional[int] = Field(
        default=None, description="Flat index of the coefficient fixed to 1"
    )
    matrix: List[List[ComplexValue]] = Field(description="G[alpha][beta], row-major")
    eigenvalues: List[float] = Field(description="Eigenvalues of the Hermitian part")
    determinant: float = Field(description="Volume density det G")
    diagnostics: Dict[str, Any] = Field(default_factory=dict, description="Diagnostics")

    @classmethod
    def from_model(cls, G: MetricMatrix, determinant: float) -> "MetricReport":
        return cls(
            q=G.q,
            chart_fixed=G.chart.fixed if G.chart is not None else None,
            matrix=complex_matrix(G.matrix),
            eigenvalues=[float(x) for x in G.eigenvalues()],
            determinant=determinant,
            diagnostics=dict(G.diagnostics),
        )


class KWSolveReport(BaseModel):
    """Converged gauge field summary."""

    s2: float = Field(description="Coupling s^2")
    c: float = Field(description="c(s) = 2 c_1 - s^2")
    residual: float = Field(description="Band-limited residual sup-norm")
    aliasing_residual: float = Field(description="Nodal residual sup-norm")
    iterations: int = Field(description="Newton iterations of the final attempt")
    attempts: int = Field(default=1, description="Solve attempts used")
    phi_min: float = Field(description="min phi_s over the grid")
    phi_max: float = Field(description="max phi_s over the grid")
    bounds: Dict[str, Any] = Field(
        default_factory=dict, description="Maximum-principle bound checks"
    )

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "s2": 100.53096491487338,
                "c": -87.96459430051421,
                "residual": 3.1e-12,
                "aliasing_residual": 4.4e-12,
                "iterations": 4,
                "attempts": 1,
                "phi_min": -0.1484,
                "phi_max": -0.1484,
                "bounds": {"holds": True},
            }
        }
    )

    @classmethod
    def from_model(
        cls, sol: KWSolution, bounds: Optional[Dict[str, Any]] = None
    ) -> "KWSolveReport":
        phi = sol.phi.values.real
        return cls(
            s2=sol.config.s2,
            c=sol.config.c,
            residual=sol.residual,
            aliasing_residual=sol.aliasing_residual,
            iterations=sol.iterations,
            attempts=sol.attempts,
            phi_min=float(phi.min()),
            phi_max=float(phi.max()),
            bounds=bounds or {},
        )


class VortexMetricReportSchema(BaseModel):
    """Finite-s vortex metric with its X, Y, Z breakdown."""

    s2: float = Field(description="Coupling s^2")
    g: MetricReport = Field(description="g_s = X + Y + Z")
    X: List[List[ComplexValue]] = Field(description="Connection term")
    Y: List[List[ComplexValue]] = Field(description="Gauge-variation term")
    Z: List[List[ComplexValue]] = Field(description="Section term")
    assembly_defect: float = Field(description="max |g - (X + Y + Z)|")
    diagnostics: Dict[str, Any] = Field(default_factory=dict, description="Solver data")

    @classmethod
    def from_model(
        cls, report: VortexMetricReport, determinant: float
    ) -> "VortexMetricReportSchema":
        return cls(
            s2=report.config.s2,
            g=MetricReport.from_model(report.g, determinant),
            X=complex_matrix(report.X),
            Y=complex_matrix(report.Y),
            Z=complex_matrix(report.Z),
            assembly_defect=report.assembly_defect(),
            diagnostics=dict(report.diagnostics),
        )


class VolumeEstimateSchema(BaseModel):
    """Monte Carlo volume estimate."""

    mean: float = Field(description="Estimated volume")
    stderr: float = Field(description="Sample standard deviation / sqrt(n)")
    n: int = Field(description="Samples that entered the estimate")
    seed: int = Field(description="Root seed of the per-sample streams")
    boundary_fraction: float = Field(description="Fraction of refined samples")
    failures: int = Field(description="Samples rejected after evaluation failures")
    grid_L: int = Field(description="Base quadrature band-limit")
    valid: bool = Field(
        default=True, description="False when too many samples failed to evaluate"
    )
    config: Dict[str, Any] = Field(description="Run configuration echo")

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "mean": 0.1663,
                "stderr": 0.0021,
                "n": 4000,
                "seed": 7,
                "boundary_fraction": 0.0,
                "failures": 0,
                "grid_L": 24,
                "valid": True,
                "config": {"mode": "l2", "r": 1, "k": 1, "q": 3, "n": 4000},
            }
        }
    )

    @classmethod
    def from_model(cls, estimate: VolumeEstimate) -> "VolumeEstimateSchema":
        return cls(
            mean=estimate.mean,
            stderr=estimate.stderr,
            n=estimate.n_samples,
            seed=estimate.seed,
            boundary_fraction=estimate.boundary_fraction,
            failures=estimate.failures,
            grid_L=estimate.grid_L,
            valid=estimate.valid,
            config=dict(estimate.config),
        )


class FormulaReport(BaseModel):
    """Closed-form volumes and dimensions."""

    b: int = Field(description="Genus")
    r: int = Field(description="Degree")
    k: int = Field(description="Target dimension")
    q: int = Field(description="Moduli dimension")
    dim_hol: int = Field(description="(k+1) r - k (b-1)")
    main_volume: str = Field(description="(k+1)^b / q! as an exact fraction")
    main_volume_factored: str = Field(description="'1/q! x (k+1)^b' rendering")
    main_volume_decimal: float = Field(description="Decimal value")
    s2: Optional[str] = Field(default=None, description="Coupling as given")
    vol_sigma: Optional[str] = Field(default=None, description="Area of the surface")
    finite_volume: Optional[str] = Field(default=None, description="Finite-s volume")
    finite_volume_decimal: Optional[float] = Field(default=None, description="Decimal")

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "b": 0,
                "r": 1,
                "k": 1,
                "q": 3,
                "dim_hol": 3,
                "main_volume": "1/6",
                "main_volume_factored": "1/6 × 2^0",
                "main_volume_decimal": 0.16666666666666666,
                "s2": "16pi",
                "vol_sigma": "1",
                "finite_volume": "9/128",
                "finite_volume_decimal": 0.0703125,
            }
        }
    )


class SweepReport(BaseModel):
    """Coupling sweep table with fitted log-log slopes."""

    columns: List[str] = Field(description="Column names of each row")
    rows: List[List[float]] = Field(description="Sweep table, increasing s^2")
    slopes: Dict[str, Optional[float]] = Field(
        description="Least-squares slopes in log s"
    )
    notes: Dict[str, str] = Field(
        default_factory=dict, description="Why a row holds NaN, keyed by its s^2"
    )

    @classmethod
    def from_model(cls, result: SweepResult) -> "SweepReport":
        columns = ["s2", "g_diff", "phi_v_diff", "phi_inf_diff", "slope"]
        rows = [[float(getattr(row, c)) for c in columns] for row in result.rows]
        notes = {repr(row.s2): row.note for row in result.rows if row.note}
        return cls(
            columns=columns, rows=rows, slopes=dict(result.slopes), notes=notes
        )


class ErrorResponse(BaseModel):
    """Structured error emitted on stderr."""

    error: str = Field(description="Stable error code")
    message: str = Field(description="Human-readable message")
    details: Dict[str, Any] = Field(default_factory=dict, description="Error context")
