"""Pydantic schemas for map inputs and command reports."""

from lumpvol.schemas.maps import ComplexValue, PolyTupleSchema, complex_matrix
from lumpvol.schemas.reports import (
    ErrorResponse,
    FormulaReport,
    KWSolveReport,
    MetricReport,
    SweepReport,
    VolumeEstimateSchema,
    VortexMetricReportSchema,
)
from lumpvol.schemas.run import RunConfig

__all__ = [
    "ComplexValue",
    "ErrorResponse",
    "FormulaReport",
    "KWSolveReport",
    "MetricReport",
    "PolyTupleSchema",
    "RunConfig",
    "SweepReport",
    "VolumeEstimateSchema",
    "VortexMetricReportSchema",
    "complex_matrix",
]
