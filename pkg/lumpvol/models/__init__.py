"""Immutable domain types."""

from lumpvol.models.formula import Coupling, FormulaInput
from lumpvol.models.metric import MetricMatrix
from lumpvol.models.rational_map import Divisor, ModuliChart, PolyTuple
from lumpvol.models.sphere import ScalarField, SphereGrid
from lumpvol.models.volume import SampleRecord, VolumeEstimate
from lumpvol.models.vortex import KWSolution, VortexConfig, VortexMetricReport

__all__ = [
    "Coupling",
    "Divisor",
    "FormulaInput",
    "KWSolution",
    "MetricMatrix",
    "ModuliChart",
    "PolyTuple",
    "SampleRecord",
    "ScalarField",
    "SphereGrid",
    "VolumeEstimate",
    "VortexConfig",
    "VortexMetricReport",
]
