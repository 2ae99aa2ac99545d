"""Hermitian metric matrices in holomorphic moduli coordinates."""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from lumpvol.models.rational_map import ModuliChart
from lumpvol.models.sphere import ComplexArray


@dataclass(frozen=True, eq=False)
class MetricMatrix:
    """q x q Hermitian matrix G[alpha, beta] = g(d_alpha, d_beta-bar)."""

    matrix: ComplexArray
    chart: Optional[ModuliChart] = None
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def q(self) -> int:
        return self.matrix.shape[0]

    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))

    def scaled(self, factor: float) -> "MetricMatrix":
        return MetricMatrix(self.matrix * factor, self.chart, dict(self.diagnostics))
