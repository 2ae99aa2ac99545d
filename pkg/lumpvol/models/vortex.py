"""Vortex configurations, gauge-PDE solutions and vortex metric reports."""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from lumpvol.core.exceptions import BradlowViolationException, DomainException
from lumpvol.models.metric import MetricMatrix
from lumpvol.models.sphere import ComplexArray, ScalarField


@dataclass(frozen=True)
class VortexConfig:
    """Coupling s^2 and topology (r, k); c_1 = 2 pi r unless overridden."""

    s2: float
    r: int
    k: int = 1
    c1_override: Optional[float] = None

    c2 = 1.0

    @property
    def s(self) -> float:
        return math.sqrt(self.s2)

    @property
    def c1(self) -> float:
        return 2.0 * math.pi * self.r if self.c1_override is None else self.c1_override

    @property
    def c(self) -> float:
        """c(s) = 2 c_1 - s^2."""
        return 2.0 * self.c1 - self.s2

    @property
    def bradlow_bound(self) -> float:
        """Smallest admissible s^2 on the unit-area sphere (4 pi r)."""
        return 2.0 * self.c1

    def validate(self) -> None:
        """Reject couplings below the stability bound or at saturation."""
        if self.s2 <= 0 or self.s2 < self.bradlow_bound:
            raise BradlowViolationException(self.s2, self.bradlow_bound)
        if self.c >= 0:
            raise DomainException(
                "no gauge solution at Bradlow saturation (c(s) = 0)",
                details={"s2": self.s2, "c": self.c},
            )


@dataclass(frozen=True, eq=False)
class KWSolution:
    """Solved gauge field phi_s with solver diagnostics and moduli derivatives."""

    phi: ScalarField
    config: VortexConfig
    residual: float
    aliasing_residual: float
    iterations: int
    psi: Optional[ScalarField] = None
    derivatives: Dict[int, ScalarField] = field(default_factory=dict)
    psi_derivatives: Dict[int, ScalarField] = field(default_factory=dict)
    attempts: int = 1

    @property
    def u(self) -> ScalarField:
        """u_s = phi_s / 2 + psi."""
        psi = self.psi.values if self.psi is not None else 0.0
        return ScalarField(self.phi.grid, self.phi.values / 2.0 + psi)

    def u_derivative(self, alpha: int) -> ScalarField:
        """u_s^alpha = phi_s^alpha / 2 + psi^alpha."""
        phi_a = self.derivatives[alpha].values
        psi = self.psi_derivatives.get(alpha)
        psi_a = psi.values if psi is not None else 0.0
        return ScalarField(self.phi.grid, phi_a / 2.0 + psi_a)


@dataclass(frozen=True, eq=False)
class VortexMetricReport:
    """Finite-s vortex metric g_s = X + Y + Z with its term breakdown."""

    g: MetricMatrix
    X: ComplexArray
    Y: ComplexArray
    Z: ComplexArray
    config: VortexConfig
    solution: KWSolution
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def assembly_defect(self) -> float:
        return float(np.max(np.abs(self.g.matrix - (self.X + self.Y + self.Z))))
