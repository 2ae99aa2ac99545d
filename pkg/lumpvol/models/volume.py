"""Monte Carlo volume estimates and their per-sample records."""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional


@dataclass(frozen=True)
class SampleRecord:
    """Outcome of one Monte Carlo sample, kept in sample-index order."""

    index: int
    ratio: Optional[float]
    proximity: float = 1.0
    band_limit: int = 0
    refinements: int = 0
    error_estimate: Optional[float] = None
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.ratio is None

    @property
    def near_boundary(self) -> bool:
        return self.refinements > 0


@dataclass(frozen=True)
class VolumeEstimate:
    """Mean, standard error and bookkeeping of a volume integration."""

    mean: float
    stderr: float
    n_samples: int
    seed: int
    boundary_fraction: float
    failures: int
    grid_L: int
    valid: bool = True
    config: Dict[str, Any] = field(default_factory=dict)
    samples: tuple[SampleRecord, ...] = field(default=(), repr=False)

    @property
    def relative_error(self) -> float:
        return self.stderr / abs(self.mean) if self.mean else float("inf")

    @property
    def failure_fraction(self) -> float:
        total = self.n_samples + self.failures
        return self.failures / total if total else 0.0
