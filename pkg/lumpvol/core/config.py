"""Laboratory configuration using Pydantic Settings."""

import math
from functools import lru_cache

from pydantic import Field, validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from lumpvol.core.exceptions import ValidationException


class Settings(BaseSettings):
    """Laboratory settings with environment variable support."""

    model_config = SettingsConfigDict(
        env_prefix="LUMPVOL_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
    )

    PROJECT_NAME: str = "lumpvol"
    VERSION: str = "0.1.0"

    # Execution Configuration
    THREADS: int = Field(default=1, description="Default worker count", ge=1)
    GRID_L: int = Field(default=24, description="Default quadrature band-limit", ge=0)

    # Geometry Configuration
    TARGET_FS_NORMALIZATION: str = Field(
        default="unit_area",
        description="Target FS scale: 'unit_area' (CP^1 area 1) or 'quotient'",
    )
    ROOT_TOL: float = Field(
        default=1e-9, description="Relative tolerance for common-root detection"
    )
    SING_TOL: float = Field(
        default=1e-12, description="Floor on the section norm for interior points"
    )
    DEGREE_POLICY: str = Field(
        default="riemann_roch",
        description="Genus/degree admissibility: 'riemann_roch' or 'strict'",
    )

    # Solver Configuration
    NEWTON_TOL: float = Field(default=1e-9, description="Newton residual tolerance")
    NEWTON_MAX_ITER: int = Field(default=50, description="Newton iteration cap", ge=1)
    CG_RTOL: float = Field(
        default=1e-13, description="Relative tolerance of the inner CG solves"
    )
    SOLVE_ATTEMPTS: int = Field(
        default=3, description="Escalating attempts for a failing Newton solve", ge=1
    )

    # Monte Carlo Configuration
    BOUNDARY_RATIO: float = Field(
        default=1e-3,
        description="Samples with min n below this fraction of max n are refined",
    )
    MAX_BOUNDARY_REFINEMENTS: int = Field(
        default=2, description="Band-limit doublings for near-boundary samples", ge=0
    )
    REFINEMENT_TOL: float = Field(
        default=1e-8, description="Relative change accepted by L-refinement"
    )
    MAX_FAILURE_FRACTION: float = Field(
        default=0.005, description="Largest tolerated fraction of failed samples"
    )

    # Logging Configuration
    LOG_LEVEL: str = Field(default="WARNING", description="Logging level")
    LOG_FORMAT: str = Field(
        default="console", description="Log renderer: 'console' or 'json'"
    )

    @validator("TARGET_FS_NORMALIZATION")
    def validate_normalization(cls, v: str) -> str:
        """Validate the target normalization is supported."""
        if v not in ("unit_area", "quotient"):
            raise ValueError(
                "TARGET_FS_NORMALIZATION must be 'unit_area' or 'quotient'"
            )
        return v

    @validator("DEGREE_POLICY")
    def validate_degree_policy(cls, v: str) -> str:
        """Validate the degree policy is supported."""
        if v not in ("riemann_roch", "strict"):
            raise ValueError("DEGREE_POLICY must be 'riemann_roch' or 'strict'")
        return v

    @validator("LOG_FORMAT")
    def validate_log_format(cls, v: str) -> str:
        """Validate the log renderer is supported."""
        if v not in ("console", "json"):
            raise ValueError("LOG_FORMAT must be 'console' or 'json'")
        return v

    @validator(
        "ROOT_TOL",
        "SING_TOL",
        "NEWTON_TOL",
        "CG_RTOL",
        "BOUNDARY_RATIO",
        "REFINEMENT_TOL",
    )
    def validate_positive(cls, v: float) -> float:
        """Validate tolerances are positive."""
        if v <= 0:
            raise ValueError("tolerances must be positive")
        return v

    @property
    def fs_scale(self) -> float:
        """Multiplier applied to the quotient Fubini-Study metric."""
        return fs_scale(self.TARGET_FS_NORMALIZATION)


def fs_scale(normalization: str) -> float:
    """Return kappa for a target normalization name."""
    if normalization not in ("unit_area", "quotient"):
        raise ValidationException(
            f"unknown target normalization {normalization!r}", field="normalization"
        )
    return 1.0 / math.pi if normalization == "unit_area" else 1.0


@lru_cache()
def get_settings() -> Settings:
    """Get cached laboratory settings."""
    return Settings()
