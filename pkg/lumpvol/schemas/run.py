"""Run configuration echoed by every command."""

from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class RunConfig(BaseModel):
    """Everything needed to reproduce a command run exactly."""

    subcommand: str = Field(description="CLI subcommand")
    b: Optional[int] = Field(default=None, description="Genus")
    r: Optional[int] = Field(default=None, description="Degree")
    k: Optional[int] = Field(default=None, description="Target dimension")
    s2: Optional[str] = Field(default=None, description="Coupling s^2 as given")
    s2_sweep: Optional[List[float]] = Field(
        default=None, description="Swept s^2 values"
    )
    vol_sigma: Optional[str] = Field(default=None, description="Area of the surface")
    L: Optional[int] = Field(default=None, description="Quadrature band-limit")
    n: Optional[int] = Field(default=None, description="Monte Carlo sample count")
    seed: Optional[int] = Field(default=None, description="Root random seed")
    threads: Optional[int] = Field(default=None, description="Worker count")
    q: Optional[int] = Field(default=None, description="Calibration dimension")
    mode: Optional[str] = Field(default=None, description="Calibration mode")
    map_file: Optional[str] = Field(default=None, description="Map JSON input path")
    normalization: Optional[str] = Field(default=None, description="Target FS scale")
    policy: Optional[str] = Field(default=None, description="Genus/degree policy")
    out: Optional[str] = Field(default=None, description="Output path")
    format: Literal["json", "csv", "text"] = Field(
        default="json", description="Output format"
    )

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "subcommand": "mc-volume",
                "r": 1,
                "k": 1,
                "L": 24,
                "n": 4000,
                "seed": 7,
                "threads": 4,
                "format": "json",
            }
        }
    )
