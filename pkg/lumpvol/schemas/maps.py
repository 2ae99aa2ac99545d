"""Pydantic schemas for polynomial tuples and complex matrices."""

from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from lumpvol.models.rational_map import PolyTuple
from lumpvol.models.sphere import ComplexArray


class ComplexValue(BaseModel):
    """A complex number as its real and imaginary parts."""

    re: float = Field(description="Real part")
    im: float = Field(default=0.0, description="Imaginary part")

    @classmethod
    def from_complex(cls, value: complex) -> "ComplexValue":
        value = complex(value)
        return cls(re=value.real, im=value.imag)

    def to_complex(self) -> complex:
        return complex(self.re, self.im)


def complex_matrix(matrix: ComplexArray) -> List[List[ComplexValue]]:
    """Nested ComplexValue rows of a 2-d array."""
    return [[ComplexValue.from_complex(x) for x in row] for row in np.asarray(matrix)]


class PolyTupleSchema(BaseModel):
    """Serialized map [p_0 : ... : p_k], coefficients highest degree first."""

    k: int = Field(description="Target dimension", ge=1)
    r: int = Field(description="Maximal polynomial degree", ge=0)
    coeffs: List[List[ComplexValue]] = Field(
        description="k+1 rows of r+1 coefficients, highest degree first"
    )

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "k": 1,
                "r": 1,
                "coeffs": [
                    [{"re": 1.0, "im": 0.0}, {"re": 0.0, "im": 0.0}],
                    [{"re": 0.0, "im": 0.0}, {"re": 1.0, "im": 0.0}],
                ],
            }
        }
    )

    @model_validator(mode="after")
    def check_shape(self) -> "PolyTupleSchema":
        if len(self.coeffs) != self.k + 1:
            raise ValueError(f"expected {self.k + 1} rows, got {len(self.coeffs)}")
        for row in self.coeffs:
            if len(row) != self.r + 1:
                raise ValueError(
                    f"expected rows of length {self.r + 1}, got {len(row)}"
                )
        return self

    @classmethod
    def from_model(cls, P: PolyTuple) -> "PolyTupleSchema":
        return cls(k=P.k, r=P.r, coeffs=complex_matrix(P.coeffs))

    def to_model(self) -> PolyTuple:
        return PolyTuple.from_rows(
            [[c.to_complex() for c in row] for row in self.coeffs]
        )
