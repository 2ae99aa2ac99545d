"""Inputs of the closed volume formulas."""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

Number = Union[Fraction, float]


@dataclass(frozen=True)
class Coupling:
    """s^2, either an exact rational multiple of pi or a float."""

    pi_multiple: Optional[Fraction] = None
    value: Optional[float] = None

    @property
    def as_float(self) -> float:
        if self.pi_multiple is not None:
            return float(self.pi_multiple) * math.pi
        assert self.value is not None
        return self.value

    def four_pi_over(self) -> Number:
        """4 pi / s^2, exact when s^2 is a rational multiple of pi."""
        if self.pi_multiple is not None:
            return Fraction(4) / self.pi_multiple
        return 4.0 * math.pi / self.as_float

    def __str__(self) -> str:
        if self.pi_multiple is not None:
            return f"{self.pi_multiple}pi"
        return repr(self.value)


@dataclass(frozen=True)
class FormulaInput:
    """Genus b, degree r, target dimension k, optional coupling and area."""

    b: int
    r: int
    k: int
    s2: Optional[Coupling] = None
    vol_sigma: Number = Fraction(1)

    @property
    def q(self) -> int:
        return self.b + (self.k + 1) * (self.r + 1 - self.b) - 1

    @property
    def m(self) -> int:
        return (self.k + 1) * self.r - self.k * (self.b - 1)
