"""Polynomial tuples, divisors and affine moduli charts."""

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

import numpy as np

from lumpvol.core.exceptions import ValidationException
from lumpvol.models.sphere import ComplexArray

RootLocation = Union[complex, float]  # math.inf marks the root at z = infinity


@dataclass(frozen=True, eq=False)
class PolyTuple:
    """Holomorphic map [p_0 : ... : p_k] with deg p_i <= r.

    Row i of ``coeffs`` holds the coefficients of p_i, highest degree first
    (numpy.polyval order), so rows (1, 0), (0, 1) are the identity map z.
    """

    coeffs: ComplexArray

    def __post_init__(self) -> None:
        c = np.array(self.coeffs, dtype=np.complex128)
        if c.ndim != 2 or c.shape[0] < 2 or c.shape[1] < 1:
            raise ValidationException(
                f"coefficient matrix must be (k+1) x (r+1) with k >= 1, got {c.shape}",
                field="coeffs",
            )
        if not np.all(np.isfinite(c)):
            raise ValidationException("coefficients must be finite", field="coeffs")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[complex]]) -> "PolyTuple":
        return cls(np.array(rows, dtype=np.complex128))

    @property
    def k(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def r(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def q(self) -> int:
        """Complex dimension of the projective coefficient space."""
        return (self.k + 1) * (self.r + 1) - 1

    def scaled(self, factor: complex) -> "PolyTuple":
        return PolyTuple(self.coeffs * factor)

    def rotated(self, unitary: ComplexArray) -> "PolyTuple":
        """Apply a target isometry to the rows."""
        return PolyTuple(np.asarray(unitary) @ self.coeffs)

    def shifted(self, direction: ComplexArray, eps: complex) -> "PolyTuple":
        return PolyTuple(self.coeffs + eps * np.asarray(direction))


@dataclass(frozen=True)
class Divisor:
    """Effective divisor on the sphere: points with positive multiplicities."""

    points: tuple[tuple[RootLocation, int], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        for _, mult in self.points:
            if mult <= 0:
                raise ValidationException("divisor multiplicities must be positive")

    @property
    def degree(self) -> int:
        return sum(m for _, m in self.points)

    @property
    def is_empty(self) -> bool:
        return not self.points

    @property
    def multiplicity_at_infinity(self) -> int:
        return sum(m for p, m in self.points if _is_infinite(p))

    def __iter__(self) -> Iterator[tuple[RootLocation, int]]:
        return iter(self.points)


def _is_infinite(p: RootLocation) -> bool:
    return isinstance(p, float) and math.isinf(p)


@dataclass(frozen=True)
class ModuliChart:
    """Affine chart of CP^q = P(coefficient space) fixing one coefficient to 1.

    Coefficients are flattened row-major; chart coordinates list the remaining
    q coefficients in that order.
    """

    k: int
    r: int
    fixed: int = 0

    def __post_init__(self) -> None:
        size = (self.k + 1) * (self.r + 1)
        if not 0 <= self.fixed < size:
            raise ValidationException(
                f"fixed index {self.fixed} outside coefficient range 0..{size - 1}",
                field="fixed",
            )

    @property
    def q(self) -> int:
        return (self.k + 1) * (self.r + 1) - 1

    @property
    def fixed_entry(self) -> tuple[int, int]:
        return divmod(self.fixed, self.r + 1)

    def directions(self) -> list[tuple[int, int]]:
        """(row, coefficient index) of every free chart coordinate."""
        size = (self.k + 1) * (self.r + 1)
        return [divmod(f, self.r + 1) for f in range(size) if f != self.fixed]

    def to_tuple(self, w: Sequence[complex]) -> PolyTuple:
        w = np.asarray(w, dtype=np.complex128)
        if w.shape != (self.q,):
            raise ValidationException(
                f"chart point must have {self.q} entries, got {w.shape}", field="w"
            )
        flat = np.insert(w, self.fixed, 1.0)
        return PolyTuple(flat.reshape(self.k + 1, self.r + 1))

    def coordinates(self, P: PolyTuple) -> ComplexArray:
        """Chart coordinates of P; P must not vanish at the fixed entry."""
        flat = P.coeffs.ravel()
        pivot = flat[self.fixed]
        if pivot == 0:
            raise ValidationException("tuple lies outside this chart", field="fixed")
        return np.delete(flat / pivot, self.fixed)

    @classmethod
    def containing(cls, P: PolyTuple) -> "ModuliChart":
        """Chart fixing the largest-modulus coefficient of P."""
        return cls(P.k, P.r, int(np.argmax(np.abs(P.coeffs.ravel()))))
