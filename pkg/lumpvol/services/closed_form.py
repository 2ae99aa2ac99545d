"""Exact evaluation of the closed volume and dimension formulas."""

import math
import re
from fractions import Fraction
from typing import Optional, Union

from lumpvol.core.config import get_settings
from lumpvol.core.exceptions import (
    BradlowViolationException,
    InvalidGenusDegreeException,
    ValidationException,
)
from lumpvol.models.formula import Coupling, FormulaInput, Number

_PI_LITERAL = re.compile(
    r"^\s*(?P<num>[+-]?\d+(?:\.\d+)?(?:/\d+)?)?\s*\*?\s*(?:pi|π)\s*$", re.IGNORECASE
)


def parse_coupling(text: Union[str, float, int]) -> Coupling:
    """Parse s^2 given as '16pi', '3/2*pi', 'pi' or a plain number."""
    if isinstance(text, (int, float)):
        return Coupling(value=float(text))
    match = _PI_LITERAL.match(text)
    if match:
        num = match.group("num")
        return Coupling(pi_multiple=Fraction(num) if num else Fraction(1))
    try:
        return Coupling(value=float(text))
    except ValueError:
        raise ValidationException(f"cannot parse s^2 value {text!r}", field="s2")


def parse_area(text: Union[str, float, int, Fraction]) -> Number:
    """Vol Sigma as an exact rational when written as one, else a float."""
    if isinstance(text, (Fraction, int)):
        return Fraction(text)
    if isinstance(text, float):
        return text
    try:
        return Fraction(text)
    except ValueError:
        raise ValidationException(f"cannot parse area {text!r}", field="vol_sigma")


def validate_input(inp: FormulaInput, policy: Optional[str] = None) -> None:
    """Check k >= 1, q >= 1 and the genus/degree constraint of the policy.

    'riemann_roch' requires r > 2b - 2 (and r >= 1); 'strict' additionally
    requires r > 2 - 2b.
    """
    policy = policy or get_settings().DEGREE_POLICY
    b, r, k = inp.b, inp.r, inp.k
    if b < 0 or k < 1 or r < 1:
        raise InvalidGenusDegreeException(
            f"need b >= 0, r >= 1, k >= 1 (got b={b}, r={r}, k={k})", b, r, k
        )
    if r <= 2 * b - 2:
        raise InvalidGenusDegreeException(
            f"degree r={r} must exceed 2b-2={2 * b - 2}", b, r, k
        )
    if policy == "strict" and r <= 2 - 2 * b:
        raise InvalidGenusDegreeException(
            f"degree r={r} must exceed 2-2b={2 - 2 * b} under the strict policy",
            b,
            r,
            k,
        )
    if inp.q < 1:
        raise InvalidGenusDegreeException(f"moduli dimension q={inp.q} < 1", b, r, k)


def main_volume(inp: FormulaInput, policy: Optional[str] = None) -> Fraction:
    """(k+1)^b / q! exactly."""
    validate_input(inp, policy)
    return Fraction((inp.k + 1) ** inp.b, math.factorial(inp.q))


def baptista_volume(inp: FormulaInput, policy: Optional[str] = None) -> Number:
    """sum_i b!(k+1)^{b-i} / (i!(q-i)!(b-i)!) (4pi/s^2)^i (Vol - 4 pi r/s^2)^{q-i}."""
    validate_input(inp, policy)
    if inp.s2 is None:
        raise ValidationException("s^2 is required for the finite-s volume", field="s2")
    b, q, k = inp.b, inp.q, inp.k
    x = inp.s2.four_pi_over()
    vol = inp.vol_sigma
    if isinstance(x, Fraction) and isinstance(vol, Fraction):
        remainder: Number = vol - inp.r * x
    else:
        x, remainder = float(x), float(vol) - inp.r * float(x)
    if remainder < 0:
        bound = 4.0 * math.pi * inp.r / float(vol)
        raise BradlowViolationException(inp.s2.as_float, bound)

    total: Number = Fraction(0) if isinstance(remainder, Fraction) else 0.0
    for i in range(b + 1):
        coefficient = Fraction(
            math.factorial(b) * (k + 1) ** (b - i),
            math.factorial(i) * math.factorial(q - i) * math.factorial(b - i),
        )
        if isinstance(remainder, Fraction):
            total += coefficient * x**i * remainder ** (q - i)
        else:
            total += float(coefficient) * float(x) ** i * remainder ** (q - i)
    return total


def dim_hol(inp: FormulaInput) -> int:
    """(k+1) r - k (b - 1)."""
    return (inp.k + 1) * inp.r - inp.k * (inp.b - 1)


def strata_dim(inp: FormulaInput, l: int) -> int:
    """k (r - b + 1) + r - k l for the stratum with l bubbled points."""
    if not 0 <= l <= inp.r:
        raise ValidationException(f"stratum index l={l} outside 0..{inp.r}", field="l")
    return inp.k * (inp.r - inp.b + 1) + inp.r - inp.k * l


def format_exact(value: Number) -> str:
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return repr(value)


def format_factored(inp: FormulaInput) -> str:
    """'1/q! x (k+1)^b' rendering of the Main Theorem value."""
    return f"1/{math.factorial(inp.q)} × {inp.k + 1}^{inp.b}"
