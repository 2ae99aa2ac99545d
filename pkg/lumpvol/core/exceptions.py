"""Custom exceptions for the laboratory."""

from typing import Any, Dict, Optional


class LumpVolException(Exception):
    """Base exception for lumpvol."""

    def __init__(
        self,
        message: str,
        details: Optional[Dict[str, Any]] = None,
        error_code: Optional[str] = None,
    ) -> None:
        self.message = message
        self.details = details or {}
        self.error_code = error_code
        super().__init__(self.message)


class NonZeroMeanException(LumpVolException):
    """Exception raised when a Poisson right-hand side is not solvable."""

    def __init__(self, mean: complex, tolerance: float) -> None:
        super().__init__(
            message=(
                f"Poisson right-hand side has mean {abs(mean):.3e} > {tolerance:.1e}"
            ),
            details={"mean": abs(mean), "tolerance": tolerance},
            error_code="NON_ZERO_MEAN",
        )


class DegenerateTupleException(LumpVolException):
    """Exception raised when every row of a polynomial tuple vanishes."""

    def __init__(self, k: int, r: int) -> None:
        super().__init__(
            message="Polynomial tuple is identically zero",
            details={"k": k, "r": r},
            error_code="DEGENERATE_TUPLE",
        )


class SingularFieldException(LumpVolException):
    """Exception raised when the section norm vanishes on the grid."""

    def __init__(self, min_norm: float, tolerance: float) -> None:
        super().__init__(
            message=(
                f"Section norm {min_norm:.3e} below singularity guard {tolerance:.1e}"
            ),
            details={"min_norm": min_norm, "tolerance": tolerance},
            error_code="SINGULAR_FIELD",
        )


class NoConvergenceException(LumpVolException):
    """Exception raised when a Newton solve exhausts its iterations."""

    def __init__(self, residual: float, iterations: int, tolerance: float) -> None:
        super().__init__(
            message=(
                f"Newton solve stalled at residual {residual:.3e} "
                f"after {iterations} iterations"
            ),
            details={
                "residual": residual,
                "iterations": iterations,
                "tolerance": tolerance,
            },
            error_code="NO_CONVERGENCE",
        )
        self.residual = residual
        self.iterations = iterations


class DomainException(LumpVolException):
    """Exception raised when an input lies outside an operation's domain."""

    def __init__(
        self,
        message: str,
        details: Optional[Dict[str, Any]] = None,
        error_code: str = "DOMAIN_ERROR",
    ) -> None:
        super().__init__(message=message, details=details, error_code=error_code)


class BradlowViolationException(DomainException):
    """Exception raised below the vortex stability bound."""

    def __init__(self, s2: float, bound: float) -> None:
        super().__init__(
            message=f"s^2 = {s2:.6g} violates the Bradlow bound s^2 >= {bound:.6g}",
            details={"s2": s2, "bound": bound},
            error_code="BRADLOW_VIOLATION",
        )


class NonHermitianException(LumpVolException):
    """Exception raised when a metric matrix is not Hermitian."""

    def __init__(self, defect: float, tolerance: float) -> None:
        super().__init__(
            message=f"Matrix Hermitian defect {defect:.3e} exceeds {tolerance:.1e}",
            details={"defect": defect, "tolerance": tolerance},
            error_code="NON_HERMITIAN",
        )


class InvalidGenusDegreeException(LumpVolException):
    """Exception raised when (b, r, k) violate the admissibility constraints."""

    def __init__(self, message: str, b: int, r: int, k: int) -> None:
        super().__init__(
            message=message,
            details={"b": b, "r": r, "k": k},
            error_code="INVALID_GENUS_DEGREE",
        )


class ValidationException(LumpVolException):
    """Exception raised when validation fails."""

    def __init__(self, message: str, field: Optional[str] = None) -> None:
        details = {"field": field} if field else {}
        super().__init__(
            message=message,
            details=details,
            error_code="VALIDATION_ERROR",
        )
