"""Quadrature grid and scalar fields on the unit-area round sphere."""

from dataclasses import dataclass, field
from typing import Union

import numpy as np
from numpy.typing import NDArray

ComplexArray = NDArray[np.complex128]
FloatArray = NDArray[np.float64]
Values = Union[FloatArray, ComplexArray]


def _frozen(a: NDArray) -> NDArray:
    a.flags.writeable = False
    return a


def normalized_legendre(L: int, x: FloatArray) -> tuple[FloatArray, FloatArray]:
    """Orthonormal associated Legendre table and its colatitude derivative.

    Returns arrays P, dP of shape (L+1, L+1, len(x)) indexed [m, l, node],
    zero where l < m. P[m, l] is normalized so that P[m, l](cos t) e^{i m lam}
    has unit L2 norm on the sphere of area 4 pi; no Condon-Shortley phase.
    dP is d/d(colatitude).
    """
    n = x.size
    sin = np.sqrt(1.0 - x * x)
    P = np.zeros((L + 1, L + 1, n))
    dP = np.zeros((L + 1, L + 1, n))

    pmm = np.full(n, 1.0 / np.sqrt(4.0 * np.pi))
    for m in range(L + 1):
        if m > 0:
            pmm = np.sqrt((2 * m + 1) / (2.0 * m)) * sin * pmm
        P[m, m] = pmm
        if m + 1 <= L:
            P[m, m + 1] = np.sqrt(2 * m + 3.0) * x * pmm
        for l in range(m + 2, L + 1):
            a = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            P[m, l] = a * (x * P[m, l - 1] - b * P[m, l - 2])

    # sin(t) dP_l^m/dt = l cos(t) P_l^m - sqrt((2l+1)(l^2-m^2)/(2l-1)) P_{l-1}^m
    for m in range(L + 1):
        for l in range(m, L + 1):
            lower = 0.0
            if l > m:
                c = np.sqrt((2.0 * l + 1.0) * (l * l - m * m) / (2.0 * l - 1.0))
                lower = c * P[m, l - 1]
            dP[m, l] = (l * x * P[m, l] - lower) / sin
    return P, dP


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Gauss-Legendre x equispaced-longitude grid on the sphere of total area 1.

    Values live on (nlat, nlon) arrays. Harmonic coefficients are stored as
    (L+1, 2L+1) arrays indexed [l, m + L]; entries with |m| > l are zero.
    The chart coordinate is z = cot(t/2) e^{i lam}, so z = infinity is the
    north pole; Z0 = cos(t/2) e^{i lam}, Z1 = sin(t/2) are unit homogeneous
    coordinates with z = Z0 / Z1.
    """

    band_limit: int
    cos_colatitude: FloatArray
    colatitude: FloatArray
    longitude: FloatArray
    weights: FloatArray
    ring_weights: FloatArray
    Z0: ComplexArray
    Z1: FloatArray
    chart_nodes: ComplexArray
    legendre: FloatArray = field(repr=False)
    dlegendre: FloatArray = field(repr=False)
    eigenvalues: FloatArray = field(repr=False)
    mask: NDArray[np.bool_] = field(repr=False)

    @property
    def L(self) -> int:
        return self.band_limit

    @property
    def nlat(self) -> int:
        return self.colatitude.size

    @property
    def nlon(self) -> int:
        return self.longitude.size

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nlat, self.nlon)

    @property
    def coeff_shape(self) -> tuple[int, int]:
        return (self.L + 1, 2 * self.L + 1)

    @property
    def nodes(self) -> list[tuple[float, float]]:
        """(colatitude, longitude) pairs in row-major node order."""
        t, p = np.meshgrid(self.colatitude, self.longitude, indexing="ij")
        return list(zip(t.ravel().tolist(), p.ravel().tolist()))

    def integrate(self, values: Values) -> complex:
        """Weighted sum over nodes; exact for harmonics up to degree 2L."""
        total = np.sum(self.weights * values)
        return complex(total)

    def analyze(self, values: Values) -> ComplexArray:
        """Spherical-harmonic coefficients of nodal values."""
        L, nlon = self.L, self.nlon
        F = np.fft.fft(np.asarray(values, dtype=np.complex128), axis=1)
        ms = np.arange(L + 1)
        pos = np.einsum(
            "mlj,j,jm->lm", self.legendre, self.ring_weights, F[:, ms], optimize=True
        )
        neg = np.einsum(
            "mlj,j,jm->lm",
            self.legendre,
            self.ring_weights,
            F[:, (-ms) % nlon],
            optimize=True,
        )
        coeffs = np.empty(self.coeff_shape, dtype=np.complex128)
        coeffs[:, L:] = pos
        coeffs[:, : L + 1] = neg[:, ::-1]
        return coeffs

    def synthesize(self, coeffs: ComplexArray, table: str = "legendre") -> ComplexArray:
        """Nodal values of a coefficient array (table="dlegendre" gives d/dtheta)."""
        L, nlon = self.L, self.nlon
        tab = self.legendre if table == "legendre" else self.dlegendre
        ms = np.arange(L + 1)
        full = np.zeros(self.shape, dtype=np.complex128)
        full[:, ms] = np.einsum("lm,mlj->jm", coeffs[:, L:], tab, optimize=True)
        neg = np.einsum("lm,mlj->jm", coeffs[:, L::-1], tab, optimize=True)
        full[:, (-ms[1:]) % nlon] = neg[:, 1:]
        return nlon * np.fft.ifft(full, axis=1)

    def project(self, values: Values) -> Values:
        """Band-limit nodal values to degree L."""
        out = self.synthesize(self.analyze(values))
        return out.real if np.isrealobj(values) else out


def build_sphere_grid(L: int) -> SphereGrid:
    """Construct the tables of a band-limit L grid."""
    nlat, nlon = L + 1, 2 * L + 2
    x, w = np.polynomial.legendre.leggauss(nlat)
    theta = np.arccos(x)
    lam = 2.0 * np.pi * np.arange(nlon) / nlon

    ring_weights = w * (2.0 * np.pi / nlon)
    weights = np.repeat((ring_weights / (4.0 * np.pi))[:, None], nlon, axis=1)

    Z0 = np.cos(theta / 2.0)[:, None] * np.exp(1j * lam)[None, :]
    Z1 = np.repeat(np.sin(theta / 2.0)[:, None], nlon, axis=1)
    P, dP = normalized_legendre(L, x)

    ls = np.arange(L + 1)
    ms = np.arange(-L, L + 1)
    mask = np.abs(ms)[None, :] <= ls[:, None]
    eigenvalues = np.repeat((4.0 * np.pi * ls * (ls + 1.0))[:, None], 2 * L + 1, axis=1)

    return SphereGrid(
        band_limit=L,
        cos_colatitude=_frozen(x),
        colatitude=_frozen(theta),
        longitude=_frozen(lam),
        weights=_frozen(weights),
        ring_weights=_frozen(ring_weights),
        Z0=_frozen(Z0),
        Z1=_frozen(Z1),
        chart_nodes=_frozen(Z0 / Z1),
        legendre=_frozen(P),
        dlegendre=_frozen(dP),
        eigenvalues=_frozen(eigenvalues),
        mask=_frozen(mask),
    )


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real or complex function sampled on the nodes of a grid."""

    grid: SphereGrid
    values: Values

    def __post_init__(self) -> None:
        if np.shape(self.values) != self.grid.shape:
            raise ValueError(
                f"field shape {np.shape(self.values)} "
                f"does not match grid {self.grid.shape}"
            )

    @property
    def real(self) -> "ScalarField":
        return ScalarField(self.grid, np.real(self.values))

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def min(self) -> float:
        return float(np.min(np.real(self.values)))

    def max(self) -> float:
        return float(np.max(np.real(self.values)))
