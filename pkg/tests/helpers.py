"""Map builders shared by the test modules."""

import numpy as np

from lumpvol.models.rational_map import PolyTuple
from lumpvol.services.rational_maps import random_tuple


def standard_rows(k: int, r: int) -> np.ndarray:
    rows = np.zeros((k + 1, r + 1), dtype=np.complex128)
    rows[0, 0] = 1.0
    rows[1, r] = 1.0
    if k >= 2:
        rows[2, r // 2] = 0.5
    return rows


def mild_map(seed: int, k: int = 1, r: int = 1, spread: float = 0.15) -> PolyTuple:
    """Small perturbation of a well-conditioned map; quadrature-resolved at L=32."""
    rng = np.random.default_rng(seed)
    return random_tuple(rng, k, r, base=standard_rows(k, r), spread=spread)


def random_unitary(seed: int, size: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
    Q, R = np.linalg.qr(A)
    return Q * (np.diag(R) / np.abs(np.diag(R)))
