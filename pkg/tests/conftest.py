"""Shared fixtures: grids, maps and settings isolation."""

from typing import Iterator

import pytest

from lumpvol.core.config import get_settings
from lumpvol.models.rational_map import PolyTuple
from lumpvol.models.sphere import SphereGrid
from lumpvol.services.sphere_geometry import build_grid


@pytest.fixture(autouse=True)
def fresh_settings() -> Iterator[None]:
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def grid() -> SphereGrid:
    return build_grid(24)


@pytest.fixture
def fine_grid() -> SphereGrid:
    return build_grid(32)


@pytest.fixture
def identity_map() -> PolyTuple:
    return PolyTuple.from_rows([[1, 0], [0, 1]])
