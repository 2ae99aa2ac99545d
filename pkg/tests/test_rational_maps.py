import math

import numpy as np
import pytest
import sympy

from lumpvol.core.exceptions import (
    DegenerateTupleException,
    SingularFieldException,
    ValidationException,
)
from lumpvol.models.rational_map import ModuliChart, PolyTuple
from lumpvol.models.sphere import SphereGrid
from lumpvol.services.rational_maps import (
    curvature_field,
    energy,
    evaluate,
    evaluate_north,
    extended_curvature,
    interior_norm,
    reduce,
    section_norm_field,
    strata_parameter_count,
    variation,
    variation_for_entry,
)
from lumpvol.services.sphere_geometry import build_grid, integrate
from tests.helpers import mild_map


def test_evaluate_identity_and_infinity(identity_map: PolyTuple) -> None:
    np.testing.assert_allclose(evaluate(identity_map, 2.0 + 1.0j), [2.0 + 1.0j, 1.0])
    np.testing.assert_allclose(evaluate(identity_map, math.inf), [1.0, 0.0])


def test_evaluate_north_chart_matches_south_chart() -> None:
    P = mild_map(3, k=2, r=2)
    z = 0.7 + 0.3j
    np.testing.assert_allclose(
        evaluate_north(P, 1.0 / z), evaluate(P, z) / z**P.r, rtol=1e-12
    )


def test_section_norm_of_identity_is_one(
    identity_map: PolyTuple, grid: SphereGrid
) -> None:
    n = section_norm_field(identity_map, grid).values
    np.testing.assert_allclose(n, 1.0, atol=1e-14)


def test_identity_curvature_is_constant(
    identity_map: PolyTuple, grid: SphereGrid
) -> None:
    curv = curvature_field(identity_map, grid).values
    np.testing.assert_allclose(curv, 2.0 * math.pi, rtol=1e-12)


@pytest.mark.parametrize(
    "seed,k,r,L", [(0, 1, 1, 32), (1, 1, 1, 32), (2, 2, 1, 32), (3, 1, 2, 48)]
)
def test_curvature_integrates_to_degree(seed: int, k: int, r: int, L: int) -> None:
    P = mild_map(seed, k=k, r=r)
    total = integrate(curvature_field(P, build_grid(L))).real
    assert total == pytest.approx(2.0 * math.pi * r, rel=1e-8)


def test_energy_is_constant_per_degree(identity_map: PolyTuple) -> None:
    grid = build_grid(32)
    assert energy(identity_map, grid) == pytest.approx(2.0, rel=1e-12)
    quotient = energy(identity_map, grid, "quotient")
    assert quotient == pytest.approx(2 * math.pi, rel=1e-12)
    energies = np.array([energy(mild_map(seed), grid) for seed in range(20)])
    assert np.std(energies) / np.mean(energies) < 1e-6


def test_interior_guard_rejects_vanishing_norm(grid: SphereGrid) -> None:
    # identically vanishing section norm
    P = PolyTuple.from_rows([[0.0, 0.0], [0.0, 0.0]])
    with pytest.raises(SingularFieldException):
        interior_norm(P, grid, None)


def test_reduce_splits_common_root() -> None:
    # p0 = (z - 1)(z - 2), p1 = (z - 1)(z + 3)
    P = PolyTuple.from_rows([[1, -3, 2], [1, 2, -3]])
    divisor, reduced = reduce(P)
    assert divisor.degree == 1
    [(location, mult)] = divisor.points
    assert mult == 1
    assert location == pytest.approx(1.0, abs=1e-8)
    assert reduced.r == 1
    np.testing.assert_allclose(reduced.coeffs, [[1, -2], [1, 3]], atol=1e-8)
    assert divisor.degree + reduced.r == P.r


def test_reduce_counts_root_at_infinity() -> None:
    P = PolyTuple.from_rows([[0, 1, 0], [0, 0, 1]])
    divisor, reduced = reduce(P)
    assert divisor.multiplicity_at_infinity == 1
    np.testing.assert_allclose(reduced.coeffs, [[1, 0], [0, 1]])


def test_reduce_is_idempotent() -> None:
    P = PolyTuple.from_rows([[1, -3, 2], [1, 2, -3]])
    _, reduced = reduce(P)
    divisor, again = reduce(reduced)
    assert divisor.is_empty
    np.testing.assert_allclose(again.coeffs, reduced.coeffs)


def test_reduce_rejects_zero_tuple() -> None:
    with pytest.raises(DegenerateTupleException):
        reduce(PolyTuple(np.zeros((2, 3))))


@pytest.mark.parametrize(
    "common,left,right",
    [
        ([2], [-1], [5]),
        ([1, 1], [3], [-2]),
        ([-1, 4], [0, 2], [3, -3]),
    ],
)
def test_reduce_degree_matches_symbolic_gcd(
    common: list[int], left: list[int], right: list[int]
) -> None:
    z = sympy.symbols("z")
    p0 = sympy.expand(
        sympy.prod([z - a for a in common]) * sympy.prod([z - b for b in left])
    )
    p1 = sympy.expand(
        sympy.prod([z - a for a in common]) * sympy.prod([z - b for b in right])
    )
    r = max(sympy.degree(p0, z), sympy.degree(p1, z))
    rows = [
        [complex(c) for c in sympy.Poly(p, z).all_coeffs()] for p in (p0, p1)
    ]
    rows = [[0j] * (r + 1 - len(row)) + row for row in rows]
    divisor, reduced = reduce(PolyTuple.from_rows(rows))
    gcd_degree = sympy.degree(sympy.gcd(p0, p1), z)
    assert divisor.degree == gcd_degree
    assert divisor.degree + reduced.r == r


def test_extended_curvature_matches_reduced_tuple(grid: SphereGrid) -> None:
    P = PolyTuple.from_rows([[1, -3, 2], [1, 2, -3]])
    _, reduced = reduce(P)
    np.testing.assert_allclose(
        extended_curvature(P, grid).values,
        curvature_field(reduced, grid).values,
        rtol=1e-8,
    )


def test_strata_parameter_count() -> None:
    generic = PolyTuple.from_rows([[1, 0, 1], [0, 1, 0]])
    assert strata_parameter_count(generic) == generic.q
    bubbled = PolyTuple.from_rows([[1, -3, 2], [1, 2, -3]])
    assert strata_parameter_count(bubbled) == bubbled.q - bubbled.k * 1


def test_chart_round_trip_and_largest_entry() -> None:
    P = PolyTuple.from_rows([[0.5, 2.0], [1.0j, -0.25]])
    chart = ModuliChart.containing(P)
    assert chart.fixed == 1
    w = chart.coordinates(P)
    np.testing.assert_allclose(chart.to_tuple(w).coeffs, P.coeffs / 2.0)
    assert np.all(np.abs(w) <= 1.0)


def test_variation_directions_skip_fixed_entry() -> None:
    chart = ModuliChart(1, 1, fixed=0)
    assert chart.directions() == [(0, 1), (1, 0), (1, 1)]
    e = variation(chart, 1)
    assert e[1, 0] == 1.0 and np.count_nonzero(e) == 1
    with pytest.raises(ValidationException):
        variation_for_entry(chart, (0, 0))
    with pytest.raises(ValidationException):
        variation(chart, 3)
