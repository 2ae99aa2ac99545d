import math

import numpy as np
import pytest
from pytest_mock import MockerFixture

from lumpvol.core.exceptions import (
    BradlowViolationException,
    DomainException,
    NoConvergenceException,
)
from lumpvol.models.rational_map import ModuliChart, PolyTuple
from lumpvol.models.sphere import ScalarField, SphereGrid
from lumpvol.models.vortex import KWSolution, VortexConfig
from lumpvol.services.kw_vortex import (
    KazdanWarnerSolver,
    analyst_laplacian,
    approx_solution,
    bound_checks,
    connection_variation,
    extended_norm_function,
    horizontal_terms,
    kw_solve,
    limit_solution,
    linearized_solve,
    norm_function,
    psi_solve,
    vortex_metric,
)
from lumpvol.services.l2_metric import l2_metric_matrix
from lumpvol.services.rational_maps import reduce
from lumpvol.services.sphere_geometry import (
    integrate,
    laplacian,
    spherical_harmonic,
)
from lumpvol.tasks.solver_tasks import robust_kw_solve
from tests.helpers import mild_map

S2 = 32.0 * math.pi


def _constant(grid: SphereGrid, value: float) -> ScalarField:
    return ScalarField(grid, np.full(grid.shape, value))


def _smooth(grid: SphereGrid) -> np.ndarray:
    return (
        0.3 * spherical_harmonic(grid, 2, 1).values.real
        + 0.2 * spherical_harmonic(grid, 1, 0).values.real
        - 0.1
    )


def test_config_bradlow_and_saturation() -> None:
    cfg = VortexConfig(S2, r=1)
    assert cfg.c1 == pytest.approx(2 * math.pi)
    assert cfg.c == pytest.approx(4 * math.pi - S2)
    assert cfg.bradlow_bound == pytest.approx(4 * math.pi)
    with pytest.raises(BradlowViolationException):
        VortexConfig(2 * math.pi, r=1).validate()
    with pytest.raises(DomainException):
        VortexConfig(4 * math.pi, r=1).validate()


def test_constant_norm_function_has_zero_solution(grid: SphereGrid) -> None:
    cfg = VortexConfig(10.0, r=1, c1_override=0.0)
    sol = kw_solve(_constant(grid, -1.0), cfg)
    assert sol.phi.sup() < 1e-12
    assert sol.residual < 1e-9


def test_constant_norm_function_newton_from_zero(grid: SphereGrid) -> None:
    cfg = VortexConfig(10.0, r=1, c1_override=0.0)
    sol = kw_solve(_constant(grid, -2.0), cfg, tol=1e-11, initial=_constant(grid, 0.0))
    np.testing.assert_allclose(sol.phi.values, -math.log(2.0), atol=1e-11)
    assert sol.iterations >= 1


def test_manufactured_solution_is_recovered(grid: SphereGrid) -> None:
    cfg = VortexConfig(S2, r=1)
    phi_star = _smooth(grid)
    lap = laplacian(ScalarField(grid, phi_star)).values
    h = ScalarField(grid, (lap + cfg.c) / (cfg.s2 * np.exp(phi_star)))
    assert h.max() < 0.0
    sol = kw_solve(h, cfg)
    np.testing.assert_allclose(sol.phi.values, phi_star, atol=1e-9)


def test_newton_operator_on_constant_potential(grid: SphereGrid) -> None:
    h = ScalarField(grid, -np.exp(_smooth(grid)))
    solver = KazdanWarnerSolver(h, VortexConfig(S2, r=1))
    rng = np.random.default_rng(4)
    a = rng.standard_normal(grid.coeff_shape) + 1j * rng.standard_normal(
        grid.coeff_shape
    )
    a[~grid.mask] = 0.0
    op = solver._operator(np.full(grid.shape, 3.0))
    assert op.shape == (solver.size, solver.size)
    out = op.matvec(a.ravel()).reshape(grid.coeff_shape)
    np.testing.assert_allclose(
        out[grid.mask], (grid.eigenvalues + 3.0)[grid.mask] * a[grid.mask], atol=1e-10
    )


def test_newton_solve_on_non_constant_norm_function(fine_grid: SphereGrid) -> None:
    cfg = VortexConfig(S2, r=1)
    h = norm_function(mild_map(6), fine_grid)
    sol = kw_solve(h, cfg)
    assert sol.residual < 1e-9
    assert sol.iterations >= 1


def test_identity_map_solves_exactly(identity_map: PolyTuple, grid: SphereGrid) -> None:
    psi = psi_solve(identity_map, grid)
    assert psi.sup() < 1e-12
    h = norm_function(identity_map, grid, psi)
    np.testing.assert_allclose(h.values, -1.0, atol=1e-12)
    cfg = VortexConfig(S2, r=1)
    sol = kw_solve(h, cfg)
    exact = math.log(1.0 - 4.0 * math.pi / S2)
    np.testing.assert_allclose(sol.phi.values, exact, atol=1e-12)
    assert sol.residual < 1e-9
    assert sol.iterations <= 10
    v, E = approx_solution(h, cfg)
    np.testing.assert_allclose(v.values, exact, atol=1e-12)
    assert E.sup() < 1e-10


def test_psi_has_zero_mean_and_chern_number(fine_grid: SphereGrid) -> None:
    P = mild_map(1)
    psi = psi_solve(P, fine_grid)
    assert abs(integrate(psi)) < 1e-12
    c1 = 2.0 * math.pi * P.r
    total = integrate(ScalarField(fine_grid, c1 - analyst_laplacian(psi).values))
    assert total.real == pytest.approx(2.0 * math.pi * P.r, rel=1e-8)


def test_psi_solve_on_concentrated_map(grid: SphereGrid) -> None:
    P = PolyTuple.from_rows([[1, 0], [0, 0.05]])
    psi = psi_solve(P, grid)
    assert np.all(np.isfinite(psi.values))
    assert abs(integrate(psi)) < 1e-12
    assert norm_function(P, grid, psi).max() < 0.0


def test_norm_function_is_negative(fine_grid: SphereGrid) -> None:
    h = norm_function(mild_map(2, k=2), fine_grid)
    assert h.max() < 0.0


def test_extended_norm_function_uses_reduced_tuple(grid: SphereGrid) -> None:
    P = PolyTuple.from_rows([[1, -3, 2], [1, 2, -3]])
    _, reduced = reduce(P)
    np.testing.assert_allclose(
        extended_norm_function(P, grid).values,
        norm_function(reduced, grid).values,
        rtol=1e-8,
    )


def test_approx_solution_residual_identity(fine_grid: SphereGrid) -> None:
    cfg = VortexConfig(S2, r=1)
    h = norm_function(mild_map(3), fine_grid)
    v, E = approx_solution(h, cfg)
    H = h.values.real
    lhs = analyst_laplacian(v).values
    rhs = cfg.c - cfg.s2 * H * np.exp(v.values) + E.values
    assert np.max(np.abs(lhs - rhs)) < 1e-8


def test_approx_solution_undefined_for_small_coupling(grid: SphereGrid) -> None:
    h = ScalarField(grid, -np.exp(2.0 * _smooth(grid) * 20.0))
    cfg = VortexConfig(4.0 * math.pi + 1e-3, r=1)
    with pytest.raises(DomainException):
        approx_solution(h, cfg)


def test_limit_solution(grid: SphereGrid) -> None:
    phi_inf = limit_solution(_constant(grid, -math.e))
    np.testing.assert_allclose(phi_inf.values, -1.0)


def test_linearized_solve_with_zero_source(grid: SphereGrid) -> None:
    cfg = VortexConfig(S2, r=1)
    h = _constant(grid, -1.0)
    sol = kw_solve(h, cfg)
    out = linearized_solve(sol, h, _constant(grid, 0.0), cfg)
    assert out.sup() < 1e-14


def test_linearized_solve_matches_finite_differences(grid: SphereGrid) -> None:
    cfg = VortexConfig(S2, r=1)
    h = ScalarField(grid, -np.exp(_smooth(grid)))
    g = ScalarField(grid, 0.5 * spherical_harmonic(grid, 3, 2).values.real * h.values)
    sol = kw_solve(h, cfg, tol=1e-11)
    lin = linearized_solve(sol, h, g, cfg).values

    errors = []
    for eps in (1e-2, 1e-3):
        shifted = ScalarField(grid, h.values + eps * g.values)
        fd = (kw_solve(shifted, cfg, tol=1e-11).phi.values - sol.phi.values) / eps
        errors.append(np.max(np.abs(fd - lin)))
    assert errors[1] < 1e-3 * max(1.0, np.max(np.abs(lin)))
    assert errors[0] / errors[1] > 5.0


def test_bound_checks_identity(identity_map: PolyTuple, grid: SphereGrid) -> None:
    cfg = VortexConfig(S2, r=1)
    h = norm_function(identity_map, grid)
    checks = bound_checks(kw_solve(h, cfg), h, cfg)
    assert checks.holds
    assert checks.sandwich_violation <= checks.slack


def test_bound_checks_mild_map(fine_grid: SphereGrid) -> None:
    cfg = VortexConfig(S2, r=1)
    h = norm_function(mild_map(5), fine_grid)
    sol = kw_solve(h, cfg)
    checks = bound_checks(sol, h, cfg)
    assert checks.holds
    assert checks.integral_value == pytest.approx(checks.integral_expected, abs=1e-9)
    assert checks.k1 <= 1.0 + 2.0 * cfg.c1 / (4.0 * math.pi * cfg.r)


def test_vortex_metric_assembly(identity_map: PolyTuple, grid: SphereGrid) -> None:
    cfg = VortexConfig(S2, r=1)
    report = vortex_metric(identity_map, cfg, grid, ModuliChart(1, 1, 0))
    assert report.assembly_defect() < 1e-12
    assert report.g.hermitian_defect() < 1e-10
    assert report.g.diagnostics["orthogonality_defect"] < 1e-12
    assert report.diagnostics["integral_he_phi"] == pytest.approx(cfg.c / cfg.s2)
    u = report.solution.u
    np.testing.assert_allclose(
        u.values, report.solution.phi.values / 2 + report.solution.psi.values
    )


def test_vortex_metric_converges_to_l2_metric(
    identity_map: PolyTuple, grid: SphereGrid
) -> None:
    chart = ModuliChart(1, 1, 0)
    G = l2_metric_matrix(identity_map, grid, chart).matrix
    g_diffs, z_diffs = [], []
    for factor in (32, 128, 512):
        cfg = VortexConfig(factor * math.pi, r=1)
        report = vortex_metric(identity_map, cfg, grid, chart)
        g_diffs.append(np.max(np.abs(report.g.matrix - G)))
        z_diffs.append(np.max(np.abs(report.Z - G)))
    assert g_diffs[0] > g_diffs[1] > g_diffs[2]
    assert z_diffs[0] > z_diffs[1] > z_diffs[2]


@pytest.mark.parametrize("factor", [8, 32, 512])
def test_identity_vortex_metric_closed_form(
    identity_map: PolyTuple, grid: SphereGrid, factor: int
) -> None:
    chart = ModuliChart(1, 1, 0)
    s2 = factor * math.pi
    G = l2_metric_matrix(identity_map, grid, chart).matrix
    report = vortex_metric(identity_map, VortexConfig(s2, r=1), grid, chart)
    # constant e^{2u} = 1 - 4 pi / s^2 and l=1 gauge modes with eigenvalue 8 pi
    scale = (1.0 - 4.0 * math.pi / s2) * (s2 + 8.0 * math.pi) / (s2 + 4.0 * math.pi)
    np.testing.assert_allclose(report.g.matrix, scale * G, rtol=1e-9, atol=1e-12)
    assert report.diagnostics["gauge_slice_defect"] < 1e-10


def test_vortex_metric_uses_gauge_orthogonal_representative(
    fine_grid: SphereGrid,
) -> None:
    P = mild_map(8)
    chart = ModuliChart.containing(P)
    cfg = VortexConfig(S2, r=1)
    report = vortex_metric(P, cfg, fine_grid, chart)
    sol = report.solution
    density = np.exp(sol.phi.values.real) * np.exp(2.0 * sol.psi.values.real)
    A = connection_variation(P, chart, fine_grid)
    eta = np.array([2.0 * sol.u_derivative(a).values for a in range(chart.q)])
    f = spherical_harmonic(fine_grid, 2, 1).values + 0.5 * spherical_harmonic(
        fine_grid, 3, -2
    ).values

    def norms(shift: float) -> np.ndarray:
        X, Y = horizontal_terms(A, eta + shift * f[None], density, fine_grid, cfg.s2)
        return np.real(np.diag(X + Y))

    base, up, down = norms(0.0), norms(1.0), norms(-1.0)
    curvature = up + down - 2.0 * base
    assert np.all(curvature > 0.0)
    assert np.max(np.abs(up - down) / curvature) < 1e-5
    assert report.diagnostics["gauge_slice_defect"] < 1e-5


@pytest.mark.slow
def test_gauge_variation_decays_like_inverse_coupling(fine_grid: SphereGrid) -> None:
    P = mild_map(7)
    chart = ModuliChart.containing(P)
    s2_values = [f * math.pi for f in (32, 64, 128, 256, 512)]
    sups = []
    for s2 in s2_values:
        report = vortex_metric(P, VortexConfig(s2, r=1), fine_grid, chart)
        sups.append(
            max(report.solution.u_derivative(a).sup() for a in range(chart.q))
        )
    slope, _ = np.polyfit(0.5 * np.log(s2_values), np.log(sups), 1)
    assert -2.3 <= slope <= -1.7


def test_robust_solve_escalates_after_failure(
    mocker: MockerFixture, grid: SphereGrid
) -> None:
    h = _constant(grid, -1.0)
    cfg = VortexConfig(S2, r=1)
    real = kw_solve(h, cfg)
    solve = mocker.patch(
        "lumpvol.tasks.solver_tasks.kw_solve",
        side_effect=[NoConvergenceException(1.0, 50, 1e-9), real],
    )
    sol = robust_kw_solve(h, cfg)
    assert isinstance(sol, KWSolution)
    assert sol.attempts == 2
    assert solve.call_args_list[1].kwargs["initial"] == "limit"


def test_robust_solve_gives_up(mocker: MockerFixture, grid: SphereGrid) -> None:
    solve = mocker.patch(
        "lumpvol.tasks.solver_tasks.kw_solve",
        side_effect=NoConvergenceException(1.0, 50, 1e-9),
    )
    with pytest.raises(NoConvergenceException):
        robust_kw_solve(_constant(grid, -1.0), VortexConfig(S2, r=1), attempts=3)
    assert solve.call_count == 3
    assert solve.call_args_list[2].kwargs["max_iter"] == 2 * 50
