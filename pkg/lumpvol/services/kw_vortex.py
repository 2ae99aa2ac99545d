"""Gauge PDE of the s-vortex equations and the finite-s vortex metric.

Stored operators use the positive Laplacian Delta = laplacian(). The gauge
equations are written with the analyst Laplacian -Delta:

    -Delta psi = sqrt(-1) Lambda F_H - c_1
    -Delta phi_s = c(s) - s^2 h e^{phi_s},    c(s) = 2 c_1 - s^2

so Newton's Jacobian Delta + s^2 (-h) e^{phi} is positive definite.
"""

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from lumpvol.core.config import fs_scale, get_settings
from lumpvol.core.exceptions import DomainException, NoConvergenceException
from lumpvol.core.logging import get_logger
from lumpvol.models.metric import MetricMatrix
from lumpvol.models.rational_map import ModuliChart, PolyTuple
from lumpvol.models.sphere import ComplexArray, FloatArray, ScalarField, SphereGrid
from lumpvol.models.vortex import KWSolution, VortexConfig, VortexMetricReport
from lumpvol.services.l2_metric import (
    fs_pairing,
    orthogonality_defect,
    projected_variations,
)
from lumpvol.services.rational_maps import (
    curvature_field,
    derivative_coeffs,
    homogeneous_values,
    reduce,
    sections,
    variation_derivative_sections,
    variation_sections,
)
from lumpvol.services.sphere_geometry import (
    conformal_derivative,
    integrate,
    laplacian,
    poisson_solve,
)

logger = get_logger(__name__)

Initial = Union[None, str, ScalarField]


def analyst_laplacian(f: ScalarField) -> ScalarField:
    """-Delta: the sign convention of the gauge equations."""
    lap = laplacian(f)
    return ScalarField(f.grid, -lap.values)


def psi_solve(P: PolyTuple, grid: SphereGrid) -> ScalarField:
    """Zero-mean psi with -Delta psi = curvature_field(P) - c_1."""
    curv = curvature_field(P, grid)
    c1 = 2.0 * np.pi * P.r
    return poisson_solve(ScalarField(grid, c1 - curv.values), project_mean=True)


def norm_function(
    P: PolyTuple, grid: SphereGrid, psi: Optional[ScalarField] = None
) -> ScalarField:
    """h = -e^{2 psi} for unit-normalized sections."""
    psi = psi if psi is not None else psi_solve(P, grid)
    return ScalarField(grid, -np.exp(2.0 * psi.values.real))


def extended_norm_function(P: PolyTuple, grid: SphereGrid) -> ScalarField:
    """Norm function of the reduced tuple: the extension across a stratum."""
    _, reduced = reduce(P)
    return norm_function(reduced, grid)


def limit_solution(h: ScalarField) -> ScalarField:
    """phi_infinity = log(c_2 / -h)."""
    return ScalarField(h.grid, -np.log(-h.values.real))


def approx_solution(
    h: ScalarField, cfg: VortexConfig
) -> tuple[ScalarField, ScalarField]:
    """v_s = log[(-Delta(-log(-h)) - c(s)) / (-s^2 h)] and its error E_s.

    E_s = -Delta log(num / s^2), so that -Delta v_s = c(s) - s^2 h e^{v_s} + E_s.
    """
    grid = h.grid
    H = h.values.real
    log_neg_h = ScalarField(grid, np.log(-H))
    num = laplacian(log_neg_h).values - cfg.c
    if np.min(num) <= 0.0:
        raise DomainException(
            "approximate solution undefined: numerator not positive (s too small)",
            details={"min_numerator": float(np.min(num)), "s2": cfg.s2},
        )
    v = ScalarField(grid, np.log(num / (-cfg.s2 * H)))
    E = analyst_laplacian(ScalarField(grid, np.log(num / cfg.s2)))
    return v, E


class KazdanWarnerSolver:
    """Galerkin Newton solver for -Delta phi = c - s^2 h e^phi in harmonic space."""

    def __init__(
        self, h: ScalarField, cfg: VortexConfig, cg_rtol: Optional[float] = None
    ) -> None:
        self.grid = h.grid
        self.h = np.asarray(h.values.real, dtype=float)
        self.cfg = cfg
        self.cg_rtol = cg_rtol if cg_rtol is not None else get_settings().CG_RTOL
        self.size = int(np.prod(self.grid.coeff_shape))

    def _nodal(self, a: ComplexArray) -> FloatArray:
        return self.grid.synthesize(a).real

    def nodal_residual(self, a: ComplexArray) -> FloatArray:
        """Delta phi - s^2 h e^phi + c at the nodes."""
        phi = self._nodal(a)
        lap = self.grid.synthesize(self.grid.eigenvalues * a).real
        with np.errstate(over="ignore", invalid="ignore"):
            return lap - self.cfg.s2 * self.h * np.exp(phi) + self.cfg.c

    def galerkin_residual(self, F: FloatArray) -> tuple[ComplexArray, float]:
        Fa = self.grid.analyze(F)
        return Fa, float(np.max(np.abs(self.grid.synthesize(Fa).real)))

    def _operator(self, potential: FloatArray) -> LinearOperator:
        grid = self.grid
        coeff_shape = grid.coeff_shape
        lam = grid.eigenvalues
        off = ~grid.mask

        def matvec(x: ComplexArray) -> ComplexArray:
            a = x.reshape(coeff_shape)
            out = lam * a + grid.analyze(potential * grid.synthesize(a))
            out[off] = a[off]
            return out.ravel()

        op_shape = (self.size, self.size)
        return LinearOperator(op_shape, matvec=matvec, dtype=np.complex128)

    def _preconditioner(self, potential: FloatArray) -> LinearOperator:
        mean = float(np.sum(self.grid.weights * potential))
        diag = self.grid.eigenvalues + mean
        diag = np.where(self.grid.mask, diag, 1.0)
        inv = (1.0 / np.where(diag > 0.0, diag, 1.0)).ravel()
        return LinearOperator(
            (self.size, self.size), matvec=lambda x: inv * x, dtype=np.complex128
        )

    def solve_linear(self, potential: FloatArray, rhs: ComplexArray) -> ComplexArray:
        """Solve (Delta + potential) x = rhs in coefficient space."""
        rhs = np.where(self.grid.mask, rhs, 0.0)
        x, info = cg(
            self._operator(potential),
            rhs.ravel(),
            rtol=self.cg_rtol,
            atol=0.0,
            maxiter=10 * self.size,
            M=self._preconditioner(potential),
        )
        if info != 0:
            logger.debug("cg_inexact", info=info)
        return x.reshape(self.grid.coeff_shape)

    def potential(self, a: ComplexArray) -> FloatArray:
        """s^2 (-h) e^phi: the zeroth-order term of the Jacobian."""
        with np.errstate(over="ignore"):
            return self.cfg.s2 * (-self.h) * np.exp(self._nodal(a))

    def solve(
        self, phi0: FloatArray, tol: float, max_iter: int
    ) -> tuple[ComplexArray, float, float, int]:
        """Damped Newton from phi0; returns (coeffs, residual, aliasing, iterations)."""
        a = self.grid.analyze(phi0)
        a[~self.grid.mask] = 0.0
        F = self.nodal_residual(a)
        Fa, res = self.galerkin_residual(F)
        for iteration in range(max_iter):
            if res < tol:
                return a, res, float(np.max(np.abs(F))), iteration
            delta = self.solve_linear(self.potential(a), -Fa)
            step = 1.0
            while True:
                trial = a + step * delta
                F_trial = self.nodal_residual(trial)
                Fa_trial, res_trial = self.galerkin_residual(F_trial)
                if np.isfinite(res_trial) and res_trial < res:
                    break
                step /= 2.0
                if step < 1.0 / 64.0:
                    raise NoConvergenceException(res, iteration + 1, tol)
            a, F, Fa, res = trial, F_trial, Fa_trial, res_trial
            logger.debug(
                "newton_step", iteration=iteration + 1, residual=res, step=step
            )
        if res < tol:
            return a, res, float(np.max(np.abs(F))), max_iter
        raise NoConvergenceException(res, max_iter, tol)


def _initial_guess(h: ScalarField, cfg: VortexConfig, initial: Initial) -> FloatArray:
    if isinstance(initial, ScalarField):
        return np.asarray(initial.values.real, dtype=float)
    if initial == "limit":
        return limit_solution(h).values
    try:
        v, _ = approx_solution(h, cfg)
        return v.values
    except DomainException:
        return limit_solution(h).values


def kw_solve(
    h: ScalarField,
    cfg: VortexConfig,
    tol: Optional[float] = None,
    initial: Initial = None,
    max_iter: Optional[int] = None,
) -> KWSolution:
    """Solve -Delta phi = c(s) - s^2 h e^phi by damped Newton from v_s."""
    settings = get_settings()
    tol = tol if tol is not None else settings.NEWTON_TOL
    max_iter = max_iter if max_iter is not None else settings.NEWTON_MAX_ITER
    cfg.validate()
    if np.max(h.values.real) >= 0.0:
        raise DomainException(
            "norm function must be strictly negative",
            details={"max_h": float(np.max(h.values.real))},
        )
    solver = KazdanWarnerSolver(h, cfg)
    phi0 = _initial_guess(h, cfg, initial)
    a, res, alias, iterations = solver.solve(phi0, tol, max_iter)
    logger.debug("newton_converged", iterations=iterations, residual=res, s2=cfg.s2)
    phi = ScalarField(h.grid, h.grid.synthesize(a).real)
    return KWSolution(
        phi=phi,
        config=cfg,
        residual=res,
        aliasing_residual=alias,
        iterations=iterations,
    )


def linearized_solve(
    sol: KWSolution, h: ScalarField, h_alpha: ScalarField, cfg: VortexConfig
) -> ScalarField:
    """Solve (Delta + s^2 (-h) e^phi) phi^alpha = s^2 h^alpha e^phi."""
    solver = KazdanWarnerSolver(h, cfg)
    e_phi = np.exp(sol.phi.values.real)
    potential = cfg.s2 * (-solver.h) * e_phi
    rhs = h.grid.analyze(cfg.s2 * h_alpha.values * e_phi)
    x = solver.solve_linear(potential, rhs)
    values = h.grid.synthesize(x)
    return ScalarField(h.grid, values.real if np.isrealobj(h_alpha.values) else values)


@dataclass(frozen=True, eq=False)
class ModuliDerivatives:
    """Holomorphic chart derivatives of log n, psi and h."""

    dlog_n: list[ScalarField]
    psi: list[ScalarField]
    h: list[ScalarField]


def moduli_derivatives(
    P: PolyTuple,
    chart: ModuliChart,
    grid: SphereGrid,
    h: ScalarField,
) -> ModuliDerivatives:
    """d_alpha log n = <v_alpha, sigma>/n; h^alpha = 2 psi^alpha h."""
    sigma = sections(P, grid)
    n = np.sum(np.abs(sigma) ** 2, axis=0)
    V = variation_sections(chart, grid)
    dlog = np.einsum("aipq,ipq->apq", V, sigma.conj()) / n
    dlog_n, psi_a, h_a = [], [], []
    for alpha in range(chart.q):
        f = ScalarField(grid, dlog[alpha])
        curv_alpha = -0.5 * laplacian(f).values
        psi_alpha = poisson_solve(ScalarField(grid, -curv_alpha), project_mean=True)
        dlog_n.append(f)
        psi_a.append(psi_alpha)
        h_a.append(ScalarField(grid, 2.0 * psi_alpha.values * h.values.real))
    return ModuliDerivatives(dlog_n, psi_a, h_a)


def connection_variation(
    P: PolyTuple, chart: ModuliChart, grid: SphereGrid
) -> ComplexArray:
    """A^alpha = (1+|z|^2) d_z d_alpha (-log n), shape (q, nlat, nlon)."""
    sigma = sections(P, grid)
    n = np.sum(np.abs(sigma) ** 2, axis=0)
    tau = homogeneous_values(derivative_coeffs(P), grid)
    V = variation_sections(chart, grid)
    dV = variation_derivative_sections(chart, grid)
    v_sigma = np.einsum("aipq,ipq->apq", V, sigma.conj())
    dv_sigma = np.einsum("aipq,ipq->apq", dV, sigma.conj())
    tau_sigma = np.sum(tau * sigma.conj(), axis=0)
    bracket = dv_sigma / n - v_sigma * tau_sigma / n**2
    return -bracket / grid.Z1


def horizontal_terms(
    A: ComplexArray,
    eta: ComplexArray,
    density: FloatArray,
    grid: SphereGrid,
    s2: float,
) -> tuple[ComplexArray, ComplexArray]:
    """Connection and section-gauge parts of a tangent representative's norm.

    The representative of direction alpha is the connection variation
    a = A^alpha + D eta_alpha together with e^u (p^alpha + (eta_alpha - l_alpha) p).
    The unitary connection form is weighted by 1/s^2, so its (1,0) part pairs
    with (4 pi / s^2) int a conj(b); the gauge part pairs with int e^{2u} eta
    conj(eta). The norm is smallest when (Delta + s^2 e^{2u}) eta = Delta l.
    """
    w = grid.weights
    d_eta = [conformal_derivative(ScalarField(grid, e)).values for e in eta]
    a_form = A + np.array(d_eta)
    X = (4.0 * np.pi / s2) * np.einsum("apq,bpq,pq->ab", a_form, a_form.conj(), w)
    Y = np.einsum("apq,bpq,pq->ab", eta, eta.conj(), density * w)
    return X, Y


def vortex_metric(
    P: PolyTuple,
    cfg: VortexConfig,
    grid: SphereGrid,
    chart: Optional[ModuliChart] = None,
    normalization: Optional[str] = None,
    solution: Optional[KWSolution] = None,
) -> VortexMetricReport:
    """g_s = X + Y + Z at a chart point of Hol, all scaled by the target kappa.

    Each chart direction is represented by its gauge-orthogonal tangent vector:
    eta_alpha = 2 u_s^alpha = phi_s^alpha + 2 psi^alpha, so that
    (he^{phi_s})^alpha = (h^alpha + h phi_s^alpha) e^{phi_s} = h e^{phi_s} eta_alpha.
    """
    cfg.validate()
    chart = chart or ModuliChart.containing(P)
    kappa = fs_scale(normalization or get_settings().TARGET_FS_NORMALIZATION)
    w = grid.weights

    psi = psi_solve(P, grid)
    h = norm_function(P, grid, psi)
    sol = solution if solution is not None else kw_solve(h, cfg)
    derivs = moduli_derivatives(P, chart, grid, h)

    phi_alpha = {a: linearized_solve(sol, h, derivs.h[a], cfg) for a in range(chart.q)}
    sol = KWSolution(
        phi=sol.phi,
        config=cfg,
        residual=sol.residual,
        aliasing_residual=sol.aliasing_residual,
        iterations=sol.iterations,
        psi=psi,
        derivatives=phi_alpha,
        psi_derivatives=dict(enumerate(derivs.psi)),
        attempts=sol.attempts,
    )

    e_phi = np.exp(sol.phi.values.real)
    he_phi = h.values.real * e_phi
    eta = np.array([2.0 * sol.u_derivative(a).values for a in range(chart.q)])
    he_phi_alpha = np.array(
        [
            (derivs.h[a].values + h.values.real * phi_alpha[a].values) * e_phi
            for a in range(chart.q)
        ]
    )

    A = connection_variation(P, chart, grid)
    X, Y = horizontal_terms(A, eta, -he_phi, grid, cfg.s2)

    v_perp, sigma, n = projected_variations(P, chart, grid)
    Z = np.einsum("abpq,pq->ab", fs_pairing(v_perp, n), -he_phi * w)

    ell = np.array([f.values for f in derivs.dlog_n])
    W = -np.einsum("apq,bpq,pq->ab", he_phi_alpha, ell.conj(), w)
    slice_defect = float(np.max(np.abs(X + Y - W)) / max(np.max(np.abs(Z)), 1e-300))

    X, Y, Z = kappa * X, kappa * Y, kappa * Z
    g = MetricMatrix(
        X + Y + Z,
        chart,
        {
            "band_limit": grid.L,
            "boundary_proximity": float(np.min(n) / np.max(n)),
            "orthogonality_defect": orthogonality_defect(v_perp, sigma, n),
        },
    )
    diagnostics = {
        "residual": sol.residual,
        "aliasing_residual": sol.aliasing_residual,
        "iterations": sol.iterations,
        "attempts": sol.attempts,
        "integral_he_phi": integrate(ScalarField(grid, he_phi)).real,
        "gauge_slice_defect": slice_defect,
    }
    return VortexMetricReport(g, X, Y, Z, cfg, sol, diagnostics)


@dataclass(frozen=True)
class BoundCheck:
    """Maximum-principle bounds of a converged solve against v_s, E_s."""

    sandwich_violation: float
    uniform_lhs: float
    uniform_rhs: float
    integral_value: float
    integral_expected: float
    k1: float
    k2: float
    slack: float

    @property
    def holds(self) -> bool:
        return (
            self.sandwich_violation <= self.slack
            and self.uniform_lhs <= self.uniform_rhs + self.slack
            and abs(self.integral_value) <= self.k1 + self.k2 + self.slack
        )


def bound_checks(
    sol: KWSolution, h: ScalarField, cfg: VortexConfig, slack: float = 1e-8
) -> BoundCheck:
    """Sandwich, uniform and integral bounds for a converged solve.

    With R = E_s / (-s^2 h e^{v_s}): h e^{v_s} max R <= h e^{phi_s} - h e^{v_s}
    <= h e^{v_s} min R. The slack is widened by the unresolved aliasing residual.
    """
    grid = h.grid
    H = h.values.real
    v, E = approx_solution(h, cfg)
    he_v = H * np.exp(v.values)
    he_phi = H * np.exp(sol.phi.values.real)
    R = E.values.real / (-cfg.s2 * he_v)
    diff = he_phi - he_v
    lower = he_v * np.max(R)
    upper = he_v * np.min(R)
    tolerance = slack + sol.aliasing_residual / cfg.s2
    violation = float(max(np.max(lower - diff), np.max(diff - upper), 0.0))

    uniform_lhs = float(np.max(np.abs(diff)))
    k2 = float(np.max(np.abs(he_v)) * np.max(np.abs(E.values.real / he_v)) / cfg.s2)
    integral_value = integrate(ScalarField(grid, he_phi)).real
    return BoundCheck(
        sandwich_violation=violation,
        uniform_lhs=uniform_lhs,
        uniform_rhs=k2,
        integral_value=integral_value,
        integral_expected=cfg.c / cfg.s2,
        k1=abs(cfg.c) / cfg.s2,
        k2=k2,
        slack=tolerance,
    )
