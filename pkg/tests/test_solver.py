"""Galerkin solver: exactness relations, invariants, convergence."""

import numpy as np
import pytest

from fraccond.conductivity import (
    Conductivity,
    Potential,
    bump_conductivity,
    liouville_potential,
)
from fraccond.geometry import GeometryConfig, mollifier_profile
from fraccond.operators import FracOperator, bilinear_form
from fraccond.solver import (
    ExteriorDatum,
    SolverError,
    coercivity_check,
    interior_system,
    solve_conductivity,
    solve_schrodinger,
)


def annulus_bump_datum(geom, center=2.5, width=0.4, height=1.0):
    x = geom.radius()
    vals = height * mollifier_profile((x - center) / width)
    vals = np.where(geom.omega_closure_mask(), 0.0, vals)
    return ExteriorDatum(geom, vals)


@pytest.fixture(scope="module")
def datum(geom):
    return annulus_bump_datum(geom)


class TestExteriorDatum:
    def test_interior_support_rejected(self, geom):
        vals = np.zeros(geom.shape)
        vals.reshape(-1)[geom.grid_points // 2] = 1.0  # x = 0 sits in Omega
        with pytest.raises(ValueError, match="closure"):
            ExteriorDatum(geom, vals)

    def test_valid_datum(self, geom, datum):
        assert np.all(datum.values[geom.omega_closure_mask()] == 0.0)


class TestSolveConductivity:
    def test_zero_datum_zero_solution(self, geom, op_quad, ones_gamma):
        z = ExteriorDatum(geom, np.zeros(geom.shape))
        sol = solve_conductivity(ones_gamma, z, op_quad)
        assert np.max(np.abs(sol.u.values)) == 0.0
        assert sol.energy == 0.0

    def test_exterior_values_preserved(self, geom, op_quad, ones_gamma, datum):
        sol = solve_conductivity(ones_gamma, datum, op_quad)
        outside = ~geom.omega_mask()
        assert np.array_equal(sol.u.values[outside], datum.values[outside])
        assert sol.residual <= 1e-10

    def test_unit_gamma_equals_zero_potential(self, geom, op_quad, ones_gamma, datum):
        a = solve_conductivity(ones_gamma, datum, op_quad)
        b = solve_schrodinger(Potential(geom, np.zeros(geom.shape)), datum, op_quad)
        assert np.max(np.abs(a.u.values - b.u.values)) <= 1e-14

    def test_constant_gamma_same_solution(self, geom, op_quad, ones_gamma, datum):
        g2 = Conductivity(geom, np.full(geom.shape, 2.0), gamma0=0.5)
        a = solve_conductivity(ones_gamma, datum, op_quad)
        b = solve_conductivity(g2, datum, op_quad)
        assert np.max(np.abs(a.u.values - b.u.values)) <= 1e-12
        assert b.energy == pytest.approx(2.0 * a.energy, rel=1e-12)

    def test_linearity(self, geom, op_quad, ones_gamma):
        f = annulus_bump_datum(geom, center=2.4, width=0.3)
        g = annulus_bump_datum(geom, center=2.7, width=0.35)
        combo = ExteriorDatum(geom, 2.0 * f.values - 0.5 * g.values)
        uf = solve_conductivity(ones_gamma, f, op_quad).u.values
        ug = solve_conductivity(ones_gamma, g, op_quad).u.values
        uc = solve_conductivity(ones_gamma, combo, op_quad).u.values
        err = np.max(np.abs(uc - (2.0 * uf - 0.5 * ug)))
        assert err <= 1e-10 * max(np.max(np.abs(uc)), 1e-30)

    def test_galerkin_orthogonality(self, geom, op_quad, datum):
        gam = bump_conductivity(geom, height=0.5, width=0.8)
        sol = solve_conductivity(gam, datum, op_quad)
        from fraccond.geometry import GridField

        w = GridField(geom, sol.u.values - datum.values)
        pairing = bilinear_form(sol.u, w, gam, op_quad)
        assert abs(pairing) <= 1e-8 * abs(sol.energy)

    def test_maximum_principle_smoke(self, geom, op_quad, ones_gamma, datum):
        sol = solve_conductivity(ones_gamma, datum, op_quad)
        assert sol.u.values.min() >= -1e-8 * datum.values.max()

    def test_self_convergence(self):
        sols = {}
        for N in (256, 512, 1024):
            g = GeometryConfig(n=1, s=0.4, box_halfwidth=6.0, grid_points=N)
            op = FracOperator(g, mode="quadrature")
            gam = bump_conductivity(g, height=0.5, width=0.8)
            sol = solve_conductivity(gam, annulus_bump_datum(g), op)
            sols[N] = sol.u.values
        # compare on the shared coarse grid points
        e_coarse = np.max(np.abs(sols[256] - sols[512][::2]))
        e_fine = np.max(np.abs(sols[512] - sols[1024][::2]))
        assert e_coarse / e_fine >= 1.5

    def test_residual_tolerance_enforced(self, geom, op_quad, ones_gamma, datum):
        with pytest.raises(SolverError, match="residual"):
            solve_conductivity(ones_gamma, datum, op_quad, tol=1e-300)


class TestLiouvilleCorrespondence:
    def test_transformed_solution_solves_schrodinger(self, geom, op_quad, datum):
        # gamma = 1 on the exterior: datum passes through the transform
        gam = bump_conductivity(geom, height=0.5, width=0.8)
        q = liouville_potential(gam, op_quad)
        u = solve_conductivity(gam, datum, op_quad)
        v = solve_schrodinger(q, datum, op_quad)
        transformed = gam.sqrt_values * u.u.values
        rel = np.max(np.abs(v.u.values - transformed)) / np.max(np.abs(v.u.values))
        assert rel <= 1e-5

    def test_energy_from_unit_gamma(self, geom, op_spec, op_quad, ones_gamma, datum):
        sol = solve_conductivity(ones_gamma, datum, op_quad)
        energy_direct = bilinear_form(sol.u, sol.u, None, op_quad)
        assert sol.energy == pytest.approx(energy_direct, rel=1e-10)


class TestCoercivity:
    def test_positive_for_unit(self, geom, op_quad, ones_gamma):
        lam = coercivity_check(ones_gamma, op_quad)
        assert lam > 0

    def test_monotone_in_gamma(self, geom, op_quad, ones_gamma):
        gam = bump_conductivity(geom, height=0.5, width=0.8)  # gamma >= 1
        assert coercivity_check(gam, op_quad) >= coercivity_check(ones_gamma, op_quad)

    def test_constant_scaling_doubles_spectrum(self, geom, op_quad, ones_gamma):
        g2 = Conductivity(geom, np.full(geom.shape, 2.0), gamma0=0.5)
        lam1 = coercivity_check(ones_gamma, op_quad)
        lam2 = coercivity_check(g2, op_quad)
        assert lam2 == pytest.approx(2.0 * lam1, rel=1e-10)

    def test_non_coercive_potential_reported(self, geom, op_quad):
        bad = Potential(geom, -50.0 * np.ones(geom.shape))
        with pytest.raises(SolverError, match="positive definite"):
            interior_system(bad, op_quad)

    def test_transformed_potential_coercive(self, geom, op_quad):
        gam = bump_conductivity(geom, height=0.9, width=0.9)
        q = liouville_potential(gam, op_quad)
        assert coercivity_check(q, op_quad) > 0


class TestSchrodingerSolve:
    def test_zero_everything(self, geom, op_quad):
        z = ExteriorDatum(geom, np.zeros(geom.shape))
        sol = solve_schrodinger(Potential(geom, np.zeros(geom.shape)), z, op_quad)
        assert np.max(np.abs(sol.u.values)) == 0.0

    def test_far_field_energy(self, geom, op_quad, op_spec, datum):
        sol = solve_schrodinger(Potential(geom, np.zeros(geom.shape)), datum, op_quad)
        direct = bilinear_form(sol.u, sol.u, None, op_quad)
        assert sol.energy == pytest.approx(direct, rel=1e-10)
