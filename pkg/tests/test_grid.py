import math

import numpy as np
import pytest

from turbsolve import (
    ScalarField,
    gradient,
    integrate,
    linf_norm,
    lp_norm,
    make_grid,
    weighted_energy,
)

# analytic oracles on the unit square
SIN_SIN_INTEGRAL = 4.0 / math.pi**2  # integral of sin(pi x) sin(pi y)
SIN_L1 = 2.0 / math.pi  # integral of |sin(pi x)|
SIN_SIN_ENERGY = math.pi**2 / 2.0  # integral of |grad sin sin|^2


def sin_sin(grid):
    return ScalarField.from_function(grid, lambda X, Y: np.sin(np.pi * X) * np.sin(np.pi * Y))


class TestMakeGrid:
    def test_basic(self):
        g = make_grid(2, 2, 1.0, 1.0)
        assert g.nx * g.ny == 4
        assert g.hx == 0.5 and g.hy == 0.5

    def test_rectangular(self):
        g = make_grid(10, 5, 2.0, 1.0)
        assert g.hx == pytest.approx(0.2)
        assert g.hy == pytest.approx(0.2)

    @pytest.mark.parametrize("bad", [(1, 2, 1, 1), (2, 1, 1, 1), (2, 2, 0, 1), (2, 2, 1, -1)])
    def test_rejects_bad_sizes(self, bad):
        with pytest.raises(ValueError):
            make_grid(*bad)

    def test_measure_matches_cell_sum(self):
        g = make_grid(7, 13, 2.5, 0.75)
        assert g.nx * g.ny * g.cell_area == pytest.approx(g.area, rel=1e-15)


class TestScalarField:
    def test_rejects_nonfinite(self):
        g = make_grid(2, 2, 1.0, 1.0)
        with pytest.raises(ValueError):
            ScalarField(g, np.array([[1.0, np.nan], [0.0, 0.0]]))

    def test_rejects_wrong_shape(self):
        g = make_grid(3, 2, 1.0, 1.0)
        with pytest.raises(ValueError):
            ScalarField(g, np.zeros((2, 2)))


class TestGradient:
    def test_constant_field(self):
        g = make_grid(4, 4, 1.0, 1.0)
        c = 0.7
        fv = gradient(ScalarField.full(g, c))
        assert np.allclose(fv.fx[1:-1, :], 0.0)
        assert np.allclose(fv.fy[:, 1:-1], 0.0)
        assert np.allclose(fv.fx[0, :], 2 * c / g.hx)
        assert np.allclose(fv.fx[-1, :], -2 * c / g.hx)
        assert np.allclose(fv.fy[:, 0], 2 * c / g.hy)
        assert np.allclose(fv.fy[:, -1], -2 * c / g.hy)

    def test_linear_field_exact_interior(self):
        g = make_grid(8, 6, 1.0, 1.0)
        v = ScalarField.from_function(g, lambda X, Y: X)
        fv = gradient(v)
        assert np.allclose(fv.fx[1:-1, :], 1.0, atol=1e-14)
        assert np.allclose(fv.fy[:, 1:-1], 0.0, atol=1e-14)

    def test_affine_field_exact_interior(self):
        g = make_grid(9, 5, 2.0, 1.5)
        v = ScalarField.from_function(g, lambda X, Y: 2.0 * X - 3.0 * Y + 0.25)
        fv = gradient(v)
        assert np.allclose(fv.fx[1:-1, :], 2.0, atol=1e-13)
        assert np.allclose(fv.fy[:, 1:-1], -3.0, atol=1e-13)

    def test_zero_field(self):
        g = make_grid(3, 3, 1.0, 1.0)
        fv = gradient(ScalarField.zeros(g))
        assert not fv.fx.any() and not fv.fy.any()


class TestIntegrate:
    def test_constant_unit_square(self):
        g = make_grid(5, 5, 1.0, 1.0)
        assert integrate(ScalarField.full(g, 1.0)) == pytest.approx(1.0, rel=1e-15)

    def test_constant_rectangle(self):
        g = make_grid(6, 3, 2.0, 1.0)
        assert integrate(ScalarField.full(g, 3.0)) == pytest.approx(6.0, rel=1e-15)

    def test_sin_sin_against_analytic(self):
        g = make_grid(64, 64, 1.0, 1.0)
        assert integrate(sin_sin(g)) == pytest.approx(SIN_SIN_INTEGRAL, abs=1e-3)

    def test_linearity(self):
        g = make_grid(6, 7, 1.0, 2.0)
        rng = np.random.default_rng(3)
        a = ScalarField(g, rng.standard_normal(g.shape))
        b = ScalarField(g, rng.standard_normal(g.shape))
        combo = ScalarField(g, 2.0 * a.values - 0.5 * b.values)
        assert integrate(combo) == pytest.approx(2 * integrate(a) - 0.5 * integrate(b), rel=1e-12)

    def test_second_order_refinement(self):
        errs = []
        for n in (16, 32):
            g = make_grid(n, n, 1.0, 1.0)
            errs.append(abs(integrate(sin_sin(g)) - SIN_SIN_INTEGRAL))
        assert errs[0] / errs[1] >= 3.5


class TestNorms:
    def test_constant_l2(self):
        g = make_grid(4, 4, 1.0, 1.0)
        assert lp_norm(ScalarField.full(g, 2.0), 2.0) == pytest.approx(2.0, rel=1e-14)

    def test_linf(self):
        g = make_grid(2, 2, 1.0, 1.0)
        v = ScalarField(g, np.array([[1.0, -3.0], [2.0, 0.0]]))
        assert linf_norm(v) == 3.0
        assert lp_norm(v, np.inf) == 3.0

    def test_sin_l1_against_analytic(self):
        g = make_grid(128, 8, 1.0, 1.0)
        v = ScalarField.from_function(g, lambda X, Y: np.sin(np.pi * X))
        assert lp_norm(v, 1.0) == pytest.approx(SIN_L1, abs=1e-3)

    def test_rejects_p_below_one(self):
        g = make_grid(2, 2, 1.0, 1.0)
        with pytest.raises(ValueError):
            lp_norm(ScalarField.zeros(g), 0.5)

    def test_absolute_homogeneity(self):
        g = make_grid(5, 4, 1.0, 1.0)
        rng = np.random.default_rng(7)
        v = ScalarField(g, rng.standard_normal(g.shape))
        for p in (1.0, 1.4, 2.0, 3.0):
            scaled = ScalarField(g, -2.5 * v.values)
            assert lp_norm(scaled, p) == pytest.approx(2.5 * lp_norm(v, p), rel=1e-12)


class TestWeightedEnergy:
    def test_manufactured_against_analytic(self):
        g = make_grid(128, 128, 1.0, 1.0)
        ones = ScalarField.full(g, 1.0)
        assert weighted_energy(ones, sin_sin(g)) == pytest.approx(SIN_SIN_ENERGY, abs=1e-2)

    def test_zero_field(self):
        g = make_grid(4, 4, 1.0, 1.0)
        assert weighted_energy(ScalarField.full(g, 1.0), ScalarField.zeros(g)) == 0.0

    def test_linear_in_coefficient(self):
        g = make_grid(16, 16, 1.0, 1.0)
        v = sin_sin(g)
        e1 = weighted_energy(ScalarField.full(g, 1.0), v)
        e2 = weighted_energy(ScalarField.full(g, 2.0), v)
        assert e2 == pytest.approx(2.0 * e1, rel=1e-14)

    def test_discrete_coercivity(self):
        g = make_grid(9, 11, 1.0, 1.0)
        rng = np.random.default_rng(11)
        delta_min = 0.3
        c = ScalarField(g, delta_min + rng.random(g.shape))
        v = ScalarField(g, rng.standard_normal(g.shape))
        assert weighted_energy(c, v) >= delta_min * weighted_energy(ScalarField.full(g, 1.0), v) * (1 - 1e-12)

    def test_rejects_nonpositive_coefficient(self):
        g = make_grid(3, 3, 1.0, 1.0)
        c = ScalarField(g, np.zeros(g.shape))
        with pytest.raises(ValueError):
            weighted_energy(c, ScalarField.zeros(g))

    def test_second_order_refinement(self):
        errs = []
        for n in (32, 64):
            g = make_grid(n, n, 1.0, 1.0)
            e = weighted_energy(ScalarField.full(g, 1.0), sin_sin(g))
            errs.append(abs(e - SIN_SIN_ENERGY))
        assert errs[0] / errs[1] >= 3.5
