import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from dissolab.analytic1d import sech_params
from dissolab.model import (
    DensityField,
    EnergyBreakdown,
    ExchangeSpec,
    LineGrid,
    RadialGrid,
    XCKind,
    energy_1d,
    energy_3d,
    hartree_energy_radial,
    hartree_potential_radial,
)


@pytest.fixture(scope="module")
def line():
    return LineGrid.around([0.0], 40.0, 0.005)


@pytest.fixture(scope="module")
def radial():
    return RadialGrid.log()


def hydrogen(grid):
    return DensityField.from_function(grid, lambda r: np.exp(-2 * r) / np.pi)


def hartree_1s_by_quadrature():
    # shell theorem with the potential itself integrated numerically
    rho = lambda r: np.exp(-2 * r) / np.pi

    def v(r):
        inner = quad(lambda s: 4 * np.pi * s * s * rho(s), 0, r)[0]
        outer = quad(lambda s: 4 * np.pi * s * rho(s), r, np.inf)[0]
        return inner / r + outer

    return 0.5 * quad(lambda r: 4 * np.pi * r * r * rho(r) * v(r), 0, np.inf, limit=200)[0]


# --- ExchangeSpec -----------------------------------------------------------

@pytest.mark.parametrize("xc", [ExchangeSpec.contact(0.7), ExchangeSpec.dirac(0.7386), ExchangeSpec.dirac(0.0)])
def test_exchange_assumptions(xc):
    rho = np.linspace(0, 50, 1001)
    assert xc.energy_density(0.0) == 0.0
    assert np.all(xc.derivative(rho) <= 0)


def test_exchange_forms():
    rho = np.array([0.0, 0.5, 2.0, 8.0])
    assert np.allclose(ExchangeSpec.contact(1.5).energy_density(rho), -1.5 * rho**2)
    assert np.allclose(ExchangeSpec.dirac(2.0).energy_density(rho), -2.0 * rho ** (4 / 3))
    # derivative against central differences
    for xc in (ExchangeSpec.contact(1.5), ExchangeSpec.dirac(2.0)):
        x = np.array([0.3, 1.0, 4.0])
        fd = (xc.energy_density(x + 1e-6) - xc.energy_density(x - 1e-6)) / 2e-6
        assert np.allclose(xc.derivative(x), fd, rtol=1e-7)


def test_exchange_rejects_negative_strength():
    with pytest.raises(ValueError):
        ExchangeSpec(XCKind.DIRAC_3D, -0.1)
    assert ExchangeSpec("contact1d", 1.0).kind is XCKind.CONTACT_1D


# --- grids and densities ----------------------------------------------------

def test_line_grid_basics():
    g = LineGrid(-1.0, 1.0, 5)
    assert g.h == 0.5
    assert np.allclose(g.points, [-1, -0.5, 0, 0.5, 1])
    assert g.weights.sum() == pytest.approx(2.0)
    with pytest.raises(ValueError):
        LineGrid(0, 1, 2)
    with pytest.raises(ValueError):
        g.nearest_index(1.5)


def test_line_grid_snaps_wells():
    g = LineGrid.around([0.0, 30.0], 40.0, 0.02)
    x = g.points
    assert abs(x[g.nearest_index(0.0)]) < 1e-9
    assert abs(x[g.nearest_index(30.0)] - 30.0) < 1e-9
    assert g.x_min <= -40 and g.x_max >= 70


def test_radial_grid_hydrogen_mass(radial):
    assert np.all(radial.r > 0) and np.all(radial.w > 0)
    assert hydrogen(radial).mass == pytest.approx(1.0, abs=1e-6)


def test_radial_grid_validation():
    with pytest.raises(ValueError):
        RadialGrid(np.array([1.0, 0.5, 2.0]), np.ones(3))
    with pytest.raises(ValueError):
        RadialGrid(np.array([0.1, 0.5, 2.0]), np.array([1.0, -1.0, 1.0]))


def test_density_rejects_negative(line):
    v = np.zeros(line.n)
    v[3] = -1e-3
    with pytest.raises(ValueError):
        DensityField(line, v)


def test_density_mass_and_sqrt_gradient(line):
    d = DensityField.from_function(line, lambda x: np.exp(-2 * np.abs(x)))
    assert abs(d.mass - float(np.dot(line.weights, d.values))) <= 1e-12 * (1 + d.mass)
    assert d.mass == pytest.approx(1.0, rel=1e-4)
    assert math.isfinite(d.gradient_norm())
    assert d.with_mass(2.5).mass == pytest.approx(2.5, rel=1e-12)


# --- energy_1d --------------------------------------------------------------

def test_energy_1d_delta_well_solution(line):
    d = DensityField.from_function(line, lambda x: np.exp(-2 * np.abs(x)))
    e = energy_1d(d, [(0.0, 1.0)], ExchangeSpec.contact(0.5))
    assert e.kinetic == pytest.approx(0.5, abs=1e-4)
    assert e.external == pytest.approx(-1.0, abs=1e-12)
    assert e.hartree + e.exchange == pytest.approx(0.0, abs=1e-12)
    assert e.total == pytest.approx(-0.5, abs=1e-4)


def test_energy_1d_zero_density(line):
    e = energy_1d(DensityField(line, np.zeros(line.n)), [(0.0, 1.0)], ExchangeSpec.contact(1.0))
    assert e.as_dict() == {"kinetic": 0.0, "external": 0.0, "hartree": 0.0, "exchange": 0.0, "total": 0.0}


def test_energy_1d_sech_profile(line):
    sol = sech_params(1.0, 1.0)
    d = DensityField.from_function(line, sol.density)
    e = energy_1d(d, [(0.0, 1.0)], ExchangeSpec.contact(1.0))
    assert e.total == pytest.approx(-19 / 24, abs=1e-4)


def test_energy_1d_errors(line):
    d = DensityField(line, np.zeros(line.n))
    with pytest.raises(ValueError):
        energy_1d(d, [(100.0, 1.0)], ExchangeSpec.contact(1.0))
    with pytest.raises(ValueError):
        energy_1d(d, [(0.0, -1.0)], ExchangeSpec.contact(1.0))


# --- energy_3d --------------------------------------------------------------

def test_energy_3d_hydrogen(radial):
    e = energy_3d(hydrogen(radial), 1.0, ExchangeSpec.dirac(0.7), hartree_on=False, exchange_on=False)
    assert e.total == pytest.approx(-0.5, abs=1e-4)
    assert e.kinetic == pytest.approx(0.5, abs=1e-4)
    assert e.external == pytest.approx(-1.0, abs=1e-6)


def test_energy_3d_hartree_on(radial):
    e = energy_3d(hydrogen(radial), 1.0, ExchangeSpec.dirac(0.0), hartree_on=True)
    assert e.total == pytest.approx(-0.1875, abs=1e-4)


def test_energy_3d_zero_density(radial):
    e = energy_3d(DensityField(radial, np.zeros(radial.n)), 1.0, ExchangeSpec.dirac(1.0))
    assert e.total == 0.0 and e.hartree == 0.0


def test_energy_3d_rejects_line_grid(line):
    with pytest.raises(TypeError):
        energy_3d(DensityField(line, np.zeros(line.n)), 1.0, ExchangeSpec.dirac(1.0))


# --- Hartree ----------------------------------------------------------------

def test_hartree_zero(radial):
    assert np.all(hartree_potential_radial(DensityField(radial, np.zeros(radial.n))) == 0)


def test_hartree_1s_against_quadrature(radial):
    oracle = hartree_1s_by_quadrature()
    assert oracle == pytest.approx(5 / 16, abs=1e-8)
    J = hartree_energy_radial(hydrogen(radial))
    J_fine = hartree_energy_radial(hydrogen(RadialGrid.log(n=1200)))
    assert J == pytest.approx(oracle, abs=1e-4)
    assert abs(J_fine - oracle) < abs(J - oracle)


def test_hartree_point_charge_far_field(radial):
    v = np.zeros(radial.n)
    v[0] = 2.0 / radial.w[0]
    d = DensityField(radial, v)
    pot = hartree_potential_radial(d)
    assert np.allclose(pot[1:], 2.0 / radial.r[1:], rtol=1e-12)


def test_hartree_matches_double_sum(radial):
    rng = np.random.default_rng(3)
    g = RadialGrid.log(1e-3, 20, 80)
    rho = rng.uniform(0, 1, g.n) * np.exp(-g.r)
    d = DensityField(g, rho)
    q = g.w * rho
    direct = 0.5 * np.sum(np.outer(q, q) / np.maximum.outer(g.r, g.r))
    assert hartree_energy_radial(d) == pytest.approx(direct, rel=1e-12)


# --- invariants ---------------------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(t=st.floats(0.0, 5.0), c=st.floats(0.0, 3.0))
def test_scaling_1d(t, c):
    g = LineGrid.around([0.0], 10.0, 0.05)
    d = DensityField.from_function(g, lambda x: np.exp(-2 * np.abs(x)) * (1 + 0.3 * np.cos(x)))
    xc = ExchangeSpec.contact(c)
    e1 = energy_1d(d, [(0.0, 1.0)], xc)
    et = energy_1d(d.scaled(t), [(0.0, 1.0)], xc)
    assert et.kinetic == pytest.approx(t * e1.kinetic, rel=1e-10, abs=1e-14)
    assert et.external == pytest.approx(t * e1.external, rel=1e-10, abs=1e-14)
    assert et.hartree == pytest.approx(t * t * e1.hartree, rel=1e-10, abs=1e-14)
    assert et.exchange == pytest.approx(t * t * e1.exchange, rel=1e-10, abs=1e-14)


@settings(max_examples=30, deadline=None)
@given(t=st.floats(0.0, 5.0), c=st.floats(0.0, 3.0))
def test_scaling_3d(t, c):
    g = RadialGrid.log(1e-4, 40, 200)
    d = DensityField.from_function(g, lambda r: np.exp(-1.5 * r) * (1 + r))
    xc = ExchangeSpec.dirac(c)
    e1 = energy_3d(d, 1.0, xc)
    et = energy_3d(d.scaled(t), 1.0, xc)
    assert et.kinetic == pytest.approx(t * e1.kinetic, rel=1e-10, abs=1e-14)
    assert et.external == pytest.approx(t * e1.external, rel=1e-10, abs=1e-14)
    assert et.hartree == pytest.approx(t * t * e1.hartree, rel=1e-10, abs=1e-14)
    assert et.exchange == pytest.approx(t ** (4 / 3) * e1.exchange, rel=1e-10, abs=1e-14)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), c=st.floats(0.0, 3.0))
def test_breakdown_invariants(seed, c):
    rng = np.random.default_rng(seed)
    g = RadialGrid.log(1e-4, 40, 150)
    d = DensityField(g, rng.uniform(0, 1, g.n) * np.exp(-g.r))
    e = energy_3d(d, 1.0, ExchangeSpec.dirac(c))
    parts = e.kinetic + e.external + e.hartree + e.exchange
    assert abs(e.total - parts) <= 1e-12 * (1 + abs(e.total))
    assert e.hartree >= 0 and e.exchange <= 0
    bare = energy_3d(d, 1.0, ExchangeSpec.dirac(c), hartree_on=False, exchange_on=False)
    assert bare.total == e.kinetic + e.external


def test_energy_is_deterministic(radial, line):
    d = hydrogen(radial)
    a = energy_3d(d, 1.0, ExchangeSpec.dirac(0.7))
    b = energy_3d(d, 1.0, ExchangeSpec.dirac(0.7))
    assert a == b
    d1 = DensityField.from_function(line, lambda x: np.exp(-2 * np.abs(x)))
    assert energy_1d(d1, [(0, 1)], ExchangeSpec.contact(1)) == energy_1d(d1, [(0, 1)], ExchangeSpec.contact(1))


def test_energy_breakdown_total():
    e = EnergyBreakdown(1.0, -2.0, 0.5, -0.25)
    assert e.total == -0.75
