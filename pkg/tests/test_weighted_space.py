import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fpspec import (GridFunction, HermiteBasis, Weight, build_spectral_set, derivative,
                    ek_residuals, fourier_norm, hermite_mu, hermite_projection, in_ek, make_grid,
                    omega_norm, poincare_ratio, quadrature, zero_kernel)
from fpspec.decay_analysis import _step_pair
from fpspec.errors import OrderTooHigh, ZeroDerivative
from fpspec.weighted_space import hermite_coefficients, hermite_poly

SQ2PI = math.sqrt(2 * math.pi)
MU0_NORM = math.sqrt(math.sqrt(math.pi) / (2 * math.pi) * math.exp(0.25))


def test_weight_rejects_nonpositive_beta():
    with pytest.raises(ValueError):
        Weight(0.0)


def test_mu0_norm(grid, weight):
    # closed form sqrt(sqrt(pi) e^(1/4) / (2 pi)) = 0.6018446, read to 1e-6
    assert omega_norm(hermite_mu(0, grid), weight) == pytest.approx(MU0_NORM, abs=1e-6)
    assert omega_norm(hermite_mu(0, grid), weight) == pytest.approx(MU0_NORM, rel=1e-12)
    assert omega_norm(GridFunction.zeros(grid), weight) == 0


def test_step_pair_norm(grid, weight):
    """The jump points carry the mean of the one-sided limits, which costs one
    cell of trapezoid accuracy at each jump; the bound below is that cost."""
    s = build_spectral_set(zero_kernel(), weight, grid, 0)
    raw = _step_pair(s)
    exact = math.sqrt(2 * math.sinh(4.0))
    v = raw.values.real
    x = grid.x
    at4 = np.isclose(np.abs(x), 4.0)
    at0 = np.isclose(x, 0.0)
    jump_cost = grid.dx * (np.sum(np.abs(v[at4] ** 2 - 0.5) * np.cosh(x[at4])) + np.sum(np.abs(v[at0] ** 2 - 1)))
    assert abs(omega_norm(raw, weight) - exact) <= jump_cost / (2 * exact) + 1e-3


def test_step_pair_norm_with_balanced_jump_values(grid, weight):
    # |v|^2 equal to the mean of the one-sided limits at every jump recovers
    # the closed form to trapezoid accuracy
    x = grid.x
    v = np.where(np.abs(x) < 4, 1.0, 0.0)
    v[np.isclose(np.abs(x), 4.0)] = 0.5
    assert math.sqrt(quadrature(GridFunction(grid, v), np.cosh).real) == pytest.approx(
        math.sqrt(2 * math.sinh(4.0)), abs=1e-3)


def test_fourier_norm_examples(grid, weight):
    m0 = hermite_mu(0, grid)
    assert fourier_norm(m0, weight) == pytest.approx(math.sqrt(4 * math.pi) * MU0_NORM, abs=1e-4)
    assert fourier_norm(m0, weight) == pytest.approx(2.13348, abs=1e-4)
    assert fourier_norm(GridFunction.zeros(grid), weight) == 0


@settings(max_examples=25, deadline=None)
@given(c=st.floats(-3, 3), s=st.floats(0.6, 2.5), a=st.floats(-2, 2), beta=st.floats(0.2, 1.5))
def test_four_pi_identity(c, s, a, beta):
    g = make_grid(-25, 25, 1501)
    f = GridFunction.from_callable(g, lambda x: (1 + a * x) * np.exp(-((x - c) / s) ** 2))
    w = Weight(beta)
    assert fourier_norm(f, w) == pytest.approx(math.sqrt(4 * math.pi) * omega_norm(f, w), rel=1e-6)


def test_hermite_closed_forms(grid):
    x = grid.x
    g0 = np.exp(-0.5 * x * x) / SQ2PI
    assert np.allclose(hermite_mu(0, grid).values, g0, atol=1e-15)
    assert np.allclose(hermite_mu(1, grid).values, -x * g0, atol=1e-15)
    assert np.allclose(hermite_mu(2, grid).values, (x * x - 1) * g0, atol=1e-14)


def test_hermite_coefficients_symbolic():
    # H_k = mu^{-1} d^k/dx^k mu for mu = exp(-x^2/2), expanded by hand
    table = {
        0: [1], 1: [0, -1], 2: [-1, 0, 1], 3: [0, 3, 0, -1],
        4: [3, 0, -6, 0, 1], 5: [0, -15, 0, 10, 0, -1],
    }
    for k, coeffs in table.items():
        assert np.array_equal(hermite_coefficients(k), np.array(coeffs, dtype=float))
    x = np.linspace(-3, 3, 7)
    for k in range(9):
        assert np.allclose(hermite_poly(k, x), np.polyval(hermite_coefficients(k)[::-1], x))
        assert hermite_coefficients(k)[-1] == (-1) ** k


def test_order_cap(grid):
    with pytest.raises(OrderTooHigh):
        hermite_mu(13, grid)
    with pytest.raises(OrderTooHigh):
        hermite_projection(hermite_mu(0, grid), 13)
    assert HermiteBasis.build(grid, 4)[4].grid == grid


def test_derivative_chain(grid):
    f = hermite_mu(0, grid)
    for k in range(1, 5):
        f = derivative(f)
        mk = hermite_mu(k, grid)
        assert (f - mk).max_abs() <= 5 * grid.dx ** 2 * 10 ** (k - 1)


@pytest.mark.parametrize("j", range(9))
def test_orthogonality(grid, j):
    mj = hermite_mu(j, grid)
    for k in range(9):
        val = quadrature(mj, hermite_poly(k, grid.x))
        expected = math.factorial(k) if j == k else 0.0
        assert abs(val - expected) <= 1e-8


def test_projection_examples(grid):
    for j in range(5):
        mj = hermite_mu(j, grid)
        assert (hermite_projection(mj, j) - mj).max_abs() <= 1e-8
        for k in range(5):
            if k != j:
                assert hermite_projection(mj, k).max_abs() <= 1e-8
    assert hermite_projection(GridFunction.zeros(grid), 2).max_abs() == 0


def test_projection_algebra(grid):
    x = grid.x
    f = GridFunction.from_callable(grid, lambda x: np.exp(-(x - 0.8) ** 2) * (1 + x))
    for k in range(4):
        p = hermite_projection(f, k)
        scale = max(p.max_abs(), 1e-300)
        assert (hermite_projection(p, k) - p).max_abs() <= 1e-8 * scale
        for j in range(4):
            if j != k:
                assert hermite_projection(p, j).max_abs() <= 1e-8 * scale


def test_ek_residuals(grid):
    assert np.all(ek_residuals(hermite_mu(2, grid), 2) <= 1e-10)
    assert ek_residuals(hermite_mu(0, grid), 1)[0] == pytest.approx(1.0, abs=1e-12)
    assert np.all(ek_residuals(GridFunction.zeros(grid), 4) == 0)
    assert in_ek(hermite_mu(3, grid), 3)
    assert not in_ek(hermite_mu(1, grid), 2)


def test_poincare_examples(grid, weight):
    assert poincare_ratio(hermite_mu(0, grid), weight) <= 2.0
    f = GridFunction.from_callable(grid, lambda x: np.sin(5 * x) * np.exp(-0.5 * x * x))
    assert poincare_ratio(f, weight) <= 2.0
    with pytest.raises(ZeroDerivative):
        poincare_ratio(GridFunction(grid, np.ones(grid.n)), weight)


def random_test_function(rng, g):
    """Smooth decaying test function: a few Gaussian-windowed waves."""
    x = g.x
    out = np.zeros(g.n, dtype=complex)
    for _ in range(rng.integers(1, 4)):
        c, s = rng.uniform(-4, 4), rng.uniform(0.4, 2.0)
        k = rng.uniform(-6, 6)
        amp = rng.normal() + 1j * rng.normal()
        out += amp * np.exp(-((x - c) / s) ** 2 + 1j * k * x)
    return GridFunction(g, out)


def poincare_batch(rng, g, beta, count=100):
    w = Weight(beta)
    return [poincare_ratio(random_test_function(rng, g), w) for _ in range(count)]


def test_poincare_randomized(rng, grid):
    for beta in (1.0, 0.5):
        assert max(poincare_batch(rng, grid, beta)) <= 2.0 / beta
