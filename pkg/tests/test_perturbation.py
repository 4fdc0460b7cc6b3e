import math

import numpy as np
import pytest
import scipy.special as sc
from hypothesis import given, settings, strategies as st

from fpspec import (GridFunction, Kernel, Weight, annihilate, apply_theta, dirac_pair, ek_residuals,
                    hermite_mu, mass, moment, omega_norm, psi_exponent, psi_hat, read_kernel_file,
                    theta_hat, validate_condition_c, write_kernel_file, zero_kernel)
from fpspec.errors import InvalidKernel, MisalignedShift, OffStrip
from fpspec.perturbation import psi_exponent_closed_form, psi_increment, shift_cells
from test_weighted_space import random_test_function


def test_theta_hat_examples(pair):
    assert theta_hat(pair, np.pi / 4) == pytest.approx(4j, abs=1e-14)
    assert theta_hat(pair, 0.0) == 0
    assert np.all(theta_hat(zero_kernel(), np.linspace(-5, 5, 11) + 0.3j) == 0)


def test_theta_hat_matches_sine_form(pair):
    z = np.linspace(-30, 30, 301) + 0.37j
    assert np.max(np.abs(theta_hat(pair, z) - 4j * np.sin(2 * z))) <= 1e-12


def test_off_strip(pair):
    with pytest.raises(OffStrip):
        theta_hat(pair, 1 + 0.6j, beta=1.0)
    with pytest.raises(OffStrip):
        psi_hat(pair, 0.51j, beta=1.0)
    theta_hat(pair, 1 + 0.5j, beta=1.0)


def test_zero_mean_enforced():
    with pytest.raises(InvalidKernel):
        Kernel(((1.0, 0.0), (-0.9, 1.0)))
    k = Kernel.unchecked(((1.0, 0.0), (-0.9, 1.0)))
    assert k.mean == pytest.approx(0.1)


def test_psi_hat_dirac_pair_sine_integral(pair):
    xi = np.linspace(-40, 40, 801)
    expected = np.exp(4j * sc.sici(2 * xi)[0])
    assert np.max(np.abs(psi_hat(pair, xi) - expected)) <= 1e-10


def test_psi_modulus_and_phase_limit(pair):
    xi = np.linspace(-40, 40, 401)
    assert np.max(np.abs(np.abs(psi_hat(pair, xi)) - 1)) <= 1e-12
    # phase 2 eps Si(alpha xi) -> 2 eps pi/2 = 2 pi; Si(2 xi) - pi/2 = O(1/xi)
    far = psi_exponent(pair, np.array([1e3, 1e4]))
    assert np.all(np.abs(far.real) <= 1e-10)
    assert np.all(np.abs(far.imag - 2 * eps_si_limit(np.array([1e3, 1e4]))) <= 1e-9)
    assert abs(far[1].imag - 2 * np.pi) <= 4 * 1e-4
    assert abs(far[1].imag - 2 * np.pi) < abs(far[0].imag - 2 * np.pi)


def eps_si_limit(xi):
    return 2 * sc.sici(2 * xi)[0]


def test_psi_zero_kernel():
    xi = np.linspace(-10, 10, 21) + 0.2j
    assert np.all(psi_hat(zero_kernel(), xi) == 1)


@settings(max_examples=40, deadline=None)
@given(re=st.floats(-40, 40), im=st.floats(-0.5, 0.5), eps=st.floats(-3, 3), alpha=st.sampled_from([0.5, 1.0, 2.0, 3.0]))
def test_psi_exponent_against_closed_form(re, im, eps, alpha):
    k = dirac_pair(eps, alpha)
    z = complex(re, im)
    assert abs(psi_exponent(k, z) - psi_exponent_closed_form(k, z)) <= 1e-10 * max(1.0, abs(eps))


def test_psi_increment(pair):
    xi = np.linspace(-40, 40, 161)
    v = np.full_like(xi, 0.01)
    direct = psi_exponent(pair, xi) - psi_exponent(pair, (1 - v) * xi)
    assert np.max(np.abs(psi_increment(pair, xi, v) - direct)) <= 1e-11


def test_smooth_kernel_exponent(grid):
    # theta = mu_0'; theta_hat = i xi e^{-xi^2/2}; exponent = i sqrt(pi/2) erf(xi/sqrt 2)
    k = Kernel((), hermite_mu(1, grid), "gaussian derivative")
    xi = np.linspace(-20, 20, 201)
    assert np.max(np.abs(theta_hat(k, xi) - 1j * xi * np.exp(-0.5 * xi * xi))) <= 1e-12
    expected = 1j * math.sqrt(math.pi / 2) * sc.erf(xi / math.sqrt(2))
    assert np.max(np.abs(psi_exponent(k, xi) - expected)) <= 1e-10


def test_apply_theta_shift(pair, grid):
    m0 = hermite_mu(0, grid)
    got = apply_theta(pair, m0)
    g = lambda x: np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)
    expected = 2 * (g(grid.x + 2) - g(grid.x - 2))
    # lattice shift by 60 cells is exact; x_i +- 2 differs from x_{i+-60} by rounding only
    v = m0.values.real
    lattice = np.zeros(grid.n)
    lattice[:-60] += 2 * v[60:]
    lattice[60:] -= 2 * v[:-60]
    assert np.array_equal(got.values.real, lattice)
    assert np.max(np.abs(got.values - expected)) <= 1e-14


def test_apply_theta_smooth_part(grid):
    theta = hermite_mu(1, grid)
    k = Kernel((), theta)
    f = GridFunction.from_callable(grid, lambda x: np.exp(-((x - 1) ** 2)))
    got = apply_theta(k, f)
    # theta * f by direct summation at a few points
    for i in (300, 700, 750, 900):
        direct = grid.dx * np.sum(theta.values * np.exp(-((grid.x[i] - grid.x - 1) ** 2)))
        assert abs(got.values[i] - direct) <= 1e-13


def test_misaligned_shift(grid):
    k = dirac_pair(1.0, 0.01)
    with pytest.raises(MisalignedShift):
        apply_theta(k, hermite_mu(0, grid))
    assert shift_cells(dirac_pair(1.0, 2.0), grid.dx) == [(1.0, -60), (-1.0, 60)]


def test_mass_annihilated(pair, grid, weight, rng):
    for _ in range(20):
        f = random_test_function(rng, grid)
        assert abs(mass(apply_theta(pair, f))) <= 1e-10 * omega_norm(f, weight)


def test_first_moment_of_theta_mu1(pair, grid):
    assert abs(moment(apply_theta(pair, hermite_mu(0, grid)), 1)) > 1
    assert abs(moment(apply_theta(pair, hermite_mu(1, grid)), 1)) <= 1e-8


@pytest.mark.parametrize("k", range(5))
def test_ek_lifting(pair, grid, weight, k):
    f = hermite_mu(k, grid)
    tol = 1e-8 * omega_norm(f, weight)
    assert np.all(ek_residuals(f, k) <= tol)
    out = apply_theta(pair, f)
    assert np.all(ek_residuals(out, k + 1) <= 1e-7 * omega_norm(out, weight))


def test_commutes_with_annihilation(pair, grid, weight, rng):
    for _ in range(10):
        f = random_test_function(rng, grid)
        f = f - hermite_mu(0, grid) * mass(f)
        lhs = apply_theta(pair, annihilate(f, weight))
        rhs = annihilate(apply_theta(pair, f), weight)
        assert (lhs - rhs).max_abs() <= 1e-8


def test_boundedness_surrogate(pair, grid, weight, rng):
    bound = validate_condition_c(pair, weight).sup_theta_hat
    assert bound == pytest.approx(4 * math.cosh(1.0), rel=1e-3)
    for _ in range(100):
        f = random_test_function(rng, grid)
        assert omega_norm(apply_theta(pair, f), weight) <= bound * omega_norm(f, weight) * (1 + 1e-6)


def test_validate_reports(pair, weight):
    r = validate_condition_c(pair, weight)
    assert r.passed and r.theta_hat_at_zero == 0
    assert r.sup_theta_hat <= 4 * math.cosh(1.0) * (1 + 1e-12)
    assert np.isfinite(r.sup_re_integral)
    z = validate_condition_c(zero_kernel(), weight)
    assert z.passed and z.sup_theta_hat == 0 and z.sup_re_integral == 0
    bad = validate_condition_c(Kernel.unchecked(((1.0, 0.0), (-0.5, 1.0))), weight)
    assert not bad.passed and abs(bad.theta_hat_at_zero) > 0
    with pytest.raises(ValueError):
        validate_condition_c(pair, weight, n_lines=4)


def test_kernel_file_round_trip(tmp_path, pair):
    p = tmp_path / "k.txt"
    write_kernel_file(p, pair)
    back = read_kernel_file(p)
    assert back.dirac == pair.dirac
    p.write_text("dirac 1 0 0\ndirac -0.5 0 1\n")
    with pytest.raises(InvalidKernel):
        read_kernel_file(p)
    assert not read_kernel_file(p, check=False).checked
    p.write_text("nonsense line\n")
    with pytest.raises(ValueError):
        read_kernel_file(p)


def test_kernel_file_smooth_reference(tmp_path, grid):
    from fpspec import write_gridfunction_csv

    write_gridfunction_csv(tmp_path / "theta.csv", hermite_mu(1, grid))
    (tmp_path / "k.txt").write_text("# gaussian derivative\nsmooth theta.csv\n")
    k = read_kernel_file(tmp_path / "k.txt")
    assert k.smooth is not None and abs(k.mean) <= 1e-12
