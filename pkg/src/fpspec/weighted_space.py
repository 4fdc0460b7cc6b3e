"""The weighted space L^2(cosh(beta x)) and the Hermite eigenfunctions of
the unperturbed Fokker-Planck operator ``Lf = f'' + x f' + f``."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .errors import OrderTooHigh, ZeroDerivative
from .grid import Grid, GridFunction, derivative, line_transform, moment, quadrature

K_MAX = 12


@dataclass(frozen=True)
class Weight:
    """``omega(x) = cosh(beta x)``."""

    beta: float = 1.0

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")

    def __call__(self, x):
        return np.cosh(self.beta * np.asarray(x))


def omega_norm(f: GridFunction, w: Weight = Weight()) -> float:
    """Trapezoid value of ``sqrt(int |f|^2 cosh(beta x) dx)``."""
    return float(np.sqrt(np.dot(f.grid.weights, np.abs(f.values) ** 2 * w(f.x))))


def fourier_norm(f: GridFunction, w: Weight = Weight()) -> float:
    """Equivalent norm from the transforms on the two strip boundaries.

    Squared, it equals ``4 pi omega_norm(f)**2`` (exactly, up to the endpoint
    weights of the trapezoid rule).
    """
    dxi = f.grid.dxi
    total = 0.0
    for b in (0.5 * w.beta, -0.5 * w.beta):
        F = line_transform(f, b)
        total += dxi * float(np.sum(np.abs(F.values) ** 2))
    return float(np.sqrt(total))


def _check_order(k: int) -> None:
    if k < 0:
        raise ValueError("order must be non-negative")
    if k > K_MAX:
        raise OrderTooHigh(f"order {k} > {K_MAX}: quadrature on double precision is unreliable")


def hermite_coefficients(k: int) -> np.ndarray:
    """Power-basis coefficients (lowest degree first) of ``H_k = mu^{-1} d^k mu``."""
    _check_order(k)
    h_prev, h = np.array([1.0]), np.array([0.0, -1.0])
    if k == 0:
        return h_prev
    for j in range(1, k):
        # H_{j+1} = -x H_j - j H_{j-1}
        nxt = np.zeros(j + 2)
        nxt[1:] -= h
        nxt[: j] -= j * h_prev
        h_prev, h = h, nxt
    return h


def hermite_poly(k: int, x) -> np.ndarray:
    """``H_k(x)`` by the three-term recurrence."""
    _check_order(k)
    x = np.asarray(x, dtype=float)
    h_prev, h = np.ones_like(x), -x
    if k == 0:
        return h_prev
    for j in range(1, k):
        h_prev, h = h, -x * h - j * h_prev
    return h


def hermite_mu(k: int, g: Grid) -> GridFunction:
    """``mu_k = H_k exp(-x^2/2) / sqrt(2 pi)``, the k-th derivative of mu_0."""
    x = g.x
    return GridFunction(g, hermite_poly(k, x) * np.exp(-0.5 * x * x) / np.sqrt(2 * np.pi))


@dataclass(frozen=True)
class HermiteBasis:
    grid: Grid
    k_max: int
    functions: tuple = field(repr=False)
    coefficients: tuple = field(repr=False)

    @classmethod
    def build(cls, grid: Grid, k_max: int = K_MAX) -> "HermiteBasis":
        _check_order(k_max)
        return cls(grid, k_max,
                   tuple(hermite_mu(k, grid) for k in range(k_max + 1)),
                   tuple(hermite_coefficients(k) for k in range(k_max + 1)))

    def __getitem__(self, k: int) -> GridFunction:
        return self.functions[k]


def hermite_projection(f: GridFunction, k: int) -> GridFunction:
    """Unperturbed spectral projection onto span{mu_k}:
    ``(1/k!) (int f H_k dx) mu_k``."""
    _check_order(k)
    c = quadrature(f, hermite_poly(k, f.x)) / factorial(k)
    return hermite_mu(k, f.grid) * c


def ek_residuals(f: GridFunction, k: int) -> np.ndarray:
    """Absolute moments ``|int f x^j dx|`` for ``j < k``."""
    return np.array([abs(moment(f, j)) for j in range(k)], dtype=float)


def in_ek(f: GridFunction, k: int, tol: float | None = None, w: Weight = Weight()) -> bool:
    """Membership test for the subspace of functions with vanishing moments
    of order < k.  The default tolerance is relative to the omega norm."""
    if tol is None:
        tol = 1e-8 * omega_norm(f, w)
    return bool(np.all(ek_residuals(f, k) <= tol))


def poincare_ratio(f: GridFunction, w: Weight = Weight()) -> float:
    """``||f||_omega / ||f'||_omega`` with a central-difference derivative."""
    df = omega_norm(derivative(f), w)
    if df == 0.0:
        raise ZeroDerivative("derivative vanishes identically")
    return omega_norm(f, w) / df
