"""Uniform 1-D grid, grid functions and discrete Fourier transforms.

Fourier convention: ``F[f](xi) = int f(x) exp(-i x xi) dx``, so ``F[f](0)``
is the mass of ``f``.  Transforms along a horizontal line ``xi + i b`` of the
complex plane are transforms of ``exp(b x) f(x)``.  Functions are taken to
vanish outside ``[x_min, x_max]``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Union

import numpy as np

from .errors import DegenerateGrid, MomentOrderTooHigh

DEFAULT_XMAX = 25.0
DEFAULT_N = 1501
MAX_MOMENT = 12
CSV_FORMAT_VERSION = 1

WeightFn = Union[None, float, np.ndarray, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class Grid:
    x_min: float
    x_max: float
    n: int

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @cached_property
    def x(self) -> np.ndarray:
        x = self.x_min + self.dx * np.arange(self.n)
        x.setflags(write=False)
        return x

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoid weights; ``weights @ f`` approximates the integral of f."""
        w = np.full(self.n, self.dx)
        w[0] = w[-1] = 0.5 * self.dx
        w.setflags(write=False)
        return w

    @cached_property
    def xi(self) -> np.ndarray:
        """Frequency grid in increasing order, inside [-pi/dx, pi/dx)."""
        xi = 2 * np.pi * np.fft.fftshift(np.fft.fftfreq(self.n, self.dx))
        xi.setflags(write=False)
        return xi

    @property
    def dxi(self) -> float:
        return 2 * np.pi / (self.n * self.dx)

    def cells(self, length: float) -> int:
        """Number of grid cells spanned by ``length``, or raise if not whole."""
        m = length / self.dx
        k = int(round(m))
        if abs(m - k) > 1e-9 * max(1.0, abs(m)):
            raise ValueError(f"{length} is not a multiple of dx={self.dx}")
        return k


def make_grid(x_min: float = -DEFAULT_XMAX, x_max: float = DEFAULT_XMAX,
              n: int = DEFAULT_N) -> Grid:
    """Symmetric uniform grid with ``n`` points on ``[x_min, x_max]``."""
    if int(n) != n or n < 8:
        raise DegenerateGrid(f"need at least 8 grid points, got {n}")
    if not (np.isfinite(x_min) and np.isfinite(x_max)) or x_min >= x_max:
        raise DegenerateGrid(f"empty interval [{x_min}, {x_max}]")
    if abs(x_min + x_max) > 1e-12 * max(abs(x_min), abs(x_max)):
        raise DegenerateGrid(f"interval [{x_min}, {x_max}] is not symmetric about 0")
    return Grid(float(x_min), float(x_max), int(n))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Complex samples of a function on a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function has non-finite entries")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, grid: Grid, func: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        return cls(grid, func(grid.x))

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.n))

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    def _other(self, other):
        if isinstance(other, GridFunction):
            if other.grid != self.grid:
                raise ValueError("grid functions live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return GridFunction(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return GridFunction(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return GridFunction(self.grid, self._other(other) - self.values)

    def __neg__(self):
        return GridFunction(self.grid, -self.values)

    def __mul__(self, other):
        return GridFunction(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return GridFunction(self.grid, self.values / self._other(other))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True, eq=False)
class FourierLine:
    """Samples of ``xi -> F[f](xi + i*offset_b)`` on a real frequency grid."""

    xi: np.ndarray
    values: np.ndarray
    offset_b: float = 0.0

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        if xi.shape != v.shape:
            raise ValueError("xi and values must have the same length")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "values", v)


def line_transform(f: GridFunction, b: float = 0.0) -> FourierLine:
    """Transform of ``exp(b x) f(x)`` sampled on ``f.grid.xi``."""
    g = f.grid
    # xi_m x_i = xi_m x_0 + 2 pi m i / n, so a plain FFT gives the sum
    xi = np.fft.fftfreq(g.n, g.dx) * 2 * np.pi
    spec = g.dx * np.exp(-1j * xi * g.x_min) * np.fft.fft(np.exp(b * g.x) * f.values)
    return FourierLine(g.xi.copy(), np.fft.fftshift(spec), float(b))


def inverse_line_transform(F: FourierLine, grid: Grid) -> GridFunction:
    """Inverse of :func:`line_transform` (exact up to rounding)."""
    if F.values.shape != (grid.n,):
        raise ValueError("Fourier line does not match the grid size")
    xi = np.fft.ifftshift(F.xi)
    spec = np.fft.ifftshift(F.values)
    g = np.fft.ifft(spec * np.exp(1j * xi * grid.x_min)) / grid.dx
    return GridFunction(grid, g * np.exp(-F.offset_b * grid.x))


def dtft(f: GridFunction, eta) -> np.ndarray:
    """Discrete transform ``dx * sum_i f_i exp(-i eta x_i)`` at arbitrary complex
    points ``eta`` (any shape).

    Agrees exactly with :func:`line_transform` on the frequency grid (same
    plain-sum scaling).  Cost is O(len(support) * eta.size); evaluated by
    Horner's rule in ``z = exp(-i eta dx)`` so no N x P matrix is formed.
    """
    g = f.grid
    eta = np.asarray(eta, dtype=complex)
    v = f.values
    nz = np.flatnonzero(v)
    if nz.size == 0:
        return np.zeros(eta.shape, dtype=complex)
    lo, hi = nz[0], nz[-1]
    z = np.exp(-1j * eta * g.dx)
    acc = np.full(eta.shape, v[hi], dtype=complex)
    for i in range(hi - 1, lo - 1, -1):
        acc *= z
        acc += v[i]
    return g.dx * np.exp(-1j * eta * g.x[lo]) * acc


def _weight_values(grid: Grid, w: WeightFn) -> np.ndarray:
    if w is None:
        return np.ones(grid.n)
    if callable(w):
        return np.asarray(w(grid.x))
    return np.broadcast_to(np.asarray(w), (grid.n,))


def quadrature(f: GridFunction, w: WeightFn = None) -> complex:
    """Trapezoid value of ``int f(x) w(x) dx``."""
    return complex(np.dot(f.grid.weights, f.values * _weight_values(f.grid, w)))


def moment(f: GridFunction, j: int) -> complex:
    """Trapezoid value of ``int f(x) x**j dx``."""
    if j < 0:
        raise ValueError("moment order must be non-negative")
    if j > MAX_MOMENT:
        raise MomentOrderTooHigh(f"moment order {j} > {MAX_MOMENT}")
    return quadrature(f, f.grid.x ** j)


def mass(f: GridFunction) -> complex:
    return quadrature(f)


def derivative(f: GridFunction) -> GridFunction:
    """Second-order central difference, one-sided (second order) at the ends."""
    d = np.gradient(f.values, f.grid.dx, edge_order=2)
    return GridFunction(f.grid, d)


def write_gridfunction_csv(path, f: GridFunction) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# format_version={CSV_FORMAT_VERSION}\n")
        w = csv.writer(fh)
        w.writerow(["x", "re", "im"])
        for xi, v in zip(f.grid.x, f.values):
            w.writerow([f"{xi:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}"])


def read_gridfunction_csv(path) -> GridFunction:
    """Read a ``x,re,im`` CSV written by :func:`write_gridfunction_csv`.

    The grid is reconstructed from the first and last abscissae and the row
    count; the abscissae must be uniformly spaced.
    """
    rows = _read_rows(path)
    data = np.array([[float(r["x"]), float(r["re"]), float(r["im"])] for r in rows])
    x = data[:, 0]
    grid = make_grid(x[0], x[-1], len(x))
    if not np.allclose(x, grid.x, rtol=0, atol=1e-9 * max(1.0, grid.x_max)):
        raise ValueError(f"{path}: abscissae are not uniformly spaced")
    return GridFunction(grid, data[:, 1] + 1j * data[:, 2])


def write_fourierline_csv(path, F: FourierLine) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# format_version={CSV_FORMAT_VERSION}\n")
        w = csv.writer(fh)
        w.writerow(["xi", "re", "im", "b"])
        for xi, v in zip(F.xi, F.values):
            w.writerow([f"{xi:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}", f"{F.offset_b:.17g}"])


def read_fourierline_csv(path) -> FourierLine:
    rows = _read_rows(path)
    xi = np.array([float(r["xi"]) for r in rows])
    v = np.array([float(r["re"]) + 1j * float(r["im"]) for r in rows])
    b = float(rows[0]["b"]) if rows else 0.0
    return FourierLine(xi, v, b)


def _read_rows(path) -> list[dict]:
    text = Path(path).read_text().splitlines()
    body = [ln for ln in text if ln.strip() and not ln.lstrip().startswith("#")]
    return list(csv.DictReader(body))
