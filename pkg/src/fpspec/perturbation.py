"""Convolution perturbations ``Theta f = theta * f``.

A kernel is a finite Dirac comb ``sum_j a_j delta_{x_j}`` plus an optional
smooth part sampled on a grid.  With the sign conventions used here,
``Theta f(x) = sum_j a_j f(x - x_j)``, so the pair ``eps (delta_{-a} - delta_a)``
acts as ``eps (f(x + a) - f(x - a))``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from pathlib import Path

import numpy as np

from .errors import InvalidKernel, MisalignedShift, OffStrip
from .grid import FourierLine, GridFunction, dtft, inverse_line_transform, line_transform, read_gridfunction_csv
from .special import sici_complex
from .weighted_space import Weight

ZERO_MEAN_TOL = 1e-12
PSI_NODES = 200
# smaller rules are used where theta_hat(xi s) oscillates slowly in s
_NODE_LADDER = (24, 48, 96, PSI_NODES)


@lru_cache(maxsize=None)
def _gl01(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre on [0, 1]; beyond PSI_NODES, equal panels of PSI_NODES each."""
    if n > PSI_NODES:
        m = n // PSI_NODES
        t, w = _gl01(PSI_NODES)
        left = np.arange(m)[:, None] / m
        return (left + t / m).ravel(), np.tile(w / m, m)
    t, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (t + 1.0), 0.5 * w


def _nodes_for(omega: np.ndarray) -> np.ndarray:
    """Rule size per point for an integrand oscillating ``omega`` radians on [0, 1].

    Beyond the ladder the panel count doubles until it covers the need.
    """
    need = 0.55 * omega + 14.0
    big = need > PSI_NODES
    out = np.full(omega.shape, PSI_NODES, dtype=np.int64)
    if np.any(big):
        out[big] = PSI_NODES * 2 ** np.ceil(np.log2(need[big] / PSI_NODES)).astype(np.int64)
    for n in reversed(_NODE_LADDER):
        out[need <= n] = n
    return out


@dataclass(frozen=True, eq=False)
class Kernel:
    dirac: tuple = ()
    smooth: GridFunction | None = None
    description: str = ""
    checked: bool = field(default=True, repr=False)

    def __post_init__(self):
        pairs = tuple((complex(a), float(x)) for a, x in self.dirac)
        object.__setattr__(self, "dirac", pairs)
        if self.checked and abs(self.mean) > ZERO_MEAN_TOL * max(1.0, self.total_variation):
            raise InvalidKernel(f"kernel mean {self.mean:.3e} is not zero")

    @classmethod
    def unchecked(cls, dirac=(), smooth=None, description="") -> "Kernel":
        """Build without the zero-mean check (for validating foreign kernels)."""
        return cls(dirac, smooth, description, checked=False)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([a for a, _ in self.dirac], dtype=complex)

    @property
    def locations(self) -> np.ndarray:
        return np.array([x for _, x in self.dirac], dtype=float)

    @property
    def smooth_mass(self) -> complex:
        if self.smooth is None:
            return 0j
        return complex(dtft(self.smooth, 0.0))

    @property
    def mean(self) -> complex:
        return complex(self.amplitudes.sum()) + self.smooth_mass

    @property
    def total_variation(self) -> float:
        tv = float(np.abs(self.amplitudes).sum())
        if self.smooth is not None:
            tv += self.smooth.grid.dx * float(np.abs(self.smooth.values).sum())
        return tv

    @cached_property
    def extent(self) -> float:
        """Radius beyond which the kernel carries nothing (smooth part:
        relative cutoff 1e-16)."""
        r = float(np.max(np.abs(self.locations))) if self.dirac else 0.0
        if self.smooth is not None:
            a = np.abs(self.smooth.values)
            big = np.flatnonzero(a > 1e-16 * a.max()) if a.max() > 0 else []
            if len(big):
                r = max(r, float(np.max(np.abs(self.smooth.x[big]))))
        return r

    @property
    def is_zero(self) -> bool:
        return not np.any(self.amplitudes) and (self.smooth is None or not np.any(self.smooth.values))


def zero_kernel() -> Kernel:
    return Kernel((), None, "zero")


def dirac_pair(eps: float, alpha: float) -> Kernel:
    """``eps (delta_{-alpha} - delta_{alpha})``, i.e. ``eps (f(x+alpha) - f(x-alpha))``."""
    return Kernel(((eps, -alpha), (-eps, alpha)), None, f"dirac-pair eps={eps:g} alpha={alpha:g}")


def _check_strip(xi, beta):
    if beta is not None and np.any(np.abs(np.imag(xi)) > 0.5 * beta * (1 + 1e-12)):
        raise OffStrip(f"|Im xi| exceeds beta/2 = {beta / 2:g}")


def theta_hat(k: Kernel, xi, beta: float | None = None):
    """Fourier transform of the kernel at complex points ``xi``."""
    _check_strip(xi, beta)
    xi_arr = np.asarray(xi, dtype=complex)
    out = np.zeros(xi_arr.shape, dtype=complex)
    for a, x in k.dirac:
        out += a * np.exp(-1j * xi_arr * x)
    if k.smooth is not None:
        out += dtft(k.smooth, xi_arr)
    return out[()] if out.ndim == 0 else out


def _theta_hat_minus_mean(k: Kernel, eta: np.ndarray) -> np.ndarray:
    """``theta_hat(eta) - theta_hat(0)`` without cancellation for small eta."""
    out = np.zeros(eta.shape, dtype=complex)
    for a, x in k.dirac:
        out += a * np.expm1(-1j * eta * x)
    if k.smooth is not None:
        out += dtft(k.smooth, eta) - k.smooth_mass
    return out


def psi_exponent(k: Kernel, xi, beta: float | None = None, chunk: int = 4096):
    """``int_0^1 theta_hat(xi s)/s ds`` by Gauss-Legendre (200 nodes for the
    frequencies of a working grid, fewer where ``|xi| * extent`` is small and
    more far out).

    The nodes avoid s = 0, where the integrand extends continuously to
    ``theta_hat'(0) xi``.
    """
    _check_strip(xi, beta)
    _require_zero_mean(k)
    xi_arr = np.asarray(xi, dtype=complex)
    flat = xi_arr.ravel()
    out = np.zeros(flat.shape, dtype=complex)
    if not k.is_zero:
        _bucketed(k, flat, np.zeros(flat.shape), out, chunk)
    out = out.reshape(xi_arr.shape)
    return out[()] if out.ndim == 0 else out


def psi_increment(k: Kernel, xi, v, chunk: int = 4096):
    """``Phi(xi) - Phi((1 - v) xi) = int_{1-v}^1 theta_hat(xi t)/t dt`` for
    ``0 <= v <= 1`` (broadcast); cheap when ``v |xi|`` is small."""
    _require_zero_mean(k)
    xi_arr, v_arr = np.broadcast_arrays(np.asarray(xi, dtype=complex), np.asarray(v, dtype=float))
    out = np.zeros(xi_arr.size, dtype=complex)
    if not k.is_zero:
        _bucketed(k, xi_arr.ravel(), 1.0 - v_arr.ravel(), out, chunk)
    return out.reshape(xi_arr.shape)


def _require_zero_mean(k: Kernel) -> None:
    if abs(k.mean) > ZERO_MEAN_TOL * max(1.0, k.total_variation):
        raise InvalidKernel("psi is undefined for a kernel with nonzero mean")


def _bucketed(k: Kernel, xi: np.ndarray, lower: np.ndarray, out: np.ndarray, chunk: int) -> None:
    """out += int_lower^1 (theta_hat(xi t) - theta_hat(0))/t dt, rule size per point."""
    omega = np.abs(xi) * (1.0 - lower) * k.extent
    sizes = _nodes_for(omega)
    for n in np.unique(sizes):
        idx = np.flatnonzero(sizes == n)
        t, wt = _gl01(int(n))
        step = max(1, chunk * PSI_NODES // int(n))
        for lo in range(0, idx.size, step):
            sel = idx[lo:lo + step]
            a = lower[sel, None]
            s = a + (1.0 - a) * t
            eta = xi[sel, None] * s
            out[sel] += np.sum(_theta_hat_minus_mean(k, eta) * (wt * (1.0 - a) / s), axis=1)


def psi_hat(k: Kernel, xi, beta: float | None = None):
    return np.exp(psi_exponent(k, xi, beta))


def psi_exponent_closed_form(k: Kernel, xi):
    """Dirac-comb exponent from sine/cosine integrals:
    ``sum_j a_j (-Cin(xi x_j) - i Si(xi x_j))``.  Independent cross-check
    for :func:`psi_exponent`; only defined for purely Dirac kernels."""
    if k.smooth is not None:
        raise ValueError("closed form is only available for Dirac kernels")
    xi_arr = np.asarray(xi, dtype=complex)
    out = np.zeros(xi_arr.shape, dtype=complex)
    for a, x in k.dirac:
        if x == 0.0:
            continue
        si, cin = sici_complex((xi_arr * x).ravel())
        out += a * (-cin - 1j * si).reshape(xi_arr.shape)
    return out[()] if out.ndim == 0 else out


def shift_cells(k: Kernel, dx: float) -> list[tuple[complex, int]]:
    """Dirac part as (amplitude, index shift) pairs; raise if off-lattice."""
    out = []
    for a, x in k.dirac:
        m = x / dx
        s = int(round(m))
        if abs(m - s) > 1e-9 * max(1.0, abs(m)):
            raise MisalignedShift(f"Dirac location {x} is not a multiple of dx={dx}")
        out.append((a, s))
    return out


def apply_theta(k: Kernel, f: GridFunction) -> GridFunction:
    """``(theta * f)`` on the grid; samples shifted in from outside are zero."""
    g = f.grid
    n = g.n
    out = np.zeros(n, dtype=complex)
    for a, s in shift_cells(k, g.dx):
        # (f(. - s dx))_i = f_{i-s}
        if abs(s) >= n:
            continue
        if s >= 0:
            out[s:] += a * f.values[: n - s]
        else:
            out[: n + s] += a * f.values[-s:]
    if k.smooth is not None:
        if k.smooth.grid != g:
            raise ValueError("smooth kernel part is sampled on a different grid")
        out += _smooth_convolve(k.smooth, f)
    return GridFunction(g, out)


def _smooth_convolve(theta: GridFunction, f: GridFunction) -> np.ndarray:
    """``dx sum_m theta(x_m) f(x - x_m)`` on the periodic grid (FFT product)."""
    Ft = line_transform(theta)
    prod = FourierLine(Ft.xi, Ft.values * line_transform(f).values, 0.0)
    return inverse_line_transform(prod, f.grid).values


@dataclass(frozen=True)
class ConditionCReport:
    theta_hat_at_zero: complex
    sup_theta_hat: float
    sup_re_integral: float
    lines_sampled: int
    xi_extent: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "theta_hat_at_zero": [self.theta_hat_at_zero.real, self.theta_hat_at_zero.imag],
            "sup_theta_hat": self.sup_theta_hat,
            "sup_re_integral": self.sup_re_integral,
            "lines_sampled": self.lines_sampled,
            "xi_extent": self.xi_extent,
            "passed": self.passed,
        }


def validate_condition_c(k: Kernel, w: Weight, xi_extent: float = 40.0,
                         n_lines: int = 5, n_xi: int = 801) -> ConditionCReport:
    """Sample theta_hat and Re(psi exponent) on horizontal lines across the
    closed strip.  Finite sampling: a pass is evidence, not proof."""
    if n_lines < 3 or n_lines % 2 == 0:
        raise ValueError("n_lines must be an odd integer >= 3")
    b = np.linspace(-0.5 * w.beta, 0.5 * w.beta, n_lines)
    xr = np.linspace(-xi_extent, xi_extent, n_xi)
    z = xr[None, :] + 1j * b[:, None]
    th0 = complex(theta_hat(k, 0.0))
    sup_th = float(np.max(np.abs(theta_hat(k, z))))
    try:
        sup_re = float(np.max(np.abs(psi_exponent(k, z).real)))
    except InvalidKernel:
        sup_re = float("inf")
    passed = abs(th0) <= ZERO_MEAN_TOL and np.isfinite(sup_th) and np.isfinite(sup_re)
    return ConditionCReport(th0, sup_th, sup_re, n_lines, float(xi_extent), bool(passed))


def read_kernel_file(path, check: bool = True) -> Kernel:
    """Parse ``dirac <re> <im> <location>`` / ``smooth <csv-path>`` lines."""
    path = Path(path)
    dirac, smooth, desc = [], None, path.name
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "dirac" and len(parts) == 4:
            dirac.append((complex(float(parts[1]), float(parts[2])), float(parts[3])))
        elif parts[0] == "smooth" and len(parts) == 2:
            p = Path(parts[1])
            smooth = read_gridfunction_csv(p if p.is_absolute() else path.parent / p)
        elif parts[0] == "description":
            desc = line.split(None, 1)[1] if len(parts) > 1 else ""
        else:
            raise ValueError(f"{path}:{lineno}: cannot parse {raw!r}")
    if check:
        return Kernel(tuple(dirac), smooth, desc)
    return Kernel.unchecked(tuple(dirac), smooth, desc)


def write_kernel_file(path, k: Kernel) -> None:
    lines = [f"description {k.description}"] if k.description else []
    for a, x in k.dirac:
        lines.append(f"dirac {a.real:.17g} {a.imag:.17g} {x:.17g}")
    if k.smooth is not None:
        raise ValueError("write the smooth part as CSV and reference it by hand")
    Path(path).write_text("\n".join(lines) + "\n")
