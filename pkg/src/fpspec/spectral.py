"""Spectral objects of the perturbed operator ``L + Theta``.

The stationary state has transform ``f0_hat(xi) = exp(-xi^2/2 + Phi(xi))`` with
``Phi(xi) = int_0^1 theta_hat(xi s)/s ds``; the eigenfunction for eigenvalue
``-k`` is its k-th derivative, ``f_k_hat = (i xi)^k f0_hat``.  Convolution with
``psi`` (``psi_hat = exp(Phi)``) maps the Hermite functions ``mu_k`` onto the
``f_k`` and conjugates the unperturbed resolvent into the perturbed one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .errors import InvalidKernel, NotMassless, OrderTooHigh, PreconditionFailed, SpectrumHit
from .grid import (FourierLine, Grid, GridFunction, derivative, dtft, inverse_line_transform,
                   line_transform, moment)
from .perturbation import Kernel, psi_exponent, psi_increment, shift_cells, validate_condition_c
from .weighted_space import K_MAX, Weight, ek_residuals, hermite_poly, omega_norm

SPECTRUM_RADIUS = 1e-6


def f0_hat(k: Kernel, xi):
    """Transform of the unit-mass stationary state at complex points."""
    xi = np.asarray(xi, dtype=complex)
    return np.exp(-0.5 * xi * xi + psi_exponent(k, xi))


@dataclass(frozen=True, eq=False)
class SpectralSet:
    kernel: Kernel
    weight: Weight
    grid: Grid
    k_max: int
    f_hat_0: FourierLine = field(repr=False)
    psi_hat: np.ndarray = field(repr=False)
    eigenfunctions: tuple = field(repr=False)
    scales: tuple = field(repr=False)
    normalization: str = "derivative"

    def __getitem__(self, k: int) -> GridFunction:
        return self.eigenfunctions[k]


def build_spectral_set(k: Kernel, w: Weight, g: Grid, k_max: int = 4,
                       normalization: str = "derivative", check: bool = True) -> SpectralSet:
    """Eigenfunctions ``f_0 .. f_kmax`` from their closed-form transforms.

    ``normalization="derivative"`` fixes ``f_k = f_0^{(k)}`` (transform constant
    ``i^k``); ``"unit"`` rescales each f_k to unit omega norm.
    """
    if k_max < 0 or k_max > K_MAX:
        raise OrderTooHigh(f"k_max must lie in [0, {K_MAX}]")
    if normalization not in ("derivative", "unit"):
        raise ValueError(f"unknown normalization {normalization!r}")
    if check:
        if not validate_condition_c(k, w).passed:
            raise InvalidKernel("kernel fails the strip conditions")
        shift_cells(k, g.dx)
    xi = g.xi
    phi = psi_exponent(k, xi)
    f0h = np.exp(-0.5 * xi * xi + phi)
    funcs, scales = [], []
    for j in range(k_max + 1):
        fj = inverse_line_transform(FourierLine(xi, (1j * xi) ** j * f0h), g)
        scale = 1.0 if normalization == "derivative" else 1.0 / omega_norm(fj, w)
        funcs.append(fj * scale)
        scales.append(scale)
    return SpectralSet(k, w, g, int(k_max), FourierLine(xi.copy(), f0h), np.exp(phi),
                       tuple(funcs), tuple(scales), normalization)


def psi_map(k: Kernel, f: GridFunction, inverse: bool = False) -> GridFunction:
    """Convolution with psi (or with the inverse transform ``1/psi_hat``)."""
    F = line_transform(f)
    phi = psi_exponent(k, F.xi)
    mult = np.exp(-phi if inverse else phi)
    return inverse_line_transform(FourierLine(F.xi, F.values * mult), f.grid)


def _psi_map_cached(s: SpectralSet, f: GridFunction, inverse: bool) -> GridFunction:
    if f.grid != s.grid:
        return psi_map(s.kernel, f, inverse)
    F = line_transform(f)
    mult = 1.0 / s.psi_hat if inverse else s.psi_hat
    return inverse_line_transform(FourierLine(F.xi, F.values * mult), f.grid)


def projection_coefficient(s: SpectralSet, f: GridFunction, k: int) -> complex:
    """c with ``P_k f = c * s[k]``."""
    if k < 0 or k > s.k_max:
        raise OrderTooHigh(f"projection order {k} outside [0, {s.k_max}]")
    g = _psi_map_cached(s, f, inverse=True)
    c = np.dot(g.grid.weights, g.values * hermite_poly(k, g.x)) / factorial(k)
    return complex(c) / s.scales[k]


def perturbed_projection(s: SpectralSet, f: GridFunction, k: int) -> GridFunction:
    """Spectral projection of ``L + Theta`` for eigenvalue ``-k``:
    ``Psi Pi_k Psi^{-1} f``, returned as a multiple of the stored f_k."""
    return s.eigenfunctions[k] * projection_coefficient(s, f, k)


@dataclass(frozen=True, eq=False)
class ResolventQuery:
    zeta: complex
    k_floor: int
    rhs: GridFunction


def _check_query(q: ResolventQuery, w: Weight) -> None:
    zeta = complex(q.zeta)
    if q.k_floor < 0:
        raise PreconditionFailed("k_floor must be non-negative")
    # -j for j >= k_floor are the eigenvalues the restricted operator keeps
    j = max(q.k_floor, int(round(-zeta.real)))
    if abs(zeta + j) < SPECTRUM_RADIUS:
        raise SpectrumHit(f"zeta={zeta} is within {SPECTRUM_RADIUS} of eigenvalue {-j}")
    if not zeta.real > -q.k_floor:
        raise PreconditionFailed(f"need Re zeta > -{q.k_floor}, got {zeta}")
    tol = 1e-8 * omega_norm(q.rhs, w)
    if np.any(ek_residuals(q.rhs, q.k_floor) > tol):
        raise PreconditionFailed(f"rhs has nonvanishing moments below order {q.k_floor}")


def _gauss(n: int):
    t, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (t + 1.0), 0.5 * w


def _panel_nodes(edges: np.ndarray, n: int):
    t, w = _gauss(n)
    a, b = edges[:-1, None], edges[1:, None]
    return (a + (b - a) * t).ravel(), ((b - a) * w).ravel()


@dataclass(frozen=True)
class SRule:
    """Quadrature for ``int_0^1 h(s) s^(zeta-1) ds``.

    ``s_far`` / ``w_far`` cover (0, s_c] after ``s = s_c exp(-tau)`` and
    already include the factor ``s^(zeta-1) ds``; ``v_near`` / ``w_near`` cover
    [s_c, 1) in ``v = 1 - s`` on dyadic panels graded toward s = 1, where
    the resolvent kernel concentrates like ``exp(-xi^2 v)``.
    """

    s_far: np.ndarray
    w_far: np.ndarray
    v_near: np.ndarray
    w_near: np.ndarray


def s_rule(zeta: complex, k_floor: int, nodes: int = 16, s_c: float = 0.5,
           levels: int = 16) -> SRule:
    rate = zeta.real + k_floor
    t_end = 40.0 / rate
    h = min(2.0, 4.0 / (abs(zeta.imag) + 1.0))
    start = np.array([0.0, 0.05, 0.1, 0.2, 0.4, 0.7, 1.0])
    edges = np.concatenate([start[start < t_end], np.arange(1.0 + h, t_end + h, h)])
    edges = np.unique(np.append(edges[edges < t_end], t_end))
    tau, wt = _panel_nodes(edges, nodes)
    s_far = s_c * np.exp(-tau)
    w_far = wt * s_c ** zeta * np.exp(-zeta * tau)
    vmax = 1.0 - s_c
    vedges = np.concatenate([[0.0], vmax * 2.0 ** -np.arange(levels - 1, -1, -1)])
    v, wv = _panel_nodes(vedges, nodes)
    w_near = wv * (1.0 - v) ** (zeta - 1.0)
    return SRule(s_far, w_far, v, w_near)


TAYLOR_TERMS = 28


def _g_hat(g: GridFunction, eta: np.ndarray, k_floor: int) -> np.ndarray:
    """``dtft(g, eta)`` with the moments below ``k_floor`` removed near eta = 0.

    Close to the origin the transform is summed from its moment series,
    since there its true size ``O(eta^k_floor)`` drops below the rounding
    floor of the direct sum; the tiny moments the precondition tolerates are
    dropped so the ``s^(zeta-1)`` singularity stays integrable.
    """
    v = g.values
    a = np.abs(v)
    big = np.flatnonzero(a > 1e-18 * a.max()) if a.max() > 0 else np.array([], int)
    if big.size == 0:
        return np.zeros(eta.shape, dtype=complex)
    ext = float(np.max(np.abs(g.x[big])))
    eta_c = 0.5 / max(ext, 1e-3)
    out = np.empty(eta.shape, dtype=complex)
    near = np.abs(eta) <= eta_c
    if np.any(~near):
        out[~near] = dtft(g, eta[~near])
    if np.any(near):
        x = g.x
        e = -1j * eta[near]
        acc = np.zeros(e.shape, dtype=complex)
        for j in range(TAYLOR_TERMS - 1, k_floor - 1, -1):
            m_j = g.grid.dx * np.dot(v, x ** j) / factorial(j)
            acc = acc * e + m_j
        out[near] = acc * e ** k_floor
    return out


def _resolvent_hat(kernel: Kernel, g: GridFunction, zeta: complex, k_floor: int,
                   xi: np.ndarray, rule: SRule, chunk: int = 128) -> np.ndarray:
    """``f0_hat(xi) int_0^1 g_hat(s xi)/f0_hat(s xi) s^(zeta-1) ds`` at real xi.

    The kernel ``f0_hat(xi)/f0_hat(s xi)`` is formed in log space; node pairs
    where it is below ``exp(-cut)`` are skipped.
    """
    phi_xi = psi_exponent(kernel, xi)
    cut = 60.0 + 2.0 * float(np.max(np.abs(phi_xi.real)))
    out = np.zeros(xi.shape, dtype=complex)
    v = rule.v_near
    om_near = v * (2.0 - v)
    om_far = 1.0 - rule.s_far ** 2
    for lo in range(0, xi.size, chunk):
        x = xi[lo:lo + chunk, None]
        total = np.zeros(x.shape[0], dtype=complex)

        gauss = -0.5 * x * x * om_near
        live = np.broadcast_to(gauss > -cut, gauss.shape)
        r, c = np.nonzero(live)
        log_k = gauss[r, c] + psi_increment(kernel, x[r, 0], v[c])
        vals = np.exp(log_k) * _g_hat(g, x[r, 0] * (1.0 - v[c]), k_floor) * rule.w_near[c]
        total += np.bincount(r, vals.real, x.shape[0]) + 1j * np.bincount(r, vals.imag, x.shape[0])

        if rule.s_far.size:
            gauss = -0.5 * x * x * om_far
            live = gauss > -cut
            r, c = np.nonzero(live)
            if r.size:
                sx = x[r, 0] * rule.s_far[c]
                log_k = gauss[r, c] + phi_xi[lo + r] - psi_exponent(kernel, sx)
                vals = np.exp(log_k) * _g_hat(g, sx, k_floor) * rule.w_far[c]
                total += np.bincount(r, vals.real, x.shape[0]) + 1j * np.bincount(r, vals.imag, x.shape[0])
        out[lo:lo + chunk] = total
    return out


def resolvent(s: SpectralSet, q: ResolventQuery, nodes: int = 16) -> GridFunction:
    """Solve ``(zeta - L - Theta) f = g`` for g with vanishing moments below
    ``k_floor`` and ``Re zeta > -k_floor``, via the explicit transform of the
    resolvent integrated over s on each frequency of the grid."""
    _check_query(q, s.weight)
    zeta = complex(q.zeta)
    rule = s_rule(zeta, q.k_floor, nodes)
    xi = s.grid.xi
    fh = _resolvent_hat(s.kernel, q.rhs, zeta, q.k_floor, xi, rule)
    return inverse_line_transform(FourierLine(xi, fh), s.grid)


def annihilate(f: GridFunction, w: Weight = Weight()) -> GridFunction:
    """Antiderivative from the left end for massless f.

    Cumulative trapezoid with the Euler-Maclaurin end correction
    ``-(dx^2/12)(f'(x) - f'(x_min))``, f' from a five-point stencil, which
    makes it fourth order.
    """
    m = moment(f, 0)
    if abs(m) > 1e-8 * omega_norm(f, w):
        raise NotMassless(f"mass {m:.3e} is not zero")
    dx = f.grid.dx
    v = f.values
    cum = np.concatenate([[0.0], np.cumsum(0.5 * dx * (v[1:] + v[:-1]))])
    df = _derivative4(v, dx)
    return GridFunction(f.grid, cum - dx * dx / 12.0 * (df - df[0]))


def _derivative4(v: np.ndarray, dx: float) -> np.ndarray:
    # five-point stencil inside, second order on the two outermost nodes per side
    d = np.gradient(v, dx, edge_order=2)
    if v.size >= 5:
        d[2:-2] = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * dx)
    return d


def create(f: GridFunction) -> GridFunction:
    """Derivative (central differences, one-sided at the ends)."""
    return derivative(f)
