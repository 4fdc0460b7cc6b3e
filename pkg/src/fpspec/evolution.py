"""Time evolution of ``df/dt = (L + Theta) f``.

Two propagators: the exact Fourier-side semigroup of the unperturbed
operator, and a Crank-Nicolson finite-difference scheme for the perturbed
one whose discrete mass (trapezoid rule) is conserved to rounding.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import NegativeTime, NoSnapshots, SolverBreakdown
from .grid import (CSV_FORMAT_VERSION, FourierLine, Grid, GridFunction, dtft,
                   inverse_line_transform, line_transform, mass)
from .perturbation import Kernel, _smooth_convolve, shift_cells
from .spectral import SpectralSet
from .weighted_space import Weight, omega_norm

# a relative residual above this means the direct solve lost more than 6 digits
SOLVE_RESIDUAL_LIMIT = 1e-10


def _half_point_exponents(g: Grid) -> tuple[np.ndarray, np.ndarray]:
    """exp((x_{i+1}^2 - x_{i+1/2}^2)/2) and exp((x_i^2 - x_{i+1/2}^2)/2)."""
    x = g.x
    xh = 0.5 * (x[1:] + x[:-1])
    return np.exp(0.5 * (x[1:] - xh) * (x[1:] + xh)), np.exp(0.5 * (x[:-1] - xh) * (x[:-1] + xh))


def fp_matrix(g: Grid) -> sp.csr_matrix:
    """Flux-form ``L_h``: ``F_{i+1/2} = mu_{i+1/2} D_+(f/mu)``, zero flux at the
    ends, half-width control volumes at the two boundary nodes.

    ``weights @ (L_h f) == 0`` for every f (the fluxes telescope) and
    ``L_h mu_0 == 0`` up to rounding.
    """
    n, dx = g.n, g.dx
    up, lo = _half_point_exponents(g)
    # flux matrix Fm (n-1 x n): F = (up * f_{i+1} - lo * f_i) / dx
    Fm = sp.diags([-lo / dx, up / dx], [0, 1], shape=(n - 1, n))
    # divergence (n x n-1): (F_{i+1/2} - F_{i-1/2}) / vol_i
    vol = np.full(n, dx)
    vol[0] = vol[-1] = 0.5 * dx
    D = sp.diags([-1.0 / vol[1:], 1.0 / vol[:-1]], [-1, 0], shape=(n, n - 1))
    return (D @ Fm).tocsr()


def theta_matrix(k: Kernel, g: Grid, conservative: bool = True) -> sp.csr_matrix:
    """Matrix of ``Theta`` on the grid.

    With ``conservative=False`` this is the plain shift with zero fill (same as
    :func:`apply_theta`).  The conservative form moves the trapezoid mass of
    node j to node ``clip(j + s)``, so samples that would leave the box are
    deposited on the end node and ``weights @ (Theta f) = mean(theta) mass(f)``
    exactly.  Reads from outside the box are zero in both forms.
    """
    n = g.n
    w = g.weights
    rows, cols, vals = [], [], []
    for a, s in shift_cells(k, g.dx):
        j = np.arange(n)
        i = j + s
        if conservative:
            i = np.clip(i, 0, n - 1)
            v = a * w[j] / w[i]
        else:
            keep = (i >= 0) & (i < n)
            j, i = j[keep], i[keep]
            v = np.full(j.size, a, dtype=complex)
        rows.append(i)
        cols.append(j)
        vals.append(np.asarray(v, dtype=complex))
    if rows:
        M = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    else:
        M = sp.csr_matrix((n, n), dtype=complex)
    if k.smooth is not None:
        if k.smooth.grid != g:
            raise ValueError("smooth kernel part is sampled on a different grid")
        # dense block, column j = dx * theta(x_i - x_j) (periodic, as in apply_theta)
        eye = np.eye(n)
        dense = np.column_stack([_smooth_convolve(k.smooth, GridFunction(g, eye[j])) for j in range(n)])
        M = M + sp.csr_matrix(dense)
    if not np.any(M.data.imag):
        M = M.real
    return M.tocsr()


def apply_fp_operator(f: GridFunction, method: str = "flux") -> GridFunction:
    """``L f = f'' + x f' + f`` on the grid.

    ``"flux"``: the mass-conserving second-order stencil of :func:`fp_matrix`.
    ``"spectral"``: ``F^{-1}[-xi^2 f_hat + i xi F[x f]]`` on the periodic box,
    i.e. ``f'' + (x f)'`` differentiated spectrally.
    """
    if method == "flux":
        return GridFunction(f.grid, fp_matrix(f.grid) @ f.values)
    if method == "spectral":
        F = line_transform(f)
        xf = line_transform(f * f.x)
        xi = F.xi
        return inverse_line_transform(FourierLine(xi, -xi * xi * F.values + 1j * xi * xf.values), f.grid)
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class CNConfig:
    dt: float = 1e-3
    t_end: float = 10.0
    observe_every: int = 10
    keep_snapshots: bool = False
    boundary: str = "zero-flux"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t_end < 0:
            raise NegativeTime("t_end must be non-negative")
        if self.observe_every < 1:
            raise ValueError("observe_every must be >= 1")
        if self.boundary != "zero-flux":
            raise ValueError("only zero-flux boundaries are implemented")
        m = self.t_end / self.dt
        if abs(m - round(m)) > 1e-9 * max(1.0, m):
            raise ValueError(f"t_end={self.t_end} is not a whole number of steps of dt={self.dt}")

    @property
    def steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    masses: np.ndarray
    omega_norms: np.ndarray
    snapshots: list | None = field(default=None, repr=False)

    def __post_init__(self):
        if not (len(self.times) == len(self.masses) == len(self.omega_norms)):
            raise ValueError("trajectory arrays must share their length")

    def final(self) -> GridFunction:
        if not self.snapshots:
            raise NoSnapshots("trajectory was recorded without snapshots")
        return self.snapshots[-1][1]


def evolve_cn(k: Kernel, phi: GridFunction, cfg: CNConfig = CNConfig(),
              weight: Weight = Weight()) -> Trajectory:
    """Crank-Nicolson for ``(L + Theta)``: one sparse LU, then one solve per step.

    Observations (mass, omega norm, optional snapshot) are taken at t = 0 and
    every ``observe_every`` steps, plus the final step.
    """
    g = phi.grid
    A = fp_matrix(g) + theta_matrix(k, g)
    n = g.n
    complex_run = np.iscomplexobj(A.data) or np.any(phi.values.imag)
    dtype = complex if complex_run else float
    I = sp.identity(n, dtype=dtype, format="csc")
    lhs = (I - 0.5 * cfg.dt * A).astype(dtype).tocsc()
    rhs = (I + 0.5 * cfg.dt * A).astype(dtype).tocsr()
    lu = splu(lhs)
    f = phi.values.astype(dtype) if complex_run else phi.values.real.copy()

    times, masses, norms, snaps = [], [], [], []

    def observe(step: int, vec: np.ndarray) -> None:
        gf = GridFunction(g, vec)
        times.append(step * cfg.dt)
        masses.append(mass(gf))
        norms.append(omega_norm(gf, weight))
        if cfg.keep_snapshots:
            snaps.append((step * cfg.dt, gf))

    observe(0, f)
    steps = cfg.steps
    for step in range(1, steps + 1):
        b = rhs @ f
        f = lu.solve(b)
        last = step == steps
        if step % cfg.observe_every == 0 or last:
            if not np.all(np.isfinite(f)):
                raise SolverBreakdown(f"non-finite state at step {step}")
            res = np.linalg.norm(lhs @ f - b) / max(np.linalg.norm(b), 1e-300)
            if res > SOLVE_RESIDUAL_LIMIT:
                raise SolverBreakdown(f"relative residual {res:.2e} at step {step}")
            observe(step, f)
    return Trajectory(np.array(times), np.array(masses, dtype=complex), np.array(norms),
                      snaps if cfg.keep_snapshots else None)


def exact_semigroup(f: GridFunction, t: float) -> GridFunction:
    """Unperturbed flow: ``F[e^{tL} f](xi) = exp(-xi^2 (1 - e^{-2t})/2) f_hat(xi e^{-t})``,
    with ``f_hat`` at the contracted frequencies summed directly."""
    if t < 0:
        raise NegativeTime(f"t={t} < 0")
    if t == 0:
        return GridFunction(f.grid, f.values)
    xi = f.grid.xi
    c = np.exp(-t)
    vals = np.exp(-0.5 * xi * xi * (-np.expm1(-2.0 * t))) * dtft(f, xi * c)
    return inverse_line_transform(FourierLine(xi, vals), f.grid)


def distance_to_steady(traj: Trajectory, s: SpectralSet) -> np.ndarray:
    """``||f(t) - m f_0||_omega`` per snapshot, m the initial mass."""
    if not traj.snapshots:
        raise NoSnapshots("distance_to_steady needs snapshots")
    m = traj.masses[0]
    f0 = s.eigenfunctions[0] / s.scales[0]
    return np.array([omega_norm(gf - f0 * m, s.weight) for _, gf in traj.snapshots])


def write_trajectory_csv(path, traj: Trajectory, dist_steady: np.ndarray | None = None) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# format_version={CSV_FORMAT_VERSION}\n")
        w = csv.writer(fh)
        head = ["t", "mass_re", "mass_im", "omega_norm"]
        if dist_steady is not None:
            head.append("dist_steady")
        w.writerow(head)
        for i, t in enumerate(traj.times):
            row = [f"{t:.10g}", f"{traj.masses[i].real:.17g}", f"{traj.masses[i].imag:.17g}",
                   f"{traj.omega_norms[i]:.17g}"]
            if dist_steady is not None:
                row.append(f"{dist_steady[i]:.17g}")
            w.writerow(row)


def read_trajectory_csv(path) -> Trajectory:
    from .grid import _read_rows

    rows = _read_rows(path)
    t = np.array([float(r["t"]) for r in rows])
    m = np.array([float(r["mass_re"]) + 1j * float(r["mass_im"]) for r in rows])
    nrm = np.array([float(r["omega_norm"]) for r in rows])
    return Trajectory(t, m, nrm)
