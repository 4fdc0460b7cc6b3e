"""Initial data for the decay experiments and log-linear rate fits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonpositiveNorm, OrderTooHigh, UnknownInitial, WindowTooSparse
from .evolution import Trajectory
from .grid import GridFunction
from .spectral import SpectralSet
from .weighted_space import omega_norm

DEFAULT_WINDOW = (4.0, 8.0)
MIN_FIT_POINTS = 10
PHI1_COEFF = 1.32
STEP_HALF_WIDTH = 4.0


@dataclass(frozen=True)
class DecayFit:
    """``norm(t) ~ prefactor * exp(rate * t)`` on ``window``."""

    rate: float
    prefactor: float
    window: tuple
    rms_residual: float

    def to_dict(self) -> dict:
        return {"rate": self.rate, "prefactor": self.prefactor,
                "window": list(self.window), "rms_residual": self.rms_residual}


def _step_pair(s: SpectralSet) -> GridFunction:
    # chi_[-4,0] - chi_[0,4]; end points of each interval get the mean of the
    # one-sided limits, so x = +-4 carry +-1/2 and x = 0 carries 0
    x = s.grid.x
    a = STEP_HALF_WIDTH
    left = np.where((x > -a) & (x < 0), 1.0, 0.0) + 0.5 * (np.isclose(x, -a) | np.isclose(x, 0.0))
    right = np.where((x > 0) & (x < a), 1.0, 0.0) + 0.5 * (np.isclose(x, a) | np.isclose(x, 0.0))
    return GridFunction(s.grid, left - right)


def make_initial(name: str, s: SpectralSet) -> GridFunction:
    """``phi1 = f1 - 1.32 f2`` or ``phi2 = chi_[-4,0] - chi_[0,4]``, omega-normalized.

    ``phi1`` uses derivative-normalized eigenfunctions whatever the set's own
    normalization is.
    """
    if name == "phi1":
        if s.k_max < 2:
            raise OrderTooHigh("phi1 needs eigenfunctions up to k = 2")
        f1 = s.eigenfunctions[1] / s.scales[1]
        f2 = s.eigenfunctions[2] / s.scales[2]
        raw = f1 - PHI1_COEFF * f2
    elif name == "phi2":
        raw = _step_pair(s)
    else:
        raise UnknownInitial(f"unknown initial condition {name!r}; use phi1 or phi2")
    return raw / omega_norm(raw, s.weight)


def fit_decay(traj: Trajectory, window: tuple = DEFAULT_WINDOW) -> DecayFit:
    """Ordinary least squares of ``log(norm)`` against t for t in the closed window."""
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise ValueError(f"empty window [{lo}, {hi}]")
    t = np.asarray(traj.times, dtype=float)
    sel = (t >= lo - 1e-12) & (t <= hi + 1e-12)
    if np.count_nonzero(sel) < MIN_FIT_POINTS:
        raise WindowTooSparse(f"{np.count_nonzero(sel)} observations in [{lo}, {hi}], need {MIN_FIT_POINTS}")
    y = np.asarray(traj.omega_norms, dtype=float)[sel]
    if np.any(~(y > 0)):
        raise NonpositiveNorm("norms must be positive to take logarithms")
    ts = t[sel]
    X = np.column_stack([ts, np.ones_like(ts)])
    coef, *_ = np.linalg.lstsq(X, np.log(y), rcond=None)
    resid = np.log(y) - X @ coef
    return DecayFit(float(coef[0]), float(np.exp(coef[1])), (lo, hi),
                    float(np.sqrt(np.mean(resid ** 2))))
