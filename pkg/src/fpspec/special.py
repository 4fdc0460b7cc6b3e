"""Sine integral ``Si`` and entire cosine integral ``Cin`` for complex arguments.

    Si(z)  = int_0^z sin(t)/t dt
    Cin(z) = int_0^z (1 - cos t)/t dt

Both come from :func:`scipy.special.sici`, which accepts complex input.
``Cin = gamma + log z - Ci`` cancels badly for small ``|z|``, so there it is
summed from its power series instead.
"""

from __future__ import annotations

import numpy as np
from scipy.special import sici

# below this radius the series needs < 20 terms for full precision
CIN_SERIES_RADIUS = 2.0


def _cin_series(z: np.ndarray) -> np.ndarray:
    # Cin(z) = sum_{n>=1} (-1)^(n+1) z^(2n) / (2n (2n)!)
    z2 = z * z
    c = -np.ones_like(z)
    out = np.zeros_like(z)
    for n in range(1, 20):
        c = -c * z2 / ((2 * n - 1) * (2 * n))
        out += c / (2 * n)
    return out


def sici_complex(z) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(Si(z), Cin(z))`` elementwise for complex ``z``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    si, ci = sici(z)
    cin = np.empty_like(z)
    small = np.abs(z) <= CIN_SERIES_RADIUS
    cin[small] = _cin_series(z[small])
    big = ~small
    cin[big] = np.euler_gamma + np.log(z[big]) - ci[big]
    return si, cin


def sine_integral(z):
    """Complex Si; scalar in, scalar out."""
    si, _ = sici_complex(z)
    return si[0] if np.ndim(z) == 0 else si.reshape(np.shape(z))
