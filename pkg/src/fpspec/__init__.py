"""Spectral theory and time evolution of the 1-D Fokker-Planck operator
``Lf = f'' + x f' + f`` perturbed by a zero-mean convolution, in L^2(cosh(beta x))."""

from .decay_analysis import DecayFit, fit_decay, make_initial
from .errors import *  # noqa: F401,F403
from .evolution import (CNConfig, Trajectory, apply_fp_operator, distance_to_steady, evolve_cn,
                        exact_semigroup, fp_matrix, read_trajectory_csv, theta_matrix,
                        write_trajectory_csv)
from .grid import (FourierLine, Grid, GridFunction, derivative, dtft, inverse_line_transform,
                   line_transform, make_grid, mass, moment, quadrature, read_gridfunction_csv,
                   write_gridfunction_csv)
from .perturbation import (ConditionCReport, Kernel, apply_theta, dirac_pair, psi_exponent, psi_hat,
                           read_kernel_file, theta_hat, validate_condition_c, write_kernel_file,
                           zero_kernel)
from .spectral import (ResolventQuery, SpectralSet, annihilate, build_spectral_set, create, f0_hat,
                       perturbed_projection, psi_map, resolvent)
from .weighted_space import (HermiteBasis, Weight, ek_residuals, fourier_norm, hermite_mu,
                             hermite_projection, in_ek, omega_norm, poincare_ratio)

__version__ = "0.1.0"
