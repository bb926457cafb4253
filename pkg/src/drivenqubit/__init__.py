"""Strongly driven two-level system: exact propagation, CHRW-type analytic
solutions, phase-function plateau analytics and Fourier peak structure."""

from .cdt import (StairLevels, cdt_lab_bloch, cdt_trajectory, cdt_z, phase_phi2, rwa_rf_z,
                  stair_levels)
from .chrw import (RenormalizedParams, analytic_trajectory, even_harmonic_z, lab_bloch, phase_phi1, primed_bloch,
                   renormalize, s_je, solve_xi)
from .errors import CDTProximityWarning, ConvergenceError, DomainError, PreconditionError
from .exact import BlochTrajectory, DriveParams, hamiltonian_at, propagate
from .plateau import (PlateauReport, PlateauSegment, deviation_g, detect_plateaus,
                      envelope_bound, extrema_times, predicted_oscillation_count)
from .special import bessel_j, bessel_j_asymptotic, cdt_driving_ratio
from .spectrum import Spectrum, fourier_spectrum, match_peaks, predicted_peaks

__version__ = "0.1.0"
