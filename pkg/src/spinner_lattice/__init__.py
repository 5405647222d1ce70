from .band_analysis import alpha_sweep_diagonal, band_gaps, compute_surfaces, slowness_contours
from .bloch_dispersion import DispersionBranches, Regime, classify_regime, dispersion_det_scan
from .gyro_spinner import SpinnerBody, compatible_spin_rate, precession_rate, spinner_constant
from .lattice_geometry import BlochVector, Flavor, LatticeSpec

__version__ = "0.1.0"
