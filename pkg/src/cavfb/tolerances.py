"""Numerical tolerances used across the package, defined in one place."""

HERMITIAN_TOL = 1e-10        # max |M - M^dag| (relative to scale) for Hermitian inputs
UNITARY_TOL = 1e-10          # max |U^dag U - 1| for feedback unitaries
PIVOT_RTOL = 1e-13           # LU pivot cutoff relative to the matrix scale
RANK_RTOL = 1e-10            # singular values below RANK_RTOL * s_max count as zero
STEADY_RESIDUAL_TOL = 1e-10  # max |L rho_ss| accepted for a stationary state
RHODOT_TOL = 1e-10           # convergence threshold on max |drho/dt| for propagation
PSD_CLAMP = 1e-10            # eigenvalues above -PSD_CLAMP are clamped to zero
DENSITY_TOL = 1e-8           # slack when validating density-matrix inputs
TRACE_DRIFT_HARD = 1e-6      # propagation aborts beyond this trace drift
DEFAULT_MAX_TIME = 1e4       # propagation horizon, in the generator's rate unit
