"""Numerical tolerances shared by all models and services."""

# An edge carries flow iff x_e > EPS_FLOW.
EPS_FLOW = 1e-12

# Membership tolerance for path polytopes.
EPS_FEAS = 1e-9

# Stopping threshold between successive projection iterates.
EPS_PROJ = 1e-10

MAX_PROJ_ITERS = 10_000

# Residual above which a non-converged projection is an error rather than a warning.
PROJ_DIVERGENCE_RESIDUAL = 1e-6
