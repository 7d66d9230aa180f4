"""Numerical tolerance constants used across the library and its test suite.

All defaults in one place so they can be audited and referenced by name.
"""

# Density-matrix sanity bounds
HERMITICITY_ATOL = 1e-12       # elementwise |rho - rho^dagger|
PSD_EIGENVALUE_FLOOR = -1e-10  # eigenvalues of a state may not dip below this
TRACE_ATOL = 1e-12             # |tr(rho) - 1| for trace-preserving maps

# Channel / measurement bookkeeping
DETECTION_COMPLETENESS_ATOL = 1e-10  # sum of click-pattern probabilities vs 1
UNITARY_ROUNDTRIP_ATOL = 1e-10       # element then inverse, Frobenius norm

# Cross-implementation agreement
ORACLE_EQUIVALENCE_ATOL = 1e-9  # engine vs brute-force reference, elementwise

# Geometry and root finding
GAP_HEIGHT_ROUNDTRIP_RTOL = 1e-9  # ion_height <-> rf_gap_for_height
CHIRP_RESIDUAL_REL = 1e-6         # constant-path residual, relative to lambda0
QUADRATURE_RTOL = 1e-6            # adaptive 2D quadrature for collection
