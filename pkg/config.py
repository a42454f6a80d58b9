"""Configuration settings for the monolab toolkit."""

# --- Tool Identity ---
TOOL_NAME = "monolab"
TOOL_VERSION = "0.1.0"
REPORT_SCHEMA = "monolab-report/1"

# --- Numerical Tolerances ---
# Inner-product thresholds are scaled by (1 + box diameter)**2 before use.
DEFAULT_TOL = 1e-9
MEMBERSHIP_TOL = 1e-10
DUALITY_TOL = 1e-9
ROUND_TRIP_TOL = 1e-12
FD_REL_TOL = 1e-6
MODULUS_TOL = 1e-6

# Points closer than this (max-norm) are treated as the same sample.
DEDUP_DIGITS = 12

# --- Sampling Settings ---
DEFAULT_DENSITY = 5
# The graph sample used against type-(A) candidates is refined to 2 * density - 1 per axis.
GRAPH_REFINEMENT = 2
RANDOM_EXTRA_POINTS = 16
# Extension gaps on non-polyhedral graphs: starting points per minimization and local refinement rounds.
EXTENSION_STARTS = 4
EXTENSION_REFINEMENTS = 4

# --- Resolvent Probe Settings ---
DEFAULT_LAMBDA = 1.0
LAMBDA_SWEEP = (0.5, 1.0, 2.0)
# First image-ball radius as a fraction of min(x_radius, lambda * v_radius); later radii halve it.
PROBE_RADIUS_FRACTION = 0.5
PROBE_RADIUS_STEPS = 3
PROBE_DENSITY = 5
# Generic (non exact) solver: refinement levels and residual acceptance.
SOLVER_GRID_DENSITY = 9
SOLVER_REFINE_LEVELS = 4
SOLVER_MAX_CANDIDATES = 64
# Accepted residual dist(y - J(x), lambda T(x)), scaled by 1 + |y|.
SOLVER_RESIDUAL_TOL = 1e-8

# --- Inner Semicontinuity Probe ---
ISC_RADII = (0.5, 0.25, 0.125)
ISC_EPS_FLOOR = 1e-6
ISC_DENSITY = 5

# --- Hypomonotonicity ---
# Ratio growth factor across successive pair scales that flags an unbounded modulus.
HYPO_GROWTH = 1.5

# --- Coderivative Criteria ---
PSD_BISECTION_STEPS = 60
PSD_SIGMA_CAP = 1e6

# --- Report and Plot Output ---
FLOAT_DIGITS = 17
SVG_WIDTH = 800
SVG_HEIGHT = 600
SVG_MARGIN = 40

# --- Catalog Loading Settings ---
# List of relative paths from project root to directories containing catalog JSON files
CATALOG_DATA_DIRS = ["data/catalog"]
SUGGESTION_LIMIT = 3
SUGGESTION_MIN_SCORE = 60
