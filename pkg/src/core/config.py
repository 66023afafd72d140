"""
Configuration constants for oamlab.

Centralizes all configuration to avoid duplication and enable easy customization.
"""

# =============================================================================
# Numerical Tolerances
# =============================================================================

NORM_EPSILON = 1e-9          # Allowed excess of a state's squared norm over 1
PRUNE_THRESHOLD = 1e-15      # Amplitudes below this magnitude are dropped
EXACT_TOLERANCE = 1e-12      # Closed-form identities (overlaps, 1/4 splits)
ORACLE_TOLERANCE = 1e-10     # Sparse engine vs dense oracle, builder self-tests
DISTRIBUTION_TOLERANCE = 1e-9  # Probabilities + loss must sum to 1 within this

# =============================================================================
# Labels and Sequences
# =============================================================================

DEFAULT_LABEL_BOUND = 1024   # |l| <= bound for OAM labels
MAX_SEQUENCE_TERMS = 10_000  # Safety stop for non-growing custom recurrences

FIBONACCI_INITIAL = (1, 2)   # F_1 = 1, F_2 = 2
LUCAS_INITIAL = (1, 3)       # L_1 = 1, L_2 = 3
TRIBONACCI_INITIAL = (1, 2, 4)

# =============================================================================
# Netlist Format
# =============================================================================

NETLIST_EXTENSION = ".onl"
FLOAT_SIGNIFICANT_DIGITS = 17  # Exact double round-trip through text

# =============================================================================
# Sampling
# =============================================================================

SAMPLE_BLOCK_SIZE = 4096     # Trials per random stream in bulk sampling
MIN_EXPECTED_COUNT = 5.0     # Chi-square cells below this are pooled
LOSS_OUTCOME = "loss"        # Outcome name of undetected photons; no detector may use it

# =============================================================================
# Protocol Configuration
# =============================================================================

DEFAULT_M0 = 3               # Window starts at F_3 = 3
DEFAULT_WINDOW = 8           # Eight values F_3 .. F_10
DEFAULT_TRIALS = 10_000
DEFAULT_BASIS_PROBABILITY = 0.5  # 50/50 nonpolarizing beam splitter
DEFAULT_ALPHA = 0.001
DEFAULT_SEED = 20130927

# =============================================================================
# Walk Configuration
# =============================================================================

DEFAULT_WALK_STEPS = 20
DEFAULT_WALK_TRAJECTORIES = 2000
WALK_VALUE_LIMIT = 10**200   # Walk chains are built in memory, never through the netlist bound

# =============================================================================
# Reports
# =============================================================================

REPORT_SCHEMA_VERSION = 1
TRANSCRIPT_SCHEMA_VERSION = "1.0.0"
TRANSCRIPT_DIR = "logs/transcripts"
SEED_ENV_VAR = "OAMLAB_SEED"
LOG_LEVEL_ENV_VAR = "OAMLAB_LOG_LEVEL"

# =============================================================================
# Logging Configuration
# =============================================================================

LOG_KEEP_RECENT = 10  # Keep last 10 log files
LOG_FILE_PREFIX = "oamlab"

# =============================================================================
# HTTP API
# =============================================================================

API_PORT = 8080
API_CORS_ORIGINS = ["http://localhost:4200"]  # Local notebook or dashboard front ends
