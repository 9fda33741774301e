import os
from pathlib import Path

# Project root directory
BASE_DIR = Path(__file__).parent.parent

# Output directories
RESULTS_DIR = BASE_DIR / "data" / "results"
REPORTS_DIR = BASE_DIR / "data" / "reports"

# Ensure directories exist
for directory in [RESULTS_DIR, REPORTS_DIR]:
    directory.mkdir(parents=True, exist_ok=True)

# Ring settings
SUPPORTED_S = (1, 2, 3)
SUPPORTED_N = (1, 2, 3)
MAX_TABLE_N = 8
MAX_EXHAUSTIVE_SN = 6  # exhaustive self-dual search bound
MAX_QUBITS = 4

# Numerical tolerances
UNITARY_TOL = 1e-12
MATRIX_TOL = 1e-10
PROB_TOL = 1e-10
NORMALIZATION_TOL = 1e-9
FACTOR_GAP = 1e-8
PSD_FLOOR = -1e-10
STATE_TOL = 1e-12  # Hermiticity and unit trace
BORN_DUST = 1e-12  # clipped from exact Born probabilities

# Error analysis
DEFAULT_CLAMP = 1e-10
CLAMP_SWEEP = (1e-8, 1e-10, 1e-12)
STABILITY_RTOL = 0.01

# Experiment defaults
DEFAULT_SEED = 7
DEFAULT_SHOTS = (1000, 4000, 16000)
DEFAULT_REPEATS = 200
DEFAULT_SAMPLES = 1000
N_JOBS = int(os.getenv("QUQUART_N_JOBS", "1"))

# Published error bounds: (scheme, ensemble) -> value
PUBLISHED_BOUNDS = {
    ("1 ququart MU-like", "pure"): 1.72,
    ("1 ququart MU-like", "mixed"): 1.84,
    ("2 qubit MUB", "pure"): 1.88,
    ("2 qubit MUB", "mixed"): 1.95,
    ("d=4 SIC-POVM", "pure"): 4.24,
    ("d=4 SIC-POVM", "mixed"): 4.44,
    ("2 ququart MU-like", "pure"): 3.16,
    ("2 ququart MU-like", "mixed"): 3.54,
    ("4 qubit MUB", "pure"): 3.87,
    ("4 qubit MUB", "mixed"): 3.98,
    ("d=16 SIC-POVM", "pure"): 16.43,
    ("d=16 SIC-POVM", "mixed"): 16.49,
}
PUBLISHED_TOLERANCE = 0.2

# Logging settings
LOG_LEVEL = os.getenv("QUQUART_LOG_LEVEL", "INFO")
LOG_FILE = os.getenv("QUQUART_LOG_FILE")  # JSON lines when set

# CLI settings
APP_NAME = "ququart"
EXIT_OK = 0
EXIT_NUMERIC = 1
EXIT_USAGE = 2
