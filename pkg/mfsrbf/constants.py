# Package settings
PACKAGE_TITLE = "mfsrbf"
STATE_VERSION = "1.0.0"

# Stochastic RBF ensemble
TAU_MIN = 1.0
TAU_MAX = 3.0
N_TAU = 100  # stratified tau midpoints used by the final fit
N_TAU_LOOCV = 5  # reduced tau subset for leave-one-out folds
K_MIN = 2  # smallest number of centers searched by LOOCV
KSTAR_WINDOW = 1  # K* may move by at most this much between iterations
DUPLICATE_TOL = 1.0e-12
LSTSQ_CUTOFF = 1.0e-10  # relative singular value cutoff
KMEANS_MAX_ITER = 100
KMEANS_TOL = 1.0e-10  # relative inertia change
BAND_PERCENTILES = (2.5, 97.5)

# Acquisition (penalized lower confidence bound)
D0 = 5.0e-3  # minimum acceptable distance to an existing sample
EPS_PEN = 1.0e-1
LCB_W_F = 1.0
LCB_W_U = 1.0

# Campaign loop
STAGNATION_PATIENCE = 5
FINAL_OPTIMUM_MODES = ("mean", "last_acquisition")
TERMINATION_REASONS = ("budget", "stagnation", "evaluation-failure")
EVENT_TYPES = ("info", "warning", "stagnation", "error")

# Deterministic particle swarm
PSO_PARTICLES_PER_DIM = 4
PSO_ITERATIONS = 200
PSO_CHI = 0.721
PSO_C_COGNITIVE = 1.655
PSO_C_SOCIAL = 1.655

# Noise model
NOISE_FRACTIONS = (0.025, 0.05, 0.10)  # sigma_l / R1 for table levels 1..3
NOISE_DISTRIBUTIONS = ("normal", "uniform")
R1_GRID_POINTS_1D = 1001
R1_SOBOL_LOG2 = 16  # 2**16 Sobol points for D >= 2

# Cost ratios beta_l = c_l / c_1
DEFAULT_COSTS = {
    1: (1.0,),
    2: (1.0, 0.1),  # highest and lowest fidelity
    3: (1.0, 0.2, 0.1),
}

# Run defaults
BUDGET_BASE = 40.0
BUDGET_PER_DIM = 5.0
REPETITIONS = 50
BASE_SEED = 0
OUTPUT_DIRECTORY = "runs"
NUMBER_FORMAT = ".17g"

# Import data from constants_data subdirectory
from .constants_data.problems_data import PROBLEMS
