"""Multi-fidelity active-learning optimization with stochastic RBF surrogates."""

from mfsrbf.campaign_state import CampaignRecord, CampaignState, drive_campaign, run_campaign
from mfsrbf.config import (
    AcquisitionConfig,
    CampaignConfig,
    ExternalConfig,
    NoiseConfig,
    OutputConfig,
    PsoConfig,
    RunConfig,
    SrbfConfig,
    load_run_config,
)
from mfsrbf.errors import (
    ConfigError,
    DuplicatePointError,
    EvaluationError,
    InvalidArgumentError,
    InvalidStateError,
    MfsrbfError,
    OptimizationError,
    UnsupportedDimensionError,
)
from mfsrbf.logic.active_learning import (
    TerminationReason,
    acquisition,
    fidelity_selection_vector,
    penalty,
    propose_point,
    select_fidelity,
    should_stop,
)
from mfsrbf.logic.benchmarks import (
    FidelityStack,
    default_costs,
    function_range_r1,
    initial_design,
    list_problems,
    rotation_matrix,
)
from mfsrbf.logic.external import ExternalEvaluator
from mfsrbf.logic.metrics import (
    BoxStats,
    ReferenceOptimum,
    aggregate_stats,
    campaign_metrics,
    prediction_error,
    reference_errors,
    reference_optimum,
    relative_improvements,
)
from mfsrbf.logic.multifidelity import (
    BudgetLedger,
    FidelityLevels,
    MfSurrogate,
    add_observation,
    computational_cost,
    fit_hierarchy,
    inter_level_errors,
    predict_level,
    predict_mf,
)
from mfsrbf.logic.pso import PsoResult, hammersley, init_swarm, minimize
from mfsrbf.logic.srbf import (
    Prediction,
    RbfEnsemble,
    TrainingSet,
    fit_ensemble,
    fit_weights,
    kmeans_centers,
    loocv_rmse,
    predict,
    select_num_centers,
)
from mfsrbf.output.writers import emit_history, emit_surface_grid

__version__ = "1.0.0"
