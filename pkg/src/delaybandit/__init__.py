"""FTRL with a hybrid Tsallis / negentropy regularizer for adversarial bandits with delayed feedback."""
from .bench import BoundCheck, ExperimentConfig, check_bounds, run, run_seed
from .env import (
    DelayedEnvironment,
    Instance,
    Observation,
    RegretReport,
    compute_regret,
    gen_stochastic_losses,
    gen_unbalanced,
    gen_uniform,
    load_instance,
    save_instance,
)
from .ledger import AdvancedTuner, DelayLedger, SimpleTuner, ZeroTuner, make_tuner
from .policy import ActionSample, FTRLPolicy, LossEstimate, make_estimate
from .solver import (
    KktCertificate,
    PotentialParams,
    SimplexDistribution,
    SolverError,
    grid_oracle,
    invert_derivative,
    objective_value,
    potential_derivative,
    solve_distribution,
)

__version__ = "0.1.0"
