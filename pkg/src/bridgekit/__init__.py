"""bridgekit: compact symbolic drift fields for distribution transport.

The package fits sparse, interpretable velocity fields v(x, t) = W Xi(x, t)
from endpoint samples of two distributions, integrates them to transport one
distribution onto the other, and benchmarks the result against a small
neural bridge baseline trained by iterative Markovian fitting.
"""

from bridgekit.gauss import GaussianPair, make_scenario, sample, empirical_moments, bures_w2
from bridgekit.interp import Interpolant, linear_path, brownian_bridge_point
from bridgekit.features import FeatureLibrary, eval_features, feature_count, describe
from bridgekit.sparsereg import SparseSolverConfig, least_squares, stlsq, sr3
from bridgekit.sindyfm import (
    FMDataset,
    SymbolicDrift,
    build_dataset,
    fit,
    count_active,
    serialize,
    deserialize,
)
from bridgekit.dynamics import IntegratorConfig, integrate_ode, transport_samples, euler_maruyama
from bridgekit.neural import (
    MlpDrift,
    DdpmSchedule,
    AdamState,
    init_mlp,
    init_adam,
    mlp_forward,
    mlp_grad,
    adam_step,
    ddpm_forward_trajectories,
    pretrain,
    dsbm_train,
    write_training_curves,
)
from bridgekit.bench import (
    ExperimentConfig,
    MetricsRow,
    run_benchmark,
    convergence_sweep,
    ingest_latent_pairs,
    write_latent_pairs,
    emit_report,
)

__version__ = "0.1.0"
