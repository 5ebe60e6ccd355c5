"""Local adaptive stochastic extragradient (LocalAdaSEG) in a simulated parameter server."""
from .algorithms import (
    AdaptiveState,
    SolverKind,
    WorkerState,
    aggregation_weights,
    base_learning_rate,
    baseline_step,
    eta_update,
    extragradient_step,
    gda_step,
    init_worker,
    local_phase,
    server_aggregate,
)
from .core import (
    Ball,
    Box,
    ConfigurationError,
    DomainError,
    FeasibleSet,
    Iterate,
    Product,
    ProtocolError,
    RngStream,
    UsageError,
    diameter_bound,
    gaussian_draw,
    project,
)
from .problems import (
    BilinearProblem,
    SaddleProblem,
    duality_gap,
    generate_bilinear,
    kkt_residual,
    oracle_eval,
    regret_bound_check,
)
from .simulator import BilinearSpec, RoundRecord, SweepResult, Topology, Trajectory, run, sweep

__version__ = "0.1.0"
