"""Two-stage scheduling with speed predictions.

Jobs are grouped into bags while machine speeds are only predicted; the bags
are then scheduled, unsplit, once the true speeds are revealed.  The package
provides the data model, exact and greedy schedulers, prediction-trusting and
rebalanced partitioners, deterministic instance generators, and an
experiment/verification harness with a CLI front end (``speedsched``).
"""

from .gen import (
    CLAMP_FLOOR,
    Dist,
    SplitMix64,
    SyntheticConfig,
    gen_binary_lb_instance,
    gen_prop1_instance,
    gen_synthetic,
    gen_tradeoff_instance,
    normal_inv_cdf,
    substream,
    synthetic_batch,
)
from .harness import (
    AlgorithmSpec,
    CurveRow,
    ExperimentConfig,
    ExperimentRow,
    MetricsReport,
    PropertyCheck,
    binary_counts,
    curves_to_csv,
    evaluate,
    is_binary_speed,
    make_partition,
    oracle_value,
    rows_to_csv,
    run_experiment,
    theory_curves,
    verify_properties,
)
from .model import (
    Assignment,
    Bag,
    Instance,
    IprState,
    Partition,
    Schedule,
    bag_load,
    beta_ratio,
    instance_from_json,
    instance_to_json,
    load_instance,
    load_partition,
    machine_loads,
    makespan,
    partition_from_json,
    partition_to_json,
    prediction_error,
    save_instance,
    save_partition,
    validate_partition,
)
from .partition import (
    ConsistentPartition,
    IprConfig,
    IprResult,
    binary_speed_partition,
    consistent_partition,
    fluid_ipr,
    ipr,
    lpt_partition,
    lpt_rebalance,
)
from .solvers import (
    DEFAULT_NODE_BUDGET,
    BudgetExceededError,
    CapacityInfeasibleError,
    SolveResult,
    brute_force_makespan,
    capacity_robust_schedule,
    exact_schedule,
    lpt_schedule,
    merge_to_fit,
    opt_lower_bound,
)

__version__ = "1.0.0"

__all__ = [
    "Assignment",
    "AlgorithmSpec",
    "Bag",
    "BudgetExceededError",
    "CLAMP_FLOOR",
    "CapacityInfeasibleError",
    "ConsistentPartition",
    "CurveRow",
    "DEFAULT_NODE_BUDGET",
    "Dist",
    "ExperimentConfig",
    "ExperimentRow",
    "Instance",
    "IprConfig",
    "IprResult",
    "IprState",
    "MetricsReport",
    "Partition",
    "PropertyCheck",
    "Schedule",
    "SolveResult",
    "SplitMix64",
    "SyntheticConfig",
    "bag_load",
    "beta_ratio",
    "binary_counts",
    "binary_speed_partition",
    "brute_force_makespan",
    "capacity_robust_schedule",
    "consistent_partition",
    "curves_to_csv",
    "evaluate",
    "exact_schedule",
    "fluid_ipr",
    "gen_binary_lb_instance",
    "gen_prop1_instance",
    "gen_synthetic",
    "gen_tradeoff_instance",
    "instance_from_json",
    "instance_to_json",
    "ipr",
    "is_binary_speed",
    "load_instance",
    "load_partition",
    "lpt_partition",
    "lpt_rebalance",
    "lpt_schedule",
    "machine_loads",
    "make_partition",
    "makespan",
    "merge_to_fit",
    "normal_inv_cdf",
    "opt_lower_bound",
    "oracle_value",
    "partition_from_json",
    "partition_to_json",
    "prediction_error",
    "rows_to_csv",
    "run_experiment",
    "save_instance",
    "save_partition",
    "substream",
    "synthetic_batch",
    "theory_curves",
    "validate_partition",
    "verify_properties",
]
