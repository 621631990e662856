"""Fog network formation and task distribution simulator."""

__version__ = "0.1.0"

from .queueing import (
    ComputeProfile,
    Position,
    QueueUnstableError,
    RadioParams,
    channel_gain,
    comp_delay_cloud,
    comp_delay_fog,
    md1_wait,
    path_delay,
    service_rate,
    tx_delay,
)
from .selection import (
    FogCandidate,
    SelectionOutcome,
    ThresholdSet,
    competitive_ratio,
    offline_top_j,
    online_secretary,
    score,
)
from .solver import (
    CloudLink,
    FogLink,
    InfeasibleError,
    NodeSet,
    SolveReport,
    TaskDistribution,
    grid_oracle,
    load_for_delay,
    paths_of,
    solve_distribution,
    total_cost,
    total_load_fraction,
)
from .scenarios import (
    ScenarioConfig,
    candidate_stream,
    choose_j,
    generate_scenario,
    node_set_for,
    run_distance_sweep,
    run_offline_sweep,
    run_online_vs_offline,
    run_ratio_cdf,
)
