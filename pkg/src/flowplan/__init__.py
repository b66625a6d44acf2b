"""Optimal path planning through piecewise-constant flow fields.

The planner reduces the continuous optimal-control problem to a finite
optimization over junction points on region boundaries and solves it with
intermittent diffusion: gradient descent alternating with bursts of noise
that hop between boundary chains. A flow-field partitioner turns gridded
flow data into piecewise-constant scenes.
"""

from .cost import (
    CostModel,
    SegmentSolution,
    chain_cost,
    chain_grad,
    energy_model,
    energy_segment,
    segment_value,
    t_star_max_speed,
    time_model,
    time_segment,
)
from .errors import FlowPlanError, InputError, PlanningFailureError
from .geometry import (
    Boundary,
    FlowScene,
    JunctionChain,
    Region,
    boundary_point,
    corner_reroute,
    initial_chain,
    locate_region,
)
from .mej import IDSchedule, PlanResult, descend, euler_step, optimize, repair_chain
from .partition import (
    FlowGrid,
    PartitionResult,
    boundary_points,
    feature_vectors,
    fit_line,
    kmeans,
    partition_grid,
    region_mean_flow,
)

__version__ = "0.1.0"

__all__ = [
    "Boundary",
    "CostModel",
    "FlowGrid",
    "FlowPlanError",
    "FlowScene",
    "IDSchedule",
    "InputError",
    "JunctionChain",
    "PartitionResult",
    "PlanResult",
    "PlanningFailureError",
    "Region",
    "SegmentSolution",
    "boundary_point",
    "boundary_points",
    "chain_cost",
    "chain_grad",
    "corner_reroute",
    "descend",
    "energy_model",
    "energy_segment",
    "euler_step",
    "feature_vectors",
    "fit_line",
    "initial_chain",
    "kmeans",
    "locate_region",
    "optimize",
    "partition_grid",
    "region_mean_flow",
    "repair_chain",
    "segment_value",
    "t_star_max_speed",
    "time_model",
    "time_segment",
]
