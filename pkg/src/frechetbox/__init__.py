"""Fréchet distance between polygonal curves with a memoized blocked decision procedure."""

from .blocked import MemoTable, Partition, boxed_decide, make_partition, memo_stats
from .distance import DistanceResult, compute_bisect, compute_exact, critical_values, discrete_frechet
from .encoding import BlockSpec, BoxIO, ReachCode, Signature, compute_signature, process_box
from .freespace import DecisionResult, init_frontiers, naive_decide, propagate_cell
from .geometry import (
    Curve,
    DegenerateInputError,
    EdgeInterval,
    NoPredecessorError,
    Segment,
    ball_segment_intersection,
    point_segment_distance,
    predecessor_rank,
)
from .io import parse_curve, write_curve
from .predicates import predicate

__version__ = "0.1.0"

__all__ = [
    "BlockSpec",
    "BoxIO",
    "Curve",
    "DecisionResult",
    "DegenerateInputError",
    "DistanceResult",
    "EdgeInterval",
    "MemoTable",
    "NoPredecessorError",
    "Partition",
    "ReachCode",
    "Segment",
    "Signature",
    "ball_segment_intersection",
    "boxed_decide",
    "compute_bisect",
    "compute_exact",
    "compute_signature",
    "critical_values",
    "discrete_frechet",
    "init_frontiers",
    "make_partition",
    "memo_stats",
    "naive_decide",
    "parse_curve",
    "point_segment_distance",
    "predecessor_rank",
    "predicate",
    "process_box",
    "propagate_cell",
    "write_curve",
]
