"""Upper and lower bounds on the bit and frame failure probability of
iterative erasure decoding, built from truncated computation trees."""

from .bound import (CONFIRMED, UNCONFIRMED, UNKNOWN, BoundConfig, BoundReport, StoppingDistance,
                    bound_bit, bound_fer, confirm_tightness, decide_stopping_distance, lower_bound)
from .code import (BUILTIN_NAMES, Conditioning, TannerGraph, VariableSet, builtin_code,
                   enumerate_stopping_sets, fer_transform, generate_random, generate_regular,
                   is_stopping_set, parse_alist, write_alist)
from .composite import Cell, Partition, composite_bound, design_partition, make_partition
from .decoder import AboveCap, ExactBer, McEstimate, exact_ber, exact_fer, exact_leading, monte_carlo, peel
from .estimators import CompositeBoundEstimator, FrameBoundEstimator, TreeBoundEstimator
from .poly import TruncatedPoly
from .tree import ComputationTree, LFStrategy, build_tree
from .validation import ValidationError

__version__ = "0.1.0"

__all__ = [
    "AboveCap", "BUILTIN_NAMES", "BoundConfig", "BoundReport", "CONFIRMED", "Cell", "CompositeBoundEstimator",
    "ComputationTree", "Conditioning", "ExactBer", "FrameBoundEstimator", "LFStrategy", "McEstimate",
    "Partition", "StoppingDistance", "TannerGraph", "TreeBoundEstimator", "TruncatedPoly", "UNCONFIRMED",
    "UNKNOWN", "ValidationError", "VariableSet", "bound_bit", "bound_fer", "build_tree", "builtin_code",
    "composite_bound", "confirm_tightness", "decide_stopping_distance", "design_partition",
    "enumerate_stopping_sets", "exact_ber", "exact_fer", "exact_leading", "fer_transform",
    "generate_random", "generate_regular", "is_stopping_set", "lower_bound", "make_partition",
    "monte_carlo", "parse_alist", "peel", "write_alist",
]
