"""Influence minimization under the independent-cascade model.

Given a directed graph with per-edge activation probabilities and a seed
set, choose at most b blocker vertices so the expected cascade size is
as small as possible.  The estimator samples live-edge graphs and reads
the spread decrease of every candidate off each sample's dominator tree.
"""

from .blockers import (BlockerResult, GuardError, TimeoutExceeded,
                       advanced_greedy, baseline_greedy, exact_blockers,
                       greedy_replace, outdegree_blockers, rand_blockers)
from .dominator import DominatorTree, build_domtree, dump_domtree, subtree_sizes
from .graph import (GraphParseError, ProbGraph, ProbModel, SeedSpec,
                    assign_probs, dump_canonical, dumps_canonical, from_edges,
                    load_canonical, load_edge_list, unify_seeds)
from .sampling import (LiveEdgeSample, reach_count, required_samples,
                       sample_live_edge)
from .spread import (DeltaVector, OracleInfeasibleError, SpreadEstimate,
                     decrease_es, exact_spread, mcs_spread)

__version__ = "0.1.0"

__all__ = [
    "BlockerResult", "DeltaVector", "DominatorTree", "GraphParseError",
    "GuardError", "LiveEdgeSample", "OracleInfeasibleError", "ProbGraph",
    "ProbModel", "SeedSpec", "SpreadEstimate", "TimeoutExceeded",
    "advanced_greedy", "assign_probs", "baseline_greedy", "build_domtree",
    "decrease_es", "dump_canonical", "dumps_canonical", "dump_domtree",
    "exact_blockers", "exact_spread", "from_edges", "greedy_replace",
    "load_canonical", "load_edge_list", "mcs_spread", "outdegree_blockers",
    "rand_blockers", "reach_count", "required_samples", "sample_live_edge",
    "subtree_sizes", "unify_seeds",
]
