"""Causal graph estimates assembled from pairwise cause-effect beliefs."""

from .assemble import (
    beliefs_to_adjacency,
    dag_log_probability,
    graph_log_probability,
    ml_order,
    mldag,
    mlg,
    msdag,
    renormalize,
    sample_dag,
    sample_digraph,
)
from .core import (
    AcyclicGraph,
    CycleError,
    DirectedGraph,
    MixedGraph,
    OrderedEdgeBeliefs,
    PairBeliefs,
    TopologicalOrder,
    VariableMatrix,
    WeightedAdjacency,
    has_cycle,
    toposort,
)
from .metrics import (
    cpdag_point_metrics,
    expected_edge_counts,
    point_metrics,
    prob_fpr,
    prob_shd,
    prob_tpr,
)
from .scorer import PairScorer, load_beliefs, predict_pair, save_beliefs, score_all_pairs, train_scorer

__version__ = "0.1.0"
