"""Multipartite regularity partitions, Turán bounds and bounded-degree embeddings."""

from .embedding import TargetGraph, embed, good_vertex_set, proper_coloring, verify_embedding
from .graph import (
    DenseGraph,
    GraphError,
    PartiteHost,
    VertexSet,
    density,
    monochrome_subgraph,
    random_bounded_degree_graph,
    random_host,
)
from .harness import PipelineConfig, PipelineReport, density_color_clique, feasible_epsilon, run_pipeline
from .partition import Partition, absorb_exceptional, iterate_to_regular, refine_step
from .regularity import PairStats, RegularityParams, Verdict, check_pair, check_pair_exhaustive, check_pair_sampled, index
from .turan import ReducedGraph, find_cluster_clique, max_kp_free_oracle, turan_bound

__all__ = [
    "DenseGraph", "GraphError", "PartiteHost", "VertexSet", "density", "monochrome_subgraph",
    "random_bounded_degree_graph", "random_host",
    "PairStats", "RegularityParams", "Verdict", "check_pair", "check_pair_exhaustive", "check_pair_sampled", "index",
    "Partition", "absorb_exceptional", "iterate_to_regular", "refine_step",
    "ReducedGraph", "find_cluster_clique", "max_kp_free_oracle", "turan_bound",
    "TargetGraph", "embed", "good_vertex_set", "proper_coloring", "verify_embedding",
    "PipelineConfig", "PipelineReport", "density_color_clique", "feasible_epsilon", "run_pipeline",
]
__version__ = "0.1.0"
