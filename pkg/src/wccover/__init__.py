"""Overlapping community detection by optimizing an estimate of weighted
community clustering, sequentially or in parallel batches."""
from .cover import Cover, NodeChange, initial_clustering, load_cover, post_process, remove_degenerate, write_cover
from .engine import RunConfig, RunTrace, benchmark, compute_node_change, run
from .evaluate import cover_stats, f1_overlapping, onmi_distance
from .graph import Graph, build_graph, parse_edge_list, processing_order, read_graph

__all__ = [
    "Cover",
    "Graph",
    "NodeChange",
    "RunConfig",
    "RunTrace",
    "benchmark",
    "build_graph",
    "compute_node_change",
    "cover_stats",
    "f1_overlapping",
    "initial_clustering",
    "load_cover",
    "onmi_distance",
    "parse_edge_list",
    "post_process",
    "processing_order",
    "read_graph",
    "remove_degenerate",
    "run",
    "write_cover",
]
