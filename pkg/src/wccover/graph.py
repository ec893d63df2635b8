"""Edge-list parsing and the preprocessed simple graph.

Input follows the SNAP convention: one edge per line, two whitespace-separated
non-negative integers, ``#`` starts a comment line.
"""
from __future__ import annotations

import io
import os
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np
import scipy.sparse as sp


class GraphError(ValueError):
    """Base class for graph input problems."""


class EdgeListParseError(GraphError):
    def __init__(self, lineno: int, line: str, reason: str):
        super().__init__(f"line {lineno}: {reason}: {line!r}")
        self.lineno = lineno


class EmptyGraphError(GraphError):
    pass


RawEdgeList = list[tuple[int, int]]


def parse_edge_list(stream: IO[str] | IO[bytes] | Iterable[str]) -> RawEdgeList:
    """Tokenize an edge list into ``(u, v)`` pairs of original node IDs.

    Comment and blank lines are skipped, no deduplication happens here.
    """
    edges: RawEdgeList = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) != 2:
            raise EdgeListParseError(lineno, stripped, f"expected 2 tokens, got {len(parts)}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListParseError(lineno, stripped, "non-integer node id") from None
        if u < 0 or v < 0:
            raise EdgeListParseError(lineno, stripped, "negative node id")
        edges.append((u, v))
    if not edges:
        raise EmptyGraphError("edge list contains no edges")
    return edges


def parse_edge_text(text: str) -> RawEdgeList:
    return parse_edge_list(io.StringIO(text))


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple undirected graph over dense IDs ``0..n-1``.

    ``adjacency[i]`` is sorted; ``neighbor_sets[i]`` holds the same IDs for
    O(1) membership tests. ``id_map[i]`` is the original ID of dense node ``i``.
    """

    adjacency: tuple[list[int], ...]
    neighbor_sets: tuple[frozenset[int], ...]
    degree: tuple[int, ...]
    triangle_count: tuple[int, ...]
    local_cc: tuple[float, ...]
    global_cc: float
    id_map: tuple[int, ...]

    @property
    def node_count(self) -> int:
        return len(self.adjacency)

    @property
    def edge_count(self) -> int:
        return sum(self.degree) // 2

    def dense_id(self, original: int) -> int:
        index = self._reverse_map.get(original)
        if index is None:
            raise KeyError(original)
        return index

    @property
    def _reverse_map(self) -> dict[int, int]:
        cached = self.__dict__.get("_reverse")
        if cached is None:
            cached = {orig: i for i, orig in enumerate(self.id_map)}
            object.__setattr__(self, "_reverse", cached)
        return cached

    def edges(self):
        for u, nbrs in enumerate(self.adjacency):
            for v in nbrs:
                if u < v:
                    yield u, v

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.id_map == other.id_map and self.adjacency == other.adjacency

    def __hash__(self) -> int:
        return hash((self.id_map, self.edge_count))


def _count_triangles(n: int, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    # k_i = (A^2 ∘ A) row sum / 2, exact in int64
    data = np.ones(len(rows), dtype=np.int64)
    adj = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    paths = (adj @ adj).multiply(adj)
    return np.asarray(paths.sum(axis=1)).ravel() // 2


def build_graph(edges: Sequence[tuple[int, int]]) -> Graph:
    """Collapse multi-edges, drop self-loops and relabel to dense IDs.

    Dense IDs follow ascending original ID.
    """
    arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    arr = arr[arr[:, 0] != arr[:, 1]]
    if len(arr) == 0:
        raise EmptyGraphError("graph has no edges after dropping self-loops")
    arr = np.sort(arr, axis=1)
    arr = np.unique(arr, axis=0)

    originals, dense = np.unique(arr, return_inverse=True)
    dense = dense.reshape(-1, 2)
    n = len(originals)

    rows = np.concatenate([dense[:, 0], dense[:, 1]])
    cols = np.concatenate([dense[:, 1], dense[:, 0]])
    order = np.lexsort((cols, rows))
    rows, cols = rows[order], cols[order]
    splits = np.searchsorted(rows, np.arange(1, n))
    adjacency = tuple(chunk.tolist() for chunk in np.split(cols, splits))

    degree = tuple(len(a) for a in adjacency)
    triangles = _count_triangles(n, rows, cols)
    local = tuple(
        float(k) / (d * (d - 1) / 2) if d > 1 else 0.0
        for k, d in zip(triangles.tolist(), degree)
    )
    return Graph(
        adjacency=adjacency,
        neighbor_sets=tuple(frozenset(a) for a in adjacency),
        degree=degree,
        triangle_count=tuple(triangles.tolist()),
        local_cc=local,
        global_cc=float(np.mean(local)) if n else 0.0,
        id_map=tuple(originals.tolist()),
    )


def read_graph(path: str | os.PathLike) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return build_graph(parse_edge_list(fh))


def _check_node(graph: Graph, node: int) -> None:
    if not 0 <= node < graph.node_count:
        raise IndexError(f"node {node} out of range 0..{graph.node_count - 1}")


def local_clustering_coefficient(graph: Graph, node: int) -> float:
    _check_node(graph, node)
    return graph.local_cc[node]


def global_clustering_coefficient(graph: Graph) -> float:
    return graph.global_cc


def processing_order(graph: Graph) -> list[int]:
    """Nodes by clustering coefficient desc, then degree desc, then ID asc."""
    return sorted(range(graph.node_count), key=lambda i: (-graph.local_cc[i], -graph.degree[i], i))


def triangles_with_set(graph: Graph, x: int, nodes: Iterable[int]) -> int:
    """Count triangles ``{x, y, z}`` with ``y, z`` both in ``nodes``."""
    _check_node(graph, x)
    inside = [y for y in set(nodes) if y != x and y in graph.neighbor_sets[x]]
    inside_set = set(inside)
    pairs = sum(len(graph.neighbor_sets[y] & inside_set) for y in inside)
    return pairs // 2


def triangle_partners(graph: Graph, x: int) -> set[int]:
    """Neighbors of ``x`` that close at least one triangle with it."""
    nbrs = graph.neighbor_sets[x]
    return {y for y in graph.adjacency[x] if not nbrs.isdisjoint(graph.neighbor_sets[y])}
