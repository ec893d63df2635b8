"""Graph fixtures: SNAP file lookup and seeded synthetic stand-ins.

The SNAP files are not bundled. ``find_eu_core`` looks for
``email-Eu-core.txt`` via ``$WCCOVER_EU_CORE`` or a ``data/`` directory next
to the working directory; ``eu_core_surrogate`` builds a graph of the same
size and comparable density and clustering when the file is absent.
"""
from __future__ import annotations

import os
from pathlib import Path
from typing import Optional

import numpy as np

from .graph import Graph, build_graph, read_graph

EU_CORE_NAMES = ("email-Eu-core.txt", "email-Eu-core.txt.gz")


def find_eu_core() -> Optional[Path]:
    env = os.environ.get("WCCOVER_EU_CORE")
    candidates = [Path(env)] if env else []
    for base in (Path.cwd() / "data", Path(__file__).resolve().parents[2] / "data"):
        candidates.extend(base / name for name in EU_CORE_NAMES)
    for path in candidates:
        if path.is_file():
            return path
    return None


def load_eu_core() -> Optional[Graph]:
    path = find_eu_core()
    if path is None:
        return None
    if path.suffix == ".gz":
        import gzip

        from .graph import parse_edge_list

        with gzip.open(path, "rt", encoding="utf-8") as fh:
            return build_graph(parse_edge_list(fh))
    return read_graph(path)


def planted_overlap_edges(
    n: int,
    groups: int,
    teams: int,
    team_size: tuple[int, int],
    team_density: float,
    group_degree: float,
    background_degree: float,
    seed: int,
) -> np.ndarray:
    """Edges of a seeded graph with heterogeneous, overlapping group structure.

    Nodes carry a lognormal activity weight. Each node has a home group
    (sizes Zipf-like); sparse weighted edges connect members of a group, dense
    small teams are drawn mostly from one group with a few outsiders, and a
    Chung-Lu background spans everything.
    """
    rng = np.random.default_rng(seed)
    weight = rng.lognormal(0.0, 0.8, n)
    weight /= weight.mean()

    shares = 1.0 / np.arange(1, groups + 1) ** 0.9
    home = rng.choice(groups, size=n, p=shares / shares.sum())
    chunks = []

    # within home groups: Chung-Lu restricted to the group
    for g in range(groups):
        nodes = np.flatnonzero(home == g)
        if len(nodes) < 2:
            continue
        w = weight[nodes]
        expected = group_degree * len(nodes) / 2
        count = rng.poisson(expected)
        p = w / w.sum()
        u = rng.choice(nodes, size=count, p=p)
        v = rng.choice(nodes, size=count, p=p)
        chunks.append(np.stack([u, v], axis=1))

    # dense overlapping teams
    by_group = [np.flatnonzero(home == g) for g in range(groups)]
    for _ in range(teams):
        g = rng.choice(groups, p=shares / shares.sum())
        pool = by_group[g]
        size = int(rng.integers(team_size[0], team_size[1] + 1))
        inside = min(len(pool), max(2, int(round(size * 0.8))))
        w = weight[pool]
        chosen = rng.choice(pool, size=inside, replace=False, p=w / w.sum())
        outsiders = rng.choice(n, size=size - inside, replace=False, p=weight / weight.sum())
        members = np.unique(np.concatenate([chosen, outsiders]))
        iu, ju = np.triu_indices(len(members), k=1)
        keep = rng.random(len(iu)) < team_density
        chunks.append(np.stack([members[iu[keep]], members[ju[keep]]], axis=1))

    # global background
    count = rng.poisson(background_degree * n / 2)
    p = weight / weight.sum()
    chunks.append(np.stack([rng.choice(n, size=count, p=p), rng.choice(n, size=count, p=p)], axis=1))

    # keep every node present with at least one edge
    chunks.append(np.stack([np.arange(n), rng.integers(0, n, n)], axis=1))
    return np.concatenate(chunks)


def eu_core_surrogate(seed: int = 2021) -> Graph:
    """Deterministic 1005-node stand-in for the SNAP Eu-core email graph.

    Targets the public summary statistics of that graph: 1005 nodes, 42
    departments, about 16k undirected edges, average clustering near 0.4.
    """
    edges = planted_overlap_edges(
        n=1005,
        groups=42,
        teams=200,
        team_size=(5, 22),
        team_density=0.85,
        group_degree=8.0,
        background_degree=1.5,
        seed=seed,
    )
    return build_graph([tuple(e) for e in edges.tolist()])


def eu_core_or_surrogate() -> tuple[Graph, bool]:
    """The real Eu-core graph if available, else the surrogate; flag says which."""
    real = load_eu_core()
    if real is not None:
        return real, True
    return eu_core_surrogate(), False


def large_synthetic(n: int = 100_000, seed: int = 7) -> Graph:
    """Sparse overlapping-community graph for scaling and speedup runs."""
    edges = planted_overlap_edges(
        n=n,
        groups=max(2, n // 250),
        teams=n // 8,
        team_size=(4, 10),
        team_density=0.5,
        group_degree=3.0,
        background_degree=1.0,
        seed=seed,
    )
    return build_graph([tuple(e) for e in edges.tolist()])
