"""Overlapping community assignment with incremental bookkeeping.

Every community stores, for each member, its internal degree (number of
neighbors inside the same community), plus the community's internal edge
count. Join and leave keep both exact so score evaluation never has to
rescan adjacency.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Optional

from .graph import Graph


class CoverLoadError(ValueError):
    pass


@dataclass(frozen=True)
class NodeChange:
    node: int
    join: Optional[tuple[int, float]] = None
    leave: Optional[tuple[int, float]] = None

    @property
    def empty(self) -> bool:
        return self.join is None and self.leave is None


class Cover:
    """Mutable overlapping cover over a fixed :class:`Graph`.

    ``members[c]`` maps each member of community ``c`` to its internal degree.
    Community IDs come from a monotone counter and are never reused.
    """

    def __init__(self, graph: Graph):
        self.graph = graph
        self.members: dict[int, dict[int, int]] = {}
        self.internal_edges: dict[int, int] = {}
        self.memberships: list[set[int]] = [set() for _ in range(graph.node_count)]
        self.next_community_id = 0
        self.score_cache: dict[int, float] = {}
        # replica synchronisation for worker processes; None when not recording
        self.oplog: Optional[list[tuple]] = None

    # -- queries -----------------------------------------------------------

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, community: int) -> bool:
        return community in self.members

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def community(self, community: int) -> set[int]:
        return set(self.members[community])

    def size(self, community: int) -> int:
        return len(self.members[community])

    def internal_degree(self, node: int, community: int) -> int:
        inner = self.members[community]
        if node in inner:
            return inner[node]
        return self._count_inside(node, inner)

    def density(self, community: int) -> float:
        s = len(self.members[community])
        if s < 2:
            return 0.0
        return 2.0 * self.internal_edges[community] / (s * (s - 1))

    def as_sets(self) -> dict[int, frozenset[int]]:
        return {c: frozenset(m) for c, m in self.members.items()}

    def _count_inside(self, node: int, inner: dict[int, int]) -> int:
        nbrs = self.graph.neighbor_sets[node]
        if len(inner) < len(nbrs):
            return sum(1 for y in inner if y in nbrs)
        return sum(1 for y in nbrs if y in inner)

    # -- mutation ----------------------------------------------------------

    def add_community(self, nodes: Iterable[int]) -> int:
        cid = self.next_community_id
        self.next_community_id += 1
        self.members[cid] = {}
        self.internal_edges[cid] = 0
        for node in nodes:
            if node not in self.members[cid]:
                self._join(node, cid)
        if self.oplog is not None:
            self.oplog.append(("new", cid, tuple(self.members[cid])))
        return cid

    def join(self, node: int, community: int) -> None:
        self._join(node, community)
        if self.oplog is not None:
            self.oplog.append(("join", node, community))

    def leave(self, node: int, community: int) -> None:
        self._leave(node, community)
        if self.oplog is not None:
            self.oplog.append(("leave", node, community))

    def remove_community(self, community: int) -> None:
        for node in self.members.pop(community):
            self.memberships[node].discard(community)
        del self.internal_edges[community]
        self.score_cache.pop(community, None)
        if self.oplog is not None:
            self.oplog.append(("drop", community))

    def _join(self, node: int, community: int) -> None:
        inner = self.members[community]
        nbrs = self.graph.neighbor_sets[node]
        if len(inner) < len(nbrs):
            inside = [y for y in inner if y in nbrs]
        else:
            inside = [y for y in nbrs if y in inner]
        for y in inside:
            inner[y] += 1
        inner[node] = len(inside)
        self.internal_edges[community] += len(inside)
        self.memberships[node].add(community)
        self.score_cache.pop(community, None)

    def _leave(self, node: int, community: int) -> None:
        inner = self.members[community]
        k = inner.pop(node)
        if k:
            nbrs = self.graph.neighbor_sets[node]
            if len(inner) < len(nbrs):
                inside = [y for y in inner if y in nbrs]
            else:
                inside = [y for y in nbrs if y in inner]
            for y in inside:
                inner[y] -= 1
        self.internal_edges[community] -= k
        self.memberships[node].discard(community)
        self.score_cache.pop(community, None)

    def replay(self, ops: Iterable[tuple]) -> None:
        """Apply an operation log recorded on another cover with the same history."""
        for op in ops:
            kind = op[0]
            if kind == "join":
                self._join(op[1], op[2])
            elif kind == "leave":
                self._leave(op[1], op[2])
            elif kind == "drop":
                self.remove_community(op[1])
            elif kind == "new":
                cid = self.add_community(op[2])
                if cid != op[1]:
                    raise RuntimeError(f"replica diverged: community {cid} != {op[1]}")
            else:
                raise ValueError(f"unknown op {kind!r}")

    def copy(self) -> "Cover":
        other = Cover.__new__(Cover)
        other.graph = self.graph
        other.members = {c: dict(m) for c, m in self.members.items()}
        other.internal_edges = dict(self.internal_edges)
        other.memberships = [set(s) for s in self.memberships]
        other.next_community_id = self.next_community_id
        other.score_cache = dict(self.score_cache)
        other.oplog = None
        return other

    def __getstate__(self):
        state = self.__dict__.copy()
        state["oplog"] = None
        return state

    # -- verification ------------------------------------------------------

    def check_consistency(self) -> None:
        """Rebuild all bookkeeping from scratch and compare; raises AssertionError."""
        for c, inner in self.members.items():
            edges2 = 0
            for x, k in inner.items():
                real = len(self.graph.neighbor_sets[x].intersection(inner))
                assert k == real, f"deg({x},{c}) cached {k} != {real}"
                assert c in self.memberships[x], f"{x} missing membership {c}"
                edges2 += real
            assert edges2 == 2 * self.internal_edges[c], f"m_{c} mismatch"
        for x, comms in enumerate(self.memberships):
            for c in comms:
                assert x in self.members[c], f"membership {x}->{c} dangling"


def initial_clustering(graph: Graph, node_order: Iterable[int]) -> Cover:
    """Greedy disjoint seeding: an unassigned node founds a community that its
    unassigned neighbors join."""
    cover = Cover(graph)
    assigned = [False] * graph.node_count
    for x in node_order:
        if assigned[x]:
            continue
        group = [x]
        assigned[x] = True
        for y in graph.adjacency[x]:
            if not assigned[y]:
                assigned[y] = True
                group.append(y)
        cover.add_community(group)
    return cover


def cover_from_sets(graph: Graph, communities: Iterable[Iterable[int]]) -> Cover:
    """Build a cover from dense-ID node groups, in the given order."""
    cover = Cover(graph)
    for group in communities:
        cover.add_community(sorted(set(group)))
    return cover


def read_communities(stream: IO[str] | Iterable[str]) -> list[list[int]]:
    """Parse the cover file format into lists of original node IDs."""
    groups = []
    for lineno, line in enumerate(stream, start=1):
        parts = line.split()
        if not parts:
            continue
        try:
            groups.append([int(p) for p in parts])
        except ValueError:
            raise CoverLoadError(f"line {lineno}: non-integer node id in {line.strip()!r}") from None
    return groups


def load_cover(source: str | os.PathLike | IO[str], graph: Graph) -> Cover:
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8") as fh:
            groups = read_communities(fh)
    else:
        groups = read_communities(source)
    dense_groups = []
    for group in groups:
        dense = []
        for orig in group:
            try:
                dense.append(graph.dense_id(orig))
            except KeyError:
                raise CoverLoadError(f"node id {orig} is not in the graph") from None
        dense_groups.append(dense)
    return cover_from_sets(graph, dense_groups)


def format_cover(cover: Cover) -> str:
    """Serialize as one line per community (ascending community ID), original
    node IDs ascending, LF line endings."""
    id_map = cover.graph.id_map
    lines = []
    for c in sorted(cover.members):
        lines.append(" ".join(str(v) for v in sorted(id_map[x] for x in cover.members[c])) + "\n")
    return "".join(lines)


def write_cover(cover: Cover, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_cover(cover))


def apply_change(cover: Cover, change: NodeChange) -> float:
    """Apply a node's leave, then its join; return the actual score delta.

    Actions that went stale (already applied, community removed) are skipped.
    """
    return apply_change_counted(cover, change)[0]


def apply_change_counted(cover: Cover, change: NodeChange) -> tuple[float, bool, bool]:
    """Like :func:`apply_change`, also reporting whether the leave and the join
    actually happened."""
    from .metric import community_score

    x = change.node
    delta = 0.0
    left = joined = False
    if change.leave is not None:
        c = change.leave[0]
        if c in cover.members and x in cover.members[c]:
            before = community_score(cover, c)
            cover.leave(x, c)
            delta += community_score(cover, c) - before
            left = True
    if change.join is not None:
        c = change.join[0]
        if c in cover.members and x not in cover.members[c]:
            before = community_score(cover, c)
            cover.join(x, c)
            delta += community_score(cover, c) - before
            joined = True
    return delta, left, joined


def remove_degenerate(cover: Cover) -> int:
    doomed = [c for c, inner in cover.members.items() if len(inner) < 2]
    for c in doomed:
        cover.remove_community(c)
    return len(doomed)


POST_PROCESS_MODES = ("none", "dedupe", "nested")


def post_process(cover: Cover, mode: str = "none") -> Cover:
    """Drop duplicate communities (``dedupe``) and also strict subsets (``nested``).

    Survivors keep their IDs; the lowest ID wins among duplicates.
    """
    if mode not in POST_PROCESS_MODES:
        raise ValueError(f"unknown post-process mode {mode!r}")
    if mode == "none":
        return cover
    seen: set[frozenset[int]] = set()
    doomed = []
    for c in sorted(cover.members):
        key = frozenset(cover.members[c])
        if key in seen:
            doomed.append(c)
        else:
            seen.add(key)
    for c in doomed:
        cover.remove_community(c)
    if mode == "nested":
        doomed = []
        for c, inner in cover.members.items():
            # a strict superset must share every member, so candidates come
            # from one member's memberships
            probe = next(iter(inner), None)
            if probe is None:
                if len(cover.members) > 1:
                    doomed.append(c)
                continue
            for other in cover.memberships[probe]:
                if other != c and len(cover.members[other]) > len(inner) and inner.keys() <= cover.members[other].keys():
                    doomed.append(c)
                    break
        for c in doomed:
            cover.remove_community(c)
    return cover
