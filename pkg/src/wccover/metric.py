"""Exact WCC (slow, triangle enumeration) and its mean-field estimator.

The estimator replaces triangle counts by ``binom(deg, 2) * density`` and the
triangle-partner counts by degree upper bounds. Per member ``y`` of a
community of size ``s`` with internal degree ``a`` and degree ``d`` this
reduces to::

    p / cc * a (a - 1) / ((d - 1) (s - 1 + d - a))

which is what the inner loops below evaluate.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

from .graph import Graph, triangle_partners, triangles_with_set

if TYPE_CHECKING:
    from .cover import Cover


@dataclass(frozen=True)
class WccContext:
    graph: Graph
    cover: "Cover"


# -- exact WCC ---------------------------------------------------------------


def wcc_exact_node(graph: Graph, cover: "Cover", x: int, community: int) -> float:
    members = cover.members[community]
    t_total = graph.triangle_count[x]
    if t_total == 0:
        return 0.0
    t_inside = triangles_with_set(graph, x, members)
    partners = triangle_partners(graph, x)
    outside = sum(1 for y in partners if y not in members)
    others = len(members) - (1 if x in members else 0)
    denom = others + outside
    if denom == 0:
        return 0.0
    return t_inside / t_total * len(partners) / denom


def wcc_exact_total(graph: Graph, cover: "Cover") -> float:
    return sum(
        wcc_exact_node(graph, cover, x, c) for c, members in cover.members.items() for x in members
    )


# -- estimator ---------------------------------------------------------------


def _binom2(d: int) -> float:
    return d * (d - 1) / 2.0


def wcc_hat_node(ctx: WccContext, x: int, community: int) -> float:
    graph, cover = ctx.graph, ctx.cover
    members = cover.members[community]
    d = graph.degree[x]
    expected_total = _binom2(d) * graph.global_cc
    if expected_total <= 0:
        return 0.0
    a = cover.internal_degree(x, community)
    expected_inside = _binom2(a) * cover.density(community)
    others = len(members) - (1 if x in members else 0)
    denom = others + d - a
    if denom == 0:
        return 0.0
    return expected_inside / expected_total * d / denom


def wcc_hat_community(ctx: WccContext, community: int) -> float:
    return sum(wcc_hat_node(ctx, x, community) for x in ctx.cover.members[community])


def wcc_hat_total(ctx: WccContext) -> float:
    return sum(wcc_hat_community(ctx, c) for c in ctx.cover.members)


# -- fast paths used by the optimizer ------------------------------------------
#
# These evaluate the same quantity as wcc_hat_community, folded into one pass
# over the members. Tests pin them against the slow definitions above.


def _score(inner: dict[int, int], m: int, degree: tuple[int, ...], cc: float) -> float:
    s = len(inner)
    if s < 2 or m == 0 or cc <= 0:
        return 0.0
    s1 = s - 1
    total = 0.0
    for y, a in inner.items():
        if a > 1:
            d = degree[y]
            total += a * (a - 1) / ((d - 1) * (s1 + d - a))
    return total * (2.0 * m / (s * s1)) / cc


def community_score(cover: "Cover", community: int) -> float:
    """Estimated score of one community, cached on the cover until it changes."""
    cached = cover.score_cache.get(community)
    if cached is None:
        graph = cover.graph
        cached = _score(cover.members[community], cover.internal_edges[community], graph.degree, graph.global_cc)
        cover.score_cache[community] = cached
    return cached


def score_if_joined(cover: "Cover", x: int, community: int, k: int) -> float:
    """Community score after ``x`` joins, given ``k`` = neighbors of ``x`` inside."""
    graph = cover.graph
    cc = graph.global_cc
    inner = cover.members[community]
    s1 = len(inner)
    s = s1 + 1
    m = cover.internal_edges[community] + k
    if m == 0 or cc <= 0:
        return 0.0
    degree = graph.degree
    nbrs = graph.neighbor_sets[x]
    total = 0.0
    for y, a in inner.items():
        if y in nbrs:
            a += 1
        if a > 1:
            d = degree[y]
            total += a * (a - 1) / ((d - 1) * (s1 + d - a))
    if k > 1:
        d = degree[x]
        total += k * (k - 1) / ((d - 1) * (s1 + d - k))
    return total * (2.0 * m / (s * s1)) / cc


def score_if_left(cover: "Cover", x: int, community: int) -> float:
    """Community score after member ``x`` leaves."""
    graph = cover.graph
    cc = graph.global_cc
    inner = cover.members[community]
    s = len(inner) - 1
    if s < 2 or cc <= 0:
        return 0.0
    m = cover.internal_edges[community] - inner[x]
    if m == 0:
        return 0.0
    s1 = s - 1
    degree = graph.degree
    nbrs = graph.neighbor_sets[x]
    total = 0.0
    for y, a in inner.items():
        if y == x:
            continue
        if y in nbrs:
            a -= 1
        if a > 1:
            d = degree[y]
            total += a * (a - 1) / ((d - 1) * (s1 + d - a))
    return total * (2.0 * m / (s * s1)) / cc


def gain_join(ctx: WccContext, x: int, community: int) -> float:
    cover = ctx.cover
    if x in cover.members[community]:
        raise ValueError(f"node {x} already belongs to community {community}")
    k = cover.internal_degree(x, community)
    return score_if_joined(cover, x, community, k) - community_score(cover, community)


def gain_leave(ctx: WccContext, x: int, community: int) -> float:
    cover = ctx.cover
    if x not in cover.members[community]:
        raise ValueError(f"node {x} is not a member of community {community}")
    return score_if_left(cover, x, community) - community_score(cover, community)


def total_score(cover: "Cover", communities: Iterable[int] | None = None) -> float:
    """Sum of cached community scores (fast counterpart of :func:`wcc_hat_total`)."""
    ids = cover.members if communities is None else communities
    return sum(community_score(cover, c) for c in ids)
