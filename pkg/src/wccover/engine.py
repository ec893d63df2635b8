"""Join/leave optimization loop.

Nodes are visited in processing order in batches of ``queue_size``. Every
node of a batch computes its best join and best leave against the same
frozen cover; the batch's changes are then applied one by one in processing
order. ``queue_size == 1`` is the plain sequential algorithm.

``worker_count`` only decides how many processes share the computation of a
batch; results depend on ``queue_size`` alone.
"""
from __future__ import annotations

import logging
import multiprocessing as mp
import os
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .cover import (
    POST_PROCESS_MODES,
    Cover,
    NodeChange,
    apply_change_counted,
    initial_clustering,
    post_process,
    remove_degenerate,
)
from .graph import Graph, processing_order
from .metric import community_score, score_if_joined, score_if_left, total_score

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


def default_worker_count() -> int:
    env = os.environ.get("WCCOVER_WORKERS")
    if env:
        return int(env)
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover - non-Linux
        return os.cpu_count() or 1


@dataclass
class RunConfig:
    queue_size: Optional[int] = None
    worker_count: Optional[int] = None
    wcc_threshold: float = 0.01
    max_iterations: int = 100
    dump_each_iteration: bool = False
    post_process_mode: str = "none"

    def __post_init__(self):
        if self.worker_count is None:
            self.worker_count = default_worker_count()
        if self.queue_size is None:
            self.queue_size = self.worker_count
        self.validate()

    def validate(self) -> None:
        if not isinstance(self.queue_size, int) or self.queue_size < 1:
            raise ConfigError(f"queue_size must be a positive integer, got {self.queue_size!r}")
        if not isinstance(self.worker_count, int) or self.worker_count < 1:
            raise ConfigError(f"worker_count must be a positive integer, got {self.worker_count!r}")
        if not 0.0 < self.wcc_threshold < 1.0:
            raise ConfigError(f"wcc_threshold must lie in (0, 1), got {self.wcc_threshold!r}")
        if not isinstance(self.max_iterations, int) or self.max_iterations < 1:
            raise ConfigError(f"max_iterations must be a positive integer, got {self.max_iterations!r}")
        if self.post_process_mode not in POST_PROCESS_MODES:
            raise ConfigError(f"post_process_mode must be one of {POST_PROCESS_MODES}")


@dataclass(frozen=True)
class IterationStats:
    iteration: int
    wcc: float
    rel_change: float
    joins: int
    leaves: int
    communities: int
    seconds: float


@dataclass
class RunTrace:
    initial_wcc: float = 0.0
    per_iteration: list[IterationStats] = field(default_factory=list)
    # running score after each applied change, when requested
    change_scores: Optional[list[list[float]]] = None

    @property
    def iterations(self) -> int:
        return len(self.per_iteration)

    @property
    def final_wcc(self) -> float:
        return self.per_iteration[-1].wcc if self.per_iteration else self.initial_wcc


def relative_change(current: float, previous: float) -> float:
    if previous == 0.0:
        return 0.0 if current == 0.0 else float("inf")
    return (current - previous) / previous


# -- per-node evaluation -------------------------------------------------------


def compute_node_change(cover: Cover, x: int) -> NodeChange:
    """Best positive-gain join and leave for ``x`` against the current cover.

    Ties go to the lowest community ID.
    """
    graph = cover.graph
    memberships = cover.memberships
    own = memberships[x]
    touching: dict[int, int] = {}
    for y in graph.adjacency[x]:
        for c in memberships[y]:
            touching[c] = touching.get(c, 0) + 1

    best_join = None
    best_gain = 0.0
    for c, k in touching.items():
        if c in own:
            continue
        gain = score_if_joined(cover, x, c, k) - community_score(cover, c)
        if gain > best_gain or (best_join is not None and gain == best_gain and c < best_join):
            best_gain, best_join = gain, c
    join = (best_join, best_gain) if best_join is not None else None

    best_leave = None
    best_gain = 0.0
    for c in own:
        gain = score_if_left(cover, x, c) - community_score(cover, c)
        if gain > best_gain or (best_leave is not None and gain == best_gain and c < best_leave):
            best_gain, best_leave = gain, c
    leave = (best_leave, best_gain) if best_leave is not None else None
    return NodeChange(x, join=join, leave=leave)


# -- worker processes ------------------------------------------------------------


def _worker_main(conn, cover: Cover) -> None:
    replica = cover
    try:
        while True:
            msg = conn.recv()
            if msg is None:
                break
            ops, nodes = msg
            replica.replay(ops)
            conn.send([compute_node_change(replica, x) for x in nodes])
    except (EOFError, KeyboardInterrupt):
        pass
    finally:
        conn.close()


class WorkerPool:
    """Processes holding replicas of the cover, kept in sync by replaying the
    coordinator's operation log before each batch."""

    def __init__(self, cover: Cover, workers: int):
        methods = mp.get_all_start_methods()
        ctx = mp.get_context("fork" if "fork" in methods else "spawn")
        self.cover = cover
        self.conns = []
        self.procs = []
        cover.oplog = []
        for _ in range(workers):
            parent, child = ctx.Pipe()
            proc = ctx.Process(target=_worker_main, args=(child, cover.copy()), daemon=True)
            proc.start()
            child.close()
            self.conns.append(parent)
            self.procs.append(proc)

    def compute(self, nodes: Sequence[int]) -> list[NodeChange]:
        ops = self.cover.oplog
        self.cover.oplog = []
        share = -(-len(nodes) // len(self.conns))
        used = []
        for i, conn in enumerate(self.conns):
            chunk = nodes[i * share:(i + 1) * share]
            # every replica must see every op, even when idle this batch
            conn.send((ops, chunk))
            used.append(conn)
        changes: list[NodeChange] = []
        for conn in used:
            changes.extend(conn.recv())
        return changes

    def close(self) -> None:
        for conn in self.conns:
            try:
                conn.send(None)
                conn.close()
            except OSError:
                pass
        for proc in self.procs:
            proc.join(timeout=5)
            if proc.is_alive():
                proc.terminate()
        self.cover.oplog = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


# -- iterations ----------------------------------------------------------------


@dataclass
class RunState:
    graph: Graph
    cover: Cover
    order: list[int]
    wcc: float
    pool: Optional[WorkerPool] = None


@dataclass(frozen=True)
class IterationSummary:
    wcc: float
    joins: int
    leaves: int
    removed: int
    communities: int
    change_scores: Optional[list[float]] = None


def run_iteration(state: RunState, queue_size: int, record_changes: bool = False) -> IterationSummary:
    """One pass over all nodes: compute a batch on a frozen cover, then apply it."""
    cover = state.cover
    order = state.order
    joins = leaves = 0
    running = state.wcc
    trail: Optional[list[float]] = [] if record_changes else None
    for start in range(0, len(order), queue_size):
        batch = order[start:start + queue_size]
        if state.pool is not None:
            changes = state.pool.compute(batch)
        else:
            changes = [compute_node_change(cover, x) for x in batch]
        for change in changes:
            if change.empty:
                continue
            delta, left, joined = apply_change_counted(cover, change)
            running += delta
            leaves += left
            joins += joined
            if trail is not None:
                trail.append(running)
    removed = remove_degenerate(cover)
    state.wcc = running
    return IterationSummary(running, joins, leaves, removed, len(cover), trail)


def run(
    graph: Graph,
    config: RunConfig,
    initial: Optional[Cover] = None,
    on_iteration: Optional[Callable[[int, Cover, IterationStats], None]] = None,
    record_changes: bool = False,
) -> tuple[Cover, RunTrace]:
    """Optimize until the relative improvement drops below the threshold.

    A negative relative change also stops the run. ``on_iteration`` is called
    after every iteration (used for dumping intermediate covers).
    """
    config.validate()
    order = processing_order(graph)
    cover = initial if initial is not None else initial_clustering(graph, order)
    cover.score_cache.clear()
    start_score = total_score(cover)
    trace = RunTrace(initial_wcc=start_score, change_scores=[] if record_changes else None)

    workers = min(config.worker_count, config.queue_size)
    if config.worker_count > config.queue_size:
        warnings.warn(
            f"worker_count {config.worker_count} exceeds queue_size {config.queue_size}; extra workers stay idle",
            RuntimeWarning,
            stacklevel=2,
        )
    pool = WorkerPool(cover, workers) if workers > 1 else None
    state = RunState(graph, cover, order, start_score, pool)
    try:
        previous = start_score
        for it in range(1, config.max_iterations + 1):
            t0 = time.perf_counter()
            summary = run_iteration(state, config.queue_size, record_changes)
            elapsed = time.perf_counter() - t0
            rel = relative_change(summary.wcc, previous)
            stats = IterationStats(it, summary.wcc, rel, summary.joins, summary.leaves, summary.communities, elapsed)
            trace.per_iteration.append(stats)
            if record_changes:
                trace.change_scores.append(summary.change_scores)
            log.info(
                "iteration %d: wcc=%.6f rel=%.6f joins=%d leaves=%d communities=%d (%.2fs)",
                it, summary.wcc, rel, summary.joins, summary.leaves, summary.communities, elapsed,
            )
            if on_iteration is not None:
                on_iteration(it, cover, stats)
            previous = summary.wcc
            if rel < config.wcc_threshold:
                break
    finally:
        if pool is not None:
            pool.close()
    post_process(cover, config.post_process_mode)
    return cover, trace


# -- benchmarking -----------------------------------------------------------------


@dataclass(frozen=True)
class BenchmarkRow:
    queue_size: int
    worker_count: int
    seconds: float
    ratio: float
    iterations: int
    final_wcc: float
    iteration_seconds: tuple[float, ...]


def benchmark(graph: Graph, configs: Sequence[RunConfig]) -> list[BenchmarkRow]:
    """Time ``run`` per config, without writing any output.

    Ratios are relative to the first config with queue size 1 and one worker,
    or to the first config when there is none.
    """
    timings = []
    for config in configs:
        t0 = time.perf_counter()
        _, trace = run(graph, config)
        seconds = time.perf_counter() - t0
        timings.append((config, seconds, trace))
    baseline = next(
        (s for c, s, _ in timings if c.queue_size == 1 and c.worker_count == 1),
        timings[0][1] if timings else 1.0,
    )
    return [
        BenchmarkRow(
            queue_size=c.queue_size,
            worker_count=c.worker_count,
            seconds=s,
            ratio=s / baseline if baseline > 0 else float("nan"),
            iterations=t.iterations,
            final_wcc=t.final_wcc,
            iteration_seconds=tuple(it.seconds for it in t.per_iteration),
        )
        for c, s, t in timings
    ]
