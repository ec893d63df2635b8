"""Command-line front end: ``detect``, ``evaluate``, ``stats``, ``benchmark``.

Exit codes: 0 ok, 2 missing input, 64 usage, 65 data mismatch, 74 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from .cover import CoverLoadError, POST_PROCESS_MODES, format_cover, load_cover, read_communities
from .engine import ConfigError, RunConfig, run
from .evaluate import UndefinedScoreError, cover_stats, f1_overlapping, onmi_distance
from .graph import GraphError, read_graph

EXIT_OK = 0
EXIT_NO_INPUT = 2
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_IO = 74


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _worker_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}")
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("worker counts must be positive")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wccover", description="Overlapping community detection by WCC-estimate optimization.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def run_flags(p):
        p.add_argument("--input", required=True, help="edge list file")
        p.add_argument("--queue-size", type=int, help="nodes evaluated per batch (default: worker count)")
        p.add_argument("--workers", type=int, help="worker processes (default: $WCCOVER_WORKERS or CPU count)")
        p.add_argument("--wcc-threshold", type=float, default=0.01)
        p.add_argument("--max-iterations", type=int, default=100)
        p.add_argument("--initial-cover", help="cover file replacing the greedy initial clustering")

    p = sub.add_parser("detect", help="detect communities and write them out")
    run_flags(p)
    p.add_argument("--output-dir", required=True)
    p.add_argument("--dump-iterations", action="store_true", help="write iter_<k>.txt after every iteration")
    p.add_argument("--post-process", choices=POST_PROCESS_MODES, default="none")
    p.add_argument("--record-time", action="store_true", help="append a wall-clock seconds column to trace.tsv")

    p = sub.add_parser("evaluate", help="compare a detected cover to a reference cover")
    p.add_argument("detected")
    p.add_argument("--truth", required=True)
    p.add_argument("--nodes", type=int, help="size of the node universe")
    p.add_argument("--graph", help="edge list defining the node universe")

    p = sub.add_parser("stats", help="descriptive statistics of a cover file")
    p.add_argument("cover")

    p = sub.add_parser("benchmark", help="time detection for several worker counts")
    run_flags(p)
    p.add_argument("--worker-counts", type=_worker_list, default=[1, 2], help="comma-separated, e.g. 1,2,4")
    return parser


def _config(args, workers: Optional[int] = None, queue: Optional[int] = None) -> RunConfig:
    try:
        return RunConfig(
            queue_size=queue if queue is not None else args.queue_size,
            worker_count=workers if workers is not None else args.workers,
            wcc_threshold=args.wcc_threshold,
            max_iterations=args.max_iterations,
            dump_each_iteration=getattr(args, "dump_iterations", False),
            post_process_mode=getattr(args, "post_process", "none"),
        )
    except ConfigError as exc:
        raise UsageError(str(exc)) from None


def _load_graph(path: str):
    if not os.path.isfile(path):
        raise FileNotFoundError(path)
    return read_graph(path)


def _write(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _fmt(x: float) -> str:
    return repr(float(x))


def cmd_detect(args) -> int:
    config = _config(args)
    try:
        graph = _load_graph(args.input)
    except FileNotFoundError:
        print(f"error: cannot read input {args.input}", file=sys.stderr)
        return EXIT_NO_INPUT
    initial = load_cover(args.initial_cover, graph) if args.initial_cover else None

    out = Path(args.output_dir)
    written: list[Path] = []
    try:
        out.mkdir(parents=True, exist_ok=True)

        def dump(it, cover, _stats):
            if config.dump_each_iteration:
                path = out / f"iter_{it}.txt"
                _write(path, format_cover(cover))
                written.append(path)

        cover, trace = run(graph, config, initial, on_iteration=dump)
        rows = []
        for s in trace.per_iteration:
            cols = [str(s.iteration), _fmt(s.wcc), _fmt(s.rel_change), str(s.joins), str(s.leaves), str(s.communities)]
            if args.record_time:
                cols.append(f"{s.seconds:.6f}")
            rows.append("\t".join(cols) + "\n")
        _write(out / "trace.tsv", "".join(rows))
        written.append(out / "trace.tsv")
        _write(out / "communities.txt", format_cover(cover))
    except OSError as exc:
        partial = ", ".join(str(p) for p in written) or "none"
        print(f"error: I/O failure: {exc}; files written before the failure (possibly stale): {partial}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _read_groups(path: str) -> list[list[int]]:
    with open(path, "r", encoding="utf-8") as fh:
        return read_communities(fh)


def cmd_evaluate(args) -> int:
    if args.nodes is None and args.graph is None:
        raise UsageError("evaluate needs --nodes or --graph for the node universe")
    try:
        detected = _read_groups(args.detected)
        truth = _read_groups(args.truth)
    except FileNotFoundError as exc:
        print(f"error: cannot read {exc.filename}", file=sys.stderr)
        return EXIT_NO_INPUT
    if args.graph is not None:
        try:
            graph = _load_graph(args.graph)
        except FileNotFoundError:
            print(f"error: cannot read graph {args.graph}", file=sys.stderr)
            return EXIT_NO_INPUT
        universe = set(graph.id_map)
        stray = {v for g in (*detected, *truth) for v in g} - universe
        if stray:
            print(f"error: node ids not in graph: {sorted(stray)[:10]}", file=sys.stderr)
            return EXIT_DATA
        n = graph.node_count
    else:
        n = args.nodes
        seen = {v for g in (*detected, *truth) for v in g}
        if len(seen) > n:
            print(f"error: covers mention {len(seen)} distinct nodes, more than --nodes {n}", file=sys.stderr)
            return EXIT_DATA
    try:
        f1 = f1_overlapping(detected, truth)
        dist = onmi_distance(detected, truth, n)
    except UndefinedScoreError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    print(f"f1\t{f1:.5f}")
    print(f"onmi_distance\t{dist:.5f}")
    return EXIT_OK


def cmd_stats(args) -> int:
    try:
        groups = _read_groups(args.cover)
    except FileNotFoundError:
        print(f"error: cannot read {args.cover}", file=sys.stderr)
        return EXIT_NO_INPUT
    try:
        st = cover_stats(groups)
    except UndefinedScoreError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    print(f"communities\t{st.community_count}")
    print(f"size_min\t{st.size_min}")
    print(f"size_max\t{st.size_max}")
    print(f"size_mean\t{st.size_mean:.5f}")
    print(f"overlap_mean\t{st.overlap_mean:.5f}")
    print(f"covered_nodes\t{st.covered_nodes}")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    counts = list(args.worker_counts)
    if counts[0] != 1:
        counts = [1] + [c for c in counts if c != 1]
    configs = [_config(args, workers=w, queue=args.queue_size if args.queue_size else w) for w in counts]
    if not os.path.isfile(args.input):
        print(f"error: cannot read input {args.input}", file=sys.stderr)
        return EXIT_NO_INPUT
    rows = []
    for config in configs:
        # graph preprocessing is part of the measured time
        t0 = time.perf_counter()
        graph = read_graph(args.input)
        initial = load_cover(args.initial_cover, graph) if args.initial_cover else None
        _, trace = run(graph, config, initial)
        rows.append((config.worker_count, time.perf_counter() - t0, trace))
    baseline = rows[0][1]
    print("workers\tseconds\tratio_to_1\titerations\tfinal_wcc")
    for workers, seconds, trace in rows:
        ratio = seconds / baseline
        print(f"{workers}\t{seconds:.4f}\t{ratio:.4f}\t{trace.iterations}\t{trace.final_wcc!r}")
    return EXIT_OK


COMMANDS = {"detect": cmd_detect, "evaluate": cmd_evaluate, "stats": cmd_stats, "benchmark": cmd_benchmark}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GraphError, CoverLoadError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
