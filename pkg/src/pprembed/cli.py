"""Command-line entry point: convert, ppr, embed, linkpred, classify, bench.

Exit codes: 0 success, 2 usage or domain error, 3 I/O or file-format error,
4 internal failure. All randomness flows from the explicit --seed flags, so
data-producing invocations are byte-reproducible; bench reports contain
measured wall times, which naturally differ between runs.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import plotting, reporting
from .embedder import (
    DEFAULT_DIM,
    EmbedConfig,
    embed_graph,
    embed_node,
    embed_node_with_stats,
    embedding_header,
    write_embeddings_binary,
    write_embeddings_text,
)
from .evaluation import (
    DEFAULT_L2,
    STRATEGIES,
    load_labels,
    run_classification,
    run_link_prediction,
)
from .graphio import (
    BinaryFormatError,
    EdgeListError,
    load_edge_list,
    open_binary,
    write_binary,
)
from .hashing import DEFAULT_SEED
from .ppr import DEFAULT_ALPHA, DEFAULT_EPSILON, approximate_ppr

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_INTERNAL = 4


def _alpha_arg(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"alpha must be in (0, 1), got {text}")
    return value


def _epsilon_arg(text: str) -> float:
    value = float(text)
    if not 0.0 < value <= 1.0:
        raise argparse.ArgumentTypeError(f"epsilon must be in (0, 1], got {text}")
    return value


def _dim_arg(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"dim must be >= 1, got {text}")
    return value


def _seed_arg(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive count, got {text}")
    return value


def _add_embedding_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=_alpha_arg, default=DEFAULT_ALPHA,
                        help="restart probability (default 0.15)")
    parser.add_argument("--epsilon", type=_epsilon_arg, default=DEFAULT_EPSILON,
                        help="push precision (default 1e-5)")
    parser.add_argument("--dim", type=_dim_arg, default=DEFAULT_DIM,
                        help="embedding dimension (default 512)")
    parser.add_argument("--seed", type=_seed_arg, default=DEFAULT_SEED,
                        help="master hash seed (default 42)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pprembed",
        description="Local node embeddings from pushed personalized PageRank.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="edge-list text to binary CSR")
    p.add_argument("--input", required=True, help="whitespace edge list")
    p.add_argument("--output", required=True, help="binary CSR path")

    p = sub.add_parser("ppr", help="print one node's sparse PPR vector")
    p.add_argument("--graph", required=True)
    p.add_argument("--node", type=int, required=True)
    p.add_argument("--alpha", type=_alpha_arg, default=DEFAULT_ALPHA)
    p.add_argument("--epsilon", type=_epsilon_arg, default=DEFAULT_EPSILON)

    p = sub.add_parser("embed", help="embed one node, listed nodes, or all")
    p.add_argument("--graph", required=True)
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--node", type=int, help="single node id")
    which.add_argument("--nodes", help="file with one node id per line")
    which.add_argument("--all", action="store_true", help="every node")
    _add_embedding_args(p)
    p.add_argument("--output", help="output path (default: stdout)")
    p.add_argument("--format", choices=("text", "binary"), default="text")
    p.add_argument("--workers", type=_positive_int, default=1,
                   help="worker processes for --all")

    p = sub.add_parser("linkpred", help="link-prediction ROC-AUC report")
    p.add_argument("--graph", required=True)
    _add_embedding_args(p)
    p.add_argument("--strategy", default="all",
                   choices=("all",) + STRATEGIES)
    p.add_argument("--repeats", type=_positive_int, default=3)
    p.add_argument("--l2", type=float, default=DEFAULT_L2)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--output", help="report JSON path (default: stdout)")
    p.add_argument("--no-figure", action="store_true",
                   help="skip the PNG next to the report")

    p = sub.add_parser("classify", help="node-classification F1 report")
    p.add_argument("--graph", required=True)
    p.add_argument("--labels", required=True,
                   help='lines "<node_id> <label_id>", repeats for multilabel')
    p.add_argument("--train-frac", type=float, default=0.1)
    _add_embedding_args(p)
    p.add_argument("--repeats", type=_positive_int, default=3)
    p.add_argument("--l2", type=float, default=DEFAULT_L2)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--output", help="report JSON path (default: stdout)")
    p.add_argument("--no-figure", action="store_true")

    p = sub.add_parser("bench", help="per-node embedding cost measurements")
    p.add_argument("--graph", required=True)
    p.add_argument("--samples", type=_positive_int, default=100)
    _add_embedding_args(p)
    p.add_argument("--output", help="report JSON path (default: stdout)")
    p.add_argument("--no-figure", action="store_true")
    return parser


def _warn_epsilon(epsilon: float, node_count: int) -> None:
    if node_count > 0 and epsilon <= 1.0 / node_count:
        print(
            f"warning: epsilon={epsilon!r} is at or below 1/n={1.0 / node_count!r}; "
            "useful settings keep epsilon > 1/n",
            file=sys.stderr,
        )


def _cmd_convert(args) -> int:
    graph = load_edge_list(args.input)
    write_binary(graph, args.output)
    return EXIT_OK


def _cmd_ppr(args) -> int:
    with open_binary(args.graph) as handle:
        _warn_epsilon(args.epsilon, handle.node_count)
        vector, _ = approximate_ppr(handle, args.node, args.alpha, args.epsilon)
    for node, mass in vector.entries.items():
        print(f"{node} {mass!r}")
    return EXIT_OK


def _parse_node_file(path: str) -> list[int]:
    nodes = []
    with open(path, "rt", encoding="utf-8") as fh:
        for line in fh:
            text = line.strip()
            if not text or text[0] in "#%":
                continue
            nodes.append(int(text.split()[0]))
    if not nodes:
        raise ValueError(f"{path}: no node ids found")
    return nodes


def _cmd_embed(args) -> int:
    config = EmbedConfig.create(args.alpha, args.epsilon, args.dim, args.seed)
    with open_binary(args.graph) as handle:
        n = handle.node_count
        _warn_epsilon(args.epsilon, n)
        if args.all:
            matrix = embed_graph(handle, config, workers=args.workers)
            if args.format == "binary":
                if args.output is None:
                    raise ValueError("binary output requires --output")
                write_embeddings_binary(args.output, matrix)
                return EXIT_OK
            ids = np.arange(n, dtype=np.int64)
            rows = matrix.values
        else:
            if args.format == "binary":
                raise ValueError("binary output stores full matrices; use --all")
            nodes = [args.node] if args.node is not None else _parse_node_file(
                args.nodes
            )
            ids = np.array(nodes, dtype=np.int64)
            rows = np.vstack(
                [embed_node(handle, v, config).values for v in nodes]
            )
    if args.output is None:
        print(embedding_header(n, config))
        for node, row in zip(ids, rows):
            print(f"{int(node)} " + " ".join(repr(float(x)) for x in row))
    else:
        write_embeddings_text(args.output, ids, rows, n, config)
    return EXIT_OK


def _finish_report(report: dict, args, figure_writer) -> None:
    output = getattr(args, "output", None)
    figure = None
    if output is not None and not args.no_figure:
        figure = plotting.figure_path(output)
    report["outputs"] = {"report": output, "figure": figure}
    reporting.write_report(report, output)
    if figure is not None:
        figure_writer(report, figure)


def _cmd_linkpred(args) -> int:
    with open_binary(args.graph) as handle:
        _warn_epsilon(args.epsilon, handle.node_count)
        graph = handle.load_graph()
    config = EmbedConfig.create(args.alpha, args.epsilon, args.dim, args.seed)
    strategies = STRATEGIES if args.strategy == "all" else (args.strategy,)
    report = run_link_prediction(
        graph,
        config,
        strategies=strategies,
        repeats=args.repeats,
        seed=args.seed,
        l2=args.l2,
        workers=args.workers,
    )
    _finish_report(report, args, plotting.save_link_prediction_figure)
    return EXIT_OK


def _cmd_classify(args) -> int:
    if not 0.0 < args.train_frac < 1.0:
        raise ValueError(f"train-frac must be in (0, 1), got {args.train_frac}")
    with open_binary(args.graph) as handle:
        _warn_epsilon(args.epsilon, handle.node_count)
        graph = handle.load_graph()
    labels = load_labels(args.labels, node_count=graph.node_count)
    config = EmbedConfig.create(args.alpha, args.epsilon, args.dim, args.seed)
    report = run_classification(
        graph,
        labels,
        config,
        train_frac=args.train_frac,
        repeats=args.repeats,
        seed=args.seed,
        l2=args.l2,
        workers=args.workers,
    )
    _finish_report(report, args, plotting.save_classification_figure)
    return EXIT_OK


def _cmd_bench(args) -> int:
    config = EmbedConfig.create(args.alpha, args.epsilon, args.dim, args.seed)
    with open_binary(args.graph) as handle:
        n = handle.node_count
        if n == 0:
            raise ValueError("cannot bench an empty graph")
        _warn_epsilon(args.epsilon, n)
        rng = np.random.default_rng(args.seed)
        nodes = rng.integers(0, n, size=args.samples)
        samples = []
        for node in nodes.tolist():
            start = time.perf_counter_ns()
            _, stats = embed_node_with_stats(handle, node, config)
            wall = time.perf_counter_ns() - start
            samples.append(
                {
                    "node": node,
                    "wall_ns": wall,
                    "push_count": stats.push_count,
                    "nodes_touched": stats.nodes_touched,
                    "support_volume": stats.support_volume,
                    "state_bytes": stats.peak_state_bytes,
                }
            )
    summary = reporting.timing_summary([s["wall_ns"] for s in samples])
    summary.update(
        {
            "push_count_mean": float(np.mean([s["push_count"] for s in samples])),
            "nodes_touched_mean": float(
                np.mean([s["nodes_touched"] for s in samples])
            ),
            "state_bytes_mean": float(np.mean([s["state_bytes"] for s in samples])),
            "locality_bound_nodes": 2.0 / ((1.0 - args.alpha) * args.epsilon),
            "push_count_bound": 4.0 / (args.alpha * args.epsilon),
        }
    )
    report = {
        "report_version": reporting.REPORT_VERSION,
        "task": "bench",
        "config": {
            "graph": args.graph,
            "samples": args.samples,
            "alpha": args.alpha,
            "epsilon": args.epsilon,
            "dim": args.dim,
            "seed": args.seed,
        },
        "samples": samples,
        "summary": summary,
    }
    _finish_report(report, args, plotting.save_bench_figure)
    return EXIT_OK


_COMMANDS = {
    "convert": _cmd_convert,
    "ppr": _cmd_ppr,
    "embed": _cmd_embed,
    "linkpred": _cmd_linkpred,
    "classify": _cmd_classify,
    "bench": _cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (EdgeListError, BinaryFormatError, OSError) as exc:
        print(f"pprembed: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, IndexError) as exc:
        print(f"pprembed: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # pragma: no cover - defensive
        print(f"pprembed: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
