"""``cyclex`` command-line entry point."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import pipeline
from .config import ConfigError, RunConfig, read_config
from .kgraph import GraphError, read_graph
from .linker import Linker
from .retrieval import PhraseIndex, RetrievalError, search
from .text import normalize

log = logging.getLogger("cyclex")

CLI_MAX_LEN = 5

# flag -> config key; the value is parsed by RunConfig.set
CONFIG_FLAGS = {
    "--nodes": "nodes",
    "--edges": "edges",
    "--corpus": "corpus",
    "--queries": "queries",
    "--output": "output",
    "--xml-name": "xml_name",
    "--xml-english": "xml_english",
    "--xml-comment": "xml_comment",
    "--r-values": "r_values",
    "--rng-seed": "rng_seed",
    "--restarts": "restarts",
    "--max-len": "max_len",
    "--min-category-ratio": "min_category_ratio",
    "--min-density": "min_density",
    "--threads": "threads",
}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="key = value run configuration file")
    for flag, key in CONFIG_FLAGS.items():
        p.add_argument(flag, dest=key, metavar=key.upper())
    p.add_argument("--lengths", action="append", metavar="L", help="cycle-length group such as 2,3 (repeatable, or ';'-separated)")
    p.add_argument("--force", action="store_true", help="rerun stages even when cached artifacts match")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cyclex", description="Cycle analysis of knowledge-graph query expansions.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in pipeline.STAGES + ("run",):
        p = sub.add_parser(name, help="run all stages" if name == "run" else f"run the {name} stage")
        _add_config_flags(p)
        if name == "analyze":
            p.add_argument("--graph", type=Path, help="directory with the full graph's nodes.tsv and edges.tsv")
            p.add_argument("--query-graphs", type=Path, help="directory of query graphs")

    p = sub.add_parser("link", help="link text to article titles")
    _add_config_flags(p)
    p.add_argument("--graph", type=Path, help="directory with nodes.tsv and edges.tsv")
    p.add_argument("--text", required=True)

    p = sub.add_parser("search", help="exact-phrase search over a saved index")
    p.add_argument("--index", type=Path, required=True)
    p.add_argument("--phrases", action="append", required=True, help="';'-separated phrases (repeatable)")
    p.add_argument("-r", type=int, default=10)
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def make_config(args: argparse.Namespace) -> RunConfig:
    cfg = read_config(args.config) if args.config else RunConfig()
    for key in CONFIG_FLAGS.values():
        value = getattr(args, key, None)
        if value is not None:
            cfg.set(key, value)
    if args.lengths:
        cfg.set("lengths", ";".join(args.lengths))
    if cfg.max_len > CLI_MAX_LEN:
        raise ConfigError(f"--max-len is capped at {CLI_MAX_LEN}")
    cfg.validate()
    return cfg


def _graph_from(args, cfg: RunConfig):
    if args.graph is not None:
        return read_graph(args.graph / "nodes.tsv", args.graph / "edges.tsv")
    if cfg.nodes is None or cfg.edges is None:
        raise ConfigError("no graph given: use --graph or --nodes/--edges")
    return read_graph(cfg.nodes, cfg.edges)


def cmd_link(args, cfg: RunConfig) -> int:
    graph = _graph_from(args, cfg)
    result = Linker(graph).link(args.text)
    for title in sorted(graph.title(a) for a in result.articles):
        print(title)
    return 0


def cmd_search(args) -> int:
    index = PhraseIndex.load(args.index)
    phrases = [normalize(p) for arg in args.phrases for p in arg.split(";")]
    for rank, (doc_id, score) in enumerate(search(index, phrases, args.r), 1):
        print(f"{rank}\t{doc_id}\t{score}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "search":
            return cmd_search(args)
        cfg = make_config(args)
        if args.command == "link":
            return cmd_link(args, cfg)
        if args.command == "run":
            ran = pipeline.run_pipeline(cfg, force=args.force)
            log.info("stages run: %s", ", ".join(ran) or "none")
            return 0
        if args.command == "analyze" and (args.graph or args.query_graphs):
            try:
                pipeline.stage_analyze(cfg, args.query_graphs, args.graph)
            except (OSError, ValueError) as exc:
                raise pipeline.StageError("analyze", exc) from exc
            return 0
        pipeline.run_stage(args.command, cfg)
        return 0
    except pipeline.StageError as exc:
        print(f"cyclex: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, GraphError, RetrievalError, OSError) as exc:
        print(f"cyclex: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
