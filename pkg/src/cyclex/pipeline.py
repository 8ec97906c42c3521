"""Pipeline stages.  Each stage reads its inputs from the run configuration or
from earlier artifacts in the output directory and writes its own artifacts.

Layout of the output directory::

    graph/{nodes,edges}.tsv        validated copy of the knowledge graph
    corpus.jsonl                   extracted document text
    index.json                     positional index
    links.json                     L(q.k) per query, L(d) per document
    ground_truth/<qid>.json        best expansion set per query
    query_graphs/<qid>/            nodes.tsv, edges.tsv, roles.tsv
    analysis/                      cycles.tsv, aggregates.csv, query_stats.csv, graph_stats.json
    table4.csv, expand_details.csv per-configuration precision
    report/                        markdown tables and figure series
"""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Sequence

from . import report as report_mod
from .config import RunConfig
from .corpus import CorpusError, load_corpus, write_corpus_jsonl
from .cycles import (
    Cycle,
    aggregate,
    connected_components,
    cycle_contribution,
    enumerate_cycles,
    make_cycle,
    reciprocal_pair_ratio,
    tpr,
)
from .expander import baseline, evaluate_config
from .groundtruth import (
    COMPONENT_METRICS,
    QUERY_ARTICLE,
    GroundTruthEntry,
    QueryGraph,
    assemble_query_graph,
    best_of_restarts,
    largest_component_metrics,
    read_queries,
)
from .kgraph import GraphError, KnowledgeGraph, read_graph, write_graph
from .linker import Linker
from .retrieval import PhraseIndex, build_index
from .stats import fmt

log = logging.getLogger(__name__)

STAGES = ("ingest-graph", "ingest-corpus", "index", "link", "ground-truth", "assemble", "analyze", "expand", "report")


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: object):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")


def seed_header(cfg: RunConfig) -> str:
    return f"rng_seed: {cfg.rng_seed}"


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def _write_json(path: Path, data) -> None:
    _write_text(path, json.dumps(data, ensure_ascii=False, sort_keys=True, indent=2) + "\n")


def _read_json(path: Path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def _csv_text(rows: Iterable[Sequence], header: str, delimiter: str = ",") -> str:
    buf = io.StringIO()
    buf.write(f"# {header}\n")
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def read_table(path: Path, delimiter: str = ",") -> list[dict[str, str]]:
    with open(path, encoding="utf-8") as f:
        lines = [line for line in f if not line.startswith("#")]
    return list(csv.DictReader(lines, delimiter=delimiter))


# -- parallel helper ---------------------------------------------------------

_SHARED: dict = {}


def _init_shared(shared: dict) -> None:
    _SHARED.clear()
    _SHARED.update(shared)


def parallel_map(fn: Callable, items: list, workers: int, shared: dict) -> list:
    """Order-preserving map; uses worker processes when ``workers`` > 1."""
    if workers <= 1 or len(items) <= 1:
        _init_shared(shared)
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_shared, initargs=(shared,)) as pool:
        return list(pool.map(fn, items))


# -- artifact loaders -----------------------------------------------------------


def out(cfg: RunConfig, *parts: str) -> Path:
    return Path(cfg.output).joinpath(*parts)


def _need(path: Path, stage: str) -> Path:
    if not path.exists():
        raise StageError(stage, f"missing artifact {path}")
    return path


def load_graph_artifact(cfg: RunConfig, stage: str) -> KnowledgeGraph:
    nodes = _need(out(cfg, "graph", "nodes.tsv"), stage)
    return read_graph(nodes, out(cfg, "graph", "edges.tsv"))


def load_index_artifact(cfg: RunConfig, stage: str) -> PhraseIndex:
    return PhraseIndex.load(_need(out(cfg, "index.json"), stage))


def load_queries(cfg: RunConfig, stage: str):
    if cfg.queries is None or not Path(cfg.queries).exists():
        raise StageError(stage, f"queries file not found: {cfg.queries}")
    try:
        return read_queries(cfg.queries)
    except ValueError as exc:
        raise StageError(stage, exc) from None


def load_links(cfg: RunConfig, graph: KnowledgeGraph, stage: str) -> tuple[dict, dict]:
    data = _read_json(_need(out(cfg, "links.json"), stage))

    def ids(titles):
        return {graph.find_article(t) for t in titles}

    return ({q: ids(t) for q, t in data["queries"].items()}, {d: ids(t) for d, t in data["documents"].items()})


def load_query_graphs(cfg: RunConfig, stage: str, directory: Path | None = None) -> dict[str, QueryGraph]:
    base = directory or out(cfg, "query_graphs")
    _need(base, stage)
    return {p.name: QueryGraph.read(p) for p in sorted(base.iterdir()) if p.is_dir()}


def load_ground_truth(cfg: RunConfig, graph: KnowledgeGraph, stage: str) -> dict[str, GroundTruthEntry]:
    base = _need(out(cfg, "ground_truth"), stage)
    entries = {}
    for p in sorted(base.glob("*.json")):
        entry = GroundTruthEntry.from_json(_read_json(p), graph)
        entries[entry.query_id] = entry
    return entries


# -- stages ---------------------------------------------------------------------


def stage_ingest_graph(cfg: RunConfig) -> None:
    stage = "ingest-graph"
    for p in (cfg.nodes, cfg.edges):
        if p is None or not Path(p).is_file():
            raise StageError(stage, f"graph file not found: {p}")
    try:
        graph = read_graph(cfg.nodes, cfg.edges)
    except GraphError as exc:
        raise StageError(stage, exc) from None
    out(cfg, "graph").mkdir(parents=True, exist_ok=True)
    write_graph(graph, out(cfg, "graph", "nodes.tsv"), out(cfg, "graph", "edges.tsv"), seed_header(cfg))
    log.info("graph: %d nodes, %d edges", len(graph.nodes), len(graph.edges))


def stage_ingest_corpus(cfg: RunConfig) -> None:
    stage = "ingest-corpus"
    if cfg.corpus is None or not Path(cfg.corpus).exists():
        raise StageError(stage, f"corpus path not found: {cfg.corpus}")
    try:
        corpus = load_corpus(cfg.corpus, cfg.element_paths)
    except CorpusError as exc:
        raise StageError(stage, exc) from None
    Path(cfg.output).mkdir(parents=True, exist_ok=True)
    write_corpus_jsonl(corpus, out(cfg, "corpus.jsonl"), seed_header(cfg))
    if corpus.failures:
        rows = [("source", "error")] + sorted(corpus.failures)
        _write_text(out(cfg, "corpus_failures.tsv"), _csv_text(rows, seed_header(cfg), "\t"))
    log.info("corpus: %d documents, %d failures", len(corpus), len(corpus.failures))


def stage_index(cfg: RunConfig) -> None:
    corpus = load_corpus(_need(out(cfg, "corpus.jsonl"), "index"))
    build_index(corpus).save(out(cfg, "index.json"), rng_seed=cfg.rng_seed)


def stage_link(cfg: RunConfig) -> None:
    stage = "link"
    queries = load_queries(cfg, stage)
    graph = load_graph_artifact(cfg, stage)
    corpus = load_corpus(_need(out(cfg, "corpus.jsonl"), stage))
    linker = Linker(graph)

    def titles(ids):
        return sorted(graph.title(i) for i in ids)

    data = {
        "rng_seed": cfg.rng_seed,
        "queries": {q.query_id: titles(linker.link(q.keywords).articles) for q in queries},
        "documents": {d.doc_id: titles(linker.link(d.extracted_text).articles) for d in corpus},
    }
    _write_json(out(cfg, "links.json"), data)


def _ground_truth_task(args):
    query, linked, candidates = args
    entry = best_of_restarts(query, linked, candidates, _SHARED["index"], _SHARED["graph"], _SHARED["seed"], _SHARED["restarts"], _SHARED["rs"])
    return entry.to_json(_SHARED["graph"])


def stage_ground_truth(cfg: RunConfig) -> None:
    stage = "ground-truth"
    queries = load_queries(cfg, stage)
    graph = load_graph_artifact(cfg, stage)
    index = load_index_artifact(cfg, stage)
    linked, per_doc = load_links(cfg, graph, stage)
    tasks = []
    for q in queries:
        missing = sorted(d for d in q.expected_docs if d not in per_doc)
        if missing:
            log.warning("query %s: expected documents not in corpus: %s", q.query_id, ", ".join(missing))
        candidates = set()
        for d in q.expected_docs:
            candidates |= per_doc.get(d, set())
        tasks.append((q, linked.get(q.query_id, set()), candidates))
    shared = {"index": index, "graph": graph, "seed": cfg.rng_seed, "restarts": cfg.restarts, "rs": cfg.r_values}
    results = parallel_map(_ground_truth_task, tasks, cfg.threads, shared)
    gt_dir = out(cfg, "ground_truth")
    gt_dir.mkdir(parents=True, exist_ok=True)
    for old in gt_dir.glob("*.json"):
        old.unlink()
    for data in results:
        _write_json(gt_dir / f"{data['query_id']}.json", data)


def stage_assemble(cfg: RunConfig) -> None:
    stage = "assemble"
    graph = load_graph_artifact(cfg, stage)
    entries = load_ground_truth(cfg, graph, stage)
    linked, _ = load_links(cfg, graph, stage)
    base = out(cfg, "query_graphs")
    for qid, entry in entries.items():
        entry.linked_keywords = linked.get(qid, entry.linked_keywords)
        try:
            qg = assemble_query_graph(entry, graph)
        except GraphError as exc:
            raise StageError(stage, exc) from None
        qg.write(base / qid, seed_header(cfg))


def _analyze_task(qid):
    qg = QueryGraph.read(_SHARED["qg_dir"] / qid)
    query = _SHARED["queries"][qid]
    seeds = sorted(n for n in qg.nodes_with_role(QUERY_ARTICLE) if not qg.graph.is_redirect(n))
    cycles = enumerate_cycles(qg.graph, seeds, _SHARED["max_len"])
    rows = []
    for c in cycles:
        contrib = cycle_contribution(c, seeds, query.expected_docs, _SHARED["index"], qg.graph, _SHARED["rs"])
        titles = " | ".join(qg.graph.title(n) for n in c.node_seq)
        rows.append((qid, ",".join(map(str, c.node_seq)), titles, c.length, c.n_articles, c.n_categories, c.induced_edges, c.extra_edge_density, c.category_ratio, contrib))
    metrics = largest_component_metrics(qg)
    lcc_tpr = 0.0
    if len(qg.graph):
        lcc = connected_components(qg.graph)[0]
        lcc_tpr = tpr(qg.graph.induced_subgraph(lcc))
    stats = (qid, len(qg.graph), len(qg.graph.edges), *[metrics[m] for m in COMPONENT_METRICS], lcc_tpr, len(cycles))
    return rows, stats


CYCLE_COLUMNS = ("query_id", "nodes", "titles", "length", "n_articles", "n_categories", "induced_edges", "density", "category_ratio", "contribution")
STATS_COLUMNS = ("query_id", "nodes", "edges", *COMPONENT_METRICS, "tpr", "cycles")


def stage_analyze(cfg: RunConfig, query_graph_dir: Path | None = None, graph_dir: Path | None = None) -> None:
    """Enumerate cycles per query graph; ``graph_dir`` holds the full graph for global ratios."""
    stage = "analyze"
    qg_dir = query_graph_dir or out(cfg, "query_graphs")
    _need(qg_dir, stage)
    queries = {q.query_id: q for q in load_queries(cfg, stage)}
    index = load_index_artifact(cfg, stage)
    qids = sorted(p.name for p in qg_dir.iterdir() if p.is_dir())
    unknown = [q for q in qids if q not in queries]
    if unknown:
        raise StageError(stage, f"query graphs without a query: {', '.join(unknown)}")
    shared = {"qg_dir": qg_dir, "queries": queries, "index": index, "max_len": cfg.max_len, "rs": cfg.r_values}
    try:
        results = parallel_map(_analyze_task, qids, cfg.threads, shared)
    except GraphError as exc:
        raise StageError(stage, exc) from None
    cycle_rows, stat_rows = [], []
    for rows, stats in results:
        cycle_rows.extend(rows)
        stat_rows.append(stats)

    def cell(x):
        return fmt(x) if isinstance(x, float) else x

    header = seed_header(cfg)
    _write_text(out(cfg, "analysis", "cycles.tsv"), _csv_text([CYCLE_COLUMNS] + [[cell(x) for x in r] for r in cycle_rows], header, "\t"))
    _write_text(out(cfg, "analysis", "query_stats.csv"), _csv_text([STATS_COLUMNS] + [[cell(x) for x in r] for r in stat_rows], header))
    _write_text(out(cfg, "analysis", "aggregates.csv"), _csv_text(aggregate_rows(cycle_rows, len(qids), cfg.max_len), header))

    graph_stats = {"rng_seed": cfg.rng_seed, "query_graphs": len(qids)}
    graph_dir = graph_dir or out(cfg, "graph")
    if (graph_dir / "nodes.tsv").exists():
        full = read_graph(graph_dir / "nodes.tsv", graph_dir / "edges.tsv")
        graph_stats["reciprocal_pair_ratio"] = round(reciprocal_pair_ratio(full), 3)
    tprs = [s[-2] for s in stat_rows]
    graph_stats["mean_lcc_tpr"] = round(sum(tprs) / len(tprs), 3) if tprs else 0.0
    _write_json(out(cfg, "analysis", "graph_stats.json"), graph_stats)


AGGREGATE_COLUMNS = ("length", "cycles", "cycles_per_query", "mean_contribution", "mean_contribution_by_query", "mean_category_ratio", "mean_density")


def aggregate_rows(cycle_rows: list, n_queries: int, max_len: int) -> list:
    """Per-length series behind the contribution, count, ratio and density plots."""
    cycles = [Cycle(tuple(int(x) for x in r[1].split(",")), r[4], r[5], r[6], r[8], r[7]) for r in cycle_rows]
    contribs = [r[9] for r in cycle_rows]
    report = aggregate(cycles, contribs)
    per_query: dict[tuple[int, str], list[float]] = {}
    for r in cycle_rows:
        per_query.setdefault((r[3], r[0]), []).append(r[9])
    rows = [AGGREGATE_COLUMNS]
    for length in range(2, max_len + 1):
        agg = report.by_length.get(length)
        if agg is None:
            rows.append((length, 0, fmt(0.0), "no cycles", "no cycles", "no cycles", "no cycles"))
            continue
        query_means = [sum(v) / len(v) for (ln, _), v in per_query.items() if ln == length]
        rows.append((
            length,
            agg.count,
            fmt(agg.count / n_queries if n_queries else 0.0),
            fmt(agg.contribution),
            fmt(sum(query_means) / len(query_means)),
            fmt(agg.category_ratio),
            fmt(agg.extra_edge_density),
        ))
    return rows


def load_cycles(cfg: RunConfig, query_graphs: dict[str, QueryGraph], stage: str) -> dict:
    rows = read_table(_need(out(cfg, "analysis", "cycles.tsv"), stage), "\t")
    by_query: dict[str, list] = {qid: [] for qid in query_graphs}
    for r in rows:
        qg = query_graphs.get(r["query_id"])
        if qg is None:
            raise StageError(stage, f"cycles.tsv references unknown query graph {r['query_id']}")
        by_query[r["query_id"]].append(make_cycle([int(x) for x in r["nodes"].split(",")], qg.graph))
    return by_query


def stage_expand(cfg: RunConfig) -> None:
    stage = "expand"
    queries = load_queries(cfg, stage)
    graph = load_graph_artifact(cfg, stage)
    index = load_index_artifact(cfg, stage)
    linked, _ = load_links(cfg, graph, stage)
    query_graphs = load_query_graphs(cfg, stage)
    cycles_by_query = load_cycles(cfg, query_graphs, stage)
    rs = cfg.r_values
    rows = [("configuration", *[f"top-{r}" for r in rs], "unexpanded_queries")]
    details = [("configuration", "query_id", "features", *[f"top-{r}" for r in rs])]
    table = [baseline(queries, linked, index, graph, rs)]
    table += [evaluate_config(queries, linked, cycles_by_query, c, index, graph, rs) for c in cfg.expansion_configs()]
    for row in table:
        rows.append((row.label, *[fmt(row.precision[r]) for r in rs], ";".join(row.unexpanded)))
        for o in row.outcomes:
            details.append((row.label, o.query_id, " | ".join(o.features), *[fmt(o.per_r_precision[r]) for r in rs]))
    header = f"{seed_header(cfg)}; min_category_ratio: {cfg.min_category_ratio}; min_density: {cfg.min_density}"
    _write_text(out(cfg, "table4.csv"), _csv_text(rows, header))
    _write_text(out(cfg, "expand_details.csv"), _csv_text(details, header))


def stage_report(cfg: RunConfig) -> None:
    report_mod.write_report(cfg, Path(cfg.output), out(cfg, "report"))


STAGE_FUNCS = {
    "ingest-graph": stage_ingest_graph,
    "ingest-corpus": stage_ingest_corpus,
    "index": stage_index,
    "link": stage_link,
    "ground-truth": stage_ground_truth,
    "assemble": stage_assemble,
    "analyze": stage_analyze,
    "expand": stage_expand,
    "report": stage_report,
}


def validate_inputs(cfg: RunConfig) -> None:
    """Check every input path before any stage runs."""
    checks = (
        ("ingest-graph", "nodes", cfg.nodes, Path.is_file),
        ("ingest-graph", "edges", cfg.edges, Path.is_file),
        ("ingest-corpus", "corpus", cfg.corpus, Path.exists),
        ("link", "queries", cfg.queries, Path.is_file),
    )
    for stage, key, path, ok in checks:
        if path is None:
            raise StageError(stage, f"no {key} path configured")
        if not ok(Path(path)):
            raise StageError(stage, f"{key} path not found: {path}")
    try:
        cfg.validate()
    except ValueError as exc:
        raise StageError("config", exc) from None


def run_stage(name: str, cfg: RunConfig) -> None:
    try:
        STAGE_FUNCS[name](cfg)
    except StageError:
        raise
    except (OSError, ValueError, KeyError) as exc:
        raise StageError(name, exc) from exc


def run_pipeline(cfg: RunConfig, force: bool = False) -> list[str]:
    """Run every stage in order; stages whose stamp matches the config are skipped.

    Returns the names of the stages that actually ran.
    """
    validate_inputs(cfg)
    Path(cfg.output).mkdir(parents=True, exist_ok=True)
    stamps = out(cfg, ".stamps")
    stamps.mkdir(exist_ok=True)
    fingerprint = cfg.fingerprint()
    ran = []
    upstream_ran = force
    for name in STAGES:
        stamp = stamps / name
        if not upstream_ran and stamp.exists() and stamp.read_text().strip() == fingerprint:
            log.info("stage %s up to date", name)
            continue
        log.info("running stage %s", name)
        stamp.unlink(missing_ok=True)
        run_stage(name, cfg)
        stamp.write_text(fingerprint + "\n")
        ran.append(name)
        upstream_ran = True
    return ran
