"""Ground-truth construction: best expansion sets by local search, and query graphs."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Collection, Iterable, Mapping, Sequence

from .cycles import connected_components
from .kgraph import GraphError, KnowledgeGraph, NodeId, read_graph, write_graph
from .retrieval import DEFAULT_R, PhraseIndex, per_r_fractions
from .stats import five_number
from .text import normalize

QUERY_ARTICLE = "query_article"
CHOSEN_ARTICLE = "chosen_article"
MAIN_ARTICLE = "main_article"
CATEGORY = "category"
ROLES = (QUERY_ARTICLE, CHOSEN_ARTICLE, MAIN_ARTICLE, CATEGORY)


@dataclass(frozen=True)
class Query:
    query_id: str
    keywords: str
    expected_docs: frozenset[str]

    def __post_init__(self):
        if not self.keywords.strip():
            raise ValueError(f"query {self.query_id}: empty keywords")
        if not self.expected_docs:
            raise ValueError(f"query {self.query_id}: no expected documents")


def read_queries(path: str | Path) -> list[Query]:
    queries = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                queries.append(Query(str(rec["query_id"]), rec["keywords"], frozenset(map(str, rec["expected_docs"]))))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"queries line {lineno}: {exc}") from None
    return queries


@dataclass
class Move:
    op: str  # start | add | remove | swap | neutral-remove
    nodes: tuple[NodeId, ...]
    value: Fraction


@dataclass
class GroundTruthEntry:
    query_id: str
    linked_keywords: set[NodeId]
    candidates: set[NodeId]
    chosen: set[NodeId]
    quality: float
    per_r_precision: dict[int, float]
    rng_seed: int
    trace: list[Move] = field(default_factory=list, repr=False)

    @property
    def expansion_set(self) -> set[NodeId]:
        return self.linked_keywords | self.chosen

    def to_json(self, graph: KnowledgeGraph) -> dict:
        def titles(ids):
            return sorted(graph.title(i) for i in ids)

        return {
            "query_id": self.query_id,
            "linked_keywords": titles(self.linked_keywords),
            "chosen": titles(self.chosen),
            "quality": round(self.quality, 3),
            "per_r_precision": {str(r): round(p, 3) for r, p in sorted(self.per_r_precision.items())},
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_json(cls, data: Mapping, graph: KnowledgeGraph) -> "GroundTruthEntry":
        def ids(titles):
            out = set()
            for t in titles:
                node = graph.find_article(t)
                if node is None:
                    raise GraphError(f"ground truth {data['query_id']}: unknown article {t!r}")
                out.add(node)
            return out

        chosen = ids(data["chosen"])
        return cls(
            query_id=data["query_id"],
            linked_keywords=ids(data["linked_keywords"]),
            candidates=set(chosen),
            chosen=chosen,
            quality=float(data["quality"]),
            per_r_precision={int(r): float(p) for r, p in data["per_r_precision"].items()},
            rng_seed=int(data["rng_seed"]),
        )


def hill_climb(candidates: Collection[NodeId], objective: Callable[[frozenset], Fraction], start: NodeId | None) -> tuple[set[NodeId], list[Move]]:
    """Steepest-ascent search over ADD/REMOVE/SWAP moves.

    Moves are scanned ADD, REMOVE, SWAP with node ids ascending and the first
    strictly best one wins.  After the start and after every improving move,
    members whose removal keeps the objective unchanged are dropped.
    """
    pool = sorted(set(candidates))
    if not pool:
        return set(), [Move("start", (), objective(frozenset()))]
    current = frozenset([start])
    value = objective(current)
    trace = [Move("start", (start,), value)]

    def drop_neutral():
        nonlocal current
        changed = True
        while changed:
            changed = False
            for x in sorted(current):
                smaller = current - {x}
                v = objective(smaller)
                if v == value:
                    current = smaller
                    trace.append(Move("neutral-remove", (x,), v))
                    changed = True

    drop_neutral()
    while True:
        best = None
        outside = [y for y in pool if y not in current]
        inside = sorted(current)
        moves = [("add", (y,), current | {y}) for y in outside]
        moves += [("remove", (x,), current - {x}) for x in inside]
        moves += [("swap", (x, y), (current - {x}) | {y}) for x in inside for y in outside]
        for op, nodes, state in moves:
            v = objective(state)
            if v > value and (best is None or v > best[0]):
                best = (v, op, nodes, state)
        if best is None:
            break
        value, op, nodes, current = best
        trace.append(Move(op, nodes, value))
        drop_neutral()
    return set(current), trace


class QualityObjective:
    """Memoized O(L(q.k) ∪ A′, D) over candidate subsets."""

    def __init__(self, index: PhraseIndex, phrases: Mapping[NodeId, tuple[str, ...]], linked_keywords: Collection[NodeId], expected: Collection[str], rs: Sequence[int] = DEFAULT_R):
        self.index = index
        self.phrases = phrases
        self.base = frozenset(linked_keywords)
        self.expected = frozenset(expected)
        self.rs = tuple(rs)
        self._memo: dict[frozenset, dict[int, Fraction]] = {}

    def per_r(self, chosen: Iterable[NodeId]) -> dict[int, Fraction]:
        key = self.base | frozenset(chosen)
        hit = self._memo.get(key)
        if hit is None:
            hit = per_r_fractions(self.index, [self.phrases[n] for n in sorted(key)], self.expected, self.rs)
            self._memo[key] = hit
        return hit

    def __call__(self, chosen: Iterable[NodeId]) -> Fraction:
        per_r = self.per_r(chosen)
        return sum(per_r.values(), Fraction(0)) / len(self.rs)


def title_phrases(graph: KnowledgeGraph, ids: Iterable[NodeId]) -> dict[NodeId, tuple[str, ...]]:
    return {i: tuple(normalize(graph.title(i))) for i in ids}


def local_search(query: Query, linked_keywords: Collection[NodeId], candidates: Collection[NodeId], index: PhraseIndex, graph: KnowledgeGraph, rng_seed: int, rs: Sequence[int] = DEFAULT_R) -> GroundTruthEntry:
    """Find a locally optimal A′ ⊆ candidates maximizing O(L(q.k) ∪ A′, D)."""
    linked = set(linked_keywords)
    pool = sorted(set(candidates) - linked)
    objective = QualityObjective(index, title_phrases(graph, linked | set(pool)), linked, query.expected_docs, rs)
    start = random.Random(rng_seed).choice(pool) if pool else None
    chosen, trace = hill_climb(pool, objective, start)
    per_r = objective.per_r(chosen)
    return GroundTruthEntry(
        query_id=query.query_id,
        linked_keywords=linked,
        candidates=set(candidates),
        chosen=chosen,
        quality=float(objective(chosen)),
        per_r_precision={r: float(v) for r, v in per_r.items()},
        rng_seed=rng_seed,
        trace=trace,
    )


def best_of_restarts(query: Query, linked_keywords, candidates, index, graph, rng_seed: int, restarts: int = 1, rs=DEFAULT_R) -> GroundTruthEntry:
    """Run ``restarts`` seeds (rng_seed, rng_seed+1, ...) and keep the best entry."""
    best = None
    for k in range(max(1, restarts)):
        entry = local_search(query, linked_keywords, candidates, index, graph, rng_seed + k, rs)
        if best is None or (entry.quality, -len(entry.chosen)) > (best.quality, -len(best.chosen)):
            best = entry
    return best


# -- query graphs -------------------------------------------------------------


@dataclass
class QueryGraph:
    query_id: str
    graph: KnowledgeGraph
    node_roles: dict[NodeId, str]

    def nodes_with_role(self, role: str) -> set[NodeId]:
        return {n for n, r in self.node_roles.items() if r == role}

    def write(self, directory: str | Path, header: str | None = None) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        write_graph(self.graph, directory / "nodes.tsv", directory / "edges.tsv", header)
        with open(directory / "roles.tsv", "w", encoding="utf-8", newline="\n") as f:
            if header:
                f.write(f"# {header}\n")
            for node in sorted(self.node_roles):
                f.write(f"{node}\t{self.node_roles[node]}\n")

    @classmethod
    def read(cls, directory: str | Path) -> "QueryGraph":
        directory = Path(directory)
        graph = read_graph(directory / "nodes.tsv", directory / "edges.tsv", validate=False)
        roles = {}
        with open(directory / "roles.tsv", encoding="utf-8") as f:
            for line in f:
                if not line.strip() or line.startswith("#"):
                    continue
                node, role = line.rstrip("\n").split("\t")
                if role not in ROLES:
                    raise ValueError(f"unknown role {role!r} in {directory}")
                roles[int(node)] = role
        return cls(directory.name, graph, roles)


def assemble_query_graph(entry: GroundTruthEntry, graph: KnowledgeGraph) -> QueryGraph:
    """Induce G(q) on X(q), the main articles of its redirects and their categories."""
    expansion = entry.expansion_set
    for node in expansion:
        if node not in graph or not graph.is_article(node):
            raise GraphError(f"query {entry.query_id}: unknown article id {node}")
    articles = set(expansion)
    articles |= {graph.resolve_main(a) for a in expansion}
    categories = {c for a in articles for c in graph.categories_of(a)}
    roles: dict[NodeId, str] = {}
    for node in articles | categories:
        if node in entry.linked_keywords:
            roles[node] = QUERY_ARTICLE
        elif node in entry.chosen:
            roles[node] = CHOSEN_ARTICLE
        elif node in categories:
            roles[node] = CATEGORY
        else:
            roles[node] = MAIN_ARTICLE
    return QueryGraph(entry.query_id, graph.induced_subgraph(articles | categories), roles)


def expansion_ratio(entry_or_graph, component: Collection[NodeId] | None = None) -> float:
    """|X(q)| / |L(q.k)|, optionally restricted to one component; 0 when undefined."""
    if isinstance(entry_or_graph, QueryGraph):
        linked = entry_or_graph.nodes_with_role(QUERY_ARTICLE)
        expansion = linked | entry_or_graph.nodes_with_role(CHOSEN_ARTICLE)
    else:
        linked = set(entry_or_graph.linked_keywords)
        expansion = entry_or_graph.expansion_set
    if component is not None:
        comp = set(component)
        linked &= comp
        expansion &= comp
    if not linked:
        return 0.0
    return len(expansion) / len(linked)


COMPONENT_METRICS = ("%size", "%query nodes", "%articles", "%categories", "expansion ratio")


def largest_component_metrics(qg: QueryGraph) -> dict[str, float]:
    comps = connected_components(qg.graph)
    total = len(qg.graph)
    if not comps:
        return dict.fromkeys(COMPONENT_METRICS, 0.0)
    lcc = comps[0]
    linked = qg.nodes_with_role(QUERY_ARTICLE)
    n_cat = sum(1 for n in lcc if qg.graph.is_category(n))
    return {
        "%size": len(lcc) / total,
        "%query nodes": len(linked & lcc) / len(linked) if linked else 0.0,
        "%articles": (len(lcc) - n_cat) / len(lcc),
        "%categories": n_cat / len(lcc),
        "expansion ratio": expansion_ratio(qg, lcc),
    }


def component_stats(query_graphs: Iterable[QueryGraph]) -> dict[str, tuple[float, float, float, float, float]]:
    """min / 25% / 50% / 75% / max of the largest-component metrics across graphs."""
    rows = [largest_component_metrics(qg) for qg in query_graphs]
    if not rows:
        raise ValueError("component_stats needs at least one query graph")
    return {m: five_number([r[m] for r in rows]) for m in COMPONENT_METRICS}
