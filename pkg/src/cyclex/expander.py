"""Cycle-based query expansion and the per-configuration precision table."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Collection, Iterable, Mapping, Sequence

from .cycles import Cycle
from .groundtruth import Query
from .kgraph import KnowledgeGraph, NodeId
from .retrieval import DEFAULT_R, PhraseIndex, per_r_fractions
from .text import normalize

TABLE4_CONFIGS = ((2,), (3,), (4,), (5,), (2, 3), (2, 3, 4), (2, 3, 4, 5))


@dataclass(frozen=True)
class ExpansionConfig:
    lengths: tuple[int, ...] = (2, 3, 4, 5)
    min_category_ratio: float = 0.0
    min_density: float = 0.0

    def __post_init__(self):
        if not self.lengths:
            raise ValueError("expansion config needs at least one cycle length")
        object.__setattr__(self, "lengths", tuple(sorted(set(self.lengths))))

    @property
    def label(self) -> str:
        return " & ".join(map(str, self.lengths))

    def accepts(self, cycle: Cycle) -> bool:
        if cycle.length not in self.lengths:
            return False
        if cycle.length >= 3 and cycle.category_ratio < self.min_category_ratio:
            return False
        return cycle.extra_edge_density >= self.min_density


@dataclass
class ExpansionOutcome:
    query_id: str
    features: list[str]
    per_r_precision: dict[int, float]
    expanded: bool = True


@dataclass
class TableRow:
    label: str
    precision: dict[int, float]
    outcomes: list[ExpansionOutcome] = field(default_factory=list)
    unexpanded: list[str] = field(default_factory=list)


def select_features(graph: KnowledgeGraph, cycles: Iterable[Cycle], config: ExpansionConfig) -> set[NodeId]:
    """Non-redirect articles of the cycles the configuration accepts."""
    chosen: set[NodeId] = set()
    for cycle in cycles:
        if config.accepts(cycle):
            chosen.update(n for n in cycle.node_seq if graph.is_article(n) and not graph.is_redirect(n))
    return chosen


def _phrases(graph: KnowledgeGraph, ids: Iterable[NodeId]) -> list[tuple[str, ...]]:
    return [tuple(normalize(graph.title(i))) for i in sorted(ids)]


def _average(outcomes: Sequence[ExpansionOutcome], rs: Sequence[int]) -> dict[int, float]:
    if not outcomes:
        return {r: 0.0 for r in rs}
    return {r: sum(o.per_r_precision[r] for o in outcomes) / len(outcomes) for r in rs}


def baseline(queries: Sequence[Query], linked: Mapping[str, Collection[NodeId]], index: PhraseIndex, graph: KnowledgeGraph, rs: Sequence[int] = DEFAULT_R) -> TableRow:
    """Per-r precision of the unexpanded keyword articles, averaged over queries."""
    outcomes = []
    for q in queries:
        ids = linked.get(q.query_id, ())
        per_r = per_r_fractions(index, _phrases(graph, ids), q.expected_docs, rs)
        outcomes.append(ExpansionOutcome(q.query_id, sorted(graph.title(i) for i in ids), {r: float(v) for r, v in per_r.items()}, expanded=False))
    return TableRow("baseline", _average(outcomes, rs), outcomes)


def evaluate_config(queries: Sequence[Query], linked: Mapping[str, Collection[NodeId]], cycles_by_query: Mapping[str, Sequence[Cycle]], config: ExpansionConfig, index: PhraseIndex, graph: KnowledgeGraph, rs: Sequence[int] = DEFAULT_R) -> TableRow:
    """Expand each query's keyword articles with the selected cycle articles and average precision.

    ``graph`` must contain every node referenced by the cycles (the full
    graph, or any graph the query graphs were induced from).
    """
    outcomes = []
    missing = []
    for q in queries:
        ids = set(linked.get(q.query_id, ()))
        cycles = cycles_by_query.get(q.query_id)
        if cycles is None:
            missing.append(q.query_id)
            features: set[NodeId] = set()
        else:
            features = select_features(graph, cycles, config)
        per_r = per_r_fractions(index, _phrases(graph, ids | features), q.expected_docs, rs)
        outcomes.append(ExpansionOutcome(q.query_id, sorted(graph.title(i) for i in features - ids), {r: float(v) for r, v in per_r.items()}, cycles is not None))
    return TableRow(config.label, _average(outcomes, rs), outcomes, missing)
