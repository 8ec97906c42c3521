"""Connected components, triangle participation and bounded-length cycle analysis.

Cycles live on the undirected view of a query graph.  Redirect edges never
take part, and neither do redirect articles (they have no categories and no
outgoing links, so any walk through one is an artefact of incoming links).
A cycle of length 2 is a pair of articles linking to each other.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Collection, Iterable, Sequence

from .kgraph import EdgeKind, GraphError, KnowledgeGraph, NodeId
from .retrieval import DEFAULT_R, quality_fraction
from .text import normalize

MAX_CYCLE_LEN = 5

_CYCLE_KINDS = (EdgeKind.LINK, EdgeKind.BELONGS, EdgeKind.INSIDE)


@dataclass(frozen=True)
class Cycle:
    node_seq: tuple[NodeId, ...]
    n_articles: int
    n_categories: int
    induced_edges: int
    category_ratio: float
    extra_edge_density: float

    @property
    def length(self) -> int:
        return len(self.node_seq)


@dataclass
class LengthAggregate:
    length: int
    count: int = 0
    contribution: float = 0.0
    category_ratio: float = 0.0
    extra_edge_density: float = 0.0


@dataclass
class CycleReport:
    by_length: dict[int, LengthAggregate] = field(default_factory=dict)


# -- components and triangles ---------------------------------------------


def _simple_adjacency(graph: KnowledgeGraph) -> dict[NodeId, set[NodeId]]:
    adj: dict[NodeId, set[NodeId]] = {n: set() for n in graph.nodes}
    for e in graph.edges:
        adj[e.src].add(e.dst)
        adj[e.dst].add(e.src)
    return adj


def connected_components(graph: KnowledgeGraph) -> list[set[NodeId]]:
    """Undirected components over every edge kind, largest first."""
    adj = _simple_adjacency(graph)
    seen: set[NodeId] = set()
    comps = []
    for start in adj:
        if start in seen:
            continue
        comp = {start}
        queue = deque([start])
        seen.add(start)
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    comp.add(v)
                    queue.append(v)
        comps.append(comp)
    comps.sort(key=lambda c: (-len(c), min(c)))
    return comps


def tpr(graph: KnowledgeGraph) -> float:
    """Fraction of nodes that lie on at least one triangle."""
    if not graph.nodes:
        return 0.0
    adj = _simple_adjacency(graph)
    in_triangle = 0
    for u, nbrs in adj.items():
        if any(adj[v] & nbrs for v in nbrs):
            in_triangle += 1
    return in_triangle / len(adj)


def reciprocal_pair_ratio(graph: KnowledgeGraph) -> float:
    """Share of linked article pairs that link both ways."""
    pairs: dict[tuple[NodeId, NodeId], int] = {}
    for e in graph.edges:
        if e.kind is EdgeKind.LINK:
            key = (min(e.src, e.dst), max(e.src, e.dst))
            pairs[key] = pairs.get(key, 0) + 1
    if not pairs:
        return 0.0
    return sum(1 for n in pairs.values() if n == 2) / len(pairs)


# -- enumeration ------------------------------------------------------------


def cycle_adjacency(graph: KnowledgeGraph) -> dict[NodeId, set[NodeId]]:
    """Undirected adjacency used for cycles: no redirect edges or redirect nodes."""
    redirects = {n for n in graph.nodes if graph.is_redirect(n)}
    adj: dict[NodeId, set[NodeId]] = {n: set() for n in graph.nodes if n not in redirects}
    for e in graph.edges:
        if e.kind in _CYCLE_KINDS and e.src not in redirects and e.dst not in redirects:
            adj[e.src].add(e.dst)
            adj[e.dst].add(e.src)
    return adj


def canonical(seq: Sequence[NodeId]) -> tuple[NodeId, ...]:
    """Smallest rotation/reflection of a cyclic node sequence."""
    seq = tuple(seq)
    n = len(seq)
    best = None
    for s in (seq, seq[::-1]):
        for i in range(n):
            rot = s[i:] + s[:i]
            if best is None or rot < best:
                best = rot
    return best


def _bounded_distances(adj: dict[NodeId, set[NodeId]], source: NodeId, depth: int) -> dict[NodeId, int]:
    dist = {source: 0}
    frontier = [source]
    for d in range(1, depth + 1):
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if v not in dist:
                    dist[v] = d
                    nxt.append(v)
        frontier = nxt
    return dist


def find_cycle_sequences(graph: KnowledgeGraph, seeds: Collection[NodeId], max_len: int = MAX_CYCLE_LEN, adj: dict[NodeId, set[NodeId]] | None = None) -> list[tuple[NodeId, ...]]:
    """Canonical node sequences of all simple cycles through at least one seed.

    Each seed runs a depth-bounded DFS that may not enter lower-ranked seeds
    (those cycles were already reported), and a path is only extended toward
    nodes whose BFS distance back to the seed still fits in ``max_len``.  A
    cycle is emitted once per direction; the direction with the smaller
    second node wins.
    """
    if max_len < 2:
        raise ValueError("max_len must be at least 2")
    ordered = sorted(set(seeds))
    for s in ordered:
        if s not in graph.nodes:
            raise GraphError(f"unknown seed {s}")
        if not graph.is_article(s) or graph.is_redirect(s):
            raise GraphError(f"seed {s} is not an article")
    if adj is None:
        adj = cycle_adjacency(graph)
    found: list[tuple[NodeId, ...]] = []
    blocked: set[NodeId] = set()
    for s in ordered:
        if max_len >= 2:
            for t in graph.out_neighbors(s, EdgeKind.LINK):
                if t not in blocked and t in adj and graph.has_edge(t, s, EdgeKind.LINK):
                    found.append(canonical((s, t)))
        if max_len >= 3:
            found.extend(_cycles_from(adj, s, blocked, max_len))
        blocked.add(s)
    return sorted(set(found), key=lambda c: (len(c), c))


def _cycles_from(adj: dict[NodeId, set[NodeId]], s: NodeId, blocked: set[NodeId], max_len: int) -> list[tuple[NodeId, ...]]:
    dist = _bounded_distances(adj, s, max_len // 2)
    # within[r]: usable nodes whose distance back to s is at most r
    within: list[set[NodeId]] = [set() for _ in range(max_len + 1)]
    for v, d in dist.items():
        if d >= 1 and v not in blocked:
            for r in range(d, max_len + 1):
                within[r].add(v)
    out = []
    path = [s]
    on_path = {s}

    def extend(k: int, last: NodeId) -> None:
        if k >= 3 and s in adj[last] and path[1] < last:
            out.append(canonical(path))
        if k == max_len:
            return
        # the path grows to k + 1 nodes, so v must be able to return within max_len - k steps
        for v in adj[last] & within[max_len - k]:
            if v in on_path:
                continue
            path.append(v)
            on_path.add(v)
            extend(k + 1, v)
            path.pop()
            on_path.discard(v)

    if s in adj:
        extend(1, s)
    return out


def _node_seq(cycle) -> tuple[NodeId, ...]:
    return cycle.node_seq if isinstance(cycle, Cycle) else tuple(cycle)


class _EdgeLookup:
    """Constant-time edge tests for metric computation over many cycles."""

    def __init__(self, graph: KnowledgeGraph):
        self.links: set[tuple[NodeId, NodeId]] = set()
        self.other: set[tuple[NodeId, NodeId]] = set()
        for e in graph.edges:
            if e.kind is EdgeKind.LINK:
                self.links.add((e.src, e.dst))
            elif e.kind in _CYCLE_KINDS:
                self.other.add((min(e.src, e.dst), max(e.src, e.dst)))
        self.categories = {n for n in graph.nodes if graph.is_category(n)}

    def count(self, nodes: Sequence[NodeId]) -> int:
        links, other = self.links, self.other
        total = 0
        for i, u in enumerate(nodes):
            for v in nodes[i + 1 :]:
                total += ((u, v) in links) + ((v, u) in links) + ((min(u, v), max(u, v)) in other)
        return total


def induced_edge_count(cycle, graph: KnowledgeGraph) -> int:
    """Edges among the cycle's nodes: links per direction, the rest unordered."""
    nodes = sorted(set(_node_seq(cycle)))
    total = 0
    for i, u in enumerate(nodes):
        for v in nodes[i + 1 :]:
            total += graph.has_edge(u, v, EdgeKind.LINK) + graph.has_edge(v, u, EdgeKind.LINK)
            total += any(graph.has_edge(a, b, k) for a, b in ((u, v), (v, u)) for k in (EdgeKind.BELONGS, EdgeKind.INSIDE))
    return total


def max_edges(n_articles: int, n_categories: int) -> int:
    a, c = n_articles, n_categories
    return a * (a - 1) + a * c + c * (c - 1) // 2


def density_from_counts(n_edges: int, length: int, n_articles: int, n_categories: int) -> float:
    m = max_edges(n_articles, n_categories)
    if m <= length:
        return 0.0
    return (n_edges - length) / (m - length)


def _composition(seq: Sequence[NodeId], graph: KnowledgeGraph) -> tuple[int, int]:
    n_cat = sum(1 for n in seq if graph.is_category(n))
    return len(seq) - n_cat, n_cat


def extra_edge_density(cycle, graph: KnowledgeGraph) -> float:
    """(E - |C|) / (M - |C|), or 0 when no extra edge is possible."""
    seq = _node_seq(cycle)
    a, c = _composition(seq, graph)
    return density_from_counts(induced_edge_count(seq, graph), len(seq), a, c)


def category_ratio(cycle, graph: KnowledgeGraph | None = None) -> float:
    if isinstance(cycle, Cycle):
        return cycle.n_categories / cycle.length
    seq = tuple(cycle)
    return _composition(seq, graph)[1] / len(seq)


def make_cycle(node_seq: Sequence[NodeId], graph: KnowledgeGraph, lookup: _EdgeLookup | None = None) -> Cycle:
    seq = canonical(node_seq)
    if lookup is None:
        n_art, n_cat = _composition(seq, graph)
        e = induced_edge_count(seq, graph)
    else:
        n_cat = sum(1 for n in seq if n in lookup.categories)
        n_art = len(seq) - n_cat
        e = lookup.count(seq)
    return Cycle(seq, n_art, n_cat, e, n_cat / len(seq), density_from_counts(e, len(seq), n_art, n_cat))


def enumerate_cycles(graph: KnowledgeGraph, seeds: Collection[NodeId], max_len: int = MAX_CYCLE_LEN) -> list[Cycle]:
    """All simple cycles of length 2..max_len containing a seed, with metrics."""
    sequences = find_cycle_sequences(graph, seeds, max_len)
    lookup = _EdgeLookup(graph) if sequences else None
    return [make_cycle(seq, graph, lookup) for seq in sequences]


def cycle_articles(cycle: Cycle, graph: KnowledgeGraph) -> list[NodeId]:
    return [n for n in cycle.node_seq if graph.is_article(n)]


def contribution_from_qualities(base: float, expanded: float) -> float:
    """Percent change from ``base`` to ``expanded``; 100·expanded when base is 0."""
    if base > 0:
        return 100.0 * (expanded - base) / base
    return 100.0 * expanded


def cycle_contribution(cycle: Cycle, linked_keywords: Collection[NodeId], expected: Collection[str], index, graph: KnowledgeGraph, rs=DEFAULT_R) -> float:
    """Percent change in quality when the cycle's articles join the keyword articles."""
    base_ids = set(linked_keywords)
    expanded_ids = base_ids | set(cycle_articles(cycle, graph))

    def q(ids):
        return float(quality_fraction(index, [tuple(normalize(graph.title(i))) for i in sorted(ids)], expected, rs))

    return contribution_from_qualities(q(base_ids), q(expanded_ids))


def aggregate(cycles: Sequence[Cycle], contributions: Sequence[float] | None = None) -> CycleReport:
    """Per-length means of contribution, category ratio and extra-edge density."""
    report = CycleReport()
    sums: dict[int, list[float]] = {}
    for i, c in enumerate(cycles):
        acc = sums.setdefault(c.length, [0, 0.0, 0.0, 0.0])
        acc[0] += 1
        acc[1] += contributions[i] if contributions is not None else 0.0
        acc[2] += c.category_ratio
        acc[3] += c.extra_edge_density
    for length in sorted(sums):
        n, contrib, ratio, dens = sums[length]
        report.by_length[length] = LengthAggregate(length, n, contrib / n, ratio / n, dens / n)
    return report
