"""Typed article/category graph with adjacency and title indices."""

from __future__ import annotations

import enum
import json
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple

from .text import normalize_key

NodeId = int


class GraphError(ValueError):
    """Raised for malformed records and graph invariant violations."""


class EdgeKind(str, enum.Enum):
    LINK = "link"
    REDIRECT = "redirect"
    BELONGS = "belongs"
    INSIDE = "inside"


@dataclass(frozen=True)
class Article:
    id: NodeId
    title: str
    normalized_title: str
    is_redirect: bool = False


@dataclass(frozen=True)
class Category:
    id: NodeId
    name: str
    normalized_title: str

    @property
    def title(self) -> str:
        return self.name


Node = Article | Category


class Edge(NamedTuple):
    src: NodeId
    dst: NodeId
    kind: EdgeKind


class KnowledgeGraph:
    """Immutable store of articles, categories and typed edges.

    Build one with :func:`load_graph` (validated) or :meth:`from_parts`.
    Subgraphs produced by :meth:`induced_subgraph` skip the
    article/category membership checks.
    """

    def __init__(self, nodes: dict[NodeId, Node], edges: Iterable[Edge]):
        self.nodes: dict[NodeId, Node] = dict(sorted(nodes.items()))
        self.edges: frozenset[Edge] = frozenset(edges)
        self._out: dict[NodeId, dict[EdgeKind, list[NodeId]]] = defaultdict(lambda: defaultdict(list))
        self._in: dict[NodeId, dict[EdgeKind, list[NodeId]]] = defaultdict(lambda: defaultdict(list))
        for e in sorted(self.edges):
            self._out[e.src][e.kind].append(e.dst)
            self._in[e.dst][e.kind].append(e.src)
        self.article_index: dict[str, NodeId] = {}
        self.category_index: dict[str, NodeId] = {}
        for node in self.nodes.values():
            index = self.article_index if isinstance(node, Article) else self.category_index
            index.setdefault(node.normalized_title, node.id)

    @classmethod
    def from_parts(cls, nodes: Iterable[Node], edges: Iterable[Edge], validate: bool = True) -> "KnowledgeGraph":
        node_map: dict[NodeId, Node] = {}
        for node in nodes:
            if node.id in node_map:
                raise GraphError(f"duplicate node id {node.id}")
            node_map[node.id] = node
        edge_list = list(edges)
        if validate:
            _check_edges(node_map, edge_list)
        graph = cls(node_map, edge_list)
        if validate:
            graph._check_invariants()
        return graph

    # -- lookups ---------------------------------------------------------

    def __contains__(self, node: NodeId) -> bool:
        return node in self.nodes

    def __len__(self) -> int:
        return len(self.nodes)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        return self.nodes == other.nodes and self.edges == other.edges

    def __repr__(self) -> str:
        return f"KnowledgeGraph(nodes={len(self.nodes)}, edges={len(self.edges)})"

    def node(self, node: NodeId) -> Node:
        try:
            return self.nodes[node]
        except KeyError:
            raise GraphError(f"unknown node {node}") from None

    def is_article(self, node: NodeId) -> bool:
        return isinstance(self.node(node), Article)

    def is_category(self, node: NodeId) -> bool:
        return isinstance(self.node(node), Category)

    def is_redirect(self, node: NodeId) -> bool:
        n = self.node(node)
        return isinstance(n, Article) and n.is_redirect

    def articles(self) -> list[NodeId]:
        return [i for i, n in self.nodes.items() if isinstance(n, Article)]

    def categories(self) -> list[NodeId]:
        return [i for i, n in self.nodes.items() if isinstance(n, Category)]

    def title(self, node: NodeId) -> str:
        return self.node(node).title

    def find_article(self, title: str) -> NodeId | None:
        return self.article_index.get(normalize_key(title))

    def find_category(self, name: str) -> NodeId | None:
        return self.category_index.get(normalize_key(name))

    def out_neighbors(self, node: NodeId, kind: EdgeKind) -> list[NodeId]:
        self.node(node)
        return list(self._out.get(node, {}).get(kind, ()))

    def in_neighbors(self, node: NodeId, kind: EdgeKind) -> list[NodeId]:
        self.node(node)
        return list(self._in.get(node, {}).get(kind, ()))

    def has_edge(self, src: NodeId, dst: NodeId, kind: EdgeKind) -> bool:
        return Edge(src, dst, kind) in self.edges

    def categories_of(self, article: NodeId) -> list[NodeId]:
        return self.out_neighbors(article, EdgeKind.BELONGS)

    def redirects_to(self, article: NodeId) -> list[NodeId]:
        """Redirect articles pointing at ``article``."""
        return self.in_neighbors(article, EdgeKind.REDIRECT)

    def undirected_neighbors(self, node: NodeId, exclude_redirect_edges: bool = False) -> set[NodeId]:
        self.node(node)
        result: set[NodeId] = set()
        for table in (self._out.get(node, {}), self._in.get(node, {})):
            for kind, targets in table.items():
                if exclude_redirect_edges and kind is EdgeKind.REDIRECT:
                    continue
                result.update(targets)
        return result

    def resolve_main(self, article: NodeId) -> NodeId:
        """Follow redirect edges until a non-redirect article is reached."""
        if not self.is_article(article):
            raise GraphError(f"node {article} is not an article")
        seen = {article}
        current = article
        while self.is_redirect(current):
            targets = self._out.get(current, {}).get(EdgeKind.REDIRECT, [])
            if not targets:
                # only reachable in relaxed subgraphs
                return current
            current = targets[0]
            if current in seen:
                raise GraphError(f"redirect loop at node {article}")
            seen.add(current)
        return current

    def induced_subgraph(self, node_set: Iterable[NodeId]) -> "KnowledgeGraph":
        keep = set(node_set)
        for node in keep:
            self.node(node)
        nodes = {i: self.nodes[i] for i in keep}
        edges = [e for e in self.edges if e.src in keep and e.dst in keep]
        return KnowledgeGraph(nodes, edges)

    # -- validation ------------------------------------------------------

    def _check_invariants(self) -> None:
        for node in self.nodes.values():
            if not isinstance(node, Article):
                continue
            out = self._out.get(node.id, {})
            if node.is_redirect:
                if out.get(EdgeKind.BELONGS):
                    raise GraphError(f"redirect has category: node {node.id} ({node.title!r})")
                if out.get(EdgeKind.LINK):
                    raise GraphError(f"redirect has outgoing link: node {node.id} ({node.title!r})")
                if len(out.get(EdgeKind.REDIRECT, ())) != 1:
                    raise GraphError(f"redirect must have exactly one target: node {node.id} ({node.title!r})")
            else:
                if out.get(EdgeKind.REDIRECT):
                    raise GraphError(f"non-redirect article has redirect edge: node {node.id} ({node.title!r})")
                if not out.get(EdgeKind.BELONGS):
                    raise GraphError(f"article without category: node {node.id} ({node.title!r})")
        for node in self.nodes.values():
            if isinstance(node, Article) and node.is_redirect:
                self.resolve_main(node.id)


def _check_edges(nodes: dict[NodeId, Node], edges: list[Edge]) -> None:
    seen: set[Edge] = set()
    titles: dict[tuple[type, str], NodeId] = {}
    for node in nodes.values():
        if not node.normalized_title:
            raise GraphError(f"node {node.id} has an empty title")
        key = (type(node), node.normalized_title)
        if key in titles:
            raise GraphError(f"duplicate title {node.title!r}: nodes {titles[key]} and {node.id}")
        titles[key] = node.id
    for e in edges:
        if e in seen:
            raise GraphError(f"duplicate edge {e.src}->{e.dst} ({e.kind.value})")
        seen.add(e)
        for end in (e.src, e.dst):
            if end not in nodes:
                raise GraphError(f"edge {e.src}->{e.dst} references unknown node {end}")
        src, dst = nodes[e.src], nodes[e.dst]
        if e.kind in (EdgeKind.LINK, EdgeKind.REDIRECT):
            ok = isinstance(src, Article) and isinstance(dst, Article) and e.src != e.dst
        elif e.kind is EdgeKind.BELONGS:
            ok = isinstance(src, Article) and isinstance(dst, Category)
        else:
            ok = isinstance(src, Category) and isinstance(dst, Category) and e.src != e.dst
        if not ok:
            raise GraphError(f"invalid {e.kind.value} edge {e.src}->{e.dst}")


# -- ingestion -------------------------------------------------------------

NODE_KINDS = ("article", "category", "redirect")


def make_node(node_id: NodeId, kind: str, title: str) -> Node:
    title = title.strip()
    if kind == "category":
        return Category(node_id, title, normalize_key(title))
    if kind in ("article", "redirect"):
        return Article(node_id, title, normalize_key(title), kind == "redirect")
    raise GraphError(f"unknown node kind {kind!r}")


def _records(source: Iterable[str], fields: tuple[str, ...], what: str) -> Iterator[tuple[int, dict]]:
    for lineno, line in enumerate(source, 1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        if line.lstrip().startswith("{"):
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise GraphError(f"{what} line {lineno}: bad JSON ({exc.msg})") from None
            if not isinstance(rec, dict) or any(f not in rec for f in fields):
                raise GraphError(f"{what} line {lineno}: expected fields {', '.join(fields)}")
        else:
            parts = line.split("\t")
            if len(parts) != len(fields):
                raise GraphError(f"{what} line {lineno}: expected {len(fields)} tab-separated fields, got {len(parts)}")
            rec = dict(zip(fields, parts))
        yield lineno, rec


def parse_nodes(source: Iterable[str]) -> list[Node]:
    nodes = []
    for lineno, rec in _records(source, ("id", "kind", "title"), "nodes"):
        try:
            node_id = int(rec["id"])
            if node_id < 0:
                raise ValueError
        except (TypeError, ValueError):
            raise GraphError(f"nodes line {lineno}: bad node id {rec['id']!r}") from None
        kind = str(rec["kind"]).strip().lower()
        if kind not in NODE_KINDS:
            raise GraphError(f"nodes line {lineno}: unknown node kind {kind!r}")
        if not str(rec["title"]).strip():
            raise GraphError(f"nodes line {lineno}: empty title")
        nodes.append(make_node(node_id, kind, str(rec["title"])))
    return nodes


def parse_edges(source: Iterable[str]) -> list[Edge]:
    edges = []
    for lineno, rec in _records(source, ("src", "dst", "kind"), "edges"):
        try:
            src, dst = int(rec["src"]), int(rec["dst"])
        except (TypeError, ValueError):
            raise GraphError(f"edges line {lineno}: bad node id") from None
        try:
            kind = EdgeKind(str(rec["kind"]).strip().lower())
        except ValueError:
            raise GraphError(f"edges line {lineno}: unknown edge kind {rec['kind']!r}") from None
        edges.append(Edge(src, dst, kind))
    return edges


def load_graph(nodes_source: Iterable[str], edges_source: Iterable[str], validate: bool = True) -> KnowledgeGraph:
    """Build a graph from node and edge record streams (TSV or JSON lines)."""
    return KnowledgeGraph.from_parts(parse_nodes(nodes_source), parse_edges(edges_source), validate=validate)


def read_graph(nodes_path: str | Path, edges_path: str | Path, validate: bool = True) -> KnowledgeGraph:
    with open(nodes_path, encoding="utf-8") as nf, open(edges_path, encoding="utf-8") as ef:
        return load_graph(nf, ef, validate=validate)


def node_kind(node: Node) -> str:
    if isinstance(node, Category):
        return "category"
    return "redirect" if node.is_redirect else "article"


def write_graph(graph: KnowledgeGraph, nodes_path: str | Path, edges_path: str | Path, header: str | None = None) -> None:
    """Write the graph in the TSV node/edge format, sorted for byte stability."""
    with open(nodes_path, "w", encoding="utf-8", newline="\n") as f:
        if header:
            f.write(f"# {header}\n")
        for node in graph.nodes.values():
            f.write(f"{node.id}\t{node_kind(node)}\t{node.title}\n")
    with open(edges_path, "w", encoding="utf-8", newline="\n") as f:
        if header:
            f.write(f"# {header}\n")
        for e in sorted(graph.edges):
            f.write(f"{e.src}\t{e.dst}\t{e.kind.value}\n")
