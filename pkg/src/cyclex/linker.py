"""Entity linking by greedy longest title match, with redirect synonyms."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .kgraph import KnowledgeGraph, NodeId
from .text import normalize

MAX_SYNONYMS = 20

Phrase = tuple[str, ...]


@dataclass
class LinkResult:
    articles: set[NodeId] = field(default_factory=set)
    matched_spans: list[tuple[int, int, NodeId]] = field(default_factory=list)


def synonyms(term_tokens: Iterable[str], graph: KnowledgeGraph) -> set[Phrase]:
    """Normalized titles of the redirects pointing at the article titled ``term_tokens``."""
    key = " ".join(term_tokens)
    article = graph.article_index.get(key)
    if article is None or graph.is_redirect(article):
        return set()
    found = sorted(tuple(normalize(graph.title(r))) for r in graph.redirects_to(article))
    return set(found[:MAX_SYNONYMS])


class Linker:
    """Phrase dictionary built once per graph; :meth:`link` is pure."""

    def __init__(self, graph: KnowledgeGraph):
        self.graph = graph
        # phrase -> (priority, node id); direct titles (0) beat synonym phrases (1)
        table: dict[Phrase, tuple[int, NodeId]] = {}

        def put(phrase: Phrase, priority: int, node: NodeId) -> None:
            if not phrase:
                return
            current = table.get(phrase)
            if current is None or (priority, node) < current:
                table[phrase] = (priority, node)

        for node in graph.articles():
            put(tuple(normalize(graph.title(node))), 0, graph.resolve_main(node))

        syn_cache: dict[Phrase, set[Phrase]] = {}
        for node in graph.articles():
            if graph.is_redirect(node):
                continue
            tokens = tuple(normalize(graph.title(node)))
            n = len(tokens)
            for i in range(n):
                for j in range(i + 1, n + 1):
                    run = tokens[i:j]
                    if run not in syn_cache:
                        syn_cache[run] = synonyms(run, graph)
                    for syn in syn_cache[run]:
                        put(tokens[:i] + syn + tokens[j:], 1, node)

        self.phrases = {p: node for p, (_, node) in table.items()}
        self.max_len = max((len(p) for p in self.phrases), default=0)

    def link(self, text: str) -> LinkResult:
        return self.link_tokens(normalize(text))

    def link_tokens(self, tokens: list[str]) -> LinkResult:
        taken = [False] * len(tokens)
        spans = []
        for size in range(min(self.max_len, len(tokens)), 0, -1):
            for start in range(len(tokens) - size + 1):
                end = start + size
                if any(taken[start:end]):
                    continue
                node = self.phrases.get(tuple(tokens[start:end]))
                if node is None:
                    continue
                spans.append((start, end, node))
                for k in range(start, end):
                    taken[k] = True
        spans.sort()
        return LinkResult({node for _, _, node in spans}, spans)


def link(text: str, graph: KnowledgeGraph, linker: Linker | None = None) -> LinkResult:
    return (linker or Linker(graph)).link(text)


def link_documents(docs: Iterable, graph: KnowledgeGraph, linker: Linker | None = None) -> tuple[dict[str, set[NodeId]], set[NodeId]]:
    """Link every document's extracted text; returns per-document sets and their union."""
    linker = linker or Linker(graph)
    per_doc: dict[str, set[NodeId]] = {}
    union: set[NodeId] = set()
    for doc in docs:
        found = linker.link(doc.extracted_text).articles
        per_doc[doc.doc_id] = found
        union |= found
    return per_doc, union

