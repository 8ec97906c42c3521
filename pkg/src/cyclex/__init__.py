"""Cycle analysis of Wikipedia-style article/category graphs for query expansion."""

from .cycles import Cycle, enumerate_cycles
from .kgraph import EdgeKind, KnowledgeGraph, load_graph, read_graph
from .linker import Linker, link
from .retrieval import build_index, quality, search

__version__ = "0.1.0"

__all__ = [
    "Cycle",
    "EdgeKind",
    "KnowledgeGraph",
    "Linker",
    "build_index",
    "enumerate_cycles",
    "link",
    "load_graph",
    "quality",
    "read_graph",
    "search",
]
