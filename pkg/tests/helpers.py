"""Small builders shared by the test modules."""

from pathlib import Path

from cyclex.kgraph import load_graph

MINI = Path(__file__).resolve().parents[1] / "src" / "cyclex" / "data" / "mini"


def graph_from(nodes: str, edges: str = "", validate: bool = True):
    """Build a graph from whitespace-separated ``id kind title`` / ``src dst kind`` lines.

    Titles may contain spaces; everything after the second field is the title.
    """
    node_lines = []
    for line in nodes.strip().splitlines():
        node_id, kind, title = line.split(None, 2)
        node_lines.append(f"{node_id}\t{kind}\t{title}")
    edge_lines = ["\t".join(line.split()) for line in edges.strip().splitlines() if line.strip()]
    return load_graph(node_lines, edge_lines, validate=validate)
