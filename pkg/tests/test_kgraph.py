import json

import pytest

from cyclex.kgraph import EdgeKind, GraphError, load_graph, read_graph, write_graph
from helpers import graph_from

BASIC_NODES = """
1 article a
2 article b
10 category c1
"""


def test_minimal_valid_graph():
    g = graph_from(BASIC_NODES, "1 2 link\n1 10 belongs\n2 10 belongs")
    assert len(g.nodes) == 3
    assert len(g.edges) == 3


def test_redirect_with_category_rejected():
    nodes = BASIC_NODES + "3 redirect r\n"
    with pytest.raises(GraphError, match="redirect has category"):
        graph_from(nodes, "1 10 belongs\n2 10 belongs\n3 1 redirect\n3 10 belongs")


def test_article_without_category_rejected():
    with pytest.raises(GraphError, match="article without category") as err:
        graph_from("1 article lonely")
    assert "lonely" in str(err.value)


def test_redirect_with_outgoing_link_rejected():
    nodes = BASIC_NODES + "3 redirect r\n"
    with pytest.raises(GraphError, match="outgoing link"):
        graph_from(nodes, "1 10 belongs\n2 10 belongs\n3 1 redirect\n3 2 link")


def test_duplicate_edge_rejected():
    with pytest.raises(GraphError, match="duplicate"):
        graph_from(BASIC_NODES, "1 10 belongs\n1 10 belongs\n2 10 belongs")


def test_duplicate_title_rejected():
    with pytest.raises(GraphError):
        graph_from("1 article Venice\n2 article venice\n10 category c", "1 10 belongs\n2 10 belongs")


def test_article_and_category_may_share_name():
    g = graph_from("1 article Venice\n10 category Venice", "1 10 belongs")
    assert g.find_article("venice") == 1
    assert g.find_category("VENICE") == 10


@pytest.mark.parametrize(
    "edge",
    ["1 1 link", "10 1 belongs", "1 2 inside", "10 10 inside", "1 99 link"],
)
def test_edge_kind_rules(edge):
    with pytest.raises(GraphError):
        graph_from(BASIC_NODES, f"1 10 belongs\n2 10 belongs\n{edge}")


def test_malformed_record_reports_line():
    with pytest.raises(GraphError, match="line 2"):
        load_graph(["1\tarticle\ta", "2\tarticle"], [])
    with pytest.raises(GraphError, match="line 1"):
        load_graph(["1\tarticle\ta"], ["1\t2\tfriend"])


def test_inside_cycles_allowed():
    g = graph_from("1 article a\n10 category c1\n11 category c2", "1 10 belongs\n10 11 inside\n11 10 inside")
    assert g.has_edge(11, 10, EdgeKind.INSIDE)


def test_jsonl_input_accepted():
    nodes = [json.dumps({"id": 1, "kind": "article", "title": "a"}), json.dumps({"id": 10, "kind": "category", "title": "c"})]
    edges = [json.dumps({"src": 1, "dst": 10, "kind": "belongs"})]
    g = load_graph(nodes, edges)
    assert g.categories_of(1) == [10]


def test_resolve_main():
    g = graph_from(BASIC_NODES + "3 redirect r\n4 redirect r2", "1 10 belongs\n2 10 belongs\n3 1 redirect\n4 3 redirect")
    assert g.resolve_main(1) == 1
    assert g.resolve_main(3) == 1
    assert g.resolve_main(4) == 1


def test_redirect_loop():
    with pytest.raises(GraphError, match="redirect loop"):
        graph_from("1 redirect r1\n2 redirect r2", "1 2 redirect\n2 1 redirect")


def test_undirected_neighbors():
    g = graph_from(BASIC_NODES + "3 redirect r", "1 2 link\n1 10 belongs\n2 10 belongs\n3 1 redirect")
    assert g.undirected_neighbors(1, exclude_redirect_edges=True) == {2, 10}
    assert g.undirected_neighbors(1) == {2, 10, 3}
    assert g.undirected_neighbors(2) == {1, 10}
    assert g.undirected_neighbors(3, exclude_redirect_edges=True) == set()
    with pytest.raises(GraphError):
        g.undirected_neighbors(42)


def test_induced_subgraph():
    g = graph_from(BASIC_NODES, "1 2 link\n1 10 belongs\n2 10 belongs")
    sub = g.induced_subgraph({1, 2})
    assert len(sub) == 2 and len(sub.edges) == 1
    assert len(g.induced_subgraph(set())) == 0
    assert g.induced_subgraph(g.nodes) == g
    with pytest.raises(GraphError):
        g.induced_subgraph({1, 99})


def test_write_read_roundtrip(tmp_path):
    g = graph_from(BASIC_NODES + "3 redirect r", "1 2 link\n1 10 belongs\n2 10 belongs\n3 1 redirect")
    write_graph(g, tmp_path / "n.tsv", tmp_path / "e.tsv", header="rng_seed: 1")
    assert (tmp_path / "n.tsv").read_text().startswith("# rng_seed: 1\n")
    assert read_graph(tmp_path / "n.tsv", tmp_path / "e.tsv") == g
