"""Acceptance criteria; the terminal summary prints one PASS/FAIL line per test here."""

import csv
import itertools
import random
import time
from fractions import Fraction

import pytest

from cyclex.cli import main
from cyclex.config import read_config
from cyclex.cycles import (
    category_ratio,
    contribution_from_qualities,
    enumerate_cycles,
    extra_edge_density,
    induced_edge_count,
    max_edges,
    reciprocal_pair_ratio,
    tpr,
)
from cyclex.expander import ExpansionConfig, baseline, evaluate_config
from cyclex.groundtruth import CATEGORY, CHOSEN_ARTICLE, QUERY_ARTICLE, Query, QueryGraph, component_stats, local_search, read_queries
from cyclex.kgraph import Article, Category, Edge, EdgeKind, KnowledgeGraph, read_graph
from cyclex.pipeline import load_cycles, load_links, load_query_graphs
from cyclex.retrieval import PhraseIndex, build_index, precision, quality_fraction
from helpers import MINI, graph_from
from oracles import brute_force_cycles, brute_quality, graph_to_raw, random_mixed_graph

TOL = 1e-12


# -- 1. cycle enumeration oracle ---------------------------------------------------


def test_cycle_enumeration_matches_oracle():
    rng = random.Random(2024)
    start = time.perf_counter()
    discrepancies = 0
    n_graphs = 240
    for _ in range(n_graphs):
        g = random_mixed_graph(rng, rng.randint(3, 12), rng.uniform(0.1, 0.6))
        articles = sorted(g.articles())
        seeds = set(rng.sample(articles, rng.randint(1, len(articles))))
        kinds, edges = graph_to_raw(g)
        for max_len in (2, 3, 4, 5):
            got = {c.node_seq for c in enumerate_cycles(g, seeds, max_len)}
            if got != brute_force_cycles(kinds, edges, seeds, max_len):
                discrepancies += 1
    elapsed = time.perf_counter() - start
    print(f"oracle: {n_graphs} graphs x 4 lengths, {discrepancies} discrepancies, {elapsed:.1f}s")
    assert discrepancies == 0
    assert elapsed < 60


# -- 2. formula exactness -----------------------------------------------------------


def test_formula_exactness():
    assert (max_edges(2, 1), max_edges(3, 0), max_edges(2, 2)) == (4, 6, 7)

    tri = graph_from("1 article a\n2 article b\n10 category c", "1 2 link\n1 10 belongs\n2 10 belongs")
    tri2 = graph_from("1 article a\n2 article b\n10 category c", "1 2 link\n2 1 link\n1 10 belongs\n2 10 belongs")
    assert induced_edge_count((1, 2, 10), tri) == 3
    assert induced_edge_count((1, 2, 10), tri2) == 4
    assert abs(extra_edge_density((1, 2, 10), tri) - 0.0) <= TOL
    assert abs(extra_edge_density((1, 2, 10), tri2) - 1.0) <= TOL
    assert abs(extra_edge_density((1, 2), tri2) - 0.0) <= TOL
    chord = graph_from(
        "1 article a\n2 article b\n3 article c\n10 category x",
        "1 2 link\n2 3 link\n3 10 belongs\n1 10 belongs\n2 10 belongs",
    )
    # A=3, C=1: M = 6 + 3 = 9; E = 2 links + 3 belongs = 5; (5 - 4) / (9 - 4)
    assert abs(extra_edge_density((1, 2, 3, 10), chord) - 0.2) <= TOL

    five = graph_from(
        "1 article a\n2 article b\n3 article c\n10 category x\n11 category y",
        "1 10 belongs\n2 10 belongs\n2 11 belongs\n3 11 belongs\n3 1 link",
    )
    assert abs(category_ratio((1, 2, 10), tri) - 1 / 3) <= TOL
    assert abs(category_ratio((1, 10, 2, 11, 3), five) - 0.4) <= TOL
    assert category_ratio((1, 2), tri2) == 0.0

    results = [(f"d{i}", 1) for i in range(10)]
    assert abs(precision(results, 10, {f"d{i}" for i in range(9)}) - 0.9) <= TOL
    assert precision([], 10, {"d1"}) == 0.0
    assert precision(results, 5, {f"d{i}" for i in range(5)}) == 1.0

    texts = {f"d{i:02d}": "x " * (20 - i) for i in range(15)}
    expected = set(texts) - {"d09", "d10", "d11"}
    q = quality_fraction(build_index(texts), [["x"]], expected)
    assert q == Fraction(37, 40)
    assert abs(float(q) - 0.925) <= TOL
    assert quality_fraction(build_index(texts), [["nothing"]], expected) == 0
    assert quality_fraction(build_index(texts), [["x"]], set(texts)) == 1

    assert abs(contribution_from_qualities(0.5, 0.75) - 50.0) <= TOL
    assert contribution_from_qualities(0.4, 0.4) == 0.0
    assert abs(contribution_from_qualities(0.0, 0.3) - 30.0) <= TOL


# -- 3. local search ---------------------------------------------------------------

VOCAB = [f"w{i}" for i in range(10)]


def _graph_with_titles(titles):
    nodes = [Article(0, "kw", "kw"), Category(100, "c", "c")]
    nodes += [Article(i, t, t) for i, t in enumerate(titles, 1)]
    edges = [Edge(n.id, 100, EdgeKind.BELONGS) for n in nodes if isinstance(n, Article)]
    return KnowledgeGraph.from_parts(nodes, edges)


def _oracle(texts, titles, expected):
    def objective(subset):
        return brute_quality(texts, ["kw"] + [titles[i - 1] for i in sorted(subset)], expected)[0]

    return objective


def _random_fixture(rng):
    n = rng.randint(1, 12)
    pool = VOCAB + [f"{a} {b}" for a, b in itertools.permutations(VOCAB[:5], 2)]
    titles = rng.sample(pool, n)
    texts = {f"d{i:02d}": " ".join(rng.choice(VOCAB + ["kw"]) for _ in range(rng.randint(2, 10))) for i in range(20)}
    expected = frozenset(rng.sample(sorted(texts), rng.randint(1, 8)))
    return titles, texts, expected


def test_local_search_contracts():
    rng = random.Random(99)
    for trial in range(50):
        titles, texts, expected = _random_fixture(rng)
        graph = _graph_with_titles(titles)
        candidates = set(range(1, len(titles) + 1))
        entry = local_search(Query(f"r{trial}", "kw", expected), {0}, candidates, build_index(texts), graph, rng_seed=trial)
        values = [m.value for m in entry.trace]
        assert values == sorted(values), trial
        objective = _oracle(texts, titles, expected)
        final = frozenset(entry.chosen)
        best = objective(final)
        assert abs(entry.quality - float(best)) <= TOL
        outside = candidates - final
        for y in outside:
            assert objective(final | {y}) <= best
        for x in final:
            assert objective(final - {x}) < best, "neutral removal left behind"
            for y in outside:
                assert objective((final - {x}) | {y}) <= best


def _authored_fixtures():
    """Ten hand-built cases: good features, poisoned titles, redundancy, phrases."""
    fx = []
    # 1: one good feature, one poison
    fx.append((["f1", "p1"], {"r1": "f1", "n1": "kw kw p1", "n2": "kw"}, {"r1"}))
    # 2: two complementary features
    fx.append((["f1", "f2", "p1"], {"r1": "f1", "r2": "f2", "n1": "kw kw kw", "n2": "p1 p1"}, {"r1", "r2"}))
    # 3: redundant synonyms for the same doc; the minimum keeps only one
    fx.append((["f1", "g1", "h1"], {"r1": "f1 f1 g1 g1 h1 h1", "n1": "kw"}, {"r1"}))
    # 4: keyword already perfect, every candidate hurts or is neutral
    fx.append((["p1", "p2"], {"r1": "kw kw kw", "n1": "p1", "n2": "p2 kw"}, {"r1"}))
    # 5: twelve candidates, four good, eight poisoned
    texts = {f"r{i}": f"f{i} f{i} f{i}" for i in range(4)} | {f"n{i}": f"p{i} p{i} kw" for i in range(8)}
    fx.append(([f"f{i}" for i in range(4)] + [f"p{i}" for i in range(8)], texts, {f"r{i}" for i in range(4)}))
    # 6: two-word titles only match in order
    fx.append((["grand canal", "canal grand", "canal"], {"r1": "the grand canal", "n1": "canal grand canal kw kw", "n2": "kw"}, {"r1"}))
    # 7: good feature also appears in one distractor, but less often
    fx.append((["f1", "f2"], {"r1": "f1 f1 f1", "r2": "f2 f2", "n1": "f1 kw kw kw", "n2": "kw kw"}, {"r1", "r2"}))
    # 8: fifteen relevant documents spread over three features
    texts = {f"r{i:02d}": f"f{i % 3} " * 3 for i in range(15)} | {f"n{i}": "kw kw kw kw" for i in range(5)}
    fx.append((["f0", "f1", "f2", "p0"], texts | {"n9": "p0"}, {f"r{i:02d}" for i in range(15)}))
    # 9: a candidate that helps top-1 but hurts deeper ranks less than it gains
    fx.append((["f1", "f2", "p1"], {"r1": "f1 f1 f1 f1", "r2": "kw f2", "n1": "kw kw p1", "n2": "kw p1 p1"}, {"r1", "r2"}))
    # 10: no candidate retrieves anything relevant
    fx.append((["p1", "p2", "p3"], {"r1": "kw", "n1": "p1 p2 p3", "n2": "kw kw p1"}, {"r1"}))
    return fx


def test_local_search_reaches_global_optimum_on_authored_fixtures():
    for k, (titles, texts, expected) in enumerate(_authored_fixtures()):
        graph = _graph_with_titles(titles)
        candidates = set(range(1, len(titles) + 1))
        objective = _oracle(texts, titles, expected)
        optimum = max(objective(s) for n in range(len(titles) + 1) for s in itertools.combinations(sorted(candidates), n))
        for seed in range(3):
            entry = local_search(Query(f"a{k}", "kw", frozenset(expected)), {0}, candidates, build_index(texts), graph, seed)
            assert abs(entry.quality - float(optimum)) <= TOL, (k, seed, entry.chosen)


# -- 4. end-to-end mini fixture ----------------------------------------------------


@pytest.fixture(scope="module")
def mini_out(tmp_path_factory):
    out = tmp_path_factory.mktemp("acc") / "out"
    assert main(["run", "--config", str(MINI / "mini.cfg"), "--output", str(out)]) == 0
    return out


def test_end_to_end_mini_fixture(mini_out):
    graph = read_graph(MINI / "nodes.tsv", MINI / "edges.tsv")
    redirects = [a for a in graph.articles() if graph.is_redirect(a)]
    assert 50 <= len(graph.articles()) <= 70 and len(redirects) >= 5
    queries = read_queries(MINI / "queries.jsonl")
    assert len(queries) == 8
    assert sum(1 for _ in (MINI / "docs").glob("*.xml")) == 40

    cfg = read_config(MINI / "mini.cfg")
    cfg.output = mini_out
    index = PhraseIndex.load(mini_out / "index.json")
    linked, _ = load_links(cfg, graph, "acceptance")
    query_graphs = load_query_graphs(cfg, "acceptance")
    cycles = load_cycles(cfg, query_graphs, "acceptance")
    dense = [c for cs in cycles.values() for c in cs if c.length >= 4 and c.extra_edge_density > 0]
    assert len(dense) >= 3

    base = baseline(queries, linked, index, graph)
    expanded = evaluate_config(queries, linked, cycles, ExpansionConfig((2, 3, 4, 5), min_category_ratio=0.3), index, graph)
    print(f"baseline top-1 {base.precision[1]:.3f}, expanded top-1 {expanded.precision[1]:.3f}")
    assert base.precision[1] <= 0.25
    assert expanded.precision[1] >= 0.75

    with open(mini_out / "analysis" / "cycles.tsv") as f:
        rows = list(csv.DictReader((line for line in f if not line.startswith("#")), delimiter="\t"))
    hazard = [r for r in rows if set(r["titles"].split(" | ")) == {"Anthrax", "Vaccine", "Sheep"}]
    assert len(hazard) == 1
    assert float(hazard[0]["contribution"]) <= 0
    assert float(hazard[0]["category_ratio"]) < 0.3
    sheep = graph.find_article("Sheep")
    hazard_cycle = next(c for c in cycles["q03"] if sheep in c.node_seq and c.n_categories == 0)
    assert not ExpansionConfig((2, 3, 4, 5), min_category_ratio=0.3).accepts(hazard_cycle)
    q03 = next(o for o in expanded.outcomes if o.query_id == "q03")
    assert "Sheep" not in q03.features


# -- 5. structural metrics ---------------------------------------------------------


def _qg(nodes, edges, roles):
    return QueryGraph("t", graph_from(nodes, edges, validate=False), roles)


def test_structural_metrics():
    k3 = graph_from("1 article a\n2 article b\n10 category c", "1 2 link\n1 10 belongs\n2 10 belongs")
    assert tpr(k3) == 1.0
    rng = random.Random(5)
    for _ in range(20):
        n = rng.randint(2, 30)
        nodes = "\n".join(f"{i} article a{i}" for i in range(n))
        edges = "\n".join(f"{i} {rng.randrange(i)} link" for i in range(1, n))
        assert tpr(graph_from(nodes, edges, validate=False)) == 0.0

    nodes = "\n".join(f"{i} article a{i}" for i in range(1, 11))
    assert reciprocal_pair_ratio(graph_from(nodes, "1 2 link\n2 1 link", validate=False)) == 1.0
    assert reciprocal_pair_ratio(graph_from(nodes, "1 2 link", validate=False)) == 0.0
    mixed = "1 2 link\n2 1 link\n3 4 link\n4 3 link\n5 6 link\n7 8 link\n9 10 link\n10 1 link"
    assert reciprocal_pair_ratio(graph_from(nodes, mixed, validate=False)) == pytest.approx(2 / 6, abs=TOL)

    graphs = [
        _qg("1 article a\n2 article b\n10 category c", "1 2 link\n1 10 belongs\n2 10 belongs",
            {1: QUERY_ARTICLE, 2: CHOSEN_ARTICLE, 10: CATEGORY}),
        _qg("1 article a\n2 article b\n10 category c\n11 category d", "1 10 belongs\n2 11 belongs",
            {1: QUERY_ARTICLE, 2: CHOSEN_ARTICLE, 10: CATEGORY, 11: CATEGORY}),
        _qg("1 article a\n2 article b\n3 article d\n10 category c", "1 2 link\n1 10 belongs\n2 10 belongs",
            {1: QUERY_ARTICLE, 2: CHOSEN_ARTICLE, 3: CHOSEN_ARTICLE, 10: CATEGORY}),
        _qg("1 article a\n2 article b\n3 article c\n4 article d", "",
            {1: QUERY_ARTICLE, 2: QUERY_ARTICLE, 3: CHOSEN_ARTICLE, 4: CHOSEN_ARTICLE}),
    ]
    # hand-computed linear-interpolation quartiles over the four graphs
    expected = {
        "%size": (0.25, 0.4375, 0.625, 0.8125, 1.0),
        "%query nodes": (0.5, 0.875, 1.0, 1.0, 1.0),
        "%articles": (0.5, 0.625, 2 / 3, 0.75, 1.0),
        "%categories": (0.0, 0.25, 1 / 3, 0.375, 0.5),
        "expansion ratio": (1.0, 1.0, 1.5, 2.0, 2.0),
    }
    stats = component_stats(graphs)
    for metric, row in expected.items():
        assert stats[metric] == pytest.approx(row, abs=TOL), metric


# -- 6. performance ----------------------------------------------------------------


def _synthetic(rng, n_nodes, n_edges, article_share=0.4):
    articles = sorted(rng.sample(range(n_nodes), int(n_nodes * article_share)))
    art = set(articles)
    cats = [i for i in range(n_nodes) if i not in art]
    nodes = {i: Article(i, f"a{i}", f"a{i}") if i in art else Category(i, f"c{i}", f"c{i}") for i in range(n_nodes)}
    edges = set()
    while len(edges) < n_edges:
        r = rng.random()
        if r < 0.4:
            u, v = rng.sample(articles, 2)
            edges.add(Edge(u, v, EdgeKind.LINK))
        elif r < 0.85:
            edges.add(Edge(rng.choice(articles), rng.choice(cats), EdgeKind.BELONGS))
        else:
            u, v = rng.sample(cats, 2)
            edges.add(Edge(u, v, EdgeKind.INSIDE))
    return KnowledgeGraph(nodes, edges), articles


def test_performance():
    rng = random.Random(11)
    big, articles = _synthetic(rng, 10_000, 50_000)
    seeds = set(rng.sample(articles, 5))
    start = time.perf_counter()
    n_big = len(enumerate_cycles(big, seeds, 5))
    t_big = time.perf_counter() - start

    small, articles = _synthetic(rng, 250, 1250)
    seeds = set(rng.sample(articles, 10))
    start = time.perf_counter()
    n_small = len(enumerate_cycles(small, seeds, 5))
    t_small = time.perf_counter() - start
    print(f"10k/50k: {n_big} cycles in {t_big:.2f}s; 250-node: {n_small} cycles in {t_small:.2f}s")
    assert t_big < 60
    assert t_small < 1


# -- 7. determinism ----------------------------------------------------------------


def _snapshot(root):
    return {p.relative_to(root): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_determinism(tmp_path):
    cfg = str(MINI / "mini.cfg")
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", cfg, "--output", str(a)]) == 0
    first = _snapshot(a)
    assert main(["run", "--config", cfg, "--output", str(a), "--force"]) == 0
    assert _snapshot(a) == first
    assert main(["run", "--config", cfg, "--output", str(b), "--threads", "2"]) == 0
    other = {k: v for k, v in _snapshot(b).items() if k.parts[0] != ".stamps"}
    assert other == {k: v for k, v in first.items() if k.parts[0] != ".stamps"}
