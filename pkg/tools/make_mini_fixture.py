"""Write the bundled mini fixture (graph, XML corpus, queries, run config).

Eight topics, five documents each.  In every topic two distractor documents
mention the query keywords more often than the relevant ones, so the
keyword-only ranking puts a distractor first.  Each relevant document carries
one expansion feature whose article sits on a planted cycle with the keyword
articles (reciprocal links, a category triangle, dense 4- and 5-cycles).  The
anthrax topic also plants a category-free triangle through "Sheep", whose
title pulls a farm photo above the relevant document.

Usage: python tools/make_mini_fixture.py [OUT_DIR]
"""

import json
import sys
from pathlib import Path
from xml.sax.saxutils import escape

ROOT_CATEGORY = "Contents"

TOPICS = [
    {
        "qid": "q01",
        "keywords": "gondola in venice",
        "articles": {
            "Gondola": ["Venetian culture", "Tourist attractions in Venice"],
            "Venice": ["Venice"],
            "Grand Canal": ["Venice"],
            "Cannaregio": ["Venice"],
            "Bridge of Sighs": ["Venetian culture", "Tourist attractions in Venice"],
            "Palazzo Bembo": ["Venice"],
            "Murano": ["Tourist attractions in Venice"],
        },
        "redirects": {"Venezia": "Venice"},
        "links": [
            ("Venice", "Cannaregio"), ("Cannaregio", "Venice"),
            ("Venice", "Grand Canal"),
            ("Bridge of Sighs", "Gondola"),
            ("Palazzo Bembo", "Grand Canal"), ("Murano", "Venice"),
        ],
        "inside": [("Tourist attractions in Venice", "Venice")],
        "docs": [
            ("0101", False, "venice_carnival_mask.jpg", "carnival masks for sale near a gondola", "souvenir shop in venice"),
            ("0102", False, "gondola_souvenir.jpg", "a plastic gondola toy", ""),
            ("0103", True, "grand_canal_dusk.jpg", "a gondola on the grand canal", "venice italy"),
            ("0104", True, "cannaregio_morning.jpg", "quiet houses of cannaregio", "venezia"),
            ("0105", True, "bridge_of_sighs.jpg", "tourists photograph the bridge of sighs", ""),
        ],
    },
    {
        "qid": "q02",
        "keywords": "graffiti street art",
        "articles": {
            "Graffiti": ["Graffiti"],
            "Street art": ["Street art", "Urban culture"],
            "Banksy": ["Street art", "Urban culture"],
            "Stencil graffiti": ["Graffiti"],
            "Mural": ["Street art"],
            "Keith Haring": ["Urban culture"],
            "Tagging": ["Graffiti"],
        },
        "redirects": {"Graffito": "Graffiti"},
        "links": [
            ("Street art", "Mural"), ("Mural", "Street art"),
            ("Graffiti", "Stencil graffiti"),
            ("Banksy", "Street art"),
            ("Keith Haring", "Street art"), ("Tagging", "Graffiti"),
        ],
        "inside": [("Graffiti", "Street art")],
        "docs": [
            ("0201", False, "graffiti_wall.jpg", "graffiti on a train", "street art"),
            ("0202", False, "street_art_festival.jpg", "graffiti tags", ""),
            ("0203", True, "banksy_girl_with_balloon.jpg", "a banksy piece of street art", "graffiti"),
            ("0204", True, "stencil_graffiti_rat.jpg", "a stencil graffiti rat", ""),
            ("0205", True, "mural_harbour.jpg", "a colourful mural", "graffito"),
        ],
    },
    {
        "qid": "q03",
        "keywords": "anthrax vaccine",
        "articles": {
            "Anthrax": ["Anthrax"],
            "Vaccine": ["Vaccination"],
            "Bacillus anthracis": ["Anthrax"],
            "Louis Pasteur": ["Vaccination"],
            "Sheep": ["Livestock"],
            "Smallpox": ["Vaccination"],
            "Cattle": ["Livestock"],
        },
        "redirects": {"Splenic fever": "Anthrax"},
        "links": [
            ("Anthrax", "Bacillus anthracis"),
            ("Louis Pasteur", "Vaccine"),
            ("Anthrax", "Vaccine"), ("Vaccine", "Sheep"), ("Sheep", "Anthrax"),
            ("Smallpox", "Vaccine"), ("Cattle", "Sheep"),
        ],
        "inside": [],
        "docs": [
            ("0301", False, "flu_clinic.jpg", "seasonal vaccine queue", ""),
            ("0302", False, "sheep_shearing.jpg", "sheep farm shearing day", "sheep everywhere"),
            ("0303", True, "anthrax_lab.jpg", "microscope view of bacillus anthracis culture, cause of anthrax", "bacillus anthracis sample"),
            ("0304", True, "louis_pasteur_portrait.jpg", "portrait of louis pasteur", ""),
            ("0305", True, "hill_flock.jpg", "a flock of sheep grazing", "splenic fever risk"),
        ],
    },
    {
        "qid": "q04",
        "keywords": "tour de france cyclist",
        "articles": {
            "Tour de France": ["Cycle races in France"],
            "Cycling": ["Climbs in the Alps", "Cycling terminology"],
            "Alpe d'Huez": ["Cycle races in France", "Climbs in the Alps"],
            "Yellow jersey": ["Cycle races in France"],
            "Peloton": ["Cycling terminology"],
            "Giro d'Italia": ["Cycling terminology"],
            "Col du Galibier": ["Climbs in the Alps"],
        },
        "redirects": {"Cyclist": "Cycling"},
        "links": [
            ("Tour de France", "Yellow jersey"), ("Yellow jersey", "Tour de France"),
            ("Cycling", "Peloton"),
            ("Tour de France", "Cycling"), ("Alpe d'Huez", "Tour de France"),
            ("Giro d'Italia", "Cycling"), ("Col du Galibier", "Tour de France"),
        ],
        "inside": [("Climbs in the Alps", "Cycle races in France")],
        "docs": [
            ("0401", False, "cycling_commute.jpg", "cycling to work in cycling lanes", ""),
            ("0402", False, "tour_de_france_poster.jpg", "vintage poster", "cycling"),
            ("0403", True, "alpe_d_huez_climb.jpg", "riders of the tour de france climbing alpe d'huez", "cycling"),
            ("0404", True, "yellow_jersey.jpg", "the yellow jersey", ""),
            ("0405", True, "peloton_sprint.jpg", "the peloton at full speed", ""),
        ],
    },
    {
        "qid": "q05",
        "keywords": "northern lights iceland",
        "articles": {
            "Aurora": ["Space weather"],
            "Iceland": ["Landmarks of Iceland", "Tourism in Iceland"],
            "Reykjavik": ["Tourism in Iceland"],
            "Geomagnetic storm": ["Space weather"],
            "Kirkjufell": ["Landmarks of Iceland", "Tourism in Iceland"],
            "Solar wind": ["Space weather"],
            "Geysir": ["Landmarks of Iceland"],
        },
        "redirects": {"Northern lights": "Aurora"},
        "links": [
            ("Iceland", "Reykjavik"), ("Reykjavik", "Iceland"),
            ("Aurora", "Geomagnetic storm"),
            ("Kirkjufell", "Iceland"),
            ("Solar wind", "Aurora"), ("Geysir", "Iceland"),
        ],
        "inside": [("Landmarks of Iceland", "Tourism in Iceland")],
        "docs": [
            ("0501", False, "iceland_map.jpg", "road map of iceland", "iceland"),
            ("0502", False, "aurora_shop.jpg", "aurora brand jackets", ""),
            ("0503", True, "reykjavik_night.jpg", "the aurora over reykjavik, iceland", "northern lights"),
            ("0504", True, "geomagnetic_storm.jpg", "a strong geomagnetic storm", ""),
            ("0505", True, "kirkjufell_mountain.jpg", "kirkjufell at sunrise", ""),
        ],
    },
    {
        "qid": "q06",
        "keywords": "sushi restaurant tokyo",
        "articles": {
            "Sushi": ["Japanese cuisine", "Foods of Japan"],
            "Tokyo": ["Tokyo"],
            "Wasabi": ["Japanese cuisine", "Foods of Japan"],
            "Tsukiji Market": ["Tokyo"],
            "Nigiri": ["Japanese cuisine"],
            "Ramen": ["Foods of Japan"],
            "Shibuya": ["Tokyo"],
        },
        "redirects": {"Nigirizushi": "Nigiri"},
        "links": [
            ("Sushi", "Nigiri"), ("Nigiri", "Sushi"),
            ("Tokyo", "Tsukiji Market"),
            ("Wasabi", "Sushi"),
            ("Ramen", "Tokyo"), ("Shibuya", "Tokyo"),
        ],
        "inside": [("Foods of Japan", "Japanese cuisine")],
        "docs": [
            ("0601", False, "tokyo_skyline.jpg", "tokyo tower at night", "tokyo"),
            ("0602", False, "sushi_kit.jpg", "home sushi kit", ""),
            ("0603", True, "wasabi_plate.jpg", "fresh wasabi with sushi", "restaurant in tokyo"),
            ("0604", True, "tsukiji_market_tuna.jpg", "tuna auction at tsukiji market", ""),
            ("0605", True, "nigiri_set.jpg", "salmon nigiri", "nigirizushi"),
        ],
    },
    {
        "qid": "q07",
        "keywords": "lighthouse storm coast",
        "articles": {
            "Lighthouse": ["Navigational aids", "Lighthouses of Canada", "Nova Scotia landmarks"],
            "Lighthouse keeper": ["Navigational aids"],
            "Fresnel lens": ["Navigational aids"],
            "Peggys Cove": ["Lighthouses of Canada", "Nova Scotia landmarks"],
            "Cape Hatteras": ["Lighthouses of Canada"],
            "Foghorn": ["Navigational aids"],
        },
        "redirects": {"Pharos": "Lighthouse"},
        "links": [
            ("Lighthouse", "Lighthouse keeper"), ("Lighthouse keeper", "Lighthouse"),
            ("Lighthouse", "Fresnel lens"),
            ("Peggys Cove", "Lighthouse"),
            ("Foghorn", "Lighthouse"),
        ],
        "inside": [("Lighthouses of Canada", "Navigational aids")],
        "docs": [
            ("0701", False, "lighthouse_lamp_museum.jpg", "old lighthouse lamp", "lighthouse"),
            ("0702", False, "lighthouse_model.jpg", "toy lighthouse", ""),
            ("0703", True, "lighthouse_keeper.jpg", "the lighthouse keeper climbs the stairs", ""),
            ("0704", True, "fresnel_lens.jpg", "a giant fresnel lens", "pharos"),
            ("0705", True, "peggys_cove.jpg", "dawn at peggys cove", ""),
        ],
    },
    {
        "qid": "q08",
        "keywords": "volcano eruption hawaii",
        "articles": {
            "Volcano": ["Volcanic landforms"],
            "Hawaii": ["Geography of Hawaii"],
            "Kilauea": ["Volcanic landforms", "Geography of Hawaii"],
            "Lava": ["Volcanic landforms"],
            "Mauna Loa": ["Geography of Hawaii"],
            "Mount St. Helens": ["Volcanic landforms"],
            "Honolulu": ["Pacific islands"],
        },
        "redirects": {"Kilauea volcano": "Kilauea"},
        "links": [
            ("Volcano", "Lava"), ("Lava", "Volcano"),
            ("Hawaii", "Mauna Loa"),
            ("Hawaii", "Volcano"), ("Kilauea", "Hawaii"),
            ("Mount St. Helens", "Volcano"), ("Honolulu", "Hawaii"),
        ],
        "inside": [("Geography of Hawaii", "Pacific islands")],
        "docs": [
            ("0801", False, "volcano_diagram.jpg", "volcano cross section", "school volcano project"),
            ("0802", False, "hawaii_beach.jpg", "hawaii surf", ""),
            ("0803", True, "kilauea_eruption.jpg", "kilauea erupting on the big island of hawaii", "volcano"),
            ("0804", True, "lava_flow.jpg", "a river of lava", ""),
            ("0805", True, "mauna_loa.jpg", "snow on mauna loa", ""),
        ],
    },
]

GERMAN = {
    "0103": "eine Gondel auf dem Kanal",
    "0303": "Mikroskopaufnahme",
    "0503": "Polarlicht",
}


def build(out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "docs").mkdir(exist_ok=True)
    ids: dict[tuple[str, str], int] = {}
    nodes: list[tuple[int, str, str]] = []

    def node(kind: str, title: str) -> int:
        key = ("category" if kind == "category" else "article", title)
        if key not in ids:
            ids[key] = len(nodes) + 1
            nodes.append((ids[key], kind, title))
        return ids[key]

    edges: list[tuple[int, int, str]] = []
    root = node("category", ROOT_CATEGORY)
    for topic in TOPICS:
        for title, cats in topic["articles"].items():
            a = node("article", title)
            for c in cats:
                edges.append((a, node("category", c), "belongs"))
        for src, dst in topic["links"]:
            edges.append((node("article", src), node("article", dst), "link"))
        for src, dst in topic["redirects"].items():
            edges.append((node("redirect", src), node("article", dst), "redirect"))
        for src, dst in topic["inside"]:
            edges.append((node("category", src), node("category", dst), "inside"))
    for node_id, kind, _ in nodes:
        if kind == "category" and node_id != root:
            if not any(s == node_id and k == "inside" for s, _, k in edges):
                edges.append((node_id, root, "inside"))

    with open(out / "nodes.tsv", "w", encoding="utf-8", newline="\n") as f:
        for node_id, kind, title in nodes:
            f.write(f"{node_id}\t{kind}\t{title}\n")
    with open(out / "edges.tsv", "w", encoding="utf-8", newline="\n") as f:
        for src, dst, kind in sorted(set(edges)):
            f.write(f"{src}\t{dst}\t{kind}\n")

    with open(out / "queries.jsonl", "w", encoding="utf-8", newline="\n") as f:
        for topic in TOPICS:
            expected = [d[0] for d in topic["docs"] if d[1]]
            f.write(json.dumps({"query_id": topic["qid"], "keywords": topic["keywords"], "expected_docs": expected}) + "\n")

    for topic in TOPICS:
        for doc_id, _, name, english, comment in topic["docs"]:
            parts = [f'<image id="{doc_id}" file="images/{doc_id}.jpg">', f"  <name>{escape(name)}</name>"]
            parts.append('  <text xml:lang="en">')
            parts.append(f"    <description>{escape(english)}</description>")
            parts.append("  </text>")
            if doc_id in GERMAN:
                parts.append('  <text xml:lang="de">')
                parts.append(f"    <description>{escape(GERMAN[doc_id])}</description>")
                parts.append("  </text>")
            if comment:
                parts.append(f"  <comment>{escape(comment)}</comment>")
            parts.append("  <license>CC-BY-SA</license>")
            parts.append("</image>")
            (out / "docs" / f"{doc_id}.xml").write_text("\n".join(parts) + "\n", encoding="utf-8")

    (out / "mini.cfg").write_text(
        "# bundled mini fixture\n"
        "nodes = nodes.tsv\n"
        "edges = edges.tsv\n"
        "corpus = docs\n"
        "queries = queries.jsonl\n"
        "rng_seed = 42\n"
        "max_len = 5\n"
        "lengths = 2;3;4;5;2,3;2,3,4;2,3,4,5\n"
        "min_category_ratio = 0.3\n"
        "min_density = 0\n"
        "output = out\n",
        encoding="utf-8",
    )


if __name__ == "__main__":
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "src" / "cyclex" / "data" / "mini"
    build(target)
    print(f"wrote fixture to {target}")
