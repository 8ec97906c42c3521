"""Markdown tables and plot-ready CSV series built from the analysis artifacts."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Sequence

from .groundtruth import COMPONENT_METRICS, QueryGraph, component_stats
from .stats import five_number, fmt

NO_CYCLES = "no cycles"
QUARTILE_HEADER = ("", "min", "25%", "50%", "75%", "max")


class ReportError(FileNotFoundError):
    pass


def _require(path: Path) -> Path:
    if not path.exists():
        raise ReportError(f"missing artifact {path}")
    return path


FIGURES = {
    "contribution_by_length": ("mean_contribution", "mean_contribution_by_query"),
    "cycle_counts_by_length": ("cycles", "cycles_per_query"),
    "category_ratio_by_length": ("mean_category_ratio",),
    "density_by_length": ("mean_density",),
}


def _read_rows(path: Path, delimiter: str = ",") -> list[dict[str, str]]:
    with open(path, encoding="utf-8") as f:
        lines = [line for line in f if not line.startswith("#")]
    return list(csv.DictReader(lines, delimiter=delimiter))


def markdown_table(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    lines = ["| " + " | ".join(map(str, header)) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(map(str, r)) + " |" for r in rows]
    return "\n".join(lines) + "\n"


def _csv(header: Sequence[str], rows: Sequence[Sequence], comment: str) -> str:
    buf = io.StringIO()
    buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def precision_table(entries: Sequence[dict], rs: Sequence[int]) -> str:
    """Quartiles of the ground-truth per-r precision across queries."""
    if not entries:
        return "No ground truth.\n"
    rows = []
    for r in rs:
        values = [float(e["per_r_precision"][str(r)]) for e in entries]
        rows.append((f"top-{r}", *[fmt(v) for v in five_number(values)]))
    return markdown_table(QUARTILE_HEADER, rows)


def component_table(query_graphs: Sequence[QueryGraph]) -> str:
    """Quartiles of the largest-component metrics across query graphs."""
    if not query_graphs:
        return "No query graphs.\n"
    stats = component_stats(query_graphs)
    rows = [(m, *[fmt(v) for v in stats[m]]) for m in COMPONENT_METRICS]
    return markdown_table(QUARTILE_HEADER, rows)


def write_report(cfg, run_dir: Path, report_dir: Path) -> None:
    """Write table2/3/4 markdown, report.md and the figure series into ``report_dir``."""
    comment = f"rng_seed: {cfg.rng_seed}"
    gt_dir = _require(run_dir / "ground_truth")
    entries = []
    for p in sorted(gt_dir.glob("*.json")):
        with open(p, encoding="utf-8") as f:
            entries.append(json.load(f))
    table2 = precision_table(entries, cfg.r_values)

    qg_dir = _require(run_dir / "query_graphs")
    table3 = component_table([QueryGraph.read(p) for p in sorted(qg_dir.iterdir()) if p.is_dir()])

    agg = _read_rows(_require(run_dir / "analysis" / "aggregates.csv"))
    agg_cols = list(agg[0].keys()) if agg else ["length"]
    cycle_table = markdown_table(agg_cols, [[r[c] for c in agg_cols] for r in agg])

    t4 = _read_rows(_require(run_dir / "table4.csv"))
    t4_cols = list(t4[0].keys()) if t4 else ["configuration"]
    table4 = markdown_table(t4_cols, [[r[c] for c in t4_cols] for r in t4])

    _write(report_dir / "table2.md", table2)
    _write(report_dir / "table3.md", table3)
    _write(report_dir / "table4.md", table4)
    _write(report_dir / "cycles_by_length.md", cycle_table)

    for name, cols in FIGURES.items():
        rows = [(r["length"], *[r[c] for c in cols]) for r in agg]
        _write(report_dir / "figs" / f"{name}.csv", _csv(("length", *cols), rows, comment))

    cycles = _read_rows(_require(run_dir / "analysis" / "cycles.tsv"), "\t")
    scatter = [(r["query_id"], r["length"], r["density"], r["contribution"]) for r in cycles]
    text = _csv(("query_id", "length", "density", "contribution"), scatter, comment)
    if not scatter:
        text += f"# {NO_CYCLES}\n"
    _write(report_dir / "figs" / "density_vs_contribution.csv", text)

    body = [
        "# Cycle analysis report",
        "",
        f"Random seed: {cfg.rng_seed}. Maximum cycle length: {cfg.max_len}. "
        f"Filters: min category ratio {cfg.min_category_ratio}, min density {cfg.min_density}.",
        "",
        "## Precision of the ground truth",
        "",
        table2,
        "## Largest connected component of the query graphs",
        "",
        table3,
        "## Cycles by length",
        "",
        cycle_table if any(r["cycles"] != "0" for r in agg) else NO_CYCLES + "\n",
        "## Precision by expansion configuration",
        "",
        table4,
    ]
    _write(report_dir / "report.md", "\n".join(body))
