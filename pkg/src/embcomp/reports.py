"""Report emitters over result JSONs: table, compression pareto, scaling curves.

Each emitter produces a CSV (the canonical output) and, when asked, a PNG
figure rendered next to it. Table cells are percentages with two decimals
("83.85"); the best value per column is bolded, the second best underlined,
and a trailing ``*`` marks cells whose one-sided test against the identity
baseline fired.
"""

import csv
import glob as globlib
import json
from dataclasses import dataclass


@dataclass
class ResultDoc:
    """One loaded result JSON."""

    label: str
    corpus_size: int
    ratio: float
    dataset: str
    aggregate: dict[str, float]
    significance: dict[str, dict]

    def significant(self, metric: str) -> bool:
        entry = self.significance.get(metric)
        return bool(entry and entry.get("significant"))


def load_results(pattern: str) -> list[ResultDoc]:
    """Load every result JSON matching a glob pattern."""
    paths = sorted(globlib.glob(pattern))
    if not paths:
        raise ValueError(f"no result files match {pattern!r}")
    docs = []
    for p in paths:
        with open(p, encoding="utf-8") as f:
            d = json.load(f)
        meta = d["metadata"]
        docs.append(
            ResultDoc(
                label=meta["codec_label"],
                corpus_size=int(meta["corpus_size"]),
                ratio=float(meta["compression_ratio"]),
                dataset=str(meta.get("dataset", "")),
                aggregate={k: float(v) for k, v in d["aggregate"].items()},
                significance=d.get("significance", {}),
            )
        )
    return docs


def _fmt_pct(value: float) -> str:
    return f"{100.0 * value:.2f}"


def _codec_order(docs: list[ResultDoc]) -> list[str]:
    """identity first, then ascending compression ratio, then label."""
    seen: dict[str, float] = {}
    for d in docs:
        seen.setdefault(d.label, d.ratio)
    return sorted(seen, key=lambda l: (l != "identity", seen[l], l))


def report_table(
    docs: list[ResultDoc], metric: str
) -> tuple[str, list[dict]]:
    """Codec x corpus-size table for one metric.

    Returns (rendered text table, long-format csv rows).
    """
    sizes = sorted({d.corpus_size for d in docs})
    labels = _codec_order(docs)
    cells: dict[tuple[str, int], ResultDoc] = {}
    for d in docs:
        if metric not in d.aggregate:
            raise ValueError(f"metric {metric!r} missing from {d.label}/{d.corpus_size}")
        cells[(d.label, d.corpus_size)] = d

    best: dict[int, float] = {}
    second: dict[int, float] = {}
    for s in sizes:
        vals = sorted(
            {d.aggregate[metric] for (l, sz), d in cells.items() if sz == s},
            reverse=True,
        )
        if vals:
            best[s] = vals[0]
        if len(vals) > 1:
            second[s] = vals[1]

    csv_rows: list[dict] = []
    text_rows: list[list[str]] = []
    header = ["codec"] + [str(s) for s in sizes]
    for label in labels:
        row = [label]
        for s in sizes:
            doc = cells.get((label, s))
            if doc is None:
                row.append("-")
                continue
            v = doc.aggregate[metric]
            sig = doc.significant(metric)
            cell = _fmt_pct(v) + ("*" if sig else "")
            is_best = v == best.get(s)
            is_second = v == second.get(s)
            if is_best:
                cell = f"**{cell}**"
            elif is_second:
                cell = f"_{cell}_"
            row.append(cell)
            csv_rows.append(
                {
                    "codec": label,
                    "corpus_size": s,
                    "metric": metric,
                    "value": v,
                    "value_pct": _fmt_pct(v),
                    "significant": sig,
                    "best": is_best,
                    "second_best": is_second,
                }
            )
        text_rows.append(row)

    widths = [max(len(r[i]) for r in [header] + text_rows) for i in range(len(header))]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(header, widths)),
        "  ".join("-" * w for w in widths),
    ]
    for row in text_rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
    return "\n".join(lines) + "\n", csv_rows


def pareto_rows(docs: list[ResultDoc], metric: str) -> list[dict]:
    """One row per codec: compression ratio vs mean metric across result sets."""
    by_label: dict[str, list[ResultDoc]] = {}
    for d in docs:
        by_label.setdefault(d.label, []).append(d)
    rows = []
    for label, group in by_label.items():
        vals = [g.aggregate[metric] for g in group if metric in g.aggregate]
        if not vals:
            continue
        rows.append(
            {
                "codec": label,
                "compression_ratio": group[0].ratio,
                metric: sum(vals) / len(vals),
            }
        )
    rows.sort(key=lambda r: (r["compression_ratio"], -r[metric], r["codec"]))
    return rows


def scaling_rows(docs: list[ResultDoc], metric: str) -> list[dict]:
    """(codec, corpus_size) rows, sizes ascending; fails with fewer than 2 sizes."""
    sizes = sorted({d.corpus_size for d in docs})
    if len(sizes) < 2:
        raise ValueError(f"scaling needs results spanning >= 2 corpus sizes, got {sizes}")
    groups: dict[tuple[str, int], list[ResultDoc]] = {}
    for d in docs:
        groups.setdefault((d.label, d.corpus_size), []).append(d)
    rows = []
    for label in _codec_order(docs):
        for s in sizes:
            group = groups.get((label, s))
            if not group:
                continue
            vals = [g.aggregate[metric] for g in group if metric in g.aggregate]
            if not vals:
                continue
            rows.append(
                {
                    "codec": label,
                    "corpus_size": s,
                    metric: sum(vals) / len(vals),
                    "significant": any(g.significant(metric) for g in group),
                }
            )
    return rows


def write_csv(rows: list[dict], path: str) -> None:
    if not rows:
        raise ValueError("no rows to write")
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


# -- figures -------------------------------------------------------------


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_table_figure(csv_rows: list[dict], metric: str, path: str) -> None:
    """Grouped bar chart of the table: one bar group per corpus size."""
    plt = _plt()
    sizes = sorted({r["corpus_size"] for r in csv_rows})
    labels = []
    for r in csv_rows:
        if r["codec"] not in labels:
            labels.append(r["codec"])
    fig, ax = plt.subplots(figsize=(max(6.0, 0.6 * len(labels)), 4.0))
    width = 0.8 / max(1, len(sizes))
    for si, s in enumerate(sizes):
        xs, ys = [], []
        for li, label in enumerate(labels):
            match = [r for r in csv_rows if r["codec"] == label and r["corpus_size"] == s]
            if match:
                xs.append(li + si * width)
                ys.append(100.0 * match[0]["value"])
        ax.bar(xs, ys, width=width, label=f"n={s}")
    ax.set_xticks([i + 0.4 - width / 2 for i in range(len(labels))])
    ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=7)
    ax.set_ylabel(f"{metric} (%)")
    ax.legend(fontsize=7)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_pareto_figure(rows: list[dict], metric: str, path: str) -> None:
    """Metric vs compression ratio scatter with ratio-grid guides."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for guide in (4, 8, 16, 32):
        ax.axvline(guide, color="0.85", linewidth=6, zorder=0)
    xs = [r["compression_ratio"] for r in rows]
    ys = [100.0 * r[metric] for r in rows]
    ax.scatter(xs, ys, s=18, zorder=2)
    for r in rows:
        ax.annotate(
            r["codec"],
            (r["compression_ratio"], 100.0 * r[metric]),
            fontsize=6,
            xytext=(2, 2),
            textcoords="offset points",
        )
    ax.set_xscale("log", base=2)
    ax.set_xlabel("compression ratio")
    ax.set_ylabel(f"{metric} (%)")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_scaling_figure(rows: list[dict], metric: str, path: str) -> None:
    """Metric vs corpus size, one line per codec; stars mark significant drops."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    labels = []
    for r in rows:
        if r["codec"] not in labels:
            labels.append(r["codec"])
    for label in labels:
        pts = [r for r in rows if r["codec"] == label]
        xs = [r["corpus_size"] for r in pts]
        ys = [100.0 * r[metric] for r in pts]
        lw = 2.0 if label == "identity" else 1.2
        (line,) = ax.plot(xs, ys, marker="o", markersize=3, linewidth=lw, label=label)
        star_x = [r["corpus_size"] for r in pts if r["significant"]]
        star_y = [100.0 * r[metric] for r in pts if r["significant"]]
        if star_x:
            ax.scatter(star_x, star_y, marker="*", s=90, color=line.get_color(), zorder=3)
    ax.set_xscale("log")
    ax.set_xlabel("corpus size")
    ax.set_ylabel(f"{metric} (%)")
    ax.legend(fontsize=7, ncol=2)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
