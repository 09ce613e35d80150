"""Render bootstrap uncertainty reports to image files plus a flat CSV."""

from __future__ import annotations

import csv
import json
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def load_summary_doc(bootstrap_json, draws_bin=None):
    with open(bootstrap_json, encoding="utf-8") as fh:
        doc = json.load(fh)
    draws = None
    if draws_bin is not None:
        meta = doc.get("draws_file")
        if meta is None:
            raise ValueError("bootstrap.json does not reference a draws file")
        draws = np.fromfile(draws_bin, dtype=meta["dtype"]).reshape(meta["shape"])
    return doc, draws


def render_histogram_grid(doc, draws, out_png, bins: int = 40) -> None:
    """One panel per query: rows are lags, columns are target variables.

    Dashed vertical lines mark the percentile interval, the solid line
    marks zero.
    """
    queries = doc["queries"]
    lags = sorted({q["lag"] for q in queries})
    targets = []
    for q in queries:
        name = q["target"][0]
        if name not in targets:
            targets.append(name)
    nrows, ncols = len(lags), len(targets)
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(3.2 * ncols, 2.6 * nrows), squeeze=False, sharey=False
    )
    for i, q in enumerate(queries):
        r = lags.index(q["lag"])
        c = targets.index(q["target"][0])
        ax = axes[r][c]
        if draws is not None:
            ax.hist(draws[:, i], bins=bins, color="#4878a8", alpha=0.85)
        ax.axvline(q["ci_low"], color="black", linestyle="--", linewidth=1)
        ax.axvline(q["ci_high"], color="black", linestyle="--", linewidth=1)
        ax.axvline(0.0, color="black", linestyle="-", linewidth=1)
        if r == 0:
            ax.set_title(q["target"][0], fontsize=11)
        if c == 0:
            ax.set_ylabel(f"lag {q['lag']}", fontsize=10)
        ax.tick_params(labelsize=8)
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)


def write_summary_csv(doc, out_csv) -> None:
    with open(out_csv, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["source", "source_time", "target", "target_time", "lag", "point", "ci_low", "ci_high", "includes_zero"]
        )
        for q in doc["queries"]:
            writer.writerow(
                [
                    q["source"][0],
                    q["source"][1],
                    q["target"][0],
                    q["target"][1],
                    q["lag"],
                    repr(q["point"]),
                    repr(q["ci_low"]),
                    repr(q["ci_high"]),
                    int(q["includes_zero"]),
                ]
            )


def render_report(bootstrap_json, out_dir, draws_bin=None, bins: int = 40) -> list[str]:
    """Figure plus delimited summary; returns the written paths."""
    os.makedirs(out_dir, exist_ok=True)
    doc, draws = load_summary_doc(bootstrap_json, draws_bin)
    png = os.path.join(out_dir, "effect_distributions.png")
    render_histogram_grid(doc, draws, png, bins=bins)
    table = os.path.join(out_dir, "effects_summary.csv")
    write_summary_csv(doc, table)
    return [png, table]
