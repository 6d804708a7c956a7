"""Figures and CSV tables written next to certificates."""
from __future__ import annotations

import csv
import math
import os
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_META = {"Software": None}


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(row)
    return path


def census_bar(counts: dict[int, int], k: int, modulus: int, N: int, path: str) -> str:
    fig, ax = plt.subplots(figsize=(max(4.0, 0.3 * modulus + 2), 3.2))
    res = sorted(counts)
    ax.bar(res, [counts[r] for r in res], color="#4477aa")
    ax.set_xlabel(f"b_{k}(n) mod {modulus}")
    ax.set_ylabel("count")
    ax.set_title(f"residues of b_{k}(n), 0 <= n < {N}")
    if modulus <= 30:
        ax.set_xticks(res)
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)
    return path


def bk_growth(values: Sequence[int], k: int, path: str) -> str:
    """``log10 b_k(n)`` against ``n`` (reduced tables are plotted as residues)."""
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ns = range(len(values))
    big = any(int(v) > 10**6 for v in values)
    if big:
        ys = [math.log10(int(v)) if int(v) > 0 else float("nan") for v in values]
        ax.set_ylabel(f"log10 b_{k}(n)")
    else:
        ys = [int(v) for v in values]
        ax.set_ylabel(f"b_{k}(n)")
    ax.plot(list(ns), ys, lw=0.8, color="#aa3377")
    ax.set_xlabel("n")
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)
    return path
