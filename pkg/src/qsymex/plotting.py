"""Figures for benchmark and timing reports (written to files, never shown)."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_bench(rows: Sequence[dict], path: str | Path) -> Path:
    """Two panels: compile time and sampling throughput against qubit count.

    ``rows`` carry ``n``, ``init_ms``, ``samples_per_sec`` and optionally
    ``baseline_per_sec`` (single-shot concrete re-simulation).
    """
    ns = [r["n"] for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    ax1.plot(ns, [r["init_ms"] for r in rows], "o-", color="tab:blue")
    ax1.set_xlabel("qubits")
    ax1.set_ylabel("compile time [ms]")
    ax1.set_title("symbolic compile")
    ax1.grid(alpha=0.3)
    ax2.plot(ns, [r["samples_per_sec"] for r in rows], "o-", color="tab:green", label="symbolic sampler")
    if all("baseline_per_sec" in r for r in rows):
        ax2.plot(ns, [r["baseline_per_sec"] for r in rows], "s--", color="tab:red",
                 label="concrete re-simulation")
    ax2.set_yscale("log")
    ax2.set_xlabel("qubits")
    ax2.set_ylabel("shots / s")
    ax2.set_title("sampling throughput")
    ax2.grid(alpha=0.3, which="both")
    ax2.legend(fontsize=8)
    return _save(fig, path)


def plot_stage_times(label: str, timings_ms: dict, path: str | Path) -> Path:
    """Horizontal bar of the time spent per verification stage."""
    stages = list(timings_ms)
    vals = [timings_ms[s] for s in stages]
    fig, ax = plt.subplots(figsize=(6, 1.8 + 0.3 * len(stages)))
    colors = ["tab:blue", "tab:orange", "tab:green", "tab:gray"]
    ax.barh(stages, vals, color=colors[: len(stages)])
    ax.set_xlabel("time [ms]")
    ax.set_title(label)
    ax.grid(alpha=0.3, axis="x")
    return _save(fig, path)
