"""Run-history reports: parse the per-generation log, summarize it, render
the fitness curves to a PNG and re-emit the table as CSV."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .errors import ValidationError  # noqa: E402

HISTORY_HEADER = ("generation", "best", "mean", "std")


def history_line(generation: int, best: float, mean: float, std: float) -> str:
    # repr keeps full float precision, so logs round-trip and diff cleanly
    return f"{generation}\t{best!r}\t{mean!r}\t{std!r}"


def load_history(path: str | Path) -> list[dict]:
    """Parse a history.log written by the evolve command."""
    lines = Path(path).read_text().splitlines()
    if not lines or tuple(lines[0].split("\t")) != HISTORY_HEADER:
        raise ValidationError(f"{path}: not a history log (bad header)")
    rows = []
    for ln, line in enumerate(lines[1:], start=2):
        parts = line.split("\t")
        if len(parts) != 4:
            raise ValidationError(f"{path}:{ln}: expected 4 columns")
        rows.append({
            "generation": int(parts[0]),
            "best": float(parts[1]),
            "mean": float(parts[2]),
            "std": float(parts[3]),
        })
    return rows


def summarize(history: list[dict]) -> dict:
    if not history:
        raise ValidationError("history is empty")
    return {
        "generations": len(history),
        "first_best": history[0]["best"],
        "final_best": history[-1]["best"],
        "final_mean": history[-1]["mean"],
        "final_std": history[-1]["std"],
        "best_ever": max(r["best"] for r in history),
    }


def write_history_csv(history: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=HISTORY_HEADER)
        writer.writeheader()
        writer.writerows(history)


def render_fitness_figure(history: list[dict], path: str | Path) -> None:
    generations = [r["generation"] for r in history]
    best = [r["best"] for r in history]
    mean = [r["mean"] for r in history]
    std = [r["std"] for r in history]

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(generations, best, label="best", color="tab:blue")
    ax.plot(generations, mean, label="mean", color="tab:orange")
    lo = [m - s for m, s in zip(mean, std)]
    hi = [m + s for m, s in zip(mean, std)]
    ax.fill_between(generations, lo, hi, color="tab:orange", alpha=0.2,
                    label="mean ± std")
    ax.set_xlabel("generation")
    ax.set_ylabel("fitness")
    ax.legend(loc="best")
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
