"""Rendering of run reports: delimited history tables and figures.

The JSON report is the machine contract; these helpers turn it into a CSV
and a PNG for eyeballing a run or a sweep. matplotlib is imported lazily
with the Agg backend so the CLI stays headless-safe.
"""

from __future__ import annotations

import csv
from pathlib import Path

from .evolution import GenerationStats


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def write_history_csv(history: list[GenerationStats], path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["generation", "pool_size", "best_fitness", "mean_fitness", "wall_time_s"])
        for g in history:
            writer.writerow([g.generation, g.pool_size, g.best_fitness, g.mean_fitness, g.wall_time_s])
    return path


def render_history_figure(history: list[GenerationStats], path, title: str = "") -> Path:
    path = Path(path)
    plt = _pyplot()
    gens = [g.generation for g in history]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(gens, [g.best_fitness for g in history], marker="o", label="best")
    ax.plot(gens, [g.mean_fitness for g in history], marker=".", linestyle="--", label="mean")
    ax.set_xlabel("generation")
    ax.set_ylabel("fitness (dev accuracy)")
    ax.set_ylim(-0.02, 1.02)
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def write_sweep_csv(param: str, runs: list[dict], path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([param, "seed", "best_fitness"])
        for run in runs:
            writer.writerow([run["value"], run["seed"], run["best_fitness"]])
    return path


def render_sweep_figure(param: str, runs: list[dict], path) -> Path:
    path = Path(path)
    plt = _pyplot()
    values = [run["value"] for run in runs]
    best = [run["best_fitness"] for run in runs]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(values, best, marker="o")
    ax.set_xlabel(param)
    ax.set_ylabel("best fitness")
    ax.set_ylim(-0.02, 1.02)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
