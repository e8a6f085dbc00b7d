"""Figure rendering for experiment reports (headless matplotlib)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .experiments import ExperimentReport  # noqa: E402


def render_histogram(report: ExperimentReport, path) -> None:
    buckets = [b for b, _ in sorted(report.histogram)]
    counts = [c for _, c in sorted(report.histogram)]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar(buckets, counts, width=0.9, color="#30618c")
    ax.set_xlabel("bucket")
    ax.set_ylabel("count")
    ax.set_title(f"{report.experiment} — {report.scheme}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_cdf(report: ExperimentReport, path) -> None:
    values = sorted(report.run_values)
    n = len(values)
    fractions = [(i + 1) / n for i in range(n)]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.step(values, fractions, where="post", color="#8c3030")
    ax.set_xlabel("per-run value")
    ax.set_ylabel("cumulative fraction of runs")
    ax.set_ylim(0, 1.02)
    ax.set_title(f"{report.experiment} — {report.scheme} ({n} runs)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
