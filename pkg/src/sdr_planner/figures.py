"""Matplotlib renderings of the report tables.

Each renderer takes the already-computed report data and writes one PNG.
Styling is deliberately plain; the delimited output stays the stable
interface and these files are companions for quick inspection.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .mc_oracle import ConstantsEstimate
from .scenario_io import ReportRow, SUM_ROW, BASELINE_ROW
from .sensitivity import SweepTable

_DPI = 120


def render_sweep_figure(table: SweepTable, path: str | Path) -> Path:
    """Average and total cost against the swept parameter."""
    path = Path(path)
    fig, (ax_avg, ax_tot) = plt.subplots(1, 2, figsize=(9, 3.6))
    x = table.values
    ax_avg.plot(x, table.column("average_cost"), marker="o", color="tab:blue")
    ax_avg.set_xlabel(table.parameter.value)
    ax_avg.set_ylabel("average cost ($/order)")
    ax_tot.plot(x, table.column("total_cost"), marker="o", color="tab:orange", label="total cost ($)")
    ax_tot.plot(x, table.column("fleet_size"), marker="s", color="tab:green", label="fleet size")
    ax_tot.set_xlabel(table.parameter.value)
    ax_tot.legend(frameon=False)
    for ax in (ax_avg, ax_tot):
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def render_depot_figure(rows: list[ReportRow], path: str | Path) -> Path:
    """Per-depot fleet and cost bars (aggregate rows excluded)."""
    path = Path(path)
    depots = [r for r in rows if r.name not in (SUM_ROW, BASELINE_ROW)]
    names = [r.name for r in depots]
    fig, (ax_fleet, ax_cost) = plt.subplots(1, 2, figsize=(9, 3.6))
    ax_fleet.bar(names, [r.fleet for r in depots], color="tab:green")
    ax_fleet.set_ylabel("fleet size")
    ax_cost.bar(names, [r.total_cost for r in depots], color="tab:orange")
    ax_cost.set_ylabel("total cost ($)")
    for ax in (ax_fleet, ax_cost):
        ax.tick_params(axis="x", rotation=20)
        ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def render_validation_figure(estimate: ConstantsEstimate, path: str | Path) -> Path:
    """Histogram of per-trial integrated tour lengths with the buffer line."""
    path = Path(path)
    lengths = estimate.integrated_lengths
    mean = sum(lengths) / len(lengths)
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.hist(lengths, bins=20, color="tab:blue", alpha=0.8)
    ax.axvline(mean, color="black", linestyle="-", label="mean")
    ax.axvline(
        estimate.rho * mean,
        color="tab:red",
        linestyle="--",
        label=f"{estimate.rho:g} x mean",
    )
    ax.set_xlabel("integrated tour length (mi)")
    ax.set_ylabel("trials")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path
