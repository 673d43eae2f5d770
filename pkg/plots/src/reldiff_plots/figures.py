"""Render the transition-kernel comparison figure and histogram overlays.

The input contract is the CSV layout written by the reldiff CLI:

  figure1.csv             dtau_product, alpha, phi_rel, phi_nonrel
  equilibrium_density.csv alpha, density_mc, density_analytic

Values are plotted exactly as read; no resampling or smoothing.
"""

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


class PlotInputError(Exception):
    """Missing or malformed input CSV."""


@dataclass
class PlotSpec:
    source: Path
    output: Path
    y_scale: str = "log"
    x_label: str = "alpha"
    y_label: str = ""
    title: Optional[str] = None
    dpi: int = 150
    extra: dict = field(default_factory=dict)


def _read_csv(path, expected_header):
    path = Path(path)
    if not path.exists():
        raise PlotInputError(f"input file {path} does not exist")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PlotInputError(f"{path} is empty") from None
        if header != expected_header:
            raise PlotInputError(f"{path}: expected header {expected_header}, found {header}")
        rows = [row for row in reader if row]
    if not rows:
        raise PlotInputError(f"{path} carries a header but no data rows")
    try:
        data = np.array([[float(cell) for cell in row] for row in rows])
    except ValueError as exc:
        raise PlotInputError(f"{path}: non-numeric cell ({exc})") from None
    if data.shape[1] != len(expected_header):
        raise PlotInputError(f"{path}: ragged rows")
    return data


def read_figure1_csv(path):
    """Parse figure1.csv into {dtau_product: (alpha, phi_rel, phi_nonrel)}."""
    data = _read_csv(path, ["dtau_product", "alpha", "phi_rel", "phi_nonrel"])
    curves = {}
    for t in np.unique(data[:, 0]):
        block = data[data[:, 0] == t]
        curves[float(t)] = (block[:, 1], block[:, 2], block[:, 3])
    return curves


def render_figure1(spec):
    """Kernel comparison: solid thick relativistic, dotted thin flat-space curves."""
    curves = read_figure1_csv(spec.source)
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for i, (t, (alpha, rel, non)) in enumerate(sorted(curves.items())):
        color = colors[i % len(colors)]
        ax.plot(alpha, rel, "-", lw=2.2, color=color, label=f"relativistic, Dtau = {t:g}")
        ax.plot(alpha, non, ":", lw=1.1, color=color, label=f"flat space, Dtau = {t:g}")
    if spec.y_scale == "log":
        ax.set_yscale("log")
        low = max(min(float(np.min(r[r > 0])) for _, r, _ in curves.values() if np.any(r > 0)), 1e-30)
        ax.set_ylim(bottom=max(low, 1e-12))
    ax.set_xlabel(spec.x_label)
    ax.set_ylabel(spec.y_label or "transition density")
    if spec.title:
        ax.set_title(spec.title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=spec.dpi)
    plt.close(fig)
    return out


def read_overlay_csv(path):
    """Parse equilibrium_density.csv into (alpha, density_mc, density_analytic)."""
    data = _read_csv(path, ["alpha", "density_mc", "density_analytic"])
    return data[:, 0], data[:, 1], data[:, 2]


def render_overlay(spec):
    """Monte Carlo histogram against the analytic equilibrium density."""
    alpha, mc, exact = read_overlay_csv(spec.source)
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    width = np.min(np.diff(alpha)) if len(alpha) > 1 else 0.1
    ax.bar(alpha, mc, width=width * 0.96, alpha=0.45, label="Monte Carlo")
    ax.plot(alpha, exact, "k-", lw=1.8, label="analytic")
    if spec.y_scale == "log":
        ax.set_yscale("log")
    ax.set_xlabel(spec.x_label)
    ax.set_ylabel(spec.y_label or "density")
    if spec.title:
        ax.set_title(spec.title)
    ax.legend(fontsize=9)
    fig.tight_layout()
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=spec.dpi)
    plt.close(fig)
    return out
