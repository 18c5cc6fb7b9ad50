"""Figure builders over the runner's CSV/JSON outputs.

Matplotlib only; every number plotted comes straight out of the files.
plot_convergence draws log10 error against iteration, one curve per
(alpha, momentum) variant (plain descent dashed, momentum dash-dotted)
plus a solid horizontal line at each alpha's exact-solution error level;
plot_kappa_scatter reproduces the conditioning view: final log10 error
against 1/kappa^2 with exact-solution markers.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .io import InputError, read_bounds, read_summaries, read_trajectory

FIGURE_KINDS = ("convergence", "kappa_scatter", "spectrum")

_VARIANT_STYLE = {"none": "--", "nesterov": "-."}


@dataclass(frozen=True)
class PlotSpec:
    """Where to read run outputs, which figure to draw, where to save it."""

    input_dir: str | Path
    kind: str
    output_path: str | Path

    def __post_init__(self) -> None:
        if self.kind not in FIGURE_KINDS:
            raise InputError(f"unknown figure kind {self.kind!r}")


def _variant_label(summary: dict) -> str:
    momentum = "momentum" if summary["momentum"] == "nesterov" else "gd"
    return f"alpha={summary['alpha']} {momentum}"


def plot_convergence(spec: PlotSpec) -> dict:
    """Convergence curves; returns what was drawn for checking/reporting."""
    summaries = read_summaries(spec.input_dir)
    fig, ax = plt.subplots(figsize=(7, 5))
    curves = []
    seen_variants = set()
    exact_by_alpha: dict[int, float] = {}
    for s in sorted(summaries, key=lambda s: (s["alpha"], s["momentum"], s["trial"])):
        variant = (s["alpha"], s["momentum"])
        exact_by_alpha[s["alpha"]] = min(
            exact_by_alpha.get(s["alpha"], float("inf")), s["log10_exact_error"]
        )
        if variant in seen_variants:
            continue
        seen_variants.add(variant)
        iters, _, logs = read_trajectory(spec.input_dir, s["trajectory_csv"])
        label = _variant_label(s)
        ax.plot(iters, logs, _VARIANT_STYLE.get(s["momentum"], "--"), label=label)
        curves.append({"label": label, "points": len(iters)})
    hlines = []
    for alpha, level in sorted(exact_by_alpha.items()):
        ax.axhline(level, linestyle="-", linewidth=1.0, color="black", alpha=0.7)
        hlines.append({"alpha": alpha, "level": level})
    ax.set_xlabel("iteration")
    ax.set_ylabel("log10 squared Frobenius error")
    ax.legend()
    fig.tight_layout()
    fig.savefig(spec.output_path)
    plt.close(fig)
    return {"curves": curves, "exact_lines": hlines, "output": str(spec.output_path)}


def plot_kappa_scatter(spec: PlotSpec) -> dict:
    """Final error against inverse squared condition number, per trial.

    A single summary still renders (one point); zero summaries raise.
    """
    summaries = read_summaries(spec.input_dir)
    xs = [s["inv_kappa_sq"] for s in summaries]
    ys = [s["log10_final_error"] for s in summaries]
    exact_ys = [s["log10_exact_error"] for s in summaries]
    fig, ax = plt.subplots(figsize=(7, 5))
    ax.scatter(xs, ys, marker="x", label="solver result")
    ax.scatter(xs, exact_ys, marker=".", label="exact solution")
    ax.set_xlabel("1 / kappa^2(V)")
    ax.set_ylabel("log10 squared Frobenius error")
    ax.legend()
    fig.tight_layout()
    fig.savefig(spec.output_path)
    plt.close(fig)
    return {
        "points": len(xs),
        "x_values": xs,
        "y_values": ys,
        "output": str(spec.output_path),
    }


def plot_spectrum(spec: PlotSpec) -> dict:
    """Singular-value profile from the bounds report."""
    report = read_bounds(spec.input_dir)
    values = report.get("spectrum", [])
    if not values:
        raise InputError("bounds report carries no spectrum")
    fig, ax = plt.subplots(figsize=(7, 5))
    ax.semilogy(range(1, len(values) + 1), values, marker=".")
    ax.set_xlabel("index")
    ax.set_ylabel("singular value")
    fig.tight_layout()
    fig.savefig(spec.output_path)
    plt.close(fig)
    return {"num_values": len(values), "output": str(spec.output_path)}


def render(spec: PlotSpec) -> dict:
    if spec.kind == "convergence":
        return plot_convergence(spec)
    if spec.kind == "kappa_scatter":
        return plot_kappa_scatter(spec)
    return plot_spectrum(spec)
