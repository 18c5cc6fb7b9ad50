"""Readers for the experiment runner's output files.

Pure views: everything is parsed with the standard library and returned as
plain lists/dicts, no numerics recomputed.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path


class InputError(Exception):
    """Missing or malformed input files."""


def read_summaries(input_dir: str | Path) -> list[dict]:
    """All summary_*.json documents in a run directory, sorted by filename."""
    paths = sorted(Path(input_dir).glob("summary_*.json"))
    if not paths:
        raise InputError(f"no summary_*.json files in {input_dir}")
    out = []
    for p in paths:
        try:
            with open(p, "r", encoding="utf-8") as fh:
                out.append(json.load(fh))
        except json.JSONDecodeError as exc:
            raise InputError(f"{p} is not valid JSON: {exc}") from exc
    return out


def read_trajectory(input_dir: str | Path, name: str) -> tuple[list[int], list[float], list[float]]:
    """(iterations, global_loss, log10_error) columns of one trajectory CSV."""
    path = Path(input_dir) / name
    if not path.exists():
        raise InputError(f"trajectory file missing: {path}")
    iters, losses, logs = [], [], []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["iteration", "global_loss", "log10_error"]:
            raise InputError(f"{path} has unexpected columns {reader.fieldnames}")
        for row in reader:
            iters.append(int(row["iteration"]))
            losses.append(float(row["global_loss"]))
            logs.append(float(row["log10_error"]))
    if not iters:
        raise InputError(f"{path} contains no rows")
    return iters, losses, logs


def read_bounds(input_dir: str | Path) -> dict:
    """The bounds.json report emitted by the bounds subcommand."""
    path = Path(input_dir) / "bounds.json"
    if not path.exists():
        raise InputError(f"bounds report missing: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
