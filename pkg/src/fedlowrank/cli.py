"""Batch experiment runner.

Subcommands:
  generate  write a synthetic federation to disk (CSV shards + manifest)
  run       execute federated solves over an (alpha, rank, momentum, trial)
            grid and emit trajectory CSVs plus JSON summaries
  bounds    evaluate the closed-form bound calculators on a dataset

All outputs are functions of the master seed alone (wall-clock timing in
summaries aside); configs are JSON documents validated against the schema
shipped in fedlowrank/schemas/. Exit codes: 0 success, 2 configuration
error, 3 runtime failure.
"""

from __future__ import annotations

import json
import math
import sys
import time
from importlib import resources
from pathlib import Path

import click
import jsonschema

from . import bounds as bounds_mod
from .datagen import FederatedDataset, SyntheticSpec, generate_synthetic, partition
from .ingest import LabeledTable, center_columns, load_csv, load_libsvm, write_csv
from .linalg import singular_values
from .resampler import BoundInputs, ResamplePolicy, kappa_p_terms, m_for_probability
from .seeding import derive_seed
from .solver import RunRecord, SolverConfig, federated_solve

LOG10_FLOOR = -30.0


class ConfigError(Exception):
    """Anything wrong with the experiment configuration (exit code 2)."""


def _schema(name: str) -> dict:
    text = resources.files("fedlowrank.schemas").joinpath(name).read_text("utf-8")
    return json.loads(text)


def load_config(path: str | Path) -> dict:
    """Read and schema-validate a config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(cfg, _schema("config.schema.json"))
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config violates schema: {exc.message}") from exc
    return cfg


def _as_list(value) -> list:
    return list(value) if isinstance(value, list) else [value]


def _load_manifest(path: Path) -> FederatedDataset:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from exc
    shard_dir = path.parent
    shards = []
    for name in manifest["shards"]:
        table = load_csv(shard_dir / name, has_label_column=False)
        shards.append(table.features)
    return FederatedDataset(shards=tuple(shards), name=manifest.get("name", "manifest"))


def load_dataset(cfg: dict, master_seed: int) -> FederatedDataset:
    """Materialize the dataset described by the config block."""
    ds = cfg["dataset"]
    kind = ds["kind"]
    if kind == "synthetic":
        spec = SyntheticSpec(
            num_clients=ds["num_clients"],
            rows_per_client=ds["rows_per_client"],
            dim=ds["dim"],
            true_rank=ds["true_rank"],
            signal_values=tuple(ds["signal_values"]),
            noise_std=ds["noise_std"],
            seed=derive_seed(master_seed, "dataset"),
        )
        return generate_synthetic(spec)
    if kind == "manifest":
        return _load_manifest(Path(ds["path"]))
    if not Path(ds["path"]).exists():
        raise ConfigError(f"dataset file not found: {ds['path']}")
    if kind == "csv":
        table = load_csv(
            ds["path"],
            has_label_column=ds.get("has_label_column", False),
            delimiter=ds.get("delimiter", ","),
        )
    elif kind == "libsvm":
        table = load_libsvm(ds["path"], dim=ds["dim"])
    else:  # pragma: no cover - schema forbids
        raise ConfigError(f"unknown dataset kind {kind!r}")
    if ds.get("center", False):
        table = center_columns(table)
    return partition(
        table.features,
        table.labels,
        ds["num_clients"],
        ds["partition"],
        seed=derive_seed(master_seed, "partition"),
    )


def _resample_policy(cfg: dict, base_seed: int) -> ResamplePolicy:
    block = cfg.get("resample", {"mode": "fixed_m", "m": 1})
    mode = block["mode"]
    if mode == "fixed_m":
        return ResamplePolicy.fixed(block["m"], base_seed)
    if mode == "target_probability":
        return ResamplePolicy.for_probability(block["probability"], base_seed)
    return ResamplePolicy.until_threshold(
        block["kappa_target"], block["max_draws"], base_seed
    )


def _log10_clamped(value: float, scale: float) -> float:
    """log10 of an error, clamped to the plot floor at machine zero.

    Errors at or below 1e-16 times the data's squared Frobenius norm are
    exact recoveries up to roundoff; their digits carry no information, so
    they land on the finite floor that keeps plots drawable.
    """
    if value <= 0.0 or value <= 1e-16 * scale:
        return LOG10_FLOOR
    return max(math.log10(value), LOG10_FLOOR)


def cmd_generate(cfg: dict, out_dir: Path) -> list[Path]:
    """Write per-client CSV shards plus a manifest; deterministic in the seed."""
    ds = cfg["dataset"]
    if ds["kind"] != "synthetic":
        raise ConfigError("generate requires a synthetic dataset block")
    dataset = load_dataset(cfg, cfg["seed"])
    out_dir.mkdir(parents=True, exist_ok=True)
    shard_names = []
    written = []
    for i, shard in enumerate(dataset.shards):
        name = f"shard_{i:03d}.csv"
        write_csv(out_dir / name, LabeledTable(features=shard))
        shard_names.append(name)
        written.append(out_dir / name)
    manifest = {
        "name": "synthetic",
        "num_clients": ds["num_clients"],
        "rows_per_client": ds["rows_per_client"],
        "dim": ds["dim"],
        "true_rank": ds["true_rank"],
        "signal_values": list(ds["signal_values"]),
        "noise_std": ds["noise_std"],
        "seed": cfg["seed"],
        "partition": "row-split",
        "shards": shard_names,
    }
    manifest_path = out_dir / "manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(manifest_path)
    return written


def _write_trajectory(path: Path, losses: list[float], scale: float) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("iteration,global_loss,log10_error\n")
        for t, loss in enumerate(losses):
            fh.write(f"{t},{loss!r},{_log10_clamped(2.0 * loss, scale)!r}\n")


def _summary_dict(
    record: RunRecord, trial: int, seed: int, dataset: FederatedDataset,
    eps_min_value: float, traj_name: str, wall_time: float, scale: float,
) -> dict:
    client_flops = [
        record.ledger.client_flops.get(i, 0) for i in range(dataset.num_clients)
    ]
    return {
        "alpha": record.alpha,
        "rank": record.rank,
        "momentum": record.momentum,
        "method": record.method,
        "trial": trial,
        "seed": seed,
        "kappa_v": record.kappa_v,
        "kappa_sq": record.kappa_v**2,
        "inv_kappa_sq": record.kappa_v**-2,
        "draws": [{"seed": s, "kappa": k} for s, k in record.draws],
        "eps_min": eps_min_value,
        "final_loss": record.final_loss,
        "final_error": record.final_error,
        "log10_final_error": _log10_clamped(record.final_error, scale),
        "exact_error": record.exact_error,
        "log10_exact_error": _log10_clamped(record.exact_error, scale),
        "iterations": max(len(record.global_losses) - 1, 0),
        "num_clients": dataset.num_clients,
        "dim": dataset.dim,
        "total_rows": dataset.total_rows,
        "ledger": {
            "floats_communicated": record.ledger.floats_communicated,
            "server_flops": record.ledger.server_flops,
            "client_flops": client_flops,
            "aggregation_rounds": record.ledger.aggregation_rounds,
        },
        "trajectory_csv": traj_name,
        "wall_time_s": wall_time,
    }


def cmd_run(cfg: dict, out_dir: Path) -> list[Path]:
    """Execute the configured grid; one CSV + one JSON summary per cell."""
    master_seed = cfg["seed"]
    dataset = load_dataset(cfg, master_seed)
    spectrum = singular_values(dataset.concatenated())
    scale = float(spectrum.values @ spectrum.values)
    solver_block = dict(cfg.get("solver", {}))
    momenta = _as_list(solver_block.pop("momentum", "none"))
    out_dir.mkdir(parents=True, exist_ok=True)
    schema = _schema("summary.schema.json")

    written = []
    for alpha in _as_list(cfg["alpha"]):
        for rank in _as_list(cfg["rank"]):
            eps_min_value = bounds_mod.eps_min(spectrum, min(rank, len(spectrum)))
            for momentum in momenta:
                for trial in range(cfg.get("trials", 1)):
                    config = SolverConfig(momentum=momentum, **solver_block)
                    cell_seed = derive_seed(master_seed, "trial", trial)
                    policy = _resample_policy(cfg, cell_seed)
                    start = time.perf_counter()
                    record = federated_solve(dataset, alpha, rank, config, policy)
                    wall = time.perf_counter() - start
                    stem = f"a{alpha}_r{rank}_{momentum}_t{trial}"
                    traj_name = f"traj_{stem}.csv"
                    _write_trajectory(out_dir / traj_name, record.global_losses, scale)
                    summary = _summary_dict(
                        record, trial, cell_seed, dataset,
                        eps_min_value, traj_name, wall, scale,
                    )
                    jsonschema.validate(summary, schema)
                    summary_path = out_dir / f"summary_{stem}.json"
                    with open(summary_path, "w", encoding="utf-8") as fh:
                        json.dump(summary, fh, indent=2, sort_keys=True)
                        fh.write("\n")
                    written.extend([out_dir / traj_name, summary_path])
    return written


def cmd_bounds(cfg: dict, out_dir: Path) -> Path:
    """Evaluate every closed-form bound on the configured dataset."""
    master_seed = cfg["seed"]
    dataset = load_dataset(cfg, master_seed)
    spectrum = singular_values(dataset.concatenated())
    block = cfg.get("bounds", {})
    p_kappa = block.get("p_kappa", 1.0 / 6.0)
    p_error = block.get("p_error", 0.25)
    target_p = block.get("target_probability", 0.999)

    report: dict = {
        "spectrum": spectrum.values.tolist(),
        "num_clients": dataset.num_clients,
        "dim": dataset.dim,
        "total_rows": dataset.total_rows,
        "m_for_probability": {"P": target_p, "m": m_for_probability(target_p)},
        "cells": [],
    }
    for alpha in _as_list(cfg["alpha"]):
        for rank in _as_list(cfg["rank"]):
            r_eff = min(rank, len(spectrum))
            cell: dict = {
                "alpha": alpha,
                "rank": rank,
                "eps_min": bounds_mod.eps_min(spectrum, r_eff),
            }
            inputs = BoundInputs(
                spectrum=spectrum, r=r_eff, alpha=alpha, d=dataset.dim, p=p_kappa
            )
            kappa_block: dict = {"p": p_kappa}
            for variant in ("appendix", "main_text"):
                head, tail = kappa_p_terms(inputs, variant)
                kappa_block[variant] = {
                    "kappa_p_sq": head + tail,
                    "head_term": head,
                    "tail_term": tail,
                    "first_term_dominates": head >= tail,
                }
            cell["kappa_p"] = kappa_block
            cell["thm3"] = {
                "p": p_error,
                "appendix": bounds_mod.thm3_bound(spectrum, r_eff, alpha, p_error, "appendix"),
                "main_text": bounds_mod.thm3_bound(spectrum, r_eff, alpha, p_error, "main_text"),
            }
            cell["cor1_eps"] = bounds_mod.cor1_eps(spectrum, r_eff, alpha)
            report["cells"].append(cell)

    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "bounds.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _apply_overrides(cfg: dict, alpha, rank, momentum, trials, seed) -> dict:
    cfg = dict(cfg)
    if alpha:
        cfg["alpha"] = list(alpha)
    if rank:
        cfg["rank"] = list(rank)
    if momentum is not None:
        cfg.setdefault("solver", {})
        cfg["solver"] = dict(cfg["solver"])
        cfg["solver"]["momentum"] = momentum
    if trials is not None:
        cfg["trials"] = trials
    if seed is not None:
        cfg["seed"] = seed
    return cfg


def _run_command(body) -> None:
    try:
        body()
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(2)
    except Exception as exc:
        click.echo(f"runtime error: {exc}", err=True)
        sys.exit(3)


@click.group()
def main() -> None:
    """Federated low-rank factorization experiment harness."""


_config_opt = click.option("--config", "config_path", required=True, type=click.Path())
_out_opt = click.option("--out", "out_dir", default=None, type=click.Path())
_seed_opt = click.option("--seed", type=int, default=None)


@main.command()
@_config_opt
@_out_opt
@_seed_opt
def generate(config_path, out_dir, seed):
    """Write the configured synthetic dataset to disk."""

    def body():
        cfg = _apply_overrides(load_config(config_path), (), (), None, None, seed)
        target = Path(out_dir or cfg.get("output_dir", "out"))
        files = cmd_generate(cfg, target)
        click.echo(f"wrote {len(files)} files to {target}")

    _run_command(body)


@main.command()
@_config_opt
@click.option("--alpha", multiple=True, type=int)
@click.option("--rank", multiple=True, type=int)
@click.option("--momentum", type=click.Choice(["none", "nesterov"]), default=None)
@click.option("--trials", type=int, default=None)
@_seed_opt
@_out_opt
def run(config_path, alpha, rank, momentum, trials, seed, out_dir):
    """Run the experiment grid and write trajectories plus summaries."""

    def body():
        cfg = _apply_overrides(load_config(config_path), alpha, rank, momentum, trials, seed)
        target = Path(out_dir or cfg.get("output_dir", "out"))
        files = cmd_run(cfg, target)
        click.echo(f"wrote {len(files)} files to {target}")

    _run_command(body)


@main.command()
@_config_opt
@click.option("--alpha", multiple=True, type=int)
@click.option("--rank", multiple=True, type=int)
@_seed_opt
@_out_opt
def bounds(config_path, alpha, rank, seed, out_dir):
    """Evaluate the closed-form bounds and write bounds.json."""

    def body():
        cfg = _apply_overrides(load_config(config_path), alpha, rank, None, None, seed)
        target = Path(out_dir or cfg.get("output_dir", "out"))
        path = cmd_bounds(cfg, target)
        click.echo(f"wrote {path}")

    _run_command(body)


if __name__ == "__main__":
    main()
