import json
import subprocess

import pytest

# The two-level synthetic federation the runner experiments use: five unit
# signal directions, 1e-6 noise, 25 clients x 200 rows, d = 200.
COR2_DATASET = {
    "kind": "synthetic",
    "num_clients": 25,
    "rows_per_client": 200,
    "dim": 200,
    "true_rank": 5,
    "signal_values": [1.0, 1.0, 1.0, 1.0, 1.0],
    "noise_std": 1e-6,
}


def run_cli(args, cwd):
    proc = subprocess.run(
        ["fedlowrank", *args], cwd=cwd, capture_output=True, text=True
    )
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="session")
def convergence_run_dir(tmp_path_factory):
    """Real runner outputs: (alpha, momentum) grid on the two-level data."""
    root = tmp_path_factory.mktemp("conv")
    cfg = {
        "dataset": COR2_DATASET,
        "rank": 5,
        "alpha": [0, 1],
        "solver": {"iterations": 300, "momentum": ["none", "nesterov"]},
        "resample": {"mode": "fixed_m", "m": 1},
        "trials": 1,
        "seed": 424242,
    }
    (root / "cfg.json").write_text(json.dumps(cfg))
    run_cli(["run", "--config", "cfg.json", "--out", "out"], cwd=root)
    return root / "out"


@pytest.fixture(scope="session")
def scatter_run_dir(tmp_path_factory):
    """50 exact-solver trials with fresh probes on the two-level data."""
    root = tmp_path_factory.mktemp("scatter")
    cfg = {
        "dataset": COR2_DATASET,
        "rank": 5,
        "alpha": 0,
        "solver": {"method": "exact"},
        "resample": {"mode": "fixed_m", "m": 1},
        "trials": 50,
        "seed": 535353,
    }
    (root / "cfg.json").write_text(json.dumps(cfg))
    run_cli(["run", "--config", "cfg.json", "--out", "out"], cwd=root)
    return root / "out"


@pytest.fixture(scope="session")
def small_exact_run_dir(tmp_path_factory):
    """Noiseless exact-recovery run: errors at the log10 clamp floor."""
    root = tmp_path_factory.mktemp("exact")
    cfg = {
        "dataset": {
            "kind": "synthetic", "num_clients": 4, "rows_per_client": 15,
            "dim": 18, "true_rank": 3, "signal_values": [1.0, 1.0, 1.0],
            "noise_std": 0.0,
        },
        "rank": 3,
        "alpha": 0,
        "solver": {"method": "exact"},
        "trials": 1,
        "seed": 606060,
    }
    (root / "cfg.json").write_text(json.dumps(cfg))
    run_cli(["run", "--config", "cfg.json", "--out", "out"], cwd=root)
    run_cli(["bounds", "--config", "cfg.json", "--out", "out"], cwd=root)
    return root / "out"
