import pytest

import fedlowrank as fl

# The two-level synthetic federation used throughout: five unit signal
# directions plus 1e-6 noise, 25 clients of 200 rows, d = 200.
COR2_SEED = 2024


def cor2_spec(noise_std: float = 1e-6, seed: int = COR2_SEED) -> fl.SyntheticSpec:
    return fl.SyntheticSpec(
        num_clients=25,
        rows_per_client=200,
        dim=200,
        true_rank=5,
        signal_values=(1.0, 1.0, 1.0, 1.0, 1.0),
        noise_std=noise_std,
        seed=seed,
    )


@pytest.fixture(scope="session")
def cor2_dataset() -> fl.FederatedDataset:
    return fl.generate_synthetic(cor2_spec())


@pytest.fixture(scope="session")
def cor2_spectrum(cor2_dataset) -> fl.Spectrum:
    return fl.singular_values(cor2_dataset.concatenated())


@pytest.fixture(scope="session")
def noiseless_dataset() -> fl.FederatedDataset:
    return fl.generate_synthetic(cor2_spec(noise_std=0.0, seed=7))
