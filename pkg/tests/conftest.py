import numpy as np
import pytest

from kolsim.dataset import SynthSpec, generate_synthetic


def small_synth_spec(**overrides):
    """Desk-scale spec used across tests; activity concentrated near the
    simulated window so campaigns bootstrap reliably."""
    base = dict(
        n_users=200,
        n_candidates=4,
        followers_per_candidate=35,
        activity_means=(780.0, 840.0),
        activity_variances=(2500.0, 4900.0),
        activity_weights=(0.6, 0.4),
        n_contents=300,
    )
    base.update(overrides)
    return SynthSpec(**base)


@pytest.fixture(scope="session")
def small_dataset():
    return generate_synthetic(small_synth_spec(), seed=11)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)
