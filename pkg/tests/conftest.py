import numpy as np
import pytest

from gbdt import PotentialSpec, evolve_closed_form, evolve_ode
from gbdt.sampling import continuous_triple, soliton_triple


def grid(length, step=1e-3):
    return np.linspace(0.0, length, round(length / step) + 1)


@pytest.fixture(scope="session")
def soliton_state():
    """kappa = 1 soliton data evolved on [0, 10] at step 1e-3."""
    return evolve_closed_form(soliton_triple(1.0), grid(10.0))


@pytest.fixture(scope="session")
def seeded_state():
    """One seeded triple evolved by RK4 on [0, 5] at step 1e-3 (u = 0)."""
    rng = np.random.default_rng(2024)
    triple = continuous_triple(rng, 3, 2)
    return evolve_ode(triple, PotentialSpec.zero(2), grid(5.0))
