import numpy as np
import pytest

from timokv.beam_model import BeamParameters, DampingProfile, GridState


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_state(rng, n_cells, bc="dn", L=1.0, modes=6):
    """Smooth admissible state built from a few low modes with random complex weights."""
    x = np.linspace(0.0, L, n_cells + 1)
    k = np.arange(1, modes + 1)[:, None]
    w = lambda: (rng.standard_normal(modes) + 1j * rng.standard_normal(modes)) / k[:, 0] ** 2
    sines = np.sin(np.pi * k * x / L)
    cos_or_sin = np.cos(np.pi * k * x / L) if bc == "dn" else sines
    return GridState(n_cells, w() @ sines, w() @ sines, w() @ cos_or_sin, w() @ cos_or_sin, L)


@pytest.fixture
def step_params():
    return BeamParameters.normalized(1.0), DampingProfile.step()
