import numpy as np
import pytest
from hypothesis import strategies as st

from oqsthermo import build_redfield, build_weak_coupling, footnote_params
from oqsthermo.params import SWEEP_RATIOS, SWEEP_TEMPERATURES

GRID_CELLS = [(T, x) for T in SWEEP_TEMPERATURES for x in SWEEP_RATIOS]


def grid_params(T, ratio):
    return footnote_params().replace(temperature=T).with_ratio(ratio)


@pytest.fixture(scope="session")
def footnote():
    return footnote_params()


@pytest.fixture(scope="session")
def redfield(footnote):
    return build_redfield(footnote)


@pytest.fixture(scope="session")
def weak(footnote):
    return build_weak_coupling(footnote)


@pytest.fixture(scope="session")
def grid_generators():
    out = {}
    for T, x in GRID_CELLS:
        p = grid_params(T, x)
        out[(T, x)] = (build_redfield(p), build_weak_coupling(p))
    return out


@st.composite
def bloch_vectors(draw, max_norm=1.0, min_norm=0.0):
    """Physical Bloch 4-vectors with polarization in [min_norm, max_norm]."""
    v = np.array(draw(st.tuples(*[st.floats(-1, 1, allow_nan=False)] * 3)))
    while np.linalg.norm(v) < 1e-3:
        v = np.array([0.3, -0.2, 0.5])
    n = draw(st.floats(min_norm, max_norm, allow_nan=False))
    return np.concatenate([[1.0], n * v / np.linalg.norm(v)])


def random_bloch(rng, n, max_norm=1.0):
    v = rng.standard_normal((n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    v *= max_norm * np.cbrt(rng.random(n))[:, None]
    return np.column_stack([np.ones(n), v])
