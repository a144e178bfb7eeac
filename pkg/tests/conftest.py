import numpy as np
import pytest

from mixlasso.distributions import RngStream
from mixlasso.model import DesignMatrix, TermLabel, build_design_matrix
from mixlasso.simulation import SimTruth, generate_dataset


def random_design(n, p, seed=0, noise=0.1, beta=None):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p))
    beta = rng.normal(size=p) if beta is None else np.asarray(beta, dtype=float)
    y = X @ beta + noise * rng.normal(size=n)
    labels = tuple(TermLabel("alpha", (j + 1,)) for j in range(p))
    return DesignMatrix(X, labels, y), beta


def sim_design(n=100, seed=0, sigma=0.5):
    truth = SimTruth(sigma=sigma)
    data = generate_dataset(truth, n, RngStream(seed))
    return build_design_matrix(data, truth.spec, truth.formula), truth


@pytest.fixture
def study_design():
    return sim_design()
