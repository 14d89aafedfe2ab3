from dataclasses import replace

import pytest

from overcomplete import TrainerConfig, train_nonneg, train_sparse
from planted import PLANTED, make_planted


@pytest.fixture(scope="session")
def planted():
    X, _, _ = make_planted(**PLANTED)
    return X


@pytest.fixture(scope="session")
def planted_config():
    return TrainerConfig(lam=0.1, tau=1e-5, K=PLANTED["K"], eta=0.05, epochs=20, seed=0)


@pytest.fixture(scope="session")
def planted_run(planted, planted_config):
    return train_sparse(planted, planted_config)


@pytest.fixture(scope="session")
def planted_nonneg_run(planted, planted_config):
    # method B keeps method A's hyperparameters
    return train_nonneg(planted, replace(planted_config, nonnegative=True, binarize=True))
