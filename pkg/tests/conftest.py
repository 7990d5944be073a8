import numpy as np
import pytest

from vrbb.data import parse_libsvm
from vrbb.model import LogisticL2Problem

from _synth import dataset_file, small_random_libsvm_text


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("datasets")


@pytest.fixture(scope="session")
def benchmark_dataset(fixture_dir):
    """name -> (SparseDataset, is_real_copy), generated once per session."""
    cache = {}

    def get(name):
        if name not in cache:
            path, is_real = dataset_file(name, fixture_dir)
            from vrbb.data import load_libsvm

            cache[name] = (load_libsvm(path), is_real)
        return cache[name]

    return get


@pytest.fixture(scope="session")
def small_problem():
    """50 x 12 random sparse logistic problem for unit-level oracles."""
    ds = parse_libsvm(small_random_libsvm_text(50, 12, seed=101))
    return LogisticL2Problem(ds, 0.01)


@pytest.fixture(scope="session")
def tiny_problem():
    """n=6 problem for exhaustive-enumeration oracles."""
    ds = parse_libsvm(small_random_libsvm_text(6, 5, seed=7, nnz=3))
    return LogisticL2Problem(ds, 0.01)


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
