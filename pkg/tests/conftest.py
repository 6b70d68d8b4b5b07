import numpy as np
import pytest

from edgegrid.data import generate_synthetic


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    """Default synthetic corpus (7 classes x 10 sequences x 24 frames, 64x64)."""
    root = tmp_path_factory.mktemp("corpus")
    generate_synthetic(root, seed=0)
    return root


def square_frame(size=32, lo=8, hi=24, fg=1.0):
    data = np.zeros((size, size))
    data[lo:hi, lo:hi] = fg
    return data
