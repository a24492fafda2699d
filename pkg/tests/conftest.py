import os

import numpy as np
import pytest

from abcboost import Dataset

# The UCI letter-recognition file (20000 rows, "T,2,8,3,...": letter label
# first, 16 integer features). Supply it via ABCBOOST_LETTER_DATA or drop it
# at data/letter-recognition.data; data-scale acceptance tests skip cleanly
# when it is absent.
_LETTER_CANDIDATES = [
    os.environ.get("ABCBOOST_LETTER_DATA", ""),
    os.path.join(os.path.dirname(__file__), "..", "data", "letter-recognition.data"),
]


def letter_data_path():
    for p in _LETTER_CANDIDATES:
        if p and os.path.exists(p):
            return p
    return None


def load_letter2k():
    """Letter2k split: last 2000 rows train, first 18000 test."""
    path = letter_data_path()
    if path is None:
        return None
    labels = []
    feats = []
    with open(path) as fh:
        for line in fh:
            toks = line.strip().split(",")
            if not toks or toks == [""]:
                continue
            labels.append(ord(toks[0]) - ord("A"))
            feats.append([float(t) for t in toks[1:]])
    X = np.array(feats)
    y = np.array(labels)
    assert X.shape == (20000, 16), "unexpected letter-recognition file shape"
    train = Dataset(X[18000:], y[18000:], 26)
    test = Dataset(X[:18000], y[:18000], 26)
    return train, test


requires_letter = pytest.mark.skipif(
    letter_data_path() is None,
    reason="UCI letter-recognition data not present (set ABCBOOST_LETTER_DATA "
           "or place data/letter-recognition.data)")


def toy_separable(n=30, k=3, d=2, seed=7):
    """Linearly separable multi-class toy set (class mean shifted on f0)."""
    rng = np.random.default_rng(seed)
    y = np.arange(n) % k
    X = rng.normal(scale=0.3, size=(n, d))
    X[:, 0] += 4.0 * y
    return Dataset(X, y, k)


def random_dataset(n, d, k, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    y = rng.integers(0, k, size=n)
    return Dataset(X, y, k)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
