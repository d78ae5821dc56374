import numpy as np
import pytest

from recc.graph import parse_edge_list
from recc.synth import hub_leaf_graph


@pytest.fixture
def k2():
    return parse_edge_list("a b")


@pytest.fixture
def k3():
    return parse_edge_list("a b\nb c\nc a")


@pytest.fixture
def path3():
    # a - b - c
    return parse_edge_list("a b\nb c")


@pytest.fixture
def star4():
    # center c with 4 leaves
    return parse_edge_list("c l1\nc l2\nc l3\nc l4")


@pytest.fixture
def g6():
    return parse_edge_list("0 1\n1 2\n2 3\n3 4\n4 5\n0 5\n1 4")


@pytest.fixture(scope="session")
def hub_fixture():
    return hub_leaf_graph(n_hubs=8, leaves_per_hub=15)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def central_diff(fn, X, h=1e-5):
    """Central finite differences of a scalar function over every entry of X."""
    X = np.asarray(X, dtype=float)
    out = np.zeros_like(X)
    it = np.nditer(X, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        Xp = X.copy()
        Xm = X.copy()
        Xp[idx] += h
        Xm[idx] -= h
        out[idx] = (fn(Xp) - fn(Xm)) / (2.0 * h)
    return out


def max_rel_err(analytic, reference, floor=1e-6):
    """Elementwise |a - b| / max(|b|, floor), maximized."""
    analytic = np.asarray(analytic, dtype=float)
    reference = np.asarray(reference, dtype=float)
    return float(np.max(np.abs(analytic - reference) /
                        np.maximum(np.abs(reference), floor)))


@pytest.fixture
def fd():
    return central_diff


@pytest.fixture
def rel_err():
    return max_rel_err
