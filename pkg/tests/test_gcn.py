import numpy as np
import pytest

from recc.gcn import (
    backward,
    elu,
    forward,
    init_model,
    load_model,
    normalized_adjacency,
    reconstruction_loss_and_grad,
    save_model,
)
from recc.gcn import _frobenius_loss_grad
from recc.graph import parse_edge_list
from recc.synth import random_graph

from conftest import central_diff, max_rel_err


class TestInitModel:
    def test_architecture(self):
        m = init_model(4, seed=7)
        assert [w.shape for w in m.layers] == [(4, 128), (128, 128), (128, 128)]
        assert m.dims == [4, 128, 128, 128]

    def test_deterministic_per_seed(self):
        a, b = init_model(4, seed=7), init_model(4, seed=7)
        for wa, wb in zip(a.layers, b.layers):
            np.testing.assert_array_equal(wa, wb)

    def test_seed_sensitivity(self):
        a, b = init_model(4, seed=7), init_model(4, seed=8)
        assert any((wa != wb).any() for wa, wb in zip(a.layers, b.layers))

    def test_xavier_bounds(self):
        m = init_model(4, seed=0)
        bound = np.sqrt(6.0 / (4 + 128))
        assert np.abs(m.layers[0]).max() <= bound

    def test_zero_input_dim_rejected(self):
        with pytest.raises(ValueError):
            init_model(0, seed=0)


class TestElu:
    def test_values(self):
        assert elu(0.0) == 0.0
        assert elu(2.5) == 2.5
        assert elu(-1.0) == pytest.approx(np.exp(-1) - 1, abs=1e-12)

    def test_arrays(self):
        x = np.array([-2.0, 0.0, 3.0])
        np.testing.assert_allclose(elu(x), [np.expm1(-2.0), 0.0, 3.0])


class TestForward:
    def test_isolated_node_is_a_dense_chain(self):
        # node c is isolated: every aggregation coefficient for it is 1
        g = parse_edge_list("a b\nc c")
        m = init_model(3, seed=1, hidden_dims=(6, 6, 6))
        X = np.random.default_rng(0).standard_normal((3, 3))
        Z, cache = forward(m, g, X, train_mode=False)
        assert cache is None
        c = g.node_ids["c"]
        h = X[c]
        for W in m.layers:
            h = elu(h @ W)
        np.testing.assert_allclose(Z[c], h, atol=1e-12)

    def test_zero_features_give_zero_embeddings(self, g6):
        m = init_model(4, seed=2, hidden_dims=(8, 8, 8))
        Z, _ = forward(m, g6, np.zeros((6, 4)))
        np.testing.assert_array_equal(Z, 0.0)

    def test_twin_leaves_identical(self, star4):
        m = init_model(2, seed=3, hidden_dims=(8, 8, 8))
        X = np.ones((5, 2))
        Z, _ = forward(m, star4, X)
        l1, l2 = star4.node_ids["l1"], star4.node_ids["l2"]
        np.testing.assert_array_equal(Z[l1], Z[l2])

    def test_permutation_equivariance(self, rng):
        g = random_graph(12, 0.3, seed=5)
        X = rng.standard_normal((12, 4))
        m = init_model(4, seed=4, hidden_dims=(8, 8, 8))
        Z, _ = forward(m, g, X)
        perm = rng.permutation(12)
        lines = [f"{perm[i]} {perm[j]}" for i, j in sorted(g.edges)]
        lines += [f"{p} {p}" for p in perm]  # register isolates
        relabeled = parse_edge_list("\n".join(lines))
        # relabeled graph indexes nodes by first appearance; map via its ids
        to_new = np.array([relabeled.node_ids[str(perm[i])] for i in range(12)])
        Xp = np.zeros_like(X)
        Xp[to_new] = X
        Zp, _ = forward(m, relabeled, Xp)
        np.testing.assert_allclose(Zp[to_new], Z, rtol=1e-10, atol=1e-12)

    def test_eval_deterministic_and_train_seeded(self, g6, rng):
        m = init_model(4, seed=0)
        X = rng.standard_normal((6, 4))
        Z1, _ = forward(m, g6, X)
        Z2, _ = forward(m, g6, X)
        np.testing.assert_array_equal(Z1, Z2)
        Zt1, _ = forward(m, g6, X, train_mode=True, seed=11)
        Zt2, _ = forward(m, g6, X, train_mode=True, seed=11)
        np.testing.assert_array_equal(Zt1, Zt2)
        Zt3, _ = forward(m, g6, X, train_mode=True, seed=12)
        assert (Zt1 != Zt3).any()

    def test_dropout_only_in_train_mode(self, g6, rng):
        m = init_model(4, seed=0, dropout_rate=0.5)
        X = rng.standard_normal((6, 4))
        Z_eval, _ = forward(m, g6, X)
        Z_train, cache = forward(m, g6, X, train_mode=True, seed=1)
        assert cache is not None
        assert (Z_eval != Z_train).any()
        # the final layer's activations never get a mask
        assert len(cache.masks) == 2

    def test_shape_mismatch(self, g6):
        m = init_model(4, seed=0)
        with pytest.raises(ValueError, match="width"):
            forward(m, g6, np.zeros((6, 3)))
        with pytest.raises(ValueError, match="row count"):
            forward(m, g6, np.zeros((5, 4)))

    def test_normalization_row_sums(self, star4):
        # rows of D~^-1/2 (A+I) D~^-1/2 for a regular graph sum to 1
        g = parse_edge_list("0 1\n1 2\n2 0")
        P = normalized_adjacency(g).toarray()
        np.testing.assert_allclose(P.sum(axis=1), 1.0)
        np.testing.assert_allclose(P, P.T)


class TestBackward:
    def test_matches_finite_differences(self, g6, rng):
        X = rng.standard_normal((6, 3))
        m = init_model(3, seed=1, hidden_dims=(5, 5, 5))
        Z, cache = forward(m, g6, X, train_mode=True, dropout_rate=0.0)
        _, dZ = reconstruction_loss_and_grad(Z, g6)
        grads = backward(cache, dZ)

        def loss_with(layer_idx, W):
            saved = m.layers[layer_idx]
            m.layers[layer_idx] = W
            Zi, _ = forward(m, g6, X)
            out = reconstruction_loss_and_grad(Zi, g6)[0]
            m.layers[layer_idx] = saved
            return out

        for li in range(3):
            fd = central_diff(lambda W: loss_with(li, W), m.layers[li])
            assert max_rel_err(grads[li], fd) < 1e-4

    def test_gradient_through_dropout_masks(self, g6, rng):
        X = rng.standard_normal((6, 3))
        m = init_model(3, seed=1, hidden_dims=(5, 5, 5), dropout_rate=0.4)
        Z, cache = forward(m, g6, X, train_mode=True, seed=9)
        _, dZ = reconstruction_loss_and_grad(Z, g6)
        grads = backward(cache, dZ)

        def loss_with(layer_idx, W):
            saved = m.layers[layer_idx]
            m.layers[layer_idx] = W
            # the same dropout seed reproduces the masks
            Zi, _ = forward(m, g6, X, train_mode=True, seed=9)
            out = reconstruction_loss_and_grad(Zi, g6)[0]
            m.layers[layer_idx] = saved
            return out

        for li in range(3):
            fd = central_diff(lambda W: loss_with(li, W), m.layers[li])
            assert max_rel_err(grads[li], fd) < 1e-4

    def test_zero_upstream_zero_grads(self, g6, rng):
        m = init_model(3, seed=1, hidden_dims=(5, 5, 5))
        _, cache = forward(m, g6, rng.standard_normal((6, 3)),
                           train_mode=True, dropout_rate=0.0)
        grads = backward(cache, np.zeros((6, 5)))
        for gr in grads:
            np.testing.assert_array_equal(gr, 0.0)

    def test_linearity(self, g6, rng):
        m = init_model(3, seed=1, hidden_dims=(5, 5, 5))
        _, cache = forward(m, g6, rng.standard_normal((6, 3)),
                           train_mode=True, dropout_rate=0.0)
        G = rng.standard_normal((6, 5))
        g1 = backward(cache, G)
        g2 = backward(cache, 2.5 * G)
        for a, b in zip(g1, g2):
            np.testing.assert_allclose(2.5 * a, b, rtol=1e-12)

    def test_missing_cache_rejected(self):
        with pytest.raises(ValueError, match="cache"):
            backward(None, np.zeros((3, 4)))


class TestReconstructionLoss:
    def test_zero_embeddings_on_two_node_path(self, k2):
        loss, _ = reconstruction_loss_and_grad(np.zeros((2, 3)), k2)
        assert loss == pytest.approx(1.0, abs=1e-12)

    def test_gradient_matches_finite_differences(self, rng):
        g = random_graph(5, 0.5, seed=8)
        Z = rng.standard_normal((5, 8)) * 0.7
        _, grad = reconstruction_loss_and_grad(Z, g)
        fd = central_diff(lambda z: reconstruction_loss_and_grad(z, g)[0], Z)
        assert max_rel_err(grad, fd) < 1e-4

    def test_perfect_reconstruction_minimum(self):
        loss, grad = _frobenius_loss_grad(np.zeros((3, 3)))
        assert loss == 0.0
        np.testing.assert_array_equal(grad, 0.0)

    def test_row_count_checked(self, k3):
        with pytest.raises(ValueError):
            reconstruction_loss_and_grad(np.zeros((2, 4)), k3)


def test_checkpoint_round_trip(tmp_path):
    m = init_model(5, seed=42, dropout_rate=0.3)
    path = tmp_path / "model.npz"
    save_model(path, m)
    m2 = load_model(path)
    assert m2.dims == m.dims
    assert m2.dropout_rate == m.dropout_rate
    for a, b in zip(m.layers, m2.layers):
        np.testing.assert_array_equal(a, b)
