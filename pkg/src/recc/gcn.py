"""Three-layer graph convolutional encoder with manual backpropagation.

Each layer computes H = ELU(P @ H @ W) where P is the symmetric self-loop
normalization D~^{-1/2} (A + I) D~^{-1/2} with d~ = d + 1, so isolated nodes
stay well defined. Dropout (inverted, train-mode only) hits the activations
of all but the last layer. The reconstruction head scores sigmoid(Z @ Z.T)
against the adjacency matrix under the Frobenius norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from .graph import Graph
from .features import FeatureMatrix


@dataclass
class GcnModel:
    layers: list[np.ndarray]  # weight matrices, in_dim x out_dim
    dims: list[int]           # [f, h1, ..., hL]
    dropout_rate: float = 0.2


@dataclass
class ForwardCache:
    """Intermediates of one train-mode forward, consumed by backward."""

    aggregated: list[np.ndarray]       # P @ H_{l-1}, per layer
    pre_activations: list[np.ndarray]  # (P @ H_{l-1}) @ W_l, per layer
    masks: list[np.ndarray | None]     # dropout masks for layers 1..L-1
    weights: list[np.ndarray]          # the weights used in this forward
    operator: sp.csr_matrix


def elu(x):
    """x for x > 0, exp(x) - 1 otherwise."""
    arr = np.asarray(x, dtype=float)
    out = np.where(arr > 0, arr, np.expm1(np.minimum(arr, 0.0)))
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out


def _elu_grad(pre: np.ndarray) -> np.ndarray:
    return np.where(pre > 0, 1.0, np.exp(np.minimum(pre, 0.0)))


def init_model(f: int, seed: int, hidden_dims: tuple[int, ...] = (128, 128, 128),
               dropout_rate: float = 0.2) -> GcnModel:
    """Xavier-uniform weights, deterministic per seed."""
    if f < 1:
        raise ValueError("input dimension must be >= 1")
    rng = np.random.default_rng(seed)
    dims = [f, *hidden_dims]
    layers = []
    for din, dout in zip(dims[:-1], dims[1:]):
        bound = np.sqrt(6.0 / (din + dout))
        layers.append(rng.uniform(-bound, bound, size=(din, dout)))
    return GcnModel(layers=layers, dims=dims, dropout_rate=dropout_rate)


def normalized_adjacency(g: Graph) -> sp.csr_matrix:
    """D~^{-1/2} (A + I) D~^{-1/2} with d~ = d + 1."""
    n = g.n_nodes
    a_hat = (g.adjacency + sp.identity(n, format="csr")).tocsr()
    inv_sqrt = 1.0 / np.sqrt(g.degree + 1.0)
    d_half = sp.diags(inv_sqrt)
    return (d_half @ a_hat @ d_half).tocsr()


def forward(model: GcnModel, g: Graph, X: FeatureMatrix | np.ndarray,
            train_mode: bool = False, seed: int | np.random.Generator | None = None,
            dropout_rate: float | None = None,
            ) -> tuple[np.ndarray, ForwardCache | None]:
    """Run the encoder; a cache for backward is returned only in train mode.

    ``dropout_rate`` overrides the model's rate (pre-training passes 0.0);
    dropout is applied only in train mode.
    """
    H = X.X if isinstance(X, FeatureMatrix) else np.asarray(X, dtype=float)
    if H.shape[0] != g.n_nodes:
        raise ValueError("feature row count does not match node count")
    if H.shape[1] != model.dims[0]:
        raise ValueError(
            f"feature width {H.shape[1]} does not match model input dim {model.dims[0]}"
        )
    rate = model.dropout_rate if dropout_rate is None else dropout_rate
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    P = normalized_adjacency(g)
    n_layers = len(model.layers)
    aggregated, pre_activations, masks = [], [], []
    for l, W in enumerate(model.layers):
        S = P @ H
        M = S @ W
        H = elu(M)
        if train_mode:
            aggregated.append(S)
            pre_activations.append(M)
        if l < n_layers - 1:
            if train_mode and rate > 0.0:
                mask = (rng.random(H.shape) >= rate) / (1.0 - rate)
                H = H * mask
                masks.append(mask)
            elif train_mode:
                masks.append(None)
    if not train_mode:
        return H, None
    cache = ForwardCache(aggregated=aggregated, pre_activations=pre_activations,
                         masks=masks, weights=list(model.layers), operator=P)
    return H, cache


def backward(cache: ForwardCache | None, dL_dZ: np.ndarray) -> list[np.ndarray]:
    """Reverse-mode gradients of every layer's weights given dL/dZ."""
    if cache is None:
        raise ValueError("backward needs the cache of a train-mode forward")
    n_layers = len(cache.weights)
    if dL_dZ.shape != cache.pre_activations[-1].shape:
        raise ValueError("dL_dZ shape does not match the cached forward")
    grads: list[np.ndarray | None] = [None] * n_layers
    G = dL_dZ
    P = cache.operator
    for l in range(n_layers - 1, -1, -1):
        dM = G * _elu_grad(cache.pre_activations[l])
        grads[l] = cache.aggregated[l].T @ dM
        if l > 0:
            G = P @ (dM @ cache.weights[l].T)
            mask = cache.masks[l - 1]
            if mask is not None:
                G = G * mask
    return grads


def _frobenius_loss_grad(E: np.ndarray) -> tuple[float, np.ndarray]:
    """||E||_F and d||E||_F / dE, with a zero gradient at the minimum."""
    norm = float(np.sqrt((E * E).sum()))
    if norm == 0.0:
        return 0.0, np.zeros_like(E)
    return norm, E / norm


def reconstruction_loss_and_grad(Z: np.ndarray, g: Graph) -> tuple[float, np.ndarray]:
    """Frobenius distance between A and sigmoid(Z @ Z.T), plus dL/dZ."""
    if Z.shape[0] != g.n_nodes:
        raise ValueError("embedding row count does not match node count")
    A = g.adjacency.toarray()
    gram = Z @ Z.T
    a_hat = expit(gram)
    loss, dE = _frobenius_loss_grad(A - a_hat)
    if loss == 0.0:
        return 0.0, np.zeros_like(Z)
    # dL/dAhat = -dE; chain through the sigmoid, then the symmetric Gram
    dG = -dE * a_hat * (1.0 - a_hat)
    dZ = (dG + dG.T) @ Z
    return loss, dZ


def save_model(path, model: GcnModel) -> None:
    """Versioned .npz checkpoint; round-trips bit-exactly."""
    payload = {
        "version": np.int64(1),
        "dims": np.asarray(model.dims, dtype=np.int64),
        "dropout_rate": np.float64(model.dropout_rate),
    }
    for i, W in enumerate(model.layers):
        payload[f"layer_{i}"] = W
    np.savez(path, **payload)


def load_model(path) -> GcnModel:
    with np.load(path) as data:
        version = int(data["version"])
        if version != 1:
            raise ValueError(f"unsupported checkpoint version {version}")
        dims = [int(d) for d in data["dims"]]
        layers = [data[f"layer_{i}"].copy() for i in range(len(dims) - 1)]
        rate = float(data["dropout_rate"])
    return GcnModel(layers=layers, dims=dims, dropout_rate=rate)
