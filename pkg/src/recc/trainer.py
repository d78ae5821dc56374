"""Contrastive sampling, fine-tuning losses with analytic gradients, Adam,
and the two-phase training loop (reconstruction pre-training, then joint
contrastive + KL fine-tuning).

Positive/negative pairs come from the similarity matrix once, before
training: the k_p most similar nodes of i are its positives, the k_n least
similar its negatives. Every analytic gradient here is validated against
central finite differences of the implemented loss; the tests treat that
agreement as the binding contract.
"""

from __future__ import annotations

import csv
import json
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .gcn import GcnModel, backward, forward, reconstruction_loss_and_grad
from .graph import Graph
from .resim import ReSimMatrix
from .cluster_eval import kmeans, reseed_empty_clusters


class TrainingError(RuntimeError):
    """Training aborted (non-finite loss or invalid phase input)."""


@dataclass
class ContrastiveSamples:
    pos: np.ndarray  # (n, k_p) node indices
    neg: np.ndarray  # (n, k_n) node indices
    k_p: int
    k_n: int


@dataclass
class ClusterState:
    """Soft-assignment state of one fine-tuning step."""

    centroids: np.ndarray  # k x dim
    Q: np.ndarray          # n x k soft assignments, rows sum to 1
    P: np.ndarray          # n x k sharpened targets, rows sum to 1
    f: np.ndarray          # per-cluster soft frequency, f_j = sum_i Q_ij
    tau: float


@dataclass
class LossMask:
    use_con: bool = True
    use_kl: bool = True

    @classmethod
    def from_string(cls, name: str) -> "LossMask":
        table = {
            "both": cls(True, True),
            "con": cls(True, False),
            "kl": cls(False, True),
        }
        if name not in table:
            raise ValueError(f"loss mask must be one of {sorted(table)}, got {name!r}")
        return table[name]

    def validate(self) -> None:
        if not (self.use_con or self.use_kl):
            raise ValueError("at least one fine-tuning loss must be enabled")


@dataclass
class EpochRecord:
    epoch: int
    l_re: float | None = None
    l_con: float | None = None
    l_kl: float | None = None
    l_total: float | None = None
    loss_seconds: float = 0.0


@dataclass
class TrainHistory:
    phase: str  # "pretrain" or "finetune"
    records: list[EpochRecord] = field(default_factory=list)

    _FIELDS = ("epoch", "l_re", "l_con", "l_kl", "l_total", "loss_seconds")

    def to_rows(self) -> list[dict]:
        return [{k: getattr(r, k) for k in self._FIELDS} for r in self.records]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=self._FIELDS)
            writer.writeheader()
            writer.writerows(self.to_rows())

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump({"phase": self.phase, "records": self.to_rows()}, fh, indent=2)


# ---------------------------------------------------------------------------
# sample selection

def select_samples(sim: ReSimMatrix, k_p: int = 2, k_n: int = 1) -> ContrastiveSamples:
    """Top-k_p / bottom-k_n similarity neighbors per node.

    Each row of S is sorted descending with ties broken by smaller node
    index; positives are the head, negatives the tail of that order (the
    node itself excluded). Computed once per similarity matrix.
    """
    if k_p < 1 or k_n < 1:
        raise ValueError("k_p and k_n must be >= 1")
    S = sim.S
    n = S.shape[0]
    if n <= k_p + k_n:
        raise ValueError(f"need more than k_p + k_n = {k_p + k_n} nodes, got {n}")
    # stable argsort on -S: descending similarity, ties by ascending index
    order = np.argsort(-S, axis=1, kind="stable")
    keep = order != np.arange(n)[:, None]
    order = order[keep].reshape(n, n - 1)
    pos = order[:, :k_p].copy()
    neg = order[:, n - 1 - k_n:].copy()
    return ContrastiveSamples(pos=pos, neg=neg, k_p=k_p, k_n=k_n)


# ---------------------------------------------------------------------------
# contrastive loss

_zero_norm_rows_seen = 0


def zero_norm_rows_seen() -> int:
    """Running count of degenerate (zero-norm) embedding rows encountered."""
    return _zero_norm_rows_seen


def _unit_rows(Z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Row-normalized Z, safe norms, and the zero-row mask (cosine -> 0)."""
    global _zero_norm_rows_seen
    norms = np.linalg.norm(Z, axis=1)
    zero = norms == 0.0
    if zero.any():
        _zero_norm_rows_seen += int(zero.sum())
        warnings.warn(f"{int(zero.sum())} zero-norm embedding row(s); "
                      "their cosines are treated as 0", RuntimeWarning)
    safe = np.where(zero, 1.0, norms)
    return Z / safe[:, None], safe, zero


def contrastive_terms(Z: np.ndarray, s: ContrastiveSamples) -> np.ndarray:
    """Per-node loss terms l_i = -log(sum_pos e^cos / sum_neg e^cos)."""
    U, _, _ = _unit_rows(Z)
    cos_pos = np.einsum("id,iad->ia", U, U[s.pos])
    cos_neg = np.einsum("id,iad->ia", U, U[s.neg])
    num = np.exp(cos_pos).sum(axis=1)
    den = np.exp(cos_neg).sum(axis=1)
    return np.log(den) - np.log(num)


def contrastive_loss(Z: np.ndarray, s: ContrastiveSamples) -> float:
    """Mean of the per-node contrastive terms."""
    return float(contrastive_terms(Z, s).mean())


def contrastive_grad(Z: np.ndarray, s: ContrastiveSamples) -> np.ndarray:
    """Full analytic gradient of contrastive_loss with respect to Z.

    Includes both the d l_i / d Z_i part and the contributions l_i sends to
    the rows of its positive and negative partners. Pairs touching a
    zero-norm row contribute nothing (their cosine is the constant 0).
    """
    n, d = Z.shape
    U, safe, zero = _unit_rows(Z)
    grad = np.zeros_like(Z, dtype=float)
    for idx, sign in ((s.pos, -1.0), (s.neg, +1.0)):
        cos = np.einsum("id,iad->ia", U, U[idx])
        w = np.exp(cos)
        w /= w.sum(axis=1, keepdims=True)  # softmax weights within the list
        coef = sign * w / n
        valid = (~zero)[:, None] & (~zero)[idx]
        coef = coef * valid
        # d cos / d Z_i = (U_j - cos * U_i) / ||Z_i||
        t1 = np.einsum("ia,iad->id", coef, U[idx])
        t2 = (coef * cos).sum(axis=1)[:, None] * U
        grad += (t1 - t2) / safe[:, None]
        # d cos / d Z_j = (U_i - cos * U_j) / ||Z_j||
        per_pair = (coef / safe[idx])[:, :, None] * (U[:, None, :] - cos[:, :, None] * U[idx])
        np.add.at(grad, idx.ravel(), per_pair.reshape(-1, d))
    return grad


# ---------------------------------------------------------------------------
# soft clustering losses

def _sq_distances(Z: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d2 = (
        (Z * Z).sum(axis=1)[:, None]
        - 2.0 * Z @ centroids.T
        + (centroids * centroids).sum(axis=1)[None, :]
    )
    return np.maximum(d2, 0.0)


def soft_assign(Z: np.ndarray, centroids: np.ndarray, tau: float = 1.0) -> np.ndarray:
    """Student-t kernel soft assignments, rows normalized to 1."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    if centroids.shape[0] < 2:
        raise ValueError("need at least two centroids")
    d2 = _sq_distances(Z, centroids)
    psi = (1.0 + d2 / tau) ** (-(tau + 1.0) / 2.0)
    return psi / psi.sum(axis=1, keepdims=True)


def target_distribution(Q: np.ndarray) -> np.ndarray:
    """Sharpen Q: p_ij proportional to q_ij^2 / f_j with f_j = sum_i q_ij."""
    f = Q.sum(axis=0)
    if np.any(f == 0.0):
        raise ValueError("empty soft cluster (f_j = 0)")
    W = Q * Q / f
    return W / W.sum(axis=1, keepdims=True)


def cluster_state(Z: np.ndarray, centroids: np.ndarray, tau: float = 1.0) -> ClusterState:
    """Consistent (Q, P, f) snapshot for the given embeddings and centroids."""
    Q = soft_assign(Z, centroids, tau)
    P = target_distribution(Q)
    return ClusterState(centroids=centroids, Q=Q, P=P, f=Q.sum(axis=0), tau=tau)


def kl_loss_and_grad(Z: np.ndarray, state: ClusterState) -> tuple[float, np.ndarray]:
    """KL(P || Q) and its gradient in Z, holding P and the centroids fixed.

    dL/dZ_i = (tau+1)/tau * sum_j (1 + ||Z_i - c_j||^2/tau)^-1
              * (p_ij - q_ij) (Z_i - c_j)
    """
    P, Q, tau = state.P, state.Q, state.tau
    if np.any((Q <= 0.0) & (P > 0.0)):
        raise ValueError("KL divergence undefined: q_ij = 0 where p_ij > 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(P > 0.0, P * np.log(np.where(P > 0.0, P, 1.0) / Q), 0.0)
    loss = float(terms.sum())
    zeta = 1.0 / (1.0 + _sq_distances(Z, state.centroids) / tau)
    W = zeta * (P - Q)
    dZ = ((tau + 1.0) / tau) * (W.sum(axis=1)[:, None] * Z - W @ state.centroids)
    return loss, dZ


# ---------------------------------------------------------------------------
# optimizer

class Adam:
    """Adam with bias-corrected first/second moments over a parameter list."""

    def __init__(self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: list[np.ndarray] | None = None
        self.v: list[np.ndarray] | None = None

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> list[np.ndarray]:
        if self.m is None:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.t += 1
        out = []
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g
            m_hat = self.m[i] / (1.0 - self.beta1 ** self.t)
            v_hat = self.v[i] / (1.0 - self.beta2 ** self.t)
            out.append(p - self.lr * m_hat / (np.sqrt(v_hat) + self.eps))
        return out


# ---------------------------------------------------------------------------
# training phases

def pretrain(model: GcnModel, g: Graph, X, epochs: int = 100, seed: int = 0,
             lr: float = 1e-3) -> tuple[GcnModel, TrainHistory]:
    """Full-batch reconstruction pre-training (no dropout in this phase)."""
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    del seed  # phase is deterministic: dropout is disabled during pre-training
    adam = Adam(lr=lr)
    history = TrainHistory(phase="pretrain")
    for epoch in range(epochs):
        Z, cache = forward(model, g, X, train_mode=True, dropout_rate=0.0)
        t0 = time.perf_counter()
        loss, dZ = reconstruction_loss_and_grad(Z, g)
        loss_seconds = time.perf_counter() - t0
        if not np.isfinite(loss):
            raise TrainingError(f"non-finite reconstruction loss at epoch {epoch}: {loss}")
        grads = backward(cache, dZ)
        model.layers = adam.step(model.layers, grads)
        history.records.append(EpochRecord(epoch=epoch, l_re=loss,
                                           loss_seconds=loss_seconds))
    return model, history


def finetune(model: GcnModel, g: Graph, X, s: ContrastiveSamples, k: int = 2,
             epochs: int = 100, seed: int = 0, loss_mask: LossMask | None = None,
             tau: float = 1.0, lr: float = 1e-3, restarts: int = 10,
             on_epoch: Callable[[int, ClusterState], None] | None = None,
             ) -> tuple[GcnModel, TrainHistory]:
    """Joint contrastive + KL fine-tuning with per-epoch cluster refresh.

    Centroids start from k-means on the current embeddings. Each epoch runs a
    train-mode forward (dropout on), evaluates the enabled losses against the
    previous epoch's centroids, sums their embedding gradients, backprops and
    steps Adam; then Q, P and the centroids are refreshed from a fresh
    eval-mode forward, with hard argmax-Q membership averaging. An empty hard
    cluster is re-seeded at the point farthest from its nearest centroid.

    History rows report the losses measured on the refreshed dropout-free
    embeddings (dropout makes the train-path values too noisy to monitor),
    while loss_seconds times the train-path contrastive loss+gradient work.
    """
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    mask = loss_mask or LossMask()
    mask.validate()
    seeds = np.random.SeedSequence(seed).spawn(2)
    dropout_rng = np.random.default_rng(seeds[0])
    kmeans_seed = int(seeds[1].generate_state(1)[0])

    Z0, _ = forward(model, g, X, train_mode=False)
    centroids = kmeans(Z0, k, seed=kmeans_seed, restarts=restarts).centroids
    adam = Adam(lr=lr)
    history = TrainHistory(phase="finetune")

    for epoch in range(epochs):
        Z, cache = forward(model, g, X, train_mode=True, seed=dropout_rng)
        dZ = np.zeros_like(Z)
        l_con = l_kl = None
        con_seconds = 0.0
        if mask.use_con:
            t0 = time.perf_counter()
            l_con = contrastive_loss(Z, s)
            dZ += contrastive_grad(Z, s)
            con_seconds = time.perf_counter() - t0
        if mask.use_kl:
            state = cluster_state(Z, centroids, tau)
            l_kl, g_kl = kl_loss_and_grad(Z, state)
            dZ += g_kl
        total = sum(v for v in (l_con, l_kl) if v is not None)
        if not np.isfinite(total):
            raise TrainingError(f"non-finite fine-tuning loss at epoch {epoch}: "
                                f"l_con={l_con} l_kl={l_kl}")
        grads = backward(cache, dZ)
        model.layers = adam.step(model.layers, grads)

        # refresh cluster state from the updated model
        Z_eval, _ = forward(model, g, X, train_mode=False)
        refreshed = cluster_state(Z_eval, centroids, tau)
        hard = np.argmax(refreshed.Q, axis=1)
        new_centroids = centroids.copy()
        for j in range(k):
            members = hard == j
            if members.any():
                new_centroids[j] = Z_eval[members].mean(axis=0)
        new_centroids = reseed_empty_clusters(Z_eval, new_centroids, hard)
        centroids = new_centroids

        l_con_rec = contrastive_loss(Z_eval, s) if mask.use_con else None
        l_kl_rec = kl_loss_and_grad(Z_eval, refreshed)[0] if mask.use_kl else None
        total_rec = sum(v for v in (l_con_rec, l_kl_rec) if v is not None)
        history.records.append(EpochRecord(epoch=epoch, l_con=l_con_rec,
                                           l_kl=l_kl_rec, l_total=total_rec,
                                           loss_seconds=con_seconds))
        if on_epoch is not None:
            on_epoch(epoch, refreshed)
    return model, history
