"""K-means on node embeddings, influential-cluster tagging, clustering
evaluation (ACC/NMI/ARI), and the contrastive-loss timing benchmark.

ACC matches predicted to true label ids with the Hungarian assignment before
scoring, so it is invariant to label permutations. The benchmark compares the
k-sample contrastive loss against a conventional full-pairwise baseline that
treats every non-positive node as a negative.
"""

from __future__ import annotations

import csv
import json
import time
from contextlib import nullcontext
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from sklearn.metrics import adjusted_rand_score, normalized_mutual_info_score

from .graph import Graph


@dataclass
class ClusteringResult:
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    influential_cluster: int | None = None
    influential_tie: bool = False
    n_iter: int = 0
    inertia_history: list[float] = field(default_factory=list)


@dataclass
class EvalReport:
    acc: float
    nmi: float
    ari: float

    def to_dict(self) -> dict:
        return {"acc": self.acc, "nmi": self.nmi, "ari": self.ari}

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["acc", "nmi", "ari"])
            writer.writerow([repr(self.acc), repr(self.nmi), repr(self.ari)])


@dataclass
class BenchRecord:
    n: int
    recc_seconds: float
    baseline_seconds: float


@dataclass
class BenchReport:
    records: list[BenchRecord]
    k_p: int
    k_n: int
    reps: int

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "recc_seconds", "baseline_seconds"])
            for r in self.records:
                writer.writerow([r.n, repr(r.recc_seconds), repr(r.baseline_seconds)])

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(
                {
                    "k_p": self.k_p,
                    "k_n": self.k_n,
                    "reps": self.reps,
                    "records": [
                        {"n": r.n, "recc_seconds": r.recc_seconds,
                         "baseline_seconds": r.baseline_seconds}
                        for r in self.records
                    ],
                },
                fh, indent=2,
            )


# ---------------------------------------------------------------------------
# k-means

def _sq_distances(Z: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = (
        (Z * Z).sum(axis=1)[:, None]
        - 2.0 * Z @ centers.T
        + (centers * centers).sum(axis=1)[None, :]
    )
    return np.maximum(d2, 0.0)


def reseed_empty_clusters(Z: np.ndarray, centers: np.ndarray,
                          labels: np.ndarray) -> np.ndarray:
    """Move each empty cluster's center to the point farthest from its
    nearest center (re-seeded sequentially so two empties pick distinct points)."""
    centers = centers.copy()
    counts = np.bincount(labels, minlength=centers.shape[0])
    for j in np.flatnonzero(counts == 0):
        nearest = _sq_distances(Z, centers).min(axis=1)
        centers[j] = Z[int(np.argmax(nearest))]
    return centers


def _kmeans_pp(Z: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = Z.shape[0]
    centers = np.empty((k, Z.shape[1]))
    centers[0] = Z[rng.integers(n)]
    for j in range(1, k):
        d2 = _sq_distances(Z, centers[:j]).min(axis=1)
        total = d2.sum()
        if total == 0.0:
            centers[j] = Z[rng.integers(n)]
        else:
            centers[j] = Z[rng.choice(n, p=d2 / total)]
    return centers


def _lloyd(Z: np.ndarray, k: int, rng: np.random.Generator, tol: float,
           max_iter: int) -> ClusteringResult:
    centers = _kmeans_pp(Z, k, rng)
    prev_inertia = np.inf
    history: list[float] = []
    labels = np.zeros(Z.shape[0], dtype=np.int64)
    inertia = 0.0
    for it in range(1, max_iter + 1):
        d2 = _sq_distances(Z, centers)
        labels = np.argmin(d2, axis=1)
        inertia = float(d2[np.arange(Z.shape[0]), labels].sum())
        history.append(inertia)
        new_centers = centers.copy()
        for j in range(k):
            members = labels == j
            if members.any():
                new_centers[j] = Z[members].mean(axis=0)
        new_centers = reseed_empty_clusters(Z, new_centers, labels)
        if prev_inertia - inertia < tol:
            centers = new_centers
            break
        prev_inertia = inertia
        centers = new_centers
    return ClusteringResult(labels=labels, centroids=centers, inertia=inertia,
                            n_iter=it, inertia_history=history)


def kmeans(Z: np.ndarray, k: int, seed: int = 0, restarts: int = 10,
           tol: float = 1e-8, max_iter: int = 300) -> ClusteringResult:
    """k-means++ seeded Lloyd iterations, best of `restarts` by inertia."""
    Z = np.asarray(Z, dtype=float)
    if k < 2:
        raise ValueError("k must be >= 2")
    if Z.shape[0] < k:
        raise ValueError(f"need at least k={k} points, got {Z.shape[0]}")
    best: ClusteringResult | None = None
    for child in np.random.SeedSequence(seed).spawn(restarts):
        result = _lloyd(Z, k, np.random.default_rng(child), tol, max_iter)
        if best is None or result.inertia < best.inertia:
            best = result
    return best


def label_influential(r: ClusteringResult, g: Graph) -> ClusteringResult:
    """Tag the cluster with the higher mean degree as influential.

    Ties go to the lower cluster id with the tie flag set; empty clusters
    cannot win.
    """
    if r.labels is None or len(r.labels) != g.n_nodes:
        raise ValueError("clustering labels do not match the graph")
    k = r.centroids.shape[0]
    means = np.full(k, -np.inf)
    for j in range(k):
        members = r.labels == j
        if members.any():
            means[j] = g.degree[members].mean()
    winner = int(np.argmax(means))
    r.influential_cluster = winner
    r.influential_tie = bool(np.count_nonzero(means == means[winner]) > 1)
    return r


# ---------------------------------------------------------------------------
# evaluation

def evaluate(pred: np.ndarray, truth: np.ndarray) -> EvalReport:
    """ACC under the optimal label bijection, NMI (arithmetic mean), ARI."""
    pred = np.asarray(pred, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if pred.shape != truth.shape:
        raise ValueError("prediction and truth lengths differ")
    kp = int(pred.max()) + 1
    kt = int(truth.max()) + 1
    confusion = np.zeros((kp, kt), dtype=np.int64)
    np.add.at(confusion, (pred, truth), 1)
    rows, cols = linear_sum_assignment(confusion, maximize=True)
    acc = float(confusion[rows, cols].sum()) / len(pred)
    nmi = float(normalized_mutual_info_score(truth, pred))
    ari = float(adjusted_rand_score(truth, pred))
    return EvalReport(acc=acc, nmi=nmi, ari=ari)


# ---------------------------------------------------------------------------
# timing benchmark

def full_pairwise_contrastive_loss(Z: np.ndarray, pos: np.ndarray) -> float:
    """Conventional baseline: every node that is not a positive (and not i
    itself) counts as a negative, so each term touches all n embeddings."""
    norms = np.linalg.norm(Z, axis=1)
    U = Z / np.where(norms == 0.0, 1.0, norms)[:, None]
    E = np.exp(U @ U.T)
    num = np.take_along_axis(E, pos, axis=1).sum(axis=1)
    den = E.sum(axis=1) - np.diagonal(E) - num
    return float(np.mean(np.log(den) - np.log(num)))


def _sample_index_lists(n: int, k: int, exclude_diag: bool,
                        rng: np.random.Generator) -> np.ndarray:
    rows = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        draw = rng.choice(n - 1, size=k, replace=False)
        rows[i] = np.where(draw >= i, draw + 1, draw) if exclude_diag else draw
    return rows


def _time_call(fn, reps: int) -> float:
    fn()  # warm twice: the first call pays lazy numpy/BLAS setup
    fn()
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps


def bench_contrastive(sizes, k_p: int = 2, k_n: int = 1, reps: int = 5,
                      seed: int = 0, dim: int = 128) -> BenchReport:
    """Mean seconds per loss evaluation for the k-sample loss vs the
    full-pairwise baseline, on random unit-norm embeddings of each size.

    Runs under a single BLAS thread when threadpoolctl is available, per the
    benchmark's single-threaded contract.
    """
    from .trainer import ContrastiveSamples, contrastive_loss

    sizes = [int(n) for n in sizes]
    if len(sizes) < 2:
        raise ValueError("need at least two sizes")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be strictly increasing")
    try:
        from threadpoolctl import threadpool_limits
        guard = threadpool_limits(limits=1)
    except ImportError:
        guard = nullcontext()

    records = []
    rng = np.random.default_rng(seed)
    with guard:
        for n in sizes:
            Z = rng.standard_normal((n, dim))
            Z /= np.linalg.norm(Z, axis=1, keepdims=True)
            pos = _sample_index_lists(n, k_p + k_n, True, rng)
            samples = ContrastiveSamples(pos=pos[:, :k_p], neg=pos[:, k_p:],
                                         k_p=k_p, k_n=k_n)
            recc_s = _time_call(lambda: contrastive_loss(Z, samples), reps)
            base_s = _time_call(lambda: full_pairwise_contrastive_loss(Z, samples.pos),
                                reps)
            records.append(BenchRecord(n=n, recc_seconds=recc_s,
                                       baseline_seconds=base_s))
    return BenchReport(records=records, k_p=k_p, k_n=k_n, reps=reps)
