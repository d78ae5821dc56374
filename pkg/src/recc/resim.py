"""Regular-equivalence similarity matrix and its spectral node features.

Two nodes are regular-equivalence similar when their neighbors are similar,
not when they share neighbors. The similarity matrix is the fixed point of

    S <- alpha * A @ S + I,   started from S = I,

which converges to (I - alpha*A)^-1 for alpha < 1/lambda_max. Node features
are the leading eigenvectors of S, cut at the first significant drop of the
descending eigenvalue curve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, largest_eigenvalue


class CapacityError(ValueError):
    """Node count exceeds the configured dense-storage cap."""


class ConvergenceError(RuntimeError):
    """Fixed-point iteration did not converge; ``partial`` holds the last state."""

    def __init__(self, message: str, partial):
        super().__init__(message)
        self.partial = partial


@dataclass
class ReSimConfig:
    """Parameters of the similarity iteration.

    alpha is derived as alpha_fraction / lambda_max, which keeps it inside
    the admissible open interval (0, 1/lambda_max) for any graph.
    """

    alpha_fraction: float = 0.5
    tol: float = 1e-8
    max_iter: int = 1000
    max_nodes: int = 20_000

    def validate(self) -> None:
        if not 0.0 < self.alpha_fraction < 1.0:
            raise ValueError(f"alpha_fraction must be in (0, 1), got {self.alpha_fraction}")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class ReSimMatrix:
    S: np.ndarray  # dense symmetric n x n
    alpha: float
    iterations: int
    converged: bool

    @property
    def n_nodes(self) -> int:
        return self.S.shape[0]


@dataclass
class ReEigFeatures:
    """Leading eigenvectors of the similarity matrix.

    ``eigenvalues`` holds the full descending spectrum; ``vectors`` the first
    ``r`` unit-norm eigenvectors with each column's largest-magnitude entry
    made positive. ``degenerate`` flags an all-equal spectrum (no gap exists),
    in which case a single constant eigenvector is returned.
    """

    vectors: np.ndarray  # n x r
    eigenvalues: np.ndarray
    r: int
    drop_index: int
    degenerate: bool = False


def compute_re_similarity(g: Graph, cfg: ReSimConfig | None = None) -> ReSimMatrix:
    """Fixed point of S <- alpha*A@S + I, stopped on max-abs change < tol.

    Raises CapacityError when n exceeds cfg.max_nodes (dense n^2 storage) and
    ConvergenceError (carrying the partial result) when max_iter is hit.
    """
    cfg = cfg or ReSimConfig()
    cfg.validate()
    n = g.n_nodes
    if n > cfg.max_nodes:
        raise CapacityError(
            f"{n} nodes exceeds the dense-storage cap of {cfg.max_nodes}"
        )
    alpha = cfg.alpha_fraction / largest_eigenvalue(g)
    A = g.adjacency
    eye = np.eye(n)
    S = np.eye(n)
    for it in range(1, cfg.max_iter + 1):
        S_next = alpha * (A @ S) + eye
        delta = np.max(np.abs(S_next - S))
        S = S_next
        if delta < cfg.tol:
            return ReSimMatrix(S=S, alpha=alpha, iterations=it, converged=True)
    partial = ReSimMatrix(S=S, alpha=alpha, iterations=cfg.max_iter, converged=False)
    raise ConvergenceError(
        f"similarity iteration did not reach tol={cfg.tol} in {cfg.max_iter} steps",
        partial=partial,
    )


def re_eigenfeatures(sim: ReSimMatrix, max_dims: int = 64) -> ReEigFeatures:
    """Eigendecompose S and keep the eigenvectors before the first big drop.

    Eigenvalues are sorted descending; the drop is placed at the k in
    [1, min(n-1, max_dims)] maximizing the successive ratio lambda_k /
    lambda_{k+1} (1-based), and the first k eigenvectors are returned. An
    all-equal spectrum has no meaningful drop: the result is the single
    constant eigenvector with the degenerate flag set.
    """
    if max_dims < 1:
        raise ValueError("max_dims must be >= 1")
    S = sim.S
    n = S.shape[0]
    w, V = np.linalg.eigh(S)
    w = w[::-1].copy()
    V = V[:, ::-1]

    spread = w[0] - w[-1] if n > 1 else 0.0
    if n == 1 or spread <= 1e-9 * max(1.0, abs(w[0])):
        vectors = np.full((n, 1), 1.0 / np.sqrt(n))
        return ReEigFeatures(vectors=vectors, eigenvalues=w, r=1, drop_index=1,
                             degenerate=True)

    kmax = min(n - 1, max_dims)
    floor = max(abs(w[0]), 1.0) * 1e-15
    num = w[:kmax]
    den = np.maximum(w[1:kmax + 1], floor)
    drop = int(np.argmax(num / den)) + 1  # 1-based position of the gap

    vectors = V[:, :drop].copy()
    for c in range(drop):
        col = vectors[:, c]
        if col[np.argmax(np.abs(col))] < 0:
            vectors[:, c] = -col
    return ReEigFeatures(vectors=vectors, eigenvalues=w, r=drop, drop_index=drop)


def resim_cache_key(graph_digest: str, alpha_fraction: float, tol: float) -> str:
    """Filename stem for cached similarity artifacts."""
    return f"resim_{graph_digest[:16]}_a{alpha_fraction:g}_t{tol:g}"


def save_resim(path, sim: ReSimMatrix, re: ReEigFeatures | None = None) -> None:
    """Dump S (and optionally the eigenfeatures) to an .npz file."""
    payload = {
        "S": sim.S,
        "alpha": np.float64(sim.alpha),
        "iterations": np.int64(sim.iterations),
        "converged": np.bool_(sim.converged),
    }
    if re is not None:
        payload.update(
            vectors=re.vectors,
            eigenvalues=re.eigenvalues,
            r=np.int64(re.r),
            drop_index=np.int64(re.drop_index),
            degenerate=np.bool_(re.degenerate),
        )
    np.savez(path, **payload)


def load_resim(path) -> tuple[ReSimMatrix, ReEigFeatures | None]:
    """Inverse of save_resim."""
    with np.load(path) as data:
        sim = ReSimMatrix(
            S=data["S"],
            alpha=float(data["alpha"]),
            iterations=int(data["iterations"]),
            converged=bool(data["converged"]),
        )
        re = None
        if "vectors" in data:
            re = ReEigFeatures(
                vectors=data["vectors"],
                eigenvalues=data["eigenvalues"],
                r=int(data["r"]),
                drop_index=int(data["drop_index"]),
                degenerate=bool(data["degenerate"]),
            )
    return sim, re
