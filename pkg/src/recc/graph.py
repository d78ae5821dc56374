"""Undirected graph container, edge-list ingestion, and spectral utilities.

Graphs are simple (no self-loops, no duplicate or weighted edges) and
undirected; directed input is symmetrized on ingestion. Node ids from the
input are mapped to dense 0-based indices in first-appearance order. A
constructed Graph is immutable by convention and safe to share read-only.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import IO, Iterable, Hashable

import numpy as np
import scipy.sparse as sp


class GraphParseError(ValueError):
    """Raised when an edge-list or label file cannot be parsed."""


class PowerIterationError(RuntimeError):
    """Power iteration did not converge within max_iter.

    The last Rayleigh-quotient estimate is available as ``estimate``.
    """

    def __init__(self, message: str, estimate: float):
        super().__init__(message)
        self.estimate = estimate


@dataclass
class Graph:
    """Simple undirected graph with dense 0-based node indices.

    ``adjacency`` is a symmetric CSR matrix with 1.0 entries and a zero
    diagonal; ``degree[i]`` counts the stored neighbors of node i.
    """

    n_nodes: int
    edges: frozenset  # of (i, j) index pairs with i < j
    adjacency: sp.csr_matrix
    degree: np.ndarray
    node_ids: dict  # external id -> dense index
    index_to_id: list

    # cached spectral info, filled lazily by largest_eigenvalue
    _lambda_max: float | None = field(default=None, repr=False, compare=False)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def neighbors(self, i: int) -> np.ndarray:
        """Neighbor indices of node i (ascending)."""
        a = self.adjacency
        return a.indices[a.indptr[i]:a.indptr[i + 1]]

    @property
    def lambda_max(self) -> float:
        """Largest adjacency eigenvalue, computed once at default tolerance."""
        if self._lambda_max is None:
            self._lambda_max = largest_eigenvalue(self)
        return self._lambda_max


def _assemble(pairs: Iterable[tuple[Hashable, Hashable]]) -> Graph:
    node_ids: dict = {}
    edges: set[tuple[int, int]] = set()
    for u, v in pairs:
        iu = node_ids.setdefault(u, len(node_ids))
        iv = node_ids.setdefault(v, len(node_ids))
        if iu == iv:
            continue  # self-loop dropped, node registration kept
        edges.add((iu, iv) if iu < iv else (iv, iu))
    if not edges:
        raise GraphParseError("no edges")
    n = len(node_ids)
    rows, cols = zip(*edges)
    rows = np.asarray(rows)
    cols = np.asarray(cols)
    data = np.ones(2 * len(edges))
    adj = sp.coo_matrix(
        (data, (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
        shape=(n, n),
    ).tocsr()
    degree = np.asarray(adj.sum(axis=1)).ravel().astype(np.int64)
    index_to_id = [None] * n
    for ext, idx in node_ids.items():
        index_to_id[idx] = ext
    return Graph(
        n_nodes=n,
        edges=frozenset(edges),
        adjacency=adj,
        degree=degree,
        node_ids=node_ids,
        index_to_id=index_to_id,
    )


def from_edges(pairs: Iterable[tuple[Hashable, Hashable]]) -> Graph:
    """Build a Graph from (u, v) id pairs; duplicates and self-loops collapse."""
    return _assemble(pairs)


def _iter_lines(source: str | bytes | IO) -> Iterable[str]:
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        return source.splitlines()
    text = source.read()
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    return text.splitlines()


def parse_edge_list(source: str | bytes | IO) -> Graph:
    """Parse whitespace-separated edge-list text into a Graph.

    One edge per line (``source target [ignored...]``); lines starting with
    '#' or '%' are comments. Self-loops are dropped (the node id is still
    registered), duplicate edges collapse, and any third token is ignored.

    Raises GraphParseError on a one-token line (with its line number) or when
    no edges remain.
    """
    pairs = []
    for lineno, raw in enumerate(_iter_lines(source), start=1):
        line = raw.strip()
        if not line or line[0] in "#%":
            continue
        tokens = line.split()
        if len(tokens) < 2:
            raise GraphParseError(f"line {lineno}: expected 'source target', got {line!r}")
        pairs.append((tokens[0], tokens[1]))
    return _assemble(pairs)


def parse_label_file(source: str | bytes | IO, g: Graph) -> np.ndarray:
    """Parse ``node_id label_int`` lines into a per-node label vector.

    Every node of g must be labeled exactly once, using the same id
    vocabulary as the edge list; unknown or duplicate ids are errors. Label
    values are remapped to a contiguous 0-based range by sorted original
    value, so binary {0, 1} files keep 0 = non-influential, 1 = influential.
    """
    raw = np.full(g.n_nodes, -1, dtype=np.int64)
    seen = np.zeros(g.n_nodes, dtype=bool)
    for lineno, rawline in enumerate(_iter_lines(source), start=1):
        line = rawline.strip()
        if not line or line[0] in "#%":
            continue
        tokens = line.split()
        if len(tokens) < 2:
            raise GraphParseError(f"line {lineno}: expected 'node_id label', got {line!r}")
        if tokens[0] not in g.node_ids:
            raise GraphParseError(f"line {lineno}: node {tokens[0]!r} not in edge list")
        try:
            value = int(tokens[1])
        except ValueError:
            raise GraphParseError(f"line {lineno}: label {tokens[1]!r} is not an integer") from None
        idx = g.node_ids[tokens[0]]
        if seen[idx]:
            raise GraphParseError(f"line {lineno}: duplicate label for node {tokens[0]!r}")
        seen[idx] = True
        raw[idx] = value
    if not seen.all():
        missing = int((~seen).sum())
        raise GraphParseError(f"{missing} node(s) missing from label file")
    values = np.unique(raw)
    remap = {v: i for i, v in enumerate(values.tolist())}
    return np.array([remap[v] for v in raw.tolist()], dtype=np.int64)


def edge_list_text(g: Graph) -> str:
    """Serialize g back to edge-list text (external ids, one edge per line)."""
    lines = []
    for i, j in sorted(g.edges):
        lines.append(f"{g.index_to_id[i]} {g.index_to_id[j]}")
    return "\n".join(lines) + "\n"


def label_text(g: Graph, labels: np.ndarray) -> str:
    """Serialize a label vector to ``node_id label`` lines."""
    lines = [f"{g.index_to_id[i]} {int(labels[i])}" for i in range(g.n_nodes)]
    return "\n".join(lines) + "\n"


def graph_hash(g: Graph) -> str:
    """Content hash over the external-id edge set; stable across line order."""
    h = hashlib.sha256()
    h.update(str(g.n_nodes).encode())
    pairs = sorted(
        tuple(sorted((str(g.index_to_id[i]), str(g.index_to_id[j])))) for i, j in g.edges
    )
    for u, v in pairs:
        h.update(f"{u},{v};".encode())
    return h.hexdigest()


def degree_vector(g: Graph) -> np.ndarray:
    """Per-node degree counts (copy; isolated nodes report 0)."""
    return g.degree.copy()


def power_iteration(adjacency: sp.spmatrix, tol: float = 1e-10,
                    max_iter: int = 10_000) -> tuple[float, np.ndarray]:
    """Dominant eigenpair of a symmetric nonnegative matrix.

    Iterates on A + I from the all-ones vector: the unit shift keeps
    bipartite-like spectra (where +lambda_max and -lambda_max tie in
    magnitude) from oscillating, without moving the eigenvector. The
    returned value is the Rayleigh quotient of A itself; iteration stops
    when successive quotients differ by less than tol.
    """
    n = adjacency.shape[0]
    x = np.ones(n) / np.sqrt(n)
    prev = float(x @ (adjacency @ x))
    for _ in range(max_iter):
        y = adjacency @ x + x
        x = y / np.linalg.norm(y)
        rq = float(x @ (adjacency @ x))
        if abs(rq - prev) < tol:
            return rq, x
        prev = rq
    raise PowerIterationError(
        f"power iteration did not converge in {max_iter} iterations "
        f"(last estimate {prev:.12g})",
        estimate=prev,
    )


def largest_eigenvalue(g: Graph, tol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Largest eigenvalue of the adjacency matrix via power iteration.

    Deterministic (all-ones start). Requires at least one edge.
    """
    if g.n_edges == 0:
        raise ValueError("graph has no edges")
    value, _ = power_iteration(g.adjacency, tol=tol, max_iter=max_iter)
    return value
