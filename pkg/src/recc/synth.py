"""Synthetic graphs with planted structure, used by tests and demos."""

from __future__ import annotations

import numpy as np

from .graph import Graph, from_edges


def hub_leaf_graph(n_hubs: int = 8, leaves_per_hub: int = 15
                   ) -> tuple[Graph, np.ndarray]:
    """Fully interconnected hubs, each carrying its own leaves.

    Returns the graph and binary labels (1 = hub / influential). Hubs get the
    first n_hubs indices.
    """
    edges = []
    for a in range(n_hubs):
        for b in range(a + 1, n_hubs):
            edges.append((a, b))
    next_id = n_hubs
    for h in range(n_hubs):
        for _ in range(leaves_per_hub):
            edges.append((h, next_id))
            next_id += 1
    g = from_edges(edges)
    labels = np.zeros(g.n_nodes, dtype=np.int64)
    labels[:n_hubs] = 1
    return g, labels


def two_blob_graph(n_per_blob: int = 15, p_in: float = 0.5, seed: int = 0) -> Graph:
    """Two dense random blobs joined by a single bridge edge.

    Each blob carries a spanning path so it stays connected at any p_in.
    """
    rng = np.random.default_rng(seed)
    edges = []
    for blob in range(2):
        base = blob * n_per_blob
        for i in range(n_per_blob - 1):
            edges.append((base + i, base + i + 1))
        for i in range(n_per_blob):
            for j in range(i + 2, n_per_blob):
                if rng.random() < p_in:
                    edges.append((base + i, base + j))
    edges.append((0, n_per_blob))
    return from_edges(edges)


def random_graph(n: int, p: float, seed: int = 0) -> Graph:
    """Erdos-Renyi G(n, p); a fallback edge keeps the graph non-empty."""
    if n < 2:
        raise ValueError("need n >= 2 for a non-empty graph")
    rng = np.random.default_rng(seed)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    if not edges:
        edges = [(0, 1)]
    # register every node id so isolates keep their slot
    all_nodes = list(range(n))
    registered = {u for e in edges for u in e}
    for u in all_nodes:
        if u not in registered:
            # attach nothing: isolates enter through a self-loop line that is
            # dropped as an edge but keeps the id
            edges.append((u, u))
    return from_edges(edges)
