"""Global and local structural metrics plus the correlation analysis.

Global metrics (eigenvector, PageRank, closeness, betweenness) rank a node
against the whole network; local metrics depend only on the neighborhood
N(u) or the closed neighborhood N+(u) = N(u) + {u}. Correlations across
metrics are Spearman on raw values for the global family and Pearson on
normalized neighborhood ranks for the local family.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
import scipy.sparse.csgraph as csgraph
from scipy import stats

from .graph import Graph, PowerIterationError, power_iteration


class MetricName(str, Enum):
    EC = "EC"
    PR = "PR"
    CC = "CC"
    BC = "BC"
    DEG = "Deg"
    EXTD = "EXTD"
    ACCD = "ACCD"
    NM = "NM"
    CE = "CE"
    DE = "DE"
    LCC = "LCC"
    CORE_DC = "CoreDC"
    CORE_DJ = "CoreDJ"
    CORE_DP = "CoreDP"
    SPA = "SPA"


GLOBAL_METRICS = (MetricName.EC, MetricName.PR, MetricName.CC, MetricName.BC)
LOCAL_METRICS = (
    MetricName.DEG, MetricName.EXTD, MetricName.ACCD, MetricName.NM,
    MetricName.CE, MetricName.DE, MetricName.LCC, MetricName.CORE_DC,
    MetricName.CORE_DJ, MetricName.CORE_DP, MetricName.SPA,
)


class CorrelationKind(str, Enum):
    SPEARMAN_GLOBAL = "spearman_global"
    PEARSON_NEIGHBORHOOD_RANK = "pearson_neighborhood_rank"


@dataclass
class MetricVector:
    metric_name: MetricName
    values: np.ndarray


@dataclass
class CorrelationReport:
    metric_pair: tuple[MetricName, MetricName]
    coefficient: float | None
    kind: CorrelationKind
    undefined: bool = False


# ---------------------------------------------------------------------------
# global metrics

def _eigenvector(g: Graph) -> np.ndarray:
    # principal eigenvector of A, normalized to unit 1-norm
    _, v = power_iteration(g.adjacency)
    v = np.abs(v)
    return v / v.sum()


def _pagerank(g: Graph, damping: float = 0.85, tol: float = 1e-10,
              max_iter: int = 10_000) -> np.ndarray:
    n = g.n_nodes
    beta = (1.0 - damping) / n
    deg = g.degree.astype(float)
    deg_safe = np.where(deg > 0, deg, 1.0)
    v = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        v_next = beta + damping * (g.adjacency @ (v / deg_safe))
        if np.abs(v_next - v).sum() < tol:
            v = v_next
            break
        v = v_next
    else:
        raise PowerIterationError("PageRank iteration did not converge",
                                  estimate=float("nan"))
    return v / v.sum()


def _distance_rows(g: Graph, sources: np.ndarray) -> np.ndarray:
    # unweighted shortest-path (BFS) distances; inf across components
    return csgraph.shortest_path(g.adjacency, method="D", unweighted=True,
                                 directed=False, indices=sources)


def _closeness(g: Graph) -> np.ndarray:
    """(|C|-1) / sum of in-component distances, per component."""
    n = g.n_nodes
    n_comp, comp = csgraph.connected_components(g.adjacency, directed=False)
    comp_size = np.bincount(comp, minlength=n_comp)
    cc = np.zeros(n)
    chunk = 512
    for start in range(0, n, chunk):
        sources = np.arange(start, min(start + chunk, n))
        dist = np.atleast_2d(_distance_rows(g, sources))
        for row, i in enumerate(sources):
            size = comp_size[comp[i]]
            if size <= 1:
                continue
            d = dist[row]
            total = d[np.isfinite(d)].sum()
            cc[i] = (size - 1) / total
    return cc


def _betweenness(g: Graph) -> np.ndarray:
    """Brandes accumulation; unordered-pair convention (undirected halving)."""
    n = g.n_nodes
    bc = np.zeros(n)
    for s in range(n):
        sigma = np.zeros(n)
        sigma[s] = 1.0
        dist = np.full(n, -1, dtype=np.int64)
        dist[s] = 0
        preds: list[list[int]] = [[] for _ in range(n)]
        order = []
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            dv = dist[v]
            for w in g.neighbors(v):
                if dist[w] < 0:
                    dist[w] = dv + 1
                    queue.append(w)
                if dist[w] == dv + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = np.zeros(n)
        for w in reversed(order):
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
            if w != s:
                bc[w] += delta[w]
    return bc / 2.0


# ---------------------------------------------------------------------------
# local metrics

def _neighbor_lists(g: Graph) -> list[np.ndarray]:
    return [g.neighbors(i) for i in range(g.n_nodes)]


def _egonet_counts(g: Graph) -> tuple[np.ndarray, np.ndarray]:
    """Edge counts inside N(u) (open) and N+(u) (closed), per node."""
    n = g.n_nodes
    nbrs = _neighbor_lists(g)
    open_edges = np.zeros(n)
    closed_edges = np.zeros(n)
    mask = np.zeros(n, dtype=bool)
    for u in range(n):
        nu = nbrs[u]
        mask[nu] = True
        open_cnt = 0
        for v in nu:
            open_cnt += int(np.count_nonzero(mask[nbrs[v]]))
        open_edges[u] = open_cnt / 2.0
        # edges inside N+(u) add the d(u) spokes from u to its neighbors
        closed_edges[u] = open_edges[u] + len(nu)
        mask[nu] = False
    return open_edges, closed_edges


def _common_neighbor_sums(g: Graph) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-node sums over neighbors v of cosine, Jaccard, and Pearson overlap."""
    n = g.n_nodes
    nbrs = _neighbor_lists(g)
    deg = g.degree.astype(float)
    cos = np.zeros(n)
    jac = np.zeros(n)
    pea = np.zeros(n)
    mask = np.zeros(n, dtype=bool)
    for u in range(n):
        nu = nbrs[u]
        du = deg[u]
        if du == 0:
            continue
        mask[nu] = True
        var_u = du * (1.0 - du / n)
        for v in nu:
            dv = deg[v]
            common = int(np.count_nonzero(mask[nbrs[v]]))
            cos[u] += common / np.sqrt(du * dv)
            jac[u] += common / (du + dv - common)
            # Pearson of the binary adjacency rows in closed form
            var_v = dv * (1.0 - dv / n)
            if var_u > 0 and var_v > 0:
                pea[u] += (common - du * dv / n) / np.sqrt(var_u * var_v)
        mask[nu] = False
    return cos, jac, pea


def _extended_degree(g: Graph) -> np.ndarray:
    d = g.degree.astype(float)
    return d + g.adjacency @ d


def _accumulated_degree(g: Graph) -> np.ndarray:
    d = g.degree.astype(float)
    return d + g.adjacency @ (d + g.adjacency @ d)


def _node_mass(g: Graph) -> np.ndarray:
    return _egonet_counts(g)[1]


def _egonet_density(g: Graph) -> np.ndarray:
    _, closed = _egonet_counts(g)
    size = g.degree + 1
    pairs = size * (size - 1) / 2.0
    return np.where(pairs > 0, closed / np.where(pairs > 0, pairs, 1.0), 0.0)


def _local_clustering(g: Graph) -> np.ndarray:
    open_edges, _ = _egonet_counts(g)
    d = g.degree
    pairs = d * (d - 1) / 2.0
    return np.where(pairs > 0, open_edges / np.where(pairs > 0, pairs, 1.0), 0.0)


def _egonet_conductance(g: Graph) -> np.ndarray:
    """Boundary edge count over the smaller side's volume; 0 when a side is empty."""
    n = g.n_nodes
    d = g.degree.astype(float)
    total_vol = d.sum()
    open_edges, closed_edges = _egonet_counts(g)
    nbrs = _neighbor_lists(g)
    ce = np.zeros(n)
    for u in range(n):
        inside = np.concatenate([[u], nbrs[u]])
        vol_in = d[inside].sum()
        cut = vol_in - 2.0 * closed_edges[u]
        denom = min(vol_in, total_vol - vol_in)
        ce[u] = cut / denom if denom > 0 else 0.0
    return ce


def _preferential_attachment(g: Graph) -> np.ndarray:
    d = g.degree.astype(float)
    return d * (g.adjacency @ d)


_COMPUTE = {
    MetricName.EC: _eigenvector,
    MetricName.PR: _pagerank,
    MetricName.CC: _closeness,
    MetricName.BC: _betweenness,
    MetricName.DEG: lambda g: g.degree.astype(float),
    MetricName.EXTD: _extended_degree,
    MetricName.ACCD: _accumulated_degree,
    MetricName.NM: _node_mass,
    MetricName.CE: _egonet_conductance,
    MetricName.DE: _egonet_density,
    MetricName.LCC: _local_clustering,
    MetricName.CORE_DC: lambda g: _common_neighbor_sums(g)[0],
    MetricName.CORE_DJ: lambda g: _common_neighbor_sums(g)[1],
    MetricName.CORE_DP: lambda g: _common_neighbor_sums(g)[2],
    MetricName.SPA: _preferential_attachment,
}


def compute_metric(g: Graph, name: MetricName) -> np.ndarray:
    """Single metric vector by name."""
    if g.n_nodes == 0:
        raise ValueError("empty graph")
    return _COMPUTE[MetricName(name)](g)


def compute_global_metrics(g: Graph) -> dict[MetricName, MetricVector]:
    """EC, PR, CC, BC over the whole graph."""
    return {m: MetricVector(m, compute_metric(g, m)) for m in GLOBAL_METRICS}


def compute_local_metrics(g: Graph) -> dict[MetricName, MetricVector]:
    """All eleven neighborhood metrics."""
    return {m: MetricVector(m, compute_metric(g, m)) for m in LOCAL_METRICS}


def compute_all_metrics(g: Graph) -> dict[MetricName, MetricVector]:
    out = compute_global_metrics(g)
    out.update(compute_local_metrics(g))
    return out


def neighborhood_ranks(g: Graph, m: MetricVector | np.ndarray) -> np.ndarray:
    """Fraction of i's neighbors whose metric value strictly exceeds m[i].

    0 for isolated nodes.
    """
    values = m.values if isinstance(m, MetricVector) else np.asarray(m, dtype=float)
    if len(values) != g.n_nodes:
        raise ValueError("metric length does not match node count")
    ranks = np.zeros(g.n_nodes)
    for i in range(g.n_nodes):
        nbr = g.neighbors(i)
        if len(nbr) == 0:
            continue
        ranks[i] = np.count_nonzero(values[nbr] > values[i]) / len(nbr)
    return ranks


def _is_constant(v: np.ndarray) -> bool:
    return bool(np.all(v == v[0]))


def correlation_analysis(vectors: Sequence[MetricVector],
                         g: Graph) -> list[CorrelationReport]:
    """Pairwise correlations within each metric family.

    Global pairs get Spearman on raw values (average ranks on ties); local
    pairs get Pearson on the neighborhood-rank transform. Pairs mixing the
    families are not emitted. A constant vector (raw for global, transformed
    for local) yields an undefined report instead of a coefficient.
    """
    vectors = list(vectors)
    if len(vectors) < 2:
        raise ValueError("need at least two metric vectors")
    n = len(vectors[0].values)
    for mv in vectors:
        if len(mv.values) != n:
            raise ValueError("metric vectors have mismatched lengths")

    transformed = {}
    for idx, mv in enumerate(vectors):
        if mv.metric_name in LOCAL_METRICS:
            transformed[idx] = neighborhood_ranks(g, mv)

    reports = []
    for a in range(len(vectors)):
        for b in range(a, len(vectors)):
            ma, mb = vectors[a], vectors[b]
            a_global = ma.metric_name in GLOBAL_METRICS
            b_global = mb.metric_name in GLOBAL_METRICS
            if a_global != b_global:
                continue
            pair = (ma.metric_name, mb.metric_name)
            if a_global:
                x, y = ma.values, mb.values
                kind = CorrelationKind.SPEARMAN_GLOBAL
            else:
                x, y = transformed[a], transformed[b]
                kind = CorrelationKind.PEARSON_NEIGHBORHOOD_RANK
            if _is_constant(x) or _is_constant(y):
                reports.append(CorrelationReport(pair, None, kind, undefined=True))
                continue
            if kind is CorrelationKind.SPEARMAN_GLOBAL:
                coeff = float(stats.spearmanr(x, y)[0])
            else:
                coeff = float(stats.pearsonr(x, y)[0])
            reports.append(CorrelationReport(pair, coeff, kind))
    return reports


# ---------------------------------------------------------------------------
# CSV export

def write_metrics_csv(path, g: Graph, metrics: dict[MetricName, MetricVector]) -> None:
    """One row per node, one column per metric."""
    names = list(metrics)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node_id"] + [m.value for m in names])
        for i in range(g.n_nodes):
            writer.writerow([g.index_to_id[i]] +
                            [repr(float(metrics[m].values[i])) for m in names])


def write_correlation_csv(path, reports: Sequence[CorrelationReport]) -> None:
    """Square correlation matrix; undefined or uncomputed cells stay empty."""
    names: list[MetricName] = []
    for rep in reports:
        for m in rep.metric_pair:
            if m not in names:
                names.append(m)
    cells = {}
    for rep in reports:
        a, b = rep.metric_pair
        value = "" if rep.undefined else repr(rep.coefficient)
        cells[(a, b)] = value
        cells[(b, a)] = value
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([""] + [m.value for m in names])
        for a in names:
            writer.writerow([a.value] + [cells.get((a, b), "") for b in names])
