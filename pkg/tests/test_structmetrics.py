from collections import deque

import numpy as np
import pytest

from recc.graph import parse_edge_list
from recc.structmetrics import (
    GLOBAL_METRICS,
    LOCAL_METRICS,
    CorrelationKind,
    MetricName,
    MetricVector,
    compute_all_metrics,
    compute_global_metrics,
    compute_local_metrics,
    compute_metric,
    correlation_analysis,
    neighborhood_ranks,
    write_correlation_csv,
    write_metrics_csv,
)
from recc.synth import random_graph


def bfs_counts(g, s):
    """Distances and shortest-path counts from s, by plain BFS."""
    n = g.n_nodes
    dist = np.full(n, -1)
    sigma = np.zeros(n)
    dist[s] = 0
    sigma[s] = 1
    q = deque([s])
    while q:
        v = q.popleft()
        for w in g.neighbors(v):
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                q.append(w)
            if dist[w] == dist[v] + 1:
                sigma[w] += sigma[v]
    return dist, sigma


def brute_force_betweenness(g):
    """Oracle: sum over unordered pairs of the fraction of shortest paths
    through each node, using the sigma_p(i)*sigma_i(q) identity."""
    n = g.n_nodes
    dist = np.zeros((n, n))
    sigma = np.zeros((n, n))
    for s in range(n):
        dist[s], sigma[s] = bfs_counts(g, s)
    bc = np.zeros(n)
    for p in range(n):
        for q in range(p + 1, n):
            if dist[p, q] < 0 or sigma[p, q] == 0:
                continue
            for i in range(n):
                if i in (p, q) or dist[p, i] < 0 or dist[i, q] < 0:
                    continue
                if dist[p, i] + dist[i, q] == dist[p, q]:
                    bc[i] += sigma[p, i] * sigma[i, q] / sigma[p, q]
    return bc


class TestGlobalMetrics:
    def test_triangle_is_uniform(self, k3):
        m = compute_global_metrics(k3)
        np.testing.assert_allclose(m[MetricName.EC].values, 1 / 3, atol=1e-8)
        np.testing.assert_allclose(m[MetricName.CC].values, 1.0, atol=1e-12)
        np.testing.assert_allclose(m[MetricName.BC].values, 0.0, atol=1e-12)
        np.testing.assert_allclose(m[MetricName.PR].values, 1 / 3, atol=1e-9)

    def test_path_betweenness(self, path3):
        bc = compute_metric(path3, MetricName.BC)
        expected = np.zeros(3)
        expected[path3.node_ids["b"]] = 1.0
        np.testing.assert_allclose(bc, expected, atol=1e-12)

    def test_star_closeness(self, star4):
        cc = compute_metric(star4, MetricName.CC)
        assert cc[star4.node_ids["c"]] == pytest.approx(1.0)
        assert cc[star4.node_ids["l1"]] == pytest.approx(4 / 7)

    def test_betweenness_matches_brute_force(self):
        for seed in range(8):
            g = random_graph(6 + (seed * 5) % 25, 0.2, seed=seed)
            got = compute_metric(g, MetricName.BC)
            np.testing.assert_allclose(got, brute_force_betweenness(g), atol=1e-9)

    def test_pagerank_sums_to_one(self):
        for seed in range(5):
            g = random_graph(30, 0.15, seed=seed)
            assert compute_metric(g, MetricName.PR).sum() == pytest.approx(1.0, abs=1e-9)

    def test_eigenvector_residual(self):
        g = random_graph(30, 0.15, seed=4)
        v = compute_metric(g, MetricName.EC)
        lam = g.lambda_max
        assert np.abs(g.adjacency @ v - lam * v).max() < 1e-6
        assert (v >= 0).all()

    def test_closeness_per_component(self):
        # two disjoint edges: each component is a K2, so CC = (2-1)/1 = 1
        g = parse_edge_list("a b\nc d")
        np.testing.assert_allclose(compute_metric(g, MetricName.CC), 1.0)

    def test_closeness_singleton_component_is_zero(self):
        g = parse_edge_list("a b\nc c")
        assert compute_metric(g, MetricName.CC)[g.node_ids["c"]] == 0.0


class TestLocalMetrics:
    def test_triangle_node(self, k3):
        m = compute_local_metrics(k3)
        np.testing.assert_allclose(m[MetricName.LCC].values, 1.0)
        np.testing.assert_allclose(m[MetricName.DE].values, 1.0)
        np.testing.assert_allclose(m[MetricName.NM].values, 3.0)
        np.testing.assert_allclose(m[MetricName.CE].values, 0.0)
        np.testing.assert_allclose(m[MetricName.CORE_DC].values, 1.0)
        np.testing.assert_allclose(m[MetricName.CORE_DJ].values, 2 / 3)

    def test_path_extended_degree(self, path3):
        extd = compute_metric(path3, MetricName.EXTD)
        assert extd[path3.node_ids["b"]] == 4.0
        assert extd[path3.node_ids["a"]] == 3.0

    def test_path_accumulated_degree(self, path3):
        accd = compute_metric(path3, MetricName.ACCD)
        # b: 2 + (1 + 2) + (1 + 2); a: 1 + (2 + (1 + 1))
        assert accd[path3.node_ids["b"]] == 8.0
        assert accd[path3.node_ids["a"]] == 5.0

    def test_path_egonet_metrics(self, path3):
        a, b = path3.node_ids["a"], path3.node_ids["b"]
        assert compute_metric(path3, MetricName.NM)[b] == 2.0
        assert compute_metric(path3, MetricName.NM)[a] == 1.0
        assert compute_metric(path3, MetricName.DE)[b] == pytest.approx(2 / 3)
        assert compute_metric(path3, MetricName.DE)[a] == 1.0
        assert compute_metric(path3, MetricName.CE)[a] == 1.0
        assert compute_metric(path3, MetricName.CE)[b] == 0.0
        assert compute_metric(path3, MetricName.CORE_DC)[b] == 0.0

    def test_star_center(self, star4):
        c = star4.node_ids["c"]
        assert compute_metric(star4, MetricName.LCC)[c] == 0.0
        assert compute_metric(star4, MetricName.SPA)[c] == 16.0
        assert compute_metric(star4, MetricName.SPA)[star4.node_ids["l1"]] == 4.0

    def test_degree_one_conventions(self, k2):
        # degree <= 1 leaves no neighbor pairs: DE and LCC fall back to 0
        assert (compute_metric(k2, MetricName.LCC) == 0).all()
        de = compute_metric(k2, MetricName.DE)
        np.testing.assert_allclose(de, 1.0)  # N+ egonet is the whole K2

    def test_core_dominance_pearson_matches_corrcoef(self):
        g = random_graph(20, 0.25, seed=11)
        got = compute_metric(g, MetricName.CORE_DP)
        A = g.adjacency.toarray()
        expected = np.zeros(g.n_nodes)
        for u in range(g.n_nodes):
            for v in g.neighbors(u):
                expected[u] += np.corrcoef(A[u], A[v])[0, 1]
        np.testing.assert_allclose(got, expected, atol=1e-9)

    def test_value_ranges(self):
        for seed in range(5):
            g = random_graph(25, 0.2, seed=seed)
            for name in (MetricName.DE, MetricName.LCC, MetricName.CE):
                v = compute_metric(g, name)
                assert (v >= 0).all() and (v <= 1 + 1e-12).all()


class TestVertexTransitive:
    @pytest.mark.parametrize("edges", [
        "0 1\n1 2\n2 3\n3 4\n4 5\n5 0",                      # C6
        "0 1\n0 2\n0 3\n1 2\n1 3\n2 3",                       # K4
    ])
    def test_all_metrics_constant(self, edges):
        g = parse_edge_list(edges)
        for name, mv in compute_all_metrics(g).items():
            assert np.ptp(mv.values) < 1e-8, name


class TestNeighborhoodRanks:
    def test_local_maximum_is_zero(self, star4):
        deg = MetricVector(MetricName.DEG, compute_metric(star4, MetricName.DEG))
        ranks = neighborhood_ranks(star4, deg)
        assert ranks[star4.node_ids["c"]] == 0.0
        assert ranks[star4.node_ids["l1"]] == 1.0

    def test_strictly_smaller_than_all_neighbors(self):
        g = parse_edge_list("c a\nc b\nc d\na b\na d\nb d")  # c inside K4-minus? no: c attached to a,b,d forming K4
        m = np.array([0.0, 1, 1, 1])  # node c (index 0) below its 3 neighbors
        assert neighborhood_ranks(g, m)[0] == 1.0

    def test_path_with_degree_metric(self, path3):
        deg = compute_metric(path3, MetricName.DEG)
        ranks = neighborhood_ranks(path3, deg)
        assert ranks[path3.node_ids["a"]] == 1.0
        assert ranks[path3.node_ids["b"]] == 0.0

    def test_isolated_node_is_zero(self):
        g = parse_edge_list("a b\nc c")
        ranks = neighborhood_ranks(g, np.array([5.0, 1.0, 3.0]))
        assert ranks[g.node_ids["c"]] == 0.0

    def test_length_mismatch(self, path3):
        with pytest.raises(ValueError):
            neighborhood_ranks(path3, np.zeros(5))


class TestCorrelationAnalysis:
    def test_metric_with_itself(self, rng):
        v = rng.random(20)
        m = MetricVector(MetricName.EC, v)
        reports = correlation_analysis([m, MetricVector(MetricName.PR, v.copy())], random_graph(20, 0.2, seed=0))
        for rep in reports:
            assert rep.coefficient == pytest.approx(1.0)
            assert rep.kind is CorrelationKind.SPEARMAN_GLOBAL

    def test_negation_is_minus_one(self, rng):
        v = rng.random(20)
        g = random_graph(20, 0.2, seed=0)
        reports = correlation_analysis(
            [MetricVector(MetricName.EC, v), MetricVector(MetricName.PR, -v)], g)
        cross = [r for r in reports if r.metric_pair == (MetricName.EC, MetricName.PR)]
        assert cross[0].coefficient == pytest.approx(-1.0)

    def test_rank_invariance_under_monotone_transform(self, rng):
        x = rng.random(30)
        g = random_graph(30, 0.2, seed=1)
        reports = correlation_analysis(
            [MetricVector(MetricName.EC, x), MetricVector(MetricName.PR, x ** 3)], g)
        cross = [r for r in reports if r.metric_pair == (MetricName.EC, MetricName.PR)]
        assert cross[0].coefficient == pytest.approx(1.0)

    def test_constant_global_vector_undefined(self, rng):
        g = random_graph(10, 0.3, seed=2)
        reports = correlation_analysis(
            [MetricVector(MetricName.EC, np.ones(10)),
             MetricVector(MetricName.PR, rng.random(10))], g)
        cross = [r for r in reports if MetricName.EC in r.metric_pair
                 and MetricName.PR in r.metric_pair]
        assert cross[0].undefined
        assert cross[0].coefficient is None

    def test_lcc_on_star_network_undefined(self, star4):
        # every node of a star has LCC 0, so the transformed vector is constant
        lcc = MetricVector(MetricName.LCC, compute_metric(star4, MetricName.LCC))
        deg = MetricVector(MetricName.DEG, compute_metric(star4, MetricName.DEG))
        reports = correlation_analysis([lcc, deg], star4)
        pair = [r for r in reports if set(r.metric_pair) == {MetricName.LCC, MetricName.DEG}]
        assert pair[0].undefined
        assert pair[0].kind is CorrelationKind.PEARSON_NEIGHBORHOOD_RANK

    def test_local_pairs_use_neighborhood_ranks(self):
        g = random_graph(25, 0.25, seed=5)
        vs = [MetricVector(m, compute_metric(g, m))
              for m in (MetricName.DEG, MetricName.EXTD)]
        reports = correlation_analysis(vs, g)
        cross = [r for r in reports if r.metric_pair == (MetricName.DEG, MetricName.EXTD)]
        assert cross[0].kind is CorrelationKind.PEARSON_NEIGHBORHOOD_RANK
        ra = neighborhood_ranks(g, vs[0])
        rb = neighborhood_ranks(g, vs[1])
        expected = np.corrcoef(ra, rb)[0, 1]
        assert cross[0].coefficient == pytest.approx(expected, abs=1e-9)

    def test_mixed_family_pairs_skipped(self, rng):
        g = random_graph(15, 0.3, seed=3)
        reports = correlation_analysis(
            [MetricVector(MetricName.EC, rng.random(15)),
             MetricVector(MetricName.DEG, rng.random(15))], g)
        assert all(
            (r.metric_pair[0] in GLOBAL_METRICS) == (r.metric_pair[1] in GLOBAL_METRICS)
            for r in reports)
        assert not any(set(r.metric_pair) == {MetricName.EC, MetricName.DEG}
                       for r in reports)

    def test_length_mismatch(self, rng):
        g = random_graph(10, 0.3, seed=0)
        with pytest.raises(ValueError):
            correlation_analysis(
                [MetricVector(MetricName.EC, rng.random(10)),
                 MetricVector(MetricName.PR, rng.random(11))], g)

    def test_needs_two_vectors(self, rng):
        g = random_graph(10, 0.3, seed=0)
        with pytest.raises(ValueError):
            correlation_analysis([MetricVector(MetricName.EC, rng.random(10))], g)


def test_csv_exports(tmp_path, star4):
    metrics = compute_all_metrics(star4)
    mpath = tmp_path / "metrics.csv"
    write_metrics_csv(mpath, star4, metrics)
    lines = mpath.read_text().splitlines()
    assert lines[0].split(",")[0] == "node_id"
    assert len(lines) == 1 + star4.n_nodes

    reports = correlation_analysis(list(metrics.values()), star4)
    cpath = tmp_path / "corr.csv"
    write_correlation_csv(cpath, reports)
    text = cpath.read_text()
    assert "EC" in text and "LCC" in text
    # undefined cells render empty: the star's LCC column is constant
    rows = {line.split(",")[0]: line.split(",") for line in text.splitlines()[1:]}
    header = text.splitlines()[0].split(",")
    assert rows["LCC"][header.index("Deg")] == ""


def test_global_and_local_partition():
    assert set(GLOBAL_METRICS) | set(LOCAL_METRICS) == set(MetricName)
    assert not set(GLOBAL_METRICS) & set(LOCAL_METRICS)
