import numpy as np
import pytest

from recc.features import (
    ALL_REPRESENTATIVES,
    LOCAL_REPRESENTATIVES,
    FeatureCombo,
    build_features,
    standardize_columns,
    write_features_csv,
)
from recc.graph import degree_vector
from recc.resim import ReEigFeatures, ReSimMatrix, compute_re_similarity, re_eigenfeatures
from recc.structmetrics import MetricName
from recc.synth import random_graph


def fake_reeig(n, r, seed=0):
    rng = np.random.default_rng(seed)
    vectors = rng.standard_normal((n, r))
    vectors /= np.linalg.norm(vectors, axis=0)
    return ReEigFeatures(vectors=vectors, eigenvalues=np.linspace(r, 1, n),
                         r=r, drop_index=r)


class TestBuildFeatures:
    def test_reeig_degree_schema(self, path3):
        fm = build_features(path3, fake_reeig(3, 3), FeatureCombo.REEIG_DEGREE)
        assert fm.n_features == 4
        assert fm.schema == ["reeig_0", "reeig_1", "reeig_2", "degree"]
        assert fm.standardized

    def test_degree_zscores_on_path(self, path3):
        fm = build_features(path3, combo=FeatureCombo.DEGREE)
        expected = np.array([-1 / np.sqrt(2), np.sqrt(2), -1 / np.sqrt(2)])
        order = [path3.node_ids[x] for x in "abc"]
        np.testing.assert_allclose(fm.X[order, 0], expected, atol=1e-12)

    def test_degenerate_reeig_becomes_zero_column(self, k3):
        sim = ReSimMatrix(S=np.eye(3), alpha=0.0, iterations=1, converged=True)
        re = re_eigenfeatures(sim)
        fm = build_features(k3, re, FeatureCombo.REEIG)
        np.testing.assert_array_equal(fm.X, np.zeros((3, 1)))

    def test_reeig_required(self, k3):
        with pytest.raises(ValueError, match="eigenfeatures"):
            build_features(k3, None, FeatureCombo.REEIG_DEGREE)

    def test_schemas_per_combo(self):
        g = random_graph(12, 0.3, seed=0)
        re = fake_reeig(12, 2)
        local_labels = ["degree", "extended_degree", "egonet_density",
                        "egonet_conductance", "local_clustering",
                        "core_dominance_pearson"]
        all_labels = ["eigenvector", "pagerank"] + local_labels
        expected = {
            FeatureCombo.REEIG_DEGREE: ["reeig_0", "reeig_1", "degree"],
            FeatureCombo.DEGREE: ["degree"],
            FeatureCombo.REEIG_ALL: ["reeig_0", "reeig_1"] + all_labels,
            FeatureCombo.ALL: all_labels,
            FeatureCombo.REEIG_LOCAL: ["reeig_0", "reeig_1"] + local_labels,
            FeatureCombo.LOCAL: local_labels,
            FeatureCombo.REEIG: ["reeig_0", "reeig_1"],
        }
        for combo, schema in expected.items():
            fm = build_features(g, re, combo)
            assert fm.schema == schema, combo
            assert np.isfinite(fm.X).all()

    def test_representative_sets(self):
        assert ALL_REPRESENTATIVES == (
            MetricName.EC, MetricName.PR, MetricName.DEG, MetricName.EXTD,
            MetricName.DE, MetricName.CE, MetricName.LCC, MetricName.CORE_DP)
        assert LOCAL_REPRESENTATIVES == (
            MetricName.DEG, MetricName.EXTD, MetricName.DE, MetricName.CE,
            MetricName.LCC, MetricName.CORE_DP)

    def test_representatives_override(self):
        g = random_graph(10, 0.3, seed=1)
        fm = build_features(g, combo=FeatureCombo.LOCAL,
                            representatives=[MetricName.SPA, MetricName.NM])
        assert fm.schema == ["preferential_attachment", "node_mass"]

    def test_degree_combo_preserves_ranking(self):
        g = random_graph(20, 0.25, seed=2)
        fm = build_features(g, combo=FeatureCombo.DEGREE)
        np.testing.assert_array_equal(np.argsort(fm.X[:, 0], kind="stable"),
                                      np.argsort(degree_vector(g), kind="stable"))

    def test_standardized_columns(self):
        g = random_graph(30, 0.2, seed=3)
        sim = compute_re_similarity(g)
        fm = build_features(g, re_eigenfeatures(sim), FeatureCombo.REEIG_ALL)
        for c in range(fm.n_features):
            col = fm.X[:, c]
            if np.ptp(col) == 0:
                continue
            assert abs(col.mean()) < 1e-9
            assert abs(col.var() - 1.0) < 1e-6

    def test_combo_accepts_strings(self, k3):
        fm = build_features(k3, combo="degree")
        assert fm.schema == ["degree"]


def test_standardize_idempotent(rng):
    X = rng.standard_normal((40, 5)) * np.array([1e-3, 1.0, 50.0, 2.0, 7.0])
    X[:, 3] = 4.2  # constant column
    once = standardize_columns(X)
    twice = standardize_columns(once)
    np.testing.assert_allclose(twice, once, atol=1e-12)
    np.testing.assert_array_equal(once[:, 3], 0.0)


def test_features_csv(tmp_path, k3):
    fm = build_features(k3, fake_reeig(3, 2), FeatureCombo.REEIG_DEGREE)
    path = tmp_path / "features.csv"
    write_features_csv(path, fm, k3)
    lines = path.read_text().splitlines()
    assert lines[0] == "node_id,reeig_0,reeig_1,degree"
    assert len(lines) == 4
