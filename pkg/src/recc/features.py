"""Node feature assembly: similarity eigenvectors plus structural metrics.

The default combination concatenates the similarity eigenvectors with the
degree column; the other combinations cover the feature ablations. Every
column is z-scored because eigenvector-scale and count-scale columns would
otherwise mix badly; constant columns become all-zeros so the width stays
stable across inputs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .graph import Graph, degree_vector
from .resim import ReEigFeatures
from .structmetrics import MetricName, compute_metric


class FeatureCombo(str, Enum):
    REEIG_DEGREE = "reeig+degree"
    DEGREE = "degree"
    REEIG_ALL = "reeig+all"
    ALL = "all"
    REEIG_LOCAL = "reeig+local"
    LOCAL = "local"
    REEIG = "reeig"


# representative metric subsets established by the correlation analysis
GLOBAL_REPRESENTATIVES = (MetricName.EC, MetricName.PR)
LOCAL_REPRESENTATIVES = (
    MetricName.DEG, MetricName.EXTD, MetricName.DE,
    MetricName.CE, MetricName.LCC, MetricName.CORE_DP,
)
ALL_REPRESENTATIVES = GLOBAL_REPRESENTATIVES + LOCAL_REPRESENTATIVES

_COLUMN_LABELS = {
    MetricName.EC: "eigenvector",
    MetricName.PR: "pagerank",
    MetricName.CC: "closeness",
    MetricName.BC: "betweenness",
    MetricName.DEG: "degree",
    MetricName.EXTD: "extended_degree",
    MetricName.ACCD: "accumulated_degree",
    MetricName.NM: "node_mass",
    MetricName.CE: "egonet_conductance",
    MetricName.DE: "egonet_density",
    MetricName.LCC: "local_clustering",
    MetricName.CORE_DC: "core_dominance_cosine",
    MetricName.CORE_DJ: "core_dominance_jaccard",
    MetricName.CORE_DP: "core_dominance_pearson",
    MetricName.SPA: "preferential_attachment",
}

_COMBO_METRICS = {
    FeatureCombo.REEIG_DEGREE: (MetricName.DEG,),
    FeatureCombo.DEGREE: (MetricName.DEG,),
    FeatureCombo.REEIG_ALL: ALL_REPRESENTATIVES,
    FeatureCombo.ALL: ALL_REPRESENTATIVES,
    FeatureCombo.REEIG_LOCAL: LOCAL_REPRESENTATIVES,
    FeatureCombo.LOCAL: LOCAL_REPRESENTATIVES,
    FeatureCombo.REEIG: (),
}

_COMBO_USES_REEIG = {
    FeatureCombo.REEIG_DEGREE: True,
    FeatureCombo.DEGREE: False,
    FeatureCombo.REEIG_ALL: True,
    FeatureCombo.ALL: False,
    FeatureCombo.REEIG_LOCAL: True,
    FeatureCombo.LOCAL: False,
    FeatureCombo.REEIG: True,
}


@dataclass
class FeatureMatrix:
    X: np.ndarray
    schema: list[str]
    standardized: bool

    @property
    def n_features(self) -> int:
        return self.X.shape[1]


def standardize_columns(X: np.ndarray) -> np.ndarray:
    """Z-score each column (population std); constant columns become zeros."""
    out = np.zeros_like(X, dtype=float)
    for c in range(X.shape[1]):
        col = X[:, c]
        if np.all(col == col[0]):
            continue
        out[:, c] = (col - col.mean()) / col.std()
    return out


def build_features(g: Graph, re: ReEigFeatures | None = None,
                   combo: FeatureCombo = FeatureCombo.REEIG_DEGREE,
                   representatives: Sequence[MetricName] | None = None,
                   ) -> FeatureMatrix:
    """Assemble the [eigenvectors | metrics] blocks for one combination.

    ``representatives`` overrides the metric block (the default resolves per
    combo to the representative sets above). Combos containing the similarity
    eigenvectors require ``re``.
    """
    combo = FeatureCombo(combo)
    blocks = []
    schema: list[str] = []
    if _COMBO_USES_REEIG[combo]:
        if re is None:
            raise ValueError(f"combo {combo.value!r} needs similarity eigenfeatures")
        if re.vectors.shape[0] != g.n_nodes:
            raise ValueError("eigenfeature row count does not match node count")
        blocks.append(re.vectors)
        schema.extend(f"reeig_{i}" for i in range(re.vectors.shape[1]))
    metric_names = tuple(representatives) if representatives is not None \
        else _COMBO_METRICS[combo]
    for name in metric_names:
        name = MetricName(name)
        if name is MetricName.DEG:
            col = degree_vector(g).astype(float)
        else:
            col = compute_metric(g, name)
        blocks.append(col.reshape(-1, 1))
        schema.append(_COLUMN_LABELS[name])
    if not blocks:
        raise ValueError("feature combination produced zero columns")
    X = np.hstack(blocks)
    X = standardize_columns(X)
    if not np.all(np.isfinite(X)):
        raise ValueError("feature matrix contains non-finite entries")
    return FeatureMatrix(X=X, schema=schema, standardized=True)


def write_features_csv(path, fm: FeatureMatrix, g: Graph) -> None:
    """Feature matrix with the schema as header, one row per node."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node_id"] + fm.schema)
        for i in range(fm.X.shape[0]):
            writer.writerow([g.index_to_id[i]] + [repr(float(v)) for v in fm.X[i]])
