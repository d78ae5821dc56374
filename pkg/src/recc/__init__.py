"""Unsupervised influential-node identification on undirected networks.

The pipeline embeds nodes with a small GCN over regular-equivalence
similarity features, fine-tunes the embeddings with a similarity-driven
contrastive loss plus a KL clustering loss, and separates influential from
non-influential nodes with k-means.
"""

from .graph import (
    Graph,
    GraphParseError,
    PowerIterationError,
    degree_vector,
    edge_list_text,
    from_edges,
    graph_hash,
    label_text,
    largest_eigenvalue,
    parse_edge_list,
    parse_label_file,
    power_iteration,
)
from .resim import (
    CapacityError,
    ConvergenceError,
    ReEigFeatures,
    ReSimConfig,
    ReSimMatrix,
    compute_re_similarity,
    re_eigenfeatures,
)
from .structmetrics import (
    GLOBAL_METRICS,
    LOCAL_METRICS,
    CorrelationKind,
    CorrelationReport,
    MetricName,
    MetricVector,
    compute_all_metrics,
    compute_global_metrics,
    compute_local_metrics,
    compute_metric,
    correlation_analysis,
    neighborhood_ranks,
)
from .features import (
    ALL_REPRESENTATIVES,
    GLOBAL_REPRESENTATIVES,
    LOCAL_REPRESENTATIVES,
    FeatureCombo,
    FeatureMatrix,
    build_features,
    standardize_columns,
)
from .gcn import (
    ForwardCache,
    GcnModel,
    backward,
    elu,
    forward,
    init_model,
    load_model,
    normalized_adjacency,
    reconstruction_loss_and_grad,
    save_model,
)
from .trainer import (
    Adam,
    ClusterState,
    ContrastiveSamples,
    EpochRecord,
    LossMask,
    TrainHistory,
    TrainingError,
    cluster_state,
    contrastive_grad,
    contrastive_loss,
    contrastive_terms,
    finetune,
    kl_loss_and_grad,
    pretrain,
    select_samples,
    soft_assign,
    target_distribution,
)
from .cluster_eval import (
    BenchReport,
    ClusteringResult,
    EvalReport,
    bench_contrastive,
    evaluate,
    full_pairwise_contrastive_loss,
    kmeans,
    label_influential,
)
from .pipeline import (
    PipelineConfig,
    PipelineStageError,
    RunReport,
    run_pipeline,
    sweep,
)
from . import synth

__version__ = "0.1.0"
