"""End-to-end pipeline orchestration, run reports, and parameter sweeps.

A run executes: parse -> similarity -> eigenfeatures -> features -> pretrain
-> sample selection -> finetune -> k-means -> influential tagging ->
evaluation (when labels exist), then writes a JSON report plus CSV/NPZ
artifacts. Runs are deterministic per (config, seed); the report's
``metrics`` block is reproducible byte-for-byte.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import cluster_eval, features, gcn, graph, resim, trainer

SCHEMA_VERSION = 1

SWEEP_AXES = ("k_p", "k_n", "combo", "loss_mask")


class PipelineStageError(RuntimeError):
    """A pipeline stage failed; carries the stage name and the cause."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineConfig:
    """Flat, JSON-serializable run configuration.

    Every key can come from a flat JSON config file and be overridden by a
    CLI flag of the same name.
    """

    edge_path: str = ""
    label_path: str | None = None
    output_dir: str = "recc_out"
    alpha_fraction: float = 0.5
    resim_tol: float = 1e-8
    resim_max_iter: int = 1000
    resim_max_nodes: int = 20_000
    max_dims: int = 64
    combo: str = "reeig+degree"
    epochs_pre: int = 100
    epochs_ft: int = 100
    lr: float = 1e-3
    dropout: float = 0.2
    k_p: int = 2
    k_n: int = 1
    k: int = 2
    tau: float = 1.0
    seed: int = 0
    restarts: int = 10
    loss_mask: str = "both"
    use_cache: bool = True
    write_features: bool = True

    def validate(self) -> None:
        if not self.edge_path:
            raise ValueError("edge_path is required")
        if not os.path.exists(self.edge_path):
            raise ValueError(f"edge list {self.edge_path!r} does not exist")
        if self.label_path is not None and not os.path.exists(self.label_path):
            raise ValueError(f"label file {self.label_path!r} does not exist")
        features.FeatureCombo(self.combo)
        trainer.LossMask.from_string(self.loss_mask)
        if not 1 <= self.k_p <= 5:
            raise ValueError("k_p must be in [1, 5]")
        if not 1 <= self.k_n <= 5:
            raise ValueError("k_n must be in [1, 5]")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json_file(cls, path) -> "PipelineConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class RunReport:
    schema_version: int
    config: dict
    stage_seconds: dict
    train_summary: dict
    clustering: dict
    metrics: dict | None
    artifacts: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def metrics_bytes(self) -> bytes:
        """Canonical byte serialization of the deterministic metric block."""
        payload = {"metrics": self.metrics,
                   "train_summary": self.train_summary,
                   "clustering": self.clustering}
        return json.dumps(payload, sort_keys=True).encode()

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


class _StageClock:
    def __init__(self):
        self.seconds: dict[str, float] = {}

    def run(self, name: str, fn):
        t0 = time.perf_counter()
        try:
            out = fn()
        except Exception as exc:
            raise PipelineStageError(name, exc) from exc
        self.seconds[name] = time.perf_counter() - t0
        return out


def _resim_with_cache(g, cfg: PipelineConfig, cache_dir: Path):
    digest = graph.graph_hash(g)
    key = resim.resim_cache_key(digest, cfg.alpha_fraction, cfg.resim_tol)
    path = cache_dir / f"{key}.npz"
    if cfg.use_cache and path.exists():
        sim, re = resim.load_resim(path)
        if re is not None:
            return sim, re
    sim = resim.compute_re_similarity(
        g, resim.ReSimConfig(alpha_fraction=cfg.alpha_fraction, tol=cfg.resim_tol,
                             max_iter=cfg.resim_max_iter,
                             max_nodes=cfg.resim_max_nodes))
    re = resim.re_eigenfeatures(sim, max_dims=cfg.max_dims)
    if cfg.use_cache:
        cache_dir.mkdir(parents=True, exist_ok=True)
        resim.save_resim(path, sim, re)
    return sim, re


def _write_labels_csv(path, g, result: cluster_eval.ClusteringResult) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node_id", "cluster", "influential"])
        for i in range(g.n_nodes):
            cluster = int(result.labels[i])
            writer.writerow([g.index_to_id[i], cluster,
                             int(cluster == result.influential_cluster)])


def run_pipeline(cfg: PipelineConfig) -> RunReport:
    """Execute the full pipeline and write all artifacts under output_dir."""
    cfg.validate()
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    clock = _StageClock()

    g = clock.run("parse", lambda: graph.parse_edge_list(Path(cfg.edge_path).read_text()))
    truth = None
    if cfg.label_path is not None:
        truth = clock.run(
            "labels", lambda: graph.parse_label_file(Path(cfg.label_path).read_text(), g))

    sim, re = clock.run("resim", lambda: _resim_with_cache(g, cfg, out_dir / "cache"))
    fm = clock.run("features", lambda: features.build_features(
        g, re, combo=features.FeatureCombo(cfg.combo)))

    seeds = np.random.SeedSequence(cfg.seed).spawn(4)
    init_seed = int(seeds[0].generate_state(1)[0])
    pre_seed = int(seeds[1].generate_state(1)[0])
    ft_seed = int(seeds[2].generate_state(1)[0])
    km_seed = int(seeds[3].generate_state(1)[0])

    model = clock.run("init", lambda: gcn.init_model(
        fm.n_features, seed=init_seed, dropout_rate=cfg.dropout))
    model, pre_hist = clock.run("pretrain", lambda: trainer.pretrain(
        model, g, fm, epochs=cfg.epochs_pre, seed=pre_seed, lr=cfg.lr))
    samples = clock.run("samples", lambda: trainer.select_samples(
        sim, k_p=cfg.k_p, k_n=cfg.k_n))
    mask = trainer.LossMask.from_string(cfg.loss_mask)
    model, ft_hist = clock.run("finetune", lambda: trainer.finetune(
        model, g, fm, samples, k=cfg.k, epochs=cfg.epochs_ft, seed=ft_seed,
        loss_mask=mask, tau=cfg.tau, lr=cfg.lr, restarts=cfg.restarts))

    Z = clock.run("embed", lambda: gcn.forward(model, g, fm, train_mode=False)[0])
    result = clock.run("cluster", lambda: cluster_eval.label_influential(
        cluster_eval.kmeans(Z, cfg.k, seed=km_seed, restarts=cfg.restarts), g))

    metrics = None
    if truth is not None:
        report = clock.run("evaluate", lambda: cluster_eval.evaluate(result.labels, truth))
        metrics = report.to_dict()

    last_ft = ft_hist.records[-1]
    train_summary = {
        "pretrain_epochs": len(pre_hist.records),
        "pretrain_final_l_re": pre_hist.records[-1].l_re,
        "finetune_epochs": len(ft_hist.records),
        "finetune_final_l_con": last_ft.l_con,
        "finetune_final_l_kl": last_ft.l_kl,
        "finetune_final_l_total": last_ft.l_total,
    }
    clustering = {
        "cluster_sizes": np.bincount(result.labels, minlength=cfg.k).tolist(),
        "influential_cluster": result.influential_cluster,
        "influential_tie": result.influential_tie,
        "inertia": result.inertia,
    }

    def write_artifacts() -> dict:
        paths = {
            "labels_csv": out_dir / "labels.csv",
            "history_pretrain_csv": out_dir / "history_pretrain.csv",
            "history_finetune_csv": out_dir / "history_finetune.csv",
            "checkpoint_npz": out_dir / "checkpoint.npz",
        }
        _write_labels_csv(paths["labels_csv"], g, result)
        pre_hist.write_csv(paths["history_pretrain_csv"])
        ft_hist.write_csv(paths["history_finetune_csv"])
        gcn.save_model(paths["checkpoint_npz"], model)
        if cfg.write_features:
            paths["features_csv"] = out_dir / "features.csv"
            features.write_features_csv(paths["features_csv"], fm, g)
        return {name: {"path": str(p), "sha256": _sha256(p)}
                for name, p in paths.items()}

    artifacts = clock.run("write", write_artifacts)

    report = RunReport(
        schema_version=SCHEMA_VERSION,
        config=cfg.to_dict(),
        stage_seconds=clock.seconds,
        train_summary=train_summary,
        clustering=clustering,
        metrics=metrics,
        artifacts=artifacts,
    )
    report.write_json(out_dir / "report.json")
    return report


@dataclass
class SweepEntry:
    value: object
    report: RunReport | None
    error: str | None = None


def sweep(cfg: PipelineConfig, axis: str, values) -> list[SweepEntry]:
    """Run the pipeline once per axis value, everything else held fixed.

    Failed runs are recorded and skipped; the combined CSV covers the
    successful ones.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {SWEEP_AXES}, got {axis!r}")
    entries: list[SweepEntry] = []
    for value in values:
        sub = replace(cfg, **{axis: value},
                      output_dir=os.path.join(cfg.output_dir, f"{axis}_{value}"))
        try:
            entries.append(SweepEntry(value=value, report=run_pipeline(sub)))
        except Exception as exc:  # noqa: BLE001 - partial results are kept
            entries.append(SweepEntry(value=value, report=None, error=str(exc)))
    write_sweep_csv(Path(cfg.output_dir) / f"sweep_{axis}.csv", axis, entries)
    return entries


def write_sweep_csv(path, axis: str, entries: list[SweepEntry]) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([axis, "acc", "nmi", "ari", "l_con", "l_kl", "l_total",
                         "pretrain_l_re", "error"])
        for e in entries:
            if e.report is None:
                writer.writerow([e.value, "", "", "", "", "", "", "", e.error])
                continue
            m = e.report.metrics or {}
            t = e.report.train_summary
            writer.writerow([
                e.value,
                m.get("acc", ""), m.get("nmi", ""), m.get("ari", ""),
                t["finetune_final_l_con"], t["finetune_final_l_kl"],
                t["finetune_final_l_total"], t["pretrain_final_l_re"], "",
            ])
