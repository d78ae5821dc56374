"""Command-line entry points for every pipeline stage.

Subcommands: resim, metrics, correlate, features, train, cluster, eval,
bench, sweep, pipeline. Options shared with the pipeline config can be set
in a flat JSON config file (--config) and overridden by flags of the same
name. Exit status is nonzero on any stage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import cluster_eval, features, gcn, graph, pipeline, resim, structmetrics, trainer


def _add_config_flags(p: argparse.ArgumentParser, *names: str) -> None:
    """Flags mirroring PipelineConfig fields; None means 'not overridden'."""
    types = {f.name: f for f in pipeline.PipelineConfig.__dataclass_fields__.values()}
    for name in names:
        fld = types[name]
        kwargs: dict = {"default": None, "dest": name}
        if fld.type in ("int", int):
            kwargs["type"] = int
        elif fld.type in ("float", float):
            kwargs["type"] = float
        elif fld.type in ("bool", bool):
            kwargs["type"] = lambda v: v.lower() in ("1", "true", "yes")
        p.add_argument("--" + name.replace("_", "-"), **kwargs)


_ALL_CONFIG_FLAGS = tuple(pipeline.PipelineConfig.__dataclass_fields__)


def _build_config(args: argparse.Namespace) -> pipeline.PipelineConfig:
    data: dict = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            data.update(json.load(fh))
    for name in _ALL_CONFIG_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    return pipeline.PipelineConfig.from_dict(data)


def _load_graph(cfg: pipeline.PipelineConfig) -> graph.Graph:
    return graph.parse_edge_list(Path(cfg.edge_path).read_text())


def _cmd_pipeline(args) -> int:
    cfg = _build_config(args)
    report = pipeline.run_pipeline(cfg)
    print(f"report written to {Path(cfg.output_dir) / 'report.json'}")
    if report.metrics:
        print("metrics:", json.dumps(report.metrics))
    return 0


def _cmd_sweep(args) -> int:
    cfg = _build_config(args)
    values: list = args.values.split(",")
    if args.axis in ("k_p", "k_n"):
        values = [int(v) for v in values]
    entries = pipeline.sweep(cfg, args.axis, values)
    failed = [e for e in entries if e.report is None]
    for e in entries:
        status = e.error if e.report is None else "ok"
        print(f"{args.axis}={e.value}: {status}")
    print(f"combined CSV: {Path(cfg.output_dir) / f'sweep_{args.axis}.csv'}")
    return 1 if failed else 0


def _cmd_resim(args) -> int:
    cfg = _build_config(args)
    g = _load_graph(cfg)
    sim = resim.compute_re_similarity(
        g, resim.ReSimConfig(alpha_fraction=cfg.alpha_fraction, tol=cfg.resim_tol,
                             max_iter=cfg.resim_max_iter,
                             max_nodes=cfg.resim_max_nodes))
    re = resim.re_eigenfeatures(sim, max_dims=cfg.max_dims)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    resim.save_resim(out, sim, re)
    print(f"alpha={sim.alpha:.6g} iterations={sim.iterations} "
          f"converged={sim.converged} r={re.r} -> {out}")
    return 0


def _cmd_metrics(args) -> int:
    cfg = _build_config(args)
    g = _load_graph(cfg)
    vectors = structmetrics.compute_all_metrics(g)
    structmetrics.write_metrics_csv(args.out, g, vectors)
    print(f"{len(vectors)} metrics over {g.n_nodes} nodes -> {args.out}")
    return 0


def _cmd_correlate(args) -> int:
    cfg = _build_config(args)
    g = _load_graph(cfg)
    vectors = list(structmetrics.compute_all_metrics(g).values())
    reports = structmetrics.correlation_analysis(vectors, g)
    structmetrics.write_correlation_csv(args.out, reports)
    undefined = sum(r.undefined for r in reports)
    print(f"{len(reports)} pairs ({undefined} undefined) -> {args.out}")
    return 0


def _cmd_features(args) -> int:
    cfg = _build_config(args)
    g = _load_graph(cfg)
    combo = features.FeatureCombo(cfg.combo)
    re = None
    if "reeig" in combo.value:
        sim = resim.compute_re_similarity(
            g, resim.ReSimConfig(alpha_fraction=cfg.alpha_fraction,
                                 tol=cfg.resim_tol, max_iter=cfg.resim_max_iter,
                                 max_nodes=cfg.resim_max_nodes))
        re = resim.re_eigenfeatures(sim, max_dims=cfg.max_dims)
    fm = features.build_features(g, re, combo=combo)
    features.write_features_csv(args.out, fm, g)
    print(f"schema: {','.join(fm.schema)} -> {args.out}")
    return 0


def _train_artifacts(cfg: pipeline.PipelineConfig):
    g = _load_graph(cfg)
    sim = resim.compute_re_similarity(
        g, resim.ReSimConfig(alpha_fraction=cfg.alpha_fraction, tol=cfg.resim_tol,
                             max_iter=cfg.resim_max_iter,
                             max_nodes=cfg.resim_max_nodes))
    re = resim.re_eigenfeatures(sim, max_dims=cfg.max_dims)
    fm = features.build_features(g, re, combo=features.FeatureCombo(cfg.combo))
    return g, sim, fm


def _cmd_train(args) -> int:
    cfg = _build_config(args)
    g, sim, fm = _train_artifacts(cfg)
    seeds = np.random.SeedSequence(cfg.seed).spawn(3)
    model = gcn.init_model(fm.n_features, seed=int(seeds[0].generate_state(1)[0]),
                           dropout_rate=cfg.dropout)
    model, pre_hist = trainer.pretrain(model, g, fm, epochs=cfg.epochs_pre,
                                       seed=int(seeds[1].generate_state(1)[0]),
                                       lr=cfg.lr)
    samples = trainer.select_samples(sim, k_p=cfg.k_p, k_n=cfg.k_n)
    model, ft_hist = trainer.finetune(
        model, g, fm, samples, k=cfg.k, epochs=cfg.epochs_ft,
        seed=int(seeds[2].generate_state(1)[0]),
        loss_mask=trainer.LossMask.from_string(cfg.loss_mask),
        tau=cfg.tau, lr=cfg.lr, restarts=cfg.restarts)
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    gcn.save_model(out_dir / "checkpoint.npz", model)
    pre_hist.write_csv(out_dir / "history_pretrain.csv")
    ft_hist.write_csv(out_dir / "history_finetune.csv")
    print(f"final l_re={pre_hist.records[-1].l_re:.6g} "
          f"l_total={ft_hist.records[-1].l_total:.6g} -> {out_dir}")
    return 0


def _cmd_cluster(args) -> int:
    cfg = _build_config(args)
    g, _, fm = _train_artifacts(cfg)
    model = gcn.load_model(args.checkpoint)
    Z, _ = gcn.forward(model, g, fm, train_mode=False)
    result = cluster_eval.kmeans(Z, cfg.k, seed=cfg.seed, restarts=cfg.restarts)
    result = cluster_eval.label_influential(result, g)
    pipeline._write_labels_csv(args.out, g, result)
    sizes = np.bincount(result.labels, minlength=cfg.k).tolist()
    print(f"cluster sizes {sizes}, influential={result.influential_cluster} "
          f"-> {args.out}")
    return 0


def _read_label_csv_or_text(path: str, g: graph.Graph) -> np.ndarray:
    """Accept either a labels.csv produced by the pipeline or a plain label file."""
    text = Path(path).read_text()
    first = text.splitlines()[0] if text else ""
    if first.startswith("node_id,"):
        labels = np.zeros(g.n_nodes, dtype=np.int64)
        for line in text.splitlines()[1:]:
            if not line.strip():
                continue
            parts = line.split(",")
            labels[g.node_ids[parts[0]]] = int(parts[1])
        return labels
    return graph.parse_label_file(text, g)


def _cmd_eval(args) -> int:
    cfg = _build_config(args)
    g = _load_graph(cfg)
    pred = _read_label_csv_or_text(args.pred, g)
    truth = _read_label_csv_or_text(args.truth, g)
    report = cluster_eval.evaluate(pred, truth)
    if args.out:
        out = Path(args.out)
        if out.suffix == ".csv":
            report.write_csv(out)
        else:
            report.write_json(out)
    print(json.dumps(report.to_dict(), indent=2))
    return 0


def _cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",")]
    report = cluster_eval.bench_contrastive(sizes, k_p=args.k_p, k_n=args.k_n,
                                            reps=args.reps, seed=args.seed)
    for r in report.records:
        print(f"n={r.n}: recc={r.recc_seconds:.6f}s "
              f"baseline={r.baseline_seconds:.6f}s "
              f"speedup={r.baseline_seconds / r.recc_seconds:.1f}x")
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        if out.suffix == ".json":
            report.write_json(out)
        else:
            report.write_csv(out)
        print(f"-> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="recc")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *extra):
        p.add_argument("--config", default=None, help="flat JSON config file")
        _add_config_flags(p, *(_ALL_CONFIG_FLAGS if not extra else extra))

    p = sub.add_parser("pipeline", help="run the full pipeline")
    common(p)
    p.set_defaults(fn=_cmd_pipeline)

    p = sub.add_parser("sweep", help="sweep one parameter axis")
    common(p)
    p.add_argument("--axis", required=True, choices=pipeline.SWEEP_AXES)
    p.add_argument("--values", required=True, help="comma-separated axis values")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("resim", help="similarity matrix + eigenfeatures to .npz")
    common(p, "edge_path", "alpha_fraction", "resim_tol", "resim_max_iter",
           "resim_max_nodes", "max_dims")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_resim)

    p = sub.add_parser("metrics", help="all structural metrics to CSV")
    common(p, "edge_path")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_metrics)

    p = sub.add_parser("correlate", help="metric correlation matrix to CSV")
    common(p, "edge_path")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_correlate)

    p = sub.add_parser("features", help="feature matrix to CSV")
    common(p, "edge_path", "combo", "alpha_fraction", "resim_tol",
           "resim_max_iter", "resim_max_nodes", "max_dims")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_features)

    p = sub.add_parser("train", help="pretrain + finetune, save checkpoint")
    common(p)
    p.set_defaults(fn=_cmd_train)

    p = sub.add_parser("cluster", help="embed with a checkpoint and k-means")
    common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_cluster)

    p = sub.add_parser("eval", help="score predicted labels against truth")
    common(p, "edge_path")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("bench", help="contrastive-loss timing benchmark")
    p.add_argument("--sizes", default="1000,2000,4000")
    p.add_argument("--k-p", dest="k_p", type=int, default=2)
    p.add_argument("--k-n", dest="k_n", type=int, default=1)
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except pipeline.PipelineStageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
