"""Command line entry point: ``structbal <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import sys

import numpy as np

from . import verify
from .data import (Dataset, load_dataset, load_features, load_labels, make_step_split,
                   minority_classes, parse_config, write_labels, write_matrix)
from .diffusion import DiffusionConfig, DiffusionParams, init_diffusion, run_rd
from .encoder import embed, init_encoder, predict_proba, train_encoder
from .enhance import ClassPartition, enhance_structure
from .graph import build_graph, normalize_sym, read_edge_list, write_edge_list
from .metrics import evaluate
from .params_io import save_params
from .pipeline import ExperimentConfig, run_experiment, run_seed
from .sbm import SBMConfig, gaussian_features, generate_sbm

log = logging.getLogger("structbal")


def _add_data_args(p, labels=True):
    p.add_argument("--edges", required=True, help="edge list, one 'u v' per line")
    p.add_argument("--features", required=True, help="CSV: node_id,f0,f1,...")
    if labels:
        p.add_argument("--labels", required=True, help="CSV: node_id,label")


def _add_experiment_args(p):
    p.add_argument("--config", help="key=value experiment config file")
    p.add_argument("--rho", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--p-drop", type=float)
    p.add_argument("--xi", type=float)
    p.add_argument("--seeds", help="comma-separated seeds, e.g. 0,1,2,3,4")
    p.add_argument("--no-se", action="store_true", help="disable structure enhancement")
    p.add_argument("--no-rd", action="store_true", help="disable relation diffusion")


def _experiment_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if args.config:
        with open(args.config) as fh:
            cfg = parse_config(fh.read(), ExperimentConfig)
    over = {}
    for name in ("rho", "k", "alpha", "p_drop", "xi"):
        v = getattr(args, name, None)
        if v is not None:
            over[name] = v
    if args.seeds:
        over["seeds"] = tuple(int(s) for s in args.seeds.split(","))
    if args.no_se:
        over["use_se"] = False
    if args.no_rd:
        over["use_rd"] = False
    return dataclasses.replace(cfg, **over)


def _write_or_print(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_gen_sbm(args):
    cfg = SBMConfig(args.n1, args.n2, args.p, args.q)
    g, labels = generate_sbm(cfg, args.seed)
    write_edge_list(g, f"{args.out}.edges", header=f"SBM n1={cfg.n1} n2={cfg.n2} p={cfg.p} q={cfg.q} seed={args.seed}")
    write_labels(labels, f"{args.out}.labels.csv")
    if args.feat_dim > 0:
        x = gaussian_features(labels, args.feat_dim, args.centroid_distance, args.seed + 1)
        write_matrix(x, f"{args.out}.features.csv")
    log.info("wrote %s.* (%d nodes, %d edges)", args.out, g.n, g.num_edges)
    return 0


def cmd_enhance(args):
    ds = load_dataset(args.edges, args.features, args.labels)
    cfg = _experiment_config(args)
    seed = cfg.seeds[0]
    train_mask, _, _ = make_step_split(ds.labels, cfg.split_spec(seed))
    C = ds.num_classes
    mi = minority_classes(C)
    enc = init_encoder(ds.features.shape[1], cfg.enc_hidden, C, seed)
    enc = train_encoder(enc, ds.features, ds.labels, train_mask, cfg.enc_epochs, cfg.enc_lr)
    g_aug, cands, report = enhance_structure(
        ds.graph, normalize_sym(ds.graph), embed(enc, ds.features), predict_proba(enc, ds.features),
        ds.labels, train_mask, ClassPartition(mi, [c for c in range(C) if c not in mi]), cfg.xi)
    write_edge_list(g_aug, args.out)
    report_path = args.report or f"{args.out}.report.csv"
    with open(report_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["u", "v_star", "sim", "tau", "accepted"])
        for u, v, s, t, ok in report.rows():
            w.writerow([u, v, repr(s), repr(t), int(ok)])
    log.info("s_init=%d s_cand=%d added=%d rejected=%d", len(cands.s_init), len(cands.s_cand),
             len(report.added_edges), len(report.rejected))
    return 0


def cmd_diffuse(args):
    x = load_features(args.features)
    g = build_graph(read_edge_list(args.edges), x.shape[0])
    d_out = args.d_out or x.shape[1]
    cfg = DiffusionConfig(k=args.k, alpha=args.alpha, p_drop=args.p_drop, p_feat=0.0, d_out=d_out)
    if args.d_out:
        params = init_diffusion(x.shape[1], d_out, args.seed)
    else:
        params = DiffusionParams(W=np.eye(x.shape[1]), b=np.zeros(x.shape[1]))
    h = run_rd(g, x, cfg, params, args.seed, mode=args.mode)
    write_matrix(h, args.out, header_prefix="h")
    return 0


def _load_ds(args) -> Dataset:
    return load_dataset(args.edges, args.features, args.labels)


def cmd_train(args):
    ds = _load_ds(args)
    cfg = _experiment_config(args)
    seed = cfg.seeds[0]
    res = run_seed(ds, cfg, seed)
    rd_params, clf_params = res.params
    save_params(args.out, rd_params, clf_params)
    _write_or_print(f"[seed {seed}]\nedges_added={res.edges_added}\n" + res.report.to_text(), args.report)
    if args.scores:
        write_matrix(res.probabilities, args.scores, header_prefix="p")
    if args.embeddings:
        write_matrix(res.embeddings, args.embeddings, header_prefix="h")
    if args.test_nodes:
        np.savetxt(args.test_nodes, np.flatnonzero(res.masks[2]), fmt="%d")
    return 0


def cmd_evaluate(args):
    labels = load_labels(args.labels)
    scores = load_features(args.scores)
    if scores.shape[0] != labels.shape[0]:
        raise ValueError(f"{scores.shape[0]} score rows vs {labels.shape[0]} labels")
    mask = np.ones(labels.shape[0], dtype=bool)
    if args.nodes:
        mask = np.zeros(labels.shape[0], dtype=bool)
        mask[np.loadtxt(args.nodes, dtype=np.int64, ndmin=1)] = True
    emb = load_features(args.embeddings) if args.embeddings else None
    report = evaluate(scores, labels, mask, embeddings=emb)
    _write_or_print(report.to_text(), args.out)
    return 0


def cmd_verify_theory(args):
    checks = verify.run_all(args.p, args.q, args.beta, args.sigma_max,
                            monte_carlo=not args.no_monte_carlo)
    _write_or_print(verify.to_csv(checks), args.out)
    failed = [c.quantity for c in checks if not c.passed]
    if failed:
        log.error("tolerance violated: %s", ", ".join(failed))
        return 1
    return 0


def cmd_run(args):
    ds = _load_ds(args)
    cfg = _experiment_config(args)
    report = run_experiment(ds, cfg)
    _write_or_print(report.to_text(), args.out)
    if args.embeddings:
        for r in report.runs:
            write_matrix(r.embeddings, f"{args.embeddings}.seed{r.seed}.csv", header_prefix="h")
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="structbal", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-sbm", help="sample a two-block SBM")
    p.add_argument("--n1", type=int, required=True)
    p.add_argument("--n2", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--feat-dim", type=int, default=0, help="also write Gaussian features")
    p.add_argument("--centroid-distance", type=float, default=1.5)
    p.add_argument("--out", required=True, help="output prefix")
    p.set_defaults(func=cmd_gen_sbm)

    p = sub.add_parser("enhance", help="structure enhancement: write augmented edges")
    _add_data_args(p)
    _add_experiment_args(p)
    p.add_argument("--out", required=True, help="augmented edge list")
    p.add_argument("--report", help="report CSV (default <out>.report.csv)")
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("diffuse", help="relation diffusion of raw features")
    _add_data_args(p, labels=False)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--alpha", type=float, default=0.15)
    p.add_argument("--p-drop", type=float, default=0.1)
    p.add_argument("--d-out", type=int, default=0, help="random projection width (0 = identity)")
    p.add_argument("--mode", choices=["eval", "train"], default="eval")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_diffuse)

    p = sub.add_parser("train", help="train one seed and save parameters")
    _add_data_args(p)
    _add_experiment_args(p)
    p.add_argument("--out", required=True, help="parameter file")
    p.add_argument("--report", default="-")
    p.add_argument("--scores", help="write class probabilities CSV")
    p.add_argument("--embeddings", help="write embeddings CSV")
    p.add_argument("--test-nodes", help="write test node ids, one per line")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="metrics from a probability CSV")
    p.add_argument("--labels", required=True)
    p.add_argument("--scores", required=True, help="CSV: node_id,p0,p1,...")
    p.add_argument("--nodes", help="restrict to node ids listed one per line")
    p.add_argument("--embeddings", help="embeddings CSV for the distance ratio")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("verify-theory", help="closed forms vs numerical witnesses")
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--q", type=float, default=0.1)
    p.add_argument("--beta", type=float, default=10.0)
    p.add_argument("--sigma-max", type=float, default=1.0)
    p.add_argument("--no-monte-carlo", action="store_true")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_verify_theory)

    p = sub.add_parser("run", help="full pipeline over all seeds")
    _add_data_args(p)
    _add_experiment_args(p)
    p.add_argument("--out", default="-")
    p.add_argument("--embeddings", help="prefix for per-seed embedding CSVs")
    p.set_defaults(func=cmd_run)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
