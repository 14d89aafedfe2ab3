"""Command-line entry point: ``overcomplete <command> [flags]``.

Exit codes: 0 success, 1 usage error, 2 data or parse error, 3 numerical
divergence.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time

from . import __version__
from .baselines import mean_threshold, sign_binarize
from .coder import DivergenceError, train
from .core import EmbeddingMatrix
from .evaluation import (
    DEFAULT_L2_GRID,
    EvaluationError,
    eval_similarity,
    featurize_dataset,
    gen_intrusions,
    kmeans,
    train_logreg,
)
from .io import (
    LAYOUTS,
    ParseError,
    ensure_dir,
    file_digest,
    read_embeddings,
    read_labeled,
    read_similarity,
    read_vectors,
    write_binary,
    write_embeddings,
    write_sparse,
)
from .optim import ConfigError, TrainerConfig
from .search import (
    DEFAULT_ALPHAS,
    DEFAULT_FACTORS,
    DEFAULT_LAMBDAS,
    DEFAULT_MIN_SPARSITY,
    grid_search,
    length_sweep,
    rank_cells,
)

logger = logging.getLogger("overcomplete")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DIVERGED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_training_flags(p, with_size=True):
    if with_size:
        size = p.add_mutually_exclusive_group()
        size.add_argument("--k", type=int, help="code length K")
        size.add_argument("--factor", type=int, help="code length as a multiple of L (K = factor * L); default 10")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="l1 penalty (default 1.0)")
    p.add_argument("--tau", type=float, default=1e-5, help="l2 dictionary penalty (default 1e-5)")
    p.add_argument("--eta", type=float, default=0.05, help="base learning rate (default 0.05)")
    p.add_argument("--epochs", type=int, default=20)
    sign = p.add_mutually_exclusive_group()
    sign.add_argument("--nonneg", action="store_true", help="nonnegative codes (method B)")
    sign.add_argument("--signed", action="store_true", help="force signed codes (method A)")
    p.add_argument("--binarize", action="store_true", help="also emit binary codes; implies --nonneg")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("auto", "headered", "plain"), default="auto",
                   help="input embedding format")
    p.add_argument("--sparse-layout", choices=LAYOUTS, default="dense-text")


def _config(args, factor_default=10) -> TrainerConfig:
    if args.binarize and args.signed:
        raise UsageError("--binarize needs nonnegative codes and cannot be combined with --signed")
    K = getattr(args, "k", None)
    factor = getattr(args, "factor", None)
    if K is None and factor is None:
        factor = factor_default
    try:
        return TrainerConfig(
            lam=args.lam, tau=args.tau, K=K, factor=factor, eta=args.eta, epochs=args.epochs,
            seed=args.seed, nonnegative=args.nonneg or args.binarize, binarize=args.binarize,
            threads=args.threads,
        )
    except ConfigError as e:
        raise UsageError(str(e)) from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="overcomplete", description="Sparse overcomplete word vectors.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("train", help="learn sparse (optionally binary) codes")
    t.add_argument("--input", required=True)
    _add_training_flags(t)
    t.add_argument("--min-rel-improvement", type=float, default=None,
                   help="stop early when the epoch objective improves by less than this fraction")
    t.add_argument("--out-dir", required=True)

    g = sub.add_parser("gridsearch", help="grid search lambda x K on a dev similarity set")
    g.add_argument("--input", required=True)
    g.add_argument("--dev-sim", required=True)
    g.add_argument("--lambdas", type=_floats, default=DEFAULT_LAMBDAS)
    g.add_argument("--factors", type=_ints, default=DEFAULT_FACTORS)
    g.add_argument("--min-sparsity", type=float, default=DEFAULT_MIN_SPARSITY)
    _add_training_flags(g, with_size=False)
    g.add_argument("--out-dir", required=True)

    s = sub.add_parser("sweep", help="score K = alpha * L for several alphas")
    s.add_argument("--input", required=True)
    s.add_argument("--dev-sim", required=True)
    s.add_argument("--alphas", type=_ints, default=DEFAULT_ALPHAS)
    _add_training_flags(s, with_size=False)
    s.add_argument("--report")

    b = sub.add_parser("baseline", help="length-preserving sign or mean-threshold transform")
    b.add_argument("--vectors", required=True)
    b.add_argument("--method", choices=("sign", "mean-threshold"), required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--report")

    e = sub.add_parser("eval-sim", help="word similarity (Spearman)")
    e.add_argument("--vectors", required=True)
    e.add_argument("--dataset", required=True, action="append", help="may be repeated")
    e.add_argument("--report")

    c = sub.add_parser("eval-clf", help="logistic-regression classification")
    c.add_argument("--vectors", required=True)
    c.add_argument("--train", required=True)
    c.add_argument("--dev", required=True)
    c.add_argument("--test", required=True)
    c.add_argument("--mode", choices=("average", "concat"), default="average")
    c.add_argument("--n-tokens", type=int, default=3, help="tokens per example in concat mode")
    c.add_argument("--lowercase", action="store_true")
    c.add_argument("--l2-grid", type=_floats, default=DEFAULT_L2_GRID)
    c.add_argument("--report")

    k = sub.add_parser("cluster", help="k-means over word vectors")
    k.add_argument("--vectors", required=True)
    k.add_argument("--k", type=int, default=100)
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--max-iters", type=int, default=100)
    k.add_argument("--show", type=int, default=6, help="words printed per cluster")
    k.add_argument("--out", help="write 'word<TAB>cluster' lines here")
    k.add_argument("--report")

    n = sub.add_parser("intrusion", help="emit word-intrusion instances")
    n.add_argument("--vectors", required=True)
    n.add_argument("--n-dims", type=int, default=25)
    n.add_argument("--per-dim", type=int, default=1)
    n.add_argument("--seed", type=int, default=0)
    n.add_argument("--out", help="write instances as JSON lines here")
    n.add_argument("--report")
    return p


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def _report(args, obj):
    if getattr(args, "report", None):
        _write_json(args.report, obj)


def _train_outputs(out_dir, config, D, A, B, report, layout):
    ensure_dir(out_dir)
    paths = {"codes": os.path.join(out_dir, "codes.txt"),
             "dictionary": os.path.join(out_dir, "dictionary.txt"),
             "report": os.path.join(out_dir, "report.json")}
    write_sparse(paths["codes"], A, layout)
    if B is not None:
        paths["binary"] = os.path.join(out_dir, "binary.txt")
        write_binary(paths["binary"], B, layout)
    # dictionary columns as records "d<j> v1 ... vL"
    cols = EmbeddingMatrix(tuple(f"d{j}" for j in range(D.K)), D.data.T)
    write_embeddings(paths["dictionary"], cols, header=True)
    _write_json(paths["report"], report.to_dict())
    return paths


def _manifest(config, inputs, outputs, seconds, report):
    fin = report.final
    return {
        "version": __version__,
        "config": config.to_dict(),
        "inputs": {p: file_digest(p) for p in inputs},
        "outputs": outputs,
        "seconds": seconds,
        "final": {"objective": fin.objective, "reconstruction": fin.reconstruction,
                  "l1": fin.l1, "dictionary": fin.dictionary, "sparsity": report.sparsity,
                  "epochs_run": report.epochs_run},
    }


def cmd_train(args):
    config = _config(args)
    if args.min_rel_improvement is not None and not args.min_rel_improvement >= 0:
        raise UsageError("--min-rel-improvement must be >= 0")
    start = time.perf_counter()
    X = read_embeddings(args.input, args.format)
    config = config.resolved(X.L)
    D, A, B, report = train(X, config, args.min_rel_improvement)
    paths = _train_outputs(args.out_dir, config, D, A, B, report, args.sparse_layout)
    paths["manifest"] = os.path.join(args.out_dir, "manifest.json")
    _write_json(paths["manifest"], _manifest(config, [args.input], paths,
                                            time.perf_counter() - start, report))
    if config.lam == 0 or report.sparsity < 0.01:
        print(f"warning: sparsity is {report.sparsity:.4f}; codes are essentially dense", file=sys.stderr)
    print(f"V={X.V} L={X.L} K={config.K} epochs={report.epochs_run}")
    print(f"sparsity {report.sparsity:.6f}")
    print(f"objective {report.final.objective:.6g} (reconstruction {report.final.reconstruction:.6g}, "
          f"l1 {report.final.l1:.6g}, dictionary {report.final.dictionary:.6g})")
    return EXIT_OK


def _check_unit(name, v):
    if not 0 <= v <= 1:
        raise UsageError(f"{name} must be in [0, 1], got {v}")


def cmd_gridsearch(args):
    base = _config(args)
    _check_unit("--min-sparsity", args.min_sparsity)
    if any(not (l >= 0 and math.isfinite(l)) for l in args.lambdas):
        raise UsageError("--lambdas must be finite and >= 0")
    if any(f < 1 for f in args.factors):
        raise UsageError("--factors must be >= 1")
    start = time.perf_counter()
    X = read_embeddings(args.input, args.format)
    dev = read_similarity(args.dev_sim)
    cells, best, kept = grid_search(X, dev, base, args.lambdas, args.factors, args.min_sparsity)
    ensure_dir(args.out_dir)
    table = os.path.join(args.out_dir, "grid.tsv")
    with open(table, "w", encoding="utf-8", newline="\n") as f:
        f.write("lambda\tK\tsparsity\trho\tcovered\tskipped\tobjective\teligible\n")
        for c in rank_cells(cells, args.min_sparsity):
            f.write(f"{c.lam!r}\t{c.K}\t{c.sparsity!r}\t{c.rho!r}\t{c.covered}\t{c.skipped}\t"
                    f"{c.objective!r}\t{int(c.eligible(args.min_sparsity))}\n")
    for c in rank_cells(cells, args.min_sparsity):
        mark = "*" if best is not None and c is cells[best] else " "
        rho = "n/a" if c.rho is None else f"{c.rho:.4f}"
        print(f"{mark} lambda={c.lam:g} K={c.K} sparsity={c.sparsity:.4f} rho={rho}")
    if best is None:
        print(f"no cell reached sparsity {args.min_sparsity}; nothing selected (see {table})",
              file=sys.stderr)
        return EXIT_DATA
    config, (D, A, B, report) = kept
    paths = _train_outputs(args.out_dir, config, D, A, B, report, args.sparse_layout)
    paths["grid"] = table
    paths["manifest"] = os.path.join(args.out_dir, "manifest.json")
    manifest = _manifest(config, [args.input, args.dev_sim], paths, time.perf_counter() - start, report)
    manifest["grid"] = [c.to_dict() for c in cells]
    manifest["selected"] = cells[best].to_dict()
    _write_json(paths["manifest"], manifest)
    return EXIT_OK


def cmd_sweep(args):
    base = _config(args)
    if any(a < 1 for a in args.alphas):
        raise UsageError("--alphas must be >= 1")
    X = read_embeddings(args.input, args.format)
    dev = read_similarity(args.dev_sim)
    cells = length_sweep(X, dev, base, args.alphas)
    for a, c in zip(args.alphas, cells):
        rho = "n/a" if c.rho is None else f"{c.rho:.4f}"
        print(f"alpha={a} K={c.K} sparsity={c.sparsity:.4f} rho={rho}")
    _report(args, {"alphas": list(args.alphas), "cells": [c.to_dict() for c in cells]})
    return EXIT_OK


def cmd_baseline(args):
    X = read_embeddings(args.vectors)
    if args.method == "sign":
        B = sign_binarize(X)
        write_binary(args.out, B)
        info = {"method": "sign", "active": int(sum(r.size for r in B.rows)), "V": X.V, "L": X.L}
    else:
        T, th = mean_threshold(X)
        write_embeddings(args.out, T, fmt=lambda v: str(int(v)))
        info = {"method": "mean-threshold", "m_plus": th.m_plus, "m_minus": th.m_minus,
                "V": X.V, "L": X.L}
    print(" ".join(f"{k}={v}" for k, v in info.items()))
    _report(args, info)
    return EXIT_OK


def cmd_eval_sim(args):
    vectors = read_vectors(args.vectors)
    results = {}
    for path in args.dataset:
        res = eval_similarity(vectors, read_similarity(path))
        results[path] = vars(res)
        print(f"{path}\trho={res.rho:.4f}\tcovered={res.covered}\tskipped={res.skipped}")
    _report(args, results)
    return EXIT_OK


def cmd_eval_clf(args):
    if args.n_tokens < 1:
        raise UsageError("--n-tokens must be >= 1")
    if any(not (v >= 0 and math.isfinite(v)) for v in args.l2_grid):
        raise UsageError("--l2-grid values must be finite and >= 0")
    vectors = read_vectors(args.vectors)
    splits = {}
    for name in ("train", "dev", "test"):
        ds = read_labeled(getattr(args, name), args.lowercase)
        F, y, flagged = featurize_dataset(ds, vectors, args.mode, args.n_tokens)
        splits[name] = (F, y)
        if flagged:
            logger.warning("%s: %d examples have no in-vocabulary tokens", name, flagged)
    res = train_logreg(splits["train"], splits["dev"], args.l2_grid, splits["test"])
    print(f"features={splits['train'][0].shape[1]} l2={res.l2:g} "
          f"dev={res.dev_accuracy[res.l2]:.4f} test={res.test_accuracy:.4f}")
    _report(args, {"mode": args.mode, "features": int(splits["train"][0].shape[1]), "l2": res.l2,
                   "dev_accuracy": {repr(k): v for k, v in res.dev_accuracy.items()},
                   "test_accuracy": res.test_accuracy})
    return EXIT_OK


def cmd_cluster(args):
    if args.k < 1 or args.max_iters < 1:
        raise UsageError("--k and --max-iters must be >= 1")
    vectors = read_vectors(args.vectors)
    res = kmeans(vectors.to_dense(), args.k, args.seed, args.max_iters)
    members = [[] for _ in range(args.k)]
    for w, c in zip(vectors.vocab, res.labels):
        members[int(c)].append(w)
    for j, ws in enumerate(members):
        print(f"{j}\t{len(ws)}\t{', '.join(ws[: args.show])}")
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as f:
            for w, c in zip(vectors.vocab, res.labels):
                f.write(f"{w}\t{int(c)}\n")
    _report(args, {"k": args.k, "wcss": res.wcss, "iterations": res.iterations,
                   "sizes": [len(m) for m in members]})
    return EXIT_OK


def cmd_intrusion(args):
    if args.n_dims < 1 or args.per_dim < 1:
        raise UsageError("--n-dims and --per-dim must be >= 1")
    vectors = read_vectors(args.vectors)
    instances, skipped = gen_intrusions(vectors, args.n_dims, args.per_dim, args.seed)
    records = [{"dimension": i.dimension, "words": list(i.presented),
                "top_words": list(i.top_words), "intruder": i.intruder} for i in instances]
    for r in records:
        print(", ".join(r["words"]))
    if skipped:
        print(f"skipped dimensions without a valid intruder: {skipped}", file=sys.stderr)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as f:
            for r in records:
                f.write(json.dumps(r, sort_keys=True) + "\n")
    _report(args, {"instances": records, "skipped_dimensions": skipped})
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "gridsearch": cmd_gridsearch,
    "sweep": cmd_sweep,
    "baseline": cmd_baseline,
    "eval-sim": cmd_eval_sim,
    "eval-clf": cmd_eval_clf,
    "cluster": cmd_cluster,
    "intrusion": cmd_intrusion,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(f"overcomplete {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as e:
        print(f"overcomplete {args.command}: {e}", file=sys.stderr)
        return EXIT_DIVERGED
    except (ParseError, EvaluationError, ConfigError, ValueError, OSError) as e:
        print(f"overcomplete {args.command}: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
