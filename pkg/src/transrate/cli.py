"""Command-line interface: ``transrate {score,rank,eval,gen,oracle}``.

Exit codes: 0 ok, 1 usage, 2 I/O, 3 numeric failure, 4 degenerate data.
"""
import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import baselines, oracle, zooio
from .coding import CLASSIFICATION, REGRESSION, WEIGHTINGS, ScoreConfig, TransferScore, \
    bin_regression_labels, transrate
from .errors import TransRateError, UsageError
from .matcore import resolve_threads
from .rankeval import evaluate, rank_models

log = logging.getLogger("transrate")

METHODS = ("transrate", "leep", "nce", "hscore", "logme", "lfc")
NEEDS_PSEUDO = ("leep", "nce")

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")

def _add_score_flags(p):
    p.add_argument("--method", default="transrate", choices=METHODS + ("all",))
    p.add_argument("--eps", type=float, default=1e-4)
    p.add_argument("--no-unit-norm", action="store_true")
    p.add_argument("--no-per-dim", action="store_true")
    p.add_argument("--class-weighting", default="empirical", choices=WEIGHTINGS)
    p.add_argument("--subtract-label-entropy", action="store_true")
    p.add_argument("--bins", type=int, default=10, help="regression bins")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $TRANSRATE_THREADS or 1)")

def build_parser():
    parser = _Parser(prog="transrate", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("score", help="score one feature matrix")
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--pseudo-labels", help="source softmax outputs (for leep/nce)")
    p.add_argument("--task", default=CLASSIFICATION, choices=(CLASSIFICATION, REGRESSION))
    p.add_argument("--model-name", default="model")
    p.add_argument("--out", help="also write a JSON report here")
    _add_score_flags(p)

    p = sub.add_parser("rank", help="rank the models of a zoo manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--format", default="csv", choices=("csv", "json"))
    p.add_argument("--out")
    _add_score_flags(p)

    p = sub.add_parser("eval", help="correlate scores with observed accuracies")
    p.add_argument("--manifest", required=True)
    p.add_argument("--format", default="csv", choices=("csv", "json"))
    p.add_argument("--out")
    _add_score_flags(p)

    p = sub.add_parser("gen", help="write a seeded synthetic dataset")
    p.add_argument("--preset", required=True, choices=("blobs", "separability-sweep", "toy-fig3-like"))
    p.add_argument("--n", type=int, default=200, help="samples per class")
    p.add_argument("--d", type=int, default=16)
    p.add_argument("--classes", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--std", type=float, default=1.0)
    p.add_argument("--radius", type=float, default=3.0, help="distance of class means from the origin")
    p.add_argument("--spread", type=float, default=1.0, help="toy preset: mean angle, 0..1")
    p.add_argument("--levels", type=int, default=10, help="sweep preset: number of levels")
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("oracle", help="histogram mutual information (d <= 3)")
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--bins-per-dim", type=int, default=8)
    return parser

def _config(args):
    return ScoreConfig(eps=args.eps, unit_norm=not args.no_unit_norm, per_dim=not args.no_per_dim,
                       class_weighting=args.class_weighting,
                       subtract_label_entropy=args.subtract_label_entropy,
                       regression_bins=args.bins)

def _methods(args, have_pseudo):
    if args.method == "all":
        return [m for m in METHODS if have_pseudo or m not in NEEDS_PSEUDO]
    if args.method in NEEDS_PSEUDO and not have_pseudo:
        raise UsageError(f"--method {args.method} needs pseudo labels")
    return [args.method]

def score_methods(name, F, labels, P, methods, cfg, threads=1):
    """Run each requested scorer on one model's inputs."""
    classes = labels
    if labels.kind == REGRESSION:
        classes = bin_regression_labels(labels, cfg.regression_bins)
    out = []
    for m in methods:
        if m == "transrate":
            out.append(transrate(F, labels, cfg, model_name=name, threads=threads))
            continue
        if m == "leep":
            v = baselines.leep_score(P, classes)
        elif m == "nce":
            v = baselines.nce_score(P, classes)
        elif m == "hscore":
            v = baselines.hscore(F, classes)
        elif m == "logme":
            v = baselines.logme_score(F, labels)
        elif m == "lfc":
            v = baselines.lfc_score(F, classes)
        else:
            raise UsageError(f"unknown method {m!r}")
        out.append(TransferScore(name, m, float(v), m, F.shape[0], F.shape[1], classes.n_classes))
    return out

def _emit(text, out=None):
    sys.stdout.write(text)
    if out:
        Path(out).write_text(text, encoding="utf-8")

def cmd_score(args):
    cfg = _config(args)
    F = zooio.read_feature_file(args.features)
    labels = zooio.read_labels(args.labels, args.task)
    P = zooio.read_pseudo_labels(args.pseudo_labels) if args.pseudo_labels else None
    methods = _methods(args, P is not None)
    scores = score_methods(args.model_name, F, labels, P, methods, cfg, resolve_threads(args.threads))
    sys.stdout.write("method,score\n")
    for s in scores:
        sys.stdout.write(f"{s.method},{zooio.fmt_float(s.value)}\n")
    if args.out:
        report = {"model": args.model_name, "config": cfg.__dict__ | {"fingerprint": cfg.fingerprint()},
                  "scores": [s.to_dict() for s in scores]}
        Path(args.out).write_text(zooio.dumps(report) + "\n", encoding="utf-8")
    return 0

def _score_zoo(manifest, args):
    cfg = _config(args)
    have_pseudo = all(m.pseudo_labels_path is not None for m in manifest.models)
    methods = _methods(args, have_pseudo)
    threads = resolve_threads(args.threads)

    def one(entry):
        F = zooio.read_feature_file(entry.features_path)
        labels = zooio.read_labels(entry.labels_path, manifest.task_kind)
        P = zooio.read_pseudo_labels(entry.pseudo_labels_path) if entry.pseudo_labels_path else None
        return score_methods(entry.name, F, labels, P, methods, cfg, threads=1)

    if threads > 1 and len(manifest.models) > 1:
        with ThreadPoolExecutor(threads) as pool:
            per_model = list(pool.map(one, manifest.models))
    else:
        per_model = [one(e) for e in manifest.models]
    by_method = {m: [scores[i] for scores in per_model] for i, m in enumerate(methods)}
    return methods, by_method

def cmd_rank(args):
    manifest = zooio.read_manifest(args.manifest)
    methods, by_method = _score_zoo(manifest, args)
    if args.format == "json":
        report = {m: [e._asdict() for e in rank_models(by_method[m])] for m in methods}
        _emit(zooio.dumps(report) + "\n", args.out)
    else:
        lines = ["method,rank,model,score"]
        for m in methods:
            for e in rank_models(by_method[m]):
                lines.append(f"{m},{e.rank},{e.model_name},{zooio.fmt_float(e.score)}")
        _emit("\n".join(lines) + "\n", args.out)
    return 0

def cmd_eval(args):
    manifest = zooio.read_manifest(args.manifest)
    acc = manifest.accuracies()
    manifest.models = [m for m in manifest.models if m.name in acc]
    methods, by_method = _score_zoo(manifest, args)
    rows = {}
    for m in methods:
        corr = evaluate((s.model_name, s.value, acc[s.model_name]) for s in by_method[m])
        rows[m] = corr._asdict()
    if args.format == "json":
        _emit(zooio.dumps(rows) + "\n", args.out)
    else:
        lines = ["method,pearson,kendall_tau,weighted_tau"]
        for m, r in rows.items():
            lines.append(",".join([m] + [zooio.fmt_float(r[k]) for k in ("pearson", "kendall_tau", "weighted_tau")]))
        _emit("\n".join(lines) + "\n", args.out)
    return 0

def cmd_gen(args):
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if args.preset == "blobs":
        means = oracle.random_means(args.classes, args.d, args.radius, args.seed)
        F, y = oracle.gen_blobs(oracle.BlobSpec(means, args.std, args.n, args.seed))
        zooio.write_feature_file(out / "features.trfm", F)
        zooio.write_labels(out / "labels.txt", y)
    elif args.preset == "toy-fig3-like":
        F, y = oracle.toy_two_class(args.spread, args.std, args.n, args.radius, args.seed)
        zooio.write_feature_file(out / "features.trfm", F)
        zooio.write_labels(out / "labels.txt", y)
    else:
        base = oracle.BlobSpec(oracle.planar_means(args.classes, args.d, args.radius),
                               args.std, args.n, args.seed)
        models = []
        for i, (F, y) in enumerate(oracle.separability_sweep(args.levels, base)):
            name = f"level{i:02d}"
            zooio.write_feature_file(out / f"{name}.trfm", F)
            if i == 0:
                zooio.write_labels(out / "labels.txt", y)
            models.append(zooio.ModelEntry(name, out / f"{name}.trfm", out / "labels.txt"))
        with open(out / "accuracy.csv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write("model,accuracy\n")
            for i, m in enumerate(models):
                # separation level stands in for observed accuracy
                fh.write(f"{m.name},{zooio.fmt_float(i / (len(models) - 1))}\n")
        zooio.write_manifest(out / "manifest.json",
                             zooio.ZooManifest(CLASSIFICATION, models, out / "accuracy.csv"))
    sys.stdout.write(f"wrote {args.preset} data to {out}\n")
    return 0

def cmd_oracle(args):
    F = zooio.read_feature_file(args.features)
    y = zooio.read_labels(args.labels, CLASSIFICATION)
    mi = oracle.histogram_mi(F, y, args.bins_per_dim)
    sys.stdout.write(f"histogram_mi,{zooio.fmt_float(mi)}\n")
    return 0

COMMANDS = {"score": cmd_score, "rank": cmd_rank, "eval": cmd_eval, "gen": cmd_gen, "oracle": cmd_oracle}

def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "threads", None) is not None and args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        return COMMANDS[args.command](args)
    except TransRateError as exc:
        sys.stderr.write(f"transrate: {type(exc).__name__}: {exc}\n")
        return exc.exit_code
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        sys.stderr.write(f"transrate: {exc}\n")
        return 2
    except ValueError as exc:
        sys.stderr.write(f"transrate: {exc}\n")
        return 4

if __name__ == "__main__":
    sys.exit(main())
