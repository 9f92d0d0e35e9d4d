"""Command-line interface: ``mvdfq <command> [flags]``.

Every command is deterministic given its flags and ``--seed``. Randomness is
drawn from ``numpy.random.Generator(PCG64(seed))``. Errors print one line to
stderr and exit with status 1; usage errors exit with status 2 and name the
offending flag.
"""
from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__, selftest, synth
from .crossval import PipelineConfig, cross_validate, discretize, make_folds
from .data import MultivariateSequence, load_discrete, save_discrete
from .gram import compute_cross_gram, compute_gram, load_cross_gram, load_gram
from .gram import save_cross_gram, save_gram
from .ingest import ingest_csv, ingest_fasta, read_manifest
from .kernels import KernelSpec
from .metrics import roc50
from .quantize import (fit_kmeans_quantizer, fit_uniform_quantizer, fit_vq_codebook,
                       load_codebook, load_quantizer, save_codebook, save_quantizer)
from .svm import load_models, predict_ovr, save_models, train_ovr

PROG = "mvdfq"


class CliError(Exception):
    pass


# --- flag groups ---------------------------------------------------------------

def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _add_input(p):
    g = p.add_argument_group("input")
    g.add_argument("--manifest", help="TSV of id, label, group, path (time-major CSV files)")
    g.add_argument("--fasta", help="protein FASTA; residues become BLOSUM62 rows")
    g.add_argument("--labels", help="id<TAB>label[<TAB>group] file for --fasta")


def _add_shared(p, threads=False, seed=False, out_required=True):
    if seed:
        p.add_argument("--seed", type=int, default=0, help="PRNG seed (PCG64), default 0")
    if threads:
        p.add_argument("--threads", type=_positive_int, default=1,
                       help="worker threads; never changes the output")
    p.add_argument("--out", required=out_required, help="output path")


def _add_quantization(p, with_vq=True):
    g = p.add_argument_group("quantization")
    choices = ("uniform", "kmeans", "vq") if with_vq else ("uniform", "kmeans")
    g.add_argument("--quantizer", choices=choices, default="uniform")
    g.add_argument("--bins", type=_positive_int, default=32, help="bins per dimension B (default 32)")
    g.add_argument("--codebook-size", type=_positive_int, default=2048,
                   help="VQ codewords D (default 2048)")
    g.add_argument("--max-iter", type=_positive_int, default=100, help="k-means iterations")


def _add_kernel(p):
    g = p.add_argument_group("kernel")
    g.add_argument("--kernel", choices=("spectrum", "mismatch", "sssk"), default="spectrum")
    g.add_argument("--k", type=_positive_int, default=None,
                   help="k-mer length (default 6; 5 for VQ symbols)")
    g.add_argument("--m", type=int, default=1, help="mismatches allowed (default 1)")
    g.add_argument("--t", type=int, default=3, help="SSSK symbols per sample (default 3)")
    g.add_argument("--d", type=_positive_int, default=5, help="SSSK maximum gap (default 5)")
    g.add_argument("--manifold", action="store_true", help="square-root L1 embedding per row")
    g.add_argument("--normalize", action="store_true", help="cosine-normalize kernel values")


def _add_learning(p, folds=False):
    g = p.add_argument_group("learning")
    g.add_argument("--C", type=_positive_float, default=1.0, help="soft-margin penalty (default 1)")
    g.add_argument("--tol", type=_positive_float, default=1e-3, help="KKT tolerance (default 1e-3)")
    if folds:
        g.add_argument("--folds", type=_positive_int, default=5)
        g.add_argument("--group-cv", action="store_true",
                       help="one fold per distinct group key instead of stratified folds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROG, description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("fit-quantizer", help="fit per-dimension bins on a training manifest")
    _add_input(p)
    _add_quantization(p, with_vq=False)
    _add_shared(p, seed=True)

    p = sub.add_parser("fit-codebook", help="fit a VQ codebook with k-means")
    _add_input(p)
    _add_quantization(p)
    _add_shared(p, seed=True)

    p = sub.add_parser("discretize", help="apply a quantizer or codebook to a manifest")
    _add_input(p)
    p.add_argument("--model", required=True, help="quantizer or codebook file")
    _add_shared(p)

    p = sub.add_parser("gram", help="Gram matrix of a discretized dataset")
    p.add_argument("--discrete", required=True, help="discretized dataset file")
    _add_kernel(p)
    _add_shared(p, threads=True)

    p = sub.add_parser("cross-gram", help="kernel values between test and training sequences")
    p.add_argument("--test", required=True, help="discretized test dataset")
    p.add_argument("--train", required=True, help="discretized training dataset")
    _add_kernel(p)
    _add_shared(p, threads=True)

    p = sub.add_parser("train", help="one-vs-rest SVMs on a saved Gram matrix")
    p.add_argument("--gram", required=True, help="Gram matrix file")
    p.add_argument("--discrete", help="dataset supplying labels by id (alternative to --manifest)")
    p.add_argument("--manifest", help="manifest supplying labels by id")
    _add_learning(p)
    _add_shared(p)

    p = sub.add_parser("predict", help="predict labels from a saved cross-Gram matrix")
    p.add_argument("--model", required=True, help="model file from train")
    p.add_argument("--cross-gram", required=True, help="cross-Gram file from cross-gram")
    _add_shared(p, out_required=False)

    p = sub.add_parser("cv", help="cross-validate the full pipeline and print a report")
    _add_input(p)
    _add_quantization(p)
    _add_kernel(p)
    _add_learning(p, folds=True)
    _add_shared(p, threads=True, seed=True, out_required=False)
    p.add_argument("--predictions", help="also write id, fold, truth, predicted, score")

    p = sub.add_parser("split", help="write train/test manifests for one cross-validation fold")
    p.add_argument("--manifest", required=True)
    p.add_argument("--fold", type=int, default=0, help="held-out fold index (default 0)")
    p.add_argument("--folds", type=_positive_int, default=5)
    p.add_argument("--group-cv", action="store_true")
    _add_shared(p, seed=True)

    p = sub.add_parser("eval-roc50", help="ROC50 of a TSV with score and label columns")
    p.add_argument("--scores", required=True, help="TSV with a header naming 'score' and 'label'")
    p.add_argument("--positive", default=None,
                   help="label counted as positive (default: +1 or 1)")
    _add_shared(p, out_required=False)

    p = sub.add_parser("synth", help="write the synthetic AR(1) corpus")
    p.add_argument("--per-class", type=_positive_int, default=20)
    p.add_argument("--classes", type=_positive_int, default=3)
    p.add_argument("--R", type=_positive_int, default=3)
    p.add_argument("--n", type=int, default=300)
    p.add_argument("--noise", type=float, default=0.3)
    p.add_argument("--groups", type=_positive_int, default=5)
    _add_shared(p, seed=True)

    p = sub.add_parser("selftest", help="run the built-in oracle and property checks")
    p.add_argument("--seed", type=int, default=0)
    return parser


# --- helpers -----------------------------------------------------------------

def _load_input(args):
    if args.manifest and args.fasta:
        raise CliError("--manifest and --fasta are mutually exclusive")
    if args.manifest:
        return ingest_csv(args.manifest)
    if args.fasta:
        if not args.labels:
            raise CliError("--fasta needs --labels")
        return ingest_fasta(args.fasta, args.labels)
    raise CliError("one of --manifest or --fasta is required")


def _kernel_spec(args, data) -> KernelSpec:
    first = data[0]
    k = args.k if args.k is not None else (5 if first.min_symbol == 1 else 6)
    return KernelSpec(args.kernel, first.alphabet_size, k=k, m=args.m, t=args.t, d=args.d,
                      manifold=args.manifold, normalize=args.normalize)


def _write(path, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _load_representation(path):
    with open(path, encoding="utf-8") as fh:
        head = fh.readline()
    if head.startswith("vq-codebook"):
        return load_codebook(path)
    return load_quantizer(path)


def _labels_by_id(args) -> dict[str, str]:
    if args.discrete:
        return {s.id: s.label for s in load_discrete(args.discrete)}
    if args.manifest:
        return {r.id: r.label for r in read_manifest(args.manifest)}
    raise CliError("train needs --discrete or --manifest for labels")


# --- commands ----------------------------------------------------------------

def cmd_fit_quantizer(args):
    data = _load_input(args)
    if args.quantizer == "uniform":
        model = fit_uniform_quantizer(data, args.bins)
    else:
        model = fit_kmeans_quantizer(data, args.bins, args.max_iter, args.seed)
    save_quantizer(model, args.out)


def cmd_fit_codebook(args):
    save_codebook(fit_vq_codebook(_load_input(args), args.codebook_size, args.max_iter, args.seed),
                  args.out)


def cmd_discretize(args):
    save_discrete(discretize(_load_representation(args.model), _load_input(args)), args.out)


def cmd_gram(args):
    data = load_discrete(args.discrete)
    save_gram(compute_gram(data, _kernel_spec(args, data), args.threads), args.out)


def cmd_cross_gram(args):
    train, test = load_discrete(args.train), load_discrete(args.test)
    values = compute_cross_gram(test, train, _kernel_spec(args, train), args.threads)
    save_cross_gram(values, [s.id for s in test], [s.id for s in train], args.out)


def cmd_train(args):
    gram = load_gram(args.gram)
    by_id = _labels_by_id(args)
    missing = [i for i in gram.ids if i not in by_id]
    if missing:
        raise CliError(f"no label for gram id {missing[0]!r}")
    models = train_ovr(gram, [by_id[i] for i in gram.ids], args.C, args.tol)
    save_models(models, args.out)


def cmd_predict(args):
    models = load_models(args.model)
    test_ids, train_ids, values = load_cross_gram(args.cross_gram)
    lines = ["id\tlabel\tscore"]
    for sid, row in zip(test_ids, values):
        label, scores = predict_ovr(models, row, train_ids)
        lines.append(f"{sid}\t{label}\t{scores[label]!r}")
    _write(args.out, "\n".join(lines) + "\n")


def _config(args) -> PipelineConfig:
    return PipelineConfig(quantizer=args.quantizer, bins=args.bins, codebook_size=args.codebook_size,
                          max_iter=args.max_iter, kernel=args.kernel, k=args.k, m=args.m, t=args.t,
                          d=args.d, manifold=args.manifold, normalize=args.normalize, C=args.C,
                          tol=args.tol, seed=args.seed, threads=args.threads)


def cmd_cv(args):
    data = _load_input(args)
    result = cross_validate(data, _config(args), args.folds, args.group_cv)
    _write(args.out, result.report.to_tsv())
    if args.predictions:
        lines = ["id\tfold\ttruth\tpredicted\tscore"]
        for seq, f, p, s in zip(data, result.fold_of, result.predictions, result.scores):
            lines.append(f"{seq.id}\t{int(f)}\t{seq.label}\t{p}\t{s[p]!r}")
        Path(args.predictions).write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_split(args):
    rows = read_manifest(args.manifest)
    stub = [MultivariateSequence(r.id, r.label, np.zeros((1, 0)), r.group) for r in rows]
    fold_of = make_folds(stub, args.folds, args.seed, args.group_cv)
    if not 0 <= args.fold <= int(fold_of.max()):
        raise CliError(f"--fold {args.fold} out of range 0..{int(fold_of.max())}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, keep in (("train.tsv", fold_of != args.fold), ("test.tsv", fold_of == args.fold)):
        lines = ["id\tlabel\tgroup\tpath"]
        lines += [f"{r.id}\t{r.label}\t{r.group}\t{r.path.resolve()}"
                  for r, k in zip(rows, keep) if k]
        (out / name).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _read_score_table(path):
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines:
        raise CliError(f"{path}: empty file")
    header = lines[0].split("\t")
    if "score" not in header or "label" not in header:
        raise CliError(f"{path}: header must name 'score' and 'label' columns")
    si, li = header.index("score"), header.index("label")
    scores, labels = [], []
    for lineno, line in enumerate(lines[1:], 2):
        cells = line.split("\t")
        try:
            scores.append(float(cells[si]))
            labels.append(cells[li])
        except (IndexError, ValueError):
            raise CliError(f"{path}:{lineno}: malformed row") from None
    return scores, labels


def cmd_eval_roc50(args):
    scores, labels = _read_score_table(args.scores)
    pos = args.positive
    if pos is None:
        pos = next((c for c in ("+1", "1") if c in labels), None)
        if pos is None:
            raise CliError("cannot infer the positive label; pass --positive")
    value = roc50(scores, [1 if lab == pos else -1 for lab in labels])
    _write(args.out, f"metric\tvalue\nroc50\t{value!r}\n")


def cmd_synth(args):
    data = synth.generate(args.per_class, args.classes, args.R, args.n, args.seed,
                          args.noise, args.groups)
    print(synth.write_corpus(data, args.out))


def cmd_selftest(args):
    results = selftest.run(args.seed)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}\t{name}\t{detail}")
    return 0 if all(ok for _, ok, _ in results) else 1


COMMANDS = {
    "fit-quantizer": cmd_fit_quantizer, "fit-codebook": cmd_fit_codebook,
    "discretize": cmd_discretize, "gram": cmd_gram, "cross-gram": cmd_cross_gram,
    "train": cmd_train, "predict": cmd_predict, "cv": cmd_cv, "split": cmd_split,
    "eval-roc50": cmd_eval_roc50, "synth": cmd_synth, "selftest": cmd_selftest,
}


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"{PROG}: warning: {message}", file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            warnings.showwarning = _show_warning
            return COMMANDS[args.command](args) or 0
    except (CliError, ValueError, OSError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"{PROG}: error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
