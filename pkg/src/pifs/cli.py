"""Command-line front end.

Exit codes: 0 on success, 1 on usage/parse/validation errors (nothing is
written), 2 on capacity errors or a missing external dataset.  All output
files are written atomically (temp file + rename) and contain plain text
only; reports are ``key value`` lines.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    MatrixKind,
    pairwise_matrix,
    read_matrix,
    wasserstein_distance,
    write_matrix,
)
from .data import load_point_cloud, parse_sampler_spec, sample, write_point_cloud, PRESET_NAMES
from .diagram import DROP, TruncateAt, read_diagram, to_pif, write_diagram
from .errors import CapacityError, DatasetMissingError
from .experiments import EXPERIMENT_NAMES, run_experiment, _write_atomic
from .homology import compute_persistence, rips_filtration
from .learn import (
    DEFAULT_C_GRID,
    HoldoutSplit,
    KFold,
    LeaveOneOut,
    LeavePOut,
    cross_validate_kernel,
    kernel_pca,
    precision_recall,
)
from .stats import confidence_band, two_sample_z_test
from .stepfn import lp_norm, read_step_function, write_step_function
from .stats import mean_pif

__all__ = ["main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _parse_essential(text: str):
    if text == "drop":
        return DROP
    if text.startswith("truncate="):
        try:
            return TruncateAt(float(text.split("=", 1)[1]))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad truncation scale in {text!r}") from None
    raise argparse.ArgumentTypeError(
        f"expected 'drop' or 'truncate=T', got {text!r}"
    )


def _parse_scheme(text: str):
    if text == "loo":
        return LeaveOneOut()
    if text.startswith("lpo="):
        return LeavePOut(int(text.split("=", 1)[1]))
    if text.startswith("split="):
        return HoldoutSplit(float(text.split("=", 1)[1]))
    if text == "kfold":
        return "kfold"  # resolved with --folds later
    raise argparse.ArgumentTypeError(
        f"expected kfold, loo, lpo=P, or split=F, got {text!r}"
    )


def _parse_c_grid(text: str):
    try:
        values = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad C grid {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty C grid")
    return values


def build_parser() -> _Parser:
    parser = _Parser(prog="pifs", description=__doc__)
    parser.add_argument("--version", action="version", version=f"pifs {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("sample", help="draw a seeded point cloud from a shape")
    p.add_argument("--spec", required=True, help="shape:param=...,count=...,seed=...")
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("ph", help="Vietoris-Rips persistence of a point cloud")
    p.add_argument("--in", dest="infile", required=True, type=Path)
    p.add_argument("--eps-max", required=True, type=float)
    p.add_argument("--max-dim", type=int, default=2, help="max simplex dimension (homology to max-dim-1)")
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("pif", help="indicator summary of a persistence diagram")
    p.add_argument("--in", dest="infile", required=True, type=Path)
    p.add_argument("--dim", type=int, default=None, help="dimension block to use (default: the only one)")
    p.add_argument("--essential", type=_parse_essential, default=DROP, metavar="drop|truncate=T")
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("norm", help="Lp norm of a step-function file")
    p.add_argument("--in", dest="infile", required=True, type=Path)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("mean", help="pointwise mean of step-function files")
    p.add_argument("--in", dest="infiles", required=True, type=Path, nargs="+")
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("band", help="bootstrap confidence band for a family of step functions")
    p.add_argument("--in", dest="infiles", required=True, type=Path, nargs="+")
    p.add_argument("--bootstrap", type=int, default=1000, metavar="B")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-prefix", required=True, type=Path)
    p.add_argument("--no-figures", action="store_true")

    p = sub.add_parser("ztest", help="two-sample z-test on step-function corpora")
    p.add_argument("--a", required=True, type=Path, help="directory of step-function files")
    p.add_argument("--b", required=True, type=Path)
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--out", type=Path, default=None)

    for name, kind in (("dist", MatrixKind.DISTANCE), ("kernel", MatrixKind.KERNEL)):
        p = sub.add_parser(name, help=f"pairwise {kind.value} matrix over diagram files")
        p.add_argument("--in", dest="infiles", required=True, type=Path, nargs="+")
        p.add_argument("--p", type=float, default=1.0)
        p.add_argument("--dim", type=int, default=None)
        p.add_argument("--essential", type=_parse_essential, default=DROP, metavar="drop|truncate=T")
        p.add_argument("--form", choices=("square", "triplet"), default="square")
        p.add_argument("--out", required=True, type=Path)
        p.set_defaults(kind=kind)

    p = sub.add_parser("wasserstein", help="exact Wasserstein distance between two diagrams")
    p.add_argument("--a", required=True, type=Path)
    p.add_argument("--b", required=True, type=Path)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--essential", type=_parse_essential, default=DROP, metavar="drop|truncate=T")

    p = sub.add_parser("kpca", help="kernel PCA embedding of a kernel matrix file")
    p.add_argument("--kernel", required=True, type=Path)
    p.add_argument("--components", type=int, default=2)
    p.add_argument("--labels", type=Path, default=None, help="optional labels for the figure")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--no-figures", action="store_true")

    p = sub.add_parser("svm-cv", help="cross-validate an SVM on a precomputed kernel matrix")
    p.add_argument("--kernel", required=True, type=Path)
    p.add_argument("--labels", required=True, type=Path)
    p.add_argument("--scheme", type=_parse_scheme, default="kfold", metavar="kfold|loo|lpo=P|split=F")
    p.add_argument("--folds", type=int, default=5, help="k for the kfold scheme")
    p.add_argument("--unstratified", action="store_true")
    p.add_argument("--c-grid", type=_parse_c_grid, default=DEFAULT_C_GRID, metavar="C1,C2,...")
    p.add_argument("--inner-folds", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("pr", help="precision-recall curve from scores and labels")
    p.add_argument("--scores", required=True, type=Path)
    p.add_argument("--labels", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--no-figures", action="store_true")

    p = sub.add_parser("experiment", help="regenerate a named experiment end to end")
    p.add_argument("name", choices=EXPERIMENT_NAMES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", type=Path, default=None)
    p.add_argument("--corpus-dir", type=Path, default=None, help="graph corpus for social-networks")
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--points", type=int, default=None)
    p.add_argument("--eps-max", type=float, default=None)
    p.add_argument("--preset", choices=PRESET_NAMES, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--bootstrap", type=int, default=None)
    p.add_argument("--c-grid", type=_parse_c_grid, default=None)
    p.add_argument("--folds", type=int, default=None)
    p.add_argument("--inner-folds", type=int, default=None)
    p.add_argument("--limit", type=int, default=None, help="subsample the graph corpus")
    p.add_argument("--no-figures", action="store_true")

    return parser


def _emit_report(report: dict, out: Path | None) -> None:
    lines = []
    for key, value in report.items():
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, float):
            text = f"{value:.17g}"
        else:
            text = str(value)
        lines.append(f"{key} {text}")
    body = "\n".join(lines) + "\n"
    if out is None:
        sys.stdout.write(body)
    else:
        _write_atomic(out, lambda fh: fh.write(body))


def _select_diagram(path: Path, dim: int | None):
    diagrams = read_diagram(path)
    if not diagrams:
        raise ValueError(f"{path}: no diagrams found")
    if dim is None:
        if len(diagrams) > 1:
            raise ValueError(
                f"{path}: {len(diagrams)} dimension blocks; select one with --dim"
            )
        return diagrams[0]
    for d in diagrams:
        if d.dimension == dim:
            return d
    raise ValueError(f"{path}: no dimension-{dim} block")


def _read_step_dir(directory: Path):
    if not directory.is_dir():
        raise ValueError(f"{directory} is not a directory")
    files = sorted(directory.glob("*.txt"))
    if not files:
        raise ValueError(f"no .txt step-function files in {directory}")
    return [read_step_function(f) for f in files]


def _read_labels(path: Path) -> np.ndarray:
    values = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        try:
            values.append(int(text))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: expected an integer label, got {text!r}") from None
    return np.array(values, dtype=int)


def _read_scores(path: Path) -> list[float]:
    values = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        try:
            values.append(float(text))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: expected a score, got {text!r}") from None
    return values


def _cmd_sample(args) -> int:
    spec = parse_sampler_spec(args.spec)
    points = sample(spec)
    _write_atomic(args.out, lambda fh: write_point_cloud(points, fh))
    return 0


def _cmd_ph(args) -> int:
    points = load_point_cloud(args.infile)
    if points.size == 0:
        raise ValueError(f"{args.infile}: empty point cloud")
    fil = rips_filtration(points, args.eps_max, args.max_dim)
    diagrams = compute_persistence(fil, max(args.max_dim - 1, 0))
    _write_atomic(args.out, lambda fh: write_diagram(diagrams, fh))
    return 0


def _cmd_pif(args) -> int:
    diagram = _select_diagram(args.infile, args.dim)
    summary = to_pif(diagram, args.essential)
    _write_atomic(args.out, lambda fh: write_step_function(summary, fh))
    return 0


def _cmd_norm(args) -> int:
    f = read_step_function(args.infile)
    _emit_report({"p": args.p, "norm": lp_norm(f, args.p)}, args.out)
    return 0


def _cmd_mean(args) -> int:
    fns = [read_step_function(f) for f in args.infiles]
    _write_atomic(args.out, lambda fh: write_step_function(mean_pif(fns), fh))
    return 0


def _cmd_band(args) -> int:
    fns = [read_step_function(f) for f in args.infiles]
    band = confidence_band(fns, args.bootstrap, args.alpha, args.seed)
    center = mean_pif(fns)
    prefix = args.out_prefix
    prefix.parent.mkdir(parents=True, exist_ok=True)
    _write_atomic(prefix.with_name(prefix.name + "_mean.txt"), lambda fh: write_step_function(center, fh))
    _write_atomic(prefix.with_name(prefix.name + "_lower.txt"), lambda fh: write_step_function(band.lower, fh))
    _write_atomic(prefix.with_name(prefix.name + "_upper.txt"), lambda fh: write_step_function(band.upper, fh))
    if not args.no_figures:
        from . import plotting

        plotting.save_confidence_band(prefix.with_name(prefix.name + "_band.png"), band, center)
    _emit_report(
        {"n": len(fns), "bootstrap": args.bootstrap, "alpha": args.alpha,
         "seed": args.seed, "theta_hat": band.theta_hat},
        None,
    )
    return 0


def _cmd_ztest(args) -> int:
    fs1 = _read_step_dir(args.a)
    fs2 = _read_step_dir(args.b)
    result = two_sample_z_test(fs1, fs2, args.alpha)
    _emit_report(
        {
            "n": result.n,
            "alpha": result.alpha,
            "y1": result.y1,
            "y2": result.y2,
            "s1_sq": result.s1_sq,
            "s2_sq": result.s2_sq,
            "z": result.z,
            "p_value": result.p_value,
            "critical": result.critical,
            "reject": result.reject,
        },
        args.out,
    )
    return 0


def _cmd_matrix(args) -> int:
    corpus = [_select_diagram(path, args.dim) for path in args.infiles]
    matrix = pairwise_matrix(corpus, args.p, args.kind, args.essential)
    _write_atomic(args.out, lambda fh: write_matrix(matrix, fh, form=args.form))
    return 0


def _cmd_wasserstein(args) -> int:
    from .diagram import apply_policy

    da = apply_policy(_select_diagram(args.a, args.dim), args.essential)
    db = apply_policy(_select_diagram(args.b, args.dim), args.essential)
    _emit_report({"p": args.p, "wasserstein": wasserstein_distance(da, db, args.p)}, None)
    return 0


def _cmd_kpca(args) -> int:
    K = read_matrix(args.kernel)
    coords = kernel_pca(K, args.components)
    _write_atomic(
        args.out,
        lambda fh: fh.writelines(" ".join(f"{x:.17g}" for x in row) + "\n" for row in coords),
    )
    if not args.no_figures:
        from . import plotting

        labels = _read_labels(args.labels) if args.labels else None
        plotting.save_embedding(args.out.with_suffix(".png"), coords, labels)
    return 0


def _cmd_svm_cv(args) -> int:
    K = read_matrix(args.kernel)
    raw = _read_labels(args.labels)
    if len(raw) != K.n:
        raise ValueError(f"{len(raw)} labels for a {K.n}x{K.n} kernel")
    distinct = sorted(set(raw.tolist()))
    if len(distinct) != 2:
        raise ValueError(f"need exactly 2 classes, found {distinct}")
    y = np.where(raw == distinct[0], -1, 1)
    scheme = KFold(args.folds, stratified=not args.unstratified) if args.scheme == "kfold" else args.scheme
    result = cross_validate_kernel(
        K.to_dense(), y, scheme, args.c_grid, args.seed, inner_folds=args.inner_folds
    )
    report = {
        "scheme": args.scheme if isinstance(args.scheme, str) else type(args.scheme).__name__,
        "seed": args.seed,
        "accuracy": result.accuracy,
        "folds": len(result.per_fold),
        "skipped_folds": result.skipped_folds,
    }
    for i, acc in enumerate(result.per_fold):
        report[f"fold_{i}"] = acc
    _emit_report(report, args.out)
    return 0


def _cmd_pr(args) -> int:
    scores = _read_scores(args.scores)
    labels = _read_labels(args.labels)
    curve, auc = precision_recall(scores, labels)
    _write_atomic(
        args.out,
        lambda fh: fh.writelines(f"{r:.17g} {p:.17g}\n" for r, p in curve),
    )
    if not args.no_figures:
        from . import plotting

        plotting.save_pr_curves(args.out.with_suffix(".png"), [("scores", curve, auc)])
    _emit_report({"auc": auc, "points": len(curve)}, None)
    return 0


def _cmd_experiment(args) -> int:
    out_dir = args.out_dir if args.out_dir is not None else Path(f"{args.name}-out")
    kwargs = {"figures": not args.no_figures}
    overrides = {
        "replicates": args.replicates,
        "points": args.points,
        "eps_max": args.eps_max,
        "preset": args.preset,
        "alpha": args.alpha,
        "bootstrap": args.bootstrap,
        "c_grid": args.c_grid,
        "folds": args.folds,
        "inner_folds": args.inner_folds,
    }
    allowed = {
        "sphere-torus-ztest": {"replicates", "points", "eps_max", "preset", "alpha", "bootstrap"},
        "sphere-torus-svm": {"replicates", "points", "eps_max", "preset", "c_grid", "folds", "inner_folds"},
        "random-cube": {"replicates", "points", "eps_max"},
        "sphere-profile": {"replicates", "points", "eps_max"},
        "social-networks": {"c_grid", "inner_folds"},
    }[args.name]
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in allowed:
            raise ValueError(f"--{key.replace('_', '-')} does not apply to {args.name}")
        kwargs[key] = value
    if args.name == "social-networks":
        kwargs["corpus_dir"] = args.corpus_dir
        if args.limit is not None:
            kwargs["limit"] = args.limit
    report = run_experiment(args.name, args.seed, out_dir, **kwargs)
    _emit_report(report, None)
    return 0


_HANDLERS = {
    "sample": _cmd_sample,
    "ph": _cmd_ph,
    "pif": _cmd_pif,
    "norm": _cmd_norm,
    "mean": _cmd_mean,
    "band": _cmd_band,
    "ztest": _cmd_ztest,
    "dist": _cmd_matrix,
    "kernel": _cmd_matrix,
    "wasserstein": _cmd_wasserstein,
    "kpca": _cmd_kpca,
    "svm-cv": _cmd_svm_cv,
    "pr": _cmd_pr,
    "experiment": _cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _HANDLERS[args.command](args)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (DatasetMissingError, CapacityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
