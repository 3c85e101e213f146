"""End-to-end experiment drivers behind the ``experiment`` CLI subcommand.

Each driver regenerates one study deterministically from a seed, writing a
line-oriented ``key value`` report plus plot-ready data files (and rendered
figures unless disabled) into an output directory.  Cloud seeds derive from
``class offset + replicates * experiment_seed + replicate index`` so batches
with consecutive experiment seeds use disjoint, reproducible sample seeds.
"""

from __future__ import annotations

import math
import os
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import plotting
from .analysis import MatrixKind, pairwise_matrix, write_matrix
from .data import Cube, SamplerSpec, Shape, Sphere, preset_shapes, sample, load_graph_corpus
from .diagram import DROP, PersistenceDiagram, TruncateAt, apply_policy, to_pif, write_diagram
from .errors import DatasetMissingError, ValidationError
from .homology import compute_persistence, degree_filtration, rips_filtration
from .learn import (
    DEFAULT_C_GRID,
    HoldoutSplit,
    KFold,
    cross_validate_kernel,
    format_accuracy_table,
    kernel_pca,
    precision_recall,
)
from .stats import confidence_band, two_sample_z_test
from .stepfn import StepFunction, write_step_function

__all__ = [
    "EXPERIMENT_NAMES",
    "run_experiment",
    "sphere_torus_corpus",
    "cube_summaries",
    "DEFAULT_EPS_SPHERE_TORUS",
    "DEFAULT_EPS_CUBE",
]

# sphere/torus scale chosen so that, at the equal-volume preset, most
# one-dimensional activity has died by eps_max (few essential classes drop)
DEFAULT_EPS_SPHERE_TORUS = 0.845
DEFAULT_EPS_CUBE = 0.6

_CLASS_OFFSETS = {"sphere": 0, "torus": 1_000_000, "cube": 2_000_000, "profile": 3_000_000}


def _cloud_seed(kind: str, experiment_seed: int, replicates: int, index: int) -> int:
    return _CLASS_OFFSETS[kind] + replicates * experiment_seed + index


def _write_atomic(path: Path, emit: Callable) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        emit(fh)
    os.replace(tmp, path)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_report(report: dict, path: Path) -> None:
    _write_atomic(path, lambda fh: fh.writelines(
        f"{key} {_format_value(value)}\n" for key, value in report.items()
    ))


def _rips_summary(
    points: np.ndarray, eps_max: float, max_hom_dim: int
) -> list[PersistenceDiagram]:
    fil = rips_filtration(points, eps_max, max_hom_dim + 1)
    return compute_persistence(fil, max_hom_dim)


def sphere_torus_corpus(
    experiment_seed: int,
    *,
    preset: str = "equal-volume",
    replicates: int = 50,
    points: int = 100,
    eps_max: float = DEFAULT_EPS_SPHERE_TORUS,
) -> tuple[list[PersistenceDiagram], list[PersistenceDiagram]]:
    """Dimension-1 diagrams for one batch of sphere and torus clouds."""
    sphere, torus = preset_shapes(preset)
    out: list[list[PersistenceDiagram]] = []
    for kind, shape in (("sphere", sphere), ("torus", torus)):
        dgms = []
        for i in range(replicates):
            seed = _cloud_seed(kind, experiment_seed, replicates, i)
            pts = sample(SamplerSpec(shape, points, seed))
            dgms.append(_rips_summary(pts, eps_max, 1)[1])
        out.append(dgms)
    return out[0], out[1]


def cube_summaries(
    experiment_seed: int,
    *,
    replicates: int = 50,
    points: int = 100,
    eps_max: float = DEFAULT_EPS_CUBE,
    max_hom_dim: int = 2,
    kind: str = "cube",
    shape: Shape | None = None,
) -> list[list[StepFunction]]:
    """Per-dimension indicator summaries for seeded point-cloud replicates."""
    shape = shape if shape is not None else Cube(1.0)
    per_dim: list[list[StepFunction]] = [[] for _ in range(max_hom_dim + 1)]
    for i in range(replicates):
        seed = _cloud_seed(kind, experiment_seed, replicates, i)
        pts = sample(SamplerSpec(shape, points, seed))
        dgms = _rips_summary(pts, eps_max, max_hom_dim)
        for p in range(max_hom_dim + 1):
            per_dim[p].append(to_pif(dgms[p], DROP))
    return per_dim


def argmax_scale(f: StepFunction) -> float:
    """Left endpoint of the first interval attaining the maximum value."""
    if f.is_empty:
        return math.nan
    best = max(f.values)
    for x, v in zip(f.breakpoints, f.values):
        if v == best:
            return x
    raise AssertionError("unreachable")


def first_scale_below(f: StepFunction, threshold: float) -> float:
    """Left endpoint of the first interval with value below ``threshold``."""
    if f.is_empty:
        return math.nan
    for x, v in zip(f.breakpoints, f.values):
        if v < threshold:
            return x
    return f.breakpoints[-1]


def _mean(fs: Sequence[StepFunction]) -> StepFunction:
    from .stats import mean_pif

    return mean_pif(fs)


def run_sphere_torus_ztest(
    seed: int,
    out_dir: Path,
    *,
    preset: str = "equal-volume",
    replicates: int = 50,
    points: int = 100,
    eps_max: float = DEFAULT_EPS_SPHERE_TORUS,
    alpha: float = 0.01,
    bootstrap: int = 1000,
    figures: bool = True,
) -> dict:
    out_dir = Path(out_dir)
    sphere_dgms, torus_dgms = sphere_torus_corpus(
        seed, preset=preset, replicates=replicates, points=points, eps_max=eps_max
    )
    groups = {}
    for name, dgms in (("sphere", sphere_dgms), ("torus", torus_dgms)):
        fns = [to_pif(d, DROP) for d in dgms]
        groups[name] = fns
        # one artifact kind per directory so each can be globbed uniformly
        for i, (d, f) in enumerate(zip(dgms, fns)):
            _write_atomic(out_dir / name / "diagrams" / f"{i:02d}.txt", lambda fh, d=d: write_diagram(d, fh))
            _write_atomic(out_dir / name / "pifs" / f"{i:02d}.txt", lambda fh, f=f: write_step_function(f, fh))
        _write_atomic(out_dir / f"{name}_mean.txt", lambda fh, fns=fns: write_step_function(_mean(fns), fh))

    result = two_sample_z_test(groups["sphere"], groups["torus"], alpha)
    bands = {
        name: confidence_band(fns, bootstrap, 0.05, seed=seed)
        for name, fns in groups.items()
    }
    for name, band in bands.items():
        _write_atomic(out_dir / f"{name}_band_lower.txt", lambda fh, b=band: write_step_function(b.lower, fh))
        _write_atomic(out_dir / f"{name}_band_upper.txt", lambda fh, b=band: write_step_function(b.upper, fh))

    report = {
        "experiment": "sphere-torus-ztest",
        "seed": seed,
        "preset": preset,
        "replicates": replicates,
        "points": points,
        "eps_max": eps_max,
        "alpha": alpha,
        "y1": result.y1,
        "y2": result.y2,
        "s1_sq": result.s1_sq,
        "s2_sq": result.s2_sq,
        "z": result.z,
        "p_value": result.p_value,
        "critical": result.critical,
        "reject": result.reject,
        "theta_hat_sphere": bands["sphere"].theta_hat,
        "theta_hat_torus": bands["torus"].theta_hat,
    }
    write_report(report, out_dir / "report.txt")
    if figures:
        plotting.save_step_functions(
            out_dir / "mean_pifs.png",
            [
                ("sphere", groups["sphere"], _mean(groups["sphere"])),
                ("torus", groups["torus"], _mean(groups["torus"])),
            ],
            title="dimension-1 summaries",
        )
        for name in ("sphere", "torus"):
            plotting.save_confidence_band(
                out_dir / f"{name}_band.png", bands[name], _mean(groups[name]), title=name
            )
    return report


def run_sphere_torus_svm(
    seed: int,
    out_dir: Path,
    *,
    preset: str = "equal-volume",
    replicates: int = 50,
    points: int = 100,
    eps_max: float = DEFAULT_EPS_SPHERE_TORUS,
    folds: int = 5,
    cv_seeds: int = 5,
    c_grid: Sequence[float] = DEFAULT_C_GRID,
    inner_folds: int = 3,
    figures: bool = True,
) -> dict:
    out_dir = Path(out_dir)
    sphere_dgms, torus_dgms = sphere_torus_corpus(
        seed, preset=preset, replicates=replicates, points=points, eps_max=eps_max
    )
    corpus = list(sphere_dgms) + list(torus_dgms)
    labels = np.array([-1] * len(sphere_dgms) + [1] * len(torus_dgms))

    report = {
        "experiment": "sphere-torus-svm",
        "seed": seed,
        "preset": preset,
        "replicates": replicates,
        "points": points,
        "eps_max": eps_max,
        "folds": folds,
        "cv_seeds": cv_seeds,
    }
    pr_curves = []
    table_rows: dict[str, dict[str, float]] = {}
    for p in (1, 2):
        K = pairwise_matrix(corpus, p, MatrixKind.KERNEL)
        _write_atomic(out_dir / f"kernel_k{p}.txt", lambda fh, K=K: write_matrix(K, fh))
        dense = K.to_dense()
        accs = []
        for cv_seed in range(cv_seeds):
            res = cross_validate_kernel(
                dense, labels, KFold(folds), c_grid, seed=cv_seed, inner_folds=inner_folds
            )
            accs.append(res.accuracy)
            report[f"accuracy_k{p}_seed{cv_seed}"] = res.accuracy
            table_rows.setdefault(f"k{p}", {})[f"seed {cv_seed}"] = res.accuracy
            if cv_seed == 0:
                order = [i for i, _ in res.scores]
                scores = [s for _, s in res.scores]
                curve, auc = precision_recall(scores, labels[order])
                pr_curves.append((f"k{p}", curve, auc))
                report[f"pr_auc_k{p}"] = auc
                _write_atomic(
                    out_dir / f"pr_k{p}.txt",
                    lambda fh, curve=curve: fh.writelines(
                        f"{r:.17g} {pr:.17g}\n" for r, pr in curve
                    ),
                )
        report[f"accuracy_k{p}"] = float(np.mean(accs))
        report[f"accuracy_k{p}_std"] = float(np.std(accs))
        table_rows[f"k{p}"]["mean"] = float(np.mean(accs))
        if p == 1:
            emb = kernel_pca(K, 2)
            _write_atomic(
                out_dir / "embedding_k1.txt",
                lambda fh, emb=emb: fh.writelines(
                    " ".join(f"{x:.17g}" for x in row) + "\n" for row in emb
                ),
            )
            if figures:
                plotting.save_embedding(out_dir / "embedding_k1.png", emb, labels, title="kernel PCA (k1)")
                plotting.save_matrix_heatmap(
                    out_dir / "kernel_k1.png", K, title="pairwise kernel (k1)"
                )
    _write_atomic(out_dir / "accuracies.txt", lambda fh: fh.write(format_accuracy_table(table_rows)))
    write_report(report, out_dir / "report.txt")
    if figures:
        plotting.save_pr_curves(out_dir / "pr_curves.png", pr_curves, title="out-of-fold precision-recall")
    return report


def _profile_experiment(
    name: str,
    kind: str,
    shape: Shape,
    seed: int,
    out_dir: Path,
    *,
    replicates: int,
    points: int,
    eps_max: float,
    figures: bool,
) -> dict:
    out_dir = Path(out_dir)
    per_dim = cube_summaries(
        seed,
        replicates=replicates,
        points=points,
        eps_max=eps_max,
        max_hom_dim=2,
        kind=kind,
        shape=shape,
    )
    means = []
    for p, fns in enumerate(per_dim):
        for i, f in enumerate(fns):
            _write_atomic(out_dir / f"pif_{i:02d}_d{p}.txt", lambda fh, f=f: write_step_function(f, fh))
        mean = _mean(fns)
        means.append(mean)
        _write_atomic(out_dir / f"pif_mean_d{p}.txt", lambda fh, m=mean: write_step_function(m, fh))

    d0_drop = first_scale_below(means[0], 5.0)
    d1_peak = argmax_scale(means[1])
    d2_peak = argmax_scale(means[2])
    report = {
        "experiment": name,
        "seed": seed,
        "replicates": replicates,
        "points": points,
        "eps_max": eps_max,
        "d0_first_below_5": d0_drop,
        "d1_argmax_scale": d1_peak,
        "d2_argmax_scale": d2_peak,
        "d1_after_d0_settles": bool(d1_peak > d0_drop),
        "d2_after_d1": bool(d2_peak > d1_peak),
    }
    write_report(report, out_dir / "report.txt")
    if figures:
        plotting.save_step_functions(
            out_dir / "profiles.png",
            [(f"dim {p}", per_dim[p], means[p]) for p in range(3)],
            title=f"{name} (n={replicates})",
        )
    return report


def run_random_cube(
    seed: int,
    out_dir: Path,
    *,
    replicates: int = 50,
    points: int = 100,
    eps_max: float = DEFAULT_EPS_CUBE,
    figures: bool = True,
) -> dict:
    return _profile_experiment(
        "random-cube",
        "cube",
        Cube(1.0),
        seed,
        out_dir,
        replicates=replicates,
        points=points,
        eps_max=eps_max,
        figures=figures,
    )


def run_sphere_profile(
    seed: int,
    out_dir: Path,
    *,
    replicates: int = 50,
    points: int = 100,
    eps_max: float = 1.0,
    radius: float = 1.0,
    figures: bool = True,
) -> dict:
    return _profile_experiment(
        "sphere-profile",
        "profile",
        Sphere(radius),
        seed,
        out_dir,
        replicates=replicates,
        points=points,
        eps_max=eps_max,
        figures=figures,
    )


SOCIAL_CORPUS_HINT = (
    "the social-networks experiment needs a benchmark graph corpus directory "
    "(A.txt, graph_indicator.txt, graph_labels.txt, e.g. the REDDIT-BINARY "
    "dataset from the public graph-kernel benchmark collection); pass it via "
    "--corpus-dir"
)


def graph_corpus_diagrams(corpus: Sequence) -> list[PersistenceDiagram]:
    """Dimension-1 diagrams of degree filtrations, truncated per graph.

    Graph one-cycles never die (there are no 2-cells), so every dimension-1
    pair is essential and is truncated at the graph's maximum filtration
    value to give it finite persistence.
    """
    diagrams = []
    for graph, _label in corpus:
        fil = degree_filtration(graph)
        d1 = compute_persistence(fil, 1)[1]
        diagrams.append(apply_policy(d1, TruncateAt(fil.max_value)))
    return diagrams


def run_social_networks(
    seed: int,
    out_dir: Path,
    corpus_dir,
    *,
    train_fraction: float = 0.9,
    inner_folds: int = 4,
    c_grid: Sequence[float] = DEFAULT_C_GRID,
    limit: int | None = None,
    figures: bool = True,
) -> dict:
    out_dir = Path(out_dir)
    if corpus_dir is None:
        raise DatasetMissingError(SOCIAL_CORPUS_HINT)
    corpus_dir = Path(corpus_dir)
    if not corpus_dir.is_dir():
        raise DatasetMissingError(f"{corpus_dir} is not a directory; {SOCIAL_CORPUS_HINT}")
    try:
        corpus = load_graph_corpus(corpus_dir)
    except ValidationError as exc:
        raise DatasetMissingError(f"{corpus_dir} is not a usable corpus ({exc})") from exc
    if limit is not None:
        rng = np.random.Generator(np.random.Philox(seed))
        keep = sorted(rng.permutation(len(corpus))[:limit].tolist())
        corpus = [corpus[i] for i in keep]

    diagrams = graph_corpus_diagrams(corpus)
    raw_labels = [label for _, label in corpus]
    distinct = sorted(set(raw_labels))
    if len(distinct) != 2:
        raise ValidationError(f"need exactly 2 classes, found {distinct}")
    labels = np.where(np.asarray(raw_labels) == distinct[0], -1, 1)

    report = {
        "experiment": "social-networks",
        "seed": seed,
        "graphs": len(corpus),
        "train_fraction": train_fraction,
        "inner_folds": inner_folds,
    }
    pr_curves = []
    table_rows: dict[str, dict[str, float]] = {}
    for p in (1, 2):
        K = pairwise_matrix(diagrams, p, MatrixKind.KERNEL)
        dense = K.to_dense()
        res = cross_validate_kernel(
            dense,
            labels,
            HoldoutSplit(train_fraction),
            c_grid,
            seed=seed,
            inner_folds=inner_folds,
        )
        report[f"accuracy_k{p}"] = res.accuracy
        table_rows[f"k{p}"] = {"holdout": res.accuracy}
        order = [i for i, _ in res.scores]
        scores = [s for _, s in res.scores]
        curve, auc = precision_recall(scores, labels[order])
        report[f"pr_auc_k{p}"] = auc
        table_rows[f"k{p}"]["pr_auc"] = auc
        pr_curves.append((f"k{p}", curve, auc))
        _write_atomic(
            out_dir / f"pr_k{p}.txt",
            lambda fh, curve=curve: fh.writelines(f"{r:.17g} {pr:.17g}\n" for r, pr in curve),
        )
        if p == 1:
            emb = kernel_pca(dense, 2)
            _write_atomic(
                out_dir / "embedding_k1.txt",
                lambda fh, emb=emb: fh.writelines(
                    " ".join(f"{x:.17g}" for x in row) + "\n" for row in emb
                ),
            )
            if figures:
                plotting.save_embedding(
                    out_dir / "embedding_k1.png", emb, labels, title="kernel PCA (k1)"
                )
    _write_atomic(out_dir / "accuracies.txt", lambda fh: fh.write(format_accuracy_table(table_rows)))
    write_report(report, out_dir / "report.txt")
    if figures:
        plotting.save_pr_curves(out_dir / "pr_curves.png", pr_curves, title="held-out precision-recall")
    return report


EXPERIMENT_NAMES = (
    "sphere-torus-ztest",
    "sphere-torus-svm",
    "random-cube",
    "sphere-profile",
    "social-networks",
)


def run_experiment(name: str, seed: int, out_dir, **kwargs) -> dict:
    """Dispatch an experiment by name; unknown names raise ValueError."""
    if name == "sphere-torus-ztest":
        return run_sphere_torus_ztest(seed, Path(out_dir), **kwargs)
    if name == "sphere-torus-svm":
        return run_sphere_torus_svm(seed, Path(out_dir), **kwargs)
    if name == "random-cube":
        return run_random_cube(seed, Path(out_dir), **kwargs)
    if name == "sphere-profile":
        return run_sphere_profile(seed, Path(out_dir), **kwargs)
    if name == "social-networks":
        return run_social_networks(seed, Path(out_dir), **kwargs)
    raise ValueError(f"unknown experiment {name!r}; expected one of {EXPERIMENT_NAMES}")
