"""Kernel-based learning on diagram corpora.

A conditionally positive definite kernel (the negated summary distance) is
used directly in a binary soft-margin SVM trained by sequential minimal
optimization with maximal-violating-pair selection, in kernel PCA via
double centering, and in deterministic cross-validation harnesses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .analysis import MatrixKind, SymmetricMatrix, pairwise_matrix
from .diagram import DROP, EssentialPolicy, PersistenceDiagram

__all__ = [
    "LabeledCorpus",
    "SvmModel",
    "KFold",
    "LeaveOneOut",
    "LeavePOut",
    "HoldoutSplit",
    "CvScheme",
    "CvResult",
    "EmptyEmbeddingError",
    "kernel_pca",
    "svm_train",
    "svm_predict",
    "cross_validate",
    "cross_validate_kernel",
    "precision_recall",
]


class EmptyEmbeddingError(ValueError):
    """The centered kernel has no positive spectral directions."""


@dataclass(frozen=True)
class LabeledCorpus:
    """Diagrams with integer class labels, aligned by position."""

    diagrams: tuple[PersistenceDiagram, ...]
    labels: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "diagrams", tuple(self.diagrams))
        object.__setattr__(self, "labels", tuple(int(l) for l in self.labels))
        if len(self.diagrams) != len(self.labels):
            raise ValueError(
                f"{len(self.diagrams)} diagrams but {len(self.labels)} labels"
            )

    def __len__(self) -> int:
        return len(self.diagrams)


@dataclass(frozen=True)
class KFold:
    k: int
    stratified: bool = True

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"k must be >= 2, got {self.k}")


@dataclass(frozen=True)
class LeaveOneOut:
    pass


@dataclass(frozen=True)
class LeavePOut:
    p: int

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"p must be >= 1, got {self.p}")


@dataclass(frozen=True)
class HoldoutSplit:
    train_fraction: float

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError(
                f"train fraction must be in (0, 1), got {self.train_fraction!r}"
            )


CvScheme = KFold | LeaveOneOut | LeavePOut | HoldoutSplit


def kernel_pca(K: SymmetricMatrix | np.ndarray, components: int) -> np.ndarray:
    """Spectral embedding of a kernel matrix after double centering.

    Centers ``K`` as ``J K J`` with ``J = I - ones/n``, keeps the
    ``components`` largest positive eigenvalues, and embeds point ``i`` as
    ``(sqrt(l_k) v_k[i])_k``.  Each eigenvector is oriented so its
    largest-magnitude entry is positive, which fixes the sign ambiguity.
    """
    Kd = K.to_dense() if isinstance(K, SymmetricMatrix) else np.asarray(K, dtype=float)
    n = Kd.shape[0]
    if not 1 <= components <= n - 1:
        raise ValueError(f"components must be in [1, {n - 1}], got {components}")
    centered = Kd - Kd.mean(axis=0) - Kd.mean(axis=1)[:, None] + Kd.mean()
    evals, evecs = np.linalg.eigh((centered + centered.T) / 2.0)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    tol = n * np.finfo(float).eps * max(1.0, float(np.abs(evals).max(initial=0.0)))
    positive = evals > tol
    if not positive.any():
        if np.abs(centered).max(initial=0.0) <= tol:
            return np.zeros((n, components))
        raise EmptyEmbeddingError("centered kernel has no positive eigenvalues")
    k = min(components, int(positive.sum()))
    vecs = evecs[:, :k].copy()
    for col in range(k):
        lead = np.argmax(np.abs(vecs[:, col]))
        if vecs[lead, col] < 0:
            vecs[:, col] = -vecs[:, col]
    return vecs * np.sqrt(evals[:k])


@dataclass(frozen=True)
class SvmModel:
    """Soft-margin dual solution over a precomputed kernel."""

    support: tuple[int, ...]
    dual_coef: tuple[float, ...]
    support_labels: tuple[int, ...]
    bias: float
    c: float
    n_train: int
    kernel_order: float | None = None
    converged: bool = True
    diagonal_shift: float = 0.0


def _smo(K: np.ndarray, y: np.ndarray, C: float, tol: float, maxiter: int):
    """Maximal-violating-pair SMO on the soft-margin dual.

    Returns (alpha, bias, converged).  The gradient of the dual objective is
    tracked incrementally; the working pair is the most violating (i, j)
    with i from the upward-feasible set and j from the downward-feasible
    set, which makes the iteration deterministic.
    """
    n = len(y)
    alpha = np.zeros(n)
    grad = np.ones(n)
    converged = False
    for _ in range(maxiter):
        yg = y * grad
        up = np.where(y > 0, alpha < C, alpha > 0.0)
        down = np.where(y > 0, alpha > 0.0, alpha < C)
        if not up.any() or not down.any():
            converged = True
            break
        i = int(np.argmax(np.where(up, yg, -np.inf)))
        j = int(np.argmin(np.where(down, yg, np.inf)))
        gap = yg[i] - yg[j]
        if gap <= tol:
            converged = True
            break
        room_i = C - alpha[i] if y[i] > 0 else alpha[i]
        room_j = alpha[j] if y[j] > 0 else C - alpha[j]
        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        lam = min(room_i, room_j, gap / eta if eta > 0 else math.inf)
        if lam <= 0:
            break
        alpha[i] = min(C, max(0.0, alpha[i] + y[i] * lam))
        alpha[j] = min(C, max(0.0, alpha[j] - y[j] * lam))
        grad -= lam * y * (K[:, i] - K[:, j])
    yg = y * grad
    free = (alpha > 0.0) & (alpha < C)
    if free.any():
        bias = float(yg[free].mean())
    else:
        up = np.where(y > 0, alpha < C, alpha > 0.0)
        down = np.where(y > 0, alpha > 0.0, alpha < C)
        hi = float(np.where(up, yg, -np.inf).max())
        lo = float(np.where(down, yg, np.inf).min())
        ends = [v for v in (hi, lo) if np.isfinite(v)]
        bias = float(np.mean(ends)) if ends else 0.0
    return alpha, bias, converged


def svm_train(
    K: SymmetricMatrix | np.ndarray,
    labels: Sequence[int],
    C: float,
    tol: float = 1e-3,
    maxiter: int = 100_000,
    kernel_order: float | None = None,
) -> SvmModel:
    """Train a binary SVM on a precomputed (conditionally PD) kernel.

    If the solver fails to reach the KKT tolerance within the iteration
    budget, one retry is made with a small diagonal shift (recorded on the
    model); failing that, the best-effort solution is returned with
    ``converged=False``.
    """
    Kd = K.to_dense() if isinstance(K, SymmetricMatrix) else np.asarray(K, dtype=float)
    y = np.asarray(labels, dtype=float)
    if Kd.shape != (len(y), len(y)):
        raise ValueError(f"kernel shape {Kd.shape} does not match {len(y)} labels")
    if not set(np.unique(y)) <= {-1.0, 1.0}:
        raise ValueError("labels must be -1/+1")
    if not C > 0:
        raise ValueError(f"C must be positive, got {C!r}")
    alpha, bias, converged = _smo(Kd, y, C, tol, maxiter)
    shift = 0.0
    if not converged:
        shift = 1e-8 * max(1.0, float(np.abs(Kd).max()))
        alpha2, bias2, conv2 = _smo(Kd + shift * np.eye(len(y)), y, C, tol, maxiter)
        if conv2:
            alpha, bias, converged = alpha2, bias2, True
        else:
            shift = 0.0
    support = tuple(int(i) for i in np.flatnonzero(alpha > 0.0))
    return SvmModel(
        support=support,
        dual_coef=tuple(float(alpha[i]) for i in support),
        support_labels=tuple(int(y[i]) for i in support),
        bias=bias,
        c=C,
        n_train=len(y),
        kernel_order=kernel_order,
        converged=converged,
        diagonal_shift=shift,
    )


def decision_value(model: SvmModel, k_row: Sequence[float]) -> float:
    """Decision score for one query given its kernel row over the training set."""
    row = np.asarray(k_row, dtype=float)
    if row.shape != (model.n_train,):
        raise ValueError(
            f"kernel row has length {row.shape}, expected ({model.n_train},)"
        )
    score = model.bias
    for a, lbl, idx in zip(model.dual_coef, model.support_labels, model.support):
        score += a * lbl * row[idx]
    return float(score)


def svm_predict(model: SvmModel, k_row: Sequence[float]) -> tuple[int, float]:
    """Predict the label of a query; ties in the score go to +1."""
    score = decision_value(model, k_row)
    return (1 if score >= 0 else -1), score


@dataclass(frozen=True)
class CvResult:
    """Outcome of a cross-validation run."""

    accuracy: float
    per_fold: tuple[float, ...]
    skipped_folds: int
    chosen_c: tuple[float, ...]
    scores: tuple[tuple[int, float], ...]  # (sample index, decision score) on held-out data


def _deal(indices: np.ndarray, k: int) -> list[list[int]]:
    folds: list[list[int]] = [[] for _ in range(k)]
    for pos, idx in enumerate(indices):
        folds[pos % k].append(int(idx))
    return folds


def _stratified_folds(labels: np.ndarray, k: int, rng: np.random.Generator):
    """Shuffle within class, then deal round-robin to folds."""
    folds: list[list[int]] = [[] for _ in range(k)]
    for cls in sorted(set(labels.tolist())):
        members = np.flatnonzero(labels == cls)
        for fold, part in zip(folds, _deal(rng.permutation(members), k)):
            fold.extend(part)
    return [np.array(sorted(f), dtype=int) for f in folds]


def _plain_folds(n: int, k: int, rng: np.random.Generator):
    return [np.array(sorted(f), dtype=int) for f in _deal(rng.permutation(n), k)]


def _test_folds(scheme: CvScheme, labels: np.ndarray, rng: np.random.Generator):
    n = len(labels)
    if isinstance(scheme, KFold):
        if scheme.stratified:
            return _stratified_folds(labels, scheme.k, rng)
        return _plain_folds(n, scheme.k, rng)
    if isinstance(scheme, LeaveOneOut):
        return _plain_folds(n, n, rng)
    if isinstance(scheme, LeavePOut):
        if not scheme.p <= n - 1:
            raise ValueError(f"leave-{scheme.p}-out needs p <= n-1 = {n - 1}")
        return [np.array(c, dtype=int) for c in combinations(range(n), scheme.p)]
    if isinstance(scheme, HoldoutSplit):
        test: list[int] = []
        for cls in sorted(set(labels.tolist())):
            members = np.flatnonzero(labels == cls)
            n_test = len(members) - int(round(scheme.train_fraction * len(members)))
            test.extend(int(i) for i in rng.permutation(members)[:n_test])
        return [np.array(sorted(test), dtype=int)]
    raise TypeError(f"unknown cross-validation scheme {scheme!r}")


def _pick_c(
    K: np.ndarray,
    y: np.ndarray,
    train: np.ndarray,
    c_grid: Sequence[float],
    inner_folds: int,
    rng: np.random.Generator,
    tol: float,
) -> float:
    """Inner stratified CV over the C grid; ties go to the smallest C."""
    y_tr = y[train]
    folds = _stratified_folds(y_tr, inner_folds, rng)
    best_c, best_acc = None, -1.0
    for c in sorted(c_grid):
        accs = []
        for fold in folds:
            if fold.size == 0:
                continue
            inner_test = train[fold]
            inner_train = np.setdiff1d(train, inner_test)
            if len(set(y[inner_train].tolist())) < 2:
                continue
            model = svm_train(K[np.ix_(inner_train, inner_train)], y[inner_train], c, tol=tol)
            preds = _predict_block(model, K[np.ix_(inner_test, inner_train)])
            accs.append(float(np.mean(preds == y[inner_test])))
        acc = float(np.mean(accs)) if accs else -1.0
        if acc > best_acc:
            best_c, best_acc = c, acc
    return best_c if best_c is not None else sorted(c_grid)[0]


def _predict_block(model: SvmModel, rows: np.ndarray) -> np.ndarray:
    scores = _score_block(model, rows)
    return np.where(scores >= 0, 1.0, -1.0)


def _score_block(model: SvmModel, rows: np.ndarray) -> np.ndarray:
    coef = np.zeros(model.n_train)
    for a, lbl, idx in zip(model.dual_coef, model.support_labels, model.support):
        coef[idx] = a * lbl
    return rows @ coef + model.bias


def cross_validate_kernel(
    K: np.ndarray,
    labels: Sequence[int],
    scheme: CvScheme,
    c_grid: Sequence[float],
    seed: int,
    inner_folds: int = 3,
    tol: float = 1e-3,
) -> CvResult:
    """Nested cross-validation of an SVM on a precomputed kernel matrix.

    The outer folds follow ``scheme``; an inner stratified cross-validation
    on each training set selects C from ``c_grid`` by mean accuracy.  Folds
    whose training data contains a single class are skipped and counted.
    """
    Kd = K.to_dense() if isinstance(K, SymmetricMatrix) else np.asarray(K, dtype=float)
    y = np.asarray(labels, dtype=float)
    if len(set(np.unique(y))) != 2 or not set(np.unique(y)) <= {-1.0, 1.0}:
        raise ValueError("labels must contain both classes -1 and +1")
    if not c_grid:
        raise ValueError("empty C grid")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    folds = _test_folds(scheme, y, rng)
    per_fold: list[float] = []
    chosen: list[float] = []
    scores: list[tuple[int, float]] = []
    skipped = 0
    n = len(y)
    for fold_idx, test in enumerate(folds):
        train = np.setdiff1d(np.arange(n), test)
        if test.size == 0 or len(set(y[train].tolist())) < 2:
            skipped += 1
            continue
        inner_rng = np.random.Generator(
            np.random.Philox(np.random.SeedSequence((seed, fold_idx)))
        )
        best_c = _pick_c(Kd, y, train, c_grid, inner_folds, inner_rng, tol)
        model = svm_train(Kd[np.ix_(train, train)], y[train], best_c, tol=tol)
        fold_scores = _score_block(model, Kd[np.ix_(test, train)])
        preds = np.where(fold_scores >= 0, 1.0, -1.0)
        per_fold.append(float(np.mean(preds == y[test])))
        chosen.append(best_c)
        scores.extend((int(i), float(s)) for i, s in zip(test, fold_scores))
    if not per_fold:
        raise ValueError("every fold was skipped; corpus too degenerate to validate")
    return CvResult(
        accuracy=float(np.mean(per_fold)),
        per_fold=tuple(per_fold),
        skipped_folds=skipped,
        chosen_c=tuple(chosen),
        scores=tuple(scores),
    )


DEFAULT_C_GRID = (0.1, 1.0, 10.0, 100.0)


def cross_validate(
    corpus: LabeledCorpus,
    p: float,
    scheme: CvScheme,
    c_grid: Sequence[float] = DEFAULT_C_GRID,
    seed: int = 0,
    inner_folds: int = 3,
    policy: EssentialPolicy = DROP,
    tol: float = 1e-3,
) -> CvResult:
    """Cross-validate the summary kernel of order ``p`` on a labeled corpus.

    Labels may be any two distinct integers; the smaller maps to -1.
    """
    distinct = sorted(set(corpus.labels))
    if len(distinct) != 2:
        raise ValueError(f"binary classification needs exactly 2 labels, got {distinct}")
    y = np.where(np.asarray(corpus.labels) == distinct[0], -1.0, 1.0)
    K = pairwise_matrix(corpus.diagrams, p, MatrixKind.KERNEL, policy)
    return cross_validate_kernel(
        K.to_dense(), y, scheme, c_grid, seed, inner_folds=inner_folds, tol=tol
    )


def format_accuracy_table(
    rows: dict[str, dict[str, float]], value_format: str = "{:.3f}"
) -> str:
    """Aligned text table of accuracies: one row per kernel, one column per scheme."""
    if not rows:
        raise ValueError("empty table")
    columns = list(dict.fromkeys(c for cells in rows.values() for c in cells))
    header = [""] + columns
    body = [
        [name] + [value_format.format(cells[c]) if c in cells else "-" for c in columns]
        for name, cells in rows.items()
    ]
    widths = [max(len(line[i]) for line in [header] + body) for i in range(len(header))]
    lines = [
        "  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip()
        for line in [header] + body
    ]
    return "\n".join(lines) + "\n"


def precision_recall(
    scores: Sequence[float], labels: Sequence[int]
) -> tuple[list[tuple[float, float]], float]:
    """Precision-recall curve over descending score thresholds.

    Tied scores collapse into a single threshold; the area under the curve
    uses the step-wise sum ``sum (r_k - r_{k-1}) * p_k`` with ``r_0 = 0``.
    """
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=int)
    if s.shape != y.shape:
        raise ValueError(f"{len(s)} scores but {len(y)} labels")
    if not set(np.unique(y)) <= {-1, 1}:
        raise ValueError("labels must be -1/+1")
    n_pos = int((y == 1).sum())
    if n_pos == 0:
        raise ValueError("need at least one positive label")
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    curve: list[tuple[float, float]] = []
    auc = 0.0
    tp = fp = 0
    prev_recall = 0.0
    i = 0
    while i < len(s):
        j = i
        while j < len(s) and s[j] == s[i]:
            if y[j] == 1:
                tp += 1
            else:
                fp += 1
            j += 1
        recall = tp / n_pos
        precision = tp / (tp + fp)
        curve.append((recall, precision))
        auc += (recall - prev_recall) * precision
        prev_recall = recall
        i = j
    return curve, float(auc)
