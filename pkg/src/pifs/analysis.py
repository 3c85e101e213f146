"""Distances and kernels between diagrams via their step-function summaries.

The L^p distance between two summaries is computed in one pass over the
union of their breakpoints, so comparing two diagrams is linear in their
total size.  Negating the distance gives a conditionally positive definite
kernel for p in {1, 2}.  A naive exact Wasserstein solver over the
augmented bipartite matching is included for desk-scale comparisons only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .diagram import (
    DROP,
    EssentialPolicy,
    PersistenceDiagram,
    to_pif,
)
from .errors import CapacityError, ParseError
from .stepfn import StepFunction, _merged_values, _read_lines, _write_to

__all__ = [
    "SymmetricMatrix",
    "MatrixKind",
    "pif_distance",
    "pif_kernel",
    "pairwise_matrix",
    "wasserstein_distance",
    "read_matrix",
    "write_matrix",
]

WASSERSTEIN_SIZE_LIMIT = 512


def pif_distance(f: StepFunction, g: StepFunction, p: float) -> float:
    """L^p distance ``(integral |f-g|^p)^(1/p)`` in one breakpoint merge."""
    if not p >= 1:
        raise ValueError(f"distance order must be >= 1, got {p!r}")
    total = math.fsum(
        abs(fv - gv) ** p * (b - a) for a, b, fv, gv in _merged_values(f, g)
    )
    return total ** (1.0 / p)


def _check_kernel_order(p: float) -> float:
    if p not in (1, 2):
        raise ValueError(
            f"kernel order must be 1 or 2 for conditional positive definiteness, got {p!r}"
        )
    return float(p)


def pif_kernel(
    di: PersistenceDiagram,
    dj: PersistenceDiagram,
    p: float,
    policy: EssentialPolicy = DROP,
) -> float:
    """Negated summary distance; conditionally positive definite for p in {1,2}."""
    p = _check_kernel_order(p)
    return -pif_distance(to_pif(di, policy), to_pif(dj, policy), p)


@dataclass(frozen=True)
class SymmetricMatrix:
    """Dense symmetric matrix stored as its row-major lower triangle."""

    n: int
    entries: tuple[float, ...]

    def __post_init__(self):
        expected = self.n * (self.n + 1) // 2
        if len(self.entries) != expected:
            raise ValueError(
                f"lower triangle of a {self.n}x{self.n} matrix needs {expected} "
                f"entries, got {len(self.entries)}"
            )
        object.__setattr__(self, "entries", tuple(float(v) for v in self.entries))

    def get(self, i: int, j: int) -> float:
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise IndexError(f"({i},{j}) outside a {self.n}x{self.n} matrix")
        if i < j:
            i, j = j, i
        return self.entries[i * (i + 1) // 2 + j]

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        k = 0
        for i in range(self.n):
            for j in range(i + 1):
                out[i, j] = out[j, i] = self.entries[k]
                k += 1
        return out

    @classmethod
    def from_dense(cls, matrix) -> "SymmetricMatrix":
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        if not np.array_equal(m, m.T):
            raise ValueError("matrix is not symmetric")
        n = m.shape[0]
        entries = tuple(m[i, j] for i in range(n) for j in range(i + 1))
        return cls(n, entries)


class MatrixKind(Enum):
    DISTANCE = "distance"
    KERNEL = "kernel"


def pairwise_matrix(
    corpus: Sequence[PersistenceDiagram],
    p: float,
    kind: MatrixKind,
    policy: EssentialPolicy = DROP,
) -> SymmetricMatrix:
    """Pairwise distance or kernel matrix over a corpus of diagrams.

    Summaries are computed once per diagram and reused; the diagonal is 0
    for both kinds (the self-distance, negated or not).
    """
    if len(corpus) == 0:
        raise ValueError("empty corpus")
    if kind is MatrixKind.KERNEL:
        _check_kernel_order(p)
    summaries = [to_pif(d, policy) for d in corpus]
    sign = -1.0 if kind is MatrixKind.KERNEL else 1.0
    entries = []
    for i, fi in enumerate(summaries):
        for j in range(i + 1):
            if j == i:
                entries.append(0.0)
            else:
                entries.append(sign * pif_distance(fi, summaries[j], p))
    return SymmetricMatrix(len(corpus), tuple(entries))


def wasserstein_distance(di: PersistenceDiagram, dj: PersistenceDiagram, p: float) -> float:
    """Exact p-Wasserstein distance between two finite diagrams.

    Ground distance is the infinity norm on the plane; every point may match
    a point of the other diagram or its diagonal projection (at cost half
    its persistence).  Solved exactly on the augmented bipartite graph,
    which is quadratic in size: inputs beyond the size budget are rejected.
    """
    if not p >= 1:
        raise ValueError(f"order must be >= 1, got {p!r}")
    for d in (di, dj):
        if any(pair.is_essential for pair in d):
            raise ValueError("diagrams must be finite; apply a policy first")
    a = np.array([(q.birth, q.death) for q in di], dtype=float).reshape(-1, 2)
    b = np.array([(q.birth, q.death) for q in dj], dtype=float).reshape(-1, 2)
    m, n = len(a), len(b)
    if m + n > WASSERSTEIN_SIZE_LIMIT:
        raise CapacityError(
            f"combined diagram size {m + n} exceeds the naive solver budget "
            f"of {WASSERSTEIN_SIZE_LIMIT} points"
        )
    if m == 0 and n == 0:
        return 0.0
    diag_a = (a[:, 1] - a[:, 0]) / 2.0
    diag_b = (b[:, 1] - b[:, 0]) / 2.0
    size = m + n
    cost = np.zeros((size, size))
    if m and n:
        cost[:m, :n] = (
            np.maximum(
                np.abs(a[:, None, 0] - b[None, :, 0]),
                np.abs(a[:, None, 1] - b[None, :, 1]),
            )
            ** p
        )
    cost[:m, n:] = np.inf
    cost[m:, :n] = np.inf
    np.fill_diagonal(cost[:m, n:], diag_a**p)
    np.fill_diagonal(cost[m:, :n], diag_b**p)
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum() ** (1.0 / p))


def write_matrix(matrix: SymmetricMatrix, dest, form: str = "square") -> None:
    """Write the square (``n`` then full rows) or triplet (``i j value``) form."""

    def emit(stream):
        if form == "square":
            stream.write(f"{matrix.n}\n")
            for i in range(matrix.n):
                stream.write(
                    " ".join(f"{matrix.get(i, j):.17g}" for j in range(matrix.n)) + "\n"
                )
        elif form == "triplet":
            for i in range(matrix.n):
                for j in range(matrix.n):
                    stream.write(f"{i} {j} {matrix.get(i, j):.17g}\n")
        else:
            raise ValueError(f"unknown matrix form {form!r}")

    _write_to(dest, emit)


def read_matrix(source) -> SymmetricMatrix:
    """Read either matrix text form, detected from the first data line."""
    lines, name = _read_lines(source)
    data = [
        (lineno, text.split())
        for lineno, raw in lines
        if (text := raw.strip()) and not text.startswith("#")
    ]
    if not data:
        raise ParseError("empty matrix file", name)
    first_lineno, first = data[0]
    if len(first) == 1:
        try:
            n = int(first[0])
        except ValueError:
            raise ParseError(f"expected a size header, got {first[0]!r}", name, first_lineno) from None
        if len(data) != n + 1:
            raise ParseError(f"expected {n} rows after the header, got {len(data) - 1}", name)
        dense = np.zeros((n, n))
        for i, (lineno, tokens) in enumerate(data[1:]):
            if len(tokens) != n:
                raise ParseError(f"expected {n} entries, got {len(tokens)}", name, lineno)
            try:
                dense[i] = [float(t) for t in tokens]
            except ValueError:
                raise ParseError("non-numeric matrix entry", name, lineno) from None
    elif len(first) == 3:
        triplets = []
        for lineno, tokens in data:
            if len(tokens) != 3:
                raise ParseError(f"expected 'i j value', got {' '.join(tokens)!r}", name, lineno)
            try:
                triplets.append((int(tokens[0]), int(tokens[1]), float(tokens[2])))
            except ValueError:
                raise ParseError("malformed triplet", name, lineno) from None
        n = max(max(i, j) for i, j, _ in triplets) + 1
        dense = np.zeros((n, n))
        for i, j, v in triplets:
            dense[i, j] = v
    else:
        raise ParseError(
            f"expected a size header or 'i j value' triplets, got {len(first)} tokens",
            name,
            first_lineno,
        )
    if not np.array_equal(dense, dense.T):
        raise ParseError("matrix is not symmetric", name)
    return SymmetricMatrix.from_dense(dense)
