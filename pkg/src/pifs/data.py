"""Seeded samplers for geometric test shapes and loaders for text formats.

All samplers draw from the counter-based Philox generator keyed by the
requested seed, so output is identical across platforms and worker counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .errors import ParseError, ValidationError
from .homology import Graph
from .stepfn import _read_lines, _write_to

__all__ = [
    "Sphere",
    "Torus",
    "Cube",
    "Shape",
    "SamplerSpec",
    "sample",
    "parse_sampler_spec",
    "preset_shapes",
    "PRESET_NAMES",
    "load_point_cloud",
    "write_point_cloud",
    "load_graph_corpus",
]


@dataclass(frozen=True)
class Sphere:
    """Uniform distribution on the surface of a radius-``r`` sphere."""

    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"sphere radius must be positive, got {self.r!r}")


@dataclass(frozen=True)
class Torus:
    """Uniform (surface-area) distribution on a torus with radii (R, r)."""

    R: float
    r: float

    def __post_init__(self):
        if self.R < 0:
            raise ValueError(f"major radius must be >= 0, got {self.R!r}")
        if not self.r > 0:
            raise ValueError(f"minor radius must be positive, got {self.r!r}")


@dataclass(frozen=True)
class Cube:
    """Uniform distribution in the solid cube ``[0, side]^3``."""

    side: float

    def __post_init__(self):
        if not self.side > 0:
            raise ValueError(f"cube side must be positive, got {self.side!r}")


Shape = Union[Sphere, Torus, Cube]


@dataclass(frozen=True)
class SamplerSpec:
    shape: Shape
    count: int
    seed: int = 0

    def __post_init__(self):
        if self.count < 1:
            raise ValueError(f"count must be >= 1, got {self.count}")


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _torus_theta_batch(
    rng: np.random.Generator, R: float, r: float, size: int
) -> np.ndarray:
    """One rejection batch of poloidal angles, weighted by |R + r cos(theta)|.

    The acceptance probability is proportional to the surface-area element;
    for R >= r its mean is R / (R + r).
    """
    theta = rng.uniform(0.0, 2.0 * math.pi, size)
    u = rng.uniform(0.0, 1.0, size)
    return theta[u < np.abs(R + r * np.cos(theta)) / (R + r)]


def sample(spec: SamplerSpec) -> np.ndarray:
    """Draw ``spec.count`` points in R^3; deterministic per seed."""
    rng = _rng(spec.seed)
    shape = spec.shape
    if isinstance(shape, Sphere):
        out = np.empty((0, 3))
        while len(out) < spec.count:
            v = rng.normal(size=(spec.count - len(out), 3))
            norms = np.linalg.norm(v, axis=1)
            v = v[norms > 0]
            out = np.concatenate([out, shape.r * v / np.linalg.norm(v, axis=1, keepdims=True)])
        return out
    if isinstance(shape, Torus):
        thetas = np.empty(0)
        while len(thetas) < spec.count:
            need = spec.count - len(thetas)
            batch = _torus_theta_batch(rng, shape.R, shape.r, max(4 * need, 128))
            thetas = np.concatenate([thetas, batch])
        thetas = thetas[: spec.count]
        phis = rng.uniform(0.0, 2.0 * math.pi, spec.count)
        ring = shape.R + shape.r * np.cos(thetas)
        return np.column_stack(
            [ring * np.cos(phis), ring * np.sin(phis), shape.r * np.sin(thetas)]
        )
    if isinstance(shape, Cube):
        return rng.uniform(0.0, shape.side, size=(spec.count, 3))
    raise TypeError(f"unknown shape {shape!r}")


_SHAPE_PARAMS = {
    "sphere": (Sphere, ("r",)),
    "torus": (Torus, ("R", "r")),
    "cube": (Cube, ("side",)),
}


def parse_sampler_spec(text: str) -> SamplerSpec:
    """Parse the CLI encoding ``shape:param=...,count=...,seed=...``."""
    name, sep, rest = text.partition(":")
    name = name.strip().lower()
    if name not in _SHAPE_PARAMS:
        raise ValueError(f"unknown shape {name!r}; expected one of {sorted(_SHAPE_PARAMS)}")
    cls, param_names = _SHAPE_PARAMS[name]
    params: dict[str, float] = {}
    count = None
    seed = 0
    if sep:
        for item in rest.split(","):
            item = item.strip()
            if not item:
                continue
            key, eq, value = item.partition("=")
            if not eq:
                raise ValueError(f"expected key=value, got {item!r}")
            key = key.strip()
            try:
                if key == "count":
                    count = int(value)
                elif key == "seed":
                    seed = int(value)
                elif key in param_names:
                    params[key] = float(value)
                else:
                    raise ValueError(
                        f"unknown parameter {key!r} for shape {name!r} "
                        f"(expected {param_names})"
                    )
            except ValueError as exc:
                if "unknown parameter" in str(exc):
                    raise
                raise ValueError(f"bad value in {item!r}") from None
    missing = [p for p in param_names if p not in params]
    if missing:
        raise ValueError(f"shape {name!r} is missing parameters {missing}")
    if count is None:
        raise ValueError("sampler spec needs count=...")
    return SamplerSpec(shape=cls(**params), count=count, seed=seed)


def equal_volume_sphere_radius(major: float, minor: float) -> float:
    """Sphere radius whose volume matches a solid torus with radii (R, r).

    Solves ``(4/3) pi a^3 = 2 pi^2 R r^2`` for ``a`` by bisection.
    """
    target = 2.0 * math.pi**2 * major * minor**2
    lo, hi = 0.0, max(1.0, major + minor)
    while (4.0 / 3.0) * math.pi * hi**3 < target:
        hi *= 2.0
    for _ in range(200):
        mid = (lo + hi) / 2.0
        if (4.0 / 3.0) * math.pi * mid**3 < target:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


# Two sphere/torus pairings for the two-class experiments: "equal-volume"
# matches enclosed volumes on a 2:1 ring torus; "small-torus" keeps a sphere
# of radius 0.63 against a much smaller spindle torus.
_PRESETS: dict[str, tuple[Sphere, Torus]] = {
    "equal-volume": (
        Sphere(equal_volume_sphere_radius(0.65, 0.325)),
        Torus(0.65, 0.325),
    ),
    "small-torus": (Sphere(0.63), Torus(0.025, 0.05)),
}

PRESET_NAMES = tuple(sorted(_PRESETS))


def preset_shapes(name: str) -> tuple[Sphere, Torus]:
    try:
        return _PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; expected one of {PRESET_NAMES}") from None


def load_point_cloud(source) -> np.ndarray:
    """Read one point per line; dimension inferred from the first data line."""
    lines, name = _read_lines(source)
    rows: list[list[float]] = []
    width = None
    for lineno, raw in lines:
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        tokens = text.split()
        try:
            row = [float(t) for t in tokens]
        except ValueError:
            raise ParseError(f"non-numeric coordinate in {text!r}", name, lineno) from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(
                f"expected {width} coordinates, got {len(row)}", name, lineno
            )
        rows.append(row)
    if not rows:
        return np.empty((0, 0))
    return np.array(rows)


def write_point_cloud(points, dest) -> None:
    pts = np.asarray(points, dtype=float)

    def emit(stream):
        for row in pts:
            stream.write(" ".join(f"{x:.17g}" for x in row) + "\n")

    _write_to(dest, emit)


def _find_corpus_file(directory: Path, stem: str) -> Path:
    exact = directory / f"{stem}.txt"
    if exact.exists():
        return exact
    matches = sorted(directory.glob(f"*_{stem}.txt"))
    if len(matches) == 1:
        return matches[0]
    if not matches:
        raise ValidationError(f"no {stem}.txt (or *_{stem}.txt) in {directory}")
    raise ValidationError(f"ambiguous {stem} files in {directory}: {matches}")


def _read_int_column(path: Path) -> list[int]:
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text:
                continue
            try:
                values.append(int(text))
            except ValueError:
                raise ParseError(f"expected an integer, got {text!r}", str(path), lineno) from None
    return values


def load_graph_corpus(directory) -> list[tuple[Graph, int]]:
    """Load a benchmark graph corpus directory.

    Expects ``A.txt`` (comma-separated 1-indexed edge endpoints),
    ``graph_indicator.txt`` (per-node graph id), and ``graph_labels.txt``
    (per-graph integer label); a shared ``<name>_`` prefix is also accepted.
    Node ids are remapped per graph to ``0..n-1`` preserving order and
    reciprocal edges are deduplicated.
    """
    directory = Path(directory)
    a_path = _find_corpus_file(directory, "A")
    indicator_path = _find_corpus_file(directory, "graph_indicator")
    labels_path = _find_corpus_file(directory, "graph_labels")

    indicator = _read_int_column(indicator_path)
    n_nodes = len(indicator)
    if n_nodes == 0:
        raise ValidationError("empty graph indicator", str(indicator_path))
    n_graphs = max(indicator)
    for lineno, gid in enumerate(indicator, start=1):
        if not 1 <= gid <= n_graphs:
            raise ValidationError(
                f"graph id {gid} out of range", str(indicator_path), lineno
            )

    labels = _read_int_column(labels_path)
    if len(labels) != n_graphs:
        raise ValidationError(
            f"{len(labels)} labels for {n_graphs} graphs", str(labels_path)
        )

    members: list[list[int]] = [[] for _ in range(n_graphs)]
    for node, gid in enumerate(indicator, start=1):
        members[gid - 1].append(node)
    local: dict[int, int] = {}
    graph_of: list[int] = [0] * (n_nodes + 1)
    for gid, nodes in enumerate(members, start=1):
        for pos, node in enumerate(nodes):
            local[node] = pos
            graph_of[node] = gid

    edge_sets: list[set[tuple[int, int]]] = [set() for _ in range(n_graphs)]
    with open(a_path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            tokens = [t.strip() for t in text.split(",")]
            if len(tokens) != 2:
                raise ParseError(f"expected 'u, v', got {text!r}", str(a_path), lineno)
            try:
                u, v = int(tokens[0]), int(tokens[1])
            except ValueError:
                raise ParseError(f"non-integer endpoint in {text!r}", str(a_path), lineno) from None
            for node in (u, v):
                if not 1 <= node <= n_nodes:
                    raise ValidationError(
                        f"node {node} not covered by {indicator_path.name}",
                        str(a_path),
                        lineno,
                    )
            if graph_of[u] != graph_of[v]:
                raise ValidationError(
                    f"edge ({u},{v}) spans graphs {graph_of[u]} and {graph_of[v]}",
                    str(a_path),
                    lineno,
                )
            if u == v:
                raise ValidationError(f"self-loop at node {u}", str(a_path), lineno)
            lu, lv = local[u], local[v]
            edge_sets[graph_of[u] - 1].add((min(lu, lv), max(lu, lv)))

    corpus = []
    for gid in range(n_graphs):
        graph = Graph(n=len(members[gid]), edges=tuple(sorted(edge_sets[gid])))
        corpus.append((graph, labels[gid]))
    return corpus
