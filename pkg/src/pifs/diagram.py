"""Persistence diagrams and their step-function summaries.

A diagram is a multiset of (birth, death) pairs per homology dimension.
Its indicator summary counts, at each scale, how many pairs are active;
the summary is an integer-valued :class:`~pifs.stepfn.StepFunction`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

from .errors import ParseError, ValidationError
from .stepfn import EMPTY, StepFunction, _write_to, _read_lines

__all__ = [
    "PersistencePair",
    "PersistenceDiagram",
    "Drop",
    "TruncateAt",
    "EssentialPolicy",
    "DROP",
    "apply_policy",
    "to_pif",
    "count_containing",
    "total_persistence",
    "read_diagram",
    "write_diagram",
]


@dataclass(frozen=True, order=True)
class PersistencePair:
    """A (birth, death) pair; death may be ``+inf`` at ingestion."""

    birth: float
    death: float

    def __post_init__(self):
        if not math.isfinite(self.birth):
            raise ValidationError(f"birth must be finite, got {self.birth!r}")
        if math.isnan(self.death):
            raise ValidationError("death must not be NaN")
        if self.birth > self.death:
            raise ValidationError(f"birth {self.birth!r} exceeds death {self.death!r}")

    @property
    def persistence(self) -> float:
        return self.death - self.birth

    @property
    def is_essential(self) -> bool:
        return math.isinf(self.death)


def _as_pair(p) -> PersistencePair:
    if isinstance(p, PersistencePair):
        return p
    b, d = p
    return PersistencePair(float(b), float(d))


@dataclass(frozen=True)
class PersistenceDiagram:
    """Multiset of persistence pairs for one homology dimension.

    Pairs are stored sorted, so structural equality is multiset equality.
    """

    dimension: int
    pairs: tuple[PersistencePair, ...] = ()

    def __post_init__(self):
        if self.dimension < 0:
            raise ValidationError(f"dimension must be >= 0, got {self.dimension}")
        pairs = tuple(sorted(_as_pair(p) for p in self.pairs))
        object.__setattr__(self, "pairs", pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[PersistencePair]:
        return iter(self.pairs)


class Drop:
    """Policy: remove pairs whose death is infinite."""

    def __repr__(self):
        return "Drop()"

    def __eq__(self, other):
        return isinstance(other, Drop)

    def __hash__(self):
        return hash(Drop)


@dataclass(frozen=True)
class TruncateAt:
    """Policy: replace infinite deaths by a finite truncation scale."""

    scale: float

    def __post_init__(self):
        if not math.isfinite(self.scale):
            raise ValidationError(f"truncation scale must be finite, got {self.scale!r}")


EssentialPolicy = Union[Drop, TruncateAt]

DROP = Drop()


def apply_policy(diagram: PersistenceDiagram, policy: EssentialPolicy) -> PersistenceDiagram:
    """Return a finite diagram with essential pairs dropped or truncated."""
    if not any(p.is_essential for p in diagram):
        return diagram
    if isinstance(policy, Drop):
        return PersistenceDiagram(
            diagram.dimension, tuple(p for p in diagram if not p.is_essential)
        )
    if isinstance(policy, TruncateAt):
        max_finite = max(
            (v for p in diagram for v in (p.birth, p.death) if math.isfinite(v)),
            default=policy.scale,
        )
        if policy.scale < max_finite:
            raise ValueError(
                f"truncation scale {policy.scale!r} is below the largest finite "
                f"diagram value {max_finite!r}"
            )
        return PersistenceDiagram(
            diagram.dimension,
            tuple(
                PersistencePair(p.birth, policy.scale) if p.is_essential else p
                for p in diagram
            ),
        )
    raise TypeError(f"unknown essential policy {policy!r}")


def to_pif(diagram: PersistenceDiagram, policy: EssentialPolicy = DROP) -> StepFunction:
    """Indicator summary: at each scale, the number of active pairs.

    Built by an event sweep (+1 at each birth, -1 at each death) over the
    policy-resolved diagram; zero-persistence pairs contribute nothing.  The
    result uses half-open intervals ``[birth, death)``; the closed-interval
    count is available via :func:`count_containing`.
    """
    finite = apply_policy(diagram, policy)
    events: dict[float, int] = {}
    for p in finite:
        if p.birth == p.death:
            continue
        events[p.birth] = events.get(p.birth, 0) + 1
        events[p.death] = events.get(p.death, 0) - 1
    if not events:
        return EMPTY
    xs = sorted(events)
    counts = []
    active = 0
    for x in xs[:-1]:
        active += events[x]
        counts.append(float(active))
    return StepFunction(xs, counts)


def count_containing(diagram: PersistenceDiagram, eps: float) -> int:
    """Number of pairs whose closed interval ``[birth, death]`` contains eps."""
    if not math.isfinite(eps):
        raise ValueError(f"scale must be finite, got {eps!r}")
    return sum(1 for p in diagram if p.birth <= eps <= p.death)


def total_persistence(diagram: PersistenceDiagram) -> float:
    """Sum of (death - birth) over the diagram; requires finite deaths."""
    if any(p.is_essential for p in diagram):
        raise ValueError("diagram has essential pairs; apply a policy first")
    return math.fsum(p.persistence for p in diagram)


_DIM_COMMENT = re.compile(r"#\s*dim\s+(\d+)\s*$")


def read_diagram(source) -> list[PersistenceDiagram]:
    """Parse the ``birth death`` block format into one diagram per block.

    A blank line or a ``# dim k`` comment starts a new dimension block;
    dimensions default to incrementing from 0.  ``inf`` is accepted as a
    death value.
    """
    lines, name = _read_lines(source)
    blocks: list[tuple[int | None, list[PersistencePair]]] = []
    pairs: list[PersistencePair] = []
    explicit_dim: int | None = None
    headed = False

    def flush():
        nonlocal pairs, explicit_dim, headed
        if pairs or headed:
            blocks.append((explicit_dim, pairs))
        pairs = []
        explicit_dim = None
        headed = False

    for lineno, raw in lines:
        text = raw.strip()
        if not text:
            if pairs or headed:
                flush()
            continue
        if text.startswith("#"):
            m = _DIM_COMMENT.match(text)
            if m:
                if pairs:
                    flush()
                explicit_dim = int(m.group(1))
                headed = True
            continue
        tokens = text.split()
        if len(tokens) != 2:
            raise ParseError(f"expected 'birth death', got {text!r}", name, lineno)
        try:
            birth, death = float(tokens[0]), float(tokens[1])
        except ValueError:
            raise ParseError(f"non-numeric entry in {text!r}", name, lineno) from None
        if not math.isfinite(birth):
            raise ValidationError(f"birth must be finite, got {tokens[0]!r}", name, lineno)
        if math.isnan(death):
            raise ValidationError("death must not be NaN", name, lineno)
        if birth > death:
            raise ValidationError(
                f"birth {birth!r} exceeds death {death!r}", name, lineno
            )
        pairs.append(PersistencePair(birth, death))
    flush()

    diagrams = []
    next_dim = 0
    for dim, block_pairs in blocks:
        if dim is None:
            dim = next_dim
        diagrams.append(PersistenceDiagram(dim, tuple(block_pairs)))
        next_dim = dim + 1
    return diagrams


def write_diagram(diagrams: Iterable[PersistenceDiagram] | PersistenceDiagram, dest) -> None:
    """Write diagrams in the block format read back by :func:`read_diagram`."""
    if isinstance(diagrams, PersistenceDiagram):
        diagrams = [diagrams]

    def emit(stream):
        for d in diagrams:
            stream.write(f"# dim {d.dimension}\n")
            for p in d:
                death = "inf" if p.is_essential else f"{p.death:.17g}"
                stream.write(f"{p.birth:.17g} {death}\n")

    _write_to(dest, emit)
