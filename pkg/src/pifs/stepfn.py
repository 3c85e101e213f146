"""Exact arithmetic, integration, and norms for piecewise-constant functions.

A :class:`StepFunction` is a right-continuous function that is constant on
finitely many half-open intervals ``[x_i, x_{i+1})`` and zero outside its
support.  All operations return canonical forms, so structural equality of
two ``StepFunction`` values is equality of the functions they represent.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, TextIO

import numpy as np

from .errors import ParseError

__all__ = [
    "StepFunction",
    "EMPTY",
    "linear_combine",
    "scale",
    "abs_pow",
    "integrate",
    "lp_norm",
    "sup_abs_difference",
    "read_step_function",
    "write_step_function",
]


def _canonicalize(breakpoints, values):
    """Merge adjacent intervals with equal values and trim zero boundaries."""
    if not breakpoints:
        return (), ()
    xs = [breakpoints[0]]
    vs = []
    for i, v in enumerate(values):
        if vs and v == vs[-1]:
            continue
        # close the previous run at the current abscissa
        if vs:
            xs.append(breakpoints[i])
        vs.append(v)
    xs.append(breakpoints[-1])
    # trim zero-valued intervals at either end of the support
    lo, hi = 0, len(vs)
    while lo < hi and vs[lo] == 0.0:
        lo += 1
    while hi > lo and vs[hi - 1] == 0.0:
        hi -= 1
    if lo == hi:
        return (), ()
    return tuple(xs[lo : hi + 1]), tuple(vs[lo:hi])


@dataclass(frozen=True)
class StepFunction:
    """Canonical piecewise-constant function with bounded support.

    Parameters
    ----------
    breakpoints :
        Strictly increasing abscissae ``x_0 < ... < x_m``.
    values :
        One value per interval; the function equals ``values[i]`` on
        ``[x_i, x_{i+1})`` and 0 outside ``[x_0, x_m)``.

    The constructor canonicalizes its input: adjacent intervals with equal
    values are merged and zero-valued intervals at either end of the support
    are trimmed, so the empty function is represented by two empty tuples.
    Instances are immutable and safe to share between threads.
    """

    breakpoints: tuple[float, ...] = ()
    values: tuple[float, ...] = ()

    def __post_init__(self):
        bp = tuple(float(x) for x in self.breakpoints)
        vals = tuple(float(v) for v in self.values)
        if len(bp) != (len(vals) + 1 if vals else 0) and not (not bp and not vals):
            raise ValueError(
                f"expected {len(vals) + 1} breakpoints for {len(vals)} values, got {len(bp)}"
            )
        for x in bp:
            if not math.isfinite(x):
                raise ValueError(f"non-finite breakpoint {x!r}")
        for v in vals:
            if not math.isfinite(v):
                raise ValueError(f"non-finite value {v!r}")
        for a, b in zip(bp, bp[1:]):
            if not a < b:
                raise ValueError(f"breakpoints must be strictly increasing, got {a!r} >= {b!r}")
        bp, vals = _canonicalize(bp, vals)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @classmethod
    def indicator(cls, a: float, b: float, value: float = 1.0) -> "StepFunction":
        """The function equal to ``value`` on ``[a, b)`` and 0 elsewhere."""
        if not a < b:
            raise ValueError(f"indicator needs a < b, got [{a!r}, {b!r})")
        return cls((a, b), (value,))

    @property
    def is_empty(self) -> bool:
        return not self.values

    @property
    def support(self) -> tuple[float, float] | None:
        """Half-open support interval, or ``None`` for the zero function."""
        if self.is_empty:
            return None
        return self.breakpoints[0], self.breakpoints[-1]

    def __call__(self, x: float) -> float:
        """Evaluate at ``x``; right-continuous, 0 outside the support."""
        if not math.isfinite(x):
            raise ValueError(f"cannot evaluate at non-finite abscissa {x!r}")
        i = bisect_right(self.breakpoints, x)
        if i == 0 or i == len(self.breakpoints):
            return 0.0
        return self.values[i - 1]

    def sample_values(self, xs) -> np.ndarray:
        """Vectorized evaluation at an array of abscissae."""
        xs = np.asarray(xs, dtype=float)
        if not self.values:
            return np.zeros(xs.shape)
        bp = np.asarray(self.breakpoints)
        idx = np.searchsorted(bp, xs, side="right")
        inside = (idx > 0) & (idx < len(bp))
        out = np.zeros(xs.shape)
        vals = np.asarray(self.values)
        out[inside] = vals[idx[inside] - 1]
        return out

    def __bool__(self) -> bool:
        return not self.is_empty

    def __repr__(self) -> str:
        if self.is_empty:
            return "StepFunction()"
        return f"StepFunction({list(self.breakpoints)!r}, {list(self.values)!r})"


EMPTY = StepFunction()


def _merged_values(f: StepFunction, g: StepFunction):
    """One pass over the union of breakpoints.

    Yields ``(left, right, fv, gv)`` for each interval of the merged grid,
    where both functions are constant.  Cost is linear in the total number
    of breakpoints.
    """
    fb, gb = f.breakpoints, g.breakpoints
    i = j = 0
    grid = []
    while i < len(fb) or j < len(gb):
        if j >= len(gb) or (i < len(fb) and fb[i] <= gb[j]):
            x = fb[i]
            if j < len(gb) and gb[j] == x:
                j += 1
            i += 1
        else:
            x = gb[j]
            j += 1
        grid.append(x)
    fi = gi = 0
    for a, b in zip(grid, grid[1:]):
        while fi < len(f.values) and fb[fi + 1] <= a:
            fi += 1
        while gi < len(g.values) and gb[gi + 1] <= a:
            gi += 1
        fv = f.values[fi] if fi < len(f.values) and fb[fi] <= a else 0.0
        gv = g.values[gi] if gi < len(g.values) and gb[gi] <= a else 0.0
        yield a, b, fv, gv


def linear_combine(a: float, f: StepFunction, b: float, g: StepFunction) -> StepFunction:
    """Return ``a*f + b*g`` in canonical form via a single breakpoint merge."""
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError(f"coefficients must be finite, got {a!r}, {b!r}")
    breakpoints = []
    values = []
    for left, right, fv, gv in _merged_values(f, g):
        if not breakpoints:
            breakpoints.append(left)
        values.append(a * fv + b * gv)
        breakpoints.append(right)
    if not values:
        return EMPTY
    return StepFunction(breakpoints, values)


def scale(a: float, f: StepFunction) -> StepFunction:
    """Return ``a*f`` in canonical form."""
    return linear_combine(a, f, 0.0, EMPTY)


def abs_pow(f: StepFunction, p: float) -> StepFunction:
    """Return ``|f|**p`` intervalwise; requires ``p >= 1``."""
    if not p >= 1:
        raise ValueError(f"exponent must be >= 1, got {p!r}")
    if f.is_empty:
        return EMPTY
    return StepFunction(f.breakpoints, tuple(abs(v) ** p for v in f.values))


def integrate(f: StepFunction) -> float:
    """Exact integral: sum of value times interval width."""
    return math.fsum(
        v * (b - a) for v, a, b in zip(f.values, f.breakpoints, f.breakpoints[1:])
    )


def lp_norm(f: StepFunction, p: float) -> float:
    """The L^p norm ``(∫|f|^p)^(1/p)``; finite for every step function."""
    if not p >= 1:
        raise ValueError(f"norm order must be >= 1, got {p!r}")
    total = math.fsum(
        abs(v) ** p * (b - a)
        for v, a, b in zip(f.values, f.breakpoints, f.breakpoints[1:])
    )
    return total ** (1.0 / p)


def sup_abs_difference(f: StepFunction, g: StepFunction) -> float:
    """Exact supremum of ``|f - g|`` over the whole real line.

    Step functions attain their supremum on an interval, so the result is a
    maximum over the merged interval decomposition (0 outside both supports).
    """
    best = 0.0
    for _a, _b, fv, gv in _merged_values(f, g):
        d = abs(fv - gv)
        if d > best:
            best = d
    return best


def read_step_function(source) -> StepFunction:
    """Read the ``x value`` line format (value holds on ``[x_i, x_{i+1})``).

    The final line's value is ignored; lines starting with ``#`` are comments.
    """
    lines, name = _read_lines(source)
    pairs = []
    for lineno, raw in lines:
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        tokens = text.split()
        if len(tokens) != 2:
            raise ParseError(f"expected 'x value', got {text!r}", name, lineno)
        try:
            x, v = float(tokens[0]), float(tokens[1])
        except ValueError:
            raise ParseError(f"non-numeric entry in {text!r}", name, lineno) from None
        if not math.isfinite(x):
            raise ParseError(f"non-finite abscissa {tokens[0]!r}", name, lineno)
        if pairs and not pairs[-1][0] < x:
            raise ParseError(
                f"abscissae must be ascending ({pairs[-1][0]!r} then {x!r})", name, lineno
            )
        pairs.append((x, v))
    if len(pairs) < 2:
        return EMPTY
    return StepFunction([x for x, _ in pairs], [v for _, v in pairs[:-1]])


def write_step_function(f: StepFunction, dest) -> None:
    """Write the ``x value`` format; the closing line carries value 0."""

    def emit(stream):
        if f.is_empty:
            stream.write("# empty step function\n")
            return
        for x, v in zip(f.breakpoints, f.values):
            stream.write(f"{x:.17g} {v:.17g}\n")
        stream.write(f"{f.breakpoints[-1]:.17g} 0\n")

    _write_to(dest, emit)


def _read_lines(source):
    """Return (numbered lines, display name) from a path, stream, or string."""
    if isinstance(source, (str, Path)):
        path = Path(source)
        with open(path, "r", encoding="utf-8") as fh:
            return list(enumerate(fh.readlines(), start=1)), str(path)
    name = getattr(source, "name", "<stream>")
    return list(enumerate(source.readlines(), start=1)), name


def _write_to(dest, emit: Callable[[TextIO], None]) -> None:
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8") as fh:
            emit(fh)
    else:
        emit(dest)
