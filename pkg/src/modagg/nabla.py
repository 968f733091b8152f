"""The quantale of nonincreasing functions ``(0, inf) -> [0, inf]``, on step functions.

A :class:`StepFn` with breakpoints ``t_1 < ... < t_m`` and values
``v_1 >= ... >= v_{m+1}`` equals ``v_k`` on ``(t_{k-1}, t_k]`` (with
``t_0 = 0``) and ``v_{m+1}`` on ``(t_m, inf)``.  Pieces are left-open and
right-closed, which is exactly the shape of the sets on which a sum
``f(r) + g(s)`` with ``r + s = t`` is attainable, so the class is closed
under :func:`oplus`.

The quantale order is the pointwise *opposite* order: ``f`` is below ``g`` in
the quantale iff ``f(t) >= g(t)`` for every ``t``.  Functions here that talk
about "pointwise" order use the usual order on ``[0, inf]``.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterable, Sequence

from .extreal import INF, ZERO, ExtReal, coerce, parse_extreal

__all__ = [
    "StepFn",
    "NotNonincreasing",
    "StepFnFormatError",
    "ZERO_FN",
    "constant",
    "canonicalize",
    "from_pieces",
    "oplus",
    "oplus_split",
    "leq_pointwise",
    "first_exceedance",
    "leq_oplus",
    "pointwise_min",
    "pointwise_max",
    "lift",
    "merged_grid",
    "sample_times",
    "parse_time",
]


class NotNonincreasing(ValueError):
    """A candidate step function increases somewhere, so it is not in the quantale.

    ``index`` is the position in the value list that exceeds its predecessor;
    ``times`` (when known) is a pair ``t_before < t_after`` of sample times
    with ``value(t_before) < value(t_after)``.
    """

    def __init__(self, index: int, times: tuple[Fraction, Fraction] | None = None,
                 values: tuple[ExtReal, ExtReal] | None = None):
        self.index = index
        self.times = times
        self.values = values
        msg = f"values increase at piece {index}"
        if times is not None and values is not None:
            msg += f" ({values[0]} at t={times[0]} < {values[1]} at t={times[1]})"
        super().__init__(msg)


class StepFnFormatError(ValueError):
    """Malformed step-function input; the message names the offending field."""


def parse_time(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        t = value
    elif isinstance(value, int) and not isinstance(value, bool):
        t = Fraction(value)
    elif isinstance(value, str):
        x = parse_extreal(value)
        if x.is_inf:
            raise ValueError("time must be finite")
        t = x.fraction
    else:
        raise TypeError(f"cannot read a time from {type(value).__name__}")
    if t <= 0:
        raise ValueError(f"time must be positive, got {t}")
    return t


@dataclass(frozen=True)
class StepFn:
    breakpoints: tuple[Fraction, ...]
    values: tuple[ExtReal, ...]

    def __post_init__(self):
        bps, vals = self.breakpoints, self.values
        if len(vals) != len(bps) + 1:
            raise ValueError("need exactly one more value than breakpoints")
        prev = Fraction(0)
        for t in bps:
            if not isinstance(t, Fraction) or t <= prev:
                raise ValueError("breakpoints must be positive and strictly increasing")
            prev = t
        for k in range(1, len(vals)):
            if vals[k] > vals[k - 1]:
                raise NotNonincreasing(k)
            if vals[k] == vals[k - 1]:
                raise ValueError(f"adjacent pieces {k - 1} and {k} are equal; canonicalize first")

    @classmethod
    def _trusted(cls, bps: tuple, vals: tuple) -> StepFn:
        obj = object.__new__(cls)
        object.__setattr__(obj, "breakpoints", bps)
        object.__setattr__(obj, "values", vals)
        return obj

    def __call__(self, t) -> ExtReal:
        return self.eval(t)

    def eval(self, t) -> ExtReal:
        if not isinstance(t, Fraction):
            t = parse_time(t)
        elif t <= 0:
            raise ValueError(f"time must be positive, got {t}")
        return self.values[bisect_left(self.breakpoints, t)]

    def value_after(self, t: Fraction) -> ExtReal:
        """Right limit at ``t >= 0``: the value on ``(t, t + eps]`` for small eps."""
        return self.values[bisect_right(self.breakpoints, t)]

    @property
    def tail(self) -> ExtReal:
        return self.values[-1]

    def is_constant(self) -> bool:
        return not self.breakpoints

    def is_zero(self) -> bool:
        return not self.breakpoints and self.values[0].is_zero()

    def pieces(self) -> list[tuple[Fraction, Fraction | None, ExtReal]]:
        """``(lo, hi, value)`` triples; ``hi is None`` marks the unbounded tail."""
        edges = (Fraction(0),) + self.breakpoints
        out = []
        for k, v in enumerate(self.values):
            hi = self.breakpoints[k] if k < len(self.breakpoints) else None
            out.append((edges[k], hi, v))
        return out

    def to_json(self) -> dict:
        return {
            "pieces": [
                {"upto": _fmt_time(t), "value": str(v)}
                for t, v in zip(self.breakpoints, self.values)
            ],
            "tail": str(self.values[-1]),
        }

    @classmethod
    def from_json(cls, doc: Any) -> StepFn:
        if not isinstance(doc, dict):
            raise StepFnFormatError("step function document must be an object")
        pieces = doc.get("pieces", [])
        if not isinstance(pieces, list):
            raise StepFnFormatError("'pieces' must be a list")
        if "tail" not in doc:
            raise StepFnFormatError("missing field 'tail'")
        bps, vals = [], []
        for k, piece in enumerate(pieces):
            if not isinstance(piece, dict):
                raise StepFnFormatError(f"pieces[{k}] must be an object")
            for key in ("upto", "value"):
                if key not in piece:
                    raise StepFnFormatError(f"pieces[{k}] is missing '{key}'")
            try:
                bps.append(parse_time(str(piece["upto"])))
            except (ValueError, TypeError) as exc:
                raise StepFnFormatError(f"pieces[{k}].upto: {exc}") from None
            try:
                vals.append(parse_extreal(str(piece["value"])))
            except (ValueError, TypeError) as exc:
                raise StepFnFormatError(f"pieces[{k}].value: {exc}") from None
        try:
            vals.append(parse_extreal(str(doc["tail"])))
        except (ValueError, TypeError) as exc:
            raise StepFnFormatError(f"tail: {exc}") from None
        for k in range(1, len(bps)):
            if bps[k] <= bps[k - 1]:
                raise StepFnFormatError(f"pieces[{k}].upto must exceed pieces[{k - 1}].upto")
        return canonicalize(bps, vals)

    def __str__(self):
        parts = []
        lo = "0"
        for t, v in zip(self.breakpoints, self.values):
            parts.append(f"{v} on ({lo},{_fmt_time(t)}]")
            lo = _fmt_time(t)
        parts.append(f"{self.values[-1]} on ({lo},inf)")
        return ", ".join(parts)


def _fmt_time(t: Fraction) -> str:
    return str(t.numerator) if t.denominator == 1 else f"{t.numerator}/{t.denominator}"


def constant(value) -> StepFn:
    return StepFn._trusted((), (coerce(value),))


ZERO_FN = constant(ZERO)


def canonicalize(breakpoints: Sequence, values: Sequence) -> StepFn:
    """Merge equal neighbours; raise :class:`NotNonincreasing` on an increase."""
    bps = [t if isinstance(t, Fraction) else parse_time(t) for t in breakpoints]
    vals = [coerce(v) for v in values]
    if len(vals) != len(bps) + 1:
        raise ValueError("need exactly one more value than breakpoints")
    prev = Fraction(0)
    for t in bps:
        if t <= prev:
            raise ValueError("breakpoints must be positive and strictly increasing")
        prev = t
    return _canon(bps, vals)


def _canon(bps: Sequence[Fraction], vals: Sequence[ExtReal],
           times: Sequence[Fraction] | None = None) -> StepFn:
    out_b: list[Fraction] = []
    out_v: list[ExtReal] = [vals[0]]
    for k in range(1, len(vals)):
        v = vals[k]
        last = out_v[-1]
        if v > last:
            if times is not None:
                raise NotNonincreasing(k, (times[k - 1], times[k]), (vals[k - 1], v))
            raise NotNonincreasing(k)
        if v == last:
            continue
        out_b.append(bps[k - 1])
        out_v.append(v)
    return StepFn._trusted(tuple(out_b), tuple(out_v))


def from_pieces(pieces: Iterable[tuple], tail) -> StepFn:
    """Build from ``[(upto, value), ...]`` and the tail value."""
    pieces = list(pieces)
    return canonicalize([p[0] for p in pieces], [p[1] for p in pieces] + [tail])


def merged_grid(*fs: StepFn) -> list[Fraction]:
    grid: set[Fraction] = set()
    for f in fs:
        grid.update(f.breakpoints)
    return sorted(grid)


def sample_times(grid: Sequence[Fraction]) -> list[Fraction]:
    """One time per piece of a grid: each breakpoint plus one point in the tail."""
    return list(grid) + [grid[-1] + 1 if grid else Fraction(1)]


def _on_grid(grid: Sequence[Fraction], *fs: StepFn) -> list[list[ExtReal]]:
    times = sample_times(grid)
    return [[f.values[bisect_left(f.breakpoints, t)] for t in times] for f in fs]


def leq_pointwise(f: StepFn, g: StepFn) -> bool:
    """``f(t) <= g(t)`` for all ``t`` (so ``g`` is below ``f`` in the quantale order)."""
    return first_exceedance(f, g) is None


def first_exceedance(f: StepFn, g: StepFn) -> Fraction | None:
    """Smallest sampled time with ``f(t) > g(t)``, or ``None``."""
    grid = merged_grid(f, g)
    fv, gv = _on_grid(grid, f, g)
    for t, a, b in zip(sample_times(grid), fv, gv):
        if a > b:
            return t
    return None


def pointwise_min(f: StepFn, g: StepFn) -> StepFn:
    """Join in the quantale order."""
    grid = merged_grid(f, g)
    fv, gv = _on_grid(grid, f, g)
    return _canon(grid, [a if a <= b else b for a, b in zip(fv, gv)])


def pointwise_max(f: StepFn, g: StepFn) -> StepFn:
    """Meet in the quantale order."""
    grid = merged_grid(f, g)
    fv, gv = _on_grid(grid, f, g)
    return _canon(grid, [a if a >= b else b for a, b in zip(fv, gv)])


def _edges(f: StepFn) -> list[tuple[Fraction, Fraction | None, ExtReal]]:
    return f.pieces()


def oplus(f: StepFn, g: StepFn) -> StepFn:
    """Exact ``(f + g)(t) = inf { f(r) + g(s) : r, s > 0, r + s = t }``.

    The sum of piece ``i`` of ``f`` and piece ``j`` of ``g`` is attainable
    for ``t`` in ``(lo_i + lo_j, hi_i + hi_j]``; the result is the pointwise
    minimum of those candidates.
    """
    if f.is_zero():
        return g
    if g.is_zero():
        return f
    fp, gp = _edges(f), _edges(g)
    cands = []
    ends = set()
    for flo, fhi, fv in fp:
        for glo, ghi, gv in gp:
            lo = flo + glo
            hi = None if fhi is None or ghi is None else fhi + ghi
            cands.append((lo, hi, fv + gv))
            ends.add(lo)
            if hi is not None:
                ends.add(hi)
    grid = sorted(ends)
    # grid[0] == 0; elementary pieces are (grid[k-1], grid[k]] plus the tail
    values = []
    for t in grid[1:]:
        best = INF
        for lo, hi, v in cands:
            if lo < t and (hi is None or t <= hi) and v < best:
                best = v
        values.append(best)
    values.append(f.values[-1] + g.values[-1])
    return _canon(grid[1:], values)


def _split(flo: Fraction, fhi: Fraction | None, glo: Fraction, ghi: Fraction | None,
           total: Fraction) -> tuple[Fraction, Fraction]:
    """Pick ``r`` in ``(flo, fhi]`` and ``s`` in ``(glo, ghi]`` with ``r + s == total``."""
    delta = total - flo - glo
    if fhi is None and ghi is None:
        return flo + delta / 2, glo + delta / 2
    if fhi is None:
        ds = min(delta / 2, ghi - glo)
        return flo + delta - ds, glo + ds
    if ghi is None:
        dr = min(delta / 2, fhi - flo)
        return flo + dr, glo + delta - dr
    wf, wg = fhi - flo, ghi - glo
    dr = delta * wf / (wf + wg)
    return flo + dr, glo + delta - dr


def oplus_split(f: StepFn, g: StepFn, t) -> tuple[Fraction, Fraction]:
    """Times ``r + s == t`` with ``f(r) + g(s) == oplus(f, g)(t)``."""
    t = t if isinstance(t, Fraction) else parse_time(t)
    best = None
    for flo, fhi, fv in _edges(f):
        for glo, ghi, gv in _edges(g):
            lo = flo + glo
            hi = None if fhi is None or ghi is None else fhi + ghi
            if lo < t and (hi is None or t <= hi):
                v = fv + gv
                if best is None or v < best[0]:
                    best = (v, flo, fhi, glo, ghi)
    assert best is not None
    _, flo, fhi, glo, ghi = best
    return _split(flo, fhi, glo, ghi, t)


def leq_oplus(h: StepFn, f: StepFn, g: StepFn) -> tuple[Fraction, Fraction, Fraction] | None:
    """Decide ``h <= oplus(f, g)`` pointwise without building the convolution.

    Returns ``None`` when it holds, else ``(t, r, s)`` with ``r + s == t`` and
    ``h(t) > f(r) + g(s)``.  For each piece pair the supremum of ``h`` over
    the attainable interval ``(lo, hi]`` is its right limit at ``lo``.
    """
    hb = h.breakpoints
    for flo, fhi, fv in _edges(f):
        for glo, ghi, gv in _edges(g):
            lo = flo + glo
            k = bisect_right(hb, lo)
            if h.values[k] > fv + gv:
                hi = None if fhi is None or ghi is None else fhi + ghi
                nxt = hb[k] if k < len(hb) else None
                if hi is None and nxt is None:
                    t = lo + 1
                elif hi is None:
                    t = nxt
                elif nxt is None:
                    t = hi
                else:
                    t = min(hi, nxt)
                r, s = _split(flo, fhi, glo, ghi, t)
                return t, r, s
    return None


def lift(F: Callable[[Sequence[ExtReal]], ExtReal], fs: Sequence[StepFn]) -> StepFn:
    """Pointwise composite ``t -> F(f_1(t), ..., f_n(t))``, canonicalized.

    The composite is constant on every piece of the merged breakpoint grid,
    so one sample per piece decides it.  Raises :class:`NotNonincreasing`
    when the composite increases (``F`` then maps out of the quantale).
    """
    arity = getattr(F, "arity", None)
    if arity is not None and arity != len(fs):
        raise ValueError(f"aggregator has arity {arity} but got {len(fs)} functions")
    grid = merged_grid(*fs)
    times = sample_times(grid)
    cols = _on_grid(grid, *fs)
    vals = [coerce(F(tuple(col[k] for col in cols))) for k in range(len(times))]
    return _canon(grid, vals, times)
