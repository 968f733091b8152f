"""Quasi-pseudometric modular spaces on finite point sets.

A :class:`ModularSpace` stores one step function per ordered pair of distinct
points: ``w(t, x, y) = space.entry(x, y)(t)``.  The diagonal is the zero
function by representation, so the diagonal axiom (zero self-distance at all
times) cannot fail for a stored space.  Aggregation constructions detect an
aggregator that would put something nonzero on the diagonal and refuse to
build the space instead (:class:`AggregationFailure` with ``axiom="M1"``).

Axioms checked by :func:`validate`:

* ``M2``: ``w(t + s, x, y) <= w(t, x, z) + w(s, z, y)``, decided exactly
  for every ordered triple via :func:`modagg.nabla.leq_oplus`;
* ``M3``: ``w(., x, y) = w(., y, x) = 0`` forces ``x == y``;
* ``M4``: ``w(t, x, y) = w(t, y, x)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Hashable, Mapping, Sequence

from . import nabla
from .extreal import ZERO, ExtReal, coerce, parse_extreal
from .nabla import ZERO_FN, NotNonincreasing, StepFn
from .quantale import VCat

__all__ = [
    "LEVELS",
    "ModularSpace",
    "FiniteQpm",
    "Violation",
    "ValidationReport",
    "AggregationFailure",
    "SpaceFormatError",
    "validate",
    "from_gd",
    "example_mods",
    "product",
    "set_aggregate",
    "to_vcat",
    "from_vcat",
    "closure",
    "point_label",
    "DEFAULT_CAP",
    "DEFAULT_MAX_ARITY",
]

LEVELS = {
    "pseudo": ("M2",),
    "quasi_metric": ("M2", "M3"),
    "metric_pseudo": ("M2", "M4"),
    "metric": ("M2", "M3", "M4"),
}

DEFAULT_CAP = 64
DEFAULT_MAX_ARITY = 4


class SpaceFormatError(ValueError):
    pass


def point_label(p: Hashable) -> str:
    if isinstance(p, tuple):
        return "(" + ",".join(point_label(q) for q in p) + ")"
    return str(p)


class ModularSpace:
    """Finite point set with a step function for each ordered pair ``x != y``.

    Missing off-diagonal entries default to the zero function.
    """

    __slots__ = ("points", "_w")

    def __init__(self, points: Sequence[Hashable], w: Mapping | None = None):
        pts = tuple(points)
        if not pts:
            raise ValueError("a modular space needs at least one point")
        if len(set(pts)) != len(pts):
            raise ValueError("duplicate points")
        pset = set(pts)
        entries = {}
        for (x, y), f in (w or {}).items():
            if x not in pset or y not in pset:
                raise ValueError(f"entry ({x!r}, {y!r}) names an unknown point")
            if not isinstance(f, StepFn):
                raise TypeError(f"entry ({x!r}, {y!r}) is not a StepFn")
            if x == y:
                if not f.is_zero():
                    raise ValueError(f"diagonal entry at {x!r} must be the zero function")
                continue
            entries[(x, y)] = f
        for x in pts:
            for y in pts:
                if x != y:
                    entries.setdefault((x, y), ZERO_FN)
        self.points = pts
        self._w = entries

    def entry(self, x, y) -> StepFn:
        if x == y:
            return ZERO_FN
        return self._w[(x, y)]

    def __call__(self, t, x, y) -> ExtReal:
        return self.entry(x, y)(t)

    def items(self):
        return self._w.items()

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        if not isinstance(other, ModularSpace):
            return NotImplemented
        return self.points == other.points and self._w == other._w

    def __repr__(self):
        return f"ModularSpace(points={len(self.points)})"

    def relabel(self, mapping: Callable[[Hashable], Hashable]) -> ModularSpace:
        return ModularSpace(
            [mapping(p) for p in self.points],
            {(mapping(x), mapping(y)): f for (x, y), f in self._w.items()},
        )

    def to_json(self) -> dict:
        labels = [point_label(p) for p in self.points]
        if len(set(labels)) != len(labels):
            raise ValueError("point labels collide when rendered as text")
        for lab in labels:
            if "|" in lab:
                raise ValueError(f"point label {lab!r} contains '|'")
        return {
            "points": labels,
            "w": {
                f"{point_label(x)}|{point_label(y)}": self._w[(x, y)].to_json()
                for x in self.points for y in self.points if x != y
            },
        }

    @classmethod
    def from_json(cls, doc: Any) -> ModularSpace:
        if not isinstance(doc, dict):
            raise SpaceFormatError("space document must be an object")
        pts = doc.get("points")
        if not isinstance(pts, list) or not pts or not all(isinstance(p, str) for p in pts):
            raise SpaceFormatError("'points' must be a nonempty list of strings")
        if len(set(pts)) != len(pts):
            raise SpaceFormatError("'points' has duplicates")
        for p in pts:
            if "|" in p:
                raise SpaceFormatError(f"point {p!r} contains '|'")
        raw = doc.get("w", {})
        if not isinstance(raw, dict):
            raise SpaceFormatError("'w' must be an object")
        w = {}
        for key, sdoc in raw.items():
            parts = key.split("|")
            if len(parts) != 2 or parts[0] not in pts or parts[1] not in pts:
                raise SpaceFormatError(f"w[{key!r}]: key must be 'x|y' with known points")
            try:
                f = StepFn.from_json(sdoc)
            except NotNonincreasing as exc:
                raise SpaceFormatError(f"w[{key!r}]: not nonincreasing: {exc}") from None
            except ValueError as exc:
                raise SpaceFormatError(f"w[{key!r}]: {exc}") from None
            if parts[0] == parts[1] and not f.is_zero():
                raise SpaceFormatError(f"w[{key!r}]: diagonal entries must be zero")
            w[(parts[0], parts[1])] = f
        return cls(pts, w)


@dataclass(frozen=True)
class Violation:
    axiom: str
    points: tuple
    t: Fraction | None = None
    split: tuple[Fraction, Fraction] | None = None
    detail: str = ""

    def to_json(self) -> dict:
        doc: dict = {"axiom": self.axiom, "points": [point_label(p) for p in self.points]}
        if self.t is not None:
            doc["t"] = str(self.t)
        if self.split is not None:
            doc["split"] = [str(self.split[0]), str(self.split[1])]
        if self.detail:
            doc["detail"] = self.detail
        return doc


@dataclass
class ValidationReport:
    level: str
    violations: list[Violation] = field(default_factory=list)
    points: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def axioms(self) -> set[str]:
        return {v.axiom for v in self.violations}

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "points": self.points,
            "ok": self.ok,
            "violations": [v.to_json() for v in self.violations],
        }


def validate(space: ModularSpace, level: str = "pseudo", *, limit: int | None = None) -> ValidationReport:
    """Check the axioms required at ``level`` and list every violation.

    ``limit`` stops after that many violations (``None`` lists all).
    """
    if level not in LEVELS:
        raise ValueError(f"unknown level {level!r}; expected one of {sorted(LEVELS)}")
    axioms = LEVELS[level]
    report = ValidationReport(level, points=len(space.points))
    out = report.violations
    pts = space.points

    def full():
        return limit is not None and len(out) >= limit

    # M2 with z in {x, y} or x == y is implied by the zero diagonal being the unit
    for x in pts:
        for y in pts:
            if x == y:
                continue
            h = space.entry(x, y)
            if h.is_zero():
                continue
            for z in pts:
                if z == x or z == y:
                    continue
                wit = nabla.leq_oplus(h, space.entry(x, z), space.entry(z, y))
                if wit is not None:
                    t, r, s = wit
                    out.append(Violation(
                        "M2", (x, z, y), t, (r, s),
                        f"w({t},x,y)={h(t)} > w({r},x,z)+w({s},z,y)="
                        f"{space.entry(x, z)(r)}+{space.entry(z, y)(s)}",
                    ))
                    if full():
                        return report
    if "M3" in axioms:
        for x, y in itertools.combinations(pts, 2):
            if space.entry(x, y).is_zero() and space.entry(y, x).is_zero():
                out.append(Violation("M3", (x, y), detail="both directions are identically zero"))
                if full():
                    return report
    if "M4" in axioms:
        for x, y in itertools.combinations(pts, 2):
            f, g = space.entry(x, y), space.entry(y, x)
            if f != g:
                t = nabla.first_exceedance(f, g) or nabla.first_exceedance(g, f)
                out.append(Violation("M4", (x, y), t, None, f"w(t,x,y)={f(t)} != w(t,y,x)={g(t)}"))
                if full():
                    return report
    return report


@dataclass(frozen=True)
class FiniteQpm:
    """A finite extended quasi-pseudometric given as a distance table."""

    points: tuple
    d: Mapping[tuple, ExtReal]

    def __post_init__(self):
        pts = tuple(self.points)
        object.__setattr__(self, "points", pts)
        table = {}
        for x in pts:
            for y in pts:
                table[(x, y)] = coerce(self.d.get((x, y), ZERO))
        object.__setattr__(self, "d", table)

    def __call__(self, x, y) -> ExtReal:
        return self.d[(x, y)]

    def problems(self, *, quasi_metric: bool = False) -> list[str]:
        out = []
        for x in self.points:
            if not self.d[(x, x)].is_zero():
                out.append(f"d({x},{x}) = {self.d[(x, x)]} is not zero")
        for x in self.points:
            for y in self.points:
                for z in self.points:
                    if self.d[(x, y)] > self.d[(x, z)] + self.d[(z, y)]:
                        out.append(f"triangle fails at ({x},{z},{y})")
        if quasi_metric:
            for x, y in itertools.combinations(self.points, 2):
                if self.d[(x, y)].is_zero() and self.d[(y, x)].is_zero():
                    out.append(f"d({x},{y}) = d({y},{x}) = 0 for distinct points")
        return out

    def is_quasi_metric(self) -> bool:
        return not self.problems(quasi_metric=True)

    def to_vcat(self) -> VCat:
        return VCat(self.points, dict(self.d))

    @classmethod
    def from_json(cls, doc: Any) -> FiniteQpm:
        if not isinstance(doc, dict) or not isinstance(doc.get("points"), list):
            raise SpaceFormatError("distance document needs a 'points' list")
        pts = doc["points"]
        d = {}
        for key, val in (doc.get("d") or {}).items():
            parts = key.split("|")
            if len(parts) != 2 or parts[0] not in pts or parts[1] not in pts:
                raise SpaceFormatError(f"d[{key!r}]: key must be 'x|y' with known points")
            try:
                d[(parts[0], parts[1])] = parse_extreal(str(val))
            except ValueError as exc:
                raise SpaceFormatError(f"d[{key!r}]: {exc}") from None
        return cls(tuple(pts), d)


def from_gd(g: StepFn, d: FiniteQpm) -> ModularSpace:
    """``w(t, x, y) = g(t) * d(x, y)`` with ``inf * 0 = 0``."""
    probs = d.problems()
    if probs:
        raise ValueError("not a quasi-pseudometric: " + "; ".join(probs))
    w = {}
    for x in d.points:
        for y in d.points:
            if x != y:
                dxy = d(x, y)
                w[(x, y)] = nabla.canonicalize(g.breakpoints, [v * dxy for v in g.values])
    return ModularSpace(d.points, w)


def example_mods(values: Sequence) -> ModularSpace:
    """Points are the given distinct reals; ``w(t, x, y) = x + y`` for ``x != y``."""
    vals = [coerce(v) for v in values]
    if len(set(vals)) != len(vals):
        raise ValueError("values must be distinct")
    if any(v.is_inf for v in vals):
        raise ValueError("values must be finite")
    labels = [str(v) for v in vals]
    w = {
        (lx, ly): nabla.constant(x + y)
        for lx, x in zip(labels, vals) for ly, y in zip(labels, vals) if lx != ly
    }
    return ModularSpace(labels, w)


class AggregationFailure(ValueError):
    """An aggregated family is not a modular space by construction.

    ``axiom`` is ``"M1"`` when the diagonal becomes nonzero and ``"nabla"``
    when an entry stops being nonincreasing.
    """

    def __init__(self, axiom: str, pair: tuple, detail: str,
                 cause: NotNonincreasing | None = None):
        self.axiom = axiom
        self.pair = pair
        self.detail = detail
        self.cause = cause
        super().__init__(f"{axiom} at {tuple(point_label(p) for p in pair)}: {detail}")

    def to_json(self) -> dict:
        doc = {"axiom": self.axiom, "points": [point_label(p) for p in self.pair],
               "detail": self.detail}
        if self.cause is not None and self.cause.times is not None:
            doc["times"] = [str(t) for t in self.cause.times]
        return doc


def _aggregate_entry(F, fs, pair, cache):
    key = tuple(fs)
    hit = cache.get(key)
    if hit is not None:
        return hit
    try:
        out = nabla.lift(F, fs)
    except NotNonincreasing as exc:
        raise AggregationFailure("nabla", pair, f"aggregated entry increases: {exc}", exc) from None
    cache[key] = out
    return out


def _check_diagonal(F, n, point):
    diag = nabla.lift(F, [ZERO_FN] * n)
    if not diag.is_zero():
        raise AggregationFailure("M1", (point,), f"aggregate of zero distances is {diag}")


def _check_arity(F, n):
    arity = getattr(F, "arity", None)
    if arity is not None and arity != n:
        raise ValueError(f"aggregator has arity {arity} but {n} spaces were given")


def product(spaces: Sequence[ModularSpace], F, *, cap: int = DEFAULT_CAP,
            max_arity: int = DEFAULT_MAX_ARITY, check_diagonal: bool = True) -> ModularSpace:
    """Aggregation on products: entry ``(x, y) = F(w_1(., x_1, y_1), ..., w_n(., x_n, y_n))``.

    With ``check_diagonal=False`` a nonzero aggregate on the diagonal is
    ignored and only the off-diagonal entries are built.
    """
    n = len(spaces)
    if n == 0:
        raise ValueError("need at least one space")
    _check_arity(F, n)
    if n > max_arity:
        raise ValueError(f"{n} factors exceeds the arity cap {max_arity}")
    size = math.prod(len(s.points) for s in spaces)
    if size > cap:
        raise ValueError(f"product has {size} points, over the cap {cap}")
    points = tuple(itertools.product(*(s.points for s in spaces)))
    if check_diagonal:
        _check_diagonal(F, n, points[0])
    cache: dict = {}
    w = {}
    for x in points:
        for y in points:
            if x != y:
                fs = [s.entry(a, b) for s, a, b in zip(spaces, x, y)]
                w[(x, y)] = _aggregate_entry(F, fs, (x, y), cache)
    return ModularSpace(points, w)


def set_aggregate(spaces: Sequence[ModularSpace], F, *, check_diagonal: bool = True) -> ModularSpace:
    """Aggregation on sets: entry ``(x, y) = F(w_1(., x, y), ..., w_n(., x, y))``."""
    n = len(spaces)
    if n == 0:
        raise ValueError("need at least one space")
    _check_arity(F, n)
    pts = spaces[0].points
    for s in spaces[1:]:
        if set(s.points) != set(pts):
            raise ValueError("aggregation on sets needs one shared point set")
    if check_diagonal:
        _check_diagonal(F, n, pts[0])
    cache: dict = {}
    w = {}
    for x in pts:
        for y in pts:
            if x != y:
                w[(x, y)] = _aggregate_entry(F, [s.entry(x, y) for s in spaces], (x, y), cache)
    return ModularSpace(pts, w)


def to_vcat(space: ModularSpace) -> VCat:
    """The category over step functions with ``a(x, y)(t) = w(t, x, y)``."""
    return VCat(space.points, {(x, y): space.entry(x, y) for x in space.points for y in space.points})


def from_vcat(c: VCat) -> ModularSpace:
    for x in c.points:
        a = c(x, x)
        if not isinstance(a, StepFn) or not a.is_zero():
            raise ValueError(f"hom({x!r}, {x!r}) must be the zero function, got {a}")
    w = {}
    for (x, y), f in c.hom.items():
        if x != y:
            if not isinstance(f, StepFn):
                raise TypeError(f"hom({x!r}, {y!r}) is not a step function")
            w[(x, y)] = f
    return ModularSpace(c.points, w)


def closure(points: Sequence[Hashable], w: Mapping) -> ModularSpace:
    """Largest modular below the given entries (shortest-path closure under ``oplus``).

    Each entry ends up as the pointwise minimum over all paths of the
    ``oplus`` of the entries along the path.
    """
    pts = tuple(points)
    a = {(x, y): (ZERO_FN if x == y else w.get((x, y), ZERO_FN)) for x in pts for y in pts}
    for z in pts:
        for x in pts:
            if x == z:
                continue
            axz = a[(x, z)]
            for y in pts:
                if y == z or y == x:
                    continue
                via = nabla.oplus(axz, a[(z, y)])
                if not nabla.leq_pointwise(a[(x, y)], via):
                    a[(x, y)] = nabla.pointwise_min(a[(x, y)], via)
    return ModularSpace(pts, {k: v for k, v in a.items() if k[0] != k[1]})
