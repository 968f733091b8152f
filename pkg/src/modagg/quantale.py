"""Commutative integral quantales and categories enriched over them.

Instances: :data:`TWO` (``{0, 1}`` with logical AND), :data:`LAWVERE`
(``[0, inf]`` with the opposite order and ``+``), :data:`NABLA` (step
functions with the pointwise opposite order and ``oplus``), and finite
:class:`Product` quantales with componentwise structure.

``q.leq(u, v)`` is always the *quantale* order.  On the Lawvere quantale it
reads ``u >= v`` as numbers.  Only binary joins and meets are provided;
every check in this package is finitary.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Hashable, Mapping, Sequence

from . import nabla
from .extreal import INF, ZERO, coerce
from .nabla import StepFn

__all__ = [
    "Quantale",
    "Two",
    "Lawvere",
    "Nabla",
    "Product",
    "TWO",
    "LAWVERE",
    "NABLA",
    "CarrierError",
    "is_asym_triplet",
    "is_triplet",
    "VCat",
    "VCatViolation",
    "vcat_check",
    "vcat_product",
    "vcat_diagonal",
    "vcat_component",
]


class CarrierError(TypeError):
    """An element does not belong to the quantale's carrier."""


class Quantale:
    name = "quantale"

    def tensor(self, u, v):
        raise NotImplementedError

    def leq(self, u, v) -> bool:
        raise NotImplementedError

    def join(self, u, v):
        raise NotImplementedError

    def meet(self, u, v):
        raise NotImplementedError

    @property
    def unit(self):
        raise NotImplementedError

    @property
    def top(self):
        # integral: the unit is the top element
        return self.unit

    def check(self, u) -> Any:
        """Return ``u`` normalized into the carrier or raise :class:`CarrierError`."""
        raise NotImplementedError

    def eq(self, u, v) -> bool:
        return self.leq(u, v) and self.leq(v, u)

    def __repr__(self):
        return self.name


class Two(Quantale):
    """``{0, 1}`` with the usual order; every t-norm restricts to AND here."""

    name = "2"

    def check(self, u):
        if u not in (0, 1) or isinstance(u, float):
            raise CarrierError(f"{u!r} is not in {{0, 1}}")
        return int(u)

    def tensor(self, u, v):
        return min(u, v)

    def leq(self, u, v):
        return u <= v

    def join(self, u, v):
        return max(u, v)

    def meet(self, u, v):
        return min(u, v)

    @property
    def unit(self):
        return 1


class Lawvere(Quantale):
    """``[0, inf]`` ordered by ``>=``, tensor ``+``, unit (and top) ``0``."""

    name = "P+"

    def check(self, u):
        if isinstance(u, StepFn) or isinstance(u, tuple):
            raise CarrierError(f"{u!r} is not in [0, inf]")
        try:
            return coerce(u)
        except (TypeError, ValueError) as exc:
            raise CarrierError(str(exc)) from None

    def tensor(self, u, v):
        return u + v

    def leq(self, u, v):
        return u >= v

    def join(self, u, v):
        return u if u <= v else v

    def meet(self, u, v):
        return u if u >= v else v

    @property
    def unit(self):
        return ZERO

    @property
    def bottom(self):
        return INF


class Nabla(Quantale):
    """Nonincreasing step functions, pointwise opposite order, ``oplus``."""

    name = "nabla"

    def check(self, u):
        if not isinstance(u, StepFn):
            raise CarrierError(f"{u!r} is not a step function")
        return u

    def tensor(self, u, v):
        return nabla.oplus(u, v)

    def leq(self, u, v):
        return nabla.leq_pointwise(v, u)

    def eq(self, u, v):
        return u == v

    def join(self, u, v):
        return nabla.pointwise_min(u, v)

    def meet(self, u, v):
        return nabla.pointwise_max(u, v)

    @property
    def unit(self):
        return nabla.ZERO_FN


@dataclass(frozen=True, repr=False)
class Product(Quantale):
    """Finite product of quantales; elements are tuples, structure componentwise."""

    factors: tuple[Quantale, ...]

    @property
    def name(self):
        return "(" + " x ".join(q.name for q in self.factors) + ")"

    def check(self, u):
        if not isinstance(u, (tuple, list)) or len(u) != len(self.factors):
            raise CarrierError(f"{u!r} is not a {len(self.factors)}-tuple")
        return tuple(q.check(x) for q, x in zip(self.factors, u))

    def tensor(self, u, v):
        return tuple(q.tensor(a, b) for q, a, b in zip(self.factors, u, v))

    def leq(self, u, v):
        return all(q.leq(a, b) for q, a, b in zip(self.factors, u, v))

    def eq(self, u, v):
        return all(q.eq(a, b) for q, a, b in zip(self.factors, u, v))

    def join(self, u, v):
        return tuple(q.join(a, b) for q, a, b in zip(self.factors, u, v))

    def meet(self, u, v):
        return tuple(q.meet(a, b) for q, a, b in zip(self.factors, u, v))

    @property
    def unit(self):
        return tuple(q.unit for q in self.factors)

    @classmethod
    def power(cls, q: Quantale, n: int) -> Product:
        return cls(tuple([q] * n))


TWO = Two()
LAWVERE = Lawvere()
NABLA = Nabla()


def is_asym_triplet(q: Quantale, x, y, z) -> bool:
    """``tensor(y, z)`` is below ``x``; on the Lawvere quantale: ``x <= y + z``."""
    x, y, z = q.check(x), q.check(y), q.check(z)
    return q.leq(q.tensor(y, z), x)


def is_triplet(q: Quantale, x, y, z) -> bool:
    return all(is_asym_triplet(q, *p) for p in itertools.permutations((x, y, z)))


@dataclass
class VCat:
    """A finite set with a hom value ``hom[(x, y)]`` for every ordered pair."""

    points: tuple[Hashable, ...]
    hom: Mapping[tuple[Hashable, Hashable], Any]

    def __post_init__(self):
        self.points = tuple(self.points)
        if not self.points:
            raise ValueError("a V-category needs at least one point")
        if len(set(self.points)) != len(self.points):
            raise ValueError("duplicate points")
        missing = [(x, y) for x in self.points for y in self.points if (x, y) not in self.hom]
        if missing:
            raise ValueError(f"hom is missing pairs, e.g. {missing[0]!r}")

    def __call__(self, x, y):
        return self.hom[(x, y)]


@dataclass(frozen=True)
class VCatViolation:
    axiom: str  # "VC1" | "VC2" | "separated" | "symmetric"
    points: tuple

    def to_json(self) -> dict:
        return {"axiom": self.axiom, "points": [str(p) for p in self.points]}


def vcat_check(q: Quantale, c: VCat, *, separated: bool = False,
               symmetric: bool = False) -> list[VCatViolation]:
    """Every violated instance of the enrichment axioms, with witnessing points.

    VC2 is reported at ``(x, z, y)`` when ``a(x,z) * a(z,y)`` is not below
    ``a(x,y)``.
    """
    out: list[VCatViolation] = []
    pts = c.points
    for x in pts:
        q.check(c(x, x))
        if not q.leq(q.unit, c(x, x)):
            out.append(VCatViolation("VC1", (x,)))
    for x in pts:
        for z in pts:
            axz = c(x, z)
            for y in pts:
                if not q.leq(q.tensor(axz, c(z, y)), c(x, y)):
                    out.append(VCatViolation("VC2", (x, z, y)))
    if separated:
        for x, y in itertools.combinations(pts, 2):
            if q.leq(q.unit, c(x, y)) and q.leq(q.unit, c(y, x)):
                out.append(VCatViolation("separated", (x, y)))
    if symmetric:
        for x, y in itertools.combinations(pts, 2):
            if not q.eq(c(x, y), c(y, x)):
                out.append(VCatViolation("symmetric", (x, y)))
    return out


def vcat_product(cats: Sequence[VCat]) -> VCat:
    """``a_Pi`` on the Cartesian product: ``a_Pi(x, y)_i = a_i(x_i, y_i)``."""
    points = tuple(itertools.product(*(c.points for c in cats)))
    hom = {
        (x, y): tuple(c(xi, yi) for c, xi, yi in zip(cats, x, y))
        for x in points for y in points
    }
    return VCat(points, hom)


def vcat_diagonal(cats: Sequence[VCat]) -> VCat:
    """``a_Delta`` on a shared point set: ``a_Delta(x, y)_i = a_i(x, y)``."""
    pts = cats[0].points
    for c in cats[1:]:
        if set(c.points) != set(pts):
            raise ValueError("diagonal construction needs a shared point set")
    hom = {(x, y): tuple(c(x, y) for c in cats) for x in pts for y in pts}
    return VCat(pts, hom)


def vcat_component(c: VCat, i: int) -> VCat:
    """The ``i``-th coordinate category of a category over a product quantale."""
    return VCat(c.points, {k: v[i] for k, v in c.hom.items()})
