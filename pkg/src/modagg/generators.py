"""Seeded random step functions, modular spaces and DSL terms.

Everything takes an explicit :class:`random.Random`; nothing reads global
random state or the clock.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

from . import nabla
from .aggregator import Add, Const, ExprAggregator, Max, Min, Mul, Node, Var
from .extreal import INF, ZERO, ExtReal
from .modular import FiniteQpm, ModularSpace, closure
from .nabla import StepFn

__all__ = [
    "stream",
    "random_time",
    "random_value",
    "random_stepfn",
    "random_raw_space",
    "random_space",
    "random_qpm",
    "random_term",
    "random_dsl",
]


def stream(seed: int, name: str) -> random.Random:
    """Independent deterministic generator for a named purpose."""
    return random.Random(f"{seed}:{name}")


def random_time(rng: random.Random, max_time: int = 16, max_den: int = 4) -> Fraction:
    """A positive rational in ``(0, max_time]`` with denominator at most ``max_den``."""
    den = rng.randint(1, max_den)
    return Fraction(rng.randint(1, max_time * den), den)


def random_value(rng: random.Random, *, inf_prob: float = 0.05, zero_prob: float = 0.1,
                 max_num: int = 32, max_den: int = 8) -> ExtReal:
    u = rng.random()
    if u < inf_prob:
        return INF
    if u < inf_prob + zero_prob:
        return ZERO
    return ExtReal(Fraction(rng.randint(0, max_num), rng.randint(1, max_den)))


def random_stepfn(rng: random.Random, max_pieces: int = 5, *, max_time: int = 16,
                  inf_prob: float = 0.05, zero_prob: float = 0.1,
                  positive: bool = False) -> StepFn:
    """A canonical step function with at most ``max_pieces`` pieces.

    ``positive`` makes the value near ``t = 0`` strictly positive.
    """
    m = rng.randint(0, max_pieces - 1)
    bps = sorted({random_time(rng, max_time) for _ in range(m)})
    vals = sorted(
        (random_value(rng, inf_prob=inf_prob, zero_prob=zero_prob) for _ in range(len(bps) + 1)),
        reverse=True,
    )
    if positive and vals[0].is_zero():
        vals[0] = ExtReal(Fraction(rng.randint(1, 16), rng.randint(1, 4)))
    return nabla.canonicalize(bps, vals)


def _labels(n: int) -> list[str]:
    return [f"p{i}" for i in range(n)]


def random_raw_space(rng: random.Random, npoints: int, max_pieces: int = 4,
                     zero_prob: float = 0.2) -> ModularSpace:
    """Arbitrary entries; usually violates the triangle axiom."""
    pts = _labels(npoints)
    w = {}
    for x in pts:
        for y in pts:
            if x != y:
                if rng.random() < zero_prob:
                    w[(x, y)] = nabla.ZERO_FN
                else:
                    w[(x, y)] = random_stepfn(rng, max_pieces)
    return ModularSpace(pts, w)


def random_space(rng: random.Random, npoints: int, *, quasi_metric: bool = False,
                 max_pieces: int = 3, zero_prob: float = 0.2) -> ModularSpace:
    """A valid modular space: random entries followed by the ``oplus`` closure.

    With ``quasi_metric`` every entry is positive near ``t = 0``, which the
    closure preserves, so distinct points are never at distance zero.
    """
    pts = _labels(npoints)
    w = {}
    for x in pts:
        for y in pts:
            if x == y:
                continue
            if not quasi_metric and rng.random() < zero_prob:
                w[(x, y)] = nabla.ZERO_FN
            else:
                w[(x, y)] = random_stepfn(rng, max_pieces, positive=quasi_metric)
    return closure(pts, w)


def random_qpm(rng: random.Random, npoints: int, *, quasi_metric: bool = False) -> FiniteQpm:
    """A finite quasi-pseudometric via shortest-path closure of random weights."""
    pts = _labels(npoints)
    d = {}
    for x in pts:
        for y in pts:
            if x == y:
                d[(x, y)] = ZERO
            else:
                v = random_value(rng, zero_prob=0.0 if quasi_metric else 0.2, inf_prob=0.1)
                if quasi_metric and v.is_zero():
                    v = ExtReal(1)
                d[(x, y)] = v
    for z in pts:
        for x in pts:
            for y in pts:
                via = d[(x, z)] + d[(z, y)]
                if via < d[(x, y)]:
                    d[(x, y)] = via
    return FiniteQpm(tuple(pts), d)


_CONSTS = ("0", "1", "2", "1/2", "3", "inf")


def random_term(rng: random.Random, arity: int, depth: int = 3) -> Node:
    if depth <= 0 or rng.random() < 0.3:
        if rng.random() < 0.8:
            return Var(rng.randint(1, arity))
        return Const(ExtReal(rng.choice(_CONSTS)))
    op = rng.choice(("add", "mul", "max", "min", "add", "max"))
    if op in ("add", "mul"):
        left = random_term(rng, arity, depth - 1)
        right = random_term(rng, arity, depth - 1)
        return Add(left, right) if op == "add" else Mul(left, right)
    args = tuple(random_term(rng, arity, depth - 1) for _ in range(rng.randint(1, 3)))
    return Max(args) if op == "max" else Min(args)


def random_dsl(rng: random.Random, arities: Sequence[int] = (1, 2, 3), depth: int = 3) -> ExprAggregator:
    arity = rng.choice(list(arities))
    return ExprAggregator(random_term(rng, arity, depth), arity)
