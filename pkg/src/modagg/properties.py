"""Property checks for aggregation functions, with replayable witnesses.

A sampled check can only refute: a :class:`Verdict` with status
``"consistent"`` means no counterexample among the samples, never a proof.
Status ``"exact"`` is reserved for facts that hold in closed form (registry
builtins, and the single evaluation at the origin).

Characterizations used by :func:`classify`:

* QPModAP (equivalently QPModAS, PModAP, PModAS): ``F(0) = 0``, isotone,
  subadditive;
* QModAP (equivalently ModAP): the above plus ``F(a) = 0`` only at ``a = 0``;
* QModAS (equivalently ModAS, finite arity): the above plus ``F(a) = 0``
  only when some coordinate of ``a`` is 0.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator

from .aggregator import Aggregator
from .extreal import INF, ONE, ZERO, ExtReal

__all__ = [
    "Witness",
    "Verdict",
    "Sampler",
    "InapplicableTransfer",
    "CHECKS",
    "check_zero",
    "check_isotone",
    "check_subadditive",
    "check_asym_triplets",
    "check_sym_triplets",
    "check_kernel_exact",
    "check_kernel_some",
    "transfer_witness",
    "shrink",
    "FlagResult",
    "Classification",
    "classify",
    "FAMILIES",
]

Vec = tuple[ExtReal, ...]

PERMUTATIONS = tuple(itertools.permutations(range(3)))


def _vadd(x: Vec, y: Vec) -> Vec:
    return tuple(a + b for a, b in zip(x, y))


def _vle(x: Vec, y: Vec) -> bool:
    return all(a <= b for a, b in zip(x, y))


def _zeros(n: int) -> Vec:
    return (ZERO,) * n


def _is_triangle(a: Vec, b: Vec, c: Vec) -> bool:
    return _vle(a, _vadd(b, c)) and _vle(b, _vadd(a, c)) and _vle(c, _vadd(a, b))


def _vec_str(x: Vec) -> str:
    return "(" + ", ".join(map(str, x)) + ")"


class InapplicableTransfer(ValueError):
    pass


@dataclass(frozen=True)
class Witness:
    """A concrete counterexample; :meth:`replay` re-checks it exactly.

    ``kind`` and ``args``:

    * ``not_zero_at_zero``: ``()``;
    * ``isotone``: ``(x, y)`` with ``x <= y`` and ``F(x) > F(y)``;
    * ``subadditive``: ``(x, y)`` with ``F(x + y) > F(x) + F(y)``;
    * ``asym_triplet``: ``(a, b, c)`` with ``a <= b + c`` and ``F(a) > F(b) + F(c)``;
    * ``sym_triplet``: triangle triplet ``(a, b, c)``; ``perm`` picks the
      ordering ``(u, v, w)`` with ``F(u) > F(v) + F(w)``;
    * ``kernel_exact``: ``(a,)`` with ``a != 0`` and ``F(a) = 0``;
    * ``kernel_some``: ``(a,)`` with every ``a_i > 0`` and ``F(a) = 0``.
    """

    kind: str
    args: tuple[Vec, ...] = ()
    perm: int | None = None

    def replay(self, F: Aggregator) -> bool:
        k, args = self.kind, self.args
        if k == "not_zero_at_zero":
            return F(_zeros(F.arity)) != ZERO
        if k == "isotone":
            x, y = args
            return _vle(x, y) and F(x) > F(y)
        if k == "subadditive":
            x, y = args
            return F(_vadd(x, y)) > F(x) + F(y)
        if k == "asym_triplet":
            a, b, c = args
            return _vle(a, _vadd(b, c)) and F(a) > F(b) + F(c)
        if k == "sym_triplet":
            a, b, c = args
            if not _is_triangle(a, b, c) or self.perm is None:
                return False
            u, v, w = (args[i] for i in PERMUTATIONS[self.perm])
            return F(u) > F(v) + F(w)
        if k == "kernel_exact":
            (a,) = args
            return any(not x.is_zero() for x in a) and F(a) == ZERO
        if k == "kernel_some":
            (a,) = args
            return all(not x.is_zero() for x in a) and F(a) == ZERO
        raise ValueError(f"unknown witness kind {k!r}")

    def ordered(self) -> tuple[Vec, ...]:
        if self.kind == "sym_triplet":
            return tuple(self.args[i] for i in PERMUTATIONS[self.perm])
        return self.args

    def describe(self, F: Aggregator) -> str:
        k, a = self.kind, self.args
        if k == "not_zero_at_zero":
            return f"F(0) = {F(_zeros(F.arity))} != 0"
        if k == "isotone":
            return f"{_vec_str(a[0])} <= {_vec_str(a[1])} but F = {F(a[0])} > {F(a[1])}"
        if k == "subadditive":
            s = _vadd(*a)
            return (f"F({_vec_str(s)}) = {F(s)} > F({_vec_str(a[0])}) + F({_vec_str(a[1])})"
                    f" = {F(a[0])} + {F(a[1])}")
        if k in ("asym_triplet", "sym_triplet"):
            u, v, w = self.ordered()
            return (f"F({_vec_str(u)}) = {F(u)} > F({_vec_str(v)}) + F({_vec_str(w)})"
                    f" = {F(v)} + {F(w)}")
        return f"F({_vec_str(a[0])}) = 0"

    def to_json(self) -> dict:
        doc: dict = {"kind": self.kind, "args": [[str(v) for v in vec] for vec in self.args]}
        if self.perm is not None:
            doc["perm"] = list(PERMUTATIONS[self.perm])
        return doc


@dataclass(frozen=True)
class Verdict:
    check: str
    status: str  # "exact" | "consistent" | "refuted"
    witness: Witness | None = None
    samples: int = 0
    seed: int | None = None
    proof: str | None = None

    @property
    def refuted(self) -> bool:
        return self.status == "refuted"

    def to_json(self) -> dict:
        doc: dict = {"check": self.check, "status": self.status}
        if self.proof is not None:
            doc["proof"] = self.proof
        if self.status != "exact":
            doc["samples"] = self.samples
            doc["seed"] = self.seed
        if self.witness is not None:
            doc["witness"] = self.witness.to_json()
        return doc


# -- sampling ----------------------------------------------------------------

_CORNER = (ZERO, ONE, INF)
_OUTLIERS = (ExtReal(2 ** 20), ExtReal(2 ** 20 + 1))


@dataclass(frozen=True)
class Sampler:
    """Deterministic sample streams for the property checks.

    Each stream starts with corner cases over ``{0, 1, inf}`` (at most half
    the budget) and continues with seeded draws from a pool of small
    rationals (numerators and denominators up to 32), ``0``, ``1``, ``inf``
    and the outliers ``2**20`` and ``2**20 + 1``.  Streams are named, so a
    check's samples do not depend on which other checks ran.
    """

    seed: int = 0
    count: int = 512

    def rng(self, name: str) -> random.Random:
        return random.Random(f"{self.seed}:{name}")

    def value(self, rng: random.Random) -> ExtReal:
        u = rng.random()
        if u < 0.1:
            return ZERO
        if u < 0.2:
            return ONE
        if u < 0.27:
            return INF
        if u < 0.32:
            return rng.choice(_OUTLIERS)
        return ExtReal(Fraction(rng.randint(0, 32), rng.randint(1, 32)))

    def positive_value(self, rng: random.Random) -> ExtReal:
        v = self.value(rng)
        while v.is_zero():
            v = self.value(rng)
        return v

    def vector(self, rng: random.Random, n: int) -> Vec:
        return tuple(self.value(rng) for _ in range(n))

    def _stream(self, name: str, corners: Iterator, draw: Callable[[random.Random], object]):
        limit = max(1, self.count // 2)
        used = 0
        for item in corners:
            if used >= limit:
                break
            used += 1
            yield item
        rng = self.rng(name)
        for _ in range(self.count - used):
            yield draw(rng)

    def _corner_vectors(self, n: int) -> Iterator[Vec]:
        return itertools.product(_CORNER, repeat=n)

    def le_pairs(self, n: int) -> Iterator[tuple[Vec, Vec]]:
        corners = ((x, y) for x in self._corner_vectors(n) for y in self._corner_vectors(n)
                   if _vle(x, y) and x != y)

        def draw(rng):
            x = self.vector(rng, n)
            y = tuple(a if rng.random() < 0.3 else a + self.value(rng) for a in x)
            return x, y

        return self._stream("isotone", corners, draw)

    def sum_pairs(self, n: int) -> Iterator[tuple[Vec, Vec]]:
        corners = ((x, y) for x in self._corner_vectors(n) for y in self._corner_vectors(n))
        return self._stream("subadditive", corners, lambda rng: (self.vector(rng, n), self.vector(rng, n)))

    def asym_triplets(self, n: int) -> Iterator[tuple[Vec, Vec, Vec]]:
        corners = ((_vadd(b, c), b, c) for b in self._corner_vectors(n) for c in self._corner_vectors(n))

        def coord(rng, b, c):
            s = b + c
            u = rng.random()
            if u < 0.35:
                return s
            if u < 0.45:
                return ZERO
            if s.is_inf:
                return self.value(rng)
            num = rng.randint(0, 16)
            return s * ExtReal(Fraction(num, 16))

        def draw(rng):
            b, c = self.vector(rng, n), self.vector(rng, n)
            return tuple(coord(rng, bi, ci) for bi, ci in zip(b, c)), b, c

        return self._stream("asym_triplets", corners, draw)

    def sym_triplets(self, n: int) -> Iterator[tuple[Vec, Vec, Vec]]:
        corners = ((_vadd(b, c), b, c) for b in self._corner_vectors(n) for c in self._corner_vectors(n))

        def coord(rng, b, c):
            if b.is_inf and c.is_inf:
                return self.value(rng)
            if b.is_inf or c.is_inf:
                return INF
            lo, hi = abs(b.fraction - c.fraction), b.fraction + c.fraction
            u = rng.random()
            lam = Fraction(0) if u < 0.3 else Fraction(1) if u < 0.6 else Fraction(rng.randint(0, 16), 16)
            return ExtReal(lo + lam * (hi - lo))

        def draw(rng):
            b, c = self.vector(rng, n), self.vector(rng, n)
            a = tuple(coord(rng, bi, ci) for bi, ci in zip(b, c))
            trip = [a, b, c]
            rng.shuffle(trip)
            return tuple(trip)

        return self._stream("sym_triplets", corners, draw)

    def nonzero_vectors(self, n: int) -> Iterator[Vec]:
        def corners():
            yield (ONE,) * n
            for v in (ONE, INF):
                for i in range(n):
                    yield tuple(v if j == i else ZERO for j in range(n))
            for x in self._corner_vectors(n):
                if any(not a.is_zero() for a in x):
                    yield x

        def draw(rng):
            if rng.random() < 0.3:
                i = rng.randrange(n)
                return tuple(self.positive_value(rng) if j == i else ZERO for j in range(n))
            x = self.vector(rng, n)
            while all(a.is_zero() for a in x):
                x = self.vector(rng, n)
            return x

        return self._stream("kernel_exact", corners(), draw)

    def positive_vectors(self, n: int) -> Iterator[Vec]:
        corners = itertools.product((ONE, INF), repeat=n)
        return self._stream("kernel_some", corners,
                            lambda rng: tuple(self.positive_value(rng) for _ in range(n)))


# -- shrinking ---------------------------------------------------------------


def _size(v: ExtReal) -> tuple:
    if v.is_inf:
        return (1, 0, 0)
    q = v.fraction
    return (0, q.denominator, q.numerator)


def _simpler(v: ExtReal) -> list[ExtReal]:
    out = []
    for c in (ZERO, ONE):
        if _size(c) < _size(v):
            out.append(c)
    if not v.is_inf:
        half = ExtReal(v.fraction / 2)
        if _size(half) < _size(v):
            out.append(half)
    return out


def shrink(w: Witness, F: Aggregator, max_steps: int = 200) -> Witness:
    """Greedy coordinatewise simplification (toward 0, 1, or half) while ``w`` replays."""
    steps = 0
    changed = True
    while changed and steps < max_steps:
        changed = False
        for ti, vec in enumerate(w.args):
            for ci, v in enumerate(vec):
                for cand in _simpler(v):
                    steps += 1
                    nv = vec[:ci] + (cand,) + vec[ci + 1:]
                    trial = Witness(w.kind, w.args[:ti] + (nv,) + w.args[ti + 1:], w.perm)
                    if trial.replay(F):
                        w = trial
                        changed = True
                        break
                if changed:
                    break
            if changed:
                break
    return w


# -- checks ------------------------------------------------------------------


def _exact(F: Aggregator, name: str) -> Verdict | None:
    proof = F.exact_facts().get(name)
    if proof is not None:
        return Verdict(name, "exact", proof=proof)
    return None


def _search(F: Aggregator, name: str, sampler: Sampler, items, make: Callable) -> Verdict:
    count = 0
    for item in items:
        count += 1
        w = make(item)
        if w is not None and w.replay(F):
            if not w.kind.startswith("kernel"):
                # kernel streams already start from the simplest vectors
                w = shrink(w, F)
            return Verdict(name, "refuted", w, count, sampler.seed)
    return Verdict(name, "consistent", None, count, sampler.seed)


def check_zero(F: Aggregator, sampler: Sampler | None = None) -> Verdict:
    v = F(_zeros(F.arity))
    if v == ZERO:
        return Verdict("zero", "exact", proof=F.exact_facts().get("zero", "evaluated: F(0,...,0) = 0"))
    return Verdict("zero", "refuted", Witness("not_zero_at_zero"))


def check_isotone(F: Aggregator, sampler: Sampler) -> Verdict:
    return _exact(F, "isotone") or _search(
        F, "isotone", sampler, sampler.le_pairs(F.arity),
        lambda p: Witness("isotone", p))


def check_subadditive(F: Aggregator, sampler: Sampler) -> Verdict:
    return _exact(F, "subadditive") or _search(
        F, "subadditive", sampler, sampler.sum_pairs(F.arity),
        lambda p: Witness("subadditive", p))


def check_asym_triplets(F: Aggregator, sampler: Sampler) -> Verdict:
    return _search(F, "asym_triplets", sampler, sampler.asym_triplets(F.arity),
                   lambda t: Witness("asym_triplet", t))


def _sym_witness(F: Aggregator, t) -> Witness | None:
    vals = [F(v) for v in t]
    for k, (i, j, l) in enumerate(PERMUTATIONS):
        if vals[i] > vals[j] + vals[l]:
            return Witness("sym_triplet", tuple(t), k)
    return None


def check_sym_triplets(F: Aggregator, sampler: Sampler) -> Verdict:
    return _search(F, "sym_triplets", sampler, sampler.sym_triplets(F.arity),
                   lambda t: _sym_witness(F, t))


def check_kernel_exact(F: Aggregator, sampler: Sampler) -> Verdict:
    return _exact(F, "kernel_exact") or _search(
        F, "kernel_exact", sampler, sampler.nonzero_vectors(F.arity),
        lambda a: Witness("kernel_exact", (a,)))


def check_kernel_some(F: Aggregator, sampler: Sampler) -> Verdict:
    return _exact(F, "kernel_some") or _search(
        F, "kernel_some", sampler, sampler.positive_vectors(F.arity),
        lambda a: Witness("kernel_some", (a,)))


CHECKS = {
    "zero": check_zero,
    "isotone": check_isotone,
    "subadditive": check_subadditive,
    "asym_triplets": check_asym_triplets,
    "sym_triplets": check_sym_triplets,
    "kernel_exact": check_kernel_exact,
    "kernel_some": check_kernel_some,
}


# -- witness transfer --------------------------------------------------------


def transfer_witness(w: Witness, F: Aggregator) -> list[Witness]:
    """Turn one refutation into refutations of the equivalent conditions.

    * subadditive ``(x, y)`` gives the triplet ``(x + y, x, y)``, both as an
      asymmetric triplet and as a triangle triplet;
    * isotone ``(x, y)`` gives the asymmetric triplet ``(x, y, 0)`` provided
      ``F(0) = 0``;
    * an asymmetric triplet ``(a, b, c)`` gives an isotone failure
      ``(a, b + c)`` when ``F(a) > F(b + c)`` and otherwise a subadditive
      failure ``(b, c)``;
    * a triangle triplet gives its failing ordering as an asymmetric triplet;
    * a ``kernel_some`` witness is also a ``kernel_exact`` witness.

    Every returned witness replays.
    """
    if not w.replay(F):
        raise ValueError(f"{w.kind} witness does not replay against {F.spec}")
    n = F.arity
    out: list[Witness] = []
    if w.kind == "subadditive":
        x, y = w.args
        s = _vadd(x, y)
        out = [Witness("asym_triplet", (s, x, y)), Witness("sym_triplet", (s, x, y), 0)]
    elif w.kind == "isotone":
        if F(_zeros(n)) != ZERO:
            raise InapplicableTransfer("isotone to triplet needs F(0) = 0")
        x, y = w.args
        out = [Witness("asym_triplet", (x, y, _zeros(n)))]
    elif w.kind == "asym_triplet":
        a, b, c = w.args
        s = _vadd(b, c)
        if F(a) > F(s):
            out = [Witness("isotone", (a, s))]
        else:
            out = [Witness("subadditive", (b, c)), Witness("sym_triplet", (s, b, c), 0)]
    elif w.kind == "sym_triplet":
        asym = Witness("asym_triplet", w.ordered())
        out = [asym] + transfer_witness(asym, F)
    elif w.kind == "kernel_some":
        out = [Witness("kernel_exact", w.args)]
    for t in out:
        if not t.replay(F):
            raise AssertionError(f"transferred {t.kind} witness does not replay")
    return out


# -- classification ----------------------------------------------------------

FAMILIES = {
    "QPModAP": {
        "checks": ("zero", "isotone", "subadditive"),
        "same_as": ("QPModAS", "PModAP", "PModAS"),
    },
    "QModAP": {
        "checks": ("zero", "isotone", "subadditive", "kernel_exact"),
        "same_as": ("ModAP",),
    },
    "QModAS": {
        "checks": ("zero", "isotone", "subadditive", "kernel_some"),
        "same_as": ("ModAS",),
    },
}


@dataclass
class FlagResult:
    family: str
    status: str  # "member" | "consistent" | "refuted"
    evidence: Verdict | None = None

    @property
    def refuted(self) -> bool:
        return self.status == "refuted"

    def to_json(self) -> dict:
        doc = {"family": self.family, "same_as": list(FAMILIES[self.family]["same_as"]),
               "status": self.status}
        if self.evidence is not None:
            doc["evidence"] = self.evidence.check
        return doc


@dataclass
class Classification:
    aggregator: str
    arity: int
    checks: dict[str, Verdict]
    flags: dict[str, FlagResult]
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "aggregator": self.aggregator,
            "arity": self.arity,
            "checks": {k: v.to_json() for k, v in self.checks.items()},
            "families": {k: f.to_json() for k, f in self.flags.items()},
            "notes": list(self.notes),
        }


def _flag(family: str, checks: dict[str, Verdict]) -> FlagResult:
    verdicts = [checks[c] for c in FAMILIES[family]["checks"]]
    for v in verdicts:
        if v.refuted:
            return FlagResult(family, "refuted", v)
    for v in verdicts:
        if v.status == "consistent":
            return FlagResult(family, "consistent", v)
    return FlagResult(family, "member", None)


def classify(F: Aggregator, sampler: Sampler | None = None) -> Classification:
    sampler = sampler or Sampler()
    checks = {name: fn(F, sampler) for name, fn in CHECKS.items()}
    flags = {fam: _flag(fam, checks) for fam in FAMILIES}
    return Classification(F.spec, F.arity, checks, flags, F.notes())
