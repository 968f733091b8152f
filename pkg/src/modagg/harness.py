"""Cross-validation of the characterization results on concrete aggregators.

Three legs, each run on the same seeded samples:

* characterization: the conditions "isotone and subadditive", "preserves
  asymmetric triangle triplets" and "preserves triangle triplets" (each
  together with ``F(0) = 0``) are checked independently, then every
  refutation is pushed through :func:`~modagg.properties.transfer_witness`
  until closed; afterwards all three must agree;
* lax morphism: refutations of ``F`` as a lax morphism on ``[0, inf]`` and of
  the pointwise lift ``F_nabla`` on step-function tuples must co-occur, with
  witnesses transferred in both directions;
* semantic: a refuted candidate must produce a concrete family of modular
  spaces whose aggregate exactly violates an axiom, and a candidate with no
  refutation must aggregate a battery of random spaces without violations.

A disagreement in any leg is reported as an inconsistency; by the theory it
can only come from a bug.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import __version__, nabla
from .aggregator import Aggregator, builtin, parse
from .extreal import INF, ONE, ZERO, ExtReal
from .generators import random_dsl, random_space, random_stepfn, stream
from .modular import (
    AggregationFailure,
    FiniteQpm,
    ModularSpace,
    from_gd,
    product,
    set_aggregate,
    validate,
)
from .nabla import NotNonincreasing, StepFn
from .properties import (
    Classification,
    InapplicableTransfer,
    Sampler,
    Witness,
    classify,
    transfer_witness,
)

__all__ = [
    "SemanticWitness",
    "witness_space",
    "NablaWitness",
    "nabla_lax_search",
    "nabla_up",
    "nabla_down",
    "CONDITIONS",
    "HarnessConfig",
    "harness",
    "default_battery",
    "verify",
]

# condition name -> witness kinds that refute it
CONDITIONS = {
    "isotone_subadditive": ("not_zero_at_zero", "isotone", "subadditive"),
    "asym_triplets": ("not_zero_at_zero", "asym_triplet"),
    "sym_triplets": ("not_zero_at_zero", "sym_triplet"),
}

_CHECKS_FOR = {
    "isotone_subadditive": ("zero", "isotone", "subadditive"),
    "asym_triplets": ("zero", "asym_triplets"),
    "sym_triplets": ("zero", "sym_triplets"),
}


def _vadd(x, y):
    return tuple(a + b for a, b in zip(x, y))


# -- semantic witnesses ------------------------------------------------------


@dataclass
class SemanticWitness:
    """A family of spaces whose aggregate violates an axiom.

    ``violation`` is ``None`` only if the construction failed to produce
    one, which the harness reports as an inconsistency.
    """

    source: str
    construction: str  # "set" | "product"
    spaces: list[ModularSpace]
    level: str
    axiom: str | None
    violation: dict | None

    def to_json(self) -> dict:
        return {
            "source": self.source,
            "construction": self.construction,
            "level": self.level,
            "spaces": [s.to_json() for s in self.spaces],
            "axiom": self.axiom,
            "violation": self.violation,
        }


def _two_point(f: StepFn, g: StepFn | None = None) -> ModularSpace:
    return ModularSpace(("x1", "x2"), {("x1", "x2"): f, ("x2", "x1"): f if g is None else g})


def _triangle(a: ExtReal, b: ExtReal, c: ExtReal) -> ModularSpace:
    # d(p,r) = a <= b + c = d(p,q) + d(q,r); every reverse direction is inf
    d = {("p", "q"): b, ("q", "r"): c, ("p", "r"): a,
         ("q", "p"): INF, ("r", "q"): INF, ("r", "p"): INF}
    for x in "pqr":
        d[(x, x)] = ZERO
    return from_gd(nabla.constant(ONE), FiniteQpm(("p", "q", "r"), d))


def _run(source, construction, spaces, F, level) -> SemanticWitness:
    build = set_aggregate if construction == "set" else product
    # a nonzero diagonal would mask the off-diagonal failure the witness is about
    check_diagonal = source == "not_zero_at_zero"
    try:
        agg = build(spaces, F, check_diagonal=check_diagonal)
    except AggregationFailure as exc:
        return SemanticWitness(source, construction, spaces, level, exc.axiom, exc.to_json())
    report = validate(agg, level, limit=1)
    if report.ok:
        return SemanticWitness(source, construction, spaces, level, None, None)
    v = report.violations[0]
    return SemanticWitness(source, construction, spaces, level, v.axiom, v.to_json())


def witness_space(w: Witness, F: Aggregator) -> SemanticWitness:
    """Build spaces on which aggregating with ``F`` exactly violates an axiom.

    * ``not_zero_at_zero``: discrete two-point spaces; the aggregate puts a
      nonzero value on the diagonal (``M1``);
    * ``isotone`` ``(x, y)``: two-point spaces with ``f_i = y_i`` on
      ``(0, 1]`` and ``x_i`` afterwards; the aggregate increases at ``t = 1``;
    * ``subadditive``, ``asym_triplet``, ``sym_triplet``: three points
      ``p, q, r`` with constant distances ``d(p,r) = a``, ``d(p,q) = b``,
      ``d(q,r) = c``; the aggregate breaks ``M2`` at ``(p, q, r)``;
    * ``kernel_exact`` ``a``: a product of two-point spaces at constant
      distance ``a_i`` (one point where ``a_i = 0``); ``M3`` fails;
    * ``kernel_some`` ``a``: two-point spaces at constant distance ``a_i``
      aggregated on sets; ``M3`` fails.

    Except for ``not_zero_at_zero``, the aggregate is built without the
    diagonal check, so an ``F`` with ``F(0) != 0`` still shows the
    off-diagonal failure its witness is about.
    """
    if not w.replay(F):
        raise ValueError(f"{w.kind} witness does not replay against {F.spec}")
    n = F.arity
    k = w.kind
    if k == "not_zero_at_zero":
        spaces = [_two_point(nabla.ZERO_FN)] * n
        return _run(k, "set", spaces, F, "pseudo")
    if k == "isotone":
        x, y = w.args
        spaces = [_two_point(nabla.canonicalize([ONE.fraction], [yi, xi])) for xi, yi in zip(x, y)]
        return _run(k, "set", spaces, F, "pseudo")
    if k in ("subadditive", "asym_triplet", "sym_triplet"):
        if k == "subadditive":
            b, c = w.args
            a = _vadd(b, c)
        else:
            a, b, c = w.ordered()
        spaces = [_triangle(ai, bi, ci) for ai, bi, ci in zip(a, b, c)]
        return _run(k, "set", spaces, F, "pseudo")
    if k == "kernel_exact":
        (a,) = w.args
        spaces = [
            ModularSpace(("0",)) if ai.is_zero() else
            ModularSpace(("0", "1"), {("0", "1"): nabla.constant(ai), ("1", "0"): nabla.constant(ai)})
            for ai in a
        ]
        return _run(k, "product", spaces, F, "quasi_metric")
    if k == "kernel_some":
        (a,) = w.args
        spaces = [_two_point(nabla.constant(ai)) for ai in a]
        return _run(k, "set", spaces, F, "quasi_metric")
    raise InapplicableTransfer(f"no space construction for {k} witnesses")


# -- lax morphism on step functions ------------------------------------------


@dataclass(frozen=True)
class NablaWitness:
    """A failure of ``F_nabla`` to be a lax morphism.

    ``kind`` and payload:

    * ``unit``: ``F_nabla(0, ..., 0)`` is not the zero function;
    * ``membership``: ``F_nabla(fs)`` increases between ``times[0] < times[1]``;
    * ``isotone``: ``fs >= gs`` pointwise but ``F_nabla(gs)(t) > F_nabla(fs)(t)``;
    * ``subadditive``: ``F_nabla(fs oplus gs)(t) > F_nabla(fs)(r) + F_nabla(gs)(s)``
      with ``r + s = t``.
    """

    kind: str
    fs: tuple[StepFn, ...] = ()
    gs: tuple[StepFn, ...] = ()
    t: object = None
    split: tuple | None = None
    times: tuple | None = None

    def replay(self, F: Aggregator) -> bool:
        n = F.arity
        if self.kind == "unit":
            return not nabla.lift(F, [nabla.ZERO_FN] * n).is_zero()
        if self.kind == "membership":
            t1, t2 = self.times
            return t1 < t2 and F(tuple(f(t1) for f in self.fs)) < F(tuple(f(t2) for f in self.fs))
        if self.kind == "isotone":
            t = self.t
            return (all(nabla.leq_pointwise(g, f) for f, g in zip(self.fs, self.gs))
                    and F(tuple(g(t) for g in self.gs)) > F(tuple(f(t) for f in self.fs)))
        if self.kind == "subadditive":
            t = self.t
            r, s = self.split
            if r + s != t:
                return False
            hs = [nabla.oplus(f, g) for f, g in zip(self.fs, self.gs)]
            lhs = F(tuple(h(t) for h in hs))
            return lhs > F(tuple(f(r) for f in self.fs)) + F(tuple(g(s) for g in self.gs))
        raise ValueError(f"unknown kind {self.kind!r}")

    def to_json(self) -> dict:
        doc: dict = {"kind": self.kind}
        if self.fs:
            doc["fs"] = [str(f) for f in self.fs]
        if self.gs:
            doc["gs"] = [str(g) for g in self.gs]
        if self.t is not None:
            doc["t"] = str(self.t)
        if self.split is not None:
            doc["split"] = [str(v) for v in self.split]
        if self.times is not None:
            doc["times"] = [str(v) for v in self.times]
        return doc


def _lift_or_witness(F, fs):
    try:
        return nabla.lift(F, fs), None
    except NotNonincreasing as exc:
        return None, NablaWitness("membership", tuple(fs), times=exc.times)


def nabla_lax_search(F: Aggregator, seed: int, samples: int = 100) -> tuple[NablaWitness | None, int]:
    """First lax-morphism failure of ``F_nabla`` on seeded step-function tuples.

    Returns the witness (or ``None``) and the number of tuples examined.
    """
    n = F.arity
    if not nabla.lift(F, [nabla.ZERO_FN] * n).is_zero():
        return NablaWitness("unit"), 0
    rng = stream(seed, "nabla_lax")
    for k in range(samples):
        fs = tuple(random_stepfn(rng, 4) for _ in range(n))
        gs = tuple(random_stepfn(rng, 4) for _ in range(n))
        hs = tuple(nabla.pointwise_min(f, random_stepfn(rng, 4)) for f in fs)
        Ff, wit = _lift_or_witness(F, fs)
        if wit is not None:
            return wit, k + 1
        Fg, wit = _lift_or_witness(F, gs)
        if wit is not None:
            return wit, k + 1
        Fh, wit = _lift_or_witness(F, hs)
        if wit is not None:
            return wit, k + 1
        t = nabla.first_exceedance(Fh, Ff)
        if t is not None:
            return NablaWitness("isotone", fs, hs, t=t), k + 1
        sums = [nabla.oplus(f, g) for f, g in zip(fs, gs)]
        Fs, wit = _lift_or_witness(F, sums)
        if wit is not None:
            return wit, k + 1
        hit = nabla.leq_oplus(Fs, Ff, Fg)
        if hit is not None:
            t, r, s = hit
            return NablaWitness("subadditive", fs, gs, t=t, split=(r, s)), k + 1
    return None, samples


def nabla_down(nw: NablaWitness, F: Aggregator) -> Witness:
    """Turn a step-function failure into a failure on ``[0, inf]``."""
    n = F.arity
    if nw.kind == "unit":
        return Witness("not_zero_at_zero")
    if nw.kind == "membership":
        t1, t2 = nw.times
        return Witness("isotone", (tuple(f(t2) for f in nw.fs), tuple(f(t1) for f in nw.fs)))
    if nw.kind == "isotone":
        t = nw.t
        return Witness("isotone", (tuple(g(t) for g in nw.gs), tuple(f(t) for f in nw.fs)))
    if nw.kind == "subadditive":
        r, s = nw.split
        x = tuple(f(r) for f in nw.fs)
        y = tuple(g(s) for g in nw.gs)
        z = tuple(nabla.oplus(f, g)(nw.t) for f, g in zip(nw.fs, nw.gs))
        u = _vadd(x, y)  # z <= u coordinatewise
        if F(z) > F(u):
            return Witness("isotone", (z, u))
        return Witness("subadditive", (x, y))
    raise ValueError(f"unknown kind {nw.kind!r} (arity {n})")


def nabla_up(w: Witness, F: Aggregator) -> NablaWitness:
    """Lift a failure on ``[0, inf]`` to constant step functions."""
    if w.kind == "not_zero_at_zero":
        return NablaWitness("unit")
    if w.kind == "isotone":
        x, y = w.args
        fs = tuple(nabla.constant(v) for v in y)
        gs = tuple(nabla.constant(v) for v in x)
        return NablaWitness("isotone", fs, gs, t=ONE.fraction)
    if w.kind == "subadditive":
        x, y = w.args
        fs = tuple(nabla.constant(v) for v in x)
        gs = tuple(nabla.constant(v) for v in y)
        half = ONE.fraction / 2
        return NablaWitness("subadditive", fs, gs, t=ONE.fraction, split=(half, half))
    raise InapplicableTransfer(f"{w.kind} witnesses are not lax-morphism failures")


# -- the harness -------------------------------------------------------------


@dataclass(frozen=True)
class HarnessConfig:
    seed: int = 0
    samples: int = 512
    nabla_samples: int = 100
    battery: int = 20
    max_points: int = 3
    cap: int = 12

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "samples": self.samples,
            "nabla_samples": self.nabla_samples,
            "battery": self.battery,
            "max_points": self.max_points,
            "cap": self.cap,
        }


def _closure(witnesses: list[Witness], F: Aggregator, limit: int = 64) -> tuple[list[Witness], list[str]]:
    seen = {w for w in witnesses}
    order = list(witnesses)
    errors: list[str] = []
    i = 0
    while i < len(order) and len(order) < limit:
        try:
            new = transfer_witness(order[i], F)
        except InapplicableTransfer:
            new = []
        except AssertionError as exc:
            errors.append(str(exc))
            new = []
        for t in new:
            if t not in seen:
                seen.add(t)
                order.append(t)
        i += 1
    return order, errors


def _characterization(cls: Classification, F: Aggregator) -> tuple[dict, list[Witness], list[str]]:
    raw = {}
    for cond, checks in _CHECKS_FOR.items():
        raw[cond] = any(cls.checks[c].refuted for c in checks)
    initial = [v.witness for v in cls.checks.values() if v.witness is not None]
    closed, errors = _closure(initial, F)
    kinds = {w.kind for w in closed}
    after = {cond: any(k in kinds for k in refuting) for cond, refuting in CONDITIONS.items()}
    problems = list(errors)
    if len(set(after.values())) > 1:
        problems.append("characterizing conditions disagree after transfer: "
                        + ", ".join(f"{c}={'refuted' if r else 'consistent'}" for c, r in after.items()))
    if "kernel_some" in kinds and "kernel_exact" not in kinds:
        problems.append("kernel_some refuted but kernel_exact not")
    doc = {
        "conditions": {
            cond: {"raw": "refuted" if raw[cond] else "consistent",
                   "after_transfer": "refuted" if after[cond] else "consistent"}
            for cond in CONDITIONS
        },
        "witnesses": len(closed),
        "consistent": not problems,
    }
    return doc, closed, problems


def _lax(F: Aggregator, closed: list[Witness], cfg: HarnessConfig) -> tuple[dict, list[str]]:
    problems: list[str] = []
    f_wits = [w for w in closed if w.kind in CONDITIONS["isotone_subadditive"]]
    nw, examined = nabla_lax_search(F, cfg.seed, cfg.nabla_samples)
    f_level = bool(f_wits)
    n_level = nw is not None
    down = up = None
    if nw is not None:
        if not nw.replay(F):
            problems.append(f"step-function {nw.kind} witness does not replay")
        down = nabla_down(nw, F)
        if not down.replay(F):
            problems.append(f"downward transfer of {nw.kind} does not replay")
        else:
            f_level = True
    if f_wits:
        up = nabla_up(f_wits[0], F)
        if not up.replay(F):
            problems.append(f"upward transfer of {f_wits[0].kind} does not replay")
        else:
            n_level = True
    if f_level != n_level:
        problems.append("one-sided lax-morphism refutation")
    doc = {
        "F_level": "refuted" if f_wits else "consistent",
        "nabla_level": "refuted" if nw is not None else "consistent",
        "nabla_samples": examined,
        "nabla_witness": nw.to_json() if nw is not None else None,
        "down": down.to_json() if down is not None else None,
        "up": up.to_json() if up is not None else None,
        "consistent": not problems,
    }
    return doc, problems


def _battery_family(F: Aggregator, cfg: HarnessConfig, k: int):
    """The ``k``-th battery family: (construction, spaces, level)."""
    rng = stream(cfg.seed, f"battery:{F.arity}:{k}")
    n = F.arity
    quasi = k % 4 >= 2
    if k % 2 == 0:
        sizes = [rng.randint(1, cfg.max_points) for _ in range(n)]
        while _prod(sizes) > cfg.cap:
            i = max(range(n), key=lambda j: sizes[j])
            sizes[i] -= 1
        spaces = [random_space(rng, m, quasi_metric=quasi) for m in sizes]
        return "product", spaces, quasi
    m = rng.randint(2, cfg.max_points)
    spaces = [random_space(rng, m, quasi_metric=quasi) for _ in range(n)]
    return "set", spaces, quasi


def _prod(xs):
    out = 1
    for x in xs:
        out *= x
    return out


def _semantic(F: Aggregator, cls: Classification, closed: list[Witness],
              cfg: HarnessConfig) -> tuple[dict, list[str]]:
    problems: list[str] = []
    results = []
    qp_refuted = cls.flags["QPModAP"].refuted
    if qp_refuted:
        picked = {}
        for w in closed:
            if w.kind in ("not_zero_at_zero", "isotone", "subadditive", "asym_triplet", "sym_triplet"):
                picked.setdefault(w.kind, w)
        for kind in sorted(picked):
            sw = witness_space(picked[kind], F)
            if sw.violation is None:
                problems.append(f"{kind} witness space shows no violation")
            results.append({"source": kind, "construction": sw.construction, "axiom": sw.axiom,
                            "violation": sw.violation})
        return {"mode": "witness", "results": results, "consistent": not problems}, problems

    for kind, flag in (("kernel_exact", "QModAP"), ("kernel_some", "QModAS")):
        v = cls.checks[kind]
        if v.refuted:
            sw = witness_space(v.witness, F)
            if sw.axiom != "M3":
                problems.append(f"{kind} witness space does not break separation")
            results.append({"source": kind, "construction": sw.construction, "axiom": sw.axiom,
                            "violation": sw.violation})
    violations = 0
    families = []
    for k in range(cfg.battery):
        construction, spaces, quasi = _battery_family(F, cfg, k)
        separated = quasi and not cls.checks[
            "kernel_exact" if construction == "product" else "kernel_some"].refuted
        level = "quasi_metric" if separated else "pseudo"
        try:
            agg = product(spaces, F, cap=cfg.cap) if construction == "product" else set_aggregate(spaces, F)
            report = validate(agg, level, limit=1)
            bad = None if report.ok else report.violations[0].to_json()
        except AggregationFailure as exc:
            bad = exc.to_json()
        if bad is not None:
            violations += 1
            problems.append(f"battery family {k} ({construction}) violates {bad['axiom']}")
        families.append({"construction": construction, "sizes": [len(s) for s in spaces],
                         "level": level, "violation": bad})
    doc = {"mode": "battery", "results": results, "families": families,
           "violations": violations, "consistent": not problems}
    return doc, problems


def harness(F: Aggregator, cfg: HarnessConfig | None = None) -> dict:
    """Run all three legs on ``F``; the report lists every inconsistency."""
    cfg = cfg or HarnessConfig()
    cls = classify(F, Sampler(cfg.seed, cfg.samples))
    char, closed, p1 = _characterization(cls, F)
    lax, p2 = _lax(F, closed, cfg)
    sem, p3 = _semantic(F, cls, closed, cfg)
    return {
        "aggregator": F.spec,
        "arity": F.arity,
        "classification": cls.to_json(),
        "characterization": char,
        "lax_morphism": lax,
        "semantic": sem,
        "inconsistencies": p1 + p2 + p3,
    }


def default_battery(seed: int = 0, random_terms: int = 100) -> list[Aggregator]:
    fixed = [
        builtin("sum", arity=2),
        builtin("wsum", 1, "1/2"),
        builtin("sup", 1, 1),
        builtin("proj", 1, arity=2),
        builtin("const_jump", 1, arity=2),
        builtin("zero", arity=2),
        parse("x1*x1", 1),
        parse("max(x1, x2)", 2),
        parse("min(x1, x2) + x1", 2),
    ]
    rng = stream(seed, "dsl_battery")
    return fixed + [random_dsl(rng, (1, 2, 3)) for _ in range(random_terms)]


def verify(aggregators: Sequence[Aggregator], cfg: HarnessConfig | None = None) -> dict:
    cfg = cfg or HarnessConfig()
    candidates = [harness(F, cfg) for F in aggregators]
    bad = sum(len(c["inconsistencies"]) for c in candidates)
    refuted = sum(c["classification"]["families"]["QPModAP"]["status"] == "refuted" for c in candidates)
    return {
        "tool": "modagg",
        "version": __version__,
        "config": cfg.to_json(),
        "summary": {
            "candidates": len(candidates),
            "qpmodap_refuted": refuted,
            "inconsistencies": bad,
            "ok": bad == 0,
        },
        "candidates": candidates,
    }
