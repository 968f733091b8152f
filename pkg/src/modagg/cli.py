"""Command-line interface: ``modagg <group> <command> [options]``.

Exit codes: 0 success, 1 a property was refuted or an axiom violated,
2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys
from pathlib import Path
from typing import Any, Sequence

from . import __version__, nabla
from .aggregator import Aggregator, ParseError, SpecError, from_spec, parse_expr
from .extreal import parse_extreal
from .harness import HarnessConfig, default_battery, verify
from .modular import (
    DEFAULT_CAP,
    LEVELS,
    AggregationFailure,
    FiniteQpm,
    ModularSpace,
    SpaceFormatError,
    from_gd,
    product,
    set_aggregate,
    validate,
)
from .nabla import NotNonincreasing, StepFn, StepFnFormatError
from .properties import Sampler, classify

EXIT_OK, EXIT_REFUTED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# -- helpers -----------------------------------------------------------------


def _load_json(path: str) -> Any:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON: {exc}") from None


def _load_stepfn(path: str) -> StepFn:
    try:
        return StepFn.from_json(_load_json(path))
    except (StepFnFormatError, NotNonincreasing, ValueError) as exc:
        raise UsageError(f"{path}: {type(exc).__name__}: {exc}") from None


def _load_space(path: str) -> ModularSpace:
    try:
        return ModularSpace.from_json(_load_json(path))
    except (SpaceFormatError, StepFnFormatError, NotNonincreasing, ValueError) as exc:
        raise UsageError(f"{path}: {type(exc).__name__}: {exc}") from None


def _load_agg(args) -> Aggregator:
    try:
        return from_spec(args.agg, args.arity)
    except (SpecError, ParseError, ValueError) as exc:
        raise UsageError(f"--agg: {exc}") from None


def _config(args) -> dict:
    return {"seed": args.seed, "samples": args.samples, "cap": args.cap, "format": args.format}


def _emit(args, result: dict, human: str) -> None:
    if args.format == "json":
        doc = {"tool": "modagg", "version": __version__, "command": args.command_name,
               "config": _config(args), "result": result}
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    else:
        sys.stdout.write(human.rstrip("\n") + "\n")


def _agg_flags(F: Aggregator) -> str:
    return f"--agg {shlex.quote(F.spec)} --arity {F.arity}"


def _replay_commands(F: Aggregator, witness) -> list[str]:
    """Shell commands that re-evaluate ``F`` at the witness points."""
    vecs = witness.ordered() if witness.kind == "sym_triplet" else witness.args
    if witness.kind == "subadditive":
        x, y = vecs
        vecs = (tuple(a + b for a, b in zip(x, y)), x, y)
    if witness.kind == "not_zero_at_zero":
        vecs = (("0",) * F.arity,)
    return [f"modagg agg eval {_agg_flags(F)} " + " ".join(str(v) for v in vec) for vec in vecs]


# -- nabla -------------------------------------------------------------------


def cmd_nabla_oplus(args) -> int:
    f, g = _load_stepfn(args.f), _load_stepfn(args.g)
    h = nabla.oplus(f, g)
    _emit(args, h.to_json(), json.dumps(h.to_json()) + "\n# " + str(h))
    return EXIT_OK


def cmd_nabla_leq(args) -> int:
    f, g = _load_stepfn(args.f), _load_stepfn(args.g)
    if args.order == "quantale":
        # quantale order: f below g means f >= g pointwise
        t = nabla.first_exceedance(g, f)
        relation = "f >= g pointwise"
    else:
        t = nabla.first_exceedance(f, g)
        relation = "f <= g pointwise"
    holds = t is None
    result: dict = {"order": args.order, "holds": holds}
    if holds:
        human = f"holds: {relation}"
    else:
        result.update({"t": str(t), "f": str(f(t)), "g": str(g(t))})
        human = f"fails: {relation} is false at t = {t}: f(t) = {f(t)}, g(t) = {g(t)}"
    _emit(args, result, human)
    return EXIT_OK if holds else EXIT_REFUTED


def cmd_nabla_eval(args) -> int:
    f = _load_stepfn(args.f)
    out = []
    for text in args.t:
        try:
            t = nabla.parse_time(text)
            out.append({"t": str(t), "value": str(f(t))})
        except ValueError as exc:
            raise UsageError(f"time {text!r}: {exc}") from None
    _emit(args, {"values": out}, "\n".join(f"f({d['t']}) = {d['value']}" for d in out))
    return EXIT_OK


# -- modular -----------------------------------------------------------------


def _report_human(report) -> str:
    if report.ok:
        return f"ok: {report.points} points, level {report.level}, no violations"
    lines = [f"{len(report.violations)} violation(s) at level {report.level}:"]
    for v in report.violations:
        d = v.to_json()
        where = ", ".join(d["points"])
        extra = f" at t = {d['t']}" if "t" in d else ""
        lines.append(f"  {v.axiom} ({where}){extra}: {v.detail}")
    return "\n".join(lines)


def cmd_modular_validate(args) -> int:
    space = _load_space(args.space)
    report = validate(space, args.level)
    _emit(args, report.to_json(), _report_human(report))
    return EXIT_OK if report.ok else EXIT_REFUTED


def _aggregate(args, construction: str) -> int:
    if args.arity is None:
        args.arity = len(args.spaces)
    F = _load_agg(args)
    spaces = [_load_space(p) for p in args.spaces]
    if len(spaces) != F.arity:
        raise UsageError(f"aggregator has arity {F.arity} but {len(spaces)} spaces were given")
    try:
        if construction == "product":
            agg = product(spaces, F, cap=args.cap)
        else:
            agg = set_aggregate(spaces, F)
    except AggregationFailure as exc:
        _emit(args, {"failure": exc.to_json()}, f"aggregation fails: {exc}")
        return EXIT_REFUTED
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    result: dict = {"space": agg.to_json()}
    human = json.dumps(agg.to_json(), indent=2)
    code = EXIT_OK
    if args.validate_level:
        report = validate(agg, args.validate_level)
        result["validation"] = report.to_json()
        human += "\n" + _report_human(report)
        code = EXIT_OK if report.ok else EXIT_REFUTED
    _emit(args, result, human)
    return code


def cmd_modular_product(args) -> int:
    return _aggregate(args, "product")


def cmd_modular_set_aggregate(args) -> int:
    return _aggregate(args, "set")


def cmd_modular_from_gd(args) -> int:
    g = _load_stepfn(args.g)
    try:
        d = FiniteQpm.from_json(_load_json(args.d))
        space = from_gd(g, d)
    except (SpaceFormatError, ValueError) as exc:
        raise UsageError(f"{args.d}: {exc}") from None
    _emit(args, space.to_json(), json.dumps(space.to_json(), indent=2))
    return EXIT_OK


# -- agg ---------------------------------------------------------------------


def cmd_agg_parse(args) -> int:
    try:
        node = parse_expr(args.expr, args.arity)
    except ParseError as exc:
        raise UsageError(f"parse error: {exc}") from None
    _emit(args, {"expr": str(node), "arity": args.arity}, str(node))
    return EXIT_OK


def cmd_agg_eval(args) -> int:
    F = _load_agg(args)
    try:
        xs = tuple(parse_extreal(v) for v in args.values)
    except ValueError as exc:
        raise UsageError(f"value: {exc}") from None
    if len(xs) != F.arity:
        raise UsageError(f"expected {F.arity} values, got {len(xs)}")
    v = F(xs)
    _emit(args, {"args": [str(x) for x in xs], "value": str(v)},
          f"F({', '.join(map(str, xs))}) = {v}")
    return EXIT_OK


def cmd_agg_classify(args) -> int:
    F = _load_agg(args)
    cls = classify(F, Sampler(args.seed, args.samples))
    lines = [f"{F.spec} (arity {F.arity})"]
    for name, v in cls.checks.items():
        line = f"  {name:<14} {v.status}"
        if v.witness is not None:
            line += f": {v.witness.describe(F)}"
        lines.append(line)
        if v.witness is not None:
            lines.extend(f"      replay: {c}" for c in _replay_commands(F, v.witness))
    for fam, flag in cls.flags.items():
        same = "/".join(flag.to_json()["same_as"])
        lines.append(f"  {fam} ({same}): {flag.status}")
    lines.extend(f"  note: {n}" for n in cls.notes)
    _emit(args, cls.to_json(), "\n".join(lines))
    return EXIT_REFUTED if any(f.refuted for f in cls.flags.values()) else EXIT_OK


# -- theorems ----------------------------------------------------------------


def cmd_theorems_verify(args) -> int:
    if args.agg:
        if args.arity is None:
            raise UsageError("--agg needs --arity")
        battery = [_load_agg(args)]
    else:
        battery = default_battery(args.seed, args.random_terms)
    cfg = HarnessConfig(seed=args.seed, samples=args.samples)
    report = verify(battery, cfg)
    s = report["summary"]
    lines = [f"{s['candidates']} candidates, {s['qpmodap_refuted']} QPModAP-refuted, "
             f"{s['inconsistencies']} inconsistencies"]
    for c in report["candidates"]:
        fams = c["classification"]["families"]
        status = " ".join(f"{k}={v['status']}" for k, v in fams.items())
        lines.append(f"  {c['aggregator']} (arity {c['arity']}): {status}")
        lines.extend(f"    INCONSISTENT: {p}" for p in c["inconsistencies"])
    _emit(args, report, "\n".join(lines))
    return EXIT_OK if s["ok"] else EXIT_REFUTED


# -- parser ------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="seed for every sampled check (default 0)")
    p.add_argument("--samples", type=int, default=512, help="samples per check (default 512)")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="maximum product size")
    p.add_argument("--format", choices=("human", "json"), default="human")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="modagg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"modagg {__version__}")
    groups = parser.add_subparsers(dest="group", required=True)

    def leaf(group, name, fn, help_):
        sub = subs[group]
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=fn, command_name=f"{group} {name}")
        return p

    subs = {}

    subs["nabla"] = groups.add_parser("nabla", help="step-function algebra").add_subparsers(dest="cmd", required=True)
    g = "nabla"
    p = leaf(g, "oplus", cmd_nabla_oplus, "infimal convolution of two step functions")
    p.add_argument("f")
    p.add_argument("g")
    p = leaf(g, "leq", cmd_nabla_leq, "compare two step functions")
    p.add_argument("f")
    p.add_argument("g")
    p.add_argument("--order", choices=("pointwise", "quantale"), default="pointwise")
    p = leaf(g, "eval", cmd_nabla_eval, "evaluate a step function")
    p.add_argument("f")
    p.add_argument("t", nargs="+")

    subs["modular"] = groups.add_parser("modular", help="modular spaces").add_subparsers(dest="cmd", required=True)
    g = "modular"
    p = leaf(g, "validate", cmd_modular_validate, "check the axioms of a space")
    p.add_argument("space")
    p.add_argument("--level", choices=sorted(LEVELS), default="pseudo")
    for name, fn in (("product", cmd_modular_product), ("set-aggregate", cmd_modular_set_aggregate)):
        p = leaf(g, name, fn, f"aggregate spaces ({name})")
        p.add_argument("--agg", required=True)
        p.add_argument("--arity", type=int)
        p.add_argument("spaces", nargs="+")
        p.add_argument("--validate-level", choices=sorted(LEVELS))
    p = leaf(g, "from-gd", cmd_modular_from_gd, "build w(t,x,y) = g(t) d(x,y)")
    p.add_argument("--g", required=True)
    p.add_argument("--d", required=True)

    subs["agg"] = groups.add_parser("agg", help="aggregation functions").add_subparsers(dest="cmd", required=True)
    g = "agg"
    p = leaf(g, "parse", cmd_agg_parse, "parse and normalize an expression")
    p.add_argument("expr")
    p.add_argument("--arity", type=int, required=True)
    p = leaf(g, "eval", cmd_agg_eval, "evaluate an aggregator")
    p.add_argument("--agg", required=True)
    p.add_argument("--arity", type=int)
    p.add_argument("values", nargs="+")
    p = leaf(g, "classify", cmd_agg_classify, "classify an aggregator")
    p.add_argument("--agg", required=True)
    p.add_argument("--arity", type=int)

    subs["theorems"] = groups.add_parser("theorems", help="cross-validation harness").add_subparsers(dest="cmd", required=True)
    g = "theorems"
    p = leaf(g, "verify", cmd_theorems_verify, "run the harness")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--agg")
    src.add_argument("--battery", choices=("default",), default="default")
    p.add_argument("--arity", type=int)
    p.add_argument("--random-terms", type=int, default=100, help="random expressions in the default battery")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.samples < 1:
            raise UsageError("--samples must be positive")
        return args.func(args)
    except UsageError as exc:
        print(f"modagg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
