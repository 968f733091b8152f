from __future__ import annotations

import json
from fractions import Fraction

import pytest

from modagg import nabla
from modagg.aggregator import CallableAggregator, builtin, parse
from modagg.extreal import ONE, ZERO, ExtReal
from modagg.harness import (
    HarnessConfig,
    NablaWitness,
    default_battery,
    harness,
    nabla_down,
    nabla_lax_search,
    nabla_up,
    verify,
    witness_space,
)
from modagg.properties import InapplicableTransfer, Witness

CFG = HarnessConfig(seed=42, samples=256, nabla_samples=60, battery=12)


def v(*xs):
    return tuple(ExtReal(x) for x in xs)


def bump():
    # isotone fails at 1 < 2; F(0) = 0
    return CallableAggregator(lambda xs: ExtReal(3) if xs[0] == ONE else (ZERO if xs[0] == ZERO else ONE),
                              1, "bump")


def test_witness_space_subadditive():
    F = parse("x1*x1", 1)
    sw = witness_space(Witness("subadditive", (v(1), v(1))), F)
    assert sw.axiom == "M2" and sw.construction == "set"
    assert sw.violation["points"] == ["p", "q", "r"]


def test_witness_space_asym_and_sym():
    F = parse("x1*x2", 2)
    w = Witness("asym_triplet", (v(2, 2), v(1, 1), v(1, 1)))
    assert witness_space(w, F).axiom == "M2"
    sym = Witness("sym_triplet", (v(1, 1), v(2, 2), v(1, 1)), 2)
    assert witness_space(sym, F).axiom == "M2"


def test_witness_space_isotone_escapes_nabla():
    F = bump()
    sw = witness_space(Witness("isotone", (v(1), v(2))), F)
    assert sw.axiom == "nabla"
    assert sw.violation["times"]


def test_witness_space_not_zero():
    sw = witness_space(Witness("not_zero_at_zero"), parse("x1 + x2 + 1", 2))
    assert sw.axiom == "M1"


def test_witness_space_kernels():
    proj = builtin("proj", 1, arity=2)
    sw = witness_space(Witness("kernel_exact", (v(0, 1),)), proj)
    assert sw.construction == "product" and sw.axiom == "M3"
    chi, mu = sw.violation["points"]
    assert chi != mu
    zero = builtin("zero", arity=2)
    assert witness_space(Witness("kernel_some", (v(1, 1),)), zero).axiom == "M3"


def test_witness_space_requires_replay():
    with pytest.raises(ValueError):
        witness_space(Witness("subadditive", (v(1), v(1))), builtin("sum", arity=1))


def test_nabla_transfers_round_trip():
    F = parse("x1*x1", 1)
    up = nabla_up(Witness("subadditive", (v(1), v(1))), F)
    assert up.replay(F)
    down = nabla_down(up, F)
    assert down.replay(F)
    G = bump()
    up = nabla_up(Witness("isotone", (v(1), v(2))), G)
    assert up.replay(G) and nabla_down(up, G).replay(G)
    assert nabla_up(Witness("not_zero_at_zero"), parse("x1 + 1", 1)).kind == "unit"
    with pytest.raises(InapplicableTransfer):
        nabla_up(Witness("kernel_exact", (v(1),)), builtin("zero", arity=1))


def test_nabla_search():
    assert nabla_lax_search(builtin("sum", arity=2), 1, 40) == (None, 40)
    w, _ = nabla_lax_search(parse("x1*x1", 1), 1, 100)
    assert w is not None and w.kind == "subadditive"
    assert w.replay(parse("x1*x1", 1))
    assert nabla_lax_search(parse("x1 + 1", 1), 1, 10)[0].kind == "unit"
    w, _ = nabla_lax_search(bump(), 0, 100)
    assert w is not None and w.replay(bump())


def test_membership_witness_down():
    F = bump()
    f = nabla.canonicalize([1], [ExtReal(2), ONE])
    nw = NablaWitness("membership", (f,), times=(Fraction(1), Fraction(2)))
    assert nw.replay(F)
    assert nabla_down(nw, F) == Witness("isotone", (v(1), v(2)))


def test_harness_sum():
    r = harness(builtin("sum", arity=2), CFG)
    assert r["inconsistencies"] == []
    assert r["semantic"]["mode"] == "battery" and r["semantic"]["violations"] == 0
    assert r["lax_morphism"]["nabla_level"] == "consistent"


def test_harness_square():
    r = harness(parse("x1*x1", 1), CFG)
    assert r["inconsistencies"] == []
    conds = r["characterization"]["conditions"]
    assert all(c["raw"] == "refuted" for c in conds.values())
    assert r["lax_morphism"]["F_level"] == r["lax_morphism"]["nabla_level"] == "refuted"
    assert {x["axiom"] for x in r["semantic"]["results"]} == {"M2"}


def test_harness_projection():
    r = harness(builtin("proj", 1, arity=2), CFG)
    assert r["inconsistencies"] == []
    assert [x["axiom"] for x in r["semantic"]["results"]] == ["M3"]


def test_harness_non_isotone():
    r = harness(bump(), CFG)
    assert r["inconsistencies"] == []
    assert r["characterization"]["conditions"]["asym_triplets"]["after_transfer"] == "refuted"


def test_harness_zero():
    r = harness(builtin("zero", arity=2), CFG)
    assert r["inconsistencies"] == []
    fams = r["classification"]["families"]
    assert fams["QPModAP"]["status"] == "member"
    assert fams["QModAP"]["status"] == fams["QModAS"]["status"] == "refuted"


def test_default_battery_shape():
    battery = default_battery(0)
    assert len(battery) == 109
    assert [F.spec for F in battery[:9]] == [
        "builtin:sum", "builtin:wsum:1,1/2", "builtin:sup:1,1", "builtin:proj:1",
        "builtin:const_jump:1", "builtin:zero", "expr:x1*x1", "expr:max(x1, x2)", "expr:min(x1, x2) + x1",
    ]
    assert {F.arity for F in battery[9:]} == {1, 2, 3}
    assert [F.spec for F in default_battery(0)] == [F.spec for F in battery]


def test_verify_is_deterministic():
    battery = default_battery(3, random_terms=5)
    a = json.dumps(verify(battery, HarnessConfig(seed=3, samples=128, battery=6)))
    b = json.dumps(verify(default_battery(3, random_terms=5), HarnessConfig(seed=3, samples=128, battery=6)))
    assert a == b
    assert json.loads(a)["summary"]["inconsistencies"] == 0
