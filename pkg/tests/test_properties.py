from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modagg.aggregator import CallableAggregator, builtin, from_spec, parse
from modagg.extreal import INF, ONE, ZERO, ExtReal
from modagg.generators import random_dsl
from modagg.properties import (
    CHECKS,
    InapplicableTransfer,
    Sampler,
    Witness,
    check_asym_triplets,
    check_isotone,
    check_kernel_exact,
    check_kernel_some,
    check_subadditive,
    check_sym_triplets,
    check_zero,
    classify,
    shrink,
    transfer_witness,
)

S = Sampler(seed=0, count=256)


def v(*xs):
    return tuple(ExtReal(x) for x in xs)


def test_check_zero_examples():
    assert check_zero(builtin("sum", arity=2)).status == "exact"
    assert check_zero(builtin("const_jump", 3, arity=2)).status == "exact"
    verdict = check_zero(parse("x1 + 1", 1))
    assert verdict.refuted and verdict.witness.kind == "not_zero_at_zero"


def test_check_isotone_examples():
    assert check_isotone(builtin("sup", 1, 1), S).status == "exact"
    assert check_isotone(parse("max(x1, 1) * min(x1, 1)", 1), S).status == "consistent"


def test_isotone_brute_force_grid():
    F = parse("max(x1, 1) * min(x1, 1)", 1)
    grid = [ExtReal(Fraction(k, 7)) for k in range(50)]
    assert all(F((a,)) <= F((b,)) for a, b in zip(grid, grid[1:]))


def test_check_subadditive_examples():
    assert check_subadditive(builtin("sum", arity=3), S).status == "exact"
    assert check_subadditive(builtin("wsum", 2, "1/3"), S).status == "exact"
    verdict = check_subadditive(parse("x1*x1", 1), S)
    assert verdict.refuted and verdict.witness.args == (v(1), v(1))


def test_triplet_examples():
    assert builtin("sum", arity=2)(v(1, 1)) <= builtin("sum", arity=2)(v(1, 0)) + 1
    verdict = check_asym_triplets(parse("x1*x1", 1), S)
    assert verdict.refuted and verdict.witness.args == (v(2), v(1), v(1))
    assert check_asym_triplets(builtin("const_jump", 2, arity=2), S).status == "consistent"
    assert check_sym_triplets(builtin("sum", arity=2), S).status == "consistent"
    assert check_sym_triplets(parse("x1*x1", 1), S).refuted


def test_kernel_examples():
    proj = builtin("proj", 1, arity=2)
    verdict = check_kernel_exact(proj, S)
    assert verdict.refuted and verdict.witness.args == (v(0, 1),)
    assert check_kernel_exact(builtin("sum", arity=2), S).status == "exact"
    zero = builtin("zero", arity=2)
    assert check_kernel_exact(zero, S).witness.args == (v(1, 1),)
    assert check_kernel_some(proj, S).status == "exact"
    assert check_kernel_some(zero, S).witness.args == (v(1, 1),)
    assert check_kernel_some(builtin("sup", 1, 1), S).status == "exact"


def test_classify_examples():
    def flags(F):
        return {k: f.status for k, f in classify(F, S).flags.items()}

    assert flags(builtin("sum", arity=2)) == {"QPModAP": "member", "QModAP": "member", "QModAS": "member"}
    assert flags(builtin("proj", 1, arity=2)) == {"QPModAP": "member", "QModAP": "refuted", "QModAS": "member"}
    assert flags(builtin("const_jump", 1, arity=2))["QPModAP"] == "member"
    assert flags(builtin("wsum", 1, "1/2"))["QModAP"] == "member"
    assert flags(builtin("zero", arity=2)) == {"QPModAP": "member", "QModAP": "refuted", "QModAS": "refuted"}
    assert set(flags(parse("x1*x1", 1)).values()) == {"refuted"}
    assert flags(parse("x1 + x2", 2))["QModAP"] == "consistent"


def test_transfer_examples():
    F = parse("x1*x1", 1)
    out = transfer_witness(Witness("subadditive", (v(1), v(1))), F)
    assert out[0] == Witness("asym_triplet", (v(2), v(1), v(1)))
    assert transfer_witness(Witness("not_zero_at_zero"), parse("x1 + 1", 1)) == []


def _dip():
    # F(0)=0, F(1)=2, F(x)=1 elsewhere: not isotone
    return CallableAggregator(lambda xs: ExtReal(2) if xs[0] == ONE else (ZERO if xs[0] == ZERO else ONE), 1, "dip")


def test_transfer_isotone():
    F = _dip()
    w = Witness("isotone", (v(1), v(2)))
    assert w.replay(F)
    assert transfer_witness(w, F) == [Witness("asym_triplet", (v(1), v(2), v(0)))]
    G = CallableAggregator(lambda xs: ExtReal(5) if xs[0] <= ONE else ONE, 1, "drop")
    with pytest.raises(InapplicableTransfer):
        transfer_witness(Witness("isotone", (v(1), v(2))), G)


def test_transfer_requires_replay():
    with pytest.raises(ValueError):
        transfer_witness(Witness("subadditive", (v(1), v(1))), builtin("sum", arity=1))


def test_transfer_kernel_and_sym():
    zero = builtin("zero", arity=2)
    assert transfer_witness(Witness("kernel_some", (v(1, 1),)), zero) == [Witness("kernel_exact", (v(1, 1),))]
    F = parse("x1*x1", 1)
    sym = Witness("sym_triplet", (v(1), v(2), v(1)), 2)  # ordering (2, 1, 1)
    assert sym.replay(F)
    kinds = [w.kind for w in transfer_witness(sym, F)]
    assert kinds[0] == "asym_triplet" and "subadditive" in kinds


def test_witness_json():
    w = Witness("sym_triplet", (v(1), v(2), v(1)), 2)
    assert w.to_json() == {"kind": "sym_triplet", "args": [["1"], ["2"], ["1"]], "perm": [1, 0, 2]}


def test_shrink_keeps_replaying():
    F = parse("x1*x1", 1)
    w = Witness("subadditive", (v("7/3"), v(5)))
    small = shrink(w, F)
    assert small.replay(F)
    assert small.args == (v(1), v(1))


def test_sampler_streams_are_deterministic():
    a, b = Sampler(5, 64), Sampler(5, 64)
    assert list(a.asym_triplets(2)) == list(b.asym_triplets(2))
    assert list(a.le_pairs(3)) == list(b.le_pairs(3))
    assert list(Sampler(6, 64).sum_pairs(2)) != list(a.sum_pairs(2))


def test_sampler_pool_and_structure():
    s = Sampler(1, 512)
    seen = {x for pair in s.sum_pairs(1) for vec in pair for x in vec}
    assert {ZERO, ONE, INF, ExtReal(2 ** 20), ExtReal(2 ** 20 + 1)} <= seen
    assert all(all(a <= b for a, b in zip(x, y)) for x, y in s.le_pairs(2))
    for a, b, c in s.asym_triplets(2):
        assert all(ai <= bi + ci for ai, bi, ci in zip(a, b, c))
    assert any(a == tuple(bi + ci for bi, ci in zip(b, c)) for a, b, c in s.asym_triplets(2))
    for t in s.sym_triplets(2):
        for x, y, z in itertools.permutations(t):
            assert all(xi <= yi + zi for xi, yi, zi in zip(x, y, z))
    assert all(any(not x.is_zero() for x in a) for a in s.nonzero_vectors(3))
    assert all(all(not x.is_zero() for x in a) for a in s.positive_vectors(3))
    assert sum(1 for _ in s.positive_vectors(2)) == 512


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_refutations_replay_and_transfer(seed):
    F = random_dsl(random.Random(seed))
    cls = classify(F, Sampler(seed, 128))
    for verdict in cls.checks.values():
        if verdict.refuted:
            assert verdict.witness.replay(F)
            for t in transfer_witness(verdict.witness, F):
                assert t.replay(F)
    # kernel_exact consistent yet kernel_some refuted is impossible
    assert not (cls.checks["kernel_some"].refuted and not cls.checks["kernel_exact"].refuted)


def test_classification_is_deterministic():
    F = from_spec("expr:min(x1, x2) + x1*x2", 2)
    a = classify(F, Sampler(9, 200)).to_json()
    b = classify(F, Sampler(9, 200)).to_json()
    assert a == b


def test_checks_registry_order():
    assert list(CHECKS) == ["zero", "isotone", "subadditive", "asym_triplets", "sym_triplets",
                            "kernel_exact", "kernel_some"]
