from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from modagg.aggregator import (
    Add,
    CallableAggregator,
    Const,
    Max,
    Mul,
    ParseError,
    SpecError,
    Var,
    builtin,
    from_spec,
    parse,
    parse_expr,
)
from modagg.extreal import INF, ONE, ZERO, ExtReal
from modagg.generators import random_term

from conftest import extreals, vectors

POOL = [ZERO, ExtReal("1/2"), ONE, ExtReal(2), ExtReal(3), INF]


def test_parse_examples():
    assert parse_expr("x1 + 2*x2", 2) == Add(Var(1), Mul(Const(ExtReal(2)), Var(2)))
    node = parse_expr("max(x1, x2, 1/2)", 2)
    assert isinstance(node, Max) and len(node.args) == 3
    with pytest.raises(ParseError):
        parse_expr("x3", 2)


def test_precedence_and_printing():
    node = parse_expr("x1 + x2 * x1", 2)
    assert isinstance(node, Add)
    assert str(parse_expr("(x1 + x2) * x1", 2)) == "(x1 + x2)*x1"
    assert str(parse_expr("min(x1,inf)", 1)) == "min(x1, inf)"


@pytest.mark.parametrize("text,pos", [("x1 +", 4), ("x1 $ x2", 3), ("max(x1", 6), ("(x1))", 4)])
def test_parse_errors_carry_position(text, pos):
    with pytest.raises(ParseError) as exc:
        parse_expr(text, 2)
    assert exc.value.pos == pos
    assert f"position {pos}" in str(exc.value)


def test_parse_rejects_negative_constants():
    with pytest.raises(ParseError):
        parse_expr("-1", 1)


def test_eval_examples():
    assert builtin("sum", arity=2)((ONE, INF)) == INF
    cj = builtin("const_jump", 3, arity=2)
    assert cj((ZERO, ZERO)) == ZERO and cj((ZERO, ONE)) == ExtReal(3)
    assert parse("x1*x2", 2)((INF, ZERO)) == ZERO


def test_builtin_examples():
    assert builtin("sum", arity=2)((ONE, ExtReal(2))) == ExtReal(3)
    assert builtin("proj", 1, arity=2)((ExtReal(5), ExtReal(7))) == ExtReal(5)
    assert builtin("const_jump", INF, arity=2)((ZERO, ONE)) == INF
    assert builtin("sup", 1, 2)((ExtReal(3), ExtReal(2))) == ExtReal(4)
    assert builtin("zero", arity=3)((ONE, ONE, ONE)) == ZERO


def test_builtin_validation():
    with pytest.raises(SpecError):
        builtin("wsum", 1, 0)
    with pytest.raises(SpecError):
        builtin("proj", 3, arity=2)
    with pytest.raises(SpecError):
        builtin("nope", arity=1)
    with pytest.raises(SpecError):
        builtin("sum")


def test_arity_is_enforced():
    with pytest.raises(ValueError):
        builtin("sum", arity=2)((ONE,))


def test_infinite_weights_are_flagged():
    assert builtin("wsum", 1, INF).notes()
    assert not builtin("wsum", 1, 2).notes()


def test_from_spec_round_trip():
    for spec, n in [("builtin:sum", 2), ("builtin:wsum:1,1/2", 2), ("builtin:proj:2", 3),
                    ("builtin:const_jump:inf", 2), ("expr:max(x1, 2*x2)", 2), ("builtin:zero", 1)]:
        F = from_spec(spec, n)
        assert from_spec(F.spec, F.arity) == F or F.spec == spec
    with pytest.raises(SpecError):
        from_spec("python:lambda", 1)
    with pytest.raises(SpecError):
        from_spec("expr:x1")


@given(vectors(2), st.sampled_from([(1, 1), (2, "1/2"), ("inf", 3)]))
def test_builtins_agree_with_dsl(x, ks):
    k1, k2 = (ExtReal(k) for k in ks)
    assert builtin("wsum", k1, k2)(x) == parse(f"{k1}*x1 + {k2}*x2", 2)(x)
    assert builtin("sup", k1, k2)(x) == parse(f"max({k1}*x1, {k2}*x2)", 2)(x)
    assert builtin("sum", arity=2)(x) == parse("x1 + x2", 2)(x)


@given(st.integers(0, 10 ** 6), vectors(3))
def test_print_parse_round_trip(seed, x):
    rng = random.Random(seed)
    node = random_term(rng, 3, 4)
    again = parse_expr(str(node), 3)
    assert again.evaluate(x) == node.evaluate(x)
    assert str(again) == str(node)


@given(st.integers(0, 10 ** 6))
def test_dsl_terms_are_isotone(seed):
    # +, *, max, min with nonnegative constants are monotone in every argument
    rng = random.Random(seed)
    node = random_term(rng, 2, 3)
    for x, y in itertools.product(itertools.product(POOL[:4] + [INF], repeat=2), repeat=2):
        if all(a <= b for a, b in zip(x, y)):
            assert node.evaluate(x) <= node.evaluate(y)


@given(extreals, extreals, vectors(2))
def test_constants_monotone(c1, c2, x):
    lo, hi = min(c1, c2), max(c1, c2)
    assert parse(f"max(x1, {lo})*x2 + {lo}", 2)(x) <= parse(f"max(x1, {hi})*x2 + {hi}", 2)(x)


def test_const_jump_preserves_pool_triplets():
    for k in (ZERO, ONE, ExtReal(2), INF):
        F = builtin("const_jump", k, arity=1)
        for a, b, c in itertools.product(POOL, repeat=3):
            if a <= b + c:
                assert F((a,)) <= F((b,)) + F((c,))


def test_callable_aggregator():
    F = CallableAggregator(lambda xs: xs[0] + xs[1], 2, "plus")
    assert F((ONE, ONE)) == ExtReal(2)
    assert F.spec == "callable:plus"
    assert F.exact_facts() == {}
