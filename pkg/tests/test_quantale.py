from __future__ import annotations

import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from modagg import nabla
from modagg.extreal import INF, ZERO, ExtReal
from modagg.quantale import (
    LAWVERE,
    NABLA,
    TWO,
    CarrierError,
    Product,
    VCat,
    is_asym_triplet,
    is_triplet,
    vcat_check,
    vcat_component,
    vcat_diagonal,
    vcat_product,
)

from conftest import extreals, stepfns

bits = st.sampled_from([0, 1])


def _laws(q, u, v, w):
    assert q.eq(q.tensor(u, v), q.tensor(v, u))
    assert q.eq(q.tensor(q.tensor(u, v), w), q.tensor(u, q.tensor(v, w)))
    assert q.eq(q.tensor(u, q.unit), u)
    assert q.leq(q.tensor(u, v), u) and q.leq(q.tensor(u, v), v)
    assert q.leq(u, q.top)
    j = q.join(u, v)
    assert q.leq(u, j) and q.leq(v, j)
    m = q.meet(u, v)
    assert q.leq(m, u) and q.leq(m, v)
    # tensor distributes over binary joins
    assert q.eq(q.tensor(u, q.join(v, w)), q.join(q.tensor(u, v), q.tensor(u, w)))


@given(bits, bits, bits)
def test_two_laws(u, v, w):
    _laws(TWO, u, v, w)


@given(extreals, extreals, extreals)
def test_lawvere_laws(u, v, w):
    _laws(LAWVERE, u, v, w)


@given(stepfns(), stepfns(), stepfns())
def test_nabla_laws(u, v, w):
    _laws(NABLA, u, v, w)


@given(st.tuples(extreals, bits), st.tuples(extreals, bits), st.tuples(extreals, bits))
def test_product_laws(u, v, w):
    _laws(Product((LAWVERE, TWO)), u, v, w)


def test_unit_is_top():
    assert LAWVERE.top == ZERO and TWO.top == 1 and NABLA.top == nabla.ZERO_FN
    assert Product.power(LAWVERE, 2).unit == (ZERO, ZERO)


def test_carrier_checks():
    with pytest.raises(CarrierError):
        TWO.check(2)
    with pytest.raises(CarrierError):
        LAWVERE.check(-1)
    with pytest.raises(CarrierError):
        NABLA.check(ExtReal(1))
    with pytest.raises(CarrierError):
        Product.power(TWO, 2).check((1,))


def test_triplet_examples():
    assert is_asym_triplet(LAWVERE, 3, 1, 2)
    assert not is_asym_triplet(LAWVERE, 4, 1, 2)
    assert not is_asym_triplet(TWO, 0, 1, 1)
    assert is_triplet(LAWVERE, 1, 2, 3)
    assert not is_triplet(LAWVERE, 10, 1, 2)
    assert is_triplet(LAWVERE, 0, 0, 0)


def test_two_triplets_by_enumeration():
    # with AND, (x, y, z) is asymmetric iff y and z force x
    for x, y, z in itertools.product((0, 1), repeat=3):
        assert is_asym_triplet(TWO, x, y, z) == (min(y, z) <= x)


@given(extreals, extreals, extreals)
def test_lawvere_triplet_is_triangle_inequality(a, b, c):
    assert is_asym_triplet(LAWVERE, a, b, c) == (a <= b + c)


def _table(pts, d):
    return VCat(pts, {(x, y): (ZERO if x == y else d[(x, y)]) for x in pts for y in pts})


def test_vcat_unit_everywhere():
    pts = ("a", "b")
    c = VCat(pts, {(x, y): ZERO for x in pts for y in pts})
    assert vcat_check(LAWVERE, c) == []
    assert [v.axiom for v in vcat_check(LAWVERE, c, separated=True)] == ["separated"]


def test_vcat_metric_table():
    pts = ("a", "b", "c")
    d = {("a", "b"): 1, ("b", "a"): 1, ("b", "c"): 2, ("c", "b"): 2, ("a", "c"): 3, ("c", "a"): 3}
    assert vcat_check(LAWVERE, _table(pts, {k: ExtReal(v) for k, v in d.items()}),
                      separated=True, symmetric=True) == []


def test_vcat_vc2_reported_at_x_z_y():
    pts = ("x", "y", "z")
    d = {k: ZERO for k in itertools.permutations(pts, 2)}
    d[("x", "y")] = ExtReal(1)
    d[("x", "z")] = d[("z", "y")] = ExtReal("1/4")
    out = vcat_check(LAWVERE, _table(pts, d))
    assert [(v.axiom, v.points) for v in out] == [("VC2", ("x", "z", "y"))]


def test_vcat_vc1():
    c = VCat(("a",), {("a", "a"): ExtReal(1)})
    assert [v.axiom for v in vcat_check(LAWVERE, c)] == ["VC1"]


@st.composite
def small_tables(draw):
    pts = ("a", "b", "c")[: draw(st.integers(1, 3))]
    d = {k: draw(st.sampled_from([ZERO, ExtReal(1), ExtReal(2), ExtReal(3), INF]))
         for k in itertools.permutations(pts, 2)}
    return _table(pts, d)


@given(small_tables(), small_tables())
def test_product_category_valid_iff_components(c1, c2):
    prod = vcat_product([c1, c2])
    q = Product.power(LAWVERE, 2)
    ok = not vcat_check(LAWVERE, c1) and not vcat_check(LAWVERE, c2)
    assert (not vcat_check(q, prod)) == ok


@given(small_tables())
def test_diagonal_components(c):
    diag = vcat_diagonal([c, c])
    assert vcat_component(diag, 0).hom == c.hom
    assert bool(vcat_check(Product.power(LAWVERE, 2), diag)) == bool(vcat_check(LAWVERE, c))
