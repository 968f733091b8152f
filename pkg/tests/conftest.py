from __future__ import annotations

from fractions import Fraction

from hypothesis import strategies as st

from modagg import nabla
from modagg.extreal import INF, ExtReal

small_fractions = st.builds(Fraction, st.integers(0, 40), st.integers(1, 8))

finite = small_fractions.map(ExtReal)
extreals = st.one_of(finite, st.just(INF))
times = st.builds(Fraction, st.integers(1, 64), st.integers(1, 4))


@st.composite
def stepfns(draw, max_pieces: int = 5, allow_inf: bool = True):
    m = draw(st.integers(0, max_pieces - 1))
    bps = sorted(draw(st.sets(times, min_size=m, max_size=m)))
    vals = draw(st.lists(extreals if allow_inf else finite, min_size=len(bps) + 1, max_size=len(bps) + 1))
    return nabla.canonicalize(bps, sorted(vals, reverse=True))


def vectors(n: int):
    return st.tuples(*[extreals] * n)
