from fractions import Fraction as F

import pytest

from demonic_ol.dist import Dist, DistError, convex_combine, dirac, dist_leq, mix, terminating_part, uniform
from demonic_ol.lang import BOT, State


def test_mass_must_be_one():
    with pytest.raises(DistError):
        Dist({"a": F(1, 2)})
    with pytest.raises(DistError):
        Dist({"a": F(3, 2), "b": F(-1, 2)})


def test_zero_weights_dropped_and_equality():
    assert Dist({"a": 1, "b": 0}) == dirac("a")
    assert len(Dist({"a": F(1, 2), "b": F(1, 2)})) == 2
    assert hash(Dist({"a": F(1, 2), "b": F(1, 2)})) == hash(uniform(["b", "a"]))


def test_bottom_and_terminating_part():
    mu = Dist({"a": F(1, 4), BOT: F(3, 4)})
    assert mu.bottom == F(3, 4)
    assert mu.proper_support() == ["a"]
    assert terminating_part(mu) == ({"a": F(1, 4)}, F(3, 4))
    assert mu.prob(lambda x: True) == F(1, 4)


def test_mixing():
    a, b = dirac("a"), dirac("b")
    assert mix(F(1, 3), a, b) == Dist({"a": F(1, 3), "b": F(2, 3)})
    assert mix(F(1), a, b) == a
    with pytest.raises(DistError):
        convex_combine([F(1, 2)], [a, b])
    with pytest.raises(DistError):
        convex_combine([F(2), F(-1)], [a, b])


def test_pointwise_order_ignores_bottom():
    lo = Dist({"a": F(1, 2), BOT: F(1, 2)})
    hi = Dist({"a": F(1, 2), "b": F(1, 2)})
    assert dist_leq(lo, hi)
    assert not dist_leq(hi, lo)


def test_dump_is_canonical():
    a, b = State(("x",), (F(0),)), State(("x",), (F(1),))
    one = Dist({b: F(1, 2), a: F(1, 2), BOT: F(0)}).dump()
    assert one == Dist({a: F(1, 2), b: F(1, 2)}).dump()
    assert one.splitlines()[0].startswith("{x=0}")
