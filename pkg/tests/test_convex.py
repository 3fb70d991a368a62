from fractions import Fraction as F

import pytest

from demonic_ol.convex import (
    ConvexSet, GeneratorCapExceeded, amp, hull_equal, hull_leq, kleisli, member, oplus, smyth_leq, unit,
)
from demonic_ol.dist import Dist, dirac, mix
from demonic_ol.lang import BOT, State

A, B, C = (State(("x",), (F(k),)) for k in range(3))


def test_unit_and_residual():
    assert unit(A).residual == 0
    assert unit(BOT).residual == 1
    assert unit(BOT).minterm() == 0


def test_membership_includes_mixtures_and_up_closure():
    S = ConvexSet([dirac(A), dirac(B)])
    assert member(S, mix(F(1, 3), dirac(A), dirac(B)))
    assert not member(S, dirac(C))
    half = ConvexSet([Dist({A: F(1, 2), BOT: F(1, 2)})])
    # bottom mass may move onto any state
    assert member(half, Dist({A: F(1, 2), C: F(1, 2)}))
    assert member(half, dirac(A))
    assert not member(half, dirac(C))


def test_redundant_generators_are_pruned():
    S = ConvexSet([dirac(A), dirac(B), mix(F(1, 2), dirac(A), dirac(B))])
    assert len(S) == 2
    T = ConvexSet([Dist({A: F(1, 2), BOT: F(1, 2)}), dirac(A)])
    assert len(T) == 1  # dirac(A) lies above the other generator


def test_oplus_and_amp():
    S, T = unit(A), unit(B)
    assert set(oplus(S, F(1, 4), T).gens) == {Dist({A: F(1, 4), B: F(3, 4)})}
    assert oplus(S, 1, T) is S
    both = amp(S, T)
    assert hull_equal(both, ConvexSet([dirac(B), dirac(A)]))
    with pytest.raises(ValueError):
        oplus(S, F(3, 2), T)


def test_kleisli_is_sequencing():
    f = {A: amp(unit(B), unit(C)), B: unit(C), C: unit(C)}
    S = ConvexSet([mix(F(1, 2), dirac(A), dirac(B))])
    R = kleisli(f.__getitem__, S)
    want = ConvexSet([mix(F(1, 2), dirac(B), dirac(C)), dirac(C)])
    assert hull_equal(R, want)
    # bottom is absorbing
    assert kleisli(f.__getitem__, unit(BOT)).residual == 1


def test_kleisli_choice_per_point_not_per_distribution():
    # each support point picks its own resolution: 2 x 2 = 4 generators
    f = {A: amp(unit(A), unit(B)), C: amp(unit(A), unit(B))}
    S = ConvexSet([mix(F(1, 2), dirac(A), dirac(C))])
    R = kleisli(f.__getitem__, S)
    assert member(R, mix(F(1, 2), dirac(A), dirac(B)))
    assert member(R, dirac(A)) and member(R, dirac(B))


def test_generator_cap():
    with pytest.raises(GeneratorCapExceeded):
        amp(amp(unit(A), unit(B)), unit(C), cap=2)
    f = {A: amp(unit(A), amp(unit(B), unit(C)))}
    with pytest.raises(GeneratorCapExceeded):
        kleisli(f.__getitem__, unit(A), cap=2)
    assert len(kleisli(f.__getitem__, unit(A), cap=3)) == 3


def test_orders():
    small = ConvexSet([dirac(A)])
    big = ConvexSet([dirac(A), dirac(B)])
    assert hull_leq(small, big) and not hull_leq(big, small)
    assert smyth_leq(big, small)  # fewer outcomes is more refined
    assert smyth_leq(unit(BOT), big)  # divergence is the least element
