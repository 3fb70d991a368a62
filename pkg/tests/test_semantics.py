from fractions import Fraction as F

import pytest

from demonic_ol.convex import ConvexSet, hull_equal, member
from demonic_ol.dist import Dist, dirac, mix
from demonic_ol.lang import BOT, State
from demonic_ol.parser import parse_cmd, parse_exp, parse_program
from demonic_ol.semantics import (
    ProbabilityRangeError, StateSpaceEscape, denote, denote_dist, loop_iterate, min_termination_prob,
    minterm_until,
)


def s(**kw):
    return State.from_mapping(kw)


def run(text, **start):
    return denote(parse_cmd(text), s(**start))


def test_straight_line():
    r = run("x := x + 1; y := x * 2", x=1, y=0)
    assert r.exact and r.residual_bound == 0
    assert r.value.gens == (dirac(s(x=2, y=4)),)


def test_choice_order_matters():
    def agree(t):
        return t["x"] == t["y"]
    # flip first: the adversary sees x and decides agreement outright
    flip_first = run("x := flip(1/2); y <- bool", x=False, y=False)
    assert {g.prob(agree) for g in flip_first.value.gens} == {F(0), F(1, 2), F(1)}
    assert member(flip_first.value, Dist({s(x=True, y=False): F(1, 2), s(x=False, y=True): F(1, 2)}))
    # choose first: the later flip is out of the adversary's reach
    adv_first = run("y <- bool; x := flip(1/2)", x=False, y=False)
    assert {g.prob(agree) for g in adv_first.value.gens} == {F(1, 2)}


def test_prob_choice_weights_are_expressions():
    r = run("x := 1 (+ p) x := 2", p=F(1, 3), x=0)
    assert r.value.gens == (Dist({s(p=F(1, 3), x=1): F(1, 3), s(p=F(1, 3), x=2): F(2, 3)}),)
    with pytest.raises(ProbabilityRangeError):
        run("x := 1 (+ p) x := 2", p=2, x=0)


def test_divergence_is_bottom():
    r = run("while true do skip", x=0)
    assert r.residual_bound == 1 and not r.exact
    assert r.value.gens == (dirac(BOT),)


def test_terminating_loop_is_exact():
    r = run("while x > 0 do x := x - 1", x=5)
    assert r.exact and r.value.gens == (dirac(s(x=0)),)


def test_budget_cut_is_not_exact():
    text = "while x = 0 do (x := 1 (+ 1/2) skip)"
    cut = denote(parse_cmd(text), s(x=0), budget=4)
    assert cut.residual_bound == F(1, 8) and not cut.exact and not cut.stabilized
    assert denote(parse_cmd(text), s(x=0), budget=64).residual_bound == F(1, 2) ** 63


def test_demonic_loop_keeps_every_scheduler():
    # the adversary may stop after any number of rounds or never
    r = run("while x < 2 do (x := x + 1 & x := 0)", x=0)
    assert member(r.value, dirac(s(x=2)))
    assert member(r.value, dirac(BOT))


def test_denote_dist_lifts_over_support():
    c = parse_cmd("x := x + 1")
    mu = mix(F(1, 4), dirac(s(x=0)), dirac(s(x=5)))
    r = denote_dist(c, mu)
    assert r.value.gens == (mix(F(1, 4), dirac(s(x=1)), dirac(s(x=6))),)


def test_von_neumann_residual_is_five_eighths_per_round():
    p = parse_program(open(_corpus("von_neumann.dol")).read())
    *_, loop = _parts(p)
    start = s(x=False, y=False, p=F(1, 4))
    for n in range(6):
        r = loop_iterate(loop.body, loop.guard, n + 1, start, budget=12)
        assert r.residual == F(5, 8) ** n


def test_minterm_resetting_walk():
    p = parse_program(open(_corpus("resetting_walk.dol")).read())
    *_, loop = _parts(p)
    tab = min_termination_prob(loop.body, loop.guard, p.states(), 5)
    assert tab[s(x=5)] == F(1, 32)
    assert tab[s(x=0)] == 1
    assert tab.iterations == 5
    done = minterm_until(loop.body, loop.guard, p.states(), F(1, 2), 1000)
    assert done.min() >= F(1, 2)
    assert min_termination_prob(loop.body, loop.guard, p.states(), 0)[s(x=1)] == 0


def test_minterm_escape():
    p = parse_program("var x in {0..3} = 0\nwhile x < 3 do x := x + 2")
    with pytest.raises(StateSpaceEscape):
        min_termination_prob(p.body.body, p.body.guard, p.states(), 3)


def test_hull_equal_ignores_generator_order():
    a = run("x := 1 & x := 2", x=0).value
    b = run("x := 2 & x := 1", x=0).value
    assert hull_equal(a, b)
    assert isinstance(a, ConvexSet)


def _corpus(name):
    from pathlib import Path
    return Path(__file__).parent.parent / "src" / "demonic_ol" / "corpus" / name


def _parts(p):
    from demonic_ol.lang import flatten_seq
    return flatten_seq(p.body)
