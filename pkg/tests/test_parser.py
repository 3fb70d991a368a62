from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from demonic_ol.assertions import Almost, Amp, And, Bot, OPlus, Top
from demonic_ol.lang import Assign, BinOp, Iverson, Lit, NDChoice, ProbChoice, Seq, Skip, Var, While, If
from demonic_ol.parser import (
    ParseError, parse_assertion, parse_bindings, parse_cmd, parse_exp, parse_program, print_assertion,
    print_cmd, print_exp,
)


def test_three_spellings_of_probabilistic_choice():
    want = parse_cmd("x := 1 (+ 1/2) x := 2")
    assert isinstance(want, ProbChoice)
    assert parse_cmd("x := 1 +[1/2] x := 2") == want
    assert parse_cmd("x := 1 ⊕[1/2] x := 2") == want


def test_plus_bracket_needs_a_space_for_iverson_addition():
    c = parse_cmd("x := y + [y > 0]")
    assert c == Assign("x", BinOp("+", Var("y"), Iverson(BinOp(">", Var("y"), Lit(F(0))))))
    with pytest.raises(ParseError):
        parse_cmd("x := y +[y > 0]")


def test_sugar_expands_to_core_nodes():
    assert parse_cmd("x <- {1, 2}") == NDChoice(Assign("x", Lit(F(1))), Assign("x", Lit(F(2))))
    assert parse_cmd("x <- bool") == parse_cmd("x := true & x := false")
    assert parse_cmd("x := flip(1/3)") == parse_cmd("x := true (+ 1/3) x := false")
    assert print_cmd(parse_cmd("v[2] := true")) == "v := v[2 -> true]"
    assert parse_cmd("x ← 0..2") == parse_cmd("x <- {0, 1, 2}")


def test_precedence_of_commands():
    c = parse_cmd("a := 1; b := 1 & b := 2 (+ 1/2) b := 3")
    assert isinstance(c, Seq)
    assert isinstance(c.second, NDChoice)
    assert isinstance(c.second.right, ProbChoice)
    w = parse_cmd("while x > 0 do x := x - 1; y := 1")
    assert isinstance(w, Seq) and isinstance(w.first, While)
    i = parse_cmd("if b then x := 1")
    assert isinstance(i, If) and isinstance(i.orelse, Skip)


def test_precedence_of_assertions():
    a = parse_assertion("[p] /\\ [q] (+ 1/2) [r] & T")
    assert isinstance(a, Amp)
    assert isinstance(a.left, OPlus) and isinstance(a.left.left, And)
    assert isinstance(a.right, Top)
    assert parse_assertion("⌈p⌉ ⊕[1/3] ⌈q⌉") == parse_assertion("[p] (+ 1/3) [q]")
    assert parse_assertion("F") == Bot()
    assert parse_assertion("[x = 1]") == Almost(parse_exp("x = 1"))


def test_assertion_probability_must_be_constant():
    with pytest.raises(ParseError):
        parse_assertion("[p] (+ x) [q]")
    with pytest.raises(ParseError):
        parse_assertion("[p] (+ 3/2) [q]")


def test_program_declarations_defs_and_macros():
    p = parse_program("""
        // comment
        var x in {0..3} = 2, xs in bool^2
        def K = 3
        def inc(a) = a + 1
        macro Step = { x := inc(x) }
        while x < K do Step
    """)
    assert p.variables == ("x", "xs")
    assert p.defaults["x"] == 2
    assert len(p.domains["xs"]) == 4
    assert p.body == parse_cmd("while x < 3 do x := x + 1")


def test_macro_expansion_gives_fresh_nodes():
    p = parse_program("var x in bool\nmacro M = { x := true }\nM; M")
    assert p.body.first == p.body.second
    assert p.body.first is not p.body.second


def test_errors_carry_positions():
    with pytest.raises(ParseError) as e:
        parse_program("var x in bool\nx := ;")
    assert (e.value.line, e.value.col) == (2, 6)
    with pytest.raises(ParseError, match="duplicate"):
        parse_program("var x, x\nskip")
    with pytest.raises(ParseError, match="cannot assign"):
        parse_program("def K = 1\nK := 2")
    with pytest.raises(ParseError, match="empty range"):
        parse_cmd("x <- 3..1")


def test_bindings():
    assert parse_bindings("x = 1, b = true") == {"x": F(1), "b": True}
    assert parse_bindings("") == {}


# ---------------------------------------------------------------------------
# print/parse round trips

names = st.sampled_from(["x", "y", "b"])
consts = st.fractions(min_value=-3, max_value=3, max_denominator=4)


def exps(depth=2):
    base = st.one_of(names.map(Var), consts.map(Lit), st.booleans().map(Lit))
    if depth == 0:
        return base
    sub = exps(depth - 1)
    ops = st.sampled_from(["+", "-", "*", "=", "!=", "<", "<=", "and", "or"])
    return st.one_of(base, st.builds(BinOp, ops, sub, sub), sub.map(Iverson))


def cmds(depth=2):
    base = st.one_of(st.just(Skip()), st.builds(Assign, names, exps(1)))
    if depth == 0:
        return base
    sub = cmds(depth - 1)
    probs = st.fractions(min_value=0, max_value=1, max_denominator=8).map(Lit)
    return st.one_of(
        base,
        st.builds(Seq, sub, sub),
        st.builds(NDChoice, sub, sub),
        st.builds(ProbChoice, probs, sub, sub),
        st.builds(If, exps(1), sub, sub),
        st.builds(While, exps(1), sub),
    )


@settings(max_examples=300)
@given(exps(3))
def test_expression_round_trip(e):
    # negative literals may be re-associated, so compare printed forms
    assert print_exp(parse_exp(print_exp(e))) == print_exp(e)


@settings(max_examples=300)
@given(cmds(3))
def test_command_round_trip(c):
    text = print_cmd(c)
    assert print_cmd(parse_cmd(text)) == text


def assertions(depth=2):
    base = st.one_of(st.just(Top()), st.just(Bot()), exps(1).map(Almost))
    if depth == 0:
        return base
    sub = assertions(depth - 1)
    probs = st.fractions(min_value=0, max_value=1, max_denominator=8)
    return st.one_of(base, st.builds(And, sub, sub), st.builds(Amp, sub, sub), st.builds(OPlus, probs, sub, sub))


@settings(max_examples=300)
@given(assertions(3))
def test_assertion_round_trip(a):
    text = print_assertion(a)
    assert print_assertion(parse_assertion(text)) == text
