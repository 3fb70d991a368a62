from fractions import Fraction as F

import pytest
import yaml

from conftest import corpus_program, corpus_text
from demonic_ol.corpus_runner import _loop
from demonic_ol.parser import parse_program
from demonic_ol.proof import ProofScriptError, Triple, check_script, check_triple_exhaustive, load_script
from demonic_ol.parser import parse_assertion, parse_cmd
from demonic_ol.semantics import min_termination_prob


def edited(name, **changes):
    """A corpus script with payload fields of the first loop-rule node replaced."""
    doc = yaml.safe_load(corpus_text(name))

    def visit(node):
        if node.get("rule") in ("ZeroOne", "BoundedVariant", "BoundedRank", "ProgressingRank"):
            for k, v in changes.items():
                if v is None:
                    node.pop(k, None)
                else:
                    node[k] = v
            return True
        return any(visit(p) for p in node.get("premises", ()))

    assert visit(doc["proof"])
    return yaml.safe_dump(doc, allow_unicode=True)


def test_nondet_misuse_rejected_at_that_node():
    p = corpus_program("coin_flip_first")
    bad = check_script(corpus_text("coin_misuse.proof.yaml"), p)
    assert not bad.accepted
    assert [(n.path, n.rule) for n in bad.rejected_nodes] == [("root/0", "Nondet")]
    assert "not a basic assertion" in bad.node("root/0").reason
    good = check_script(corpus_text("coin_corrected.proof.yaml"), p)
    assert good.accepted and good.exit_code() == 0


def test_constancy_frame_must_not_mention_modified_variables():
    p = parse_program("var x in {0..2}, y in {0..2}\nx := 1")
    ok = """
proof:
  rule: Constancy
  pre: "[true] /\\\\ [y = 2]"
  post: "[x = 1] /\\\\ [y = 2]"
  frame: "y = 2"
  premises: [{rule: Assign, pre: "[true]"}]
"""
    assert check_script(ok, p).accepted
    mutated = ok.replace("y = 2", "x = 0")
    r = check_script(mutated, p)
    assert not r.accepted
    assert "modified variable(s) x" in r.rejected_nodes[0].reason


def test_bounded_variant_overclaim():
    p = corpus_program("von_neumann")
    r = check_script(corpus_text("von_neumann_overclaim.proof.yaml"), p, budget=12)
    assert [n.path for n in r.rejected_nodes] == ["root/1/0"]
    assert "variant 1 premise fails" in r.rejected_nodes[0].reason
    assert "counterexample" in r.rejected_nodes[0].reason or "violates" in r.rejected_nodes[0].reason


def test_zero_one_needs_positive_probability():
    p = corpus_program("von_neumann")
    assert check_script(corpus_text("von_neumann_zero_one.proof.yaml"), p, budget=12).accepted
    r = check_script(edited("von_neumann_zero_one.proof.yaml", p=0), p, budget=12)
    assert not r.accepted and "must be positive" in r.rejected_nodes[0].reason
    # p bounds termination of the whole loop, which here is almost sure
    r = check_script(edited("von_neumann_zero_one.proof.yaml", p="99/100"), p, budget=12)
    assert r.accepted
    term = [o for o in r.obligations if o.kind == "termination"]
    assert [o.status for o in term] == ["discharged"]


def test_divergent_loop_fails_termination():
    p = parse_program("var x in {0, 1} = 0\nwhile x = 0 do skip")
    script = """
proof:
  rule: ZeroOne
  pre: "[x = 0]"
  post: "[x = 1]"
  inv: "[x = 0]"
  exit: "[x = 1]"
  p: 1/2
"""
    r = check_script(script, p)
    assert not r.accepted
    assert any(o.kind == "termination" and o.status == "failed" for o in r.obligations)


def test_progressing_rank_step_too_large():
    p = corpus_program("fair_walk")
    assert check_script(corpus_text("fair_walk.proof.yaml"), p).accepted
    r = check_script(edited("fair_walk.proof.yaml", d=2), p)
    assert not r.accepted and "rank 1 premise fails" in r.rejected_nodes[0].reason


def test_progressing_rank_table_matches_constant():
    p = corpus_program("fair_walk")
    table = {k: ["1/2", 1] for k in range(1, 21)}
    r = check_script(edited("fair_walk.proof.yaml", table=table, p=None, d=None), p)
    const = check_script(corpus_text("fair_walk.proof.yaml"), p)
    assert r.accepted == const.accepted is True
    assert [o.status for o in r.obligations] == [o.status for o in const.obligations]
    table[5] = ["3/4", 1]
    r = check_script(edited("fair_walk.proof.yaml", table=table, p=None, d=None), p)
    assert not r.accepted and "antitone" in r.rejected_nodes[0].reason


def test_progressing_rank_premise_for_every_k():
    p = corpus_program("fair_walk")
    _, w = _loop(p)
    for k in range(1, 21):
        t = Triple(parse_assertion(f"[x = {k}]", p), w.body,
                   parse_assertion(f"[0 <= x <= {k - 1}] (+ 1/2) [0 <= x <= {k + 1}]", p))
        assert check_triple_exhaustive(t, p).status == "discharged", k


def test_bounded_rank_bound_failure():
    p = corpus_program("resetting_walk")
    assert check_script(corpus_text("resetting_walk.proof.yaml"), p).accepted
    r = check_script(edited("resetting_walk.proof.yaml", hi=4), p)
    assert not r.accepted
    assert any(o.kind == "rank bound" and o.status == "failed" for o in r.obligations)


def test_bounded_rank_acceptance_agrees_with_value_iteration():
    p = corpus_program("resetting_walk")
    _, w = _loop(p)
    tab = min_termination_prob(w.body, w.guard, p.states(), 808)
    assert tab.min() > 1 - F(1, 10 ** 6)
    assert min_termination_prob(w.body, w.guard, p.states(), 807).min() <= 1 - F(1, 10 ** 6)


def test_open_obligations_and_strict_mode():
    p = parse_program("var x = 0\nx := x + 1")
    script = """
proof:
  rule: Consequence
  pre: "[x = 0]"
  post: "[x >= 1]"
  premises: [{rule: Assign, pre: "[x + 1 >= 1]"}]
"""
    r = check_script(script, p)
    assert r.accepted and r.open_obligations == 1
    assert r.exit_code() == 2 and r.exit_code(strict=True) == 1
    assert r.summary(strict=True).startswith("REJECTED (strict)")


def test_script_errors():
    p = corpus_program("resetting_walk")
    with pytest.raises(ProofScriptError):
        load_script("proof: {rule: Frobnicate}", p)
    with pytest.raises(ProofScriptError):
        load_script("defs: {a: $b, b: $a}\nproof: {rule: Skip, pre: $a}", p)
    with pytest.raises(ProofScriptError):
        load_script("nothing: here", p)


def test_coin_game_asymmetry():
    p = corpus_program("coin_adversary_first")
    r = check_script(corpus_text("coin_adversary_first.proof.yaml"), p)
    assert r.accepted and r.open_obligations == 0
    assert r.conclusion.post == parse_assertion("[x = y] (+ 1/2) [x != y]")
    q = corpus_program("coin_flip_first")
    t = Triple(parse_assertion("[true]"), q.body, parse_assertion("[x = y] (+ 1/2) [x != y]"))
    ob = check_triple_exhaustive(t, q)
    assert ob.status == "failed"
    assert "violates" in ob.detail
