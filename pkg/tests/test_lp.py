"""Exact simplex against brute-force enumeration of basic solutions."""

import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from demonic_ol import lp


def _solve(a, b):
    """Gauss-Jordan over Fractions; None if singular."""
    n = len(a)
    m = [list(map(F, row)) + [F(v)] for row, v in zip(a, b)]
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return None
        m[c], m[piv] = m[piv], m[c]
        for r in range(n):
            if r != c and m[r][c]:
                f = m[r][c] / m[c][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return [m[i][-1] / m[i][i] for i in range(n)]


def basic_solutions(nvars, eqs, ubs):
    """All basic feasible solutions of the standard form, projected to the first nvars."""
    rows = [([row.get(j, 0) for j in range(nvars)] + [0] * len(ubs), rhs) for row, rhs in eqs]
    for k, (row, rhs) in enumerate(ubs):
        slack = [0] * len(ubs)
        slack[k] = 1
        rows.append(([row.get(j, 0) for j in range(nvars)] + slack, rhs))
    ncols = nvars + len(ubs)
    a = [r for r, _ in rows]
    b = [v for _, v in rows]
    # drop linearly dependent rows by trying every row subset of full rank
    out = set()
    for rsub in range(len(a), 0, -1):
        for rows_idx in itertools.combinations(range(len(a)), rsub):
            for cols in itertools.combinations(range(ncols), rsub):
                sol = _solve([[a[i][j] for j in cols] for i in rows_idx], [b[i] for i in rows_idx])
                if sol is None or any(v < 0 for v in sol):
                    continue
                x = [F(0)] * ncols
                for j, v in zip(cols, sol):
                    x[j] = v
                if all(sum(F(ai) * xi for ai, xi in zip(row, x)) == bi for row, bi in zip(a, b)):
                    out.add(tuple(x[:nvars]))
        if out:
            break
    if not a:
        out.add(tuple(F(0) for _ in range(nvars)))
    return out


coef = st.integers(-3, 3)


@st.composite
def systems(draw):
    n = draw(st.integers(2, 4))
    neq = draw(st.integers(0, 2))
    nub = draw(st.integers(0, 2))
    eqs = [({j: draw(coef) for j in range(n)}, draw(st.integers(0, 4))) for _ in range(neq)]
    ubs = [({j: draw(coef) for j in range(n)}, draw(st.integers(0, 4))) for _ in range(nub)]
    # keep the region bounded so vertices and minima exist
    ubs.append(({j: 1 for j in range(n)}, 6))
    return n, eqs, ubs


@settings(max_examples=200)
@given(systems())
def test_feasibility_matches_brute_force(sys):
    n, eqs, ubs = sys
    x = lp.feasible(n, eqs, ubs)
    assert (x is not None) == bool(basic_solutions(n, eqs, ubs))
    if x is not None:
        assert all(v >= 0 for v in x)
        for row, rhs in eqs:
            assert sum(F(c) * x[j] for j, c in row.items()) == rhs
        for row, rhs in ubs:
            assert sum(F(c) * x[j] for j, c in row.items()) <= rhs


@settings(max_examples=200)
@given(systems(), st.lists(coef, min_size=4, max_size=4))
def test_minimum_matches_brute_force(sys, cost):
    n, eqs, ubs = sys
    c = {j: cost[j] for j in range(n)}
    r = lp.minimize(n, c, eqs, ubs)
    bfs = basic_solutions(n, eqs, ubs)
    if not bfs:
        assert r is None
        return
    best = min(sum(c[j] * v[j] for j in range(n)) for v in bfs)
    assert r[0] == best
    assert sum(c[j] * r[1][j] for j in range(n)) == best


@settings(max_examples=150)
@given(systems())
def test_vertices_match_brute_force(sys):
    n, eqs, ubs = sys
    got = set(lp.vertices(n, eqs, ubs))
    assert got == basic_solutions(n, eqs, ubs)


def test_unbounded_objective_raises():
    with pytest.raises(lp.LPError):
        lp.minimize(2, {0: -1}, eqs=[({0: 1, 1: -1}, 0)])


def test_results_are_fractions():
    x = lp.feasible(2, eqs=[({0: 3, 1: 3}, 1)])
    assert all(type(v) is F for v in x)
    assert sum(x) == F(1, 3)
