"""Denotational semantics, loop iterates and minimum termination probabilities.

``denote`` maps a command and a start state to a :class:`ConvexSet`.  While
loops are approximated by the ``budget``-th Kleene iterate starting from the
everywhere-divergent function; when successive iterates agree on every
reachable state the chain has stabilised and the result is its limit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .convex import DEFAULT_CAP, ConvexSet, amp, hull_equal, kleisli, oplus, unit
from .dist import Dist
from .lang import (
    BOT, Assign, Cmd, EvalTypeError, Exp, If, NDChoice, Not, ProbChoice, Seq, Skip, State,
    While, eval_exp, format_value,
)

DEFAULT_BUDGET = 64
REACH_CAP = 4096


class SemanticsError(RuntimeError):
    pass


class ProbabilityRangeError(SemanticsError):
    """A probabilistic choice evaluated its weight outside [0,1]."""


class StateSpaceEscape(SemanticsError):
    """A reachable state lies outside the declared finite state space."""


@dataclass(frozen=True)
class DenoteResult:
    value: ConvexSet
    residual_bound: Fraction
    exact: bool
    stabilized: bool = True

    def dump(self) -> str:
        head = f"residual {format_value(self.residual_bound)}\texact {str(self.exact).lower()}"
        return head + "\n" + self.value.dump()


def _guard(e: Exp, s: State) -> bool:
    v = eval_exp(e, s)
    if not isinstance(v, bool):
        raise EvalTypeError(f"guard evaluated to non-boolean {format_value(v)}")
    return v


def _prob(e: Exp, s: State) -> Fraction:
    v = eval_exp(e, s)
    if not isinstance(v, Fraction) or not 0 <= v <= 1:
        shown = format_value(v)
        raise ProbabilityRangeError(f"probability {shown} outside [0,1] in state {s!r}")
    return v


class Denoter:
    """Memoising evaluator for one program run.

    Caches are keyed by AST node identity, so a Denoter must not outlive the
    AST it was used with.  ``stable`` turns false as soon as some loop was
    cut off by the budget before its iterates stabilised.
    """

    def __init__(self, budget: int = DEFAULT_BUDGET, cap: int = DEFAULT_CAP):
        if budget < 0:
            raise ValueError("budget must be nonnegative")
        self.budget = budget
        self.cap = cap
        self.stable = True
        self._memo: dict = {}
        self._loop_tables: dict = {}
        self._keep: list = []

    def __call__(self, c: Cmd, s: State) -> ConvexSet:
        return self.den(c, s)

    def den(self, c: Cmd, s) -> ConvexSet:
        if s is BOT:
            return unit(BOT)
        key = (id(c), s)
        r = self._memo.get(key)
        if r is not None:
            return r
        r = self._den(c, s)
        self._memo[key] = r
        self._keep.append(c)
        return r

    def _den(self, c: Cmd, s: State) -> ConvexSet:
        if isinstance(c, Skip):
            return unit(s)
        if isinstance(c, Assign):
            return unit(s.set(c.var, eval_exp(c.exp, s)))
        if isinstance(c, Seq):
            first = self.den(c.first, s)
            second = c.second
            return kleisli(lambda t: self.den(second, t), first, cap=self.cap)
        if isinstance(c, NDChoice):
            return amp(self.den(c.left, s), self.den(c.right, s), cap=self.cap)
        if isinstance(c, ProbChoice):
            p = _prob(c.prob, s)
            if p == 1:
                return self.den(c.left, s)
            if p == 0:
                return self.den(c.right, s)
            return oplus(self.den(c.left, s), p, self.den(c.right, s), cap=self.cap)
        if isinstance(c, If):
            return self.den(c.then if _guard(c.guard, s) else c.orelse, s)
        if isinstance(c, While):
            return self.iterate(c, self.budget, s)
        raise TypeError(f"not a command: {c!r}")

    # -- loops ------------------------------------------------------------
    def _reachable(self, w: While, s: State) -> list | None:
        seen = {s}
        order = [s]
        i = 0
        while i < len(order):
            t = order[i]
            i += 1
            if not _guard(w.guard, t):
                continue
            for g in self.den(w.body, t).gens:
                for u in g:
                    if u is not BOT and u not in seen:
                        seen.add(u)
                        order.append(u)
                        if len(order) > REACH_CAP:
                            return None
        return order

    def iterate(self, w: While, n: int, s: State) -> ConvexSet:
        """``Φⁿ(⊥)(s)`` for the loop ``w``."""
        if n == 0:
            return unit(BOT)
        if not _guard(w.guard, s):
            return unit(s)
        # iterates at s only depend on states reachable from s, so a table
        # built for another start state can be reused when it covers s
        for reach_set, table, ok in self._loop_tables.get((id(w), n), ()):
            if s in reach_set:
                if not ok:
                    self.stable = False
                return table[s]
        reach = self._reachable(w, s)
        if reach is None:
            return self._iterate_lazy(w, n, s, {})
        table = {t: unit(BOT) for t in reach}
        body_sets = {t: self.den(w.body, t) for t in reach if _guard(w.guard, t)}
        stabilized = False
        for _ in range(n):
            new = {}
            step: dict = {}  # states whose body denotations coincide share the result
            for t in reach:
                if t in body_sets:
                    key = body_sets[t].gens
                    r = step.get(key)
                    if r is None:
                        r = kleisli(table.__getitem__, body_sets[t], cap=self.cap)
                        step[key] = r
                    new[t] = r
                else:
                    new[t] = unit(t)
            if all(_same(new[t], table[t]) for t in reach):
                stabilized = True
                table = new
                break
            table = new
        if not stabilized:
            self.stable = False
        self._loop_tables.setdefault((id(w), n), []).append((set(reach), table, stabilized))
        self._keep.append(w)
        return table[s]

    def _iterate_lazy(self, w: While, n: int, s: State, memo: dict) -> ConvexSet:
        self.stable = False
        key = (n, s)
        r = memo.get(key)
        if r is not None:
            return r
        if not _guard(w.guard, s):
            r = unit(s)
        elif n == 0:
            r = unit(BOT)
        else:
            r = kleisli(lambda t: self._iterate_lazy(w, n - 1, t, memo), self.den(w.body, s), cap=self.cap)
        memo[key] = r
        return r


def _same(a: ConvexSet, b: ConvexSet) -> bool:
    if set(a.gens) == set(b.gens):
        return True
    if a.residual != b.residual:  # equal sets have equal worst-case divergence
        return False
    return hull_equal(a, b)


def _result(value: ConvexSet, stable: bool) -> DenoteResult:
    res = value.residual
    exact = res == 0 or (stable and res < 1)
    return DenoteResult(value, res, exact, stable)


def denote(c: Cmd, s: State, budget: int = DEFAULT_BUDGET, cap: int = DEFAULT_CAP) -> DenoteResult:
    d = Denoter(budget, cap)
    return _result(d.den(c, s), d.stable)


def denote_dist(c: Cmd, mu: Dist, budget: int = DEFAULT_BUDGET, cap: int = DEFAULT_CAP) -> DenoteResult:
    """``⟦C⟧†(↑μ)`` as a denotation result."""
    d = Denoter(budget, cap)
    value = kleisli(lambda t: d.den(c, t), ConvexSet([mu], prune=False), cap=cap)
    return _result(value, d.stable)


def loop_iterate(body: Cmd, guard: Exp, n: int, s: State, cap: int = DEFAULT_CAP,
                 budget: int = DEFAULT_BUDGET) -> ConvexSet:
    """``Φⁿ(⊥)(s)`` for ``while guard do body``; ``budget`` bounds inner loops."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    d = Denoter(budget, cap)
    return d.iterate(While(guard, body), n, s)


# ---------------------------------------------------------------------------
# Minimum termination probability by value iteration


@dataclass(frozen=True)
class MintermTable:
    """Value-iteration bounds: ``values[σ]`` after ``iterations`` body runs."""

    values: Mapping
    iterations: int

    def __getitem__(self, s: State) -> Fraction:
        return self.values[s]

    def min(self) -> Fraction:
        return min(self.values.values())


class _MintermEngine:
    def __init__(self, body: Cmd, guard: Exp, states: Sequence[State], budget: int, cap: int):
        self.states = list(states)
        index = {s: i for i, s in enumerate(self.states)}
        self.index = index
        self.live = []
        d = Denoter(budget, cap)
        self.rows = {}
        for s in self.states:
            if _guard(guard, s):
                gens = []
                for g in d.den(body, s).gens:
                    row = []
                    for t, p in g.items():
                        if t is BOT:
                            continue
                        j = index.get(t)
                        if j is None:
                            raise StateSpaceEscape(f"body leads from {s!r} to {t!r}, outside the declared states")
                        row.append((j, p))
                    gens.append(row)
                self.rows[index[s]] = gens
        self.t = [Fraction(0) if index[s] in self.rows else Fraction(1) for s in self.states]
        self.k = 0

    def step(self) -> None:
        t = self.t
        new = list(t)
        for i, gens in self.rows.items():
            new[i] = min(sum((p * t[j] for j, p in row), Fraction(0)) for row in gens)
        self.t = new
        self.k += 1

    def table(self) -> MintermTable:
        return MintermTable(dict(zip(self.states, self.t)), self.k)


def min_termination_prob(body: Cmd, guard: Exp, states: Iterable[State], iterations: int,
                         budget: int = DEFAULT_BUDGET, cap: int = DEFAULT_CAP) -> MintermTable:
    """Sound lower bounds on the minimum termination probability per state.

    ``iterations`` counts executions of the body: with zero iterations a
    state terminates exactly when its guard is already false.  The min over
    generators is exact because the objective is linear and the up-closure
    only moves divergence mass onto states.
    """
    eng = _MintermEngine(body, guard, list(states), budget, cap)
    for _ in range(iterations):
        eng.step()
    return eng.table()


def minterm_until(body: Cmd, guard: Exp, states: Iterable[State], threshold, max_iterations: int,
                  budget: int = DEFAULT_BUDGET, cap: int = DEFAULT_CAP, where=None) -> MintermTable:
    """Iterate until every state (or every state in ``where``) reaches ``threshold``."""
    threshold = Fraction(threshold)
    eng = _MintermEngine(body, guard, list(states), budget, cap)
    targets = [eng.index[s] for s in (where if where is not None else eng.states)]

    def done():
        return all(eng.t[i] >= threshold for i in targets)

    while not done() and eng.k < max_iterations:
        eng.step()
    return eng.table()
