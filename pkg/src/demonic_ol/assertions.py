"""Outcome assertions: syntax, satisfaction, substitution and implication."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from . import lp
from .dist import Dist
from .lang import BOT, EvalTypeError, Exp, Lit, State, eval_exp, exp_vars, format_value, subst_exp, value_key


class Assertion:
    __slots__ = ()


@dataclass(frozen=True)
class Top(Assertion):
    pass


@dataclass(frozen=True)
class Bot(Assertion):
    pass


@dataclass(frozen=True)
class And(Assertion):
    left: Assertion
    right: Assertion


@dataclass(frozen=True)
class OPlus(Assertion):
    prob: Fraction
    left: Assertion
    right: Assertion

    def __post_init__(self):
        if not isinstance(self.prob, Fraction):
            object.__setattr__(self, "prob", Fraction(self.prob))
        if not 0 <= self.prob <= 1:
            raise ValueError(f"probability {self.prob} outside [0,1]")


@dataclass(frozen=True)
class Amp(Assertion):
    left: Assertion
    right: Assertion


@dataclass(frozen=True)
class Almost(Assertion):
    """``⌈P⌉``: the whole distribution is supported on states satisfying P."""

    atom: Exp


TOP = Top()
BOTTOM = Bot()


# ---------------------------------------------------------------------------
# Structure


def atoms(phi: Assertion) -> list:
    """Distinct atoms of ``phi`` in left-to-right order."""
    out: list = []

    def go(a):
        if isinstance(a, Almost):
            if a.atom not in out:
                out.append(a.atom)
        elif isinstance(a, (And, Amp, OPlus)):
            go(a.left)
            go(a.right)

    go(phi)
    return out


def free_vars(phi) -> frozenset:
    """Program variables mentioned by an assertion or an atom."""
    if isinstance(phi, Exp):
        return exp_vars(phi)
    return frozenset().union(*(exp_vars(p) for p in atoms(phi))) if atoms(phi) else frozenset()


def map_atoms(phi: Assertion, f) -> Assertion:
    if isinstance(phi, Almost):
        return Almost(f(phi.atom))
    if isinstance(phi, And):
        return And(map_atoms(phi.left, f), map_atoms(phi.right, f))
    if isinstance(phi, Amp):
        return Amp(map_atoms(phi.left, f), map_atoms(phi.right, f))
    if isinstance(phi, OPlus):
        return OPlus(phi.prob, map_atoms(phi.left, f), map_atoms(phi.right, f))
    return phi


def substitute(phi: Assertion, e: Exp, x: str) -> Assertion:
    """``phi[e/x]``: replace ``x`` by ``e`` inside every atom."""
    return map_atoms(phi, lambda p: subst_exp(p, x, e))


def amp_all(phis) -> Assertion:
    phis = list(phis)
    if not phis:
        raise ValueError("empty demonic conjunction")
    out = phis[-1]
    for a in reversed(phis[:-1]):
        out = Amp(a, out)
    return out


def holds_surely(phi: Assertion) -> bool:
    """Does ``phi`` entail ``⌈true⌉`` by collapsing its connectives?"""
    if isinstance(phi, Almost):
        return True
    if isinstance(phi, Bot):
        return True
    if isinstance(phi, (OPlus, Amp)):
        return holds_surely(phi.left) and holds_surely(phi.right)
    if isinstance(phi, And):
        return holds_surely(phi.left) or holds_surely(phi.right)
    return False


# ---------------------------------------------------------------------------
# Satisfaction


def atom_holds(p: Exp, s) -> bool:
    if s is BOT:
        return False
    v = eval_exp(p, s)
    if not isinstance(v, bool):
        raise EvalTypeError(f"atom evaluated to non-boolean {format_value(v)}")
    return v


def _dom_key(domains: Mapping, names) -> tuple:
    return tuple((x, tuple(value_key(v) for v in domains[x])) for x in names)


_REPS_CACHE: dict = {}


def cell_representatives(props, domains: Mapping, cap: int | None = None) -> list:
    """One state per realisable truth vector of ``props`` over the domains.

    States range over the variables of ``props`` only.  Raises ``KeyError``
    if some variable has no declared domain.
    """
    props = list(props)
    names = sorted(frozenset().union(*(exp_vars(p) for p in props))) if props else []
    for x in names:
        if x not in domains:
            raise KeyError(x)
    key = (tuple(props), _dom_key(domains, names))
    hit = _REPS_CACHE.get(key)
    if hit is not None:
        return hit
    seen = {}
    for combo in itertools.product(*(domains[x] for x in names)):
        s = State(names, combo)
        vec = tuple(atom_holds(p, s) for p in props)
        if vec not in seen:
            seen[vec] = s
            if cap is not None and len(seen) > cap:
                raise CellCapExceeded(f"more than {cap} atom cells")
    reps = list(seen.values())
    if len(_REPS_CACHE) > 4096:
        _REPS_CACHE.clear()
    _REPS_CACHE[key] = reps
    return reps


class CellCapExceeded(RuntimeError):
    pass


class _System:
    """Sparse LP under construction: nonnegative variables, equality rows."""

    def __init__(self):
        self.n = 0
        self.eqs: list = []

    def new(self, k: int) -> list:
        out = list(range(self.n, self.n + k))
        self.n += k
        return out

    def feasible(self) -> bool:
        return lp.is_feasible(self.n, self.eqs)


def _truth(p: Exp, points, memo: dict) -> list:
    r = memo.get(p)
    if r is None:
        r = [atom_holds(p, x) for x in points]
        memo[p] = r
    return r


def _build(sys: _System, phi: Assertion, m: list, points, memo: dict) -> None:
    """Constrain mass vector ``m`` (over ``points``) to split according to ``phi``."""
    if isinstance(phi, Top):
        return
    if isinstance(phi, Bot):
        for v in m:
            sys.eqs.append(({v: 1}, 0))
        return
    if isinstance(phi, Almost):
        for v, ok in zip(m, _truth(phi.atom, points, memo)):
            if not ok:
                sys.eqs.append(({v: 1}, 0))
        return
    if isinstance(phi, And):
        _build(sys, phi.left, m, points, memo)
        _build(sys, phi.right, m, points, memo)
        return
    if isinstance(phi, (OPlus, Amp)):
        left = sys.new(len(m))
        right = sys.new(len(m))
        for v, a, b in zip(m, left, right):
            sys.eqs.append(({a: 1, b: 1, v: -1}, 0))
        if isinstance(phi, OPlus):
            row = {a: 1 for a in left}
            for v in m:
                row[v] = row.get(v, 0) - phi.prob
            sys.eqs.append((row, 0))
        _build(sys, phi.left, left, points, memo)
        _build(sys, phi.right, right, points, memo)
        return
    raise TypeError(f"not an assertion: {phi!r}")


def _needs_and(phi: Assertion) -> bool:
    if isinstance(phi, And):
        return True
    if isinstance(phi, (OPlus, Amp)):
        return _needs_and(phi.left) or _needs_and(phi.right)
    return False


_SAT_CACHE: dict = {}


def satisfiable(phi: Assertion, universe) -> bool:
    """Is some distribution over ``universe`` (plus ⊥) a model of ``phi``?"""
    universe = tuple(universe)
    key = (phi, universe)
    r = _SAT_CACHE.get(key)
    if r is None:
        r = _satisfiable(phi, universe)
        if len(_SAT_CACHE) > 100_000:
            _SAT_CACHE.clear()
        _SAT_CACHE[key] = r
    return r


def _satisfiable(phi: Assertion, universe: tuple) -> bool:
    if isinstance(phi, Top):
        return True
    if isinstance(phi, Bot):
        return False
    if isinstance(phi, Almost):
        return any(atom_holds(phi.atom, s) for s in universe)
    if isinstance(phi, (OPlus, Amp)):
        return satisfiable(phi.left, universe) and satisfiable(phi.right, universe)
    if isinstance(phi, And):
        if not (satisfiable(phi.left, universe) and satisfiable(phi.right, universe)):
            return False
        points = list(universe) + [BOT]
        sys = _System()
        m = sys.new(len(points))
        sys.eqs.append(({v: 1 for v in m}, 1))
        _build(sys, phi, m, points, {})
        return sys.feasible()
    raise TypeError(f"not an assertion: {phi!r}")


def _universe(phi: Assertion, domains, fallback) -> tuple:
    props = atoms(phi)
    if domains is not None:
        try:
            return tuple(cell_representatives(props, domains))
        except KeyError:
            pass
    return tuple(fallback)


def satisfies(mu: Dist, phi: Assertion, domains: Mapping | None = None, *, up: bool = False,
              universe=None) -> bool:
    """Decide ``mu ⊨ phi``.

    A branch that receives no mass still needs a model of its own, so the
    answer also depends on which states exist: the declared ``domains``
    (or an explicit ``universe`` of states) when given, otherwise the
    support of ``mu``.  With ``up=True`` the question is whether some
    distribution obtained from ``mu`` by moving its ⊥ mass onto states is a
    model.
    """
    support = mu.proper_support()
    if universe is None:
        universe = _universe(phi, domains, support)
    if not satisfiable(phi, universe):
        return False
    if isinstance(phi, Top):
        return True
    if isinstance(phi, Almost) and not up:
        return mu.bottom == 0 and all(atom_holds(phi.atom, s) for s in support)
    sys = _System()
    if not up or mu.bottom == 0:
        points = support + ([BOT] if mu.bottom else [])
        m = sys.new(len(points))
        for v, x in zip(m, points):
            sys.eqs.append(({v: 1}, mu[x]))
    else:
        extra = [s for s in universe if mu[s] == 0]
        points = support + extra + [BOT]
        m = sys.new(len(points))
        slack = sys.new(len(support))
        # ν(σ) = μ(σ) + t(σ) on the support, free elsewhere; ν(⊥) ≤ μ(⊥)
        for v, t, x in zip(m, slack, support):
            sys.eqs.append(({v: 1, t: -1}, mu[x]))
        sys.eqs.append(({v: 1 for v in m}, 1))
    _build(sys, phi, m, points, {})
    return sys.feasible()


# ---------------------------------------------------------------------------
# Implication


@dataclass(frozen=True)
class Proved:
    method: str

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class Refuted:
    witness: Dist
    method: str = "polytope"

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class Unknown:
    reason: str

    def __bool__(self) -> bool:
        return False


DEFAULT_CELL_CAP = 4096


def _is_true_atom(p: Exp) -> bool:
    return isinstance(p, Lit) and p.value is True


def _syntactic(phi: Assertion, psi: Assertion, depth: int = 0) -> bool:
    """A few sound rewriting steps; false means "not found", not "invalid"."""
    if depth > 12:
        return False
    if phi == psi or isinstance(psi, Top) or isinstance(phi, Bot):
        return True
    d = depth + 1
    if isinstance(psi, Almost) and _is_true_atom(psi.atom) and holds_surely(phi) and not _has_top(phi):
        return True
    if isinstance(psi, And):
        return _syntactic(phi, psi.left, d) and _syntactic(phi, psi.right, d)
    if isinstance(phi, And) and (_syntactic(phi.left, psi, d) or _syntactic(phi.right, psi, d)):
        return True
    if isinstance(phi, OPlus) and isinstance(psi, OPlus):
        if phi.prob == psi.prob and _syntactic(phi.left, psi.left, d) and _syntactic(phi.right, psi.right, d):
            return True
        if phi.prob == 1 - psi.prob and _syntactic(phi.left, psi.right, d) and _syntactic(phi.right, psi.left, d):
            return True
    if isinstance(phi, (OPlus, Amp)) and isinstance(psi, Amp):
        if _syntactic(phi.left, psi.left, d) and _syntactic(phi.right, psi.right, d):
            return True
        if _syntactic(phi.left, psi.right, d) and _syntactic(phi.right, psi.left, d):
            return True
    # models of ⊕ and & are mixtures of models of the parts, and models are convex
    if isinstance(phi, (OPlus, Amp)) and _syntactic(phi.left, psi, d) and _syntactic(phi.right, psi, d):
        return True
    # a model of both parts is a trivial mixture of them
    if isinstance(psi, (OPlus, Amp)) and _syntactic(phi, psi.left, d) and _syntactic(phi, psi.right, d):
        return True
    return False


def _has_top(phi: Assertion) -> bool:
    if isinstance(phi, Top):
        return True
    if isinstance(phi, (OPlus, Amp)):
        return _has_top(phi.left) or _has_top(phi.right)
    if isinstance(phi, And):
        return _has_top(phi.left) and _has_top(phi.right)
    return False


def _extreme(vecs: list) -> list:
    """Drop duplicates and points lying in the convex hull of the others."""
    uniq = list(dict.fromkeys(vecs))
    if len(uniq) <= 2:
        return uniq
    out = list(uniq)
    i = 0
    while i < len(out):
        others = out[:i] + out[i + 1:]
        v = out[i]
        eqs = [({j: 1 for j in range(len(others))}, 1)]
        for c in range(len(v)):
            eqs.append(({j: o[c] for j, o in enumerate(others) if o[c]}, v[c]))
        if lp.is_feasible(len(others), eqs):
            out.pop(i)
        else:
            i += 1
    return out


class _Cells:
    def __init__(self, props, reps):
        self.props = props
        self.points = list(reps) + [BOT]
        self.n = len(self.points)
        self.memo: dict = {}

    def dirac(self, i: int) -> tuple:
        return tuple(Fraction(1) if j == i else Fraction(0) for j in range(self.n))

    def model_vertices(self, phi: Assertion) -> list:
        """Vertices (or a superset of them) of the models of ``phi`` in cell coordinates."""
        key = phi
        r = self.memo.get(key)
        if r is None:
            r = self._vertices(phi)
            self.memo[key] = r
        return r

    def _vertices(self, phi: Assertion) -> list:
        if isinstance(phi, Top):
            return [self.dirac(i) for i in range(self.n)]
        if isinstance(phi, Bot):
            return []
        if isinstance(phi, Almost):
            return [self.dirac(i) for i, x in enumerate(self.points) if atom_holds(phi.atom, x)]
        if isinstance(phi, OPlus):
            a, b = self.model_vertices(phi.left), self.model_vertices(phi.right)
            if not a or not b:
                return []
            p, q = phi.prob, 1 - phi.prob
            return _extreme([tuple(p * x + q * y for x, y in zip(g, h)) for g in a for h in b])
        if isinstance(phi, Amp):
            a, b = self.model_vertices(phi.left), self.model_vertices(phi.right)
            if not a or not b:
                return []
            return _extreme(a + b)
        if isinstance(phi, And):
            a, b = self.model_vertices(phi.left), self.model_vertices(phi.right)
            if not a or not b:
                return []
            for x, y in ((phi.left, b), (phi.right, a)):
                if isinstance(x, Top):
                    return y
                if isinstance(x, Almost):
                    ok = [i for i, pt in enumerate(self.points) if atom_holds(x.atom, pt)]
                    bad = set(range(self.n)) - set(ok)
                    return [v for v in y if all(v[i] == 0 for i in bad)]
            return self._intersect(a, b)
        raise TypeError(f"not an assertion: {phi!r}")

    def _intersect(self, a: list, b: list) -> list:
        na, nb = len(a), len(b)
        eqs = [({i: 1 for i in range(na)}, 1), ({na + j: 1 for j in range(nb)}, 1)]
        for c in range(self.n):
            row = {i: g[c] for i, g in enumerate(a) if g[c]}
            for j, h in enumerate(b):
                if h[c]:
                    row[na + j] = -h[c]
            if row:
                eqs.append((row, 0))
        out = []
        for lam in lp.vertices(na + nb, eqs):
            out.append(tuple(sum((lam[i] * a[i][c] for i in range(na)), Fraction(0)) for c in range(self.n)))
        return _extreme(out)

    def to_dist(self, v: tuple) -> Dist:
        return Dist({x: p for x, p in zip(self.points, v) if p}, check=False)


def implies(phi: Assertion, psi: Assertion, domains: Mapping | None = None,
            cell_cap: int = DEFAULT_CELL_CAP):
    """Decide ``phi ⇒ psi``: ``Proved``, ``Refuted(witness)`` or ``Unknown``."""
    if _syntactic(phi, psi):
        return Proved("rewrite")
    props = atoms(phi) + [p for p in atoms(psi) if p not in atoms(phi)]
    names = free_vars(phi) | free_vars(psi)
    if domains is None or any(x not in domains for x in names):
        missing = sorted(x for x in names if domains is None or x not in domains)
        return Unknown("no finite domain for " + ", ".join(missing))
    try:
        reps = cell_representatives(props, domains, cap=cell_cap)
    except CellCapExceeded as exc:
        return Unknown(str(exc))
    cells = _Cells(props, reps)
    for v in cells.model_vertices(phi):
        mu = cells.to_dist(v)
        if not satisfies(mu, psi, universe=reps):
            return Refuted(mu)
    return Proved("polytope")


def equivalent(phi: Assertion, psi: Assertion, domains: Mapping | None = None) -> bool:
    return bool(implies(phi, psi, domains)) and bool(implies(psi, phi, domains))
