"""Finitely generated up-closed convex sets of distributions.

A :class:`ConvexSet` stores generator distributions and denotes the
up-closure (in the pointwise order on proper states) of their convex hull.
Up-closure is never materialised: it lives in the ``<=`` rows of the
membership LP.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from . import lp
from .dist import Dist, dirac, dist_leq, _point_sort_key
from .lang import BOT

DEFAULT_CAP = 10_000


class GeneratorCapExceeded(RuntimeError):
    """A set needs more generators than the configured cap allows."""


def _gen_key(d: Mapping) -> tuple:
    return tuple((_point_sort_key(x), p) for x, p in sorted(d.items(), key=lambda kv: _point_sort_key(kv[0])))


def _leq(a: Mapping, b: Mapping) -> bool:
    for x, p in a.items():
        if x is not BOT and b.get(x, 0) < p:
            return False
    return True


def _in_upper_hull(v: Mapping, gens: Sequence[Mapping]) -> bool:
    """Is ``v`` in the up-closure of conv(gens)?  All inputs have equal mass."""
    if not gens:
        return False
    for g in gens:
        if _leq(g, v):
            return True
    if len(gens) == 1:
        return False
    states = set()
    for g in gens:
        states.update(x for x in g if x is not BOT)
    ubs = []
    for s in states:
        row = {i: g.get(s, 0) for i, g in enumerate(gens) if g.get(s, 0)}
        bound = v.get(s, 0)
        if all(c > bound for c in row.values()) and len(row) == len(gens):
            return False
        ubs.append((row, bound))
    eqs = [({i: 1 for i in range(len(gens))}, 1)]
    return lp.is_feasible(len(gens), eqs, ubs)


def _prune(gens: Iterable[Mapping], hull: bool = True) -> list:
    uniq = {}
    for g in gens:
        k = _gen_key(g)
        if k not in uniq:
            uniq[k] = g
    items = [uniq[k] for k in sorted(uniq)]
    if len(items) <= 1:
        return items
    # pairwise domination is cheap and removes most redundancy
    keep = []
    for i, g in enumerate(items):
        if any(j != i and _leq(h, g) for j, h in enumerate(items)):
            continue
        keep.append(g)
    if len(keep) <= 2 or not hull:
        return keep
    out = list(keep)
    i = 0
    while i < len(out):
        others = out[:i] + out[i + 1:]
        if _in_upper_hull(out[i], others):
            out.pop(i)
        else:
            i += 1
    return out


class ConvexSet:
    """Nonempty list of generators denoting ``↑conv(generators)``."""

    __slots__ = ("gens",)

    def __init__(self, gens: Iterable[Dist], *, prune: bool = True, cap: int = DEFAULT_CAP):
        gens = list(gens)
        if not gens:
            raise ValueError("a convex set needs at least one generator")
        if prune:
            gens = [g if isinstance(g, Dist) else Dist(g, check=False) for g in _prune(
                [g._w if isinstance(g, Dist) else g for g in gens])]
        if len(gens) > cap:
            raise GeneratorCapExceeded(f"{len(gens)} generators exceed the cap of {cap}")
        self.gens = tuple(gens)

    def __iter__(self):
        return iter(self.gens)

    def __len__(self) -> int:
        return len(self.gens)

    def __repr__(self) -> str:
        return f"ConvexSet({list(self.gens)!r})"

    @property
    def residual(self) -> Fraction:
        """Largest divergence mass among the generators."""
        return max(g.bottom for g in self.gens)

    def minterm(self) -> Fraction:
        """Infimum of the terminating mass over the set."""
        return 1 - self.residual

    def dump(self) -> str:
        blocks = []
        for i, g in enumerate(sorted(self.gens, key=lambda d: _gen_key(d._w))):
            blocks.append(f"generator {i + 1}:\n" + "\n".join("  " + ln for ln in g.dump().splitlines()))
        return "\n".join(blocks)


def unit(x) -> ConvexSet:
    return ConvexSet([dirac(x)], prune=False)


def member(S: ConvexSet, nu: Dist) -> bool:
    return _in_upper_hull(nu._w, [g._w for g in S.gens])


def prune(S: ConvexSet) -> ConvexSet:
    return ConvexSet(S.gens)


def _combine(p: Fraction, a: Mapping, b: Mapping) -> dict:
    if p == 1:
        return dict(a)
    if p == 0:
        return dict(b)
    q = 1 - p
    out = {x: p * v for x, v in a.items()}
    for x, v in b.items():
        out[x] = out.get(x, 0) + q * v
    return out


def oplus(S: ConvexSet, p, T: ConvexSet, cap: int = DEFAULT_CAP) -> ConvexSet:
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise ValueError(f"probability {p} outside [0,1]")
    if p == 1:
        return S
    if p == 0:
        return T
    gens = [_combine(p, g._w, h._w) for g in S.gens for h in T.gens]
    return ConvexSet([Dist(g, check=False) for g in gens], cap=cap)


def amp(S: ConvexSet, T: ConvexSet, cap: int = DEFAULT_CAP) -> ConvexSet:
    return ConvexSet(list(S.gens) + list(T.gens), cap=cap)


def kleisli(f: Callable, S: ConvexSet, cap: int = DEFAULT_CAP) -> ConvexSet:
    """Kleisli extension ``f†(S)`` with ⊥ sent to ``unit(⊥)``."""
    cache: dict = {}

    def image(x):
        if x is BOT:
            return (dirac(BOT),)
        r = cache.get(x)
        if r is None:
            r = f(x).gens
            cache[x] = r
        return r

    out = []
    for mu in S.gens:
        # points with the same image set share one choice: a·S + b·S = (a+b)·S
        # for convex S, so their weights can be pooled without changing the hull
        pooled: dict = {}
        for x, w in mu.sorted_items():
            opts = image(x)
            if opts in pooled:
                pooled[opts] += w
            else:
                pooled[opts] = w
        acc = [{}]
        for opts, w in pooled.items():
            if len(opts) == 1:
                g = opts[0]
                for a in acc:
                    for y, v in g.items():
                        a[y] = a.get(y, 0) + w * v
                continue
            nxt = []
            for a in acc:
                for g in opts:
                    b = dict(a)
                    for y, v in g.items():
                        b[y] = b.get(y, 0) + w * v
                    nxt.append(b)
            if len(nxt) > 1:
                # cheap pass only; the LP pass runs once on the final set
                nxt = _prune(nxt, hull=len(nxt) > 256)
            if len(nxt) > cap:
                raise GeneratorCapExceeded(f"{len(nxt)} generators exceed the cap of {cap}")
            acc = nxt
        out.extend(acc)
    return ConvexSet([Dist(g, check=False) for g in out], cap=cap)


def hull_leq(S: ConvexSet, T: ConvexSet) -> bool:
    """Is the set denoted by ``S`` contained in the one denoted by ``T``?"""
    return all(member(T, g) for g in S.gens)


def hull_equal(S: ConvexSet, T: ConvexSet) -> bool:
    return hull_leq(S, T) and hull_leq(T, S)


def smyth_leq(S: ConvexSet, T: ConvexSet) -> bool:
    """Smyth order: ``S ⊑ T`` iff T's set is contained in S's."""
    return hull_leq(T, S)


def oplus_dist_check(f: Callable, S: ConvexSet, T: ConvexSet, p) -> bool:
    """Do both sides of ``f†(S ⊕p T) = f†(S) ⊕p f†(T)`` denote the same set?"""
    lhs = kleisli(f, oplus(S, p, T))
    rhs = oplus(kleisli(f, S), p, kleisli(f, T))
    return hull_equal(lhs, rhs)
