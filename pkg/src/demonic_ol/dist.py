"""Finite-support distributions over states plus the divergence point."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from .lang import BOT, State, format_value

Point = object  # State or BOT


class DistError(ValueError):
    pass


def _point_sort_key(x):
    # ⊥ sorts first; states lexicographically by value key
    return (0, ()) if x is BOT else (1, x.sort_key())


class Dist:
    """An immutable probability distribution with exact rational weights.

    Every stored weight is strictly positive and the total mass is exactly 1.
    """

    __slots__ = ("_w", "_hash")

    def __init__(self, weights: Mapping[Point, Fraction], *, check: bool = True):
        w = {k: Fraction(v) for k, v in weights.items() if v != 0}
        if check:
            if any(v < 0 for v in w.values()):
                raise DistError("negative weight")
            if sum(w.values(), Fraction(0)) != 1:
                raise DistError(f"total mass {sum(w.values(), Fraction(0))} is not 1")
        self._w = w
        self._hash = None

    # -- mapping protocol -------------------------------------------------
    def __call__(self, x: Point) -> Fraction:
        return self._w.get(x, Fraction(0))

    def __getitem__(self, x: Point) -> Fraction:
        return self._w.get(x, Fraction(0))

    def items(self):
        return self._w.items()

    def support(self) -> frozenset:
        return frozenset(self._w)

    def proper_support(self) -> list:
        return [x for x in self._w if x is not BOT]

    def __iter__(self) -> Iterator[Point]:
        return iter(self._w)

    def __len__(self) -> int:
        return len(self._w)

    @property
    def bottom(self) -> Fraction:
        return self._w.get(BOT, Fraction(0))

    def __eq__(self, other) -> bool:
        return isinstance(other, Dist) and self._w == other._w

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._w.items()))
        return self._hash

    def sorted_items(self) -> list:
        return sorted(self._w.items(), key=lambda kv: _point_sort_key(kv[0]))

    def dump(self) -> str:
        """Canonical debug text: one ``state ↦ p/q`` line per support point."""
        lines = []
        for x, p in self.sorted_items():
            lines.append(f"{x!r} ↦ {format_value(p)}")
        return "\n".join(lines)

    def __repr__(self) -> str:
        inner = ", ".join(f"{x!r}: {format_value(p)}" for x, p in self.sorted_items())
        return f"Dist({{{inner}}})"

    def prob(self, pred) -> Fraction:
        """Total mass of proper states satisfying ``pred``."""
        return sum((p for x, p in self._w.items() if x is not BOT and pred(x)), Fraction(0))


def dirac(x: Point) -> Dist:
    return Dist({x: Fraction(1)}, check=False)


def convex_combine(weights: Sequence, dists: Sequence[Dist]) -> Dist:
    if len(weights) != len(dists):
        raise DistError("weights and distributions differ in length")
    ws = [Fraction(w) for w in weights]
    if any(w < 0 for w in ws):
        raise DistError("negative mixing weight")
    if sum(ws, Fraction(0)) != 1:
        raise DistError("mixing weights do not sum to 1")
    acc: dict = {}
    for w, d in zip(ws, dists):
        if w == 0:
            continue
        for x, p in d.items():
            acc[x] = acc.get(x, Fraction(0)) + w * p
    return Dist(acc, check=False)


def mix(p: Fraction, a: Dist, b: Dist) -> Dist:
    if p == 1:
        return a
    if p == 0:
        return b
    return convex_combine([p, 1 - p], [a, b])


def dist_leq(mu: Dist, nu: Dist) -> bool:
    """Pointwise order: ``nu`` dominates ``mu`` on every proper state."""
    for x, p in mu.items():
        if x is not BOT and nu(x) < p:
            return False
    return True


def terminating_part(mu: Dist) -> tuple:
    sub = {x: p for x, p in mu.items() if x is not BOT}
    return sub, mu.bottom


def uniform(points: Iterable[Point]) -> Dist:
    pts = list(dict.fromkeys(points))
    if not pts:
        raise DistError("uniform over empty set")
    w = Fraction(1, len(pts))
    return Dist({x: w for x in pts}, check=False)
