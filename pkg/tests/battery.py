"""Fixed battery of (assertion, distribution) pairs for the oracle comparison."""

from __future__ import annotations

import random
from fractions import Fraction

from demonic_ol.assertions import Almost, Amp, And, Bot, OPlus, Top
from demonic_ol.dist import Dist
from demonic_ol.lang import BOT, State
from demonic_ol.parser import parse_exp

UNIVERSE = [State(("x",), (Fraction(k),)) for k in range(4)]
DOMAINS = {"x": tuple(Fraction(k) for k in range(4))}
ATOMS = [parse_exp(t) for t in (
    "x = 0", "x = 1", "x < 2", "x >= 2", "x != 1", "x = 3", "x = 1 or x = 3", "x <= 2", "true", "false",
)]
PROBS = [Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1)]


def random_assertion(rng: random.Random, connectives: int):
    if connectives == 0:
        r = rng.random()
        if r < 0.06:
            return Top()
        if r < 0.09:
            return Bot()
        return Almost(rng.choice(ATOMS))
    k = rng.randint(0, connectives - 1)
    left = random_assertion(rng, k)
    right = random_assertion(rng, connectives - 1 - k)
    kind = rng.choice(("and", "oplus", "oplus", "amp"))
    if kind == "and":
        return And(left, right)
    if kind == "amp":
        return Amp(left, right)
    return OPlus(rng.choice(PROBS), left, right)


def random_dist(rng: random.Random, denominator: int = 8) -> Dist:
    pool = UNIVERSE + [BOT]
    k = rng.randint(1, 4)
    pts = rng.sample(pool if rng.random() < 0.3 else UNIVERSE, k)
    cuts = sorted(rng.randint(0, denominator) for _ in range(k - 1))
    ws = [b - a for a, b in zip([0] + cuts, cuts + [denominator])]
    return Dist({x: Fraction(w, denominator) for x, w in zip(pts, ws) if w})


def _model(rng: random.Random, phi, tries: int = 8):
    """Some model of ``phi`` built bottom-up, or None."""
    if isinstance(phi, Top):
        return random_dist(rng)
    if isinstance(phi, Bot):
        return None
    if isinstance(phi, Almost):
        from demonic_ol.assertions import atom_holds
        ok = [s for s in UNIVERSE if atom_holds(phi.atom, s)]
        if not ok:
            return None
        pts = rng.sample(ok, rng.randint(1, len(ok)))
        cuts = sorted(rng.randint(0, 4) for _ in range(len(pts) - 1))
        ws = [b - a for a, b in zip([0] + cuts, cuts + [4])]
        return Dist({x: Fraction(w, 4) for x, w in zip(pts, ws) if w})
    if isinstance(phi, (OPlus, Amp)):
        a, b = _model(rng, phi.left), _model(rng, phi.right)
        if a is None or b is None:
            return None
        p = phi.prob if isinstance(phi, OPlus) else Fraction(rng.randint(0, 4), 4)
        w = {}
        for x, v in a.items():
            w[x] = w.get(x, 0) + p * v
        for x, v in b.items():
            w[x] = w.get(x, 0) + (1 - p) * v
        return Dist(w)
    if isinstance(phi, And):
        for _ in range(tries):
            m = _model(rng, phi.left)
            if m is not None and len(m.support()) <= 4:
                return m
        return None
    raise TypeError(phi)


def battery(n: int = 2000, seed: int = 20240611) -> list:
    """``n`` pairs with at most 3 connectives and at most 4 support points.

    Roughly half the distributions are built as models of (part of) the
    assertion so both verdicts are well represented.
    """
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        phi = random_assertion(rng, rng.randint(0, 3))
        mu = _model(rng, phi) if rng.random() < 0.5 else None
        if mu is None or len(mu.support()) > 4:
            mu = random_dist(rng)
        out.append((phi, mu))
    return out
