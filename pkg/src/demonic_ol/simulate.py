"""Monte-Carlo execution of programs under a scheduler.

Each ``&`` node is a choice site, named by its path in the AST.  A
scheduler maps ``(site, state)`` to a branch (0 = left, 1 = right) or to a
bias in [0,1] for the left branch.  Randomness comes from numpy's PCG64,
one independent stream per batch of samples derived with ``SeedSequence``,
so results depend only on ``(seed, samples, batch size)``.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np

from .convex import DEFAULT_CAP
from .lang import (
    Assign, Cmd, If, NDChoice, ProbChoice, Seq, Skip, State, While, eval_exp, format_value,
)
from .semantics import Denoter, _guard, _prob

BATCH_SIZE = 10_000
PRNG_NAME = "PCG64"
_SCALE = 1 << 53


@dataclass(frozen=True)
class Site:
    path: tuple
    node: NDChoice
    cont: Cmd | None  # what runs after the choice completes


def _then(c: Cmd, k: Cmd | None) -> Cmd:
    return c if k is None else Seq(c, k)


def choice_sites(c: Cmd) -> dict:
    """Map each ``&`` path to its node and static continuation."""
    sites: dict = {}

    def visit(c: Cmd, path: tuple, k):
        if isinstance(c, Seq):
            visit(c.first, path + (0,), _then(c.second, k))
            visit(c.second, path + (1,), k)
        elif isinstance(c, NDChoice):
            sites[path] = Site(path, c, k)
            visit(c.left, path + (0,), k)
            visit(c.right, path + (1,), k)
        elif isinstance(c, ProbChoice):
            visit(c.left, path + (0,), k)
            visit(c.right, path + (1,), k)
        elif isinstance(c, If):
            visit(c.then, path + (0,), k)
            visit(c.orelse, path + (1,), k)
        elif isinstance(c, While):
            visit(c.body, path + (0,), _then(c, k))

    visit(c, (), None)
    return sites


class Scheduler:
    name = "scheduler"

    def prepare(self, program: Cmd, sites: Mapping, budget: int, cap: int) -> None:
        pass

    def choose(self, site: Site, state: State):
        raise NotImplementedError


class Fixed(Scheduler):
    def __init__(self, branch: int):
        self.branch = branch
        self.name = "left" if branch == 0 else "right"

    def choose(self, site, state):
        return self.branch


class Biased(Scheduler):
    def __init__(self, bias=Fraction(1, 2)):
        self.bias = Fraction(bias)
        self.name = "uniform" if self.bias == Fraction(1, 2) else f"bias {format_value(self.bias)}"

    def choose(self, site, state):
        return self.bias


class HashRandom(Scheduler):
    """A fixed but arbitrary deterministic strategy derived from a seed."""

    name = "random"

    def __init__(self, seed: int = 0):
        self.seed = seed

    def choose(self, site, state):
        h = hashlib.sha256(f"{self.seed}|{site.path}|{state!r}".encode()).digest()
        return h[0] & 1


class Worst(Scheduler):
    """Pick the branch whose remaining run has the lowest termination mass.

    The lookahead is the denotation of ``branch; continuation`` with loops
    unrolled ``horizon`` times; ties go to the left branch.
    """

    name = "worst"

    def __init__(self, horizon: int = 8):
        self.horizon = horizon
        self._cache: dict = {}
        self._den = None

    def prepare(self, program, sites, budget, cap):
        self._den = Denoter(self.horizon, cap)
        self._runs = {p: (_then(s.node.left, s.cont), _then(s.node.right, s.cont)) for p, s in sites.items()}

    def choose(self, site, state):
        key = (site.path, state)
        r = self._cache.get(key)
        if r is None:
            left, right = self._runs[site.path]
            a = self._den.den(left, state).minterm()
            b = self._den.den(right, state).minterm()
            r = 1 if b < a else 0
            self._cache[key] = r
        return r


class Custom(Scheduler):
    def __init__(self, fn: Callable, name: str = "custom"):
        self.fn = fn
        self.name = name

    def choose(self, site, state):
        return self.fn(site.path, state)


SCHEDULERS = ("left", "right", "uniform", "random", "worst")


def scheduler_by_name(name: str, seed: int = 0) -> Scheduler:
    table = {
        "left": lambda: Fixed(0),
        "right": lambda: Fixed(1),
        "uniform": lambda: Biased(Fraction(1, 2)),
        "random": lambda: HashRandom(seed),
        "worst": lambda: Worst(),
    }
    if name not in table:
        raise ValueError(f"unknown scheduler {name!r}; choose from {', '.join(sorted(table))}")
    return table[name]()


@dataclass(frozen=True)
class MCResult:
    histogram: Mapping
    nonterminated: int
    samples: int
    seed: int
    scheduler: str
    prng: str = PRNG_NAME
    batch_size: int = BATCH_SIZE
    max_steps: int = field(default=0)

    def frequency(self, pred) -> float:
        hits = sum(n for s, n in self.histogram.items() if pred(s))
        return hits / self.samples

    def count(self, pred) -> int:
        return sum(n for s, n in self.histogram.items() if pred(s))

    def dump(self) -> str:
        lines = [f"prng\t{self.prng}", f"seed\t{self.seed}", f"scheduler\t{self.scheduler}",
                 f"samples\t{self.samples}", f"nonterminated\t{self.nonterminated}"]
        for s, n in sorted(self.histogram.items(), key=lambda kv: kv[0].sort_key()):
            lines.append(f"{s!r}\t{n}")
        return "\n".join(lines)


class _Draws:
    """Buffered uniform integers in [0, 2^53) from one PCG64 stream."""

    def __init__(self, seed_seq: np.random.SeedSequence):
        self.gen = np.random.Generator(np.random.PCG64(seed_seq))
        self.buf = []
        self.pos = 0

    def below(self, p: Fraction) -> bool:
        """True with probability exactly ``p`` up to 2^-53 resolution."""
        if p >= 1:
            return True
        if p <= 0:
            return False
        if self.pos >= len(self.buf):
            self.buf = self.gen.integers(0, _SCALE, size=4096, dtype=np.uint64).tolist()
            self.pos = 0
        u = self.buf[self.pos]
        self.pos += 1
        return u * p.denominator < p.numerator * _SCALE


def _run(c: Cmd, s: State, sites: Mapping, sched: Scheduler, draws: _Draws, max_steps: int):
    stack = [(c, ())]
    steps = 0
    while stack:
        steps += 1
        if steps > max_steps:
            return None
        c, path = stack.pop()
        if isinstance(c, Skip):
            continue
        if isinstance(c, Assign):
            s = s.set(c.var, eval_exp(c.exp, s))
        elif isinstance(c, Seq):
            stack.append((c.second, path + (1,)))
            stack.append((c.first, path + (0,)))
        elif isinstance(c, ProbChoice):
            if draws.below(_prob(c.prob, s)):
                stack.append((c.left, path + (0,)))
            else:
                stack.append((c.right, path + (1,)))
        elif isinstance(c, NDChoice):
            d = sched.choose(sites[path], s)
            if isinstance(d, Fraction):
                if not 0 <= d <= 1:
                    raise ValueError(f"scheduler bias {d} outside [0,1]")
                d = 0 if draws.below(d) else 1
            stack.append((c.left, path + (0,)) if d == 0 else (c.right, path + (1,)))
        elif isinstance(c, If):
            if _guard(c.guard, s):
                stack.append((c.then, path + (0,)))
            else:
                stack.append((c.orelse, path + (1,)))
        elif isinstance(c, While):
            if _guard(c.guard, s):
                stack.append((c, path))
                stack.append((c.body, path + (0,)))
        else:
            raise TypeError(f"not a command: {c!r}")
    return s


def mc_simulate(c: Cmd, s: State, sched: Scheduler | str = "uniform", samples: int = 10_000,
                seed: int = 0, max_steps: int = 100_000, batch_size: int = BATCH_SIZE,
                budget: int = 8, cap: int = DEFAULT_CAP) -> MCResult:
    """Run ``c`` from ``s`` ``samples`` times and tally the final states."""
    if samples < 1:
        raise ValueError("samples must be positive")
    if isinstance(sched, str):
        sched = scheduler_by_name(sched, seed)
    sites = choice_sites(c)
    sched.prepare(c, sites, budget, cap)
    nbatches = -(-samples // batch_size)
    seqs = np.random.SeedSequence(seed).spawn(nbatches)
    hist: Counter = Counter()
    lost = 0
    for b in range(nbatches):
        draws = _Draws(seqs[b])
        n = min(batch_size, samples - b * batch_size)
        for _ in range(n):
            out = _run(c, s, sites, sched, draws, max_steps)
            if out is None:
                lost += 1
            else:
                hist[out] += 1
    return MCResult(dict(hist), lost, samples, seed, sched.name, PRNG_NAME, batch_size, max_steps)
