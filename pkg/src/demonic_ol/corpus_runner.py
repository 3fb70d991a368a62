"""The case-study corpus as executable golden tests.

``manifest.yaml`` in the corpus directory lists entries.  Each entry names a
program and a list of checks; a check is a one-key mapping whose key picks
the kind:

``denote``    every outcome generator puts exactly ``mass`` on ``event``
``script``    a proof script gets the expected verdict (optionally the
              rejecting node and the concluded postcondition), and with
              ``shadow`` the root triple is re-checked on witnesses
``triple``    a triple holds (or fails) on every extreme model of its pre;
              ``for`` instantiates ``{name}`` over an integer range
``minterm``   value iteration reaches ``at_least`` within ``iterations``
              or hits the exact ``value`` at a given state
``iterate``   the loop residual after ``n`` body runs is ``<= base**n``
``simulate``  Monte Carlo frequency of ``event`` within ``sigma`` standard
              errors of ``frequency``
"""

from __future__ import annotations

import fnmatch
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

import yaml

from .lang import BOT, Program, While, eval_exp, flatten_seq, format_value, seq
from .parser import parse_assertion, parse_bindings, parse_cmd, parse_exp, parse_program
from .proof import (
    Triple, check_derivation, check_triple_exhaustive, check_triple_semantic, load_script,
    soundness_violations, standard_witnesses,
)
from .semantics import DEFAULT_BUDGET, denote, loop_iterate, min_termination_prob
from .simulate import mc_simulate

CORPUS_ENV = "DEMONIC_OL_CORPUS"


def corpus_dir(override: str | os.PathLike | None = None) -> Path:
    if override is not None:
        return Path(override)
    env = os.environ.get(CORPUS_ENV)
    if env:
        return Path(env)
    return Path(__file__).with_name("corpus")


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    program: str
    checks: tuple
    budget: int = DEFAULT_BUDGET
    description: str = ""


@dataclass(frozen=True)
class CheckOutcome:
    label: str
    ok: bool
    detail: str


@dataclass(frozen=True)
class EntryResult:
    name: str
    outcomes: tuple
    seconds: float = field(default=0.0, compare=False)

    @property
    def ok(self) -> bool:
        return all(o.ok for o in self.outcomes)

    def to_dict(self) -> dict:
        return {"name": self.name, "ok": self.ok,
                "checks": [{"label": o.label, "ok": o.ok, "detail": o.detail} for o in self.outcomes]}

    def dump(self) -> str:
        lines = [f"{'PASS' if self.ok else 'FAIL'}\t{self.name}"]
        for o in self.outcomes:
            lines.append(f"  {'ok' if o.ok else 'MISMATCH'}\t{o.label}\t{o.detail}")
        return "\n".join(lines)


def load_manifest(directory: str | os.PathLike | None = None) -> list:
    d = corpus_dir(directory)
    data = yaml.safe_load((d / "manifest.yaml").read_text())
    out = []
    for e in data["entries"]:
        out.append(CorpusEntry(e["name"], e["program"], tuple(e.get("checks", ())),
                               int(e.get("budget", DEFAULT_BUDGET)), e.get("description", "")))
    return sorted(out, key=lambda e: e.name)


def _frac(v) -> Fraction:
    return Fraction(str(v))


def _start(program: Program, spec) -> object:
    if isinstance(spec, Mapping):
        spec = ", ".join(f"{k}={v}" for k, v in spec.items())
    return program.initial_state(parse_bindings(spec or "", program))


def _event(program: Program, text: str):
    e = parse_exp(text, program)
    return lambda s: eval_exp(e, s) is True


def _loop(program: Program) -> tuple:
    """The last top-level loop and the commands before it."""
    parts = flatten_seq(program.body)
    for i in range(len(parts) - 1, -1, -1):
        if isinstance(parts[i], While):
            return seq(*parts[:i]), parts[i]
    raise ValueError("program has no top-level loop")


class _Runner:
    def __init__(self, entry: CorpusEntry, directory: Path, budget: int | None, seed: int | None):
        self.entry = entry
        self.dir = directory
        self.budget = budget if budget is not None else entry.budget
        self.seed = seed
        self.program = parse_program((directory / entry.program).read_text())

    def run(self) -> list:
        out = []
        for chk in self.entry.checks:
            (kind, spec), = chk.items()
            handler = getattr(self, "_" + kind, None)
            if handler is None:
                out.append(CheckOutcome(kind, False, f"unknown check kind {kind!r}"))
                continue
            try:
                out.extend(handler(spec or {}))
            except Exception as exc:  # a crash is a mismatch, not a runner failure
                out.append(CheckOutcome(kind, False, f"{type(exc).__name__}: {exc}"))
        return out

    def _denote(self, spec) -> list:
        p = self.program
        s = _start(p, spec.get("start"))
        r = denote(p.body, s, int(spec.get("budget", self.budget)))
        want = _frac(spec["mass"])
        ev = _event(p, spec["event"])
        masses = sorted({g.prob(ev) for g in r.value.gens})
        ok = r.exact and masses == [want]
        shown = ", ".join(format_value(m) for m in masses)
        return [CheckOutcome(f"denote {spec['event']}", ok,
                             f"mass {shown} in {len(r.value)} generators (expected {format_value(want)}), "
                             f"residual {format_value(r.residual_bound)}")]

    def _script(self, spec) -> list:
        p = self.program
        d = load_script((self.dir / spec["file"]).read_text(), p)
        rep = check_derivation(d, p, int(spec.get("budget", self.budget)))
        want = spec.get("verdict", "accepted")
        got = "accepted" if rep.accepted else "rejected"
        ok = got == want
        if ok and "at" in spec:
            ok = [n.path for n in rep.rejected_nodes] == [spec["at"]]
        if ok and want == "accepted" and "open" in spec:
            ok = rep.open_obligations == int(spec["open"])
        if ok and "post" in spec:
            ok = rep.conclusion is not None and rep.conclusion.post == parse_assertion(spec["post"], p)
        out = [CheckOutcome(f"script {spec['file']}", ok, rep.summary())]
        if spec.get("shadow") and rep.accepted:
            t = rep.conclusion
            wits = standard_witnesses(p, t.pre, seed=self.seed or 0)
            verdicts = check_triple_semantic(t, p, wits, int(spec.get("shadow_budget", self.budget)))
            bad = soundness_violations(verdicts)
            counts = {}
            for v in verdicts:
                counts[v.status] = counts.get(v.status, 0) + 1
            shown = ", ".join(f"{k} {n}" for k, n in sorted(counts.items()))
            out.append(CheckOutcome(f"shadow {spec['file']}", not bad,
                                    f"{len(wits)} witnesses: {shown}; {len(bad)} violations"))
        return out

    def _triple(self, spec) -> list:
        p = self.program
        ranges = spec.get("for") or {}
        combos = [{}]
        for name, (lo, hi) in ranges.items():
            combos = [dict(c, **{name: k}) for c in combos for k in range(int(lo), int(hi) + 1)]
        want = spec.get("holds", True)
        out = []
        for env in combos:
            t = Triple(parse_assertion(spec["pre"].format(**env), p), parse_cmd(spec["cmd"].format(**env), p),
                       parse_assertion(spec["post"].format(**env), p))
            ob = check_triple_exhaustive(t, p, int(spec.get("budget", self.budget)))
            ok = ob.status == ("discharged" if want else "failed")
            label = "triple" + "".join(f" {k}={v}" for k, v in env.items())
            out.append(CheckOutcome(label, ok, f"{ob.status}: {ob.detail}"))
        return out

    def _minterm(self, spec) -> list:
        p = self.program
        _, w = _loop(p)
        n = int(spec["iterations"])
        tab = min_termination_prob(w.body, w.guard, p.states(), n, self.budget)
        out = []
        if "at_least" in spec:
            lo = _frac(spec["at_least"])
            m = tab.min()
            out.append(CheckOutcome(f"minterm {n} iterations", m >= lo,
                                    f"minimum {float(m):.9f} (>= {format_value(lo)} required)"))
        if "at" in spec:
            s = _start(p, spec["at"])
            v = tab[s]
            want = _frac(spec["value"])
            out.append(CheckOutcome(f"minterm {n} iterations at {spec['at']}", v == want,
                                    f"{format_value(v)} (expected {format_value(want)})"))
        return out

    def _iterate(self, spec) -> list:
        p = self.program
        init, w = _loop(p)
        base = _frac(spec["base"])
        r0 = denote(init, _start(p, spec.get("start")), self.budget).value
        starts = [s for g in r0.gens for s in g.support() if s is not BOT]
        out = []
        for n in range(int(spec.get("from", 0)), int(spec["depth"]) + 1):
            # n body runs are the (n+1)-th Kleene iterate
            res = max(loop_iterate(w.body, w.guard, n + 1, s, budget=self.budget).residual for s in starts)
            ok = res <= base ** n
            if spec.get("tight") and ok:
                ok = res == base ** n
            out.append(CheckOutcome(f"residual after {n} runs", ok,
                                    f"{format_value(res)} (bound {format_value(base ** n)})"))
        return out

    def _simulate(self, spec) -> list:
        p = self.program
        seed = int(spec.get("seed", 0)) if self.seed is None else self.seed
        n = int(spec["samples"])
        r = mc_simulate(p.body, _start(p, spec.get("start")), spec.get("scheduler", "uniform"), n, seed,
                        budget=int(spec.get("scheduler_budget", 8)))
        f = _frac(spec["frequency"])
        k = float(spec.get("sigma", 4))
        hits = r.count(_event(p, spec["event"]))
        sd = math.sqrt(float(f * (1 - f)) / n)
        z = (hits / n - float(f)) / sd if sd > 0 else (0.0 if hits == n * f else math.inf)
        ok = abs(z) <= k and r.nonterminated == 0
        return [CheckOutcome(f"simulate {spec['event']}", ok,
                             f"{hits}/{n} under {r.scheduler} seed {seed}, z = {z:+.2f} (|z| <= {k:g})")]


def run_entry(entry: CorpusEntry, directory: str | os.PathLike | None = None,
              budget: int | None = None, seed: int | None = None) -> EntryResult:
    t0 = time.perf_counter()
    r = _Runner(entry, corpus_dir(directory), budget, seed)
    outs = r.run()
    return EntryResult(entry.name, tuple(outs), time.perf_counter() - t0)


def _run_one(args) -> EntryResult:
    return run_entry(*args)


def run_corpus(pattern: str = "*", directory: str | os.PathLike | None = None, budget: int | None = None,
               seed: int | None = None, jobs: int = 1) -> list:
    """Run every entry whose name matches the glob; results ordered by name."""
    d = corpus_dir(directory)
    entries = [e for e in load_manifest(d) if fnmatch.fnmatchcase(e.name, pattern)]
    args = [(e, d, budget, seed) for e in entries]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(jobs) as ex:
            return list(ex.map(_run_one, args))
    return [_run_one(a) for a in args]
