"""Command-line front end: ``demonic-ol <verb> ...``.

All output is deterministic for fixed flags; ``--format json`` gives a
machine-readable record with a stable key order.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .convex import DEFAULT_CAP, GeneratorCapExceeded
from .corpus_runner import _loop, run_corpus
from .lang import BOT, EvalTypeError, eval_exp, format_value
from .parser import ParseError, parse_bindings, parse_exp, parse_program
from .proof import ProofScriptError, check_script
from .semantics import DEFAULT_BUDGET, SemanticsError, denote, min_termination_prob
from .simulate import SCHEDULERS, mc_simulate


def _gen_json(g) -> list:
    return [["⊥" if x is BOT else repr(x), format_value(p)] for x, p in g.sorted_items()]


def _emit(args, text: str, data) -> None:
    if args.format == "json":
        print(json.dumps(data, indent=2, ensure_ascii=False))
    else:
        print(text)


def _program(path: str):
    return parse_program(Path(path).read_text())


def _start(program, text: str | None):
    return program.initial_state(parse_bindings(text or "", program))


def _truth(e, s) -> bool:
    return eval_exp(e, s) is True


def cmd_check(args) -> int:
    program = _program(args.program)
    rep = check_script(Path(args.script).read_text(), program, args.budget, args.cap)
    _emit(args, rep.dump(args.strict), rep.to_dict(args.strict))
    return rep.exit_code(args.strict)


def cmd_denote(args) -> int:
    program = _program(args.program)
    s = _start(program, args.start)
    r = denote(program.body, s, args.budget, args.cap)
    gens = sorted(r.value.gens, key=lambda g: [(repr(x), p) for x, p in g.sorted_items()])
    data = {"start": repr(s), "budget": args.budget, "residual": format_value(r.residual_bound),
            "exact": r.exact, "stabilized": r.stabilized, "generators": [_gen_json(g) for g in gens]}
    text = f"start {s!r}\nbudget {args.budget}\n" + r.dump()
    if args.event:
        e = parse_exp(args.event, program)
        masses = [g.prob(lambda t: _truth(e, t)) for g in gens]
        data["event"] = {"expression": args.event, "masses": [format_value(m) for m in masses]}
        text += f"\nevent {args.event}\t" + " ".join(format_value(m) for m in masses)
    _emit(args, text, data)
    return 0


def cmd_simulate(args) -> int:
    program = _program(args.program)
    s = _start(program, args.start)
    r = mc_simulate(program.body, s, args.scheduler, args.samples, args.seed, max_steps=args.max_steps,
                    budget=min(args.budget, 8), cap=args.cap)
    hist = sorted(r.histogram.items(), key=lambda kv: kv[0].sort_key())
    data = {"prng": r.prng, "seed": r.seed, "scheduler": r.scheduler, "samples": r.samples,
            "nonterminated": r.nonterminated, "histogram": [[repr(x), n] for x, n in hist]}
    text = r.dump()
    if args.event:
        e = parse_exp(args.event, program)
        hits = r.count(lambda t: _truth(e, t))
        data["event"] = {"expression": args.event, "count": hits, "frequency": hits / r.samples}
        text += f"\nevent {args.event}\t{hits}/{r.samples}"
    _emit(args, text, data)
    return 0


def cmd_minterm(args) -> int:
    program = _program(args.program)
    _, w = _loop(program)
    tab = min_termination_prob(w.body, w.guard, program.states(), args.iterations, args.budget, args.cap)
    rows = sorted(tab.values.items(), key=lambda kv: kv[0].sort_key())
    if args.at:
        s = _start(program, args.at)
        rows = [(s, tab[s])]
    data = {"iterations": tab.iterations, "minimum": format_value(tab.min()),
            "values": [[repr(x), format_value(v)] for x, v in rows]}
    lines = [f"iterations {tab.iterations}", f"minimum {format_value(tab.min())}"]
    lines += [f"{x!r}\t{format_value(v)}" for x, v in rows]
    _emit(args, "\n".join(lines), data)
    return 0


def cmd_corpus(args) -> int:
    results = run_corpus(args.pattern, args.dir, None if args.budget_given is None else args.budget,
                         args.seed_given, args.jobs)
    if not results:
        print(f"no corpus entry matches {args.pattern!r}", file=sys.stderr)
        return 1
    failed = [r for r in results if not r.ok]
    text = "\n".join(r.dump() for r in results)
    text += f"\n{len(results) - len(failed)}/{len(results)} entries passed"
    _emit(args, text, {"entries": [r.to_dict() for r in results], "passed": len(results) - len(failed),
                       "total": len(results)})
    return 1 if failed else 0


def _common(suppress: bool) -> argparse.ArgumentParser:
    # flags are accepted before and after the verb; the verb-level copies
    # must not overwrite values given earlier, hence SUPPRESS there
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    c = argparse.ArgumentParser(add_help=False)
    c.add_argument("--budget", type=int, default=d(None),
                   help=f"loop unrolling budget (default {DEFAULT_BUDGET})")
    c.add_argument("--cap", type=int, default=d(DEFAULT_CAP), help="generator cap per convex set")
    c.add_argument("--seed", type=int, default=d(None), help="random seed (default 0)")
    c.add_argument("--strict", action="store_true", default=d(False), help="treat open obligations as failures")
    c.add_argument("--format", choices=("text", "json"), default=d("text"))
    return c


def build_parser() -> argparse.ArgumentParser:
    common = _common(True)
    ap = argparse.ArgumentParser(prog="demonic-ol", parents=[_common(False)],
                                 description="Outcome logic with demonic and probabilistic choice.")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("check", parents=[common], help="check a proof script against a program")
    p.add_argument("program")
    p.add_argument("script")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("denote", parents=[common], help="print the outcome set from a start state")
    p.add_argument("program")
    p.add_argument("--start", help="bindings such as 'x=1, y=true'; other variables take defaults")
    p.add_argument("--event", help="also print each generator's mass on this boolean expression")
    p.set_defaults(fn=cmd_denote)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo simulation under a scheduler")
    p.add_argument("program")
    p.add_argument("--start")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--scheduler", choices=SCHEDULERS, default="uniform")
    p.add_argument("--max-steps", type=int, default=100_000)
    p.add_argument("--event")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("minterm", parents=[common], help="minimum termination probability of the last loop")
    p.add_argument("program")
    p.add_argument("--iterations", type=int, default=64)
    p.add_argument("--at", help="report only this state")
    p.set_defaults(fn=cmd_minterm)

    p = sub.add_parser("corpus", parents=[common], help="run the golden corpus")
    p.add_argument("pattern", nargs="?", default="*", help="entry name glob")
    p.add_argument("--dir", help="corpus directory (default: $DEMONIC_OL_CORPUS or the bundled one)")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(fn=cmd_corpus)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.budget_given = args.budget
    args.seed_given = args.seed
    if args.budget is None:
        args.budget = DEFAULT_BUDGET
    if args.seed is None:
        args.seed = 0
    try:
        return args.fn(args)
    except (OSError, ParseError, ProofScriptError, SemanticsError, EvalTypeError, GeneratorCapExceeded,
            KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
