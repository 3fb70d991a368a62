"""Checking derivations of demonic outcome triples.

A derivation is a tree of rule applications.  Every node states (or
inherits from its parent) a precondition, a program and a postcondition.
The checker computes the conclusion that the rule licenses from the node's
premises and payload, then relates it to the stated triple: syntactically
equal parts need nothing, otherwise an implicit consequence step is recorded
as an implication obligation.  Side conditions that are triples about loop
bodies are discharged semantically by exhaustive enumeration over the
declared finite state space.

Scripts are YAML documents::

    defs:                     # optional named assertions, used as $name
      win: "[pick = car]"
    proof:
      rule: Seq
      at: 1                   # split point in the flattened sequence
      pre: "[true]"
      post: "$win (+ 1/3) [pick != car]"
      prog: "..."             # optional below the root
      premises: [...]
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import yaml

from .assertions import (
    Almost, Amp, And, Assertion, OPlus, Proved, Refuted, Top, _Cells, amp_all, atom_holds,
    free_vars, implies, satisfies, substitute,
)
from .convex import DEFAULT_CAP, ConvexSet, GeneratorCapExceeded, kleisli
from .dist import Dist, convex_combine, dirac
from .lang import (
    BOT, Assign, BinOp, Cmd, EvalTypeError, Exp, If, Lit, NDChoice, Not, ProbChoice, Program, Seq, Skip,
    Var, While, conj, eval_exp, exp_vars, flatten_seq, format_value, is_loop_free, lit, modified_vars, seq,
)
from .parser import ParseError, parse_assertion, parse_cmd, parse_exp, print_assertion, print_cmd, print_exp
from .semantics import DEFAULT_BUDGET, Denoter, SemanticsError, min_termination_prob

RULES = (
    "Skip", "Assign", "Seq", "Prob", "Nondet", "If1", "If2", "ProbSplit", "NDSplit", "Consequence",
    "Constancy", "IfJoinProb", "IfJoinND", "IfHoare", "Flip", "NDSelect", "ZeroOne", "BoundedVariant",
    "BoundedRank", "ProgressingRank",
)
LOOP_RULES = frozenset({"ZeroOne", "BoundedVariant", "BoundedRank", "ProgressingRank"})
_RULE_KEYS = {r.lower(): r for r in RULES}

ACCEPTED = "accepted"
REJECTED = "rejected"
UNKNOWN = "obligation-unknown"


class ProofScriptError(ValueError):
    """The script is malformed: unknown rule, missing field, bad payload."""


@dataclass(frozen=True)
class Triple:
    pre: Assertion
    prog: Cmd
    post: Assertion

    def show(self) -> str:
        return f"{{{print_assertion(self.pre)}}} {print_cmd(self.prog)} {{{print_assertion(self.post)}}}"


@dataclass(frozen=True, eq=False)
class Derivation:
    rule: str
    pre: Assertion | None = None
    prog: Cmd | None = None
    post: Assertion | None = None
    premises: tuple = ()
    payload: Mapping = field(default_factory=dict)


@dataclass(frozen=True)
class Obligation:
    path: str
    kind: str
    claim: str
    status: str  # discharged | failed | unknown
    method: str
    detail: str = ""


@dataclass(frozen=True)
class NodeVerdict:
    path: str
    rule: str
    status: str
    reason: str = ""
    conclusion: Triple | None = None


@dataclass(frozen=True)
class CheckReport:
    nodes: tuple
    obligations: tuple
    conclusion: Triple | None

    @property
    def accepted(self) -> bool:
        return all(n.status != REJECTED for n in self.nodes)

    @property
    def open_obligations(self) -> int:
        return sum(1 for o in self.obligations if o.status == "unknown")

    @property
    def rejected_nodes(self) -> list:
        return [n for n in self.nodes if n.status == REJECTED]

    def node(self, path: str) -> NodeVerdict:
        for n in self.nodes:
            if n.path == path:
                return n
        raise KeyError(path)

    def exit_code(self, strict: bool = False) -> int:
        if not self.accepted:
            return 1
        if self.open_obligations:
            return 1 if strict else 2
        return 0

    def summary(self, strict: bool = False) -> str:
        if not self.accepted:
            first = self.rejected_nodes[0]
            return f"REJECTED at {first.path} ({first.rule}): {first.reason}"
        n = self.open_obligations
        if n and strict:
            return f"REJECTED (strict), {n} open obligation{'s' if n != 1 else ''}"
        return f"ACCEPTED, {n} open obligation{'s' if n != 1 else ''}"

    def to_dict(self, strict: bool = False) -> dict:
        return {
            "verdict": self.summary(strict),
            "conclusion": self.conclusion.show() if self.conclusion else None,
            "nodes": [{"path": n.path, "rule": n.rule, "status": n.status, "reason": n.reason} for n in self.nodes],
            "obligations": [{"path": o.path, "kind": o.kind, "claim": o.claim, "status": o.status,
                             "method": o.method, "detail": o.detail} for o in self.obligations],
        }

    def dump(self, strict: bool = False) -> str:
        lines = [self.summary(strict)]
        if self.conclusion is not None:
            lines.append("conclusion " + self.conclusion.show())
        for n in self.nodes:
            tail = f"\t{n.reason}" if n.reason else ""
            lines.append(f"node {n.path}\t{n.rule}\t{n.status}{tail}")
        for o in self.obligations:
            tail = f"\t{o.detail}" if o.detail else ""
            lines.append(f"obligation {o.path}\t{o.kind}\t{o.status}\t{o.method}\t{o.claim}{tail}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Script loading


def _rule_name(name) -> str:
    key = re.sub(r"[\s_\-]", "", str(name)).lower()
    if key not in _RULE_KEYS:
        raise ProofScriptError(f"unknown rule {name!r}; known rules: {', '.join(RULES)}")
    return _RULE_KEYS[key]


def _expand(text, defs: Mapping) -> str:
    if not isinstance(text, str):
        raise ProofScriptError(f"expected an assertion string, got {text!r}")

    def rep(m):
        name = m.group(1)
        if name not in defs:
            raise ProofScriptError(f"undefined assertion ${name}")
        return "(" + defs[name] + ")"

    # definitions may refer to earlier ones
    for _ in range(16):
        new = re.sub(r"\$([A-Za-z_][A-Za-z0-9_]*)", rep, text)
        if new == text:
            return new
        text = new
    raise ProofScriptError("assertion definitions are cyclic")


def _assertion(text, program: Program, defs: Mapping) -> Assertion:
    try:
        return parse_assertion(_expand(text, defs), program)
    except ParseError as exc:
        raise ProofScriptError(f"in assertion {text!r}: {exc}") from None


_NODE_KEYS = {"rule", "pre", "post", "prog", "premises"}
_ASSERTION_PAYLOAD = {"inv", "exit"}


def _node_from(data, program: Program, defs: Mapping) -> Derivation:
    if not isinstance(data, Mapping) or "rule" not in data:
        raise ProofScriptError(f"a derivation node needs a 'rule' field: {data!r}")
    rule = _rule_name(data["rule"])
    pre = _assertion(data["pre"], program, defs) if data.get("pre") is not None else None
    post = _assertion(data["post"], program, defs) if data.get("post") is not None else None
    prog = None
    if data.get("prog") is not None:
        try:
            prog = parse_cmd(str(data["prog"]), program)
        except ParseError as exc:
            raise ProofScriptError(f"in program {data['prog']!r}: {exc}") from None
    premises = tuple(_node_from(p, program, defs) for p in (data.get("premises") or ()))
    payload = {}
    for k, v in data.items():
        if k in _NODE_KEYS:
            continue
        if k in _ASSERTION_PAYLOAD:
            v = _assertion(v, program, defs)
        elif k == "variants":
            v = [_assertion(x, program, defs) for x in v]
        payload[k] = v
    return Derivation(rule, pre, prog, post, premises, payload)


def load_script(text: str, program: Program) -> Derivation:
    """Parse a YAML proof script against ``program``."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ProofScriptError(f"invalid YAML: {exc}") from None
    if not isinstance(doc, Mapping) or "proof" not in doc:
        raise ProofScriptError("a proof script needs a top-level 'proof' node")
    defs = {str(k): str(v) for k, v in (doc.get("defs") or {}).items()}
    root = _node_from(doc["proof"], program, defs)
    if root.prog is None:
        root = Derivation(root.rule, root.pre, program.body, root.post, root.premises, root.payload)
    return root


# ---------------------------------------------------------------------------
# Checking


def _frac(v, what: str) -> Fraction:
    try:
        return Fraction(str(v).strip())
    except (ValueError, ZeroDivisionError):
        raise ProofScriptError(f"{what} must be a rational number, got {v!r}") from None


def _same_prog(a: Cmd, b: Cmd) -> bool:
    return flatten_seq(a) == flatten_seq(b)


def _outer_loops(c: Cmd) -> list:
    if isinstance(c, While):
        return [c]
    if isinstance(c, Seq):
        return _outer_loops(c.first) + _outer_loops(c.second)
    if isinstance(c, (NDChoice, ProbChoice)):
        return _outer_loops(c.left) + _outer_loops(c.right)
    if isinstance(c, If):
        return _outer_loops(c.then) + _outer_loops(c.orelse)
    return []


def _eq(e: Exp, v) -> Exp:
    return BinOp("=", e, lit(v))


def _show(a) -> str:
    return print_assertion(a) if isinstance(a, Assertion) else str(a)


class _Ctx:
    def __init__(self, path: str, rule: str):
        self.path = path
        self.rule = rule
        self.errors: list = []
        self.unknown = False

    def fail(self, msg: str) -> None:
        self.errors.append(msg)


class _Reject(Exception):
    pass


class Checker:
    """Checks one derivation against one program.

    ``budget`` bounds loop unrolling in semantic side conditions and
    ``iterations`` is the default value-iteration count used by the
    termination premise of the zero-one rule.
    """

    def __init__(self, program: Program, budget: int = DEFAULT_BUDGET, cap: int = DEFAULT_CAP,
                 iterations: int = 64):
        self.program = program
        self.domains = program.domains
        self.budget = budget
        self.cap = cap
        self.iterations = iterations
        self._states = None
        self.nodes: list = []
        self.obligations: list = []
        self.loops_ok: list = []

    # -- helpers ------------------------------------------------------------
    @property
    def states(self) -> list:
        if self._states is None:
            if not self.program.has_finite_domains():
                raise _Reject("semantic side conditions need finite domains for every variable")
            self._states = self.program.states()
        return self._states

    def _record(self, ctx: _Ctx, kind: str, claim: str, status: str, method: str, detail: str = "") -> None:
        self.obligations.append(Obligation(ctx.path, kind, claim, status, method, detail))
        if status == "failed":
            ctx.fail(f"{kind} fails: {claim}" + (f" ({detail})" if detail else ""))
        elif status == "unknown":
            ctx.unknown = True

    def _imp(self, ctx: _Ctx, a: Assertion, b: Assertion, kind: str) -> None:
        if a == b:
            return
        claim = f"{_show(a)} => {_show(b)}"
        r = implies(a, b, self.domains)
        if isinstance(r, Proved):
            self._record(ctx, kind, claim, "discharged", r.method)
        elif isinstance(r, Refuted):
            self._record(ctx, kind, claim, "failed", r.method, "counterexample " + _dist_text(r.witness))
        else:
            self._record(ctx, kind, claim, "unknown", "none", r.reason)

    def _pre_points(self, pre: Assertion) -> list:
        if isinstance(pre, Almost):
            return [dirac(s) for s in self.states if atom_holds(pre.atom, s)]
        cells = _Cells(None, self.states)
        return [cells.to_dist(v) for v in cells.model_vertices(pre)]

    def _semantic(self, ctx: _Ctx, pre: Assertion, c: Cmd, post: Assertion, kind: str) -> None:
        """Discharge ``{pre} c {post}`` over every extreme model of ``pre``.

        Models of an assertion form a convex set and the semantics commutes
        with mixing, so checking the vertices is enough.
        """
        claim = f"{{{_show(pre)}}} {print_cmd(c)} {{{_show(post)}}}"
        try:
            points = self._pre_points(pre)
            d = Denoter(self.budget, self.cap)
            approx = None
            for mu in points:
                val = kleisli(lambda t: d.den(c, t), ConvexSet([mu], prune=False), cap=self.cap)
                for g in val.gens:
                    if satisfies(g, post, self.domains):
                        continue
                    if val.residual == 0 or d.stable:
                        self._record(ctx, kind, claim, "failed", "semantic",
                                     f"from {_dist_text(mu)} the outcome {_dist_text(g)} violates the postcondition")
                        return
                    approx = val.residual
            if approx is not None:
                self._record(ctx, kind, claim, "unknown", "semantic",
                             f"loop unrolling inconclusive, residual {format_value(approx)}")
            else:
                self._record(ctx, kind, claim, "discharged", "semantic", f"{len(points)} extreme models")
        except (SemanticsError, GeneratorCapExceeded) as exc:
            self._record(ctx, kind, claim, "unknown", "semantic", str(exc))

    # -- traversal ------------------------------------------------------------
    def check(self, d: Derivation) -> CheckReport:
        t = self._node(d, "root", None, None, None)
        return CheckReport(tuple(self.nodes), tuple(self.obligations), t)

    def _node(self, d: Derivation, path: str, pre, post, prog) -> Triple | None:
        ctx = _Ctx(path, d.rule)
        index = len(self.nodes)
        self.nodes.append(None)  # placeholder keeps tree order
        concl = None
        triple = None
        try:
            if d.prog is not None and prog is not None and not _same_prog(d.prog, prog):
                raise _Reject(f"program {print_cmd(d.prog)} does not match the enclosing rule, "
                              f"which expects {print_cmd(prog)}")
            prog = d.prog if d.prog is not None else prog
            pre = d.pre if d.pre is not None else pre
            post = d.post if d.post is not None else post
            if prog is None:
                raise _Reject("cannot infer the program of this node")
            if pre is None or post is None:
                raise _Reject("cannot infer the " + ("precondition" if pre is None else "postcondition"))
            triple = Triple(pre, prog, post)
            handler = getattr(self, "_rule_" + d.rule)
            cpre, cpost = handler(ctx, d, pre, prog, post)
            self._imp(ctx, pre, cpre, "precondition")
            self._imp(ctx, cpost, post, "postcondition")
            concl = triple
        except _Reject as exc:
            ctx.fail(str(exc))
        except ProofScriptError as exc:
            ctx.fail(f"malformed payload: {exc}")
        except (EvalTypeError, ParseError) as exc:
            ctx.fail(f"evaluation error: {exc}")
        if ctx.errors:
            status, reason = REJECTED, "; ".join(ctx.errors)
        elif ctx.unknown:
            status, reason = UNKNOWN, "some obligations could not be decided"
        else:
            status, reason = ACCEPTED, ""
        if status != REJECTED and d.rule in LOOP_RULES and triple is not None:
            self.loops_ok.append(triple.prog)
        self.nodes[index] = NodeVerdict(path, d.rule, status, reason, concl)
        return triple

    def _child(self, d: Derivation, i: int, path: str, pre, post, prog) -> Triple:
        if i >= len(d.premises):
            raise _Reject(f"{d.rule} needs a premise derivation number {i + 1}")
        t = self._node(d.premises[i], f"{path}/{i}", pre, post, prog)
        if t is None:
            raise _Reject(f"premise {i + 1} could not be resolved")
        return t

    def _arity(self, d: Derivation, n: int) -> None:
        if len(d.premises) != n:
            raise _Reject(f"{d.rule} takes {n} premise derivation{'s' if n != 1 else ''}, got {len(d.premises)}")

    def _prob_of(self, d: Derivation, e: Exp | None, ctx: _Ctx, pre: Assertion) -> Fraction:
        if "p" in d.payload:
            p = _frac(d.payload["p"], "p")
        elif isinstance(e, Lit) and isinstance(e.value, Fraction):
            p = e.value
        else:
            raise ProofScriptError("the probability is not a literal; give it as payload 'p'")
        if not 0 <= p <= 1:
            raise ProofScriptError(f"probability {p} outside [0,1]")
        if e is not None and not (isinstance(e, Lit) and e.value == p):
            self._imp(ctx, pre, Almost(_eq(e, p)), "probability")
        return p

    # -- commands ---------------------------------------------------------------
    def _rule_Skip(self, ctx, d, pre, prog, post):
        self._arity(d, 0)
        if not isinstance(prog, Skip):
            raise _Reject("Skip applies to skip only")
        return pre, pre

    def _rule_Assign(self, ctx, d, pre, prog, post):
        self._arity(d, 0)
        if not isinstance(prog, Assign):
            raise _Reject("Assign applies to an assignment only")
        return substitute(post, prog.exp, prog.var), post

    def _rule_Seq(self, ctx, d, pre, prog, post):
        self._arity(d, 2)
        parts = flatten_seq(prog)
        k = int(d.payload.get("at", 1))
        if not 1 <= k < len(parts):
            raise _Reject(f"split point {k} outside 1..{len(parts) - 1}")
        first, second = seq(*parts[:k]), seq(*parts[k:])
        mid = d.premises[0].post if d.premises[0].post is not None else d.premises[1].pre
        if mid is None:
            raise _Reject("Seq needs the intermediate assertion on one of its premises")
        t1 = self._child(d, 0, ctx.path, pre, mid, first)
        t2 = self._child(d, 1, ctx.path, t1.post, post, second)
        self._imp(ctx, t1.post, t2.pre, "midpoint")
        return t1.pre, t2.post

    def _rule_Prob(self, ctx, d, pre, prog, post):
        self._arity(d, 2)
        if not isinstance(prog, ProbChoice):
            raise _Reject("Prob applies to a probabilistic choice only")
        p = self._prob_of(d, prog.prob, ctx, pre)
        split = isinstance(post, OPlus) and post.prob == p
        t1 = self._child(d, 0, ctx.path, pre, post.left if split else None, prog.left)
        t2 = self._child(d, 1, ctx.path, pre, post.right if split else None, prog.right)
        self._imp(ctx, pre, t1.pre, "premise precondition")
        self._imp(ctx, pre, t2.pre, "premise precondition")
        return pre, OPlus(p, t1.post, t2.post)

    def _rule_Nondet(self, ctx, d, pre, prog, post):
        self._arity(d, 2)
        if not isinstance(prog, NDChoice):
            raise _Reject("Nondet applies to a nondeterministic choice only")
        if not isinstance(pre, Almost):
            raise _Reject(f"precondition {_show(pre)} is not a basic assertion [P]; "
                          "split it with ProbSplit or NDSplit first")
        split = isinstance(post, Amp)
        t1 = self._child(d, 0, ctx.path, pre, post.left if split else None, prog.left)
        t2 = self._child(d, 1, ctx.path, pre, post.right if split else None, prog.right)
        self._imp(ctx, pre, t1.pre, "premise precondition")
        self._imp(ctx, pre, t2.pre, "premise precondition")
        return pre, Amp(t1.post, t2.post)

    def _if(self, ctx, d, pre, prog, branch: int):
        self._arity(d, 1)
        if not isinstance(prog, If):
            raise _Reject(f"{d.rule} applies to a conditional only")
        guard = prog.guard if branch == 0 else Not(prog.guard)
        self._imp(ctx, pre, Almost(guard), "guard")
        return prog.then if branch == 0 else prog.orelse

    def _rule_If1(self, ctx, d, pre, prog, post):
        c = self._if(ctx, d, pre, prog, 0)
        t = self._child(d, 0, ctx.path, pre, post, c)
        self._imp(ctx, pre, t.pre, "premise precondition")
        return pre, t.post

    def _rule_If2(self, ctx, d, pre, prog, post):
        c = self._if(ctx, d, pre, prog, 1)
        t = self._child(d, 0, ctx.path, pre, post, c)
        self._imp(ctx, pre, t.pre, "premise precondition")
        return pre, t.post

    # -- structural -------------------------------------------------------------
    def _split(self, ctx, d, pre, post, kind, progs):
        self._arity(d, 2)
        if not isinstance(pre, kind):
            sym = "(+ p)" if kind is OPlus else "&"
            raise _Reject(f"precondition {_show(pre)} is not a {sym} composition")
        if kind is OPlus:
            p = _frac(d.payload["p"], "p") if "p" in d.payload else pre.prob
            if pre.prob != p:
                raise _Reject(f"precondition splits at {format_value(pre.prob)}, not {format_value(p)}")
            ok = isinstance(post, OPlus) and post.prob == p
        else:
            p = None
            ok = isinstance(post, Amp)
        t1 = self._child(d, 0, ctx.path, pre.left, post.left if ok else None, progs[0])
        t2 = self._child(d, 1, ctx.path, pre.right, post.right if ok else None, progs[1])
        if kind is OPlus:
            return t1, t2, (lambda a, b: OPlus(p, a, b))
        return t1, t2, Amp

    def _rule_ProbSplit(self, ctx, d, pre, prog, post):
        t1, t2, mk = self._split(ctx, d, pre, post, OPlus, (prog, prog))
        return mk(t1.pre, t2.pre), mk(t1.post, t2.post)

    def _rule_NDSplit(self, ctx, d, pre, prog, post):
        t1, t2, mk = self._split(ctx, d, pre, post, Amp, (prog, prog))
        return mk(t1.pre, t2.pre), mk(t1.post, t2.post)

    def _rule_Consequence(self, ctx, d, pre, prog, post):
        self._arity(d, 1)
        t = self._child(d, 0, ctx.path, pre, post, prog)
        return t.pre, t.post

    def _rule_Constancy(self, ctx, d, pre, prog, post):
        self._arity(d, 1)
        if "frame" not in d.payload:
            raise ProofScriptError("Constancy needs a 'frame' expression")
        frame = parse_exp(str(d.payload["frame"]), self.program)
        fa = Almost(frame)

        def strip(a):
            if isinstance(a, And):
                if a.right == fa:
                    return a.left
                if a.left == fa:
                    return a.right
            return None

        t = self._child(d, 0, ctx.path, strip(pre), strip(post), prog)
        certified = is_loop_free(prog) or all(
            any(w == ok for ok in self.loops_ok) for w in _outer_loops(prog))
        mod = modified_vars(prog, self.program.variables, terminating=certified)
        clash = sorted(mod & exp_vars(frame))
        if clash:
            why = "" if certified else " (the program is not certified terminating, so it may modify anything)"
            raise _Reject(f"frame mentions modified variable(s) {', '.join(clash)}{why}")
        return And(t.pre, fa), And(t.post, fa)

    # -- derived rules ------------------------------------------------------------
    def _ifjoin(self, ctx, d, pre, prog, post, kind):
        if not isinstance(prog, If):
            raise _Reject(f"{d.rule} applies to a conditional only")
        t1, t2, mk = self._split(ctx, d, pre, post, kind, (prog.then, prog.orelse))
        self._imp(ctx, t1.pre, Almost(prog.guard), "guard")
        self._imp(ctx, t2.pre, Almost(Not(prog.guard)), "guard")
        return mk(t1.pre, t2.pre), mk(t1.post, t2.post)

    def _rule_IfJoinProb(self, ctx, d, pre, prog, post):
        return self._ifjoin(ctx, d, pre, prog, post, OPlus)

    def _rule_IfJoinND(self, ctx, d, pre, prog, post):
        return self._ifjoin(ctx, d, pre, prog, post, Amp)

    def _rule_IfHoare(self, ctx, d, pre, prog, post):
        self._arity(d, 2)
        if not isinstance(prog, If):
            raise _Reject("IfHoare applies to a conditional only")
        if not isinstance(pre, Almost):
            raise _Reject(f"precondition {_show(pre)} is not a basic assertion [P]")
        r1 = Almost(conj(pre.atom, prog.guard))
        r2 = Almost(conj(pre.atom, Not(prog.guard)))
        t1 = self._child(d, 0, ctx.path, r1, post, prog.then)
        t2 = self._child(d, 1, ctx.path, r2, post, prog.orelse)
        self._imp(ctx, r1, t1.pre, "premise precondition")
        self._imp(ctx, r2, t2.pre, "premise precondition")
        if t1.post == t2.post:
            return pre, t1.post
        self._imp(ctx, t1.post, post, "branch postcondition")
        self._imp(ctx, t2.post, post, "branch postcondition")
        return pre, post

    def _rule_Flip(self, ctx, d, pre, prog, post):
        self._arity(d, 0)
        ok = (isinstance(prog, ProbChoice) and isinstance(prog.left, Assign) and isinstance(prog.right, Assign)
              and prog.left.var == prog.right.var and prog.left.exp == Lit(True) and prog.right.exp == Lit(False))
        if not ok:
            raise _Reject("Flip applies to x := flip(e) only")
        x = prog.left.var
        if x in free_vars(pre):
            raise _Reject(f"the flipped variable {x} occurs in the precondition")
        p = self._prob_of(d, prog.prob, ctx, pre)
        out = OPlus(p, Almost(_eq(Var(x), True)), Almost(_eq(Var(x), False)))
        return pre, And(pre, out)

    def _rule_NDSelect(self, ctx, d, pre, prog, post):
        self._arity(d, 0)
        leaves = []

        def walk(c):
            if isinstance(c, NDChoice):
                walk(c.left)
                walk(c.right)
            elif isinstance(c, Assign) and isinstance(c.exp, Lit):
                leaves.append(c)
            else:
                raise _Reject("NDSelect applies to x <- S only")

        walk(prog)
        names = {a.var for a in leaves}
        if len(names) != 1:
            raise _Reject("NDSelect needs every branch to assign the same variable")
        x = Var(leaves[0].var)
        return Almost(Lit(True)), amp_all(Almost(BinOp("=", x, a.exp)) for a in leaves)

    # -- loops ----------------------------------------------------------------------
    def _loop(self, d, prog) -> While:
        if not isinstance(prog, While):
            raise _Reject(f"{d.rule} applies to a while loop only")
        return prog

    def _need(self, d, *keys):
        for k in keys:
            if k not in d.payload:
                raise ProofScriptError(f"{d.rule} needs payload '{k}'")

    def _premise(self, ctx, d, key, value, pre, post, body, kind):
        """Use a sub-derivation tagged ``key: value`` if present, else check semantically."""
        for i, sub in enumerate(d.premises):
            if key is None or str(sub.payload.get(key)) == str(value):
                t = self._child(d, i, ctx.path, pre, post, body)
                self._imp(ctx, pre, t.pre, kind + " precondition")
                self._imp(ctx, t.post, post, kind + " postcondition")
                return
        self._semantic(ctx, pre, body, post, kind)

    def _rule_ZeroOne(self, ctx, d, pre, prog, post):
        w = self._loop(d, prog)
        self._need(d, "inv", "exit", "p")
        inv, exit_ = d.payload["inv"], d.payload["exit"]
        p = _frac(d.payload["p"], "p")
        if not 0 < p <= 1:
            raise _Reject(f"the termination probability must be positive, got {format_value(p)}")
        self._imp(ctx, inv, Almost(w.guard), "invariant guard")
        self._imp(ctx, exit_, Almost(Not(w.guard)), "exit guard")
        self._premise(ctx, d, None, None, inv, Amp(inv, exit_), w.body, "invariant pair")
        k = int(d.payload.get("iterations", self.iterations))
        claim = f"{{{_show(inv)}}} loop {{[not guard] (+ {format_value(p)}) T}}"
        try:
            table = min_termination_prob(w.body, w.guard, self.states, k, self.budget, self.cap)
        except SemanticsError as exc:
            self._record(ctx, "termination", claim, "unknown", "value iteration", str(exc))
        else:
            worst = None
            for mu in self._pre_points(inv):
                v = sum((q * (table[s] if s is not BOT else 0) for s, q in mu.items()), Fraction(0))
                worst = v if worst is None else min(worst, v)
            if worst is not None and worst < p:
                self._record(ctx, "termination", claim, "failed", "value iteration",
                             f"minimum termination probability {format_value(worst)} after {k} iterations")
            else:
                shown = "vacuous" if worst is None else format_value(worst)
                self._record(ctx, "termination", claim, "discharged", "value iteration",
                             f"minimum {shown} after {k} iterations")
        return inv, exit_

    def _rule_BoundedVariant(self, ctx, d, pre, prog, post):
        w = self._loop(d, prog)
        self._need(d, "variants", "p")
        vs = list(d.payload["variants"])
        p = _frac(d.payload["p"], "p")
        if len(vs) < 2:
            raise _Reject("BoundedVariant needs at least two variants")
        if not 0 < p <= 1:
            raise _Reject(f"p must be positive, got {format_value(p)}")
        n_max = len(vs) - 1
        self._imp(ctx, vs[0], Almost(Not(w.guard)), "variant 0 guard")
        for n in range(1, n_max + 1):
            self._imp(ctx, vs[n], Almost(w.guard), f"variant {n} guard")
        for n in range(1, n_max + 1):
            target = OPlus(p, amp_all(vs[:n]), amp_all(vs))
            self._premise(ctx, d, "n", n, vs[n], target, w.body, f"variant {n} premise")
        return amp_all(vs), vs[0]

    def _rank_setup(self, d):
        inv = parse_exp(str(d.payload["invariant"]), self.program)
        rank = parse_exp(str(d.payload["rank"]), self.program)
        return inv, rank

    def _rule_BoundedRank(self, ctx, d, pre, prog, post):
        w = self._loop(d, prog)
        self._need(d, "invariant", "rank", "lo", "hi", "p")
        inv, rank = self._rank_setup(d)
        lo, hi, p = _frac(d.payload["lo"], "lo"), _frac(d.payload["hi"], "hi"), _frac(d.payload["p"], "p")
        if lo.denominator != 1 or hi.denominator != 1 or lo > hi:
            raise _Reject("the rank bounds must be integers with lo <= hi")
        if not 0 < p <= 1:
            raise _Reject(f"p must be positive, got {format_value(p)}")
        live = Almost(conj(inv, w.guard))
        bad = None
        for s in self.states:
            if atom_holds(live.atom, s):
                r = eval_exp(rank, s)
                if not isinstance(r, Fraction) or r.denominator != 1 or not lo <= r <= hi:
                    bad = (s, r)
                    break
        claim = f"{_show(live)} => [{format_value(lo)} <= {print_exp(rank)} <= {format_value(hi)}]"
        if bad is not None:
            self._record(ctx, "rank bound", claim, "failed", "enumeration",
                         f"state {bad[0]!r} has rank {format_value(bad[1])}")
        else:
            self._record(ctx, "rank bound", claim, "discharged", "enumeration")
        for n in range(int(lo), int(hi) + 1):
            npre = Almost(conj(inv, w.guard, _eq(rank, n)))
            npost = OPlus(p, Almost(conj(inv, BinOp("<", rank, lit(n)))), Almost(inv))
            self._premise(ctx, d, "n", n, npre, npost, w.body, f"rank {n} premise")
        return Almost(inv), Almost(conj(inv, Not(w.guard)))

    def _rule_ProgressingRank(self, ctx, d, pre, prog, post):
        w = self._loop(d, prog)
        self._need(d, "invariant", "rank")
        inv, rank = self._rank_setup(d)
        if "table" in d.payload:
            table = {_frac(k, "rank"): (_frac(v[0], "p"), _frac(v[1], "d")) for k, v in d.payload["table"].items()}
            keys = sorted(table)
            for a, b in zip(keys, keys[1:]):
                if table[b][0] > table[a][0] or table[b][1] > table[a][1]:
                    raise _Reject(f"p and d must be antitone; they grow between ranks "
                                  f"{format_value(a)} and {format_value(b)}")
        else:
            self._need(d, "p", "d")
            table = None
            pd = (_frac(d.payload["p"], "p"), _frac(d.payload["d"], "d"))
        ranks = set()
        for s in self.states:
            if not atom_holds(inv, s):
                continue
            r = eval_exp(rank, s)
            if not isinstance(r, Fraction) or r < 0:
                raise _Reject(f"rank {format_value(r)} at {s!r} is not a nonnegative number")
            if atom_holds(w.guard, s) == (r == 0):
                raise _Reject(f"the guard must be false exactly when the rank is 0; fails at {s!r}")
            if r != 0:
                ranks.add(r)
        for k in sorted(ranks):
            if table is not None:
                if k not in table:
                    raise _Reject(f"no table entry for rank {format_value(k)}")
                p, dd = table[k]
            else:
                p, dd = pd
            if not 0 < p <= 1 or dd <= 0:
                raise _Reject(f"need 0 < p <= 1 and d > 0 at rank {format_value(k)}")
            npre = Almost(conj(inv, w.guard, _eq(rank, k)))
            down = Almost(conj(inv, BinOp("<=", rank, lit(k - dd))))
            up = Almost(inv) if p == 1 else Almost(conj(inv, BinOp("<=", rank, lit(k + p / (1 - p) * dd))))
            self._premise(ctx, d, "k", format_value(k), npre, OPlus(p, down, up), w.body,
                          f"rank {format_value(k)} premise")
        return Almost(inv), Almost(conj(inv, Not(w.guard)))


def check_derivation(d: Derivation, program: Program, budget: int = DEFAULT_BUDGET,
                     cap: int = DEFAULT_CAP) -> CheckReport:
    return Checker(program, budget, cap).check(d)


def check_script(text: str, program: Program, budget: int = DEFAULT_BUDGET,
                 cap: int = DEFAULT_CAP) -> CheckReport:
    return check_derivation(load_script(text, program), program, budget, cap)


def check_triple_exhaustive(t: Triple, program: Program, budget: int = DEFAULT_BUDGET,
                            cap: int = DEFAULT_CAP) -> Obligation:
    """Discharge ``t`` over every extreme model of its precondition.

    Needs finite domains.  The returned obligation has status
    ``discharged``, ``failed`` (with the violating outcome) or ``unknown``.
    """
    ck = Checker(program, budget, cap)
    ctx = _Ctx("triple", "Semantic")
    try:
        ck._semantic(ctx, t.pre, t.prog, t.post, "triple")
    except _Reject as exc:
        return Obligation("triple", "triple", t.show(), "unknown", "none", str(exc))
    return ck.obligations[-1]


# ---------------------------------------------------------------------------
# Semantic triple checking


def _dist_text(mu: Dist) -> str:
    return "{" + ", ".join(f"{x!r}: {format_value(p)}" for x, p in mu.sorted_items()) + "}"


@dataclass(frozen=True)
class WitnessVerdict:
    witness: Dist
    status: str  # accepted | rejected | approximate | skipped
    counterexample: Dist | None = None
    residual: Fraction = Fraction(0)
    consistent: bool = True

    def dump(self) -> str:
        line = f"{self.status}\t{_dist_text(self.witness)}"
        if self.counterexample is not None:
            line += "\tcounterexample " + _dist_text(self.counterexample)
        if self.status == "approximate":
            line += f"\tresidual {format_value(self.residual)}\tconsistent {str(self.consistent).lower()}"
        return line


def check_triple_semantic(t: Triple, program: Program, witnesses: Sequence[Dist],
                          budget: int = DEFAULT_BUDGET, cap: int = DEFAULT_CAP) -> list:
    """Check ``t`` on each witness distribution.

    A witness that fails the precondition is skipped.  If every outcome
    generator satisfies the postcondition the witness is accepted; this is
    sound even for truncated loops, since unrolling only over-approximates
    the outcome set.  A failing generator is a counterexample when the
    denotation is exact, otherwise the verdict is approximate and
    ``consistent`` records whether moving the divergent mass could repair it.
    """
    domains = program.domains
    d = Denoter(budget, cap)
    out = []
    for mu in witnesses:
        if not satisfies(mu, t.pre, domains):
            out.append(WitnessVerdict(mu, "skipped"))
            continue
        val = kleisli(lambda s: d.den(t.prog, s), ConvexSet([mu], prune=False), cap=cap)
        bad = [g for g in val.gens if not satisfies(g, t.post, domains)]
        if not bad:
            out.append(WitnessVerdict(mu, "accepted", residual=val.residual))
        elif val.residual == 0 or d.stable:
            out.append(WitnessVerdict(mu, "rejected", bad[0], val.residual))
        else:
            ok = all(satisfies(g, t.post, domains, up=True) for g in bad)
            out.append(WitnessVerdict(mu, "approximate", bad[0], val.residual, ok))
    return out


def standard_witnesses(program: Program, pre: Assertion, seed: int = 0, mixtures: int = 20,
                       sample: int = 64) -> list:
    """Diracs over (a sample of) the state space, extreme models of ``pre`` and random mixtures."""
    rng = random.Random(seed)
    states = program.states() if program.has_finite_domains() else [program.initial_state()]
    if len(states) > sample:
        states = rng.sample(states, sample)
    pool = [dirac(s) for s in states if satisfies(dirac(s), pre, program.domains)]
    if program.has_finite_domains() and not isinstance(pre, (Almost, Top)):
        cells = _Cells(None, program.states())
        for v in cells.model_vertices(pre):
            mu = cells.to_dist(v)
            if mu not in pool:
                pool.append(mu)
    out = list(pool)
    if len(pool) >= 2:
        for _ in range(mixtures):
            k = rng.randint(2, min(3, len(pool)))
            parts = rng.sample(pool, k)
            ws = [Fraction(rng.randint(1, 9)) for _ in parts]
            tot = sum(ws)
            mu = convex_combine([w / tot for w in ws], parts)
            if satisfies(mu, pre, program.domains):
                out.append(mu)
    return out


def soundness_violations(verdicts: Sequence[WitnessVerdict]) -> list:
    return [v for v in verdicts if v.status == "rejected" or (v.status == "approximate" and not v.consistent)]
