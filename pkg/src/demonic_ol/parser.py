"""Concrete syntax for programs, expressions and outcome assertions.

The grammar is documented in README.md.  Sugar (``flip``, ``<-``, indexed
assignment) is expanded while parsing, so the returned ASTs only contain
core nodes.  ``print_cmd``/``print_exp``/``print_assertion`` produce text
that parses back to the same AST.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .assertions import BOTTOM, TOP, Almost, Amp, And, Assertion, Bot, OPlus, Top
from .lang import (
    BinOp, Cmd, EvalTypeError, Exp, If, Index, Iverson, ListLit, Lit, NDChoice, Neg, Not, Assign,
    ProbChoice, Program, Seq, Skip, State, Update, Var, While, eval_exp, format_value,
    SKIP, TRUE, FALSE,
)


class ParseError(SyntaxError):
    def __init__(self, message: str, line: int, col: int, expected=()):
        self.line = line
        self.col = col
        self.expected = tuple(expected)
        self.message = message
        super().__init__(f"line {line}, column {col}: {message}")


@dataclass(frozen=True)
class Token:
    kind: str  # NUM, NAME, SYM, EOF
    text: str
    line: int
    col: int


_SYMBOLS = sorted("""
:= <- ← -> ↦ .. << >> ⟨ ⟩ <= >= != ≤ ≥ ≠ == = < > + - * / ( ) [ ] { } , ; & ⊕ /\\ ∧ \\/ ∨ ¬ ! ⊙ ^ +[ ⌈ ⌉ ⊤ ⊥
""".split(), key=len, reverse=True)

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>(?://|#)[^\n]*)"
    r"|(?P<num>\d+(?:/\d+)?)|(?P<name>[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<sym>" + "|".join(re.escape(s) for s in _SYMBOLS) + ")"
)

KEYWORDS = frozenset({
    "skip", "if", "then", "else", "while", "do", "var", "in", "def", "macro", "flip",
    "true", "false", "and", "or", "not", "xnor", "bool",
})

_ALIASES = {"←": "<-", "↦": "->", "≤": "<=", "≥": ">=", "≠": "!=", "==": "=", "∧": "/\\",
            "∨": "\\/", "¬": "not", "!": "not", "⊙": "xnor", "⟨": "<<", "⟩": ">>"}


def tokenize(text: str) -> list[Token]:
    toks = []
    pos = 0
    line, col = 1, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind == "num":
                toks.append(Token("NUM", s, line, col))
            elif kind == "name":
                toks.append(Token("NAME", s, line, col))
            elif kind == "sym":
                toks.append(Token("SYM", _ALIASES.get(s, s), line, col))
            col += len(s)
        pos = m.end()
    toks.append(Token("EOF", "", line, col))
    return toks


_EMPTY = State((), ())


def _subst_many(e: Exp, mapping: Mapping[str, Exp]) -> Exp:
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Lit):
        return e
    if isinstance(e, BinOp):
        return BinOp(e.op, _subst_many(e.left, mapping), _subst_many(e.right, mapping))
    if isinstance(e, Not):
        return Not(_subst_many(e.arg, mapping))
    if isinstance(e, Neg):
        return Neg(_subst_many(e.arg, mapping))
    if isinstance(e, Iverson):
        return Iverson(_subst_many(e.arg, mapping))
    if isinstance(e, ListLit):
        return ListLit(tuple(_subst_many(x, mapping) for x in e.items))
    if isinstance(e, Index):
        return Index(_subst_many(e.seq, mapping), _subst_many(e.index, mapping))
    if isinstance(e, Update):
        return Update(_subst_many(e.seq, mapping), _subst_many(e.index, mapping), _subst_many(e.value, mapping))
    raise TypeError(f"not an expression: {e!r}")


def _fresh(c: Cmd) -> Cmd:
    """Structurally equal copy with new node identities (macro expansion)."""
    if isinstance(c, Skip):
        return Skip()
    if isinstance(c, Assign):
        return Assign(c.var, c.exp)
    if isinstance(c, Seq):
        return Seq(_fresh(c.first), _fresh(c.second))
    if isinstance(c, NDChoice):
        return NDChoice(_fresh(c.left), _fresh(c.right))
    if isinstance(c, ProbChoice):
        return ProbChoice(c.prob, _fresh(c.left), _fresh(c.right))
    if isinstance(c, If):
        return If(c.guard, _fresh(c.then), _fresh(c.orelse))
    if isinstance(c, While):
        return While(c.guard, _fresh(c.body))
    raise TypeError(f"not a command: {c!r}")


_CMP = {"=": "=", "!=": "!=", "<": "<", "<=": "<=", ">": ">", ">=": ">="}


class _Parser:
    def __init__(self, text: str, defs=None, macros=None):
        self.toks = tokenize(text)
        self.i = 0
        self.defs = dict(defs or {})
        self.macros = dict(macros or {})

    # -- token helpers ----------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("SYM", "NAME") and t.text in texts

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "EOF":
            self.i += 1
        return t

    def error(self, expected, tok: Token | None = None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "EOF" else repr(tok.text)
        exp = list(expected) if not isinstance(expected, str) else [expected]
        raise ParseError(f"expected {' or '.join(exp)}, found {found}", tok.line, tok.col, exp)

    def expect(self, *texts: str) -> Token:
        if not self.at(*texts):
            self.error([repr(t) for t in texts])
        return self.advance()

    def name(self) -> str:
        t = self.tok
        if t.kind != "NAME" or t.text in KEYWORDS:
            self.error("identifier")
        self.advance()
        return t.text

    def expect_eof(self):
        if self.tok.kind != "EOF":
            self.error("end of input")

    # -- expressions ------------------------------------------------------
    def exp(self) -> Exp:
        e = self.and_exp()
        while self.at("or", "\\/"):
            self.advance()
            e = BinOp("or", e, self.and_exp())
        return e

    def and_exp(self) -> Exp:
        e = self.xnor_exp()
        while self.at("and", "/\\"):
            self.advance()
            e = BinOp("and", e, self.xnor_exp())
        return e

    def xnor_exp(self) -> Exp:
        e = self.not_exp()
        while self.at("xnor"):
            self.advance()
            e = BinOp("xnor", e, self.not_exp())
        return e

    def not_exp(self) -> Exp:
        if self.at("not"):
            self.advance()
            return Not(self.not_exp())
        return self.cmp_exp()

    def cmp_exp(self) -> Exp:
        e = self.add_exp()
        parts = []
        while self.tok.kind == "SYM" and self.tok.text in _CMP:
            op = self.advance().text
            rhs = self.add_exp()
            parts.append(BinOp(op, e, rhs))
            e = rhs
        if not parts:
            return e
        out = parts[0]
        for p in parts[1:]:
            out = BinOp("and", out, p)
        return out

    def add_exp(self) -> Exp:
        e = self.mul_exp()
        while self.at("+", "-"):
            op = self.advance().text
            e = BinOp(op, e, self.mul_exp())
        return e

    def mul_exp(self) -> Exp:
        e = self.unary()
        while self.at("*", "/"):
            op = self.advance().text
            e = BinOp(op, e, self.unary())
        return e

    def unary(self) -> Exp:
        if self.at("-"):
            self.advance()
            if self.tok.kind == "NUM" and not (self.peek().kind == "SYM" and self.peek().text == "["):
                return Lit(-Fraction(self.advance().text))
            return Neg(self.unary())
        return self.postfix()

    def postfix(self) -> Exp:
        e = self.atom()
        while self.at("["):
            self.advance()
            idx = self.exp()
            if self.at("->"):
                self.advance()
                val = self.exp()
                self.expect("]")
                e = Update(e, idx, val)
            else:
                self.expect("]")
                e = Index(e, idx)
        return e

    def atom(self) -> Exp:
        t = self.tok
        if t.kind == "NUM":
            self.advance()
            return Lit(Fraction(t.text))
        if self.at("true"):
            self.advance()
            return TRUE
        if self.at("false"):
            self.advance()
            return FALSE
        if self.at("("):
            self.advance()
            e = self.exp()
            self.expect(")")
            return e
        if self.at("["):
            self.advance()
            e = self.exp()
            self.expect("]")
            return Iverson(e)
        if self.at("<<"):
            self.advance()
            items = []
            if not self.at(">>"):
                items.append(self.exp())
                while self.at(","):
                    self.advance()
                    items.append(self.exp())
            self.expect(">>")
            return ListLit(tuple(items))
        if t.kind == "NAME" and t.text not in KEYWORDS:
            self.advance()
            if t.text in self.defs:
                params, body = self.defs[t.text]
                if params:
                    self.expect("(")
                    args = [self.exp()]
                    while self.at(","):
                        self.advance()
                        args.append(self.exp())
                    self.expect(")")
                    if len(args) != len(params):
                        raise ParseError(f"{t.text} expects {len(params)} arguments, got {len(args)}", t.line, t.col)
                    return _subst_many(body, dict(zip(params, args)))
                return body
            return Var(t.text)
        self.error("expression")

    def const(self):
        t = self.tok
        e = self.exp()
        try:
            return eval_exp(e, _EMPTY)
        except (KeyError, EvalTypeError) as exc:
            raise ParseError(f"not a constant: {exc}", t.line, t.col) from None

    def prob_const(self) -> Fraction:
        t = self.tok
        v = self.const()
        if not isinstance(v, Fraction) or not 0 <= v <= 1:
            raise ParseError(f"probability must be a rational in [0,1], got {format_value(v)}", t.line, t.col)
        return v

    # -- commands ---------------------------------------------------------
    def seq_cmd(self) -> Cmd:
        cmds = [self.nd_cmd()]
        while self.at(";"):
            self.advance()
            if self.tok.kind == "EOF" or self.at("}", ")"):
                break
            cmds.append(self.nd_cmd())
        out = cmds[-1]
        for c in reversed(cmds[:-1]):
            out = Seq(c, out)
        return out

    def nd_cmd(self) -> Cmd:
        left = self.pc_cmd()
        if self.at("&"):
            self.advance()
            return NDChoice(left, self.nd_cmd())
        return left

    def oplus_start(self) -> bool:
        if self.at("+[", "⊕"):
            return True
        return self.at("(") and self.peek().kind == "SYM" and self.peek().text == "+"

    def oplus_prob(self, const: bool):
        if self.at("("):
            self.advance()
            self.advance()
            p = self.prob_const() if const else self.exp()
            self.expect(")")
            return p
        if self.at("⊕"):
            self.advance()
            self.expect("[")
        else:
            self.advance()
        p = self.prob_const() if const else self.exp()
        self.expect("]")
        return p

    def pc_cmd(self) -> Cmd:
        left = self.prim_cmd()
        if self.oplus_start():
            p = self.oplus_prob(const=False)
            return ProbChoice(p, left, self.pc_cmd())
        return left

    def prim_cmd(self) -> Cmd:
        t = self.tok
        if self.at("skip"):
            self.advance()
            return Skip()
        if self.at("if"):
            self.advance()
            g = self.exp()
            self.expect("then")
            then = self.nd_cmd()
            orelse = SKIP
            if self.at("else"):
                self.advance()
                orelse = self.nd_cmd()
            else:
                orelse = Skip()
            return If(g, then, orelse)
        if self.at("while"):
            self.advance()
            g = self.exp()
            self.expect("do")
            return While(g, self.nd_cmd())
        if self.at("{"):
            self.advance()
            c = self.seq_cmd()
            self.expect("}")
            return c
        if self.at("("):
            self.advance()
            c = self.seq_cmd()
            self.expect(")")
            return c
        if t.kind == "NAME" and t.text in self.macros:
            self.advance()
            return _fresh(self.macros[t.text])
        if t.kind == "NAME" and t.text not in KEYWORDS:
            x = self.name()
            if t.text in self.defs:
                raise ParseError(f"cannot assign to defined constant {x}", t.line, t.col)
            index = None
            if self.at("["):
                self.advance()
                index = self.exp()
                self.expect("]")

            def target(v: Exp) -> Exp:
                return v if index is None else Update(Var(x), index, v)

            if self.at(":="):
                self.advance()
                if self.at("flip"):
                    self.advance()
                    self.expect("(")
                    p = self.exp()
                    self.expect(")")
                    return ProbChoice(p, Assign(x, target(TRUE)), Assign(x, target(FALSE)))
                return Assign(x, target(self.exp()))
            if self.at("<-"):
                self.advance()
                vals = self.value_set()
                out = Assign(x, target(vals[-1]))
                for v in reversed(vals[:-1]):
                    out = NDChoice(Assign(x, target(v)), out)
                return out
            self.error(["':='", "'<-'"])
        self.error("command")

    def value_set(self) -> list[Exp]:
        """``{e1, ..., en}``, ``{a..b}``, ``a..b`` or ``bool`` as expressions."""
        if self.at("bool"):
            self.advance()
            return [TRUE, FALSE]
        braced = self.at("{")
        if braced:
            self.advance()
        first = self.exp()
        if self.at(".."):
            self.advance()
            hi_tok = self.tok
            hi = self.exp()
            lo_v, hi_v = eval_exp(first, _EMPTY), eval_exp(hi, _EMPTY)
            if not (isinstance(lo_v, Fraction) and isinstance(hi_v, Fraction)
                    and lo_v.denominator == 1 and hi_v.denominator == 1):
                raise ParseError("range bounds must be integers", hi_tok.line, hi_tok.col)
            if hi_v < lo_v:
                raise ParseError("empty range", hi_tok.line, hi_tok.col)
            vals = [Lit(Fraction(k)) for k in range(int(lo_v), int(hi_v) + 1)]
        else:
            if not braced:
                self.error("'{'")
            vals = [first]
            while self.at(","):
                self.advance()
                vals.append(self.exp())
        if braced:
            self.expect("}")
        return vals

    # -- declarations -----------------------------------------------------
    def domain(self) -> tuple:
        t = self.tok
        vals = tuple(eval_exp(e, _EMPTY) for e in self.value_set())
        if self.at("^"):
            self.advance()
            n = self.tok
            if n.kind != "NUM" or "/" in n.text:
                self.error("list length")
            self.advance()
            vals = tuple(itertools.product(vals, repeat=int(n.text)))
        seen = set()
        out = []
        from .lang import value_key
        for v in vals:
            k = value_key(v)
            if k not in seen:
                seen.add(k)
                out.append(v)
        if not out:
            raise ParseError("empty domain", t.line, t.col)
        return tuple(out)

    def program(self, source: str) -> Program:
        declared: list[str] = []
        domains: dict = {}
        defaults: dict = {}
        while self.at("var", "def", "macro"):
            kw = self.advance().text
            if kw == "var":
                while True:
                    t = self.tok
                    x = self.name()
                    if x in domains or x in declared:
                        raise ParseError(f"duplicate declaration of variable {x}", t.line, t.col)
                    declared.append(x)
                    if self.at("in"):
                        self.advance()
                        domains[x] = self.domain()
                        defaults[x] = domains[x][0]
                    if self.at("="):
                        self.advance()
                        defaults[x] = self.const()
                    if not self.at(","):
                        break
                    self.advance()
            elif kw == "def":
                t = self.tok
                x = self.name()
                if x in self.defs or x in self.macros:
                    raise ParseError(f"duplicate definition of {x}", t.line, t.col)
                params: tuple = ()
                if self.at("("):
                    self.advance()
                    ps = [self.name()]
                    while self.at(","):
                        self.advance()
                        ps.append(self.name())
                    self.expect(")")
                    params = tuple(ps)
                self.expect("=")
                # parameters shadow earlier definitions inside the body
                saved = {p: self.defs.pop(p) for p in params if p in self.defs}
                body = self.exp()
                self.defs.update(saved)
                self.defs[x] = (params, body)
            else:
                t = self.tok
                x = self.name()
                if x in self.defs or x in self.macros:
                    raise ParseError(f"duplicate definition of {x}", t.line, t.col)
                self.expect("=")
                self.macros[x] = self.nd_cmd()
            if self.at(";"):
                self.advance()
        body = self.seq_cmd() if self.tok.kind != "EOF" else Skip()
        self.expect_eof()
        variables = list(declared)
        for v in _vars_in_order(body):
            if v not in variables:
                variables.append(v)
        for v in variables:
            defaults.setdefault(v, Fraction(0))
        return Program(body, tuple(variables), domains, defaults, source, dict(self.defs), dict(self.macros))

    # -- assertions -------------------------------------------------------
    def assertion(self) -> Assertion:
        left = self.a_oplus()
        if self.at("&"):
            self.advance()
            return Amp(left, self.assertion())
        return left

    def a_oplus(self) -> Assertion:
        left = self.a_and()
        if self.oplus_start():
            p = self.oplus_prob(const=True)
            return OPlus(p, left, self.a_oplus())
        return left

    def a_and(self) -> Assertion:
        left = self.a_atom()
        if self.at("/\\", "and"):
            self.advance()
            return And(left, self.a_and())
        return left

    def a_atom(self) -> Assertion:
        if self.at("T", "top", "⊤"):
            self.advance()
            return TOP
        if self.at("F", "bot", "⊥"):
            self.advance()
            return BOTTOM
        if self.at("[", "⌈"):
            close = "]" if self.advance().text == "[" else "⌉"
            e = self.exp()
            self.expect(close)
            return Almost(e)
        if self.at("("):
            self.advance()
            a = self.assertion()
            self.expect(")")
            return a
        self.error(["'T'", "'F'", "'[P]'", "'('"])


def _vars_in_order(c: Cmd) -> list[str]:
    out: list[str] = []

    def ex(e: Exp):
        if isinstance(e, Var):
            if e.name not in out:
                out.append(e.name)
        elif isinstance(e, BinOp):
            ex(e.left)
            ex(e.right)
        elif isinstance(e, (Not, Neg, Iverson)):
            ex(e.arg)
        elif isinstance(e, ListLit):
            for i in e.items:
                ex(i)
        elif isinstance(e, Index):
            ex(e.seq)
            ex(e.index)
        elif isinstance(e, Update):
            ex(e.seq)
            ex(e.index)
            ex(e.value)

    def cm(c: Cmd):
        if isinstance(c, Assign):
            if c.var not in out:
                out.append(c.var)
            ex(c.exp)
        elif isinstance(c, Seq):
            cm(c.first)
            cm(c.second)
        elif isinstance(c, NDChoice):
            cm(c.left)
            cm(c.right)
        elif isinstance(c, ProbChoice):
            ex(c.prob)
            cm(c.left)
            cm(c.right)
        elif isinstance(c, If):
            ex(c.guard)
            cm(c.then)
            cm(c.orelse)
        elif isinstance(c, While):
            ex(c.guard)
            cm(c.body)

    cm(c)
    return out


# ---------------------------------------------------------------------------
# Public entry points


def parse_program(text: str) -> Program:
    p = _Parser(text)
    return p.program(text)


def parse_cmd(text: str, program: Program | None = None) -> Cmd:
    p = _Parser(text, *_tables(program))
    c = p.seq_cmd()
    p.expect_eof()
    return c


def parse_exp(text: str, program: Program | None = None) -> Exp:
    p = _Parser(text, *_tables(program))
    e = p.exp()
    p.expect_eof()
    return e


def parse_assertion(text: str, program: Program | None = None) -> Assertion:
    p = _Parser(text, *_tables(program))
    a = p.assertion()
    p.expect_eof()
    return a


def _tables(program):
    if program is None:
        return {}, {}
    return program.defs, program.macros


def parse_bindings(text: str, program: Program | None = None) -> dict:
    """``x=1, y=true`` into a variable-to-value map."""
    out: dict = {}
    if not text.strip():
        return out
    p = _Parser(text, *_tables(program))
    while True:
        x = p.name()
        p.expect("=")
        out[x] = p.const()
        if not p.at(","):
            break
        p.advance()
    p.expect_eof()
    return out


# ---------------------------------------------------------------------------
# Printing

_BIN_LEVEL = {"or": 1, "and": 2, "xnor": 3, "=": 5, "!=": 5, "<": 5, "<=": 5, ">": 5, ">=": 5,
              "+": 6, "-": 6, "*": 7, "/": 7}


def _exp_level(e: Exp) -> int:
    if isinstance(e, BinOp):
        return _BIN_LEVEL[e.op]
    if isinstance(e, Not):
        return 4
    if isinstance(e, Neg):
        return 8
    if isinstance(e, Lit) and isinstance(e.value, Fraction) and e.value < 0:
        return 8
    if isinstance(e, (Index, Update)):
        return 9
    return 10


def print_exp(e: Exp, level: int = 0) -> str:
    s = _print_exp(e)
    return f"({s})" if _exp_level(e) < level else s


def _print_exp(e: Exp) -> str:
    if isinstance(e, Lit):
        return format_value(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, BinOp):
        lv = _BIN_LEVEL[e.op]
        if lv == 5:
            return f"{print_exp(e.left, 6)} {e.op} {print_exp(e.right, 6)}"
        return f"{print_exp(e.left, lv)} {e.op} {print_exp(e.right, lv + 1)}"
    if isinstance(e, Not):
        return f"not {print_exp(e.arg, 4)}"
    if isinstance(e, Neg):
        return f"-({print_exp(e.arg)})"
    if isinstance(e, Iverson):
        return f"[{print_exp(e.arg)}]"
    if isinstance(e, ListLit):
        return "<<" + ", ".join(print_exp(x) for x in e.items) + ">>"
    if isinstance(e, Index):
        return f"{print_exp(e.seq, 9)}[{print_exp(e.index)}]"
    if isinstance(e, Update):
        return f"{print_exp(e.seq, 9)}[{print_exp(e.index)} -> {print_exp(e.value)}]"
    raise TypeError(f"not an expression: {e!r}")


def _cmd_level(c: Cmd) -> int:
    if isinstance(c, Seq):
        return 0
    if isinstance(c, (NDChoice, If, While)):
        return 1
    if isinstance(c, ProbChoice):
        return 2
    return 3


def print_cmd(c: Cmd, level: int = 0) -> str:
    s = _print_cmd(c)
    return "{ " + s + " }" if _cmd_level(c) < level else s


def _print_cmd(c: Cmd) -> str:
    if isinstance(c, Skip):
        return "skip"
    if isinstance(c, Assign):
        return f"{c.var} := {print_exp(c.exp)}"
    if isinstance(c, Seq):
        return f"{print_cmd(c.first, 1)}; {print_cmd(c.second, 0)}"
    if isinstance(c, NDChoice):
        return f"{print_cmd(c.left, 2)} & {print_cmd(c.right, 1)}"
    if isinstance(c, ProbChoice):
        return f"{print_cmd(c.left, 3)} (+ {print_exp(c.prob)}) {print_cmd(c.right, 2)}"
    if isinstance(c, If):
        return f"if {print_exp(c.guard)} then {{ {print_cmd(c.then)} }} else {{ {print_cmd(c.orelse)} }}"
    if isinstance(c, While):
        return f"while {print_exp(c.guard)} do {{ {print_cmd(c.body)} }}"
    raise TypeError(f"not a command: {c!r}")


def _assertion_level(a: Assertion) -> int:
    if isinstance(a, Amp):
        return 1
    if isinstance(a, OPlus):
        return 2
    if isinstance(a, And):
        return 3
    return 4


def print_assertion(a: Assertion, level: int = 0) -> str:
    s = _print_assertion(a)
    return f"({s})" if _assertion_level(a) < level else s


def _print_assertion(a: Assertion) -> str:
    if isinstance(a, Top):
        return "T"
    if isinstance(a, Bot):
        return "F"
    if isinstance(a, Almost):
        return f"[{print_exp(a.atom)}]"
    if isinstance(a, And):
        return f"{print_assertion(a.left, 4)} /\\ {print_assertion(a.right, 3)}"
    if isinstance(a, OPlus):
        return f"{print_assertion(a.left, 3)} (+ {format_value(a.prob)}) {print_assertion(a.right, 2)}"
    if isinstance(a, Amp):
        return f"{print_assertion(a.left, 2)} & {print_assertion(a.right, 1)}"
    raise TypeError(f"not an assertion: {a!r}")
