"""Program AST, values, states and expression evaluation.

Values are Python ``bool``, ``fractions.Fraction`` and ``tuple`` (lists).
Because ``True == Fraction(1)`` in Python, equality of values and states is
always decided on a type-tagged key (see :func:`value_key`).
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

Value = Union[bool, Fraction, tuple]


class EvalTypeError(TypeError):
    """An operator was applied to a value of the wrong type."""


class DivisionByZeroWarning(UserWarning):
    pass


def value_key(v: Value):
    if isinstance(v, bool):
        return ("b", v)
    if isinstance(v, Fraction):
        return ("q", v)
    if isinstance(v, tuple):
        return ("l", tuple(value_key(x) for x in v))
    raise EvalTypeError(f"not a value: {v!r}")


def values_equal(a: Value, b: Value) -> bool:
    return value_key(a) == value_key(b)


def as_value(v) -> Value:
    """Coerce a Python literal (int, Fraction, bool, list) into a Value."""
    if isinstance(v, bool):
        return v
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, (list, tuple)):
        return tuple(as_value(x) for x in v)
    raise EvalTypeError(f"cannot convert {v!r} to a value")


def format_value(v: Value) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return "<<" + ", ".join(format_value(x) for x in v) + ">>"


# ---------------------------------------------------------------------------
# States

_INTERN: dict = {}


class State:
    """Immutable total assignment of values to a fixed tuple of variables.

    States are interned, so equal states are usually the same object and
    hashing is precomputed.
    """

    __slots__ = ("names", "values", "_key", "_hash", "__weakref__")

    def __new__(cls, names: Sequence[str], values: Sequence[Value]):
        names = tuple(names)
        values = tuple(values)
        if len(names) != len(values):
            raise ValueError("names/values length mismatch")
        key = (names, tuple(value_key(v) for v in values))
        cached = _INTERN.get(key)
        if cached is not None:
            return cached
        self = object.__new__(cls)
        self.names = names
        self.values = values
        self._key = key
        self._hash = hash(key)
        if len(_INTERN) < 2_000_000:
            _INTERN[key] = self
        return self

    @classmethod
    def from_mapping(cls, m: Mapping[str, Value], names: Sequence[str] | None = None) -> "State":
        names = tuple(names) if names is not None else tuple(sorted(m))
        return cls(names, [as_value(m[n]) for n in names])

    def __getitem__(self, name: str) -> Value:
        try:
            return self.values[self.names.index(name)]
        except ValueError:
            raise KeyError(name) from None

    def __contains__(self, name: str) -> bool:
        return name in self.names

    def set(self, name: str, v: Value) -> "State":
        i = self.names.index(name)
        vals = list(self.values)
        vals[i] = v
        return State(self.names, vals)

    def as_dict(self) -> dict:
        return dict(zip(self.names, self.values))

    def sort_key(self):
        return self._key[1]

    def __eq__(self, other) -> bool:
        return self is other or (isinstance(other, State) and self._key == other._key)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return "{" + ", ".join(f"{n}={format_value(v)}" for n, v in zip(self.names, self.values)) + "}"


class _Bottom:
    """The divergence point adjoined to the state space."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = object.__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "⊥"

    def __reduce__(self):
        return (_Bottom, ())


BOT = _Bottom()


# ---------------------------------------------------------------------------
# Expressions


class Exp:
    __slots__ = ()


@dataclass(frozen=True)
class Lit(Exp):
    value: Value

    def __eq__(self, other):
        return isinstance(other, Lit) and values_equal(self.value, other.value)

    def __hash__(self):
        return hash(("Lit", value_key(self.value)))


@dataclass(frozen=True)
class Var(Exp):
    name: str


ARITH_OPS = ("+", "-", "*", "/")
CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")
BOOL_OPS = ("and", "or", "xnor")


@dataclass(frozen=True)
class BinOp(Exp):
    op: str
    left: Exp
    right: Exp


@dataclass(frozen=True)
class Not(Exp):
    arg: Exp


@dataclass(frozen=True)
class Neg(Exp):
    arg: Exp


@dataclass(frozen=True)
class Iverson(Exp):
    arg: Exp


@dataclass(frozen=True)
class ListLit(Exp):
    items: tuple


@dataclass(frozen=True)
class Index(Exp):
    seq: Exp
    index: Exp


@dataclass(frozen=True)
class Update(Exp):
    seq: Exp
    index: Exp
    value: Exp


TRUE = Lit(True)
FALSE = Lit(False)


def lit(v) -> Lit:
    return Lit(as_value(v))


def conj(*es: Exp) -> Exp:
    es = [e for e in es if e != TRUE]
    if not es:
        return TRUE
    out = es[0]
    for e in es[1:]:
        out = BinOp("and", out, e)
    return out


def _num(v: Value, op: str) -> Fraction:
    if isinstance(v, Fraction):
        return v
    raise EvalTypeError(f"operator {op!r} expects a rational, got {format_value(v)}")


def _bool(v: Value, op: str) -> bool:
    if isinstance(v, bool):
        return v
    raise EvalTypeError(f"operator {op!r} expects a boolean, got {format_value(v)}")


def _bit(v: Value) -> bool:
    if isinstance(v, bool):
        return v
    if isinstance(v, Fraction) and v in (0, 1):
        return v == 1
    raise EvalTypeError(f"xnor expects a boolean or 0/1, got {format_value(v)}")


def _list_index(k: Value, n: int) -> int | None:
    if isinstance(k, Fraction) and k.denominator == 1 and 1 <= k <= n:
        return int(k)
    return None


def eval_exp(e: Exp, s: State) -> Value:
    """Evaluate ``e`` in state ``s``; total except for type errors."""
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Var):
        try:
            return s[e.name]
        except KeyError:
            raise EvalTypeError(f"unbound variable {e.name!r}") from None
    if isinstance(e, BinOp):
        op = e.op
        if op == "and":
            # short-circuit keeps guards like `i <= n and xs[i] = 1` cheap
            return _bool(eval_exp(e.left, s), op) and _bool(eval_exp(e.right, s), op)
        if op == "or":
            return _bool(eval_exp(e.left, s), op) or _bool(eval_exp(e.right, s), op)
        a = eval_exp(e.left, s)
        b = eval_exp(e.right, s)
        if op == "=":
            return values_equal(a, b)
        if op == "!=":
            return not values_equal(a, b)
        if op == "xnor":
            return _bit(a) == _bit(b)
        x, y = _num(a, op), _num(b, op)
        if op == "+":
            return x + y
        if op == "-":
            return x - y
        if op == "*":
            return x * y
        if op == "/":
            if y == 0:
                warnings.warn("division by zero evaluates to 0", DivisionByZeroWarning, stacklevel=2)
                return Fraction(0)
            return x / y
        if op == "<":
            return x < y
        if op == "<=":
            return x <= y
        if op == ">":
            return x > y
        if op == ">=":
            return x >= y
        raise ValueError(f"unknown operator {op!r}")
    if isinstance(e, Not):
        return not _bool(eval_exp(e.arg, s), "not")
    if isinstance(e, Neg):
        return -_num(eval_exp(e.arg, s), "-")
    if isinstance(e, Iverson):
        return Fraction(1) if _bool(eval_exp(e.arg, s), "[.]") else Fraction(0)
    if isinstance(e, ListLit):
        return tuple(eval_exp(x, s) for x in e.items)
    if isinstance(e, Index):
        seq = eval_exp(e.seq, s)
        k = eval_exp(e.index, s)
        if isinstance(seq, tuple):
            i = _list_index(k, len(seq))
            if i is not None:
                return seq[i - 1]
        return Fraction(0)
    if isinstance(e, Update):
        seq = eval_exp(e.seq, s)
        k = eval_exp(e.index, s)
        v = eval_exp(e.value, s)
        if isinstance(seq, tuple) and isinstance(k, Fraction) and k.denominator == 1 and k >= 1:
            i = int(k)
            items = list(seq) + [Fraction(0)] * max(0, i - len(seq))
            items[i - 1] = v
            return tuple(items)
        return Fraction(0)
    raise TypeError(f"not an expression: {e!r}")


def exp_vars(e: Exp) -> frozenset:
    if isinstance(e, Var):
        return frozenset([e.name])
    if isinstance(e, Lit):
        return frozenset()
    if isinstance(e, BinOp):
        return exp_vars(e.left) | exp_vars(e.right)
    if isinstance(e, (Not, Neg, Iverson)):
        return exp_vars(e.arg)
    if isinstance(e, ListLit):
        return frozenset().union(*(exp_vars(x) for x in e.items)) if e.items else frozenset()
    if isinstance(e, Index):
        return exp_vars(e.seq) | exp_vars(e.index)
    if isinstance(e, Update):
        return exp_vars(e.seq) | exp_vars(e.index) | exp_vars(e.value)
    raise TypeError(f"not an expression: {e!r}")


def subst_exp(e: Exp, x: str, r: Exp) -> Exp:
    """Replace every occurrence of variable ``x`` in ``e`` by ``r``."""
    if isinstance(e, Var):
        return r if e.name == x else e
    if isinstance(e, Lit):
        return e
    if isinstance(e, BinOp):
        return BinOp(e.op, subst_exp(e.left, x, r), subst_exp(e.right, x, r))
    if isinstance(e, Not):
        return Not(subst_exp(e.arg, x, r))
    if isinstance(e, Neg):
        return Neg(subst_exp(e.arg, x, r))
    if isinstance(e, Iverson):
        return Iverson(subst_exp(e.arg, x, r))
    if isinstance(e, ListLit):
        return ListLit(tuple(subst_exp(i, x, r) for i in e.items))
    if isinstance(e, Index):
        return Index(subst_exp(e.seq, x, r), subst_exp(e.index, x, r))
    if isinstance(e, Update):
        return Update(subst_exp(e.seq, x, r), subst_exp(e.index, x, r), subst_exp(e.value, x, r))
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# Commands


class Cmd:
    __slots__ = ()


@dataclass(frozen=True)
class Skip(Cmd):
    pass


@dataclass(frozen=True)
class Assign(Cmd):
    var: str
    exp: Exp


@dataclass(frozen=True)
class Seq(Cmd):
    first: Cmd
    second: Cmd


@dataclass(frozen=True)
class NDChoice(Cmd):
    left: Cmd
    right: Cmd


@dataclass(frozen=True)
class ProbChoice(Cmd):
    prob: Exp
    left: Cmd
    right: Cmd


@dataclass(frozen=True)
class If(Cmd):
    guard: Exp
    then: Cmd
    orelse: Cmd


@dataclass(frozen=True)
class While(Cmd):
    guard: Exp
    body: Cmd


SKIP = Skip()


def seq(*cmds: Cmd) -> Cmd:
    """Right-nested sequence, flattening nested sequences and dropping nothing."""
    flat: list[Cmd] = []
    for c in cmds:
        flat.extend(flatten_seq(c))
    if not flat:
        return SKIP
    out = flat[-1]
    for c in reversed(flat[:-1]):
        out = Seq(c, out)
    return out


def flatten_seq(c: Cmd) -> list[Cmd]:
    if isinstance(c, Seq):
        return flatten_seq(c.first) + flatten_seq(c.second)
    return [c]


def nd_all(cmds: Sequence[Cmd]) -> Cmd:
    """Right-nested demonic choice over a nonempty list of commands."""
    if not cmds:
        raise ValueError("nondeterministic choice over an empty set")
    out = cmds[-1]
    for c in reversed(cmds[:-1]):
        out = NDChoice(c, out)
    return out


def flip(x: str, p: Exp) -> Cmd:
    return ProbChoice(p, Assign(x, TRUE), Assign(x, FALSE))


def choose(x: str, vals: Iterable[Value]) -> Cmd:
    return nd_all([Assign(x, Lit(as_value(v))) for v in vals])


def modified_vars(c: Cmd, all_vars: Iterable[str] = (), terminating: bool = False) -> frozenset:
    """Variables possibly written by ``c``.

    A loop is taken to modify every program variable unless the caller has
    certified that ``c`` terminates.
    """
    all_vars = frozenset(all_vars)
    if isinstance(c, Skip):
        return frozenset()
    if isinstance(c, Assign):
        return frozenset([c.var])
    if isinstance(c, (Seq, NDChoice)):
        a, b = (c.first, c.second) if isinstance(c, Seq) else (c.left, c.right)
        return modified_vars(a, all_vars, terminating) | modified_vars(b, all_vars, terminating)
    if isinstance(c, ProbChoice):
        return modified_vars(c.left, all_vars, terminating) | modified_vars(c.right, all_vars, terminating)
    if isinstance(c, If):
        return modified_vars(c.then, all_vars, terminating) | modified_vars(c.orelse, all_vars, terminating)
    if isinstance(c, While):
        inner = modified_vars(c.body, all_vars, terminating)
        return inner if terminating else inner | all_vars | cmd_vars(c)
    raise TypeError(f"not a command: {c!r}")


def cmd_vars(c: Cmd) -> frozenset:
    if isinstance(c, Skip):
        return frozenset()
    if isinstance(c, Assign):
        return frozenset([c.var]) | exp_vars(c.exp)
    if isinstance(c, Seq):
        return cmd_vars(c.first) | cmd_vars(c.second)
    if isinstance(c, NDChoice):
        return cmd_vars(c.left) | cmd_vars(c.right)
    if isinstance(c, ProbChoice):
        return exp_vars(c.prob) | cmd_vars(c.left) | cmd_vars(c.right)
    if isinstance(c, If):
        return exp_vars(c.guard) | cmd_vars(c.then) | cmd_vars(c.orelse)
    if isinstance(c, While):
        return exp_vars(c.guard) | cmd_vars(c.body)
    raise TypeError(f"not a command: {c!r}")


def loops(c: Cmd) -> Iterator[While]:
    if isinstance(c, While):
        yield c
        yield from loops(c.body)
    elif isinstance(c, Seq):
        yield from loops(c.first)
        yield from loops(c.second)
    elif isinstance(c, (NDChoice, ProbChoice)):
        yield from loops(c.left)
        yield from loops(c.right)
    elif isinstance(c, If):
        yield from loops(c.then)
        yield from loops(c.orelse)


def is_loop_free(c: Cmd) -> bool:
    return next(loops(c), None) is None


# ---------------------------------------------------------------------------
# Programs with declared variables


@dataclass(frozen=True)
class Program:
    """A parsed program: its command plus the declared variable table.

    ``domains`` maps a variable to the tuple of values it may take, or is
    missing the variable when no finite domain was declared.
    """

    body: Cmd
    variables: tuple
    domains: Mapping = field(default_factory=dict)
    defaults: Mapping = field(default_factory=dict)
    source: str = field(default="", compare=False)
    defs: Mapping = field(default_factory=dict, compare=False)
    macros: Mapping = field(default_factory=dict, compare=False)

    def initial_state(self, bindings: Mapping[str, object] | None = None) -> State:
        vals = []
        bindings = dict(bindings or {})
        unknown = set(bindings) - set(self.variables)
        if unknown:
            raise KeyError(f"unknown variables: {sorted(unknown)}")
        for v in self.variables:
            if v in bindings:
                vals.append(as_value(bindings[v]))
            else:
                vals.append(self.defaults.get(v, Fraction(0)))
        return State(self.variables, vals)

    def has_finite_domains(self) -> bool:
        return all(v in self.domains for v in self.variables)

    def states(self) -> list[State]:
        """All states of the declared finite state space (lexicographic)."""
        return enumerate_states(self.variables, self.domains)


def enumerate_states(variables: Sequence[str], domains: Mapping) -> list[State]:
    missing = [v for v in variables if v not in domains]
    if missing:
        raise ValueError(f"no finite domain declared for: {', '.join(missing)}")
    return [State(variables, combo) for combo in itertools.product(*(domains[v] for v in variables))]
