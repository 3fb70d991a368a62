"""Exact rational linear programming.

A small dense-tableau simplex over exact rationals with Bland's rule, used for
feasibility questions (hull membership, assertion satisfaction) and for
enumerating the vertices of polytopes in standard form.

Constraints are given sparsely as ``(coefficients, rhs)`` pairs where
``coefficients`` maps a variable index to a rational.  All variables are
implicitly nonnegative.

``gmpy2.mpq`` is used for arithmetic when available since it is several
times faster than ``fractions.Fraction``; results are always returned as
``Fraction``.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

try:  # pragma: no cover - exercised implicitly
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction

Row = Mapping[int, object]
Constraint = tuple  # (Row, rhs)

_ZERO = _Q(0)
_ONE = _Q(1)


class LPError(RuntimeError):
    pass


def _q(x) -> object:
    if isinstance(x, Fraction):
        return _Q(x.numerator, x.denominator)
    return _Q(x)


def _frac(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


class _Tableau:
    """Simplex tableau for ``A x = b, x >= 0`` with ``b >= 0``.

    ``rows[i]`` holds the coefficients of row ``i`` followed by its rhs.
    ``basis[i]`` is the basic variable of row ``i``.
    """

    __slots__ = ("rows", "basis", "ncols")

    def __init__(self, rows, basis, ncols):
        self.rows = rows
        self.basis = basis
        self.ncols = ncols

    def copy(self) -> "_Tableau":
        return _Tableau([r[:] for r in self.rows], self.basis[:], self.ncols)

    def pivot(self, r: int, c: int) -> None:
        rows = self.rows
        prow = rows[r]
        piv = prow[c]
        if piv != _ONE:
            inv = _ONE / piv
            prow = [v * inv if v else v for v in prow]
            rows[r] = prow
        nz = [j for j, v in enumerate(prow) if v]
        for i, row in enumerate(rows):
            if i == r:
                continue
            f = row[c]
            if f:
                for j in nz:
                    row[j] -= f * prow[j]
        self.basis[r] = c

    def solution(self, nvars: int) -> list:
        x = [_ZERO] * nvars
        for i, b in enumerate(self.basis):
            if b < nvars:
                x[b] = self.rows[i][-1]
        return x


def _standard_form(nvars: int, eqs: Sequence[Constraint], ubs: Sequence[Constraint]):
    """Dense rows for ``A x (+ slack) = b`` with ``b >= 0``; returns (rows, ncols)."""
    nslack = len(ubs)
    ncols = nvars + nslack
    rows = []
    for k, (coef, rhs) in enumerate(list(eqs) + list(ubs)):
        row = [_ZERO] * (ncols + 1)
        for j, v in coef.items():
            if j >= nvars or j < 0:
                raise LPError(f"variable index {j} out of range")
            if v:
                row[j] += _q(v)
        if k >= len(eqs):
            row[nvars + (k - len(eqs))] = _ONE
        row[-1] = _q(rhs)
        if row[-1] < 0:
            row = [-v for v in row]
        rows.append(row)
    return rows, ncols


def _phase_one(rows: list, ncols: int, max_pivots: int = 1_000_000) -> _Tableau | None:
    """Find a feasible basis using artificial variables and Bland's rule.

    Returns the tableau restricted to the original columns (redundant rows
    dropped) or ``None`` if infeasible.
    """
    m = len(rows)
    total = ncols + m
    trows = []
    for i, row in enumerate(rows):
        r = row[:-1] + [_ZERO] * m + [row[-1]]
        r[ncols + i] = _ONE
        trows.append(r)
    tab = _Tableau(trows, [ncols + i for i in range(m)], total)
    # objective: minimise sum of artificials; reduced costs c_j - sum rows
    obj = [_ZERO] * (total + 1)
    for r in trows:
        for j in range(ncols):
            if r[j]:
                obj[j] -= r[j]
        obj[-1] -= r[-1]
    pivots = 0
    while True:
        enter = next((j for j in range(total) if obj[j] < 0), None)
        if enter is None:
            break
        best = None
        best_ratio = None
        for i, r in enumerate(tab.rows):
            a = r[enter]
            if a > 0:
                ratio = r[-1] / a
                if best is None or ratio < best_ratio or (ratio == best_ratio and tab.basis[i] < tab.basis[best]):
                    best, best_ratio = i, ratio
        if best is None:  # unbounded cannot happen in phase one
            raise LPError("phase one unbounded")
        tab.pivot(best, enter)
        f = obj[enter]
        prow = tab.rows[best]
        for j, v in enumerate(prow):
            if v:
                obj[j] -= f * v
        pivots += 1
        if pivots > max_pivots:
            raise LPError("pivot limit exceeded")
    if obj[-1] != 0:
        return None
    # drive artificials out of the basis; drop redundant rows
    keep_rows = []
    keep_basis = []
    for i in range(len(tab.rows)):
        if tab.basis[i] >= ncols:
            row = tab.rows[i]
            col = next((j for j in range(ncols) if row[j]), None)
            if col is None:
                continue
            tab.pivot(i, col)
        keep_rows.append(i)
    rows2 = []
    for i in keep_rows:
        r = tab.rows[i]
        rows2.append(r[:ncols] + [r[-1]])
        keep_basis.append(tab.basis[i])
    return _Tableau(rows2, keep_basis, ncols)


def feasible(nvars: int, eqs: Iterable[Constraint] = (), ubs: Iterable[Constraint] = ()) -> list | None:
    """Return a feasible point of ``{x >= 0 : eqs, ubs}`` as Fractions, or None."""
    eqs = list(eqs)
    ubs = list(ubs)
    if not eqs and not ubs:
        return [Fraction(0)] * nvars
    rows, ncols = _standard_form(nvars, eqs, ubs)
    tab = _phase_one(rows, ncols)
    if tab is None:
        return None
    return [_frac(v) for v in tab.solution(nvars)]


def is_feasible(nvars: int, eqs: Iterable[Constraint] = (), ubs: Iterable[Constraint] = ()) -> bool:
    return feasible(nvars, eqs, ubs) is not None


def minimize(nvars: int, cost: Mapping[int, object], eqs: Iterable[Constraint] = (),
             ubs: Iterable[Constraint] = ()) -> tuple | None:
    """Minimise ``cost . x``; returns (value, x) or None if infeasible.

    Raises LPError if the problem is unbounded.
    """
    rows, ncols = _standard_form(nvars, list(eqs), list(ubs))
    tab = _phase_one(rows, ncols)
    if tab is None:
        return None
    obj = [_ZERO] * (ncols + 1)
    for j, v in cost.items():
        obj[j] = _q(v)
    for i, b in enumerate(tab.basis):
        f = obj[b]
        if f:
            r = tab.rows[i]
            for j, v in enumerate(r):
                if v:
                    obj[j] -= f * v
    while True:
        enter = next((j for j in range(ncols) if obj[j] < 0), None)
        if enter is None:
            break
        best = None
        best_ratio = None
        for i, r in enumerate(tab.rows):
            a = r[enter]
            if a > 0:
                ratio = r[-1] / a
                if best is None or ratio < best_ratio or (ratio == best_ratio and tab.basis[i] < tab.basis[best]):
                    best, best_ratio = i, ratio
        if best is None:
            raise LPError("objective unbounded")
        tab.pivot(best, enter)
        f = obj[enter]
        for j, v in enumerate(tab.rows[best]):
            if v:
                obj[j] -= f * v
    x = [_frac(v) for v in tab.solution(nvars)]
    return -_frac(obj[-1]), x


def vertices(nvars: int, eqs: Iterable[Constraint], ubs: Iterable[Constraint] = (),
             max_bases: int = 200_000) -> list:
    """All vertices of ``{x >= 0 : eqs, ubs}`` (a bounded polyhedron).

    Breadth-first search over feasible bases; the graph of feasible bases of
    a polyhedron is connected, so every vertex is reached.  Returns a list of
    distinct tuples of Fractions (over the first ``nvars`` coordinates).
    """
    rows, ncols = _standard_form(nvars, list(eqs), list(ubs))
    if not rows:
        return [tuple(Fraction(0) for _ in range(nvars))]
    tab = _phase_one(rows, ncols)
    if tab is None:
        return []
    seen = {frozenset(tab.basis)}
    queue = deque([tab])
    out = {}
    while queue:
        t = queue.popleft()
        x = t.solution(ncols)
        key = tuple(x[:nvars])
        if key not in out:
            out[key] = tuple(_frac(v) for v in key)
        basis_set = set(t.basis)
        for c in range(ncols):
            if c in basis_set:
                continue
            best_ratio = None
            cands = []
            for i, r in enumerate(t.rows):
                a = r[c]
                if a > 0:
                    ratio = r[-1] / a
                    if best_ratio is None or ratio < best_ratio:
                        best_ratio, cands = ratio, [i]
                    elif ratio == best_ratio:
                        cands.append(i)
            for i in cands:
                nb = frozenset(basis_set - {t.basis[i]} | {c})
                if nb in seen:
                    continue
                seen.add(nb)
                if len(seen) > max_bases:
                    raise LPError("vertex enumeration exceeded basis cap")
                t2 = t.copy()
                t2.pivot(i, c)
                queue.append(t2)
    return list(out.values())
