"""Exact linear algebra over the rationals.

Matrices are stored as sparse rows (dict column -> nonzero Fraction), one
representation for every size; constraint systems arriving from the
invariance machinery are naturally sparse and the small dense cases lose
nothing.  All elimination is deterministic: columns are scanned left to
right and the first available row is taken as pivot, so repeated runs and
different thread counts produce byte-identical results.

Two independent rank paths exist on purpose: `rref`/`rank` eliminate over
Fraction, `rank_modular_check` clears denominators row by row and
eliminates modulo large primes.  They share no elimination code, which is
what makes the cross-check in the test suite meaningful.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from math import gcd
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

_ZERO = Fraction(0)
_ONE = Fraction(1)

Row = Dict[int, Fraction]

logger = logging.getLogger(__name__)


class PrimeFailure(ArithmeticError):
    """A denominator in the matrix is divisible by the working prime."""


# Large primes below 2**31 for the modular rank path.
_DEFAULT_PRIMES: Tuple[int, ...] = (
    2147483647,
    2147483629,
    2147483587,
    2147483579,
    2147483563,
    2147483549,
    2147483543,
    2147483497,
)


class RationalMatrix:
    """A rows-by-cols matrix of Fractions with sparse row storage."""

    __slots__ = ("nrows", "ncols", "rows")

    def __init__(self, nrows: int, ncols: int, rows: Optional[List[Row]] = None):
        if nrows < 0 or ncols < 0:
            raise ValueError("matrix dimensions must be nonnegative")
        self.nrows = nrows
        self.ncols = ncols
        if rows is None:
            rows = [dict() for _ in range(nrows)]
        if len(rows) != nrows:
            raise ValueError(f"expected {nrows} rows, got {len(rows)}")
        self.rows = rows

    @classmethod
    def from_rows(cls, dense_rows: Sequence[Sequence]) -> "RationalMatrix":
        nrows = len(dense_rows)
        ncols = len(dense_rows[0]) if nrows else 0
        rows: List[Row] = []
        for r in dense_rows:
            if len(r) != ncols:
                raise ValueError("ragged rows")
            rows.append({j: Fraction(v) for j, v in enumerate(r) if Fraction(v)})
        return cls(nrows, ncols, rows)

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls(n, n, [{i: _ONE} for i in range(n)])

    def entry(self, i: int, j: int) -> Fraction:
        return self.rows[i].get(j, _ZERO)

    def to_rows(self) -> List[List[Fraction]]:
        return [[row.get(j, _ZERO) for j in range(self.ncols)] for row in self.rows]

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return (
            self.nrows == other.nrows
            and self.ncols == other.ncols
            and self.rows == other.rows
        )

    def __repr__(self) -> str:
        return f"RationalMatrix({self.nrows}x{self.ncols})"


def _eliminate(rows: List[Row], ncols: int) -> Tuple[List[Row], List[int]]:
    """In-place reduced row echelon form.  Returns (rows, pivot columns).

    Deterministic: columns scanned in order, first nonzero row wins the
    pivot, pivots normalized to 1, eliminated from every other row.
    """
    pivots: List[int] = []
    piv_row = 0
    nrows = len(rows)
    for col in range(ncols):
        if piv_row == nrows:
            break
        hit = None
        for r in range(piv_row, nrows):
            if col in rows[r]:
                hit = r
                break
        if hit is None:
            continue
        rows[piv_row], rows[hit] = rows[hit], rows[piv_row]
        prow = rows[piv_row]
        inv = _ONE / prow[col]
        if inv != 1:
            prow = {c: v * inv for c, v in prow.items()}
            rows[piv_row] = prow
        for r in range(nrows):
            if r == piv_row:
                continue
            factor = rows[r].get(col)
            if factor is None:
                continue
            target = rows[r]
            for c, v in prow.items():
                s = target.get(c, _ZERO) - factor * v
                if s:
                    target[c] = s
                else:
                    target.pop(c, None)
        pivots.append(col)
        piv_row += 1
    return rows, pivots


def rref(matrix: RationalMatrix) -> RationalMatrix:
    """Reduced row echelon form (pivots 1, pivot columns cleared)."""
    rows = [dict(r) for r in matrix.rows]
    rows, _ = _eliminate(rows, matrix.ncols)
    return RationalMatrix(matrix.nrows, matrix.ncols, rows)


def rank(matrix: RationalMatrix) -> int:
    rows = [dict(r) for r in matrix.rows]
    _, pivots = _eliminate(rows, matrix.ncols)
    return len(pivots)


def _canonical_vector(vec: List[Fraction]) -> List[Fraction]:
    """Scale to integer entries with content 1 and positive leading entry."""
    den = 1
    for v in vec:
        if v:
            den = den * v.denominator // gcd(den, v.denominator)
    ints = [int(v * den) for v in vec]
    g = 0
    for n in ints:
        g = gcd(g, abs(n))
    if g == 0:
        return [_ZERO for _ in vec]
    lead = next(n for n in ints if n)
    sign = 1 if lead > 0 else -1
    return [Fraction(sign * n, g) for n in ints]


def nullspace(matrix: RationalMatrix) -> List[List[Fraction]]:
    """Canonical basis of the right kernel.

    One vector per free column, in increasing column order, each scaled to
    integer entries with content 1 and a positive leading (first nonzero)
    entry.  The result is fully deterministic.
    """
    rows = [dict(r) for r in matrix.rows]
    rows, pivots = _eliminate(rows, matrix.ncols)
    pivot_set = set(pivots)
    basis: List[List[Fraction]] = []
    for free_col in range(matrix.ncols):
        if free_col in pivot_set:
            continue
        vec = [_ZERO] * matrix.ncols
        vec[free_col] = _ONE
        for r, pcol in enumerate(pivots):
            v = rows[r].get(free_col)
            if v:
                vec[pcol] = -v
        basis.append(_canonical_vector(vec))
    return basis


def _modular_rank(matrix: RationalMatrix, prime: int) -> int:
    """Rank mod `prime` after clearing denominators row by row.

    Raises PrimeFailure when a denominator is divisible by the prime.
    Completely separate from the Fraction elimination path.
    """
    reduced: List[Dict[int, int]] = []
    for row in matrix.rows:
        if not row:
            continue
        den = 1
        for v in row.values():
            den = den * v.denominator // gcd(den, v.denominator)
        if den % prime == 0:
            raise PrimeFailure(f"denominator lcm divisible by prime {prime}")
        r: Dict[int, int] = {}
        for c, v in row.items():
            iv = (v.numerator * (den // v.denominator)) % prime
            if iv:
                r[c] = iv
        if r:
            reduced.append(r)
    count = 0
    for col in range(matrix.ncols):
        if count == len(reduced):
            break
        hit = None
        for i in range(count, len(reduced)):
            if col in reduced[i]:
                hit = i
                break
        if hit is None:
            continue
        reduced[count], reduced[hit] = reduced[hit], reduced[count]
        prow = reduced[count]
        inv = pow(prow[col], -1, prime)
        prow = {c: (v * inv) % prime for c, v in prow.items()}
        reduced[count] = prow
        for i in range(count + 1, len(reduced)):
            factor = reduced[i].get(col)
            if factor is None:
                continue
            target = reduced[i]
            for c, v in prow.items():
                s = (target.get(c, 0) - factor * v) % prime
                if s:
                    target[c] = s
                else:
                    target.pop(c, None)
        count += 1
    return count


def rank_modular_check(
    matrix: RationalMatrix,
    primes: Sequence[int] = _DEFAULT_PRIMES,
    samples: int = 3,
) -> int:
    """Rank computed modulo several large primes, independent of `rank`.

    Modular rank can only undercount (a prime may divide a pivotal minor),
    so the maximum over `samples` successful primes is returned.  A prime
    dividing some denominator is reported and skipped.
    """
    results: List[int] = []
    for p in primes:
        try:
            results.append(_modular_rank(matrix, p))
        except PrimeFailure as exc:
            logger.info("modular rank: %s, retrying with next prime", exc)
            continue
        if len(results) == samples:
            break
    if not results:
        raise ArithmeticError(
            "all candidate primes divided a denominator; matrix entries are pathological"
        )
    return max(results)


def matmul(a: RationalMatrix, b: RationalMatrix) -> RationalMatrix:
    if a.ncols != b.nrows:
        raise ValueError(f"shape mismatch: {a.ncols} vs {b.nrows}")
    rows: List[Row] = []
    for arow in a.rows:
        acc: Row = {}
        for k, av in arow.items():
            for j, bv in b.rows[k].items():
                s = acc.get(j, _ZERO) + av * bv
                if s:
                    acc[j] = s
                else:
                    acc.pop(j, None)
        rows.append(acc)
    return RationalMatrix(a.nrows, b.ncols, rows)


def apply_matrix(matrix: RationalMatrix, vec: Sequence[Fraction]) -> List[Fraction]:
    if len(vec) != matrix.ncols:
        raise ValueError(f"vector length {len(vec)} does not match {matrix.ncols} columns")
    out = []
    for row in matrix.rows:
        s = _ZERO
        for c, v in row.items():
            s += v * vec[c]
        out.append(s)
    return out


def dense_rank(dense_rows: Sequence[Sequence]) -> int:
    """Rank of a small dense matrix given as nested sequences."""
    if not dense_rows:
        return 0
    return rank(RationalMatrix.from_rows(dense_rows))


def solve_in_span(columns: List[List[Fraction]], targets: List[List[Fraction]]) -> List[List[Fraction]]:
    """Express each target vector in the span of `columns`.

    `columns` are length-n vectors assumed linearly independent; each
    target of length n is written as a unique combination of them.  Raises
    ValueError naming the first target that is outside the span.
    """
    if not columns:
        if any(any(t) for t in targets):
            raise ValueError("target 0 is outside the span (empty column set)")
        return [[] for _ in targets]
    n = len(columns[0])
    width = len(columns)
    rows: List[Row] = []
    for i in range(n):
        row: Row = {}
        for j, col in enumerate(columns):
            if col[i]:
                row[j] = col[i]
        for t, tv in enumerate(targets):
            if tv[i]:
                row[width + t] = tv[i]
        rows.append(row)
    rows, pivots = _eliminate(rows, width + len(targets))
    for p in pivots:
        if p >= width:
            raise ValueError(f"target {p - width} is outside the span")
    if pivots != list(range(width)):
        raise ValueError("columns are not linearly independent")
    out = []
    for t in range(len(targets)):
        out.append([rows[i].get(width + t, _ZERO) for i in range(width)])
    return out
