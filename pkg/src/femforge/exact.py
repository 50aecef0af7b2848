"""Exact dense linear algebra over the rationals.

Every operation here is exact: ranks, kernels and solves are computed by
integer fraction-free elimination (rows are cleared of denominators first,
then eliminated by cross-multiplication with gcd reduction to keep entries
small).  There is no floating-point path anywhere in this module.

Scalars are ``fractions.Fraction`` values, which already guarantee lowest
terms and a positive denominator.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

ExactScalar = Fraction

_ZERO = Fraction(0)
_ONE = Fraction(1)


class SingularMatrixError(ArithmeticError):
    """Raised when a solve requires an invertible matrix and rank falls short."""


class DimensionMismatchError(ValueError):
    """Raised when operands do not share a compatible ambient dimension."""


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


class Matrix:
    """Immutable dense matrix with Fraction entries (row-major)."""

    __slots__ = ("rows", "cols", "_rows", "_rank", "_rref")

    def __init__(self, data: Iterable[Iterable]):
        rows = [tuple(_as_fraction(x) for x in row) for row in data]
        self._rows = tuple(rows)
        self.rows = len(rows)
        self.cols = len(rows[0]) if rows else 0
        for row in rows:
            if len(row) != self.cols:
                raise DimensionMismatchError("ragged rows")
        self._rank = None
        self._rref = None

    # -- construction helpers -------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Matrix":
        return cls([[_ZERO] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls([[_ONE if i == j else _ZERO for j in range(n)] for i in range(n)])

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: int | None = None) -> "Matrix":
        columns = [tuple(col) for col in columns]
        if not columns:
            return cls.zeros(rows or 0, 0)
        n = len(columns[0])
        return cls([[columns[j][i] for j in range(len(columns))] for i in range(n)])

    def column(self, j: int) -> tuple:
        return tuple(row[j] for row in self._rows)

    def columns(self) -> list[tuple]:
        return [self.column(j) for j in range(self.cols)]

    def row(self, i: int) -> tuple:
        return self._rows[i]

    def __getitem__(self, ij) -> Fraction:
        i, j = ij
        return self._rows[i][j]

    def __eq__(self, other) -> bool:
        return isinstance(other, Matrix) and self._rows == other._rows

    def __hash__(self):
        return hash(self._rows)

    def __repr__(self):
        return f"Matrix({self.rows}x{self.cols})"

    def transpose(self) -> "Matrix":
        return Matrix([[self._rows[i][j] for i in range(self.rows)] for j in range(self.cols)])

    def hstack(self, other: "Matrix") -> "Matrix":
        if self.rows != other.rows:
            raise DimensionMismatchError("hstack needs equal row counts")
        return Matrix([self._rows[i] + other._rows[i] for i in range(self.rows)])

    def matmul(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise DimensionMismatchError("matmul shape mismatch")
        cols = other.transpose()._rows
        return Matrix(
            [[sum((a * b for a, b in zip(row, col) if a and b), _ZERO) for col in cols] for row in self._rows]
        )

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return self.matmul(other)

    def scale(self, c) -> "Matrix":
        c = _as_fraction(c)
        return Matrix([[c * x for x in row] for row in self._rows])

    def __sub__(self, other: "Matrix") -> "Matrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DimensionMismatchError("subtraction shape mismatch")
        return Matrix([[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self._rows, other._rows)])

    def is_zero(self) -> bool:
        return all(not x for row in self._rows for x in row)

    # -- elimination core ------------------------------------------------------

    def _int_rows(self) -> list[list[int]]:
        """Rows scaled to coprime integers (scaling preserves row space)."""
        out = []
        for row in self._rows:
            denom_lcm = 1
            for x in row:
                d = x.denominator
                denom_lcm = denom_lcm // gcd(denom_lcm, d) * d
            ints = [int(x * denom_lcm) for x in row]
            g = 0
            for v in ints:
                g = gcd(g, v)
            if g > 1:
                ints = [v // g for v in ints]
            out.append(ints)
        return out

    def rank(self) -> int:
        if self._rank is None:
            _, pivots = _int_echelon(self._int_rows(), self.cols)
            self._rank = len(pivots)
        return self._rank

    def det(self) -> Fraction:
        """Determinant via Bareiss fraction-free elimination."""
        if self.rows != self.cols:
            raise DimensionMismatchError("det needs a square matrix")
        n = self.rows
        if n == 0:
            return _ONE
        scale = _ONE
        rows = []
        for row in self._rows:
            denom_lcm = 1
            for x in row:
                d = x.denominator
                denom_lcm = denom_lcm // gcd(denom_lcm, d) * d
            scale *= denom_lcm
            rows.append([int(x * denom_lcm) for x in row])
        sign = 1
        prev = 1
        for c in range(n - 1):
            piv = None
            for i in range(c, n):
                if rows[i][c]:
                    piv = i
                    break
            if piv is None:
                return _ZERO
            if piv != c:
                rows[c], rows[piv] = rows[piv], rows[c]
                sign = -sign
            p = rows[c][c]
            for i in range(c + 1, n):
                ric = rows[i][c]
                ri, rc = rows[i], rows[c]
                # Bareiss update: the division by the previous pivot is exact.
                rows[i] = [(p * ri[j] - ric * rc[j]) // prev for j in range(c + 1, n)]
                rows[i][:0] = [0] * (c + 1)
            prev = p
        return Fraction(sign * rows[n - 1][n - 1], 1) / scale

    def rref(self) -> tuple["Matrix", tuple[int, ...]]:
        """Reduced row echelon form and pivot columns (rational, leading 1s)."""
        if self._rref is None:
            ech, pivots = _int_echelon(self._int_rows(), self.cols)
            reduced = _back_reduce(ech, pivots)
            self._rref = (Matrix(reduced) if reduced else Matrix.zeros(0, self.cols), tuple(pivots))
            if self._rank is None:
                self._rank = len(pivots)
        return self._rref

    def null_space(self) -> "Matrix":
        """Columns form a basis of ``{x : Ax = 0}`` (integer, gcd-reduced)."""
        red, pivots = self.rref()
        free = [j for j in range(self.cols) if j not in pivots]
        basis = []
        for f in free:
            vec = [_ZERO] * self.cols
            vec[f] = _ONE
            for r, pc in enumerate(pivots):
                vec[pc] = -red[r, f]
            basis.append(_normalize_vector(vec))
        return Matrix.from_columns(basis, rows=self.cols)

    def solve(self, b: "Matrix") -> "Matrix":
        """Exact X with ``self @ X = b``; requires square full-rank self."""
        if self.rows != self.cols:
            raise DimensionMismatchError("solve needs a square matrix")
        if b.rows != self.rows:
            raise DimensionMismatchError("right-hand side row count mismatch")
        aug = self.hstack(b)
        red, pivots = aug.rref()
        if len(pivots) < self.cols or any(p >= self.cols for p in pivots):
            raise SingularMatrixError(f"matrix rank {self.rank()} < {self.cols}")
        return Matrix([[red[i, self.cols + j] for j in range(b.cols)] for i in range(self.cols)])


def _int_echelon(rows: list[list[int]], cols: int) -> tuple[list[list[int]], list[int]]:
    """Row echelon form over Z by fraction-free cross-multiplication.

    Pivots are chosen among nonzero candidates by smallest bit length to slow
    entry growth; each updated row is divided by its gcd, which keeps the
    intermediate integers near the size Bareiss division would give.
    """
    rows = [list(r) for r in rows]
    m = len(rows)
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == m:
            break
        best = -1
        best_bits = None
        for i in range(r, m):
            v = rows[i][c]
            if v:
                bits = abs(v).bit_length()
                if best_bits is None or bits < best_bits:
                    best, best_bits = i, bits
                    if bits == 1:
                        break
        if best < 0:
            continue
        rows[r], rows[best] = rows[best], rows[r]
        piv_row = rows[r]
        p = piv_row[c]
        for i in range(r + 1, m):
            a = rows[i][c]
            if not a:
                continue
            cur = rows[i]
            new = [p * cur[j] - a * piv_row[j] for j in range(c + 1, cols)]
            g = 0
            for v in new:
                g = gcd(g, v)
                if g == 1:
                    break
            if g > 1:
                new = [v // g for v in new]
            rows[i] = [0] * (c + 1) + new
        pivots.append(c)
        r += 1
    return rows[:r], pivots


def _back_reduce(ech: list[list[int]], pivots: list[int]) -> list[list[Fraction]]:
    """Turn an integer echelon into the rational RREF (pivot entries 1)."""
    out = [[Fraction(v) for v in row] for row in ech]
    for r in range(len(pivots) - 1, -1, -1):
        pc = pivots[r]
        piv = out[r][pc]
        if piv != 1:
            out[r] = [v / piv for v in out[r]]
        for i in range(r):
            f = out[i][pc]
            if f:
                out[i] = [a - f * b for a, b in zip(out[i], out[r])]
    return out


def _normalize_vector(vec: list[Fraction]) -> list[Fraction]:
    """Scale to coprime integers with positive leading entry."""
    denom_lcm = 1
    for x in vec:
        d = x.denominator
        denom_lcm = denom_lcm // gcd(denom_lcm, d) * d
    ints = [int(x * denom_lcm) for x in vec]
    g = 0
    for v in ints:
        g = gcd(g, v)
    if g > 1:
        ints = [v // g for v in ints]
    for v in ints:
        if v:
            if v < 0:
                ints = [-w for w in ints]
            break
    return [Fraction(v) for v in ints]


# -- module-level operation aliases -------------------------------------------


def rank(a: Matrix) -> int:
    return a.rank()


def null_space_basis(a: Matrix) -> Matrix:
    return a.null_space()


def solve(a: Matrix, b: Matrix) -> Matrix:
    return a.solve(b)


# -- column-space (subspace) operations ----------------------------------------
#
# Subspaces are represented by matrices whose columns span them, all expressed
# in one shared ambient coordinate frame (the row index).  The canonical form
# is the reduced column echelon form, so equality is syntactic comparison.


def _check_ambient(a: Matrix, b: Matrix) -> None:
    if a.rows != b.rows:
        raise DimensionMismatchError(f"ambient dimensions differ: {a.rows} vs {b.rows}")


def image_basis(a: Matrix) -> Matrix:
    """Canonical basis of the column space (reduced column echelon form)."""
    red, _ = a.transpose().rref()
    if red.rows == 0:
        return Matrix.zeros(a.rows, 0)
    return red.transpose()


def subspace_equal(a: Matrix, b: Matrix) -> bool:
    _check_ambient(a, b)
    return image_basis(a) == image_basis(b)


def subspace_sum(a: Matrix, b: Matrix) -> Matrix:
    _check_ambient(a, b)
    return image_basis(a.hstack(b))


def subspace_contains(a: Matrix, b: Matrix) -> bool:
    """True iff every column of b lies in the column space of a."""
    _check_ambient(a, b)
    return a.hstack(b).rank() == a.rank()


def subspace_intersection(a: Matrix, b: Matrix) -> Matrix:
    _check_ambient(a, b)
    if a.cols == 0 or b.cols == 0:
        return Matrix.zeros(a.rows, 0)
    ker = a.hstack(b.scale(-1)).null_space()
    vecs = []
    for jc in range(ker.cols):
        col = ker.column(jc)
        vec = [sum((col[j] * a[i, j] for j in range(a.cols) if col[j]), _ZERO) for i in range(a.rows)]
        vecs.append(vec)
    return image_basis(Matrix.from_columns(vecs, rows=a.rows))


def is_direct_sum(a: Matrix, b: Matrix) -> bool:
    _check_ambient(a, b)
    return a.hstack(b).rank() == a.rank() + b.rank()
