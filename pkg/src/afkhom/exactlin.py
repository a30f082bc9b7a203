"""Exact linear algebra over the integers and the rationals.

Everything is arbitrary precision: entries are Python ints or
``fractions.Fraction``, never floats.  The canonical forms (column-style
Hermite, Smith with a divisibility chain) are computed by deterministic
elementary-operation algorithms, so equality of lattices and of
decompositions is a plain syntactic check.

Conventions:

* ``IntMatrix`` is immutable and dense (row-major tuples of ints).
* A ``Lattice`` is a subgroup of Z^ambient, stored as its basis matrix in
  canonical column Hermite form: each basis column has a positive topmost
  nonzero entry (its pivot), pivot rows strictly increase left to right,
  and in every pivot row the entries of the earlier columns are reduced
  into [0, pivot).
* ``smith_normal_form(a)`` returns ``u, d, v`` with ``a == u @ d @ v``,
  ``|det u| = |det v| = 1``, ``d`` diagonal with non-negative entries and
  d_1 | d_2 | ... | d_r, zeros trailing.
* ``QMatrix`` is a sparse rational matrix used by the Fredholm-module
  machinery; only nonzero entries are stored.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence


class ShapeError(ValueError):
    """Operands have incompatible shapes or ambient ranks."""


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    # returns (g, x, y) with g = gcd(a, b) >= 0 and g == x*a + y*b
    x, nx = 1, 0
    y, ny = 0, 1
    g, ng = a, b
    while ng:
        q = g // ng
        x, nx = nx, x - q * nx
        y, ny = ny, y - q * ny
        g, ng = ng, g - q * ng
    if g < 0:
        g, x, y = -g, -x, -y
    return g, x, y


@dataclass(frozen=True)
class IntMatrix:
    """Immutable rectangular integer matrix (row-major)."""

    rows: int
    cols: int
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.rows < 0 or self.cols < 0:
            raise ShapeError("negative matrix extent")
        if len(self.entries) != self.rows:
            raise ShapeError("row count does not match entries")
        for row in self.entries:
            if len(row) != self.cols:
                raise ShapeError("ragged rows")

    @classmethod
    def from_rows(cls, data: Iterable[Iterable[int]], cols: int | None = None) -> "IntMatrix":
        rows = []
        for row in data:
            out = []
            for x in row:
                if not isinstance(x, int):
                    raise TypeError(f"integer entry expected, got {type(x).__name__}")
                out.append(x)
            rows.append(tuple(out))
        if rows:
            ncols = len(rows[0])
        elif cols is not None:
            ncols = cols
        else:
            ncols = 0
        return cls(len(rows), ncols, tuple(rows))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, tuple(tuple(0 for _ in range(cols)) for _ in range(rows)))

    def transpose(self) -> "IntMatrix":
        return IntMatrix(
            self.cols, self.rows,
            tuple(tuple(self.entries[i][j] for i in range(self.rows)) for j in range(self.cols)),
        )

    @property
    def t(self) -> "IntMatrix":
        return self.transpose()

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ShapeError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        ot = other.transpose().entries
        out = tuple(
            tuple(sum(a * b for a, b in zip(row, col)) for col in ot)
            for row in self.entries
        )
        return IntMatrix(self.rows, other.cols, out)

    def matvec(self, v: Sequence[int]) -> tuple[int, ...]:
        if len(v) != self.cols:
            raise ShapeError(f"vector length {len(v)} does not match {self.cols} columns")
        return tuple(sum(a * b for a, b in zip(row, v)) for row in self.entries)

    def entry(self, i: int, j: int) -> int:
        return self.entries[i][j]

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(row[j] for row in self.entries)

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.entries for x in row)

    def det(self) -> int:
        """Exact determinant (fraction-free Bareiss elimination)."""
        if not self.is_square():
            raise ShapeError("determinant of a non-square matrix")
        n = self.rows
        if n == 0:
            return 1
        m = [list(row) for row in self.entries]
        sign = 1
        prev = 1
        for k in range(n - 1):
            if m[k][k] == 0:
                for i in range(k + 1, n):
                    if m[i][k] != 0:
                        m[k], m[i] = m[i], m[k]
                        sign = -sign
                        break
                else:
                    return 0
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
                m[i][k] = 0
            prev = m[k][k]
        return sign * m[n - 1][n - 1]

    def is_unimodular(self) -> bool:
        return self.is_square() and self.det() in (1, -1)

    def __str__(self) -> str:
        return "[" + "; ".join(" ".join(str(x) for x in row) for row in self.entries) + "]"


def mat_pow(a: IntMatrix, p: int) -> IntMatrix:
    if not a.is_square():
        raise ShapeError("power of a non-square matrix")
    if p < 0:
        raise ValueError("negative matrix power")
    out = IntMatrix.identity(a.rows)
    for _ in range(p):
        out = out @ a
    return out


# ---------------------------------------------------------------------------
# Hermite form and lattices


def _row_hnf_with_transform(
    data: list[list[int]], cols: int, transform: list[list[int]] | None
) -> int:
    """Reduce ``data`` in place to row Hermite form over its first ``cols``
    columns, mirroring every row operation on ``transform``.  Returns the
    number of nonzero (pivot) rows; zero rows end up at the bottom."""
    nrows = len(data)
    pivot_row = 0
    for col in range(cols):
        # make data[pivot_row][col] the gcd of the column tail, zero below
        found = False
        for i in range(pivot_row, nrows):
            if data[i][col] != 0:
                found = True
                break
        if not found:
            continue
        if i != pivot_row:
            data[pivot_row], data[i] = data[i], data[pivot_row]
            if transform is not None:
                transform[pivot_row], transform[i] = transform[i], transform[pivot_row]
        for i in range(pivot_row + 1, nrows):
            while data[i][col] != 0:
                a = data[pivot_row][col]
                b = data[i][col]
                if b % a == 0:
                    q = b // a
                    rp, ri = data[pivot_row], data[i]
                    for c in range(len(ri)):
                        ri[c] -= q * rp[c]
                    if transform is not None:
                        tp, ti = transform[pivot_row], transform[i]
                        for c in range(len(ti)):
                            ti[c] -= q * tp[c]
                else:
                    g, x, y = _xgcd(a, b)
                    aa, bb = a // g, b // g
                    rp, ri = data[pivot_row], data[i]
                    for c in range(len(ri)):
                        u, w = rp[c], ri[c]
                        rp[c] = x * u + y * w
                        ri[c] = -bb * u + aa * w
                    if transform is not None:
                        tp, ti = transform[pivot_row], transform[i]
                        for c in range(len(ti)):
                            u, w = tp[c], ti[c]
                            tp[c] = x * u + y * w
                            ti[c] = -bb * u + aa * w
        if data[pivot_row][col] < 0:
            data[pivot_row] = [-x for x in data[pivot_row]]
            if transform is not None:
                transform[pivot_row] = [-x for x in transform[pivot_row]]
        p = data[pivot_row][col]
        for r in range(pivot_row):
            q = data[r][col] // p  # floor: leaves remainder in [0, p)
            if q:
                rp, rr = data[pivot_row], data[r]
                for c in range(len(rr)):
                    rr[c] -= q * rp[c]
                if transform is not None:
                    tp, tr = transform[pivot_row], transform[r]
                    for c in range(len(tr)):
                        tr[c] -= q * tp[c]
        pivot_row += 1
    return pivot_row


def hermite_column_basis(a: IntMatrix) -> IntMatrix:
    """Canonical column Hermite basis of the column span of ``a``.

    Zero columns are dropped: the result is a.rows x r with r = rank(a).
    """
    data = [list(row) for row in a.transpose().entries]
    npiv = _row_hnf_with_transform(data, a.rows, None)
    basis_rows = data[:npiv]
    return IntMatrix.from_rows(basis_rows, cols=a.rows).transpose()


@dataclass(frozen=True)
class Lattice:
    """Subgroup of Z^ambient given by a canonical column-Hermite basis."""

    ambient: int
    basis: IntMatrix

    def __post_init__(self) -> None:
        if self.basis.rows != self.ambient:
            raise ShapeError("basis rows do not match ambient rank")

    @property
    def rank(self) -> int:
        return self.basis.cols

    def to_obj(self) -> dict:
        return {"ambient": self.ambient, "basis_rows": [list(r) for r in self.basis.entries]}

    def __str__(self) -> str:
        if self.rank == 0:
            return f"0 in Z^{self.ambient}"
        if self.ambient == 1 and self.rank == 1:
            return f"{self.basis.entry(0, 0)}Z"
        return f"lattice{self.basis} in Z^{self.ambient}"


def full_lattice(n: int) -> Lattice:
    return Lattice(n, IntMatrix.identity(n))


def zero_lattice(n: int) -> Lattice:
    return Lattice(n, IntMatrix(n, 0, tuple(() for _ in range(n))))


def image_lattice(a: IntMatrix) -> Lattice:
    """Column span of ``a`` over Z, canonicalized."""
    return Lattice(a.rows, hermite_column_basis(a))


def rank(a: IntMatrix) -> int:
    return hermite_column_basis(a).cols


def kernel_basis(a: IntMatrix) -> Lattice:
    """Canonical basis of {x in Z^cols : a @ x = 0}."""
    # Row-reduce a^T carrying an identity transform; transform rows whose
    # data part vanished are a basis of the kernel of a.
    data = [list(row) for row in a.transpose().entries]
    transform = [[1 if i == j else 0 for j in range(a.cols)] for i in range(a.cols)]
    npiv = _row_hnf_with_transform(data, a.rows, transform)
    kernel_rows = transform[npiv:]
    mat = IntMatrix.from_rows(kernel_rows, cols=a.cols).transpose()
    return image_lattice(mat)


def lattice_equal(l1: Lattice, l2: Lattice) -> bool:
    if l1.ambient != l2.ambient:
        raise ShapeError("lattices live in different ambient ranks")
    return l1 == l2


def lattice_member(v: Sequence[int], lat: Lattice) -> bool:
    """Exact membership: is ``v`` an integer combination of the basis?"""
    if len(v) != lat.ambient:
        raise ShapeError(f"vector length {len(v)} does not match ambient {lat.ambient}")
    w = list(v)
    basis = lat.basis
    for c in range(basis.cols):
        p = next(i for i in range(basis.rows) if basis.entry(i, c) != 0)
        q, r = divmod(w[p], basis.entry(p, c))
        if r:
            return False
        if q:
            for i in range(basis.rows):
                w[i] -= q * basis.entry(i, c)
    return all(x == 0 for x in w)


def lattice_subset(inner: Lattice, outer: Lattice) -> bool:
    if inner.ambient != outer.ambient:
        raise ShapeError("lattices live in different ambient ranks")
    return all(lattice_member(inner.basis.column(c), outer) for c in range(inner.rank))


# ---------------------------------------------------------------------------
# Smith normal form


@dataclass(frozen=True)
class SNFDecomposition:
    """a == u @ d @ v with u, v unimodular and d the Smith diagonal."""

    u: IntMatrix
    d: IntMatrix
    v: IntMatrix

    @property
    def diagonal(self) -> tuple[int, ...]:
        n = min(self.d.rows, self.d.cols)
        return tuple(self.d.entry(i, i) for i in range(n))


def smith_normal_form(a: IntMatrix) -> SNFDecomposition:
    """Deterministic Smith normal form with transform matrices.

    Pivots are chosen as the smallest nonzero absolute value in the working
    submatrix (ties broken row-major), which fixes the output for a given
    input.  Diagonal entries are non-negative and form a divisibility chain.
    """
    m, n = a.rows, a.cols
    d = [list(row) for row in a.entries]
    u = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    v = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    # Invariant maintained by every operation below: a == u @ d @ v.

    def row_add(i: int, j: int, q: int) -> None:
        # d[i] += q * d[j]; inverse op on u: col j -= q * col i
        di, dj = d[i], d[j]
        for c in range(n):
            di[c] += q * dj[c]
        for r in range(m):
            u[r][j] -= q * u[r][i]

    def row_swap(i: int, j: int) -> None:
        d[i], d[j] = d[j], d[i]
        for r in range(m):
            u[r][i], u[r][j] = u[r][j], u[r][i]

    def row_negate(i: int) -> None:
        d[i] = [-x for x in d[i]]
        for r in range(m):
            u[r][i] = -u[r][i]

    def row_combine(i: int, j: int, x: int, y: int, xx: int, yy: int) -> None:
        # rows (i, j) <- (x*ri + y*rj, xx*ri + yy*rj), det must be 1
        di, dj = d[i], d[j]
        for c in range(n):
            p, q = di[c], dj[c]
            di[c] = x * p + y * q
            dj[c] = xx * p + yy * q
        for r in range(m):
            p, q = u[r][i], u[r][j]
            u[r][i] = yy * p - xx * q
            u[r][j] = -y * p + x * q

    def col_add(i: int, j: int, q: int) -> None:
        # col i += q * col j; inverse op on v: row j -= q * row i
        for r in range(m):
            d[r][i] += q * d[r][j]
        vi, vj = v[i], v[j]
        for c in range(n):
            vj[c] -= q * vi[c]

    def col_swap(i: int, j: int) -> None:
        for r in range(m):
            d[r][i], d[r][j] = d[r][j], d[r][i]
        v[i], v[j] = v[j], v[i]

    def col_combine(i: int, j: int, x: int, y: int, xx: int, yy: int) -> None:
        # cols (i, j) <- (x*ci + y*cj, xx*ci + yy*cj), det must be 1
        for r in range(m):
            p, q = d[r][i], d[r][j]
            d[r][i] = x * p + y * q
            d[r][j] = xx * p + yy * q
        vi, vj = v[i], v[j]
        for c in range(n):
            p, q = vi[c], vj[c]
            vi[c] = yy * p - xx * q
            vj[c] = -y * p + x * q

    t = 0
    bound = min(m, n)
    while t < bound:
        pivot = None
        best = None
        for i in range(t, m):
            for j in range(t, n):
                e = abs(d[i][j])
                if e and (best is None or e < best):
                    best = e
                    pivot = (i, j)
        if pivot is None:
            break
        pi, pj = pivot
        if pi != t:
            row_swap(pi, t)
        if pj != t:
            col_swap(pj, t)
        while True:
            if d[t][t] < 0:
                row_negate(t)
            # clear column t below the pivot
            for i in range(t + 1, m):
                while d[i][t] != 0:
                    a_ = d[t][t]
                    b_ = d[i][t]
                    if b_ % a_ == 0:
                        row_add(i, t, -(b_ // a_))
                    else:
                        g, x, y = _xgcd(a_, b_)
                        row_combine(t, i, x, y, -(b_ // g), a_ // g)
            # clear row t to the right (may reintroduce column entries)
            if any(d[t][j] != 0 for j in range(t + 1, n)):
                for j in range(t + 1, n):
                    while d[t][j] != 0:
                        a_ = d[t][t]
                        b_ = d[t][j]
                        if b_ % a_ == 0:
                            col_add(j, t, -(b_ // a_))
                        else:
                            g, x, y = _xgcd(a_, b_)
                            col_combine(t, j, x, y, -(b_ // g), a_ // g)
                if any(d[i][t] != 0 for i in range(t + 1, m)):
                    continue
            if all(d[i][t] == 0 for i in range(t + 1, m)):
                # enforce divisibility of the remaining submatrix by the pivot
                p = d[t][t]
                viol = None
                for i in range(t + 1, m):
                    for j in range(t + 1, n):
                        if d[i][j] % p:
                            viol = i
                            break
                    if viol is not None:
                        break
                if viol is None:
                    break
                row_add(t, viol, 1)
        t += 1

    return SNFDecomposition(
        IntMatrix.from_rows(u, cols=m),
        IntMatrix.from_rows(d, cols=n),
        IntMatrix.from_rows(v, cols=n),
    )


def invariant_factors(a: IntMatrix) -> tuple[int, ...]:
    """Nonzero Smith diagonal entries of ``a`` (the divisibility chain)."""
    return tuple(x for x in smith_normal_form(a).diagonal if x)


# ---------------------------------------------------------------------------
# Sparse exact rational matrices


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"exact rational entry expected, got {type(x).__name__}")


class QMatrix:
    """Immutable sparse matrix with exact rational entries.

    Only nonzero entries are stored ({(i, j): Fraction}), which keeps the
    long commutator products of the pairing computations cheap: the
    matrices appearing there have a handful of nonzero entries regardless
    of their dimension.
    """

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows: int, cols: int, data: Mapping[tuple[int, int], Fraction] | None = None):
        if rows < 0 or cols < 0:
            raise ShapeError("negative matrix extent")
        self.rows = rows
        self.cols = cols
        clean: dict[tuple[int, int], Fraction] = {}
        if data:
            for (i, j), val in data.items():
                f = _as_fraction(val)
                if not (0 <= i < rows and 0 <= j < cols):
                    raise ShapeError(f"entry ({i}, {j}) outside {rows}x{cols}")
                if f:
                    clean[(i, j)] = f
        self._data = clean

    @classmethod
    def from_rows(cls, data: Iterable[Iterable]) -> "QMatrix":
        rows = [list(r) for r in data]
        nrows = len(rows)
        ncols = len(rows[0]) if rows else 0
        entries = {}
        for i, row in enumerate(rows):
            if len(row) != ncols:
                raise ShapeError("ragged rows")
            for j, x in enumerate(row):
                f = _as_fraction(x)
                if f:
                    entries[(i, j)] = f
        return cls(nrows, ncols, entries)

    @classmethod
    def identity(cls, n: int) -> "QMatrix":
        return cls(n, n, {(i, i): Fraction(1) for i in range(n)})

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "QMatrix":
        return cls(rows, cols)

    def entry(self, i: int, j: int) -> Fraction:
        return self._data.get((i, j), Fraction(0))

    def items(self) -> Iterator[tuple[tuple[int, int], Fraction]]:
        return iter(sorted(self._data.items()))

    @property
    def nnz(self) -> int:
        return len(self._data)

    def is_zero(self) -> bool:
        return not self._data

    def __eq__(self, other) -> bool:
        if not isinstance(other, QMatrix):
            return NotImplemented
        return (self.rows, self.cols) == (other.rows, other.cols) and self._data == other._data

    __hash__ = None  # mutable-looking container; use explicit keys if needed

    def _same_shape(self, other: "QMatrix") -> None:
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ShapeError(f"{self.rows}x{self.cols} vs {other.rows}x{other.cols}")

    def __add__(self, other: "QMatrix") -> "QMatrix":
        self._same_shape(other)
        data = dict(self._data)
        for k, val in other._data.items():
            s = data.get(k, Fraction(0)) + val
            if s:
                data[k] = s
            else:
                data.pop(k, None)
        return QMatrix(self.rows, self.cols, data)

    def __neg__(self) -> "QMatrix":
        return QMatrix(self.rows, self.cols, {k: -val for k, val in self._data.items()})

    def __sub__(self, other: "QMatrix") -> "QMatrix":
        return self + (-other)

    def scaled(self, c) -> "QMatrix":
        f = _as_fraction(c)
        if not f:
            return QMatrix(self.rows, self.cols)
        return QMatrix(self.rows, self.cols, {k: f * val for k, val in self._data.items()})

    def __matmul__(self, other: "QMatrix") -> "QMatrix":
        if self.cols != other.rows:
            raise ShapeError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        rows_of_other: dict[int, list[tuple[int, Fraction]]] = {}
        for (i, j), val in other._data.items():
            rows_of_other.setdefault(i, []).append((j, val))
        acc: dict[tuple[int, int], Fraction] = {}
        for (i, j), val in self._data.items():
            hits = rows_of_other.get(j)
            if not hits:
                continue
            for l, w in hits:
                key = (i, l)
                s = acc.get(key, Fraction(0)) + val * w
                if s:
                    acc[key] = s
                else:
                    acc.pop(key, None)
        return QMatrix(self.rows, other.cols, acc)

    def transpose(self) -> "QMatrix":
        return QMatrix(self.cols, self.rows, {(j, i): val for (i, j), val in self._data.items()})

    @property
    def t(self) -> "QMatrix":
        return self.transpose()

    def trace(self) -> Fraction:
        if self.rows != self.cols:
            raise ShapeError("trace of a non-square matrix")
        return sum((val for (i, j), val in self._data.items() if i == j), Fraction(0))

    def direct_sum(self, other: "QMatrix") -> "QMatrix":
        data = dict(self._data)
        for (i, j), val in other._data.items():
            data[(self.rows + i, self.cols + j)] = val
        return QMatrix(self.rows + other.rows, self.cols + other.cols, data)

    def conjugate_by_permutation(self, sigma: Sequence[int]) -> "QMatrix":
        """P A P^T where P is the permutation matrix e_{sigma(i), i}."""
        if self.rows != self.cols or len(sigma) != self.rows:
            raise ShapeError("permutation length does not match a square matrix")
        return QMatrix(self.rows, self.cols,
                       {(sigma[i], sigma[j]): val for (i, j), val in self._data.items()})

    def dense(self) -> list[list[Fraction]]:
        out = [[Fraction(0)] * self.cols for _ in range(self.rows)]
        for (i, j), val in self._data.items():
            out[i][j] = val
        return out

    def __str__(self) -> str:
        return "[" + "; ".join(
            " ".join(str(self.entry(i, j)) for j in range(self.cols)) for i in range(self.rows)
        ) + "]"

    def __repr__(self) -> str:
        return f"QMatrix({self.rows}x{self.cols}, nnz={self.nnz})"
