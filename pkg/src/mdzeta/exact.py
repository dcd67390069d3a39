"""Exact lattice linear algebra over the rationals.  No floats in here.

Supplies the pieces the generating-function layer leans on: dual bases of
integer vector families, Smith normal form with tracked unimodular
transforms, enumeration of finite quotient groups Z^m / <rows>, selection of
a perturbation direction rho avoiding all degenerate hyperplanes, and the
rho-directed fractional part used for lattice-point counting.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import prod


class ExactError(ValueError):
    pass


class SingularMatrix(ExactError):
    pass


class SingularBasis(ExactError):
    pass


class ZeroPairing(ExactError):
    pass


class ExhaustedCandidates(ExactError):
    pass


class RankDeficient(ExactError):
    pass


def dot(u, v) -> Fraction:
    if len(u) != len(v):
        raise ExactError(f"dot of lengths {len(u)} and {len(v)}")
    return sum((Fraction(a) * Fraction(b) for a, b in zip(u, v)), Fraction(0))


@dataclass(frozen=True)
class RationalMatrix:
    rows: tuple[tuple[Fraction, ...], ...]

    @classmethod
    def from_rows(cls, rows) -> "RationalMatrix":
        coerced = tuple(tuple(Fraction(v) for v in row) for row in rows)
        if not coerced or not coerced[0]:
            raise ExactError("matrix must be nonempty")
        width = len(coerced[0])
        if any(len(row) != width for row in coerced):
            raise ExactError("ragged matrix")
        return cls(coerced)

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls(
            tuple(
                tuple(Fraction(1 if i == j else 0) for j in range(n))
                for i in range(n)
            )
        )

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0])

    def transpose(self) -> "RationalMatrix":
        return RationalMatrix(tuple(zip(*self.rows)))

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.ncols != other.nrows:
            raise ExactError("matmul shape mismatch")
        cols = other.transpose().rows
        return RationalMatrix(
            tuple(tuple(dot(row, col) for col in cols) for row in self.rows)
        )

    def det(self) -> Fraction:
        if self.nrows != self.ncols:
            raise ExactError("determinant of a non-square matrix")
        a = [list(row) for row in self.rows]
        n = self.nrows
        sign = 1
        result = Fraction(1)
        for col in range(n):
            pivot = next((i for i in range(col, n) if a[i][col] != 0), None)
            if pivot is None:
                return Fraction(0)
            if pivot != col:
                a[col], a[pivot] = a[pivot], a[col]
                sign = -sign
            result *= a[col][col]
            inv = 1 / a[col][col]
            for i in range(col + 1, n):
                if a[i][col] != 0:
                    factor = a[i][col] * inv
                    a[i] = [x - factor * y for x, y in zip(a[i], a[col])]
        return sign * result

    def inverse(self) -> "RationalMatrix":
        if self.nrows != self.ncols:
            raise ExactError("inverse of a non-square matrix")
        n = self.nrows
        a = [list(row) + [Fraction(1 if i == j else 0) for j in range(n)]
             for i, row in enumerate(self.rows)]
        for col in range(n):
            pivot = next((i for i in range(col, n) if a[i][col] != 0), None)
            if pivot is None:
                raise SingularMatrix("matrix is singular")
            a[col], a[pivot] = a[pivot], a[col]
            inv = 1 / a[col][col]
            a[col] = [x * inv for x in a[col]]
            for i in range(n):
                if i != col and a[i][col] != 0:
                    factor = a[i][col]
                    a[i] = [x - factor * y for x, y in zip(a[i], a[col])]
        return RationalMatrix(tuple(tuple(row[n:]) for row in a))


def rank_of(vectors) -> int:
    """Rank of a family of rational vectors (rows)."""
    rows = [[Fraction(v) for v in vec] for vec in vectors]
    if not rows:
        return 0
    rank = 0
    width = len(rows[0])
    for col in range(width):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = 1 / rows[rank][col]
        for i in range(len(rows)):
            if i != rank and rows[i][col] != 0:
                factor = rows[i][col] * inv
                rows[i] = [x - factor * y for x, y in zip(rows[i], rows[rank])]
        rank += 1
        if rank == len(rows):
            break
    return rank


def dual_basis(vectors) -> tuple[tuple[Fraction, ...], ...]:
    """Rows dual to the given basis rows: <vectors[i], dual[j]> = delta_ij."""
    mat = RationalMatrix.from_rows(vectors)
    if mat.nrows != mat.ncols:
        raise ExactError("dual basis needs a square family")
    try:
        return mat.inverse().transpose().rows
    except SingularMatrix as exc:
        raise SingularBasis("family is not a basis") from exc


def smith_normal_form(mat) -> tuple[tuple, tuple, tuple]:
    """(U, D, V) with U*mat*V = D diagonal, U and V unimodular.

    Diagonal entries are nonnegative and each divides the next.  Integer
    input only.
    """
    a = [[int(v) for v in row] for row in mat]
    m = len(a)
    n = len(a[0]) if m else 0
    if any(len(row) != n for row in a):
        raise ExactError("ragged matrix")
    u = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    v = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def row_sub(i, j, q):  # row i -= q * row j
        a[i] = [x - q * y for x, y in zip(a[i], a[j])]
        u[i] = [x - q * y for x, y in zip(u[i], u[j])]

    def negate_row(i):
        a[i] = [-x for x in a[i]]
        u[i] = [-x for x in u[i]]

    def col_sub(i, j, q):  # col i -= q * col j
        for row in a:
            row[i] -= q * row[j]
        for row in v:
            row[i] -= q * row[j]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if a[i][j] != 0 and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        if best[0] != t:
            swap_rows(t, best[0])
        if best[1] != t:
            swap_cols(t, best[1])
        while True:
            if a[t][t] < 0:
                negate_row(t)
            dirty = False
            for i in range(t + 1, m):
                if a[i][t] != 0:
                    row_sub(i, t, a[i][t] // a[t][t])
                    if a[i][t] != 0:  # Euclidean step shrank the remainder
                        swap_rows(t, i)
                        dirty = True
            for j in range(t + 1, n):
                if a[t][j] != 0:
                    col_sub(j, t, a[t][j] // a[t][t])
                    if a[t][j] != 0:
                        swap_cols(t, j)
                        dirty = True
            if dirty:
                continue
            viol = next(
                (
                    i
                    for i in range(t + 1, m)
                    for j in range(t + 1, n)
                    if a[i][j] % a[t][t] != 0
                ),
                None,
            )
            if viol is None:
                break
            row_sub(t, viol, -1)  # pull the violating row up; pivot will shrink
        t += 1
    for i in range(min(m, n)):
        if a[i][i] < 0:
            negate_row(i)
    freeze = lambda rows: tuple(tuple(row) for row in rows)
    return freeze(u), freeze(a), freeze(v)


def _unimodular_inverse(mat) -> tuple[tuple[int, ...], ...]:
    inv = RationalMatrix.from_rows(mat).inverse()
    out = []
    for row in inv.rows:
        if any(v.denominator != 1 for v in row):
            raise ExactError("matrix is not unimodular")
        out.append(tuple(int(v) for v in row))
    return tuple(out)


def _row_times(vec, mat) -> tuple[int, ...]:
    return tuple(
        sum(vec[i] * mat[i][j] for i in range(len(vec)))
        for j in range(len(mat[0]))
    )


@dataclass(frozen=True)
class CosetSet:
    """The finite group Z^m / <rows>, with canonical representatives.

    reduce() maps any integer vector to the representative of its coset;
    representatives are enumerated in lexicographic order of the Smith
    coordinates, so the list is deterministic.
    """

    representatives: tuple[tuple[int, ...], ...]
    group_order: int
    V: tuple[tuple[int, ...], ...]
    Vinv: tuple[tuple[int, ...], ...]
    diag: tuple[int, ...]

    def reduce(self, w) -> tuple[int, ...]:
        c = _row_times(tuple(w), self.V)
        c = tuple(x % d for x, d in zip(c, self.diag))
        return _row_times(c, self.Vinv)

    def same_coset(self, w1, w2) -> bool:
        delta = tuple(x - y for x, y in zip(w1, w2))
        c = _row_times(delta, self.V)
        return all(x % d == 0 for x, d in zip(c, self.diag))


def coset_representatives(vectors) -> CosetSet:
    """Quotient of Z^m by the lattice generated by the given m rows."""
    vecs = [tuple(int(v) for v in row) for row in vectors]
    m = len(vecs)
    if any(len(row) != m for row in vecs):
        raise ExactError("coset lattice needs a square generating matrix")
    _, d, v = smith_normal_form(vecs)
    diag = tuple(d[i][i] for i in range(m))
    if any(x == 0 for x in diag):
        raise SingularBasis("generators do not span a finite-index lattice")
    vinv = _unimodular_inverse(v)
    reps = tuple(
        _row_times(c, vinv)
        for c in itertools.product(*(range(x) for x in diag))
    )
    return CosetSet(
        representatives=reps,
        group_order=prod(diag),
        V=tuple(tuple(row) for row in v),
        Vinv=vinv,
        diag=diag,
    )


@dataclass(frozen=True)
class RhoVector:
    """A certified perturbation direction.

    Certification means: for every basis extracted from the family and every
    member of that basis the pairing <rho, dual> is nonzero, and rho lies on
    none of the hyperplanes spanned by rank-(m-1) subfamilies.  The two
    conditions coincide for spanning families; both are checked.
    """

    coords: tuple[int, ...]
    ladder_index: int
    bases_checked: int
    hyperplanes_checked: int


def _rho_ladder(m: int):
    yield tuple(range(1, m + 1))
    s = 1
    while True:
        t = m + s
        yield tuple(t**e for e in range(m))
        s += 1


def choose_rho(vectors, variant: int = 0, max_candidates: int = 64) -> RhoVector:
    """Pick the (variant+1)-th certified direction from a fixed ladder.

    The ladder starts at (1, 2, ..., m) and continues with geometric
    candidates (1, t, t^2, ...), t = m+1, m+2, ...; for m = 1 every rung is
    (1,), so all variants agree there.
    """
    if variant < 0:
        raise ExactError("variant must be nonnegative")
    vecs = list(dict.fromkeys(tuple(int(x) for x in v) for v in vectors))
    if not vecs:
        raise ExactError("empty vector family")
    m = len(vecs[0])
    if any(len(v) != m for v in vecs):
        raise ExactError("ragged vector family")
    if rank_of(vecs) < m:
        raise RankDeficient(f"family has rank < {m}")
    duals = []
    for subset in itertools.combinations(vecs, m):
        try:
            duals.append(dual_basis(subset))
        except SingularBasis:
            continue
    hyperplanes = []
    if m >= 2:
        for subset in itertools.combinations(vecs, m - 1):
            if rank_of(subset) == m - 1:
                hyperplanes.append(subset)

    found = 0
    for idx, cand in enumerate(_rho_ladder(m)):
        if idx >= max_candidates:
            break
        ok = all(
            dot(cand, dvec) != 0 for dual in duals for dvec in dual
        ) and all(
            rank_of(list(sub) + [cand]) == m for sub in hyperplanes
        )
        if ok:
            if found == variant:
                return RhoVector(
                    coords=cand,
                    ladder_index=idx,
                    bases_checked=len(duals),
                    hyperplanes_checked=len(hyperplanes),
                )
            found += 1
    raise ExhaustedCandidates(
        f"no certified direction within {max_candidates} candidates (variant {variant})"
    )


def fractional_part(x: Fraction, p: Fraction) -> Fraction:
    """Fractional part of x nudged along the sign of p; lands in [0, 1].

    At non-integer x both branches agree with the usual {x}.  At integer x
    the positive branch gives 0 and the negative branch gives 1, which is
    exactly the limit of {x - eps*p} as eps -> 0+.
    """
    if p > 0:
        return x % 1
    if p < 0:
        return 1 - ((-x) % 1)
    raise ZeroPairing("direction pairs to zero; rho certification failed")
