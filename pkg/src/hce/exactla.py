"""Exact rational and integer linear algebra.

Matrices are thin immutable wrappers around sympy's ``DomainMatrix`` over QQ
(sparse storage).  Public entry and exit points use :class:`fractions.Fraction`.
Every basis choice is deterministic: echelon pivots are taken left to right.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

from sympy.polys.domains import QQ, ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import smith_normal_decomp


class ShapeError(ValueError):
    """Matrix shapes are incompatible."""


class DescentError(ValueError):
    """A linear map does not descend to the requested subquotients."""


class InconsistentSystemError(ValueError):
    """A linear system has no solution."""


def to_fraction(value) -> Fraction:
    """Parse ints, Fractions, gmpy/sympy rationals and ``"p/q"`` strings."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    num = getattr(value, "numerator", None)
    den = getattr(value, "denominator", None)
    if num is not None and den is not None:
        return Fraction(int(num), int(den))
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def _qq(value):
    f = to_fraction(value)
    return QQ(f.numerator, f.denominator)


class QMatrix:
    """Immutable exact rational matrix."""

    __slots__ = ("_dm",)

    def __init__(self, dm: DomainMatrix):
        if dm.domain != QQ:
            dm = dm.convert_to(QQ)
        object.__setattr__(self, "_dm", dm.to_sparse())

    def __setattr__(self, name, value):
        raise AttributeError("QMatrix is immutable")

    # construction -------------------------------------------------------

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], ncols: int | None = None) -> "QMatrix":
        rows = [list(r) for r in rows]
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        data = {}
        for i, row in enumerate(rows):
            if len(row) != ncols:
                raise ShapeError(f"row {i} has {len(row)} entries, expected {ncols}")
            entries = {j: _qq(v) for j, v in enumerate(row) if v != 0 and to_fraction(v) != 0}
            if entries:
                data[i] = entries
        return cls(DomainMatrix(data, (len(rows), ncols), QQ))

    @classmethod
    def from_sparse(cls, shape: tuple[int, int], entries: Iterable[tuple[int, int, object]]) -> "QMatrix":
        """Build from ``(row, col, value)`` triples; repeated positions are summed."""
        nrows, ncols = shape
        data: dict[int, dict] = {}
        for i, j, v in entries:
            if not (0 <= i < nrows and 0 <= j < ncols):
                raise ShapeError(f"entry ({i}, {j}) outside shape {shape}")
            row = data.setdefault(i, {})
            row[j] = row.get(j, QQ(0)) + _qq(v)
        data = {i: {j: v for j, v in row.items() if v} for i, row in data.items()}
        data = {i: row for i, row in data.items() if row}
        return cls(DomainMatrix(data, (nrows, ncols), QQ))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], nrows: int) -> "QMatrix":
        return cls.from_rows([list(c) for c in columns], nrows).T if columns else cls.zeros(nrows, 0)

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "QMatrix":
        return cls(DomainMatrix({}, (nrows, ncols), QQ))

    @classmethod
    def identity(cls, n: int) -> "QMatrix":
        return cls(DomainMatrix({i: {i: QQ(1)} for i in range(n)}, (n, n), QQ))

    @classmethod
    def hstack(cls, *blocks: "QMatrix", nrows: int | None = None) -> "QMatrix":
        blocks = [b for b in blocks if b.cols]
        if not blocks:
            return cls.zeros(nrows or 0, 0)
        return cls(blocks[0]._dm.hstack(*[b._dm for b in blocks[1:]]))

    @classmethod
    def vstack(cls, *blocks: "QMatrix", ncols: int | None = None) -> "QMatrix":
        blocks = [b for b in blocks if b.rows]
        if not blocks:
            return cls.zeros(0, ncols or 0)
        return cls(blocks[0]._dm.vstack(*[b._dm for b in blocks[1:]]))

    # inspection ---------------------------------------------------------

    @property
    def dm(self) -> DomainMatrix:
        return self._dm

    @property
    def shape(self) -> tuple[int, int]:
        return self._dm.shape

    @property
    def rows(self) -> int:
        return self._dm.shape[0]

    @property
    def cols(self) -> int:
        return self._dm.shape[1]

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return to_fraction(self._dm.rep.get(i, {}).get(j, QQ(0)))

    def nonzero_entries(self) -> list[tuple[int, int, Fraction]]:
        return sorted(
            (i, j, to_fraction(v)) for i, row in self._dm.rep.items() for j, v in row.items() if v
        )

    def to_rows(self) -> list[list[Fraction]]:
        out = [[Fraction(0)] * self.cols for _ in range(self.rows)]
        for i, j, v in self.nonzero_entries():
            out[i][j] = v
        return out

    def column(self, j: int) -> list[Fraction]:
        return [self[i, j] for i in range(self.rows)]

    def columns(self) -> list[list[Fraction]]:
        t = self.T.to_rows()
        return t

    def select_columns(self, idx: Sequence[int]) -> "QMatrix":
        if not idx:
            return QMatrix.zeros(self.rows, 0)
        return QMatrix(self._dm.extract(list(range(self.rows)), list(idx)))

    def select_rows(self, idx: Sequence[int]) -> "QMatrix":
        if not idx:
            return QMatrix.zeros(0, self.cols)
        return QMatrix(self._dm.extract(list(idx), list(range(self.cols))))

    def is_zero(self) -> bool:
        return not any(v for row in self._dm.rep.values() for v in row.values())

    def rank(self) -> int:
        if not self.rows or not self.cols:
            return 0
        return len(rref(self)[1])

    # arithmetic ---------------------------------------------------------

    @property
    def T(self) -> "QMatrix":
        return QMatrix(self._dm.transpose())

    def __matmul__(self, other: "QMatrix") -> "QMatrix":
        if self.cols != other.rows:
            raise ShapeError(f"cannot compose {self.shape} with {other.shape}")
        if not self.cols:
            return QMatrix.zeros(self.rows, other.cols)
        return QMatrix(self._dm * other._dm)

    def __add__(self, other: "QMatrix") -> "QMatrix":
        if self.shape != other.shape:
            raise ShapeError(f"cannot add {self.shape} and {other.shape}")
        return QMatrix(self._dm + other._dm)

    def __sub__(self, other: "QMatrix") -> "QMatrix":
        if self.shape != other.shape:
            raise ShapeError(f"cannot subtract {self.shape} and {other.shape}")
        return QMatrix(self._dm - other._dm)

    def __neg__(self) -> "QMatrix":
        return QMatrix(-self._dm)

    def scale(self, c) -> "QMatrix":
        return QMatrix(self._dm * _qq(c))

    def __eq__(self, other) -> bool:
        if not isinstance(other, QMatrix):
            return NotImplemented
        return self.shape == other.shape and (self - other).is_zero()

    def __hash__(self) -> int:
        return hash((self.shape, tuple(self.nonzero_entries())))

    def __repr__(self) -> str:
        return f"QMatrix({[[str(v) for v in r] for r in self.to_rows()]})"


def rref(M: QMatrix) -> tuple[QMatrix, tuple[int, ...]]:
    """Reduced row echelon form and pivot columns."""
    if not M.rows or not M.cols:
        return M, ()
    R, pivots = M.dm.rref()
    return QMatrix(R), tuple(pivots)


@dataclass(frozen=True)
class Subspace:
    """Span of linearly independent columns in QQ^ambient_dim."""

    ambient_dim: int
    basis: QMatrix

    def __post_init__(self):
        if self.basis.rows != self.ambient_dim:
            raise ShapeError("basis vectors must have length ambient_dim")

    @property
    def dim(self) -> int:
        return self.basis.cols

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n, QMatrix.zeros(n, 0))

    @classmethod
    def whole(cls, n: int) -> "Subspace":
        return cls(n, QMatrix.identity(n))

    @classmethod
    def span(cls, vectors: QMatrix) -> "Subspace":
        """Subspace spanned by the columns of ``vectors`` (dependent ones dropped)."""
        return image_basis(vectors)

    def contains(self, vectors: QMatrix) -> bool:
        if not vectors.cols:
            return True
        if not self.dim:
            return vectors.is_zero()
        return QMatrix.hstack(self.basis, vectors).rank() == self.dim

    def __le__(self, other: "Subspace") -> bool:
        return other.contains(self.basis)

    def equals(self, other: "Subspace") -> bool:
        return self.dim == other.dim and self <= other


def kernel_basis(M: QMatrix) -> Subspace:
    """Basis of ``{v : Mv = 0}``, one vector per free column of the echelon form."""
    n = M.cols
    R, pivots = rref(M)
    pivset = set(pivots)
    vectors = []
    rep = R.dm.rep
    for f in range(n):
        if f in pivset:
            continue
        entries = [(f, 0, 1)]
        for i, p in enumerate(pivots):
            v = rep.get(i, {}).get(f)
            if v:
                entries.append((p, 0, -v))
        vectors.append(QMatrix.from_sparse((n, 1), entries))
    return Subspace(n, QMatrix.hstack(*vectors, nrows=n))


def image_basis(M: QMatrix) -> Subspace:
    """Column space of ``M``, basis taken from its pivot columns."""
    _, pivots = rref(M)
    return Subspace(M.rows, M.select_columns(pivots))


def solve(M: QMatrix, rhs: QMatrix) -> QMatrix:
    """A particular solution ``X`` of ``M X = rhs`` (free variables set to 0)."""
    if M.rows != rhs.rows:
        raise ShapeError(f"system {M.shape} incompatible with right-hand side {rhs.shape}")
    n = M.cols
    if not rhs.cols:
        return QMatrix.zeros(n, 0)
    if not n or not M.rows:
        if not rhs.is_zero():
            raise InconsistentSystemError("right-hand side not in the column space")
        return QMatrix.zeros(n, rhs.cols)
    R, pivots = rref(QMatrix.hstack(M, rhs))
    if pivots and pivots[-1] >= n:
        raise InconsistentSystemError("right-hand side not in the column space")
    rep = R.dm.rep
    entries = []
    for i, p in enumerate(pivots):
        for j, v in rep.get(i, {}).items():
            if j >= n and v:
                entries.append((p, j - n, v))
    return QMatrix.from_sparse((n, rhs.cols), entries)


def coordinates(S: Subspace, vectors: QMatrix) -> QMatrix:
    """Coordinates of ``vectors`` in the basis of ``S``; raises if not contained."""
    return solve(S.basis, vectors)


def sum_spaces(*spaces: Subspace) -> Subspace:
    n = spaces[0].ambient_dim
    return image_basis(QMatrix.hstack(*[s.basis for s in spaces], nrows=n))


def intersect(U: Subspace, V: Subspace) -> Subspace:
    n = U.ambient_dim
    if not U.dim or not V.dim:
        return Subspace.zero(n)
    K = kernel_basis(QMatrix.hstack(U.basis, -V.basis))
    top = K.basis.select_rows(list(range(U.dim)))
    return image_basis(U.basis @ top)


def annihilator(S: Subspace) -> QMatrix:
    """Matrix whose kernel is exactly ``S``."""
    if not S.dim:
        return QMatrix.identity(S.ambient_dim)
    return kernel_basis(S.basis.T).basis.T


def preimage(M: QMatrix, target: Subspace, within: Subspace | None = None) -> Subspace:
    """``{x in within : M x in target}`` (``within`` defaults to the whole domain)."""
    P = annihilator(target) @ M
    if within is None:
        return kernel_basis(P)
    if not within.dim:
        return within
    K = kernel_basis(P @ within.basis)
    return image_basis(within.basis @ K.basis)


def apply(M: QMatrix, S: Subspace) -> Subspace:
    return image_basis(M @ S.basis)


class Subquotient:
    """The quotient ``numerator / denominator`` of nested subspaces.

    Representatives are the numerator basis vectors that become pivots after the
    denominator basis when the two are stacked side by side.
    """

    def __init__(self, numerator: Subspace, denominator: Subspace):
        if not denominator <= numerator:
            raise DescentError("denominator is not contained in numerator")
        self.numerator = numerator
        self.denominator = denominator
        stacked = QMatrix.hstack(denominator.basis, numerator.basis, nrows=numerator.ambient_dim)
        _, pivots = rref(stacked)
        k = denominator.dim
        reps = [p - k for p in pivots if p >= k]
        self.representatives = numerator.basis.select_columns(reps)
        self._frame = QMatrix.hstack(denominator.basis, self.representatives, nrows=numerator.ambient_dim)

    @property
    def dim(self) -> int:
        return self.representatives.cols

    @property
    def ambient_dim(self) -> int:
        return self.numerator.ambient_dim

    def coordinates(self, vectors: QMatrix) -> QMatrix:
        """Quotient coordinates of vectors lying in the numerator."""
        try:
            X = solve(self._frame, vectors)
        except InconsistentSystemError:
            raise DescentError("vector does not lie in the numerator subspace") from None
        return X.select_rows(list(range(self.denominator.dim, X.rows)))


def induced_map(
    M: QMatrix,
    dom_cycles: Subspace,
    dom_boundaries: Subspace,
    cod_cycles: Subspace,
    cod_boundaries: Subspace,
) -> QMatrix:
    """Matrix of the map induced by ``M`` between the two subquotients."""
    if M.shape != (cod_cycles.ambient_dim, dom_cycles.ambient_dim):
        raise ShapeError("map shape does not match the ambient spaces")
    if not cod_cycles.contains(M @ dom_cycles.basis):
        raise DescentError("map does not descend: cycles are not sent to cycles")
    if not cod_boundaries.contains(M @ dom_boundaries.basis):
        raise DescentError("map does not descend: boundaries are not sent to boundaries")
    dom = Subquotient(dom_cycles, dom_boundaries)
    cod = Subquotient(cod_cycles, cod_boundaries)
    return cod.coordinates(M @ dom.representatives)


# integer side ----------------------------------------------------------


def _to_zz(M: QMatrix) -> DomainMatrix:
    for _, _, v in M.nonzero_entries():
        if v.denominator != 1:
            raise ValueError("matrix has non-integer entries")
    return M.dm.convert_to(ZZ).to_dense()


def _from_zz(dm: DomainMatrix) -> QMatrix:
    return QMatrix(dm.convert_to(QQ))


def smith_normal_form(M: QMatrix) -> tuple[QMatrix, QMatrix, QMatrix]:
    """``(U, D, V)`` with ``D = U M V`` diagonal, ``d_i | d_{i+1}``, ``d_i >= 0``, U and V unimodular."""
    r, c = M.shape
    if M.is_zero() or not r or not c:
        return QMatrix.identity(r), QMatrix.zeros(r, c), QMatrix.identity(c)
    D, U, V = smith_normal_decomp(_to_zz(M))
    U, D, V = _from_zz(U), _from_zz(D), _from_zz(V)
    flips = [i for i in range(min(r, c)) if D[i, i] < 0]
    if flips:
        S = QMatrix.from_sparse((r, r), [(i, i, -1 if i in flips else 1) for i in range(r)])
        U, D = S @ U, S @ D
    return U, D, V


def integer_kernel(M: QMatrix) -> QMatrix:
    """Columns form a basis of the lattice ``{g in Z^cols : M g = 0}``."""
    r, c = M.shape
    if not r or M.is_zero():
        return QMatrix.identity(c)
    scaled = []
    for row in M.to_rows():
        m = lcm(*(v.denominator for v in row))
        scaled.append([v * m for v in row])
    Mi = QMatrix.from_rows(scaled, c)
    _, D, V = smith_normal_form(Mi)
    rank = sum(1 for i in range(min(r, c)) if D[i, i] != 0)
    return V.select_columns(list(range(rank, c)))


def determinant(M: QMatrix) -> Fraction:
    if M.rows != M.cols:
        raise ShapeError("determinant of a non-square matrix")
    if not M.rows:
        return Fraction(1)
    return to_fraction(M.dm.to_dense().det())
