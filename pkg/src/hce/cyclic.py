"""Hochschild, cyclic and periodic cyclic cohomology of finite-dimensional algebras.

A degree-n cochain is a functional on ``A^{⊗(n+1)}``; it is stored as an
``(n+1)``-dimensional numpy object array of Fractions indexed by basis tuples.
Every operator is also available as an exact sparse matrix on the flattened
(row-major) coordinates, which is what the cohomology computations use.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .complexes import Bicomplex, FilteredComplex, InvariantError, limit_term
from .exactla import (
    QMatrix,
    ShapeError,
    Subquotient,
    Subspace,
    image_basis,
    induced_map,
    intersect,
    kernel_basis,
    to_fraction,
)


class MissingUnitError(ValueError):
    """The operation needs a unital algebra."""


class DegreeCapError(ValueError):
    """Requested degree exceeds the configured cap for this algebra size."""


def default_degree_cap(dim: int) -> int:
    """Largest cohomological degree computed by default (cochain spaces grow like dim^(n+1))."""
    if dim <= 1:
        return 16
    if dim <= 2:
        return 4
    if dim <= 4:
        return 3
    return 2


@dataclass(frozen=True)
class FDAlgebra:
    """Associative algebra over QQ given by structure constants.

    ``products`` holds the nonzero ``(i, j, k, c)`` with ``e_i e_j = sum_k c e_k``.
    """

    dim: int
    products: tuple[tuple[int, int, int, Fraction], ...]
    unit: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        merged: dict[tuple[int, int, int], Fraction] = {}
        for i, j, k, c in self.products:
            for idx in (i, j, k):
                if not 0 <= idx < self.dim:
                    raise ShapeError(f"structure index {idx} outside 0..{self.dim - 1}")
            merged[(i, j, k)] = merged.get((i, j, k), Fraction(0)) + to_fraction(c)
        products = tuple(sorted((i, j, k, c) for (i, j, k), c in merged.items() if c))
        object.__setattr__(self, "products", products)
        if self.unit is not None:
            unit = tuple(to_fraction(u) for u in self.unit)
            if len(unit) != self.dim:
                raise ShapeError("unit vector has the wrong length")
            object.__setattr__(self, "unit", unit)
        self._validate()

    @classmethod
    def from_structure(cls, dim: int, entries: Iterable[Sequence], unit=None) -> "FDAlgebra":
        return cls(dim, tuple((int(i), int(j), int(k), to_fraction(c)) for i, j, k, c in entries), unit)

    @cached_property
    def table(self) -> dict[tuple[int, int], tuple[tuple[int, Fraction], ...]]:
        out: dict[tuple[int, int], list] = {}
        for i, j, k, c in self.products:
            out.setdefault((i, j), []).append((k, c))
        return {key: tuple(v) for key, v in out.items()}

    @property
    def structure(self) -> np.ndarray:
        c = np.full((self.dim,) * 3, Fraction(0), dtype=object)
        for i, j, k, v in self.products:
            c[i, j, k] = v
        return c

    def multiply(self, x: Sequence, y: Sequence) -> list[Fraction]:
        out = [Fraction(0)] * self.dim
        for (i, j), terms in self.table.items():
            xy = to_fraction(x[i]) * to_fraction(y[j])
            if xy:
                for k, c in terms:
                    out[k] += xy * c
        return out

    def basis_vector(self, i: int) -> list[Fraction]:
        return [Fraction(int(k == i)) for k in range(self.dim)]

    def _validate(self):
        for i, j, k in itertools.product(range(self.dim), repeat=3):
            ei, ej, ek = self.basis_vector(i), self.basis_vector(j), self.basis_vector(k)
            if self.multiply(self.multiply(ei, ej), ek) != self.multiply(ei, self.multiply(ej, ek)):
                raise InvariantError(f"associativity fails on basis triple {(i, j, k)}")
        if self.unit is not None:
            for i in range(self.dim):
                ei = self.basis_vector(i)
                if self.multiply(self.unit, ei) != ei or self.multiply(ei, self.unit) != ei:
                    raise InvariantError(f"declared unit does not act as identity on e_{i}")

    @property
    def is_unital(self) -> bool:
        return self.unit is not None

    @property
    def is_commutative(self) -> bool:
        return all(self.table.get((i, j)) == self.table.get((j, i)) for i in range(self.dim) for j in range(self.dim))


def complex_numbers() -> FDAlgebra:
    """The ground field as a one-dimensional algebra."""
    return FDAlgebra.from_structure(1, [(0, 0, 0, 1)], unit=[1])


def diagonal_algebra(k: int) -> FDAlgebra:
    """Functions on k points (idempotent basis)."""
    return FDAlgebra.from_structure(k, [(i, i, i, 1) for i in range(k)], unit=[1] * k)


def matrix_algebra(k: int) -> FDAlgebra:
    """``M_k`` with matrix units ``e_{ab}`` at index ``a * k + b``."""
    entries = []
    for a, b, c in itertools.product(range(k), repeat=3):
        entries.append((a * k + b, b * k + c, a * k + c, 1))
    unit = [int(a == b) for a in range(k) for b in range(k)]
    return FDAlgebra.from_structure(k * k, entries, unit=unit)


def dual_numbers(unital: bool = True) -> FDAlgebra:
    """``Q[eps]/(eps^2)`` on the basis ``(1, eps)``; ``unital=False`` forgets the unit."""
    entries = [(0, 0, 0, 1), (0, 1, 1, 1), (1, 0, 1, 1)]
    return FDAlgebra.from_structure(2, entries, unit=[1, 0] if unital else None)


BUILTIN_ALGEBRAS = {
    "C": complex_numbers,
    "C2": lambda: diagonal_algebra(2),
    "M2": lambda: matrix_algebra(2),
    "dual": dual_numbers,
}


def adjoin_unit(A: FDAlgebra) -> FDAlgebra:
    """``A+ = A ⊕ Q·I`` with the new unit as the last basis vector, whether or not A has one."""
    d = A.dim
    entries = [(i, j, k, c) for i, j, k, c in A.products]
    entries.append((d, d, d, Fraction(1)))
    for i in range(d):
        entries.append((d, i, i, Fraction(1)))
        entries.append((i, d, i, Fraction(1)))
    return FDAlgebra(d + 1, tuple(entries), tuple([Fraction(0)] * d + [Fraction(1)]))


def _require_unit(A: FDAlgebra):
    if A.unit is None:
        raise MissingUnitError("operation needs a unital algebra; apply adjoin_unit first")


# cochains ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Cochain:
    degree: int
    values: np.ndarray

    def __post_init__(self):
        if self.degree < 0:
            raise ShapeError("cochain degree must be non-negative")
        if self.values.ndim != self.degree + 1 or len(set(self.values.shape)) > 1:
            raise ShapeError(f"degree-{self.degree} cochain needs a cubical tensor of rank {self.degree + 1}")

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @classmethod
    def zero(cls, dim: int, degree: int) -> "Cochain":
        return cls(degree, np.full((dim,) * (degree + 1), Fraction(0), dtype=object))

    @classmethod
    def from_vector(cls, dim: int, degree: int, vector: QMatrix | Sequence) -> "Cochain":
        if isinstance(vector, QMatrix):
            vector = vector.column(0)
        flat = np.array([to_fraction(v) for v in vector], dtype=object)
        if flat.size != dim ** (degree + 1):
            raise ShapeError("vector length does not match dim^(degree+1)")
        return cls(degree, flat.reshape((dim,) * (degree + 1)))

    @classmethod
    def dual_basis(cls, dim: int, index: Sequence[int]) -> "Cochain":
        phi = cls.zero(dim, len(index) - 1)
        phi.values[tuple(index)] = Fraction(1)
        return phi

    def vector(self) -> QMatrix:
        flat = self.values.reshape(-1)
        return QMatrix.from_sparse((flat.size, 1), [(i, 0, v) for i, v in enumerate(flat) if v])

    def __call__(self, *index: int) -> Fraction:
        return self.values[index]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Cochain):
            return NotImplemented
        return self.degree == other.degree and self.values.shape == other.values.shape and bool(
            np.all(self.values == other.values)
        )

    def __add__(self, other: "Cochain") -> "Cochain":
        return Cochain(self.degree, self.values + other.values)

    def __neg__(self) -> "Cochain":
        return Cochain(self.degree, -self.values)

    def __sub__(self, other: "Cochain") -> "Cochain":
        return self + (-other)

    def scale(self, c) -> "Cochain":
        return Cochain(self.degree, self.values * to_fraction(c))

    def is_zero(self) -> bool:
        return not any(v for v in self.values.reshape(-1))


def _index(t: Sequence[int], d: int) -> int:
    out = 0
    for x in t:
        out = out * d + x
    return out


def _tuples(d: int, length: int):
    return itertools.product(range(d), repeat=length)


@lru_cache(maxsize=None)
def hochschild_matrix(A: FDAlgebra, n: int) -> QMatrix:
    """The Hochschild differential ``b : C^n -> C^{n+1}``."""
    d = A.dim
    table = A.table
    entries = []
    for J in _tuples(d, n + 2):
        row = _index(J, d)
        for i in range(n + 1):
            for k, c in table.get((J[i], J[i + 1]), ()):
                col = _index(J[:i] + (k,) + J[i + 2 :], d)
                entries.append((row, col, c if i % 2 == 0 else -c))
        sign = 1 if (n + 1) % 2 == 0 else -1
        for k, c in table.get((J[n + 1], J[0]), ()):
            entries.append((row, _index((k,) + J[1 : n + 1], d), sign * c))
    return QMatrix.from_sparse((d ** (n + 2), d ** (n + 1)), entries)


@lru_cache(maxsize=None)
def antisymmetrizer_matrix(d: int, n: int) -> QMatrix:
    """``A phi = sum_j (-1)^(nj) phi(a_j, ..., a_n, a_0, ..., a_{j-1})`` on ``C^n``."""
    entries = []
    for J in _tuples(d, n + 1):
        row = _index(J, d)
        for j in range(n + 1):
            entries.append((row, _index(J[j:] + J[:j], d), -1 if (n * j) % 2 else 1))
    return QMatrix.from_sparse((d ** (n + 1), d ** (n + 1)), entries)


@lru_cache(maxsize=None)
def b0_matrix(A: FDAlgebra, n: int) -> QMatrix:
    """``B_0 : C^{n+1} -> C^n``, ``phi(I, a_0..a_n) - (-1)^(n+1) phi(a_0..a_n, I)``."""
    _require_unit(A)
    d = A.dim
    unit = [(k, u) for k, u in enumerate(A.unit) if u]
    second = -1 if (n + 1) % 2 == 0 else 1
    entries = []
    for J in _tuples(d, n + 1):
        row = _index(J, d)
        for k, u in unit:
            entries.append((row, _index((k,) + J, d), u))
            entries.append((row, _index(J + (k,), d), second * u))
    return QMatrix.from_sparse((d ** (n + 1), d ** (n + 2)), entries)


@lru_cache(maxsize=None)
def connes_B_matrix(A: FDAlgebra, n: int) -> QMatrix:
    """``B = A ∘ B_0 : C^{n+1} -> C^n``."""
    return antisymmetrizer_matrix(A.dim, n) @ b0_matrix(A, n)


@lru_cache(maxsize=None)
def cyclic_basis(d: int, n: int) -> QMatrix:
    """Columns spanning the cyclic cochains ``C_λ^n``, one per surviving rotation orbit."""
    Amat = antisymmetrizer_matrix(d, n)
    cols = []
    for t in _tuples(d, n + 1):
        if min(t[j:] + t[:j] for j in range(n + 1)) == t:
            cols.append(_index(t, d))
    M = Amat.select_columns(cols)
    keep = sorted({j for _, j, _ in M.nonzero_entries()})
    return M.select_columns(keep)


def _apply(M: QMatrix, phi: Cochain, dim: int, degree: int) -> Cochain:
    return Cochain.from_vector(dim, degree, M @ phi.vector())


def hochschild_b(A: FDAlgebra, phi: Cochain) -> Cochain:
    if phi.dim != A.dim:
        raise ShapeError("cochain and algebra dimensions differ")
    return _apply(hochschild_matrix(A, phi.degree), phi, A.dim, phi.degree + 1)


def antisymmetrize(phi: Cochain) -> Cochain:
    return _apply(antisymmetrizer_matrix(phi.dim, phi.degree), phi, phi.dim, phi.degree)


def project_cyclic(phi: Cochain) -> Cochain:
    """``(1/(n+1)) A phi``, the idempotent projection onto cyclic cochains."""
    return antisymmetrize(phi).scale(Fraction(1, phi.degree + 1))


def is_cyclic(phi: Cochain) -> bool:
    """``phi(a_n, a_0, ..., a_{n-1}) = (-1)^n phi(a_0, ..., a_n)`` on all basis tuples."""
    n = phi.degree
    if n == 0:
        return True
    sign = -1 if n % 2 else 1
    # moveaxis(values, 0, -1)[a_0..a_n] == values[a_n, a_0..a_{n-1}]
    return bool(np.all(np.moveaxis(phi.values, 0, -1) == sign * phi.values))


def connes_B0(A: FDAlgebra, phi: Cochain) -> Cochain:
    if phi.degree < 1:
        raise ShapeError("B_0 needs a cochain of degree at least 1")
    return _apply(b0_matrix(A, phi.degree - 1), phi, A.dim, phi.degree - 1)


def connes_B(A: FDAlgebra, phi: Cochain) -> Cochain:
    if phi.degree < 1:
        raise ShapeError("B needs a cochain of degree at least 1")
    return _apply(connes_B_matrix(A, phi.degree - 1), phi, A.dim, phi.degree - 1)


# cohomology -------------------------------------------------------------


class Cohomology(NamedTuple):
    dim: int
    representatives: list[Cochain]


def _check_cap(A: FDAlgebra, n: int, cap: int | None):
    cap = default_degree_cap(A.dim) if cap is None else cap
    if n > cap:
        raise DegreeCapError(f"degree {n} exceeds the cap {cap} for a {A.dim}-dimensional algebra")


def _b(A: FDAlgebra, n: int) -> QMatrix:
    d = A.dim
    if n < 0:
        return QMatrix.zeros(d, 0)
    return hochschild_matrix(A, n)


def hochschild_subquotient(A: FDAlgebra, n: int) -> Subquotient:
    return Subquotient(kernel_basis(_b(A, n)), image_basis(_b(A, n - 1)))


def cyclic_subquotient(A: FDAlgebra, n: int) -> Subquotient:
    """``HC^n`` realised inside ``C^n``: cyclic cocycles modulo ``b C_λ^{n-1}``."""
    d = A.dim
    Lam = cyclic_basis(d, n)
    Z = image_basis(Lam @ kernel_basis(_b(A, n) @ Lam).basis)
    if n == 0:
        Bd = Subspace.zero(d)
    else:
        Bd = image_basis(_b(A, n - 1) @ cyclic_basis(d, n - 1))
    return Subquotient(Z, Bd)


def _as_cohomology(A: FDAlgebra, n: int, H: Subquotient) -> Cohomology:
    reps = [Cochain.from_vector(A.dim, n, H.representatives.select_columns([j])) for j in range(H.dim)]
    return Cohomology(H.dim, reps)


def hochschild_cohomology(A: FDAlgebra, n: int, degree_cap: int | None = None) -> Cohomology:
    """``H^n(A, A*)``: cohomology of ``(C^*(A), b)`` with representative cocycles."""
    if n < 0:
        return Cohomology(0, [])
    _check_cap(A, n, degree_cap)
    return _as_cohomology(A, n, hochschild_subquotient(A, n))


def cyclic_cohomology(A: FDAlgebra, n: int, degree_cap: int | None = None) -> Cohomology:
    """``HC^n(A)``: cohomology of the cyclic subcomplex ``(C_λ^*, b)``."""
    if n < 0:
        return Cohomology(0, [])
    _check_cap(A, n, degree_cap)
    return _as_cohomology(A, n, cyclic_subquotient(A, n))


def trace_space_dim(A: FDAlgebra) -> int:
    """Dimension of the functionals vanishing on all commutators of basis elements."""
    d = A.dim
    rows = []
    for i, j in itertools.product(range(d), repeat=2):
        row = [Fraction(0)] * d
        for k, c in A.table.get((i, j), ()):
            row[k] += c
        for k, c in A.table.get((j, i), ()):
            row[k] -= c
        rows.append(row)
    return kernel_basis(QMatrix.from_rows(rows, d)).dim


@dataclass(frozen=True)
class SBIReport:
    degree: int
    hochschild_dim: int
    image_I_dim: int
    kernel_B_dim: int
    exact: bool

    def __bool__(self) -> bool:
        return self.exact


def sbi_check(A: FDAlgebra, n: int, degree_cap: int | None = None) -> SBIReport:
    """Exactness ``Im(I: HC^n -> H^n) = Ker(B: H^n -> HC^{n-1})`` inside ``H^n``."""
    _require_unit(A)
    _check_cap(A, n, degree_cap)
    size = A.dim ** (n + 1)
    H = hochschild_subquotient(A, n)
    HC = cyclic_subquotient(A, n)
    I_ind = induced_map(QMatrix.identity(size), HC.numerator, HC.denominator, H.numerator, H.denominator)
    if n == 0:
        B_ind = QMatrix.zeros(0, H.dim)
    else:
        HCm = cyclic_subquotient(A, n - 1)
        B_ind = induced_map(
            connes_B_matrix(A, n - 1), H.numerator, H.denominator, HCm.numerator, HCm.denominator
        )
    im_I = image_basis(I_ind)
    ker_B = kernel_basis(B_ind)
    exact = im_I.dim == ker_B.dim and im_I <= ker_B
    return SBIReport(n, H.dim, im_I.dim, ker_B.dim, exact)


# (b, B)-bicomplex, periodic cohomology, limit terms ---------------------


def build_bB_bicomplex(A: FDAlgebra, window: tuple[int, int]) -> Bicomplex:
    """``C^{m,n} = C^{m-n}(A)`` for ``m >= n``; ``D1 = (p+1) b`` and ``D2 = B / p`` on ``C^p``.

    Here ``p = m - n`` is the Hochschild degree; ``D2`` vanishes on the diagonal.
    """
    _require_unit(A)
    m_max, n_max = window
    if m_max < 0 or n_max < 0:
        raise ValueError("window bounds must be non-negative")
    d = A.dim
    dims, d1, d2 = {}, {}, {}
    for m in range(m_max + 1):
        for n in range(n_max + 1):
            p = m - n
            dims[(m, n)] = d ** (p + 1) if p >= 0 else 0
    for m in range(m_max + 1):
        for n in range(n_max + 1):
            p = m - n
            src = dims[(m, n)]
            if m + 1 <= m_max:
                tgt = dims[(m + 1, n)]
                d1[(m, n)] = hochschild_matrix(A, p).scale(p + 1) if p >= 0 else QMatrix.zeros(tgt, src)
            if n + 1 <= n_max:
                tgt = dims[(m, n + 1)]
                if p >= 1:
                    d2[(m, n)] = connes_B_matrix(A, p - 1).scale(Fraction(1, p))
                else:
                    d2[(m, n)] = QMatrix.zeros(tgt, src)
    return Bicomplex((m_max, n_max), dims, d1, d2)


@lru_cache(maxsize=None)
def _window_total(A: FDAlgebra, window: int) -> FilteredComplex:
    return build_bB_bicomplex(A, (window, window)).totalize("n")


def _top_degree(parity: int, window: int) -> int:
    N = window - 1
    return N if N % 2 == parity % 2 else N - 1


def _unitized(A: FDAlgebra) -> FDAlgebra:
    return A if A.is_unital else adjoin_unit(A)


def _filtered_cohomology_dim(F: FilteredComplex, N: int, p: int) -> int:
    """``dim F^p H^N``: cocycles in ``F^p`` modulo coboundaries in ``F^p``."""
    Z = kernel_basis(F.total.d(N))
    im = image_basis(F.total.d(N - 1)) if N > 0 else Subspace.zero(F.total.dim(N))
    Fp = F.F(N, p)
    return intersect(Z, Fp).dim - intersect(im, Fp).dim


@dataclass(frozen=True)
class PeriodicReport:
    """``dim S(HC^{N-2}) ⊂ HC^N`` at the top degree N of the parity, for two windows."""

    parity: int
    dim: int
    window: int
    total_degree: int
    next_window_dim: int
    stable: bool


def _periodic_at(A: FDAlgebra, parity: int, window: int) -> tuple[int, int]:
    N = _top_degree(parity, window)
    if N < 2:
        return 0, N
    return _filtered_cohomology_dim(_window_total(A, window), N, 1), N


def periodic_cohomology(A: FDAlgebra, parity: int, window: int) -> PeriodicReport:
    """Periodic cyclic cohomology ``HP^parity`` from the truncated (b, B) total complex.

    The value is the part of ``HC^N`` (N the largest degree of this parity whose
    neighbours fit in the window) reached by the periodicity map from ``HC^{N-2}``.
    It is flagged stable when windows ``w`` and ``w + 1`` agree and both have room
    for at least one periodicity step.
    """
    if window < 2:
        raise ValueError("window must be at least 2")
    A = _unitized(A)
    value, N = _periodic_at(A, parity, window)
    nxt, N2 = _periodic_at(A, parity, window + 1)
    stable = value == nxt and N >= 2 and N2 >= 2
    return PeriodicReport(parity % 2, value, window, N, nxt, stable)


@dataclass(frozen=True)
class EinfEstimate:
    degree: int
    dim: int | None
    window: int
    total_degree: int
    filtration: int
    determined: bool
    stable: bool


def _einf_at(A: FDAlgebra, n: int, window: int) -> tuple[int | None, int, int, bool]:
    N = _top_degree(n, window)
    p = (N - n) // 2
    if N < n or n < 0:
        return None, N, p, False
    F = _window_total(A, window)
    return limit_term(F, p, N), N, p, p >= 1


def algebra_einf(A: FDAlgebra, n: int, window: int) -> EinfEstimate:
    """Limit term ``S(HC^n) / S(HC^{n-2})`` read off inside ``HC^N`` at the top degree N.

    Determined when the periodicity map has been applied at least once
    (``N >= n + 2``); stable when windows ``w`` and ``w + 1`` agree.
    """
    A = _unitized(A)
    dim, N, p, determined = _einf_at(A, n, window)
    nxt, _, _, det2 = _einf_at(A, n, window + 1)
    return EinfEstimate(n, dim, window, N, p, determined, determined and det2 and dim == nxt)
