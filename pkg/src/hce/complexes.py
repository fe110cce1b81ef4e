"""Finite chain complexes, equivariant complexes and spectral sequences."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .exactla import (
    QMatrix,
    ShapeError,
    Subquotient,
    Subspace,
    apply,
    image_basis,
    induced_map,
    intersect,
    kernel_basis,
    preimage,
    solve,
    sum_spaces,
)


class InvariantError(ValueError):
    """A structural invariant (boundary squared, equivariance, ...) fails."""


@dataclass(frozen=True)
class Verdict:
    ok: bool
    degree: int | None = None
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class ChainComplex:
    """Homologically graded complex; ``boundary[n]`` maps degree n to degree n-1.

    Degrees are non-negative with finite support; missing boundaries are zero.
    """

    dims: Mapping[int, int]
    boundary: Mapping[int, QMatrix] = field(default_factory=dict)

    def __post_init__(self):
        dims = {int(n): int(d) for n, d in self.dims.items() if d}
        if any(n < 0 for n in dims):
            raise ShapeError("degrees must be non-negative")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "boundary", {int(n): m for n, m in self.boundary.items()})

    def dim(self, n: int) -> int:
        return self.dims.get(n, 0)

    @property
    def top(self) -> int:
        return max(self.dims, default=-1)

    def degrees(self) -> range:
        return range(0, self.top + 1)

    def d(self, n: int) -> QMatrix:
        """The boundary ``C_n -> C_{n-1}`` (zero outside the stored data)."""
        m = self.boundary.get(n)
        if m is None:
            return QMatrix.zeros(self.dim(n - 1), self.dim(n))
        return m

    def euler_characteristic(self) -> int:
        return sum((-1) ** n * d for n, d in self.dims.items())


@dataclass(frozen=True)
class ChainMap:
    """Per-degree matrices ``f_n : C_n -> D_n``; missing degrees are zero."""

    components: Mapping[int, QMatrix]

    def at(self, n: int, rows: int, cols: int) -> QMatrix:
        m = self.components.get(n)
        return QMatrix.zeros(rows, cols) if m is None else m

    @classmethod
    def identity(cls, C: ChainComplex) -> "ChainMap":
        return cls({n: QMatrix.identity(d) for n, d in C.dims.items()})


@dataclass(frozen=True)
class EquivariantComplex:
    complex: ChainComplex
    alpha: ChainMap

    def alpha_at(self, n: int) -> QMatrix:
        d = self.complex.dim(n)
        return self.alpha.at(n, d, d)

    def one_minus_alpha(self, n: int) -> QMatrix:
        return QMatrix.identity(self.complex.dim(n)) - self.alpha_at(n)


def _check_shapes(C: ChainComplex):
    for n, m in C.boundary.items():
        if m.shape != (C.dim(n - 1), C.dim(n)):
            raise ShapeError(
                f"boundary at degree {n} has shape {m.shape}, expected {(C.dim(n - 1), C.dim(n))}"
            )


def validate_complex(C: ChainComplex | EquivariantComplex) -> Verdict:
    """Check boundary squared and (for equivariant input) alpha-equivariance.

    Shape problems raise :class:`ShapeError`; invariant failures are reported in
    the returned verdict with the first failing degree.
    """
    E = C if isinstance(C, EquivariantComplex) else None
    C = E.complex if E else C
    _check_shapes(C)
    if E is not None:
        for n, m in E.alpha.components.items():
            if m.shape != (C.dim(n), C.dim(n)):
                raise ShapeError(f"alpha at degree {n} has shape {m.shape}, expected square of {C.dim(n)}")
    for n in range(2, C.top + 1):
        if not (C.d(n - 1) @ C.d(n)).is_zero():
            return Verdict(False, n, f"boundary squared nonzero at degree {n}")
    if E is not None:
        for n in range(1, C.top + 1):
            if C.d(n) @ E.alpha_at(n) != E.alpha_at(n - 1) @ C.d(n):
                return Verdict(False, n, f"alpha does not commute with the boundary at degree {n}")
    return Verdict(True, None, "valid")


def cycles(C: ChainComplex, n: int) -> Subspace:
    return kernel_basis(C.d(n))


def boundaries(C: ChainComplex, n: int) -> Subspace:
    return image_basis(C.d(n + 1))


def homology_subquotient(C: ChainComplex, n: int) -> Subquotient:
    return Subquotient(cycles(C, n), boundaries(C, n))


def homology(C: ChainComplex, n: int) -> tuple[int, QMatrix]:
    """``(dim H_n, representative cycles as columns)``; zero outside the support."""
    if n < 0 or n > C.top:
        return 0, QMatrix.zeros(C.dim(n) if n >= 0 else 0, 0)
    H = homology_subquotient(C, n)
    return H.dim, H.representatives


def betti_numbers(C: ChainComplex) -> dict[int, int]:
    return {n: homology(C, n)[0] for n in C.degrees()}


def ker_subcomplex_with_basis(E: EquivariantComplex) -> tuple[ChainComplex, dict[int, QMatrix]]:
    C = E.complex
    bases = {n: kernel_basis(E.one_minus_alpha(n)).basis for n in C.degrees()}
    dims = {n: b.cols for n, b in bases.items()}
    bd = {}
    for n in range(1, C.top + 1):
        image = C.d(n) @ bases[n]
        # alpha commutes with the boundary, so the image lies in the kernel of 1 - alpha
        bd[n] = _coords_in(bases[n - 1], image)
    return ChainComplex(dims, bd), bases


def _coords_in(basis: QMatrix, vectors: QMatrix) -> QMatrix:
    if not basis.cols:
        return QMatrix.zeros(0, vectors.cols)
    return solve(basis, vectors)


def ker_subcomplex(E: EquivariantComplex) -> ChainComplex:
    """Degreewise kernel of ``1 - alpha`` with the restricted boundary."""
    return ker_subcomplex_with_basis(E)[0]


def coker_complex_with_basis(E: EquivariantComplex) -> tuple[ChainComplex, dict[int, Subquotient]]:
    C = E.complex
    quotients = {
        n: Subquotient(Subspace.whole(C.dim(n)), image_basis(E.one_minus_alpha(n))) for n in C.degrees()
    }
    dims = {n: q.dim for n, q in quotients.items()}
    bd = {}
    for n in range(1, C.top + 1):
        bd[n] = induced_map(
            C.d(n),
            quotients[n].numerator,
            quotients[n].denominator,
            quotients[n - 1].numerator,
            quotients[n - 1].denominator,
        )
    return ChainComplex(dims, bd), quotients


def coker_complex(E: EquivariantComplex) -> ChainComplex:
    """Degreewise cokernel of ``1 - alpha`` with the induced boundary."""
    return coker_complex_with_basis(E)[0]


@dataclass(frozen=True)
class ExactnessReport:
    exact: bool
    defects: tuple[int, ...]
    dims: tuple[int, ...]

    def __bool__(self) -> bool:
        return self.exact


def check_exact_sequence(maps: Sequence[QMatrix]) -> ExactnessReport:
    """Exactness of ``V_0 -f_0-> V_1 -f_1-> ... -> V_k``.

    Defects are ``dim ker(f_i) - dim im(f_{i-1})`` at each interior position.
    To test a sequence flanked by zeros, pass the zero maps explicitly
    (``QMatrix.zeros(n, 0)`` at the head, ``QMatrix.zeros(0, n)`` at the tail).
    """
    for i in range(len(maps) - 1):
        f, g = maps[i], maps[i + 1]
        if g.cols != f.rows:
            raise ShapeError(f"maps {i} and {i + 1} are not composable")
        if not (g @ f).is_zero():
            raise InvariantError(f"composite of maps {i} and {i + 1} is nonzero")
    defects = []
    for i in range(1, len(maps)):
        defects.append(kernel_basis(maps[i]).dim - maps[i - 1].rank())
    dims = tuple([maps[0].cols] + [m.rows for m in maps])
    return ExactnessReport(all(d == 0 for d in defects), tuple(defects), dims)


# filtered complexes and spectral sequences ----------------------------


@dataclass(frozen=True)
class CochainComplex:
    """Cohomologically graded complex over a finite degree window.

    ``differential[N]`` maps degree N to degree N+1; absent entries are zero.
    """

    dims: Mapping[int, int]
    differential: Mapping[int, QMatrix] = field(default_factory=dict)

    def dim(self, n: int) -> int:
        return self.dims.get(n, 0)

    def d(self, n: int) -> QMatrix:
        m = self.differential.get(n)
        return QMatrix.zeros(self.dim(n + 1), self.dim(n)) if m is None else m


@dataclass(frozen=True)
class FilteredComplex:
    """A cochain complex with a decreasing filtration ``F^0 = C ⊇ F^1 ⊇ ...``.

    ``filtration[N][p]`` is ``F^p`` in degree N.  ``determined`` lists the
    degrees whose spectral sequence entries do not depend on truncation; all
    other entries are flagged.
    """

    total: CochainComplex
    filtration: Mapping[int, Sequence[Subspace]]
    determined: frozenset[int] | None = None

    def F(self, n: int, p: int) -> Subspace:
        levels = self.filtration.get(n)
        dim = self.total.dim(n)
        if levels is None:
            return Subspace.whole(dim) if p <= 0 else Subspace.zero(dim)
        if p <= 0:
            return levels[0] if levels else Subspace.whole(dim)
        if p >= len(levels):
            return Subspace.zero(dim)
        return levels[p]

    def length(self) -> int:
        return max((len(v) for v in self.filtration.values()), default=1)

    def is_determined(self, n: int) -> bool:
        return self.determined is None or n in self.determined

    def check(self) -> Verdict:
        for n in self.total.dims:
            for p in range(self.length()):
                if not apply(self.total.d(n), self.F(n, p)) <= self.F(n + 1, p):
                    return Verdict(False, n, f"differential leaves F^{p} at degree {n}")
        return Verdict(True, None, "filtration preserved")


@dataclass
class SpectralPages:
    """Dimensions ``pages[r][(p, q)]`` with total degree ``p + q``."""

    pages: list[dict[tuple[int, int], int]]
    e_infinity: dict[tuple[int, int], int]
    undetermined: frozenset[tuple[int, int]]
    stabilized_at: int | None


class _SSComputer:
    """Shared subspace algebra for pages and the limit term."""

    def __init__(self, F: FilteredComplex):
        self.F = F
        self._z: dict = {}

    def Z(self, r: int, p: int, n: int) -> Subspace:
        """``{x in F^p C^n : dx in F^{p+r} C^{n+1}}``; ``r = None`` means cycles."""
        key = (r, p, n)
        if key not in self._z:
            Fp = self.F.F(n, p)
            if r is not None and r < 0:
                self._z[key] = Fp
            else:
                d = self.F.total.d(n)
                target = Subspace.zero(self.F.total.dim(n + 1)) if r is None else self.F.F(n + 1, p + r)
                self._z[key] = preimage(d, target, Fp)
        return self._z[key]

    def page_dim(self, r: int, p: int, n: int) -> int:
        num = self.Z(r, p, n)
        den = sum_spaces(self.Z(r - 1, p + 1, n), apply(self.F.total.d(n - 1), self.Z(r - 1, p - r + 1, n - 1)))
        return num.dim - den.dim

    def limit_dim(self, p: int, n: int) -> int:
        Fp, Fp1 = self.F.F(n, p), self.F.F(n, p + 1)
        Z = self.Z(None, p, n)
        Z1 = self.Z(None, p + 1, n)
        im = image_basis(self.F.total.d(n - 1))
        return Z.dim - Z1.dim - (intersect(im, Fp).dim - intersect(im, Fp1).dim)


def spectral_pages(F: FilteredComplex, r_max: int, degrees: Sequence[int] | None = None) -> SpectralPages:
    """Pages ``E_0 .. E_{r_max}`` and the limit term of the filtration spectral sequence.

    ``E_r^p = Z_r^p / (Z_{r-1}^{p+1} + d Z_{r-1}^{p-r+1})`` in every total degree.
    """
    comp = _SSComputer(F)
    if degrees is None:
        degrees = sorted(F.total.dims)
    L = F.length()
    pages = []
    for r in range(r_max + 1):
        page = {}
        for n in degrees:
            for p in range(L):
                page[(p, n - p)] = comp.page_dim(r, p, n)
        pages.append(page)
    einf = {(p, n - p): comp.limit_dim(p, n) for n in degrees for p in range(L)}
    undetermined = frozenset((p, n - p) for n in degrees for p in range(L) if not F.is_determined(n))
    stabilized = next((r for r, page in enumerate(pages) if page == einf), None)
    return SpectralPages(pages, einf, undetermined, stabilized)


def limit_term(F: FilteredComplex, p: int, n: int) -> int:
    """Dimension of ``F^p H^n / F^{p+1} H^n``."""
    return _SSComputer(F).limit_dim(p, n)


@dataclass(frozen=True)
class Bicomplex:
    """Grid of spaces ``(m, n)`` in ``[0, m_max] x [0, n_max]``.

    ``d1[(m, n)]`` maps to ``(m + 1, n)`` and ``d2[(m, n)]`` to ``(m, n + 1)``;
    maps whose target leaves the window are not stored.
    """

    window: tuple[int, int]
    dims: Mapping[tuple[int, int], int]
    d1: Mapping[tuple[int, int], QMatrix]
    d2: Mapping[tuple[int, int], QMatrix]

    def dim(self, m: int, n: int) -> int:
        return self.dims.get((m, n), 0)

    def points(self):
        m_max, n_max = self.window
        return [(m, n) for m in range(m_max + 1) for n in range(n_max + 1)]

    def check(self) -> Verdict:
        """``D1^2 = 0``, ``D2^2 = 0`` and ``D1 D2 + D2 D1 = 0`` wherever defined."""
        for m, n in self.points():
            a, b = self.d1.get((m, n)), self.d2.get((m, n))
            a2, b2 = self.d1.get((m + 1, n)), self.d2.get((m, n + 1))
            if a is not None and a2 is not None and not (a2 @ a).is_zero():
                return Verdict(False, m + n, f"D1 squared nonzero at {(m, n)}")
            if b is not None and b2 is not None and not (b2 @ b).is_zero():
                return Verdict(False, m + n, f"D2 squared nonzero at {(m, n)}")
            c, e = self.d2.get((m + 1, n)), self.d1.get((m, n + 1))
            if a is not None and b is not None and c is not None and e is not None:
                if not (c @ a + e @ b).is_zero():
                    return Verdict(False, m + n, f"D1 D2 + D2 D1 nonzero at {(m, n)}")
        return Verdict(True, None, "bicomplex identities hold")

    def complete(self, total: int) -> bool:
        """Whether every nonzero untruncated entry of this total degree is inside the window."""
        m_max, n_max = self.window
        return total <= m_max and total // 2 <= n_max

    def totalize(self, filtration: str = "n") -> FilteredComplex:
        """Total complex (degree ``m + n``, differential ``D1 + D2``) filtered by ``m`` or ``n``."""
        if filtration not in ("m", "n"):
            raise ValueError("filtration must be 'm' or 'n'")
        m_max, n_max = self.window
        top = m_max + n_max
        layout = {}
        for N in range(top + 1):
            pts = [(N - n, n) for n in range(n_max + 1) if 0 <= N - n <= m_max]
            offsets, pos = {}, 0
            for pt in pts:
                offsets[pt] = pos
                pos += self.dim(*pt)
            layout[N] = (offsets, pos)
        dims = {N: size for N, (_, size) in layout.items()}
        diff = {}
        for N in range(top):
            src, size = layout[N]
            dst, tsize = layout[N + 1]
            entries = []
            for (m, n), off in src.items():
                for mat, tgt in ((self.d1.get((m, n)), (m + 1, n)), (self.d2.get((m, n)), (m, n + 1))):
                    if mat is None or tgt not in dst:
                        continue
                    toff = dst[tgt]
                    entries.extend((toff + i, off + j, v) for i, j, v in mat.nonzero_entries())
            diff[N] = QMatrix.from_sparse((tsize, size), entries)
        filt = {}
        for N, (offsets, size) in layout.items():
            key = (lambda pt: pt[1]) if filtration == "n" else (lambda pt: pt[0])
            levels = []
            top_level = max((key(pt) for pt in offsets), default=0)
            for p in range(top_level + 1):
                coords = [
                    off + i for pt, off in offsets.items() if key(pt) >= p for i in range(self.dim(*pt))
                ]
                levels.append(
                    Subspace(size, QMatrix.from_sparse((size, len(coords)), [(c, k, 1) for k, c in enumerate(coords)]))
                )
            filt[N] = levels
        determined = frozenset(N for N in dims if self.complete(N + 1))
        return FilteredComplex(CochainComplex(dims, diff), filt, determined)
