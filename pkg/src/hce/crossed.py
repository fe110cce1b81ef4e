"""Invariants of smooth crossed products ``C^∞(M) ⋊_α Z`` from finite equivariant chain models.

A model is an :class:`EquivariantComplex` ``(C_*, ∂, α)`` standing in for the
de Rham currents of M with the induced action of the diffeomorphism.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping

from .complexes import (
    ChainComplex,
    ChainMap,
    EquivariantComplex,
    ExactnessReport,
    InvariantError,
    check_exact_sequence,
    coker_complex_with_basis,
    homology,
    homology_subquotient,
    ker_subcomplex_with_basis,
    validate_complex,
)
from .exactla import (
    InconsistentSystemError,
    QMatrix,
    Subquotient,
    Subspace,
    image_basis,
    induced_map,
    intersect,
    kernel_basis,
    preimage,
    solve,
    sum_spaces,
)

MODEL_NAMES = ("sphere", "circle-swap", "torus2")


class ConstructionError(ValueError):
    """A lift required by the four-term sequence does not exist (invalid model)."""


def _identity_alpha(C: ChainComplex) -> ChainMap:
    return ChainMap.identity(C)


def sphere(n: int) -> EquivariantComplex:
    """Minimal model of ``S^{2n+1}``: one cell in degrees 0 and 2n+1, zero boundary, ``α = id``."""
    if not isinstance(n, int) or n < 1:
        raise ValueError("sphere model needs an integer n >= 1")
    C = ChainComplex({0: 1, 2 * n + 1: 1})
    return EquivariantComplex(C, _identity_alpha(C))


def circle_swap() -> EquivariantComplex:
    """Two vertices and two edges forming a circle; α swaps both vertices and edges."""
    d1 = QMatrix.from_rows([[-1, 1], [1, -1]])
    swap = QMatrix.from_rows([[0, 1], [1, 0]])
    C = ChainComplex({0: 2, 1: 2}, {1: d1})
    return EquivariantComplex(C, ChainMap({0: swap, 1: swap}))


def torus2() -> EquivariantComplex:
    """Minimal cell model of the 2-torus with ``α = id`` (rotations are homotopic to the identity)."""
    C = ChainComplex({0: 1, 1: 2, 2: 1})
    return EquivariantComplex(C, _identity_alpha(C))


def build_model(name: str, params: Mapping[str, int] | None = None) -> EquivariantComplex:
    params = dict(params or {})
    if name == "sphere":
        if "n" not in params:
            raise ValueError("sphere model needs parameter n")
        return sphere(params.pop("n"))
    if name == "circle-swap":
        E = circle_swap()
    elif name == "torus2":
        E = torus2()
    else:
        raise ValueError(f"unknown model {name!r}; expected one of {', '.join(MODEL_NAMES)}")
    if params:
        raise ValueError(f"model {name!r} takes no parameters")
    return E


def _require_valid(E: EquivariantComplex):
    verdict = validate_complex(E)
    if not verdict:
        raise InvariantError(verdict.message)


# H_eq, H_coeq, E_infinity, HP -------------------------------------------


def h_eq(E: EquivariantComplex, n: int) -> tuple[int, QMatrix]:
    """Homology of ``(Ker(1-α), ∂)`` at degree n; representatives in ambient coordinates."""
    K, bases = ker_subcomplex_with_basis(E)
    dim, reps = homology(K, n)
    if dim:
        reps = bases[n] @ reps
    return dim, reps


def h_coeq(E: EquivariantComplex, n: int) -> tuple[int, QMatrix]:
    """Homology of ``(Coker(1-α), ∂)`` at degree n; representatives in quotient coordinates."""
    Q, _ = coker_complex_with_basis(E)
    return homology(Q, n)


def _eq_coeq_tables(E: EquivariantComplex) -> tuple[dict[int, int], dict[int, int]]:
    K, _ = ker_subcomplex_with_basis(E)
    Q, _ = coker_complex_with_basis(E)
    top = E.complex.top
    eq = {n: homology(K, n)[0] for n in range(top + 1)}
    coeq = {n: homology(Q, n)[0] for n in range(top + 1)}
    return eq, coeq


def einf(E: EquivariantComplex, n: int) -> int:
    """``dim H_eq^n + dim H_coeq^{n-1}``."""
    if n < 0:
        return 0
    return h_eq(E, n)[0] + (h_coeq(E, n - 1)[0] if n >= 1 else 0)


@dataclass(frozen=True)
class EinfTable:
    entries: tuple[int, ...]
    hp0: int
    hp1: int

    def odd_support(self) -> tuple[int, ...]:
        return tuple(n for n in range(1, len(self.entries), 2) if self.entries[n])


def einf_table(E: EquivariantComplex, max_degree: int | None = None) -> EinfTable:
    """E_∞ by degree ``0..max_degree`` (default: one past the top of the model).

    HP sums always run over the full support, whatever ``max_degree`` is.
    """
    eq, coeq = _eq_coeq_tables(E)
    support = E.complex.top + 1
    full = [eq.get(n, 0) + coeq.get(n - 1, 0) for n in range(support + 1)]
    hp0 = sum(full[0::2])
    hp1 = sum(full[1::2])
    last = support if max_degree is None else max_degree
    entries = tuple(full[n] if n <= support else 0 for n in range(last + 1))
    return EinfTable(entries, hp0, hp1)


def hp_crossed(E: EquivariantComplex) -> tuple[int, int]:
    """``(dim HP^0, dim HP^1)`` of the crossed product as even/odd sums of E_∞."""
    t = einf_table(E)
    return t.hp0, t.hp1


def hp_manifold(C: ChainComplex | EquivariantComplex) -> tuple[int, int]:
    """``(Σ H_{2n}, Σ H_{2n+1})`` of the underlying complex."""
    if isinstance(C, EquivariantComplex):
        C = C.complex
    betti = [homology(C, n)[0] for n in C.degrees()]
    return sum(betti[0::2]), sum(betti[1::2])


# the four-term sequence --------------------------------------------------


class _Spaces:
    """Ambient subspaces of one model, cached per degree."""

    def __init__(self, E: EquivariantComplex):
        self.E = E
        self.C = E.complex

    def dim(self, n):
        return self.C.dim(n) if n >= 0 else 0

    def d(self, n) -> QMatrix:
        return self.C.d(n) if n >= 0 else QMatrix.zeros(0, 0)

    def one_minus(self, n) -> QMatrix:
        return self.E.one_minus_alpha(n) if n >= 0 else QMatrix.zeros(0, 0)

    def closed(self, n) -> Subspace:
        return kernel_basis(self.d(n)) if n >= 0 else Subspace.zero(0)

    def exact(self, n) -> Subspace:
        """``∂ C_{n+1}`` inside ``C_n``."""
        return image_basis(self.d(n + 1)) if n >= 0 else Subspace.zero(0)

    def fixed(self, n) -> Subspace:
        return kernel_basis(self.one_minus(n)) if n >= 0 else Subspace.zero(0)

    def moved(self, n) -> Subspace:
        return image_basis(self.one_minus(n)) if n >= 0 else Subspace.zero(0)

    def coker_gamma(self, j) -> Subquotient:
        """Coker γ_j = Ker(1-α_*|H_j) / γ_j(H_eq^j)."""
        num = preimage(self.one_minus(j), self.exact(j), within=self.closed(j))
        den = sum_spaces(intersect(self.closed(j), self.fixed(j)), self.exact(j))
        return Subquotient(num, den)

    def coker_beta(self, j) -> Subquotient:
        """Coker β_j = H_coeq^j / β_j(H_j / (1-α)H_j)."""
        num = preimage(self.d(j), self.moved(j - 1)) if j >= 1 else Subspace.whole(self.dim(j))
        den = sum_spaces(self.closed(j), self.moved(j))
        return Subquotient(num, den)

    def ker_gamma(self, j) -> Subquotient:
        """Ker γ_j: α-fixed cycles that bound in C, modulo boundaries of α-fixed chains."""
        num = intersect(self.fixed(j), self.exact(j))
        fixed_above = self.fixed(j + 1)
        den = image_basis(self.d(j + 1) @ fixed_above.basis) if fixed_above.dim else Subspace.zero(self.dim(j))
        return Subquotient(num, den)

    def ker_beta(self, j) -> Subquotient:
        """Ker β_j: cycles in ``(1-α)C + ∂C`` modulo ``∂C + (1-α)(cycles)``."""
        num = intersect(self.closed(j), sum_spaces(self.moved(j), self.exact(j)))
        Z = self.closed(j)
        moved_cycles = image_basis(self.one_minus(j) @ Z.basis) if Z.dim else Subspace.zero(self.dim(j))
        den = sum_spaces(self.exact(j), moved_cycles)
        return Subquotient(num, den)


def _lift(M: QMatrix, rhs: QMatrix, what: str) -> QMatrix:
    try:
        return solve(M, rhs)
    except InconsistentSystemError:
        raise ConstructionError(f"construction failed: no lift for {what}") from None


def _map_between(dom: Subquotient, cod: Subquotient, image_of) -> QMatrix:
    """Matrix of ``rep -> image_of(rep)`` read in the quotient coordinates of ``cod``."""
    if not dom.dim:
        return QMatrix.zeros(cod.dim, 0)
    images = image_of(dom.representatives)
    if not cod.dim:
        return QMatrix.zeros(0, dom.dim)
    return cod.coordinates(images)


def _gamma(S: _Spaces, j: int) -> QMatrix:
    """γ_j : H_eq^j -> Ker(1-α_*|H_j) as a matrix between quotient bases."""
    if j < 0 or j > S.C.top:
        return QMatrix.zeros(0, 0)
    K, bases = ker_subcomplex_with_basis(S.E)
    Hk = homology_subquotient(K, j)
    cod_num = preimage(S.one_minus(j), S.exact(j), within=S.closed(j))
    return induced_map(bases[j], Hk.numerator, Hk.denominator, cod_num, S.exact(j))


def _beta(S: _Spaces, j: int) -> QMatrix:
    """β_j : H_j / (1-α_*)H_j -> H_coeq^j as a matrix between quotient bases."""
    if j < 0 or j > S.C.top:
        return QMatrix.zeros(0, 0)
    Q, quotients = coker_complex_with_basis(S.E)
    proj = quotients[j].coordinates(QMatrix.identity(S.dim(j))) if S.dim(j) else QMatrix.zeros(0, 0)
    Hq = homology_subquotient(Q, j)
    Z = S.closed(j)
    moved_cycles = image_basis(S.one_minus(j) @ Z.basis) if Z.dim else Subspace.zero(S.dim(j))
    den = sum_spaces(S.exact(j), moved_cycles)
    return induced_map(proj, Z, den, Hq.numerator, Hq.denominator)


def _cokernel_dim(M: QMatrix) -> int:
    return M.rows - M.rank()


def _kernel_dim(M: QMatrix) -> int:
    return M.cols - M.rank()


@dataclass(frozen=True)
class FourTermResult:
    degree: int
    dims: tuple[int, int, int, int]
    maps: dict[str, QMatrix] = field(repr=False)
    report: ExactnessReport
    consistent: bool

    @property
    def exact(self) -> bool:
        return self.report.exact and self.consistent

    def __bool__(self) -> bool:
        return self.exact


def four_term(E: EquivariantComplex, k: int) -> FourTermResult:
    """``0 -> Coker γ_{k-1} -s1-> Coker β_k -s2-> Ker γ_{k-2} -s3-> Ker β_{k-1} -> 0``.

    The s-maps are built from explicit lifts in the chain model:
    s1 solves ``∂φ = (1-α)ψ`` and returns ``[φ]``; s2 solves ``(1-α)φ = ∂ψ`` and
    returns ``[∂φ]``; s3 solves ``∂φ = ψ`` and returns ``[(1-α)φ]``.
    The first space sits in degree ``k-1`` so that s1 lands in degree k.
    The γ and β maps are built independently with ``induced_map``; their
    kernel and cokernel dimensions must agree with the four spaces.
    """
    _require_valid(E)
    S = _Spaces(E)
    V1, V2, V3, V4 = S.coker_gamma(k - 1), S.coker_beta(k), S.ker_gamma(k - 2), S.ker_beta(k - 1)

    def s1(psi):
        return _lift(S.d(k), S.one_minus(k - 1) @ psi, "s1")

    def s2(psi):
        phi = _lift(S.one_minus(k - 1), S.d(k) @ psi, "s2")
        return S.d(k - 1) @ phi

    def s3(psi):
        phi = _lift(S.d(k - 1), psi, "s3")
        return S.one_minus(k - 1) @ phi

    m1 = _map_between(V1, V2, s1)
    m2 = _map_between(V2, V3, s2)
    m3 = _map_between(V3, V4, s3)
    seq = [QMatrix.zeros(V1.dim, 0), m1, m2, m3, QMatrix.zeros(0, V4.dim)]
    report = check_exact_sequence(seq)

    gammas = {k - 1: _gamma(S, k - 1), k - 2: _gamma(S, k - 2)}
    betas = {k: _beta(S, k), k - 1: _beta(S, k - 1)}
    consistent = (
        _cokernel_dim(gammas[k - 1]) == V1.dim
        and _cokernel_dim(betas[k]) == V2.dim
        and _kernel_dim(gammas[k - 2]) == V3.dim
        and _kernel_dim(betas[k - 1]) == V4.dim
    )
    maps = {
        "s1": m1,
        "s2": m2,
        "s3": m3,
        f"gamma_{k - 1}": gammas[k - 1],
        f"gamma_{k - 2}": gammas[k - 2],
        f"beta_{k}": betas[k],
        f"beta_{k - 1}": betas[k - 1],
    }
    return FourTermResult(k, (V1.dim, V2.dim, V3.dim, V4.dim), maps, report, consistent)


# six-term consistency -----------------------------------------------------


def mapping_cone(E: EquivariantComplex) -> ChainComplex:
    """Cone of ``1 - α``: ``C_k ⊕ C_{k-1}`` with ``(x, y) -> (∂x + (1-α)y, -∂y)``."""
    C = E.complex
    top = C.top + 1
    dims = {k: C.dim(k) + C.dim(k - 1) for k in range(top + 1)}
    bd = {}
    for k in range(1, top + 1):
        lo, lower = C.dim(k - 1), C.dim(k - 2) if k >= 2 else 0
        upper = QMatrix.hstack(C.d(k), E.one_minus_alpha(k - 1), nrows=lo)
        below = QMatrix.hstack(QMatrix.zeros(lower, C.dim(k)), -C.d(k - 1) if k >= 2 else QMatrix.zeros(0, lo), nrows=lower)
        bd[k] = QMatrix.vstack(upper, below, ncols=dims[k])
    return ChainComplex(dims, bd)


def cone_parity_sums(E: EquivariantComplex) -> tuple[int, int]:
    """``(Σ H_even, Σ H_odd)`` of the mapping cone of ``1 - α``.

    The row spectral sequence of the cone has ``E_2 = H_coeq_k ⊕ H_eq_{k-1}``; the
    cone totals agree with the E_∞ sums of this module exactly when its higher
    (zig-zag) differentials vanish.
    """
    K = mapping_cone(E)
    h = [homology(K, n)[0] for n in K.degrees()]
    return sum(h[0::2]), sum(h[1::2])


@dataclass(frozen=True)
class SixTermReport:
    hp_crossed: tuple[int, int]
    expected: tuple[int, int]
    ker: tuple[int, int]
    coker: tuple[int, int]
    cone: tuple[int, int]

    @property
    def cone_consistent(self) -> bool:
        """The hexagon identities with the cone totals in place of the E_∞ sums (shifted by one)."""
        return (self.cone[1], self.cone[0]) == self.expected

    @property
    def consistent(self) -> bool:
        return self.hp_crossed == self.expected

    def __bool__(self) -> bool:
        return self.consistent


def alpha_on_homology(E: EquivariantComplex, n: int) -> QMatrix:
    """The matrix of ``α_*`` on ``H_n`` in the deterministic quotient basis."""
    H = homology_subquotient(E.complex, n)
    return induced_map(E.alpha_at(n), H.numerator, H.denominator, H.numerator, H.denominator)


def sixterm_consistency(E: EquivariantComplex) -> SixTermReport:
    """Dimension identities forced by the hexagon relating HP(M) and HP(M ⋊ Z).

    ``HP^1(⋊) = coker(1-α_*|HP^0(M)) + ker(1-α_*|HP^1(M))`` and symmetrically for HP^0.
    """
    _require_valid(E)
    ker = [0, 0]
    coker = [0, 0]
    for n in E.complex.degrees():
        a = alpha_on_homology(E, n)
        one_minus = QMatrix.identity(a.rows) - a
        ker[n % 2] += _kernel_dim(one_minus)
        coker[n % 2] += _cokernel_dim(one_minus)
    expected = (coker[1] + ker[0], coker[0] + ker[1])
    return SixTermReport(hp_crossed(E), expected, tuple(ker), tuple(coker), cone_parity_sums(E))


# random models -------------------------------------------------------------


def _random_unimodular(rng: random.Random, n: int, steps: int = 6) -> tuple[list[list[int]], list[list[int]]]:
    """A random integer matrix of determinant ±1 together with its inverse."""
    P = [[int(i == j) for j in range(n)] for i in range(n)]
    Pinv = [row[:] for row in P]
    if n < 2:
        return P, Pinv
    for _ in range(steps):
        i, j = rng.sample(range(n), 2)
        c = rng.choice((-1, 1))
        # row_i += c * row_j on P; column_j -= c * column_i on the inverse
        for col in range(n):
            P[i][col] += c * P[j][col]
        for row in range(n):
            Pinv[row][j] -= c * Pinv[row][i]
    return P, Pinv


def chain_endomorphisms(C: ChainComplex) -> list[dict[int, QMatrix]]:
    """A basis of the space of chain maps ``C -> C``."""
    degrees = list(C.degrees())
    offsets, total = {}, 0
    for n in degrees:
        offsets[n] = total
        total += C.dim(n) ** 2

    def var(n, r, c):
        return offsets[n] + r * C.dim(n) + c

    rows = []
    for n in degrees[1:]:
        d = C.d(n)
        a, b = C.dim(n - 1), C.dim(n)
        for r in range(a):
            for c in range(b):
                # (∂ α_n - α_{n-1} ∂)[r, c] = 0
                row = {}
                for k in range(b):
                    v = d[r, k]
                    if v:
                        row[var(n, k, c)] = row.get(var(n, k, c), 0) + v
                for k in range(a):
                    v = d[k, c]
                    if v:
                        row[var(n - 1, r, k)] = row.get(var(n - 1, r, k), 0) - v
                if row:
                    rows.append(row)
    M = QMatrix.from_sparse((len(rows), total), [(i, j, v) for i, row in enumerate(rows) for j, v in row.items()])
    K = kernel_basis(M).basis
    out = []
    for j in range(K.cols):
        col = K.column(j)
        comp = {}
        for n in degrees:
            size = C.dim(n)
            entries = [
                (r, c, col[var(n, r, c)]) for r in range(size) for c in range(size) if col[var(n, r, c)]
            ]
            comp[n] = QMatrix.from_sparse((size, size), entries)
        out.append(comp)
    return out


def random_complex(rng: random.Random, max_dim: int = 6, max_top: int = 3) -> ChainComplex:
    """A random complex with prescribed ranks, disguised by unimodular changes of basis."""
    top = rng.randint(1, max_top)
    x = {}  # rank of ∂_{n+1}, i.e. dimension of the boundaries in degree n
    h = {}
    dims = {}
    for n in range(top + 1):
        y = x.get(n - 1, 0)  # the part of C_n mapped isomorphically onto boundaries below
        room = max_dim - y
        x[n] = 0 if n == top else rng.randint(0, max(0, room // 2))
        h[n] = rng.randint(0, max(0, room - x[n]))
        dims[n] = x[n] + h[n] + y
    P = {n: _random_unimodular(rng, dims[n]) for n in range(top + 1)}
    boundary = {}
    for n in range(1, top + 1):
        y = x[n - 1]
        # standard form: the last y coordinates of C_n map onto the first y coordinates of C_{n-1}
        std = [[0] * dims[n] for _ in range(dims[n - 1])]
        for t in range(y):
            std[t][dims[n] - y + t] = 1
        Pm, _ = P[n - 1]
        _, Pinv = P[n]
        boundary[n] = QMatrix.from_rows(Pm, dims[n - 1]) @ QMatrix.from_rows(std, dims[n]) @ QMatrix.from_rows(
            Pinv, dims[n]
        ) if dims[n] and dims[n - 1] else QMatrix.zeros(dims[n - 1], dims[n])
    return ChainComplex(dims, boundary)


def random_model(rng: random.Random, max_dim: int = 6, max_top: int = 3) -> EquivariantComplex:
    """A random valid equivariant complex with ``α = id + (sparse integer chain endomorphism)``."""
    C = random_complex(rng, max_dim, max_top)
    basis = chain_endomorphisms(C)
    comps = {n: QMatrix.identity(C.dim(n)) for n in C.degrees()}
    for b in basis:
        c = rng.choice((-1, 0, 0, 0, 1))
        if c:
            for n in comps:
                comps[n] = comps[n] + b[n].scale(c)
    if rng.random() < 0.2:
        comps = {n: m - QMatrix.identity(m.rows) for n, m in comps.items()}
    E = EquivariantComplex(C, ChainMap(comps))
    _require_valid(E)
    return E


def permute_model(E: EquivariantComplex, rng: random.Random) -> EquivariantComplex:
    """The same model in a randomly permuted basis in every degree."""
    C = E.complex
    perms = {}
    for n in C.degrees():
        p = list(range(C.dim(n)))
        rng.shuffle(p)
        perms[n] = QMatrix.from_sparse((len(p), len(p)), [(i, p[i], 1) for i in range(len(p))])
    boundary = {n: perms[n - 1] @ C.d(n) @ perms[n].T for n in range(1, C.top + 1)}
    alpha = {n: perms[n] @ E.alpha_at(n) @ perms[n].T for n in C.degrees()}
    return EquivariantComplex(ChainComplex(C.dims, boundary), ChainMap(alpha))
