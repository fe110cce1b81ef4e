"""Bicharacters on Z^3, twisted lattice algebras and the associated seminorms.

Angles are exact: an :class:`AngleScalar` is ``r + Σ c_ω ω`` with rational r, c_ω
and symbolic irrationals ω that are assumed linearly independent over Q together
with 1. A phase ``e^{2πiθ}`` is represented by its angle θ taken modulo Z.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .exactla import QMatrix, determinant, integer_kernel, smith_normal_form, to_fraction

Point = tuple[int, ...]


class BasisMismatchError(ValueError):
    """Operands refer to different symbolic angle bases."""


@dataclass(frozen=True)
class AngleScalar:
    rational: Fraction = Fraction(0)
    coefficients: tuple[tuple[str, Fraction], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "rational", to_fraction(self.rational))
        merged: dict[str, Fraction] = {}
        for name, c in self.coefficients:
            merged[name] = merged.get(name, Fraction(0)) + to_fraction(c)
        object.__setattr__(self, "coefficients", tuple(sorted((n, c) for n, c in merged.items() if c)))

    @classmethod
    def of(cls, rational=0, **coefficients) -> "AngleScalar":
        return cls(to_fraction(rational), tuple(coefficients.items()))

    @classmethod
    def symbol(cls, name: str) -> "AngleScalar":
        return cls(Fraction(0), ((name, Fraction(1)),))

    @property
    def coefficient_map(self) -> dict[str, Fraction]:
        return dict(self.coefficients)

    def coefficient(self, name: str) -> Fraction:
        return self.coefficient_map.get(name, Fraction(0))

    @property
    def names(self) -> frozenset[str]:
        return frozenset(n for n, _ in self.coefficients)

    def __add__(self, other: "AngleScalar") -> "AngleScalar":
        return AngleScalar(self.rational + other.rational, self.coefficients + other.coefficients)

    def __neg__(self) -> "AngleScalar":
        return AngleScalar(-self.rational, tuple((n, -c) for n, c in self.coefficients))

    def __sub__(self, other: "AngleScalar") -> "AngleScalar":
        return self + (-other)

    def __mul__(self, k) -> "AngleScalar":
        k = to_fraction(k)
        return AngleScalar(self.rational * k, tuple((n, c * k) for n, c in self.coefficients))

    __rmul__ = __mul__

    def mod1(self) -> "AngleScalar":
        """Reduce the rational part into ``[0, 1)``."""
        r = self.rational - math.floor(self.rational)
        return AngleScalar(r, self.coefficients)

    def is_integer(self) -> bool:
        return not self.coefficients and self.rational.denominator == 1

    def congruent(self, other: "AngleScalar") -> bool:
        """Equal modulo Z."""
        return (self - other).is_integer()

    def __str__(self) -> str:
        parts = [str(self.rational)] if self.rational or not self.coefficients else []
        parts += [f"{c}*{n}" for n, c in self.coefficients]
        return " + ".join(parts)


ZERO = AngleScalar()
HALF = AngleScalar(Fraction(1, 2))


def _pairs():
    return ((0, 1), (0, 2), (1, 2))


@dataclass(frozen=True)
class Bicharacter:
    """``η(e_i ∧ e_j) = e^{2πiθ_ij}`` on Z^3; ``theta`` is stored reduced mod Z."""

    theta: tuple[tuple[AngleScalar, ...], ...]
    basis: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.theta) != 3 or any(len(row) != 3 for row in self.theta):
            raise ValueError("bicharacter needs a 3x3 angle matrix")
        theta = tuple(tuple(a.mod1() for a in row) for row in self.theta)
        object.__setattr__(self, "theta", theta)
        for i in range(3):
            if not theta[i][i].is_integer():
                raise ValueError(f"diagonal angle theta_{i + 1}{i + 1} is not 0 mod Z")
            for j in range(i + 1, 3):
                if not (theta[i][j] + theta[j][i]).is_integer():
                    raise ValueError(f"theta is not antisymmetric mod Z at ({i + 1}, {j + 1})")
        names = set().union(*(a.names for row in theta for a in row))
        if self.basis:
            unknown = names - set(self.basis)
            if unknown:
                raise BasisMismatchError(f"angles use undeclared basis names {sorted(unknown)}")
        else:
            object.__setattr__(self, "basis", tuple(sorted(names)))

    @classmethod
    def from_upper(cls, upper: Mapping[tuple[int, int], AngleScalar], basis: Sequence[str] = ()) -> "Bicharacter":
        """Complete ``θ_12, θ_13, θ_23`` (0-based keys ``(0,1), (0,2), (1,2)``) antisymmetrically."""
        rows = [[ZERO] * 3 for _ in range(3)]
        for (i, j), a in upper.items():
            if not 0 <= i < j < 3:
                raise ValueError(f"entry {(i, j)} is not strictly upper triangular")
            rows[i][j] = a
            rows[j][i] = -a
        return cls(tuple(tuple(r) for r in rows), tuple(basis))

    def __getitem__(self, ij: tuple[int, int]) -> AngleScalar:
        return self.theta[ij[0]][ij[1]]

    def upper(self) -> dict[tuple[int, int], AngleScalar]:
        return {p: self[p] for p in _pairs()}

    def pairing(self, g: Sequence[int]) -> tuple[AngleScalar, ...]:
        """``Θg``; g is in the radical exactly when every entry is an integer."""
        out = []
        for i in range(3):
            acc = ZERO
            for j in range(3):
                acc = acc + self.theta[i][j] * g[j]
            out.append(acc)
        return tuple(out)


def eta_from_rotation(theta1: AngleScalar, theta2: AngleScalar) -> Bicharacter:
    """The bicharacter of the crossed product by the rotation ``(x1, x2) -> (x1 + θ1, x2 + θ2)``."""
    return Bicharacter.from_upper({(0, 1): ZERO, (0, 2): -theta1, (1, 2): -theta2})


# nondegeneracy -------------------------------------------------------------


@dataclass(frozen=True)
class NondegeneracyVerdict:
    nondegenerate: bool
    witness: Point | None = None

    def __bool__(self) -> bool:
        return self.nondegenerate


def _normalize_sign(v: Sequence[int]) -> Point:
    v = tuple(int(x) for x in v)
    for x in v:
        if x:
            return v if x > 0 else tuple(-y for y in v)
    return v


def _witness_key(v: Point):
    # shortest in l1, then prefer weight on earlier coordinates
    return (sum(abs(x) for x in v), tuple(-abs(x) for x in v), tuple(-x for x in v))


def radical_lattice(eta: Bicharacter) -> list[Point]:
    """A basis of ``{g in Z^3 : Θg in Z^3}``."""
    rows = []
    for name in eta.basis:
        for i in range(3):
            rows.append([eta.theta[i][j].coefficient(name) for j in range(3)])
    L = integer_kernel(QMatrix.from_rows(rows, 3)) if rows else QMatrix.identity(3)
    if not L.cols:
        return []
    # rational parts: need (R L) y in Z^l, i.e. N y = 0 mod q for the integer matrix N = q R L
    R = QMatrix.from_rows([[eta.theta[i][j].rational for j in range(3)] for i in range(3)])
    RL = R @ L
    q = math.lcm(1, *(v.denominator for _, _, v in RL.nonzero_entries()))
    N = RL.scale(q)
    _, D, V = smith_normal_form(N)
    scales = []
    for t in range(L.cols):
        d = int(D[t, t]) if t < min(D.shape) else 0
        scales.append(q // math.gcd(d, q))
    basis = L @ V @ QMatrix.from_sparse((L.cols, L.cols), [(t, t, s) for t, s in enumerate(scales)])
    return [tuple(int(x) for x in basis.column(j)) for j in range(basis.cols)]


def _reduce_basis(vectors: list[Point]) -> list[Point]:
    """Pairwise size reduction in l1 (a cheap stand-in for full lattice reduction)."""
    vs = [list(v) for v in vectors]
    changed = True
    while changed:
        changed = False
        for i, j in itertools.permutations(range(len(vs)), 2):
            for sign in (1, -1):
                cand = [a - sign * b for a, b in zip(vs[i], vs[j])]
                if lattice_norm(cand) < lattice_norm(vs[i]):
                    vs[i] = cand
                    changed = True
    return [tuple(v) for v in vs]


def is_radical(eta: Bicharacter, g: Sequence[int]) -> bool:
    return all(a.is_integer() for a in eta.pairing(g))


def nondegenerate(eta: Bicharacter) -> NondegeneracyVerdict:
    """Decide whether ``Θg ∈ Z^3`` forces ``g = 0``; otherwise return a verified witness."""
    lattice = radical_lattice(eta)
    if not lattice:
        return NondegeneracyVerdict(True, None)
    witness = min((_normalize_sign(v) for v in _reduce_basis(lattice)), key=_witness_key)
    if not any(witness) or not is_radical(eta, witness):
        raise ArithmeticError("internal error: radical witness failed re-verification")
    return NondegeneracyVerdict(False, witness)


# isomorphism ------------------------------------------------------------------


def _as_int_matrix(T) -> list[list[int]]:
    rows = [[int(x) for x in row] for row in (T.tolist() if isinstance(T, np.ndarray) else T)]
    if len(rows) != 3 or any(len(r) != 3 for r in rows):
        raise ValueError("T must be a 3x3 integer matrix")
    return rows


def transform(eta: Bicharacter, T) -> Bicharacter:
    """The bicharacter ``Tᵀ Θ T`` (pull-back along ``g -> Tg``)."""
    T = _as_int_matrix(T)
    rows = []
    for i in range(3):
        row = []
        for j in range(3):
            acc = ZERO
            for a in range(3):
                for b in range(3):
                    c = T[a][i] * T[b][j]
                    if c:
                        acc = acc + eta.theta[a][b] * c
            row.append(acc)
        rows.append(tuple(row))
    return Bicharacter(tuple(rows), eta.basis)


def iso_check(eta: Bicharacter, eta2: Bicharacter, T) -> bool:
    """``Θ' ≡ Tᵀ Θ T`` mod Z for a unimodular integer T."""
    rows = _as_int_matrix(T)
    if abs(determinant(QMatrix.from_rows(rows))) != 1:
        raise ValueError("T is not unimodular (det must be ±1)")
    pulled = transform(eta, rows)
    return all(pulled[p].congruent(eta2[p]) for p in _pairs())


def _components(eta: Bicharacter, names: Sequence[str], scale: int) -> np.ndarray:
    """Integer array ``(components, 3, 3)``: scaled rational parts then scaled coefficients."""
    out = np.zeros((1 + len(names), 3, 3), dtype=np.int64)
    for i in range(3):
        for j in range(3):
            a = eta.theta[i][j]
            out[0, i, j] = int(a.rational * scale)
            for c, name in enumerate(names, start=1):
                out[c, i, j] = int(a.coefficient(name) * scale)
    return out


def _denominators(eta: Bicharacter) -> Iterable[int]:
    for row in eta.theta:
        for a in row:
            yield a.rational.denominator
            yield from (c.denominator for _, c in a.coefficients)


def _candidates(bound: int) -> np.ndarray:
    values = np.arange(-bound, bound + 1, dtype=np.int64)
    grid = np.stack(np.meshgrid(*([values] * 9), indexing="ij"), axis=-1).reshape(-1, 9)
    a, b, c, d, e, f, g, h, i = grid.T
    det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    grid = grid[np.abs(det) == 1]
    distance = np.abs(grid - np.eye(3, dtype=np.int64).reshape(9)).sum(axis=1)
    order = np.lexsort(tuple(grid[:, k] for k in range(8, -1, -1)) + (distance,))
    return grid[order].reshape(-1, 3, 3)


def iso_search(eta: Bicharacter, eta2: Bicharacter, bound: int, chunk: int = 65536) -> np.ndarray | None:
    """First unimodular T with entries in ``[-bound, bound]`` satisfying :func:`iso_check`.

    Candidates are ordered by distance from the identity, then lexicographically.
    ``None`` means only that no witness exists within the bound.
    """
    if bound < 1:
        raise ValueError("bound must be at least 1")
    names = sorted(set(eta.basis) | set(eta2.basis))
    scale = math.lcm(1, *_denominators(eta), *_denominators(eta2))
    src = _components(eta, names, scale)
    dst = _components(eta2, names, scale)
    upper = ([0, 0, 1], [1, 2, 2])
    for start in range(0, len(cands := _candidates(bound)), chunk):
        Ts = cands[start : start + chunk]
        ok = np.ones(len(Ts), dtype=bool)
        for c in range(src.shape[0]):
            pulled = np.einsum("nai,ab,nbj->nij", Ts, src[c], Ts)[:, upper[0], upper[1]]
            diff = pulled - dst[c][upper[0], upper[1]]
            # rational component compares mod Z (mod scale after scaling), symbols exactly
            ok &= np.all(diff % scale == 0, axis=1) if c == 0 else np.all(diff == 0, axis=1)
        for idx in np.nonzero(ok)[0]:
            T = Ts[idx]
            if iso_check(eta, eta2, T):
                return T.copy()
    return None


# twisted lattice algebra -----------------------------------------------------


@dataclass(frozen=True)
class Coefficient:
    """``magnitude · e^{2πi·phase}`` with magnitude > 0 and phase reduced mod Z."""

    magnitude: Fraction
    phase: AngleScalar = ZERO

    def __post_init__(self):
        m = to_fraction(self.magnitude)
        phase = self.phase
        if m < 0:
            m, phase = -m, phase + HALF
        if m == 0:
            raise ValueError("zero coefficients are not stored")
        object.__setattr__(self, "magnitude", m)
        object.__setattr__(self, "phase", phase.mod1())

    def __mul__(self, other: "Coefficient") -> "Coefficient":
        return Coefficient(self.magnitude * other.magnitude, self.phase + other.phase)

    def rotate(self, angle: AngleScalar) -> "Coefficient":
        return Coefficient(self.magnitude, self.phase + angle)

    def scale(self, r) -> "Coefficient":
        return Coefficient(self.magnitude * to_fraction(r), self.phase)


def _combine(x: Coefficient, y: Coefficient) -> Coefficient | None:
    """Exact sum of two coefficients when their phases are equal or opposite."""
    if x.phase == y.phase:
        return Coefficient(x.magnitude + y.magnitude, x.phase)
    if x.phase.congruent(y.phase + HALF):
        m = x.magnitude - y.magnitude
        if m == 0:
            return None
        return Coefficient(m, x.phase)
    raise ValueError("cannot add coefficients whose phases differ by other than 0 or 1/2 exactly")


def _add_term(terms: dict, point, coeff: Coefficient):
    if point in terms:
        s = _combine(terms[point], coeff)
        if s is None:
            del terms[point]
        else:
            terms[point] = s
    else:
        terms[point] = coeff


class _FiniteSum:
    """Finitely supported map from lattice points to :class:`Coefficient`."""

    rank = 0

    def __init__(self, terms: Mapping | Iterable = ()):
        acc: dict = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for point, coeff in items:
            point = tuple(int(x) for x in point)
            if len(point) != self.rank:
                raise ValueError(f"lattice points must have {self.rank} coordinates")
            if not isinstance(coeff, Coefficient):
                coeff = Coefficient(to_fraction(coeff))
            _add_term(acc, point, coeff)
        self.terms: dict[Point, Coefficient] = dict(sorted(acc.items()))

    @classmethod
    def monomial(cls, point, magnitude=1, phase: AngleScalar = ZERO):
        return cls({tuple(point): Coefficient(to_fraction(magnitude), phase)})

    def __eq__(self, other) -> bool:
        return type(self) is type(other) and self.terms == other.terms

    def __hash__(self):
        return hash((type(self), tuple(self.terms.items())))

    def __add__(self, other):
        terms = dict(self.terms)
        for p, c in other.terms.items():
            _add_term(terms, p, c)
        return type(self)(terms)

    def scale(self, r):
        r = to_fraction(r)
        if r == 0:
            return type(self)()
        return type(self)({p: c.scale(r) for p, c in self.terms.items()})

    def rotate_phase(self, angle: AngleScalar):
        return type(self)({p: c.rotate(angle) for p, c in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self) -> str:
        body = ", ".join(f"{p}: {c.magnitude}·e(2πi·({c.phase}))" for p, c in self.terms.items())
        return f"{type(self).__name__}({{{body}}})"


class TwistedElement(_FiniteSum):
    """Finitely supported element of the twisted group algebra of Z^3."""

    rank = 3


class TrigPoly(_FiniteSum):
    """Trigonometric polynomial ``Σ c_m e^{2πi m·x}`` on the 2-torus."""

    rank = 2


def delta(i: int) -> TwistedElement:
    """The generator ``u_i`` (1-based) as the monomial at the unit vector."""
    return TwistedElement.monomial(tuple(int(k == i - 1) for k in range(3)))


def cocycle(eta: Bicharacter, a: Point, b: Point) -> AngleScalar:
    """Phase of ``δ_a δ_b = c(a, b) δ_{a+b}`` for normal-ordered monomials ``u1^a1 u2^a2 u3^a3``."""
    acc = ZERO
    for i in range(3):
        for j in range(i):
            k = a[i] * b[j]
            if k:
                acc = acc + eta.theta[i][j] * k
    return acc


def _check_basis(x: _FiniteSum, eta: Bicharacter):
    allowed = set(eta.basis)
    for c in x.terms.values():
        if not c.phase.names <= allowed:
            raise BasisMismatchError("element phases use symbols outside the bicharacter basis")


def twisted_mul(x: TwistedElement, y: TwistedElement, eta: Bicharacter) -> TwistedElement:
    _check_basis(x, eta)
    _check_basis(y, eta)
    terms: dict = {}
    for a, ca in x.terms.items():
        for b, cb in y.terms.items():
            point = tuple(p + q for p, q in zip(a, b))
            _add_term(terms, point, (ca * cb).rotate(cocycle(eta, a, b)))
    return TwistedElement(terms)


def scalar_phase(x: TwistedElement, angle: AngleScalar) -> TwistedElement:
    """Multiply by the unit scalar ``e^{2πi·angle}``."""
    return x.rotate_phase(angle)


# seminorms -------------------------------------------------------------------


def lattice_norm(a: Sequence[int]) -> int:
    """The l1 norm used for ``|a|`` on Z^3."""
    return sum(abs(x) for x in a)


def lattice_seminorm(x: TwistedElement, k: int) -> Fraction:
    """``sup_a (1 + |a|^k) |x_a|`` with ``|a|`` the l1 norm."""
    return max((c.magnitude * (1 + lattice_norm(a) ** k) for a, c in x.terms.items()), default=Fraction(0))


OpNorms = Mapping[tuple[int, int], object] | Callable[[int, int], object]


def rotation_opnorms(t: int, i: int) -> Fraction:
    """``‖β^t‖_i = 1`` for torus rotations (they act by unit phases)."""
    return Fraction(1)


def _opnorm(opnorms: OpNorms, t: int, i: int) -> Fraction:
    if callable(opnorms):
        return to_fraction(opnorms(t, i))
    try:
        return to_fraction(opnorms[(t, i)])
    except KeyError:
        raise KeyError(f"operator-norm table has no entry for (t={t}, i={i})") from None


def rho(k: int, n: int, opnorms: OpNorms) -> Fraction:
    """``ρ_k(n) = sup_{1 <= i <= k} (Σ_{|t| <= |n|} ‖α^t‖_i)^k``; ``ρ_0 = 1``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return Fraction(1)
    n = abs(n)
    return max(sum((_opnorm(opnorms, t, i) for t in range(-n, n + 1)), Fraction(0)) ** k for i in range(1, k + 1))


@dataclass(frozen=True, order=True)
class TwoPiMultiple:
    """The exact real number ``coefficient · (2π)^power``."""

    coefficient: Fraction
    power: int = 0

    def __float__(self) -> float:
        return float(self.coefficient) * (2 * math.pi) ** self.power

    def __str__(self) -> str:
        if not self.power or not self.coefficient:
            return str(self.coefficient)
        tail = "(2π)" if self.power == 1 else f"(2π)^{self.power}"
        return tail if self.coefficient == 1 else f"{self.coefficient}·{tail}"


def _field_tuples(order: int, fields: int = 2):
    return itertools.combinations_with_replacement(range(fields), order)


def trig_seminorm(f: TrigPoly, i: int) -> TwoPiMultiple:
    """``Σ_{k_1 <= ... <= k_i} ‖X_{k_i} ... X_{k_1} f‖_∞`` with ``X_j = ∂/∂x_j``.

    Sup norms are evaluated by the l1 bound ``Σ |c_m|`` (exact for a single mode).
    """
    if i < 0:
        raise ValueError("order must be non-negative")
    total = Fraction(0)
    for ks in _field_tuples(i):
        for m, c in f.terms.items():
            weight = 1
            for k in ks:
                weight *= abs(m[k])
            total += c.magnitude * weight
    return TwoPiMultiple(total, i if total else 0)


def rotate_trig(f: TrigPoly, theta: Sequence[AngleScalar]) -> TrigPoly:
    """``β_θ f``: the mode ``m`` picks up the phase ``e^{2πi m·θ}``."""
    out = {}
    for m, c in f.terms.items():
        angle = theta[0] * m[0] + theta[1] * m[1]
        out[m] = c.rotate(angle)
    return TrigPoly(out)


def rotation_invariance_check(f: TrigPoly, theta: Sequence[AngleScalar], i: int) -> bool:
    return trig_seminorm(rotate_trig(f, theta), i) == trig_seminorm(f, i)


def crossed_seminorm(element: Mapping[int, TrigPoly], k: int, opnorms: OpNorms) -> TwoPiMultiple:
    """``‖Σ f_n u^n‖_k = sup_n ρ_k(n) ‖f_n‖_k``."""
    best = Fraction(0)
    for n, f in element.items():
        best = max(best, rho(k, n, opnorms) * trig_seminorm(f, k).coefficient)
    return TwoPiMultiple(best, k if best else 0)
