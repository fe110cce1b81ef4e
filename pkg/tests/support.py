"""Shared fixtures and independent oracles for the test suite.

The oracles here deliberately avoid the package's matrix builders: they evaluate
the defining formulas directly on value tensors, or use sympy's dense Matrix.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

import numpy as np
import sympy

from hce.cyclic import Cochain, FDAlgebra, complex_numbers, diagonal_algebra, dual_numbers, matrix_algebra
from hce.exactla import QMatrix
from hce.nctorus import AngleScalar, Bicharacter

# algebras -------------------------------------------------------------------


def upper_triangular_2() -> FDAlgebra:
    """Upper triangular 2x2 matrices on the basis e11, e12, e22."""
    entries = [(0, 0, 0, 1), (0, 1, 1, 1), (1, 2, 1, 1), (2, 2, 2, 1)]
    return FDAlgebra.from_structure(3, entries, unit=[1, 0, 1])


def truncated_polynomials(k: int) -> FDAlgebra:
    """``Q[x]/(x^k)`` on the basis 1, x, ..., x^{k-1}."""
    entries = [(i, j, i + j, 1) for i in range(k) for j in range(k) if i + j < k]
    return FDAlgebra.from_structure(k, entries, unit=[1] + [0] * (k - 1))


def c_plus_dual() -> FDAlgebra:
    """``Q ⊕ Q[ε]/(ε²)`` on the basis f, 1', ε."""
    entries = [(0, 0, 0, 1), (1, 1, 1, 1), (1, 2, 2, 1), (2, 1, 2, 1)]
    return FDAlgebra.from_structure(3, entries, unit=[1, 1, 0])


def nonunital_row() -> FDAlgebra:
    """span{e11, e12} inside M_2 (a left ideal with no unit)."""
    entries = [(0, 0, 0, 1), (0, 1, 1, 1)]
    return FDAlgebra.from_structure(2, entries)


def zero_algebra(d: int) -> FDAlgebra:
    return FDAlgebra(d, ())


UNITAL_SEEDS = [
    complex_numbers,
    lambda: diagonal_algebra(2),
    lambda: diagonal_algebra(3),
    dual_numbers,
    upper_triangular_2,
    lambda: truncated_polynomials(3),
    c_plus_dual,
]
NONUNITAL_SEEDS = [nonunital_row, lambda: zero_algebra(2), lambda: dual_numbers(unital=False)]


def random_invertible(rng: random.Random, d: int) -> tuple[list[list[Fraction]], list[list[Fraction]]]:
    while True:
        P = [[Fraction(rng.randint(-2, 2)) for _ in range(d)] for _ in range(d)]
        M = sympy.Matrix(P)
        if M.det() != 0:
            Pinv = [[Fraction(int(x.p), int(x.q)) for x in row] for row in M.inv().tolist()]
            return P, Pinv


def change_basis(A: FDAlgebra, rng: random.Random) -> FDAlgebra:
    """The same algebra in the basis ``f_j = Σ_i P[i][j] e_i`` (associativity is preserved)."""
    d = A.dim
    if d == 0:
        return A
    P, Pinv = random_invertible(rng, d)
    c = A.structure
    new = []
    for a, b in itertools.product(range(d), repeat=2):
        prod = [Fraction(0)] * d  # f_a f_b in e-coordinates
        for i, j in itertools.product(range(d), repeat=2):
            w = P[i][a] * P[j][b]
            if w:
                for k in range(d):
                    if c[i, j, k]:
                        prod[k] += w * c[i, j, k]
        for t in range(d):
            v = sum(Pinv[t][k] * prod[k] for k in range(d))
            if v:
                new.append((a, b, t, v))
    unit = None
    if A.unit is not None:
        unit = [sum(Pinv[t][k] * A.unit[k] for k in range(d)) for t in range(d)]
    return FDAlgebra.from_structure(d, new, unit)


def random_algebra(rng: random.Random, unital: bool | None = None) -> FDAlgebra:
    if unital is None:
        unital = rng.random() < 0.7
    seeds = UNITAL_SEEDS if unital else NONUNITAL_SEEDS
    return change_basis(rng.choice(seeds)(), rng)


def random_cochain(rng: random.Random, d: int, n: int, lo: int = -3, hi: int = 3) -> Cochain:
    values = np.array([Fraction(rng.randint(lo, hi)) for _ in range(d ** (n + 1))], dtype=object)
    return Cochain(n, values.reshape((d,) * (n + 1)))


# oracles ---------------------------------------------------------------------


def _eval(phi: Cochain, vectors) -> Fraction:
    """``φ`` on a tuple of coordinate vectors, expanded multilinearly."""
    total = Fraction(0)
    supports = [[(i, v) for i, v in enumerate(vec) if v] for vec in vectors]
    for combo in itertools.product(*supports):
        coeff = Fraction(1)
        for _, v in combo:
            coeff *= v
        total += coeff * phi.values[tuple(i for i, _ in combo)]
    return total


def oracle_b(A: FDAlgebra, phi: Cochain) -> Cochain:
    """Hochschild differential evaluated on every basis tuple straight from its formula."""
    d, n = A.dim, phi.degree
    out = Cochain.zero(d, n + 1)
    basis = [A.basis_vector(i) for i in range(d)]
    for J in itertools.product(range(d), repeat=n + 2):
        a = [basis[j] for j in J]
        s = Fraction(0)
        for i in range(n + 1):
            args = a[:i] + [A.multiply(a[i], a[i + 1])] + a[i + 2 :]
            s += (-1) ** i * _eval(phi, args)
        s += (-1) ** (n + 1) * _eval(phi, [A.multiply(a[n + 1], a[0])] + a[1 : n + 1])
        out.values[J] = s
    return out


def oracle_B0(A: FDAlgebra, phi: Cochain) -> Cochain:
    d, n = A.dim, phi.degree - 1
    out = Cochain.zero(d, n)
    basis = [A.basis_vector(i) for i in range(d)]
    for J in itertools.product(range(d), repeat=n + 1):
        a = [basis[j] for j in J]
        out.values[J] = _eval(phi, [A.unit] + a) - (-1) ** (n + 1) * _eval(phi, a + [A.unit])
    return out


def oracle_A(phi: Cochain) -> Cochain:
    """``Σ_j (-1)^{nj} φ(a_j, ..., a_{j-1})`` via explicit index rotation."""
    n, d = phi.degree, phi.dim
    out = Cochain.zero(d, n)
    for J in itertools.product(range(d), repeat=n + 1):
        out.values[J] = sum((-1) ** (n * j) * phi.values[J[j:] + J[:j]] for j in range(n + 1))
    return out


def oracle_B(A: FDAlgebra, phi: Cochain) -> Cochain:
    return oracle_A(oracle_B0(A, phi))


def _dense_b(A: FDAlgebra, n: int) -> sympy.Matrix:
    """Matrix of b on C^n assembled column by column from the formula oracle."""
    d = A.dim
    cols = []
    for J in itertools.product(range(d), repeat=n + 1):
        phi = Cochain.zero(d, n)
        phi.values[J] = Fraction(1)
        cols.append([sympy.Rational(v.numerator, v.denominator) for v in oracle_b(A, phi).values.reshape(-1)])
    return sympy.Matrix(cols).T


def _cyclic_space(d: int, n: int) -> sympy.Matrix:
    """Basis (columns) of the fixed space of the signed rotation, from a sympy nullspace."""
    size = d ** (n + 1)
    index = {J: k for k, J in enumerate(itertools.product(range(d), repeat=n + 1))}
    R = sympy.zeros(size, size)
    sign = -1 if n % 2 else 1
    for J, k in index.items():
        # (λφ)(a_0..a_n) = (-1)^n φ(a_n, a_0, ..., a_{n-1})
        R[k, index[(J[-1],) + J[:-1]]] += sign
    N = (R - sympy.eye(size)).nullspace()
    return sympy.Matrix.hstack(*N) if N else sympy.zeros(size, 0)


def oracle_hc_dim(A: FDAlgebra, n: int) -> int:
    """``dim HC^n`` by brute force: cyclic cochains as a fixed space, ranks via sympy."""
    d = A.dim
    L = _cyclic_space(d, n)
    if L.shape[1] == 0:
        return 0
    b_n = _dense_b(A, n)
    z = L.shape[1] - (b_n * L).rank()
    if n == 0:
        return z
    Lm = _cyclic_space(d, n - 1)
    bd = (_dense_b(A, n - 1) * Lm).rank() if Lm.shape[1] else 0
    return z - bd


def oracle_hh_dim(A: FDAlgebra, n: int) -> int:
    z = A.dim ** (n + 1) - _dense_b(A, n).rank()
    return z - (_dense_b(A, n - 1).rank() if n else 0)


def _to_sympy(a: AngleScalar) -> sympy.Expr:
    expr = sympy.Rational(a.rational.numerator, a.rational.denominator)
    for name, c in a.coefficients:
        expr += sympy.Rational(c.numerator, c.denominator) * sympy.Symbol(name)
    return expr


def _sym_theta(eta: Bicharacter) -> sympy.Matrix:
    return sympy.Matrix(3, 3, lambda i, j: _to_sympy(eta.theta[i][j]))


def _is_integer_form(expr: sympy.Expr) -> bool:
    """An affine form in independent irrationals is an integer iff it is a constant integer."""
    expr = sympy.expand(expr)
    if expr.free_symbols:
        poly = sympy.Poly(expr, *sorted(expr.free_symbols, key=str))
        if any(c != 0 for monom, c in poly.as_dict().items() if any(monom)):
            return False
        expr = poly.as_dict().get((0,) * len(poly.gens), 0)
    return sympy.Rational(expr).q == 1


def oracle_radical(eta: Bicharacter, g) -> bool:
    """``Θg ∈ Z^3``, evaluated symbolically with sympy."""
    return all(_is_integer_form(x) for x in _sym_theta(eta) * sympy.Matrix(g))


def oracle_iso(eta: Bicharacter, eta2: Bicharacter, T) -> bool:
    """``Tᵀ Θ T ≡ Θ'`` mod Z on the upper triangle, evaluated symbolically."""
    T = sympy.Matrix(np.asarray(T).tolist())
    D = T.T * _sym_theta(eta) * T - _sym_theta(eta2)
    return all(_is_integer_form(D[i, j]) for i, j in ((0, 1), (0, 2), (1, 2)))


def sym(M: QMatrix) -> sympy.Matrix:
    return sympy.Matrix(M.rows, M.cols, lambda i, j: sympy.Rational(M[i, j].numerator, M[i, j].denominator))


def random_qmatrix(rng: random.Random, rows: int, cols: int, density: float = 0.6, lo: int = -3, hi: int = 3) -> QMatrix:
    entries = []
    for i in range(rows):
        for j in range(cols):
            if rng.random() < density:
                entries.append((i, j, Fraction(rng.randint(lo, hi), rng.choice((1, 1, 2, 3)))))
    return QMatrix.from_sparse((rows, cols), entries)
