import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hce.nctorus import (
    HALF,
    ZERO,
    AngleScalar,
    BasisMismatchError,
    Bicharacter,
    Coefficient,
    TrigPoly,
    TwistedElement,
    TwoPiMultiple,
    cocycle,
    crossed_seminorm,
    delta,
    eta_from_rotation,
    iso_check,
    iso_search,
    lattice_seminorm,
    nondegenerate,
    rho,
    rotate_trig,
    rotation_invariance_check,
    rotation_opnorms,
    scalar_phase,
    transform,
    trig_seminorm,
    twisted_mul,
)
from support import oracle_iso, oracle_radical

seeds = st.integers(0, 100_000)
w1, w2, w3, w4 = (AngleScalar.symbol(n) for n in ("w1", "w2", "w3", "w4"))


def independent_rotation_pair():
    """Rotation bicharacters for angle pairs (w1, w2) and (w3, w4), all four independent."""
    return eta_from_rotation(w1, w2), eta_from_rotation(w3, w4)


def random_angle(rng: random.Random, names=("w1", "w2")) -> AngleScalar:
    rational = Fraction(rng.randint(-3, 3), rng.choice((1, 2, 3, 4)))
    coeffs = {n: rng.choice((0, 0, 1, -1, 2)) for n in names}
    return AngleScalar.of(rational, **coeffs)


def random_bicharacter(rng: random.Random) -> Bicharacter:
    return Bicharacter.from_upper({p: random_angle(rng) for p in ((0, 1), (0, 2), (1, 2))}, ("w1", "w2"))


def random_unimodular(rng: random.Random, steps: int = 4) -> list[list[int]]:
    T = [[int(i == j) for j in range(3)] for i in range(3)]
    for _ in range(steps):
        i, j = rng.sample(range(3), 2)
        s = rng.choice((1, -1))
        for r in range(3):
            T[r][j] += s * T[r][i]
    if rng.random() < 0.5:
        k = rng.randrange(3)
        for r in range(3):
            T[r][k] = -T[r][k]
    return T


# angles and bicharacters -----------------------------------------------------------


def test_angle_arithmetic_and_reduction():
    a = AngleScalar.of("5/4", w1=2)
    assert a.mod1() == AngleScalar.of("1/4", w1=2)
    assert (a - a) == ZERO
    assert (a * 2).coefficient("w1") == 4
    assert AngleScalar.of(3).is_integer() and not w1.is_integer()
    assert AngleScalar.of("1/3", w1=1).congruent(AngleScalar.of("-2/3", w1=1))
    assert not w1.congruent(w1 + HALF)


def test_bicharacter_is_reduced_and_antisymmetric():
    eta = Bicharacter.from_upper({(0, 1): AngleScalar.of("7/3"), (0, 2): w1})
    assert eta[0, 1] == AngleScalar.of("1/3")
    assert eta[1, 0] == AngleScalar.of("2/3")
    assert eta[2, 0] == (-w1).mod1()
    with pytest.raises(ValueError):
        Bicharacter.from_upper({(1, 0): w1})
    with pytest.raises(ValueError):
        Bicharacter(((ZERO, w1, ZERO), (w1, ZERO, ZERO), (ZERO, ZERO, ZERO)))
    with pytest.raises(BasisMismatchError):
        Bicharacter.from_upper({(0, 1): w3}, ("w1", "w2"))


def test_eta_from_rotation_entries():
    eta = eta_from_rotation(w1, w2)
    assert eta[0, 1] == ZERO
    assert eta[0, 2] == (-w1).mod1() and eta[1, 2] == (-w2).mod1()
    assert eta[2, 0] == w1 and eta[2, 1] == w2


# nondegeneracy ----------------------------------------------------------------------


def test_independent_rotations_are_nondegenerate():
    a, b = independent_rotation_pair()
    assert nondegenerate(a) and nondegenerate(b)
    assert nondegenerate(a).witness is None


def test_zero_form_is_degenerate():
    v = nondegenerate(Bicharacter.from_upper({}))
    assert not v and v.witness == (1, 0, 0)


def test_single_irrational_is_degenerate():
    v = nondegenerate(Bicharacter.from_upper({(0, 1): w1}))
    assert not v and v.witness == (0, 0, 1)


def test_repeated_irrational_is_degenerate():
    v = nondegenerate(eta_from_rotation(w1, w1))
    assert not v and v.witness == (1, -1, 0)
    assert not nondegenerate(eta_from_rotation(ZERO, ZERO))


def test_rational_torsion_needs_congruences():
    # θ = 1/2 everywhere: g is radical iff Θg is integral, e.g. g = (1, 1, 1) but not (1, 0, 0)
    half = AngleScalar.of("1/2")
    eta = Bicharacter.from_upper({(0, 1): half, (0, 2): half, (1, 2): half})
    v = nondegenerate(eta)
    assert not v
    assert oracle_radical(eta, v.witness)
    assert not oracle_radical(eta, (1, 0, 0))


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_nondegeneracy_agrees_with_bruteforce(seed):
    eta = random_bicharacter(random.Random(seed))
    v = nondegenerate(eta)
    box = [g for g in itertools.product(range(-3, 4), repeat=3) if any(g)]
    found = [g for g in box if oracle_radical(eta, g)]
    if v:
        assert not found
    else:
        assert any(v.witness) and oracle_radical(eta, v.witness)
        # the witness comes from a reduced basis, so it stays close to the shortest radical vector
        if found:
            assert sum(map(abs, v.witness)) <= 2 * min(sum(map(abs, g)) for g in found)


# isomorphism -------------------------------------------------------------------------


def test_iso_check_examples():
    eta = eta_from_rotation(w1, w2)
    I = np.eye(3, dtype=int)
    assert iso_check(eta, eta, I)
    flip = [[1, 0, 0], [0, 1, 0], [0, 0, -1]]
    assert iso_check(eta, eta_from_rotation(-w1, -w2), flip)
    shifted = Bicharacter.from_upper({(0, 1): ZERO, (0, 2): -w1 + AngleScalar.of(1), (1, 2): -w2})
    assert iso_check(eta, shifted, I)
    with pytest.raises(ValueError):
        iso_check(eta, eta, [[2, 0, 0], [0, 1, 0], [0, 0, 1]])


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_transform_matches_sympy(seed):
    rng = random.Random(seed)
    eta = random_bicharacter(rng)
    T = random_unimodular(rng)
    assert iso_check(eta, transform(eta, T), T)
    assert oracle_iso(eta, transform(eta, T), T)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_iso_check_composes(seed):
    rng = random.Random(seed)
    eta = random_bicharacter(rng)
    T, U = random_unimodular(rng), random_unimodular(rng)
    eta1 = transform(eta, T)
    eta2 = transform(eta1, U)
    assert iso_check(eta, eta1, T) and iso_check(eta1, eta2, U)
    assert iso_check(eta, eta2, (np.array(T) @ np.array(U)).tolist())


def test_iso_search_identity_first():
    eta = eta_from_rotation(w1, w2)
    assert np.array_equal(iso_search(eta, eta, 1), np.eye(3, dtype=int))


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_iso_search_recovers_planted_transform(seed):
    rng = random.Random(seed)
    eta = random_bicharacter(rng)
    while True:
        T0 = np.array(random_unimodular(rng, steps=2))
        if np.abs(T0).max() <= 1:
            break
    target = transform(eta, T0.tolist())
    T = iso_search(eta, target, 1)
    assert T is not None
    assert iso_check(eta, target, T) and oracle_iso(eta, target, T)


def test_iso_search_reports_nothing_for_inequivalent_bases():
    eta = eta_from_rotation(w1, w2)
    # the w2 component has content 1 in one and content 2 in the other, a GL(3, Z) invariant
    assert iso_search(eta, eta_from_rotation(w1, w2 * 2), 2) is None
    assert iso_search(eta, eta_from_rotation(w1, w3), 2) is None
    with pytest.raises(ValueError):
        iso_search(eta, eta, 0)


def test_independent_rotations_are_not_found_isomorphic():
    a, b = independent_rotation_pair()
    assert iso_search(a, b, 2) is None


def test_rotation_by_combined_angle_is_isomorphic():
    # (w1, w1 + w2) is a unimodular change of the rotation angles (w1, w2)
    a, b = eta_from_rotation(w1, w2), eta_from_rotation(w1, w1 + w2)
    T = iso_search(a, b, 1)
    assert T is not None and oracle_iso(a, b, T)


# twisted multiplication ---------------------------------------------------------------


def test_generators_commute_up_to_eta():
    eta = eta_from_rotation(w1, w2)
    for i, j in itertools.permutations(range(1, 4), 2):
        lhs = twisted_mul(delta(i), delta(j), eta)
        rhs = scalar_phase(twisted_mul(delta(j), delta(i), eta), eta[i - 1, j - 1])
        assert lhs == rhs


def test_u2_u1_relation():
    eta = eta_from_rotation(w1, w2)
    x = twisted_mul(delta(2), delta(1), eta)
    assert x == TwistedElement.monomial((1, 1, 0), 1, eta[1, 0])


def test_delta_zero_is_unit():
    eta = eta_from_rotation(w1, w2)
    one = TwistedElement.monomial((0, 0, 0))
    x = TwistedElement({(1, -2, 3): Coefficient(Fraction(2, 3), w1), (0, 1, 1): 5})
    assert twisted_mul(one, x, eta) == x == twisted_mul(x, one, eta)


def test_generator_triple_is_associative():
    eta = eta_from_rotation(w1, w2)
    a, b, c = delta(1), delta(2), delta(3)
    assert twisted_mul(twisted_mul(a, b, eta), c, eta) == twisted_mul(a, twisted_mul(b, c, eta), eta)


def test_twisted_mul_rejects_foreign_phases():
    eta = eta_from_rotation(w1, w2)
    with pytest.raises(BasisMismatchError):
        twisted_mul(TwistedElement.monomial((1, 0, 0), 1, w3), delta(1), eta)


def test_opposite_phases_cancel_and_others_refuse():
    x = TwistedElement.monomial((1, 0, 0), 1, w1)
    assert (x + x.rotate_phase(HALF)).is_zero()
    with pytest.raises(ValueError):
        x + TwistedElement.monomial((1, 0, 0), 1, w2)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_associativity_on_random_monomials(seed):
    rng = random.Random(seed)
    eta = random_bicharacter(rng)

    def mono():
        point = tuple(rng.randint(-3, 3) for _ in range(3))
        return TwistedElement.monomial(point, Fraction(rng.randint(1, 4), rng.randint(1, 3)), random_angle(rng))

    x, y, z = mono(), mono(), mono()
    assert twisted_mul(twisted_mul(x, y, eta), z, eta) == twisted_mul(x, twisted_mul(y, z, eta), eta)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_cocycle_identity(seed):
    rng = random.Random(seed)
    eta = random_bicharacter(rng)
    a, b, c = (tuple(rng.randint(-4, 4) for _ in range(3)) for _ in range(3))
    ab = tuple(p + q for p, q in zip(a, b))
    bc = tuple(p + q for p, q in zip(b, c))
    assert (cocycle(eta, a, b) + cocycle(eta, ab, c)).congruent(cocycle(eta, b, c) + cocycle(eta, a, bc))


# seminorms -------------------------------------------------------------------------------


def test_lattice_seminorm_examples():
    assert lattice_seminorm(TwistedElement.monomial((0, 0, 0)), 5) == 1
    assert lattice_seminorm(delta(1), 2) == 2
    assert lattice_seminorm(TwistedElement.monomial((1, 1, 0), "1/2"), 2) == Fraction(5, 2)
    assert lattice_seminorm(TwistedElement(), 3) == 0


@settings(max_examples=80, deadline=None)
@given(seeds)
def test_lattice_seminorm_is_a_seminorm(seed):
    rng = random.Random(seed)

    def element():
        # one common phase so sums are always representable
        return TwistedElement(
            {tuple(rng.randint(-3, 3) for _ in range(3)): Fraction(rng.randint(1, 5), rng.randint(1, 3)) for _ in range(3)}
        )

    x, y = element(), element()
    k = rng.randint(0, 3)
    r = Fraction(rng.randint(1, 6), rng.randint(1, 4))
    assert lattice_seminorm(x.scale(r), k) == r * lattice_seminorm(x, k)
    assert lattice_seminorm(x + y, k) <= lattice_seminorm(x, k) + lattice_seminorm(y, k)


def test_rho_examples():
    assert rho(2, 1, rotation_opnorms) == 9
    assert rho(1, 0, {(0, 1): 1}) == 1
    assert rho(1, 1, lambda t, i: 2 ** abs(t)) == 5
    with pytest.raises(KeyError):
        rho(1, 1, {(0, 1): 1})


@pytest.mark.parametrize("k", range(1, 5))
def test_rho_rotation_formula(k):
    for n in range(11):
        assert rho(k, n, rotation_opnorms) == (1 + 2 * n) ** k
        assert rho(k, -n, rotation_opnorms) == (1 + 2 * n) ** k


def test_trig_seminorm_examples():
    one = TrigPoly.monomial((0, 0))
    e1 = TrigPoly.monomial((1, 0))
    assert trig_seminorm(one, 0) == TwoPiMultiple(1, 0)
    assert all(trig_seminorm(one, i).coefficient == 0 for i in range(1, 4))
    assert trig_seminorm(e1, 1) == TwoPiMultiple(1, 1)
    assert math.isclose(float(trig_seminorm(e1, 1)), 2 * math.pi)
    assert trig_seminorm(e1, 0) == TwoPiMultiple(1, 0)
    # order 2 tuples (1,1), (1,2), (2,2) on e^{2πi(2x1 + 3x2)}: 4 + 6 + 9
    assert trig_seminorm(TrigPoly.monomial((2, 3)), 2) == TwoPiMultiple(19, 2)
    assert str(TwoPiMultiple(3, 1)) == "3·(2π)"


def test_rotation_invariance_examples():
    e1 = TrigPoly.monomial((1, 0))
    for i in range(3):
        assert rotation_invariance_check(e1, (w1, w2), i)
        assert rotation_invariance_check(TrigPoly(), (w1, w2), i)
    rotated = rotate_trig(e1, (w1, w2))
    assert rotated.terms[(1, 0)].phase == w1.mod1()


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_rotation_invariance_random(seed):
    rng = random.Random(seed)
    f = TrigPoly(
        {
            (rng.randint(-4, 4), rng.randint(-4, 4)): Coefficient(Fraction(rng.randint(1, 9), rng.randint(1, 4)), random_angle(rng))
            for _ in range(3)
        }
    )
    theta = (random_angle(rng, ("w1",)), random_angle(rng, ("w2",)))
    for i in range(3):
        assert rotation_invariance_check(f, theta, i)


def test_crossed_seminorm_examples():
    one = TrigPoly.monomial((0, 0))
    e1 = TrigPoly.monomial((1, 0))
    assert crossed_seminorm({0: one}, 0, rotation_opnorms) == TwoPiMultiple(1, 0)
    # a constant has vanishing derivatives, so only order 0 sees it
    assert crossed_seminorm({0: one}, 1, rotation_opnorms).coefficient == 0
    assert crossed_seminorm({1: e1}, 1, rotation_opnorms) == TwoPiMultiple(3, 1)
    both = crossed_seminorm({0: TrigPoly.monomial((5, 0)), 1: e1}, 1, rotation_opnorms)
    assert both == TwoPiMultiple(5, 1)
