import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hce.complexes import (
    ChainComplex,
    ChainMap,
    CochainComplex,
    EquivariantComplex,
    FilteredComplex,
    InvariantError,
    betti_numbers,
    check_exact_sequence,
    coker_complex,
    homology,
    ker_subcomplex,
    spectral_pages,
    validate_complex,
)
from hce.crossed import circle_swap, permute_model, random_model, sphere
from hce.cyclic import build_bB_bicomplex, complex_numbers
from hce.exactla import QMatrix, ShapeError, Subspace, image_basis, kernel_basis
from support import random_qmatrix


def sphere3() -> ChainComplex:
    return ChainComplex({0: 1, 3: 1})


def test_validate_accepts_models():
    assert validate_complex(sphere(1))
    assert validate_complex(circle_swap())


def test_validate_reports_boundary_squared_at_degree_2():
    C = ChainComplex({0: 1, 1: 1, 2: 1}, {1: QMatrix.from_rows([[1]]), 2: QMatrix.from_rows([[1]])})
    v = validate_complex(C)
    assert not v and v.degree == 2
    assert v.message == "boundary squared nonzero at degree 2"


def test_validate_reports_non_equivariance():
    C = circle_swap().complex
    bad = EquivariantComplex(C, ChainMap({0: QMatrix.identity(2), 1: QMatrix.from_rows([[0, 1], [1, 0]])}))
    v = validate_complex(bad)
    assert not v and v.degree == 1


def test_validate_shape_mismatch_is_an_error():
    C = ChainComplex({0: 1, 1: 2}, {1: QMatrix.identity(2)})
    with pytest.raises(ShapeError):
        validate_complex(C)


def test_homology_examples():
    assert [homology(sphere3(), n)[0] for n in range(4)] == [1, 0, 0, 1]
    circle = circle_swap().complex
    assert homology(circle, 0)[0] == 1 and homology(circle, 1)[0] == 1
    cone = ChainComplex({0: 1, 1: 1}, {1: QMatrix.identity(1)})
    assert homology(cone, 0)[0] == 0 and homology(cone, 1)[0] == 0
    assert homology(circle, 7)[0] == 0 and homology(circle, -1)[0] == 0


def test_homology_representatives_are_cycles():
    C = circle_swap().complex
    _, reps = homology(C, 1)
    assert (C.d(1) @ reps).is_zero()


def test_ker_subcomplex_examples():
    E = circle_swap()
    K = ker_subcomplex(E)
    assert K.dims == {0: 1, 1: 1} and K.d(1).is_zero()
    assert ker_subcomplex(EquivariantComplex(E.complex, ChainMap.identity(E.complex))).dims == E.complex.dims
    minus = ChainMap({n: QMatrix.identity(d).scale(-1) for n, d in E.complex.dims.items()})
    assert ker_subcomplex(EquivariantComplex(E.complex, minus)).dims == {}


def test_coker_complex_examples():
    E = circle_swap()
    Q = coker_complex(E)
    assert Q.dims == {0: 1, 1: 1} and Q.d(1).is_zero()
    assert coker_complex(EquivariantComplex(E.complex, ChainMap.identity(E.complex))).dims == E.complex.dims
    S = sphere3()
    assert coker_complex(EquivariantComplex(S, ChainMap({}))).dims == {}


def test_exact_sequence_examples():
    I = QMatrix.identity(1)
    ok = check_exact_sequence([QMatrix.zeros(1, 0), I, QMatrix.zeros(0, 1)])
    assert ok and ok.defects == (0, 0)
    bad = check_exact_sequence([QMatrix.zeros(1, 0), QMatrix.zeros(1, 1), QMatrix.zeros(0, 1)])
    assert not bad and bad.defects == (1, 1)
    inj = QMatrix.from_rows([[1], [0]])
    proj = QMatrix.from_rows([[0, 1]])
    assert check_exact_sequence([QMatrix.zeros(1, 0), inj, proj, QMatrix.zeros(0, 1)])


def test_exact_sequence_errors():
    with pytest.raises(ShapeError):
        check_exact_sequence([QMatrix.identity(2), QMatrix.identity(3)])
    with pytest.raises(InvariantError):
        check_exact_sequence([QMatrix.identity(1), QMatrix.identity(1)])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_kernel_image_factorisation_is_exact(seed):
    rng = random.Random(seed)
    f = random_qmatrix(rng, rng.randint(1, 5), rng.randint(1, 5))
    K = kernel_basis(f).basis
    Im = image_basis(f).basis
    # 0 -> ker f -> V -> W -> W / im f -> 0
    from hce.exactla import Subquotient

    Q = Subquotient(Subspace.whole(f.rows), image_basis(f))
    proj = Q.coordinates(QMatrix.identity(f.rows)) if f.rows else QMatrix.zeros(0, 0)
    maps = [QMatrix.zeros(K.cols, 0), K, f, proj, QMatrix.zeros(0, Q.dim)]
    assert check_exact_sequence(maps)
    assert Im.cols == f.rank()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_euler_characteristic(seed):
    E = random_model(random.Random(seed))
    C = E.complex
    betti = betti_numbers(C)
    assert C.euler_characteristic() == sum((-1) ** n * b for n, b in betti.items())


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_ker_coker_homology_is_basis_independent(seed):
    rng = random.Random(seed)
    E = random_model(rng)
    F = permute_model(E, rng)
    for n in E.complex.degrees():
        assert homology(ker_subcomplex(E), n)[0] == homology(ker_subcomplex(F), n)[0]
        assert homology(coker_complex(E), n)[0] == homology(coker_complex(F), n)[0]


def _single_step_filtered(C: CochainComplex) -> FilteredComplex:
    return FilteredComplex(C, {n: [Subspace.whole(C.dim(n))] for n in C.dims})


def test_trivial_filtration_on_acyclic_complex():
    C = CochainComplex({0: 1, 1: 1}, {0: QMatrix.identity(1)})
    pages = spectral_pages(_single_step_filtered(C), 3)
    assert all(v == 0 for v in pages.pages[1].values())
    assert all(v == 0 for v in pages.e_infinity.values())
    assert pages.pages[0][(0, 0)] == 1


def test_zero_differential_pages_are_constant():
    C = CochainComplex({0: 2, 1: 3, 2: 1})
    F = FilteredComplex(
        C,
        {n: [Subspace.whole(d), Subspace.span(QMatrix.identity(d).select_columns([0]))] for n, d in C.dims.items()},
    )
    pages = spectral_pages(F, 3)
    assert all(p == pages.pages[0] for p in pages.pages)
    assert pages.e_infinity == pages.pages[0]
    assert pages.stabilized_at == 0


def test_filtration_check_detects_violation():
    C = CochainComplex({0: 1, 1: 1}, {0: QMatrix.identity(1)})
    F = FilteredComplex(C, {0: [Subspace.whole(1), Subspace.whole(1)], 1: [Subspace.whole(1), Subspace.zero(1)]})
    assert not F.check()


def test_bicomplex_of_C_concentrates_in_even_degree():
    F = build_bB_bicomplex(complex_numbers(), (4, 4)).totalize("n")
    assert F.check()
    pages = spectral_pages(F, 4, degrees=range(0, 5))
    assert pages.stabilized_at is not None
    by_degree = {}
    for (p, q), v in pages.e_infinity.items():
        by_degree[p + q] = by_degree.get(p + q, 0) + v
    # determined total degrees only
    det = [N for N in range(5) if F.is_determined(N)]
    assert det == [0, 1, 2, 3]
    assert [by_degree[N] for N in det] == [1, 0, 1, 0]
    # the E_infinity row of H^2 splits off one class in filtration 1: S(HC^0) inside HC^2
    assert pages.e_infinity[(1, 1)] == 1 and pages.e_infinity[(0, 2)] == 0
    assert (4 - 0, 0) in pages.undetermined


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_pages_weakly_decrease(seed):
    from support import random_algebra

    A = random_algebra(random.Random(seed), unital=True)
    if A.dim > 2:
        return
    F = build_bB_bicomplex(A, (3, 3)).totalize("n")
    pages = spectral_pages(F, 3, degrees=range(0, 4))
    for r in range(len(pages.pages) - 1):
        for key, v in pages.pages[r + 1].items():
            assert v <= pages.pages[r][key]
