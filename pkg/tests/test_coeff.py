"""Galois ring arithmetic, linear algebra over GR(p^N), Hensel lifting."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from brauerlift.coeff import (GR, FieldSpec, rref, rank_mod_p, smith,
                              solve_general, kernel_gr, inv_matrix,
                              hensel_idempotent, idempotent_image_basis,
                              module_invariants, homology_invariants)

SPECS = [
    (FieldSpec(3, (0, 1)), 4),
    (FieldSpec(7, (3, 6, 1)), 4),   # GR(7^4, 2), the psl27 coefficient ring
    (FieldSpec(2, (1, 1, 1)), 3),
]


def rings():
    return [GR(s, N) for s, N in SPECS]


@st.composite
def ring_and_elements(draw, count=3):
    ri = draw(st.integers(0, len(SPECS) - 1))
    spec, N = SPECS[ri]
    R = GR(spec, N)
    elts = [np.array(draw(st.lists(st.integers(0, R.pN - 1),
                                   min_size=R.d, max_size=R.d)),
                     dtype=np.int64) for _ in range(count)]
    return R, elts


@given(ring_and_elements())
@settings(max_examples=120, deadline=None)
def test_ring_axioms(data):
    R, (a, b, c) = data
    assert np.array_equal(R.mul(a, b) % R.pN, R.mul(b, a) % R.pN)
    assert np.array_equal(R.mul(R.mul(a, b), c), R.mul(a, R.mul(b, c)))
    assert np.array_equal(R.mul(a, R.add(b, c)),
                          R.add(R.mul(a, b), R.mul(a, c)))
    assert np.array_equal(R.mul(a, R.one()) % R.pN, a % R.pN)
    assert np.array_equal(R.add(a, R.neg(a)) % R.pN, R.zeros() % R.pN)


@given(ring_and_elements(count=1))
@settings(max_examples=80, deadline=None)
def test_units_invert(data):
    R, (a,) = data
    if not R.is_unit(a):
        return
    inv = R.inv(a)
    assert np.array_equal(R.mul(a, inv) % R.pN, R.one())


def test_matmul_matches_reference():
    R = GR(FieldSpec(3, (1, 0, 1)), 3)
    rng = np.random.default_rng(7)
    A = R.random(rng, 4, 5)
    B = R.random(rng, 5, 3)
    C = R.matmul(A, B)
    for i in range(4):
        for j in range(3):
            acc = R.zeros()
            for k in range(5):
                acc = R.add(acc, R.mul(A[i, k], B[k, j]))
            assert np.array_equal(C[i, j], acc % R.pN)


@pytest.mark.parametrize("R", rings())
def test_smith_diagonalizes(R):
    rng = np.random.default_rng(11)
    A = R.random(rng, 5, 7)
    A[2] = R.int_mul(R.p, A[2])  # force a torsion row
    exps, U, V = smith(R, A)
    D = R.matmul(R.matmul(U, A), V)
    for i in range(5):
        for j in range(7):
            if i == j and i < len(exps):
                want = (R.p ** exps[i]) % R.pN if exps[i] < R.N else 0
                assert D[i, j, 0] % R.pN == want
                assert not np.any(D[i, j, 1:] % R.pN)
            else:
                assert not np.any(D[i, j] % R.pN)
    # transforms are units
    assert rank_mod_p(R, U) == 5 and rank_mod_p(R, V) == 7


@pytest.mark.parametrize("R", rings())
def test_smith_need_flags_agree(R):
    rng = np.random.default_rng(3)
    A = R.random(rng, 6, 4)
    e1, _, _ = smith(R, A)
    e2, U, V = smith(R, A, need_U=False, need_V=False)
    assert e1 == e2 and U is None and V is None


@pytest.mark.parametrize("R", rings())
def test_solve_and_kernel(R):
    rng = np.random.default_rng(5)
    A = R.random(rng, 6, 4)
    x = R.random(rng, 4)
    b = R.matvec(A, x)
    y = solve_general(R, A, b)
    assert y is not None
    assert not np.any((R.matvec(A, y) - b) % R.pN)
    K = kernel_gr(R, A)
    for row in K:
        assert not np.any(R.matvec(A, row) % R.pN)


@pytest.mark.parametrize("R", rings())
def test_rref_preserves_row_span(R):
    rng = np.random.default_rng(9)
    A = R.random(rng, 5, 8)
    E, piv = rref(R, A)
    # every original row solves against the echelon rows and back
    coords = solve_general(R, np.ascontiguousarray(E.transpose(1, 0, 2)),
                           np.ascontiguousarray(A.transpose(1, 0, 2)))
    assert coords is not None
    for i, p in enumerate(piv):
        col = E[:, p] % R.pN
        want = R.zeros(5)
        want[i] = R.one()
        assert np.array_equal(col, want % R.pN)


@pytest.mark.parametrize("R", rings())
def test_inv_matrix(R):
    rng = np.random.default_rng(2)
    while True:
        A = R.random(rng, 4, 4)
        if rank_mod_p(R, A) == 4:
            break
    B = inv_matrix(R, A)
    assert np.array_equal(R.matmul(A, B) % R.pN, R.eye(4))


def test_hensel_convergence_and_uniqueness():
    # idempotents of Z/3^5 x Z/3^5 under componentwise product
    spec = FieldSpec(3, (0, 1))
    R = GR(spec, 5)

    def mul(x, y):
        return R.mul(x, y)

    for seed in [np.array([[1], [0]]), np.array([[0], [1]]),
                 np.array([[1], [1]]), np.array([[0], [0]])]:
        for noise in [0, 3, 6, 2 * 9]:
            e0 = (seed + noise * np.array([[1], [1]])) % R.pN
            if np.any((R.mul(e0, e0) - e0) % R.p):
                continue  # not idempotent mod p: outside hensel's contract
            e = hensel_idempotent(R, e0, mul=mul)
            assert not np.any((mul(e, e) - e) % R.pN)
            # uniqueness: the lift only depends on the mod-p class
            e_ref = hensel_idempotent(R, seed % R.pN, mul=mul)
            if not np.any((e0 - seed) % R.p):
                assert np.array_equal(e, e_ref)


def test_idempotent_image_basis():
    R = GR(FieldSpec(5, (0, 1)), 3)
    e = R.zeros(3, 3)
    e[0, 0, 0] = 1
    e[2, 2, 0] = 1
    cols = idempotent_image_basis(R, e)
    assert cols.shape[1] == 2
    assert not np.any((R.matmul(e, cols) - cols) % R.pN)


def test_module_invariants_oracle():
    # Z/81^2 modulo the rows (3, 0), (0, 9): invariants are 3^1 and 3^2
    R = GR(FieldSpec(3, (0, 1)), 4)
    gens = R.eye(2)
    rel = R.zeros(2, 2)
    rel[0, 0, 0] = 3
    rel[1, 1, 0] = 9
    inv = module_invariants(R, gens, rel)
    assert sorted(inv) == [1, 2]


def test_homology_invariants_oracle():
    # 0 -> Z/81 --3--> Z/81 -> 0 has homology Z/3 at the target, Z/27 kernel
    R = GR(FieldSpec(3, (0, 1)), 4)
    d = R.zeros(1, 1)
    d[0, 0, 0] = 3
    out = homology_invariants(R, d_in=d, d_out=R.zeros(0, 1))
    assert sorted(out) == [1]
