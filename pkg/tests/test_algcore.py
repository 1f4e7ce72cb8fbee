"""Module engine: spin, hom spaces, decomposition, structure algebras."""

import numpy as np
import pytest

from brauerlift.coeff import GR, FieldSpec, rank_mod_p
from brauerlift.algcore import (Mod, spin, generating_seeds, hom_space,
                                submodule, quotient, echelonize_rows,
                                StructAlgebra, primitive_decomposition,
                                lift_decomposition, algebra_radical,
                                min_poly_in_algebra)
from brauerlift.fixtures import load_group
from brauerlift.galgebra import GroupAlgebra, coefficient_field_for


def _regular_mod(name, p, N):
    G = load_group(name)
    A = GroupAlgebra(GR(coefficient_field_for(G, p), N), G)
    gens = [A.left_mult(A.basis_vec(G.index[t])) for t in G.gens]
    return Mod(A.ring, gens, G.order), A


def test_spin_full_module():
    M, A = _regular_mod("s3", 3, 4)
    R = M.ring
    sp = spin(M, [A.basis_vec(0)])
    assert sp.rank == 6


def test_spin_closes_at_full_precision_from_mod_p_seeds():
    # torsion-prone case: random seeds over GR(3^4)[A4]
    M, A = _regular_mod("a4", 3, 4)
    rng = np.random.default_rng(0)
    for _ in range(5):
        seeds, sp = generating_seeds(M, rng)
        assert sp.rank == M.dim
        assert spin(M, seeds).rank == M.dim


def test_hom_space_endos_of_regular():
    # End of the regular module of C7 is the group algebra itself: dim 7
    M, A = _regular_mod("c7", 7, 3)
    rng = np.random.default_rng(1)
    homs = hom_space(M, M, rng=rng)
    assert len(homs) == 7
    R = M.ring
    for h in homs:
        for g in M.gens:
            assert not np.any((R.matmul(h, g) - R.matmul(g, h)) % R.pN)


def test_submodule_quotient_dims():
    M, A = _regular_mod("s3", 3, 2)
    R = M.ring
    # augmentation-invariant line: the all-ones vector
    ones = R.zeros(6)
    ones[:, 0] = 1
    line = submodule(M, ones[None, :, :])
    assert line.dim == 1
    Q = quotient(M, ones[None, :, :])
    assert Q.dim == 5


def _c6_algebra(N):
    R = GR(FieldSpec(7, (0, 1)), N)
    n = 6
    C = R.zeros(n, n, n)
    for i in range(n):
        for j in range(n):
            C[i, j, (i + j) % n, 0] = 1
    one = R.zeros(n)
    one[0, 0] = 1
    return StructAlgebra(R, C, one)


def test_primitive_decomposition_c6_oracle():
    # (F_7)[C6] is split semisimple: exactly 6 primitive idempotents; the
    # oracle is the explicit character formula e_chi = (1/6) sum chi(g^-1) g
    A = _c6_algebra(1)
    R = A.ring
    prims = primitive_decomposition(A, rng=np.random.default_rng(0))
    assert len(prims) == 6
    inv6 = pow(6, -1, 7)
    expected = set()
    for z in range(1, 7):
        if pow(z, 6, 7) != 1:
            continue
        e = tuple((inv6 * pow(z, (-k) % 6, 7)) % 7 for k in range(6))
        expected.add(e)
    got = {tuple(int(v) for v in e[:, 0]) for e in prims}
    assert got == expected


def test_lift_decomposition_exact_orthogonal():
    A = _c6_algebra(3)
    R = A.ring
    prims = primitive_decomposition(A.mod_p(), rng=np.random.default_rng(0))
    lifted = lift_decomposition(A, A.one, prims)
    total = sum(lifted) % R.pN
    assert not np.any((total - A.one) % R.pN)
    for i in range(len(lifted)):
        assert A.is_idempotent(lifted[i])
        for j in range(i + 1, len(lifted)):
            assert not np.any(A.mul(lifted[i], lifted[j]) % R.pN)


def test_radical_of_fp_s3():
    # F_3[S3] has a 4-dimensional radical (checked against the Cartan
    # matrix [[2,1],[1,2]]: dim rad = 6 - dim(top of regular) = 6 - 2)
    G = load_group("s3")
    A = GroupAlgebra(GR(coefficient_field_for(G, 3), 1), G)
    rad = algebra_radical(A, np.random.default_rng(0))
    assert rad.shape[0] == 4


def test_min_poly():
    A = _c6_algebra(1)
    x = A.ring.zeros(6)
    x[1, 0] = 1  # the group generator: order 6, min poly t^6 - 1
    mp = min_poly_in_algebra(A, x)
    assert mp == [6, 0, 0, 0, 0, 0, 1]  # -1 = 6 mod 7
