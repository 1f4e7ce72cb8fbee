"""Lifting units and idempotents along surjections of finite-rank
GR(p^N)-algebras, and Burnside-level witnesses for splittings of
permutation modules.

All outputs are certified exactly at the working precision: lifted units
come with two-sided inverses, lifted idempotents square to themselves and
hit their targets on the nose.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .coeff import (GR, FieldSpec, rank_mod_p, solve_general, kernel_gr,
                    inv_matrix)
from .algcore import (StructAlgebra, Mod, algebra_radical, CornerData,
                      intersect_row_spans, primitive_decomposition,
                      lift_decomposition, echelonize_rows)
from .modrep import module_iso
from .groups import PermGroup, GSet
from .burnside import DiagonalBurnside, diagonal_burnside


class NotSurjective(Exception):
    pass


class NotAUnit(Exception):
    pass


class NotPrimitive(Exception):
    pass


class NotConjugate(Exception):
    """Carries the failed isomorphism test as evidence."""

    def __init__(self, msg: str, evidence=None):
        super().__init__(msg)
        self.evidence = evidence or {}


@dataclass
class AlgebraHom:
    """An algebra map f: src -> dst given by the images of the basis
    (mat[i] = f(e_i) in dst coordinates)."""
    src: StructAlgebra
    dst: StructAlgebra
    mat: np.ndarray  # (src.dim, dst.dim, d)

    def apply(self, v):
        return self.src.ring.vecmat(v % self.src.ring.pN, self.mat)


def algebra_hom(src: StructAlgebra, dst: StructAlgebra, mat,
                rng=None, samples: int = 40) -> AlgebraHom:
    """Wrap a coefficient matrix as a homomorphism; multiplicativity is
    sampled on random basis pairs, unitality is checked exactly."""
    R = src.ring
    f = AlgebraHom(src, dst, mat % R.pN)
    if np.any((f.apply(src.one) - dst.one) % R.pN != 0):
        raise ValueError("map does not preserve the unit")
    if rng is None:
        rng = np.random.default_rng(0)
    for _ in range(samples):
        i = int(rng.integers(src.dim))
        j = int(rng.integers(src.dim))
        lhs = f.apply(src.mul(src.basis_vec(i), src.basis_vec(j)))
        rhs = dst.mul(f.mat[i], f.mat[j])
        if np.any((lhs - rhs) % R.pN != 0):
            raise ValueError("map is not multiplicative")
    return f


@dataclass
class LiftWitness:
    idempotent: np.ndarray
    unit: Optional[np.ndarray] = None
    steps: list = field(default_factory=list)


def is_unit_element(alg: StructAlgebra, a) -> bool:
    return rank_mod_p(alg.ring, alg.left_mult(a)) == alg.dim


def inverse_of(alg: StructAlgebra, a):
    """Two-sided inverse of a unit."""
    R = alg.ring
    M = inv_matrix(R, alg.left_mult(a))
    v = R.matvec(M, alg.one)
    if np.any((alg.mul(v, a) - alg.one) % R.pN != 0):
        raise NotAUnit("element has no two-sided inverse")
    return v % R.pN


def lift_unit(f: AlgebraHom, b, rng=None, max_tries: int = 500):
    """A unit a of the source with f(a) = b exactly.  Any exact preimage
    differs from a by a kernel element, and the fiber of a unit always
    contains one; random kernel shifts find it."""
    R = f.src.ring
    if rank_mod_p(R, f.mat) < f.dst.dim:
        raise NotSurjective("map is not onto at precision 1")
    if not is_unit_element(f.dst, b):
        raise NotAUnit("target is not invertible mod p")
    if rng is None:
        rng = np.random.default_rng(0)
    A = np.ascontiguousarray(f.mat.transpose(1, 0, 2))
    a0 = solve_general(R, A, b % R.pN)
    if a0 is None:
        raise NotSurjective("target has no exact preimage")
    if is_unit_element(f.src, a0):
        return a0 % R.pN
    K = kernel_gr(R, A)
    for _ in range(max_tries):
        cand = (a0 + R.vecmat(R.random(rng, K.shape[0]), K)) % R.pN
        if is_unit_element(f.src, cand):
            if np.any((f.apply(cand) - b) % R.pN != 0):
                raise ArithmeticError("kernel shift left the fiber")
            return cand
    raise ArithmeticError("no unit found in the preimage fiber")


def _ideal_module(alg: StructAlgebra, e):
    """The left ideal (alg)e as a module over the basis left
    multiplications.  Returns (module, basis rows, pivot columns)."""
    R = alg.ring
    img = R.matmul(alg.right_mult(e), R.eye(alg.dim))
    rows, piv = echelonize_rows(R, np.ascontiguousarray(img.transpose(1, 0, 2)))
    Et = np.ascontiguousarray(rows.transpose(1, 0, 2))
    gens = []
    for i in range(alg.dim):
        cols = R.matmul(alg.left_mult(alg.basis_vec(i)), Et)
        gens.append(np.ascontiguousarray(cols[list(piv)]))
    return Mod(R, gens, rows.shape[0]), rows, list(piv)


def conjugating_unit(alg: StructAlgebra, i, j, rng=None):
    """A unit u with u j u^-1 = i, built from module isomorphisms between
    the left ideals of i, j and of their complements, or NotConjugate."""
    R = alg.ring
    if rng is None:
        rng = np.random.default_rng(0)
    for e in (i, j):
        if not alg.is_idempotent(e):
            raise ValueError("inputs must be idempotent")
    if not np.any((i - j) % R.pN != 0):
        return alg.one.copy()
    ic = (alg.one - i) % R.pN
    jc = (alg.one - j) % R.pN
    Mi, Bi, pvi = _ideal_module(alg, i)
    Mj, Bj, pvj = _ideal_module(alg, j)
    Mic, Bic, pvic = _ideal_module(alg, ic)
    Mjc, Bjc, pvjc = _ideal_module(alg, jc)
    if Mi.dim != Mj.dim or Mic.dim != Mjc.dim:
        raise NotConjugate("ideal dimensions differ",
                           {"dims": (Mi.dim, Mj.dim, Mic.dim, Mjc.dim)})
    T = module_iso(Mi, Mj, rng)
    if T is None:
        raise NotConjugate("left ideals are not isomorphic",
                           {"failed": "ideal", "dims": (Mi.dim, Mj.dim)})
    Tc = module_iso(Mic, Mjc, rng)
    if Tc is None:
        raise NotConjugate("complement ideals are not isomorphic",
                           {"failed": "complement", "dims": (Mic.dim, Mjc.dim)})
    # u = phi(i) + psi(1-i), inverse from the inverse isomorphisms
    c = R.vecmat(R.matvec(T, (i % R.pN)[pvi]), Bj)
    d = R.vecmat(R.matvec(Tc, (ic % R.pN)[pvic]), Bjc)
    cp = R.vecmat(R.matvec(inv_matrix(R, T), (j % R.pN)[pvj]), Bi)
    dp = R.vecmat(R.matvec(inv_matrix(R, Tc), (jc % R.pN)[pvjc]), Bic)
    u = (c + d) % R.pN
    v = (cp + dp) % R.pN
    one = alg.one % R.pN
    if np.any((alg.mul(u, v) - one) % R.pN != 0) or \
       np.any((alg.mul(v, u) - one) % R.pN != 0):
        raise ArithmeticError("conjugator is not a two-sided unit")
    if np.any((alg.mul(alg.mul(u, j), v) - i) % R.pN != 0):
        raise ArithmeticError("conjugation identity failed")
    return u


def is_primitive(alg: StructAlgebra, e, rng=None) -> bool:
    """Corner test: e(alg)e modulo its radical is one-dimensional."""
    R = alg.ring
    if rng is None:
        rng = np.random.default_rng(0)
    if not np.any(e % R.pN != 0):
        return False
    algp = alg.mod_p()
    R1 = algp.ring
    corner = CornerData(algp, e % R1.p)
    rad = algebra_radical(algp, rng)
    if rad.shape[0]:
        crad = intersect_row_spans(R1, corner.rows, rad)
    else:
        crad = R1.zeros(0, algp.dim)
    return corner.rows.shape[0] - crad.shape[0] == 1


def lift_primitive_idempotent(f: AlgebraHom, eprime, rng=None) -> LiftWitness:
    """Lift a primitive idempotent along a surjection: decompose 1 in the
    source, push the pieces forward, match by isomorphism of left ideals,
    and conjugate into position."""
    R = f.src.ring
    if rng is None:
        rng = np.random.default_rng(0)
    if rank_mod_p(R, f.mat) < f.dst.dim:
        raise NotSurjective("map is not onto at precision 1")
    if not f.dst.is_idempotent(eprime):
        raise ValueError("target is not idempotent")
    if not is_primitive(f.dst, eprime, rng):
        raise NotPrimitive("target corner modulo radical is not 1-dimensional")
    prims = primitive_decomposition(f.src.mod_p(), rng=rng)
    lifted = lift_decomposition(f.src, f.src.one, prims)
    steps = [f"decomposed 1 into {len(lifted)} primitive idempotents"]
    evidence = []
    for ei in lifted:
        hi = f.apply(ei) % R.pN
        if not np.any(hi != 0):
            continue
        if not np.any((hi - eprime) % R.pN != 0):
            steps.append("image matched the target directly")
            return LiftWitness(ei % R.pN, None, steps)
        try:
            uprime = conjugating_unit(f.dst, eprime % R.pN, hi, rng)
        except NotConjugate as exc:
            evidence.append(exc.evidence)
            continue
        u = lift_unit(f, uprime, rng)
        uinv = inverse_of(f.src, u)
        e = f.src.mul(f.src.mul(u, ei), uinv) % R.pN
        if not f.src.is_idempotent(e):
            raise ArithmeticError("conjugated lift is not idempotent")
        if np.any((f.apply(e) - eprime) % R.pN != 0):
            raise ArithmeticError("conjugated lift misses the target")
        steps.append("matched a summand by ideal isomorphism and conjugated")
        return LiftWitness(e, u, steps)
    raise ArithmeticError(f"no summand matches the target: {evidence}")


# ---------------------------------------------------------------------------
# Burnside-level witnesses over the completed diagonal basis

@dataclass
class BurnsideElem:
    """An element of the completed double Burnside algebra of G on the
    regular G x G^op set, as coefficients on the diagonal span basis."""
    algebra: DiagonalBurnside
    coeffs: np.ndarray  # (dim, 1), entries mod p^N
    precision: int

    def linearized(self):
        """The central element of (Z/p^N)[G] this span acts by."""
        pN = self.algebra.p ** self.precision
        z = (self.coeffs[:, 0] @ self.algebra.central) % pN
        return z[:, None]


def burnside_algebra(db: DiagonalBurnside, precision: int) -> StructAlgebra:
    R = GR(FieldSpec(db.p, (0, 1)), precision)
    n = db.dim
    C = db.struct[..., None] % R.pN
    # the identity span is found by solving, not guessed: completion can
    # move it away from the trivial-stabilizer entry
    A = np.ascontiguousarray(C.transpose(1, 2, 0, 3).reshape(n * n, n, 1))
    one = solve_general(R, A, R.eye(n).reshape(n * n, 1))
    if one is None:
        raise AssertionError("completed basis has no left identity")
    alg = StructAlgebra(R, C, one)
    for j in range(n):
        ej = alg.basis_vec(j)
        if np.any((alg.mul(ej, one) - ej) % R.pN != 0):
            raise AssertionError("left identity is not two-sided")
    return alg


def _central_conv(G: PermGroup, pN: int, a, b):
    """Product of two central elements of (Z/p^N)[G], coefficient vectors."""
    mt = G.mul_table()
    bperm = b[:, 0][mt[G.inv_ids.astype(np.int64)]]
    return ((a[:, 0] @ bperm) % pN)[:, None]


def _as_central_vector(G: PermGroup, e0, pN: int):
    z = np.asarray(e0, dtype=np.int64)
    if z.ndim == 3:
        z = z[:, :, 0]
    if z.ndim == 2 and z.shape == (G.order, G.order):
        # an equivariant matrix is right multiplication by z = (matrix) 1
        z = z[:, 0]
    if z.ndim == 2 and z.shape[1] == 1:
        z = z[:, 0]
    if z.shape != (G.order,):
        raise ValueError("idempotent must be a central vector or an "
                         "equivariant matrix over the group")
    return (z % pN)[:, None]


def burnside_witness(G: PermGroup, X: Optional[GSet], e0, p: int,
                     precision: int = 4, db=None, rng=None) -> BurnsideElem:
    """An idempotent in the completed double Burnside algebra whose
    linearization is e0, for X the regular G x G^op set.  Built by lifting
    the full primitive decomposition of the identity span and keeping the
    summands that land inside e0."""
    if X is not None and X.n != G.order:
        raise ValueError("only the regular set is supported")
    if rng is None:
        rng = np.random.default_rng(0)
    if db is None:
        db = diagonal_burnside(G, p)
    CB = burnside_algebra(db, precision)
    R = CB.ring
    Lmat = db.central[..., None] % R.pN
    ncls = len(G.conjugacy_classes())
    if rank_mod_p(R, Lmat) < ncls:
        raise NotSurjective("linearization is not onto the center mod p")
    z0 = _as_central_vector(G, e0, R.pN)
    if np.any((_central_conv(G, R.pN, z0, z0) - z0) % R.pN != 0):
        raise ValueError("e0 is not idempotent")
    prims = primitive_decomposition(CB.mod_p(), rng=rng)
    lifted = lift_decomposition(CB, CB.one, prims)
    total = R.zeros(db.dim)
    chosen = R.zeros(G.order)
    for ei in lifted:
        hi = R.vecmat(ei, Lmat)
        if not np.any(hi % R.pN != 0):
            continue
        prod = _central_conv(G, R.pN, hi, z0)
        if not np.any((prod - hi) % R.pN != 0):
            total = (total + ei) % R.pN
            chosen = (chosen + hi) % R.pN
        elif np.any(prod % R.pN != 0):
            # a lifted primitive meets e0 only partially: outside the scope
            # of the splitting statement
            raise ArithmeticError("idempotent does not split the lifted family")
    if np.any((chosen - z0) % R.pN != 0):
        raise ArithmeticError("selected summands do not rebuild e0")
    if not CB.is_idempotent(total):
        raise ArithmeticError("witness is not idempotent")
    return BurnsideElem(db, total % R.pN, precision)


def central_idempotents_zp(G: PermGroup, p: int, precision: int = 4,
                           rng=None):
    """Primitive idempotents of the center of (Z/p^N)[G] (the block
    idempotents with rational coefficients), as vectors over the group."""
    if rng is None:
        rng = np.random.default_rng(0)
    R = GR(FieldSpec(p, (0, 1)), precision)
    classes = G.conjugacy_classes()
    k = len(classes)
    sums = np.zeros((k, G.order), dtype=np.int64)
    for ci, cls in enumerate(classes):
        sums[ci, list(cls)] = 1
    C = R.zeros(k, k, k)
    for i in range(k):
        for j in range(k):
            prod = _central_conv(G, R.pN, sums[i][:, None], sums[j][:, None])
            for l, cls in enumerate(classes):
                C[i, j, l, 0] = prod[cls[0], 0]
    one = R.zeros(k)
    for ci, cls in enumerate(classes):
        if 0 in cls:
            one[ci] = R.one()
    Z = StructAlgebra(R, C, one)
    prims = primitive_decomposition(Z.mod_p(), rng=rng)
    lifted = lift_decomposition(Z, Z.one, prims)
    out = []
    for e in lifted:
        out.append(((e[:, 0] @ sums) % R.pN)[:, None])
    return out
