"""Module and algebra engine over GR(p^N, f).

Modules are free GR-modules with a distinguished basis; vectors are (n, d)
coefficient arrays, matrices act on the left.  The MeatAxe-style routines
(spin, chop, Norton's irreducibility test) run over the residue field
(N = 1); idempotent and hom computations work at any precision.

Associative algebras appear in two guises: group algebras (multiplication
through the group's index table) and structure-constant algebras extracted
from a basis of matrices (endomorphism rings, corners).  Both feed the same
splitting engine: radical via composition factors of the regular module,
semisimple splitting via minimal polynomials, Newton lifting along the
radical or along p.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import ff
from .coeff import (GR, hensel_idempotent, idempotent_image_basis, inv_matrix,
                    kernel_gr, kernel_mod_p, rank_mod_p, rref, solve_general)


class Mod:
    """A module given by the action matrices of a generating set of the
    acting algebra (for group algebras: the group generators)."""

    def __init__(self, ring: GR, gens: list, dim: Optional[int] = None):
        self.ring = ring
        self.gens = [g % ring.pN for g in gens]
        self.dim = dim if dim is not None else (self.gens[0].shape[0] if self.gens else 0)

    def act(self, gi: int, v):
        """Apply generator gi to a single vector (n, d)."""
        return self.ring.matvec(self.gens[gi], v)

    def transpose(self) -> "Mod":
        return Mod(self.ring, [g.transpose(1, 0, 2) for g in self.gens], self.dim)

    def mod_p(self) -> "Mod":
        R1 = GR(self.ring.spec, 1)
        return Mod(R1, [g % R1.p for g in self.gens], self.dim)

    def random_vector(self, rng):
        return self.ring.random(rng, self.dim)

    def random_alg_element(self, rng, words: int = 4, maxlen: int = 3):
        """Random element of the enveloping algebra as a matrix."""
        R = self.ring
        n = self.dim
        out = R.mul(R.random(rng, 1, 1), R.eye(n))
        for _ in range(words):
            m = R.eye(n)
            for _ in range(int(rng.integers(1, maxlen + 1))):
                m = R.matmul(self.gens[int(rng.integers(0, len(self.gens)))], m)
            out = R.add(out, R.mul(R.random(rng, 1, 1), m))
        return out % R.pN


class Echelon:
    """Reduced echelon accumulator with unit pivots and optional coordinate
    tracking (rows of the echelon as combinations of the fed vectors)."""

    def __init__(self, ring: GR, n: int, track: bool = False):
        self.ring = ring
        self.n = n
        self.rows = ring.zeros(0, n)
        self.pivots: list = []
        self.track = track
        self.coords = None  # (r, n_fed_max, d), grown lazily
        self.n_fed = 0

    def _reduce(self, v):
        R = self.ring
        if len(self.pivots) == 0:
            return v % R.pN, R.zeros(0)
        a = v[self.pivots] % R.pN  # (r, d)
        res = R.sub(v, R.vecmat(a, self.rows))
        return res, a

    def coords_of(self, v):
        """Coefficients c with v = c . rows, or None if v not in the span."""
        res, a = self._reduce(v)
        if np.any(res % self.ring.pN != 0):
            return None
        return a

    def add(self, v, vec_id: Optional[int] = None):
        """Feed a vector.  Returns (new_row_index or None, combo a) where
        v = a . rows_before + residual.  Raises on a nonzero residual with
        no unit pivot."""
        R = self.ring
        res, a = self._reduce(v)
        if not np.any(res % R.pN != 0):
            return None, a
        units = R.is_unit(res)
        idx = np.nonzero(units)[0]
        if idx.size == 0:
            raise ArithmeticError("residual without unit pivot (torsion)")
        piv = int(idx[0])
        newrow = R.mul(res, R.inv(res[piv])[None, :])
        # eliminate the new pivot from the old rows
        if len(self.pivots):
            f = self.rows[:, piv].copy()
            mask = np.any(f != 0, axis=-1)
            if np.any(mask):
                sel = np.nonzero(mask)[0]
                self.rows[sel] = R.sub(self.rows[sel], R.mul(f[sel][:, None, :], newrow[None, :, :]))
        self.rows = np.concatenate([self.rows, newrow[None]], axis=0)
        self.pivots.append(piv)
        return len(self.pivots) - 1, a

    @property
    def rank(self):
        return len(self.pivots)


class CoordEchelon:
    """Echelon accumulator that tracks coordinates over the fed vectors, so
    membership tests return coefficients in terms of the original family."""

    def __init__(self, ring: GR, n: int):
        self.ring = ring
        self.n = n
        self.rows = ring.zeros(0, n)
        self.pivots: list = []
        self.C = ring.zeros(0, 0)  # rows = C . fed_vectors (independent ones)
        self.fed = 0
        self.kept: list = []  # indices of fed vectors that created rows

    def _reduce(self, v):
        R = self.ring
        if not self.pivots:
            return v % R.pN, R.zeros(0)
        a = v[self.pivots] % R.pN
        return R.sub(v, R.vecmat(a, self.rows)), a

    def coords_of(self, v):
        """Coefficients over the fed vectors, or None if not in the span."""
        R = self.ring
        res, a = self._reduce(v)
        if np.any(res % R.pN != 0):
            return None
        out = R.zeros(self.fed)
        if a.shape[0]:
            out[:self.C.shape[1]] = R.vecmat(a, self.C)
        return out

    def add(self, v):
        """Feed v.  Returns True if it enlarged the span."""
        R = self.ring
        v = np.asarray(v) % R.pN
        res, a = self._reduce(v)
        self.fed += 1
        if not np.any(res % R.pN != 0):
            return False
        units = R.is_unit(res)
        idx = np.nonzero(units)[0]
        if idx.size == 0:
            raise ArithmeticError("torsion residual in CoordEchelon")
        piv = int(idx[0])
        piv_inv = R.inv(res[piv])
        newrow = R.mul(res, piv_inv[None, :])
        r = self.rows.shape[0]
        newC = R.zeros(1, self.fed)
        if a.shape[0]:
            newC[0, :self.C.shape[1]] = R.neg(R.vecmat(a, self.C))
        newC[0, self.fed - 1] = R.one()
        newC = R.mul(newC, piv_inv[None, None, :])
        Cb = R.zeros(r, self.fed)
        if r:
            Cb[:, :self.C.shape[1]] = self.C
        if r:
            f = self.rows[:, piv].copy()
            mask = np.any(f != 0, axis=-1)
            if np.any(mask):
                sel = np.nonzero(mask)[0]
                self.rows[sel] = R.sub(self.rows[sel], R.mul(f[sel][:, None, :], newrow[None, :, :]))
                Cb[sel] = R.sub(Cb[sel], R.mul(f[sel][:, None, :], newC[0][None, :, :]))
        self.C = np.concatenate([Cb, newC], axis=0)
        self.rows = np.concatenate([self.rows, newrow[None]], axis=0)
        self.pivots.append(piv)
        self.kept.append(self.fed - 1)
        return True

    @property
    def rank(self):
        return len(self.pivots)


@dataclass
class SpinResult:
    basis: np.ndarray        # (r, n, d) standard-basis rows
    events: list             # ("new", gi, src) / ("rel", gi, src, beta (r,d))
    seeds: int
    ech: Echelon             # echelon with coords over the standard basis

    @property
    def rank(self):
        return self.basis.shape[0]

    def coords(self, v):
        """Coordinates of v in the standard basis, or None."""
        a = self.ech.coords_of(v)
        if a is None:
            return None
        R = self.ech.ring
        return R.vecmat(a, self.ech.coords_rows)


def spin(M: Mod, seed_rows) -> SpinResult:
    """Close the span of the seed vectors under the generators, recording a
    standard basis (every non-seed basis vector is g . earlier vector) and
    for every (generator, basis vector) pair the expansion of the image.

    Maintains the invariant ech_rows = C . basis so that membership of a
    vector yields its standard-basis coordinates."""
    R = M.ring
    n = M.dim
    ech = Echelon(R, n)
    basis: list = []
    C = R.zeros(n + 1, n + 1)  # C[:r, :r] . basis = ech.rows
    events = []

    def feed(v, origin):
        v = np.asarray(v) % R.pN
        res, a = ech._reduce(v)
        r_now = len(basis)
        if not np.any(res % R.pN != 0):
            beta = R.zeros(r_now)
            if a.shape[0]:
                beta = R.vecmat(a, C[:r_now, :r_now])
            if origin is not None:
                events.append(("rel", origin[0], origin[1], beta))
            return None
        units = R.is_unit(res)
        idx = np.nonzero(units)[0]
        if idx.size == 0:
            # dependent mod p but not over the ring: postpone until more
            # basis vectors arrive
            return "defer"
        piv = int(idx[0])
        piv_inv = R.inv(res[piv])
        newrow = R.mul(res, piv_inv[None, :])
        basis.append(v)
        # new echelon row = piv_inv * (v - a . old_rows):
        # coords over the standard basis: piv_inv * (e_new - a . C)
        newC = R.zeros(r_now + 1)
        if a.shape[0]:
            newC[:r_now] = R.neg(R.vecmat(a, C[:r_now, :r_now]))
        newC[r_now] = R.one()
        newC = R.mul(newC, piv_inv[None, :])
        # eliminate the new pivot from old echelon rows and mirror on C
        if len(ech.pivots):
            f = ech.rows[:, piv].copy()
            mask = np.any(f != 0, axis=-1)
            if np.any(mask):
                sel = np.nonzero(mask)[0]
                ech.rows[sel] = R.sub(ech.rows[sel], R.mul(f[sel][:, None, :], newrow[None, :, :]))
                C[sel, :r_now + 1] = R.sub(C[sel, :r_now + 1],
                                           R.mul(f[sel][:, None, :], newC[None, :, :]))
        ech.rows = np.concatenate([ech.rows, newrow[None]], axis=0)
        ech.pivots.append(piv)
        C[r_now, :r_now + 1] = newC
        if origin is not None:
            events.append(("new", origin[0], origin[1]))
        return len(basis) - 1

    seeds = [np.asarray(s) for s in seed_rows]
    for s in seeds:
        if feed(s, None) == "defer":
            raise ArithmeticError("spin hit a torsion residual")
    deferred: list = []
    head = 0
    while True:
        moved = False
        while head < len(basis):
            for gi in range(len(M.gens)):
                w = M.act(gi, basis[head])
                if feed(w, (gi, head)) == "defer":
                    deferred.append((w % R.pN, gi, head))
            head += 1
            moved = True
        still = []
        for w, gi, src in deferred:
            if feed(w, (gi, src)) == "defer":
                still.append((w, gi, src))
            else:
                moved = True
        deferred = still
        if not deferred and head == len(basis):
            break
        if not moved:
            raise ArithmeticError("spin hit a torsion residual")
    r = len(basis)
    ev = []
    for e in events:
        if e[0] == "rel":
            beta = R.zeros(r)
            if e[3].shape[0]:
                beta[:e[3].shape[0]] = e[3]
            ev.append(("rel", e[1], e[2], beta))
        else:
            ev.append(e)
    B = np.stack(basis) if basis else R.zeros(0, M.dim)
    out = SpinResult(B, ev, len(seeds), ech)
    out.ech.coords_rows = C[:r, :r].copy()
    return out


# ---------------------------------------------------------------------------
# minimal polynomials (residue field only)

def min_poly_on_vector(M: Mod, theta, v):
    """Minimal polynomial of theta at the vector v, as GF codes (monic,
    little-endian).  Requires N = 1."""
    R = M.ring
    assert R.N == 1
    ech = CoordEchelon(R, M.dim)
    cur = v % R.pN
    while True:
        sol = ech.coords_of(cur)
        if sol is not None:
            k = ech.fed
            return [int(R.to_gf(R.neg(sol[i]))) for i in range(k)] + [1]
        ech.add(cur)
        cur = R.matvec(theta, cur)


def min_poly_matrix(M: Mod, theta, rng, max_tries: int = 8):
    """Minimal polynomial of the matrix theta (GF codes)."""
    R = M.ring
    K = R._gf
    f = [1]
    for _ in range(max_tries):
        v = R.random(rng, M.dim)
        g = min_poly_on_vector(M, theta, v)
        f = _lcm_poly(K, f, g)
        if not np.any(eval_poly_matrix(R, f, theta) % R.pN != 0):
            return f
    raise ArithmeticError("min poly did not stabilize")


def _lcm_poly(K, a, b):
    g = ff.pgcd(K, a, b)
    q, r = ff.pdivmod(K, ff.pmul(K, a, b), g)
    assert not r
    return ff.pmonic(K, q)


def eval_poly_matrix(R: GR, f_codes, A):
    """Evaluate a polynomial with GF-coded coefficients at a matrix."""
    n = A.shape[0]
    out = R.zeros(n, n)
    for c in reversed(f_codes):
        out = R.matmul(out, A)
        cv = R.from_gf(np.array(c))
        idx = np.arange(n)
        out[idx, idx] = R.add(out[idx, idx], cv[None, :])
    return out


def eval_poly_in_algebra(alg, f_codes, x):
    """Evaluate a polynomial at an element of a structure-constant algebra."""
    R = alg.ring
    out = R.zeros(alg.dim)
    for c in reversed(f_codes):
        out = alg.mul(out, x)
        out = R.add(out, R.mul(R.from_gf(np.array(c)), alg.one))
    return out


# ---------------------------------------------------------------------------
# submodules / quotients

def echelonize_rows(R: GR, rows):
    E, piv = rref(R, rows)
    return E[:len(piv)], piv


def submodule(M: Mod, rows) -> "Mod":
    """Module structure on the row span (must be action-stable)."""
    R = M.ring
    E, piv = echelonize_rows(R, rows)
    r = E.shape[0]
    gens = []
    for g in M.gens:
        imgs = R.matmul(E, g.transpose(1, 0, 2))  # rows = images of basis
        coords = imgs[:, piv, :]  # valid because E is reduced echelon
        chk = R.sub(imgs, R.matmul(coords, E))
        if np.any(chk % R.pN != 0):
            raise ValueError("row span is not action-stable")
        gens.append(coords.transpose(1, 0, 2))  # column convention
    sub = Mod(R, gens, r)
    sub.basis_in_parent = E
    return sub


def quotient(M: Mod, rows) -> "Mod":
    """Quotient of M by the row span (must be action-stable)."""
    R = M.ring
    E, piv = echelonize_rows(R, rows)
    npar = M.dim
    free = [j for j in range(npar) if j not in piv]
    r = len(free)
    gens = []
    for g in M.gens:
        cols = g[:, free, :]  # images of the free basis vectors (columns)
        imgs = cols.transpose(1, 0, 2)  # as rows
        red = R.sub(imgs, R.matmul(imgs[:, piv, :], E))
        gens.append(red[:, free, :].transpose(1, 0, 2))
    quo = Mod(R, gens, r)
    quo.lift_cols = free
    quo.killed = E
    quo.killed_pivots = piv
    return quo


def project_to_quotient(M: Mod, quo: Mod, v):
    R = M.ring
    red = R.sub(v, R.vecmat(v[quo.killed_pivots], quo.killed))
    return red[quo.lift_cols]


# ---------------------------------------------------------------------------
# chop (composition factors) and Norton's irreducibility test

def chop(M: Mod, rng, max_tries: int = 80):
    """Composition factors of M (list of Mod, with multiplicity, unsorted).
    Residue field only."""
    R = M.ring
    assert R.N == 1
    if M.dim == 0:
        return []
    if M.dim == 1:
        return [M]
    K = R._gf
    def split_at(rows):
        sub = submodule(M, rows)
        quo = quotient(M, rows)
        return chop(sub, rng) + chop(quo, rng)

    for attempt in range(max_tries):
        theta = M.random_alg_element(rng)
        v0 = R.random(rng, M.dim)
        mp = min_poly_on_vector(M, theta, v0)
        if ff.pdeg(mp) < 1:
            continue
        facs = ff.factor_poly(K, mp, rng)
        order = rng.permutation(len(facs))
        for fi in order:
            f = facs[int(fi)][0]
            W = eval_poly_matrix(R, list(f), theta)
            ker = kernel_mod_p(R, W)
            if ker.shape[0] == 0:
                continue
            # spin the kernel basis and a few random kernel vectors: any
            # proper spin splits M
            cands = [ker[i] for i in range(ker.shape[0])]
            for _ in range(3):
                v = R.vecmat(R.random(rng, ker.shape[0]), ker)
                if np.any(v % R.pN != 0):
                    cands.append(v)
            for v in cands:
                sp = spin(M, [v])
                if 0 < sp.rank < M.dim:
                    return split_at(sp.basis)
            if ker.shape[0] != ff.pdeg(list(f)):
                # the kernel is not irreducible under theta, so a full spin
                # of every candidate proves nothing; try another factor
                continue
            # multiplicity-one factor: a proper submodule either meets the
            # kernel (caught above, any single vector suffices) or its
            # annihilator meets the transposed kernel
            Mt = M.transpose()
            kerT = kernel_mod_p(R, W.transpose(1, 0, 2))
            spt = spin(Mt, [kerT[0]])
            if spt.rank == M.dim:
                return [M]  # irreducible
            # perp of a transposed-side submodule is a submodule
            perp = kernel_mod_p(R, np.ascontiguousarray(spt.basis))
            return split_at(perp)
    raise ArithmeticError("chop failed to make progress")


# ---------------------------------------------------------------------------
# hom spaces via spinning presentations

def generating_seeds(M: Mod, rng, max_tries: int = 40):
    """Small list of vectors whose spin is all of M.  Seeds are selected on
    the residue module first: a seed set generating mod p spans the whole
    module, so the full-precision spin closes without torsion."""
    R = M.ring
    if R.N == 1:
        Mp = M
    else:
        R1 = GR(R.spec, 1)
        Mp = Mod(R1, [g % R.p for g in M.gens], M.dim)
    seeds = []
    sp = None
    covered = Echelon(Mp.ring, M.dim)
    for _ in range(max_tries):
        v = M.random_vector(rng)
        if covered.coords_of(v % R.p) is not None:
            continue
        seeds.append(v)
        sp = spin(Mp, [s % R.p for s in seeds])
        if sp.rank == M.dim:
            if R.N > 1:
                sp = spin(M, seeds)
                assert sp.rank == M.dim
            return seeds, sp
        covered = sp.ech
    raise ArithmeticError("failed to find generating seeds")


def hom_space(M: Mod, N: Mod, seeds=None, sp: Optional[SpinResult] = None,
              rng=None):
    """Basis of Hom(M, N) as matrices H with H rho_M(g) = rho_N(g) H.
    Uses a spinning presentation of M from the given (or found) seeds."""
    R = M.ring
    if seeds is None:
        if rng is None:
            rng = np.random.default_rng(0)
        seeds, sp = generating_seeds(M, rng)
    elif sp is None:
        # drop seeds dependent on earlier ones: spin would silently leave
        # their images unconstrained
        keep = Echelon(R, M.dim)
        seeds = [s for s in seeds if keep.coords_of(s) is None and keep.add(s)[0] is not None]
        sp = spin(M, seeds)
    if sp.rank != M.dim:
        raise ValueError("seeds do not generate M")
    k = len(seeds)
    nN = N.dim
    r = sp.rank
    # T[j]: (nN, k*nN) with image-of-basis-row-j = T[j] . U, U the unknown
    # stacked seed images
    T = R.zeros(r, nN, k * nN)
    for i in range(k):
        T[i, :, i * nN:(i + 1) * nN] = R.eye(nN)
    constraints = []
    new_seen = k
    limit = 3 * k * nN + 256

    def compress(blocks):
        # elementary row ops preserve the span; unit-pivot reduction leaves
        # the torsion rows at the bottom, so nothing is lost over GR
        con = np.concatenate(blocks, axis=0)
        if con.shape[0] <= k * nN:
            return [con]
        E, _ = rref(R, con)
        keep = np.any(E % R.pN != 0, axis=(1, 2))
        return [E[keep]]

    for e in sp.events:
        if e[0] == "new":
            gi, s = e[1], e[2]
            T[new_seen] = R.matmul(N.gens[gi], T[s])
            new_seen += 1
        else:
            gi, s, beta = e[1], e[2], e[3]
            lhs = R.matmul(N.gens[gi], T[s])
            acc = R.zeros(nN, k * nN)
            nzb = np.nonzero(np.any(beta % R.pN != 0, axis=-1))[0]
            for j in nzb:
                acc = R.add(acc, R.mul(beta[j][None, None, :], T[j]))
            constraints.append(R.sub(lhs, acc))
            if sum(c.shape[0] for c in constraints) > limit:
                constraints = compress(constraints)
    if constraints:
        con = np.concatenate(constraints, axis=0)
        if con.shape[0] > k * nN:
            con = compress(constraints)[0]
    else:
        con = R.zeros(0, k * nN)
    if R.N == 1:
        ker = kernel_mod_p(R, con)
    else:
        ker = kernel_gr(R, con)
    # rebuild matrices: H . basis_row_j^T = image_j
    Binv = inv_matrix(R, sp.basis.transpose(1, 0, 2))  # basis rows as columns
    homs = []
    for t in range(ker.shape[0]):
        U = ker[t]
        imgs = R.zeros(r, nN)
        for j in range(r):
            imgs[j] = R.matvec(T[j], U)
        H = R.matmul(imgs.transpose(1, 0, 2), Binv)
        homs.append(H)
    return homs


def end_algebra_basis(M: Mod, rng=None):
    return hom_space(M, M, rng=rng or np.random.default_rng(0))


# ---------------------------------------------------------------------------
# structure-constant algebras

class StructAlgebra:
    """Associative unital algebra over GR with explicit structure constants:
    a_i a_j = sum_k C[i,j,k] a_k."""

    def __init__(self, ring: GR, C: np.ndarray, one: np.ndarray):
        self.ring = ring
        self.C = C % ring.pN  # (e, e, e, d)
        self.one = one % ring.pN
        self.dim = C.shape[0]

    @classmethod
    def from_matrix_basis(cls, ring: GR, mats, one_vec=None):
        """Algebra spanned by the given matrices (must be multiplicatively
        closed as a span).  Returns (algebra, coords function)."""
        e = len(mats)
        n = mats[0].shape[0]
        flat = np.stack([m.reshape(n * n, -1) for m in mats])  # (e, n^2, d)
        ech = CoordEchelon(ring, n * n)
        for i in range(e):
            if not ech.add(flat[i]):
                raise ValueError("matrix basis is linearly dependent")

        def coords_exact(mat):
            return ech.coords_of(mat.reshape(n * n, -1))

        C = ring.zeros(e, e, e)
        for i in range(e):
            for j in range(e):
                prod = ring.matmul(mats[i], mats[j])
                c = coords_exact(prod)
                if c is None:
                    raise ValueError("span not closed under multiplication")
                C[i, j] = c
        if one_vec is None:
            one_vec = coords_exact(ring.eye(n))
            if one_vec is None:
                raise ValueError("identity not in span")
        return cls(ring, C, one_vec), coords_exact

    def mul(self, x, y):
        R = self.ring
        d = R.d
        # z_k = sum_{ij} x_i y_j C[i,j,k]
        xy = R.mul(x[:, None, :], y[None, :, :])  # (e, e, d)
        if d == 1:
            z = np.einsum("ija,ijka->ka", xy, self.C) % R.pN
            return z
        # convolution over the coefficient axis
        out = np.zeros((self.dim, 2 * d - 1), dtype=np.int64)
        for a in range(d):
            for b in range(d):
                out[:, a + b] += np.einsum("ij,ijk->k", xy[:, :, a] % R.pN,
                                           self.C[:, :, :, b]) % R.pN
        return R._reduce_conv(out)

    def left_mult(self, x):
        R = self.ring
        d = R.d
        if d == 1:
            L = np.einsum("ia,ijka->kja", x % R.pN, self.C) % R.pN
            return L
        out = np.zeros((self.dim, self.dim, 2 * d - 1), dtype=np.int64)
        for a in range(d):
            for b in range(d):
                out[:, :, a + b] += np.einsum("i,ijk->kj", x[:, a] % R.pN,
                                              self.C[:, :, :, b]) % R.pN
        return R._reduce_conv(out)

    def right_mult(self, x):
        R = self.ring
        d = R.d
        if d == 1:
            Rm = np.einsum("ja,ijka->kia", x % R.pN, self.C) % R.pN
            return Rm
        out = np.zeros((self.dim, self.dim, 2 * d - 1), dtype=np.int64)
        for a in range(d):
            for b in range(d):
                out[:, :, a + b] += np.einsum("j,ijk->ki", x[:, a] % R.pN,
                                              self.C[:, :, :, b]) % R.pN
        return R._reduce_conv(out)

    def regular_module(self) -> Mod:
        gens = [self.left_mult(self.basis_vec(i)) for i in range(self.dim)]
        return Mod(self.ring, gens, self.dim)

    def rho_blocks(self, S: Mod):
        """rho_S(a_i) for every basis element, flattened and stacked, for a
        composition factor S of regular_module() (whose generators are the
        left multiplications by the basis)."""
        return np.stack([S.gens[i].reshape(-1, self.ring.d)
                         for i in range(self.dim)])

    def basis_vec(self, i):
        v = self.ring.zeros(self.dim)
        v[i] = self.ring.one()
        return v

    def mod_p(self) -> "StructAlgebra":
        R1 = GR(self.ring.spec, 1)
        return StructAlgebra(R1, self.C % R1.p, self.one % R1.p)

    def hensel(self, e):
        return hensel_idempotent(self.ring, e, mul=self.mul)

    def is_idempotent(self, e):
        return not np.any((self.mul(e, e) - e) % self.ring.pN != 0)


def algebra_radical(alg, rng=None):
    """Basis rows (algebra coordinates) of the Jacobson radical: the kernel
    of the action on the composition factors of the regular module.
    Residue field only.  Works for any algebra exposing regular_module()
    and rho_blocks()."""
    R = alg.ring
    assert R.N == 1
    cached = getattr(alg, "_rad_rows", None)
    if cached is not None:
        return cached
    if rng is None:
        rng = np.random.default_rng(0)
    reg = alg.regular_module()
    factors = chop(reg, rng)
    blocks = [alg.rho_blocks(S) for S in factors]
    stacked = np.concatenate(blocks, axis=1)  # (e, sum s^2, d)
    out = kernel_mod_p(R, stacked.transpose(1, 0, 2))
    alg._rad_rows = out
    return out


def intersect_row_spans(R: GR, A, B):
    """Basis of the intersection of two row spans (residue field)."""
    assert R.N == 1
    if A.shape[0] == 0 or B.shape[0] == 0:
        return R.zeros(0, A.shape[1])
    M = np.concatenate([A, B], axis=0)
    ker = kernel_mod_p(R, M.transpose(1, 0, 2))
    if ker.shape[0] == 0:
        return R.zeros(0, A.shape[1])
    out = R.matmul(ker[:, :A.shape[0], :], A)
    E, piv = rref(R, out)
    return E[:len(piv)]


class CornerData:
    """A corner e*A*e of a structure-constant algebra, with lift/project."""

    def __init__(self, alg: StructAlgebra, e):
        R = alg.ring
        self.parent = alg
        self.e = e
        Lm = alg.left_mult(e)
        Rm = alg.right_mult(e)
        proj = R.matmul(Lm, Rm)  # x -> e x e
        imgs = R.matmul(proj, R.eye(alg.dim))
        ech = Echelon(R, alg.dim)
        basis_rows = []
        for i in range(alg.dim):
            col = imgs[:, i, :]
            try:
                idx, _ = ech.add(col)
            except ArithmeticError:
                idx = None  # torsion direction; corner stays free without it
            if idx is not None:
                basis_rows.append(col)
        # re-echelonize to reduced form for coordinates
        self.rows, self.pivots = echelonize_rows(R, np.stack(basis_rows)) if basis_rows else (R.zeros(0, alg.dim), [])
        cdim = self.rows.shape[0]
        C = R.zeros(cdim, cdim, cdim)
        for i in range(cdim):
            Li = alg.left_mult(self.rows[i])
            prods = R.matmul(self.rows, np.swapaxes(Li, 0, 1))  # row j = rows[i]*rows[j]
            a = prods[:, self.pivots] % R.pN
            chk = R.sub(prods, R.matmul(a, self.rows))
            if np.any(chk % R.pN != 0):
                raise ValueError("corner products leave the corner span")
            C[i] = a
        self.alg = StructAlgebra(R, C, self.coords(e))

    def coords(self, v):
        R = self.parent.ring
        a = v[self.pivots] % R.pN
        chk = R.sub(v, R.vecmat(a, self.rows))
        if np.any(chk % R.pN != 0):
            raise ValueError("vector not in corner")
        return a

    def lift(self, x):
        return self.parent.ring.vecmat(x, self.rows)


def split_idempotent_once(alg: StructAlgebra, e, rad_rows, rng,
                          max_tries: int = 200):
    """Either certify e primitive (returns None) or return (u, e-u) with u,
    e-u nonzero orthogonal idempotents below e.  Residue field, split case."""
    R = alg.ring
    K = R._gf
    corner = CornerData(alg, e)
    cdim = corner.alg.dim
    if cdim == 1:
        return None
    # radical of the corner = corner  rad(A)  (e J e)
    corner_rad = intersect_row_spans(R, corner.rows, rad_rows) if rad_rows.shape[0] else R.zeros(0, alg.dim)
    # dim of semisimple part of the corner
    ss = cdim - corner_rad.shape[0]
    if ss == 1:
        return None
    for _ in range(max_tries):
        x = R.random(rng, cdim)
        mp = min_poly_in_algebra(corner.alg, x, rng)
        facs = ff.factor_poly(K, mp, rng)
        if len(facs) < 2:
            continue
        f1, m1 = facs[0]
        g1 = list(f1)
        for _ in range(m1 - 1):
            g1 = ff.pmul(K, g1, list(f1))
        g2 = [1]
        for f, m in facs[1:]:
            for _ in range(m):
                g2 = ff.pmul(K, g2, list(f))
        # u0 = (b*g2)(x) with a*g1 + b*g2 = 1
        bez = _poly_bezout(K, g1, g2)
        h = ff.pmul(K, bez, g2)
        u0 = eval_poly_in_algebra(corner.alg, h, x)
        u = corner.alg.hensel(u0)
        if not np.any(u % R.pN != 0):
            continue
        if not np.any((u - corner.alg.one) % R.pN != 0):
            continue
        u_full = corner.lift(u)
        v_full = R.sub(e, u_full)
        return u_full, v_full
    raise ArithmeticError("failed to split non-primitive idempotent")


def _poly_bezout(K, g1, g2):
    """b with b*g2 = 1 mod g1 (g1, g2 coprime)."""
    # extended Euclid on (g1, g2)
    r0, r1 = list(g1), list(g2)
    t0, t1 = [], [1]
    while r1:
        q, r = ff.pdivmod(K, r0, r1)
        r0, r1 = r1, r
        t0, t1 = t1, ff.psub(K, t0, ff.pmul(K, q, t1))
    # r0 = gcd (unit); normalize
    c = int(K.inv(r0[0]))
    return ff.pscale(K, t0, c)


def min_poly_in_algebra(alg: StructAlgebra, x, rng=None):
    """Minimal polynomial of x in the algebra (via Krylov on coordinates)."""
    R = alg.ring
    assert R.N == 1
    ech = CoordEchelon(R, alg.dim)
    cur = alg.one.copy()
    while True:
        sol = ech.coords_of(cur)
        if sol is not None:
            k = ech.fed
            return [int(R.to_gf(R.neg(sol[i]))) for i in range(k)] + [1]
        ech.add(cur)
        cur = alg.mul(cur, x)


def primitive_decomposition(alg: StructAlgebra, e=None, rng=None,
                            rad_rows=None):
    """Orthogonal primitive idempotents summing to e (default: to 1).
    Residue field only; use lift_decomposition for GR."""
    R = alg.ring
    assert R.N == 1
    if rng is None:
        rng = np.random.default_rng(0)
    if e is None:
        e = alg.one.copy()
    if rad_rows is None:
        rad_rows = algebra_radical(alg, rng)
    out = []
    stack = [e % R.pN]
    while stack:
        cur = stack.pop()
        if not np.any(cur % R.pN != 0):
            continue
        got = split_idempotent_once(alg, cur, rad_rows, rng)
        if got is None:
            out.append(cur)
        else:
            stack.extend(got)
    return out


def lift_decomposition(alg_gr, e, idems_mod_p):
    """Lift a mod-p orthogonal decomposition of the exact idempotent e to an
    exact orthogonal family over GR summing to e.  All lifts are computed in
    the corner eAe, the last one as the complement e - sum(rest)."""
    R = alg_gr.ring
    lifted = []
    total = R.zeros(alg_gr.dim)
    for eb in idems_mod_p[:-1]:
        pre = eb % R.pN  # any coefficient lift
        # force orthogonality against the previously lifted ones, stay in eAe
        c = R.sub(e, total)
        pre = alg_gr.mul(alg_gr.mul(c, pre), c)
        ei = alg_gr.hensel(pre)
        lifted.append(ei)
        total = R.add(total, ei)
    last = R.sub(e, total)
    if not alg_gr.is_idempotent(last):
        raise ArithmeticError("complement of lifted family is not idempotent")
    lifted.append(last)
    return lifted
