"""Galois rings GR(p^N, f) and linear algebra over them.

Arrays of ring elements are numpy int64 arrays whose last axis has length
d = deg f; entry [..., i] is the coefficient of x^i, reduced mod p^N.
N = 1 recovers the field F_q, and all routines below work uniformly in N.

Matrix products route through float64 BLAS whenever the exact-integer bound
(p^N - 1)^2 * inner_dim < 2^53 holds, with an int64 fallback otherwise.
"""

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from . import ff

_FLOAT_SAFE = 2 ** 53


@dataclass(frozen=True)
class FieldSpec:
    """Residue field data: F_q = F_p[x]/(f), q = p^deg(f)."""
    p: int
    f: tuple  # monic, little-endian, length d+1, coefficients in [0, p)

    @property
    def d(self) -> int:
        return len(self.f) - 1

    @property
    def q(self) -> int:
        return self.p ** self.d

    def gf(self) -> ff.GF:
        return ff.GF(self.p, self.d, self.f)


def choose_coefficient_field(orders: Iterable[int], p: int) -> FieldSpec:
    """Smallest q = p^f such that every p'-part n of the given element orders
    divides q - 1, i.e. f = lcm of ord(p mod n)."""
    assert ff.is_prime(p)
    deg = 1
    seen = set()
    for n in orders:
        while n % p == 0:
            n //= p
        if n in seen or n == 1:
            continue
        seen.add(n)
        k, t = 1, p % n
        while t != 1:
            t = (t * p) % n
            k += 1
        deg = deg * k // _gcd(deg, k)
    return FieldSpec(p, ff.irreducible_poly(p, deg))


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


class GR:
    """The ring GR(p^N, f); stateless context for array operations."""

    def __init__(self, spec: FieldSpec, N: int):
        assert N >= 1
        self.spec = spec
        self.p = spec.p
        self.N = N
        self.q = spec.q
        self.d = spec.d
        self.pN = spec.p ** N
        # x^{d+j} mod f as a d-vector, for reducing convolutions
        d = self.d
        red = np.zeros((d - 1, d), dtype=np.int64) if d > 1 else np.zeros((0, d), dtype=np.int64)
        if d > 1:
            cur = [(-c) % self.pN for c in spec.f[:d]]  # x^d
            red_rows = []
            for _ in range(d - 1):
                red_rows.append(list(cur))
                carry = cur[-1]
                cur = [0] + cur[:-1]
                if carry:
                    for i in range(d):
                        cur[i] = (cur[i] + carry * red_rows[0][i]) % self.pN
            red = np.array(red_rows, dtype=np.int64)
        self._red = red
        self._gf = spec.gf()

    # ---- constructors ----
    def zeros(self, *shape):
        return np.zeros(shape + (self.d,), dtype=np.int64)

    def one(self):
        v = np.zeros(self.d, dtype=np.int64)
        v[0] = 1
        return v

    def eye(self, n):
        e = self.zeros(n, n)
        e[np.arange(n), np.arange(n), 0] = 1
        return e

    def from_int(self, k: int):
        v = np.zeros(self.d, dtype=np.int64)
        v[0] = k % self.pN
        return v

    def scalar_mat(self, n, k: int):
        e = self.zeros(n, n)
        e[np.arange(n), np.arange(n), 0] = k % self.pN
        return e

    def random(self, rng, *shape):
        return rng.integers(0, self.pN, shape + (self.d,), dtype=np.int64)

    # ---- elementwise ----
    def add(self, a, b):
        return (a + b) % self.pN

    def sub(self, a, b):
        return (a - b) % self.pN

    def neg(self, a):
        return (-a) % self.pN

    def int_mul(self, k, a):
        return (k * a) % self.pN

    def _reduce_conv(self, c):
        # c: (..., 2d-1) convolution; fold degrees >= d down via _red
        d = self.d
        if d == 1:
            return c % self.pN
        low = c[..., :d].copy()
        hi = c[..., d:]
        low += np.einsum("...j,ji->...i", hi, self._red, dtype=np.int64)
        return low % self.pN

    def mul(self, a, b):
        """Elementwise (broadcasting) product of coefficient arrays."""
        d = self.d
        if d == 1:
            return (a * b) % self.pN
        a = a % self.pN
        b = b % self.pN
        out = np.zeros(np.broadcast(a[..., 0], b[..., 0]).shape + (2 * d - 1,), dtype=np.int64)
        for i in range(d):
            for j in range(d):
                out[..., i + j] += (a[..., i] * b[..., j]) % self.pN
        return self._reduce_conv(out)

    def matmul(self, A, B):
        """(m,k,d) @ (k,n,d) -> (m,n,d)."""
        d = self.d
        A = A % self.pN
        B = B % self.pN
        k = A.shape[1]
        use_float = (self.pN - 1) ** 2 * k < _FLOAT_SAFE
        planes = []
        for t in range(2 * d - 1):
            lo = max(0, t - d + 1)
            acc = None
            for i in range(lo, min(d, t + 1)):
                j = t - i
                if use_float:
                    prod = np.rint(A[:, :, i].astype(np.float64) @ B[:, :, j].astype(np.float64)).astype(np.int64) % self.pN
                else:
                    prod = self._int_matmul(A[:, :, i], B[:, :, j])
                acc = prod if acc is None else (acc + prod) % self.pN
            planes.append(acc)
        c = np.stack(planes, axis=-1)
        return self._reduce_conv(c)

    def _int_matmul(self, X, Y):
        # exact int64 matmul mod p^N, chunked over the inner dimension
        k = X.shape[1]
        step = max(1, _FLOAT_SAFE // max(1, (self.pN - 1) ** 2))
        out = np.zeros((X.shape[0], Y.shape[1]), dtype=np.int64)
        for s in range(0, k, step):
            out = (out + X[:, s:s + step] @ Y[s:s + step, :]) % self.pN
        return out

    def matvec(self, A, v):
        return self.matmul(A, v[:, None, :])[:, 0, :]

    def vecmat(self, v, A):
        return self.matmul(v[None, :, :], A)[0]

    # ---- units, valuation ----
    def is_unit(self, a) -> np.ndarray:
        """Elementwise: unit iff nonzero mod p."""
        return np.any(a % self.p != 0, axis=-1)

    def valuation(self, a):
        """Elementwise p-valuation (N for the zero element)."""
        a = np.asarray(a) % self.pN
        v = np.full(a.shape[:-1], self.N, dtype=np.int64)
        cur = a.copy()
        for k in range(self.N):
            nz = np.any(cur % self.p != 0, axis=-1)
            v = np.where((v == self.N) & nz, k, v)
            cur //= self.p
        return v

    def inv(self, a):
        """Inverse of a unit (elementwise), by Newton from the field inverse."""
        if not np.all(self.is_unit(a)):
            raise ZeroDivisionError("non-unit in GR.inv")
        K = self._gf
        codes = self.to_gf(a % self.p)
        inv0 = K._tables[3][codes] if K._tables is not None else np.vectorize(K.inv)(codes)
        x = self.from_gf(inv0, np.asarray(a).shape[:-1])
        k = 1
        while k < self.N:
            # x <- x(2 - a x)
            t = self.sub(self.int_mul(2, self.one()), self.mul(a, x))
            x = self.mul(x, t)
            k *= 2
        return x

    # ---- field code conversion (N irrelevant; uses residue mod p) ----
    def to_gf(self, a):
        """Coefficient arrays mod p -> int codes of F_q elements."""
        a = np.asarray(a) % self.p
        code = np.zeros(a.shape[:-1], dtype=np.int64)
        for i in range(self.d - 1, -1, -1):
            code = code * self.p + a[..., i]
        return code

    def from_gf(self, codes, shape=None):
        codes = np.asarray(codes)
        out = np.zeros(codes.shape + (self.d,), dtype=np.int64)
        c = codes.copy()
        for i in range(self.d):
            out[..., i] = c % self.p
            c = c // self.p
        return out

    def reduce_mod_p(self, a):
        return a % self.p

    def reduce_precision(self, a, M: int):
        assert 1 <= M <= self.N
        return a % (self.p ** M)

    def lift_to(self, a, other: "GR"):
        """Tautological coefficient lift into higher precision (same spec)."""
        assert other.spec == self.spec and other.N >= self.N
        return a % other.pN

    def teichmuller_root(self, n: int):
        """Element of multiplicative order n (requires n | q - 1), lifted so
        that z^n = 1 holds exactly at precision N."""
        K = self._gf
        z0 = K.element_of_order(n)
        z = self.from_gf(np.array(z0))
        # Newton for z^n = 1: z <- z - (z^n - 1) / (n z^{n-1})
        for _ in range(max(1, self.N.bit_length() + 1)):
            zn1 = self.pow_scalar(z, n - 1)
            zn = self.mul(zn1, z)
            err = self.sub(zn, self.one())
            dz = self.mul(err, self.inv(self.int_mul(n, zn1)))
            z = self.sub(z, dz)
        assert np.all(self.pow_scalar(z, n) == self.one())
        return z

    def pow_scalar(self, a, e: int):
        r = self.one()
        b = a.copy()
        while e:
            if e & 1:
                r = self.mul(r, b)
            b = self.mul(b, b)
            e >>= 1
        return r

    def __repr__(self):
        return f"GR({self.p}^{self.N}, d={self.d})"


# ---------------------------------------------------------------------------
# elimination over GR with unit pivots

def rref(R: GR, A, want_transform=False):
    """Row reduce using unit pivots only.  Returns (E, pivots[, T]) where
    T A = E, E is reduced echelon on the pivot columns, and rows whose
    remaining entries are all non-units sink to the bottom untouched by
    further pivoting.  Over a field (N=1) this is ordinary RREF."""
    A = A.copy() % R.pN
    m, n = A.shape[:2]
    T = R.eye(m) if want_transform else None
    pivots = []
    row = 0
    for col in range(n):
        if row >= m:
            break
        units = R.is_unit(A[row:, col])
        idx = np.nonzero(units)[0]
        if idx.size == 0:
            continue
        r = row + int(idx[0])
        if r != row:
            A[[row, r]] = A[[r, row]]
            if want_transform:
                T[[row, r]] = T[[r, row]]
        inv = R.inv(A[row, col])
        A[row] = R.mul(A[row], inv[None, :])
        if want_transform:
            T[row] = R.mul(T[row], inv[None, :])
        others = np.concatenate([np.arange(0, row), np.arange(row + 1, m)])
        if others.size:
            f = A[others, col].copy()
            mask = np.any(f != 0, axis=-1)
            if np.any(mask):
                sel = others[mask]
                upd = R.mul(f[mask][:, None, :], A[row][None, :, :])
                A[sel] = R.sub(A[sel], upd)
                if want_transform:
                    updT = R.mul(f[mask][:, None, :], T[row][None, :, :])
                    T[sel] = R.sub(T[sel], updT)
        pivots.append(col)
        row += 1
    if want_transform:
        return A, pivots, T
    return A, pivots


def rank_mod_p(R: GR, A) -> int:
    R1 = GR(R.spec, 1)
    E, piv = rref(R1, A % R.p)
    return len(piv)


def row_space_basis(R: GR, A):
    E, piv = rref(R, A)
    return E[:len(piv)]


def kernel_mod_p(R: GR, A):
    """Kernel basis of A over the residue field (rows are basis vectors of
    the right kernel: A @ k^T = 0), computed at N=1."""
    R1 = GR(R.spec, 1)
    A = A % R.p
    m, n = A.shape[:2]
    E, piv = rref(R1, A)
    free = [j for j in range(n) if j not in piv]
    ker = R1.zeros(len(free), n)
    for i, j in enumerate(free):
        ker[i, j, 0] = 1
        for r, pc in enumerate(piv):
            ker[i, pc] = R1.neg(E[r, j])
    return ker


def solve_unit(R: GR, A, B):
    """Solve A X = B when A is square with unit determinant."""
    n = A.shape[0]
    aug = np.concatenate([A, B], axis=1)
    E, piv = rref(R, aug)
    if piv != list(range(n)):
        raise np.linalg.LinAlgError("matrix not invertible over GR")
    return E[:, n:]


def inv_matrix(R: GR, A):
    return solve_unit(R, A, R.eye(A.shape[0]))


def smith(R: GR, A, need_U: bool = True, need_V: bool = True):
    """Smith form over GR(p^N): returns (exps, U, V) with U A V = D,
    D diagonal with entries p^exps[i] (exps[i] = N encodes 0), U, V unit.
    need_U / need_V skip the transforms (returned as None); useful when
    the matrix is large and only the invariants are wanted."""
    A = A.copy() % R.pN
    m, n = A.shape[:2]
    U = R.eye(m) if need_U else None
    V = R.eye(n) if need_V else None
    exps = []
    r = 0
    while r < min(m, n):
        vals = R.valuation(A[r:, r:])
        v = int(vals.min())
        if v >= R.N:
            break
        i, j = np.unravel_index(int(vals.argmin()), vals.shape)
        i += r
        j += r
        if i != r:
            A[[r, i]] = A[[i, r]]
            if need_U:
                U[[r, i]] = U[[i, r]]
        if j != r:
            A[:, [r, j]] = A[:, [j, r]]
            if need_V:
                V[:, [r, j]] = V[:, [j, r]]
        # pivot = p^v * unit; normalize the unit away via a row scaling
        u = (A[r, r] // (R.p ** v)) % R.pN
        uin = R.inv(u)
        A[r] = R.mul(A[r], uin[None, :])
        if need_U:
            U[r] = R.mul(U[r], uin[None, :])
        pv = R.p ** v
        # clear column r below/above: every entry has valuation >= v
        colf = A[:, r].copy()
        colf[r] = 0
        fac = (colf // pv) % R.pN
        mask = np.any(colf != 0, axis=-1)
        if np.any(mask):
            sel = np.nonzero(mask)[0]
            A[sel] = R.sub(A[sel], R.mul(fac[sel][:, None, :], A[r][None, :, :]))
            if need_U:
                U[sel] = R.sub(U[sel], R.mul(fac[sel][:, None, :], U[r][None, :, :]))
        rowf = A[r].copy()
        rowf[r] = 0
        fac = (rowf // pv) % R.pN
        mask = np.any(rowf != 0, axis=-1)
        if np.any(mask):
            sel = np.nonzero(mask)[0]
            A[:, sel] = R.sub(A[:, sel], R.mul(fac[sel][None, :, :], A[:, r][:, None, :]))
            if need_V:
                V[:, sel] = R.sub(V[:, sel], R.mul(fac[sel][None, :, :], V[:, r][:, None, :]))
        exps.append(v)
        r += 1
    return exps, U, V


def solve_general(R: GR, A, b):
    """One solution of A x = b over GR(p^N), or None.  b may be (m,d) or (m,k,d)."""
    single = (b.ndim == 2)
    B = b[:, None, :] if single else b
    exps, U, V = smith(R, A)
    c = R.matmul(U, B)
    n = A.shape[1]
    y = R.zeros(n, B.shape[1])
    for i in range(n):
        if i < len(exps):
            pv = R.p ** exps[i]
            ci = c[i]
            if np.any(ci % pv != 0):
                return None
            y[i] = (ci // pv) % R.pN
        else:
            if i < c.shape[0] and np.any(c[i] % R.pN != 0):
                pass
    # rows of c beyond rank must vanish
    for i in range(len(exps), c.shape[0]):
        if np.any(c[i] % R.pN != 0):
            return None
    x = R.matmul(V, y)
    return x[:, 0, :] if single else x


def kernel_gr(R: GR, A):
    """Generators of the right kernel over GR(p^N) (may include torsion
    generators p^{N-v} V e_i).  Rows are generators."""
    exps, _, V = smith(R, A, need_U=False)
    n = A.shape[1]
    gens = []
    for i in range(n):
        if i < len(exps):
            v = exps[i]
            if v == 0:
                continue
            g = R.int_mul(R.p ** (R.N - v), V[:, i])
            gens.append(g)
        else:
            gens.append(V[:, i].copy())
    if not gens:
        return R.zeros(0, n)
    return np.stack(gens)


def module_invariants(R: GR, gens, relations):
    """Invariant factors of (row span of gens)/(row span of relations) inside
    GR^n, as exponents e with the module = bigoplus GR/p^e.  gens, relations:
    (k, n, d) arrays; relation rows must lie in the span of gens."""
    gens = gens % R.pN
    keep = np.any(gens != 0, axis=(1, 2))
    gens = gens[keep]
    k = gens.shape[0]
    if k == 0:
        if np.any(relations % R.pN != 0):
            raise ValueError("relations not contained in span of generators")
        return []
    A = gens.transpose(1, 0, 2)  # columns = generators
    rel_rows = []
    if relations.shape[0]:
        C = solve_general(R, A, relations.transpose(1, 0, 2))
        if C is None:
            raise ValueError("relations not contained in span of generators")
        rel_rows.append(C.transpose(1, 0, 2))
    syz = kernel_gr(R, A)
    if syz.shape[0]:
        rel_rows.append(syz)
    if not rel_rows:
        return [R.N] * k
    rel = np.concatenate(rel_rows, axis=0)
    exps, _, _ = smith(R, rel)
    full = exps + [R.N] * (k - len(exps))
    return [e for e in full if e > 0]


def homology_invariants(R: GR, d_in, d_out):
    """Invariants of ker(d_out) / im(d_in) for maps of free modules given as
    matrices acting on column vectors: d_out: GR^n -> GR^m (shape (m,n,d)),
    d_in: GR^k -> GR^n (shape (n,k,d)).  Returns a list of exponents."""
    n = d_out.shape[1]
    ker = kernel_gr(R, d_out)  # rows generate the kernel
    im = d_in.transpose(1, 0, 2)  # rows generate the image
    if ker.shape[0] == 0:
        if np.any(im % R.pN != 0):
            raise ValueError("image not inside kernel")
        return []
    return module_invariants(R, ker, im % R.pN)


# ---------------------------------------------------------------------------
# Hensel / Newton idempotent machinery

def hensel_idempotent(R: GR, e, mul=None, max_iter=None):
    """Lift e with e^2 = e (mod p) to an exact idempotent at precision N via
    e <- 3e^2 - 2e^3.  Works in any ring given its multiplication; defaults
    to matrix multiplication for square matrices, elementwise otherwise."""
    if mul is None:
        if e.ndim == 3 and e.shape[0] == e.shape[1]:
            mul = lambda a, b: R.matmul(a, b)
        else:
            mul = lambda a, b: R.mul(a, b)
    e = e % R.pN
    e2 = mul(e, e)
    if np.any((e2 - e) % R.p != 0):
        raise ValueError("not idempotent mod p")
    it = 0
    # convergence is quadratic both p-adically and along a nilpotent ideal
    limit = max_iter if max_iter is not None else 64
    while np.any((e2 - e) % R.pN != 0):
        e = (3 * e2 - 2 * mul(e2, e)) % R.pN
        e2 = mul(e, e)
        it += 1
        if it > limit:
            raise ArithmeticError("idempotent iteration failed to converge")
    return e


def idempotent_image_basis(R: GR, e):
    """Free GR-basis of the image of an exact idempotent matrix e (columns).
    Columns whose mod-p reduction carries a pivot give a free basis
    (Nakayama).  Returns (n, r, d): basis vectors as columns."""
    R1 = GR(R.spec, 1)
    # pivot columns of the mod-p RREF are independent, and lift freely
    _, piv = rref(R1, e % R.p)
    return e[:, piv, :].copy()


class PrecisionTower:
    """GR(p^N) for a fixed spec across a range of N, with reduction maps."""

    def __init__(self, spec: FieldSpec, N_max: int):
        self.spec = spec
        self.N_max = N_max
        self.levels = {N: GR(spec, N) for N in range(1, N_max + 1)}

    def __getitem__(self, N: int) -> GR:
        return self.levels[N]

    def reduce(self, a, N_from: int, N_to: int):
        assert N_to <= N_from
        return a % (self.spec.p ** N_to)
