"""Finite fields F_q with table-driven scalar arithmetic, and univariate
polynomial factorization (squarefree / distinct-degree / Cantor-Zassenhaus).

Field elements are ints in [0, q).  The int encodes the coefficient vector
of a residue polynomial in base p, little-endian, so the prime subfield is
just [0, p).
"""

from functools import lru_cache
from typing import Optional

import numpy as np

TABLE_MAX = 1024


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


def _fp_polmul(a, b, p):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return out


def _fp_polmod(a, f, p):
    # f monic
    a = list(a)
    d = len(f) - 1
    for i in range(len(a) - 1, d - 1, -1):
        c = a[i]
        if c:
            a[i] = 0
            for j in range(d):
                a[i - d + j] = (a[i - d + j] - c * f[j]) % p
    while len(a) > d:
        a.pop()
    while len(a) < d:
        a.append(0)
    return a


@lru_cache(maxsize=None)
def irreducible_poly(p: int, d: int) -> tuple:
    """Lexicographically smallest monic irreducible of degree d over F_p,
    as a little-endian coefficient tuple of length d+1."""
    if d == 1:
        return (0, 1)
    for code in range(p ** d):
        coeffs = []
        c = code
        for _ in range(d):
            coeffs.append(c % p)
            c //= p
        f = tuple(coeffs) + (1,)
        if _fp_irreducible(f, p):
            return f
    raise ValueError("no irreducible found")


def _fp_irreducible(f, p):
    # gcd(x^{p^i} - x, f) trivial for i <= d/2 and x^{p^d} = x mod f
    d = len(f) - 1

    def frob(v):
        out = [1 % p] + [0] * (d - 1)
        e, base = p, list(v)
        while e:
            if e & 1:
                out = _fp_polmod(_fp_polmul(out, base, p), f, p)
            base = _fp_polmod(_fp_polmul(base, base, p), f, p)
            e >>= 1
        return out

    x = _fp_polmod([0, 1], f, p)
    cur = list(x)
    for i in range(1, d // 2 + 1):
        cur = frob(cur)
        g = cur[:]
        g[1] = (g[1] - 1) % p
        if _fp_poly_gcd_nontrivial(g, f, p):
            return False
    full = list(x)
    for _ in range(d):
        full = frob(full)
    return full == x


def _fp_poly_gcd_nontrivial(a, f, p):
    # True if gcd(a, f) has positive degree
    def trim(v):
        v = list(v)
        while v and v[-1] == 0:
            v.pop()
        return v

    a, b = trim(a), trim(f)
    while b:
        inv = pow(b[-1], p - 2, p)
        r = list(a)
        while len(r) >= len(b) and trim(r):
            c = (r[-1] * inv) % p
            sh = len(r) - len(b)
            for j in range(len(b)):
                r[sh + j] = (r[sh + j] - c * b[j]) % p
            r = trim(r)
            if len(r) < len(b):
                break
        a, b = b, r
    return len(a) - 1 > 0


class GF:
    """F_q = F_p[x]/(f), elements coded as ints in [0, q)."""

    def __init__(self, p: int, d: int = 1, f: Optional[tuple] = None):
        assert is_prime(p)
        self.p = p
        self.d = d
        self.f = tuple(f) if f is not None else irreducible_poly(p, d)
        assert len(self.f) == d + 1 and self.f[-1] == 1
        self.q = p ** d
        self._tables = None
        if self.q <= TABLE_MAX:
            self._build_tables()

    def _build_tables(self):
        p, d, q = self.p, self.d, self.q

        def decode(a):
            out = []
            for _ in range(d):
                out.append(a % p)
                a //= p
            return out

        def encode(v):
            a = 0
            for c in reversed(v):
                a = a * p + c
            return a

        add = np.zeros((q, q), dtype=np.int64)
        mul = np.zeros((q, q), dtype=np.int64)
        vecs = [decode(a) for a in range(q)]
        for a in range(q):
            va = vecs[a]
            for b in range(a, q):
                vb = vecs[b]
                s = encode([(x + y) % p for x, y in zip(va, vb)])
                add[a, b] = add[b, a] = s
                if a <= b:
                    m = encode(_fp_polmod(_fp_polmul(va, vb, p), self.f, p))
                    mul[a, b] = mul[b, a] = m
        neg = np.zeros(q, dtype=np.int64)
        inv = np.zeros(q, dtype=np.int64)
        for a in range(q):
            neg[a] = encode([(-c) % p for c in vecs[a]])
        for a in range(1, q):
            row = mul[a]
            inv[a] = int(np.where(row == 1)[0][0])
        self._tables = (add, mul, neg, inv)

    # scalar / numpy-array ops
    def add(self, a, b):
        return self._tables[0][a, b]

    def sub(self, a, b):
        return self._tables[0][a, self._tables[2][b]]

    def mul(self, a, b):
        return self._tables[1][a, b]

    def neg(self, a):
        return self._tables[2][a]

    def inv(self, a):
        if np.any(np.asarray(a) == 0):
            raise ZeroDivisionError("inverse of 0 in GF")
        return self._tables[3][a]

    def pow(self, a, e: int):
        e = int(e)
        if e < 0:
            a, e = int(self.inv(a)), -e
        r, b = 1, int(a)
        while e:
            if e & 1:
                r = int(self.mul(r, b))
            b = int(self.mul(b, b))
            e >>= 1
        return r

    def order(self, a) -> int:
        if a == 0:
            raise ValueError("0 has no multiplicative order")
        k, x = 1, int(a)
        while x != 1:
            x = int(self.mul(x, a))
            k += 1
        return k

    def element_of_order(self, n: int) -> int:
        if (self.q - 1) % n != 0:
            raise ValueError(f"no element of order {n} in F_{self.q}")
        for a in range(1, self.q):
            if self.order(a) == n:
                return a
        raise AssertionError

    def frobenius(self, a):
        return self.pow(a, self.p)

    def decode(self, a: int) -> list:
        out = []
        for _ in range(self.d):
            out.append(a % self.p)
            a //= self.p
        return out

    def encode(self, v) -> int:
        a = 0
        for c in reversed(list(v)):
            a = a * self.p + int(c) % self.p
        return a

    def __repr__(self):
        return f"GF({self.p}^{self.d})"

    def __eq__(self, other):
        return isinstance(other, GF) and (self.p, self.f) == (other.p, other.f)

    def __hash__(self):
        return hash((self.p, self.f))


# ---------------------------------------------------------------------------
# polynomials over a GF instance: little-endian lists of int codes, trimmed

def ptrim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def pdeg(a):
    return len(a) - 1


def padd(K, a, b):
    n = max(len(a), len(b))
    a = a + [0] * (n - len(a))
    b = b + [0] * (n - len(b))
    return ptrim([int(K.add(x, y)) for x, y in zip(a, b)])


def psub(K, a, b):
    n = max(len(a), len(b))
    a = a + [0] * (n - len(a))
    b = b + [0] * (n - len(b))
    return ptrim([int(K.sub(x, y)) for x, y in zip(a, b)])


def pscale(K, a, c):
    return ptrim([int(K.mul(x, c)) for x in a])


def pmul(K, a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] = int(K.add(out[i + j], K.mul(x, y)))
    return ptrim(out)


def pdivmod(K, a, b):
    a = ptrim(a)
    b = ptrim(b)
    if not b:
        raise ZeroDivisionError
    inv = int(K.inv(b[-1]))
    q = [0] * max(0, len(a) - len(b) + 1)
    r = list(a)
    while len(r) >= len(b) and r:
        c = int(K.mul(r[-1], inv))
        sh = len(r) - len(b)
        q[sh] = c
        for j in range(len(b)):
            r[sh + j] = int(K.sub(r[sh + j], K.mul(c, b[j])))
        r = ptrim(r)
    return ptrim(q), r


def pmonic(K, a):
    a = ptrim(a)
    if not a:
        return a
    return pscale(K, a, int(K.inv(a[-1])))


def pgcd(K, a, b):
    a, b = ptrim(a), ptrim(b)
    while b:
        a, b = b, pdivmod(K, a, b)[1]
    return pmonic(K, a)


def ppowmod(K, a, e, f):
    r = [1]
    b = pdivmod(K, a, f)[1]
    while e:
        if e & 1:
            r = pdivmod(K, pmul(K, r, b), f)[1]
        b = pdivmod(K, pmul(K, b, b), f)[1]
        e >>= 1
    return r


def pderiv(K, a):
    return ptrim([int(K.mul(a[i], i % K.p)) for i in range(1, len(a))])


def peval(K, a, x):
    r = 0
    for c in reversed(a):
        r = int(K.add(K.mul(r, x), c))
    return r


def _pth_root_scalar(K, c):
    # c^(q/p): inverse of Frobenius on F_q
    return K.pow(c, K.q // K.p)


def squarefree_parts(K, f):
    """Yield (g, multiplicity) with g squarefree, f = prod g^mult."""
    f = pmonic(K, f)
    out = []
    if pdeg(f) < 1:
        return out
    df = pderiv(K, f)
    if not df:
        # f = h(x^p); take p-th root of coefficients
        h = [int(_pth_root_scalar(K, f[i])) for i in range(0, len(f), K.p)]
        for g, m in squarefree_parts(K, h):
            out.append((g, m * K.p))
        return out
    c = pgcd(K, f, df)
    w = pdivmod(K, f, c)[0]
    i = 1
    while pdeg(w) > 0:
        y = pgcd(K, w, c)
        fac = pdivmod(K, w, y)[0]
        if pdeg(fac) > 0:
            out.append((fac, i))
        w = y
        c = pdivmod(K, c, y)[0]
        i += 1
    if pdeg(c) > 0:
        for g, m in squarefree_parts(K, c):
            out.append((g, m * K.p))
    return out


def distinct_degree(K, f):
    """f squarefree monic.  Yield (product-of-deg-d-factors, d)."""
    out = []
    x = [0, 1]
    h = list(x)
    rem = list(f)
    d = 0
    while pdeg(rem) > 0:
        d += 1
        if 2 * d > pdeg(rem):
            out.append((rem, pdeg(rem)))
            break
        h = ppowmod(K, h, K.q, rem)
        g = pgcd(K, psub(K, h, x), rem)
        if pdeg(g) > 0:
            out.append((g, d))
            rem = pdivmod(K, rem, g)[0]
            h = pdivmod(K, h, rem)[1]
    return out


def equal_degree_split(K, f, d, rng):
    """f monic squarefree, all irreducible factors of degree d. Full split."""
    n = pdeg(f)
    if n == d:
        return [f]
    while True:
        a = [int(rng.integers(0, K.q)) for _ in range(n)]
        a = ptrim(a)
        if pdeg(a) < 1:
            continue
        g = pgcd(K, a, f)
        if 0 < pdeg(g) < n:
            left, right = g, pdivmod(K, f, g)[0]
        else:
            if K.p == 2:
                # trace map sum a^{2^i} over the degree-d subfield
                t = list(a)
                acc = list(a)
                for _ in range(d * (K.d if K.d else 1) - 1):
                    acc = ppowmod(K, acc, 2, f)
                    t = padd(K, t, acc)
                g = pgcd(K, t, f)
            else:
                e = (K.q ** d - 1) // 2
                b = ppowmod(K, a, e, f)
                g = pgcd(K, psub(K, b, [1]), f)
            if not (0 < pdeg(g) < n):
                continue
            left, right = g, pdivmod(K, f, g)[0]
        return equal_degree_split(K, pmonic(K, left), d, rng) + \
            equal_degree_split(K, pmonic(K, right), d, rng)


def factor_poly(K, f, rng=None):
    """Factor monic f over K.  Returns list of (irreducible, multiplicity),
    sorted by (degree, coeffs) for determinism."""
    if rng is None:
        rng = np.random.default_rng(0)
    f = pmonic(K, f)
    out = []
    for g, m in squarefree_parts(K, f):
        for h, d in distinct_degree(K, g):
            for irr in equal_degree_split(K, pmonic(K, h), d, rng):
                out.append((tuple(irr), m))
    out.sort(key=lambda t: (len(t[0]), t[0]))
    return out
