"""Burnside rings over a base G-set: table of marks, rational and Dress
idempotents, the p-completed basis, span composition, and linearization.

Elements of Burn_G(X) are integer (or rational) coefficient dictionaries on
the orbit basis: pairs (subgroup class H, N_G(H)-orbit of an H-fixed point
of X).  Composition of spans over X x Y uses the double-coset form of the
fibered product; all arithmetic is exact (Fractions) until a final
reduction to GR(p^N).
"""

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .groups import GSet, PermGroup


class NonIntegral(Exception):
    pass


class SpanFailure(Exception):
    pass


def _subgroup_gens(G: PermGroup, H: frozenset):
    """A small generating list of element ids for the subgroup H."""
    gens = []
    cur = frozenset([0])
    for h in sorted(H):
        if h in cur:
            continue
        gens.append(h)
        cur = G.subgroup(gens)
        if cur == H:
            break
    return gens


def table_of_marks(G: PermGroup, classes=None):
    """Square matrix m[i][j] = #(G/H_i)^{H_j} over the subgroup classes
    (sorted by order, so the matrix is lower triangular)."""
    if classes is None:
        classes = G.subgroup_classes()
    k = len(classes)
    gens = [_subgroup_gens(G, H) for H in classes]
    M = np.zeros((k, k), dtype=np.int64)
    for i, H in enumerate(classes):
        ncos, coset_of, _, reps = G.coset_action(H)
        for j in range(k):
            cnt = 0
            for c in range(ncos):
                if all(coset_of[G.mul(g, reps[c])] == c for g in gens[j]):
                    cnt += 1
            M[i, j] = cnt
    # sanity: triangular with diagonal |N_G(H)/H|
    for i, H in enumerate(classes):
        if M[i, i] != len(G.normalizer(H)) // len(H):
            raise AssertionError("table of marks diagonal mismatch")
        if np.any(M[i, i + 1:] != 0):
            raise AssertionError("table of marks not triangular")
    return M


def _solve_lower_triangular(M, rhs):
    """x with x . M = rhs over Fractions; M integer lower triangular."""
    k = M.shape[0]
    x = [Fraction(0)] * k
    for j in range(k - 1, -1, -1):
        s = rhs[j] - sum(x[i] * int(M[i, j]) for i in range(j + 1, k))
        x[j] = Fraction(s, int(M[j, j]))
    return x


def rational_idempotents(G: PermGroup, classes=None, marks=None):
    """Primitive idempotents e_H of Burn_G(pt) tensor Q, as Fraction
    coefficient vectors on the [G/H] basis; marks(e_H) = indicator of H."""
    if classes is None:
        classes = G.subgroup_classes()
    if marks is None:
        marks = table_of_marks(G, classes)
    k = len(classes)
    out = []
    for i in range(k):
        rhs = [Fraction(1 if j == i else 0) for j in range(k)]
        out.append(_solve_lower_triangular(marks, rhs))
    return out


def marks_of(marks, coeffs):
    """Mark vector of an element given by basis coefficients."""
    k = marks.shape[0]
    return [sum(coeffs[i] * int(marks[i, j]) for i in range(k)) for j in range(k)]


def burn_mul(marks, x, y):
    """Product in Burn_G(pt) via the mark homomorphism (exact)."""
    mx = marks_of(marks, x)
    my = marks_of(marks, y)
    prod = [a * b for a, b in zip(mx, my)]
    return _solve_lower_triangular(marks, prod)


def p_residual_class(G: PermGroup, classes, ci: int, p: int) -> int:
    """Class index of O^{p,infinity}(H_ci): the subgroup generated by the
    p'-elements of H (smallest normal subgroup with p-group quotient)."""
    H = classes[ci]
    orders = G.element_orders()
    prime_to_p = [h for h in H if orders[h] % p != 0]
    K = G.subgroup(prime_to_p)
    for j, J in enumerate(classes):
        if len(J) == len(K) and G.are_conjugate_subgroups(K, J) is not None:
            return j
    raise AssertionError("p-residual subgroup not among subgroup classes")


def dress_idempotents(G: PermGroup, p: int, classes=None, marks=None):
    """Primitive idempotents of Burn_G(pt) tensor Z_(p), indexed by the
    p-perfect subgroup classes: eps_K = sum of e_H over H with p-residual
    conjugate to K.  Returns (perfect class indices, {index: coeff vector}).
    Coefficients are verified p-integral (Dress)."""
    if classes is None:
        classes = G.subgroup_classes()
    if marks is None:
        marks = table_of_marks(G, classes)
    e = rational_idempotents(G, classes, marks)
    k = len(classes)
    res = [p_residual_class(G, classes, i, p) for i in range(k)]
    perfect = sorted(set(res))
    eps = {}
    for t in perfect:
        v = [Fraction(0)] * k
        for i in range(k):
            if res[i] == t:
                v = [a + b for a, b in zip(v, e[i])]
        for c in v:
            if c.denominator % p == 0:
                raise NonIntegral(
                    f"Dress idempotent for class {t} not p-integral: {c}")
        eps[t] = v
    total = [sum(eps[t][j] for t in perfect) for j in range(k)]
    unit = [Fraction(1 if len(classes[j]) == G.order else 0) for j in range(k)]
    if total != unit:
        raise AssertionError("Dress idempotents do not sum to 1")
    return perfect, eps


def _fraction_mod(c: Fraction, pN: int) -> int:
    if c.denominator % pN == 0 or np.gcd(c.denominator, pN) != 1:
        raise NonIntegral(f"denominator {c.denominator} not invertible mod {pN}")
    return (c.numerator * pow(c.denominator, -1, pN)) % pN


def completed_basis(G: PermGroup, p: int, N: int = 4, classes=None, marks=None):
    """Indices (into subgroup classes) of the p-subgroup classes: the free
    basis [G/P] of the (I,p)-completed Burnside ring.  Verifies that
    eps_1 . [G/H] is supported on this basis mod p^N for every class H."""
    if classes is None:
        classes = G.subgroup_classes()
    if marks is None:
        marks = table_of_marks(G, classes)
    psubs = G.p_subgroup_classes(p)
    pidx = []
    for P in psubs:
        for j, J in enumerate(classes):
            if len(J) == len(P) and G.are_conjugate_subgroups(P, J) is not None:
                pidx.append(j)
                break
        else:
            raise AssertionError("p-subgroup missing from subgroup classes")
    pidx = sorted(set(pidx))
    perfect, eps = dress_idempotents(G, p, classes, marks)
    res = [p_residual_class(G, classes, i, p) for i in range(len(classes))]
    triv = res[0]  # class of the trivial subgroup is its own residual
    eps1 = eps[triv]
    pN = p ** N
    k = len(classes)
    for h in range(k):
        basis_h = [Fraction(1 if j == h else 0) for j in range(k)]
        v = burn_mul(marks, eps1, basis_h)
        for j in range(k):
            if j in pidx:
                continue
            if _fraction_mod(v[j], pN) != 0:
                raise SpanFailure(
                    f"eps_1.[G/H_{h}] has a non-p-class coefficient mod {pN}")
    return pidx


# ---------------------------------------------------------------------------
# Burn_G(X x Y): orbit bases, span composition, linearization

@dataclass
class SpanBasis:
    """Orbit basis of Burn_G(X x Y): entries (class index, (x, y)) with
    (x, y) fixed by the class representative, one per N_G(H)-orbit."""
    group: PermGroup
    X: GSet
    Y: GSet
    classes: list                 # subgroup class representatives
    entries: list                 # (ci, (x, y)) orbit representatives
    lookup: dict                  # (ci, (x, y)) -> entry index, all pairs

    def index_of(self, ci: int, x: int, y: int) -> int:
        return self.lookup[(ci, (int(x), int(y)))]


def span_basis(G: PermGroup, X: GSet, Y: GSet, classes=None) -> SpanBasis:
    if classes is None:
        classes = G.subgroup_classes()
    ix = X.all_images()
    iy = Y.all_images()
    entries = []
    lookup = {}
    for ci, H in enumerate(classes):
        fx = np.ones(X.n, dtype=bool)
        fy = np.ones(Y.n, dtype=bool)
        for h in H:
            fx &= ix[h] == np.arange(X.n)
            fy &= iy[h] == np.arange(Y.n)
        pts = [(int(a), int(b)) for a in np.nonzero(fx)[0] for b in np.nonzero(fy)[0]]
        N = sorted(G.normalizer(H))
        seen = set()
        for pt in pts:
            if pt in seen:
                continue
            orbit = {pt}
            frontier = [pt]
            while frontier:
                nxt = []
                for (a, b) in frontier:
                    for g in N:
                        q = (int(ix[g][a]), int(iy[g][b]))
                        if q not in orbit:
                            orbit.add(q)
                            nxt.append(q)
                frontier = nxt
            idx = len(entries)
            entries.append((ci, pt))
            for q in orbit:
                lookup[(ci, q)] = idx
            seen |= orbit
    return SpanBasis(G, X, Y, classes, entries, lookup)


def _canon_term(G: PermGroup, basis: SpanBasis, R: frozenset, x: int, z: int,
                ix, iz):
    """Normalize (R, (x, z)) to a basis index of basis (over X x Z)."""
    for ci, J in enumerate(basis.classes):
        if len(J) != len(R):
            continue
        g = G.are_conjugate_subgroups(R, J)
        if g is not None:
            return basis.index_of(ci, int(ix[g][x]), int(iz[g][z]))
    raise AssertionError("stabilizer class not found")


def identity_span(G: PermGroup, X: GSet, basis: SpanBasis):
    """Coefficients of the diagonal class Delta_X in Burn_G(X x X)."""
    ix = X.all_images()
    coeffs = np.zeros(len(basis.entries), dtype=np.int64)
    for orbit in X.orbits():
        x = orbit[0]
        S = X.stabilizer(x)
        coeffs[_canon_term(G, basis, S, x, x, ix, ix)] += 1
    return coeffs


def compose_spans(G: PermGroup, bXY: SpanBasis, bYZ: SpanBasis,
                  bXZ: SpanBasis, alpha, beta):
    """Composition Burn_G(X x Y) x Burn_G(Y x Z) -> Burn_G(X x Z): on basis
    spans the fibered product over Y, decomposed into orbits by double
    cosets.  alpha, beta, result: integer coefficient vectors."""
    ix = bXY.X.all_images()
    iy = bXY.Y.all_images()
    iz = bYZ.Y.all_images()
    out = [Fraction(0)] * len(bXZ.entries)
    nz_a = [i for i in range(len(alpha)) if alpha[i]]
    nz_b = [i for i in range(len(beta)) if beta[i]]
    for ia in nz_a:
        ci, (x1, y1) = bXY.entries[ia]
        H = bXY.classes[ci]
        for ib in nz_b:
            cj, (y2, z2) = bYZ.entries[ib]
            K = bYZ.classes[cj]
            coef = Fraction(int(alpha[ia]) * int(beta[ib]), len(H) * len(K))
            # each double coset HgK with g.y2 = y1 is one orbit of the
            # fibered product, hit |H||K|/|R| times in this scan
            for g in range(G.order):
                if int(iy[g][y2]) != y1:
                    continue
                gi = int(G.inv_ids[g])
                Rset = frozenset(h for h in H
                                 if G.mul(G.mul(gi, h), g) in K)
                t = _canon_term(G, bXZ, Rset, x1, int(iz[g][z2]), ix, iz)
                out[t] += coef * len(Rset)
    res = np.zeros(len(out), dtype=np.int64)
    for i, c in enumerate(out):
        if c.denominator != 1:
            raise AssertionError("span composition produced a fraction")
        res[i] = int(c)
    return res


def linearize(G: PermGroup, basis: SpanBasis, coeffs, pN: Optional[int] = None):
    """Matrix of the element as a map R[X] -> R[Y]: entry (y, x) counts the
    points of the span over (x, y).  Integer matrix, optionally mod p^N."""
    ix = basis.X.all_images()
    iy = basis.Y.all_images()
    M = np.zeros((basis.Y.n, basis.X.n), dtype=np.int64)
    for i in range(len(basis.entries)):
        c = int(coeffs[i])
        if c == 0:
            continue
        ci, (x, y) = basis.entries[i]
        h = len(basis.classes[ci])
        cnt = np.zeros((basis.Y.n, basis.X.n), dtype=np.int64)
        np.add.at(cnt, (iy[:, y], ix[:, x]), 1)
        if np.any(cnt % h != 0):
            raise AssertionError("span point count not divisible by |H|")
        M += c * (cnt // h)
    return M % pN if pN is not None else M


# ---------------------------------------------------------------------------
# the completed double-Burnside algebra of G x G on X = G, diagonal basis

@dataclass
class DiagonalBurnside:
    """Completed Burn_{G x G}(X x X) for X = G with (g1,g2).x = g1 x g2^-1,
    restricted to the Lemma-style basis: spans Gamma/Delta(Q) with Q a
    p-subgroup (every stabilizer with a fixed point is conjugate to a plain
    diagonal).  Basis entries: (p-class index, pair (x, y)) with x, y in
    C_G(Q), one per N_Gamma(Delta(Q))-orbit."""
    group: PermGroup
    p: int
    psubs: list                  # p-subgroup class representatives
    entries: list                # (qi, (x, y))
    lookup: dict                 # (qi, (x, y)) -> entry index
    struct: np.ndarray           # (n, n, n) integer structure constants
    central: np.ndarray          # (n, |G|) linearization to Z(Z[G])

    @property
    def dim(self):
        return len(self.entries)


def _diag_orbits(G: PermGroup, Q: frozenset):
    """Orbits of N_Gamma(Delta(Q)) = {(a, ac): a in N_G(Q), c in C_G(Q)} on
    C_G(Q) x C_G(Q), acting by (x, y) -> (a x c^-1 a^-1, a y c^-1 a^-1)."""
    C = sorted(G.centralizer_of_set(_subgroup_gens(G, Q) or [0]))
    Ngens = _subgroup_gens(G, G.normalizer(Q)) or [0]
    Cgens = _subgroup_gens(G, frozenset(C)) or [0]
    moves = []
    for a in Ngens:
        ai = int(G.inv_ids[a])
        moves.append(lambda x, y, a=a, ai=ai: (G.mul(G.mul(a, x), ai),
                                               G.mul(G.mul(a, y), ai)))
    for c in Cgens:
        ci = int(G.inv_ids[c])
        moves.append(lambda x, y, ci=ci: (G.mul(x, ci), G.mul(y, ci)))
    orbits = []
    seen = set()
    for x in C:
        for y in C:
            if (x, y) in seen:
                continue
            orb = {(x, y)}
            frontier = [(x, y)]
            while frontier:
                nxt = []
                for (u, v) in frontier:
                    for mv in moves:
                        q = mv(u, v)
                        if q not in orb:
                            orb.add(q)
                            nxt.append(q)
                frontier = nxt
            orbits.append(((x, y), orb))
            seen |= orb
    return orbits


def diagonal_burnside(G: PermGroup, p: int) -> DiagonalBurnside:
    psubs = G.p_subgroup_classes(p)
    entries = []
    lookup = {}
    for qi, Q in enumerate(psubs):
        for rep, orb in _diag_orbits(G, Q):
            idx = len(entries)
            entries.append((qi, rep))
            for q in orb:
                lookup[(qi, q)] = idx
    n = len(entries)
    mt = G.mul_table()
    inv = G.inv_ids
    # composition via double cosets of twisted diagonals: the matching
    # elements gamma = (g, y1^-1 g y2) are parametrized by g in G
    struct = np.zeros((n, n, n), dtype=np.int64)
    classmap = {}  # frozenset -> (qi, conjugator)
    def canon_q(Qp: frozenset):
        if Qp not in classmap:
            for qi, Q0 in enumerate(psubs):
                if len(Q0) != len(Qp):
                    continue
                a = G.are_conjugate_subgroups(Qp, Q0)
                if a is not None:
                    classmap[Qp] = (qi, a)
                    break
            else:
                raise AssertionError("composition left the p-basis")
        return classmap[Qp]

    for i in range(n):
        qi, (x1, y1) = entries[i]
        Q1 = sorted(psubs[qi])
        y1i = int(inv[y1])
        for j in range(n):
            qj, (y2, z2) = entries[j]
            Q2 = sorted(psubs[qj])
            Q2set = psubs[qj]
            denom = len(Q1) * len(Q2)
            acc = np.zeros(n, dtype=np.int64)
            for g1 in range(G.order):
                g2 = int(mt[int(mt[y1i, g1]), y2])
                g1i = int(inv[g1])
                g2i = int(inv[g2])
                # R = Delta(Q1) cap (g1,g2) Delta(Q2) (g1,g2)^-1, plain
                # diagonal on Qp = {r in Q1: g1^-1 r g1 = g2^-1 r g2 in Q2}
                Qp = []
                for r in Q1:
                    q = int(mt[int(mt[g1i, r]), g1])
                    if q in Q2set and int(mt[int(mt[g2i, r]), g2]) == q:
                        Qp.append(r)
                Qp = frozenset(Qp)
                w = (x1, int(mt[int(mt[g1, z2]), g2i]))
                q0, a = canon_q(Qp)
                ai = int(inv[a])
                wa = (int(mt[int(mt[a, w[0]]), ai]), int(mt[int(mt[a, w[1]]), ai]))
                # each double coset Delta(Q1) gamma Delta(Q2) is one orbit
                # term; it is scanned |Q1||Q2|/|Qp| times
                acc[lookup[(q0, wa)]] += len(Qp)
            if np.any(acc % denom != 0):
                raise AssertionError("double coset count mismatch")
            struct[i, j] = acc // denom
    # linearization: the span acts on R[G] as right multiplication by a
    # central element z with z_t = (1/|Q|) #{g: g (y x^-1) g^-1 = t}
    central = np.zeros((n, G.order), dtype=np.int64)
    for i in range(n):
        qi, (x, y) = entries[i]
        t0 = int(mt[y, int(inv[x])])
        cnt = np.zeros(G.order, dtype=np.int64)
        for g in range(G.order):
            cnt[int(mt[int(mt[g, t0]), int(inv[g])])] += 1
        if np.any(cnt % len(psubs[qi]) != 0):
            raise AssertionError("central linearization not integral")
        central[i] = cnt // len(psubs[qi])
    return DiagonalBurnside(G, p, psubs, entries, lookup, struct, central)
