"""Group algebras over GR(p^N, f): blocks, defect groups, Brauer
correspondents, and ordinary character tables.

Elements of GR[G] are (|G|, d) coefficient arrays indexed by the group's
enumeration order.  Blocks are computed mod p by splitting the centre on
its class-sum basis and are lifted to precision N by Newton iteration.
"""

import csv
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import ff
from .algcore import (Mod, StructAlgebra, algebra_radical, chop,
                      primitive_decomposition)
from .coeff import GR, FieldSpec, choose_coefficient_field, hensel_idempotent
from .groups import PermGroup, perm_mul


def coefficient_field_for(G: PermGroup, p: int) -> FieldSpec:
    return choose_coefficient_field(G.element_orders(), p)


class GroupAlgebra:
    def __init__(self, ring: GR, G: PermGroup):
        self.ring = ring
        self.group = G
        self.dim = G.order
        self._mt = G.mul_table()
        inv = G.inv_ids
        n = G.order
        self._lidx = self._mt[np.arange(n)[:, None], inv[None, :]]  # x_{k j^-1}
        self._ridx = self._mt[inv[:, None], np.arange(n)[None, :]].T  # x_{j^-1 k}
        self.one = ring.zeros(n)
        self.one[0] = ring.one()

    def basis_vec(self, i):
        v = self.ring.zeros(self.dim)
        v[i] = self.ring.one()
        return v

    def mul(self, x, y):
        R = self.ring
        n = self.dim
        d = R.d
        outer = np.zeros((n, n, 2 * d - 1), dtype=np.int64)
        xm = x % R.pN
        ym = y % R.pN
        for a in range(d):
            for b in range(d):
                outer[:, :, a + b] += (xm[:, None, a] * ym[None, :, b]) % R.pN
        z = np.zeros((n, 2 * d - 1), dtype=np.int64)
        np.add.at(z, self._mt.ravel(), outer.reshape(n * n, 2 * d - 1) % R.pN)
        return R._reduce_conv(z)

    def left_mult(self, x):
        return x[self._lidx] % self.ring.pN

    def right_mult(self, x):
        return x[self._ridx] % self.ring.pN

    def hensel(self, e):
        return hensel_idempotent(self.ring, e, mul=self.mul)

    def is_idempotent(self, e):
        return not np.any((self.mul(e, e) - e) % self.ring.pN != 0)

    def mod_p(self) -> "GroupAlgebra":
        if self.ring.N == 1:
            return self
        cached = getattr(self, "_modp", None)
        if cached is None:
            cached = GroupAlgebra(GR(self.ring.spec, 1), self.group)
            self._modp = cached
        return cached

    def at_precision(self, N: int) -> "GroupAlgebra":
        return GroupAlgebra(GR(self.ring.spec, N), self.group)

    def regular_module(self) -> Mod:
        gens = []
        for g in self.group.gens:
            gi = self.group.index[g]
            gens.append(self.left_mult(self.basis_vec(gi)))
        return Mod(self.ring, gens, self.dim)

    def rho_blocks(self, S: Mod):
        """rho_S(e_g) for every group element g, stacked flat, where S is a
        composition factor of regular_module() (generators = group gens)."""
        R = self.ring
        G = self.group
        mats = [None] * G.order
        mats[0] = R.eye(S.dim)
        for i in range(1, G.order):
            parent, gi = G.words[i]
            mats[i] = R.matmul(S.gens[gi], mats[parent])
        return np.stack([m.reshape(-1, R.d) for m in mats])

    def element_matrices_on(self, M: Mod, ids=None):
        """Action matrices of the given group element ids on M (BFS words)."""
        R = self.ring
        G = self.group
        mats = [None] * G.order
        mats[0] = R.eye(M.dim)
        want = set(range(G.order)) if ids is None else set(int(i) for i in ids)
        out = {}
        for i in range(G.order):
            if i > 0:
                parent, gi = G.words[i]
                mats[i] = R.matmul(M.gens[gi], mats[parent])
            if i in want:
                out[i] = mats[i]
        return out

    # -- centre --
    def class_sums(self):
        G = self.group
        R = self.ring
        classes = G.conjugacy_classes()
        sums = R.zeros(len(classes), self.dim)
        for k, cls in enumerate(classes):
            for i in cls:
                sums[k, i, 0] = 1
        return sums, classes

    def center_algebra(self):
        """Centre as a structure-constant algebra on the class-sum basis.
        Returns (algebra, class list, embed function)."""
        R = self.ring
        sums, classes = self.class_sums()
        k = len(classes)
        reps = [cls[0] for cls in classes]
        C = R.zeros(k, k, k)
        for i in range(k):
            for j in range(k):
                prod = self.mul(sums[i], sums[j])
                C[i, j] = prod[reps]  # coefficient at class representatives
        one = R.zeros(k)
        one[0] = R.one()

        def embed(coords):
            return R.vecmat(coords, sums)

        return StructAlgebra(R, C, one), classes, embed


@dataclass
class Block:
    idempotent: np.ndarray          # (|G|, d) over the algebra's ring
    algebra: GroupAlgebra
    defect_class_index: Optional[int] = None

    @property
    def ring(self):
        return self.algebra.ring

    def dim(self) -> int:
        """Rank of the block ideal b.GR[G]."""
        from .coeff import rank_mod_p
        L = self.algebra.left_mult(self.idempotent)
        return rank_mod_p(self.ring, L)


def block_idempotents_mod_p(A: GroupAlgebra, rng=None):
    """Primitive central idempotents of F_q[G], deterministically ordered:
    the block containing the principal character's central character first
    (principal block), then by (dim descending, support)."""
    if rng is None:
        rng = np.random.default_rng(0)
    A1 = A if A.ring.N == 1 else A.mod_p()
    Z, classes, embed = A1.center_algebra()
    idems = primitive_decomposition(Z, rng=rng)
    out = [embed(e) for e in idems]
    R1 = A1.ring
    # principal block: the one with augmentation(e) = 1
    def aug(v):
        s = np.zeros(R1.d, dtype=np.int64)
        for i in range(v.shape[0]):
            s = R1.add(s, v[i])
        return s

    def key(v):
        principal = 0 if np.array_equal(aug(v), R1.one()) else 1
        supp = np.nonzero(np.any(v % R1.p != 0, axis=-1))[0]
        return (principal, -len(supp), tuple(supp[:8].tolist()))

    out.sort(key=key)
    return out


def lift_blocks(A: GroupAlgebra, blocks_mod_p=None, rng=None):
    """Block idempotents at precision N, as Block objects: Newton-lift of
    the mod-p family, with orthogonality and sum checks."""
    if blocks_mod_p is None:
        blocks_mod_p = block_idempotents_mod_p(A, rng)
    R = A.ring
    lifted = []
    total = R.zeros(A.dim)
    for eb in blocks_mod_p:
        e = A.hensel(eb % R.pN)
        lifted.append(e)
        total = R.add(total, e)
    if np.any((total - A.one) % R.pN != 0):
        raise ArithmeticError("block idempotents do not sum to 1")
    for i in range(len(lifted)):
        for j in range(i + 1, len(lifted)):
            if np.any(A.mul(lifted[i], lifted[j]) % R.pN != 0):
                raise ArithmeticError("block idempotents not orthogonal")
    return [Block(e, A) for e in lifted]


def brauer_homomorphism(A: GroupAlgebra, P: frozenset, z):
    """Br_P(z): truncate a central element to the centralizer C_G(P).
    Valid (multiplicative on Z(F[G])) for p-subgroups P."""
    G = A.group
    cent = G.centralizer_of_set(P)
    out = z.copy() % A.ring.pN
    mask = np.ones(G.order, dtype=bool)
    mask[sorted(cent)] = False
    out[mask] = 0
    return out


def defect_group(A: GroupAlgebra, b) -> tuple:
    """(defect subgroup representative, defect integer, class index among
    p_subgroup_classes).  b: block idempotent mod p."""
    A1 = A if A.ring.N == 1 else A.mod_p()
    b1 = b % A1.ring.p
    G = A.group
    p = A.ring.p
    psubs = G.p_subgroup_classes(p)
    best = None
    besti = -1
    for i, P in enumerate(psubs):
        if np.any(brauer_homomorphism(A1, P, b1) % p != 0):
            if best is None or len(P) > len(best):
                best = P
                besti = i
    assert best is not None  # P = 1 always survives
    defect = 0
    m = len(best)
    while m % p == 0:
        defect += 1
        m //= p
    return best, defect, besti


def subgroup_as_permgroup(G: PermGroup, H: frozenset) -> PermGroup:
    """A PermGroup on the same points generated by a small generating set
    of the subgroup H."""
    gens = []
    cur = frozenset([0])
    for h in sorted(H):
        if h in cur:
            continue
        gens.append(h)
        cur = G.subgroup(gens)
        if cur == H:
            break
    return PermGroup(G.degree, [G.elements[i] for i in gens])


def brauer_correspondent(A: GroupAlgebra, b, D: frozenset):
    """The block b' of F_q[N_G(D)] with b' Br_D(b) = b'.  Returns
    (N as PermGroup, group algebra of N mod p, b' idempotent)."""
    A1 = A if A.ring.N == 1 else A.mod_p()
    G = A.group
    NG = G.normalizer(D)
    Ngrp = subgroup_as_permgroup(G, NG)
    AN = GroupAlgebra(GR(A.ring.spec, 1), Ngrp)
    br = brauer_homomorphism(A1, D, b % A1.ring.p)
    # transport coefficients: element ids of G -> ids in Ngrp
    brN = AN.ring.zeros(Ngrp.order)
    for gid in np.nonzero(np.any(br != 0, axis=-1))[0]:
        tup = G.elements[gid]
        brN[Ngrp.index[tup]] = br[gid]
    cands = block_idempotents_mod_p(AN)
    hits = []
    for bp in cands:
        if not np.any((AN.mul(bp, brN) - bp) % AN.ring.p != 0):
            hits.append(bp)
    if len(hits) != 1:
        raise ArithmeticError(f"Brauer correspondent not unique: {len(hits)} found")
    return Ngrp, AN, hits[0]


# ---------------------------------------------------------------------------
# ordinary character tables

_TERM = re.compile(r"([+-]?)\s*(\d+)?\s*(?:\*\s*)?(z(?:\^(\d+))?)?\s*$")


def _parse_value(s: str, n: int) -> dict:
    """Parse an integer polynomial in z (order-n root of unity) into a dict
    exponent -> integer coefficient."""
    s = s.strip().replace(" ", "")
    if not s:
        raise ValueError("empty character value")
    out: dict = {}
    # split into signed terms
    terms = re.findall(r"[+-]?[^+-]+", s)
    for t in terms:
        m = _TERM.match(t)
        if not m:
            raise ValueError(f"bad character value term: {t!r}")
        sign, coef, zpart, exp = m.groups()
        c = int(coef) if coef is not None else 1
        if sign == "-":
            c = -c
        k = 0
        if zpart:
            k = int(exp) if exp is not None else 1
        k %= max(n, 1)
        out[k] = out.get(k, 0) + c
    return out


class TableMismatch(Exception):
    pass


@dataclass
class CharRow:
    label: str
    orbit: int            # size of the Galois orbit summed into this row
    values: list          # dict exponent -> int, per table class


class CharacterTable:
    """Q_p-rational character table: each row is the sum of a Galois orbit
    of absolutely irreducible complex characters, with values written as
    integer polynomials in a root of unity z of order root_order."""

    def __init__(self, group_label: str, root_order: int, classes: list,
                 rows: list):
        self.group_label = group_label
        self.root_order = root_order
        self.classes = classes  # list of (label, element_order, size)
        self.rows = rows

    @classmethod
    def from_csv(cls, path) -> "CharacterTable":
        classes = []
        rows = []
        label = ""
        n = 1
        with open(path) as fh:
            for rec in csv.reader(fh):
                if not rec or rec[0].startswith("#"):
                    continue
                tag = rec[0].strip()
                if tag == "group":
                    label = rec[1].strip()
                elif tag == "p_root_order":
                    n = int(rec[1])
                elif tag == "class":
                    classes.append((rec[1].strip(), int(rec[2]), int(rec[3])))
                elif tag == "row":
                    vals = [_parse_value(v, n) for v in rec[3:]]
                    rows.append(CharRow(rec[1].strip(), int(rec[2]), vals))
                else:
                    raise ValueError(f"unknown record {tag!r}")
        if len({len(r.values) for r in rows} | {len(classes)}) != 1:
            raise TableMismatch("row length does not match class count")
        return cls(label, n, classes, rows)

    def check_degree_relation(self, group_order: int):
        """sum over rows of deg^2 / orbit must equal |G|."""
        total = 0
        for r in self.rows:
            deg = r.values[0].get(0, 0)
            if any(k != 0 for k in r.values[0]):
                raise TableMismatch("degree column must be rational")
            if (deg * deg) % r.orbit != 0:
                raise TableMismatch("degree^2 not divisible by orbit size")
            total += deg * deg // r.orbit
        if total != group_order:
            raise TableMismatch(
                f"degree relation failed: got {total}, expected {group_order}")

    def value_in(self, R: GR, row: CharRow, col: int):
        """Evaluate a table value in GR(p^N): z goes to the Teichmueller
        root of order m = p'-part of root_order (the p-part collapses)."""
        n = self.root_order
        p = R.p
        m = n
        while m % p == 0:
            m //= p
        acc = R.zeros(1)[0]
        if m == 1:
            for k, c in row.values[col].items():
                acc = R.add(acc, R.from_int(c))
            return acc
        z = R.teichmuller_root(m)
        for k, c in row.values[col].items():
            term = R.int_mul(c, R.pow_scalar(z, k % m))
            acc = R.add(acc, term)
        return acc

    def class_assignments(self, G: PermGroup):
        """Yield maps table_col -> computed class index, consistent with
        (element order, size), iterating over the tie-group permutations."""
        import itertools
        classes = G.conjugacy_classes()
        orders = G.element_orders()
        computed = [(orders[c[0]], len(c)) for c in classes]
        buckets: dict = {}
        for ci, key in enumerate(computed):
            buckets.setdefault(key, []).append(ci)
        table_buckets: dict = {}
        for ti, (_, o, s) in enumerate(self.classes):
            table_buckets.setdefault((o, s), []).append(ti)
        if sorted(buckets) != sorted(table_buckets):
            raise TableMismatch("class (order, size) data does not match group")
        keys = sorted(buckets)
        pools = []
        for key in keys:
            tis = table_buckets[key]
            cis = buckets[key]
            if len(tis) != len(cis):
                raise TableMismatch("class multiset mismatch")
            pools.append([list(zip(tis, perm))
                          for perm in itertools.permutations(cis)])
        for combo in itertools.product(*pools):
            assign = {}
            for pairs in combo:
                for ti, ci in pairs:
                    assign[ti] = ci
            yield assign


def block_partition_of_characters(A: GroupAlgebra, table: CharacterTable,
                                  blocks=None, rng=None):
    """Partition of the table rows into blocks via central characters:
    chi and b lie together iff omega_chi(b) is 1 mod p (else 0)."""
    G = A.group
    p = A.ring.p
    table.check_degree_relation(G.order)
    # precision: the central character divides by chi(1); add headroom
    vmax = 0
    for r in table.rows:
        deg = r.values[0].get(0, 0)
        v = 0
        while deg % p == 0:
            v += 1
            deg //= p
        vmax = max(vmax, v)
    Nw = vmax + 2
    Rw = GR(A.ring.spec, Nw)
    Aw = A.at_precision(Nw)
    if blocks is None:
        blocks_w = lift_blocks(Aw, rng=rng)
    else:
        blocks_w = [Block(Aw.hensel(b.idempotent % Rw.p), Aw) for b in blocks]
    classes = G.conjugacy_classes()
    last_err = None
    for assign in table.class_assignments(G):
        try:
            partition = []
            for b in blocks_w:
                members = []
                # class coefficients of b
                reps = [cls[0] for cls in classes]
                coeffs = b.idempotent[reps]
                for r in table.rows:
                    deg = r.values[0].get(0, 0)
                    vdeg = 0
                    dd = deg
                    while dd % p == 0:
                        vdeg += 1
                        dd //= p
                    num = Rw.zeros(1)[0]
                    for ti in range(len(table.classes)):
                        ci = assign[ti]
                        val = table.value_in(Rw, r, ti)
                        term = Rw.mul(coeffs[ci], val)
                        term = Rw.int_mul(len(classes[ci]), term)
                        num = Rw.add(num, term)
                    # omega(b) = num / deg_row, deg_row = p^vdeg * dd
                    div = num
                    for _ in range(vdeg):
                        if np.any(div % p != 0):
                            raise TableMismatch("central character not integral")
                        div = div // p
                    uv = Rw.from_int(dd % Rw.pN)
                    om = Rw.mul(div, Rw.inv(uv)) % p
                    if np.array_equal(om, Rw.one() % p):
                        members.append(r.label)
                    elif np.any(om != 0):
                        raise TableMismatch("central character not 0 or 1 on a block")
                partition.append(members)
            flat = [x for part in partition for x in part]
            if sorted(flat) != sorted(r.label for r in table.rows):
                raise TableMismatch("character partition not a partition")
            return partition
        except TableMismatch as exc:
            last_err = exc
            continue
    raise last_err if last_err else TableMismatch("no consistent class matching")
