"""Permutation groups of small degree, enumerated explicitly.

Elements are tuples of images on {0, .., degree-1}.  The enumeration keeps a
BFS word for every element (parent index, generator index) so that any group
element can later be applied as a short product of generator actions.

Group files: first line ``degree=n``, then one permutation per line in cycle
notation with 1-based points, e.g. ``(1 2 3)(4 5)``.  Blank lines and lines
starting with ``#`` are skipped.
"""

import re
from typing import Optional

import numpy as np


def perm_mul(a: tuple, b: tuple) -> tuple:
    """(a*b)(x) = a(b(x))."""
    return tuple(a[b[i]] for i in range(len(a)))


def perm_inv(a: tuple) -> tuple:
    out = [0] * len(a)
    for i, j in enumerate(a):
        out[j] = i
    return tuple(out)


def perm_order(a: tuple) -> int:
    n = 1
    e = tuple(range(len(a)))
    x = a
    while x != e:
        x = perm_mul(x, a)
        n += 1
    return n


def parse_cycles(s: str, degree: int) -> tuple:
    img = list(range(degree))
    for cyc in re.findall(r"\(([^()]*)\)", s):
        pts = [int(t) - 1 for t in cyc.replace(",", " ").split()]
        if not pts:
            continue
        for i, pt in enumerate(pts):
            if not 0 <= pt < degree:
                raise ValueError(f"point {pt + 1} out of range in {s!r}")
            img[pt] = pts[(i + 1) % len(pts)]
    vals = sorted(img)
    if vals != list(range(degree)):
        raise ValueError(f"not a permutation: {s!r}")
    return tuple(img)


def cycle_notation(a: tuple) -> str:
    seen = [False] * len(a)
    parts = []
    for i in range(len(a)):
        if seen[i] or a[i] == i:
            seen[i] = True
            continue
        cyc = [i]
        seen[i] = True
        j = a[i]
        while j != i:
            cyc.append(j)
            seen[j] = True
            j = a[j]
        parts.append("(" + " ".join(str(x + 1) for x in cyc) + ")")
    return "".join(parts) if parts else "()"


class PermGroup:
    def __init__(self, degree: int, gens: list, name: str = ""):
        self.degree = degree
        self.gens = [tuple(g) for g in gens]
        self.name = name
        self._enumerate()

    @classmethod
    def from_file(cls, path) -> "PermGroup":
        with open(path) as fh:
            lines = [ln.strip() for ln in fh]
        lines = [ln for ln in lines if ln and not ln.startswith("#")]
        m = re.match(r"degree\s*=\s*(\d+)$", lines[0])
        if not m:
            raise ValueError("first line must be degree=n")
        degree = int(m.group(1))
        gens = [parse_cycles(ln, degree) for ln in lines[1:]]
        return cls(degree, gens)

    def _enumerate(self):
        e = tuple(range(self.degree))
        elems = [e]
        index = {e: 0}
        words = [(-1, -1)]  # (parent element index, generator index)
        frontier = [0]
        while frontier:
            nxt = []
            for i in frontier:
                x = elems[i]
                for gi, g in enumerate(self.gens):
                    y = perm_mul(g, x)
                    if y not in index:
                        index[y] = len(elems)
                        elems.append(y)
                        words.append((i, gi))
                        nxt.append(index[y])
            frontier = nxt
        self.elements = elems
        self.index = index
        self.words = words
        self.order = len(elems)
        n = self.order
        inv = np.zeros(n, dtype=np.int32)
        for i, x in enumerate(elems):
            inv[i] = index[perm_inv(x)]
        self.inv_ids = inv
        self._mul_table: Optional[np.ndarray] = None
        self._orders = None
        self._classes = None

    def mul_table(self) -> np.ndarray:
        if self._mul_table is None:
            n = self.order
            # row-by-row: table[i, j] = index(elems[i] * elems[j]); build via
            # words so each row costs one permutation composition per entry
            tbl = np.zeros((n, n), dtype=np.int32)
            elems, index = self.elements, self.index
            for i, x in enumerate(elems):
                tbl[i] = [index[perm_mul(x, y)] for y in elems]
            self._mul_table = tbl
        return self._mul_table

    def mul(self, i: int, j: int) -> int:
        if self._mul_table is not None:
            return int(self._mul_table[i, j])
        return self.index[perm_mul(self.elements[i], self.elements[j])]

    def word(self, i: int) -> list:
        """Generator indices w with elems[i] = g_{w[0]} * ... * g_{w[-1]}."""
        out = []
        while i != 0:
            parent, gi = self.words[i]
            out.append(gi)
            i = parent
        return out

    def bfs_order(self):
        """Indices in enumeration order; words[i][0] always precedes i."""
        return range(self.order)

    def element_orders(self):
        if self._orders is None:
            self._orders = [perm_order(x) for x in self.elements]
        return self._orders

    def conjugacy_classes(self):
        """List of sorted lists of element indices; class of identity first,
        then sorted by (element order, class size, min index)."""
        if self._classes is not None:
            return self._classes
        n = self.order
        seen = [False] * n
        classes = []
        for i in range(n):
            if seen[i]:
                continue
            orb = set()
            stack = [i]
            seen[i] = True
            orb.add(i)
            while stack:
                j = stack.pop()
                x = self.elements[j]
                for g in self.gens:
                    y = perm_mul(perm_mul(g, x), perm_inv(g))
                    yi = self.index[y]
                    if yi not in orb:
                        orb.add(yi)
                        seen[yi] = True
                        stack.append(yi)
            classes.append(sorted(orb))
        orders = self.element_orders()
        classes.sort(key=lambda c: (0 if c[0] == 0 else 1, orders[c[0]], len(c), c[0]))
        self._classes = classes
        return classes

    def subgroup(self, gen_ids) -> frozenset:
        """Element-id closure of the given element ids."""
        gens = [self.elements[i] for i in gen_ids]
        e = tuple(range(self.degree))
        closed = {e}
        frontier = [e]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = perm_mul(g, x)
                    if y not in closed:
                        closed.add(y)
                        nxt.append(y)
            frontier = nxt
        return frozenset(self.index[x] for x in closed)

    def conjugate_subgroup(self, H: frozenset, g: int) -> frozenset:
        gi = int(self.inv_ids[g])
        return frozenset(self.mul(self.mul(g, h), gi) for h in H)

    def normalizer(self, H: frozenset) -> frozenset:
        return frozenset(g for g in range(self.order)
                         if self.conjugate_subgroup(H, g) == H)

    def centralizer_of_set(self, S) -> frozenset:
        out = []
        for g in range(self.order):
            x = self.elements[g]
            if all(perm_mul(x, self.elements[s]) == perm_mul(self.elements[s], x) for s in S):
                out.append(g)
        return frozenset(out)

    def are_conjugate_subgroups(self, H: frozenset, K: frozenset):
        if len(H) != len(K):
            return None
        for g in range(self.order):
            if self.conjugate_subgroup(H, g) == K:
                return g
        return None

    def subgroup_classes(self):
        """Representatives of conjugacy classes of all subgroups, found by
        closing under one-generator extensions up to conjugacy.  Sorted by
        (order, min element id).  Feasible for |G| up to a couple thousand."""
        trivial = frozenset([0])
        reps = {1: [trivial]}
        frontier = [trivial]
        while frontier:
            nxt = []
            for H in frontier:
                for g in range(1, self.order):
                    if g in H:
                        continue
                    K = self.subgroup(set(H) | {g})
                    sz = len(K)
                    bucket = reps.setdefault(sz, [])
                    if any(self.are_conjugate_subgroups(K, J) is not None for J in bucket):
                        continue
                    bucket.append(K)
                    nxt.append(K)
            frontier = nxt
        out = []
        for sz in sorted(reps):
            out.extend(sorted(reps[sz], key=min))
        return out

    def sylow(self, p: int) -> frozenset:
        nu = 0
        n = self.order
        while n % p == 0:
            nu += 1
            n //= p
        target = p ** nu
        orders = self.element_orders()
        # start from a maximal-order p-element, extend through normalizers
        best = 0
        besti = 0
        for i in range(self.order):
            o = orders[i]
            if o != 1 and p ** round(_ilog(o, p)) == o and o > best:
                best, besti = o, i
        P = self.subgroup([besti]) if target > 1 else frozenset([0])
        while len(P) < target:
            N = self.normalizer(P)
            grew = False
            for g in sorted(N - P):
                o = orders[g]
                oo = o
                while oo % p == 0:
                    oo //= p
                if oo != 1:
                    continue
                K = self.subgroup(set(P) | {g})
                if len(K) > len(P) and _p_part(len(K), p) == len(K):
                    P = K
                    grew = True
                    break
            if not grew:
                raise AssertionError("sylow construction stalled")
        return P

    def p_subgroup_classes(self, p: int):
        """Conjugacy class representatives of p-subgroups (including the
        trivial one), via the subgroup lattice of one Sylow subgroup."""
        P = self.sylow(p)
        subs = _all_subgroups_of_small_group(self, P)
        out = []
        for H in sorted(subs, key=lambda s: (len(s), min(s))):
            if not any(self.are_conjugate_subgroups(H, K) is not None for K in out):
                out.append(H)
        return out

    def is_p_perfect(self, p: int) -> bool:
        """No normal subgroup of index p: the p-residual equals G.  Decided
        by abelianization: G is p-perfect iff p does not divide |G/[G,G]|."""
        comm_gens = set()
        for i in range(self.order):
            for gj, g in enumerate(self.gens):
                x = self.elements[i]
                c = perm_mul(perm_mul(perm_inv(x), perm_inv(g)), perm_mul(x, g))
                comm_gens.add(self.index[c])
        D = self.subgroup(comm_gens)
        idx = self.order // len(D)
        return idx % p != 0

    def coset_action(self, H: frozenset):
        """Left cosets gH: returns (n_cosets, point_of_element array, action)
        where action[gi] is the permutation of cosets induced by generator
        gi, and point_of_element[x] = coset id of x H."""
        reps = []
        coset_of = np.full(self.order, -1, dtype=np.int32)
        for x in range(self.order):
            if coset_of[x] >= 0:
                continue
            cid = len(reps)
            reps.append(x)
            for h in H:
                coset_of[self.mul(x, h)] = cid
        acts = []
        for g in self.gens:
            gi = self.index[g]
            perm = tuple(int(coset_of[self.mul(gi, reps[c])]) for c in range(len(reps)))
            acts.append(perm)
        return len(reps), coset_of, acts, reps


def _ilog(n, p):
    k = 0
    while p ** k < n:
        k += 1
    return k


def _p_part(n, p):
    out = 1
    while n % p == 0:
        out *= p
        n //= p
    return out


def _all_subgroups_of_small_group(G: PermGroup, P: frozenset):
    """All subgroups of the subgroup P (as frozensets of G-element ids)."""
    found = {frozenset([0])}
    frontier = [frozenset([0])]
    while frontier:
        nxt = []
        for H in frontier:
            for g in P - H:
                K = G.subgroup(set(H) | {g})
                if K not in found:
                    found.add(K)
                    nxt.append(K)
        frontier = nxt
    return found


class GSet:
    """A finite G-set: points 0..n-1 with the action of each group generator
    given as a permutation tuple."""

    def __init__(self, group: PermGroup, n: int, gen_actions: list, label: str = ""):
        self.group = group
        self.n = n
        self.gen_actions = [tuple(a) for a in gen_actions]
        self.label = label

    @classmethod
    def natural(cls, group: PermGroup) -> "GSet":
        return cls(group, group.degree, group.gens, "natural")

    @classmethod
    def regular(cls, group: PermGroup) -> "GSet":
        acts = []
        for g in group.gens:
            gi = group.index[g]
            acts.append(tuple(group.mul(gi, x) for x in range(group.order)))
        return cls(group, group.order, acts, "regular")

    @classmethod
    def cosets(cls, group: PermGroup, H: frozenset) -> "GSet":
        n, _, acts, _ = group.coset_action(H)
        return cls(group, n, acts, "cosets")

    def act_element(self, gidx: int, pts):
        """Image of points under a full group element (by generator word)."""
        word = self.group.word(gidx)
        out = np.asarray(pts)
        for gi in reversed(word):
            out = np.asarray(self.gen_actions[gi])[out]
        return out

    def all_images(self):
        """(|G|, n) table of the action of every group element, built along
        the BFS enumeration (one generator application per element)."""
        G = self.group
        tbl = np.zeros((G.order, self.n), dtype=np.int32)
        tbl[0] = np.arange(self.n)
        for i in range(1, G.order):
            parent, gi = G.words[i]
            tbl[i] = np.asarray(self.gen_actions[gi])[tbl[parent]]
        return tbl

    def orbits(self):
        parent = np.arange(self.n)

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for a in self.gen_actions:
            for i in range(self.n):
                ra, rb = find(i), find(a[i])
                if ra != rb:
                    parent[rb] = ra
        groupsd = {}
        for i in range(self.n):
            groupsd.setdefault(find(i), []).append(i)
        return sorted(groupsd.values(), key=lambda o: o[0])

    def stabilizer(self, pt: int) -> frozenset:
        imgs = self.all_images()
        return frozenset(np.nonzero(imgs[:, pt] == pt)[0].tolist())

    def fixed_points(self, H) -> list:
        imgs = self.all_images()
        mask = np.ones(self.n, dtype=bool)
        for h in H:
            mask &= imgs[h] == np.arange(self.n)
        return np.nonzero(mask)[0].tolist()
