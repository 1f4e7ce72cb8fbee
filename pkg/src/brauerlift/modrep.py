"""Direct-sum decompositions, projective indecomposables, Cartan matrices,
Brauer trees, and ordinary characters of lattices.

A module here is a Mod whose generators match the group generators of the
ambient GroupAlgebra.  All splitting goes through the endomorphism ring:
summands are images of primitive idempotents of End, computed mod p and
Newton-lifted when the base ring is GR(p^N) with N > 1.
"""

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .algcore import (Mod, StructAlgebra, algebra_radical, echelonize_rows,
                      hom_space, lift_decomposition, primitive_decomposition,
                      quotient, submodule)
from .coeff import GR, idempotent_image_basis, rank_mod_p
from .galgebra import Block, CharacterTable, GroupAlgebra, TableMismatch


def combine_matrices(R: GR, mats, coeffs):
    """sum_i coeffs[i] * mats[i] for a list of (n, n, d) matrices."""
    n = mats[0].shape[0]
    out = R.zeros(n, n)
    for i in range(len(mats)):
        if np.any(coeffs[i] % R.pN != 0):
            out = R.add(out, R.mul(coeffs[i][None, None, :], mats[i]))
    return out


def decompose(M: Mod, rng, homs=None):
    """Split M into indecomposable direct summands.  Returns a list of
    (rows, summand) pairs; rows span the summand inside M.  A precomputed
    basis of the endomorphism ring may be passed in."""
    R = M.ring
    if homs is None:
        homs = hom_space(M, M, rng=rng)
    eye_rows = R.eye(M.dim)
    if len(homs) == 1:
        return [(eye_rows, M)]
    alg, _ = StructAlgebra.from_matrix_basis(R, homs)
    if R.N == 1:
        prims = primitive_decomposition(alg, rng=rng)
    else:
        prims1 = primitive_decomposition(alg.mod_p(), rng=rng)
        prims = lift_decomposition(alg, alg.one, prims1)
    out = []
    for x in prims:
        emat = combine_matrices(R, homs, x)
        cols = idempotent_image_basis(R, emat)
        rows = cols.transpose(1, 0, 2)
        out.append((rows, submodule(M, rows)))
    assert sum(s.dim for _, s in out) == M.dim
    return out


def module_iso(M: Mod, N: Mod, rng, tries: int = 40):
    """An isomorphism M -> N (matrix acting on column vectors), or None.
    Randomized: a None answer for non-simple modules is correct with high
    probability rather than certainty."""
    if M.dim != N.dim:
        return None
    R = M.ring
    homs = hom_space(M, N, rng=rng)
    if not homs:
        return None
    for h in homs:
        if rank_mod_p(R, h) == M.dim:
            return h
    for _ in range(tries):
        c = R.random(rng, len(homs))
        h = combine_matrices(R, homs, c)
        if rank_mod_p(R, h) == M.dim:
            return h
    return None


def action_matrix(A: GroupAlgebra, M: Mod, x):
    """Matrix of the algebra element x (coefficients over group elements)
    acting on M."""
    R = M.ring
    rho = A.rho_blocks(M)  # (|G|, dim*dim, d)
    sel = np.nonzero(np.any(x % R.pN != 0, axis=-1))[0]
    out = R.zeros(M.dim * M.dim)
    for g in sel:
        out = R.add(out, R.mul(x[g][None, :], rho[g]))
    return out.reshape(M.dim, M.dim, R.d)


@dataclass
class PimClass:
    """One isomorphism class of projective indecomposables in a block."""
    idempotent: np.ndarray       # primitive idempotent mod p, (|G|, d)
    pim: Mod                     # the left ideal A e as a module
    top: Mod                     # pim / rad(pim), a simple module
    multiplicity: int            # how often the class occurs in the block


def pims_and_cartan(A: GroupAlgebra, block_idem, rng):
    """Isomorphism classes of PIMs in the block of the given idempotent,
    together with the Cartan matrix C[i][j] = dim e_i A e_j (entries are
    composition multiplicities when the coefficient field splits A).
    Classes are sorted by (top dimension, pim dimension)."""
    Am = A if A.ring.N == 1 else A.mod_p()
    R1 = Am.ring
    e0 = block_idem % R1.p
    rad = algebra_radical(Am, rng)
    prims = primitive_decomposition(Am, e0, rng=rng, rad_rows=rad)
    reg = Am.regular_module()

    def pim_of(e):
        Rm = Am.right_mult(e)  # x -> x e on coordinates
        rows = Rm.transpose(1, 0, 2)
        E, piv = echelonize_rows(R1, rows)
        P = submodule(reg, E)
        je = R1.matmul(rad, Rm.transpose(1, 0, 2)) if rad.shape[0] else R1.zeros(0, Am.dim)
        top = quotient(P, je[:, piv, :]) if je.shape[0] else P
        return P, top

    classes: list = []
    for e in prims:
        P, top = pim_of(e)
        placed = False
        for cls in classes:
            if cls.top.dim == top.dim and module_iso(cls.top, top, rng) is not None:
                cls.multiplicity += 1
                placed = True
                break
        if not placed:
            classes.append(PimClass(e, P, top, 1))
    classes.sort(key=lambda c: (c.top.dim, c.pim.dim))
    k = len(classes)
    cartan = [[0] * k for _ in range(k)]
    for i in range(k):
        Li = Am.left_mult(classes[i].idempotent)
        for j in range(k):
            Rj = Am.right_mult(classes[j].idempotent)
            cartan[i][j] = rank_mod_p(R1, R1.matmul(Li, Rj))
    return classes, cartan


# ---------------------------------------------------------------------------
# ordinary characters of lattices

def lattice_traces(A: GroupAlgebra, e):
    """Trace of each conjugacy class representative acting on the lattice
    A e by left multiplication: tr(g) = sum_h e(h^-1 g^-1 h).  Returns
    (traces (k, d), classes)."""
    G = A.group
    R = A.ring
    mt = A._mt
    inv = G.inv_ids
    classes = G.conjugacy_classes()
    n = G.order
    traces = R.zeros(len(classes))
    ar = np.arange(n)
    for k, cls in enumerate(classes):
        ginv = int(inv[cls[0]])
        a = mt[inv, ginv]        # h^-1 g^-1
        b = mt[a, ar]            # h^-1 g^-1 h
        traces[k] = e[b].sum(axis=0) % R.pN
    return traces, classes


def _as_integer(R: GR, x, bound: int):
    """Interpret a GR scalar as a rational integer in [0, bound], else None."""
    if np.any(x[1:] % R.pN != 0):
        return None
    c = int(x[0]) % R.pN
    if c > bound:
        return None
    return c


def character_multiplicities(A: GroupAlgebra, table: CharacterTable, e,
                             assign: dict):
    """Multiplicity of each table row in the character of the lattice A e,
    via inner products: m_row = <tr, conj(row)> / orbit.  The ring precision
    must exceed v_p(|G| * orbit) by enough headroom for the multiplicities.
    assign maps table columns to computed class indices."""
    G = A.group
    R = A.ring
    p = R.p
    traces, classes = lattice_traces(A, e)
    reps = [cls[0] for cls in classes]
    # class of the inverse of each class
    cls_of = {}
    for ci, cls in enumerate(classes):
        for g in cls:
            cls_of[g] = ci
    inv_class = [cls_of[int(G.inv_ids[r])] for r in reps]
    col_of = {assign[ti]: ti for ti in assign}
    out = {}
    for row in table.rows:
        num = R.zeros(1)[0]
        for ci in range(len(classes)):
            ti = col_of[inv_class[ci]]
            val = table.value_in(R, row, ti)
            term = R.mul(traces[ci], val)
            num = R.add(num, R.int_mul(len(classes[ci]), term))
        den = G.order * row.orbit
        a = 0
        while den % p == 0:
            a += 1
            den //= p
        for _ in range(a):
            if np.any(num % p != 0):
                raise TableMismatch("lattice character inner product not integral")
            num = num // p
        num = R.mul(num, R.inv(R.from_int(den % R.pN)))
        m = _as_integer(R, num, A.dim)
        if m is None:
            raise TableMismatch("non-integer character multiplicity")
        out[row.label] = m
    # the lattice rank must match the total degree
    degs = {r.label: r.values[0].get(0, 0) for r in table.rows}
    total = sum(out[l] * degs[l] for l in out)
    if total != rank_mod_p(GR(R.spec, 1), A.mod_p().left_mult(e % p)):
        raise TableMismatch("character degrees do not sum to the lattice rank")
    return out


# ---------------------------------------------------------------------------
# Brauer trees

@dataclass
class BrauerTree:
    vertices: list               # row labels (exceptional orbit summed)
    edges: list                  # (u, v, top_dim) per PIM class
    exceptional: Optional[str]   # vertex label, or None
    multiplicity: int            # exceptional multiplicity m

    def to_json(self) -> str:
        return json.dumps({
            "vertices": self.vertices,
            "edges": [{"ends": [u, v], "simple_dim": t} for u, v, t in self.edges],
            "exceptional_vertex": self.exceptional,
            "exceptional_multiplicity": self.multiplicity,
        }, indent=2)

    def to_dot(self) -> str:
        lines = ["graph brauer_tree {"]
        for v in self.vertices:
            extra = ""
            if v == self.exceptional:
                extra = f' [shape=doublecircle, label="{v} (m={self.multiplicity})"]'
            else:
                extra = f' [label="{v}"]'
            lines.append(f'  "{v}"{extra};')
        for u, v, t in self.edges:
            lines.append(f'  "{u}" -- "{v}" [label="dim {t}"];')
        lines.append("}")
        return "\n".join(lines)


def _tree_check(vertices, edges):
    if len(edges) != len(vertices) - 1:
        return False
    adj = {v: set() for v in vertices}
    for u, v, _ in edges:
        if u not in adj or v not in adj or u == v:
            return False
        adj[u].add(v)
        adj[v].add(u)
    seen = set()
    stack = [vertices[0]]
    while stack:
        x = stack.pop()
        if x in seen:
            continue
        seen.add(x)
        stack.extend(adj[x] - seen)
    return len(seen) == len(vertices)


def brauer_tree(A: GroupAlgebra, table: CharacterTable, block_index: int,
                rng, partition=None) -> BrauerTree:
    """Brauer tree of a block with cyclic defect group: vertices are the
    block's ordinary characters (p-adically irrational orbits summed into
    one row), edges the PIM classes; each PIM lifts to a lattice whose
    character is the sum of the two characters at its endpoints."""
    G = A.group
    p = A.ring.p
    # working precision: room for v_p(|G| * orbit) divisions plus integer
    # multiplicities bounded by |G|
    vp = 0
    m = G.order
    while m % p == 0:
        vp += 1
        m //= p
    head = 1
    while p ** head <= G.order:
        head += 1
    Aw = A.at_precision(vp + head)
    from .galgebra import lift_blocks, block_partition_of_characters
    blocks_w = lift_blocks(Aw)
    if partition is None:
        partition = block_partition_of_characters(A, table)
    labels = partition[block_index]
    eb = blocks_w[block_index].idempotent
    classes, _ = pims_and_cartan(A, eb, rng)
    rows_by_label = {r.label: r for r in table.rows}
    last_err = None
    for assign in table.class_assignments(G):
        try:
            edges = []
            for cls in classes:
                ew = Aw.hensel(cls.idempotent % Aw.ring.pN)
                mult = character_multiplicities(Aw, table, ew, assign)
                supp = sorted(l for l, m0 in mult.items() if m0 > 0)
                if any(mult[l] != 1 for l in supp) or len(supp) != 2:
                    raise TableMismatch(
                        f"PIM character is not a sum of two distinct rows: {mult}")
                if not set(supp) <= set(labels):
                    raise TableMismatch("PIM character leaves the block")
                edges.append((supp[0], supp[1], cls.top.dim))
            if not _tree_check(labels, edges):
                raise TableMismatch("PIM characters do not form a tree")
            exc = [l for l in labels if rows_by_label[l].orbit > 1]
            if len(exc) > 1:
                raise TableMismatch("more than one irrational character orbit")
            exceptional = exc[0] if exc else None
            mult_exc = rows_by_label[exceptional].orbit if exceptional else 1
            # ordinary character count: one per rational vertex, m at the
            # exceptional one
            k_b = sum(rows_by_label[l].orbit for l in labels)
            if k_b != len(edges) + mult_exc:
                raise TableMismatch("character count does not match tree shape")
            return BrauerTree(list(labels), edges, exceptional, mult_exc)
        except TableMismatch as exc_err:
            last_err = exc_err
            continue
    raise last_err if last_err else TableMismatch("no consistent class matching")


# ---------------------------------------------------------------------------
# projectivity

def is_projective(A: GroupAlgebra, M: Mod) -> bool:
    """Projectivity over the group algebra via restriction to a Sylow
    p-subgroup: there the module must be free, which holds exactly when
    dim M = |P| * dim of the coinvariants."""
    G = A.group
    p = A.ring.p
    M1 = M if M.ring.N == 1 else M.mod_p()
    A1 = A if A.ring.N == 1 else A.mod_p()
    R1 = M1.ring
    P = G.sylow(p)
    if len(P) == 1:
        return True
    from .galgebra import subgroup_as_permgroup
    Pgrp = subgroup_as_permgroup(G, P)
    ids = [G.index[t] for t in Pgrp.gens]
    mats = A1.element_matrices_on(M1, ids)
    cols = []
    eye = R1.eye(M1.dim)
    for i in ids:
        cols.append(R1.sub(mats[i], eye))
    stacked = np.concatenate(cols, axis=1)  # map (+)M -> M, x -> (g-1)x
    m = M1.dim - rank_mod_p(R1, stacked)
    return M1.dim == m * len(P)
