"""Blocks, defect groups, Brauer correspondents, character partitions."""

import numpy as np
import pytest

from brauerlift.coeff import GR, rank_mod_p
from brauerlift.fixtures import load_group, load_chars
from brauerlift.galgebra import (GroupAlgebra, coefficient_field_for,
                                 block_idempotents_mod_p, lift_blocks,
                                 defect_group, brauer_correspondent,
                                 block_partition_of_characters)

BLOCK_COUNTS = {("psl27", 7): 2, ("borel21", 7): 1, ("s3", 3): 1,
                ("a4", 3): 2, ("c7", 7): 1, ("trivial", 5): 1}


@pytest.mark.parametrize("name,p", sorted(BLOCK_COUNTS))
def test_block_counts(name, p):
    G = load_group(name)
    A = GroupAlgebra(GR(coefficient_field_for(G, p), 1), G)
    assert len(block_idempotents_mod_p(A)) == BLOCK_COUNTS[(name, p)]


def test_lifted_blocks_exact():
    G = load_group("psl27")
    A = GroupAlgebra(GR(coefficient_field_for(G, 7), 4), G)
    R = A.ring
    blocks = lift_blocks(A)
    total = sum(b.idempotent for b in blocks) % R.pN
    one = R.zeros(G.order)
    one[0] = R.one()
    assert not np.any((total - one) % R.pN)
    for i, b in enumerate(blocks):
        assert not np.any((A.mul(b.idempotent, b.idempotent)
                           - b.idempotent) % R.pN)
        for c in blocks[i + 1:]:
            assert not np.any(A.mul(b.idempotent, c.idempotent) % R.pN)


def test_psl27_defects():
    G = load_group("psl27")
    A = GroupAlgebra(GR(coefficient_field_for(G, 7), 1), G)
    blocks = block_idempotents_mod_p(A)
    got = []
    for b in blocks:
        D, defect, _ = defect_group(A, b)
        got.append((defect, len(D)))
    assert sorted(got) == [(0, 1), (1, 7)]


def test_psl27_correspondent_order_21():
    G = load_group("psl27")
    A = GroupAlgebra(GR(coefficient_field_for(G, 7), 1), G)
    b = block_idempotents_mod_p(A)[0]
    D, defect, _ = defect_group(A, b)
    assert defect == 1
    Ngrp, AN, bp = brauer_correspondent(A, b, D)
    assert Ngrp.order == 21
    # the correspondent is the whole algebra of the order-21 Borel
    assert rank_mod_p(AN.ring, AN.left_mult(bp)) == 21


def test_psl27_character_partition():
    G = load_group("psl27")
    A = GroupAlgebra(GR(coefficient_field_for(G, 7), 1), G)
    table = load_chars("psl27")
    partition = block_partition_of_characters(A, table)
    parts = sorted([sorted(p) for p in partition], key=len, reverse=True)
    assert parts == [["chi1", "chi33b", "chi6", "chi8"], ["chi7"]]


def test_a4_blocks_and_defect():
    G = load_group("a4")
    A = GroupAlgebra(GR(coefficient_field_for(G, 3), 1), G)
    blocks = block_idempotents_mod_p(A)
    data = sorted((defect_group(A, b)[1], len(defect_group(A, b)[0]))
                  for b in blocks)
    assert data == [(0, 1), (1, 3)]
