"""Permutation groups, fixtures, subgroup machinery."""

import numpy as np
import pytest

from brauerlift.fixtures import load_group, FIXTURES
from brauerlift.groups import PermGroup, GSet

ORDERS = {"psl27": 168, "borel21": 21, "s3": 6, "a4": 12, "c7": 7,
          "trivial": 1}
CLASS_COUNTS = {"psl27": 6, "borel21": 5, "s3": 3, "a4": 4, "c7": 7,
                "trivial": 1}


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_fixture_orders_and_classes(name):
    G = load_group(name)
    assert G.order == ORDERS[name]
    assert len(G.conjugacy_classes()) == CLASS_COUNTS[name]


def test_mul_table_consistent():
    G = load_group("s3")
    mt = G.mul_table()
    for a in range(G.order):
        assert mt[a, 0] == a and mt[0, a] == a
        assert mt[a, G.inv_ids[a]] == 0


def test_subgroup_classes_s3():
    G = load_group("s3")
    classes = G.subgroup_classes()
    assert sorted(len(H) for H in classes) == [1, 2, 3, 6]


def test_p_subgroup_classes():
    G = load_group("psl27")
    assert sorted(len(Q) for Q in G.p_subgroup_classes(7)) == [1, 7]
    A = load_group("a4")
    assert sorted(len(Q) for Q in A.p_subgroup_classes(3)) == [1, 3]


def test_normalizer_order():
    G = load_group("psl27")
    Q = max(G.p_subgroup_classes(7), key=len)
    assert len(G.normalizer(Q)) == 21


def test_regular_gset_action():
    G = load_group("a4")
    X = GSet.regular(G)
    assert X.n == G.order
    mt = G.mul_table()
    for gi, g in enumerate(G.gens):
        gid = G.index[g]
        acts = X.gen_actions[gi]
        for x in range(G.order):
            assert acts[x] == mt[gid, x]


def test_conjugacy_classes_partition():
    G = load_group("a4")
    classes = G.conjugacy_classes()
    seen = sorted(x for cls in classes for x in cls)
    assert seen == list(range(G.order))
    assert classes[0] == [0]
