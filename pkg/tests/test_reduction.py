import numpy as np
import pytest

from kex.enumeration import enumerate_chains, enumerate_cycles
from kex.instance import make_instance
from kex.oracle import brute_force_optimum
from kex.reduction import (Family, all_pairs_distances, reduce_for_model, reduce_subgraph,
                           restrict)

from conftest import random_instance


def test_distances_appendix(ex):
    d = all_pairs_distances(ex)
    # 2->3->4->1 is the only route back to 1
    assert d(2, 1) == 3
    assert d(1, 4) == 1 and d(4, 1) == 1
    assert d.d_n == {1: 1, 2: 1, 3: 2, 4: 2}


def test_distances_match_matrix_powers():
    inst = random_instance(5, R=9, N=2, density=0.25)
    R = inst.rdp_count
    A = np.zeros((R, R), dtype=int)
    for u, v in inst.arcs_rr:
        A[u - 1, v - 1] = 1
    d = all_pairs_distances(inst)
    reach = np.eye(R, dtype=int)
    for k in range(1, R + 1):
        reach = np.minimum(reach @ A, 1)
        for u in range(R):
            for v in range(R):
                if reach[u, v] and u != v:
                    assert d(u + 1, v + 1) <= k


def test_ef_cycle_reduction_appendix(ex):
    red = reduce_for_model(ex, Family.EF_CYCLE, K=3)
    # the shortest cycle through (1,2) is 1-2-3-4-1
    assert (1, 2) not in red.arcs
    assert len([a for a in red.arcs if ex.is_rdp(a[0])]) == 5
    red2 = reduce_for_model(ex, Family.EF_CYCLE, K=2)
    assert red2.arcs == {(1, 4), (4, 1)}


def test_ef_chain_reduction_appendix(ex):
    red = reduce_for_model(ex, Family.EF_CHAIN, L=2)
    assert red.arcs == {(5, 1), (6, 2)}
    assert reduce_for_model(ex, Family.EF_CHAIN, L=1).arcs == frozenset()


def test_eef_subgraph_appendix(ex):
    red = reduce_subgraph(ex, 1, Family.EEF_CYCLE, 4)
    assert (4, 2) not in red.arcs and len(red.arcs) == 5
    red = reduce_subgraph(ex, 5, Family.EEF_CHAIN, 4)
    assert (3, 4) not in red.arcs


def test_subgraph_root_checks(ex):
    with pytest.raises(ValueError):
        reduce_subgraph(ex, 5, Family.EEF_CYCLE, 3)
    with pytest.raises(ValueError):
        reduce_subgraph(ex, 1, Family.EEF_CHAIN, 3)


@pytest.mark.parametrize("seed", range(5))
def test_kept_arcs_lie_on_exchanges(seed):
    inst = random_instance(40 + seed, R=8, N=2, density=0.3)
    K, L = 3, 4
    cyc_arcs = {a for c in enumerate_cycles(inst, K) for a in c.arcs()}
    chn_arcs = {a for c in enumerate_chains(inst, L) for a in c.arcs(with_tau=False)}
    assert reduce_for_model(inst, Family.EF_CYCLE, K=K).arcs == frozenset(cyc_arcs)
    assert reduce_for_model(inst, Family.EF_CHAIN, L=L).arcs == frozenset(chn_arcs)
    for s in inst.rdps:
        red = reduce_subgraph(inst, s, Family.EEF_CYCLE, K)
        through = {a for c in enumerate_cycles(inst, K) if c.vertices[0] == s for a in c.arcs()}
        assert set(red.arcs) == through


@pytest.mark.parametrize("seed", range(6))
def test_reduction_keeps_optimum(seed):
    inst = random_instance(60 + seed, R=9, N=2, density=0.3, weighted=True)
    for family, K, L in [(Family.EF_CYCLE, 3, 0), (Family.EF_CHAIN, 0, 4), (Family.EF_HYBRID, 3, 4)]:
        small = restrict(inst, reduce_for_model(inst, family, K=K, L=L))
        assert brute_force_optimum(small, K, L).value == brute_force_optimum(inst, K, L).value


def test_self_loops_only_in_own_subgraph():
    inst = make_instance(3, 0, [(1, 2), (2, 1), (2, 2)], allow_self_loops=True)
    assert (2, 2) not in reduce_subgraph(inst, 1, Family.EEF_CYCLE, 2, reduce=False).arcs
    assert (2, 2) in reduce_subgraph(inst, 2, Family.EEF_CYCLE, 2, reduce=False).arcs
