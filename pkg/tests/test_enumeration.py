import itertools

import pytest

from kex.enumeration import (HalfKind, PsMethod, enumerate_chains, enumerate_cycles,
                             enumerate_half_chains, enumerate_half_cycles, position_sets_chain,
                             position_sets_cycle)
from kex.instance import make_instance
from kex.reduction import Family, reduce_subgraph

from conftest import random_instance


def test_cycles_appendix(ex):
    assert [str(c) for c in enumerate_cycles(ex, 2)] == ["<1,4,1>"]
    assert len(enumerate_cycles(ex, 3)) == 2
    assert len(enumerate_cycles(ex, 4)) == 3
    assert enumerate_cycles(ex, 1) == []


def test_chains_appendix(ex):
    chains = enumerate_chains(ex, 3)
    assert len(chains) == 7
    assert all(c.length <= 3 for c in chains)
    assert enumerate_chains(ex, 0) == []
    assert {c.rdps for c in enumerate_chains(ex, 1)} == {()}


def _subset_cycles(inst, K):
    out = set()
    for k in range(1, K + 1):
        for vs in itertools.permutations(inst.rdps, k):
            if vs[0] == min(vs) and all((vs[i], vs[(i + 1) % k]) in inst.arcs for i in range(k)):
                out.add(vs)
    return out


@pytest.mark.parametrize("seed", range(6))
def test_cycles_match_subset_rotation(seed):
    inst = random_instance(seed, R=7, N=0, density=0.4)
    for K in range(2, 6):
        assert {c.vertices for c in enumerate_cycles(inst, K)} == _subset_cycles(inst, K)


def test_half_cycles_appendix(ex):
    assert len(enumerate_half_cycles(ex, 4)) == 6


@pytest.mark.parametrize("seed", range(5))
def test_half_cycles_reconstruct(seed):
    """Every cycle of length <= 4 has exactly one split into surviving halves obeying rule (iii)."""
    inst = random_instance(100 + seed, R=7, N=0, density=0.45)
    halves = {h.vertices for h in enumerate_half_cycles(inst, 4)}
    for c in enumerate_cycles(inst, 4):
        vs = c.vertices
        if len(vs) == 1:
            assert vs in halves
            continue
        n, found = len(vs), 0
        for j in range(1, n):
            p, q = vs[:j + 1], vs[j:] + vs[:1]   # p starts at the lowest vertex
            kp, kq = len(p) - 1, len(q) - 1
            if kq in (kp, kp - 1) and p in halves and q in halves:
                found += 1
        assert found == 1, (vs, found)


def test_half_chains_appendix(ex):
    firsts, seconds, ones = enumerate_half_chains(ex, 4)
    assert (len(firsts), len(seconds), len(ones)) == (5, 8, 2)
    assert all(h.kind is HalfKind.FIRST for h in firsts)


@pytest.mark.parametrize("seed", range(5))
def test_half_chains_reconstruct(seed):
    inst = random_instance(200 + seed, R=7, N=2, density=0.4)
    L = 4
    firsts, seconds, ones = enumerate_half_chains(inst, L)
    F = {h.vertices for h in firsts}
    S = {h.vertices for h in seconds}
    for c in enumerate_chains(inst, L):
        if not c.rdps:
            assert any(h.vertices == (c.ndd,) for h in ones)
            continue
        vs = (c.ndd,) + c.rdps
        assert any(vs[:i + 1] in F and vs[i:] in S for i in range(1, len(vs))), vs


def test_position_sets_three_cycle():
    tri = make_instance(3, 0, [(1, 2), (2, 3), (3, 1)])
    sp = position_sets_cycle(tri, 4, PsMethod.SHORTEST_PATH, reduce=False)
    bfs = position_sets_cycle(tri, 4, PsMethod.BFS, reduce=False)
    assert (sp[(1, 1, 2)], sp[(1, 2, 3)], sp[(1, 3, 1)]) == ({1}, {2, 3}, {3, 4})
    assert (bfs[(1, 1, 2)], bfs[(1, 2, 3)], bfs[(1, 3, 1)]) == ({1}, {2}, {3})


def test_position_set_totals(ex):
    assert position_sets_cycle(ex, 4).total() == 9
    assert position_sets_chain(ex, 4).total() == 20


def _walk_ends(succ, s, k):
    ends = {s}
    for _ in range(k):
        ends = {v for u in ends for v in succ.get(u, ())}
    return ends


@pytest.mark.parametrize("seed", range(4))
def test_bfs_positions_are_walk_realised(seed):
    """A kept (arc, k) starts a closed walk through s: k-1 arcs to its tail, <= K-k back."""
    inst = random_instance(300 + seed, R=7, N=0, density=0.4)
    K = 4
    ps = position_sets_cycle(inst, K, PsMethod.BFS, reduce=False)
    for s in inst.rdps:
        red = reduce_subgraph(inst, s, Family.PIEF, K, reduce=False)
        # walks leave s once and do not revisit it before closing
        inner = {}
        for u, v in red.arcs:
            if v != s:
                inner.setdefault(u, []).append(v)
        for (t, u, v), ks in ps.sets.items():
            if t != s:
                continue
            for k in ks:
                assert u in _walk_ends(inner, s, k - 1) or (k == 1 and u == s)
                assert red.d_to.get(v, 10**9) <= K - k


def test_bfs_keeps_non_simple_walks():
    """Positions come from walks, so a kept position need not lie on a simple cycle."""
    inst = make_instance(3, 0, [(1, 2), (2, 3), (3, 2), (2, 1)])
    ps = position_sets_cycle(inst, 4, PsMethod.BFS, reduce=False)
    # 1->2->3->2->1 is a closed walk of 4 arcs, not a cycle
    assert 3 in ps[(1, 3, 2)]
    assert all(len(c.vertices) < 4 for c in enumerate_cycles(inst, 4))


@pytest.mark.parametrize("seed", range(4))
def test_bfs_subset_of_sp(seed):
    inst = random_instance(400 + seed, R=8, N=2, density=0.35)
    a = position_sets_cycle(inst, 4, PsMethod.BFS)
    b = position_sets_cycle(inst, 4, PsMethod.SHORTEST_PATH)
    for key, ks in a.sets.items():
        assert ks <= b[key]
    a = position_sets_chain(inst, 4, PsMethod.BFS)
    b = position_sets_chain(inst, 4, PsMethod.SHORTEST_PATH)
    for key, ks in a.sets.items():
        assert ks <= b[key]
