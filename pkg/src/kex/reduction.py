"""Hop-count distances and graph reduction.

A vertex or arc is dropped when no cycle (chain) within the length limit can
use it, judged from shortest-path lengths counted in arcs.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .instance import Instance

# large enough that d + 2 <= L never holds for a meaningful L, small enough to stay int
INF = 1 << 40


class Family(str, Enum):
    EF_CYCLE = "ef_cycle"
    EF_CHAIN = "ef_chain"
    EF_HYBRID = "ef_hybrid"
    EEF_CYCLE = "eef_cycle"
    EEF_CHAIN = "eef_chain"
    PIEF = "pief"


@dataclass
class DistanceTables:
    """``d[u, v]`` for RDPs u, v (1-based; row/col 0 unused) and ``d_n[v]`` from the NDD set."""

    d: np.ndarray
    d_n: dict

    def __call__(self, u, v) -> int:
        return int(self.d[u, v])


@dataclass
class ReducedGraph:
    vertices: frozenset
    arcs: frozenset
    dropped: dict = field(default_factory=dict)
    # per-subgraph distances (only for reduce_subgraph)
    d_from: dict | None = None
    d_to: dict | None = None


def bfs(start, succ, allowed=None) -> dict:
    """Hop distances from ``start``; ``succ`` maps vertex -> iterable of heads."""
    dist = {start: 0}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in succ(u):
            if v in dist or (allowed is not None and v not in allowed):
                continue
            dist[v] = dist[u] + 1
            queue.append(v)
    return dist


def all_pairs_distances(inst: Instance) -> DistanceTables:
    n = inst.rdp_count
    d = np.full((n + 1, n + 1), INF, dtype=np.int64)
    if n:
        rr = inst.arcs_rr
        rows = [u - 1 for u, _ in rr]
        cols = [v - 1 for _, v in rr]
        g = csr_matrix((np.ones(len(rr)), (rows, cols)), shape=(n, n))
        sp = shortest_path(g, method="D", directed=True, unweighted=True)
        finite = np.isfinite(sp)
        d[1:, 1:] = np.where(finite, np.nan_to_num(sp, posinf=0), INF).astype(np.int64)
        np.fill_diagonal(d, 0)
        d[0, 0] = INF
    # multi-source BFS from all NDDs; NDDs themselves sit at distance 0
    d_n = {v: INF for v in inst.rdps}
    dist = {}
    queue = deque()
    for s in inst.ndds:
        dist[s] = 0
        queue.append(s)
    while queue:
        u = queue.popleft()
        for v in inst.succ(u):
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    for v, k in dist.items():
        if inst.is_rdp(v):
            d_n[v] = k
    return DistanceTables(d, d_n)


def reduce_for_model(inst: Instance, family, K=0, L=0, dist: DistanceTables | None = None) -> ReducedGraph:
    """Surviving RDPs and arcs (A_R and A_N) for the arc-based model families."""
    family = Family(family)
    if family not in (Family.EF_CYCLE, Family.EF_CHAIN, Family.EF_HYBRID):
        raise ValueError(f"reduce_for_model does not handle {family}")
    dist = dist or all_pairs_distances(inst)
    use_cyc = family in (Family.EF_CYCLE, Family.EF_HYBRID)
    use_chn = family in (Family.EF_CHAIN, Family.EF_HYBRID)
    arcs, dropped = set(), {}
    for u, v in sorted(inst.arcs):
        keep = False
        if inst.is_ndd(u):
            keep = use_chn and 2 <= L
        else:
            if use_cyc and dist(v, u) + 1 <= K:
                keep = True
            if use_chn and dist.d_n[u] + 2 <= L:
                keep = True
        if keep:
            arcs.add((u, v))
        else:
            dropped[(u, v)] = "no feasible exchange through arc"
    verts = set()
    for v in inst.rdps:
        keep = False
        if use_cyc and any(dist(v, u) + 1 <= K for u in inst.pred(v) if inst.is_rdp(u)):
            keep = True
        if use_chn and dist.d_n[v] + 1 <= L:
            keep = True
        if keep:
            verts.add(v)
        else:
            dropped[v] = "vertex unreachable within limit"
    # keep the surviving-endpoint invariant
    arcs = {(u, v) for u, v in arcs if v in verts and (inst.is_ndd(u) or u in verts)}
    return ReducedGraph(frozenset(verts), frozenset(arcs), dropped)


def subgraph_vertices(inst: Instance, s, family) -> set:
    """Vertex set of the subgraph copy for ``s`` before reduction (RDPs only)."""
    if Family(family) is Family.EEF_CHAIN:
        return set(inst.rdps)
    return {v for v in inst.rdps if v >= s}


def subgraph_arcs(inst: Instance, s, family) -> list:
    """Arcs of the subgraph copy (RDP arcs plus, for chains, the arcs leaving s)."""
    if Family(family) is Family.EEF_CHAIN:
        return [(s, v) for v in inst.succ(s)] + inst.arcs_rr
    return [(u, v) for u, v in inst.arcs_rr
            if u >= s and v >= s and (u != v or u == s)]


def reduce_subgraph(inst: Instance, s, family, limit, reduce=True) -> ReducedGraph:
    """Per-subgraph reduction; the subgraph is induced on {v >= s} for cycles, {s} + R for chains.

    Self-loops at v != s are excluded from cycle subgraphs (the loop at v belongs to G^v).
    """
    family = Family(family)
    if family is Family.EEF_CHAIN:
        if not inst.is_ndd(s):
            raise ValueError(f"subgraph root {s} is not an NDD")
    elif not inst.is_rdp(s):
        raise ValueError(f"subgraph root {s} is not an RDP")
    verts = subgraph_vertices(inst, s, family)
    arcs = subgraph_arcs(inst, s, family)
    succ, pred = {}, {}
    for u, v in arcs:
        succ.setdefault(u, []).append(v)
        pred.setdefault(v, []).append(u)
    d_from = bfs(s, lambda u: succ.get(u, ()))
    d_to = bfs(s, lambda u: pred.get(u, ())) if family is not Family.EEF_CHAIN else {}
    ff = lambda v: d_from.get(v, INF)  # noqa: E731
    tt = lambda v: d_to.get(v, INF)  # noqa: E731
    if not reduce:
        return ReducedGraph(frozenset(verts), frozenset(arcs), {}, d_from, d_to)
    keep_v, keep_a, dropped = set(), set(), {}
    for v in sorted(verts):
        ok = (ff(v) + 1 <= limit) if family is Family.EEF_CHAIN else (ff(v) + tt(v) <= limit)
        (keep_v.add(v) if ok else dropped.__setitem__(v, "vertex"))
    for u, v in arcs:
        if family is Family.EEF_CHAIN:
            ok = ff(u) + 2 <= limit
        else:
            ok = ff(u) + 1 + tt(v) <= limit
        ok = ok and v in keep_v and (u == s or u in keep_v)
        (keep_a.add((u, v)) if ok else dropped.__setitem__((u, v), "arc"))
    return ReducedGraph(frozenset(keep_v), frozenset(keep_a), dropped, d_from, d_to)


def restrict(inst: Instance, red: ReducedGraph) -> Instance:
    """Instance with only the surviving arcs; labels and tau weights are kept."""
    arcs = {a: w for a, w in inst.arcs.items() if a in red.arcs}
    return Instance(inst.rdp_count, inst.ndd_count, arcs, inst.tau_weights, inst.allow_self_loops)
