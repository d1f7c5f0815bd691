"""Enumeration of cycles, chains, half-cycles, half-chains and PIEF position sets."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .instance import TAU, Instance
from .reduction import INF, Family, all_pairs_distances, reduce_subgraph


class PsMethod(str, Enum):
    BFS = "bfs"
    SHORTEST_PATH = "sp"


@dataclass(frozen=True, order=True)
class Cycle:
    vertices: tuple
    weight: object = 0

    def __len__(self):
        return len(self.vertices)

    def arcs(self):
        vs = self.vertices
        return [(vs[i], vs[(i + 1) % len(vs)]) for i in range(len(vs))]

    def __str__(self):
        return "<" + ",".join(map(str, self.vertices + self.vertices[:1])) + ">"


@dataclass(frozen=True, order=True)
class Chain:
    ndd: int
    rdps: tuple
    weight: object = 0

    @property
    def length(self) -> int:
        """Number of arcs, counting the donation to tau."""
        return 1 + len(self.rdps)

    def arcs(self, with_tau=True):
        vs = (self.ndd,) + self.rdps
        out = [(vs[i], vs[i + 1]) for i in range(len(vs) - 1)]
        if with_tau:
            out.append((vs[-1], TAU))
        return out

    def __str__(self):
        return "<" + ",".join(map(str, (self.ndd,) + self.rdps + (TAU,))) + ">"


@dataclass(frozen=True, order=True)
class HalfCycle:
    vertices: tuple
    weight: object = 0

    @property
    def k(self) -> int:
        return max(len(self.vertices) - 1, 1)

    @property
    def start(self):
        return self.vertices[0]

    @property
    def end(self):
        return self.vertices[-1]

    @property
    def middle(self) -> tuple:
        return self.vertices[1:-1]

    @property
    def is_loop(self) -> bool:
        return len(self.vertices) == 1

    def __str__(self):
        return "[" + ",".join(map(str, self.vertices)) + "]"


class HalfKind(str, Enum):
    FIRST = "first"
    SECOND = "second"
    LENGTH_ONE = "length_one"


@dataclass(frozen=True, order=True)
class HalfChain:
    """FIRST: (ndd, r1..rl); SECOND: (r1..rl) then tau; LENGTH_ONE: (ndd,) then tau."""

    kind: HalfKind
    vertices: tuple
    weight: object = 0

    @property
    def length(self) -> int:
        if self.kind is HalfKind.FIRST:
            return len(self.vertices) - 1
        return len(self.vertices)

    @property
    def start(self):
        return self.vertices[0]

    @property
    def end(self):
        return TAU if self.kind is not HalfKind.FIRST else self.vertices[-1]

    @property
    def middle(self) -> tuple:
        if self.kind is HalfKind.FIRST:
            return self.vertices[1:-1]
        return self.vertices[1:]

    def __str__(self):
        tail = (TAU,) if self.kind is not HalfKind.FIRST else ()
        return "[" + ",".join(map(str, self.vertices + tail)) + "]"


def _path_weight(inst, vs):
    return sum((inst.arcs[(vs[i], vs[i + 1])] for i in range(len(vs) - 1)), 0)


def enumerate_cycles(inst: Instance, K: int) -> list:
    """All simple cycles of length <= K, each rotated to start at its lowest vertex."""
    out = []
    if K <= 0:
        return out
    for s in inst.rdps:
        if K >= 1 and (s, s) in inst.arcs:
            out.append(Cycle((s,), inst.arcs[(s, s)]))
        # DFS over vertices > s
        path, on = [s], {s}

        def dfs(u, w):
            for v in inst.succ(u):
                if v == s and len(path) >= 2:
                    out.append(Cycle(tuple(path), w + inst.arcs[(u, s)]))
                elif v > s and v not in on and len(path) < K:
                    path.append(v)
                    on.add(v)
                    dfs(v, w + inst.arcs[(u, v)])
                    path.pop()
                    on.discard(v)

        dfs(s, 0)
    out.sort()
    return out


def enumerate_chains(inst: Instance, L: int) -> list:
    """All chains with at most L arcs (the final donation to tau counts as one)."""
    out = []
    if L <= 0:
        return out
    for n in inst.ndds:
        path = []
        on = set()

        def dfs(u, w):
            out.append(Chain(n, tuple(path), w + inst.tau_weight(u)))
            if len(path) + 1 >= L:
                return
            for v in inst.succ(u):
                if v in on:
                    continue
                path.append(v)
                on.add(v)
                dfs(v, w + inst.arcs[(u, v)])
                path.pop()
                on.discard(v)

        dfs(n, 0)
    out.sort()
    return out


def _simple_paths(inst, max_arcs, starts, allowed=None):
    """Yield simple RDP paths (as tuples) with 1..max_arcs arcs."""
    for s in starts:
        path, on = [s], {s}

        def dfs(u):
            for v in inst.succ(u):
                if v in on or not inst.is_rdp(v) or (allowed is not None and v not in allowed):
                    continue
                path.append(v)
                on.add(v)
                yield tuple(path)
                if len(path) - 1 < max_arcs:
                    yield from dfs(v)
                path.pop()
                on.discard(v)

        yield from dfs(s)


def enumerate_half_cycles(inst: Instance, K: int) -> list:
    """Half-cycles obeying length, lowest-endpoint and relaxed partner-existence rules.

    Self-loops (when allowed) are returned as one-vertex half-cycles.
    """
    out = []
    if K <= 0:
        return out
    if K >= 1:
        out += [HalfCycle((v,), inst.arcs[(v, v)]) for v in inst.rdps if (v, v) in inst.arcs]
    kmax = math.ceil(K / 2)
    cand = []
    for p in _simple_paths(inst, kmax, inst.rdps):
        k = len(p) - 1
        lo = min(p)
        if p[0] == lo:
            pass
        elif p[-1] == lo:
            if K % 2 == 1 and k == kmax:
                continue
        else:
            continue
        cand.append(p)
    # relaxed partner check: lengths available per (start, end)
    lengths = {}
    for p in cand:
        lengths.setdefault((p[0], p[-1]), set()).add(len(p) - 1)
    for p in cand:
        k = len(p) - 1
        back = lengths.get((p[-1], p[0]), set())
        want = (k, k - 1) if p[0] < p[-1] else (k, k + 1)
        if any(j in back and 1 <= j and j + k <= K for j in want):
            out.append(HalfCycle(p, _path_weight(inst, p)))
    out.sort(key=lambda h: (len(h.vertices) > 1, h.vertices))
    return out


def enumerate_half_chains(inst: Instance, L: int):
    """Return (firsts, seconds, length_ones) after compatibility pruning.

    A first half-chain of length l is kept if some second half-chain of length
    l or l+1 starts at its end, and vice versa with l or l-1.
    """
    if L <= 0:
        return [], [], []
    ones = [HalfChain(HalfKind.LENGTH_ONE, (n,), inst.tau_weight(n)) for n in inst.ndds]
    l1max, l2max = L // 2, math.ceil(L / 2)
    firsts = []
    if l1max >= 1:
        for p in _simple_paths(inst, l1max, inst.ndds):
            firsts.append(p)
    seconds = [(v,) for v in inst.rdps]
    if l2max >= 2:
        seconds += list(_simple_paths(inst, l2max - 1, inst.rdps))
    if l2max < 1:
        seconds = []

    by_end = {}
    for p in firsts:
        by_end.setdefault(p[-1], []).append(p)
    by_start = {}
    for q in seconds:
        by_start.setdefault(q[0], []).append(q)

    # relaxed like the half-cycle rule: intermediate-vertex overlap is ignored
    def compatible(p, q):
        return len(p) - 1 + len(q) <= L

    keep_f = []
    for p in firsts:
        l1 = len(p) - 1
        if any(len(q) in (l1, l1 + 1) and compatible(p, q) for q in by_start.get(p[-1], ())):
            keep_f.append(HalfChain(HalfKind.FIRST, p, _path_weight(inst, p)))
    keep_s = []
    for q in seconds:
        l2 = len(q)
        if any(len(p) - 1 in (l2, l2 - 1) and compatible(p, q) for p in by_end.get(q[0], ())):
            keep_s.append(HalfChain(HalfKind.SECOND, q, _path_weight(inst, q) + inst.tau_weight(q[-1])))
    keep_f.sort(key=lambda h: (len(h.vertices), h.vertices))
    keep_s.sort(key=lambda h: (len(h.vertices), h.vertices))
    return keep_f, keep_s, ones


@dataclass
class PositionSets:
    """Cycle sets are keyed (s, u, v); chain sets are keyed (u, v) with v possibly TAU."""

    sets: dict
    kind: str

    def total(self) -> int:
        return sum(len(k) for k in self.sets.values())

    def __getitem__(self, key):
        return self.sets.get(key, frozenset())


def position_sets_cycle(inst: Instance, K: int, method=PsMethod.BFS, reduce=True) -> PositionSets:
    method = PsMethod(method)
    sets = {}
    for s in inst.rdps:
        red = reduce_subgraph(inst, s, Family.PIEF, K, reduce=reduce)
        d_from, d_to = red.d_from, red.d_to
        ff = lambda v: d_from.get(v, INF)  # noqa: E731
        tt = lambda v: d_to.get(v, INF)  # noqa: E731
        arcs = sorted(red.arcs)
        if method is PsMethod.BFS:
            acc = {a: set() for a in arcs}
            frontier = {s}
            for k in range(1, K + 1):
                nxt = set()
                for u, v in arcs:
                    if u in frontier and tt(v) <= K - k:
                        acc[(u, v)].add(k)
                        if v != s:
                            nxt.add(v)
                frontier = nxt
        else:
            acc = {}
            for u, v in arcs:
                if u == s:
                    ks = {1} if tt(v) <= K - 1 else set()
                elif v == s:
                    ks = {k for k in range(2, K + 1) if ff(u) <= k - 1}
                else:
                    ks = {k for k in range(2, K) if ff(u) <= k - 1 and tt(v) <= K - k}
                acc[(u, v)] = ks
        for (u, v), ks in acc.items():
            if ks:
                sets[(s, u, v)] = frozenset(ks)
    return PositionSets(sets, "cycle")


def position_sets_chain(inst: Instance, L: int, method=PsMethod.BFS) -> PositionSets:
    method = PsMethod(method)
    arcs = inst.arcs_nr + inst.arcs_rr + [(v, TAU) for v in inst.vertices]
    sets = {}
    if method is PsMethod.BFS:
        acc = {}
        frontier = set(inst.ndds)
        for k in range(1, L + 1):
            nxt = set()
            for u, v in arcs:
                if u in frontier and (v == TAU or k != L):
                    acc.setdefault((u, v), set()).add(k)
                    if v != TAU:
                        nxt.add(v)
            frontier = nxt
    else:
        d_n = all_pairs_distances(inst).d_n
        acc = {}
        for u, v in arcs:
            if inst.is_ndd(u):
                ks = {1} if L >= (1 if v == TAU else 2) else set()
            elif v == TAU:
                ks = set(range(d_n[u] + 1, L + 1)) if d_n[u] < INF else set()
            else:
                ks = set(range(d_n[u] + 1, L)) if d_n[u] < INF else set()
            acc[(u, v)] = ks
    for a, ks in acc.items():
        if ks:
            sets[a] = frozenset(ks)
    return PositionSets(sets, "chain")
