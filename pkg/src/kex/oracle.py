"""Brute-force reference solvers for tiny instances.

Nothing here touches the enumeration or ILP modules: candidates are generated
locally and packed by exhaustive search.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .instance import Instance
from .solution import ExchangeSet, validate_solution

DEFAULT_CAP = 100_000
SUBSET_CAP = 25


class OracleCapError(RuntimeError):
    pass


@dataclass
class OracleResult:
    best: ExchangeSet
    value: object
    explored: int


@dataclass(frozen=True)
class _Cand:
    vertices: frozenset
    weight: object
    cycle: tuple | None = None  # RDP sequence
    chain: tuple | None = None  # (ndd, rdps)


def _cand_cycles(inst, K, cap):
    out = []

    def ext(path, s):
        u = path[-1]
        for v in inst.succ(u):
            if not inst.is_rdp(v):
                continue
            if v == s and len(path) <= K:
                w = sum(inst.arcs[(path[i], path[(i + 1) % len(path)])] for i in range(len(path)))
                out.append(_Cand(frozenset(path), w, cycle=tuple(path)))
                if len(out) > cap:
                    raise OracleCapError(f"more than {cap} candidates")
            elif v > s and v not in path and len(path) < K:
                ext(path + [v], s)

    if K >= 1:
        for s in inst.rdps:
            ext([s], s)
    return out


def _cand_chains(inst, L, cap):
    out = []

    def ext(n, rdps):
        last = rdps[-1] if rdps else n
        w = sum(inst.arcs[a] for a in zip((n,) + tuple(rdps), rdps)) + inst.tau_weight(last)
        out.append(_Cand(frozenset((n,) + tuple(rdps)), w, chain=(n, tuple(rdps))))
        if len(out) > cap:
            raise OracleCapError(f"more than {cap} candidates")
        if 1 + len(rdps) >= L:
            return
        for v in inst.succ(last):
            if inst.is_rdp(v) and v not in rdps:
                ext(n, rdps + (v,))

    if L >= 1:
        for n in inst.ndds:
            ext(n, ())
    return out


def candidates(inst: Instance, K: int, L: int, cap=DEFAULT_CAP) -> list:
    c = _cand_cycles(inst, K, cap) + _cand_chains(inst, L, cap)
    if len(c) > cap:
        raise OracleCapError(f"more than {cap} candidates")
    return c


def _to_set(inst, picked) -> ExchangeSet:
    return ExchangeSet.from_parts(inst, [c.cycle for c in picked if c.cycle],
                                  [c.chain for c in picked if c.chain])


def brute_force_optimum(inst: Instance, K: int, L, cap=DEFAULT_CAP) -> OracleResult:
    """Exact optimum by memoised search over covered-vertex sets.

    The lowest uncovered vertex is either left unused or covered by a candidate
    whose lowest vertex it is; the best value of each covered set is cached.
    """
    if L == "unbounded" or L is None:
        L = inst.rdp_count + 1
    cands = [c for c in candidates(inst, K, L, cap) if c.weight > 0]
    order = sorted(inst.vertices)
    bit = {v: 1 << i for i, v in enumerate(order)}
    full = (1 << len(order)) - 1
    by_low = [[] for _ in order]
    for c in cands:
        m = 0
        for v in c.vertices:
            m |= bit[v]
        by_low[(m & -m).bit_length() - 1].append((m, c.weight, c))
    memo = {}

    def best(mask):
        if mask == full:
            return 0
        hit = memo.get(mask)
        if hit is not None:
            return hit[0]
        low = ~mask & (mask + 1)
        i = low.bit_length() - 1
        val, pick = best(mask | low), None
        for m, w, c in by_low[i]:
            if not m & mask:
                v = w + best(mask | m)
                if v > val:
                    val, pick = v, (m, c)
        memo[mask] = (val, pick)
        return val

    best(0)
    picked, mask = [], 0
    while mask != full:
        _, pick = memo[mask]
        if pick is None:
            mask |= ~mask & (mask + 1)
        else:
            picked.append(pick[1])
            mask |= pick[0]
    xs = _to_set(inst, picked)
    assert validate_solution(inst, xs, K, L).valid
    return OracleResult(xs, xs.objective, len(memo))


def _perm_candidates(inst, K, L) -> list:
    """Candidates by level-wise extension and subset rotation (second generator)."""
    arcs = inst.arcs
    out = []
    for k in range(1, K + 1):
        for vs in itertools.permutations(inst.rdps, k):
            if vs[0] != min(vs):
                continue
            if all((vs[i], vs[(i + 1) % k]) in arcs for i in range(k)):
                w = sum(arcs[(vs[i], vs[(i + 1) % k])] for i in range(k))
                out.append(_Cand(frozenset(vs), w, cycle=vs))
    level = [(n,) for n in inst.ndds] if L >= 1 else []
    while level:
        nxt = []
        for p in level:
            w = sum(arcs[(p[i], p[i + 1])] for i in range(len(p) - 1)) + inst.tau_weight(p[-1])
            out.append(_Cand(frozenset(p), w, chain=(p[0], p[1:])))
            if len(p) < L:
                nxt += [p + (v,) for v in inst.rdps if v not in p and (p[-1], v) in arcs]
        level = nxt
    return out


def subset_optimum(inst: Instance, K: int, L, limit=SUBSET_CAP) -> OracleResult:
    """Enumerate every pairwise-disjoint subset of candidates. Only for <= ``limit`` candidates."""
    if L == "unbounded" or L is None:
        L = inst.rdp_count + 1
    cands = _perm_candidates(inst, K, L)
    if len(cands) > limit:
        raise OracleCapError(f"{len(cands)} candidates exceed the subset limit {limit}")
    n = len(cands)
    best, best_pick, count = 0, (), 0
    stack = [(0, frozenset(), 0, ())]
    while stack:
        i, used, value, pick = stack.pop()
        if i == n:
            count += 1
            if value > best:
                best, best_pick = value, pick
            continue
        stack.append((i + 1, used, value, pick))
        c = cands[i]
        if c.vertices.isdisjoint(used):
            stack.append((i + 1, used | c.vertices, value + c.weight, pick + (c,)))
    xs = _to_set(inst, best_pick)
    return OracleResult(xs, xs.objective, count)
