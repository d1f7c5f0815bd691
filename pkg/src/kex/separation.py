"""Lazy cut families for the arc-based models.

Separation runs on integral incumbents only: the selected arcs are decomposed
into chains (paths leaving an NDD) and cycles, and each offending structure
yields one cut.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .instance import Instance
from .ir import Constraint, Sense


class CutKind(str, Enum):
    LONG_CYCLE = "long_cycle"    # cycles > K, path form with closing-arc term
    CYCLE_GT = "cycle_gt"        # cycles with lo < len < hi, cycle form
    LONG_CHAIN = "long_chain"    # chains > L and cycles >= L, minimal chain-infeasible path
    HYB_CHAIN = "hyb_chain"      # chains > L, path plus the NDD arcs into its first vertex
    ANY_CYCLE = "any_cycle"      # cycles <= bound, cycle form
    PATH_K = "path_k"            # cycles > K and chains with > K RDPs, path of K arcs


@dataclass(frozen=True)
class CutClass:
    kind: CutKind
    limit: int
    upper: int | None = None  # only CYCLE_GT: exclusive upper length


def decompose(inst: Instance, selected) -> tuple:
    """Split a set of selected arcs into chains ``(ndd, rdps)`` and cycles (lowest vertex first).

    Arcs to tau may be present and are ignored. Assumes out-degree <= 1.
    """
    succ = {}
    for u, v in selected:
        if inst.is_rdp(v):
            succ.setdefault(u, []).append(v)
    seen = set()
    chains = []
    for n in inst.ndds:
        if n not in succ:
            continue
        rdps, u = [], n
        while u in succ:
            v = succ[u][0]
            if v in seen or v in rdps:
                break
            rdps.append(v)
            u = v
        seen.update(rdps)
        chains.append((n, tuple(rdps)))
    cycles = []
    for s in sorted(v for v in succ if inst.is_rdp(v)):
        if s in seen:
            continue
        path, u = [s], s
        closed = False
        while u in succ:
            v = succ[u][0]
            if v == s:
                closed = True
                break
            if v in path or v in seen:
                break
            path.append(v)
            u = v
        if closed:
            seen.update(path)
            lo = path.index(min(path))
            cycles.append(tuple(path[lo:] + path[:lo]))
    return chains, cycles


class ArcSeparator:
    """Separator over a map ``arc -> [var ids]``; several ids per arc are summed."""

    def __init__(self, inst: Instance, arc_vars: dict, classes, name="cut"):
        self.inst = inst
        self.arc_vars = {a: list(js) for a, js in arc_vars.items()}
        self.classes = list(classes)
        self.name = name

    def selected(self, x) -> list:
        return [a for a, js in self.arc_vars.items() if sum(x[j] for j in js) > 0.5]

    def _coeffs(self, arcs, sign=1):
        out = {}
        for a in arcs:
            for j in self.arc_vars.get(a, ()):
                out[j] = out.get(j, 0) + sign
        return out

    def _row(self, coeffs, rhs, kind):
        return Constraint(coeffs, Sense.LE, rhs, f"{self.name}.{kind.value}", kind.value)

    def path_cut(self, p, rhs, kind, closing=False, ndd_in=False):
        arcs = [(p[i], p[i + 1]) for i in range(len(p) - 1)]
        co = self._coeffs(arcs)
        if closing and (p[-1], p[0]) in self.arc_vars and len(p) > 1:
            for j, a in self._coeffs([(p[-1], p[0])], -1).items():
                co[j] = co.get(j, 0) + a
        if ndd_in:
            ins = [(n, p[0]) for n in self.inst.pred(p[0]) if self.inst.is_ndd(n)]
            for j, a in self._coeffs(ins).items():
                co[j] = co.get(j, 0) + a
        return self._row(co, rhs, kind)

    def cycle_cut(self, c, kind):
        arcs = [(c[i], c[(i + 1) % len(c)]) for i in range(len(c))]
        return self._row(self._coeffs(arcs), len(c) - 1, kind)

    def cuts_for(self, chains, cycles) -> list:
        out = []
        for cc in self.classes:
            k, lim = cc.kind, cc.limit
            if k is CutKind.LONG_CYCLE:
                out += [self.path_cut(c[:lim], lim - 2, k, closing=True) for c in cycles if len(c) > lim]
            elif k is CutKind.CYCLE_GT:
                hi = cc.upper if cc.upper is not None else float("inf")
                out += [self.cycle_cut(c, k) for c in cycles if lim < len(c) < hi]
            elif k is CutKind.ANY_CYCLE:
                out += [self.cycle_cut(c, k) for c in cycles if len(c) <= lim]
            elif k is CutKind.LONG_CHAIN:
                out += [self.path_cut(r[:lim], lim - 2, k) for _, r in chains if len(r) >= lim]
                out += [self.path_cut(c[:lim], lim - 2, k) for c in cycles if len(c) >= lim]
            elif k is CutKind.HYB_CHAIN:
                out += [self.path_cut(r[:lim], lim - 1, k, ndd_in=True) for _, r in chains if len(r) >= lim]
            elif k is CutKind.PATH_K:
                out += [self.path_cut(c[:lim + 1], lim - 1, k) for c in cycles if len(c) > lim]
                out += [self.path_cut(r[:lim + 1], lim - 1, k) for _, r in chains if len(r) > lim]
        return out

    def __call__(self, x) -> list:
        chains, cycles = decompose(self.inst, self.selected(x))
        return self.cuts_for(chains, cycles)


def separate(values, separators) -> list:
    """Violated cuts from every separator at an integral point."""
    out = []
    for sep in separators:
        out += [c for c in sep(values) if c.violation(values) > 1e-6]
    return out
