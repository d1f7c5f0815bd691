"""Cycle formulations: CF, HCF, EF, EEF and PIEF.

Each builder returns a ``ModelBuild``: the ILP, a map from variable id to the
graph object it encodes, and the per-RDP "used at most once" row that the
combiner merges with a chain model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .enumeration import PsMethod, enumerate_cycles, enumerate_half_cycles, position_sets_cycle
from .instance import Instance
from .ir import IlpModel
from .reduction import Family, reduce_for_model, reduce_subgraph
from .separation import ArcSeparator, CutClass, CutKind


@dataclass
class ModelBuild:
    model: IlpModel
    kind: str
    inst: Instance
    var_meta: dict = field(default_factory=dict)
    rdp_use: dict = field(default_factory=dict)  # RDP -> row index of its <= 1 row
    K: int = 0
    L: int = 0
    tau_mode: str = "explicit"
    lazy: list = field(default_factory=list)  # separators, also attached to model
    flags: dict = field(default_factory=dict)

    @property
    def stats(self) -> dict:
        m = self.model
        cont = sum(1 for v in m.variables if not v.binary)
        return {"vars": m.num_vars, "binaries": m.num_vars - cont, "continuous": cont,
                "constraints": m.num_constraints}

    def add_separator(self, sep):
        self.lazy.append(sep)
        self.model.separators.append(sep)


def _pack_rows(b: ModelBuild, terms: dict, stem: str):
    """Emit one <= 1 row per RDP from ``terms: v -> {var: coeff}``."""
    for v in sorted(terms):
        if terms[v]:
            b.rdp_use[v] = b.model.add_constraint(terms[v], "<=", 1, f"{stem}[{v}]")


def build_cf_cycle(inst: Instance, K: int) -> ModelBuild:
    b = ModelBuild(IlpModel("cf-cycle"), "cf-cycle", inst, K=K)
    use = {}
    for c in enumerate_cycles(inst, K):
        j = b.model.add_var(f"x{c}", obj=c.weight)
        b.var_meta[j] = ("cycle", c)
        for v in c.vertices:
            use.setdefault(v, {})[j] = 1
    _pack_rows(b, use, "cyc.pack")
    return b


def build_hcf_cycle(inst: Instance, K: int) -> ModelBuild:
    """Expects RDPs already ordered (descending degree by default, see ``assembly``)."""
    b = ModelBuild(IlpModel("hcf-cycle"), "hcf-cycle", inst, K=K)
    use, pairs = {}, {}
    for h in enumerate_half_cycles(inst, K):
        j = b.model.add_var(f"x{h}", obj=h.weight)
        b.var_meta[j] = ("half_cycle", h)
        for v in set(h.middle) | {h.start}:
            use.setdefault(v, {})[j] = 1
        if not h.is_loop:
            lo, hi = sorted((h.start, h.end))
            sign = 1 if h.start == lo else -1
            pairs.setdefault((lo, hi), {})[j] = sign
    _pack_rows(b, use, "cyc.pack")
    for (lo, hi), co in sorted(pairs.items()):
        b.model.add_constraint(co, "=", 0, f"cyc.pair[{lo},{hi}]")
    return b


def build_ef_cycle(inst: Instance, K: int, reduce=True) -> ModelBuild:
    b = ModelBuild(IlpModel("ef-cycle"), "ef-cycle", inst, K=K)
    if K <= 0:
        return b
    if K == 1:
        arcs = [(u, v) for u, v in inst.arcs_rr if u == v]
    elif reduce:
        arcs = sorted(a for a in reduce_for_model(inst, Family.EF_CYCLE, K=K).arcs if inst.is_rdp(a[0]))
    else:
        arcs = inst.arcs_rr
    arc_vars = {}
    ins, flow = {}, {}
    for u, v in arcs:
        j = b.model.add_var(f"x[{u},{v}]", obj=inst.arcs[(u, v)])
        b.var_meta[j] = ("arc", (u, v))
        arc_vars[(u, v)] = [j]
        ins.setdefault(v, {})[j] = 1
        flow.setdefault(v, {})[j] = flow.get(v, {}).get(j, 0) + 1
        flow.setdefault(u, {})[j] = flow.get(u, {}).get(j, 0) - 1
    _pack_rows(b, ins, "cyc.in")
    for v in sorted(flow):
        if any(flow[v].values()):
            b.model.add_constraint(flow[v], "=", 0, f"cyc.flow[{v}]")
    if K >= 2 and arcs:
        b.add_separator(ArcSeparator(inst, arc_vars, [CutClass(CutKind.LONG_CYCLE, K)], "ef14"))
    return b


def build_eef_cycle(inst: Instance, K: int, reduce=True) -> ModelBuild:
    """Expects RDPs already ordered (ascending degree by default)."""
    b = ModelBuild(IlpModel("eef-cycle"), "eef-cycle", inst, K=K)
    if K <= 0:
        return b
    ins = {}
    for s in inst.rdps:
        red = reduce_subgraph(inst, s, Family.EEF_CYCLE, K, reduce=reduce)
        arcs = sorted(red.arcs)
        if not arcs:
            continue
        flow, total, leave = {}, {}, {}
        for u, v in arcs:
            j = b.model.add_var(f"x{s}[{u},{v}]", obj=inst.arcs[(u, v)])
            b.var_meta[j] = ("sub_arc", s, (u, v))
            ins.setdefault(v, {})[j] = 1
            flow.setdefault(v, {})[j] = flow.get(v, {}).get(j, 0) + 1
            flow.setdefault(u, {})[j] = flow.get(u, {}).get(j, 0) - 1
            total[j] = 1
            if u == s:
                leave[j] = 1
        for v in sorted(flow):
            if any(flow[v].values()):
                b.model.add_constraint(flow[v], "=", 0, f"cyc.flow{s}[{v}]")
        row = dict(total)
        for j in leave:
            row[j] = row.get(j, 0) - K
        b.model.add_constraint(row, "<=", 0, f"cyc.card[{s}]")
    _pack_rows(b, ins, "cyc.in")
    return b


def build_pief_cycle(inst: Instance, K: int, ps_method=PsMethod.BFS, reduce=True) -> ModelBuild:
    """Expects RDPs already ordered (descending degree by default)."""
    b = ModelBuild(IlpModel("pief-cycle"), "pief-cycle", inst, K=K)
    if K <= 0:
        return b
    ps = position_sets_cycle(inst, K, ps_method, reduce=reduce)
    ins = {}
    into, outof = {}, {}
    for (s, u, v), ks in sorted(ps.sets.items()):
        for k in sorted(ks):
            j = b.model.add_var(f"x{s}.{k}[{u},{v}]", obj=inst.arcs[(u, v)])
            b.var_meta[j] = ("pos_arc", s, k, (u, v))
            ins.setdefault(v, {})[j] = 1
            into.setdefault((s, v, k), []).append(j)
            outof.setdefault((s, u, k), []).append(j)
    _pack_rows(b, ins, "cyc.in")
    keys = sorted({(s, v, k) for (s, v, k) in into if v != s and k <= K - 1}
                  | {(s, v, k - 1) for (s, v, k) in outof if v != s and k >= 2})
    for s, v, k in keys:
        co = {j: 1 for j in into.get((s, v, k), ())}
        for j in outof.get((s, v, k + 1), ()):
            co[j] = co.get(j, 0) - 1
        b.model.add_constraint(co, "=", 0, f"cyc.pflow{s}[{v},{k}]")
    b.flags["positions"] = ps
    return b
