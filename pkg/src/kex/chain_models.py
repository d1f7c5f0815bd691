"""Chain formulations: CF, HCF, EF (EXP/MTZ), EEF (EXP/MTZ) and PIEF.

Under ``TauMode.IMPLICIT`` the arcs to tau get no variables; their weight is
recovered through objective terms (a constant for NDDs plus per-variable
corrections).
"""

from __future__ import annotations

from enum import Enum

from .cycle_models import ModelBuild, _pack_rows
from .enumeration import PsMethod, enumerate_chains, enumerate_half_chains, position_sets_chain
from .instance import TAU, Instance
from .ir import IlpModel
from .reduction import Family, reduce_for_model, reduce_subgraph
from .separation import ArcSeparator, CutClass, CutKind

UNBOUNDED = "unbounded"


class TauMode(str, Enum):
    EXPLICIT = "explicit"
    IMPLICIT = "implicit"


def normalize_L(inst: Instance, L):
    """Resolve an unbounded chain limit to |R|+1; returns ``(L, flags)``."""
    if L is None or L == UNBOUNDED or (isinstance(L, float) and L == float("inf")):
        return inst.rdp_count + 1, {"unbounded": True}
    L = int(L)
    if L < 0:
        raise ValueError("L must be nonnegative")
    return L, {}


def _new(kind, inst, L, tau_mode):
    tau_mode = TauMode(tau_mode)
    b = ModelBuild(IlpModel(kind), kind, inst, L=L, tau_mode=tau_mode.value)
    if tau_mode is TauMode.IMPLICIT and L >= 1:
        b.model.obj_constant = sum((inst.tau_weight(n) for n in inst.ndds), 0)
    return b, tau_mode is TauMode.IMPLICIT


def build_cf_chain(inst: Instance, L: int, tau_mode=TauMode.IMPLICIT) -> ModelBuild:
    b, implicit = _new("cf-chain", inst, L, tau_mode)
    ndd_rows, use = {}, {}
    for c in enumerate_chains(inst, L):
        if implicit and c.length == 1:
            continue
        obj = c.weight - (inst.tau_weight(c.ndd) if implicit else 0)
        j = b.model.add_var(f"y{c}", obj=obj)
        b.var_meta[j] = ("chain", c)
        ndd_rows.setdefault(c.ndd, {})[j] = 1
        for v in c.rdps:
            use.setdefault(v, {})[j] = 1
    for n in sorted(ndd_rows):
        b.model.add_constraint(ndd_rows[n], "<=", 1, f"chn.ndd[{n}]")
    _pack_rows(b, use, "chn.pack")
    return b


def build_hcf_chain(inst: Instance, L: int, tau_mode=TauMode.IMPLICIT) -> ModelBuild:
    b, implicit = _new("hcf-chain", inst, L, tau_mode)
    firsts, seconds, ones = enumerate_half_chains(inst, L)
    if implicit:
        ones = []
    ndd_rows, use, match = {}, {}, {}
    for h in firsts + seconds + ones:
        obj = h.weight
        if implicit and h.kind.value == "first":
            obj -= inst.tau_weight(h.start)
        j = b.model.add_var(f"y{h}", obj=obj)
        b.var_meta[j] = ("half_chain", h)
        if h.kind.value == "first":
            ndd_rows.setdefault(h.start, {})[j] = 1
            for v in h.vertices[1:]:
                use.setdefault(v, {})[j] = 1
            match.setdefault(h.end, {})[j] = 1
        elif h.kind.value == "second":
            for v in h.vertices[1:]:
                use.setdefault(v, {})[j] = 1
            match.setdefault(h.start, {})[j] = -1
        else:
            ndd_rows.setdefault(h.start, {})[j] = 1
    for n in sorted(ndd_rows):
        b.model.add_constraint(ndd_rows[n], "<=", 1, f"chn.ndd[{n}]")
    _pack_rows(b, use, "chn.pack")
    for v in sorted(match):
        b.model.add_constraint(match[v], "=", 0, f"chn.match[{v}]")
    return b


def _arc_obj(inst, u, v, implicit):
    """Objective coefficient of an arc variable, with the implicit-tau correction."""
    if v == TAU:
        return inst.tau_weight(u)
    w = inst.arcs[(u, v)]
    if implicit:
        w = w + inst.tau_weight(v) - inst.tau_weight(u)
    return w


def _ef_arcs(inst, L, reduce):
    if L <= 1:
        return [], []
    if reduce:
        red = reduce_for_model(inst, Family.EF_CHAIN, L=L)
        return sorted(red.arcs), sorted(red.vertices)
    return inst.arcs_nr + inst.arcs_rr, list(inst.rdps)


def _ef_chain(kind, inst, L, tau_mode, reduce, flags):
    b, implicit = _new(kind, inst, L, tau_mode)
    b.flags.update(flags or {})
    if L <= 0:
        return b, {}
    arcs, rdps = _ef_arcs(inst, L, reduce)
    if not implicit:
        arcs = arcs + [(v, TAU) for v in list(inst.ndds) + rdps]
    arc_vars = {}
    ndd_out, ins, flow = {}, {}, {}
    for u, v in arcs:
        j = b.model.add_var(f"y[{u},{v}]", obj=_arc_obj(inst, u, v, implicit))
        b.var_meta[j] = ("chain_arc", (u, v))
        if v != TAU:
            arc_vars[(u, v)] = [j]
            ins.setdefault(v, {})[j] = 1
            flow.setdefault(v, {})[j] = flow.get(v, {}).get(j, 0) - 1
        if inst.is_ndd(u):
            ndd_out.setdefault(u, {})[j] = 1
        else:
            flow.setdefault(u, {})[j] = flow.get(u, {}).get(j, 0) + 1
    for n in sorted(ndd_out):
        b.model.add_constraint(ndd_out[n], "<=", 1, f"chn.ndd[{n}]")
    _pack_rows(b, ins, "chn.in")
    sense = "<=" if implicit else "="
    for v in sorted(flow):
        if any(flow[v].values()):
            b.model.add_constraint(flow[v], sense, 0, f"chn.flow[{v}]")
    return b, arc_vars


def build_ef_chain_exp(inst: Instance, L: int, tau_mode=TauMode.IMPLICIT, reduce=True, flags=None) -> ModelBuild:
    b, arc_vars = _ef_chain("ef-chain-exp", inst, L, tau_mode, reduce, flags)
    if any(inst.is_rdp(u) for u, _ in arc_vars):
        if b.flags.get("unbounded"):
            classes = [CutClass(CutKind.ANY_CYCLE, inst.rdp_count + 1)]
        else:
            classes = [CutClass(CutKind.LONG_CHAIN, L), CutClass(CutKind.ANY_CYCLE, L - 1)]
        b.add_separator(ArcSeparator(inst, arc_vars, classes, "ef22"))
    return b


def _mtz_rows(b, inst, L, arc_vars):
    """Timestamps in [1, L-1] and one ordering row per RDP arc (aggregated over copies)."""
    rr = sorted(a for a in arc_vars if inst.is_rdp(a[0]))
    verts = sorted({u for u, _ in rr} | {v for _, v in rr})
    t = {}
    for v in verts:
        t[v] = b.model.add_var(f"t[{v}]", obj=0, lb=1.0, ub=float(L - 1), binary=False)
        b.var_meta[t[v]] = ("timestamp", v)
    for u, v in rr:
        co = {t[u]: 1}
        co[t[v]] = co.get(t[v], 0) - 1
        for j in arc_vars[(u, v)]:
            co[j] = co.get(j, 0) + (L - 1)
        if u != v and L >= 3 and (v, u) in arc_vars:
            for j in arc_vars[(v, u)]:
                co[j] = co.get(j, 0) + (L - 3)
        b.model.add_constraint(co, "<=", L - 2, f"chn.mtz[{u},{v}]")


def build_ef_chain_mtz(inst: Instance, L: int, tau_mode=TauMode.IMPLICIT, reduce=True, flags=None) -> ModelBuild:
    b, arc_vars = _ef_chain("ef-chain-mtz", inst, L, tau_mode, reduce, flags)
    _mtz_rows(b, inst, L, arc_vars)
    return b


def _eef_chain(kind, inst, L, tau_mode, reduce, flags):
    b, implicit = _new(kind, inst, L, tau_mode)
    b.flags.update(flags or {})
    unbounded = b.flags.get("unbounded", False)
    arc_vars, ins = {}, {}
    if L <= 0:
        return b, arc_vars
    for s in inst.ndds:
        if L >= 2:
            red = reduce_subgraph(inst, s, Family.EEF_CHAIN, L, reduce=reduce)
            arcs = sorted(red.arcs)
            rdps = sorted(red.vertices)
        else:
            arcs, rdps = [], []
        if not implicit:
            arcs = arcs + [(v, TAU) for v in [s] + rdps]
        if not arcs:
            continue
        leave, flow, total = {}, {}, {}
        for u, v in arcs:
            j = b.model.add_var(f"y{s}[{u},{v}]", obj=_arc_obj(inst, u, v, implicit))
            b.var_meta[j] = ("chain_sub_arc", s, (u, v))
            if u == s:
                leave.setdefault(v == TAU, {})[j] = 1
            else:
                flow.setdefault(u, {})[j] = 1
            if v != TAU:
                arc_vars.setdefault((u, v), []).append(j)
                ins.setdefault(v, {})[j] = 1
                flow.setdefault(v, {})[j] = flow.get(v, {}).get(j, 0) - 1
            # the lone donation s -> tau is kept out of the cardinality row
            if (u, v) != (s, TAU):
                total[j] = 1
        real_leave = leave.get(False, {})
        b.model.add_constraint({**real_leave, **leave.get(True, {})}, "<=", 1, f"chn.ndd[{s}]")
        sense = "<=" if implicit else "="
        for v in sorted(flow):
            if any(flow[v].values()):
                b.model.add_constraint(flow[v], sense, 0, f"chn.flow{s}[{v}]")
        if unbounded:
            for v in sorted(flow):
                out = {j: 1 for j, a in flow[v].items() if a > 0}
                if out:
                    row = dict(out)
                    for j in real_leave:
                        row[j] = row.get(j, 0) - 1
                    b.model.add_constraint(row, "<=", 0, f"chn.use{s}[{v}]")
        elif total:
            factor = L - 1 if implicit else L
            row = dict(total)
            for j in real_leave:
                row[j] = row.get(j, 0) - factor
            b.model.add_constraint(row, "<=", 0, f"chn.card[{s}]")
    _pack_rows(b, ins, "chn.in")
    return b, arc_vars


def build_eef_chain_exp(inst: Instance, L: int, tau_mode=TauMode.IMPLICIT, reduce=True, flags=None) -> ModelBuild:
    b, arc_vars = _eef_chain("eef-chain-exp", inst, L, tau_mode, reduce, flags)
    rr = {a: js for a, js in arc_vars.items() if inst.is_rdp(a[0])}
    bound = inst.rdp_count + 1 if b.flags.get("unbounded") else L - 2
    if rr and bound >= 1:
        b.add_separator(ArcSeparator(inst, arc_vars, [CutClass(CutKind.ANY_CYCLE, bound)], "eef42"))
    return b


def build_eef_chain_mtz(inst: Instance, L: int, tau_mode=TauMode.IMPLICIT, reduce=True, flags=None) -> ModelBuild:
    b, arc_vars = _eef_chain("eef-chain-mtz", inst, L, tau_mode, reduce, flags)
    _mtz_rows(b, inst, L, arc_vars)
    return b


def build_pief_chain(inst: Instance, L: int, tau_mode=TauMode.IMPLICIT, ps_method=PsMethod.BFS) -> ModelBuild:
    b, implicit = _new("pief-chain", inst, L, tau_mode)
    if L <= 0:
        return b
    ps = position_sets_chain(inst, L, ps_method)
    ndd_out, ins = {}, {}
    into, outof = {}, {}
    for (u, v), ks in sorted(ps.sets.items(), key=lambda kv: (kv[0][0], str(kv[0][1]))):
        if implicit and v == TAU:
            continue
        for k in sorted(ks):
            j = b.model.add_var(f"y{k}[{u},{v}]", obj=_arc_obj(inst, u, v, implicit))
            b.var_meta[j] = ("chain_pos_arc", k, (u, v))
            if inst.is_ndd(u):
                ndd_out.setdefault(u, {})[j] = 1
            else:
                outof.setdefault((u, k), []).append(j)
            if v != TAU:
                ins.setdefault(v, {})[j] = 1
                into.setdefault((v, k), []).append(j)
    for n in sorted(ndd_out):
        b.model.add_constraint(ndd_out[n], "<=", 1, f"chn.ndd[{n}]")
    _pack_rows(b, ins, "chn.in")
    kmax = L - 2 if implicit else L - 1
    keys = sorted({(v, k) for (v, k) in into if k <= kmax} | {(v, k - 1) for (v, k) in outof if 1 <= k - 1 <= kmax})
    sense = "<=" if implicit else "="
    for v, k in keys:
        co = {j: -1 for j in into.get((v, k), ())}
        for j in outof.get((v, k + 1), ()):
            co[j] = co.get(j, 0) + 1
        b.model.add_constraint(co, sense, 0, f"chn.pflow[{v},{k}]")
    b.flags["positions"] = ps
    return b
