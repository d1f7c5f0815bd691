"""Combining cycle and chain models, EF-HYBRID, RCVF, and solution extraction."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum

from . import chain_models as chm
from . import cycle_models as cym
from .chain_models import TauMode, normalize_L
from .cycle_models import ModelBuild
from .enumeration import PsMethod
from .instance import TAU, Instance, Order, relabel_map, reindex
from .ir import IlpModel, IpConfig, IpResult, IpStatus, LpStatus, solve_ip, solve_lp
from .reduction import Family, reduce_for_model
from .separation import ArcSeparator, CutClass, CutKind, decompose, separate  # noqa: F401
from .solution import ExchangeSet, validate_solution  # noqa: F401

CYCLE_MODELS = ("cf", "hcf", "ef", "eef", "pief", "none")
CHAIN_MODELS = ("cf", "hcf", "ef-exp", "ef-mtz", "eef-exp", "eef-mtz", "pief", "none")
RCVF_CYCLES = ("cf", "hcf", "pief")
RCVF_CHAINS = ("cf", "pief")

# vertex orderings that suit each cycle model
ORDERS = {"hcf": Order.DEGREE_DESC, "pief": Order.DEGREE_DESC, "eef": Order.DEGREE_ASC}


class Method(str, Enum):
    PLAIN = "plain"
    RCVF = "rcvf"


@dataclass
class SolveConfig:
    time_limit: float = 3600.0
    method: Method = Method.PLAIN
    tau_mode: TauMode = TauMode.IMPLICIT
    ps_method: PsMethod = PsMethod.BFS
    reduce: bool = True
    reorder: bool = True
    hybrid_special: bool = False
    backend: str | None = None
    seed: int = 0

    def __post_init__(self):
        if not self.time_limit > 0:
            raise ValueError("time_limit must be positive")


def method_ids() -> list:
    """All 42 method identifiers: 35 combinations, the hybrid, and 6 RCVF variants."""
    ids = [(c, ch, "plain") for c in CYCLE_MODELS[:-1] for ch in CHAIN_MODELS[:-1]]
    ids.append(("hybrid", "hybrid", "plain"))
    ids += [(c, ch, "rcvf") for c in RCVF_CYCLES for ch in RCVF_CHAINS]
    return ids


class _Shifted:
    """Run a separator on a slice of the variable vector and shift its cut indices."""

    def __init__(self, sep, offset, n):
        self.sep, self.offset, self.n = sep, offset, n

    def __call__(self, x):
        out = self.sep(x[self.offset:self.offset + self.n])
        for c in out:
            c.coeffs = {j + self.offset: a for j, a in c.coeffs.items()}
        return out


def combine(cycle_build: ModelBuild, chain_build: ModelBuild) -> ModelBuild:
    """Union of two builds; the per-RDP <= 1 rows of both are merged into one row."""
    if cycle_build.inst != chain_build.inst:
        raise ValueError("cycle and chain builds use different instances or labelings")
    cm, hm = cycle_build.model, chain_build.model
    m = IlpModel(f"{cycle_build.kind}+{chain_build.kind}")
    for v in cm.variables:
        m.add_var(v.name, v.obj, v.lb, v.ub, v.binary)
    off = cm.num_vars
    for v in hm.variables:
        name = v.name if v.name not in m._names else "chain:" + v.name
        m.add_var(name, v.obj, v.lb, v.ub, v.binary)
    m.obj_constant = cm.obj_constant + hm.obj_constant
    merged_c = {r: v for v, r in cycle_build.rdp_use.items() if v in chain_build.rdp_use}
    skip_h = {chain_build.rdp_use[v] for v in merged_c.values()}
    rdp_use = {}
    for i, c in enumerate(cm.constraints):
        co = dict(c.coeffs)
        label = c.label
        if i in merged_c:
            v = merged_c[i]
            hc = hm.constraints[chain_build.rdp_use[v]]
            for j, a in hc.coeffs.items():
                co[j + off] = co.get(j + off, 0) + a
            label = f"{c.label}+merged"
        idx = m.add_constraint(co, c.sense, c.rhs, label, c.lazy_class)
        for v, r in cycle_build.rdp_use.items():
            if r == i:
                rdp_use[v] = idx
    for i, c in enumerate(hm.constraints):
        if i in skip_h:
            continue
        label = c.label if c.label not in m._labels else "chain:" + c.label
        idx = m.add_constraint({j + off: a for j, a in c.coeffs.items()}, c.sense, c.rhs, label, c.lazy_class)
        for v, r in chain_build.rdp_use.items():
            if r == i:
                rdp_use[v] = idx
    b = ModelBuild(m, m.name, cycle_build.inst, K=cycle_build.K, L=chain_build.L, tau_mode=chain_build.tau_mode)
    b.var_meta = dict(cycle_build.var_meta)
    b.var_meta.update({j + off: meta for j, meta in chain_build.var_meta.items()})
    b.rdp_use = rdp_use
    b.flags = {**cycle_build.flags, **chain_build.flags, "parts": (cycle_build.kind, chain_build.kind)}
    for sep in cycle_build.lazy:
        b.add_separator(sep)
    for sep in chain_build.lazy:
        b.add_separator(_Shifted(sep, off, hm.num_vars))
    return b


def build_ef_hybrid(inst: Instance, K: int, L: int, tau_mode=TauMode.IMPLICIT, reduce=True,
                    special=False, flags=None) -> ModelBuild:
    """One arc variable set for cycles and chains, with both long-exchange cut families lazy."""
    tau_mode = TauMode(tau_mode)
    implicit = tau_mode is TauMode.IMPLICIT
    b = ModelBuild(IlpModel("ef-hybrid"), "ef-hybrid", inst, K=K, L=L, tau_mode=tau_mode.value)
    b.flags.update(flags or {})
    if implicit and L >= 1:
        b.model.obj_constant = sum((inst.tau_weight(n) for n in inst.ndds), 0)
    if reduce:
        red = reduce_for_model(inst, Family.EF_HYBRID, K=K, L=L)
        arcs, rdps = sorted(red.arcs), sorted(red.vertices)
    else:
        arcs, rdps = inst.arcs_nr + inst.arcs_rr, list(inst.rdps)
    if L <= 1:
        arcs = [a for a in arcs if not inst.is_ndd(a[0])]
    if K <= 1:
        # no cycles through two RDPs; an RDP arc then needs a chain of length >= 3
        arcs = [(u, v) for u, v in arcs
                if inst.is_ndd(u) or (u == v and K == 1) or (u != v and L >= 3)]
    if not implicit and L >= 1:
        arcs = arcs + [(v, TAU) for v in list(inst.ndds) + rdps]
    arc_vars, ndd_out, ins, flow = {}, {}, {}, {}
    for u, v in arcs:
        if v == TAU:
            w = inst.tau_weight(u)
        else:
            w = inst.arcs[(u, v)]
            if implicit and L >= 1:
                w = w + inst.tau_weight(v) - inst.tau_weight(u)
        j = b.model.add_var(f"z[{u},{v}]", obj=w)
        b.var_meta[j] = ("hyb_arc", (u, v))
        if v != TAU:
            arc_vars[(u, v)] = [j]
            ins.setdefault(v, {})[j] = 1
            flow.setdefault(v, {})[j] = flow.get(v, {}).get(j, 0) - 1
        if inst.is_ndd(u):
            ndd_out.setdefault(u, {})[j] = 1
        else:
            flow.setdefault(u, {})[j] = flow.get(u, {}).get(j, 0) + 1
    for n in sorted(ndd_out):
        b.model.add_constraint(ndd_out[n], "<=", 1, f"hyb.ndd[{n}]")
    cym._pack_rows(b, ins, "hyb.in")
    # without tau variables an RDP may end a chain (out <= in); cycles still balance
    sense = "<=" if implicit else "="
    for v in sorted(flow):
        if any(flow[v].values()):
            b.model.add_constraint(flow[v], sense, 0, f"hyb.flow[{v}]")
    unbounded = b.flags.get("unbounded", False)
    special = special and not unbounded and K >= 2
    if special and L <= K:
        classes = [CutClass(CutKind.LONG_CYCLE, K), CutClass(CutKind.HYB_CHAIN, L)]
    elif special and L == K + 1:
        classes = [CutClass(CutKind.PATH_K, K), CutClass(CutKind.HYB_CHAIN, L)]
    elif special:
        classes = [CutClass(CutKind.LONG_CHAIN, L), CutClass(CutKind.CYCLE_GT, K, upper=L)]
    else:
        classes = [CutClass(CutKind.CYCLE_GT, K)]
        if not unbounded:
            classes.append(CutClass(CutKind.HYB_CHAIN, L))
    if arc_vars:
        b.add_separator(ArcSeparator(inst, arc_vars, classes, "hyb"))
    return b


def build_cycle(inst, name, K, cfg: SolveConfig) -> ModelBuild:
    if name == "cf":
        return cym.build_cf_cycle(inst, K)
    if name == "hcf":
        return cym.build_hcf_cycle(inst, K)
    if name == "ef":
        return cym.build_ef_cycle(inst, K, reduce=cfg.reduce)
    if name == "eef":
        return cym.build_eef_cycle(inst, K, reduce=cfg.reduce)
    if name == "pief":
        return cym.build_pief_cycle(inst, K, cfg.ps_method, reduce=cfg.reduce)
    if name == "none":
        return ModelBuild(IlpModel("none"), "none", inst, K=0)
    raise ValueError(f"unknown cycle model {name!r}")


def build_chain(inst, name, L, cfg: SolveConfig, flags=None) -> ModelBuild:
    tm = cfg.tau_mode
    if name == "cf":
        return chm.build_cf_chain(inst, L, tm)
    if name == "hcf":
        return chm.build_hcf_chain(inst, L, tm)
    if name == "ef-exp":
        return chm.build_ef_chain_exp(inst, L, tm, reduce=cfg.reduce, flags=flags)
    if name == "ef-mtz":
        return chm.build_ef_chain_mtz(inst, L, tm, reduce=cfg.reduce, flags=flags)
    if name == "eef-exp":
        return chm.build_eef_chain_exp(inst, L, tm, reduce=cfg.reduce, flags=flags)
    if name == "eef-mtz":
        return chm.build_eef_chain_mtz(inst, L, tm, reduce=cfg.reduce, flags=flags)
    if name == "pief":
        return chm.build_pief_chain(inst, L, tm, cfg.ps_method)
    if name == "none":
        return ModelBuild(IlpModel("none"), "none", inst, L=0)
    raise ValueError(f"unknown chain model {name!r}")


def build(inst: Instance, cycle: str, chain: str, K: int, L, cfg: SolveConfig | None = None) -> ModelBuild:
    """Build (and combine) the requested models on ``inst`` as given, without reordering."""
    cfg = cfg or SolveConfig()
    if chain == "none":
        L, flags = 0, {}
    else:
        L, flags = normalize_L(inst, L)
    if cycle == "hybrid" or chain == "hybrid":
        return build_ef_hybrid(inst, K, L, cfg.tau_mode, reduce=cfg.reduce,
                               special=cfg.hybrid_special, flags=flags)
    cb = build_cycle(inst, cycle, K, cfg)
    hb = build_chain(inst, chain, L, cfg, flags)
    return combine(cb, hb)


_CYCLE_META = {"cycle", "half_cycle", "arc", "sub_arc", "pos_arc"}


def _meta_arcs(meta) -> list:
    kind = meta[0]
    if kind in ("arc", "chain_arc", "hyb_arc"):
        return [meta[1]]
    if kind in ("sub_arc", "chain_sub_arc"):
        return [meta[2]]
    if kind == "pos_arc":
        return [meta[3]]
    if kind == "chain_pos_arc":
        return [meta[2]]
    if kind == "half_cycle":
        h = meta[1]
        if h.is_loop:
            return [(h.start, h.start)]
        return list(zip(h.vertices, h.vertices[1:]))
    if kind == "half_chain":
        h = meta[1]
        vs = h.vertices + ((TAU,) if h.kind.value != "first" else ())
        return list(zip(vs, vs[1:]))
    return []


def extract_solution(b: ModelBuild, x) -> ExchangeSet:
    """Decode an integral incumbent into cycles and chains on ``b.inst``."""
    inst = b.inst
    cycles, chains = [], []
    cyc_arcs, chn_arcs = set(), set()
    for j, meta in b.var_meta.items():
        if x[j] < 0.5 or meta[0] == "timestamp":
            continue
        if meta[0] == "cycle":
            cycles.append(meta[1].vertices)
        elif meta[0] == "chain":
            chains.append((meta[1].ndd, meta[1].rdps))
        elif meta[0] in _CYCLE_META:
            cyc_arcs.update(_meta_arcs(meta))
        else:
            chn_arcs.update(_meta_arcs(meta))
    ch, cy = decompose(inst, cyc_arcs)
    assert not ch, f"cycle variables decode to chains {ch}"
    cycles += cy
    ch, cy = decompose(inst, chn_arcs)
    chains += ch
    cycles += cy
    # a lone NDD -> tau donation
    for u, v in chn_arcs:
        if v == TAU and inst.is_ndd(u) and not any(n == u for n, _ in chains):
            chains.append((u, ()))
    if b.tau_mode == TauMode.IMPLICIT.value and b.L >= 1:
        used = {n for n, _ in chains}
        for n in inst.ndds:
            if n not in used and inst.tau_weight(n) > 0:
                chains.append((n, ()))
    return ExchangeSet.from_parts(inst, cycles, chains)


@dataclass
class RcvfInfo:
    iterations: int = 0
    targets: list = field(default_factory=list)
    fixed: list = field(default_factory=list)


def solve_rcvf(b: ModelBuild, config: SolveConfig | None = None):
    """Reduced-cost variable fixing inside a decreasing-target loop.

    Returns ``(IpResult, ExchangeSet | None, RcvfInfo)``.
    """
    cfg = config or SolveConfig()
    t0 = time.perf_counter()
    model = b.model
    info = RcvfInfo()
    lp = solve_lp(model, cfg.backend)
    if lp.status is not LpStatus.OPTIMAL:
        return IpResult(IpStatus.INFEASIBLE), None, info
    z, rc = lp.objective, lp.reduced_costs
    gran = model.granularity()
    const = float(model.obj_constant)
    if gran is not None:
        g = float(gran)
        target = model.obj_constant + math.floor((z - const) / g + 1e-6) * gran
    else:
        # no common step: fall back to one unrestricted solve after a first attempt
        g = None
        target = z - 1e-6
    at_zero = [j for j in range(model.num_vars) if model.variables[j].binary and lp.x[j] <= 1e-9]
    while True:
        info.iterations += 1
        fix = frozenset(j for j in at_zero if z + rc[j] < float(target) - 1e-6)
        info.targets.append(target)
        info.fixed.append(len(fix))
        left = cfg.time_limit - (time.perf_counter() - t0)
        if left <= 0:
            return IpResult(IpStatus.TIME_LIMIT, time=time.perf_counter() - t0), None, info
        res = solve_ip(model, IpConfig(time_limit=left, target_bound=target, fix_zero=fix), cfg.backend)
        if res.status is IpStatus.OPTIMAL:
            res.root_lp = z
            res.time = time.perf_counter() - t0
            return res, extract_solution(b, res.x), info
        if res.status is not IpStatus.INFEASIBLE:
            res.root_lp = z
            xs = extract_solution(b, res.x) if res.x is not None else None
            return res, xs, info
        if g is None:
            target = -math.inf
        elif float(target) <= const:
            # the empty solution is always feasible, so this only happens on broken models
            return res, None, info
        else:
            target = target - gran


@dataclass
class SolveOutcome:
    status: IpStatus
    objective: object
    xs: ExchangeSet | None
    result: IpResult
    build: ModelBuild
    lp_value: float
    time: float
    iterations: int = 1
    report: object = None


def solve(inst: Instance, cycle: str, chain: str, K: int, L, cfg: SolveConfig | None = None) -> SolveOutcome:
    """Reorder, build, solve (plain or RCVF), extract and validate."""
    cfg = cfg or SolveConfig()
    t0 = time.perf_counter()
    order = ORDERS.get(cycle, Order.IDENTITY) if cfg.reorder else Order.IDENTITY
    work, perm = reindex(inst, order)
    b = build(work, cycle, chain, K, L, cfg)
    lp = solve_lp(b.model, cfg.backend)
    lp_value = lp.objective if lp.status is LpStatus.OPTIMAL else float("nan")
    iterations = 1
    if Method(cfg.method) is Method.RCVF:
        res, xs, info = solve_rcvf(b, cfg)
        iterations = info.iterations
    else:
        res = solve_ip(b.model, IpConfig(time_limit=cfg.time_limit), cfg.backend)
        xs = extract_solution(b, res.x) if res.x is not None else None
    report = None
    if xs is not None:
        xs = xs.relabel(inst, relabel_map(work, perm))
        L_eff = 0 if chain == "none" else normalize_L(inst, L)[0]
        report = validate_solution(inst, xs, K, L_eff)
        if res.objective is not None and xs.objective != res.objective:
            report.valid = False
            report.errors.append(f"model objective {res.objective} != decoded {xs.objective}")
    return SolveOutcome(res.status, xs.objective if xs is not None else None, xs, res, b, lp_value,
                        time.perf_counter() - t0, iterations, report)
