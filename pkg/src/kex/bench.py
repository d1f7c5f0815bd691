"""Instance generator, batch runner and heatmap emission."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from fractions import Fraction
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .assembly import CHAIN_MODELS, CYCLE_MODELS, Method, SolveConfig, method_ids, solve
from .instance import Instance, appendix_example, load_instance, make_instance, parse_instance, serialize_instance
from .ir import IpStatus

SCHEMA_VERSION = 1
COLUMNS = ["schema", "instance", "cycle", "chain", "method", "tau_mode", "ps_method", "K", "L",
           "status", "objective", "bound", "time", "vars", "cons", "cuts", "lp", "iterations",
           "valid", "flags", "error"]

# recipient PRA bands: (share of recipients, probability a given donor is incompatible)
UK_LIKE_BANDS = ((0.7, 0.05), (0.2, 0.45), (0.1, 0.9))


@dataclass
class GenConfig:
    rdp_count: int
    ndd_fraction: float = 0.0
    density: float = 0.5
    pra_bands: tuple | None = None
    weighted: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.rdp_count < 0 or self.ndd_fraction < 0:
            raise ValueError("counts must be non-negative")
        if not 0 <= self.density <= 1:
            raise ValueError("density must lie in [0, 1]")
        if self.pra_bands is not None:
            shares = [s for s, _ in self.pra_bands]
            if abs(sum(shares) - 1) > 1e-9 or any(not 0 <= p <= 1 for _, p in self.pra_bands):
                raise ValueError("PRA band shares must sum to 1 and probabilities lie in [0, 1]")


def generate_instance(cfg: GenConfig) -> Instance:
    """Random compatibility graph; ``density`` scales the compatible-donor probability.

    Without bands every arc appears with probability ``density``. With bands each
    recipient draws a band and accepts a donor with probability
    ``density * (1 - pra)``. Tau weights are all 0.
    """
    rng = np.random.default_rng(cfg.seed)
    R = cfg.rdp_count
    N = int(round(cfg.ndd_fraction * R)) if cfg.ndd_fraction < 1 else int(cfg.ndd_fraction)
    if cfg.pra_bands:
        shares = np.array([s for s, _ in cfg.pra_bands])
        pras = np.array([p for _, p in cfg.pra_bands])
        accept = cfg.density * (1 - pras[rng.choice(len(shares), size=R, p=shares)])
    else:
        accept = np.full(R, cfg.density)
    # rows are donors (RDPs then NDDs), columns recipients
    draw = rng.random((R + N, R)) < accept[None, :]
    if R:
        draw[np.arange(R), np.arange(R)] = False
    weights = rng.integers(1, 92, size=draw.shape) if cfg.weighted else np.ones(draw.shape, dtype=int)
    arcs = {(int(u) + 1, int(v) + 1): int(weights[u, v]) for u, v in zip(*np.nonzero(draw))}
    return make_instance(R, N, arcs)


def _method_tuple(m):
    if isinstance(m, str):
        parts = m.split("/")
        if len(parts) == 2:
            parts.append("plain")
        return tuple(parts)
    return tuple(m) if len(m) == 3 else (m[0], m[1], "plain")


def _expand_methods(sel):
    if sel in (None, "all"):
        return [m for m in method_ids() if m[2] == "plain"]
    if sel == "all+rcvf":
        return method_ids()
    return [_method_tuple(m) for m in sel]


def _load_instances(manifest, base="."):
    out = []
    for i, entry in enumerate(manifest.get("instances", [])):
        if entry == "appendix":
            out.append(("appendix", appendix_example()))
        elif isinstance(entry, str):
            path = entry if os.path.isabs(entry) else os.path.join(base, entry)
            with open(path) as fh:
                out.append((os.path.basename(entry), load_instance(fh.read())))
        elif "generate" in entry:
            cfg = GenConfig(**entry["generate"])
            out.append((entry.get("id", f"gen{i}-s{cfg.seed}"), generate_instance(cfg)))
        else:
            out.append((entry.get("id", f"inline{i}"), parse_instance(json.dumps(entry))))
    return out


def _run_job(job):
    """One solve; never raises. ``job`` is picklable for the worker pool."""
    iid, text, (cycle, chain, method), K, L, opts = job
    row = {c: "" for c in COLUMNS}
    row.update(schema=SCHEMA_VERSION, instance=iid, cycle=cycle, chain=chain, method=method,
               tau_mode=opts["tau_mode"], ps_method=opts["ps_method"], K=K, L=L)
    limit = opts["time_limit"]
    try:
        inst = parse_instance(text)
        cfg = SolveConfig(time_limit=limit, method=Method(method), tau_mode=opts["tau_mode"],
                          ps_method=opts["ps_method"])
        out = solve(inst, cycle, chain, K, L, cfg)
        st = out.status
        row.update(status=st.value, vars=out.build.stats["vars"],
                   cons=out.build.stats["constraints"] + len(out.result.cuts),
                   cuts=len(out.result.cuts), iterations=out.iterations,
                   lp="" if math.isnan(out.lp_value) else f"{out.lp_value:.9g}")
        if out.objective is not None:
            row["objective"] = str(out.objective)
            row["valid"] = int(bool(out.report and out.report.valid))
        row["bound"] = str(out.objective) if st is IpStatus.OPTIMAL else _fmt(out.result.bound)
        row["time"] = f"{limit:.6g}" if st is IpStatus.TIME_LIMIT else f"{out.time:.6g}"
    except Exception as exc:  # recorded, the batch goes on
        row.update(status="ERROR", error=f"{type(exc).__name__}: {exc}", time=f"{limit:.6g}")
    return row


def _fmt(x):
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{float(x):.9g}"


def _num(s):
    if s in ("", None):
        return None
    for conv in (int, float):
        try:
            return conv(s)
        except ValueError:
            pass
    return float(Fraction(s))  # "p/q" objectives


def audit(rows):
    """Cross-method consistency on each (instance, K, L) group; adds ``flags`` in place."""
    groups = {}
    for r in rows:
        groups.setdefault((r["instance"], str(r["K"]), str(r["L"])), []).append(r)
    for grp in groups.values():
        objs = [_num(r["objective"]) for r in grp if r["objective"] != "" and str(r["valid"]) == "1"]
        bounds = [_num(r["bound"]) for r in grp if r["status"] in ("OPTIMAL", "TIME_LIMIT", "FEASIBLE")
                  and r["bound"] != ""]
        lb = max(objs) if objs else None
        ub = min(bounds) if bounds else None
        opts = {_num(r["objective"]) for r in grp if r["status"] == "OPTIMAL"}
        for r in grp:
            flags = [f for f in str(r.get("flags", "")).split(";") if f]
            o = _num(r["objective"])
            if o is not None and ub is not None and o > ub + 1e-6:
                flags.append("obj > UB_best")
            if r["status"] == "OPTIMAL" and lb is not None and o is not None and o < lb - 1e-6:
                flags.append("obj < LB_best")
            if r["status"] == "OPTIMAL" and len(opts) > 1:
                flags.append("optimum mismatch")
            if o is not None and str(r["valid"]) != "1":
                flags.append("invalid solution")
            r["flags"] = ";".join(dict.fromkeys(flags))
    return rows


def run_benchmark(manifest: dict, out=None, base=".") -> list:
    """Run instances x methods x limits; write CSV to ``out`` (a text stream) if given."""
    instances = _load_instances(manifest, base)
    methods = _expand_methods(manifest.get("methods"))
    limits = [tuple(x) for x in manifest.get("limits", [[3, 3]])]
    opts = {"time_limit": float(manifest.get("time_limit", 3600)),
            "tau_mode": manifest.get("tau_mode", "implicit"),
            "ps_method": manifest.get("ps_method", "bfs")}
    jobs = [(iid, serialize_instance(inst), m, K, L, opts)
            for iid, inst in instances for K, L in limits for m in methods]
    workers = int(manifest.get("workers", 1))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_job, jobs))
    else:
        rows = [_run_job(j) for j in jobs]
    audit(rows)
    if out is not None:
        w = csv.DictWriter(out, fieldnames=COLUMNS)
        w.writeheader()
        w.writerows(rows)
    return rows


def read_results(text: str) -> list:
    rd = csv.DictReader(io.StringIO(text))
    if rd.fieldnames != COLUMNS:
        raise ValueError("malformed results csv: unexpected columns")
    rows = list(rd)
    for r in rows:
        if str(r["schema"]) != str(SCHEMA_VERSION):
            raise ValueError(f"unsupported schema version {r['schema']}")
    return rows


METRICS = ("opt", "time", "vars", "cons", "lp_gap")
HEAT_ROWS = CYCLE_MODELS[:-1]
HEAT_COLS = CHAIN_MODELS[:-1]


def _mean(xs):
    xs = [x for x in xs if x is not None]
    return sum(xs) / len(xs) if xs else None


def _cell(rows):
    opt = [r for r in rows if r["status"] == "OPTIMAL"]
    gaps = [float(r["lp"]) - float(_num(r["objective"])) for r in opt if r["lp"] != ""]
    return {"opt": len(opt),
            "time": _mean([float(r["time"]) for r in rows if r["time"] != ""]),
            "vars": _mean([float(r["vars"]) for r in rows if r["vars"] != ""]),
            "cons": _mean([float(r["cons"]) for r in rows if r["cons"] != ""]),
            "lp_gap": _mean(gaps)}


def emit_heatmap(text: str, method="plain") -> dict:
    """Per-metric cycle x chain matrices with AVG row and column, from results CSV text."""
    rows = [r for r in read_results(text) if r["method"] == method]
    cells = {}
    for r in rows:
        cells.setdefault((r["cycle"], r["chain"]), []).append(r)
    out = {"rows": list(HEAT_ROWS), "cols": list(HEAT_COLS), "method": method, "missing": []}
    grid = {m: [[None] * len(HEAT_COLS) for _ in HEAT_ROWS] for m in METRICS}
    for i, c in enumerate(HEAT_ROWS):
        for j, h in enumerate(HEAT_COLS):
            if (c, h) not in cells:
                out["missing"].append([c, h])
                continue
            v = _cell(cells[(c, h)])
            for m in METRICS:
                grid[m][i][j] = v[m]
    for m in METRICS:
        g = grid[m]
        present = [x for row in g for x in row if x is not None]
        out[m] = {"matrix": g,
                  "row_avg": [_mean(row) for row in g],
                  "col_avg": [_mean([row[j] for row in g]) for j in range(len(HEAT_COLS))],
                  "avg": _mean(present)}
    if ("hybrid", "hybrid") in cells:
        out["hybrid"] = _cell(cells[("hybrid", "hybrid")])
    return out
