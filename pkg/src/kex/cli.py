"""Command line entry point: ``kex gen|solve|oracle|bench|heatmap``."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .assembly import CHAIN_MODELS, CYCLE_MODELS, Method, SolveConfig, solve
from .bench import GenConfig, UK_LIKE_BANDS, emit_heatmap, generate_instance, run_benchmark
from .chain_models import UNBOUNDED
from .instance import InstanceError, load_instance, serialize_instance
from .ir import IpStatus
from .oracle import OracleCapError, brute_force_optimum

EXIT_OK, EXIT_TIME, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3, 4


def _limit(s):
    return UNBOUNDED if s.lower() in ("u", "unbounded", "inf") else int(s)


def _read(path):
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_gen(a):
    bands = UK_LIKE_BANDS if a.pra else None
    inst = generate_instance(GenConfig(a.rdp, a.ndd_frac, a.density, bands, a.weighted, a.seed))
    _write(a.output, serialize_instance(inst))
    return EXIT_OK


def cmd_solve(a):
    inst = load_instance(_read(a.input))
    chain = a.chain
    cycle = "hybrid" if chain == "hybrid" else a.cycle
    cfg = SolveConfig(time_limit=a.time_limit, method=Method.RCVF if a.rcvf else Method.PLAIN,
                      tau_mode="explicit" if a.explicit_tau else "implicit", ps_method=a.ps,
                      reduce=not a.no_reduce)
    out = solve(inst, cycle, chain, a.K, a.L, cfg)
    doc = {"status": out.status.value,
           "solution": out.xs.to_dict() if out.xs else None,
           "stats": {**out.build.stats, "cuts": len(out.result.cuts), "nodes": out.result.nodes,
                     "lp": out.lp_value, "time": out.time, "iterations": out.iterations,
                     "valid": bool(out.report and out.report.valid)}}
    _write(a.output, json.dumps(doc, indent=1, default=str))
    if out.status is IpStatus.OPTIMAL:
        return EXIT_OK
    return EXIT_TIME if out.status is IpStatus.TIME_LIMIT else EXIT_INTERNAL


def cmd_oracle(a):
    inst = load_instance(_read(a.input))
    res = brute_force_optimum(inst, a.K, a.L)
    doc = {"value": res.value, "explored": res.explored, "solution": res.best.to_dict()}
    _write(a.output, json.dumps(doc, indent=1, default=str))
    return EXIT_OK


def cmd_bench(a):
    manifest = json.loads(_read(a.manifest))
    if a.workers:
        manifest["workers"] = a.workers
    base = os.path.dirname(os.path.abspath(a.manifest)) if a.manifest != "-" else "."
    if a.output in (None, "-"):
        run_benchmark(manifest, sys.stdout, base)
    else:
        with open(a.output, "w", newline="") as fh:
            run_benchmark(manifest, fh, base)
    return EXIT_OK


def cmd_heatmap(a):
    doc = emit_heatmap(_read(a.input), a.method)
    _write(a.output, json.dumps(doc, indent=1))
    return EXIT_OK


def parser():
    p = argparse.ArgumentParser(prog="kex", description="Kidney-exchange ILP toolkit")
    sub = p.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate a random instance")
    g.add_argument("--rdp", type=int, required=True)
    g.add_argument("--ndd-frac", type=float, default=0.0)
    g.add_argument("--density", type=float, default=0.5)
    g.add_argument("--pra", action="store_true", help="use PRA bands")
    g.add_argument("--weighted", action="store_true")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output")
    g.set_defaults(fn=cmd_gen)

    s = sub.add_parser("solve", help="solve one instance")
    s.add_argument("-i", "--input", required=True)
    s.add_argument("--cycle", choices=CYCLE_MODELS, default="pief")
    s.add_argument("--chain", choices=CHAIN_MODELS + ("hybrid",), default="pief")
    s.add_argument("-K", type=int, default=3)
    s.add_argument("-L", type=_limit, default=3)
    s.add_argument("--rcvf", action="store_true")
    s.add_argument("--explicit-tau", action="store_true")
    s.add_argument("--ps", choices=("bfs", "sp"), default="bfs")
    s.add_argument("--no-reduce", action="store_true")
    s.add_argument("--time-limit", type=float, default=3600.0)
    s.add_argument("-o", "--output")
    s.set_defaults(fn=cmd_solve)

    o = sub.add_parser("oracle", help="brute-force optimum of a small instance")
    o.add_argument("-i", "--input", required=True)
    o.add_argument("-K", type=int, default=3)
    o.add_argument("-L", type=_limit, default=3)
    o.add_argument("-o", "--output")
    o.set_defaults(fn=cmd_oracle)

    b = sub.add_parser("bench", help="run a benchmark manifest")
    b.add_argument("-m", "--manifest", required=True)
    b.add_argument("-o", "--output")
    b.add_argument("-j", "--workers", type=int, default=0)
    b.set_defaults(fn=cmd_bench)

    h = sub.add_parser("heatmap", help="cycle x chain matrices from a results csv")
    h.add_argument("-i", "--input", required=True)
    h.add_argument("--method", default="plain", choices=("plain", "rcvf"))
    h.add_argument("-o", "--output")
    h.set_defaults(fn=cmd_heatmap)
    return p


def main(argv=None) -> int:
    a = parser().parse_args(argv)
    try:
        return a.fn(a)
    except (InstanceError, OracleCapError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"kex: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        print(f"kex: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
