"""Exchange sets (solutions) and their validation against an instance."""

from __future__ import annotations

from dataclasses import dataclass, field

from .enumeration import Chain, Cycle
from .instance import TAU, Instance


def canonical_cycle(vs) -> tuple:
    vs = tuple(vs)
    i = vs.index(min(vs))
    return vs[i:] + vs[:i]


def cycle_weight(inst, vs):
    return sum((inst.arcs[(vs[i], vs[(i + 1) % len(vs)])] for i in range(len(vs))), 0)


def chain_weight(inst, ndd, rdps):
    vs = (ndd,) + tuple(rdps)
    w = sum((inst.arcs[(vs[i], vs[i + 1])] for i in range(len(vs) - 1)), 0)
    return w + inst.tau_weight(vs[-1])


@dataclass
class ExchangeSet:
    cycles: list = field(default_factory=list)
    chains: list = field(default_factory=list)
    objective: object = 0

    @classmethod
    def from_parts(cls, inst: Instance, cycles, chains) -> "ExchangeSet":
        cyc = sorted(Cycle(canonical_cycle(c), cycle_weight(inst, canonical_cycle(c))) for c in cycles)
        chn = sorted(Chain(n, tuple(r), chain_weight(inst, n, r)) for n, r in chains)
        total = sum((c.weight for c in cyc), 0) + sum((c.weight for c in chn), 0)
        return cls(cyc, chn, total)

    def relabel(self, inst: Instance, back: dict) -> "ExchangeSet":
        """Map vertex labels through ``back`` and rescore on ``inst``."""
        cycles = [tuple(back[v] for v in c.vertices) for c in self.cycles]
        chains = [(back[c.ndd], tuple(back[v] for v in c.rdps)) for c in self.chains]
        return ExchangeSet.from_parts(inst, cycles, chains)

    def to_dict(self) -> dict:
        def num(w):
            return w if isinstance(w, int) else str(w)
        return {
            "objective": num(self.objective),
            "cycles": [{"vertices": list(c.vertices), "weight": num(c.weight)} for c in self.cycles],
            "chains": [{"ndd": c.ndd, "rdps": list(c.rdps), "weight": num(c.weight)} for c in self.chains],
        }

    def __str__(self):
        parts = [str(c) for c in self.cycles] + [str(c) for c in self.chains]
        return "{" + ", ".join(parts) + f"}} = {self.objective}"


@dataclass
class ValidationReport:
    valid: bool
    objective: object
    errors: list = field(default_factory=list)

    def __bool__(self):
        return self.valid


def validate_solution(inst: Instance, xs: ExchangeSet, K: int, L: int) -> ValidationReport:
    errors = []
    used = {}
    total = 0

    def claim(v, what):
        if v in used:
            errors.append(f"vertex {v} used by {used[v]} and {what}")
        used[v] = what

    for c in xs.cycles:
        vs = tuple(c.vertices)
        name = "cycle <" + ",".join(map(str, vs)) + ">"
        if len(vs) > K:
            errors.append(f"{name} exceeds K={K}")
        if len(set(vs)) != len(vs):
            errors.append(f"{name} repeats a vertex")
        ok = True
        for i, v in enumerate(vs):
            if not inst.is_rdp(v):
                errors.append(f"{name}: {v} is not an RDP")
                ok = False
            a = (v, vs[(i + 1) % len(vs)])
            if a not in inst.arcs:
                errors.append(f"{name}: missing arc {a}")
                ok = False
            claim(v, name)
        if ok:
            total += cycle_weight(inst, vs)
    for c in xs.chains:
        vs = (c.ndd,) + tuple(c.rdps)
        name = "chain <" + ",".join(map(str, vs + (TAU,))) + ">"
        if 1 + len(c.rdps) > L:
            errors.append(f"{name} exceeds L={L}")
        if not inst.is_ndd(c.ndd):
            errors.append(f"{name}: {c.ndd} is not an NDD")
            continue
        if len(set(c.rdps)) != len(c.rdps) or any(not inst.is_rdp(v) for v in c.rdps):
            errors.append(f"{name}: RDPs must be distinct")
        ok = True
        for i in range(len(vs) - 1):
            if (vs[i], vs[i + 1]) not in inst.arcs:
                errors.append(f"{name}: missing arc {(vs[i], vs[i + 1])}")
                ok = False
        for v in vs:
            claim(v, name)
        if ok:
            total += chain_weight(inst, c.ndd, c.rdps)
    if not errors and total != xs.objective:
        errors.append(f"objective {xs.objective} differs from recomputed {total}")
    return ValidationReport(not errors, total, errors)
