"""Compatibility-graph instances: data model, JSON I/O, degrees and relabelling.

Vertices are numbered 1..R for recipient-donor pairs (RDPs) and R+1..R+N for
non-directed donors (NDDs). The terminal vertex (waiting list / bridge pool) is
implicit: every RDP and NDD has exactly one arc to it, whose weight lives in
``tau_weights``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from numbers import Rational

TAU = "tau"


class InstanceError(ValueError):
    """Raised for malformed instance documents or invariant violations."""


class Order(str, Enum):
    IDENTITY = "identity"
    DEGREE_DESC = "degree_desc"
    DEGREE_ASC = "degree_asc"


def exact(value) -> int | Fraction:
    """Convert a JSON number (or string like "3/2") to an exact rational.

    Integral values are returned as ``int`` so that the common unit/integer
    weight case stays cheap.
    """
    if isinstance(value, bool):
        raise InstanceError(f"weight must be a number, got {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, Rational):
        f = Fraction(value)
    elif isinstance(value, (float, str)):
        try:
            f = Fraction(str(value))
        except ValueError as exc:
            raise InstanceError(f"weight {value!r} is not a number") from exc
    else:
        raise InstanceError(f"weight must be a number, got {value!r}")
    return f.numerator if f.denominator == 1 else f


@dataclass(frozen=True)
class Instance:
    rdp_count: int
    ndd_count: int
    arcs: dict = field(default_factory=dict)
    tau_weights: tuple = ()
    allow_self_loops: bool = False

    def __post_init__(self):
        if not self.tau_weights and self.rdp_count + self.ndd_count:
            object.__setattr__(self, "tau_weights", (0,) * (self.rdp_count + self.ndd_count))
        _validate(self)
        # adjacency caches; instances are immutable so these never go stale
        succ = {v: [] for v in self.vertices}
        pred = {v: [] for v in self.vertices}
        for u, v in sorted(self.arcs):
            succ[u].append(v)
            pred[v].append(u)
        object.__setattr__(self, "_succ", {v: tuple(s) for v, s in succ.items()})
        object.__setattr__(self, "_pred", {v: tuple(p) for v, p in pred.items()})

    # vertex sets
    @property
    def rdps(self) -> range:
        return range(1, self.rdp_count + 1)

    @property
    def ndds(self) -> range:
        return range(self.rdp_count + 1, self.rdp_count + self.ndd_count + 1)

    @property
    def vertices(self) -> range:
        return range(1, self.rdp_count + self.ndd_count + 1)

    def is_rdp(self, v) -> bool:
        return isinstance(v, int) and 1 <= v <= self.rdp_count

    def is_ndd(self, v) -> bool:
        return isinstance(v, int) and self.rdp_count < v <= self.rdp_count + self.ndd_count

    # arc sets
    @property
    def arcs_rr(self) -> list:
        return sorted(a for a in self.arcs if self.is_rdp(a[0]))

    @property
    def arcs_nr(self) -> list:
        return sorted(a for a in self.arcs if self.is_ndd(a[0]))

    def succ(self, v) -> tuple:
        return self._succ.get(v, ())

    def pred(self, v) -> tuple:
        return self._pred.get(v, ())

    def weight(self, u, v):
        if v == TAU:
            return self.tau_weights[u - 1]
        return self.arcs[(u, v)]

    def tau_weight(self, v):
        return self.tau_weights[v - 1]

    def has_arc(self, u, v) -> bool:
        if v == TAU:
            return u in self.vertices
        return (u, v) in self.arcs

    def is_integral(self) -> bool:
        return all(isinstance(w, int) for w in self.arcs.values()) and all(
            isinstance(w, int) for w in self.tau_weights
        )

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.rdp_count == other.rdp_count
            and self.ndd_count == other.ndd_count
            and self.arcs == other.arcs
            and tuple(self.tau_weights) == tuple(other.tau_weights)
            and self.allow_self_loops == other.allow_self_loops
        )

    def __hash__(self):
        return hash((self.rdp_count, self.ndd_count, frozenset(self.arcs.items()),
                     tuple(self.tau_weights), self.allow_self_loops))

    def __repr__(self):
        return (f"Instance(|R|={self.rdp_count}, |N|={self.ndd_count}, "
                f"|A_R|={len(self.arcs_rr)}, |A_N|={len(self.arcs_nr)})")


def _validate(inst: Instance) -> None:
    if inst.rdp_count < 0 or inst.ndd_count < 0:
        raise InstanceError("rdp_count/ndd_count must be nonnegative")
    n = inst.rdp_count + inst.ndd_count
    if len(inst.tau_weights) != n:
        raise InstanceError(f"tau_weights: expected {n} entries, got {len(inst.tau_weights)}")
    for (u, v), w in inst.arcs.items():
        if not (inst.is_rdp(u) or inst.is_ndd(u)):
            raise InstanceError(f"arcs: source {u} out of range")
        if not inst.is_rdp(v):
            raise InstanceError(f"arcs: target {v} of arc ({u},{v}) is not an RDP")
        if u == v and not inst.allow_self_loops:
            raise InstanceError(f"arcs: self-loop ({u},{v}) but allow_self_loops is false")
        if w < 0:
            raise InstanceError(f"arcs: negative weight on ({u},{v})")
    for i, w in enumerate(inst.tau_weights, start=1):
        if w < 0:
            raise InstanceError(f"tau_weights: negative weight for vertex {i}")


def make_instance(rdp_count, ndd_count, arcs, tau_weights=None, allow_self_loops=False):
    """Build an Instance from loose inputs.

    ``arcs`` is either a mapping ``(u, v) -> weight`` or an iterable of
    ``(u, v)`` / ``(u, v, w)`` tuples (weight defaults to 1). ``tau_weights``
    is a mapping vertex -> weight or a sequence; omitted entries are 0.
    """
    arc_map = {}
    items = arcs.items() if isinstance(arcs, dict) else arcs
    for item in items:
        if isinstance(arcs, dict):
            (u, v), w = item
        elif len(item) == 3:
            u, v, w = item
        else:
            (u, v), w = item, 1
        if (u, v) in arc_map:
            raise InstanceError(f"arcs: duplicate arc ({u},{v})")
        arc_map[(int(u), int(v))] = exact(w)
    n = rdp_count + ndd_count
    tw = [0] * n
    if isinstance(tau_weights, dict):
        for v, w in tau_weights.items():
            v = int(v)
            if not 1 <= v <= n:
                raise InstanceError(f"tau_weights: vertex {v} out of range")
            tw[v - 1] = exact(w)
    elif tau_weights is not None:
        tw = [exact(w) for w in tau_weights]
    return Instance(rdp_count, ndd_count, arc_map, tuple(tw), allow_self_loops)


def parse_instance(text: str) -> Instance:
    """Parse the JSON instance document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed document: {exc}") from exc
    if not isinstance(doc, dict):
        raise InstanceError("malformed document: top level must be an object")
    for key in ("rdp_count", "ndd_count"):
        if not isinstance(doc.get(key), int) or isinstance(doc.get(key), bool):
            raise InstanceError(f"{key}: required integer")
    arcs = []
    for i, a in enumerate(doc.get("arcs", [])):
        if not isinstance(a, dict) or "from" not in a or "to" not in a:
            raise InstanceError(f"arcs[{i}]: needs 'from' and 'to'")
        if not all(isinstance(a[k], int) and not isinstance(a[k], bool) for k in ("from", "to")):
            raise InstanceError(f"arcs[{i}]: endpoints must be integers")
        arcs.append((a["from"], a["to"], a.get("weight", 1)))
    tau = doc.get("tau_weights", {})
    if not isinstance(tau, dict):
        raise InstanceError("tau_weights: must be an object")
    loops = doc.get("allow_self_loops", False)
    if not isinstance(loops, bool):
        raise InstanceError("allow_self_loops: must be a boolean")
    try:
        tau = {int(k): v for k, v in tau.items()}
    except ValueError as exc:
        raise InstanceError("tau_weights: keys must be vertex numbers") from exc
    return make_instance(doc["rdp_count"], doc["ndd_count"], arcs, tau, loops)


def _is_native(text: str) -> bool:
    head = text.lstrip()[:200]
    return head.startswith("{") and '"rdp_count"' in text


# name -> (detect(text) -> bool, parse(text) -> Instance); external formats register here
IMPORTERS: dict = {"json": (_is_native, parse_instance)}


def register_importer(name: str, detect, parse) -> None:
    IMPORTERS[name] = (detect, parse)


def load_instance(text: str) -> Instance:
    """Parse ``text`` with the first importer whose detector accepts it."""
    for name, (detect, parse) in IMPORTERS.items():
        if detect(text):
            return parse(text)
    if text.lstrip().startswith("{"):
        return parse_instance(text)  # surfaces the native validation error
    raise InstanceError("unrecognised instance format; register an importer for it")


def _json_number(w):
    if isinstance(w, int):
        return w
    return str(w) if isinstance(w, Fraction) else w


def serialize_instance(inst: Instance) -> str:
    """Canonical JSON: arcs sorted, zero tau weights omitted, fixed key order."""
    doc = {
        "rdp_count": inst.rdp_count,
        "ndd_count": inst.ndd_count,
        "arcs": [{"from": u, "to": v, "weight": _json_number(inst.arcs[(u, v)])}
                 for u, v in sorted(inst.arcs)],
        "tau_weights": {str(v): _json_number(w)
                        for v, w in enumerate(inst.tau_weights, start=1) if w != 0},
        "allow_self_loops": inst.allow_self_loops,
    }
    return json.dumps(doc, indent=1)


def degrees(inst: Instance) -> dict:
    """Per-RDP (in, out, total): in counts A_R and A_N arcs, out counts A_R arcs."""
    out = {}
    for v in inst.rdps:
        din = len(inst.pred(v))
        dout = len(inst.succ(v))
        out[v] = (din, dout, din + dout)
    return out


def reindex(inst: Instance, order: Order = Order.IDENTITY):
    """Relabel RDPs by total degree; NDD labels are unchanged.

    Returns ``(new_instance, perm)`` where ``perm[i-1]`` is the original label
    of new RDP ``i``. Ties are broken by original label, ascending.
    """
    order = Order(order)
    rdps = list(inst.rdps)
    if order is not Order.IDENTITY:
        deg = degrees(inst)
        sign = -1 if order is Order.DEGREE_DESC else 1
        rdps.sort(key=lambda v: (sign * deg[v][2], v))
    perm = tuple(rdps)
    new_of = {old: new for new, old in enumerate(perm, start=1)}
    for v in inst.ndds:
        new_of[v] = v
    arcs = {(new_of[u], new_of[v]): w for (u, v), w in inst.arcs.items()}
    tau = [0] * len(inst.tau_weights)
    for old, w in enumerate(inst.tau_weights, start=1):
        tau[new_of[old] - 1] = w
    return Instance(inst.rdp_count, inst.ndd_count, arcs, tuple(tau), inst.allow_self_loops), perm


def relabel_map(inst: Instance, perm) -> dict:
    """Map new labels back to original labels for a permutation from ``reindex``."""
    back = {new: old for new, old in enumerate(perm, start=1)}
    for v in inst.ndds:
        back[v] = v
    return back


def appendix_example() -> Instance:
    """The 4-RDP / 2-NDD running example with unit weights everywhere."""
    arcs = [(1, 2), (2, 3), (3, 4), (4, 1), (1, 4), (4, 2), (5, 1), (6, 2)]
    return make_instance(4, 2, arcs, tau_weights={v: 1 for v in range(1, 7)})
