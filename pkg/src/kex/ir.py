"""Solver-agnostic ILP model, LP/IP results, and the reference branch-and-bound backend.

Stand-alone LP relaxations (with duals and reduced costs) go through
``scipy.optimize.linprog``. Node LPs inside branch-and-bound reuse one HiGHS
instance through ``highspy`` so each node is a warm-started bound change.
"""

from __future__ import annotations

import heapq
import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import highspy
import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix

log = logging.getLogger(__name__)

EPS_FEAS = 1e-6
EPS_INT = 1e-6


class Sense(str, Enum):
    LE = "<="
    EQ = "="
    GE = ">="


class LpStatus(str, Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    UNBOUNDED = "UNBOUNDED"
    ERROR = "ERROR"


class IpStatus(str, Enum):
    OPTIMAL = "OPTIMAL"
    FEASIBLE = "FEASIBLE"
    INFEASIBLE = "INFEASIBLE"
    TIME_LIMIT = "TIME_LIMIT"
    MEMORY_LIMIT = "MEMORY_LIMIT"
    NODE_LIMIT = "NODE_LIMIT"


@dataclass
class Variable:
    name: str
    obj: object = 0
    lb: float = 0.0
    ub: float = 1.0
    binary: bool = True


@dataclass
class Constraint:
    coeffs: dict
    sense: Sense
    rhs: float
    label: str = ""
    lazy_class: str | None = None

    def lhs(self, x) -> float:
        return float(sum(a * x[j] for j, a in self.coeffs.items()))

    def violation(self, x) -> float:
        """Positive amount by which ``x`` violates the row (0 if satisfied)."""
        d = self.lhs(x) - self.rhs
        if self.sense is Sense.LE:
            return max(d, 0.0)
        if self.sense is Sense.GE:
            return max(-d, 0.0)
        return abs(d)


def _clean_coeffs(coeffs) -> dict:
    out = {}
    items = coeffs.items() if isinstance(coeffs, dict) else coeffs
    for j, a in items:
        out[j] = out.get(j, 0) + a
    return {j: a for j, a in out.items() if a != 0}


class IlpModel:
    """A maximisation ILP with labelled variables and rows.

    ``separators`` holds callables ``sep(x) -> list[Constraint]`` that are run on
    every integral candidate incumbent (lazy constraint generation).
    """

    def __init__(self, name=""):
        self.name = name
        self.variables: list[Variable] = []
        self.constraints: list[Constraint] = []
        self.obj_constant = 0
        self.separators: list = []
        self._names: dict = {}
        self._labels: set = set()
        self._cache = None

    # construction
    def add_var(self, name, obj=0, lb=0.0, ub=1.0, binary=True) -> int:
        if name in self._names:
            raise ValueError(f"duplicate variable name {name!r}")
        if isinstance(obj, float) and not math.isfinite(obj):
            raise ValueError(f"non-finite objective for {name!r}")
        self.variables.append(Variable(name, obj, lb, ub, binary))
        self._names[name] = len(self.variables) - 1
        self._cache = None
        return len(self.variables) - 1

    def add_constraint(self, coeffs, sense, rhs, label=None, lazy_class=None) -> int:
        coeffs = _clean_coeffs(coeffs)
        n = len(self.variables)
        for j, a in coeffs.items():
            if not 0 <= j < n:
                raise ValueError(f"constraint {label!r} references unknown variable {j}")
            if not math.isfinite(float(a)):
                raise ValueError(f"constraint {label!r} has non-finite coefficient")
        if label is None:
            label = f"r{len(self.constraints)}"
        if label in self._labels:
            raise ValueError(f"duplicate constraint label {label!r}")
        self._labels.add(label)
        self.constraints.append(Constraint(coeffs, Sense(sense), rhs, label, lazy_class))
        self._cache = None
        return len(self.constraints) - 1

    def var_index(self, name) -> int:
        return self._names[name]

    def fresh_label(self, stem) -> str:
        i = len(self.constraints)
        while f"{stem}#{i}" in self._labels:
            i += 1
        return f"{stem}#{i}"

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    def copy(self) -> "IlpModel":
        m = IlpModel(self.name)
        m.variables = [Variable(**vars(v)) for v in self.variables]
        m.constraints = [Constraint(dict(c.coeffs), c.sense, c.rhs, c.label, c.lazy_class)
                         for c in self.constraints]
        m.obj_constant = self.obj_constant
        m.separators = list(self.separators)
        m._names = dict(self._names)
        m._labels = set(self._labels)
        return m

    # evaluation
    def objective_value(self, x):
        """Objective at ``x``; exact for binary solutions with rational coefficients."""
        total = self.obj_constant
        for j, v in enumerate(self.variables):
            if v.obj == 0:
                continue
            xj = int(round(x[j])) if v.binary else x[j]
            total += v.obj * xj
        return total

    def granularity(self):
        """Step g such that every integral objective value is const + g*n, or None."""
        g = None
        for v in self.variables:
            if v.obj == 0:
                continue
            if not v.binary or isinstance(v.obj, float):
                return None
            den = Fraction(v.obj).denominator
            g = den if g is None else g * den // math.gcd(g, den)
        return Fraction(1, g) if g else Fraction(1)

    def matrices(self):
        if self._cache is not None:
            return self._cache
        n = self.num_vars
        c = np.array([float(v.obj) for v in self.variables], dtype=float)
        rows = {Sense.LE: ([], [], [], []), Sense.EQ: ([], [], [], [])}
        for c_ in self.constraints:
            sense = Sense.EQ if c_.sense is Sense.EQ else Sense.LE
            sign = -1.0 if c_.sense is Sense.GE else 1.0
            r, cols, vals, rhs = rows[sense]
            i = len(rhs)
            for j, a in c_.coeffs.items():
                r.append(i)
                cols.append(j)
                vals.append(sign * float(a))
            rhs.append(sign * float(c_.rhs))
        mats = {}
        for sense, (r, cols, vals, rhs) in rows.items():
            if rhs:
                mats[sense] = (csr_matrix((vals, (r, cols)), shape=(len(rhs), n)), np.array(rhs))
            else:
                mats[sense] = (None, None)
        lb = np.array([v.lb for v in self.variables], dtype=float)
        ub = np.array([v.ub for v in self.variables], dtype=float)
        self._cache = (c, mats[Sense.LE], mats[Sense.EQ], lb, ub)
        return self._cache

    def __repr__(self):
        return f"IlpModel({self.name!r}, vars={self.num_vars}, cons={self.num_constraints})"


@dataclass
class LpResult:
    status: LpStatus
    objective: float = float("nan")
    x: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    duals: np.ndarray | None = None


@dataclass
class IpConfig:
    time_limit: float = 3600.0
    target_bound: object = None
    node_limit: int | None = None
    fix_zero: frozenset = frozenset()
    separators: tuple = ()


@dataclass
class IpResult:
    status: IpStatus
    x: np.ndarray | None = None
    objective: object = None
    bound: float = float("nan")
    nodes: int = 0
    time: float = 0.0
    cuts: list = field(default_factory=list)  # (label, violation at triggering incumbent)
    root_lp: float = float("nan")


def _lp(model: IlpModel, lb=None, ub=None) -> LpResult:
    c, (a_ub, b_ub), (a_eq, b_eq), lb0, ub0 = model.matrices()
    n = model.num_vars
    lb = lb0 if lb is None else lb
    ub = ub0 if ub is None else ub
    if n == 0:
        feasible = all(
            (c_.sense is Sense.LE and 0 <= c_.rhs + EPS_FEAS)
            or (c_.sense is Sense.GE and 0 >= c_.rhs - EPS_FEAS)
            or (c_.sense is Sense.EQ and abs(c_.rhs) <= EPS_FEAS)
            for c_ in model.constraints)
        if not feasible:
            return LpResult(LpStatus.INFEASIBLE)
        return LpResult(LpStatus.OPTIMAL, float(model.obj_constant), np.zeros(0), np.zeros(0),
                        np.zeros(len(model.constraints)))
    if np.any(lb > ub + EPS_FEAS):
        return LpResult(LpStatus.INFEASIBLE)
    try:
        res = linprog(-c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                      bounds=np.column_stack([lb, ub]), method="highs")
    except ValueError as exc:
        log.warning("LP failure: %s", exc)
        return LpResult(LpStatus.ERROR)
    if res.status == 2:
        return LpResult(LpStatus.INFEASIBLE)
    if res.status == 3:
        return LpResult(LpStatus.UNBOUNDED)
    if res.status != 0:
        return LpResult(LpStatus.ERROR)
    # duals of the max problem are minus HiGHS' marginals of the min problem
    y_ub = -res.ineqlin.marginals if a_ub is not None else np.zeros(0)
    y_eq = -res.eqlin.marginals if a_eq is not None else np.zeros(0)
    rc = -(res.lower.marginals + res.upper.marginals)
    duals = np.zeros(len(model.constraints))
    i_ub = i_eq = 0
    for i, c_ in enumerate(model.constraints):
        if c_.sense is Sense.EQ:
            duals[i] = y_eq[i_eq]
            i_eq += 1
        else:
            duals[i] = y_ub[i_ub] * (-1.0 if c_.sense is Sense.GE else 1.0)
            i_ub += 1
    return LpResult(LpStatus.OPTIMAL, float(-res.fun) + float(model.obj_constant), res.x, rc, duals)


def _binary_mask(model) -> np.ndarray:
    return np.array([v.binary for v in model.variables], dtype=bool)


def _is_integral(model, x) -> bool:
    m = _binary_mask(model)
    return bool(np.all(np.abs(x[m] - np.round(x[m])) <= EPS_INT))


def _round(model, x):
    y = np.array(x, dtype=float)
    m = _binary_mask(model)
    y[m] = np.round(y[m])
    return y


class _WarmLp:
    """One HiGHS LP kept alive across nodes; bounds change per node, lazy rows are appended."""

    def __init__(self, model: IlpModel):
        self.model = model
        self.h = highspy.Highs()
        self.h.setOptionValue("output_flag", False)
        self.h.setOptionValue("random_seed", 0)
        n = model.num_vars
        self.idx = np.arange(n, dtype=np.int32)
        lp = highspy.HighsLp()
        lp.num_col_ = n
        lp.num_row_ = 0
        lp.col_cost_ = np.array([float(v.obj) for v in model.variables], dtype=float)
        lp.col_lower_ = np.array([v.lb for v in model.variables], dtype=float)
        lp.col_upper_ = np.array([v.ub for v in model.variables], dtype=float)
        lp.sense_ = highspy.ObjSense.kMaximize
        lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
        lp.a_matrix_.start_ = np.zeros(n + 1, dtype=np.int32)
        self.h.passModel(lp)
        self.rows = 0
        self.sync()

    def sync(self):
        """Push rows added to the model since the last call."""
        cons = self.model.constraints[self.rows:]
        if not cons:
            return
        inf = highspy.kHighsInf
        lo, hi, starts, idx, vals = [], [], [], [], []
        for c in cons:
            r = float(c.rhs)
            lo.append(r if c.sense is not Sense.LE else -inf)
            hi.append(r if c.sense is not Sense.GE else inf)
            starts.append(len(idx))
            for j, a in c.coeffs.items():
                idx.append(j)
                vals.append(float(a))
        self.h.addRows(len(cons), np.array(lo), np.array(hi), len(idx), np.array(starts, dtype=np.int32),
                       np.array(idx, dtype=np.int32), np.array(vals, dtype=float))
        self.rows = len(self.model.constraints)

    def solve(self, lb, ub):
        n = len(self.idx)
        if n == 0:
            lp = _lp(self.model)
            return lp.status, lp.objective, lp.x
        self.sync()
        self.h.changeColsBounds(n, self.idx, lb, ub)
        self.h.run()
        st = self.h.getModelStatus()
        if st == highspy.HighsModelStatus.kOptimal:
            x = np.array(self.h.getSolution().col_value, dtype=float)
            return LpStatus.OPTIMAL, self.h.getInfo().objective_function_value + float(self.model.obj_constant), x
        if st == highspy.HighsModelStatus.kUnbounded:
            return LpStatus.UNBOUNDED, math.inf, None
        if st in (highspy.HighsModelStatus.kInfeasible, highspy.HighsModelStatus.kUnboundedOrInfeasible):
            return LpStatus.INFEASIBLE, -math.inf, None
        return LpStatus.ERROR, float("nan"), None


def _separate(model, x, extra=()):
    cuts = []
    for sep in list(model.separators) + list(extra):
        for cut in sep(x):
            v = cut.violation(x)
            if v > EPS_FEAS:
                cuts.append((cut, v))
    return cuts


class BranchAndBound:
    """Best-bound branch-and-bound over binary variables with LP bounding."""

    name = "bnb"
    capabilities = frozenset({"lp", "ip", "reduced_costs", "lazy"})

    def solve_lp(self, model: IlpModel) -> LpResult:
        return _lp(model)

    def solve_ip(self, model: IlpModel, config: IpConfig | None = None) -> IpResult:
        cfg = config or IpConfig()
        t0 = time.perf_counter()
        gran = model.granularity()
        const = float(model.obj_constant)

        def closed(z):
            # integral-objective closure: round the LP bound down to the next achievable value
            if gran is None:
                return z
            g = float(gran)
            return const + math.floor((z - const) / g + 1e-6) * g

        _, _, _, lb0, ub0 = model.matrices()
        lb0, ub0 = lb0.copy(), ub0.copy()
        for j in cfg.fix_zero:
            ub0[j] = 0.0
        target = None if cfg.target_bound is None else float(cfg.target_bound)
        inc_x, inc_val = None, -math.inf
        cutoff = -math.inf if target is None else target - 1e-6
        cuts = []
        heap = [(-math.inf, 0, 0, 0, {})]
        binary = _binary_mask(model)
        warm = _WarmLp(model)
        counter = 1
        nodes = 0
        root_lp = float("nan")
        status = None

        def result(st, bound):
            obj = model.objective_value(inc_x) if inc_x is not None else None
            return IpResult(st, inc_x, obj, bound, nodes, time.perf_counter() - t0, cuts, root_lp)

        while heap:
            if time.perf_counter() - t0 > cfg.time_limit:
                status = IpStatus.TIME_LIMIT
                break
            if cfg.node_limit is not None and nodes >= cfg.node_limit:
                status = IpStatus.NODE_LIMIT
                break
            negb, _, _, depth, fixes = heapq.heappop(heap)
            if -negb <= cutoff:
                continue
            lb, ub = lb0.copy(), ub0.copy()
            for j, val in fixes.items():
                lb[j] = ub[j] = val
            nodes += 1
            while True:
                st, z, x = warm.solve(lb, ub)
                if nodes == 1 and math.isnan(root_lp) and st is LpStatus.OPTIMAL:
                    root_lp = z
                if st is not LpStatus.OPTIMAL:
                    break
                bound = closed(z)
                if bound <= cutoff:
                    break
                if not _is_integral(model, x):
                    break
                xr = _round(model, x)
                found = _separate(model, xr, cfg.separators)
                if not found:
                    break
                for cut, viol in found:
                    label = model.fresh_label(cut.label or "cut")
                    model.add_constraint(cut.coeffs, cut.sense, cut.rhs, label, cut.lazy_class)
                    cuts.append((label, viol))
            if st is LpStatus.UNBOUNDED:
                return result(IpStatus.INFEASIBLE, math.inf)
            if st is not LpStatus.OPTIMAL or bound <= cutoff:
                continue
            if _is_integral(model, x):
                xr = _round(model, x)
                val = float(model.objective_value(xr))
                if val > inc_val + 1e-9:
                    inc_x, inc_val = xr, val
                    # with a granular objective a node must beat the incumbent by a full step
                    step = float(gran) if gran is not None else 0.0
                    cutoff = max(cutoff, val + step - 1e-6 if step else val + 1e-6)
                continue
            # most fractional binary, ties by lowest index
            frac = np.where(binary & (lb != ub), np.abs(x - np.round(x)), -1.0)
            j = int(np.argmax(frac))
            for val in (1.0, 0.0):
                child = dict(fixes)
                child[j] = val
                heapq.heappush(heap, (-bound, -(depth + 1), counter, depth + 1, child))
                counter += 1

        if status is None:
            if inc_x is None:
                return result(IpStatus.INFEASIBLE, -math.inf if target is None else target)
            return result(IpStatus.OPTIMAL, inc_val)
        open_bound = max([-h[0] for h in heap] + [inc_val])
        if inc_x is not None and status is IpStatus.NODE_LIMIT:
            return result(IpStatus.FEASIBLE if open_bound > inc_val + 1e-6 else IpStatus.OPTIMAL, open_bound)
        return result(status, open_bound)


class MilpAdapter:
    """HiGHS MIP through ``scipy.optimize.milp``; lazy rows emulated by re-solving."""

    name = "highs-milp"
    capabilities = frozenset({"lp", "ip", "reduced_costs", "lazy"})

    def solve_lp(self, model: IlpModel) -> LpResult:
        return _lp(model)

    def solve_ip(self, model: IlpModel, config: IpConfig | None = None) -> IpResult:
        from scipy.optimize import Bounds, LinearConstraint, milp

        cfg = config or IpConfig()
        t0 = time.perf_counter()
        cuts = []
        root = _lp(model)
        root_lp = root.objective if root.status is LpStatus.OPTIMAL else float("nan")
        rounds = 0
        while True:
            c, (a_ub, b_ub), (a_eq, b_eq), lb, ub = model.matrices()
            ub = ub.copy()
            for j in cfg.fix_zero:
                ub[j] = 0.0
            n = model.num_vars
            if n == 0:
                lp = _lp(model)
                st = IpStatus.OPTIMAL if lp.status is LpStatus.OPTIMAL else IpStatus.INFEASIBLE
                obj = model.obj_constant if st is IpStatus.OPTIMAL else None
                if st is IpStatus.OPTIMAL and cfg.target_bound is not None and obj < cfg.target_bound - 1e-9:
                    st, obj = IpStatus.INFEASIBLE, None
                return IpResult(st, np.zeros(0), obj, float(model.obj_constant), 0,
                                time.perf_counter() - t0, cuts, root_lp)
            cons = []
            if a_ub is not None:
                cons.append(LinearConstraint(a_ub, -np.inf, b_ub))
            if a_eq is not None:
                cons.append(LinearConstraint(a_eq, b_eq, b_eq))
            if cfg.target_bound is not None:
                cons.append(LinearConstraint(c.reshape(1, -1),
                                             float(cfg.target_bound) - float(model.obj_constant) - 1e-6, np.inf))
            integ = np.array([1 if v.binary else 0 for v in model.variables])
            left = cfg.time_limit - (time.perf_counter() - t0)
            if left <= 0:
                return IpResult(IpStatus.TIME_LIMIT, None, None, float("inf"), rounds,
                                time.perf_counter() - t0, cuts, root_lp)
            res = milp(-c, constraints=cons, integrality=integ, bounds=Bounds(lb, ub),
                       options={"time_limit": left, "mip_rel_gap": 0})
            rounds += 1
            if res.status == 2:
                return IpResult(IpStatus.INFEASIBLE, None, None, -math.inf, rounds,
                                time.perf_counter() - t0, cuts, root_lp)
            if res.x is None:
                st = IpStatus.TIME_LIMIT if res.status == 1 else IpStatus.INFEASIBLE
                return IpResult(st, None, None, float("inf"), rounds, time.perf_counter() - t0, cuts, root_lp)
            xr = _round(model, res.x)
            found = _separate(model, xr, cfg.separators)
            if not found:
                st = IpStatus.OPTIMAL if res.status == 0 else IpStatus.TIME_LIMIT
                obj = model.objective_value(xr)
                return IpResult(st, xr, obj, float(obj) if st is IpStatus.OPTIMAL else -float(res.mip_dual_bound)
                                + float(model.obj_constant), rounds, time.perf_counter() - t0, cuts, root_lp)
            for cut, viol in found:
                label = model.fresh_label(cut.label or "cut")
                model.add_constraint(cut.coeffs, cut.sense, cut.rhs, label, cut.lazy_class)
                cuts.append((label, viol))


class BackendCapabilityError(ValueError):
    pass


REQUIRED = ("lp", "ip", "reduced_costs", "lazy")
_BACKENDS: dict = {}
_DEFAULT = ["bnb"]


def register_backend(adapter, require=REQUIRED, default=False):
    """Register a backend object exposing ``name``, ``capabilities``, ``solve_lp``, ``solve_ip``."""
    caps = set(getattr(adapter, "capabilities", ()))
    missing = [c for c in require if c not in caps]
    if missing:
        raise BackendCapabilityError(f"backend {getattr(adapter, 'name', adapter)!r} lacks {missing}")
    for meth in ("solve_lp", "solve_ip"):
        if not callable(getattr(adapter, meth, None)):
            raise BackendCapabilityError(f"backend lacks {meth}()")
    _BACKENDS[adapter.name] = adapter
    if default:
        _DEFAULT[0] = adapter.name
    return adapter


def get_backend(name=None):
    return _BACKENDS[name or _DEFAULT[0]]


register_backend(BranchAndBound(), default=True)
register_backend(MilpAdapter())


def solve_lp(model: IlpModel, backend=None) -> LpResult:
    return get_backend(backend).solve_lp(model)


def solve_ip(model: IlpModel, config: IpConfig | None = None, backend=None) -> IpResult:
    be = get_backend(backend)
    if (model.separators or (config and config.separators)) and "lazy" not in be.capabilities:
        raise BackendCapabilityError(f"backend {be.name!r} cannot run lazy separators")
    return be.solve_ip(model, config)


def _lp_num(a) -> str:
    a = float(a)
    return str(int(a)) if a.is_integer() else repr(a)


def write_lp(model: IlpModel) -> str:
    """CPLEX-LP text of the model (lazy rows already added are included)."""
    names = [f"x{j}" for j in range(model.num_vars)]

    def expr(coeffs):
        parts = []
        for j, a in sorted(coeffs.items()):
            a = float(a)
            parts.append(f"{'-' if a < 0 else '+'} {_lp_num(abs(a))} {names[j]}")
        s = " ".join(parts) or "0 x0"
        return s[2:] if s.startswith("+ ") else s

    out = [f"\\ {model.name}", "Maximize", " obj: " + expr({j: v.obj for j, v in enumerate(model.variables)})]
    if model.obj_constant:
        out[-1] += f" + {_lp_num(model.obj_constant)} constant"
    out.append("Subject To")
    for c in model.constraints:
        label = "".join(ch if ch.isalnum() or ch in "_." else "_" for ch in c.label)
        out.append(f" {label}: {expr(c.coeffs)} {c.sense.value} {_lp_num(c.rhs)}")
    out.append("Bounds")
    for j, v in enumerate(model.variables):
        out.append(f" {_lp_num(v.lb)} <= {names[j]} <= {_lp_num(v.ub)}")
    if model.obj_constant:
        out.append(" constant = 1")
    out.append("Binaries")
    out.append(" " + " ".join(names[j] for j, v in enumerate(model.variables) if v.binary))
    out.append("End")
    return "\n".join(out) + "\n"
