"""Linear models, a dense bounded primal simplex and branch-and-bound.

The native engine works on a dense tableau and is meant for desk-scale
models.  ``backend="highs"`` hands the same model to scipy's HiGHS
bindings instead; ``"auto"`` picks native for small models and HiGHS
otherwise.
"""
from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

EPS_FEAS = 1e-7
EPS_INT = 1e-6
EPS_PIV = 1e-9
EPS_OPT = 1e-9

LE, GE, EQ = "<=", ">=", "="
_SENSES = (LE, GE, EQ)

# models with more tableau entries than this go to HiGHS under backend="auto"
AUTO_NATIVE_LIMIT = 8_000


@dataclass
class Constraint:
    idx: list[int]
    coef: list[float]
    sense: str
    rhs: float
    name: str = ""


@dataclass
class Model:
    """Minimisation model: bounded variables, linear rows, linear objective."""
    lb: list[float] = field(default_factory=list)
    ub: list[float] = field(default_factory=list)
    integer: list[bool] = field(default_factory=list)
    names: list[str] = field(default_factory=list)
    obj: dict[int, float] = field(default_factory=dict)
    obj_const: float = 0.0
    rows: list[Constraint] = field(default_factory=list)

    @property
    def n_vars(self) -> int:
        return len(self.lb)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def add_var(self, lb: float = 0.0, ub: float = math.inf, integer: bool = False,
                cost: float = 0.0, name: str = "") -> int:
        if lb > ub:
            raise ValueError(f"variable {name or len(self.lb)}: lb {lb} > ub {ub}")
        j = len(self.lb)
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.integer.append(bool(integer))
        self.names.append(name or f"v{j}")
        if cost:
            self.obj[j] = float(cost)
        return j

    def add_constr(self, terms: Mapping[int, float] | Iterable[tuple[int, float]],
                   sense: str, rhs: float, name: str = "") -> int:
        if sense not in _SENSES:
            raise ValueError(f"unknown sense {sense!r}")
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[int, float] = {}
        for j, a in items:
            if not 0 <= j < self.n_vars:
                raise ValueError(f"constraint {name!r} references unknown variable {j}")
            acc[j] = acc.get(j, 0.0) + float(a)
        idx = [j for j in sorted(acc) if acc[j] != 0.0]
        self.rows.append(Constraint(idx, [acc[j] for j in idx], sense, float(rhs),
                                    name or f"r{len(self.rows)}"))
        return len(self.rows) - 1

    def copy(self) -> "Model":
        return Model(list(self.lb), list(self.ub), list(self.integer), list(self.names),
                     dict(self.obj), self.obj_const,
                     [Constraint(list(r.idx), list(r.coef), r.sense, r.rhs, r.name)
                      for r in self.rows])

    def objective(self, x: Sequence[float]) -> float:
        return self.obj_const + sum(c * x[j] for j, c in self.obj.items())

    def violations(self, x: Sequence[float], eps: float = EPS_FEAS) -> list[str]:
        out = []
        for j in range(self.n_vars):
            if x[j] < self.lb[j] - eps or x[j] > self.ub[j] + eps:
                out.append(f"{self.names[j]}={x[j]} outside [{self.lb[j]}, {self.ub[j]}]")
        for r in self.rows:
            lhs = sum(a * x[j] for j, a in zip(r.idx, r.coef))
            scale = eps * max(1.0, abs(r.rhs))
            if (r.sense == LE and lhs > r.rhs + scale) or (r.sense == GE and lhs < r.rhs - scale) \
                    or (r.sense == EQ and abs(lhs - r.rhs) > scale):
                out.append(f"{r.name}: {lhs} {r.sense} {r.rhs}")
        return out

    def dense(self) -> tuple[np.ndarray, np.ndarray, list[str], np.ndarray]:
        A = np.zeros((self.n_rows, self.n_vars))
        for i, r in enumerate(self.rows):
            A[i, r.idx] = r.coef
        b = np.array([r.rhs for r in self.rows], dtype=float)
        c = np.zeros(self.n_vars)
        for j, v in self.obj.items():
            c[j] = v
        return A, b, [r.sense for r in self.rows], c


def relax(m: Model) -> Model:
    """Copy of ``m`` with all integrality flags cleared."""
    out = m.copy()
    out.integer = [False] * out.n_vars
    return out


def add_constraints(m: Model, rows: Iterable[tuple[Mapping[int, float], str, float, str]]) -> Model:
    """Copy of ``m`` extended with the given (terms, sense, rhs, name) rows."""
    out = m.copy()
    for terms, sense, rhs, name in rows:
        out.add_constr(terms, sense, rhs, name)
    return out


@dataclass
class LpSolution:
    status: str                     # optimal | infeasible | unbounded
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None
    duals: Optional[np.ndarray] = None
    iterations: int = 0


@dataclass
class MipSolution:
    status: str                     # optimal | infeasible | unbounded | limit
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None
    bound: Optional[float] = None
    nodes: int = 0
    incumbents: list[tuple[int, float]] = field(default_factory=list)
    backend: str = "native"


# ----------------------------------------------------------------------------
# native bounded primal simplex


class _Tableau:
    """Bounded-variable primal simplex on [A | I_art] z = b, 0 <= z <= u."""

    def __init__(self, A: np.ndarray, b: np.ndarray, u: np.ndarray, basis: list[int]):
        self.A0 = A
        self.b0 = b
        self.u = u
        self.m, self.N = A.shape
        self.basis = list(basis)
        self.at_upper = np.zeros(self.N, dtype=bool)
        self.iterations = 0
        self.refactor()

    def refactor(self) -> None:
        Bm = self.A0[:, self.basis]
        self.T = np.linalg.solve(Bm, self.A0)
        xn = np.where(self.at_upper, self.u, 0.0)
        xn[self.basis] = 0.0
        self.xB = np.linalg.solve(Bm, self.b0 - self.A0 @ xn)

    def values(self) -> np.ndarray:
        z = np.where(self.at_upper, self.u, 0.0)
        z[self.basis] = self.xB
        return z

    def run(self, c: np.ndarray, allowed: np.ndarray, max_iter: int = 200_000) -> str:
        """Minimise c z over the current basis; columns with allowed=False never enter."""
        degenerate = 0
        bland = False
        since_refactor = 0
        is_basic = np.zeros(self.N, dtype=bool)
        is_basic[self.basis] = True
        while True:
            if self.iterations >= max_iter:
                raise RuntimeError("simplex iteration limit reached")
            d = c - c[self.basis] @ self.T
            cand_up = (~is_basic) & allowed & (~self.at_upper) & (d < -EPS_OPT)
            cand_dn = (~is_basic) & allowed & self.at_upper & (d > EPS_OPT)
            cand = cand_up | cand_dn
            if not cand.any():
                return "optimal"
            if bland:
                j = int(np.flatnonzero(cand)[0])
            else:
                score = np.where(cand, np.abs(d), -1.0)
                j = int(np.argmax(score))
            direction = 1.0 if cand_up[j] else -1.0
            col = self.T[:, j] * direction           # basics change by -col * theta
            theta = self.u[j]                         # bound flip distance
            leave = -1
            leave_to_upper = False
            ub_basic = self.u[self.basis]
            pos = col > EPS_PIV
            neg = col < -EPS_PIV
            with np.errstate(divide="ignore", invalid="ignore"):
                r_pos = np.where(pos, self.xB / col, np.inf)
                r_neg = np.where(neg & np.isfinite(ub_basic), (self.xB - ub_basic) / col, np.inf)
            r_pos = np.maximum(r_pos, 0.0)
            r_neg = np.maximum(r_neg, 0.0)
            ratios = np.minimum(r_pos, r_neg)
            best = ratios.min() if self.m else np.inf
            if best < theta:
                theta = best
                ties = np.flatnonzero(ratios <= best + 1e-12)
                if bland:
                    leave = int(min(ties, key=lambda i: self.basis[i]))
                else:
                    leave = int(ties[np.argmax(np.abs(col[ties]))])
                leave_to_upper = bool(r_neg[leave] <= r_pos[leave])
            if not np.isfinite(theta):
                return "unbounded"
            self.iterations += 1
            if theta <= 1e-12:
                degenerate += 1
                if degenerate > 50:
                    bland = True
            else:
                degenerate = 0
                bland = False
            self.xB -= col * theta
            if leave < 0:
                self.at_upper[j] = not self.at_upper[j]
                continue
            # entering value after the step
            enter_val = (self.u[j] - theta) if self.at_upper[j] else theta
            out = self.basis[leave]
            self.at_upper[out] = leave_to_upper
            is_basic[out] = False
            self.at_upper[j] = False
            is_basic[j] = True
            self.basis[leave] = j
            piv = self.T[leave, j]
            self.T[leave] /= piv
            others = np.flatnonzero(np.abs(self.T[:, j]) > 0)
            others = others[others != leave]
            if len(others):
                self.T[others] -= np.outer(self.T[others, j], self.T[leave])
            self.xB[leave] = enter_val
            since_refactor += 1
            if since_refactor >= 100:
                self.refactor()
                since_refactor = 0


def _standard_form(m: Model, lb: np.ndarray, ub: np.ndarray):
    """Return (A, b, u, c, n_struct, row_sign) with structural x shifted to lb 0."""
    A, b, senses, c = m.dense()
    n = m.n_vars
    if np.any(~np.isfinite(lb)):
        raise ValueError("native simplex needs finite lower bounds")
    b = b - A @ lb
    slack_cols = []
    for i, s in enumerate(senses):
        if s == LE:
            slack_cols.append((i, 1.0))
        elif s == GE:
            slack_cols.append((i, -1.0))
    S = np.zeros((m.n_rows, len(slack_cols)))
    for k, (i, v) in enumerate(slack_cols):
        S[i, k] = v
    A = np.hstack([A, S])
    sign = np.where(b < 0, -1.0, 1.0)
    A = A * sign[:, None]
    b = b * sign
    u = np.concatenate([ub - lb, np.full(len(slack_cols), np.inf)])
    cc = np.concatenate([c, np.zeros(len(slack_cols))])
    return A, b, u, cc, n, sign


def _native_lp(m: Model, lb: np.ndarray, ub: np.ndarray, max_iter: int = 200_000) -> LpSolution:
    if np.any(lb > ub + EPS_FEAS):
        return LpSolution("infeasible")
    ub = np.maximum(ub, lb)
    A, b, u, c, n, sign = _standard_form(m, lb, ub)
    rows, N = A.shape
    if rows == 0:
        # only bounds: each variable at the cheaper end
        z = np.where(c < 0, u, 0.0)
        if np.any(~np.isfinite(z)):
            return LpSolution("unbounded")
        x = z[:n] + lb
        return LpSolution("optimal", x, m.objective(x), np.zeros(0), 0)
    # artificial basis, but reuse a slack column with +1 coefficient where possible
    basis = []
    art_cols = []
    for i in range(rows):
        unit = np.flatnonzero((A[i, n:] == 1.0) & (np.abs(A[:, n:]).sum(axis=0) == 1.0))
        if len(unit):
            basis.append(n + int(unit[0]))
        else:
            art_cols.append(i)
            basis.append(-1)
    n_art = len(art_cols)
    Afull = np.hstack([A, np.zeros((rows, n_art))])
    for k, i in enumerate(art_cols):
        Afull[i, N + k] = 1.0
        basis[i] = N + k
    ufull = np.concatenate([u, np.full(n_art, np.inf)])
    tab = _Tableau(Afull, b, ufull, basis)
    allowed = np.ones(N + n_art, dtype=bool)
    if n_art:
        c1 = np.zeros(N + n_art)
        c1[N:] = 1.0
        st = tab.run(c1, allowed, max_iter)
        z = tab.values()
        if z[N:].sum() > EPS_FEAS * max(1.0, np.abs(b).max()):
            return LpSolution("infeasible", iterations=tab.iterations)
        # drive remaining artificials out of the basis
        keep_rows = list(range(rows))
        for pos in range(rows):
            bj = tab.basis[pos]
            if bj < N:
                continue
            row = tab.T[pos, :N]
            cands = np.flatnonzero(np.abs(row) > 1e-7)
            cands = [j for j in cands if j not in tab.basis]
            if cands:
                j = int(cands[0])
                tab.basis[pos] = j
                tab.at_upper[j] = False
                tab.refactor()
            else:
                keep_rows.remove(pos)
        if len(keep_rows) < rows:
            basis_kept = [tab.basis[i] for i in keep_rows]
            at_upper = tab.at_upper.copy()
            tab = _Tableau(Afull[keep_rows], b[keep_rows], ufull, basis_kept)
            tab.at_upper = at_upper
            tab.refactor()
        allowed[N:] = False
        tab.u = ufull.copy()
        tab.u[N:] = 0.0
    c2 = np.concatenate([c, np.zeros(n_art)])
    st = tab.run(c2, allowed, max_iter)
    if st == "unbounded":
        return LpSolution("unbounded", iterations=tab.iterations)
    tab.refactor()
    z = tab.values()
    x = z[:n] + lb
    Bm = tab.A0[:, tab.basis]
    y = np.linalg.solve(Bm.T, c2[tab.basis])
    duals = np.zeros(rows)
    if n_art and len(y) < rows:
        duals[keep_rows] = y
    else:
        duals[:len(y)] = y
    duals *= sign
    return LpSolution("optimal", np.clip(x, lb, ub), m.objective(np.clip(x, lb, ub)), duals, tab.iterations)


# ----------------------------------------------------------------------------
# HiGHS backend


def _sparse_rows(m: Model):
    from scipy.sparse import csr_matrix
    data, indices, indptr = [], [], [0]
    for r in m.rows:
        data.extend(r.coef)
        indices.extend(r.idx)
        indptr.append(len(data))
    return csr_matrix((data, indices, indptr), shape=(m.n_rows, m.n_vars))


def _row_bounds(m: Model):
    lo = np.array([r.rhs if r.sense in (GE, EQ) else -np.inf for r in m.rows])
    hi = np.array([r.rhs if r.sense in (LE, EQ) else np.inf for r in m.rows])
    return lo, hi


def _highs_lp(m: Model, lb: np.ndarray, ub: np.ndarray) -> LpSolution:
    from scipy.optimize import linprog
    c = np.zeros(m.n_vars)
    for j, v in m.obj.items():
        c[j] = v
    A = _sparse_rows(m)
    le = [i for i, r in enumerate(m.rows) if r.sense != EQ]
    eq = [i for i, r in enumerate(m.rows) if r.sense == EQ]
    sgn = np.array([1.0 if m.rows[i].sense == LE else -1.0 for i in le])
    A_ub = A[le].multiply(sgn[:, None]).tocsr() if le else None
    b_ub = np.array([m.rows[i].rhs for i in le]) * sgn if le else None
    A_eq = A[eq] if eq else None
    b_eq = np.array([m.rows[i].rhs for i in eq]) if eq else None
    bounds = list(zip(lb, [None if not np.isfinite(u) else u for u in ub]))
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status == 2:
        return LpSolution("infeasible")
    if res.status == 3:
        return LpSolution("unbounded")
    if res.status != 0:
        raise RuntimeError(f"HiGHS LP failed: {res.message}")
    duals = np.zeros(m.n_rows)
    if le:
        duals[le] = res.ineqlin.marginals * sgn
    if eq:
        duals[eq] = res.eqlin.marginals
    x = np.asarray(res.x)
    return LpSolution("optimal", x, m.objective(x), duals, int(res.nit))


def _highs_mip(m: Model, time_limit: Optional[float], node_limit: Optional[int]) -> MipSolution:
    from scipy.optimize import Bounds, LinearConstraint, milp
    c = np.zeros(m.n_vars)
    for j, v in m.obj.items():
        c[j] = v
    cons = []
    if m.n_rows:
        lo, hi = _row_bounds(m)
        cons.append(LinearConstraint(_sparse_rows(m), lo, hi))
    opts: dict = {"mip_rel_gap": 1e-9}
    if m.n_rows * (m.n_vars + m.n_rows) <= AUTO_NATIVE_LIMIT:
        # presolve has crashed and misreported optima on tiny models; skipping it is cheap here
        opts["presolve"] = False
    if time_limit is not None:
        opts["time_limit"] = float(time_limit)
    if node_limit is not None:
        opts["node_limit"] = int(node_limit)
    res = milp(c, constraints=cons, integrality=np.array(m.integer, dtype=int),
               bounds=Bounds(np.array(m.lb), np.array(m.ub)), options=opts)
    if res.status == 0:
        x = _polish(m, _snap_integers(m, np.asarray(res.x)))
        obj = m.objective(x)
        return MipSolution("optimal", x, obj, obj, int(getattr(res, "mip_node_count", 0) or 0),
                           [(0, obj)], "highs")
    if res.status == 1:
        x = None if res.x is None else _snap_integers(m, np.asarray(res.x))
        obj = None if x is None else m.objective(x)
        bound = getattr(res, "mip_dual_bound", None)
        return MipSolution("limit", x, obj, bound, int(getattr(res, "mip_node_count", 0) or 0),
                           [] if obj is None else [(0, obj)], "highs")
    if res.status == 2:
        return MipSolution("infeasible", backend="highs")
    if res.status == 3:
        return MipSolution("unbounded", backend="highs")
    if "unbounded or infeasible" in str(res.message):
        # HiGHS sometimes cannot tell which; the relaxation decides infeasibility
        lp = _highs_lp(m, np.array(m.lb, dtype=float), np.array(m.ub, dtype=float))
        return MipSolution("infeasible" if lp.status == "infeasible" else "unbounded",
                           backend="highs")
    raise RuntimeError(f"HiGHS MIP failed: {res.message}")


def _polish(m: Model, x: np.ndarray) -> np.ndarray:
    """Re-optimise the continuous part with the integers fixed.

    HiGHS presolve (as shipped with scipy 1.15) can return a point whose
    continuous variables are not optimal for its own integer choice.
    """
    if all(m.integer):
        return x
    lb, ub = np.array(m.lb, dtype=float), np.array(m.ub, dtype=float)
    ints = np.array(m.integer, dtype=bool)
    lb[ints] = ub[ints] = x[ints]
    lp = _highs_lp(m, lb, ub)
    if lp.status == "optimal" and lp.objective < m.objective(x) - 1e-9:
        y = lp.x.copy()
        y[ints] = x[ints]
        return y
    return x


def _snap_integers(m: Model, x: np.ndarray) -> np.ndarray:
    x = x.copy()
    for j, isint in enumerate(m.integer):
        if isint:
            x[j] = round(x[j])
    return np.clip(x, m.lb, m.ub)


# ----------------------------------------------------------------------------
# public entry points


def _pick_backend(m: Model, backend: str) -> str:
    if backend == "auto":
        return "native" if m.n_rows * (m.n_vars + m.n_rows) <= AUTO_NATIVE_LIMIT else "highs"
    if backend not in ("native", "highs"):
        raise ValueError(f"unknown backend {backend!r}")
    return backend


def solve_lp(m: Model, backend: str = "native") -> LpSolution:
    """Solve the continuous relaxation of ``m`` (integrality flags ignored)."""
    lb = np.array(m.lb, dtype=float)
    ub = np.array(m.ub, dtype=float)
    if _pick_backend(m, backend) == "highs":
        return _highs_lp(m, lb, ub)
    return _native_lp(m, lb, ub)


def _most_fractional(m: Model, x: np.ndarray) -> int:
    best, best_j = EPS_INT, -1
    for j, isint in enumerate(m.integer):
        if isint:
            f = abs(x[j] - round(x[j]))
            if f > best + 1e-12:
                best, best_j = f, j
    return best_j


def solve_mip(m: Model, time_limit: Optional[float] = None, node_limit: Optional[int] = None,
              backend: str = "native") -> MipSolution:
    """Branch-and-bound with best-bound node selection and most-fractional branching."""
    for j, isint in enumerate(m.integer):
        if isint and not (np.isfinite(m.lb[j]) and np.isfinite(m.ub[j])):
            raise ValueError(f"integer variable {m.names[j]} needs finite bounds")
    if _pick_backend(m, backend) == "highs":
        return _highs_mip(m, time_limit, node_limit)
    start = time.monotonic()
    lb0 = np.array(m.lb, dtype=float)
    ub0 = np.array(m.ub, dtype=float)
    ints = np.array(m.integer, dtype=bool)
    lb0[ints] = np.ceil(lb0[ints] - EPS_INT)
    ub0[ints] = np.floor(ub0[ints] + EPS_INT)
    counter = itertools.count()
    root = _native_lp(m, lb0, ub0)
    if root.status != "optimal":
        return MipSolution(root.status, nodes=1)
    heap = [(root.objective, next(counter), lb0, ub0, root)]
    inc_x, inc_obj = None, math.inf
    history: list[tuple[int, float]] = []
    nodes = 1
    while heap:
        bound, _, lb, ub, sol = heapq.heappop(heap)
        if bound >= inc_obj - 1e-9:
            continue
        limit_hit = (time_limit is not None and time.monotonic() - start > time_limit) or \
                    (node_limit is not None and nodes >= node_limit)
        if limit_hit:
            heapq.heappush(heap, (bound, 0, lb, ub, sol))
            best_bound = min(h[0] for h in heap)
            return MipSolution("limit", inc_x, None if inc_x is None else inc_obj,
                               min(best_bound, inc_obj), nodes, history)
        j = _most_fractional(m, sol.x)
        if j < 0:
            x = _snap_integers(m, sol.x)
            inc_x, inc_obj = x, m.objective(x)
            history.append((nodes, inc_obj))
            continue
        v = sol.x[j]
        for lo_j, hi_j in ((lb[j], math.floor(v)), (math.ceil(v), ub[j])):
            if lo_j > hi_j:
                continue
            nlb, nub = lb.copy(), ub.copy()
            nlb[j], nub[j] = lo_j, hi_j
            child = _native_lp(m, nlb, nub)
            nodes += 1
            if child.status == "optimal" and child.objective < inc_obj - 1e-9:
                heapq.heappush(heap, (child.objective, next(counter), nlb, nub, child))
    if inc_x is None:
        return MipSolution("infeasible", nodes=nodes)
    return MipSolution("optimal", inc_x, inc_obj, inc_obj, nodes, history)


# ----------------------------------------------------------------------------
# LP-format export


def _fmt(v: float) -> str:
    return repr(float(v)) if v != int(v) else str(int(v))


def _expr(terms: Iterable[tuple[int, float]], names: list[str]) -> str:
    parts = []
    for j, a in terms:
        sign = "-" if a < 0 else "+"
        parts.append(f"{sign} {_fmt(abs(a))} {names[j]}")
    s = " ".join(parts) if parts else "0"
    return s[2:] if s.startswith("+ ") else s


def to_lp_string(m: Model) -> str:
    """CPLEX-LP style text: Minimize / Subject To / Bounds / General / End."""
    lines = ["Minimize", " obj: " + _expr(sorted(m.obj.items()), m.names)]
    if m.obj_const:
        lines[-1] += f" + {_fmt(m.obj_const)} constant"
    lines.append("Subject To")
    for r in m.rows:
        lines.append(f" {r.name}: {_expr(zip(r.idx, r.coef), m.names)} {r.sense} {_fmt(r.rhs)}")
    lines.append("Bounds")
    for j in range(m.n_vars):
        lo = "-inf" if not np.isfinite(m.lb[j]) else _fmt(m.lb[j])
        hi = "+inf" if not np.isfinite(m.ub[j]) else _fmt(m.ub[j])
        lines.append(f" {lo} <= {m.names[j]} <= {hi}")
    gen = [m.names[j] for j in range(m.n_vars) if m.integer[j]]
    if gen:
        lines.append("General")
        lines.append(" " + " ".join(gen))
    lines.append("End")
    return "\n".join(lines) + "\n"
