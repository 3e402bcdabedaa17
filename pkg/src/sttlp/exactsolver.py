"""Exact rational simplex, rank tests and vertex/uniqueness certificates.

The tableau is fraction-free: each row is a list of Python ints whose
basic column carries the row's (positive) scale, so no Fraction objects
are touched inside the pivot loop.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .lpmodel import EQ, GE, LE, LpModel, Row, Var, check_feasible, make_row

log = logging.getLogger(__name__)

DEFAULT_MAX_PIVOTS = 200_000
# consecutive degenerate pivots tolerated under largest-coefficient pricing
# before switching to least-index (Bland) pricing
DEGENERATE_SWITCH = 30


class SolverError(RuntimeError):
    pass


class PivotLimitExceeded(SolverError):
    pass


@dataclass(frozen=True)
class OptResult:
    status: str  # optimal | infeasible | unbounded
    value: Fraction | None = None
    point: tuple | None = None
    basis: frozenset = frozenset()
    unique: bool = False
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _lcm_den(values) -> int:
    L = 1
    for v in values:
        d = Fraction(v).denominator
        if d != 1:
            L = L * d // math.gcd(L, d)
    return L


def _reduce(row: list) -> list:
    g = math.gcd(*row)
    if g > 1:
        return [x // g for x in row]
    return row


def _dense_objective(model: LpModel, objective) -> dict:
    if objective is None:
        if model.objective is None:
            raise SolverError("no objective given and the model has none")
        return dict(model.objective[1])
    if isinstance(objective, dict):
        return {i: Fraction(c) for i, c in objective.items() if c != 0}
    if len(objective) != model.nvars:
        raise SolverError(f"objective has {len(objective)} entries for {model.nvars} variables")
    return {i: Fraction(c) for i, c in enumerate(objective) if c != 0}


class Solver:
    """Two-phase simplex over one model, reusable across objectives.

    Phase 1 runs once; every ``optimize`` call warm-starts from the last
    basis. Rows may be appended later (``add_cut``); the dual simplex then
    restores feasibility.
    """

    def __init__(self, model: LpModel, max_pivots: int = DEFAULT_MAX_PIVOTS):
        self.model = model
        self.max_pivots = max_pivots
        self.pivots = 0
        self.status = "unsolved"
        self._build()
        self._phase1()

    # -- setup ---------------------------------------------------------------

    def _build(self):
        m = self.model
        bounded = m.nonneg | m.implied_nonneg
        self.col_var = []   # column -> (ordinal, sign) or None for slacks
        self.var_cols = []  # ordinal -> [(col, sign)]
        for i in range(m.nvars):
            cols = [(len(self.col_var), 1)]
            self.col_var.append((i, 1))
            if i not in bounded:
                cols.append((len(self.col_var), -1))
                self.col_var.append((i, -1))
            self.var_cols.append(cols)
        self.col_label = [None] * len(self.col_var)
        for i in m.nonneg:
            self.col_label[self.var_cols[i][0][0]] = f"nonneg:{m.variables[i].name()}"
        self.eq_labels = []
        rows = []
        for row in m.rows:
            rows.append(self._encode(row))
        nstruct = len(self.col_var)
        # slack columns
        specs = []
        for row, (coefs, rhs) in zip(m.rows, rows):
            slack = None
            if row.rel != EQ:
                slack = len(self.col_var)
                self.col_var.append(None)
                self.col_label.append(row.label)
            else:
                self.eq_labels.append(row.label)
            specs.append((row, coefs, rhs, slack))
        self.nreal = len(self.col_var)
        width = self.nreal
        tableau, basis, arts = [], [], []
        for row, coefs, rhs, slack in specs:
            dense = [Fraction(0)] * width
            for c, v in coefs.items():
                dense[c] = v
            if slack is not None:
                dense[slack] = Fraction(1 if row.rel == LE else -1)
            L = _lcm_den(list(coefs.values()) + [rhs])
            ints = [int(x * L) for x in dense] + [int(rhs * L)]
            if ints[-1] < 0:
                ints = [-x for x in ints]
            if slack is not None and ints[slack] > 0:
                basis.append(slack)
                arts.append(False)
            else:
                basis.append(None)
                arts.append(True)
            tableau.append(ints)
        nart = sum(arts)
        self.T = []
        self.basis = []
        a = 0
        for ints, b, is_art in zip(tableau, basis, arts):
            row = ints[:-1] + [0] * nart + [ints[-1]]
            if is_art:
                col = self.nreal + a
                row[col] = 1
                a += 1
                b = col
            self.T.append(_reduce(row))
            self.basis.append(b)
        self.ncols = self.nreal + nart
        self.nstruct = nstruct

    def _encode(self, row: Row):
        coefs = {}
        for i, c in row.coefs:
            for col, sign in self.var_cols[i]:
                coefs[col] = coefs.get(col, 0) + sign * c
        return {c: v for c, v in coefs.items() if v != 0}, row.rhs

    # -- pivoting ------------------------------------------------------------

    def _objective_row(self, cost: dict) -> tuple:
        """Integer reduced-cost row for column costs ``cost`` at the current basis."""
        terms = []
        for r, b in enumerate(self.basis):
            cb = cost.get(b)
            if cb:
                terms.append((Fraction(cb) / self.T[r][b], r))
        L = _lcm_den(list(cost.values()) + [t for t, _ in terms])
        o = [0] * (self.ncols + 1)
        for c, v in cost.items():
            o[c] = int(v * L)
        for t, r in terms:
            k = int(t * L)
            row = self.T[r]
            o = [x - k * y for x, y in zip(o, row)]
        g = math.gcd(*o, L)
        if g > 1:
            o = [x // g for x in o]
            L //= g
        return o, L

    def _pivot(self, r: int, q: int):
        self.pivots += 1
        if self.pivots > self.max_pivots:
            raise PivotLimitExceeded(f"pivot limit {self.max_pivots} exceeded")
        prow = self.T[r]
        a = prow[q]
        if a < 0:
            prow = [-x for x in prow]
            a = -a
        prow = _reduce(prow)
        a = prow[q]
        self.T[r] = prow
        T = self.T
        # rows whose q-entry is a multiple of a need no rescaling: update
        # only the pivot row's support in place
        nz = [(k, v) for k, v in enumerate(prow) if v]
        for s in range(len(T)):
            if s == r:
                continue
            row = T[s]
            e = row[q]
            if not e:
                continue
            if e % a == 0:
                m = e // a
                for k, v in nz:
                    row[k] -= m * v
            else:
                T[s] = _reduce([x * a - e * y for x, y in zip(row, prow)])
        e = self.o[q]
        if e and e % a == 0:
            m = e // a
            o = self.o
            for k, v in nz:
                o[k] -= m * v
        elif e:
            o = [x * a - e * y for x, y in zip(self.o, prow)]
            od = self.od * a
            g = math.gcd(*o, od)
            if g > 1:
                o = [x // g for x in o]
                od //= g
            self.o, self.od = o, od
        self.basis[r] = q

    def _entering(self, allowed, bland: bool):
        o = self.o
        cols = range(allowed) if isinstance(allowed, int) else allowed
        if bland:
            for j in cols:
                if o[j] < 0:
                    return j
            return None
        best, bj = 0, None
        for j in cols:
            if o[j] < best:
                best, bj = o[j], j
        return bj

    def _leaving(self, q: int):
        best_r = None
        bt = ba = 0
        for r, row in enumerate(self.T):
            a = row[q]
            if a > 0:
                t = row[-1]
                if best_r is None:
                    best_r, bt, ba = r, t, a
                    continue
                lhs, rhs = t * ba, bt * a
                if lhs < rhs or (lhs == rhs and self.basis[r] < self.basis[best_r]):
                    best_r, bt, ba = r, t, a
        return best_r

    def _run(self, allowed) -> str:
        bland = False
        degenerate = 0
        while True:
            q = self._entering(allowed, bland)
            if q is None:
                return "optimal"
            r = self._leaving(q)
            if r is None:
                return "unbounded"
            if self.T[r][-1] == 0:
                degenerate += 1
                if degenerate >= DEGENERATE_SWITCH:
                    bland = True
            else:
                degenerate = 0
                bland = False
            self._pivot(r, q)

    def _phase1(self):
        if self.ncols == self.nreal:
            self.status = "feasible"
            return
        cost = {c: Fraction(1) for c in range(self.nreal, self.ncols)}
        self.o, self.od = self._objective_row(cost)
        self._run(self.ncols)
        if self.o[-1] != 0:  # -od * z with z > 0
            self.status = "infeasible"
            return
        # drive zero-level artificials out of the basis
        r = 0
        while r < len(self.T):
            b = self.basis[r]
            if b >= self.nreal:
                row = self.T[r]
                q = next((j for j in range(self.nreal) if row[j] != 0), None)
                if q is None:
                    del self.T[r]
                    del self.basis[r]
                    continue
                self._pivot(r, q)
            r += 1
        self.T = [row[:self.nreal] + [row[-1]] for row in self.T]
        self.ncols = self.nreal
        self.status = "feasible"

    # -- public --------------------------------------------------------------

    def _column_costs(self, objective: dict, sense: str) -> dict:
        sgn = -1 if sense == "max" else 1
        cost = {}
        for i, c in objective.items():
            for col, s in self.var_cols[i]:
                cost[col] = cost.get(col, 0) + sgn * s * Fraction(c)
        return {c: v for c, v in cost.items() if v != 0}

    def optimize(self, objective=None, sense: str | None = None,
                 tiebreak: dict | None = None) -> OptResult:
        """Optimize, warm-started from the current basis.

        ``tiebreak`` (minimized) picks a vertex inside the optimal face.
        """
        if sense is None:
            sense = self.model.objective[0] if objective is None and self.model.objective else "min"
        if sense not in ("min", "max"):
            raise SolverError(f"unknown sense {sense!r}")
        if self.status == "infeasible":
            return OptResult("infeasible", pivots=self.pivots)
        obj = _dense_objective(self.model, objective)
        start = self.pivots
        primary = self._column_costs(obj, sense)
        self.o, self.od = self._objective_row(primary)
        status = self._run(self.ncols)
        if status == "unbounded":
            return OptResult("unbounded", pivots=self.pivots - start)
        if tiebreak and not self._unique():
            # columns with zero primary reduced cost stay zero under these pivots
            face = [j for j in range(self.ncols) if self.o[j] == 0]
            self.o, self.od = self._objective_row(self._column_costs(tiebreak, "min"))
            self._run(face)
            self.o, self.od = self._objective_row(primary)
        point = self.current_point()
        value = sum((c * point[i] for i, c in obj.items()), Fraction(0))
        return OptResult("optimal", value, point, self._tight_ids(), self._unique(),
                         self.pivots - start)

    def current_point(self) -> tuple:
        vals = [Fraction(0)] * self.model.nvars
        for r, b in enumerate(self.basis):
            cv = self.col_var[b] if b < len(self.col_var) else None
            if cv is None:
                continue
            i, s = cv
            vals[i] += s * Fraction(self.T[r][-1], self.T[r][b])
        return tuple(vals)

    def _tight_ids(self) -> frozenset:
        basic = set(self.basis)
        ids = {self.col_label[j] for j in range(self.ncols)
               if j not in basic and self.col_label[j] is not None}
        ids.update(self.eq_labels)
        return frozenset(ids)

    def _unique(self) -> bool:
        basic = set(self.basis)
        mirror = set()
        for cols in self.var_cols:
            if len(cols) == 2 and (cols[0][0] in basic or cols[1][0] in basic):
                mirror.update(c for c, _ in cols)
        for j in range(self.ncols):
            if j not in basic and j not in mirror and self.o[j] == 0:
                return False
        return True

    def add_cut(self, row: Row):
        """Append a >= / <= row and restore primal feasibility by dual simplex.

        Must be called right after ``optimize`` (the reduced-cost row is reused).
        """
        if row.rel == EQ:
            raise SolverError("only inequality cuts are supported")
        coefs, rhs = self._encode(row)
        # new slack column, appended before the rhs entry
        for r in range(len(self.T)):
            self.T[r].insert(self.ncols, 0)
        self.o.insert(self.ncols, 0)
        slack = self.ncols
        self.ncols += 1
        self.nreal += 1
        self.col_var.append(None)
        self.col_label.append(row.label)
        # write as  -a.x + s = -b  for >=,  a.x + s = b  for <=
        sgn = -1 if row.rel == GE else 1
        L = _lcm_den(list(coefs.values()) + [rhs])
        new = [0] * (self.ncols + 1)
        for c, v in coefs.items():
            new[c] = int(sgn * v * L)
        new[slack] = L
        new[-1] = int(sgn * rhs * L)
        for r, b in enumerate(self.basis):
            e = new[b]
            if e:
                prow = self.T[r]
                p = prow[b]
                new = [x * p - e * y for x, y in zip(new, prow)]
        self.T.append(_reduce(new))
        self.basis.append(slack)
        self._dual_simplex()

    def _dual_simplex(self):
        while True:
            r = None
            for s, row in enumerate(self.T):
                if row[-1] < 0 and (r is None or self.basis[s] < self.basis[r]):
                    r = s
            if r is None:
                return
            row = self.T[r]
            q = None
            for j in range(self.ncols):
                a = row[j]
                if a < 0:
                    # ratio o_j / |a|; minimize, ties to smaller index
                    if q is None or self.o[j] * (-row[q]) < self.o[q] * (-a):
                        q = j
            if q is None:
                self.status = "infeasible"
                return
            self._pivot(r, q)


def solve(model: LpModel, objective=None, sense: str | None = None,
          max_pivots: int = DEFAULT_MAX_PIVOTS) -> OptResult:
    if model.implicit:
        return solve_with_separation(model, objective, sense, max_pivots=max_pivots)
    return Solver(model, max_pivots).optimize(objective, sense)


def solve_with_separation(model: LpModel, objective=None, sense: str | None = None,
                          max_rounds: int = 10_000, max_pivots: int = DEFAULT_MAX_PIVOTS,
                          solver: Solver | None = None) -> OptResult:
    """Cutting-plane loop over the model's implicit families.

    Pass a live ``solver`` to keep cuts across objectives.
    """
    s = solver or Solver(model, max_pivots)
    res = s.optimize(objective, sense)
    for _ in range(max_rounds):
        if not res.optimal:
            return res
        cuts = [row for fam in model.implicit if (row := fam.separate(res.point)) is not None]
        if not cuts:
            return res
        for row in cuts:
            s.add_cut(row)
            if s.status == "infeasible":
                return OptResult("infeasible", pivots=s.pivots)
        res = s.optimize(objective, sense)
    raise SolverError(f"separation did not converge within {max_rounds} rounds")


# -- linear algebra ----------------------------------------------------------

def _int_rows(rows) -> list:
    out = []
    for row in rows:
        L = _lcm_den(row)
        out.append([int(Fraction(x) * L) for x in row])
    return out


def rank(rows: Sequence[Sequence], ncols: int | None = None) -> int:
    """Exact rank of a rational matrix (fraction-free elimination)."""
    M = [r for r in _int_rows(rows) if any(r)]
    if not M:
        return 0
    ncols = ncols or len(M[0])
    rk = 0
    for c in range(ncols):
        piv = next((i for i in range(rk, len(M)) if M[i][c]), None)
        if piv is None:
            continue
        M[rk], M[piv] = M[piv], M[rk]
        p = M[rk]
        a = p[c]
        for i in range(rk + 1, len(M)):
            e = M[i][c]
            if e:
                M[i] = _reduce([x * a - e * y for x, y in zip(M[i], p)])
        rk += 1
        if rk == len(M):
            break
    return rk


def _dense(row: Row, n: int) -> list:
    out = [Fraction(0)] * n
    for i, c in row.coefs:
        out[i] = c
    return out


def _explicit_rows(model: LpModel) -> list:
    rows = model.all_rows()
    for fam in model.implicit:
        if fam.expand is None:
            raise SolverError(f"family {fam.name!r} cannot be expanded for a rank test")
        rows.extend(fam.expand())
    return rows


def tight_rows(model: LpModel, point: Sequence) -> list:
    p = [Fraction(x) for x in point]
    return [r for r in _explicit_rows(model) if r.activity(p) == r.rhs]


def is_vertex(model: LpModel, point: Sequence) -> bool:
    """True iff the tight rows and bounds at ``point`` have full rank."""
    bad = check_feasible(model, point)
    if bad:
        raise SolverError(f"point is infeasible: {', '.join(bad[:5])}")
    n = model.nvars
    return rank([_dense(r, n) for r in tight_rows(model, point)], n) == n


def certify_unique_optimum(model: LpModel, objective, point: Sequence,
                           sense: str = "min") -> bool:
    """True iff ``point`` is the only optimum for ``objective``."""
    bad = check_feasible(model, point)
    if bad:
        raise SolverError(f"point is infeasible: {', '.join(bad[:5])}")
    obj = _dense_objective(model, objective)
    n = model.nvars
    p = [Fraction(x) for x in point]
    value = sum((c * p[i] for i, c in obj.items()), Fraction(0))
    res = solve(model, obj, sense)
    if not res.optimal or res.value != value:
        raise SolverError("point is not optimal for the objective")
    ineq, eqs = [], []
    for r in tight_rows(model, p):
        if r.rel == EQ:
            eqs.append(r.coefs)
        elif r.rel == GE:
            ineq.append(r.coefs)
        else:
            ineq.append(tuple((i, -c) for i, c in r.coefs))
    cvec = tuple(sorted(obj.items()))
    full = [_dense(Row(c, GE, 0, ""), n) for c in ineq + eqs + [cvec]]
    if rank(full, n) < n:
        return False
    if not ineq:
        return True
    # any nonzero feasible direction inside the optimal face must raise
    # some tight inequality, so the face is a point iff this LP is 0
    cone = LpModel("cone", None, [Var("d", (i,)) for i in range(n)])
    for t, c in enumerate(ineq):
        cone.rows.append(Row(c, GE, Fraction(0), f"t{t}"))
    for t, c in enumerate(eqs):
        cone.rows.append(Row(c, EQ, Fraction(0), f"e{t}"))
    cone.rows.append(Row(cvec, EQ, Fraction(0), "obj"))
    total = {}
    for c in ineq:
        for i, v in c:
            total[i] = total.get(i, 0) + v
    cone.rows.append(make_row(total, LE, 1, "norm"))
    res = solve(cone, total, "max")
    return res.optimal and res.value == 0
