"""Root rounding of LP points into STTs, and approximation-ratio drivers."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exactsolver import Solver, solve
from .lpmodel import (ImplicitFamily, LpModel, build_bc_ratio_lp,
                      build_primal, make_row)
from .stt import SearchTree, best_stt, depth_vectors, depths, weighted_depth
from .topology import Topology, induced

HALF = Fraction(1, 2)
DEFAULT_OUTCOME_BUDGET = 200_000


class RoundingError(RuntimeError):
    pass


class BudgetExceeded(RoundingError):
    pass


@dataclass(frozen=True)
class RoundingOutcome:
    stt: SearchTree
    depths: tuple
    choice_trace: tuple  # ((component, root, candidates), ...)


def _xmat(model: LpModel, point: Sequence) -> dict:
    n = model.topology.n
    return {(i, j): Fraction(point[model.var("X", i, j)])
            for i in range(n) for j in range(n) if i != j}


def candidate_roots(P: Sequence, component, U: Topology, model: LpModel | None = None) -> frozenset:
    """Nodes r of the component with sum_{u: r in [u..v)} X_uv >= 1/2 for every v != r."""
    model = model or build_primal(U)
    return _candidates(_xmat(model, P), frozenset(component), U)


def _candidates(X: dict, comp: frozenset, U: Topology) -> frozenset:
    out = set()
    for r in sorted(comp):
        ok = True
        for v in comp:
            if v == r:
                continue
            total = Fraction(0)
            for u in comp:
                if u != v and r in U.path(u, v)[:-1]:
                    total += X[(u, v)]
            if total < HALF:
                ok = False
                break
        if ok:
            out.add(r)
    if not out:
        raise RoundingError(f"no candidate root in component {sorted(v + 1 for v in comp)}")
    return frozenset(out)


def round_all(P: Sequence, U: Topology, model: LpModel | None = None,
              budget: int = DEFAULT_OUTCOME_BUDGET) -> list:
    """Every root-rounding outcome, one per distinct STT, sorted by depths."""
    model = model or build_primal(U)
    X = _xmat(model, P)
    memo = {}

    def rec(comp):
        if comp in memo:
            return memo[comp]
        R = _candidates(X, comp, U)
        out = {}
        for r in sorted(R):
            parts = U.components(comp - {r})
            options = [rec(p) for p in parts]
            for combo in itertools.product(*options):
                tree = SearchTree(U, r, tuple(t for t, _ in combo))
                if tree not in out:
                    trace = ((comp, r, R),) + tuple(x for _, tr in combo for x in tr)
                    out[tree] = trace
                    if len(out) > budget:
                        raise BudgetExceeded(f"more than {budget} rounding outcomes")
        memo[comp] = list(out.items())
        return memo[comp]

    outs = [RoundingOutcome(t, depths(t), tr) for t, tr in rec(frozenset(range(U.n)))]
    outs.sort(key=lambda o: o.depths)
    return outs


def cost_of(D: Sequence, w: Sequence) -> Fraction:
    """Search cost with root depth 1."""
    return weighted_depth(D, w) + sum(Fraction(x) for x in w)


def best_worst(outcomes: Sequence[RoundingOutcome], w: Sequence) -> tuple:
    costs = [(cost_of(o.depths, w), o.depths, o) for o in outcomes]
    best = min(costs, key=lambda t: (t[0], t[1]))
    worst = max(costs, key=lambda t: (t[0], [-x for x in t[1]]))
    return best[2], best[0], worst[2], worst[0]


def iterated_round(P0: Sequence, U: Topology, weights: Sequence, first_root: int | None = None,
                   model: LpModel | None = None) -> RoundingOutcome:
    """Pick a root, then re-solve the LP on each component before recursing.

    Roots are the smallest-index candidate unless ``first_root`` is given
    for the top level.
    """
    model = model or build_primal(U)
    w = [Fraction(x) for x in weights]
    X = _xmat(model, P0)
    trace = []

    def rec(comp, X, pick=None):
        R = _candidates(X, comp, U)
        if pick is not None and pick not in R:
            raise RoundingError(f"node {pick + 1} is not a candidate root")
        r = min(R) if pick is None else pick
        trace.append((comp, r, R))
        kids = []
        for part in U.components(comp - {r}):
            if len(part) == 1:
                kids.append(SearchTree(U, next(iter(part))))
                continue
            sub, order = induced(U, part)
            sm = build_primal(sub)
            res = solve(sm, sm.objective_on("D", [w[v] for v in order]), "min")
            subX = {(order[i], order[j]): res.point[sm.var("X", i, j)]
                    for i in range(sub.n) for j in range(sub.n) if i != j}
            kids.append(rec(part, subX))
        return SearchTree(U, r, tuple(kids))

    T = rec(frozenset(range(U.n)), X, first_root)
    return RoundingOutcome(T, depths(T), tuple(trace))


# -- ratio drivers -----------------------------------------------------------

def solve_direction(U: Topology, w: Sequence, model: LpModel | None = None, solver=None):
    """LP optimum in a D-direction; ties broken toward the smallest total depth."""
    model = model or build_primal(U)
    solver = solver or Solver(model)
    res = solver.optimize(model.objective_on("D", w), "min",
                          tiebreak=model.objective_on("D", [1] * U.n))
    return res


@dataclass(frozen=True)
class RatioRow:
    direction: tuple
    lp_value: Fraction
    opt_cost: Fraction
    bc_cost: Fraction
    wc_cost: Fraction
    weight_sum: Fraction

    @property
    def bc_ratio(self) -> Fraction:
        return self.bc_cost / self.opt_cost

    @property
    def wc_ratio(self) -> Fraction:
        return self.wc_cost / self.opt_cost


def ratio_row(U: Topology, w: Sequence, point: Sequence | None = None,
              model: LpModel | None = None) -> RatioRow:
    """OPT/BC/WC costs for one direction (LP point solved unless given)."""
    model = model or build_primal(U)
    w = tuple(Fraction(x) for x in w)
    if point is None:
        res = solve_direction(U, w, model)
        point, lp = res.point, res.value
    else:
        lp = weighted_depth(model.project_D(point), w)
    outs = round_all(point, U, model)
    _, bc, _, wc = best_worst(outs, w)
    _, opt, _ = best_stt(U, w)
    return RatioRow(w, lp, opt + sum(w), bc, wc, sum(w))


def _scaled(values) -> list:
    """Rational vector times the lcm of its denominators, as ints."""
    L = 1
    for v in values:
        L = L * v.denominator // math.gcd(L, v.denominator)
    return [int(v * L) for v in values]


def _bc_model(P_D, Dprime, stt_D, roundings, epsilon):
    """bc-ratio LP with the STT-optimality and rounding rows served lazily.

    ``stt_D`` and ``roundings`` must be integer vectors.
    """
    model = build_bc_ratio_lp(P_D, Dprime, [Dprime], roundings[:1], epsilon)
    n = len(P_D)
    x = model.var("x")
    Dp = [int(d) for d in Dprime]

    def argmin(vectors, f):
        best, arg = None, None
        for t, D in enumerate(vectors):
            val = sum(a * b for a, b in zip(D, f))
            if best is None or val < best:
                best, arg = val, t
        return best, arg

    def sep_opt(point):
        f = _scaled(point[:n])
        best, arg = argmin(stt_D, f)
        if best < sum(a * b for a, b in zip(Dp, f)):
            D = stt_D[arg]
            return make_row({i: Dp[i] - D[i] for i in range(n)}, "<=", 0, f"opt:{arg + 1}")
        return None

    def sep_round(point):
        vals = list(point[:n]) + [point[x]]
        scaled = _scaled(vals)
        best, arg = argmin(roundings, scaled[:n])
        if scaled[n] > best:
            coefs = {i: -Fraction(roundings[arg][i]) for i in range(n)}
            coefs[x] = 1
            return make_row(coefs, "<=", 0, f"round:{arg + 1}")
        return None

    model.implicit = [ImplicitFamily("opt", sep_opt), ImplicitFamily("round", sep_round)]
    return model


@dataclass(frozen=True)
class BcSearchResult:
    direction: tuple          # coprime integers
    separation: Fraction      # x - D'.f at the optimum (sum f = 1)
    Dprime: tuple
    row: RatioRow | None


def bc_ratio_search(U: Topology, P: Sequence, model: LpModel | None = None,
                    epsilon=0, verify: bool = True) -> BcSearchResult:
    """Sweep D' over STT depth vectors; keep the direction with the largest separation.

    ``epsilon`` > 0 forces P strictly below D' (use DEFAULT_EPSILON when the
    unperturbed optimum ties with an STT and the LP solver picks the STT).
    """
    from .exactsolver import solve_with_separation
    from .polytope import primitive
    model = model or build_primal(U)
    P_D = model.project_D(P)
    stt_D = sorted({tuple(int(x) for x in D) for D in depth_vectors(U)})
    roundings = sorted({o.depths for o in round_all(P, U, model)})
    best = None
    for Dp in stt_D:
        if all(Fraction(p) >= d for p, d in zip(P_D, Dp)):
            continue  # P.f + eps <= D'.f impossible
        bm = _bc_model(P_D, Dp, stt_D, roundings, epsilon)
        res = solve_with_separation(bm, None, "max")
        if not res.optimal:
            continue
        if best is None or res.value > best[0]:
            best = (res.value, Dp, res.point[:U.n])
    if best is None or best[0] <= 0:
        return BcSearchResult(tuple([0] * U.n), Fraction(0), (), None)
    value, Dp, f = best
    direction = primitive(f)
    row = ratio_row(U, direction, P, model) if verify else None
    return BcSearchResult(direction, value, Dp, row)


def wc_over_primary(U: Topology, report, model: LpModel | None = None) -> list:
    """Worst-case rounding per false-facet direction of a scan report."""
    model = model or build_primal(U)
    pts = {}
    for v in report.new_vertices:
        for d in v.directions:
            pts[d] = v.point
    rows = []
    for facet, _ in report.false_facets:
        rows.append(ratio_row(U, facet.normal, pts.get(facet.normal), model))
    return rows


def format_ratio_tsv(rows: Sequence[RatioRow], dec) -> str:
    lines = ["direction\topt_cost\tbc_cost\twc_cost\tbc_ratio\twc_ratio"]
    for r in rows:
        s = r.weight_sum
        lines.append("\t".join([
            "(" + ",".join(str(x) for x in r.direction) + ")",
            f"{r.opt_cost}/{s}", f"{r.bc_cost}/{s}", f"{r.wc_cost}/{s}",
            f"{r.bc_ratio} ({dec(r.bc_ratio)})", f"{r.wc_ratio} ({dec(r.wc_ratio)})"]))
    return "\n".join(lines) + "\n"
