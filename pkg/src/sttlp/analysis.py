"""Gaps, denominator censuses, vertex constructions and audits."""

from __future__ import annotations

import itertools
import random
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exactsolver import Solver, certify_unique_optimum, is_vertex, solve_with_separation
from .lpmodel import (LpModel, Var, build_dual, build_primal, build_refined, build_z_eliminated,
                      check_feasible, stt_point)
from .polytope import enumerate_vertices
from .stt import (SearchTree, ancestors, depths, enumerate_stts, induced_point,
                  optimal_value)
from .topology import Topology, TopologyError, combine, extend, path_between, star_topology


class AnalysisError(RuntimeError):
    pass


# -- integrality gap ---------------------------------------------------------

@dataclass(frozen=True)
class GapRecord:
    topology: str
    direction: tuple
    lp_value: Fraction
    stt_value: Fraction
    gap_ratio: Fraction     # (stt + sum h) / (lp + sum h): search-cost convention
    raw_ratio: Fraction     # stt / lp on weighted LP depths (the tabulated "gap")
    additive_gap: Fraction


def gap_for_direction(U: Topology, h: Sequence, lp_value=None) -> GapRecord:
    h = tuple(Fraction(x) for x in h)
    if lp_value is None:
        m = build_primal(U)
        lp_value = Solver(m).optimize(m.objective_on("D", h)).value
    stt_value = optimal_value(U, h)
    s = sum(h)
    raw = stt_value / lp_value if lp_value else Fraction(1)
    return GapRecord(U.name or f"n={U.n}", tuple(int(x) if x.denominator == 1 else x for x in h),
                     lp_value, stt_value, (stt_value + s) / (lp_value + s), raw,
                     stt_value - lp_value)


def integrality_gap(U: Topology, scan) -> tuple:
    """(best record by raw ratio, best by additive gap, full table)."""
    table = [gap_for_direction(U, f.normal, value) for f, value in scan.false_facets]
    if not table:
        one = GapRecord(U.name or f"n={U.n}", (), Fraction(0), Fraction(0),
                        Fraction(1), Fraction(1), Fraction(0))
        return one, one, []
    by_ratio = max(table, key=lambda g: (g.raw_ratio, g.direction))
    by_add = max(table, key=lambda g: (g.additive_gap, g.direction))
    return by_ratio, by_add, table


# -- denominators ------------------------------------------------------------

def denominator_profile(points) -> frozenset:
    return frozenset(Fraction(x).denominator for p in points for x in p) or frozenset({1})


def max_denominator(point) -> int:
    return max((Fraction(x).denominator for x in point), default=1)


def denominator_census(points) -> list:
    """Counts of points by max denominator, indexed 1..max."""
    c = Counter(max_denominator(p) for p in points)
    top = max(c, default=1)
    return [c.get(k, 0) for k in range(1, top + 1)]


@dataclass(frozen=True)
class SampleCensus:
    topology: str
    model: str
    directions: str
    count: int
    seed: int
    denominators: frozenset
    by_max_denominator: dict
    distinct_vertices: int


def _model_for(U: Topology, flavor: str) -> LpModel:
    if flavor == "primal":
        return build_primal(U)
    if flavor == "no-z":
        return build_z_eliminated(U, expand=False)
    raise AnalysisError(f"unknown model flavor {flavor!r}")


def sample_directions(U: Topology, model_flavor: str = "primal", direction_flavor: str = "D",
                      count: int = 100, seed: int = 0, max_weight: int = 100) -> SampleCensus:
    """Solve in seeded random nonnegative integer directions; profile the optima."""
    if count < 1:
        raise AnalysisError("count must be >= 1")
    kinds = {"D": ("D",), "XD": ("X", "D"), "XZD": ("X", "Z", "D")}.get(direction_flavor)
    if kinds is None:
        raise AnalysisError(f"unknown direction flavor {direction_flavor!r}")
    model = _model_for(U, model_flavor)
    cols = [i for i, v in enumerate(model.variables) if v.kind in kinds]
    rng = random.Random(seed)
    solver = Solver(model)
    seen = set()
    counts = Counter()
    denoms = set()
    for _ in range(count):
        obj = {i: rng.randint(0, max_weight) for i in cols}
        res = solve_with_separation(model, obj, "min", solver=solver)
        if not res.optimal:
            raise AnalysisError(f"sample solve returned {res.status}")
        pt = res.point
        seen.add(pt)
        counts[max_denominator(pt)] += 1
        denoms.update(Fraction(x).denominator for x in pt)
    return SampleCensus(U.name or f"n={U.n}", model_flavor, direction_flavor, count, seed,
                        frozenset(denoms), dict(sorted(counts.items())), len(seen))


# -- vertex predicates -------------------------------------------------------

def detect_partially_integer(model: LpModel, point: Sequence) -> bool:
    D = model.project_D(point)
    X = model.project(point, "X")
    return (all(Fraction(d).denominator == 1 for d in D)
            and any(Fraction(x).denominator != 1 for x in X))


def certify_stt_vertex(T: SearchTree, model: LpModel | None = None, check: bool = True) -> tuple:
    """Integer direction under which T's induced point is the unique optimum.

    Weights n^(-4 depth) scaled by n^(4 maxdepth).
    """
    U = T.topology
    if U.n < 2:
        raise AnalysisError("certificate needs n >= 2")
    D = depths(T)
    top = max(D)
    w = tuple(U.n ** (4 * (top - d)) for d in D)
    if check:
        model = model or build_primal(U)
        obj = model.objective_on("D", w)
        if not certify_unique_optimum(model, obj, stt_point(model, T)):
            raise AnalysisError(f"certificate failed for {T}")
    return w


def _stt_points(model: LpModel) -> set:
    return {stt_point(model, T) for T in enumerate_stts(model.topology)}


def construct_nontree_vertex(U: Topology, kind: str, seed: int = 0,
                             model: LpModel | None = None) -> tuple:
    """An integer vertex of the primal LP that no STT induces."""
    if U.n < 3:
        raise AnalysisError("needs n >= 3")
    model = model or build_primal(U)
    rng = random.Random(seed)
    n = U.n
    stts = _stt_points(model)
    if kind == "cyclic-ancestry":
        triples = list(itertools.combinations(range(n), 3))
        a, b, c = triples[rng.randrange(len(triples))]
        descending = rng.random() < 0.5 if seed else True
        vals = {}
        for i, j in itertools.combinations(range(n), 2):
            hi, lo = (j, i) if descending else (i, j)
            vals[Var("X", (hi, lo))] = 1
        # reverse the outer pair of the triple to close a directed 3-cycle
        hi, lo = (c, a) if descending else (a, c)
        vals[Var("X", (hi, lo))] = 0
        vals[Var("X", (lo, hi))] = 1
        for i in range(n):
            vals[Var("D", (i,))] = sum(vals.get(Var("X", (j, i)), 0) for j in range(n) if j != i)
        P = model.point_from(vals)
    elif kind == "lca-abuse":
        cands = []
        for T in enumerate_stts(U):
            ip = induced_point(T)
            for (k, i, j), z in sorted(ip.Z.items()):
                if z == 1:
                    cands.append((T, k, i, j))
        if not cands:
            raise AnalysisError("no STT with an LCA node on this topology")
        start = rng.randrange(len(cands)) if seed else 0
        P = None
        for off in range(len(cands)):
            T, k, i, j = cands[(start + off) % len(cands)]
            for b, c in ((i, j), (j, i)):
                base = list(stt_point(model, T))
                base[model.var("Z", k, i, j)] = Fraction(0)
                base[model.var("X", b, c)] = Fraction(1)
                base[model.var("X", c, b)] = Fraction(0)
                base[model.var("D", c)] = sum(base[model.var("X", v, c)] for v in range(n) if v != c)
                base[model.var("D", b)] = sum(base[model.var("X", v, b)] for v in range(n) if v != b)
                cand = tuple(base)
                if cand not in stts and not check_feasible(model, cand) and is_vertex(model, cand):
                    P = cand
                    break
            if P is not None:
                break
        if P is None:
            raise AnalysisError("no LCA-abuse vertex found")
    else:
        raise AnalysisError(f"unknown kind {kind!r}")
    if check_feasible(model, P):
        raise AnalysisError("constructed point is infeasible")
    if P in stts:
        raise AnalysisError("constructed point is STT-induced")
    return P


# -- constructions across topologies ----------------------------------------

def extend_vertex(P: Sequence, U: Topology, leaf_at: int | None = None, subdivide=None,
                  model: LpModel | None = None) -> tuple:
    """Feasible point for the one-node extension; returns (U', model', P')."""
    model = model or build_primal(U)
    V = extend(U, leaf_at=leaf_at, subdivide=subdivide)
    vm = build_primal(V)
    a = U.n
    old = {v: P[i] for i, v in enumerate(model.variables)}
    vals = dict(old)

    def X(i, j):
        return old[Var("X", (i, j))]

    def Z(k, i, j):
        return old[Var("Z", (k, min(i, j), max(i, j)))]

    if leaf_at is not None:
        sides = {leaf_at: set(range(U.n))}
    else:
        b, c = subdivide
        parts = V.components(set(range(V.n)) - {a})
        sides = {x: set(next(p for p in parts if x in p)) for x in (b, c)}
    for x, side in sides.items():
        vals[Var("X", (x, a))] = Fraction(1)
        for i in side:
            if i == x:
                continue
            vals[Var("X", (i, a))] = X(i, x)
            for k in path_between(U, x, i):
                vals[Var("Z", (k, min(a, i), max(a, i)))] = Z(k, x, i)
            vals[Var("Z", (x, min(a, i), max(a, i)))] = X(x, i)
    for i in range(U.n):
        vals[Var("X", (a, i))] = Fraction(0)
    vals[Var("D", (a,))] = sum(vals.get(Var("X", (i, a)), 0) for i in range(U.n))
    # old Z keys are (k, i, j) with i<j over old ids, still valid in V;
    # crossing pairs of a subdivision pick up Z_a = 0 by default
    Pn = vm.point_from(vals)
    bad = check_feasible(vm, Pn)
    if bad:
        raise AnalysisError(f"extension infeasible: {bad[:3]}")
    return V, vm, Pn


def project_point(big: LpModel, small: LpModel, point: Sequence) -> tuple:
    return tuple(point[big.index[v]] for v in small.variables)


def product_vertex(parts: Sequence, attach: Sequence[int]) -> tuple:
    """Combine part points around a fresh center r; returns (U, model, P).

    ``parts`` is a sequence of (Topology, point-of-build_primal) pairs. Part
    depths are shifted by one because r becomes everyone's ancestor.
    """
    tops = [U for U, _ in parts]
    if len(tops) >= 2:
        V, offsets, r = combine(tops, attach)
    else:
        raise AnalysisError("need at least two parts")
    vm = build_primal(V)
    owner = {}
    for k, (U, _) in enumerate(parts):
        for v in range(U.n):
            owner[offsets[k] + v] = k
    vals = {}
    for k, (U, P) in enumerate(parts):
        pm = build_primal(U)
        off = offsets[k]
        for idx, var in enumerate(pm.variables):
            key = tuple(x + off for x in var.key)
            x = Fraction(P[idx])
            if var.kind == "D":
                x += 1
            vals[Var(var.kind, key)] = x
    for u in range(V.n):
        if u == r:
            continue
        vals[Var("X", (r, u))] = Fraction(1)
        vals[Var("X", (u, r))] = Fraction(0)
    for u, v in itertools.combinations(range(V.n), 2):
        if r in (u, v) or owner[u] == owner[v]:
            continue
        for k in path_between(V, u, v):
            vals[Var("Z", (k, u, v))] = Fraction(1 if k == r else 0)
    vals[Var("D", (r,))] = Fraction(0)
    P = vm.point_from(vals)
    bad = check_feasible(vm, P)
    if bad:
        raise AnalysisError(f"product point infeasible: {bad[:3]}")
    return V, vm, P


# -- weak duality ------------------------------------------------------------

@dataclass(frozen=True)
class SubtreeAudit:
    node: int
    lhs: Fraction
    rhs: Fraction

    @property
    def slack(self) -> Fraction:
        return self.rhs - self.lhs


def audit_weak_duality(T: SearchTree, dual_point: Sequence, f: Sequence,
                       dual_model: LpModel | None = None) -> list:
    """Per internal node i: sum of R_ab with LCA(a,b)=i versus f over T_i minus i."""
    U = T.topology
    dm = dual_model or build_dual(U, f)
    bad = check_feasible(dm, dual_point)
    if bad:
        raise AnalysisError(f"dual point infeasible: {bad[:3]}")
    anc = ancestors(T)
    f = [Fraction(x) for x in f]
    out = []

    def lca(a, b):
        common = (anc[a] | {a}) & (anc[b] | {b})
        return max(common, key=lambda v: len(anc[v]))

    def rec(t):
        below = t.nodes - {t.root}
        if below:
            lhs = Fraction(0)
            for a, b in itertools.combinations(sorted(t.nodes), 2):
                if lca(a, b) == t.root:
                    lhs += dual_point[dm.var("R", a, b)]
            out.append(SubtreeAudit(t.root, lhs, sum(f[a] for a in below)))
        for c in t.children:
            rec(c)

    rec(T)
    return out


def heavy_root_dual(U: Topology, f: Sequence, r: int, dual_model: LpModel | None = None) -> tuple:
    """Dual point R_ri = f_i, Q_rij = f_j (feasible when f_r dominates each subtree)."""
    dm = dual_model or build_dual(U, f)
    vals = {}
    for i in range(U.n):
        if i == r:
            continue
        vals[Var("R", (min(r, i), max(r, i)))] = Fraction(f[i])
        for k in path_between(U, r, i):
            vals[Var("Q", (r, k, i))] = Fraction(f[i])
    return dm.point_from(vals)


# -- misc --------------------------------------------------------------------

def d_projection_collisions(model: LpModel, vertices: Sequence) -> tuple:
    """(groups of vertices sharing a D-projection, STT D-vectors caught in one)."""
    groups = {}
    for v in vertices:
        groups.setdefault(model.project_D(v), []).append(tuple(v))
    coll = {D: sorted(vs) for D, vs in groups.items() if len(vs) >= 2}
    stt = set()
    if model.topology is not None:
        stt_pts = _stt_points(model)
        for D, vs in coll.items():
            if any(v in stt_pts for v in vs):
                stt.add(D)
    return dict(sorted(coll.items())), sorted(stt)


def star_integrality_check(n: int, backend: str | None = None) -> bool:
    if n < 2:
        raise TopologyError("star needs n >= 2")
    m = build_primal(star_topology(n))
    return all(Fraction(x).denominator == 1 for v in enumerate_vertices(m, backend) for x in v)


def depth_bounds_violations(D: Sequence, exhaustive_up_to: int = 6, samples: int = 200,
                            seed: int = 0) -> list:
    """Subsets S with sum_{i in S} D_i < |S| - 1 (all subsets for small n)."""
    n = len(D)
    D = [Fraction(x) for x in D]
    bad = []
    if n <= exhaustive_up_to:
        subsets = (s for k in range(1, n + 1) for s in itertools.combinations(range(n), k))
    else:
        rng = random.Random(seed)
        subsets = (tuple(sorted(rng.sample(range(n), rng.randint(1, n)))) for _ in range(samples))
    for S in subsets:
        if sum(D[i] for i in S) < len(S) - 1:
            bad.append(S)
    return bad


def small_depth_count_ok(D: Sequence, kmax: int = 3) -> bool:
    """At most k entries are <= k/(k+1), for k = 1..kmax."""
    D = [Fraction(x) for x in D]
    return all(sum(1 for d in D if d <= Fraction(k, k + 1)) <= k for k in range(1, kmax + 1))


def census(model: LpModel, backend: str | None = None, var_cap: int = 40) -> tuple:
    """(vertex list, counts by max denominator)."""
    verts = enumerate_vertices(model, backend, var_cap)
    return verts, denominator_census(verts)


def refined_census_nonint(U: Topology, families=("path-monotonicity",), backend=None) -> list:
    """Non-integer vertices of the no-Z model plus the given families."""
    m = build_refined(U, families, base=build_z_eliminated(U, expand=True))
    verts = enumerate_vertices(m, backend)
    return [v for v in verts if max_denominator(v) > 1]


__all__ = [name for name in dir() if not name.startswith("_")]
