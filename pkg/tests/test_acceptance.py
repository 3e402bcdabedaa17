"""Acceptance criteria 1-14; the terminal summary prints one PASS/FAIL line per criterion."""

import random
import time
from fractions import Fraction

import pytest

import oracles
from golden import SUMMARY
from sttlp.analysis import (
    audit_weak_duality, census, certify_stt_vertex, construct_nontree_vertex,
    depth_bounds_violations, detect_partially_integer, extend_vertex, gap_for_direction,
    integrality_gap, product_vertex, project_point, refined_census_nonint, sample_directions,
    star_integrality_check,
)
from sttlp.exactsolver import Solver, certify_unique_optimum, is_vertex, solve
from sttlp.lpmodel import (
    FAMILIES, Var, build_dual, build_primal, build_refined, build_z_eliminated, check_feasible,
    lift_point, stt_point,
)
from sttlp.normals import iterate, scan, scan_points
from sttlp.polytope import dominance_hull_facets, dominance_vertices, enumerate_vertices
from sttlp.reference import (
    COUNTEREXAMPLE_D, COUNTEREXAMPLE_WEIGHTS, P1_D, P1_DOMINATING_STT_D, fig5_point, p1_point,
    p1_topology,
)
from sttlp.rounding import ratio_row, round_all, solve_direction
from sttlp.stt import best_stt, count_stts, depths, enumerate_stts, optimal_star_stt
from sttlp.topology import (
    automorphisms, catalog, catalog_topology, path_topology, singleton, star_topology,
)

H = Fraction(1, 2)
U73 = "U_7_3"
FIG2 = [(4, 0, 0), (0, 4, 0), (0, 0, 4), (0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1),
        (2, 1, 0)]


def criterion(k, desc, tol="exact"):
    return pytest.mark.criterion(k, desc=desc, tol=tol)


# 1 ---------------------------------------------------------------------------

@criterion(1, "STT counts for every catalog topology, n <= 7, in under a minute")
def test_c01_stt_counts_n_le_7():
    t = time.perf_counter()
    for U in catalog():
        if U.n > 7:
            continue
        c = count_stts(U)
        assert c == oracles.stt_count(U.n, sorted(U.edges))
        if U.n >= 3:
            assert c == SUMMARY[U.name][0]
    assert time.perf_counter() - t < 60
    assert count_stts(catalog_topology("U_3_0")) == 5
    assert count_stts(catalog_topology("U_5_2")) == 65
    assert count_stts(catalog_topology(U73)) == 662


@criterion(1, "STT counts for every catalog topology, n <= 7, in under a minute")
@pytest.mark.long
@pytest.mark.parametrize("i", range(23))
def test_c01_stt_counts_n8(i):
    name = f"U_8_{i}"
    assert count_stts(catalog_topology(name)) == SUMMARY[name][0]


# 2 ---------------------------------------------------------------------------

@criterion(2, "(7,3) counterexample: LP 59/2 at the published D, STT 30, gap 60/59")
def test_c02_counterexample():
    t = time.perf_counter()
    U = catalog_topology(U73)
    m = build_primal(U)
    w = COUNTEREXAMPLE_WEIGHTS
    res = Solver(m).optimize(m.objective_on("D", w), "min",
                             tiebreak=m.objective_on("D", [1] * 7))
    assert res.value == Fraction(59, 2)
    assert m.project_D(res.point) == (2, 2, Fraction(9, 2), 2, 2, Fraction(3, 2), H)
    _, best, _ = best_stt(U, w)
    assert best == 30
    assert min(sum(a * b for a, b in zip(D, w)) for D in oracles.stt_depth_vectors(
        7, sorted(U.edges))) == 30
    assert Fraction(best) / res.value == Fraction(60, 59)
    assert time.perf_counter() - t < 60


# 3 ---------------------------------------------------------------------------

@criterion(3, "counterexample vertex: feasible, a vertex, satisfies every refined family")
def test_c03_fig5_point():
    U = catalog_topology(U73)
    m = build_primal(U)
    P = fig5_point(m)
    assert check_feasible(m, P) == []
    assert is_vertex(m, P)
    assert m.project_D(P) == COUNTEREXAMPLE_D
    assert len(FAMILIES) == 5
    for fam in FAMILIES:
        rm = build_refined(U, (fam,))
        assert check_feasible(rm, lift_point(rm, m, P)) == [], fam


# 4 ---------------------------------------------------------------------------

@criterion(4, "normals scans: (5,*) 145/152/161 with no false facets; (7,3) 6364/39/9 in 2 classes")
@pytest.mark.parametrize("name,dirs", [("U_5_0", 145), ("U_5_1", 152), ("U_5_2", 161)])
def test_c04_scans_n5(name, dirs):
    rep = scan(catalog_topology(name))
    assert rep.primary_direction_count == dirs and rep.false_facet_count == 0
    assert rep.complete


@criterion(4, "normals scans: (5,*) 145/152/161 with no false facets; (7,3) 6364/39/9 in 2 classes")
def test_c04_scan_7_3(scan73):
    rep = scan73
    assert rep.primary_direction_count == 6364
    assert rep.false_facet_count == 39
    assert len(rep.fractional_vertices) == 9
    assert rep.vertex_classes == 2
    assert all(Fraction(x).denominator <= 2 for v in rep.new_vertices for x in v.D)
    assert all(Fraction(x).denominator <= 2 for v in rep.new_vertices for x in v.point)


@criterion(4, "normals scans: (5,*) 145/152/161 with no false facets; (7,3) 6364/39/9 in 2 classes")
@pytest.mark.long
def test_c04_phase2_closure(scan73):
    rep = iterate(catalog_topology(U73), scan73)
    assert rep.primary_direction_count == 6385
    assert rep.false_facet_count == 0 and rep.new_vertices == []


# 5 ---------------------------------------------------------------------------

@criterion(5, "path-3 has exactly the 9 known vertices; LCA-abuse points are not vertices without Z")
def test_c05_path3_vertices():
    P3 = path_topology(3)
    m = build_primal(P3)
    V = enumerate_vertices(m)
    assert len(V) == 9
    assert sorted(V) == oracles.vertices_by_bases(oracles.path3_primal_rows(), 10)
    order = [("X", 0, 1), ("X", 1, 0), ("X", 1, 2), ("X", 2, 1), ("X", 0, 2), ("X", 2, 0),
             ("Z", 1, 0, 2)]
    rows = sorted(tuple(int(v[m.var(*k)]) for k in order) for v in V)
    table6 = sorted([
        (0, 1, 0, 1, 0, 1, 0), (0, 1, 1, 0, 0, 0, 1), (1, 0, 0, 1, 0, 1, 0),
        (1, 0, 0, 1, 1, 0, 0), (1, 0, 1, 0, 1, 0, 0),  # five STTs
        (0, 1, 0, 1, 1, 0, 0), (1, 0, 1, 0, 0, 1, 0),  # cyclic ancestry
        (0, 1, 1, 0, 0, 1, 0), (0, 1, 1, 0, 1, 0, 0),  # LCA abuse
    ])
    assert rows == table6
    stts = {stt_point(m, T) for T in enumerate_stts(P3)}
    abuse = [v for v in V if v not in stts and v[m.var("X", 1, 0)] and v[m.var("X", 1, 2)]]
    assert len(abuse) == 2
    mz = build_z_eliminated(P3, expand=True)
    for v in abuse:
        q = tuple(v[m.index[x]] for x in mz.variables)
        assert check_feasible(mz, q) == [] and not is_vertex(mz, q)


# 6 ---------------------------------------------------------------------------

@criterion(6, "stars n=3,4,5 integral; star algorithm equals brute force for n <= 7")
@pytest.mark.parametrize("n", [3, 4, 5])
def test_c06_star_integrality(n):
    assert star_integrality_check(n)


@criterion(6, "stars n=3,4,5 integral; star algorithm equals brute force for n <= 7")
@pytest.mark.parametrize("n", range(2, 8))
def test_c06_star_algorithm(n):
    rng = random.Random(100 + n)
    U = star_topology(n)
    for _ in range(100):
        w = [rng.randint(0, 30) for _ in range(n)]
        _, c = optimal_star_stt(w[0], w[1:])
        assert c == best_stt(U, w)[1] + sum(w)


# 7 ---------------------------------------------------------------------------

@criterion(7, "rounding: counterexample vertex admits (4,3,2,3,4,1,0) at 62 vs 53; (7,3) ratio row 184/186/220")
def test_c07_rounding():
    U = catalog_topology(U73)
    m = build_primal(U)
    P = fig5_point(m)
    w = COUNTEREXAMPLE_WEIGHTS
    outs = round_all(P, U, m)
    hit = [o for o in outs if o.depths == (4, 3, 2, 3, 4, 1, 0)]
    assert hit
    cost = sum(a * b for a, b in zip(hit[0].depths, w)) + sum(w)
    opt = best_stt(U, w)[1] + sum(w)
    assert (cost, opt, Fraction(cost, opt)) == (62, 53, Fraction(62, 53))
    # the published direction fits the mirror image of this vertex
    pi = (0, 1, 2, 5, 6, 3, 4)
    vals = {}
    for v, x in zip(m.variables, P):
        key = tuple(pi[a] for a in v.key)
        if v.kind == "Z":
            key = (key[0], min(key[1:]), max(key[1:]))
        vals[Var(v.kind, key)] = x
    r = ratio_row(U, (11, 7, 0, 10, 34, 7, 11), m.point_from(vals), m)
    assert (r.opt_cost, r.bc_cost, r.wc_cost, r.weight_sum) == (184, 186, 220, 80)


# 8 ---------------------------------------------------------------------------

@criterion(8, "integrality gap: (7,3) 60/59 from the scan; (8,4) LP 93 vs STT 95")
def test_c08_gap_7_3(scan73):
    U = catalog_topology(U73)
    by_ratio, _, _ = integrality_gap(U, scan73)
    assert (by_ratio.lp_value, by_ratio.stt_value) == (Fraction(59, 2), 30)
    assert by_ratio.raw_ratio == Fraction(60, 59)
    images = set()
    for pi in automorphisms(U):
        img = [0] * 7
        for v, x in enumerate(COUNTEREXAMPLE_WEIGHTS):
            img[pi[v]] = x
        images.add(tuple(img))
    assert by_ratio.direction in images


@criterion(8, "integrality gap: (7,3) 60/59 from the scan; (8,4) LP 93 vs STT 95")
def test_c08_gap_8_4_direction():
    g = gap_for_direction(catalog_topology("U_8_4"), (9, 5, 0, 6, 11, 17, 5, 9))
    assert (g.lp_value, g.stt_value, g.raw_ratio) == (93, 95, Fraction(95, 93))


@criterion(8, "integrality gap: (7,3) 60/59 from the scan; (8,4) LP 93 vs STT 95")
@pytest.mark.long
def test_c08_gap_8_4_scan():
    U = catalog_topology("U_8_4")
    by_ratio, _, _ = integrality_gap(U, scan(U))
    assert by_ratio.raw_ratio == Fraction(95, 93)


# 9 ---------------------------------------------------------------------------

@criterion(9, "duality: strong duality on 50 instances; f=(3,1,2) example; 20 subtree audits")
def test_c09_strong_duality():
    rng = random.Random(9)
    pool = [U for n in range(2, 7) for U in catalog(n)]
    for _ in range(50):
        U = rng.choice(pool)
        f = [rng.randint(0, 15) for _ in range(U.n)]
        pm = build_primal(U)
        p = solve(pm, pm.objective_on("D", f), "min")
        d = solve(build_dual(U, f))
        assert p.optimal and d.optimal and p.value == d.value


@criterion(9, "duality: strong duality on 50 instances; f=(3,1,2) example; 20 subtree audits")
def test_c09_dual_example():
    U = path_topology(3)
    dm = build_dual(U, (3, 1, 2))
    d = solve(dm)
    assert d.value == 4
    R = tuple(d.point[dm.var("R", i, j)] for i, j in [(0, 1), (0, 2), (1, 2)])
    assert R == (1, 2, 1) and check_feasible(dm, d.point) == []


@criterion(9, "duality: strong duality on 50 instances; f=(3,1,2) example; 20 subtree audits")
def test_c09_subtree_audit():
    rng = random.Random(19)
    pool = [U for n in range(3, 7) for U in catalog(n)]
    for _ in range(20):
        U = rng.choice(pool)
        f = [rng.randint(0, 15) for _ in range(U.n)]
        dm = build_dual(U, f)
        d = solve(dm)
        T, _, _ = best_stt(U, f)
        audit = audit_weak_duality(T, d.point, f, dm)
        assert audit and all(a.slack >= 0 for a in audit)


# 10 --------------------------------------------------------------------------

C10 = "properties: depth bounds, 2-approximation, integer domination, extend, product, certificates"


def _lp_points(seed, count):
    rng = random.Random(seed)
    pool = [U for n in range(3, 8) for U in catalog(n)]
    for _ in range(count):
        U = rng.choice(pool)
        m = build_primal(U)
        yield U, m, solve_direction(U, [rng.randint(0, 20) for _ in range(U.n)], m).point
    U = catalog_topology(U73)
    m = build_primal(U)
    yield U, m, fig5_point(m)
    m6 = build_primal(p1_topology())
    yield p1_topology(), m6, p1_point(m6)


@criterion(10, C10)
def test_c10_depth_bounds_and_two_approx():
    for U, m, P in _lp_points(10, 40):
        D = m.project_D(P)
        assert depth_bounds_violations(D) == []
        for o in round_all(P, U, m):
            assert all(t <= 2 * d for t, d in zip(o.depths, D))


@criterion(10, C10)
def test_c10_integer_domination():
    cases = []
    for name in ["U_4_0", "U_5_1", "U_6_3"]:
        U = catalog_topology(name)
        m = build_primal(U)
        cases += [(U, m, stt_point(m, T)) for T in enumerate_stts(U)[::5]]
    for kind in ["cyclic-ancestry", "lca-abuse"]:
        for U in [path_topology(3), catalog_topology("U_5_2")]:
            m = build_primal(U)
            cases.append((U, m, construct_nontree_vertex(U, kind, 0, m)))
    for U, m, P in cases:
        D = m.project_D(P)
        assert any(all(t <= d for t, d in zip(o.depths, D)) for o in round_all(P, U, m))


@criterion(10, C10)
@pytest.mark.parametrize("seed", range(20))
def test_c10_extend_vertex(seed):
    rng = random.Random(1000 + seed)
    U = rng.choice([T for n in range(3, 7) for T in catalog(n)])
    m = build_primal(U)
    P = solve_direction(U, [rng.randint(0, 9) for _ in range(U.n)], m).point
    if seed % 2:
        _, vm, Q = extend_vertex(P, U, leaf_at=rng.randrange(U.n), model=m)
    else:
        _, vm, Q = extend_vertex(P, U, subdivide=rng.choice(sorted(U.edges)), model=m)
    assert check_feasible(vm, Q) == []
    assert project_point(vm, m, Q) == P


@criterion(10, C10)
@pytest.mark.parametrize("seed", range(10))
def test_c10_product_vertex(seed):
    rng = random.Random(2000 + seed)
    P2, P3 = path_topology(2), path_topology(3)
    pool = [(singleton(), (0,))]
    pool += [(P2, stt_point(build_primal(P2), T)) for T in enumerate_stts(P2)]
    pool += [(P3, v) for v in enumerate_vertices(build_primal(P3))]
    parts = [rng.choice(pool) for _ in range(rng.choice([2, 3]))]
    _, vm, P = product_vertex(parts, [rng.randrange(U.n) for U, _ in parts])
    assert is_vertex(vm, P)


@criterion(10, C10)
@pytest.mark.parametrize("seed", range(20))
def test_c10_certify_stt_vertex(seed):
    rng = random.Random(3000 + seed)
    U = rng.choice([T for n in range(2, 6) for T in catalog(n)])
    T = rng.choice(enumerate_stts(U))
    w = certify_stt_vertex(T, check=False)
    m = build_primal(U)
    assert certify_unique_optimum(m, m.objective_on("D", w), stt_point(m, T))


# 11 --------------------------------------------------------------------------

@criterion(11, "partially-integer P1: feasible vertex, detected, dominated by (2,1,2,0,1,2)")
def test_c11_p1():
    U = p1_topology()
    m = build_primal(U)
    P = p1_point(m)
    assert check_feasible(m, P) == []
    assert is_vertex(m, P)
    assert detect_partially_integer(m, P)
    assert m.project_D(P) == P1_D == (2, 2, 2, 1, 1, 3)
    assert P1_DOMINATING_STT_D == (2, 1, 2, 0, 1, 2)
    assert P1_DOMINATING_STT_D in {depths(T) for T in enumerate_stts(U)}
    assert all(a <= b for a, b in zip(P1_DOMINATING_STT_D, P1_D))


# 12 --------------------------------------------------------------------------

C12 = "path-5 censuses: no-Z [519,158,7], with Z [5983,3886,76], path-monotonicity 4 half-integer"


@criterion(12, C12)
def test_c12_census_no_z():
    _, counts = census(build_z_eliminated(path_topology(5), expand=True))
    assert counts == [519, 158, 7]


@criterion(12, C12)
def test_c12_census_with_z():
    _, counts = census(build_primal(path_topology(5)))
    assert counts == [5983, 3886, 76]


@criterion(12, C12)
def test_c12_path_monotonicity():
    nonint = refined_census_nonint(path_topology(5))
    assert len(nonint) == 4
    assert all(Fraction(x).denominator <= 2 for v in nonint for x in v)


# 13 --------------------------------------------------------------------------

@criterion(13, "3-D hull example: 7 facets; the extra point cuts 4 of them; all 10 points stay vertices")
def test_c13_fig2():
    F = dominance_hull_facets(FIG2)
    assert len(F) == 7
    assert sorted((f.normal, f.offset) for f in F) == oracles.dominance_facets(FIG2)
    _, false = scan_points(FIG2, [(H, H, H)])
    assert len(false) == 4
    pts = FIG2 + [(H, H, H)]
    V = dominance_vertices(dominance_hull_facets(pts), 3)
    assert sorted(V) == sorted(tuple(Fraction(x) for x in p) for p in pts)


# 14 --------------------------------------------------------------------------

@criterion(14, "path-10, 200 seeded depth directions: only integer optima in both model flavours")
@pytest.mark.parametrize("flavor", ["primal", "no-z"])
def test_c14_sampling_path10(flavor):
    c = sample_directions(path_topology(10), flavor, "D", 200, 0)
    assert c.denominators == {1}
    assert c.by_max_denominator == {1: 200}
