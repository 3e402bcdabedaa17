import itertools
import random
from fractions import Fraction

import pytest

import oracles
from sttlp.exactsolver import certify_unique_optimum, solve, solve_with_separation
from sttlp.lpmodel import (
    DEFAULT_EPSILON, FAMILIES, ModelError, add_fixed_point_free_family, build_bc_ratio_lp,
    build_dual, build_primal, build_refined, build_z_eliminated, capping_as_equality,
    check_feasible, dump_model, format_point, is_feasible, lift_point,
    min_assignment_no_fixed_points, parse_point, separation_fixed_point_free,
    separation_z_eliminated, stt_point,
)
from sttlp.reference import fig5_point, p1_point, p1_topology
from sttlp.stt import depth_vectors, enumerate_stts
from sttlp.topology import catalog, catalog_topology, path_between, path_topology

H = Fraction(1, 2)


def test_primal_path3_shape():
    m = build_primal(path_topology(3))
    assert [v.name() for v in m.variables] == [
        "X[1,2]", "X[1,3]", "X[2,1]", "X[2,3]", "X[3,1]", "X[3,2]", "Z[2;1,3]",
        "D[1]", "D[2]", "D[3]"]
    kinds = [r.label.split(":")[0] for r in m.rows]
    assert kinds.count("anc") == 3 and kinds.count("lca") == 2 and kinds.count("depth") == 3
    assert len(m.nonneg) == 7


def test_primal_path2_shape():
    m = build_primal(path_topology(2))
    assert len(m.ordinals("X")) == 2 and not m.ordinals("Z")
    anc = [r for r in m.rows if r.label.startswith("anc")]
    assert len(anc) == 1 and anc[0].rhs == 1 and [c for _, c in anc[0].coefs] == [1, 1]


def test_primal_7_3_z_count():
    U = catalog_topology("U_7_3")
    m = build_primal(U)
    expected = sum(len(path_between(U, i, j)) for i, j in itertools.combinations(range(7), 2))
    assert len(m.ordinals("X")) == 42 and len(m.ordinals("D")) == 7
    assert len(m.ordinals("Z")) == expected == 27


@pytest.mark.parametrize("n", range(2, 8))
def test_primal_row_counts(n):
    for U in catalog(n):
        m = build_primal(U)
        nx, nz = len(m.ordinals("X")), len(m.ordinals("Z"))
        assert m.row_count() == nx + nz + n * (n - 1) // 2 + 2 * nz + n
        labels = [r.label for r in m.all_rows()]
        assert len(labels) == len(set(labels))


def test_variable_order_is_canonical():
    m = build_primal(catalog_topology("U_6_2"))
    keys = {k: [v.key for v in m.variables if v.kind == k] for k in "XZD"}
    for k in "XZD":
        assert keys[k] == sorted(keys[k])
    kinds = [v.kind for v in m.variables]
    assert kinds == sorted(kinds, key="XZD".index)


def test_fig5_feasibility_and_perturbation():
    m = build_primal(catalog_topology("U_7_3"))
    P = fig5_point(m)
    assert check_feasible(m, P) == []
    Q = list(P)
    Q[m.var("X", 1, 2)] = Fraction(0)
    bad = check_feasible(m, Q)
    assert "anc:2,3" in bad
    with pytest.raises(ModelError):
        check_feasible(m, P[:-1])


def test_fig5_against_oracle():
    U = catalog_topology("U_7_3")
    m = build_primal(U)
    P = fig5_point(m)
    X = {v.key: P[i] for i, v in enumerate(m.variables) if v.kind == "X"}
    Z = {v.key: P[i] for i, v in enumerate(m.variables) if v.kind == "Z"}
    assert oracles.primal_violations(7, sorted(U.edges), X, Z, m.project_D(P)) == []
    assert sum(1 for v in Z.values() if v) == 13


def test_p1_feasible():
    m = build_primal(p1_topology())
    assert check_feasible(m, p1_point(m)) == []


@pytest.mark.parametrize("fam", FAMILIES)
def test_fig5_satisfies_each_family(fam):
    U = catalog_topology("U_7_3")
    base = build_primal(U)
    m = build_refined(U, [fam])
    assert check_feasible(m, lift_point(m, base, fig5_point(base))) == []


def test_refined_on_path2():
    U = path_topology(2)
    base = build_primal(U)
    for fam in ("path-monotonicity", "transitivity", "refined-Z"):
        m = build_refined(U, [fam])
        assert len(m.rows) == len(base.rows) and m.nvars == base.nvars
    # k may equal j, so the adjacent pair still gets X12 + X21 <= 1
    m = build_refined(U, ["lca-separation"])
    extra = m.rows[len(base.rows):]
    assert len(extra) == 1 and extra[0].rel == "<=" and extra[0].rhs == 1
    assert {m.variables[i].name() for i, _ in extra[0].coefs} == {"X[1,2]", "X[2,1]"}


@pytest.mark.parametrize("name", ["U_4_0", "U_5_1", "U_6_4"])
def test_stt_points_pass_every_builder(name):
    U = catalog_topology(name)
    base = build_primal(U)
    full = add_fixed_point_free_family(build_refined(U, FAMILIES))
    noz = build_z_eliminated(U)
    for T in enumerate_stts(U):
        P = stt_point(base, T)
        assert check_feasible(base, P) == []
        assert check_feasible(full, lift_point(full, base, P)) == []
        assert check_feasible(noz, lift_point(noz, base, P)) == []
        assert separation_z_eliminated(lift_point(noz, base, P), U, noz) is None
        assert separation_fixed_point_free(P, U, base) is None


def test_z_elimination_example_rows():
    U = path_topology(4)
    m = build_z_eliminated(U, expand=True)
    rows = [r for r in m.rows if r.label.startswith("anc:1,4")]
    assert len(rows) == 4
    X = lambda i, j: m.var("X", i, j)
    want = set()
    for b, c in itertools.product((0, 3), repeat=2):
        want.add(frozenset({X(0, 3), X(3, 0), X(1, b), X(2, c)}))
    assert {frozenset(i for i, _ in r.coefs) for r in rows} == want
    assert len([r for r in build_z_eliminated(path_topology(3), expand=True).rows
                if r.label.startswith("anc:1,3")]) == 2


def test_z_elimination_cap():
    with pytest.raises(ModelError):
        build_z_eliminated(path_topology(6), expand=True, cap=3)
    m = build_z_eliminated(path_topology(6), cap=3)
    assert m.implicit and m.implicit[0].name == "ancestry"


def test_separation_zero_point():
    U = path_topology(3)
    m = build_z_eliminated(U, expand=False)
    row = separation_z_eliminated(m.zero_point(), U, m)
    assert row.rhs == 1
    names = sorted(m.variables[i].name() for i, _ in row.coefs)
    assert names == sorted(["X[1,2]", "X[2,1]"]) or names == sorted(["X[1,3]", "X[3,1]", "X[2,1]"])


def test_separation_most_violated_pair():
    U = path_topology(3)
    m = build_z_eliminated(U, expand=False)
    P = list(m.zero_point())
    for i, j in ((0, 1), (1, 2)):
        P[m.var("X", i, j)] = Fraction(1)
    row = separation_z_eliminated(P, U, m)
    assert row.label.startswith("anc:1,3")
    assert {m.variables[i].name() for i, _ in row.coefs} == {"X[1,3]", "X[3,1]", "X[2,1]"}


def test_separation_fig5_x_part():
    U = catalog_topology("U_7_3")
    base = build_primal(U)
    m = build_z_eliminated(U, expand=False)
    assert separation_z_eliminated(lift_point(m, base, fig5_point(base)), U, m) is None


def test_fixed_point_free_examples():
    U = path_topology(2)
    m = build_primal(U)
    P = list(m.zero_point())
    row = separation_fixed_point_free(P, U, m)
    assert row is not None and row.rhs == 1
    P[m.var("X", 0, 1)] = P[m.var("X", 1, 0)] = Fraction(1, 4)
    assert separation_fixed_point_free(P, U, m) is not None
    P[m.var("X", 0, 1)] = Fraction(3, 4)
    assert separation_fixed_point_free(P, U, m) is None
    with pytest.raises(ModelError):
        min_assignment_no_fixed_points([[0]])


@pytest.mark.parametrize("seed", range(5))
def test_assignment_matches_brute_force(seed):
    rng = random.Random(seed)
    n = 5
    C = [[Fraction(rng.randint(0, 9), rng.randint(1, 3)) for _ in range(n)] for _ in range(n)]
    val, perm = min_assignment_no_fixed_points(C)
    brute = min(sum(C[i][p[i]] for i in range(n)) for p in itertools.permutations(range(n))
                if all(p[i] != i for i in range(n)))
    assert val == brute and all(perm[i] != i for i in range(n))
    assert sum(C[i][perm[i]] for i in range(n)) == val


def test_dual_shape_and_examples():
    U = path_topology(3)
    d = build_dual(U, (3, 1, 2))
    assert [v.name() for v in d.variables] == ["R[1,2]", "R[1,3]", "R[2,3]", "Q[1,2,3]", "Q[3,2,1]"]
    P = d.point_from({("R", (0, 1)): 1, ("R", (1, 2)): 1, ("R", (0, 2)): 2,
                      ("Q", (0, 1, 2)): 1, ("Q", (2, 1, 0)): 1})
    assert check_feasible(d, P) == []
    res = solve(d)
    assert res.value == 4
    R = build_dual(U, (2, 1, 2))
    res = solve(R)
    assert res.value == 4
    assert res.point[R.var("Q", 0, 1, 2)] == 1 and res.point[R.var("Q", 2, 1, 0)] == 1
    assert certify_unique_optimum(R, R.objective[1], res.point, "max")
    assert not certify_unique_optimum(d, d.objective[1], solve(d).point, "max")
    assert solve(build_dual(U, (0, 0, 0))).value == 0
    with pytest.raises(ModelError):
        build_dual(U, (1, -1, 1))


@pytest.mark.parametrize("seed", range(6))
def test_capping_as_equality_keeps_value(seed):
    rng = random.Random(seed)
    U = rng.choice(catalog(5))
    f = [rng.randint(0, 6) for _ in range(5)]
    d = build_dual(U, f)
    assert solve(d).value == solve(capping_as_equality(d)).value


def test_bc_ratio_lp_shape_and_trivial_case():
    U = path_topology(3)
    D = depth_vectors(U)
    m = build_bc_ratio_lp(D[0], D[0], D, [D[0]], epsilon=0)
    assert m.nvars == 4
    res = solve(m)
    assert res.optimal and res.value == 0
    assert build_bc_ratio_lp(D[0], D[0], D, [D[0]]).rows[1].rhs == -DEFAULT_EPSILON
    with pytest.raises(ModelError):
        build_bc_ratio_lp(D[0], (9, 9, 9), D, [D[0]])
    with pytest.raises(ModelError):
        build_bc_ratio_lp(D[0], D[0], D, [D[0]], epsilon=-1)


def test_bc_ratio_lp_infeasible_guess():
    U = path_topology(3)
    D = depth_vectors(U)
    # P strictly above every guess coordinate: P.f + eps <= D'.f cannot hold
    m = build_bc_ratio_lp((5, 5, 5), D[0], D, [D[0]], epsilon=DEFAULT_EPSILON)
    assert solve(m).status == "infeasible"


def test_point_io_round_trip():
    m = build_primal(catalog_topology("U_7_3"))
    P = fig5_point(m)
    assert parse_point(m, format_point(m, P)) == P
    assert parse_point(m, format_point(m, P, nonzero_only=True)) == P
    text = dump_model(build_primal(path_topology(3)))
    assert "anc:1,3: 1*X[1,3] + 1*X[3,1] + 1*Z[2;1,3] >= 1" in text


def test_is_feasible_with_implicit_family():
    U = path_topology(6)
    m = build_z_eliminated(U, cap=2)
    base = build_primal(U)
    T = enumerate_stts(U)[17]
    assert is_feasible(m, lift_point(m, base, stt_point(base, T)))
    assert not is_feasible(m, m.zero_point())


def test_no_z_solution_matches_expanded():
    U = path_topology(4)
    lazy = build_z_eliminated(U, expand=False)
    full = build_z_eliminated(U, expand=True)
    rng = random.Random(3)
    for _ in range(10):
        w = [rng.randint(0, 9) for _ in range(4)]
        a = solve_with_separation(lazy, lazy.objective_on("D", w), "min")
        b = solve(full, full.objective_on("D", w), "min")
        assert a.value == b.value
