"""LP formulations over a shared variable index.

Variables are identified by ``Var(kind, key)`` with 0-based node ids in
``key``; names rendered for dumps and point files are 1-based.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, NamedTuple, Sequence

from .topology import Topology, path_between

FAMILIES = ("path-monotonicity", "transitivity", "lca-separation", "refined-Z", "rowmin-colmax")
DEFAULT_EPSILON = Fraction(1, 1000)
DEFAULT_EXPANSION_CAP = 12

LE, GE, EQ = "<=", ">=", "="


class ModelError(ValueError):
    pass


class Var(NamedTuple):
    kind: str
    key: tuple

    def name(self) -> str:
        if not self.key:
            return self.kind
        if self.kind == "Z":
            k, i, j = self.key
            return f"Z[{k + 1};{i + 1},{j + 1}]"
        return f"{self.kind}[" + ",".join(str(v + 1) for v in self.key) + "]"


class Row(NamedTuple):
    coefs: tuple  # ((ordinal, Fraction), ...) sorted by ordinal, no zeros
    rel: str
    rhs: Fraction
    label: str

    def activity(self, point: Sequence) -> Fraction:
        return sum((c * point[i] for i, c in self.coefs), Fraction(0))

    def satisfied(self, point: Sequence) -> bool:
        lhs = self.activity(point)
        if self.rel == GE:
            return lhs >= self.rhs
        if self.rel == LE:
            return lhs <= self.rhs
        return lhs == self.rhs

    def slack(self, point: Sequence) -> Fraction:
        """Nonnegative iff satisfied (for = rows, minus the absolute error)."""
        lhs = self.activity(point)
        if self.rel == GE:
            return lhs - self.rhs
        if self.rel == LE:
            return self.rhs - lhs
        return -abs(lhs - self.rhs)


def make_row(coefs: dict, rel: str, rhs, label: str) -> Row:
    items = tuple(sorted((i, Fraction(c)) for i, c in coefs.items() if c != 0))
    return Row(items, rel, Fraction(rhs), label)


@dataclass
class ImplicitFamily:
    """Rows served on demand: ``separate(point)`` returns a violated Row or None."""
    name: str
    separate: Callable
    expand: Callable | None = None


@dataclass
class LpModel:
    flavor: str
    topology: Topology | None
    variables: list
    rows: list = field(default_factory=list)
    nonneg: set = field(default_factory=set)
    # bounds that hold on the whole feasible set and only help the solver;
    # they never count as rows or as tight constraints
    implied_nonneg: set = field(default_factory=set)
    objective: tuple | None = None  # (sense, {ordinal: coef})
    implicit: list = field(default_factory=list)
    families: tuple = ()

    def __post_init__(self):
        self.index = {v: i for i, v in enumerate(self.variables)}
        if len(self.index) != len(self.variables):
            raise ModelError("duplicate variables")

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def var(self, kind: str, *key) -> int:
        return self.index[Var(kind, tuple(key))]

    def has(self, kind: str, *key) -> bool:
        return Var(kind, tuple(key)) in self.index

    def ordinals(self, kind: str) -> list:
        return [i for i, v in enumerate(self.variables) if v.kind == kind]

    def add_row(self, coefs: dict, rel: str, rhs, label: str) -> None:
        self.rows.append(make_row(coefs, rel, rhs, label))

    def row_count(self, include_bounds: bool = True) -> int:
        return len(self.rows) + (len(self.nonneg) if include_bounds else 0)

    def bound_rows(self) -> list:
        return [make_row({i: 1}, GE, 0, f"nonneg:{self.variables[i].name()}")
                for i in sorted(self.nonneg)]

    def all_rows(self) -> list:
        return self.bound_rows() + list(self.rows)

    def copy(self, flavor: str | None = None) -> "LpModel":
        m = LpModel(flavor or self.flavor, self.topology, list(self.variables),
                    list(self.rows), set(self.nonneg), set(self.implied_nonneg),
                    self.objective, list(self.implicit), self.families)
        return m

    def zero_point(self) -> list:
        return [Fraction(0)] * self.nvars

    def point_from(self, values: dict) -> tuple:
        """Dense point from ``{Var or (kind, key): value}``; missing entries are 0."""
        out = self.zero_point()
        for v, x in values.items():
            v = v if isinstance(v, Var) else Var(*v)
            out[self.index[v]] = Fraction(x)
        return tuple(out)

    def project(self, point: Sequence, kind: str) -> tuple:
        return tuple(point[i] for i in self.ordinals(kind))

    def project_D(self, point: Sequence) -> tuple:
        return self.project(point, "D")

    def objective_on(self, kind: str, weights: Sequence) -> dict:
        ords = self.ordinals(kind)
        if len(ords) != len(weights):
            raise ModelError(f"{len(weights)} weights for {len(ords)} {kind} variables")
        return {i: Fraction(w) for i, w in zip(ords, weights) if Fraction(w) != 0}


# -- builders ----------------------------------------------------------------

def _pairs(n):
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def _x_vars(n):
    return [Var("X", (i, j)) for i in range(n) for j in range(n) if i != j]


def _z_vars(U: Topology):
    out = []
    for i, j in _pairs(U.n):
        for k in path_between(U, i, j):
            out.append(Var("Z", (k, i, j)))
    out.sort(key=lambda v: v.key)
    return out


def _zkey(k, i, j):
    return (k, min(i, j), max(i, j))


def build_primal(U: Topology) -> LpModel:
    n = U.n
    xs, zs, ds = _x_vars(n), _z_vars(U), [Var("D", (i,)) for i in range(n)]
    m = LpModel("primal", U, xs + zs + ds)
    m.nonneg = {m.index[v] for v in xs + zs}
    m.implied_nonneg = {m.index[v] for v in ds}
    X = lambda i, j: m.var("X", i, j)
    Z = lambda k, i, j: m.var("Z", *_zkey(k, i, j))
    for i, j in _pairs(n):
        coefs = {X(i, j): 1, X(j, i): 1}
        for k in path_between(U, i, j):
            coefs[Z(k, i, j)] = 1
        m.add_row(coefs, GE, 1, f"anc:{i + 1},{j + 1}")
    for v in zs:
        k, i, j = v.key
        zi = m.index[v]
        m.add_row({zi: 1, X(k, i): -1}, LE, 0, f"lca:{k + 1};{i + 1},{j + 1}:{i + 1}")
        m.add_row({zi: 1, X(k, j): -1}, LE, 0, f"lca:{k + 1};{i + 1},{j + 1}:{j + 1}")
    for i in range(n):
        coefs = {m.var("D", i): 1}
        for j in range(n):
            if j != i:
                coefs[X(j, i)] = -1
        m.add_row(coefs, GE, 0, f"depth:{i + 1}")
    return m


def _add_family(m: LpModel, fam: str) -> None:
    U = m.topology
    n = U.n
    X = lambda i, j: m.var("X", i, j)
    if fam == "path-monotonicity":
        for a in range(n):
            for j in range(n):
                if j == a:
                    continue
                p = U.path(a, j)
                if len(p) < 3:
                    continue
                prev = p[-2]
                m.add_row({X(a, prev): 1, X(a, j): -1}, GE, 0, f"mono:{a + 1}:{prev + 1}>{j + 1}")
    elif fam == "transitivity":
        for i, j, k in itertools.permutations(range(n), 3):
            m.add_row({X(i, k): 1, X(i, j): -1, X(j, k): -1}, GE, -1,
                      f"trans:{i + 1},{j + 1},{k + 1}")
    elif fam == "lca-separation":
        seen = set()
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                for k in path_between(U, i, j) + (j,):
                    key = frozenset([(k, i), (i, j)])
                    if key in seen:
                        continue
                    seen.add(key)
                    m.add_row({X(k, i): 1, X(i, j): 1}, LE, 1, f"lcasep:{k + 1};{i + 1},{j + 1}")
    elif fam == "refined-Z":
        if not m.ordinals("Z"):
            return
        for zi in m.ordinals("Z"):
            k, i, j = m.variables[zi].key
            m.add_row({zi: 1, X(k, i): -1, X(k, j): -1}, GE, -1,
                      f"rz:{k + 1};{i + 1},{j + 1}")
    elif fam == "rowmin-colmax":
        if n < 2:
            return
        ms = [Var("m", (i,)) for i in range(n)]
        Ms = [Var("M", (i,)) for i in range(n)]
        m.variables.extend(ms + Ms)
        m.__post_init__()
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                m.add_row({X(j, i): 1, m.var("M", i): -1}, LE, 0, f"colmax:{i + 1};{j + 1}")
                m.add_row({m.var("m", i): 1, X(i, j): -1}, LE, 0, f"rowmin:{i + 1};{j + 1}")
        m.add_row({m.var("M", i): 1 for i in range(n)}, EQ, n - 1, "colmax:sum")
        m.add_row({m.var("m", i): 1 for i in range(n)}, EQ, 1, "rowmin:sum")
    else:
        raise ModelError(f"unknown family {fam!r}; choose from {', '.join(FAMILIES)}")


def build_refined(U: Topology, families: Iterable[str], base: LpModel | None = None) -> LpModel:
    """Primal (or a given base model) plus the selected refined families."""
    families = tuple(f for f in FAMILIES if f in set(families))
    unknown = set(families) - set(FAMILIES)
    if unknown:
        raise ModelError(f"unknown families {sorted(unknown)}")
    m = (base or build_primal(U)).copy()
    m.flavor = (m.flavor + "+" + "+".join(families)) if families else m.flavor
    for fam in families:
        _add_family(m, fam)
    m.families = m.families + families
    return m


def _ancestry_choice_rows(m: LpModel, i: int, j: int) -> list:
    U = m.topology
    inner = path_between(U, i, j)
    X = lambda a, b: m.var("X", a, b)
    rows = []
    for choice in itertools.product((0, 1), repeat=len(inner)):
        coefs = {X(i, j): 1, X(j, i): 1}
        tag = ""
        for k, g in zip(inner, choice):
            coefs[X(k, j if g else i)] = 1
            tag += str(j + 1 if g else i + 1) + "."
        label = f"anc:{i + 1},{j + 1}" + (f":{tag[:-1]}" if inner else "")
        rows.append(make_row(coefs, GE, 1, label))
    return rows


def build_z_eliminated(U: Topology, expand: bool | None = None,
                       cap: int = DEFAULT_EXPANSION_CAP) -> LpModel:
    """X,D model; ancestry rows are the 2^d choice expansions.

    ``expand=None`` expands when every pair has d <= cap and otherwise
    leaves the family implicit (served by separation).
    """
    n = U.n
    xs, ds = _x_vars(n), [Var("D", (i,)) for i in range(n)]
    m = LpModel("no-z", U, xs + ds)
    m.nonneg = {m.index[v] for v in xs}
    m.implied_nonneg = {m.index[v] for v in ds}
    dmax = max((len(path_between(U, i, j)) for i, j in _pairs(n)), default=0)
    if expand is None:
        expand = dmax <= cap
    elif expand and dmax > cap:
        raise ModelError(f"expansion needs 2^{dmax} rows per pair; cap is d <= {cap}")

    def expand_all():
        out = []
        for i, j in _pairs(n):
            out.extend(_ancestry_choice_rows(m, i, j))
        return out

    if expand:
        m.rows.extend(expand_all())
    else:
        for i, j in _pairs(n):
            if not path_between(U, i, j):
                m.rows.extend(_ancestry_choice_rows(m, i, j))
        m.implicit.append(ImplicitFamily("ancestry", lambda p: separation_z_eliminated(p, U, m),
                                         expand_all))
    for i in range(n):
        coefs = {m.var("D", i): 1}
        for j in range(n):
            if j != i:
                coefs[m.var("X", j, i)] = -1
        m.add_row(coefs, GE, 0, f"depth:{i + 1}")
    return m


def separation_z_eliminated(point: Sequence, U: Topology, model: LpModel | None = None):
    """Most violated expanded ancestry row, or None.

    Per interior node the smaller of X_ki, X_kj is taken; ties go to the i side.
    """
    m = model or build_z_eliminated(U, expand=False)
    X = lambda a, b: point[m.var("X", a, b)]
    worst, worst_row = Fraction(0), None
    for i, j in _pairs(U.n):
        inner = path_between(U, i, j)
        total = X(i, j) + X(j, i)
        coefs = {m.var("X", i, j): 1, m.var("X", j, i): 1}
        tag = ""
        for k in inner:
            side = i if X(k, i) <= X(k, j) else j
            total += X(k, side)
            coefs[m.var("X", k, side)] = 1
            tag += f"{side + 1}."
        if 1 - total > worst:
            worst = 1 - total
            label = f"anc:{i + 1},{j + 1}" + (f":{tag[:-1]}" if inner else "")
            worst_row = make_row(coefs, GE, 1, label)
    return worst_row


def min_assignment_no_fixed_points(cost: Sequence[Sequence]) -> tuple:
    """Exact min-cost permutation with pi[i] != i (bitmask DP over columns)."""
    n = len(cost)
    if n < 2:
        raise ModelError("a fixed-point-free permutation needs n >= 2")
    INF = None
    best = {0: (Fraction(0), ())}
    for i in range(n):
        nxt = {}
        for mask, (val, perm) in best.items():
            for j in range(n):
                if j == i or mask >> j & 1:
                    continue
                cand = val + cost[i][j]
                key = mask | 1 << j
                cur = nxt.get(key, INF)
                if cur is None or cand < cur[0]:
                    nxt[key] = (cand, perm + (j,))
        best = nxt
    val, perm = best[(1 << n) - 1]
    return val, perm


def separation_fixed_point_free(point: Sequence, U: Topology, model: LpModel | None = None):
    """Row sum_i X_{i,pi(i)} >= 1 for the cheapest derangement, if violated."""
    m = model or build_primal(U)
    n = U.n
    if n < 2:
        raise ModelError("fixed-point-free family needs n >= 2")
    C = [[point[m.var("X", i, j)] if i != j else Fraction(0) for j in range(n)] for i in range(n)]
    val, perm = min_assignment_no_fixed_points(C)
    if val >= 1:
        return None
    label = "perm:" + ",".join(str(p + 1) for p in perm)
    return make_row({m.var("X", i, perm[i]): 1 for i in range(n)}, GE, 1, label)


def add_fixed_point_free_family(m: LpModel) -> LpModel:
    """Attach the derangement family as an implicit (separation-only) family."""
    out = m.copy()
    out.implicit.append(ImplicitFamily("fixed-point-free",
                                       lambda p: separation_fixed_point_free(p, out.topology, out)))
    return out


def build_dual(U: Topology, f: Sequence) -> LpModel:
    n = U.n
    f = [Fraction(x) for x in f]
    if len(f) != n:
        raise ModelError(f"weight vector has length {len(f)}, expected {n}")
    if any(x < 0 for x in f):
        raise ModelError("weights must be nonnegative")
    rs = [Var("R", p) for p in _pairs(n)]
    qs = []
    for i in range(n):
        for j in range(n):
            if i != j:
                for k in path_between(U, i, j):
                    qs.append(Var("Q", (i, k, j)))
    qs.sort(key=lambda v: v.key)
    m = LpModel("dual", U, rs + qs)
    m.nonneg = set(range(m.nvars))
    R = lambda i, j: m.var("R", min(i, j), max(i, j))
    for i, j in _pairs(n):
        for k in path_between(U, i, j):
            m.add_row({R(i, j): 1, m.var("Q", i, k, j): -1, m.var("Q", j, k, i): -1}, LE, 0,
                      f"cap:{i + 1},{j + 1};{k + 1}")
    for j in range(n):
        for i in range(n):
            if i == j:
                continue
            coefs = {R(i, j): 1}
            for a in range(n):
                if a not in (i, j) and i in path_between(U, j, a):
                    coefs[m.var("Q", j, i, a)] = 1
            m.add_row(coefs, LE, f[j], f"freq:{j + 1};{i + 1}")
    m.objective = ("max", {m.var("R", *p): Fraction(1) for p in _pairs(n)})
    return m


def capping_as_equality(m: LpModel) -> LpModel:
    out = m.copy(m.flavor + "+cap-eq")
    out.rows = [Row(r.coefs, EQ, r.rhs, r.label) if r.label.startswith("cap:") else r
                for r in m.rows]
    return out


def build_bc_ratio_lp(P_D: Sequence, Dprime: Sequence, stt_depths: Sequence,
                      roundings: Sequence, epsilon=DEFAULT_EPSILON) -> LpModel:
    n = len(P_D)
    P_D = [Fraction(x) for x in P_D]
    Dprime = tuple(Fraction(x) for x in Dprime)
    stt_depths = [tuple(Fraction(x) for x in D) for D in stt_depths]
    if Dprime not in set(stt_depths):
        raise ModelError("Dprime must be one of the STT depth vectors")
    epsilon = Fraction(epsilon)
    if epsilon < 0:
        raise ModelError("epsilon must be nonnegative")
    fs = [Var("f", (i,)) for i in range(n)]
    m = LpModel("bc-ratio", None, fs + [Var("x", ())])
    m.nonneg = set(range(n))
    x = m.var("x")
    m.add_row({i: 1 for i in range(n)}, EQ, 1, "simplex")
    m.add_row({i: P_D[i] - Dprime[i] for i in range(n)}, LE, -epsilon, "separation")
    for t, D in enumerate(stt_depths):
        if D == Dprime:
            continue
        m.add_row({i: Dprime[i] - D[i] for i in range(n)}, LE, 0, f"opt:{t + 1}")
    for t, S in enumerate(roundings):
        coefs = {i: -Fraction(S[i]) for i in range(n)}
        coefs[x] = 1
        m.add_row(coefs, LE, 0, f"round:{t + 1}")
    obj = {i: -Dprime[i] for i in range(n)}
    obj[x] = Fraction(1)
    m.objective = ("max", obj)
    return m


# -- points ------------------------------------------------------------------

def check_feasible(model: LpModel, point: Sequence) -> list:
    """Labels of violated rows (bounds and implicit families included)."""
    if len(point) != model.nvars:
        raise ModelError(f"point has {len(point)} entries, model has {model.nvars} variables")
    point = [Fraction(x) for x in point]
    bad = [f"nonneg:{model.variables[i].name()}" for i in sorted(model.nonneg) if point[i] < 0]
    bad.extend(r.label for r in model.rows if not r.satisfied(point))
    for fam in model.implicit:
        row = fam.separate(point)
        if row is not None:
            bad.append(row.label)
    return bad


def is_feasible(model: LpModel, point: Sequence) -> bool:
    return not check_feasible(model, point)


def stt_point(model: LpModel, T) -> tuple:
    """Point of ``model`` induced by the search tree T."""
    from .stt import induced_point
    ip = induced_point(T)
    vals = {}
    for (i, j), v in ip.X.items():
        vals[Var("X", (i, j))] = v
    if model.ordinals("Z"):
        for key, v in ip.Z.items():
            vals[Var("Z", key)] = v
    for i, d in enumerate(ip.D):
        vals[Var("D", (i,))] = d
    if model.ordinals("m"):
        for i in range(model.topology.n):
            is_root = i == T.root
            vals[Var("m", (i,))] = 1 if is_root else 0
            vals[Var("M", (i,))] = 0 if is_root else 1
    return model.point_from(vals)


def lift_point(model: LpModel, source: LpModel, point: Sequence) -> tuple:
    """Carry X/Z/D values into ``model``; fill m/M aux variables if present."""
    vals = {}
    for i, v in enumerate(source.variables):
        if v in model.index:
            vals[v] = point[i]
    if model.ordinals("m"):
        n = model.topology.n
        X = lambda i, j: point[source.var("X", i, j)]
        q = [min(X(i, j) for j in range(n) if j != i) for i in range(n)]
        Q = [max(X(j, i) for j in range(n) if j != i) for i in range(n)]
        dq = (sum(q) - 1) / n
        dQ = (n - 1 - sum(Q)) / n
        for i in range(n):
            vals[Var("m", (i,))] = q[i] - dq
            vals[Var("M", (i,))] = Q[i] + dQ
    return model.point_from(vals)


def x_matrix(model: LpModel, point: Sequence) -> list:
    n = model.topology.n
    return [[point[model.var("X", i, j)] if i != j else None for j in range(n)] for i in range(n)]


def format_rational(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def dump_model(model: LpModel) -> str:
    lines = []
    for row in model.all_rows():
        terms = " + ".join(f"{format_rational(c)}*{model.variables[i].name()}" for i, c in row.coefs)
        lines.append(f"{row.label}: {terms or '0'} {row.rel} {format_rational(row.rhs)}")
    return "\n".join(lines) + "\n"


def format_point(model: LpModel, point: Sequence, nonzero_only: bool = False) -> str:
    lines = [f"{v.name()}={format_rational(x)}" for v, x in zip(model.variables, point)
             if not nonzero_only or x != 0]
    return "\n".join(lines) + "\n"


def parse_point(model: LpModel, text: str) -> tuple:
    names = {v.name(): i for i, v in enumerate(model.variables)}
    out = model.zero_point()
    for ln in text.splitlines():
        ln = ln.split("#")[0].strip()
        if not ln:
            continue
        name, _, val = ln.partition("=")
        name = name.strip()
        if name not in names:
            raise ModelError(f"unknown variable {name!r}")
        out[names[name]] = Fraction(val.strip())
    return tuple(out)
