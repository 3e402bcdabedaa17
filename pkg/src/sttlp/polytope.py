"""Exact polyhedral conversions.

``cdd`` (pycddlib, exact fraction mode) is the default engine. A small
pure-Python double description (``backend="dd"``) serves as an
independent oracle and as a fallback when cdd is unavailable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .lpmodel import EQ, LE, LpModel, check_feasible

try:  # pragma: no cover - import guard
    import cdd
except ImportError:  # pragma: no cover
    cdd = None

DEFAULT_VAR_CAP = 40


class PolytopeError(ValueError):
    pass


@dataclass(frozen=True)
class Facet:
    """Half-space ``normal . x >= offset`` with a coprime integer normal."""
    normal: tuple
    offset: Fraction
    spanning: frozenset = frozenset()

    def value(self, point) -> Fraction:
        return sum((a * Fraction(x) for a, x in zip(self.normal, point)), Fraction(0))


def _lcm_den(values) -> int:
    L = 1
    for v in values:
        d = Fraction(v).denominator
        if d != 1:
            L = L * d // math.gcd(L, d)
    return L


def primitive(vec: Sequence) -> tuple:
    """Scale a rational vector to coprime integers (sign preserved)."""
    L = _lcm_den(vec)
    ints = [int(Fraction(x) * L) for x in vec]
    g = math.gcd(*ints)
    if g == 0:
        return tuple(ints)
    return tuple(x // g for x in ints)


def _default_backend(backend):
    if backend is None:
        return "cdd" if cdd is not None else "dd"
    if backend == "cdd" and cdd is None:
        raise PolytopeError("pycddlib is not installed; use backend='dd'")
    if backend not in ("cdd", "dd"):
        raise PolytopeError(f"unknown backend {backend!r}")
    return backend


# -- double description ------------------------------------------------------

def _solve_square(M: list, rhs: list) -> list:
    """Exact solution of a nonsingular square system (Gauss-Jordan)."""
    n = len(M)
    A = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(M, rhs)]
    for c in range(n):
        p = next(r for r in range(c, n) if A[r][c] != 0)
        A[c], A[p] = A[p], A[c]
        inv = 1 / A[c][c]
        A[c] = [x * inv for x in A[c]]
        for r in range(n):
            if r != c and A[r][c] != 0:
                e = A[r][c]
                A[r] = [x - e * y for x, y in zip(A[r], A[c])]
    return [A[r][n] for r in range(n)]


def _independent_rows(rows: list, dim: int) -> list:
    basis, picked = [], []
    for idx, row in enumerate(rows):
        vec = [Fraction(x) for x in row]
        for b, piv in basis:
            if vec[piv] != 0:
                e = vec[piv] / b[piv]
                vec = [x - e * y for x, y in zip(vec, b)]
        piv = next((k for k in range(dim) if vec[k] != 0), None)
        if piv is not None:
            basis.append((vec, piv))
            picked.append(idx)
            if len(picked) == dim:
                break
    return picked


def dd_extreme_rays(A: Sequence[Sequence]) -> list:
    """Extreme rays of the pointed cone {y : a.y >= 0 for each row a}.

    Integer rows in, coprime integer rays out (sorted). Raises if the cone
    is not pointed.
    """
    rows = [primitive(a) for a in A]
    if not rows:
        raise PolytopeError("empty constraint list")
    dim = len(rows[0])
    init = _independent_rows(rows, dim)
    if len(init) < dim:
        raise PolytopeError("cone is not pointed (constraint rank below dimension)")
    G = [rows[i] for i in init]
    rays = []
    for k in range(dim):
        e = [0] * dim
        e[k] = 1
        rays.append(primitive(_solve_square(G, e)))

    def zero_set(y, upto):
        z = 0
        for idx in upto:
            if sum(a * b for a, b in zip(rows[idx], y)) == 0:
                z |= 1 << idx
        return z

    done = list(init)
    zs = [zero_set(y, done) for y in rays]
    for idx in range(len(rows)):
        if idx in init:
            continue
        a = rows[idx]
        vals = [sum(x * y for x, y in zip(a, r)) for r in rays]
        pos = [k for k, v in enumerate(vals) if v > 0]
        neg = [k for k, v in enumerate(vals) if v < 0]
        zer = [k for k, v in enumerate(vals) if v == 0]
        new_rays = [rays[k] for k in pos + zer]
        new_zs = [zs[k] for k in pos] + [zs[k] | 1 << idx for k in zer]
        need = dim - 2
        for p in pos:
            for q in neg:
                common = zs[p] & zs[q]
                if bin(common).count("1") < need:
                    continue
                adjacent = True
                for k in range(len(rays)):
                    if k != p and k != q and zs[k] & common == common:
                        adjacent = False
                        break
                if not adjacent:
                    continue
                vp, vq = vals[p], vals[q]
                r = primitive([vp * y - vq * x for x, y in zip(rays[p], rays[q])])
                new_rays.append(r)
                new_zs.append(common | 1 << idx)
        rays, zs = new_rays, new_zs
        done.append(idx)
    return sorted(set(rays))


# -- conv+ facets ------------------------------------------------------------

def _check_points(points):
    pts = [tuple(Fraction(x) for x in p) for p in points]
    if not pts:
        raise PolytopeError("need at least one point")
    n = len(pts[0])
    if n == 0:
        raise PolytopeError("points have dimension 0")
    if any(len(p) != n for p in pts):
        raise PolytopeError("points have mixed dimensions")
    return pts, n


def _raw_hull_cdd(pts, n):
    gens = [[1] + list(p) for p in pts]
    for i in range(n):
        e = [0] * (n + 1)
        e[i + 1] = 1
        gens.append(e)
    mat = cdd.Matrix(gens, number_type="fraction")
    mat.rep_type = cdd.RepType.GENERATOR
    ineq = cdd.Polyhedron(mat).get_inequalities()
    out = []
    for k in range(ineq.row_size):
        row = [Fraction(x) for x in ineq[k]]
        if k in ineq.lin_set:
            raise PolytopeError("dominance hull unexpectedly lower dimensional")
        out.append(row)
    return out


def _raw_hull_dd(pts, n):
    gens = [[1] + list(p) for p in pts]
    for i in range(n):
        e = [0] * (n + 1)
        e[i + 1] = 1
        gens.append(e)
    return [list(r) for r in dd_extreme_rays(gens)]


def dominance_hull_facets(points: Sequence, backend: str | None = None) -> list:
    """All facets of conv(points) + nonnegative orthant, canonically sorted."""
    pts, n = _check_points(points)
    backend = _default_backend(backend)
    raw = _raw_hull_cdd(pts, n) if backend == "cdd" else _raw_hull_dd(pts, n)
    # integer copies keep the spanning-set test off Fraction arithmetic
    scale = math.lcm(*(x.denominator for p in pts for x in p))
    ipts = [[int(x * scale) for x in p] for p in pts]
    facets = {}
    for row in raw:
        b, a = row[0], row[1:]
        if all(x == 0 for x in a):
            continue  # homogenizing row 1 >= 0
        L = _lcm_den(a)
        ints = [int(x * L) for x in a]
        g = math.gcd(*ints)
        normal = tuple(x // g for x in ints)
        offset = Fraction(-b) * L / g
        if any(x < 0 for x in normal):
            raise PolytopeError(f"negative facet normal {normal}")
        target = offset * scale
        spanning = frozenset(k for k, p in enumerate(ipts)
                             if sum(c * x for c, x in zip(normal, p)) == target)
        facets[normal] = Facet(normal, offset, spanning)
    return sorted(facets.values(), key=lambda f: (f.normal, f.offset))


def point_below_facet(facet: Facet, point: Sequence) -> bool:
    if len(point) != len(facet.normal):
        raise PolytopeError("dimension mismatch")
    return facet.value(point) < facet.offset


def dominance_vertices(facets: Sequence[Facet], n: int, backend: str | None = None) -> list:
    """Vertices of {x : facets hold} (the non-dominated hull points)."""
    rows = [[-f.offset] + list(f.normal) for f in facets]
    verts, _ = _h_to_v(rows, set(), n, _default_backend(backend))
    return verts


def affine_rank(points: Sequence) -> int:
    from .exactsolver import rank
    pts = [[Fraction(x) for x in p] for p in points]
    if len(pts) <= 1:
        return 0
    base = pts[0]
    return rank([[x - y for x, y in zip(p, base)] for p in pts[1:]])


# -- H -> V ------------------------------------------------------------------

def _h_to_v(rows, lin, n, backend):
    """rows are [b, a...] meaning b + a.x >= 0 (== 0 for indices in lin)."""
    if backend == "cdd":
        mat = cdd.Matrix([list(r) for r in rows], number_type="fraction")
        mat.rep_type = cdd.RepType.INEQUALITY
        if lin:
            mat.lin_set = frozenset(lin)
        gen = cdd.Polyhedron(mat).get_generators()
        if gen.lin_set:
            raise PolytopeError("polyhedron contains a line")
        verts, rays = [], []
        for k in range(gen.row_size):
            row = [Fraction(x) for x in gen[k]]
            if row[0] == 0:
                rays.append(primitive(row[1:]))
            else:
                verts.append(tuple(x / row[0] for x in row[1:]))
        if not verts and all(Fraction(r[0]) == 0 for r in rows):
            verts.append(tuple([Fraction(0)] * n))  # cdd leaves a cone's apex implicit
        return sorted(set(verts)), sorted(set(rays))
    cone = []
    for idx, r in enumerate(rows):
        cone.append(list(r))
        if idx in lin:
            cone.append([-x for x in r])
    cone.append([1] + [0] * n)  # t >= 0
    verts, rays = [], []
    for y in dd_extreme_rays(cone):
        if y[0] == 0:
            rays.append(tuple(y[1:]))
        else:
            verts.append(tuple(Fraction(x, y[0]) for x in y[1:]))
    return sorted(set(verts)), sorted(set(rays))


def model_h_rows(model: LpModel):
    rows, lin = [], set()
    n = model.nvars
    all_rows = model.all_rows()
    for fam in model.implicit:
        if fam.expand is None:
            raise PolytopeError(f"family {fam.name!r} has no explicit expansion")
        all_rows.extend(fam.expand())
    for r in all_rows:
        a = [Fraction(0)] * n
        for i, c in r.coefs:
            a[i] = c
        if r.rel == LE:
            rows.append([r.rhs] + [-x for x in a])
        else:
            if r.rel == EQ:
                lin.add(len(rows))
            rows.append([-r.rhs] + a)
    return rows, lin


def enumerate_vertices(model: LpModel, backend: str | None = None,
                       var_cap: int = DEFAULT_VAR_CAP) -> list:
    """All vertices of the model's polyhedron, lexicographically sorted."""
    if model.nvars > var_cap:
        raise PolytopeError(f"{model.nvars} variables exceed the cap of {var_cap}; "
                            "use direction sampling instead")
    rows, lin = model_h_rows(model)
    verts, _ = _h_to_v(rows, lin, model.nvars, _default_backend(backend))
    for v in verts:
        bad = check_feasible(model, v)
        if bad:  # pragma: no cover - engine sanity
            raise PolytopeError(f"engine returned an infeasible vertex ({bad[0]})")
    return verts


# -- facet file --------------------------------------------------------------

def _fmt(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def format_facets(facets: Sequence[Facet]) -> str:
    return "".join(f"{_fmt(f.offset)} ; {' '.join(str(a) for a in f.normal)}\n" for f in facets)


def parse_facets(text: str) -> list:
    out = []
    for ln in text.splitlines():
        ln = ln.split("#")[0].strip()
        if not ln:
            continue
        off, _, normal = ln.partition(";")
        out.append(Facet(tuple(int(t) for t in normal.split()), Fraction(off.strip())))
    return out
