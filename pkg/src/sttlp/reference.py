"""Published reference points and instances, 1-based as printed."""

from __future__ import annotations

from fractions import Fraction

from .lpmodel import LpModel, Var, build_primal
from .topology import Topology, catalog_topology, path_topology

H = Fraction(1, 2)

COUNTEREXAMPLE_TOPOLOGY = "U_7_3"
COUNTEREXAMPLE_WEIGHTS = (3, 2, 0, 2, 3, 3, 10)
COUNTEREXAMPLE_LP = Fraction(59, 2)
COUNTEREXAMPLE_STT = Fraction(30)
COUNTEREXAMPLE_D = (2, 2, Fraction(9, 2), 2, 2, Fraction(3, 2), H)

# rows i, columns j; None on the diagonal
_FIG5_X = (
    (None, H, H, 0, 0, 0, 0),
    (H, None, 1, H, H, H, 0),
    (0, 0, None, 0, 0, 0, 0),
    (H, H, 1, None, H, H, 0),
    (0, 0, H, H, None, 0, 0),
    (H, H, 1, H, H, None, H),
    (H, H, H, H, H, H, None),
)
# (k, i, j) with value 1/2; all other Z are 0
_FIG5_Z = ((2, 1, 3), (2, 1, 4), (2, 1, 5), (4, 1, 5), (2, 1, 6), (6, 1, 7), (4, 2, 5),
           (6, 2, 7), (4, 3, 5), (6, 3, 7), (6, 4, 7), (4, 5, 6), (6, 5, 7))

# path 1-2-3-4-5-6, X entries doubled
_P1_X2 = (
    (None, 2, 0, 0, 0, 0),
    (0, None, 1, 0, 0, 2),
    (2, 1, None, 1, 1, 0),
    (1, 1, 1, None, 1, 2),
    (1, 0, 0, 1, None, 2),
    (0, 0, 2, 0, 0, None),
)
P1_D = (2, 2, 2, 1, 1, 3)
P1_DOMINATING_STT_D = (2, 1, 2, 0, 1, 2)
# (k, i, j) with value 1/2: the only Z-completion of X, D that is a vertex
_P1_Z = ((3, 1, 4), (3, 1, 5), (3, 2, 4), (3, 2, 5), (4, 1, 6), (4, 2, 5), (4, 3, 5), (5, 1, 6))


def _point(model: LpModel, X, Z, scale=Fraction(1)) -> tuple:
    n = len(X)
    vals = {}
    for i in range(n):
        for j in range(n):
            if i != j and X[i][j]:
                vals[Var("X", (i, j))] = Fraction(X[i][j]) * scale
    for k, i, j in Z:
        vals[Var("Z", (k - 1, min(i, j) - 1, max(i, j) - 1))] = H
    for j in range(n):
        vals[Var("D", (j,))] = sum(vals.get(Var("X", (i, j)), 0) for i in range(n) if i != j)
    return model.point_from(vals)


def counterexample_topology() -> Topology:
    return catalog_topology(COUNTEREXAMPLE_TOPOLOGY)


def fig5_point(model: LpModel | None = None) -> tuple:
    """The half-integral vertex of the (7,3) LP that beats every STT."""
    model = model or build_primal(counterexample_topology())
    return _point(model, _FIG5_X, _FIG5_Z)


def p1_topology() -> Topology:
    return path_topology(6)


def p1_point(model: LpModel | None = None) -> tuple:
    """Partially integer vertex on path-6."""
    model = model or build_primal(p1_topology())
    return _point(model, _P1_X2, _P1_Z, H)
