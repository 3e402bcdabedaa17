"""Search trees on trees (STTs): enumeration, depths, costs, induced points."""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .topology import Topology, TopologyError, star_topology

DEFAULT_NODE_CAP = 8


class SttError(ValueError):
    pass


@dataclass(frozen=True, repr=False)
class SearchTree:
    topology: Topology
    root: int
    children: tuple = ()

    @property
    def nodes(self) -> frozenset:
        out = {self.root}
        for c in self.children:
            out |= c.nodes
        return frozenset(out)

    def __str__(self):
        return to_string(self)

    def __repr__(self):
        return f"SearchTree({to_string(self)})"


@dataclass(frozen=True)
class InducedPoint:
    X: dict  # (i, j) -> 0/1
    Z: dict  # (k, min(i,j), max(i,j)) -> 0/1
    D: tuple


@functools.lru_cache(maxsize=None)
def _trees(U: Topology, comp: frozenset) -> tuple:
    out = []
    for r in sorted(comp):
        parts = U.components(comp - {r})
        for combo in itertools.product(*(_trees(U, p) for p in parts)):
            out.append(SearchTree(U, r, tuple(combo)))
    return tuple(out)


@functools.lru_cache(maxsize=None)
def _count(U: Topology, comp: frozenset) -> int:
    total = 0
    for r in comp:
        prod = 1
        for p in U.components(comp - {r}):
            prod *= _count(U, p)
        total += prod
    return total


def enumerate_stts(U: Topology) -> tuple:
    """Every STT over U exactly once, roots in increasing order."""
    return _trees(U, frozenset(range(U.n)))


def count_stts(U: Topology) -> int:
    return _count(U, frozenset(range(U.n)))


def validate(T: SearchTree, comp: frozenset | None = None) -> None:
    U = T.topology
    comp = frozenset(range(U.n)) if comp is None else comp
    if T.root not in comp:
        raise SttError(f"root {T.root + 1} outside its component")
    parts = U.components(comp - {T.root})
    got = sorted((c.nodes for c in T.children), key=min)
    if got != parts:
        raise SttError(f"children of {T.root + 1} do not match the components")
    for child in T.children:
        validate(child, child.nodes)


def _walk(T: SearchTree, depth: int, out: list):
    out[T.root] = depth
    for c in T.children:
        _walk(c, depth + 1, out)


def depths(T: SearchTree) -> tuple:
    """LP-convention depths: the root has depth 0."""
    out = [None] * T.topology.n
    _walk(T, 0, out)
    return tuple(out)


def depth_vectors(U: Topology) -> list:
    return [depths(T) for T in enumerate_stts(U)]


def _check_weights(f, n):
    if len(f) != n:
        raise SttError(f"weight vector has length {len(f)}, expected {n}")
    f = [Fraction(x) for x in f]
    if any(x < 0 for x in f):
        raise SttError("weights must be nonnegative")
    return f


def cost(T: SearchTree, f: Sequence) -> Fraction:
    """Search cost with the root at depth 1: f.D + sum(f)."""
    f = _check_weights(f, T.topology.n)
    D = depths(T)
    return sum(w * d for w, d in zip(f, D)) + sum(f)


def weighted_depth(D: Sequence, f: Sequence) -> Fraction:
    return sum(Fraction(w) * d for w, d in zip(f, D))


def ancestors(T: SearchTree) -> list:
    """anc[v] = set of strict ancestors of v."""
    out = [None] * T.topology.n

    def rec(t, above):
        out[t.root] = above
        below = above | {t.root}
        for c in t.children:
            rec(c, below)

    rec(T, frozenset())
    return out


def lca(T: SearchTree, i: int, j: int) -> int:
    anc = ancestors(T)
    ai = anc[i] | {i}
    aj = anc[j] | {j}
    common = ai & aj
    return max(common, key=lambda v: len(anc[v]))


def induced_point(T: SearchTree) -> InducedPoint:
    U = T.topology
    anc = ancestors(T)
    X = {}
    for i in range(U.n):
        for j in range(U.n):
            if i != j:
                X[(i, j)] = 1 if i in anc[j] else 0
    Z = {}
    for i in range(U.n):
        for j in range(i + 1, U.n):
            inner = U.path(i, j)[1:-1]
            if not inner:
                continue
            common = (anc[i] | {i}) & (anc[j] | {j})
            low = max(common, key=lambda v: len(anc[v]))
            for k in inner:
                Z[(k, i, j)] = 1 if k == low else 0
    return InducedPoint(X, Z, depths(T))


def best_stt(U: Topology, w: Sequence, node_cap: int = DEFAULT_NODE_CAP):
    """Brute-force minimum of w.D over all STTs.

    Returns (witness, value, optimal roots); the witness has the
    lexicographically smallest depth vector among minimizers.
    """
    if U.n > node_cap:
        raise SttError(f"n={U.n} exceeds the brute-force node cap {node_cap}")
    w = _check_weights(w, U.n)
    best = None
    best_D = None
    best_T = None
    roots = set()
    for T in enumerate_stts(U):
        D = depths(T)
        val = weighted_depth(D, w)
        if best is None or val < best:
            best, best_D, best_T, roots = val, D, T, {T.root}
        elif val == best:
            roots.add(T.root)
            if D < best_D:
                best_D, best_T = D, T
    return best_T, best, frozenset(roots)


def optimal_value(U: Topology, w: Sequence, comp: frozenset | None = None) -> Fraction:
    """Exact min of w.D by dynamic programming over components (no cap)."""
    w = [Fraction(x) for x in w]
    comp = frozenset(range(U.n)) if comp is None else frozenset(comp)
    memo = {}

    def rec(C):
        if C in memo:
            return memo[C]
        best = None
        for r in C:
            val = Fraction(0)
            for p in U.components(C - {r}):
                val += rec(p) + sum(w[v] for v in p)
            if best is None or val < best:
                best = val
        memo[C] = best
        return best

    return rec(comp)


def optimal_star_stt(center_weight, leaf_weights: Sequence):
    """Optimal STT on a star (center = node 0, leaf t = node t+1).

    Leaves are queried heaviest first; only the center's position varies.
    Returns (tree, cost) with cost in the root-depth-1 convention.
    """
    fc = Fraction(center_weight)
    leaves = [Fraction(x) for x in leaf_weights]
    if fc < 0 or any(x < 0 for x in leaves):
        raise SttError("weights must be nonnegative")
    m = len(leaves)
    U = star_topology(m + 1)
    order = sorted(range(m), key=lambda t: (-leaves[t], t))
    srt = [leaves[t] for t in order]
    total = fc + sum(srt)
    # option k: k heaviest leaves chained above the center, the rest below it
    prefix = Fraction(0)  # sum_{t<k} t * srt[t]
    suffix = sum(srt)     # sum_{t>=k} srt[t]
    best_k, best_val = None, None
    for k in range(m + 1):
        val = prefix + fc * k + (k + 1) * suffix
        if best_val is None or val < best_val:
            best_k, best_val = k, val
        if k < m:
            prefix += k * srt[k]
            suffix -= srt[k]
    k = best_k
    below = tuple(SearchTree(U, order[t] + 1) for t in sorted(order[k:]))
    node = SearchTree(U, 0, below)
    for t in reversed(range(k)):
        node = SearchTree(U, order[t] + 1, (node,))
    return node, best_val + total


# -- text form ---------------------------------------------------------------

def to_string(T: SearchTree) -> str:
    if not T.children:
        return str(T.root + 1)
    kids = sorted(T.children, key=lambda c: c.root)
    return f"{T.root + 1}(" + ",".join(to_string(c) for c in kids) + ")"


def parse_stt(U: Topology, text: str) -> SearchTree:
    """Inverse of to_string; validates against U."""
    s = text.replace(" ", "")
    pos = 0

    def number():
        nonlocal pos
        start = pos
        while pos < len(s) and s[pos].isdigit():
            pos += 1
        if start == pos:
            raise SttError(f"expected node id at offset {start} in {text!r}")
        v = int(s[start:pos]) - 1
        if not 0 <= v < U.n:
            raise SttError(f"node {v + 1} out of range")
        return v

    def tree():
        nonlocal pos
        r = number()
        kids = []
        if pos < len(s) and s[pos] == "(":
            pos += 1
            kids.append(tree())
            while pos < len(s) and s[pos] == ",":
                pos += 1
                kids.append(tree())
            if pos >= len(s) or s[pos] != ")":
                raise SttError(f"unbalanced parentheses in {text!r}")
            pos += 1
        return SearchTree(U, r, tuple(sorted(kids, key=lambda c: min(c.nodes))))

    T = tree()
    if pos != len(s):
        raise SttError(f"trailing text in {text!r}")
    try:
        validate(T)
    except TopologyError as exc:  # pragma: no cover - defensive
        raise SttError(str(exc)) from None
    return T


def format_depths(D: Sequence) -> str:
    return ",".join(str(Fraction(d)) for d in D)
