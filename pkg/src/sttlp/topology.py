"""Tree topologies: validation, path queries, automorphisms, catalog.

Nodes are 0-based inside the library. Text formats (edge files, catalog
TSV, reports) are 1-based so they line up with the published tables.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class TopologyError(ValueError):
    pass


@dataclass(frozen=True)
class Topology:
    n: int
    edges: frozenset  # of (a, b) with a < b, 0-based
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        adj = [set() for _ in range(self.n)]
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        object.__setattr__(self, "adjacency", tuple(frozenset(s) for s in adj))
        object.__setattr__(self, "_paths", {})

    def __repr__(self):
        label = self.name or f"n={self.n}"
        return f"Topology({label}, edges={format_edges(self)})"

    def __hash__(self):
        return hash((self.n, self.edges))

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def path(self, i: int, j: int) -> tuple:
        """Full node sequence from i to j, both ends included."""
        key = (i, j)
        cached = self._paths.get(key)
        if cached is not None:
            return cached
        parent = {i: None}
        queue = deque([i])
        while queue:
            u = queue.popleft()
            if u == j:
                break
            for v in self.adjacency[u]:
                if v not in parent:
                    parent[v] = u
                    queue.append(v)
        seq = [j]
        while seq[-1] != i:
            seq.append(parent[seq[-1]])
        seq.reverse()
        seq = tuple(seq)
        self._paths[key] = seq
        self._paths[(j, i)] = tuple(reversed(seq))
        return seq

    def components(self, nodes: Iterable[int]) -> list:
        """Connected components of the induced subgraph, as sorted frozensets."""
        remaining = set(nodes)
        out = []
        while remaining:
            start = min(remaining)
            remaining.discard(start)
            comp = {start}
            stack = [start]
            while stack:
                u = stack.pop()
                for v in self.adjacency[u]:
                    if v in remaining:
                        remaining.discard(v)
                        comp.add(v)
                        stack.append(v)
            out.append(frozenset(comp))
        out.sort(key=min)
        return out

    def diameter(self) -> int:
        if self.n == 1:
            return 0
        far = _bfs_far(self, 0)[0]
        return _bfs_far(self, far)[1]


def _bfs_far(U: Topology, src: int):
    dist = {src: 0}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for v in U.adjacency[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    node = max(dist, key=lambda v: (dist[v], -v))
    return node, dist[node]


def from_edges0(n: int, edges: Iterable, name: str | None = None) -> Topology:
    """Build from 0-based edges without the I/O-level checks (internal use)."""
    return Topology(n, frozenset((min(a, b), max(a, b)) for a, b in edges), name)


def parse_topology(edge_list: Sequence, name: str | None = None) -> Topology:
    """Validate a 1-based edge list and build a Topology.

    A single node has no edges, so pass ``[]`` only through ``singleton()``.
    """
    edge_list = [tuple(e) for e in edge_list]
    if not edge_list:
        raise TopologyError("empty edge list; use singleton() for n=1")
    for e in edge_list:
        if len(e) != 2:
            raise TopologyError(f"edge {e!r} is not a pair")
    nodes = {v for e in edge_list for v in e}
    n = max(nodes)
    if min(nodes) < 1 or nodes != set(range(1, n + 1)):
        raise TopologyError(f"nodes must be exactly 1..{n}, got {sorted(nodes)}")
    seen = set()
    for a, b in edge_list:
        if a == b:
            raise TopologyError(f"self-loop at node {a}")
        key = (min(a, b), max(a, b))
        if key in seen:
            raise TopologyError(f"duplicate edge {key}")
        seen.add(key)
    # union-find catches cycles before the edge count check so the
    # diagnostic names the offending edge
    parent = list(range(n + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edge_list:
        ra, rb = find(a), find(b)
        if ra == rb:
            raise TopologyError(f"cycle detected at edge ({a},{b})")
        parent[ra] = rb
    if len(edge_list) != n - 1:
        raise TopologyError(f"disconnected: {n} nodes but {len(edge_list)} edges")
    return from_edges0(n, ((a - 1, b - 1) for a, b in edge_list), name)


def singleton() -> Topology:
    return Topology(1, frozenset())


def read_topology_file(path) -> Topology:
    """Edge file: first line ``n``, then one ``i j`` pair per line (1-based)."""
    with open(path) as fh:
        lines = [ln.split("#")[0].strip() for ln in fh]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise TopologyError(f"{path}: empty file")
    try:
        n = int(lines[0])
        edges = [tuple(int(t) for t in ln.split()) for ln in lines[1:]]
    except ValueError as exc:
        raise TopologyError(f"{path}: {exc}") from None
    if n == 1 and not edges:
        return singleton()
    U = parse_topology(edges)
    if U.n != n:
        raise TopologyError(f"{path}: header says n={n} but edges cover {U.n} nodes")
    return U


def write_topology_file(U: Topology, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{U.n}\n")
        for a, b in sorted(U.edges):
            fh.write(f"{a + 1} {b + 1}\n")


def format_edges(U: Topology) -> str:
    return ", ".join(f"({a + 1},{b + 1})" for a, b in sorted(U.edges))


def path_between(U: Topology, i: int, j: int) -> tuple:
    """Interior of the tree path from i to j, ordered from the i side."""
    if i == j:
        raise TopologyError("path_between needs two distinct nodes")
    if not (0 <= i < U.n and 0 <= j < U.n):
        raise TopologyError(f"node out of range for n={U.n}")
    return U.path(i, j)[1:-1]


# -- isomorphism -------------------------------------------------------------

def _centers(U: Topology) -> list:
    if U.n <= 2:
        return list(range(U.n))
    deg = [U.degree(v) for v in range(U.n)]
    layer = [v for v in range(U.n) if deg[v] == 1]
    left = U.n
    while left > 2:
        left -= len(layer)
        nxt = []
        for v in layer:
            for w in U.adjacency[v]:
                deg[w] -= 1
                if deg[w] == 1:
                    nxt.append(w)
        layer = nxt
    return sorted(layer)


def _ahu(U: Topology, root: int, parent: int | None) -> str:
    kids = sorted(_ahu(U, c, root) for c in U.adjacency[root] if c != parent)
    return "(" + "".join(kids) + ")"


def canonical_form(U: Topology) -> str:
    """Isomorphism-invariant string (AHU encoding rooted at the center)."""
    return min(_ahu(U, c, None) for c in _centers(U))


def is_isomorphic(U: Topology, V: Topology) -> bool:
    return U.n == V.n and canonical_form(U) == canonical_form(V)


def _extend_maps(U: Topology, V: Topology, order, mapping, used, out, first_only):
    if len(mapping) == len(order):
        out.append(tuple(mapping[v] for v in range(U.n)))
        return first_only
    u = order[len(mapping)]
    for w in range(V.n):
        if w in used or V.degree(w) != U.degree(u):
            continue
        ok = True
        for x, y in mapping.items():
            if (x in U.adjacency[u]) != (y in V.adjacency[w]):
                ok = False
                break
        if not ok:
            continue
        mapping[u] = w
        used.add(w)
        stop = _extend_maps(U, V, order, mapping, used, out, first_only)
        del mapping[u]
        used.discard(w)
        if stop:
            return True
    return False


def _bfs_order(U: Topology) -> list:
    if U.n == 0:
        return []
    start = max(range(U.n), key=lambda v: (U.degree(v), -v))
    seen = [start]
    mark = {start}
    k = 0
    while k < len(seen):
        for w in sorted(U.adjacency[seen[k]]):
            if w not in mark:
                mark.add(w)
                seen.append(w)
        k += 1
    return seen


def find_isomorphism(U: Topology, V: Topology):
    """A node map U -> V as a tuple (image of node v at index v), or None."""
    if U.n != V.n or canonical_form(U) != canonical_form(V):
        return None
    out = []
    _extend_maps(U, V, _bfs_order(U), {}, set(), out, True)
    return out[0] if out else None


def automorphisms(U: Topology) -> list:
    """The full automorphism group as node-image tuples, identity first."""
    out = []
    _extend_maps(U, U, _bfs_order(U), {}, set(), out, False)
    out.sort()
    return out


def relabel(U: Topology, perm: Sequence[int], name: str | None = None) -> Topology:
    return from_edges0(U.n, ((perm[a], perm[b]) for a, b in U.edges), name)


# -- constructions -----------------------------------------------------------

def extend(U: Topology, leaf_at: int | None = None, subdivide=None) -> Topology:
    """Add node ``U.n`` as a new leaf or by subdividing an existing edge."""
    if (leaf_at is None) == (subdivide is None):
        raise TopologyError("give exactly one of leaf_at / subdivide")
    new = U.n
    edges = set(U.edges)
    if leaf_at is not None:
        if not 0 <= leaf_at < U.n:
            raise TopologyError(f"unknown node {leaf_at}")
        edges.add((leaf_at, new))
    else:
        a, b = subdivide
        key = (min(a, b), max(a, b))
        if key not in U.edges:
            raise TopologyError(f"unknown edge {subdivide}")
        edges.discard(key)
        edges.add((key[0], new))
        edges.add((key[1], new))
    return from_edges0(U.n + 1, edges)


def shrink(U: Topology, node: int) -> Topology:
    """Inverse of extend: drop a leaf, or splice out a degree-2 node.

    Nodes above ``node`` shift down by one.
    """
    deg = U.degree(node)
    if deg not in (1, 2):
        raise TopologyError(f"node {node} has degree {deg}; only leaves or degree-2 nodes shrink")
    edges = {e for e in U.edges if node not in e}
    if deg == 2:
        a, b = sorted(U.adjacency[node])
        edges.add((a, b))

    def shift(v):
        return v - 1 if v > node else v

    return from_edges0(U.n - 1, ((shift(a), shift(b)) for a, b in edges))


def combine(parts: Sequence[Topology], attach: Sequence[int]):
    """Disjoint union of ``parts`` plus a fresh node joined to one node of each.

    Returns ``(topology, offsets, r)``: part k's node v becomes
    ``offsets[k] + v`` and ``r`` is the new center (the last node).
    """
    if len(parts) < 2:
        raise TopologyError("combine needs at least two parts")
    if len(attach) != len(parts):
        raise TopologyError("one attach node per part")
    offsets = []
    edges = []
    total = 0
    for part, a in zip(parts, attach):
        if not 0 <= a < part.n:
            raise TopologyError(f"attach node {a} outside part of size {part.n}")
        offsets.append(total)
        edges.extend((x + total, y + total) for x, y in part.edges)
        total += part.n
    r = total
    for off, a in zip(offsets, attach):
        edges.append((off + a, r))
    return from_edges0(total + 1, edges), tuple(offsets), r


def path_topology(n: int) -> Topology:
    if n == 1:
        return singleton()
    return from_edges0(n, ((i, i + 1) for i in range(n - 1)), f"P{n}")


def star_topology(n: int) -> Topology:
    """Star on n nodes with the center at node 0."""
    if n == 1:
        return singleton()
    return from_edges0(n, ((0, i) for i in range(1, n)), f"S{n}")


# -- catalog -----------------------------------------------------------------

# Explicit edge lists (1-based) per catalog name; within one size the order is
# non-increasing diameter with the published tie order.
CATALOG_EDGES = {
    (2, 0): [(1, 2)],
    (3, 0): [(1, 2), (2, 3)],
    (4, 0): [(1, 2), (2, 3), (3, 4)],
    (4, 1): [(1, 2), (2, 3), (2, 4)],
    (5, 0): [(1, 2), (2, 3), (3, 4), (4, 5)],
    (5, 1): [(1, 2), (2, 3), (2, 5), (3, 4)],
    (5, 2): [(1, 2), (2, 3), (2, 4), (2, 5)],
    (6, 0): [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6)],
    (6, 1): [(1, 2), (2, 3), (2, 6), (3, 4), (4, 5)],
    (6, 2): [(1, 2), (2, 3), (3, 4), (3, 6), (4, 5)],
    (6, 3): [(1, 2), (2, 3), (2, 5), (3, 4), (3, 6)],
    (6, 4): [(1, 2), (2, 3), (2, 5), (2, 6), (3, 4)],
    (6, 5): [(1, 2), (2, 3), (2, 4), (2, 5), (2, 6)],
    (7, 0): [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7)],
    (7, 1): [(1, 2), (2, 3), (2, 7), (3, 4), (4, 5), (5, 6)],
    (7, 2): [(1, 2), (2, 3), (3, 4), (3, 7), (4, 5), (5, 6)],
    (7, 3): [(1, 2), (2, 3), (3, 4), (3, 6), (4, 5), (6, 7)],
    (7, 4): [(1, 2), (2, 3), (3, 4), (4, 5), (4, 6), (4, 7)],
    (7, 5): [(1, 2), (2, 3), (3, 4), (3, 6), (4, 5), (4, 7)],
    (7, 6): [(1, 2), (2, 3), (3, 4), (3, 6), (3, 7), (4, 5)],
    (7, 7): [(1, 2), (2, 3), (2, 6), (3, 4), (4, 5), (4, 7)],
    (7, 8): [(1, 2), (2, 3), (2, 5), (3, 4), (3, 6), (3, 7)],
    (7, 9): [(1, 2), (2, 3), (3, 4), (3, 5), (3, 6), (3, 7)],
    (7, 10): [(1, 2), (2, 3), (2, 4), (2, 5), (2, 6), (2, 7)],
    (8, 0): [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8)],
    (8, 1): [(1, 2), (2, 3), (2, 8), (3, 4), (4, 5), (5, 6), (6, 7)],
    (8, 2): [(1, 2), (2, 3), (3, 4), (3, 8), (4, 5), (5, 6), (6, 7)],
    (8, 3): [(1, 2), (2, 3), (3, 4), (4, 5), (4, 8), (5, 6), (6, 7)],
    (8, 4): [(1, 2), (2, 3), (3, 4), (3, 7), (4, 5), (5, 6), (7, 8)],
    (8, 5): [(1, 2), (2, 3), (2, 7), (3, 4), (3, 8), (4, 5), (5, 6)],
    (8, 6): [(1, 2), (2, 3), (2, 7), (3, 4), (4, 5), (4, 8), (5, 6)],
    (8, 7): [(1, 2), (2, 3), (3, 4), (3, 7), (4, 5), (4, 8), (5, 6)],
    (8, 8): [(1, 2), (2, 3), (2, 7), (2, 8), (3, 4), (4, 5), (5, 6)],
    (8, 9): [(1, 2), (2, 3), (3, 4), (3, 7), (3, 8), (4, 5), (5, 6)],
    (8, 10): [(1, 2), (2, 3), (2, 7), (3, 4), (4, 5), (5, 6), (5, 8)],
    (8, 11): [(1, 2), (2, 3), (3, 4), (3, 6), (3, 7), (4, 5), (7, 8)],
    (8, 12): [(1, 2), (2, 3), (2, 6), (3, 4), (3, 7), (4, 5), (7, 8)],
    (8, 13): [(1, 2), (2, 3), (2, 6), (3, 4), (3, 7), (4, 5), (4, 8)],
    (8, 14): [(1, 2), (2, 3), (2, 6), (2, 7), (3, 4), (3, 8), (4, 5)],
    (8, 15): [(1, 2), (2, 3), (2, 6), (3, 4), (3, 7), (3, 8), (4, 5)],
    (8, 16): [(1, 2), (2, 3), (2, 6), (3, 4), (4, 5), (4, 7), (4, 8)],
    (8, 17): [(1, 2), (2, 3), (3, 4), (3, 6), (3, 7), (3, 8), (4, 5)],
    (8, 18): [(1, 2), (2, 3), (2, 6), (2, 7), (2, 8), (3, 4), (4, 5)],
    (8, 19): [(1, 2), (2, 3), (2, 5), (2, 6), (3, 4), (3, 7), (3, 8)],
    (8, 20): [(1, 2), (2, 3), (2, 5), (2, 6), (2, 7), (3, 4), (3, 8)],
    (8, 21): [(1, 2), (2, 3), (2, 5), (2, 6), (2, 7), (2, 8), (3, 4)],
    (8, 22): [(1, 2), (2, 3), (2, 4), (2, 5), (2, 6), (2, 7), (2, 8)],
}

CATALOG_MAX_N = 8


def catalog_name(n: int, i: int) -> str:
    return f"U_{n}_{i}"


def parse_catalog_name(name: str) -> tuple:
    """Accepts ``U_7_3``, ``U_(7,3)``, ``(7,3)`` or ``7,3``."""
    s = name.strip()
    if s.startswith("U_"):
        s = s[2:]
    s = s.strip("()").replace("_", ",")
    try:
        n, i = (int(t) for t in s.split(","))
    except ValueError:
        raise TopologyError(f"unrecognized topology name {name!r}") from None
    if (n, i) not in CATALOG_EDGES:
        raise TopologyError(f"no catalog topology {name!r}")
    return n, i


def catalog_topology(name) -> Topology:
    key = name if isinstance(name, tuple) else parse_catalog_name(name)
    return parse_topology(CATALOG_EDGES[key], name=catalog_name(*key))


def catalog(n: int | None = None) -> list:
    keys = sorted(CATALOG_EDGES) if n is None else sorted(k for k in CATALOG_EDGES if k[0] == n)
    return [catalog_topology(k) for k in keys]


def identify(U: Topology):
    """Catalog key of the topology isomorphic to U, or None."""
    if U.n > CATALOG_MAX_N or U.n < 2:
        return None
    form = canonical_form(U)
    for key in sorted(CATALOG_EDGES):
        if key[0] == U.n and canonical_form(catalog_topology(key)) == form:
            return key
    return None


def _generate_trees(n: int) -> list:
    """One representative per isomorphism class, built by leaf extension."""
    level = {canonical_form(path_topology(2)): path_topology(2)}
    for m in range(3, n + 1):
        nxt = {}
        for U in level.values():
            for v in range(U.n):
                V = extend(U, leaf_at=v)
                nxt.setdefault(canonical_form(V), V)
        level = nxt
    return list(level.values())


def enumerate_topologies(n: int) -> list:
    """All trees on n nodes up to isomorphism, by non-increasing diameter.

    For n within the catalog the published representatives and order are
    returned; every generated class is matched against the catalog, so a
    mismatch surfaces as an error rather than a silently different list.
    """
    if n < 2:
        raise TopologyError("enumerate_topologies needs n >= 2")
    trees = _generate_trees(n)
    if n <= CATALOG_MAX_N:
        cat = catalog(n)
        forms = {canonical_form(U): U for U in cat}
        if set(forms) != {canonical_form(T) for T in trees} or len(forms) != len(cat):
            raise AssertionError(f"catalog for n={n} disagrees with generated trees")
        return cat
    keyed = sorted(trees, key=lambda U: (-U.diameter(), canonical_form(U)))
    return [from_edges0(U.n, U.edges, catalog_name(n, i)) for i, U in enumerate(keyed)]


def catalog_tsv() -> str:
    lines = ["name\tdiameter\tedges"]
    for U in catalog():
        lines.append(f"{U.name}\t{U.diameter()}\t{format_edges(U)}")
    return "\n".join(lines) + "\n"


def induced(U: Topology, nodes) -> tuple:
    """Subtree induced by a connected node set, relabeled 0..k-1.

    Returns ``(topology, order)`` where ``order[k]`` is the original node.
    """
    order = sorted(nodes)
    pos = {v: k for k, v in enumerate(order)}
    edges = [(pos[a], pos[b]) for a, b in U.edges if a in pos and b in pos]
    if len(edges) != len(order) - 1:
        raise TopologyError("node set is not connected")
    if len(order) == 1:
        return singleton(), tuple(order)
    return from_edges0(len(order), edges), tuple(order)
