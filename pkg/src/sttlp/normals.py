"""The normals method: hull facets of STT depth vectors as LP directions."""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exactsolver import Solver
from .lpmodel import build_primal, format_rational
from .polytope import dominance_hull_facets, point_below_facet
from .stt import count_stts, depth_vectors
from .topology import Topology, automorphisms, from_edges0

# directions per solver instance; fixed so results do not depend on --jobs
CHUNK = 512


@dataclass
class NewVertex:
    D: tuple
    point: tuple
    directions: list = field(default_factory=list)  # facet normals revealing it

    @property
    def integer(self) -> bool:
        return all(Fraction(x).denominator == 1 for x in self.D)


@dataclass
class ScanReport:
    topology: str
    n: int
    phase: int
    stt_count: int
    primary_direction_count: int
    false_facet_count: int
    false_facets: list            # [(Facet, lp_value)]
    new_vertices: list            # [NewVertex], sorted by D
    vertex_classes: int
    orbit_sizes: list
    denominators_D: frozenset
    denominators_XZD: frozenset
    complete: bool = True
    notes: list = field(default_factory=list)
    known_vertices: list = field(default_factory=list)  # D-vectors fed to the hull beyond STTs

    @property
    def fractional_vertices(self) -> list:
        return [v for v in self.new_vertices if not v.integer]

    def all_discovered(self) -> list:
        seen = {tuple(v) for v in self.known_vertices}
        seen.update(v.D for v in self.new_vertices)
        return sorted(seen)


def denominators(points) -> frozenset:
    out = set()
    for p in points:
        for x in p:
            out.add(Fraction(x).denominator)
    return frozenset(out) or frozenset({1})


def orbit_classes(vertices: Sequence, U: Topology) -> list:
    """Partition D-vectors into automorphism orbits (sorted, deterministic)."""
    group = automorphisms(U)
    remaining = {tuple(v) for v in vertices}
    orbits = []
    for v in sorted(remaining):
        if v not in remaining:
            continue
        orbit = set()
        for pi in group:
            img = [None] * len(v)
            for node, d in enumerate(v):
                img[pi[node]] = d
            img = tuple(img)
            if img in remaining:
                orbit.add(img)
        remaining -= orbit
        orbits.append(sorted(orbit))
    return orbits


def _scan_chunk(args):
    n, edges, normals = args
    U = from_edges0(n, edges)
    model = build_primal(U)
    solver = Solver(model)
    tiebreak = model.objective_on("D", [1] * n)
    out = []
    for normal in normals:
        res = solver.optimize(model.objective_on("D", normal), "min", tiebreak=tiebreak)
        out.append((res.value, res.point))
    return out


def scan(U: Topology, extra_points: Sequence = (), phase: int = 1, jobs: int = 1,
         budget_seconds: float | None = None, max_facets: int | None = None,
         backend: str | None = None) -> ScanReport:
    """Solve the primal LP in every conv+ facet direction and collect false facets."""
    start = time.monotonic()
    name = U.name or f"n={U.n}"
    stt_D = depth_vectors(U)
    extra = sorted({tuple(Fraction(x) for x in p) for p in extra_points})
    facets = dominance_hull_facets(stt_D + extra, backend=backend)
    notes = []
    complete = True
    if max_facets is not None and len(facets) > max_facets:
        notes.append(f"facet budget exceeded: {len(facets)} > {max_facets}")
        return ScanReport(name, U.n, phase, count_stts(U), len(facets), 0, [], [], 0, [],
                          frozenset(), frozenset(), False, notes, extra)
    edges = sorted(U.edges)
    chunks = [facets[k:k + CHUNK] for k in range(0, len(facets), CHUNK)]
    tasks = [(U.n, edges, [f.normal for f in c]) for c in chunks]
    results = []
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part in pool.map(_scan_chunk, tasks):
                results.extend(part)
                if budget_seconds and time.monotonic() - start > budget_seconds:
                    complete = False
                    break
    else:
        for task in tasks:
            results.extend(_scan_chunk(task))
            if budget_seconds and time.monotonic() - start > budget_seconds:
                complete = False
                break
    if not complete:
        notes.append(f"time budget exceeded after {len(results)} of {len(facets)} directions")
    model = build_primal(U)
    false_facets = []
    found = {}
    for facet, (value, point) in zip(facets, results):
        if value < facet.offset:
            false_facets.append((facet, value))
            D = model.project_D(point)
            if not point_below_facet(facet, D):  # pragma: no cover - invariant
                notes.append(f"solution not below facet {facet.normal}")
            nv = found.setdefault(D, NewVertex(D, point))
            nv.directions.append(facet.normal)
        elif value != facet.offset:  # pragma: no cover - STT points are feasible
            notes.append(f"LP value above facet offset for {facet.normal}")
    new_vertices = [found[D] for D in sorted(found)]
    orbits = orbit_classes([v.D for v in new_vertices], U)
    for v in new_vertices:
        if v.integer:
            notes.append(f"integer D-vector below a facet: {v.D}")
        elif any(Fraction(x).denominator > 2 for x in v.D):
            notes.append(f"non-half-integer vertex: {v.D}")
    return ScanReport(
        topology=name, n=U.n, phase=phase, stt_count=count_stts(U),
        primary_direction_count=len(facets), false_facet_count=len(false_facets),
        false_facets=false_facets, new_vertices=new_vertices, vertex_classes=len(orbits),
        orbit_sizes=[len(o) for o in orbits],
        denominators_D=denominators([v.D for v in new_vertices]),
        denominators_XZD=denominators([v.point for v in new_vertices]),
        complete=complete, notes=notes, known_vertices=extra)


def iterate(U: Topology, prior: ScanReport, **kw) -> ScanReport:
    """Next phase: rescan with every vertex discovered so far added to the hull."""
    if not prior.complete:
        raise ValueError("prior phase is incomplete")
    rep = scan(U, extra_points=prior.all_discovered(), phase=prior.phase + 1, **kw)
    rep.known_vertices = prior.all_discovered()
    return rep


def iterate_to_closure(U: Topology, max_phases: int = 5, **kw) -> list:
    reports = [scan(U, **kw)]
    while reports[-1].complete and reports[-1].false_facet_count and len(reports) < max_phases:
        reports.append(iterate(U, reports[-1], **kw))
    return reports


def scan_points(points: Sequence, extra: Sequence) -> tuple:
    """Synthetic normals check: facets of ``points`` and which ``extra`` points cut them."""
    facets = dominance_hull_facets(points)
    false = [f for f in facets if any(point_below_facet(f, p) for p in extra)]
    return facets, false


# -- serialization -----------------------------------------------------------

TSV_HEADER = "topology\tphase\tstts\tprimary_directions\tfalse_facets\tfrac_vertices\tclasses\tD_denoms\tXZD_denoms\tcomplete"


def _denoms(s) -> str:
    return "{" + ",".join(str(d) for d in sorted(s)) + "}"


def report_tsv_row(rep: ScanReport) -> str:
    return "\t".join([rep.topology, str(rep.phase), str(rep.stt_count),
                      str(rep.primary_direction_count), str(rep.false_facet_count),
                      str(len(rep.fractional_vertices)), str(rep.vertex_classes),
                      _denoms(rep.denominators_D), _denoms(rep.denominators_XZD),
                      "yes" if rep.complete else "no"])


def report_dict(rep: ScanReport) -> dict:
    fr = format_rational
    return {
        "topology": rep.topology,
        "phase": rep.phase,
        "stt_count": rep.stt_count,
        "primary_direction_count": rep.primary_direction_count,
        "false_facet_count": rep.false_facet_count,
        "false_facets": [{"normal": list(f.normal), "offset": fr(f.offset), "lp_value": fr(v)}
                         for f, v in rep.false_facets],
        "new_vertices": [{"D": [fr(x) for x in v.D],
                          "directions": [list(d) for d in v.directions]}
                         for v in rep.new_vertices],
        "vertex_classes": rep.vertex_classes,
        "orbit_sizes": rep.orbit_sizes,
        "denominators_D": sorted(rep.denominators_D),
        "denominators_XZD": sorted(rep.denominators_XZD),
        "complete": rep.complete,
        "notes": rep.notes,
    }


def report_json(rep: ScanReport) -> str:
    return json.dumps(report_dict(rep), indent=2, sort_keys=True)
