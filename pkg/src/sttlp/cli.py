"""Command-line driver: reproducible experiments with TSV or JSON reports."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction

from . import __version__
from .analysis import (AnalysisError, audit_weak_duality, census, denominator_profile,
                       gap_for_direction, integrality_gap, max_denominator, sample_directions)
from .exactsolver import PivotLimitExceeded, Solver, SolverError, is_vertex, solve
from .lpmodel import (DEFAULT_EPSILON, FAMILIES, ModelError, build_dual, build_primal,
                      build_refined, build_z_eliminated, check_feasible, format_rational,
                      lift_point, stt_point)
from .normals import iterate, report_dict, report_tsv_row, scan, TSV_HEADER
from .polytope import PolytopeError, enumerate_vertices
from .reference import (COUNTEREXAMPLE_LP, COUNTEREXAMPLE_STT, COUNTEREXAMPLE_WEIGHTS,
                        counterexample_topology, fig5_point)
from .rounding import BudgetExceeded, RoundingError, bc_ratio_search, ratio_row, wc_over_primary
from .stt import SttError, best_stt, count_stts, enumerate_stts, optimal_value, to_string
from .topology import (Topology, TopologyError, catalog, catalog_topology, catalog_tsv,
                       identify, path_topology, read_topology_file)

FORMAT_VERSION = "sttlp-report/1"

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_VERIFY = 0, 2, 3, 4

log = logging.getLogger("sttlp")


class UsageError(ValueError):
    pass


class VerificationFailure(RuntimeError):
    pass


def decimal4(x) -> str:
    """Four places, half-even."""
    x = Fraction(x)
    with localcontext() as ctx:
        ctx.prec = 60
        d = Decimal(x.numerator) / Decimal(x.denominator)
        return str(d.quantize(Decimal("0.0001"), rounding=ROUND_HALF_EVEN))


def rational(x) -> str:
    return format_rational(Fraction(x))


def both(x) -> str:
    return f"{rational(x)} ({decimal4(x)})"


def vec(v) -> str:
    return "(" + ",".join(rational(x) for x in v) + ")"


# -- config ------------------------------------------------------------------

@dataclass
class RunConfig:
    subcommand: str
    topology: str | None = None
    edges: str | None = None
    weights: tuple | None = None
    model: str = "primal"
    families: tuple = ()
    long: bool = False
    jobs: int = 1
    seed: int = 0
    budget: float | None = None
    out: str | None = None
    format: str = "tsv"
    extra: dict = field(default_factory=dict)

    def validate(self):
        if self.topology and self.edges:
            raise UsageError("give either --topology or --edges, not both")
        if self.jobs < 1:
            raise UsageError("--jobs must be positive")
        if self.budget is not None and self.budget <= 0:
            raise UsageError("--budget must be positive")
        if self.model not in ("primal", "refined", "no-z", "dual"):
            raise UsageError(f"unknown model {self.model!r}")
        bad = [f for f in self.families if f not in FAMILIES]
        if bad:
            raise UsageError(f"unknown families {bad}; choose from {', '.join(FAMILIES)}")

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("out")  # output location does not change the report
        if d["weights"] is not None:
            d["weights"] = [rational(w) for w in d["weights"]]
        d["families"] = list(d["families"])
        return d


def parse_weights(text: str) -> tuple:
    try:
        out = tuple(Fraction(t.strip()) for t in text.replace(" ", "").strip("()").split(",") if t)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"malformed weights {text!r}") from None
    if not out:
        raise UsageError("empty weight vector")
    if any(w < 0 for w in out):
        raise UsageError("weights must be nonnegative")
    return out


def load_topology(cfg: RunConfig, default: str | None = None) -> Topology:
    try:
        if cfg.edges:
            return read_topology_file(cfg.edges)
        name = cfg.topology or default
        if name is None:
            raise UsageError("a topology is required (--topology or --edges)")
        if name.startswith("path-"):
            return path_topology(int(name[5:]))
        return catalog_topology(name)
    except (TopologyError, KeyError, ValueError) as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"bad topology: {exc}") from None


def topo_name(U: Topology) -> str:
    if U.name:
        return U.name
    key = identify(U)
    return f"n={U.n}" if key is None else f"n={U.n}~U_{key[0]}_{key[1]}"


def need_weights(cfg: RunConfig, U: Topology) -> tuple:
    if cfg.weights is None:
        raise UsageError("--weights is required")
    if len(cfg.weights) != U.n:
        raise UsageError(f"{len(cfg.weights)} weights for {U.n} nodes")
    return cfg.weights


def make_model(cfg: RunConfig, U: Topology):
    if cfg.model == "primal":
        return build_primal(U)
    if cfg.model == "refined":
        return build_refined(U, cfg.families or FAMILIES)
    if cfg.model == "no-z":
        m = build_z_eliminated(U)
        return build_refined(U, cfg.families, base=m) if cfg.families else m
    raise UsageError("use the dual subcommand for the dual model")


# -- reports -----------------------------------------------------------------

class Report:
    """Table + key/value report rendered deterministically."""

    def __init__(self, cfg: RunConfig, title: str):
        self.cfg = cfg
        self.title = title
        self.fields = {}
        self.header = None
        self.rows = []
        self.data = {}

    def set(self, key, value):
        self.fields[key] = value

    def table(self, header, rows):
        self.header = list(header)
        self.rows = [list(r) for r in rows]

    def render(self) -> str:
        if self.cfg.format == "json":
            doc = {"format_version": FORMAT_VERSION, "config": self.cfg.as_dict(),
                   "report": self.title, "fields": self.fields}
            if self.header is not None:
                doc["columns"] = self.header
                doc["rows"] = self.rows
            if self.data:
                doc["data"] = self.data
            return json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n"
        lines = [f"# format: {FORMAT_VERSION}", f"# report: {self.title}",
                 "# config: " + json.dumps(self.cfg.as_dict(), sort_keys=True)]
        for k, v in self.fields.items():
            lines.append(f"{k}\t{v}")
        if self.header is not None:
            if self.fields:
                lines.append("")
            lines.append("\t".join(self.header))
            lines.extend("\t".join(str(c) for c in r) for r in self.rows)
        return "\n".join(lines) + "\n"

    def emit(self, stream) -> None:
        text = self.render()
        stream.write(text)
        if self.cfg.out:
            os.makedirs(self.cfg.out, exist_ok=True)
            tag = self.cfg.topology or (os.path.basename(self.cfg.edges) if self.cfg.edges else "all")
            fn = f"{self.cfg.subcommand}-{tag}.{self.cfg.format}".replace("/", "_")
            with open(os.path.join(self.cfg.out, fn), "w") as fh:
                fh.write(text)


# -- subcommands -------------------------------------------------------------

def cmd_catalog(cfg: RunConfig) -> Report:
    rep = Report(cfg, "catalog")
    rows = [ln.split("\t") for ln in catalog_tsv().splitlines()]
    rep.table(rows[0], rows[1:])
    return rep


def cmd_stts(cfg: RunConfig) -> Report:
    rep = Report(cfg, "stt-counts")
    if cfg.topology or cfg.edges:
        tops = [load_topology(cfg)]
    else:
        limit = 8 if cfg.long else 7
        tops = [U for U in catalog() if U.n <= limit]
    rep.table(["topology", "n", "diameter", "stts"],
              [[topo_name(U), U.n, U.diameter(), count_stts(U)] for U in tops])
    return rep


def cmd_solve(cfg: RunConfig) -> Report:
    U = load_topology(cfg)
    w = need_weights(cfg, U)
    model = make_model(cfg, U)
    res = solve(model, model.objective_on("D", w), "min")
    if not res.optimal:
        raise VerificationFailure(f"LP status {res.status}")
    # settle D on the optimal face deterministically
    if not model.implicit:
        res = Solver(model).optimize(model.objective_on("D", w), "min",
                                     tiebreak=model.objective_on("D", [1] * U.n))
    rep = Report(cfg, "solve")
    D = model.project_D(res.point)
    rep.set("topology", topo_name(U))
    rep.set("model", model.flavor)
    rep.set("value", both(res.value))
    rep.set("D", vec(D))
    rep.set("integral", "yes" if max_denominator(res.point) == 1 else "no")
    rep.set("denominators", sorted(denominator_profile([res.point])))
    if not model.implicit:
        rep.set("vertex", "PASS" if is_vertex(model, res.point) else "FAIL")
    rep.set("unique", "yes" if res.unique else "no")
    rep.table(["variable", "value"],
              [[v.name(), rational(x)] for v, x in zip(model.variables, res.point) if x != 0])
    return rep


def cmd_verify_counterexample(cfg: RunConfig) -> Report:
    U = counterexample_topology()
    w = COUNTEREXAMPLE_WEIGHTS
    m = build_primal(U)
    P = fig5_point(m)
    checks = []
    res = Solver(m).optimize(m.objective_on("D", w), "min",
                             tiebreak=m.objective_on("D", [1] * U.n))
    checks.append(("lp-value", res.value == COUNTEREXAMPLE_LP, both(res.value)))
    checks.append(("lp-optimum-is-published-point", m.project_D(res.point) == m.project_D(P),
                   vec(m.project_D(res.point))))
    best = optimal_value(U, w)
    checks.append(("stt-best", best == COUNTEREXAMPLE_STT, rational(best)))
    gap = (best + sum(w)) / (res.value + sum(w))
    raw = best / res.value
    checks.append(("gap", raw == Fraction(60, 59), f"{both(raw)} cost-convention {both(gap)}"))
    bad = check_feasible(m, P)
    checks.append(("feasibility", not bad, "; ".join(bad[:3]) or "all rows hold"))
    checks.append(("vertex", is_vertex(m, P), "tight rows have full rank"))
    rm = build_refined(U, FAMILIES)
    bad = check_feasible(rm, lift_point(rm, m, P))
    checks.append(("refined-families", not bad, "; ".join(bad[:3]) or ", ".join(FAMILIES)))
    rep = Report(cfg, "verify-counterexample")
    rep.set("topology", topo_name(U))
    rep.set("weights", vec(w))
    rep.set("lp_value", both(res.value))
    rep.set("stt_best", rational(best))
    rep.set("gap", rational(raw))
    rep.table(["check", "result", "detail"],
              [[c, "PASS" if ok else "FAIL", d] for c, ok, d in checks])
    rep.failed = [c for c, ok, _ in checks if not ok]
    return rep


def _scan_chain(cfg: RunConfig, U: Topology):
    phases = int(cfg.extra.get("phase", 1))
    reports = [scan(U, jobs=cfg.jobs, budget_seconds=cfg.budget,
                    max_facets=cfg.extra.get("max_facets"))]
    while len(reports) < phases and reports[-1].complete and reports[-1].false_facet_count:
        reports.append(iterate(U, reports[-1], jobs=cfg.jobs, budget_seconds=cfg.budget))
    return reports


def cmd_normals(cfg: RunConfig) -> Report:
    U = load_topology(cfg)
    reports = _scan_chain(cfg, U)
    rep = Report(cfg, "normals")
    rep.table(TSV_HEADER.split("\t"), [report_tsv_row(r).split("\t") for r in reports])
    rep.data = {"phases": [report_dict(r) for r in reports]}
    verts = []
    for r in reports:
        for v in r.new_vertices:
            verts.append([r.phase, vec(v.D), len(v.directions)])
    if cfg.format == "tsv" and verts:
        rep.rows.append([])
        rep.rows.append(["phase", "new_vertex_D", "revealing_directions"])
        rep.rows.extend(verts)
    rep.incomplete = not all(r.complete for r in reports)
    return rep


def cmd_gap(cfg: RunConfig) -> Report:
    U = load_topology(cfg)
    rep = Report(cfg, "gap")
    cols = ["topology", "direction", "lp", "stt", "raw_ratio", "cost_ratio", "additive"]

    def row(g, tag):
        return [topo_name(U), vec(g.direction), both(g.lp_value), rational(g.stt_value),
                both(g.raw_ratio), both(g.gap_ratio), rational(g.additive_gap), tag]

    if cfg.weights is not None:
        g = gap_for_direction(U, need_weights(cfg, U))
        rep.table(cols + ["selection"], [row(g, "given")])
        return rep
    reports = _scan_chain(cfg, U)
    rep.incomplete = not reports[-1].complete
    by_ratio, by_add, table = integrality_gap(U, reports[-1])
    rows = [row(by_ratio, "max-ratio"), row(by_add, "max-additive")]
    if cfg.extra.get("all"):
        rows += [row(g, "primary") for g in table]
    rep.table(cols + ["selection"], rows)
    return rep


def _ratio_cols(r):
    s = r.weight_sum
    return [f"{rational(r.opt_cost)}/{rational(s)}", f"{rational(r.bc_cost)}/{rational(s)}",
            f"{rational(r.wc_cost)}/{rational(s)}", both(r.bc_ratio), both(r.wc_ratio)]


def cmd_round(cfg: RunConfig) -> Report:
    U = load_topology(cfg)
    model = build_primal(U)
    rep = Report(cfg, "round")
    cols = ["topology", "direction", "source", "opt_cost", "bc_cost", "wc_cost", "bc_ratio", "wc_ratio"]
    rows = []
    if cfg.weights is not None:
        w = need_weights(cfg, U)
        r = ratio_row(U, w, model=model)
        rows.append([topo_name(U), vec(w), "lp-optimum"] + _ratio_cols(r))
        if cfg.extra.get("search") or cfg.extra.get("primary"):
            raise UsageError("--weights cannot be combined with --search/--primary")
    else:
        reports = _scan_chain(cfg, U)
        rep.incomplete = not reports[-1].complete
        last = reports[-1]
        if cfg.extra.get("primary"):
            for r in wc_over_primary(U, last, model):
                rows.append([topo_name(U), vec(r.direction), "primary"] + _ratio_cols(r))
        else:
            eps = DEFAULT_EPSILON if cfg.extra.get("epsilon") else Fraction(0)
            for v in last.fractional_vertices:
                res = bc_ratio_search(U, v.point, model, epsilon=eps)
                if res.row is None:
                    continue
                rows.append([topo_name(U), vec(res.direction), f"bc-search from D={vec(v.D)}"]
                            + _ratio_cols(res.row))
    rep.table(cols, rows)
    return rep


def cmd_dual(cfg: RunConfig) -> Report:
    U = load_topology(cfg)
    f = need_weights(cfg, U)
    pm = build_primal(U)
    dm = build_dual(U, f)
    p = solve(pm, pm.objective_on("D", f), "min")
    d = solve(dm)
    if not (p.optimal and d.optimal):
        raise VerificationFailure(f"primal {p.status}, dual {d.status}")
    T, best, _ = best_stt(U, f) if U.n <= 8 else (None, optimal_value(U, f), None)
    rep = Report(cfg, "dual")
    rep.set("topology", topo_name(U))
    rep.set("primal_value", both(p.value))
    rep.set("dual_value", both(d.value))
    ok = p.value == d.value
    rep.set("strong_duality", "PASS" if ok else "FAIL")
    failed = [] if ok else ["strong-duality"]
    if T is not None:
        rep.set("optimal_stt", to_string(T))
        rep.set("stt_value", rational(best))
        audit = audit_weak_duality(T, d.point, f, dm)
        audit_ok = all(a.slack >= 0 for a in audit)
        rep.set("subtree_audit", "PASS" if audit_ok else "FAIL")
        if not audit_ok:
            failed.append("subtree-audit")
        rep.table(["subtree_root", "lhs_sum_R", "rhs_sum_f", "slack"],
                  [[a.node + 1, rational(a.lhs), rational(a.rhs), rational(a.slack)] for a in audit])
    rep.data = {"dual_point": {v.name(): rational(x) for v, x in zip(dm.variables, d.point) if x}}
    rep.failed = failed
    return rep


def cmd_census(cfg: RunConfig) -> Report:
    U = load_topology(cfg, default="path-5")
    model = make_model(cfg, U)
    if model.implicit:
        model = build_z_eliminated(U, expand=True)
        if cfg.families:
            model = build_refined(U, cfg.families, base=model)
    verts, counts = census(model, var_cap=int(cfg.extra.get("var_cap", 40)))
    rep = Report(cfg, "census")
    rep.set("topology", topo_name(U))
    rep.set("model", model.flavor)
    rep.set("variables", model.nvars)
    rep.set("vertices", len(verts))
    rep.set("by_max_denominator", "[" + ", ".join(str(c) for c in counts) + "]")
    if cfg.extra.get("list"):
        rep.table(["max_denominator", "point"],
                  [[max_denominator(v), vec(v)] for v in verts])
    return rep


def cmd_sample(cfg: RunConfig) -> Report:
    U = load_topology(cfg)
    flavor = "primal" if cfg.model == "primal" else cfg.model
    if flavor not in ("primal", "no-z"):
        raise UsageError("sample supports --model primal or no-z")
    c = sample_directions(U, flavor, cfg.extra.get("directions", "D"),
                          int(cfg.extra.get("count", 200)), cfg.seed)
    rep = Report(cfg, "sample")
    rep.table(["topology", "model", "directions", "count", "seed", "denominators",
               "by_max_denominator", "distinct_vertices"],
              [[topo_name(U), c.model, c.directions, c.count, c.seed,
                "[" + ", ".join(str(d) for d in sorted(c.denominators)) + "]",
                json.dumps({str(k): v for k, v in c.by_max_denominator.items()}),
                c.distinct_vertices]])
    return rep


def _classify(model, v, stt_pts):
    if max_denominator(v) > 1:
        return "fractional"
    if v in stt_pts:
        return "STT " + stt_pts[v]
    n = model.topology.n
    X = {(i, j): v[model.var("X", i, j)] for i in range(n) for j in range(n) if i != j}
    for a in range(n):
        for b in range(n):
            for c in range(n):
                if len({a, b, c}) == 3 and X[(a, b)] and X[(b, c)] and X[(c, a)]:
                    return "non-STT: cyclic ancestry"
    return "non-STT: LCA abuse"


def cmd_vertices(cfg: RunConfig) -> Report:
    U = load_topology(cfg, default="path-3")
    model = make_model(cfg, U)
    verts = enumerate_vertices(model, var_cap=int(cfg.extra.get("var_cap", 40)))
    stt_pts = {}
    if "X" in {v.kind for v in model.variables}:
        for T in enumerate_stts(U):
            stt_pts[stt_point(model, T)] = to_string(T)
    rep = Report(cfg, "vertices")
    rep.set("topology", topo_name(U))
    rep.set("model", model.flavor)
    rep.set("vertices", len(verts))
    rep.table([v.name() for v in model.variables] + ["kind"],
              [[rational(x) for x in v] + [_classify(model, v, stt_pts)] for v in verts])
    return rep


COMMANDS = {
    "catalog": (cmd_catalog, "list the catalog of small trees"),
    "stts": (cmd_stts, "count search trees per topology"),
    "solve": (cmd_solve, "solve one LP in a depth direction"),
    "verify-counterexample": (cmd_verify_counterexample, "check the (7,3) non-integral optimum end to end"),
    "normals": (cmd_normals, "hull-facet scan for non-STT vertices"),
    "gap": (cmd_gap, "integrality gap over primary directions or a given direction"),
    "round": (cmd_round, "root-rounding costs and approximation ratios"),
    "dual": (cmd_dual, "solve the dual, check strong duality and audit subtrees"),
    "census": (cmd_census, "enumerate every vertex and count by denominator"),
    "sample": (cmd_sample, "denominator census over seeded random directions"),
    "vertices": (cmd_vertices, "list and classify all vertices of a small model"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--topology", help="catalog name (U_7_3, 7,3) or path-N")
    common.add_argument("--edges", help="edge file: n, then one 1-based 'i j' per line")
    common.add_argument("--weights", type=parse_weights, help="comma list of integers or p/q")
    common.add_argument("--model", default="primal", choices=["primal", "refined", "no-z", "dual"])
    common.add_argument("--families", default="",
                        help="comma list of refined families: " + ", ".join(FAMILIES))
    common.add_argument("--long", action="store_true", help="include long-running cases")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--budget", type=float, help="wall-clock seconds for scans")
    common.add_argument("--out", help="also write the report into this directory")
    common.add_argument("--format", default="tsv", choices=["tsv", "json"])
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="sttlp", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True)
    parsers = {}
    for name, (_, helptext) in COMMANDS.items():
        parsers[name] = sub.add_parser(name, parents=[common], help=helptext)
    for name in ("normals", "gap", "round"):
        parsers[name].add_argument("--phase", type=int, default=1, help="number of scan phases")
        parsers[name].add_argument("--max-facets", type=int, help="facet budget")
    parsers["gap"].add_argument("--all", action="store_true", help="list every primary direction")
    parsers["round"].add_argument("--primary", action="store_true",
                                  help="worst case over false-facet directions")
    parsers["round"].add_argument("--epsilon", action="store_true",
                                  help="force the vertex strictly below the STT optimum")
    parsers["sample"].add_argument("--count", type=int, default=200)
    parsers["sample"].add_argument("--directions", default="D", choices=["D", "XD", "XZD"])
    for name in ("census", "vertices"):
        parsers[name].add_argument("--var-cap", type=int, default=40)
        parsers[name].add_argument("--list", action="store_true", help="print every vertex")
    return p


EXTRA_KEYS = ("phase", "max_facets", "all", "primary", "epsilon", "count", "directions",
              "var_cap", "list")


def config_from_args(ns) -> RunConfig:
    extra = {k: getattr(ns, k) for k in EXTRA_KEYS if hasattr(ns, k)}
    fams = tuple(f for f in (ns.families or "").split(",") if f)
    cfg = RunConfig(ns.subcommand, ns.topology, ns.edges, ns.weights, ns.model, fams, ns.long,
                    ns.jobs, ns.seed, ns.budget, ns.out, ns.format, extra)
    cfg.validate()
    return cfg


def run(cfg: RunConfig, stream=None) -> int:
    stream = stream or sys.stdout
    handler = COMMANDS[cfg.subcommand][0]
    try:
        rep = handler(cfg)
    except UsageError as exc:
        print(f"sttlp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TopologyError, SttError, ModelError) as exc:
        print(f"sttlp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PivotLimitExceeded, BudgetExceeded, PolytopeError) as exc:
        print(f"sttlp: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (VerificationFailure, RoundingError, AnalysisError, SolverError) as exc:
        print(f"sttlp: verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    rep.emit(stream)
    if getattr(rep, "failed", None):
        print(f"sttlp: verification failed: {', '.join(rep.failed)}", file=sys.stderr)
        return EXIT_VERIFY
    if getattr(rep, "incomplete", False):
        print("sttlp: budget exceeded; report is partial", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(ns)
    except UsageError as exc:
        parser.error(str(exc))  # exits with status 2
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
