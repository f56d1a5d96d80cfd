"""Zigzag consistency, proper ordering, the Kenyon-Schlenker criterion and
the cross-check tying them to the first consistency condition."""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import DimerModel
from .matchings import is_non_degenerate
from .quiver import (
    DEFAULT_OMEGA_POWER,
    Quiver,
    SearchReport,
    default_bound,
    default_search_length,
    find_first_consistency_counterexample,
)
from .zigzag import (
    ZigzagPath,
    is_counterclockwise,
    pair_intersections,
    self_intersections,
    shared_runs,
    trace_zigzags,
    zigzags_through_node,
)


@dataclass(frozen=True)
class Clause:
    name: str
    ok: bool
    witness: object = None
    message: str = ""

    def to_dict(self) -> dict:
        return {"clause": self.name, "ok": self.ok, "witness": self.witness, "message": self.message}


@dataclass(frozen=True)
class Verdict:
    condition: str
    clauses: tuple[Clause, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.clauses)

    def __bool__(self) -> bool:
        return self.ok

    def __getitem__(self, k: int) -> Clause:
        """Clause by its 1-based number."""
        return self.clauses[k - 1]

    def failed(self) -> list[int]:
        return [k for k, c in enumerate(self.clauses, 1) if not c.ok]

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "ok": self.ok,
            "failed_clauses": self.failed(),
            "clauses": [c.to_dict() for c in self.clauses],
        }


def _trivial_clause(zs: list[ZigzagPath]) -> Clause:
    trivial = [z.index for z in zs if z.trivial]
    return Clause(
        "no homologically trivial zigzag path",
        not trivial,
        {"zigzags": trivial} if trivial else None,
        f"zigzag path {trivial[0]} has homology (0, 0)" if trivial else "",
    )


def _self_clause(zs: list[ZigzagPath]) -> Clause:
    for z in zs:
        xs = self_intersections(z)
        if xs:
            return Clause(
                "no self-intersection on the universal cover",
                False,
                {"zigzag": z.index, "intersection": xs[0].to_dict()},
                f"zigzag path {z.index} meets its own lift",
            )
    return Clause("no self-intersection on the universal cover", True)


def check_consistent(m: DimerModel, zigzags: list[ZigzagPath] | None = None) -> Verdict:
    """The three zigzag clauses of consistency, each with a witness when failing.

    Clause 3 compares every pair of lifts, including two distinct lifts of the
    same zigzag path.  Pairs involving a trivial zigzag are left to clause 1.
    """
    zs = trace_zigzags(m) if zigzags is None else zigzags
    third = Clause("no pair of lifts meets twice in the same direction", True)
    nontrivial = [z for z in zs if not z.trivial]
    for a, z in enumerate(nontrivial):
        for w in nontrivial[a:]:
            pi = pair_intersections(z, w)
            pair = pi.same_direction()
            if pair:
                third = Clause(
                    third.name,
                    False,
                    {
                        "zigzags": [z.index, w.index],
                        "intersections": [x.to_dict() for x in pair],
                        "periodic": pi.periodic,
                    },
                    f"zigzag paths {z.index} and {w.index} meet twice in the same direction",
                )
                break
        if not third.ok:
            break
    return Verdict("consistent", (_trivial_clause(zs), _self_clause(zs), third))


def check_properly_ordered(m: DimerModel, zigzags: list[ZigzagPath] | None = None) -> Verdict:
    zs = trace_zigzags(m) if zigzags is None else zigzags
    nodes_of: dict[int, set[str]] = {z.index: set() for z in zs}
    for z in zs:
        for d in z.darts:
            nodes_of[z.index].add(m.head(d))

    third = Clause("no two zigzag paths of one class share a node", True)
    for a, z in enumerate(zs):
        for w in zs[a + 1 :]:
            if z.homology != w.homology or z.trivial:
                continue
            common = sorted(nodes_of[z.index] & nodes_of[w.index])
            if common:
                third = Clause(
                    third.name,
                    False,
                    {"zigzags": [z.index, w.index], "node": common[0]},
                    f"zigzag paths {z.index} and {w.index} have class {z.homology} and meet at {common[0]}",
                )
                break
        if not third.ok:
            break

    fourth = Clause("rotation order at every node matches slope order", True)
    for node in sorted(m.nodes):
        entries = zigzags_through_node(m, node, zs)
        classes = [zs[i].homology for i, _ in entries]
        if not is_counterclockwise(classes):
            fourth = Clause(
                fourth.name,
                False,
                {"node": node, "classes": [list(c) for c in classes]},
                f"classes around node {node} are not in counterclockwise slope order",
            )
            break
    return Verdict("properly_ordered", (_trivial_clause(zs), _self_clause(zs), third, fourth))


def check_ks_criterion(m: DimerModel, zigzags: list[ZigzagPath] | None = None) -> Verdict:
    """The combinatorial isoradiality criterion (no circle geometry is checked).

    Clause 1: every zigzag path is a simple closed curve, that is, it is
    homologically nontrivial and never crosses itself on the torus.  Clause 2:
    two distinct lifts of zigzag paths share at most one edge.
    """
    zs = trace_zigzags(m) if zigzags is None else zigzags
    first = Clause("every zigzag path is a simple closed curve", True)
    for z in zs:
        crossings = [r for r in shared_runs(z, z) if r.counts]
        if z.trivial or crossings:
            first = Clause(
                first.name,
                False,
                {"zigzag": z.index, "crossing": crossings[0].to_dict() if crossings else None},
                f"zigzag path {z.index} is "
                + ("null-homotopic" if z.trivial else "not simple on the torus"),
            )
            break
    second = Clause("lifts of two zigzag paths share at most one edge", True)
    for a, z in enumerate(zs):
        for w in zs[a:]:
            shared = pair_intersections(z, w).max_shared_edges()
            if shared > 1:
                second = Clause(
                    second.name,
                    False,
                    {"zigzags": [z.index, w.index], "shared_edges": None if shared == float("inf") else shared},
                    f"lifts of zigzag paths {z.index} and {w.index} share more than one edge",
                )
                break
        if not second.ok:
            break
    return Verdict("ks_criterion", (first, second))


@dataclass
class CrossCheckReport:
    non_degenerate: bool
    consistent: Verdict
    properly_ordered: Verdict
    ks_criterion: Verdict
    search: object
    uncovered_edges: list = field(default_factory=list)

    @property
    def agreement(self) -> bool:
        """Consistency and proper ordering must always agree."""
        return self.consistent.ok == self.properly_ordered.ok

    @property
    def contradiction(self) -> bool:
        """A counterexample on a consistent model would be an implementation bug."""
        return self.consistent.ok and self.search.found

    @property
    def expectation(self) -> str:
        if not self.non_degenerate:
            return "precondition-unmet"
        if self.consistent.ok:
            return "contradiction" if self.search.found else "expectation-met"
        return "expectation-met" if self.search.found else "expectation-unmet-within-bounds"

    @property
    def ok(self) -> bool:
        return self.agreement and not self.contradiction

    def to_dict(self) -> dict:
        return {
            "verdicts": {
                "consistent": self.consistent.ok,
                "properly_ordered": self.properly_ordered.ok,
                "ks_criterion": self.ks_criterion.ok,
                "non_degenerate": self.non_degenerate,
            },
            "first_consistency": self.search.to_dict(),
            "cross_check": {
                "agreement": self.agreement,
                "expectation": self.expectation,
            },
            "witnesses": {
                "consistent": self.consistent.to_dict(),
                "properly_ordered": self.properly_ordered.to_dict(),
                "ks_criterion": self.ks_criterion.to_dict(),
                "uncovered_edges": self.uncovered_edges,
            },
        }


def cross_check(
    m: DimerModel,
    bound: int | None = None,
    i_max: int = DEFAULT_OMEGA_POWER,
    search_length: int | None = None,
) -> CrossCheckReport:
    """Run every checker; the path search is skipped when non-degeneracy fails,
    since the equivalence of the conditions is only claimed for non-degenerate
    models."""
    zs = trace_zigzags(m)
    nd = is_non_degenerate(m)
    q = Quiver(m)
    if nd.non_degenerate:
        search = find_first_consistency_counterexample(q, bound, i_max, search_length)
    else:
        length = default_search_length(q) if search_length is None else search_length
        search = SearchReport(
            None,
            default_bound(q) + length if bound is None else bound,
            i_max,
            length,
            0,
            0,
            "skipped: model is degenerate",
        )
    return CrossCheckReport(
        nd.non_degenerate,
        check_consistent(m, zs),
        check_properly_ordered(m, zs),
        check_ks_criterion(m, zs),
        search,
        nd.uncovered(),
    )
