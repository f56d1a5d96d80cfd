"""Perfect matchings, non-degeneracy and crossing numbers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import networkx as nx
from networkx.algorithms import bipartite

from .core import BLACK, DimerModel

PerfectMatching = frozenset  # frozenset of edge ids


class NoPerfectMatchingError(ValueError):
    """An operation needs a perfect matching the model does not have."""


def is_perfect_matching(m: DimerModel, edges) -> bool:
    covered: dict[str, int] = {}
    for eid in edges:
        e = m.edges.get(eid)
        if e is None:
            return False
        for v in (e.black, e.white):
            covered[v] = covered.get(v, 0) + 1
    return len(covered) == len(m.nodes) and all(c == 1 for c in covered.values())


def iter_perfect_matchings(m: DimerModel) -> Iterator[frozenset]:
    """Backtracking over nodes, always branching on the most constrained one."""
    incident: dict[str, list[str]] = {v: [] for v in m.nodes}
    for eid in sorted(m.edges):
        e = m.edges[eid]
        incident[e.black].append(eid)
        incident[e.white].append(eid)

    covered: set[str] = set()
    chosen: list[str] = []

    def other(eid, v):
        e = m.edges[eid]
        return e.white if v == e.black else e.black

    def search():
        best = None
        best_opts = None
        for v in m.nodes:
            if v in covered:
                continue
            opts = [eid for eid in incident[v] if other(eid, v) not in covered]
            if best_opts is None or len(opts) < len(best_opts):
                best, best_opts = v, opts
                if not opts:
                    break
        if best is None:
            yield frozenset(chosen)
            return
        for eid in best_opts:
            u = other(eid, best)
            covered.update((best, u))
            chosen.append(eid)
            yield from search()
            chosen.pop()
            covered.difference_update((best, u))

    if sum(1 for c in m.nodes.values() if c == BLACK) * 2 != len(m.nodes):
        return
    yield from search()


def enumerate_perfect_matchings(m: DimerModel) -> list[frozenset]:
    """All perfect matchings, sorted lexicographically by sorted edge ids."""
    return sorted(iter_perfect_matchings(m), key=lambda d: sorted(d))


def _node_graph(m: DimerModel, skip: set[str]) -> tuple[nx.Graph, dict]:
    g = nx.Graph()
    pick: dict[frozenset, str] = {}
    for v, c in m.nodes.items():
        if v not in skip:
            g.add_node(v, bipartite=0 if c == BLACK else 1)
    for eid in sorted(m.edges):
        e = m.edges[eid]
        if e.black in skip or e.white in skip:
            continue
        g.add_edge(e.black, e.white)
        pick.setdefault(frozenset((e.black, e.white)), eid)
    return g, pick


def find_perfect_matching(m: DimerModel, forced: str | None = None) -> frozenset | None:
    """Some perfect matching (containing ``forced`` if given), or None."""
    skip: set[str] = set()
    base: list[str] = []
    if forced is not None:
        e = m.edges[forced]
        skip = {e.black, e.white}
        base = [forced]
    g, pick = _node_graph(m, skip)
    blacks = [v for v, d in g.nodes(data=True) if d["bipartite"] == 0]
    if 2 * len(blacks) != g.number_of_nodes():
        return None
    if not blacks:
        return frozenset(base)
    mate = bipartite.hopcroft_karp_matching(g, top_nodes=blacks)
    if len(mate) != g.number_of_nodes():
        return None
    return frozenset(base + [pick[frozenset((b, mate[b]))] for b in blacks])


@dataclass(frozen=True)
class NonDegeneracyReport:
    covered: dict[str, bool]
    witnesses: dict[str, frozenset]

    @property
    def non_degenerate(self) -> bool:
        return all(self.covered.values())

    def __bool__(self) -> bool:
        return self.non_degenerate

    def uncovered(self) -> list[str]:
        return sorted(e for e, ok in self.covered.items() if not ok)

    def to_dict(self) -> dict:
        return {"non_degenerate": self.non_degenerate, "uncovered_edges": self.uncovered()}


def is_non_degenerate(m: DimerModel) -> NonDegeneracyReport:
    """Per-edge check that some perfect matching contains the edge.

    Each edge is forced in turn and the residual graph is tested for a
    perfect matching; a witness matching found on the way covers every edge
    it contains, which skips most of the forced searches.
    """
    covered: dict[str, bool] = {}
    witnesses: dict[str, frozenset] = {}
    for eid in sorted(m.edges):
        if eid in witnesses:
            covered[eid] = True
            continue
        d = find_perfect_matching(m, forced=eid)
        covered[eid] = d is not None
        if d is not None:
            for f in d:
                witnesses.setdefault(f, d)
    return NonDegeneracyReport(covered, witnesses)


def crossing_number(path, matching) -> int:
    """Number of arrows of ``path`` whose edge lies in ``matching``."""
    arrows = path.arrows if hasattr(path, "arrows") else path
    return sum(1 for a in arrows if a in matching)
