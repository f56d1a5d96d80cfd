"""The dual quiver with relations and bounded rewriting of its paths.

Paths are stored in travel order: ``arrows[0]`` is traversed first.  Two paths
are equivalent when one rewrites to the other by repeatedly exchanging a
subpath ``p_plus(a)`` with ``p_minus(a)``.  The closure is explored
breadth-first under a length bound; every negative answer says whether it is
definitive.

A negative answer is definitive when the offset or the crossing numbers with
the perfect matchings differ (both are rewriting invariants), or when the
explored closure is provably the whole class.  The latter uses the crossing
bound: if a set of perfect matchings covers every edge, each member ``q`` of
the class of ``p`` satisfies ``len(q) <= sum_D |q & D| = sum_D |p & D|``.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass

from .core import BW, ZERO, DimerModel, Offset, add, dual_arrow_data
from .matchings import (
    NoPerfectMatchingError,
    enumerate_perfect_matchings,
    is_non_degenerate,
    is_perfect_matching,
)

YES = "yes"
NO_WITHIN_BOUND = "no-within-bound"
MINIMAL = "minimal-within-bound"
NOT_MINIMAL = "not-minimal"

DEFAULT_OMEGA_POWER = 4
DEFAULT_STATE_BUDGET = 200_000
DEFAULT_WORK_BUDGET = 1_000_000
_CACHE_LIMIT = 20_000
BOUND_ENV = "DIMERLAB_DEFAULT_BOUND"


class BoundError(ValueError):
    """A length or power bound is unusable for the requested operation."""


@dataclass(frozen=True)
class Arrow:
    id: str
    source: int
    target: int
    offset: Offset


@dataclass(frozen=True, order=True)
class QuiverPath:
    source: int
    arrows: tuple[str, ...]
    target: int
    offset: Offset = ZERO

    def __len__(self) -> int:
        return len(self.arrows)

    @property
    def key(self) -> tuple:
        return (len(self.arrows), self.arrows, self.source)

    def word(self) -> str:
        """Arrow ids in travel order separated by dots ("" for length zero)."""
        return ".".join(self.arrows)

    def __str__(self) -> str:
        return self.word() or f"e{self.source}"

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "arrows": list(self.arrows),
            "offset": list(self.offset),
        }


class Quiver:
    """The dual quiver of a dimer model with its relation pairs.

    Vertices are face indices.  ``p_plus[a]`` runs clockwise around the white
    end of ``a`` and ``p_minus[a]`` counterclockwise around the black end; both
    go from the target of ``a`` back to its source.
    """

    def __init__(self, model: DimerModel):
        self.model = model
        self.faces = model.faces
        self.vertices = list(range(len(self.faces)))
        data = dual_arrow_data(model)
        self.arrows = {a: Arrow(a, s, t, off) for a, (s, t, off) in sorted(data.items())}
        self.p_plus: dict[str, tuple[str, ...]] = {}
        self.p_minus: dict[str, tuple[str, ...]] = {}
        for a, e in model.edges.items():
            self.p_plus[a] = _around(model.rotations[e.white], a, -1)
            self.p_minus[a] = _around(model.rotations[e.black], a, +1)
        self._alternatives: dict[tuple[str, ...], set[tuple[str, ...]]] = {}
        for a in self.arrows:
            plus, minus = self.p_plus[a], self.p_minus[a]
            if plus != minus:
                self._alternatives.setdefault(plus, set()).add(minus)
                self._alternatives.setdefault(minus, set()).add(plus)
        self._by_first: dict[str, list[tuple[tuple[str, ...], tuple[tuple[str, ...], ...]]]] = {}
        for word, alts in sorted(self._alternatives.items()):
            self._by_first.setdefault(word[0], []).append((word, tuple(sorted(alts))))
        self.cycle_words = frozenset(
            w for a in self.arrows for w in ((a,) + self.p_plus[a], (a,) + self.p_minus[a])
        )
        self._cover = None
        self._classes: dict[tuple, "Closure"] = {}
        self.work = 0  # states visited by all closures so far

    # --- basic structure ---------------------------------------------------

    def out_arrows(self, v: int) -> list[str]:
        return [a for a, arr in self.arrows.items() if arr.source == v]

    def relations(self) -> list[tuple[str, tuple[str, ...], tuple[str, ...]]]:
        return [(a, self.p_plus[a], self.p_minus[a]) for a in self.arrows]

    @property
    def max_relation_length(self) -> int:
        return max((max(len(p), len(self.p_minus[a])) for a, p in self.p_plus.items()), default=0)

    def path(self, arrows, source: int | None = None) -> QuiverPath:
        arrows = tuple(arrows)
        if not arrows:
            if source is None:
                raise ValueError("a path of length zero needs a source vertex")
            return QuiverPath(source, (), source, ZERO)
        if source is not None and self.arrows[arrows[0]].source != source:
            raise ValueError(f"path does not start at vertex {source}")
        offset = ZERO
        for x, y in zip(arrows, arrows[1:]):
            if self.arrows[x].target != self.arrows[y].source:
                raise ValueError(f"arrows {x} and {y} do not compose")
        for x in arrows:
            offset = add(offset, self.arrows[x].offset)
        return QuiverPath(self.arrows[arrows[0]].source, arrows, self.arrows[arrows[-1]].target, offset)

    def parse_path(self, text: str, source: int | None = None) -> QuiverPath:
        """Parse a dot- or space-separated list of arrow ids in travel order."""
        tokens = [t for t in text.replace(".", " ").replace(",", " ").split() if t]
        return self.path(tokens, source)

    def empty(self, v: int) -> QuiverPath:
        return QuiverPath(v, (), v, ZERO)

    def compose(self, p: QuiverPath, q: QuiverPath) -> QuiverPath:
        """``p`` followed by ``q``."""
        if p.target != q.source:
            raise ValueError("paths do not compose")
        return QuiverPath(p.source, p.arrows + q.arrows, q.target, add(p.offset, q.offset))

    def lifted_edges(self, p: QuiverPath) -> list[tuple[str, Offset]]:
        """Edges crossed by ``p`` as (edge, black translate), starting in face lift (0, 0)."""
        base = ZERO
        out = []
        for a in p.arrows:
            arrow = self.arrows[a]
            face, pos = self.model.dart_face[(a, BW)]
            out.append((a, add(base, self.faces[face].tails[pos])))
            base = add(base, arrow.offset)
        return out

    # --- small cycles --------------------------------------------------------

    def small_cycles(self, v: int) -> list[tuple[str, QuiverPath]]:
        """Every small cycle starting at ``v`` with the node it surrounds."""
        out = set()
        for a in self.out_arrows(v):
            e = self.model.edges[a]
            out.add((e.white, self.path((a,) + self.p_plus[a])))
            out.add((e.black, self.path((a,) + self.p_minus[a])))
        return sorted(out, key=lambda x: (x[0], x[1].key))

    def small_cycle(self, v: int) -> QuiverPath:
        """The small cycle at ``v`` around the least node id on the face boundary."""
        cycles = self.small_cycles(v)
        if not cycles:
            raise ValueError(f"vertex {v} has no outgoing arrow")
        return cycles[0][1]

    def omega_power(self, v: int, i: int) -> QuiverPath:
        w = self.small_cycle(v)
        return QuiverPath(v, w.arrows * i, v, ZERO)

    def contains_small_cycle(self, p: QuiverPath) -> tuple[int, int] | None:
        """(start, length) of the first small-cycle subpath of ``p``, if any."""
        arrows = p.arrows
        for start in range(len(arrows)):
            for w in self._cycle_words_from(arrows[start]):
                if arrows[start : start + len(w)] == w:
                    return (start, len(w))
        return None

    def _cycle_words_from(self, a: str):
        return sorted((a,) + w for w in (self.p_plus[a], self.p_minus[a]))

    # --- rewriting -----------------------------------------------------------

    def _neighbor_words(self, arrows: tuple[str, ...]):
        for k, a in enumerate(arrows):
            for word, alts in self._by_first.get(a, ()):
                n = len(word)
                if arrows[k : k + n] == word:
                    for alt in alts:
                        yield arrows[:k] + alt + arrows[k + n :]

    def rewrite_neighbors(self, p: QuiverPath) -> set[QuiverPath]:
        """Paths obtained from ``p`` by exchanging one occurrence of a relation side."""
        return {QuiverPath(p.source, w, p.target, p.offset) for w in self._neighbor_words(p.arrows)}

    # --- matchings as invariants -------------------------------------------

    @property
    def cover(self) -> "MatchingCover":
        if self._cover is None:
            self._cover = MatchingCover.build(self.model)
        return self._cover

    def crossing_vector(self, p: QuiverPath) -> tuple[int, ...]:
        return self.cover.crossing_vector(p.arrows)

    def completeness_bound(self, p: QuiverPath) -> int | None:
        """Length every path equivalent to ``p`` is known to respect, if any."""
        return self.cover.length_bound(p.arrows)

    # --- closures ------------------------------------------------------------

    def closure(self, p: QuiverPath, bound: int, budget: int = DEFAULT_STATE_BUDGET) -> "Closure":
        """Breadth-first rewriting closure of ``p`` among paths of length <= bound."""
        if bound < len(p):
            raise BoundError(f"bound {bound} is shorter than the path ({len(p)})")
        star = self.completeness_bound(p)
        effective = bound if star is None else min(bound, star)
        key = (p.source, p.arrows)
        cached = self._classes.get(key)
        if cached is not None and (cached.complete or cached.bound >= effective):
            if cached.complete or cached.bound == effective:
                return cached
        seen = {p.arrows}
        queue = deque([p.arrows])
        truncated = False
        exhausted = False
        while queue:
            cur = queue.popleft()
            for nxt in self._neighbor_words(cur):
                if nxt in seen:
                    continue
                if len(nxt) > effective:
                    truncated = True
                    continue
                if len(seen) >= budget:
                    exhausted = True
                    queue.clear()
                    break
                seen.add(nxt)
                queue.append(nxt)
        self.work += len(seen)
        complete = not exhausted and (not truncated or (star is not None and effective >= star))
        members = frozenset(QuiverPath(p.source, w, p.target, p.offset) for w in seen)
        result = Closure(members, effective, complete, exhausted, star)
        if complete:
            for q in members:
                self._classes[(q.source, q.arrows)] = result
        elif len(members) <= _CACHE_LIMIT:
            self._classes[key] = result
        return result


def _around(rotation: tuple[str, ...], a: str, step: int) -> tuple[str, ...]:
    n = len(rotation)
    i = rotation.index(a)
    return tuple(rotation[(i + step * k) % n] for k in range(1, n))


@dataclass(frozen=True)
class Closure:
    members: frozenset
    bound: int
    complete: bool
    exhausted: bool
    star: int | None

    def __contains__(self, p: QuiverPath) -> bool:
        return p in self.members

    def __len__(self) -> int:
        return len(self.members)

    def sorted(self) -> list[QuiverPath]:
        return sorted(self.members, key=lambda q: q.key)

    def representative(self) -> QuiverPath:
        return min(self.members, key=lambda q: q.key)


@dataclass(frozen=True)
class MatchingCover:
    """Perfect matchings used as rewriting invariants and for length bounds.

    ``matchings`` is a deterministic list of perfect matchings covering as
    many edges as possible; ``covered`` is the set of edges they contain.
    """

    matchings: tuple[frozenset, ...]
    covered: frozenset
    weights: dict
    edge_count: int

    @classmethod
    def build(cls, m: DimerModel, enumerate_limit: int = 64) -> "MatchingCover":
        all_matchings = []
        for d in _bounded_enumeration(m, enumerate_limit + 1):
            all_matchings.append(d)
        if 0 < len(all_matchings) <= enumerate_limit:
            chosen = sorted(all_matchings, key=sorted)
        else:
            report = is_non_degenerate(m)
            pool = sorted(set(report.witnesses.values()), key=sorted)
            chosen = _greedy_cover(pool)
        covered = frozenset(e for d in chosen for e in d)
        weights = {e: sum(1 for d in chosen if e in d) for e in covered}
        return cls(tuple(chosen), covered, weights, len(m.edges))

    def crossing_vector(self, arrows) -> tuple[int, ...]:
        return tuple(sum(1 for a in arrows if a in d) for d in self.matchings)

    def length_bound(self, arrows) -> int | None:
        if not self.matchings or len(self.covered) < self.edge_count:
            return None
        total = sum(self.crossing_vector(arrows))
        return total // min(self.weights.values())


def _bounded_enumeration(m: DimerModel, limit: int):
    from .matchings import iter_perfect_matchings

    for k, d in enumerate(iter_perfect_matchings(m)):
        if k >= limit:
            return
        yield d


def _greedy_cover(pool: list[frozenset]) -> list[frozenset]:
    remaining = set().union(*pool) if pool else set()
    chosen = []
    while remaining:
        best = max(pool, key=lambda d: len(d & remaining))
        chosen.append(best)
        remaining -= best
    return chosen


def build_quiver(m: DimerModel) -> Quiver:
    return Quiver(m)


# --- equivalence -----------------------------------------------------------------


@dataclass(frozen=True)
class EquivalenceResult:
    answer: str
    bound: int
    definitive: bool
    reason: str
    power: int | None = None

    def __bool__(self) -> bool:
        return self.answer == YES

    def to_dict(self) -> dict:
        out = {
            "answer": self.answer,
            "bound": self.bound,
            "definitive": self.definitive,
            "reason": self.reason,
        }
        if self.power is not None:
            out["power"] = self.power
        return out


def default_bound(q: Quiver, *paths: QuiverPath) -> int:
    """Length bound used when none is given: 8 * max relation length + longest path."""
    env = os.environ.get(BOUND_ENV)
    if env:
        return int(env)
    longest = max((len(p) for p in paths), default=0)
    return 2 * q.max_relation_length * 4 + longest


def _quick_no(q: Quiver, p1: QuiverPath, p2: QuiverPath, bound: int) -> EquivalenceResult | None:
    if (p1.source, p1.target) != (p2.source, p2.target):
        return EquivalenceResult(NO_WITHIN_BOUND, bound, True, "different endpoints")
    if p1.offset != p2.offset:
        return EquivalenceResult(NO_WITHIN_BOUND, bound, True, "offsets differ")
    if q.crossing_vector(p1) != q.crossing_vector(p2):
        return EquivalenceResult(NO_WITHIN_BOUND, bound, True, "crossing numbers differ")
    return None


def are_equivalent(q: Quiver, p1: QuiverPath, p2: QuiverPath, bound: int | None = None) -> EquivalenceResult:
    if bound is None:
        bound = default_bound(q, p1, p2)
    if bound < max(len(p1), len(p2)):
        raise BoundError(f"bound {bound} is shorter than the longer path")
    if p1 == p2:
        return EquivalenceResult(YES, bound, True, "identical paths")
    quick = _quick_no(q, p1, p2, bound)
    if quick is not None:
        return quick
    c = q.closure(p1, bound)
    if p2 in c:
        return EquivalenceResult(YES, bound, True, "rewriting chain found")
    if c.complete:
        return EquivalenceResult(NO_WITHIN_BOUND, bound, True, "closure exhausted the class")
    return EquivalenceResult(NO_WITHIN_BOUND, bound, False, "not found within bound")


def are_weakly_equivalent(
    q: Quiver,
    p1: QuiverPath,
    p2: QuiverPath,
    bound: int | None = None,
    i_max: int = DEFAULT_OMEGA_POWER,
) -> EquivalenceResult:
    """Whether omega^i p1 and omega^i p2 are equivalent for some i <= i_max.

    The bound grows with the padding: power ``i`` is tested under
    ``bound + i * len(omega)``.
    """
    if bound is None:
        bound = default_bound(q, p1, p2)
    if i_max < 0:
        raise BoundError("negative omega power")
    if bound < max(len(p1), len(p2)):
        raise BoundError(f"bound {bound} is shorter than the longer path")
    quick = _quick_no(q, p1, p2, bound)
    if quick is not None:
        return quick
    definitive_all = True
    for i in range(i_max + 1):
        w = q.omega_power(p1.source, i)
        b = bound + len(w)
        r = are_equivalent(q, q.compose(w, p1), q.compose(w, p2), b)
        if r:
            return EquivalenceResult(YES, b, True, f"equivalent after omega^{i}", power=i)
        definitive_all = definitive_all and r.definitive
    return EquivalenceResult(
        NO_WITHIN_BOUND, bound, False, f"no power up to {i_max} within bound" if not definitive_all
        else f"inequivalent for every power up to {i_max}"
    )


def is_minimal(q: Quiver, p: QuiverPath, bound: int | None = None) -> tuple[str, QuiverPath | None]:
    """(verdict, witness): a class member containing a small cycle if not minimal."""
    if bound is None:
        bound = default_bound(q, p)
    c = q.closure(p, bound)
    for r in c.sorted():
        if q.contains_small_cycle(r) is not None:
            return (NOT_MINIMAL, r)
    return (MINIMAL, None)


def reduce_via_matching(q: Quiver, p: QuiverPath, D, bound: int | None = None) -> tuple[QuiverPath, int]:
    """Factor small cycles out of ``p``: returns (r, k) with p ~ omega^k r.

    Each factorization lowers the crossing number with ``D`` by exactly one,
    so the loop ends after at most |p & D| rounds.
    """
    m = q.model
    D = frozenset(D)
    if not is_perfect_matching(m, D):
        raise NoPerfectMatchingError("D is not a perfect matching of the model")
    if bound is None:
        bound = default_bound(q, p)
    k = 0
    while True:
        verdict, witness = is_minimal(q, p, bound)
        if verdict == MINIMAL:
            return (p, k)
        start, n = q.contains_small_cycle(witness)
        rest = witness.arrows[:start] + witness.arrows[start + n :]
        v = witness.source if not rest else q.arrows[rest[0]].source
        p = q.path(rest, source=v if rest else witness.source)
        k += 1


def require_perfect_matching(m: DimerModel) -> frozenset:
    ms = enumerate_perfect_matchings(m)
    if not ms:
        raise NoPerfectMatchingError("the model has no perfect matching")
    return ms[0]


# --- path enumeration and the counterexample search ---------------------------------


def iter_paths(q: Quiver, max_length: int, source: int | None = None):
    """All paths of length <= max_length by (length, arrows), length zero first."""
    sources = q.vertices if source is None else [source]
    layer = [q.empty(v) for v in sources]
    yield from layer
    out = {v: sorted(q.out_arrows(v)) for v in q.vertices}
    for _ in range(max_length):
        nxt = []
        for p in layer:
            for a in out[p.target]:
                arrow = q.arrows[a]
                nxt.append(QuiverPath(p.source, p.arrows + (a,), arrow.target, add(p.offset, arrow.offset)))
        nxt.sort(key=lambda r: r.key)
        yield from nxt
        layer = nxt


@dataclass(frozen=True)
class Counterexample:
    first: QuiverPath
    second: QuiverPath
    power: int
    equivalence: EquivalenceResult

    def to_dict(self) -> dict:
        return {
            "first": self.first.to_dict(),
            "second": self.second.to_dict(),
            "power": self.power,
            "inequivalence": self.equivalence.to_dict(),
        }


@dataclass
class SearchReport:
    counterexample: Counterexample | None
    bound: int
    i_max: int
    search_length: int
    candidates: int
    groups_tested: int
    note: str = ""

    @property
    def found(self) -> bool:
        return self.counterexample is not None

    def to_dict(self) -> dict:
        return {
            "result": "counterexample" if self.found else "none-within-bounds",
            "counterexample": self.counterexample.to_dict() if self.found else None,
            "bounds": {
                "length": self.bound,
                "omega_power": self.i_max,
                "search_length": self.search_length,
            },
            "candidates": self.candidates,
            "note": self.note,
        }


def zigzag_loops(q: Quiver) -> list[QuiverPath]:
    """Quiver cycles dual to the homologically trivial zigzag paths, every rotation."""
    from .zigzag import trace_zigzags

    out = []
    for z in trace_zigzags(q.model):
        if not z.trivial:
            continue
        word = tuple(reversed(z.edges))
        for k in range(len(word)):
            try:
                out.append(q.path(word[k:] + word[:k]))
            except ValueError:
                break
    return out


def default_search_length(q: Quiver) -> int:
    return max(4, min(8, q.max_relation_length + 2))


def find_first_consistency_counterexample(
    m: DimerModel | Quiver,
    bound: int | None = None,
    i_max: int = DEFAULT_OMEGA_POWER,
    search_length: int | None = None,
    work_budget: int = DEFAULT_WORK_BUDGET,
) -> SearchReport:
    """Look for paths that are weakly equivalent but not equivalent.

    Candidates are the loops dual to trivial zigzag paths, every path up to
    ``search_length`` arrows, and powers of small cycles joined to each group
    of loops with zero offset.  Candidates are grouped by (source, target,
    offset, crossing numbers), which every weakly equivalent pair shares; in
    each group the distinct equivalence classes are compared pairwise.
    The search stops early, with a note, once its closures have visited
    ``work_budget`` states in total.
    """
    q = m if isinstance(m, Quiver) else Quiver(m)
    if i_max < 0:
        raise BoundError("negative omega power")
    if search_length is None:
        search_length = default_search_length(q)
    if bound is None:
        bound = default_bound(q) + search_length
    if bound < search_length:
        raise BoundError("bound is shorter than the search length")

    candidates: list[QuiverPath] = list(zigzag_loops(q))
    candidates += [p for p in iter_paths(q, search_length)]
    groups: dict[tuple, list[QuiverPath]] = {}
    for p in candidates:
        if len(p) > bound:
            continue
        groups.setdefault((p.source, p.target, p.offset, q.crossing_vector(p)), []).append(p)
    for (s, t, off, cv), members in groups.items():
        if s == t and off == ZERO and cv and len(set(cv)) == 1 and cv[0] > 0:
            w = q.omega_power(s, cv[0])
            if len(w) <= bound:
                members.append(w)

    ordered = sorted(groups.items(), key=lambda kv: min(p.key for p in kv[1]))
    tested = 0
    start = q.work
    for _, members in ordered:
        if q.work - start > work_budget:
            return SearchReport(
                None, bound, i_max, search_length, len(candidates), tested, "work budget exhausted"
            )
        members = sorted(set(members), key=lambda p: p.key)
        if len(members) < 2:
            continue
        reps = []
        classes = []
        for p in members:
            if any(p in c for c in classes):
                continue
            c = q.closure(p, max(bound, len(p)))
            classes.append(c)
            reps.append(p)
        if len(reps) < 2:
            continue
        tested += 1
        for x in range(len(reps)):
            for y in range(x + 1, len(reps)):
                if q.work - start > work_budget:
                    return SearchReport(
                        None, bound, i_max, search_length, len(candidates), tested, "work budget exhausted"
                    )
                p1, p2 = reps[x], reps[y]
                b = max(bound, len(p1), len(p2))
                neq = are_equivalent(q, p1, p2, b)
                if neq:
                    continue
                weak = are_weakly_equivalent(q, p1, p2, b, i_max)
                if weak:
                    return SearchReport(
                        Counterexample(p1, p2, weak.power, neq), bound, i_max, search_length, len(candidates), tested
                    )
    return SearchReport(None, bound, i_max, search_length, len(candidates), tested)
