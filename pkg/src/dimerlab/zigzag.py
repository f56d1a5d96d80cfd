"""Zigzag paths, homology classes, slopes and intersections on the universal cover.

A zigzag path turns maximally right at white nodes and maximally left at
black nodes.  With counterclockwise rotations, arriving at a white node along
``e`` it leaves along the counterclockwise successor of ``e``; at a black node
along the clockwise successor.

Positions along a lift are integers: position ``k`` of the reference lift of a
zigzag ``z`` is the edge ``z.edge(k)`` whose black end sits in the translate
``z.black(k)``; shifting ``k`` by the period adds the homology class.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from math import floor, gcd

from .core import (
    BLACK,
    BW,
    WB,
    WHITE,
    ZERO,
    Dart,
    DimerModel,
    Offset,
    add,
    det,
    neg,
    scale,
    sub,
)


class DegenerateZigzagError(ValueError):
    """Two zigzag lifts coincide along their whole length."""


@dataclass(frozen=True)
class ZigzagPath:
    index: int
    darts: tuple[Dart, ...]
    blacks: tuple[Offset, ...]
    homology: Offset

    @property
    def period(self) -> int:
        return len(self.darts)

    def __len__(self) -> int:
        return len(self.darts)

    def dart(self, k: int) -> Dart:
        return self.darts[k % len(self.darts)]

    def edge(self, k: int) -> str:
        return self.darts[k % len(self.darts)][0]

    def black(self, k: int) -> Offset:
        q, r = divmod(k, len(self.darts))
        return add(self.blacks[r], scale(q, self.homology))

    def lifted_edge(self, k: int) -> tuple[str, Offset]:
        return (self.edge(k), self.black(k))

    @property
    def edges(self) -> tuple[str, ...]:
        return tuple(e for e, _ in self.darts)

    @property
    def trivial(self) -> bool:
        return self.homology == ZERO

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "homology": list(self.homology),
            "length": self.period,
            "darts": [f"{e}:{d}" for e, d in self.darts],
        }


def zigzag_successor(m: DimerModel, dart: Dart) -> Dart:
    x = m.head(dart)
    if m.nodes[x] == WHITE:
        nxt = m.ccw_next(x, dart[0])
    else:
        nxt = m.cw_next(x, dart[0])
    return m.leaving(x, nxt)


def trace_zigzags(m: DimerModel) -> list[ZigzagPath]:
    """All zigzag paths, ordered by their lexicographically least dart."""
    seen: set[Dart] = set()
    orbits = []
    for start in m.darts():
        if start in seen:
            continue
        orbit = []
        dart = start
        while dart not in seen:
            seen.add(dart)
            orbit.append(dart)
            dart = zigzag_successor(m, dart)
        k = orbit.index(min(orbit))
        orbits.append(orbit[k:] + orbit[:k])
    orbits.sort(key=lambda o: o[0])

    paths = []
    for index, orbit in enumerate(orbits):
        tail = ZERO
        blacks = []
        for dart in orbit:
            step = m.dart_offset(dart)
            blacks.append(tail if dart[1] == BW else add(tail, step))
            tail = add(tail, step)
        paths.append(ZigzagPath(index, tuple(orbit), tuple(blacks), tail))
    return paths


def homology(z: ZigzagPath) -> Offset:
    return z.homology


def zigzag_of_dart(zigzags: list[ZigzagPath]) -> dict[Dart, tuple[int, int]]:
    """Map each dart to (zigzag index, position in its period)."""
    return {d: (z.index, k) for z in zigzags for k, d in enumerate(z.darts)}


# --- slopes --------------------------------------------------------------------


def primitive(h: Offset) -> Offset:
    g = gcd(h[0], h[1])
    if g == 0:
        raise ValueError("zero class has no slope")
    return (h[0] // g, h[1] // g)


def _half(h: Offset) -> int:
    return 0 if h[1] > 0 or (h[1] == 0 and h[0] > 0) else 1


def compare_angle(p: Offset, q: Offset) -> int:
    """Exact comparison of counterclockwise angles from the positive x-axis."""
    hp, hq = _half(p), _half(q)
    if hp != hq:
        return -1 if hp < hq else 1
    c = det(p, q)
    return -1 if c > 0 else (1 if c < 0 else 0)


def slope_cyclic_order(classes) -> list[Offset]:
    """Sort nonzero classes counterclockwise starting from the positive x-axis."""
    classes = [tuple(c) for c in classes]
    if any(c == ZERO for c in classes):
        raise ValueError("zero homology class has no slope")
    ordered = sorted(classes, key=cmp_to_key(compare_angle))
    for a, b in zip(ordered, ordered[1:]):
        if compare_angle(a, b) == 0:
            raise ValueError(f"duplicate slope {primitive(a)}")
    return ordered


def is_counterclockwise(sequence) -> bool:
    """Whether the cyclic sequence of classes winds once counterclockwise."""
    sequence = [tuple(c) for c in sequence]
    try:
        ordered = slope_cyclic_order(sequence)
    except ValueError:
        return False
    k = ordered.index(sequence[0])
    return ordered[k:] + ordered[:k] == sequence


def zigzags_through_node(m: DimerModel, node: str, zigzags=None) -> list[tuple[int, str]]:
    """(zigzag index, outgoing edge) for each edge at ``node`` in rotation order."""
    if zigzags is None:
        zigzags = trace_zigzags(m)
    where = zigzag_of_dart(zigzags)
    return [(where[m.leaving(node, e)][0], e) for e in m.rotations[node]]


# --- lift bookkeeping ------------------------------------------------------------


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return (abs(a), 1 if a >= 0 else -1, 0)
    g, x, y = _ext_gcd(b, a % b)
    return (g, y, x - (a // b) * y)


def lift_class(shift: Offset, h: Offset) -> Offset:
    """Canonical representative of ``shift`` modulo the subgroup Z*h."""
    if h == ZERO:
        return shift
    c = gcd(h[0], h[1])
    g = (h[0] // c, h[1] // c)
    _, x, y = _ext_gcd(g[0], g[1])
    g2 = (-y, x)  # det(g, g2) = 1
    alpha = det(shift, g2)
    beta = det(g, shift)
    return (alpha % c, beta)


def multiple_of(delta: Offset, h: Offset) -> int | None:
    """The integer q with delta = q*h, or None."""
    if h == ZERO:
        return 0 if delta == ZERO else None
    if det(delta, h) != 0:
        return None
    i = 0 if h[0] != 0 else 1
    q, r = divmod(delta[i], h[i])
    return q if r == 0 else None


# --- intersections between zigzag paths -------------------------------------------


@dataclass(frozen=True)
class Intersection:
    """A maximal run of shared lifted edges.

    Along the run ``first`` goes through positions ``i, i+1, ...`` of its
    reference lift and ``second`` through ``j, j-1, ...`` of its lift
    translated by ``shift``.  The run counts as an intersection only when its
    length is odd.
    """

    first: int
    second: int
    i: int
    j: int
    length: int
    shift: Offset

    @property
    def counts(self) -> bool:
        return self.length % 2 == 1

    def moved(self, di: int, dj: int, shift: Offset) -> "Intersection":
        return Intersection(self.first, self.second, self.i + di, self.j + dj, self.length, shift)

    def to_dict(self) -> dict:
        return {
            "first": self.first,
            "second": self.second,
            "i": self.i,
            "j": self.j,
            "length": self.length,
            "shift": list(self.shift),
        }


def _torus_runs(z: ZigzagPath, w: ZigzagPath, mirrors: bool = False) -> list[tuple[int, int, int]]:
    """Maximal chains (i, j), (i+1, j-1), ... of shared torus edges, as (i, j, length)."""
    nz, nw = z.period, w.period
    same = z.index == w.index
    where: dict[str, list[int]] = {}
    for j, e in enumerate(w.edges):
        where.setdefault(e, []).append(j)
    coincide = set()
    for i, e in enumerate(z.edges):
        for j in where.get(e, ()):
            if not (same and i == j):
                coincide.add((i, j))

    def step(p, t):
        return ((p[0] + t) % nz, (p[1] - t) % nw)

    runs = []
    done = set()
    for start in sorted(coincide):
        if start in done:
            continue
        p = start
        guard = 0
        while step(p, -1) in coincide:
            p = step(p, -1)
            guard += 1
            if guard > len(coincide):
                raise DegenerateZigzagError(
                    f"zigzag paths {z.index} and {w.index} coincide along a whole period"
                )
        first = p
        length = 0
        while p in coincide and p not in done:
            done.add(p)
            length += 1
            p = step(p, 1)
        runs.append((first[0], first[1], length))
    if same and not mirrors:
        # (i, j) and its mirror describe the same intersection of z with itself
        unique = []
        for i, j, n in runs:
            mirror = ((j - n + 1) % nz, (i + n - 1) % nz, n)
            if (i, j, n) <= mirror:
                unique.append((i, j, n))
        runs = unique
    return runs


def _run_shift(z: ZigzagPath, w: ZigzagPath, i: int, j: int) -> Offset:
    return sub(z.black(i), w.black(j))


def shared_runs(z: ZigzagPath, w: ZigzagPath, mirrors: bool = False) -> list[Intersection]:
    """All torus-level shared runs, any length, with the shift aligning the lifts.

    For ``z is w`` each run is listed once unless ``mirrors`` is set, in which
    case it also appears with the roles of the two passes swapped.
    """
    return [
        Intersection(z.index, w.index, i, j, n, _run_shift(z, w, i, j))
        for i, j, n in _torus_runs(z, w, mirrors)
    ]


def self_intersections(z: ZigzagPath) -> list[Intersection]:
    """Self-intersections of one lift of ``z`` (odd runs on the same lift)."""
    out = []
    for run in shared_runs(z, z):
        if run.counts and multiple_of(run.shift, z.homology) is not None:
            out.append(run)
    return out


@dataclass(frozen=True)
class LiftPair:
    """Runs shared by the reference lift of one path and one lift of another.

    For independent classes the list is complete.  For parallel classes the
    runs recur: translating every run by ``period`` (positions along the two
    lifts) gives the same pair of lifts again.
    """

    shift: Offset
    runs: tuple[Intersection, ...]
    period: tuple[int, int] | None
    same_direction: tuple[Intersection, Intersection] | None
    ordered: bool  # False when a class is trivial and positions are cyclic

    @property
    def periodic(self) -> bool:
        return self.period is not None

    @property
    def intersections(self) -> tuple[Intersection, ...]:
        return tuple(r for r in self.runs if r.counts)

    @property
    def shared_edges(self) -> float:
        if self.periodic and self.runs:
            return float("inf")
        return sum(r.length for r in self.runs)

    def to_dict(self) -> dict:
        return {
            "shift": list(self.shift),
            "periodic": self.periodic,
            "period": list(self.period) if self.period else None,
            "intersections": [r.to_dict() for r in self.intersections],
            "shared_edges": None if self.shared_edges == float("inf") else self.shared_edges,
            "same_direction": [r.to_dict() for r in self.same_direction]
            if self.same_direction
            else None,
        }


@dataclass(frozen=True)
class PairIntersections:
    first: int
    second: int
    lift_pairs: tuple[LiftPair, ...]

    @property
    def intersections(self) -> list[Intersection]:
        return [x for lp in self.lift_pairs for x in lp.intersections]

    @property
    def periodic(self) -> bool:
        return any(lp.periodic and lp.intersections for lp in self.lift_pairs)

    def same_direction(self) -> tuple[Intersection, Intersection] | None:
        for lp in self.lift_pairs:
            if lp.same_direction:
                return lp.same_direction
        return None

    def max_shared_edges(self) -> float:
        return max((lp.shared_edges for lp in self.lift_pairs), default=0)

    def to_dict(self) -> dict:
        return {
            "first": self.first,
            "second": self.second,
            "lift_pairs": [lp.to_dict() for lp in self.lift_pairs if lp.runs],
        }


def _solve_shift(hz: Offset, hw: Offset, delta: Offset):
    """Integer (k, l) with k*hz - l*hw = delta, plus the homogeneous step.

    Returns None if no solution, else ((k, l), step) where step is None when
    the solution is unique and (dk, dl) generates all others otherwise.
    Both classes must be nonzero.
    """
    d = det(hz, neg(hw))
    if d != 0:
        kn = det(delta, neg(hw))
        ln = det(hz, delta)
        if kn % d or ln % d:
            return None
        return ((kn // d, ln // d), None)
    g = primitive(hz)
    a = multiple_of(hz, g)
    b = multiple_of(hw, g)
    c = multiple_of(delta, g)
    if c is None:
        return None
    # k*a - l*b = c
    gg, x, y = _ext_gcd(a, -b)
    if c % gg:
        return None
    k0, l0 = x * (c // gg), y * (c // gg)
    return ((k0, l0), (b // gg, a // gg))


def _positions(z: ZigzagPath, w: ZigzagPath, run: Intersection, kl) -> tuple[int, int]:
    return (run.i + kl[0] * z.period, run.j + kl[1] * w.period)


def _same_direction_periodic(pa, pb, period) -> int | None:
    """An integer m with (pa - pb + m*period) having both coordinates of one strict sign."""
    cz, cw = pa[0] - pb[0], pa[1] - pb[1]
    pz, pw = period
    if pz * pw > 0:
        return 1 if cz == 0 and cw == 0 else (0 if cz * cw > 0 else 1 + abs(cz) + abs(cw))
    if pz * pw == 0:
        return 0 if cz * cw > 0 else None
    r1 = Fraction(-cz, pz)
    r2 = Fraction(-cw, pw)
    lo, hi = min(r1, r2), max(r1, r2)
    m = floor(lo) + 1
    return m if m < hi else None


def _group_lift_pairs(z: ZigzagPath, w: ZigzagPath, runs: list[Intersection]) -> list[LiftPair]:
    hz, hw = z.homology, w.homology
    groups: list[tuple[Intersection, list[tuple[Intersection, tuple[int, int]]], object]] = []
    ordered = hz != ZERO and hw != ZERO
    for run in runs:
        placed = False
        for base, members, step in groups:
            delta = sub(base.shift, run.shift)
            if ordered:
                sol = _solve_shift(hz, hw, delta)
                if sol is not None:
                    members.append((run, sol[0]))
                    placed = True
                    break
            else:
                q = _trivial_membership(hz, hw, delta)
                if q:
                    members.append((run, (0, 0)))
                    placed = True
                    break
        if not placed:
            step = _solve_shift(hz, hw, ZERO)[1] if ordered else None
            groups.append((run, [(run, (0, 0))], step))

    out = []
    for base, members, step in groups:
        period = None
        if step is not None:
            period = (step[0] * z.period, step[1] * w.period)
            if period[0] < 0 or (period[0] == 0 and period[1] < 0):
                period = (-period[0], -period[1])
        placed_runs = []
        positions = []
        for run, kl in members:
            pz, pw = _positions(z, w, run, kl)
            placed_runs.append(run.moved(pz - run.i, pw - run.j, base.shift))
            positions.append((pz, pw))
        witness = None
        if ordered:
            counted = [(r, p) for r, p in zip(placed_runs, positions) if r.counts]
            witness = _find_same_direction(counted, period)
        out.append(LiftPair(base.shift, tuple(placed_runs), period, witness, ordered))
    return out


def _trivial_membership(hz: Offset, hw: Offset, delta: Offset) -> bool:
    """Whether delta lies in Z*hz + Z*hw when at least one class is zero."""
    h = hz if hz != ZERO else hw
    return multiple_of(delta, h) is not None


def _find_same_direction(counted, period):
    for a in range(len(counted)):
        for b in range(a, len(counted)):
            (ra, pa), (rb, pb) = counted[a], counted[b]
            if period is None:
                if a != b and (pa[0] - pb[0]) * (pa[1] - pb[1]) > 0:
                    return (ra, rb)
                continue
            m = _same_direction_periodic(pa, pb, period)
            if m is not None and not (a == b and m == 0):
                shifted = rb.moved(-m * period[0], -m * period[1], rb.shift)
                return (ra, shifted)
    return None


def pair_intersections(z: ZigzagPath, w: ZigzagPath) -> PairIntersections:
    """Shared runs between the reference lift of ``z`` and the lifts of ``w``.

    Lifts of ``w`` are grouped up to the translations preserving the reference
    lift of ``z``; each group is one :class:`LiftPair`.  For ``z is w`` only
    lifts distinct from the reference one are reported (the reference lift
    itself is covered by :func:`self_intersections`).
    """
    if z.index != w.index:
        return PairIntersections(z.index, w.index, tuple(_group_lift_pairs(z, w, shared_runs(z, w))))
    h = z.homology
    runs = [r for r in shared_runs(z, z, mirrors=True) if multiple_of(r.shift, h) is None]
    pairs = []
    for lp in _group_lift_pairs(z, z, runs):
        # (z, z + s) and (z, z - s) are one pair of lifts up to translation
        if any(multiple_of(add(lp.shift, q.shift), h) is not None for q in pairs):
            continue
        pairs.append(lp)
    return PairIntersections(z.index, z.index, tuple(pairs))


# --- paths of the quiver against zigzag paths ----------------------------------------


@dataclass(frozen=True)
class PathIntersection:
    """A run where a quiver path follows a lift of a zigzag path.

    Path positions ``i .. i+length-1`` coincide with zigzag positions
    ``j, j-1, ...`` of the zigzag lift translated by ``shift``.  ``crossing``
    is +1 when the path crosses the zigzag from its left to its right.
    """

    zigzag: int
    i: int
    j: int
    length: int
    shift: Offset
    crossing: int

    @property
    def counts(self) -> bool:
        return self.length % 2 == 1


def path_zigzag_runs(lifted: list[tuple[str, Offset]], z: ZigzagPath) -> list[PathIntersection]:
    """All maximal runs (any parity) of a lifted path along lifts of ``z``.

    ``lifted`` is the list of (edge, black translate) crossed by the path.
    Runs on the same zigzag lift share one ``shift`` representative, so their
    ``j`` positions are comparable.
    """
    where: dict[str, list[int]] = {}
    for k, e in enumerate(z.edges):
        where.setdefault(e, []).append(k)

    def matches(i, k, shift):
        if not 0 <= i < len(lifted):
            return False
        e, b = lifted[i]
        return z.edge(k) == e and add(z.black(k), shift) == b

    runs = []
    reps: dict[Offset, Offset] = {}
    for i, (e, b) in enumerate(lifted):
        for k in where.get(e, ()):
            shift = sub(b, z.black(k))
            if matches(i - 1, k + 1, shift):
                continue
            n = 1
            while matches(i + n, k - n, shift):
                n += 1
            key = lift_class(shift, z.homology)
            rep = reps.setdefault(key, shift)
            q = multiple_of(sub(shift, rep), z.homology)
            j = k + (q or 0) * z.period
            direction = z.dart(k)[1]
            runs.append(PathIntersection(z.index, i, j, n, rep, +1 if direction == WB else -1))
    runs.sort(key=lambda r: (r.i, r.j))
    return runs


def path_zigzag_intersections(lifted, z: ZigzagPath) -> list[PathIntersection]:
    return [r for r in path_zigzag_runs(lifted, z) if r.counts]


def same_direction_pair(intersections: list[PathIntersection]):
    """Two intersections on one zigzag lift ordered alike along path and zigzag."""
    by_lift: dict[Offset, list[PathIntersection]] = {}
    for x in intersections:
        by_lift.setdefault(x.shift, []).append(x)
    for xs in by_lift.values():
        for a in range(len(xs)):
            for b in range(a + 1, len(xs)):
                if (xs[a].i - xs[b].i) * (xs[a].j - xs[b].j) > 0:
                    return (xs[a], xs[b])
    return None


def node_colors_along(m: DimerModel, z: ZigzagPath) -> list[str]:
    return [m.nodes[m.head(d)] for d in z.darts]


__all__ = [
    "BLACK",
    "WHITE",
    "DegenerateZigzagError",
    "Intersection",
    "LiftPair",
    "PairIntersections",
    "PathIntersection",
    "ZigzagPath",
    "compare_angle",
    "homology",
    "is_counterclockwise",
    "lift_class",
    "pair_intersections",
    "path_zigzag_intersections",
    "path_zigzag_runs",
    "primitive",
    "same_direction_pair",
    "self_intersections",
    "shared_runs",
    "slope_cyclic_order",
    "trace_zigzags",
    "zigzags_through_node",
]
