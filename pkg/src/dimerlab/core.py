"""Dimer models on the torus: data structure, validation, faces and the `.dimer` format.

A model is a bicolored multigraph together with a rotation system (the
counterclockwise cyclic order of edges at every node) and, for every edge, an
offset in the deck group Z^2.  An edge with offset ``d`` joins the black node's
lift in the copy ``T`` of the fundamental domain to the white node's lift in
the copy ``T + d``.

Edge traversals are called *darts* and written ``(edge_id, BW)`` or
``(edge_id, WB)`` for black-to-white and white-to-black.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from math import gcd
from pathlib import Path
from typing import Iterable

BLACK = "black"
WHITE = "white"
COLORS = (BLACK, WHITE)

BW = "bw"
WB = "wb"

Offset = tuple[int, int]
Dart = tuple[str, str]

ZERO: Offset = (0, 0)


def add(p: Offset, q: Offset) -> Offset:
    return (p[0] + q[0], p[1] + q[1])


def sub(p: Offset, q: Offset) -> Offset:
    return (p[0] - q[0], p[1] - q[1])


def neg(p: Offset) -> Offset:
    return (-p[0], -p[1])


def scale(k: int, p: Offset) -> Offset:
    return (k * p[0], k * p[1])


def det(p: Offset, q: Offset) -> int:
    return p[0] * q[1] - p[1] * q[0]


def opposite(direction: str) -> str:
    return WB if direction == BW else BW


class ModelSyntaxError(ValueError):
    """Raised by :func:`parse_model` for malformed `.dimer` text."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


@dataclass(frozen=True)
class Edge:
    id: str
    black: str
    white: str
    offset: Offset = ZERO


@dataclass(frozen=True, eq=False)
class DimerModel:
    """Bicolored graph on the torus with rotation system and edge offsets.

    ``nodes`` maps node id to color, ``edges`` maps edge id to :class:`Edge`
    and ``rotations`` maps node id to the counterclockwise cycle of incident
    edge ids.  Instances are treated as immutable.
    """

    nodes: dict[str, str]
    edges: dict[str, Edge]
    rotations: dict[str, tuple[str, ...]]
    name: str = field(default="", compare=False)

    def __eq__(self, other):
        # rotations are cyclic, so compare them up to a shift
        if not isinstance(other, DimerModel):
            return NotImplemented
        return (
            self.nodes == other.nodes
            and self.edges == other.edges
            and {v: _canonical_cycle(r) for v, r in self.rotations.items()}
            == {v: _canonical_cycle(r) for v, r in other.rotations.items()}
        )

    __hash__ = None  # type: ignore[assignment]

    # --- incidence -------------------------------------------------------

    def color(self, node: str) -> str:
        return self.nodes[node]

    def endpoint(self, edge_id: str, color: str) -> str:
        e = self.edges[edge_id]
        return e.black if color == BLACK else e.white

    def tail(self, dart: Dart) -> str:
        e = self.edges[dart[0]]
        return e.black if dart[1] == BW else e.white

    def head(self, dart: Dart) -> str:
        e = self.edges[dart[0]]
        return e.white if dart[1] == BW else e.black

    def dart_offset(self, dart: Dart) -> Offset:
        """Translation from the lift of the tail to the lift of the head."""
        d = self.edges[dart[0]].offset
        return d if dart[1] == BW else neg(d)

    def leaving(self, node: str, edge_id: str) -> Dart:
        """The dart that leaves ``node`` along ``edge_id``."""
        return (edge_id, BW if self.nodes[node] == BLACK else WB)

    def darts(self) -> list[Dart]:
        return [(e, d) for e in sorted(self.edges) for d in (BW, WB)]

    def valence(self, node: str) -> int:
        return len(self.rotations.get(node, ()))

    @cached_property
    def _rotation_index(self) -> dict[str, dict[str, int]]:
        return {v: {e: i for i, e in enumerate(rot)} for v, rot in self.rotations.items()}

    def ccw_next(self, node: str, edge_id: str) -> str:
        rot = self.rotations[node]
        return rot[(self._rotation_index[node][edge_id] + 1) % len(rot)]

    def cw_next(self, node: str, edge_id: str) -> str:
        rot = self.rotations[node]
        return rot[(self._rotation_index[node][edge_id] - 1) % len(rot)]

    def rotation_position(self, node: str, edge_id: str) -> int:
        return self._rotation_index[node][edge_id]

    def incident_edges(self, node: str) -> list[str]:
        return sorted(
            e.id for e in self.edges.values() if node in (e.black, e.white)
        )

    # --- cached derived structure -------------------------------------------

    @cached_property
    def faces(self) -> list["Face"]:
        return trace_faces(self)

    @cached_property
    def dart_face(self) -> dict[Dart, tuple[int, int]]:
        """Map dart -> (face index, position of the dart in the face cycle)."""
        out = {}
        for f in self.faces:
            for k, dart in enumerate(f.darts):
                out[dart] = (f.index, k)
        return out

    def summary(self) -> dict:
        return {
            "name": self.name,
            "nodes": len(self.nodes),
            "edges": len(self.edges),
            "faces": len(self.faces),
        }


@dataclass(frozen=True)
class Face:
    """A face traced from the rotation system.

    ``darts`` lists the boundary darts in traversal order, with the face on
    the right of every dart.  ``tails[k]`` is the translate of the tail node of
    ``darts[k]`` in the face's reference lift (the first tail sits in the
    copy (0, 0)); ``offset`` is the total translation around the boundary.
    """

    index: int
    darts: tuple[Dart, ...]
    tails: tuple[Offset, ...]
    offset: Offset

    @property
    def sides(self) -> tuple[tuple[str, str], ...]:
        return tuple((e, _side(d)) for e, d in self.darts)

    def __len__(self) -> int:
        return len(self.darts)


def _side(direction: str) -> str:
    # the face on the right of a black-to-white dart is left of white-to-black
    return "left" if direction == BW else "right"


def _face_key(dart: Dart) -> tuple[str, str]:
    return (dart[0], _side(dart[1]))


def face_successor(m: DimerModel, dart: Dart) -> Dart:
    """Next dart along the boundary of the face lying right of ``dart``."""
    x = m.head(dart)
    return m.leaving(x, m.ccw_next(x, dart[0]))


def trace_faces(m: DimerModel) -> list[Face]:
    """Trace the faces of the rotation system, each edge side used once.

    Faces are sorted by their smallest (edge id, side) and each face cycle
    starts at that side.  The rotation system must be total.
    """
    seen: set[Dart] = set()
    cycles = []
    for start in m.darts():
        if start in seen:
            continue
        cycle = []
        dart = start
        while dart not in seen:
            seen.add(dart)
            cycle.append(dart)
            dart = face_successor(m, dart)
        if dart != start:
            raise ValueError("rotation system is not a permutation of darts")
        k = min(range(len(cycle)), key=lambda i: _face_key(cycle[i]))
        cycles.append(cycle[k:] + cycle[:k])
    cycles.sort(key=lambda c: _face_key(c[0]))

    faces = []
    for index, cycle in enumerate(cycles):
        pos = ZERO
        tails = []
        for dart in cycle:
            tails.append(pos)
            pos = add(pos, m.dart_offset(dart))
        faces.append(Face(index, tuple(cycle), tuple(tails), pos))
    return faces


# --- validation ----------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    status: str  # "pass" | "fail" | "skipped"
    witness: object = None
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "witness": self.witness,
            "message": self.message,
        }


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[Check, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.ok]

    def to_dict(self) -> dict:
        return {"valid": self.ok, "checks": [c.to_dict() for c in self.checks]}


VALIDATION_CHECKS = (
    "bipartite",
    "rotation_totality",
    "valence",
    "connected",
    "euler",
    "face_offsets",
    "offset_lattice",
    "orientation",
)


def validate_model(m: DimerModel) -> ValidationReport:
    """Check that ``m`` is a genuine dimer model on the torus.

    Beyond Euler characteristic zero and closed face boundaries, the offsets
    must induce an isomorphism from the homology of the embedded surface to
    Z^2 that preserves orientation; without these two extra checks a model
    with all offsets zero would pass.
    """
    checks: list[Check] = []

    bad = next(
        (
            e.id
            for e in sorted(m.edges.values(), key=lambda e: e.id)
            if m.nodes.get(e.black) != BLACK or m.nodes.get(e.white) != WHITE
        ),
        None,
    )
    checks.append(
        Check("bipartite", "fail", bad, "edge endpoint has wrong color")
        if bad is not None
        else Check("bipartite", "pass")
    )

    problem = _rotation_problem(m)
    checks.append(
        Check("rotation_totality", "fail", problem[0], problem[1])
        if problem
        else Check("rotation_totality", "pass")
    )

    low = next((v for v in sorted(m.nodes) if len(m.incident_edges(v)) < 2), None)
    checks.append(
        Check("valence", "fail", low, "node of valence < 2")
        if low is not None
        else Check("valence", "pass")
    )

    stray = _first_unreachable(m)
    checks.append(
        Check("connected", "fail", stray, "node not reachable from the first node")
        if stray is not None
        else Check("connected", "pass")
    )

    if problem or bad is not None:
        why = "rotation system incomplete" if problem else "graph is not bipartite"
        for name in VALIDATION_CHECKS[4:]:
            checks.append(Check(name, "skipped", None, why))
        return ValidationReport(tuple(checks))

    faces = m.faces
    chi = len(m.nodes) - len(m.edges) + len(faces)
    checks.append(
        Check("euler", "pass" if chi == 0 else "fail", None if chi == 0 else chi,
              f"V - E + F = {chi}")
    )

    open_face = next((f.index for f in faces if f.offset != ZERO), None)
    checks.append(
        Check("face_offsets", "fail", open_face, "face boundary does not close in the lift")
        if open_face is not None
        else Check("face_offsets", "pass")
    )
    if open_face is not None or chi != 0:
        checks.append(Check("offset_lattice", "skipped", None, "faces do not lift"))
        checks.append(Check("orientation", "skipped", None, "faces do not lift"))
        return ValidationReport(tuple(checks))

    primal = _fundamental_cycles(m)
    index = _lattice_index([off for _, off in primal])
    checks.append(
        Check("offset_lattice", "pass")
        if index == 1
        else Check("offset_lattice", "fail", index,
                   "cycle offsets span a sublattice of index != 1")
    )
    if index != 1:
        checks.append(Check("orientation", "skipped", None, "offset lattice degenerate"))
        return ValidationReport(tuple(checks))

    mismatch = _orientation_mismatch(m, primal)
    checks.append(
        Check("orientation", "fail", mismatch,
              "rotation system is not counterclockwise for the offset orientation")
        if mismatch is not None
        else Check("orientation", "pass")
    )
    return ValidationReport(tuple(checks))


def _rotation_problem(m: DimerModel) -> tuple[object, str] | None:
    for v in sorted(m.nodes):
        if v not in m.rotations:
            return (v, "node has no rotation")
        rot = m.rotations[v]
        if len(set(rot)) != len(rot):
            return (v, "edge-end repeated in rotation")
        if sorted(rot) != m.incident_edges(v):
            return (v, "rotation does not list exactly the incident edges")
    extra = sorted(set(m.rotations) - set(m.nodes))
    if extra:
        return (extra[0], "rotation for unknown node")
    return None


def _first_unreachable(m: DimerModel) -> str | None:
    if not m.nodes:
        return None
    adj: dict[str, set[str]] = {v: set() for v in m.nodes}
    for e in m.edges.values():
        if e.black in adj and e.white in adj:
            adj[e.black].add(e.white)
            adj[e.white].add(e.black)
    start = min(m.nodes)
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for u in adj[v]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    missing = sorted(set(m.nodes) - seen)
    return missing[0] if missing else None


def _spanning_tree(m: DimerModel) -> tuple[dict[str, Offset], dict[str, Dart | None]]:
    """BFS tree from the smallest node: node translates and parent darts."""
    start = min(m.nodes)
    pos = {start: ZERO}
    parent: dict[str, Dart | None] = {start: None}
    queue = [start]
    for v in queue:
        for e in m.rotations[v]:
            dart = m.leaving(v, e)
            u = m.head(dart)
            if u not in pos:
                pos[u] = add(pos[v], m.dart_offset(dart))
                parent[u] = dart
                queue.append(u)
    return pos, parent


def _tree_path(m: DimerModel, parent, node: str) -> list[Dart]:
    path = []
    while parent[node] is not None:
        dart = parent[node]
        path.append(dart)
        node = m.tail(dart)
    return path[::-1]


def _fundamental_cycles(m: DimerModel) -> list[tuple[list[Dart], Offset]]:
    """One closed dart walk per non-tree edge, with its total offset."""
    pos, parent = _spanning_tree(m)
    tree = {d[0] for d in parent.values() if d is not None}
    cycles = []
    for e in sorted(m.edges):
        if e in tree:
            continue
        edge = m.edges[e]
        walk = (
            _tree_path(m, parent, edge.black)
            + [(e, BW)]
            + [(d[0], opposite(d[1])) for d in reversed(_tree_path(m, parent, edge.white))]
        )
        cycles.append((walk, sub(add(pos[edge.black], edge.offset), pos[edge.white])))
    return cycles


def _lattice_index(vectors: Iterable[Offset]) -> int:
    """Index of the lattice spanned by ``vectors`` in Z^2 (0 if rank < 2)."""
    vectors = list(vectors)
    g = 0
    for i in range(len(vectors)):
        for j in range(i + 1, len(vectors)):
            g = gcd(g, det(vectors[i], vectors[j]))
    return abs(g)


def dual_arrow_data(m: DimerModel) -> dict[str, tuple[int, int, Offset]]:
    """For every edge, the dual arrow (source face, target face, offset).

    The arrow crosses the edge with the white node on its right: it leaves the
    face left of the white-to-black traversal and enters the face on its right.
    The offset is the translation between the reference lifts of the two faces.
    """
    faces = m.faces
    out = {}
    for e_id, e in m.edges.items():
        fs, ks = m.dart_face[(e_id, BW)]
        ft, kt = m.dart_face[(e_id, WB)]
        black_in_source = faces[fs].tails[ks]
        black_in_target = sub(faces[ft].tails[kt], e.offset)
        out[e_id] = (fs, ft, sub(black_in_source, black_in_target))
    return out


def _orientation_mismatch(m: DimerModel, primal) -> object | None:
    """Compare combinatorial intersection numbers with determinants of offsets.

    A primal cycle meets a dual cycle only at edge midpoints; with the torus
    orientation the signed count must equal det(offset_primal, offset_dual).
    """
    arrows = dual_arrow_data(m)
    # spanning tree of the dual graph
    nf = len(m.faces)
    pos = {0: ZERO}
    parent: dict[int, tuple[str, int] | None] = {0: None}
    queue = [0]
    adj: dict[int, list[tuple[str, int, int, Offset]]] = {f: [] for f in range(nf)}
    for a in sorted(arrows):
        s, t, off = arrows[a]
        adj[s].append((a, +1, t, off))
        adj[t].append((a, -1, s, neg(off)))
    for f in queue:
        for a, sign, g, off in adj[f]:
            if g not in pos:
                pos[g] = add(pos[f], off)
                parent[g] = (a, sign)
                queue.append(g)
    tree = {p[0] for p in parent.values() if p is not None}

    def root_path(f):
        path = []
        while parent[f] is not None:
            a, sign = parent[f]
            path.append((a, sign))
            f = arrows[a][0] if sign == +1 else arrows[a][1]
        return path

    dual_cycles = []
    for a in sorted(arrows):
        if a in tree:
            continue
        s, t, off = arrows[a]
        crossing: dict[str, int] = {}
        for b, sign in root_path(s) + [(a, +1)] + [(b, -sign) for b, sign in root_path(t)]:
            crossing[b] = crossing.get(b, 0) + sign
        dual_cycles.append((a, crossing, sub(add(pos[s], off), pos[t])))

    for walk, p_off in primal:
        for a, crossing, d_off in dual_cycles:
            count = 0
            for e, direction in walk:
                c = crossing.get(e, 0)
                # dart w->b crossed left-to-right by the arrow contributes -1
                count += c if direction == BW else -c
            if count != det(p_off, d_off):
                return {"dual_arrow": a, "combinatorial": count, "homological": det(p_off, d_off)}
    return None


# --- text format ---------------------------------------------------------------

_TOKEN = re.compile(r"\S+")
_INT = re.compile(r"[+-]?\d+$")


def parse_model(text: str, name: str = "") -> DimerModel:
    """Parse `.dimer` text.  Raises :class:`ModelSyntaxError` on malformed input."""
    nodes: dict[str, str] = {}
    edges: dict[str, Edge] = {}
    rot_lines: list[tuple[int, int, str, list[tuple[int, str]]]] = []
    header_seen = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = [(m.start() + 1, m.group()) for m in _TOKEN.finditer(line)]
        if not tokens:
            continue
        col, kw = tokens[0]
        if not header_seen:
            if kw != "torus" or len(tokens) != 1:
                raise ModelSyntaxError("expected header 'torus'", lineno, col)
            header_seen = True
            continue
        args = tokens[1:]
        if kw == "node":
            if len(args) != 2:
                raise ModelSyntaxError("usage: node <id> black|white", lineno, col)
            (c1, nid), (c2, color) = args
            if color not in COLORS:
                raise ModelSyntaxError(f"unknown color {color!r}", lineno, c2)
            if nid in nodes:
                raise ModelSyntaxError(f"duplicate node id {nid!r}", lineno, c1)
            nodes[nid] = color
        elif kw == "edge":
            if len(args) != 5:
                raise ModelSyntaxError("usage: edge <id> <black> <white> <u> <v>", lineno, col)
            (c1, eid), (_, b), (_, w), (cu, u), (cv, v) = args
            for c, tok in ((cu, u), (cv, v)):
                if not _INT.match(tok):
                    raise ModelSyntaxError(f"expected integer, got {tok!r}", lineno, c)
            if eid in edges:
                raise ModelSyntaxError(f"duplicate edge id {eid!r}", lineno, c1)
            edges[eid] = Edge(eid, b, w, (int(u), int(v)))
        elif kw == "rot":
            if not args:
                raise ModelSyntaxError("usage: rot <node> <edge-end>...", lineno, col)
            rot_lines.append((lineno, args[0][0], args[0][1], args[1:]))
        elif kw == "torus":
            raise ModelSyntaxError("duplicate header", lineno, col)
        else:
            raise ModelSyntaxError(f"unknown directive {kw!r}", lineno, col)

    if not header_seen:
        raise ModelSyntaxError("empty input: missing header 'torus'")
    if not nodes:
        raise ModelSyntaxError("no nodes")
    for e in edges.values():
        for endpoint in (e.black, e.white):
            if endpoint not in nodes:
                raise ModelSyntaxError(f"dangling endpoint {endpoint!r} of edge {e.id!r}")

    rotations: dict[str, tuple[str, ...]] = {}
    for lineno, col, nid, refs in rot_lines:
        if nid not in nodes:
            raise ModelSyntaxError(f"rotation for unknown node {nid!r}", lineno, col)
        if nid in rotations:
            raise ModelSyntaxError(f"duplicate rotation for node {nid!r}", lineno, col)
        seq = []
        for c, ref in refs:
            eid, _, k = ref.partition("@")
            e = edges.get(eid)
            if e is None or nid not in (e.black, e.white) or (k and k != "0"):
                raise ModelSyntaxError(f"rotation references unknown edge-end {ref!r}", lineno, c)
            seq.append(eid)
        rotations[nid] = tuple(seq)

    return DimerModel(nodes, edges, rotations, name)


def load_model(path: str | Path) -> DimerModel:
    path = Path(path)
    return parse_model(path.read_text(encoding="utf-8"), name=path.stem)


def _canonical_cycle(seq: tuple[str, ...]) -> tuple[str, ...]:
    if not seq:
        return seq
    k = seq.index(min(seq))
    return seq[k:] + seq[:k]


def serialize_model(m: DimerModel) -> str:
    """Canonical `.dimer` text: nodes, edges and rotations sorted by id."""
    lines = ["torus"]
    for nid in sorted(m.nodes):
        lines.append(f"node {nid} {m.nodes[nid]}")
    for eid in sorted(m.edges):
        e = m.edges[eid]
        lines.append(f"edge {e.id} {e.black} {e.white} {e.offset[0]} {e.offset[1]}")
    for nid in sorted(m.rotations):
        lines.append("rot " + " ".join((nid,) + _canonical_cycle(m.rotations[nid])))
    return "\n".join(lines) + "\n"


def make_model(
    nodes: dict[str, str],
    edges: Iterable[tuple[str, str, str, Offset]],
    rotations: dict[str, Iterable[str]],
    name: str = "",
) -> DimerModel:
    """Convenience constructor from plain tuples ``(id, black, white, offset)``."""
    return DimerModel(
        dict(nodes),
        {eid: Edge(eid, b, w, tuple(off)) for eid, b, w, off in edges},
        {v: tuple(r) for v, r in rotations.items()},
        name,
    )
