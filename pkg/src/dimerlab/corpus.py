"""Standard dimer-model families, local moves and the named fixtures.

Families are finite covers of one-cell models.  The moves below all keep a
cellular torus embedding (each produces a model that passes validation when
its input does), which is how the fixtures were found; the shipped fixtures
are frozen ``.dimer`` files and their phenomena are asserted by the tests.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from importlib import resources

from .core import BLACK, WHITE, DimerModel, make_model, parse_model, sub

_CONIFOLD = (
    {"b": BLACK, "w": WHITE},
    [("a", "b", "w", (0, 0)), ("c", "b", "w", (1, 0)), ("b", "b", "w", (1, 1)), ("d", "b", "w", (0, 1))],
    {"b": "acbd", "w": "acbd"},
)
_HEXAGON = (
    {"b": BLACK, "w": WHITE},
    [("x", "b", "w", (0, 0)), ("y", "b", "w", (1, 0)), ("z", "b", "w", (0, 1))],
    {"b": "xyz", "w": "xyz"},
)


def conifold() -> DimerModel:
    nodes, edges, rot = _CONIFOLD
    return make_model(nodes, edges, rot, "conifold")


def hexagon() -> DimerModel:
    nodes, edges, rot = _HEXAGON
    return make_model(nodes, edges, rot, "hexagonal-1x1")


def cover(base: DimerModel, m: int, n: int, name: str = "") -> DimerModel:
    """The m-by-n cover of ``base`` induced by the sublattice mZ x nZ."""
    if m < 1 or n < 1:
        raise ValueError("cover sizes must be positive")
    if (m, n) == (1, 1):
        return DimerModel(dict(base.nodes), dict(base.edges), dict(base.rotations), name or base.name)

    def tag(x, i, j):
        return f"{x}_{i}_{j}"

    nodes = {}
    edges = []
    for i in range(m):
        for j in range(n):
            for v, c in base.nodes.items():
                nodes[tag(v, i, j)] = c
            for e in base.edges.values():
                di, dj = e.offset
                wi, wj = i + di, j + dj
                edges.append(
                    (tag(e.id, i, j), tag(e.black, i, j), tag(e.white, wi % m, wj % n), (wi // m, wj // n))
                )
    rotations = {}
    for i in range(m):
        for j in range(n):
            for v, rot in base.rotations.items():
                row = []
                for eid in rot:
                    e = base.edges[eid]
                    if v == e.black:
                        row.append(tag(eid, i, j))
                    else:
                        row.append(tag(eid, (i - e.offset[0]) % m, (j - e.offset[1]) % n))
                rotations[tag(v, i, j)] = row
    return make_model(nodes, edges, rotations, name)


def build_hexagonal(m: int, n: int) -> DimerModel:
    """Honeycomb with m-by-n fundamental cells."""
    return cover(hexagon(), m, n, f"hexagonal-{m}x{n}")


def build_square(m: int, n: int) -> DimerModel:
    """Square lattice with m-by-n conifold cells; (1, 1) is the conifold.

    Every cell holds one black and one white node, so the coloring is
    consistent for all sizes.
    """
    if m < 1 or n < 1:
        raise ValueError("grid sizes must be positive")
    return cover(conifold(), m, n, "conifold" if (m, n) == (1, 1) else f"square-{m}x{n}")


# --- local moves ------------------------------------------------------------------


def _fresh(existing, prefix: str) -> str:
    k = 0
    while f"{prefix}{k}" in existing:
        k += 1
    return f"{prefix}{k}"


def _parts(m: DimerModel):
    nodes = dict(m.nodes)
    edges = {e.id: (e.id, e.black, e.white, e.offset) for e in m.edges.values()}
    rot = {v: list(r) for v, r in m.rotations.items()}
    return nodes, edges, rot


def _insert_after(row: list[str], after: str, new: str) -> None:
    row.insert(row.index(after) + 1, new)


def subdivide_edge(m: DimerModel, eid: str) -> DimerModel:
    """Replace edge ``eid`` by a path black - white - black - white through two new divalent nodes."""
    nodes, edges, rot = _parts(m)
    _, b, w, off = edges[eid]
    w1 = _fresh(nodes, "sw")
    nodes[w1] = WHITE
    b1 = _fresh(nodes, "sb")
    nodes[b1] = BLACK
    f = _fresh(edges, "s")
    edges[f] = (f, b1, w1, (0, 0))
    g = _fresh(edges, "s")
    edges[g] = (g, b1, w, off)
    edges[eid] = (eid, b, w1, (0, 0))
    rot[w1] = [eid, f]
    rot[b1] = [g, f]
    rot[w] = [g if x == eid else x for x in rot[w]]
    return make_model(nodes, edges.values(), rot, m.name)


def _corner(m: DimerModel, face: int, k: int):
    """(node, previous edge, next edge, translate) at corner k of a face."""
    f = m.faces[face]
    dart = f.darts[k]
    prev = f.darts[k - 1]
    return m.tail(dart), prev[0], dart[0], f.tails[k]


def add_chord(m: DimerModel, face: int, i: int, k: int) -> DimerModel:
    """Join corners i and k of a face (of opposite colors) by a new edge inside it."""
    x, xp, _, tx = _corner(m, face, i)
    y, yp, _, ty = _corner(m, face, k)
    if m.nodes[x] == m.nodes[y]:
        raise ValueError("chord endpoints must have opposite colors")
    nodes, edges, rot = _parts(m)
    e = _fresh(edges, "c")
    if m.nodes[x] == BLACK:
        edges[e] = (e, x, y, sub(ty, tx))
    else:
        edges[e] = (e, y, x, sub(tx, ty))
    _insert_after(rot[x], xp, e)
    _insert_after(rot[y], yp, e)
    return make_model(nodes, edges.values(), rot, m.name)


def add_star(m: DimerModel, face: int, corners: list[int], color: str) -> DimerModel:
    """Place a new node inside a face and join it to the given corners."""
    if len(corners) < 2:
        raise ValueError("a new node needs at least two edges")
    nodes, edges, rot = _parts(m)
    v = _fresh(nodes, "n")
    nodes[v] = color
    new_rot = []
    for k in sorted(set(corners)):
        x, xp, _, tx = _corner(m, face, k)
        if m.nodes[x] == color:
            raise ValueError("star corners must have the opposite color")
        e = _fresh(edges, "t")
        if color == BLACK:
            edges[e] = (e, v, x, tx)
        else:
            edges[e] = (e, x, v, sub((0, 0), tx))
        _insert_after(rot[x], xp, e)
        new_rot.append(e)
    rot[v] = list(reversed(new_rot))
    return make_model(nodes, edges.values(), rot, m.name)


def delete_edge(m: DimerModel, eid: str) -> DimerModel:
    nodes, edges, rot = _parts(m)
    e = edges.pop(eid)
    for v in (e[1], e[2]):
        rot[v] = [x for x in rot[v] if x != eid]
    return make_model(nodes, edges.values(), rot, m.name)


def random_move(m: DimerModel, rng: random.Random) -> DimerModel:
    """One random local move; the caller validates the result."""
    kind = rng.choice(["chord", "chord", "star", "delete", "subdivide"])
    faces = m.faces
    if kind == "subdivide":
        return subdivide_edge(m, rng.choice(sorted(m.edges)))
    if kind == "delete":
        return delete_edge(m, rng.choice(sorted(m.edges)))
    f = rng.randrange(len(faces))
    n = len(faces[f])
    if kind == "chord":
        i = rng.randrange(n)
        k = (i + 1 + 2 * rng.randrange(max(1, n // 2))) % n
        return add_chord(m, f, i, k)
    color = rng.choice([BLACK, WHITE])
    opts = [k for k in range(n) if m.nodes[m.tail(faces[f].darts[k])] != color]
    pick = sorted(rng.sample(opts, rng.randint(min(2, len(opts)), len(opts))))
    return add_star(m, f, pick, color)


# --- named fixtures ---------------------------------------------------------------------


@dataclass(frozen=True)
class Expectation:
    value: object
    provenance: str  # PAPER, TRIVIAL or DERIVED
    oracle: str = ""


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    model: DimerModel
    expected: dict = field(default_factory=dict)
    description: str = ""
    extra: dict = field(default_factory=dict)

    def expects(self, key: str):
        e = self.expected.get(key)
        return None if e is None else e.value


def _e(value, provenance, oracle=""):
    return Expectation(value, provenance, oracle)


FIXTURES = {
    "conifold": {
        "consistent": _e(True, "DERIVED", "lift solver and brute-force lift oracle"),
        "properly_ordered": _e(True, "DERIVED", "node cyclic orders by hand"),
        "ks_criterion": _e(True, "DERIVED", "four short zigzag paths by hand"),
        "non_degenerate": _e(True, "PAPER"),
        "matchings": _e(4, "PAPER"),
        "counterexample": _e(False, "DERIVED", "bounded search with exhaustive closures"),
    },
    "weak-not-equivalent-pair": {
        "consistent": _e(False, "DERIVED", "zigzag trace"),
        "properly_ordered": _e(False, "DERIVED", "zigzag trace"),
        "non_degenerate": _e(True, "DERIVED", "brute-force subset enumeration"),
        "matchings": _e(6, "DERIVED", "brute-force subset enumeration"),
        "weakly_equivalent_pair": _e(True, "DERIVED", "naive saturation of path classes"),
    },
    "no-perfect-matching": {
        "matchings": _e(0, "DERIVED", "brute-force subset enumeration"),
        "non_degenerate": _e(False, "TRIVIAL"),
        "consistent": _e(False, "DERIVED", "zigzag trace"),
        "properly_ordered": _e(False, "DERIVED", "zigzag trace"),
    },
    "trivial-zigzag": {
        "consistent": _e(False, "DERIVED", "zigzag trace"),
        "properly_ordered": _e(False, "DERIVED", "zigzag trace"),
        "ks_criterion": _e(False, "DERIVED", "zigzag trace"),
        "non_degenerate": _e(True, "DERIVED", "brute-force subset enumeration"),
        "matchings": _e(6, "DERIVED", "brute-force subset enumeration"),
        "counterexample": _e(True, "DERIVED", "bounded search with exhaustive closures"),
        "consistency_failures": _e([1], "DERIVED", "zigzag trace"),
    },
    "self-intersecting-zigzag": {
        "consistent": _e(False, "DERIVED", "brute-force lift oracle"),
        "properly_ordered": _e(False, "DERIVED", "brute-force lift oracle"),
        "ks_criterion": _e(False, "DERIVED", "brute-force lift oracle"),
        "non_degenerate": _e(True, "DERIVED", "brute-force subset enumeration"),
        "matchings": _e(5, "DERIVED", "brute-force subset enumeration"),
        "counterexample": _e(True, "DERIVED", "bounded search with exhaustive closures"),
        "consistency_failures": _e([2, 3], "DERIVED", "brute-force lift oracle"),
    },
    "double-same-direction": {
        "consistent": _e(False, "DERIVED", "brute-force lift oracle"),
        "properly_ordered": _e(False, "DERIVED", "checker"),
        "ks_criterion": _e(False, "DERIVED", "brute-force lift oracle"),
        "non_degenerate": _e(True, "DERIVED", "brute-force subset enumeration"),
        "matchings": _e(4, "DERIVED", "brute-force subset enumeration"),
        "counterexample": _e(True, "DERIVED", "bounded search with exhaustive closures"),
        "consistency_failures": _e([3], "DERIVED", "brute-force lift oracle"),
    },
    "consistent-non-isoradial": {
        "consistent": _e(True, "DERIVED", "brute-force lift oracle"),
        "properly_ordered": _e(True, "DERIVED", "checker"),
        "ks_criterion": _e(False, "DERIVED", "brute-force lift oracle"),
        "ks_failures": _e([2], "DERIVED", "brute-force lift oracle"),
        "non_degenerate": _e(True, "DERIVED", "brute-force subset enumeration"),
        "matchings": _e(11, "DERIVED", "brute-force subset enumeration"),
        "counterexample": _e(False, "DERIVED", "bounded search with exhaustive closures"),
    },
    "same-class-common-node": {
        "consistent": _e(False, "DERIVED", "checker"),
        "properly_ordered": _e(False, "DERIVED", "zigzag trace"),
        "non_degenerate": _e(True, "DERIVED", "brute-force subset enumeration"),
        "matchings": _e(8, "DERIVED", "brute-force subset enumeration"),
        "properly_ordered_failures": _e([3, 4], "DERIVED", "zigzag trace"),
    },
}

EXTRAS = {
    "weak-not-equivalent-pair": {"pair": ("c0.x.c1.z", "c1.z.c0.x"), "power": 1},
    "no-perfect-matching": {"relation": ("x", ("a",), ("b", "c", "d", "a", "e"))},
}

FIXTURE_NAMES = tuple(FIXTURES)


def fixture_text(name: str) -> str:
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(FIXTURE_NAMES)}")
    return resources.files("dimerlab.fixtures").joinpath(f"{name}.dimer").read_text(encoding="utf-8")


def _leading_comment(text: str) -> str:
    lines = []
    for line in text.splitlines():
        if not line.startswith("#"):
            break
        lines.append(line.lstrip("# ").rstrip())
    return " ".join(lines)


def fixture(name: str) -> CorpusEntry:
    """A shipped fixture with its expectations; the description is the file's header comment."""
    text = fixture_text(name)
    expected = FIXTURES[name]
    return CorpusEntry(
        name, parse_model(text, name=name), dict(expected), _leading_comment(text), dict(EXTRAS.get(name, {}))
    )


def families(max_size: int = 3):
    for m in range(1, max_size + 1):
        for n in range(1, max_size + 1):
            yield build_hexagonal(m, n)
            yield build_square(m, n)


def corpus(max_size: int = 3) -> list[DimerModel]:
    """All fixtures plus the hexagonal and square families up to max_size."""
    return [fixture(n).model for n in FIXTURE_NAMES] + list(families(max_size))
