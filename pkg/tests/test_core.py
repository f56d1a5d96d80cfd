import pytest

from dimerlab.core import (
    ModelSyntaxError,
    VALIDATION_CHECKS,
    dual_arrow_data,
    make_model,
    parse_model,
    serialize_model,
    validate_model,
)
from dimerlab.corpus import FIXTURE_NAMES, conifold, corpus, delete_edge, fixture, fixture_text, hexagon


def two_node(offsets, rb="xyz", rw="xyz"):
    edges = [(e, "b", "w", off) for e, off in zip("xyz", offsets)]
    return make_model({"b": "black", "w": "white"}, edges, {"b": rb, "w": rw})


def failing(m):
    return {c.name: c.witness for c in validate_model(m).checks if c.status == "fail"}


# --- faces -----------------------------------------------------------------------


def test_conifold_has_two_quadrilateral_faces():
    faces = conifold().faces
    assert [len(f) for f in faces] == [4, 4]


def test_hexagon_has_one_hexagonal_face():
    faces = hexagon().faces
    assert [len(f) for f in faces] == [6]


def test_every_dart_lies_on_exactly_one_face():
    for m in corpus(2):
        seen = [d for f in m.faces for d in f.darts]
        assert sorted(seen) == sorted(m.darts())


def test_conifold_face_boundaries_alternate_directions():
    for f in conifold().faces:
        dirs = [d for _, d in f.darts]
        assert all(a != b for a, b in zip(dirs, dirs[1:] + dirs[:1]))


def test_dual_arrows_of_conifold_go_between_the_two_faces():
    data = dual_arrow_data(conifold())
    assert sorted(data) == ["a", "b", "c", "d"]
    assert {(s, t) for s, t, _ in data.values()} == {(0, 1), (1, 0)}


# --- validation ------------------------------------------------------------------


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_fixtures_validate(name):
    report = validate_model(fixture(name).model)
    assert report.ok, report.failures()
    assert [c.name for c in report.checks] == list(VALIDATION_CHECKS)


def test_family_models_validate():
    for m in corpus(3):
        assert validate_model(m).ok, m.name


def test_sphere_graph_fails_euler():
    m = make_model({"b": "black", "w": "white"}, [("x", "b", "w", (0, 0)), ("y", "b", "w", (0, 0))],
                   {"b": "xy", "w": "xy"})
    assert failing(m) == {"euler": 2}


def test_zero_offsets_pass_euler_and_faces_but_fail_lattice():
    # Euler characteristic and closed face lifts alone accept this model
    m = two_node([(0, 0)] * 3)
    report = validate_model(m)
    assert report["euler"].ok and report["face_offsets"].ok
    assert failing(m) == {"offset_lattice": 0}


def test_index_two_sublattice_is_rejected():
    assert failing(two_node([(0, 0), (2, 0), (0, 1)])) == {"offset_lattice": 2}


def test_clockwise_rotation_is_rejected():
    assert set(failing(two_node([(0, 0), (1, 0), (0, 1)], "xzy", "xzy"))) == {"orientation"}


def test_swapped_offsets_flip_orientation():
    assert set(failing(two_node([(0, 0), (0, 1), (1, 0)]))) == {"orientation"}


def test_conifold_minus_an_edge_is_still_a_torus_model():
    m = delete_edge(conifold(), "d")
    assert validate_model(m).ok
    assert len(m.nodes) - len(m.edges) + len(m.faces) == 0


def test_missing_rotation_skips_face_checks():
    m = make_model({"b": "black", "w": "white"}, [("x", "b", "w", (0, 0)), ("y", "b", "w", (1, 0))], {"b": "xy"})
    report = validate_model(m)
    assert report["rotation_totality"].status == "fail"
    assert report["euler"].status == "skipped"


def test_low_valence_and_color_errors():
    m = make_model({"b": "black", "w": "black"}, [("x", "b", "w", (0, 0))], {"b": "x", "w": "x"})
    f = failing(m)
    assert f["bipartite"] == "x"
    assert "valence" in f


def test_disconnected_model_is_reported():
    m = make_model(
        {"b": "black", "w": "white", "b2": "black", "w2": "white"},
        [("x", "b", "w", (0, 0)), ("y", "b", "w", (1, 0)), ("u", "b2", "w2", (0, 0)), ("v", "b2", "w2", (0, 1))],
        {"b": "xy", "w": "xy", "b2": "uv", "w2": "uv"},
    )
    assert "connected" in failing(m)


# --- parsing -----------------------------------------------------------------------


def test_round_trip_through_text():
    for m in corpus(2):
        again = parse_model(serialize_model(m), name=m.name)
        assert again == m
        assert serialize_model(again) == serialize_model(m)


def test_fixture_text_parses_with_comments():
    text = fixture_text("conifold")
    assert text.startswith("#")
    assert parse_model(text) == conifold()


def test_rotation_references_may_carry_zero_suffix():
    text = "torus\nnode b black\nnode w white\nedge x b w 0 0\nedge y b w 1 0\nedge z b w 0 1\n" \
           "rot b x@0 y z\nrot w x y z@0\n"
    assert parse_model(text) == hexagon()


@pytest.mark.parametrize(
    "text, needle, line",
    [
        ("", "missing header", 0),
        ("node b black\n", "expected header", 1),
        ("torus\nnode b purple\n", "unknown color", 2),
        ("torus\nnode b black\nnode b white\n", "duplicate node", 3),
        ("torus\nnode b black\nnode w white\nedge x b w 0 q\n", "expected integer", 4),
        ("torus\nnode b black\nnode w white\nedge x b w 0\n", "usage: edge", 4),
        ("torus\nnode b black\nedge x b w 0 0\n", "dangling endpoint", 0),
        ("torus\nnode b black\nfoo\n", "unknown directive", 3),
        ("torus\ntorus\n", "duplicate header", 2),
        ("torus\nnode b black\nnode w white\nedge x b w 0 0\nrot b y\n", "unknown edge-end", 5),
        ("torus\nnode b black\nnode w white\nedge x b w 0 0\nrot q x\n", "unknown node", 5),
        ("torus\nnode b black\nnode w white\nedge x b w 0 0\nrot b x\nrot b x\n", "duplicate rotation", 6),
        ("torus\n", "no nodes", 0),
    ],
)
def test_syntax_errors(text, needle, line):
    with pytest.raises(ModelSyntaxError) as info:
        parse_model(text)
    assert needle in str(info.value)
    assert info.value.line == line


def test_syntax_error_reports_column():
    with pytest.raises(ModelSyntaxError) as info:
        parse_model("torus\nnode b  purple\n")
    assert info.value.column == 9
