import json
import subprocess
import sys

import pytest

from dimerlab.cli import SCHEMA, main
from dimerlab.corpus import fixture_text


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def without_timing(text):
    data = json.loads(text)
    data.pop("timing")
    return data


@pytest.fixture
def conifold_file(tmp_path):
    p = tmp_path / "conifold.dimer"
    p.write_text(fixture_text("conifold"))
    return str(p)


def test_validate_conifold_file(capsys, conifold_file):
    code, out, _ = run(capsys, "validate", conifold_file)
    assert code == 0 and "valid" in out


def test_validate_truncated_file(capsys, tmp_path):
    p = tmp_path / "broken.dimer"
    p.write_text("torus\nnode b black\nedge x b")
    code, _, err = run(capsys, "validate", str(p))
    assert code == 2 and "parse error" in err and "line 3" in err


def test_validate_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "validate", str(tmp_path / "nope.dimer"))
    assert code == 2 and "cannot read" in err


def test_validate_sphere_graph(capsys, tmp_path):
    p = tmp_path / "sphere.dimer"
    p.write_text("torus\nnode b black\nnode w white\nedge x b w 0 0\nedge y b w 0 0\nrot b x y\nrot w x y\n")
    code, out, _ = run(capsys, "validate", str(p), "--json")
    assert code == 2
    data = json.loads(out)
    euler = [c for c in data["validation"]["checks"] if c["name"] == "euler"][0]
    assert euler["status"] == "fail" and euler["witness"] == 2


def test_check_conifold(capsys):
    code, out, _ = run(capsys, "check", "fixture:conifold", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["schema"] == SCHEMA
    assert all(data["verdicts"].values())
    assert data["first_consistency"]["result"] == "none-within-bounds"
    assert {"tool", "model", "timing", "cross_check", "witnesses"} <= set(data)
    assert len(data["model"]["sha256"]) == 64


def test_check_trivial_zigzag(capsys):
    code, out, _ = run(capsys, "check", "fixture:trivial-zigzag", "--json")
    assert code == 1
    data = json.loads(out)
    assert data["witnesses"]["consistent"]["clauses"][0]["witness"] == {"zigzags": [0, 1]}
    assert data["first_consistency"]["counterexample"]["power"] == 1


def test_check_text_output(capsys):
    code, out, _ = run(capsys, "check", "fixture:self-intersecting-zigzag")
    assert code == 1
    assert "failed clauses 2, 3" in out


def test_json_is_deterministic(capsys):
    _, a, _ = run(capsys, "check", "fixture:consistent-non-isoradial", "--json")
    _, b, _ = run(capsys, "check", "fixture:consistent-non-isoradial", "--json")
    assert without_timing(a) == without_timing(b)
    strip = lambda t: "\n".join(line for line in t.splitlines() if '"seconds"' not in line)
    assert strip(a) == strip(b)


def test_bound_misuse(capsys, monkeypatch):
    assert run(capsys, "check", "fixture:conifold", "--bound", "-1")[0] == 2
    assert run(capsys, "check", "fixture:conifold", "--bound", "2", "--search-length", "5")[0] == 2
    monkeypatch.setenv("DIMERLAB_DEFAULT_BOUND", "many")
    assert run(capsys, "check", "fixture:conifold")[0] == 2


def test_env_bound_is_used(capsys, monkeypatch):
    monkeypatch.setenv("DIMERLAB_DEFAULT_BOUND", "12")
    code, out, _ = run(capsys, "counterexample", "fixture:conifold", "--json")
    assert code == 0
    assert json.loads(out)["bounds"]["length"] == 12


def test_check_invalid_model(capsys, tmp_path):
    p = tmp_path / "zero.dimer"
    p.write_text("torus\nnode b black\nnode w white\nedge x b w 0 0\nedge y b w 0 0\nedge z b w 0 0\n"
                 "rot b x y z\nrot w x y z\n")
    code, out, err = run(capsys, "check", str(p), "--json")
    assert code == 2 and "offset_lattice" in err
    assert json.loads(out)["validation"]["valid"] is False


def test_check_svg(capsys, tmp_path):
    svg = tmp_path / "out.svg"
    code, _, _ = run(capsys, "check", "fixture:conifold", "--svg", str(svg), "--window", "2")
    assert code == 0
    text = svg.read_text()
    assert text.startswith("<svg") and text.count("<circle") == 2 * 4


def test_check_all(capsys):
    code, out, _ = run(capsys, "check", "--all", "--max-size", "1", "--json")
    data = json.loads(out)
    assert code == 1
    assert len(data["models"]) == 10
    assert all(m["cross_check"]["agreement"] for m in data["models"])


def test_matchings(capsys):
    assert run(capsys, "matchings", "fixture:conifold", "--count-only") == (0, "4\n", "")
    code, out, _ = run(capsys, "matchings", "fixture:no-perfect-matching", "--json")
    data = json.loads(out)
    assert data["count"] == 0 and data["non_degenerate"] is False


def test_zigzag(capsys):
    code, out, _ = run(capsys, "zigzag", "fixture:conifold")
    assert code == 0
    assert out.splitlines()[0] == "4 zigzag paths"
    assert "class (1, 0)" in out and "class (0, -1)" in out


def test_quiver(capsys):
    code, out, _ = run(capsys, "quiver", "fixture:conifold", "--json")
    data = json.loads(out)
    assert code == 0 and len(data["vertices"]) == 2 and len(data["arrows"]) == 4
    assert {"arrow": "a", "plus": "d.b.c", "minus": "c.b.d"} in data["relations"]


def test_counterexample(capsys):
    code, out, _ = run(capsys, "counterexample", "fixture:trivial-zigzag")
    assert code == 1
    assert "c0.x.c1.z and c1.z.c0.x" in out and "omega power 1" in out


def test_corpus_commands(capsys):
    code, out, _ = run(capsys, "corpus", "list")
    assert code == 0 and out.count("\n") == 8
    code, out, _ = run(capsys, "corpus", "show", "conifold")
    assert out.startswith("torus\n")
    code, out, _ = run(capsys, "corpus", "build", "square", "2", "2")
    assert code == 0 and out.count("\nedge ") == 16
    assert run(capsys, "corpus", "build", "square", "0", "2")[0] == 2
    assert run(capsys, "corpus", "show", "missing")[0] == 2


def test_usage_errors(capsys):
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "check")[0] == 2
    assert run(capsys, "check", "fixture:conifold", "--window", "0")[0] == 2


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "dimerlab.cli", "matchings", "fixture:conifold", "--count-only"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and proc.stdout == "4\n"
