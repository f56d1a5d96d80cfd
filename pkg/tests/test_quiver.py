import pytest

from dimerlab.core import ZERO
from dimerlab.corpus import EXTRAS, conifold, corpus, fixture, hexagon
from dimerlab.matchings import NoPerfectMatchingError, enumerate_perfect_matchings
from dimerlab.quiver import (
    BOUND_ENV,
    MINIMAL,
    NO_WITHIN_BOUND,
    NOT_MINIMAL,
    YES,
    BoundError,
    Quiver,
    are_equivalent,
    are_weakly_equivalent,
    default_bound,
    find_first_consistency_counterexample,
    is_minimal,
    iter_paths,
    reduce_via_matching,
    require_perfect_matching,
    zigzag_loops,
)

from oracles import all_paths, saturate_classes


@pytest.fixture(scope="module")
def cq():
    return Quiver(conifold())


@pytest.fixture(scope="module")
def weak():
    return Quiver(fixture("weak-not-equivalent-pair").model)


# --- structure -----------------------------------------------------------------------


def test_conifold_quiver_shape(cq):
    assert cq.vertices == [0, 1]
    assert sorted(cq.arrows) == ["a", "b", "c", "d"]


def test_conifold_relation_ideal(cq):
    ideal = {frozenset({"dbc", "cbd"}), frozenset({"dac", "cad"}), frozenset({"adb", "bda"}), frozenset({"acb", "bca"})}
    got = {frozenset({"".join(p), "".join(n)}) for _, p, n in cq.relations()}
    assert got == ideal


def test_relation_sides_close_up_with_their_arrow():
    for m in corpus(2):
        q = Quiver(m)
        for a, plus, minus in q.relations():
            for side in (plus, minus):
                cycle = q.path((a,) + side)
                assert cycle.source == cycle.target == q.arrows[a].source
                assert cycle.offset == ZERO


def test_relation_of_the_degenerate_fixture():
    q = Quiver(fixture("no-perfect-matching").model)
    a, plus, minus = EXTRAS["no-perfect-matching"]["relation"]
    assert (q.p_plus[a], q.p_minus[a]) == (plus, minus)


def test_small_cycles_have_node_valence_length():
    for m in corpus(2):
        q = Quiver(m)
        for v in q.vertices:
            for node, cycle in q.small_cycles(v):
                assert len(cycle) == m.valence(node)
                assert cycle.offset == ZERO


def test_conifold_small_cycles_have_length_four(cq):
    assert {len(c) for v in cq.vertices for _, c in cq.small_cycles(v)} == {4}


def test_parse_path_and_errors(cq):
    p = cq.parse_path("a.d")
    assert p.arrows == ("a", "d") and p.source == p.target == 0
    assert cq.parse_path("a d") == p
    with pytest.raises(ValueError):
        cq.parse_path("a.a")
    with pytest.raises(ValueError):
        cq.path((), None)
    with pytest.raises(ValueError):
        cq.path(("a",), source=1)


def test_iter_paths_counts(cq):
    assert len(list(iter_paths(cq, 3))) == 2 * (1 + 2 + 4 + 8)
    assert len(list(iter_paths(cq, 3))) == len(all_paths(cq, 3))


def test_rewrite_neighbors_preserve_endpoints_and_offset(cq):
    for p in iter_paths(cq, 5):
        for r in cq.rewrite_neighbors(p):
            assert (r.source, r.target, r.offset, len(r)) == (p.source, p.target, p.offset, len(p))


# --- equivalence -----------------------------------------------------------------------


def test_relation_sides_are_equivalent(cq):
    r = are_equivalent(cq, cq.parse_path("d.b.c"), cq.parse_path("c.b.d"))
    assert r.answer == YES and r.definitive


def test_identical_and_quick_answers(cq):
    p = cq.parse_path("a.d")
    assert are_equivalent(cq, p, p).reason == "identical paths"
    r = are_equivalent(cq, p, cq.parse_path("a.c"))
    assert r.answer == NO_WITHIN_BOUND and r.definitive
    r = are_equivalent(cq, cq.parse_path("a"), cq.parse_path("b"))
    assert r.reason == "offsets differ"


def test_bound_shorter_than_path_is_refused(cq):
    with pytest.raises(BoundError):
        are_equivalent(cq, cq.parse_path("a.d.b"), cq.parse_path("a.c.b"), bound=2)
    with pytest.raises(BoundError):
        are_weakly_equivalent(cq, cq.parse_path("a"), cq.parse_path("a"), i_max=-1)


def test_equivalence_matches_naive_saturation_on_short_paths(cq):
    classes = saturate_classes(cq, 6)
    paths = [p for p in all_paths(cq, 6) if len(p[1]) == 6 and p[0] == 0]
    for p in paths[:40]:
        for r in paths:
            got = are_equivalent(cq, cq.path(p[1]), cq.path(r[1]), bound=6)
            assert bool(got) == (classes[p] == classes[r])


def test_small_cycles_at_a_vertex_are_equivalent():
    for m in (conifold(), hexagon(), fixture("consistent-non-isoradial").model):
        q = Quiver(m)
        for v in q.vertices:
            cycles = [c for _, c in q.small_cycles(v)]
            for c in cycles[1:]:
                assert are_equivalent(q, cycles[0], c)


def test_default_bound_formula_and_env(cq, monkeypatch):
    monkeypatch.delenv(BOUND_ENV, raising=False)
    p = cq.parse_path("a.d.b")
    assert default_bound(cq, p) == 8 * 3 + 3
    monkeypatch.setenv(BOUND_ENV, "11")
    assert default_bound(cq, p) == 11


def test_closure_is_complete_on_consistent_models(cq):
    c = cq.closure(cq.parse_path("a.d.b.c"), 12)
    assert c.complete and not c.exhausted
    assert c.star is not None


# --- weak equivalence ------------------------------------------------------------------


def test_weak_pair_is_weakly_but_not_strongly_equivalent(weak):
    first, second = EXTRAS["weak-not-equivalent-pair"]["pair"]
    p1, p2 = weak.parse_path(first), weak.parse_path(second)
    strong = are_equivalent(weak, p1, p2)
    assert strong.answer == NO_WITHIN_BOUND and strong.definitive
    r = are_weakly_equivalent(weak, p1, p2)
    assert r.answer == YES
    assert r.power == EXTRAS["weak-not-equivalent-pair"]["power"]


def test_weak_pair_against_naive_saturation(weak):
    first, second = EXTRAS["weak-not-equivalent-pair"]["pair"]
    p1, p2 = weak.parse_path(first), weak.parse_path(second)
    w = weak.omega_power(p1.source, 1)
    classes = saturate_classes(weak, len(p1) + len(w))
    key = lambda p: (p.source, p.arrows, p.target)
    assert classes[key(p1)] != classes[key(p2)]
    assert classes[key(weak.compose(w, p1))] == classes[key(weak.compose(w, p2))]


# --- minimality and reduction --------------------------------------------------------


def test_small_cycle_is_not_minimal(cq):
    verdict, witness = is_minimal(cq, cq.small_cycle(0))
    assert verdict == NOT_MINIMAL and cq.contains_small_cycle(witness) is not None
    assert is_minimal(cq, cq.parse_path("a"))[0] == MINIMAL


def test_reduce_omega_squared(cq):
    d = enumerate_perfect_matchings(conifold())[0]
    r, k = reduce_via_matching(cq, cq.omega_power(0, 2), d)
    assert (r.arrows, k) == ((), 2)


def test_reduction_is_equivalent_to_the_input(cq):
    d = enumerate_perfect_matchings(conifold())[1]
    p = cq.compose(cq.parse_path("a.d"), cq.omega_power(0, 1))
    r, k = reduce_via_matching(cq, p, d)
    assert k == 1
    assert are_equivalent(cq, p, cq.compose(cq.omega_power(r.source, k), r))


def test_reducer_refuses_a_non_matching(cq):
    with pytest.raises(NoPerfectMatchingError):
        reduce_via_matching(cq, cq.parse_path("a"), {"a", "b"})


def test_require_perfect_matching_on_degenerate_fixture():
    with pytest.raises(NoPerfectMatchingError):
        require_perfect_matching(fixture("no-perfect-matching").model)


# --- counterexample search -----------------------------------------------------------


@pytest.mark.parametrize(
    "name, pair",
    [
        ("trivial-zigzag", ("c0.x.c1.z", "c1.z.c0.x")),
        ("self-intersecting-zigzag", ("a", "s1")),
        ("double-same-direction", ("y.z", "z.y")),
    ],
)
def test_counterexamples_on_inconsistent_fixtures(name, pair):
    s = find_first_consistency_counterexample(fixture(name).model)
    assert s.found
    c = s.counterexample
    assert (str(c.first), str(c.second)) == pair
    assert c.power == 1 and c.equivalence.definitive
    assert s.to_dict()["result"] == "counterexample"


def test_no_counterexample_on_conifold():
    s = find_first_consistency_counterexample(conifold())
    assert not s.found
    d = s.to_dict()
    assert d["result"] == "none-within-bounds" and d["counterexample"] is None
    assert d["bounds"]["omega_power"] == 4


def test_search_bound_errors():
    with pytest.raises(BoundError):
        find_first_consistency_counterexample(conifold(), i_max=-1)
    with pytest.raises(BoundError):
        find_first_consistency_counterexample(conifold(), bound=3, search_length=5)


def test_zigzag_loops_only_for_trivial_zigzags():
    assert zigzag_loops(Quiver(conifold())) == []
    loops = zigzag_loops(Quiver(fixture("trivial-zigzag").model))
    assert loops and all(p.source == p.target and p.offset == ZERO for p in loops)


def test_search_respects_work_budget():
    s = find_first_consistency_counterexample(fixture("trivial-zigzag").model, work_budget=0)
    assert s.found or s.note == "work budget exhausted"
