import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lbpgrid.grid import (BoundaryConfig, BoundaryFormatError, Coord, DirectedEdge, Direction,
                          SymmetryTransform, apply_direction, classify_boundary, contract,
                          corner_set, dihedral_group, enumerate_one_run_boundaries, make_grid,
                          normalize_one_run, orient_for_proof, parse_boundary)
from lbpgrid.messages import run

from conftest import any_boundaries, one_run_boundaries


@pytest.mark.parametrize("N", [1, 2, 3, 5])
def test_grid_counts(N):
    g = make_grid(N)
    assert len(g.vertices) == (N + 2) ** 2
    assert len(g.interior) == N * N
    assert len(g.boundary) == 4 * N + 4 == len(g.ring)
    assert all(len(g.neighbors(c)) == 4 for c in g.interior)
    for c in g.outer_corners:
        assert len(g.neighbors(c)) == 2
        assert not any(g.is_interior(nb) for nb in g.neighbors(c))


def test_make_grid_rejects_zero():
    with pytest.raises(ValueError):
        make_grid(0)


def test_named_corners():
    assert make_grid(5).corners == {"sw": (1, 1), "se": (5, 1), "ne": (5, 5), "nw": (1, 5)}


def test_direction_vectors():
    assert Direction.N.vector == (0, 1)
    assert Direction.S.vector == (0, -1)
    assert Direction.E.vector == (1, 0)
    assert Direction.W.vector == (-1, 0)
    assert Direction.N.is_adjacent(Direction.E)
    assert not Direction.N.is_adjacent(Direction.S)
    assert not Direction.N.is_adjacent(Direction.N)


def test_apply_direction():
    g = make_grid(4)
    assert apply_direction(g, (2, 3), Direction.E) == (3, 3)
    assert apply_direction(g, (0, 0), Direction.W) is None
    for d in Direction:
        there = apply_direction(g, (2, 2), d)
        assert apply_direction(g, there, d.opposite) == (2, 2)


def test_directed_edge_direction():
    e = DirectedEdge.toward(Coord(1, 1), Direction.N)
    assert e == ((1, 1), (1, 2))
    assert e.direction is Direction.N


def test_ring_order_starts_bottom_left_heading_east():
    g = make_grid(2)
    assert g.ring[:5] == ((0, 0), (1, 0), (2, 0), (3, 0), (3, 1))
    assert g.ring[-1] == (0, 1)


def test_wire_format_round_trip():
    x = parse_boundary("B1:+-------")
    assert x.N == 1
    assert x[(0, 0)] == 1 and x[(1, 0)] == -1
    assert x.to_string() == "B1:+-------"


@pytest.mark.parametrize("text,pos", [
    ("X1:+-------", 0),
    ("B1+-------", 10),
    ("B0:++", 1),
    ("B1:+--x----", 6),
    ("B1:+------", 10),
])
def test_wire_format_errors_report_position(text, pos):
    with pytest.raises(BoundaryFormatError) as exc:
        parse_boundary(text)
    assert exc.value.position == pos


def test_from_mapping_rejects_missing_and_extra():
    g = make_grid(1)
    vals = {c: -1 for c in g.ring}
    BoundaryConfig.from_mapping(g, vals)
    with pytest.raises(ValueError):
        BoundaryConfig.from_mapping(g, {**vals, (1, 1): 1})
    del vals[(0, 0)]
    with pytest.raises(ValueError):
        BoundaryConfig.from_mapping(g, vals)


def test_classify_examples():
    g = make_grid(3)
    uni = classify_boundary(g, BoundaryConfig.uniform(3))
    assert uni.uniform and not uni.one_run and uni.kind == "uniform"
    single = {c: -1 for c in g.ring}
    single[(0, 2)] = 1
    assert classify_boundary(g, BoundaryConfig.from_mapping(g, single)).one_run
    two = {c: (1 if c[1] == 0 or c[1] == 4 else -1) for c in g.ring}
    rs = classify_boundary(g, BoundaryConfig.from_mapping(g, two))
    assert not rs.one_run and len(rs.runs) == 4


def test_enumerate_n1_count():
    xs = list(enumerate_one_run_boundaries(make_grid(1)))
    assert len(xs) == 56
    assert len({x.signs for x in xs}) == 56


@pytest.mark.parametrize("N", [1, 2, 3, 4, 5, 6])
def test_enumerated_boundaries_are_one_run_with_two_odd_bonds(N):
    g = make_grid(N)
    L = 4 * N + 4
    xs = list(enumerate_one_run_boundaries(g))
    assert len(xs) == L * (L - 1)
    for x in xs:
        rs = classify_boundary(g, x)
        assert rs.one_run and not rs.uniform
        assert rs.odd_bonds == 2


def test_dedup_symmetry_covers_every_orbit():
    g = make_grid(3)
    reps = list(enumerate_one_run_boundaries(g, dedup_symmetry=True))
    orbit = {t.apply_boundary(x).signs for x in reps for t in dihedral_group(True)}
    assert orbit == {x.signs for x in enumerate_one_run_boundaries(g)}
    assert len(reps) < 240


def test_contraction_example():
    g = make_grid(3)
    vals = {c: -1 for c in g.ring}
    vals[(0, 0)] = 1
    vals[(1, 0)] = 1
    y = contract(g, BoundaryConfig.from_mapping(g, vals))
    assert y[(0, 0)] == -1 and y[(1, 0)] == 1


def test_normalize_flips_large_positive_run():
    N = 4
    g = make_grid(N)
    # three full sides of positives (west, south, east interior sides)
    plus = {(0, b) for b in range(1, N + 1)} | {(a, 0) for a in range(1, N + 1)} \
        | {(N + 1, b) for b in range(1, N + 1)} | {(0, 0), (N + 1, 0)}
    x = BoundaryConfig.from_mapping(g, {c: (1 if c in plus else -1) for c in g.ring})
    y, t = normalize_one_run(g, x)
    assert t.color_flip
    assert len(y.r_plus) <= len(y.r_minus)


def test_normalize_identity_on_normal_input():
    g = make_grid(3)
    x = BoundaryConfig.arc(3, 1, 2)
    y, t = normalize_one_run(g, x)
    assert y == x and t.is_identity


@settings(max_examples=150, deadline=None)
@given(one_run_boundaries())
def test_normalize_is_idempotent(x):
    g = make_grid(x.N)
    y, _ = normalize_one_run(g, x)
    z, t = normalize_one_run(g, y)
    assert z == y and t.is_identity


@settings(max_examples=100, deadline=None)
@given(one_run_boundaries())
def test_normalize_contracts_corners(x):
    g = make_grid(x.N)
    y, _ = normalize_one_run(g, x)
    idx = g.ring_index
    L = len(g.ring)
    for c in g.outer_corners:
        k = idx[c]
        if y[g.ring[k - 1]] != y[g.ring[(k + 1) % L]]:
            assert y[c] == -1


@settings(max_examples=60, deadline=None)
@given(any_boundaries(sizes=(1, 2, 3, 4)))
def test_contraction_leaves_trace_unchanged(x):
    g = make_grid(x.N)
    a = run(x, 2 * x.N + 2).history
    b = run(contract(g, x), 2 * x.N + 2).history
    assert (a == b).all()


@given(st.integers(0, 3), st.booleans(), st.booleans(), st.integers(1, 6), st.data())
def test_symmetry_round_trip(rot, refl, flip, N, data):
    t = SymmetryTransform(rot, refl, flip)
    c = Coord(data.draw(st.integers(0, N + 1)), data.draw(st.integers(0, N + 1)))
    assert t.inverse().apply_coord(t.apply_coord(c, N), N) == c
    for s in (-1, 1):
        assert t.inverse().apply_sign(t.apply_sign(s)) == s
    for d in Direction:
        assert t.inverse().apply_direction(t.apply_direction(d)) == d


@given(st.integers(0, 3), st.booleans(), st.integers(0, 3), st.booleans())
def test_compose_matches_sequential_application(r1, f1, r2, f2):
    a, b = SymmetryTransform(r1, f1), SymmetryTransform(r2, f2)
    ab = b.compose(a)
    for c in make_grid(3).vertices:
        assert ab.apply_coord(c, 3) == b.apply_coord(a.apply_coord(c, 3), 3)


def test_dihedral_group_has_eight_distinct_elements():
    g = make_grid(3)
    images = {tuple(t.apply_coord(c, 3) for c in g.vertices) for t in dihedral_group()}
    assert len(images) == 8
    assert len(dihedral_group(True)) == 16


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_orient_for_proof_canonical_positions(N):
    g = make_grid(N)
    for x in enumerate_one_run_boundaries(g):
        z, t, case = orient_for_proof(g, x)
        C = corner_set(g, z)
        assert len(z.r_plus) <= len(z.r_minus)
        assert classify_boundary(g, z).one_run
        if case == "C0":
            assert not C and all(p.a == 0 for p in z.r_plus)
        elif case == "C1":
            assert C == {"sw"}
        else:
            assert C == {"sw", "nw"}
            top = max(p.a for p in z.r_plus if p.b == N + 1)
            bot = max(p.a for p in z.r_plus if p.b == 0)
            assert top <= bot


def test_corner_set_never_exceeds_two_after_normalisation():
    for N in (1, 2, 3, 4):
        g = make_grid(N)
        for x in enumerate_one_run_boundaries(g):
            y, _ = normalize_one_run(g, x)
            assert len(corner_set(g, y)) <= 2
