import random

import pytest
from hypothesis import given, settings

from lbpgrid.grid import BoundaryConfig, dihedral_group, enumerate_one_run_boundaries, make_grid
from lbpgrid.oracle import (InteriorConfig, MinMarginals, SizeGuardError, brute_force_min_marginals,
                            count_odd_bonds, dp_global_minimum, dp_min_marginals,
                            exact_local_solutions, global_solutions, local_solutions)

from conftest import any_boundaries, one_run, one_run_boundaries


def n1(neigh):
    """N=1 boundary with the four neighbours of (1,1) set as given (S, E, N, W)."""
    g = make_grid(1)
    vals = {c: -1 for c in g.ring}
    for c, s in zip([(1, 0), (2, 1), (1, 2), (0, 1)], neigh):
        vals[c] = s
    return BoundaryConfig.from_mapping(g, vals)


def test_count_odd_bonds_n1():
    x = BoundaryConfig.uniform(1)
    assert count_odd_bonds(InteriorConfig({(1, 1): 1}), x) == 4
    assert count_odd_bonds(InteriorConfig({(1, 1): -1}), x) == 0


def test_count_odd_bonds_checkerboard_independent_scan():
    g = make_grid(2)
    x = BoundaryConfig.uniform(2)
    xb = {c: (1 if (c[0] + c[1]) % 2 else -1) for c in g.interior}
    # second implementation: iterate the undirected edge list of the full grid
    val = {**x.as_dict(), **xb}
    edges = {frozenset((c, nb)) for c in g.vertices for nb in g.neighbors(c)}
    expected = sum(val[a] != val[b] for a, b in map(tuple, edges)
                   if g.is_interior(a) or g.is_interior(b))
    assert count_odd_bonds(InteriorConfig(xb), x) == expected == 4 + 4


def test_count_odd_bonds_rejects_incomplete():
    with pytest.raises(ValueError):
        count_odd_bonds(InteriorConfig({}), BoundaryConfig.uniform(1))


def test_brute_force_n1_examples():
    g = make_grid(1)
    mm = brute_force_min_marginals(g, n1([1, 1, -1, -1]))
    assert (mm.o_minus[(1, 1)], mm.o_plus[(1, 1)]) == (2, 2)
    mm = brute_force_min_marginals(g, n1([1, -1, -1, -1]))
    assert (mm.o_minus[(1, 1)], mm.o_plus[(1, 1)]) == (1, 3)
    assert local_solutions(mm)[(1, 1)] == -2


def test_size_guards():
    with pytest.raises(SizeGuardError):
        brute_force_min_marginals(make_grid(5), BoundaryConfig.uniform(5))
    with pytest.raises(SizeGuardError):
        brute_force_min_marginals(make_grid(6), BoundaryConfig.uniform(6), cap=6)
    with pytest.raises(SizeGuardError):
        dp_min_marginals(make_grid(13), BoundaryConfig.uniform(13))
    with pytest.raises(SizeGuardError):
        global_solutions(make_grid(5), BoundaryConfig.uniform(5))


@pytest.mark.parametrize("N", [1, 2, 3])
def test_cross_oracle_one_run(N):
    g = make_grid(N)
    for x in enumerate_one_run_boundaries(g):
        assert brute_force_min_marginals(g, x) == dp_min_marginals(g, x)


@settings(max_examples=40, deadline=None)
@given(any_boundaries(sizes=(1, 2, 3, 4)))
def test_cross_oracle_random(x):
    g = make_grid(x.N)
    assert brute_force_min_marginals(g, x) == dp_min_marginals(g, x)


@pytest.mark.parametrize("N", [1, 4, 8, 12])
def test_uniform_dp(N):
    mm = dp_min_marginals(make_grid(N), BoundaryConfig.uniform(N))
    assert set(mm.o_minus.values()) == {0}
    assert set(mm.o_plus.values()) == {4}


@settings(max_examples=40, deadline=None)
@given(any_boundaries(sizes=(1, 2, 3, 4, 5)))
def test_min_marginal_invariants(x):
    g = make_grid(x.N)
    mm = dp_min_marginals(g, x)
    glob = dp_global_minimum(g, x)
    for s in g.interior:
        assert min(mm.o_minus[s], mm.o_plus[s]) == glob
        assert abs(mm.o_minus[s] - mm.o_plus[s]) <= 4


def test_local_solution_arithmetic():
    mm = MinMarginals({"i": 2, "j": 1}, {"i": 2, "j": 3})
    f = local_solutions(mm)
    assert f["i"] == 0 and f["j"] == -2


@pytest.mark.parametrize("N", [1, 2, 3, 4, 5, 6])
def test_one_run_local_solutions_are_even(N):
    rng = random.Random(N)
    for _ in range(40):
        f = exact_local_solutions(one_run(N, rng))
        assert set(f.values.values()) <= {-4, -2, 0, 2, 4}


def test_global_solutions_uniform_singleton():
    sols = global_solutions(make_grid(3), BoundaryConfig.uniform(3, 1))
    assert len(sols) == 1 and set(sols.configs[0].values.values()) == {1}
    assert sols.minimum == 0


@pytest.mark.parametrize("N", [1, 2, 3])
def test_sign_coupling_and_proof_logic(N):
    g = make_grid(N)
    for x in enumerate_one_run_boundaries(g):
        sols = global_solutions(g, x)
        f = local_solutions(brute_force_min_marginals(g, x))
        for i in g.interior:
            seen = sols.values_at(i)
            if f[i] > 0:
                assert seen == {1}
            elif f[i] < 0:
                assert seen == {-1}
            else:
                assert seen == {-1, 1}
            if seen == {1}:
                inner = [nb for nb in g.neighbors(i) if g.is_interior(nb)]
                some_white = any(c[nb] == -1 for c in sols.configs for nb in inner)
                bnd_white = any(x[nb] == -1 for nb in g.neighbors(i) if not g.is_interior(nb))
                if not some_white and not bnd_white:
                    assert f[i] == 4
                if some_white:
                    assert f[i] == 2
                    for c in sols.configs:
                        assert sum(c[nb] == -1 for nb in inner) <= 1


@settings(max_examples=30, deadline=None)
@given(one_run_boundaries(sizes=(2, 3, 4)))
def test_oracle_symmetry(x):
    g = make_grid(x.N)
    base = local_solutions(dp_min_marginals(g, x))
    for t in dihedral_group(with_color_flip=True):
        img = local_solutions(dp_min_marginals(g, t.apply_boundary(x)))
        assert img.values == t.apply_field(base.values, x.N)


def test_min_marginal_json():
    g = make_grid(1)
    doc = brute_force_min_marginals(g, n1([1, -1, -1, -1])).to_json()
    assert doc == [{"coord": [1, 1], "o_minus": 1, "o_plus": 3, "local": -2}]
