import json
import random

import numpy as np
import pytest
from hypothesis import given, settings

from lbpgrid.grid import BoundaryConfig, Coord, dihedral_group, make_grid
from lbpgrid.messages import (GraphInstance, LocalSolutionField, Trace, difference_consistency,
                              difference_consistency_batch, estimates, first_stable_iteration,
                              grid_topology, init_state, run, step, unnormalized_readout,
                              unnormalized_run)
from lbpgrid.oracle import enumerate_min_marginals
from lbpgrid.trees import diameter, path_tree, random_tree

from conftest import any_boundaries, one_run_boundaries


def n1(signs_by_coord):
    g = make_grid(1)
    return BoundaryConfig.from_mapping(g, {c: signs_by_coord.get(tuple(c), -1) for c in g.ring})


def test_init_state_n1_uniform():
    s = init_state(BoundaryConfig.uniform(1))
    for (j, i), v in s.as_dict().items():
        assert v == (-1 if j != (1, 1) else 0)


def test_init_state_tree_path():
    g = path_tree(4, 1, -1).graph()
    s = init_state(g)
    assert s[("p0", "p1")] == 1
    assert s[("p3", "p2")] == -1
    assert s[("p1", "p2")] == 0


@pytest.mark.parametrize("incoming,expected", [((1, 1, -1), 1), ((1, -1, 0), 0), ((-1, -1, -1), -1)])
def test_step_sign_rule(incoming, expected):
    # star with centre c: message c -> t is the sign of the other three leaves' messages
    edges = [("c", "l0"), ("c", "l1"), ("c", "l2"), ("c", "t")]
    if 0 in incoming:
        # a zero arrives from an interior neighbour that has not fired yet
        edges = [("c", "l0"), ("c", "l1"), ("c", "u"), ("u", "w"), ("c", "t")]
        g = GraphInstance.from_edges(edges, {"c", "u"},
                                     {"l0": incoming[0], "l1": incoming[1], "w": 1, "t": -1})
    else:
        g = GraphInstance.from_edges(edges, {"c"}, {"l0": incoming[0], "l1": incoming[1],
                                                    "l2": incoming[2], "t": 1})
    s1 = step(init_state(g))
    assert s1[("c", "t")] == expected


def test_run_lengths_and_zero():
    x = BoundaryConfig.arc(2, 0, 3)
    t = run(x, 0)
    assert len(t) == 1 and t.n_max == 0
    assert len(run(x, 7)) == 8
    with pytest.raises(ValueError):
        run(x, -1)


@pytest.mark.parametrize("k", range(256))
def test_n1_hand_step(k):
    g = make_grid(1)
    x = BoundaryConfig(1, tuple(1 if (k >> i) & 1 else -1 for i in range(8)))
    t = run(x, 2)
    nbrs = g.neighbors((1, 1))
    for n in (1, 2):
        for nb in nbrs:
            others = sum(x[o] for o in nbrs if o != nb)
            assert t.message(((1, 1), nb), n) == int(np.sign(others))


def test_estimates_n1_examples():
    s = run(BoundaryConfig.uniform(1), 3).state(3)
    assert estimates(s)[(1, 1)] == -4
    x = n1({(1, 0): 1, (0, 1): 1})
    assert estimates(run(x, 2).state(2))[(1, 1)] == 0


def test_first_stable_iteration_cases():
    x = BoundaryConfig.uniform(2)
    g = GraphInstance.from_grid(x)
    h = np.repeat(init_state(g).values[None], 4, axis=0)
    assert first_stable_iteration(Trace(g, h)) == 0
    alt = h.copy()
    alt[1::2, 0] = 1 - alt[1::2, 0]
    assert first_stable_iteration(Trace(g, alt)) is None
    x = BoundaryConfig.arc(3, 2, 5)
    assert first_stable_iteration(run(x, 16)) <= 6


def test_unnormalized_boundary_and_init():
    x = BoundaryConfig.uniform(2)
    states = unnormalized_run(x, 3)
    for s in states:
        assert s[((0, 1), (1, 1))] == (0, 1)
    assert states[0][((1, 1), (2, 1))] == (0, 0)


@settings(max_examples=80, deadline=None)
@given(any_boundaries(sizes=(1, 2, 3, 4)))
def test_message_range_and_boundary_condition(x):
    t = run(x, 4 * x.N)
    assert set(np.unique(t.history)) <= {-1, 0, 1}
    for n in (0, t.n_max):
        s = t.state(n)
        for (j, i), v in s.as_dict().items():
            if not make_grid(x.N).is_interior(j):
                assert v == x[j]


@settings(max_examples=60, deadline=None)
@given(any_boundaries(sizes=(1, 2, 3, 4)))
def test_difference_consistency(x):
    rep = difference_consistency(x, 4 * x.N)
    assert rep.ok, rep.first_violation


@settings(max_examples=40, deadline=None)
@given(any_boundaries(sizes=(1, 2, 3)))
def test_unnormalized_pairs_nonnegative_and_within_one(x):
    for s in unnormalized_run(x, 3 * x.N):
        assert (s.values >= 0).all()
        assert (np.abs(s.values[:, 0] - s.values[:, 1]) <= 1).all()


def test_difference_consistency_batch_all_n2():
    topo = grid_topology(2)
    L = 12
    ks = np.arange(1 << L)
    bvals = np.where((ks[:, None] >> np.arange(L)) & 1, 1, -1)
    assert difference_consistency_batch(topo, bvals, 8).all()


@settings(max_examples=60, deadline=None)
@given(any_boundaries(sizes=(1, 2, 3, 4)))
def test_colour_flip_negates_trace(x):
    a = run(x, 2 * x.N + 2).history
    b = run(x.flipped(), 2 * x.N + 2).history
    assert (a == -b).all()


@settings(max_examples=40, deadline=None)
@given(one_run_boundaries(sizes=(2, 3, 4)))
def test_isotropy(x):
    N = x.N
    base = run(x, 2 * N + 2)
    for t in dihedral_group(with_color_flip=True):
        img = run(t.apply_boundary(x), 2 * N + 2)
        for n in (1, N, 2 * N + 2):
            s, si = base.state(n), img.state(n)
            for e, v in s.as_dict().items():
                assert si[t.apply_edge(e, N)] == t.apply_sign(v)


def test_tree_readout_equals_min_marginals():
    rng = random.Random(7)
    done = 0
    while done < 25:
        spec = random_tree(rng, 15)
        g = spec.graph()
        d = diameter(spec)
        states = unnormalized_run(g, d + 1)
        mm = enumerate_min_marginals(g)
        read = unnormalized_readout(states[d + 1])
        for site, (minus, plus) in read.items():
            assert minus == mm.o_minus[site]
            assert plus == mm.o_plus[site]
        done += 1


def test_tree_difference_consistency():
    rng = random.Random(11)
    for _ in range(30):
        g = random_tree(rng, 20).graph()
        assert difference_consistency(g, 25).ok


def test_trace_json_schema():
    t = run(BoundaryConfig.arc(1, 0, 2), 1)
    doc = json.loads(json.dumps(t.to_json()))
    assert [d["n"] for d in doc] == [0, 1]
    m = doc[1]["messages"][0]
    assert set(m) == {"from", "to", "value"}
    assert len(m["from"]) == 2


def test_field_json_and_array_round_trip():
    f = LocalSolutionField({Coord(1, 1): 4, Coord(2, 1): -2, Coord(1, 2): 0, Coord(2, 2): 2})
    assert f.to_json() == {"1,1": 4, "2,1": -2, "1,2": 0, "2,2": 2}
    assert LocalSolutionField.from_array(f.to_array(2)) == f
