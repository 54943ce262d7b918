import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dufsim import (ErrorPattern, GraphConfig, Syndrome, UnionFind, build_decoding_graph,
                    check_annihilation, decode_serial, sample_errors, syndrome_from_errors)
from oracles import canonical, components, reference_union_find


def test_empty_syndrome(graphs):
    r = decode_serial(graphs(5, 5), Syndrome([]))
    assert r.growth_iterations == 0
    assert r.correction.size == 0
    assert (r.growth == 0).all()


def test_adjacent_pair_one_iteration(graphs):
    g = graphs(3, 1)
    e = g.edge_between(1, 2)
    r = decode_serial(g, Syndrome([1, 2]))
    assert r.growth_iterations == 1
    assert r.growth[e] == 2
    assert r.correction.tolist() == [e]


def test_single_boundary_defect_two_iterations(graphs):
    g = graphs(3, 1)
    # vertex 1 has one spatial neighbour and one boundary edge
    r = decode_serial(g, Syndrome([1]))
    b = [e for e in g.incident_edges(1) if g.is_boundary(g.other_endpoint(e, 1))]
    assert r.growth_iterations == 2
    assert all(r.growth[e] == 2 for e in b)
    assert r.correction.tolist() == b


def test_union_find_semantics():
    uf = UnionFind(5, defects=[0, 1, 2], boundary=[4])
    assert uf.union(3, 3) == 3 and uf.find(3) == 3
    uf.union(0, 1)
    assert not uf.odd(0) and not uf.odd(1)
    assert uf.odd(2)
    uf.union(4, 2)
    assert not uf.odd(2)
    assert uf.find(4) == 2


@given(st.integers(2, 40), st.data())
@settings(max_examples=100, deadline=None)
def test_union_find_matches_components(n, data):
    pairs = data.draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)),
                               max_size=3 * n))
    uf = UnionFind(n)
    for a, b in pairs:
        uf.union(a, b)
    labels = [uf.find(v) for v in range(n)]
    assert np.array_equal(canonical(labels), canonical(components(n, pairs)))
    # the representative is the minimum member
    assert all(labels[v] <= v for v in range(n))


def _oracle(g, syndrome):
    edges = list(zip(g.edge_u.tolist(), g.edge_v.tolist()))
    return reference_union_find(g.n_real, g.n_vertices, edges, g.weights.tolist(),
                                (syndrome.defects - 1).tolist())


@given(st.sampled_from([3, 5]), st.integers(1, 4), st.integers(0, 10**6),
       st.sampled_from([0.01, 0.03, 0.08]))
@settings(max_examples=150, deadline=None)
def test_matches_reference_oracle(d, rounds, seed, p):
    g = build_decoding_graph(GraphConfig(d, rounds))
    s = syndrome_from_errors(g, sample_errors(g, p, seed))
    part, growth, iters = _oracle(g, s)
    r = decode_serial(g, s)
    assert r.growth_iterations == iters
    assert r.growth.tolist() == growth
    assert np.array_equal(r.partition(g.n_real), part)
    assert check_annihilation(g, s.errors.flipped, r.correction)


@given(st.integers(0, 10**6), st.integers(1, 2**40))
@settings(max_examples=80, deadline=None)
def test_order_independence(seed, order_seed):
    g = build_decoding_graph(GraphConfig(7, 7))
    s = syndrome_from_errors(g, sample_errors(g, 0.02, seed))
    a = decode_serial(g, s)
    b = decode_serial(g, s, order_seed=order_seed)
    assert np.array_equal(a.labels, b.labels)
    assert np.array_equal(a.growth, b.growth)
    assert a.growth_iterations == b.growth_iterations


@given(st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_termination_bound_and_even_clusters(seed):
    g = build_decoding_graph(GraphConfig(5, 5))
    s = syndrome_from_errors(g, sample_errors(g, 0.05, seed))
    r = decode_serial(g, s)
    assert r.growth_iterations <= int(g.weights.sum())
    assert ((r.growth >= 0) & (r.growth <= g.weights)).all()
    # every final cluster is even or holds a boundary vertex
    defect = s.mask(g)
    for lab in np.unique(r.labels):
        members = np.flatnonzero(r.labels == lab)
        has_boundary = (members >= g.n_real).any()
        assert has_boundary or defect[members].sum() % 2 == 0


def test_spanning_forest_rooted_at_boundary(graphs):
    g = graphs(3, 1)
    r = decode_serial(g, Syndrome([1]))
    root = 0
    while r.parent[root] != root:
        root = r.parent[root]
    assert root >= g.n_real


def test_explicit_pattern(graphs):
    g = graphs(5, 5)
    errors = ErrorPattern([10, 11, 60])
    s = syndrome_from_errors(g, errors)
    r = decode_serial(g, s)
    assert check_annihilation(g, errors.flipped, r.correction)


def test_non_real_defect_rejected(graphs):
    g = graphs(3, 1)
    with pytest.raises(ValueError):
        decode_serial(g, Syndrome([g.n_real + 2]))
