"""Component graphs, hairy cycles, key edges, rewrite traces."""

import random
from fractions import Fraction

import pytest

from divlab.divspaces import div_space
from divlab.graphs import (
    ComponentKey,
    HairyForestCertificate,
    KeyEdge,
    KeyParseError,
    Multigraph,
    classify_hairy,
    connected_to_cycle,
    graph_of_component,
    key_edge,
    parse_component_key,
    random_multigraph,
    replay_trace,
    vanish_by_cycle,
    zero_functional_oracle,
)

F = Fraction


def test_worked_example_graph():
    key = ComponentKey(6, (1, 2, 1), ((1, 1, 4, 3), (1, 2, 1, 2), (6, 2, 6, 1)))
    g = graph_of_component(key)
    assert sorted(g.edges) == [(1, 1), (1, 2), (1, 2), (1, 6), (2, 6), (3, 4)]
    assert g.num_edges == 2 * key.m


def test_empty_quaterns_give_edgeless_graph():
    key = ComponentKey(3, (1, 2), ())
    g = graph_of_component(key)
    assert g.num_edges == 0
    assert vanish_by_cycle(key) is None


def test_triangle_is_bald_hairy_cycle():
    deco = classify_hairy(Multigraph(3, [(1, 2), (2, 3), (1, 3)]))
    assert deco is not None and not deco.hairs


def test_triangle_with_two_edge_hair():
    g = Multigraph(5, [(1, 2), (2, 3), (1, 3), (3, 4), (4, 5)])
    deco = classify_hairy(g)
    assert deco is not None
    assert len(deco.hairs) == 1
    hair = deco.hairs[0]
    assert hair.vertices == (5, 4)
    assert hair.attach_vertex == 3
    assert len(hair.edge_ids) == 2


def test_figure_eight_not_hairy():
    assert classify_hairy(Multigraph(1, [(1, 1), (1, 1)])) is None


def test_parallel_pair_is_a_two_cycle():
    assert classify_hairy(Multigraph(2, [(1, 2), (1, 2)])) is not None


def test_chord_breaks_hairiness():
    # a 4-cycle with a chord has e=5 > v=4 and is not hairy
    g = Multigraph(4, [(1, 2), (2, 3), (3, 4), (1, 4), (1, 3)])
    assert classify_hairy(g) is None


def test_key_edge_examples():
    two_triangles = Multigraph(6, [(1, 2), (2, 3), (1, 3),
                                   (4, 5), (5, 6), (4, 6)])
    assert isinstance(key_edge(two_triangles), HairyForestCertificate)

    fig8 = Multigraph(1, [(1, 1), (1, 1)])
    res = key_edge(fig8)
    assert isinstance(res, KeyEdge) and res.k == res.l == 1

    tri_hair = Multigraph(5, [(1, 2), (2, 3), (1, 3), (3, 4), (4, 5)])
    res = key_edge(tri_hair)
    assert (res.k, res.l) == (3, 4)


def test_key_edge_requires_enough_edges():
    with pytest.raises(ValueError):
        key_edge(Multigraph(3, [(1, 2), (2, 3)]))


def test_connected_to_cycle():
    tree = Multigraph(4, [(1, 2), (2, 3), (3, 4)])
    assert not connected_to_cycle(tree, 2)
    tri = Multigraph(3, [(1, 2), (2, 3), (1, 3)])
    assert connected_to_cycle(tri, 1)
    hairy = Multigraph(5, [(1, 2), (2, 3), (1, 3), (3, 4), (4, 5)])
    assert connected_to_cycle(hairy, 5)     # hair tip counts
    loop = Multigraph(2, [(1, 1)])
    assert connected_to_cycle(loop, 1)
    assert not connected_to_cycle(loop, 2)


def test_vanish_by_cycle_loop_annihilation():
    # j_p sits directly on a loop pair: single-step annihilation
    key = ComponentKey(3, (2, 1), ((1, 1, 2, 3),))
    trace = vanish_by_cycle(key)
    assert trace is not None
    assert trace.steps[-1].rule == "triple-equal"
    assert len(trace.steps) == 1


def test_vanish_by_cycle_walk_factors():
    # j_p = 3 hangs off a triangle 1-2 / 2-3' ... use a 2-cycle: quaterns
    # (1,2,1,2) is a parallel pair, vertex 3 attached by (3,1,...)
    key = ComponentKey(3, (1, 3), ((3, 1, 1, 2), (1, 2, 3, 3)))
    trace = vanish_by_cycle(key)
    assert trace is not None
    # cumulative factor is a signed power of 1/2
    last = trace.steps[-1]
    assert last.rule == "triple-equal"
    assert abs(last.cumulative_factor.denominator) >= 1


def test_tree_component_not_applicable():
    key = ComponentKey(5, (5,), ((1, 2, 3, 4),))
    assert vanish_by_cycle(key) is None


def test_traces_confirmed_by_oracle_n3():
    import itertools
    ds = div_space(3, 2, 1)
    confirmed = 0
    for word in itertools.product(range(1, 4), repeat=2):
        for q in itertools.product(range(1, 4), repeat=4):
            key = ComponentKey(3, word, (q,))
            trace = vanish_by_cycle(key)
            if trace is None:
                continue
            assert zero_functional_oracle(key, ds)
            confirmed += 1
    assert confirmed == 297


def test_trace_replay_validates_each_step():
    ds = div_space(3, 2, 1)
    key = ComponentKey(3, (1, 1), ((2, 1, 1, 3),))
    trace = vanish_by_cycle(key)
    if trace is not None:
        assert replay_trace(trace, ds)


def test_pinned_nonzero_functional():
    # a key evaluating nonzero on the computed kernel: the oracle says False
    ds = div_space(3, 2, 1)
    key = ComponentKey(3, (1, 1), ((1, 2, 2, 3),))
    assert zero_functional_oracle(key, ds) is False
    assert vanish_by_cycle(key) is None     # no trace claims otherwise


def test_oracle_dim_zero_space_always_true():
    ds = div_space(2, 2, 1)
    key = ComponentKey(2, (1, 2), ((1, 1, 2, 2),))
    assert zero_functional_oracle(key, ds) is True


def test_oracle_parameter_mismatch():
    ds = div_space(2, 2, 1)
    key = ComponentKey(3, (1, 2), ((1, 1, 2, 2),))
    with pytest.raises(ValueError):
        zero_functional_oracle(key, ds)


def test_parse_component_key():
    key = parse_component_key("121;1143;1212;6261", 6)
    assert key.word == (1, 2, 1)
    assert key.quaterns == ((1, 1, 4, 3), (1, 2, 1, 2), (6, 2, 6, 1))
    key = parse_component_key("1,2;1,1,2,2", 2)
    assert key.word == (1, 2)
    with pytest.raises(KeyParseError):
        parse_component_key("12;113", 3)        # quatern of length 3
    with pytest.raises(KeyParseError):
        parse_component_key("1x;1122", 3)       # bad character
    with pytest.raises(KeyParseError):
        parse_component_key("13;1122", 2)       # letter out of range


def test_random_suite_properties():
    rng = random.Random(2718)
    for _ in range(200):
        g = random_multigraph(rng)
        assert g.num_edges >= g.num_vertices
        res = key_edge(g)
        if isinstance(res, KeyEdge):
            assert not g.is_simple_vertex(res.k)
            assert not g.is_simple_vertex(res.l)
            assert connected_to_cycle(g.without_edge(res.edge_index), res.k)
        else:
            for vs, deco in res.components:
                es = [i for i, e in enumerate(g.edges) if e[0] in vs]
                assert len(es) == len(vs)


def test_tree_components_have_one_less_edge():
    rng = random.Random(31415)
    for _ in range(150):
        g = random_multigraph(rng, require_e_ge_v=False)
        for vs, es in g.components():
            has_cycle = connected_to_cycle(g, next(iter(vs)))
            if has_cycle:
                assert len(es) >= len(vs)
            else:
                assert len(es) == len(vs) - 1    # trees
