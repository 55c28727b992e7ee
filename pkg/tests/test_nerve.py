import dataclasses

import pytest
from sgc.complex import build_complex
from sgc.errors import ConstructionError, DataError, InputError
from sgc.game import affine_transform
from sgc.io import mixed_sets, to_game
from sgc.nerve import (
    DualFlowEdge, DualPoint, Nerve, all_stars, build_global_nerve, comparable_star, dual_flow, export_nerve_dot,
    global_nerve, local_nerve, local_nerves, nerve_to_dict, reconstruct_complex, traversal_order,
)
from util import PRISONERS_DILEMMA, bundled_complex, complex_from_doc, constant_game, pure_complex, random_games, two_by_two


rps = bundled_complex('rock_paper_scissors')
pd = pure_complex(two_by_two(PRISONERS_DILEMMA, names=('C', 'D')))


def test_rps_stars_and_nerves():
    stars = all_stars(rps)
    assert len(stars) == 6
    assert all(len(star.points) == 3 for star in stars)
    nerves = local_nerves(rps)
    assert len(nerves) == 6
    assert all(len(nerve.edges) == 3 and len(nerve.tree) == 2 for nerve in nerves)
    glued = global_nerve(nerves)
    assert len(glued.vertices) == 9
    assert len(glued.edges) == 18
    assert len(glued.tree) == 12


def test_thread_pool_keeps_star_order():
    assert local_nerves(rps, threads=4) == local_nerves(rps)


@pytest.mark.parametrize('base', [(None, 0), (0,), [None, 0]])
def test_comparable_star_base_forms(base):
    star = comparable_star(pd, 0, base)
    assert star.labels == (0, 2)
    assert star.payoffs == (3.0, 5.0)
    assert star.id == 'p0:*,0'


@pytest.mark.parametrize('base', [(0, 0), (None, 5), (None,), (None, None, 0)])
def test_comparable_star_rejects_bad_bases(base):
    with pytest.raises(InputError):
        comparable_star(pd, 0, base)


def test_dual_flow_points_to_higher_payoff():
    star = comparable_star(pd, 0, (None, 0))
    edge = dual_flow(star, 0, 2)
    assert (edge.source, edge.target, edge.weight, edge.tie) == (0, 2, 2.0, False)
    assert dual_flow(star, 2, 0) == edge
    assert dual_flow(star, 0, 1) is None


def test_ties_point_up_and_enter_both_ends():
    flat = pure_complex(constant_game((3, 2)))
    star = comparable_star(flat, 0, (None, 1))
    edge = dual_flow(star, 5, 1)
    assert edge.tie
    assert (edge.source, edge.target) == (1, 5)
    assert edge.enters(1) and edge.enters(5)


def test_spanning_tree_prefers_heavy_edges():
    star = comparable_star(rps, 0, (None, 1))
    nerve = local_nerve(star)
    weights = sorted(e.weight for e in nerve.edges)
    assert sorted(e.weight for e in nerve.tree) == weights[1:]


def test_reconstruct_round_trip():
    rebuilt = reconstruct_complex(build_global_nerve(rps))
    assert rebuilt.m == rps.m
    assert [(f.label, f.indices, f.payoffs) for f in rebuilt.facets] == \
        [(f.label, f.indices, f.payoffs) for f in rps.facets]
    assert rebuilt.f_vector() == rps.f_vector()


def test_reconstruct_round_trip_on_random_games():
    for doc in random_games(seed=5, count=15):
        complex_ = complex_from_doc(doc)
        rebuilt = reconstruct_complex(build_global_nerve(complex_))
        assert [f.indices for f in rebuilt.facets] == [f.indices for f in complex_.facets]


def test_traversal_order_visits_every_label():
    order = traversal_order(build_global_nerve(rps))
    assert order[0] == 0
    assert sorted(order) == list(range(9))


def test_traversal_order_walks_components_by_lowest_label():
    edges = [(2, 3), (0, 3), (0, 1), (4, 5)]
    nerve = Nerve(
        'global', 'forest',
        tuple(DualPoint(label, None) for label in range(7)),
        tuple(DualFlowEdge(a, b, 1.0, False, 0, 's') for a, b in edges),
        (),
    )
    assert traversal_order(nerve) == [0, 1, 3, 2, 4, 5, 6]


def test_reconstruct_rejects_empty_or_detached_nerves():
    with pytest.raises(DataError):
        reconstruct_complex(Nerve('global', 'empty', (), (), ()))
    nerve = dataclasses.replace(build_global_nerve(pd), game=None)
    with pytest.raises(DataError):
        reconstruct_complex(nerve)
    nerve = build_global_nerve(pd)
    point = dataclasses.replace(nerve.vertices[0], facet=None)
    with pytest.raises(DataError):
        reconstruct_complex(dataclasses.replace(nerve, vertices=(point,) + nerve.vertices[1:]))


def test_label_collision_is_rejected():
    a = local_nerve(comparable_star(rps, 0, (None, 2)))
    b = local_nerve(comparable_star(pd, 0, (None, 0)))
    assert 2 in a.labels and 2 in b.labels
    with pytest.raises(ConstructionError):
        global_nerve([a, b])


def test_dot_export():
    nerve = local_nerve(comparable_star(pd, 0, (None, 0)))
    dot = export_nerve_dot(nerve)
    assert dot.startswith('digraph "p0:*,0" {')
    assert '0 -> 2 [label="2", flow="2", player=0, penwidth=2];' in dot
    assert dot == export_nerve_dot(nerve)
    tied = export_nerve_dot(build_global_nerve(pure_complex(constant_game((2, 2)))))
    assert 'style=dashed' in tied and 'dir=none' in tied


def test_nerve_to_dict_and_networkx():
    nerve = build_global_nerve(pd)
    data = nerve_to_dict(nerve)
    assert [v['label'] for v in data['vertices']] == [0, 1, 2, 3]
    assert len(data['edges']) == 4
    graph = nerve.to_networkx()
    assert graph.number_of_nodes() == 4
    assert graph.has_edge(0, 2) and not graph.has_edge(0, 3)


def directions(complex_):
    return [(e.source, e.target, e.tie) for e in build_global_nerve(complex_).edges]


@pytest.mark.parametrize('scale,shift', [(1.0, 3.25), (2.5, 0.0)])
def test_directions_survive_positive_affine_payoff_changes(scale, shift):
    for doc in random_games(seed=9, count=15):
        game, sets = to_game(doc), mixed_sets(doc)
        expected = directions(build_complex(game, sets))
        for i in range(game.n):
            transformed = affine_transform(game, i, scale=scale, shift=shift)
            assert directions(build_complex(transformed, sets)) == expected
