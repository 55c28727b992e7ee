import dataclasses

import pytest
from sgc.complex import build_complex
from sgc.covering import (
    CoverVertex, CoveringComplex, CoveringJoin, best_response, build_covering, compute_A, compute_Z,
    cross_level_neighborhood, degree, degree_table, deviation_neighborhood, is_best_response_by_degree,
    is_weak_maximum, nash_simplices, pure_star, restricted_neighborhood, same_level_neighborhoods, verify_covering,
)
from sgc.errors import InputError
from sgc.game import affine_transform, is_nash
from sgc.io import mixed_sets, to_game
from util import (
    MATCHING_PENNIES, PRISONERS_DILEMMA, bundled_complex, complex_from_doc, constant_game, pure_complex,
    random_games, two_by_two, with_uniform,
)


pd = pure_complex(two_by_two(PRISONERS_DILEMMA, names=('C', 'D')))
rps = bundled_complex('rock_paper_scissors')
mp_game = two_by_two(MATCHING_PENNIES, names=('H', 'T'))
mp = build_complex(mp_game, with_uniform(mp_game))


def test_pure_star_size():
    star = pure_star(rps, 0, 1)
    assert len(star.facets) == 3
    assert all(f.strategy == 1 and f.base[0] is None for f in star.facets)
    with pytest.raises(InputError):
        pure_star(rps, 0, 3)


def test_cross_level_degrees():
    neighborhood = cross_level_neighborhood(pd, 0, (None, 0))
    assert degree((0, 1, (None, 0)), neighborhood) == 1
    assert degree((0, 0, (None, 0)), neighborhood) == 0
    with pytest.raises(InputError, match=r'\[E041\]'):
        degree((0, 0, (None, 1)), neighborhood)


def test_ties_give_full_degree_to_both_ends():
    flat = pure_complex(constant_game((3, 2)))
    neighborhood = cross_level_neighborhood(flat, 0, (None, 0))
    assert [degree(member, neighborhood) for member in neighborhood.members] == [2, 2, 2]


def test_restricted_neighborhood():
    neighborhood = restricted_neighborhood(rps, 0, (None, 2), (0, 2))
    assert len(neighborhood) == 2
    assert degree((0, 0, (None, 2)), neighborhood) == 1


def test_same_level_neighborhoods():
    neighborhoods = same_level_neighborhoods(pd, 0, 1)
    assert len(neighborhoods) == 1
    assert neighborhoods[0].player == 1
    assert len(neighborhoods[0]) == 2
    assert len(same_level_neighborhoods(rps, 1, 0)) == 1
    assert len(same_level_neighborhoods(rps, 1, 0)[0]) == 3


def test_Z_and_A_for_prisoners_dilemma():
    assert compute_Z(pd, 0) == (1,)
    assert compute_Z(pd, 1) == (1,)
    assert compute_A(pd, 0, 1) == ((None, 0), (None, 1))
    with pytest.raises(InputError):
        compute_A(pd, 0, 0)


def test_Z_and_A_for_rock_paper_scissors():
    # Against R, P and the mix (0.2, 0.3, 0.5) the best replies are P, S and R.
    assert compute_Z(rps, 0) == (0, 1, 2)
    assert compute_A(rps, 0, 0) == ((None, 2),)
    assert compute_A(rps, 0, 1) == ((None, 0),)
    assert compute_A(rps, 0, 2) == ((None, 1),)


def test_best_response():
    response = best_response(pd, 0, (None, 0))
    assert [f.label for f in response] == [2]
    assert [f.label for f in best_response(pd, 1, (1,))] == [3]


@pytest.mark.parametrize('complex_,expected', [
    (pd, [3]),
    (rps, []),
    (mp, [8]),
    (pure_complex(two_by_two(MATCHING_PENNIES)), []),
])
def test_nash_simplices(complex_, expected):
    assert [f.label for f in nash_simplices(complex_)] == expected


def test_mixed_nash_of_matching_pennies():
    (facet,) = nash_simplices(mp)
    assert [str(x) for x in facet.strategies] == ['uniform', 'uniform']


def test_degree_criterion_matches_oracle_on_random_games():
    for doc in random_games(seed=11, count=40):
        complex_ = complex_from_doc(doc)
        oracle = [f.label for f in complex_.facets if is_nash(complex_.game, f.profile)]
        assert [f.label for f in nash_simplices(complex_)] == oracle
        for facet in complex_.facets:
            for i in range(complex_.n):
                base = tuple(None if k == i else x for k, x in enumerate(facet.indices))
                by_degree = is_best_response_by_degree(complex_, facet, i)
                assert (facet in best_response(complex_, i, base)) == by_degree
                neighborhood = deviation_neighborhood(complex_, facet, i)
                assert is_weak_maximum(('facet', facet.label), neighborhood, complex_.tol) == by_degree


def test_deviation_neighborhood():
    facet = pd.facet(3)
    neighborhood = deviation_neighborhood(pd, facet, 0)
    assert len(neighborhood) == 3
    assert degree(('facet', 3), neighborhood) == 2
    assert is_best_response_by_degree(pd, facet, 0)
    assert not is_best_response_by_degree(pd, pd.facet(0), 0)


def test_degree_table():
    table = degree_table(pd)
    assert len(table) == 8
    assert {(r.point, r.degree) for r in table if r.neighborhood == 'deviation:3:p0'} == {(3, 2)}


def test_covering_of_rock_paper_scissors():
    covering = build_covering(rps)
    assert len(covering.joins) == 9
    assert covering.project(covering.joins[0]) == (0, 0.0)
    report = verify_covering(covering, rps)
    assert report.passed
    assert [c.name for c in report.conditions] == [
        'simplicial_complex', 'simplicial_map', 'disjoint_bijective_preimages']


def test_covering_with_ties_has_one_join_per_cover_choice():
    flat = pure_complex(constant_game((2, 2)))
    covering = build_covering(flat)
    assert len(covering.joins) == 4 * 2 * 2
    assert verify_covering(covering, flat).passed


def test_covering_passes_on_random_games():
    for doc in random_games(seed=13, count=25):
        complex_ = complex_from_doc(doc)
        assert verify_covering(build_covering(complex_), complex_).passed


def test_empty_covering_passes_vacuously():
    report = verify_covering(CoveringComplex(sheets={}, joins=(), projection={}), pd)
    assert report.passed


def test_shared_vertex_fails_disjointness():
    covering = build_covering(pd)
    join = covering.joins[0]
    copy = CoverVertex(join.label, (99, 99), 1)
    bad = CoveringJoin(join.label, join.covers, (join.vertices[0], copy), join.payoffs)
    faulty = dataclasses.replace(
        covering,
        joins=covering.joins + (bad,),
        projection={**covering.projection, copy: covering.projection[join.vertices[1]]},
    )
    report = verify_covering(faulty, pd)
    assert not report.passed
    assert report['simplicial_complex'].passed
    assert report['simplicial_map'].passed
    condition = report['disjoint_bijective_preimages']
    assert not condition.passed
    assert 'share' in condition.witness
    assert report.to_dict()['passed'] is False


@pytest.mark.parametrize('scale,shift', [(1.0, 3.25), (2.5, 0.0)])
def test_nash_simplices_survive_positive_affine_payoff_changes(scale, shift):
    for doc in random_games(seed=9, count=15):
        game, sets = to_game(doc), mixed_sets(doc)
        expected = [f.label for f in nash_simplices(build_complex(game, sets))]
        for i in range(game.n):
            transformed = build_complex(affine_transform(game, i, scale=scale, shift=shift), sets)
            assert [f.label for f in nash_simplices(transformed)] == expected
