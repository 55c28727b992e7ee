import numpy as np
import pytest
from sgc.errors import InputError, NumericalError
from sgc.game import Game, affine_transform
from sgc.hodge import (
    Cochain, FlowComplex, FlowEdge, LaplacianSolver, build_flow_complex, classify, decompose, game_flow,
    hodge_dimensions, matrix_to_triplets, potential_function,
)
from sgc.nerve import build_global_nerve
from util import (
    COORDINATION, MATCHING_PENNIES, PRISONERS_DILEMMA, bundled_complex, complex_from_doc, constant_game,
    pure_complex, random_games, two_by_two,
)


def flow_complex_of(complex_):
    return build_flow_complex(build_global_nerve(complex_))


rps = bundled_complex('rock_paper_scissors')
pd = pure_complex(two_by_two(PRISONERS_DILEMMA))
mp = pure_complex(two_by_two(MATCHING_PENNIES))
coordination = pure_complex(two_by_two(COORDINATION))
single = pure_complex(Game([['a', 'b', 'c', 'd']], [[1.0], [2.0], [4.0], [3.0]]))

path = FlowComplex([0, 1, 2], [FlowEdge(0, 1, 0, 's'), FlowEdge(1, 2, 0, 't')], [])
triangle = FlowComplex(
    [0, 1, 2],
    [FlowEdge(0, 1, 0, 's'), FlowEdge(0, 2, 0, 's'), FlowEdge(1, 2, 0, 's')],
    [(0, 1, 2)],
)


@pytest.mark.parametrize('complex_,shape', [
    (rps, (9, 18, 6)),
    (pd, (4, 4, 0)),
    (single, (4, 6, 4)),
])
def test_flow_complex_shapes(complex_, shape):
    assert flow_complex_of(complex_).shape == shape


def test_flow_complex_edges_match_global_nerve():
    nerve = build_global_nerve(rps)
    fc = build_flow_complex(nerve)
    assert {(e.source, e.target) for e in fc.edges} == \
        {(min(e.source, e.target), max(e.source, e.target)) for e in nerve.edges}


def test_boundary_columns():
    d1 = path.boundary_matrix(1).toarray()
    assert d1[:, 0].tolist() == [-1.0, 1.0, 0.0]
    d2 = triangle.boundary_matrix(2).toarray()
    assert d2[:, 0].tolist() == [1.0, -1.0, 1.0]


@pytest.mark.parametrize('complex_', [rps, pd, single])
def test_chain_identities(complex_):
    fc = flow_complex_of(complex_)
    assert abs(fc.boundary_matrix(1) @ fc.boundary_matrix(2)).sum() == 0
    assert abs(fc.coboundary(1) @ fc.coboundary(0)).sum() == 0


def test_coboundary_is_a_difference_operator():
    assert (path.coboundary(0) @ np.array([0.0, 1.0, 2.0])).tolist() == [1.0, 1.0]


def test_adjointness():
    fc = flow_complex_of(rps)
    rng = np.random.default_rng(0)
    for t in (0, 1):
        delta = fc.coboundary(t)
        d = fc.boundary_matrix(t + 1)
        for _ in range(100):
            f = rng.standard_normal(delta.shape[1])
            c = rng.standard_normal(delta.shape[0])
            assert abs((delta @ f) @ c - f @ (d @ c)) < 1e-12


def test_laplacians():
    assert triangle.laplacian(0).diagonal().tolist() == [2.0, 2.0, 2.0]
    for t in (0, 1, 2):
        L = flow_complex_of(rps).laplacian(t)
        assert abs(L - L.T).sum() == 0
        assert np.linalg.eigvalsh(L.toarray()).min() >= -1e-10
    assert np.linalg.matrix_rank(path.laplacian(1).toarray()) == 2


@pytest.mark.parametrize('t', [-1, 3])
def test_invalid_dimensions(t):
    with pytest.raises(InputError):
        path.boundary_matrix(t)
    with pytest.raises(InputError):
        path.laplacian(t)


def test_game_flow_of_prisoners_dilemma():
    w = game_flow(pd)
    assert [(e.source, e.target) for e in w.flow_complex.edges] == [(0, 1), (0, 2), (1, 3), (2, 3)]
    assert w.values.tolist() == [2.0, 2.0, 1.0, 1.0]
    assert w[(1, 0)] == -2.0


def test_game_flow_ignores_shifts():
    shifted = pure_complex(affine_transform(pd.game, 0, shift=4.0))
    assert game_flow(shifted).values.tolist() == game_flow(pd).values.tolist()
    assert not game_flow(pure_complex(constant_game((2, 3)))).values.any()


@pytest.mark.parametrize('complex_,kind', [
    (coordination, 'potential'),
    (pd, 'potential'),
    (mp, 'harmonic'),
    (pure_complex(constant_game((2, 2))), 'nonstrategic'),
    (pure_complex(constant_game((3, 2, 2))), 'nonstrategic'),
])
def test_classify(complex_, kind):
    assert classify(complex_).kind == kind


def test_coordination_decomposition():
    decomposition = decompose(game_flow(coordination))
    norms = decomposition.norms()
    assert norms['harmonic'] < 1e-8
    assert norms['curl'] < 1e-8
    phi, residual = potential_function(game_flow(coordination))
    assert residual < 1e-8
    assert np.allclose(coordination_differences(phi), game_flow(coordination).values)


def coordination_differences(phi):
    fc = phi.flow_complex
    return [phi[e.target] - phi[e.source] for e in fc.edges]


def test_matching_pennies_decomposition():
    w = game_flow(mp)
    decomposition = decompose(w)
    assert decomposition.gradient.norm() < 1e-8
    assert np.allclose(decomposition.harmonic.values, w.values)
    phi, residual = potential_function(w)
    assert residual == pytest.approx(w.norm())
    assert decomposition.proof_labels()['H_G'] == pytest.approx(4.0)


def test_zero_flow_decomposes_to_zero():
    w = game_flow(pure_complex(constant_game((2, 2))))
    decomposition = decompose(w)
    assert decomposition.gradient.norm() == 0
    assert decomposition.harmonic.norm() == 0
    assert decomposition.curl.norm() == 0
    assert not decomposition.potential.values.any()


def test_potential_is_centered_per_component():
    phi, _ = potential_function(game_flow(pd))
    assert phi.values.sum() == pytest.approx(0.0, abs=1e-12)


def test_decomposition_invariants_on_random_games():
    for doc in random_games(seed=17, count=25):
        w = game_flow(complex_from_doc(doc))
        decomposition = decompose(w)
        assert max(decomposition.checks().values()) < 1e-8
        dims = hodge_dimensions(w.flow_complex)
        if dims['edges'] <= 200:
            assert dims['gradient'] + dims['harmonic'] + dims['curl'] == dims['edges']


def test_hodge_dimensions_of_rps():
    assert hodge_dimensions(flow_complex_of(rps)) == {'gradient': 8, 'harmonic': 4, 'curl': 6, 'edges': 18}
    assert hodge_dimensions(flow_complex_of(mp)) == {'gradient': 3, 'harmonic': 1, 'curl': 0, 'edges': 4}


def test_conjugate_gradients_agree_with_lu():
    w = game_flow(rps)
    direct = decompose(w)
    iterative = decompose(w, solver=LaplacianSolver(direct_limit=0))
    assert np.allclose(direct.potential.values, iterative.potential.values, atol=1e-8)


def test_solver_reports_non_convergence():
    chain = FlowComplex(range(5), [FlowEdge(k, k + 1, 0, 's') for k in range(4)], [])
    b = np.array([-1.0, 0.0, 0.0, 0.0, 1.0])
    with pytest.raises(NumericalError) as excinfo:
        LaplacianSolver(direct_limit=0, maxiter=1).solve(chain.laplacian(0), b)
    assert excinfo.value.residual > 1e-10


def test_cochain_validates_length():
    with pytest.raises(InputError, match=r'\[E056\]'):
        Cochain(1, [1.0], path)


@pytest.mark.parametrize('edges,triangles,code', [
    ([FlowEdge(1, 0, 0, 's')], [], 'E054'),
    ([FlowEdge(0, 1, 0, 's'), FlowEdge(1, 2, 0, 's')], [(0, 1, 2)], 'E055'),
])
def test_flow_complex_rejects_malformed_cells(edges, triangles, code):
    with pytest.raises(InputError, match=rf'\[{code}\]'):
        FlowComplex([0, 1, 2], edges, triangles)


def test_matrix_to_triplets():
    text = matrix_to_triplets(path.boundary_matrix(1))
    assert text.splitlines() == ['3 2 4', '0 0 -1', '1 0 1', '1 1 -1', '2 1 1']
