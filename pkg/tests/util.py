import numpy as np
from sgc.complex import SituationComplex, build_complex
from sgc.game import Game, delta, uniform
from sgc.io import GameDocument, mixed_sets, parse_game, random_document, to_game
from sgc.util import GAMES_DIR, TOLERANCE


def bundled(name):
    return parse_game(GAMES_DIR / f'{name}.json')


def complex_from_doc(doc: GameDocument, tol=TOLERANCE) -> SituationComplex:
    return build_complex(to_game(doc), mixed_sets(doc), tol=tol)


def bundled_complex(name, tol=TOLERANCE) -> SituationComplex:
    return complex_from_doc(bundled(name), tol=tol)


def two_by_two(flat, names=('A', 'B')):
    return Game.from_flat([list(names), list(names)], flat)


def pure_sets(game):
    return [[delta(game, i, j) for j in range(l)] for i, l in enumerate(game.shape)]


def pure_complex(game, tol=TOLERANCE):
    return build_complex(game, pure_sets(game), tol=tol)


def with_uniform(game):
    return [[delta(game, i, j) for j in range(l)] + [uniform(game, i)] for i, l in enumerate(game.shape)]


def constant_game(shape, value=1.0):
    strategies = [[f's{j}' for j in range(l)] for l in shape]
    return Game(strategies, np.full(tuple(shape) + (len(shape),), value))


PRISONERS_DILEMMA = [3, 3, 0, 5, 5, 0, 1, 1]
MATCHING_PENNIES = [1, -1, -1, 1, -1, 1, 1, -1]
COORDINATION = [2, 2, 0, 0, 0, 0, 1, 1]


def random_games(seed=0, count=30, players=(2, 3), max_strategies=3, max_mixed=4):
    """Seeded random game documents: uniform payoffs in [-10, 10] and random
    mixed strategy sets."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield random_document(rng, players=players, max_strategies=max_strategies, max_mixed=max_mixed)
