"""Finite strategic-form games: players, pure and mixed strategies, expected
payoffs and a brute-force Nash equilibrium oracle."""
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, Optional, Sequence, Set, Tuple

import numpy as np

from .errors import Errors, InputError
from .util import TOLERANCE


PureProfile = Tuple[int, ...]


class Game:
    """A finite non-cooperative game in strategic form.

    strategies (Sequence[Sequence[str]]): The pure strategy names of every
        player, S_1, ..., S_n.
    payoffs (array-like): Payoff tensor of shape (l_1, ..., l_n, n). Entry
        payoffs[s][i] is u_i(s). Indexing by profile tuple is the mixed-radix
        player-major order, the first player being most significant.
    players (Optional[Sequence[str]]): Player names. Defaults to "1".."n".
    """

    def __init__(
        self,
        strategies: Sequence[Sequence[str]],
        payoffs,
        *,
        players: Optional[Sequence[str]] = None,
    ) -> None:
        n = len(strategies)
        if n < 1:
            raise InputError(Errors.E001.format(n=n))
        for i, names in enumerate(strategies):
            if len(names) < 1:
                raise InputError(Errors.E002.format(i=i))
        self._strategies = tuple(tuple(str(s) for s in names) for names in strategies)
        self._shape = tuple(len(names) for names in self._strategies)
        tensor = np.array(payoffs, dtype=float)
        expected = self._shape + (n,)
        if tensor.shape != expected:
            raise InputError(Errors.E003.format(shape=tensor.shape, expected=expected))
        tensor.setflags(write=False)
        self._payoffs = tensor
        if players is None:
            players = [str(i + 1) for i in range(n)]
        if len(players) != n:
            raise InputError(Errors.E021.format(got=len(players), n=n))
        self._players = tuple(players)

    @classmethod
    def from_flat(
        cls,
        strategies: Sequence[Sequence[str]],
        flat: Sequence[float],
        *,
        players: Optional[Sequence[str]] = None,
    ) -> "Game":
        """Build a game from the flat tensor: profiles in mixed-radix order
        with the first player most significant, n payoffs per profile."""
        shape = tuple(len(names) for names in strategies) + (len(strategies),)
        values = np.asarray(flat, dtype=float)
        if values.size != int(np.prod(shape)):
            raise InputError(Errors.E003.format(shape=(values.size,), expected=shape))
        return cls(strategies, values.reshape(shape), players=players)

    @property
    def n(self) -> int:
        return len(self._strategies)

    @property
    def shape(self) -> Tuple[int, ...]:
        """(l_1, ..., l_n)"""
        return self._shape

    @property
    def strategies(self) -> Tuple[Tuple[str, ...], ...]:
        return self._strategies

    @property
    def players(self) -> Tuple[str, ...]:
        return self._players

    @property
    def payoffs(self) -> np.ndarray:
        return self._payoffs

    @property
    def num_profiles(self) -> int:
        return int(np.prod(self._shape))

    def to_flat(self) -> List[float]:
        return [float(x) for x in self._payoffs.reshape(-1)]

    def u(self, s: PureProfile) -> np.ndarray:
        """The payoff vector (u_1(s), ..., u_n(s))."""
        return self._payoffs[self.check_pure(s)]

    def profile_index(self, s: PureProfile) -> int:
        return int(np.ravel_multi_index(self.check_pure(s), self._shape))

    def check_player(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise InputError(Errors.E009.format(i=i, n=self.n))
        return i

    def check_pure(self, s: Sequence[int]) -> PureProfile:
        s = tuple(int(x) for x in s)
        if len(s) != self.n or any(not 0 <= x < l for x, l in zip(s, self._shape)):
            raise InputError(Errors.E010.format(s=s, shape=self._shape))
        return s

    def with_payoffs(self, payoffs) -> "Game":
        return Game(self._strategies, payoffs, players=self._players)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Game):
            return NotImplemented
        return (
            self._strategies == other._strategies
            and self._players == other._players
            and np.array_equal(self._payoffs, other._payoffs)
        )

    def __hash__(self) -> int:
        return hash((self._strategies, self._players, self._payoffs.tobytes()))

    def __repr__(self) -> str:
        return f"Game(players={self._players!r}, shape={self._shape!r})"


@dataclass(frozen=True)
class MixedStrategy:
    """A probability distribution over the pure strategies of one player.

    Weights are validated on construction. A sum that is off by at most the
    tolerance is renormalized, anything larger is rejected.
    """
    player: int
    weights: Tuple[float, ...]
    name: Optional[str] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        weights = np.asarray(self.weights, dtype=float)
        if weights.ndim != 1 or weights.size == 0:
            raise InputError(Errors.E004.format(i=self.player, got=weights.size, expected="at least 1"))
        if np.any(weights < 0):
            raise InputError(Errors.E005.format(i=self.player, weights=tuple(weights)))
        total = float(weights.sum())
        if abs(total - 1.0) > TOLERANCE:
            raise InputError(Errors.E006.format(i=self.player, total=total, tol=TOLERANCE))
        if total != 1.0:
            weights = weights / total
        object.__setattr__(self, "weights", tuple(float(w) for w in weights))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(j for j, w in enumerate(self.weights) if w > 0)

    def is_pure(self) -> bool:
        return len(self.support) == 1

    def __str__(self) -> str:
        if self.name:
            return self.name
        return "(" + ", ".join(f"{w:g}" for w in self.weights) + ")"


@dataclass(frozen=True)
class SituationProfile:
    """One mixed strategy per player, X = (x_1, ..., x_n)."""
    components: Tuple[MixedStrategy, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "components", tuple(self.components))
        for k, x in enumerate(self.components):
            if x.player != k:
                raise InputError(Errors.E008.format(k=k, i=x.player))

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self) -> Iterator[MixedStrategy]:
        return iter(self.components)

    def __getitem__(self, i: int) -> MixedStrategy:
        return self.components[i]

    def replace(self, i: int, x: MixedStrategy) -> "SituationProfile":
        """(x_i, X_î): the profile with player i's component swapped."""
        components = list(self.components)
        components[i] = x
        return SituationProfile(tuple(components))

    def __str__(self) -> str:
        return "(" + ", ".join(str(x) for x in self.components) + ")"


def delta(game: Game, i: int, j: int) -> MixedStrategy:
    """The pure strategy s_i^j as a degenerate distribution."""
    game.check_player(i)
    if not 0 <= j < game.shape[i]:
        raise InputError(Errors.E011.format(i=i, j=j, l=game.shape[i]))
    weights = [0.0] * game.shape[i]
    weights[j] = 1.0
    return MixedStrategy(i, tuple(weights), name=game.strategies[i][j])


def uniform(game: Game, i: int, *, name: Optional[str] = "uniform") -> MixedStrategy:
    l = game.shape[game.check_player(i)]
    return MixedStrategy(i, tuple([1.0 / l] * l), name=name)


def pure_profiles(game: Game) -> Iterator[PureProfile]:
    """All pure profiles in mixed-radix order."""
    return itertools.product(*(range(l) for l in game.shape))


def pure_situation(game: Game, s: PureProfile) -> SituationProfile:
    s = game.check_pure(s)
    return SituationProfile(tuple(delta(game, i, j) for i, j in enumerate(s)))


def check_profile(game: Game, X: SituationProfile) -> SituationProfile:
    if len(X) != game.n:
        raise InputError(Errors.E007.format(got=len(X), n=game.n))
    for i, x in enumerate(X):
        if len(x.weights) != game.shape[i]:
            raise InputError(Errors.E004.format(i=i, got=len(x.weights), expected=game.shape[i]))
    return X


def contract(tensor: np.ndarray, vectors: Sequence[np.ndarray], skip: Optional[int] = None) -> np.ndarray:
    """Contract the leading strategy axes of `tensor` against one weight
    vector per player. Axis `skip` is left uncontracted."""
    out = tensor
    for j in reversed(range(len(vectors))):
        if j == skip:
            continue
        # Descending order keeps the lower axis numbers valid.
        out = np.tensordot(out, vectors[j], axes=([j], [0]))
    return out


def expected_payoffs(game: Game, vectors: Sequence[np.ndarray]) -> np.ndarray:
    """(e_1(X), ..., e_n(X)) for per-player weight vectors. Zero vectors
    stand for the zero function of a missing player."""
    return np.asarray(contract(game.payoffs, vectors), dtype=float)


def expected_payoff(game: Game, X: SituationProfile, i: int) -> float:
    """e_i(X) = sum over s in S of u_i(s) * prod_j x_j(s_j)."""
    check_profile(game, X)
    game.check_player(i)
    return float(contract(game.payoffs[..., i], [x.array for x in X]))


def deviation_payoffs(game: Game, X: SituationProfile, i: int) -> np.ndarray:
    """The vector of e_i(s_i, X_î) over the pure strategies s_i of player i."""
    check_profile(game, X)
    game.check_player(i)
    return np.asarray(contract(game.payoffs[..., i], [x.array for x in X], skip=i), dtype=float)


def payoff_difference(game: Game, s: PureProfile, s_tilde: PureProfile, i: int) -> float:
    """w_i(s, s~) = u_i(s) - u_i(s~) for i-comparable profiles, else 0."""
    s = game.check_pure(s)
    s_tilde = game.check_pure(s_tilde)
    game.check_player(i)
    differing = [k for k in range(game.n) if s[k] != s_tilde[k]]
    if differing != [i]:
        return 0.0
    return float(game.payoffs[s][i] - game.payoffs[s_tilde][i])


def is_nash(game: Game, X: SituationProfile, *, tol: float = TOLERANCE) -> bool:
    """Weak Nash test: e_i(x_i, X_î) >= e_i(s_i, X_î) for all pure s_i, all i."""
    check_profile(game, X)
    for i in range(game.n):
        deviations = deviation_payoffs(game, X, i)
        value = float(X[i].array @ deviations)
        if value < deviations.max() - tol:
            return False
    return True


def nash_oracle(
    game: Game,
    candidates: Iterable[SituationProfile],
    *,
    tol: float = TOLERANCE,
) -> Set[SituationProfile]:
    """Brute-force oracle: the candidates satisfying the Nash inequalities."""
    return {X for X in candidates if is_nash(game, X, tol=tol)}


def pure_nash(game: Game, *, tol: float = TOLERANCE) -> List[PureProfile]:
    return [s for s in pure_profiles(game) if is_nash(game, pure_situation(game, s), tol=tol)]


def affine_transform(game: Game, i: int, scale: float = 1.0, shift: float = 0.0) -> Game:
    """The game with u_i replaced by scale * u_i + shift."""
    game.check_player(i)
    payoffs = np.array(game.payoffs)
    payoffs[..., i] = scale * payoffs[..., i] + shift
    return game.with_payoffs(payoffs)
