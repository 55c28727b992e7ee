"""The situation complex K_G of a game and its weighted version K*_G.

Facets are the situations [x_1, ..., x_n] built from finite per-player sets of
mixed strategies. Every facet and face carries a weight (the summed expected
payoffs) and a barycenter given as convex weights over its vertices.
"""
import itertools
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Mapping, NamedTuple, Optional
from typing import Sequence, Tuple

import numpy as np
from scipy import sparse

from .errors import ConstructionError, Errors, InputError
from .game import Game, MixedStrategy, SituationProfile, expected_payoffs
from .util import TOLERANCE, logger


class Vertex(NamedTuple):
    """The mixed strategy mixed_sets[player][index] as a vertex of K_G."""
    player: int
    index: int


@dataclass(frozen=True, order=True)
class Simplex:
    """An oriented simplex of K_G. Vertices are kept in player order, which
    fixes the orientation; faces inherit it by subsequence."""
    vertices: Tuple[Vertex, ...]

    def __post_init__(self) -> None:
        vertices = tuple(Vertex(*v) for v in self.vertices)
        players = [v.player for v in vertices]
        if not vertices or players != sorted(set(players)):
            raise InputError(Errors.E023.format(simplex=vertices))
        object.__setattr__(self, "vertices", vertices)

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1

    @property
    def players(self) -> Tuple[int, ...]:
        return tuple(v.player for v in self.vertices)

    def faces(self) -> Iterator["Simplex"]:
        """All nonempty faces, the simplex itself included."""
        for size in range(1, len(self.vertices) + 1):
            for subset in itertools.combinations(self.vertices, size):
                yield Simplex(subset)

    def boundary_faces(self) -> Iterator[Tuple[int, "Simplex"]]:
        """(sign, face) pairs of the boundary, sign = (-1)^i."""
        if self.dim < 1:
            return
        for i in range(len(self.vertices)):
            yield (-1) ** i, Simplex(self.vertices[:i] + self.vertices[i + 1:])

    def __contains__(self, other: "Simplex") -> bool:
        return set(other.vertices) <= set(self.vertices)

    def __str__(self) -> str:
        return "[" + ",".join(f"{v.player}:{v.index}" for v in self.vertices) + "]"


def permutation_sign(seq: Sequence) -> int:
    """Parity of the permutation that sorts `seq`; 0 if an item repeats."""
    if len(set(seq)) != len(seq):
        return 0
    sign = 1
    items = list(seq)
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            if items[j] < items[i]:
                sign = -sign
    return sign


class Chain:
    """A finitely supported chain: oriented cells with real coefficients.

    Cells are vertex tuples. They are stored in sorted vertex order; adding a
    cell in another order applies the sign of the permutation.
    """

    def __init__(self, dim: int, coefficients: Optional[Mapping[tuple, float]] = None) -> None:
        self.dim = dim
        self._coefficients: Dict[tuple, float] = {}
        for cell, value in (coefficients or {}).items():
            self.add(cell, value)

    @classmethod
    def from_simplex(cls, simplex: Simplex, coefficient: float = 1.0) -> "Chain":
        return cls(simplex.dim, {simplex.vertices: coefficient})

    def add(self, cell: Sequence, value: float) -> None:
        cell = tuple(cell)
        if len(cell) != self.dim + 1:
            raise InputError(Errors.E022.format(dim=self.dim, simplex=cell))
        sign = permutation_sign(cell)
        if sign == 0 or value == 0:
            return
        key = tuple(sorted(cell))
        total = self._coefficients.get(key, 0.0) + sign * value
        if total == 0:
            self._coefficients.pop(key, None)
        else:
            self._coefficients[key] = total

    def __getitem__(self, cell: Sequence) -> float:
        cell = tuple(cell)
        sign = permutation_sign(cell)
        return sign * self._coefficients.get(tuple(sorted(cell)), 0.0)

    def items(self) -> List[Tuple[tuple, float]]:
        return sorted(self._coefficients.items())

    def __len__(self) -> int:
        return len(self._coefficients)

    def __add__(self, other: "Chain") -> "Chain":
        out = Chain(self.dim, dict(self._coefficients))
        for cell, value in other._coefficients.items():
            out.add(cell, value)
        return out

    def __mul__(self, scalar: float) -> "Chain":
        return Chain(self.dim, {c: scalar * v for c, v in self._coefficients.items()})

    __rmul__ = __mul__

    def __sub__(self, other: "Chain") -> "Chain":
        return self + other * -1.0

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(v) <= tol for v in self._coefficients.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Chain):
            return NotImplemented
        return self.dim == other.dim and (self - other).is_zero()

    def __repr__(self) -> str:
        return f"Chain(dim={self.dim}, {dict(self.items())!r})"


def boundary(chain: Chain) -> Chain:
    """The boundary operator, extended linearly. A 0-chain has the empty
    boundary (dimension -1)."""
    out = Chain(chain.dim - 1)
    if chain.dim < 1:
        return out
    for cell, value in chain.items():
        for i in range(len(cell)):
            out.add(cell[:i] + cell[i + 1:], (-1) ** i * value)
    return out


@dataclass(frozen=True)
class Barycenter:
    """Convex weights over the vertices of `simplex`, in vertex order."""
    simplex: Simplex
    weights: Tuple[float, ...]

    def is_convex(self, tol: float = TOLERANCE) -> bool:
        return all(-tol <= w <= 1 + tol for w in self.weights) and abs(sum(self.weights) - 1) <= tol


@dataclass(frozen=True)
class WeightedSimplex:
    """sigma* = (sigma, f(sigma)), a simplex of K*_G."""
    simplex: Simplex
    weight: float


@dataclass(frozen=True)
class SituationFacet:
    """An (n-1)-simplex [x_1, ..., x_n] with its label and cached payoffs."""
    label: int
    simplex: Simplex
    strategies: Tuple[MixedStrategy, ...]
    payoffs: Tuple[float, ...]

    @property
    def weight(self) -> float:
        """f(X) = e_1(X) + ... + e_n(X)"""
        return float(sum(self.payoffs))

    @property
    def indices(self) -> Tuple[int, ...]:
        return tuple(v.index for v in self.simplex.vertices)

    @property
    def profile(self) -> SituationProfile:
        return SituationProfile(self.strategies)

    def __str__(self) -> str:
        return "[" + ", ".join(str(x) for x in self.strategies) + "]"


@dataclass(frozen=True)
class DualCell:
    """The star dual *(sigma_t): signed flags of barycenters
    [bc(sigma_t), ..., bc(sigma_{n-1})] over the coface chains of sigma_t."""
    base: Simplex
    pieces: Tuple[Tuple[int, Tuple[Simplex, ...]], ...]

    @property
    def dim(self) -> int:
        return len(self.pieces[0][1]) - 1 if self.pieces else -1

    @property
    def chain(self) -> Chain:
        out = Chain(self.dim)
        for sign, flag in self.pieces:
            out.add(flag, sign)
        return out


def comparable_player(a: Sequence[int], b: Sequence[int]) -> Optional[int]:
    """The player i if the index tuples differ exactly in coordinate i."""
    differing = [k for k, (x, y) in enumerate(zip(a, b)) if x != y]
    return differing[0] if len(differing) == 1 else None


def barycentric_weights(vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Barycentric weights of a situation over its n vertex slots.

    Every pure profile s contributes the convex combination with weights
    x_j(s_j) / sum_j x_j(s_j). The result is the average over contributing
    profiles; profiles whose denominator vanishes are skipped.
    """
    grids = np.meshgrid(*vectors, indexing="ij")
    stack = np.stack(grids).reshape(len(vectors), -1)
    denominators = stack.sum(axis=0)
    contributing = denominators > 0
    if not contributing.any():
        return np.zeros(len(vectors))
    return (stack[:, contributing] / denominators[contributing]).mean(axis=1)


def barycenter_facet(facet: SituationFacet) -> Barycenter:
    weights = barycentric_weights([x.array for x in facet.strategies])
    return Barycenter(facet.simplex, tuple(float(w) for w in weights))


class SituationComplex:
    """The weighted situation complex K*_G.

    Built once and never mutated afterwards. Faces are interned, so a face
    shared by several facets exists exactly once.

    game (Game): The game.
    mixed_sets (Sequence[Sequence[MixedStrategy]]): The finite set P_i of
        mixed strategies of every player.
    facets (Optional[Iterable[SituationFacet]]): Facets to use instead of the
        full product of the mixed sets.
    tol (float): Payoff comparison tolerance shared by downstream analyses.
    """

    def __init__(
        self,
        game: Game,
        mixed_sets: Sequence[Sequence[MixedStrategy]],
        facets: Optional[Iterable[SituationFacet]] = None,
        *,
        tol: float = TOLERANCE,
    ) -> None:
        if len(mixed_sets) != game.n:
            raise InputError(Errors.E021.format(got=len(mixed_sets), n=game.n))
        for i, strategies in enumerate(mixed_sets):
            if len(strategies) == 0:
                raise InputError(Errors.E020.format(i=i))
            for x in strategies:
                if x.player != i or len(x.weights) != game.shape[i]:
                    raise InputError(Errors.E004.format(i=i, got=len(x.weights), expected=game.shape[i]))
        self.game = game
        self.mixed_sets = tuple(tuple(s) for s in mixed_sets)
        self.m = tuple(len(s) for s in self.mixed_sets)
        self.tol = tol
        if facets is None:
            facets = [self._make_facet(k) for k in itertools.product(*(range(mi) for mi in self.m))]
        self.facets = tuple(sorted(facets, key=lambda f: f.label))
        self._facet_by_label: Dict[int, SituationFacet] = {}
        for facet in self.facets:
            if facet.label in self._facet_by_label:
                raise ConstructionError(Errors.E024.format(label=facet.label))
            self._facet_by_label[facet.label] = facet
        self._facet_by_indices = {f.indices: f for f in self.facets}
        self._build_faces()
        logger.debug("Built situation complex: %d facets, f-vector %s", len(self.facets), self.f_vector())

    def _make_facet(self, indices: Sequence[int]) -> SituationFacet:
        strategies = tuple(self.mixed_sets[i][k] for i, k in enumerate(indices))
        payoffs = expected_payoffs(self.game, [x.array for x in strategies])
        return SituationFacet(
            label=self.label(indices),
            simplex=Simplex(tuple(Vertex(i, k) for i, k in enumerate(indices))),
            strategies=strategies,
            payoffs=tuple(float(e) for e in payoffs),
        )

    def _build_faces(self) -> None:
        faces = set()
        for facet in self.facets:
            faces.update(facet.simplex.faces())
        by_dim: Dict[int, List[Simplex]] = {}
        for face in faces:
            by_dim.setdefault(face.dim, []).append(face)
        self.faces: Dict[int, Tuple[Simplex, ...]] = {
            t: tuple(sorted(by_dim[t])) for t in sorted(by_dim)
        }
        self._face_index = {t: {s: k for k, s in enumerate(fs)} for t, fs in self.faces.items()}
        cofaces: Dict[Simplex, List[Simplex]] = {face: [] for face in faces}
        for face in faces:
            for _, sub in face.boundary_faces():
                cofaces[sub].append(face)
        self._cofaces = {face: tuple(sorted(c)) for face, c in cofaces.items()}
        self._weights = {face: self._face_weight(face) for face in faces}
        self._barycenters = {face: self._barycenter(face) for face in faces}

    @property
    def n(self) -> int:
        return self.game.n

    @property
    def dim(self) -> int:
        return max(self.faces) if self.faces else -1

    def label(self, indices: Sequence[int]) -> int:
        """The label function: the mixed-radix index of (k_1, ..., k_n)."""
        return int(np.ravel_multi_index(tuple(indices), self.m))

    def strategy(self, vertex: Vertex) -> MixedStrategy:
        return self.mixed_sets[vertex.player][vertex.index]

    def facet(self, label: int) -> SituationFacet:
        return self._facet_by_label[label]

    def facet_at(self, indices: Sequence[int]) -> Optional[SituationFacet]:
        return self._facet_by_indices.get(tuple(indices))

    def __contains__(self, simplex: Simplex) -> bool:
        return simplex in self._weights

    def check_simplex(self, simplex: Simplex) -> Simplex:
        if simplex not in self._weights:
            raise InputError(Errors.E023.format(simplex=simplex))
        return simplex

    def cofaces(self, simplex: Simplex) -> Tuple[Simplex, ...]:
        """The simplices of one dimension more that contain `simplex`."""
        return self._cofaces[self.check_simplex(simplex)]

    def _zero_extended(self, simplex: Simplex) -> List[np.ndarray]:
        vectors = [np.zeros(l) for l in self.game.shape]
        for v in simplex.vertices:
            vectors[v.player] = self.strategy(v).array
        return vectors

    def _face_weight(self, simplex: Simplex) -> float:
        return float(expected_payoffs(self.game, self._zero_extended(simplex)).sum())

    def _barycenter(self, simplex: Simplex) -> Barycenter:
        weights = barycentric_weights(self._zero_extended(simplex))
        real = np.array([weights[v.player] for v in simplex.vertices])
        total = real.sum()
        if total > 0:
            real = real / total
        return Barycenter(simplex, tuple(float(w) for w in real))

    def face_weight(self, simplex: Simplex) -> float:
        return self._weights[self.check_simplex(simplex)]

    def barycenter(self, simplex: Simplex) -> Barycenter:
        return self._barycenters[self.check_simplex(simplex)]

    def weighted(self, simplex: Simplex) -> WeightedSimplex:
        return WeightedSimplex(simplex, self.face_weight(simplex))

    def f_vector(self) -> Tuple[int, ...]:
        return tuple(len(self.faces[t]) for t in sorted(self.faces))

    def euler_characteristic(self) -> int:
        return sum((-1) ** t * len(fs) for t, fs in self.faces.items())

    def boundary_matrix(self, t: int) -> sparse.csr_matrix:
        """Signed incidence of t-faces (columns) on (t-1)-faces (rows)."""
        cols = self.faces.get(t, ())
        rows = self.faces.get(t - 1, ())
        row_index = self._face_index.get(t - 1, {})
        data, r, c = [], [], []
        for j, face in enumerate(cols):
            for sign, sub in face.boundary_faces():
                data.append(sign)
                r.append(row_index[sub])
                c.append(j)
        return sparse.coo_matrix((data, (r, c)), shape=(len(rows), len(cols))).tocsr()

    def star_dual(self, simplex: Simplex) -> DualCell:
        """*(sigma_t): one signed flag per coface chain up to a facet. The sign
        is the orientation of (sigma_t's vertices, then the added vertices)
        relative to the facet."""
        self.check_simplex(simplex)
        pieces = []
        for flag in self._coface_chains(simplex):
            added = list(simplex.vertices)
            for lower, upper in zip(flag, flag[1:]):
                added.extend(v for v in upper.vertices if v not in lower.vertices)
            pieces.append((permutation_sign(added), tuple(flag)))
        return DualCell(simplex, tuple(sorted(pieces, key=lambda p: p[1])))

    def _coface_chains(self, simplex: Simplex) -> Iterator[List[Simplex]]:
        if simplex.dim == self.n - 1:
            yield [simplex]
            return
        for coface in self._cofaces[simplex]:
            for rest in self._coface_chains(coface):
                yield [simplex] + rest


def build_complex(
    game: Game,
    mixed_sets: Sequence[Sequence[MixedStrategy]],
    *,
    tol: float = TOLERANCE,
) -> SituationComplex:
    """Build K*_G with one facet per element of P_1 x ... x P_n."""
    return SituationComplex(game, mixed_sets, tol=tol)


def barycenter_face(complex_: SituationComplex, simplex: Simplex) -> Barycenter:
    """Barycenter of a face: zero-extend to a full situation, apply the facet
    formula, keep the real vertices and renormalize."""
    return complex_.barycenter(simplex)


def face_weight(complex_: SituationComplex, simplex: Simplex) -> float:
    """f_t(sigma_t) = sum_i e_i(sigma_t) on the zero-extended profile."""
    return complex_.face_weight(simplex)


def star_dual(complex_: SituationComplex, simplex: Simplex) -> DualCell:
    return complex_.star_dual(simplex)


def discrete_metric(a: Simplex, b: Simplex) -> int:
    """d on K_G: 0 iff the simplices coincide."""
    return 0 if a == b else 1


def metric(a: WeightedSimplex, b: WeightedSimplex, *, tol: float = TOLERANCE) -> int:
    """d* on K*_G: 0 iff the simplices and their weights coincide."""
    return 0 if a.simplex == b.simplex and abs(a.weight - b.weight) <= tol else 1


class BarycentricSubdivision:
    """bcsd(K_G): one k-cell [bc(s_0), ..., bc(s_k)] per flag s_0 < ... < s_k
    of faces under proper inclusion. Cells are flags of simplices, each
    simplex standing for its barycenter."""

    def __init__(self, complex_: SituationComplex) -> None:
        self.complex = complex_
        above: Dict[Simplex, List[Simplex]] = {}
        all_faces = [f for t in sorted(complex_.faces) for f in complex_.faces[t]]
        for face in all_faces:
            above[face] = [g for g in all_faces if g.dim > face.dim and face in g]
        cells: Dict[int, List[Tuple[Simplex, ...]]] = {}

        def extend(flag: Tuple[Simplex, ...]) -> None:
            cells.setdefault(len(flag) - 1, []).append(flag)
            for upper in above[flag[-1]]:
                extend(flag + (upper,))

        for face in all_faces:
            extend((face,))
        self.cells = {k: tuple(sorted(v)) for k, v in sorted(cells.items())}

    def f_vector(self) -> Tuple[int, ...]:
        return tuple(len(self.cells[k]) for k in sorted(self.cells))

    def point(self, simplex: Simplex) -> Barycenter:
        return self.complex.barycenter(simplex)


def barycentric_subdivision(complex_: SituationComplex) -> BarycentricSubdivision:
    return BarycentricSubdivision(complex_)


def complex_to_dict(complex_: SituationComplex) -> dict:
    """JSON-ready description of K*_G with labels, payoffs and barycenters."""
    game = complex_.game
    vertices = [
        {
            "player": i,
            "index": k,
            "name": str(x),
            "weights": list(x.weights),
        }
        for i, strategies in enumerate(complex_.mixed_sets)
        for k, x in enumerate(strategies)
    ]
    facets = [
        {
            "label": f.label,
            "indices": list(f.indices),
            "payoffs": list(f.payoffs),
            "weight": f.weight,
            "barycenter": list(complex_.barycenter(f.simplex).weights),
        }
        for f in complex_.facets
    ]
    faces = {
        str(t): [
            {
                "vertices": [list(v) for v in face.vertices],
                "weight": complex_.face_weight(face),
                "barycenter": list(complex_.barycenter(face).weights),
            }
            for face in fs
        ]
        for t, fs in complex_.faces.items()
    }
    return {
        "players": list(game.players),
        "strategies": [list(s) for s in game.strategies],
        "m": list(complex_.m),
        "f_vector": list(complex_.f_vector()),
        "euler_characteristic": complex_.euler_characteristic(),
        "vertices": vertices,
        "facets": facets,
        "faces": faces,
    }
