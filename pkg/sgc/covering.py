"""Pure-strategy stars, neighborhoods and degrees, the covering complex of
K*_G and Nash equilibrium simplices through best responses."""
import itertools
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Hashable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .complex import Simplex, SituationComplex, SituationFacet, Vertex, barycentric_weights
from .errors import Errors, InputError
from .game import expected_payoffs
from .nerve import DualFlowEdge
from .util import logger


Base = Tuple[Optional[int], ...]


@dataclass(frozen=True)
class PureFacet:
    """s_i^j v X_î: player i's pure strategy j against fixed strategies of the
    others (indices into the mixed sets, None at i)."""
    player: int
    strategy: int
    base: Base
    payoffs: Tuple[float, ...]
    barycenter: Tuple[float, ...]

    @property
    def key(self) -> Tuple[int, int, Base]:
        return (self.player, self.strategy, self.base)


@dataclass(frozen=True)
class PureStar:
    """st(s_i^j): s_i^j joined with every X_î in P_î."""
    player: int
    strategy: int
    facets: Tuple[PureFacet, ...]


@dataclass(frozen=True)
class Neighborhood:
    """A set of comparable points with the pairwise flows between them.

    Edge endpoints are positions in `members`. Flows follow `player`'s payoff.
    """
    kind: str
    id: str
    player: int
    members: Tuple[Hashable, ...]
    payoffs: Tuple[float, ...]
    edges: Tuple[DualFlowEdge, ...]

    def position(self, member: Hashable) -> int:
        try:
            return self.members.index(member)
        except ValueError:
            raise InputError(Errors.E041.format(member=repr(member), id=self.id)) from None

    def __len__(self) -> int:
        return len(self.members)


class DegreeReport(NamedTuple):
    point: Hashable
    neighborhood: str
    degree: int
    size: int


def _bases(complex_: SituationComplex, i: int) -> List[Base]:
    ranges = [range(mk) if k != i else [None] for k, mk in enumerate(complex_.m)]
    return list(itertools.product(*ranges))


def _base_id(i: int, base: Base) -> str:
    return f"p{i}:" + ",".join("*" if k is None else str(k) for k in base)


def pure_facet(complex_: SituationComplex, i: int, j: int, base: Base) -> PureFacet:
    vectors = []
    for k, index in enumerate(base):
        if k == i:
            weights = np.zeros(complex_.game.shape[i])
            weights[j] = 1.0
            vectors.append(weights)
        else:
            vectors.append(complex_.mixed_sets[k][index].array)
    payoffs = expected_payoffs(complex_.game, vectors)
    return PureFacet(
        player=i,
        strategy=j,
        base=tuple(base),
        payoffs=tuple(float(e) for e in payoffs),
        barycenter=tuple(float(w) for w in barycentric_weights(vectors)),
    )


def pure_star(complex_: SituationComplex, i: int, j: int) -> PureStar:
    game = complex_.game
    game.check_player(i)
    if not 0 <= j < game.shape[i]:
        raise InputError(Errors.E011.format(i=i, j=j, l=game.shape[i]))
    facets = tuple(pure_facet(complex_, i, j, base) for base in _bases(complex_, i))
    return PureStar(i, j, facets)


def make_neighborhood(
    kind: str,
    id: str,
    player: int,
    members: Sequence[Hashable],
    payoffs: Sequence[float],
    tol: float,
) -> Neighborhood:
    """All pairwise flows among `members`, directed toward the larger payoff;
    differences within `tol` become tie edges."""
    edges = []
    for a, b in itertools.combinations(range(len(members)), 2):
        difference = payoffs[b] - payoffs[a]
        tie = abs(difference) <= tol
        if tie or difference > 0:
            source, target = a, b
        else:
            source, target = b, a
        edges.append(DualFlowEdge(source, target, abs(difference), tie, player, id))
    return Neighborhood(kind, id, player, tuple(members), tuple(payoffs), tuple(edges))


def cross_level_neighborhood(complex_: SituationComplex, i: int, base: Base) -> Neighborhood:
    """st_s(X_î): every pure strategy of player i against X_î."""
    facets = [pure_facet(complex_, i, j, base) for j in range(complex_.game.shape[i])]
    return make_neighborhood(
        "cross", "cross:" + _base_id(i, base), i,
        [f.key for f in facets], [f.payoffs[i] for f in facets], complex_.tol,
    )


def restricted_neighborhood(
    complex_: SituationComplex,
    i: int,
    base: Base,
    strategies: Sequence[int],
) -> Neighborhood:
    """st_Z(X_î): the cross-level neighborhood restricted to `strategies`."""
    facets = [pure_facet(complex_, i, j, base) for j in strategies]
    return make_neighborhood(
        "restricted", "restricted:" + _base_id(i, base), i,
        [f.key for f in facets], [f.payoffs[i] for f in facets], complex_.tol,
    )


def same_level_neighborhoods(complex_: SituationComplex, i: int, j: int) -> List[Neighborhood]:
    """Neighborhoods inside st(s_i^j): facets that differ in one other player
    m's strategy, with flows following e_m."""
    star = pure_star(complex_, i, j)
    by_key = {f.base: f for f in star.facets}
    neighborhoods = []
    for m in range(complex_.n):
        if m == i:
            continue
        groups: Dict[Base, List[PureFacet]] = {}
        for base, facet in sorted(by_key.items(), key=lambda item: str(item[0])):
            rest = tuple(None if k == m else x for k, x in enumerate(base))
            groups.setdefault(rest, []).append(facet)
        for rest, facets in sorted(groups.items(), key=lambda item: str(item[0])):
            facets = sorted(facets, key=lambda f: f.base[m])
            neighborhoods.append(make_neighborhood(
                "same", f"same:s{i}={j}:m{m}:" + _base_id(m, rest), m,
                [f.key for f in facets], [f.payoffs[m] for f in facets], complex_.tol,
            ))
    return neighborhoods


def degree(point: Hashable, neighborhood: Neighborhood) -> int:
    """Number of flow directions entering `point`; tie edges enter both ends."""
    position = neighborhood.position(point)
    return sum(1 for e in neighborhood.edges if e.enters(position))


def is_weak_maximum(point: Hashable, neighborhood: Neighborhood, tol: float) -> bool:
    """Direct payoff comparison, equivalent to full degree under the tie rule."""
    value = neighborhood.payoffs[neighborhood.position(point)]
    return all(value >= other - tol for other in neighborhood.payoffs)


def compute_Z(complex_: SituationComplex, i: int) -> Tuple[int, ...]:
    """Z_i: pure strategies of player i with full degree l_i - 1 in at least
    one cross-level neighborhood."""
    complex_.game.check_player(i)
    l_i = complex_.game.shape[i]
    z = set()
    for base in _bases(complex_, i):
        neighborhood = cross_level_neighborhood(complex_, i, base)
        for j in range(l_i):
            if degree((i, j, base), neighborhood) == l_i - 1:
                z.add(j)
    return tuple(sorted(z))


def compute_A(
    complex_: SituationComplex,
    i: int,
    j: int,
    *,
    z: Optional[Sequence[int]] = None,
) -> Tuple[Base, ...]:
    """A_i(s_i^j): the X_î for which s_i^j has full degree |Z_i| - 1 in
    st_Z(X_î), i.e. is weakly payoff-maximal among Z_i."""
    if z is None:
        z = compute_Z(complex_, i)
    if j not in z:
        raise InputError(Errors.E040.format(i=i, j=j, z=tuple(z)))
    bases = []
    for base in _bases(complex_, i):
        neighborhood = restricted_neighborhood(complex_, i, base, z)
        if degree((i, j, base), neighborhood) == len(z) - 1:
            bases.append(base)
    return tuple(bases)


@dataclass(frozen=True)
class SheetSimplex:
    """((x_i, X_î), e_i) in the sheet C_i, under the cover set A_i(cover) x P_i."""
    player: int
    cover: int
    label: int
    payoff: float


class CoverVertex(NamedTuple):
    """The vertex of player `player` in the join over facet `label` with
    cover assignment `covers`. Joins never share vertices."""
    label: int
    covers: Tuple[int, ...]
    player: int


@dataclass(frozen=True)
class CoveringJoin:
    """((x_1, X_1̂), e_1) v ... v ((x_n, X_n̂), e_n) for one facet and one
    choice of cover set per player."""
    label: int
    covers: Tuple[int, ...]
    vertices: Tuple[CoverVertex, ...]
    payoffs: Tuple[float, ...]

    @property
    def weight(self) -> float:
        return float(sum(self.payoffs))


@dataclass(frozen=True)
class CoveringComplex:
    """C_G, the disjoint union of the player sheets joined per facet, with the
    projection p onto K*_G given on vertices."""
    sheets: Dict[int, Tuple[SheetSimplex, ...]]
    joins: Tuple[CoveringJoin, ...]
    projection: Dict[CoverVertex, Vertex]
    z: Dict[int, Tuple[int, ...]] = field(default_factory=dict)
    a: Dict[Tuple[int, int], Tuple[Base, ...]] = field(default_factory=dict)

    def project(self, join: CoveringJoin) -> Tuple[int, float]:
        """p(join) = (X, f(X) = e_1(X) + ... + e_n(X))."""
        return join.label, join.weight


def build_covering(complex_: SituationComplex) -> CoveringComplex:
    """Assemble the sheets C_i = (union over Z_i of A_i(s) x P_i, e_i) and
    one join per facet and consistent choice of cover sets."""
    n = complex_.n
    z = {i: compute_Z(complex_, i) for i in range(n)}
    a = {(i, j): compute_A(complex_, i, j, z=z[i]) for i in range(n) for j in z[i]}
    covers_of: Dict[Tuple[int, Base], List[int]] = {}
    for (i, j), bases in a.items():
        for base in bases:
            covers_of.setdefault((i, base), []).append(j)
    sheets: Dict[int, List[SheetSimplex]] = {i: [] for i in range(n)}
    options: Dict[int, List[List[int]]] = {}
    for facet in complex_.facets:
        per_player = []
        for i in range(n):
            base = tuple(None if k == i else x for k, x in enumerate(facet.indices))
            covers = sorted(covers_of.get((i, base), []))
            per_player.append(covers)
            for j in covers:
                sheets[i].append(SheetSimplex(i, j, facet.label, facet.payoffs[i]))
        options[facet.label] = per_player
    joins = []
    projection = {}
    for facet in complex_.facets:
        for covers in itertools.product(*options[facet.label]):
            vertices = tuple(CoverVertex(facet.label, covers, i) for i in range(n))
            for v, target in zip(vertices, facet.simplex.vertices):
                projection[v] = target
            joins.append(CoveringJoin(facet.label, covers, vertices, facet.payoffs))
    logger.debug("Built covering complex with %d joins", len(joins))
    return CoveringComplex(
        sheets={i: tuple(sorted(s, key=lambda x: (x.cover, x.label))) for i, s in sheets.items()},
        joins=tuple(joins),
        projection=projection,
        z=z,
        a=a,
    )


class ConditionResult(NamedTuple):
    name: str
    passed: bool
    witness: Optional[str]


@dataclass(frozen=True)
class CoveringReport:
    conditions: Tuple[ConditionResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def __getitem__(self, name: str) -> ConditionResult:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "conditions": [c._asdict() for c in self.conditions],
        }


def _faces(vertices: Sequence[CoverVertex]) -> List[FrozenSet[CoverVertex]]:
    return [
        frozenset(subset)
        for size in range(1, len(vertices) + 1)
        for subset in itertools.combinations(vertices, size)
    ]


def verify_covering(covering: CoveringComplex, complex_: SituationComplex) -> CoveringReport:
    """Check the three covering conditions: (a) C is a simplicial complex,
    (b) p is a simplicial map, (c) every preimage p^-1(sigma) is a disjoint
    union of simplices each mapped bijectively onto sigma."""
    # (a)
    witness_a = None
    sheet_keys = {(s.player, s.cover, s.label) for sheet in covering.sheets.values() for s in sheet}
    for join in covering.joins:
        if len(set(join.vertices)) != len(join.vertices):
            witness_a = f"join over facet {join.label} repeats a vertex"
        elif any(v not in covering.projection for v in join.vertices):
            witness_a = f"join over facet {join.label} has a vertex outside the domain of p"
        elif any((i, j, join.label) not in sheet_keys for i, j in enumerate(join.covers)):
            witness_a = f"join over facet {join.label} uses covers {join.covers} missing from the sheets"
        if witness_a:
            break

    # (b)
    witness_b = None
    if witness_a is None:
        for join in covering.joins:
            image = sorted({covering.projection[v] for v in join.vertices})
            players = [v.player for v in image]
            if players != sorted(set(players)) or Simplex(tuple(image)) not in complex_:
                witness_b = f"join over facet {join.label} maps onto {image}, which is not a simplex of K"
                break

    # (c)
    witness_c = None
    if witness_a is None and witness_b is None:
        preimages: Dict[FrozenSet[Vertex], set] = {}
        for join in covering.joins:
            for face in _faces(join.vertices):
                image = frozenset(covering.projection[v] for v in face)
                preimages.setdefault(image, set()).add(face)
        for t in sorted(complex_.faces):
            for sigma in complex_.faces[t]:
                pieces = sorted(preimages.get(frozenset(sigma.vertices), ()), key=sorted)
                for piece in pieces:
                    images = [covering.projection[v] for v in piece]
                    if len(piece) != len(sigma.vertices) or len(set(images)) != len(images):
                        witness_c = f"p restricted to {sorted(piece)} is not a bijection onto {sigma}"
                        break
                for p, q in itertools.combinations(pieces, 2):
                    if witness_c is None and p & q:
                        witness_c = (
                            f"preimages {sorted(p)} and {sorted(q)} of {sigma} "
                            f"share {sorted(p & q)}"
                        )
                if witness_c:
                    break
            if witness_c:
                break

    return CoveringReport((
        ConditionResult("simplicial_complex", witness_a is None, witness_a),
        ConditionResult("simplicial_map", witness_b is None and witness_a is None, witness_b),
        ConditionResult(
            "disjoint_bijective_preimages",
            witness_c is None and witness_a is None and witness_b is None,
            witness_c,
        ),
    ))


def deviation_neighborhood(complex_: SituationComplex, facet: SituationFacet, i: int) -> Neighborhood:
    """The facet together with every pure deviation s_i v X_î."""
    base = tuple(None if k == i else x for k, x in enumerate(facet.indices))
    deviations = [pure_facet(complex_, i, j, base) for j in range(complex_.game.shape[i])]
    return make_neighborhood(
        "deviation", f"deviation:{facet.label}:p{i}", i,
        [("facet", facet.label)] + [d.key for d in deviations],
        [facet.payoffs[i]] + [d.payoffs[i] for d in deviations],
        complex_.tol,
    )


def is_best_response_by_degree(complex_: SituationComplex, facet: SituationFacet, i: int) -> bool:
    neighborhood = deviation_neighborhood(complex_, facet, i)
    return degree(("facet", facet.label), neighborhood) == len(neighborhood) - 1


def best_response(complex_: SituationComplex, i: int, base: Sequence[Optional[int]]) -> Tuple[SituationFacet, ...]:
    """B_i(X_î): the facets x_i v X_î whose payoff e_i is weakly at least that
    of every pure s_i against X_î."""
    complex_.game.check_player(i)
    base = list(base)
    if len(base) == complex_.n - 1:
        base.insert(i, None)
    best = max(f.payoffs[i] for f in (pure_facet(complex_, i, j, tuple(base))
                                      for j in range(complex_.game.shape[i])))
    response = []
    for k in range(complex_.m[i]):
        indices = list(base)
        indices[i] = k
        facet = complex_.facet_at(indices)
        if facet is not None and facet.payoffs[i] >= best - complex_.tol:
            response.append(facet)
    return tuple(response)


def nash_simplices(complex_: SituationComplex) -> Tuple[SituationFacet, ...]:
    """Facets X with X in B_i(X_î) for every player i."""
    members = None
    for i in range(complex_.n):
        labels = set()
        for base in _bases(complex_, i):
            labels.update(f.label for f in best_response(complex_, i, base))
        members = labels if members is None else members & labels
    return tuple(complex_.facet(label) for label in sorted(members or ()))


def degree_table(complex_: SituationComplex) -> List[DegreeReport]:
    """Degree of every facet in its deviation neighborhood, per player."""
    table = []
    for facet in complex_.facets:
        for i in range(complex_.n):
            neighborhood = deviation_neighborhood(complex_, facet, i)
            point = ("facet", facet.label)
            table.append(DegreeReport(facet.label, neighborhood.id, degree(point, neighborhood), len(neighborhood)))
    return table
