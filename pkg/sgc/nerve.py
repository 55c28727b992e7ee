"""Comparable stars, dual flows, local nerves and the glued global nerve."""
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from .complex import Barycenter, Simplex, SituationComplex, SituationFacet, Vertex
from .errors import ConstructionError, DataError, Errors, InputError
from .game import Game
from .util import TOLERANCE, logger


@dataclass(frozen=True)
class DualPoint:
    """The barycenter of a facet, carrying the facet as payload."""
    label: int
    facet: Optional[SituationFacet]
    barycenter: Optional[Barycenter] = None

    @property
    def weight(self) -> Optional[float]:
        return self.facet.weight if self.facet is not None else None


@dataclass(frozen=True)
class ComparableStar:
    """st(X_î): the facets x_{i_k} v X_î for every x_{i_k} in P_i.

    base holds the strategy index of every player, None at `player`.
    """
    player: int
    base: Tuple[Optional[int], ...]
    points: Tuple[DualPoint, ...]
    payoffs: Tuple[float, ...]
    face: Optional[Simplex]
    game: Game = field(compare=False, repr=False)
    tol: float = field(default=TOLERANCE, compare=False)

    @property
    def id(self) -> str:
        return f"p{self.player}:" + ",".join("*" if k is None else str(k) for k in self.base)

    @property
    def facets(self) -> Tuple[SituationFacet, ...]:
        return tuple(p.facet for p in self.points)

    @property
    def labels(self) -> Tuple[int, ...]:
        return tuple(p.label for p in self.points)

    def payoff(self, label: int) -> Optional[float]:
        for point, e in zip(self.points, self.payoffs):
            if point.label == label:
                return e
        return None


@dataclass(frozen=True)
class DualFlowEdge:
    """A dual flow between two dual points of one star. It points from the
    smaller to the larger e_i; ties point from the smaller label and count
    as entering both endpoints."""
    source: int
    target: int
    weight: float
    tie: bool
    player: int
    star: str

    def enters(self, label: int) -> bool:
        return label == self.target or (self.tie and label == self.source)


@dataclass(frozen=True)
class Nerve:
    """A labeled directed weighted graph on dual points.

    kind is "local" (the flows of one comparable star) or "global" (all local
    nerves glued along equal labels). `tree` marks a spanning tree (forest
    for the global nerve) within `edges`.
    """
    kind: str
    name: str
    vertices: Tuple[DualPoint, ...]
    edges: Tuple[DualFlowEdge, ...]
    tree: Tuple[DualFlowEdge, ...]
    game: Optional[Game] = field(default=None, compare=False, repr=False)
    tol: float = field(default=TOLERANCE, compare=False)

    @property
    def labels(self) -> Tuple[int, ...]:
        return tuple(v.label for v in self.vertices)

    def to_networkx(self) -> nx.DiGraph:
        graph = nx.DiGraph(name=self.name, kind=self.kind)
        for v in self.vertices:
            graph.add_node(v.label, weight=v.weight)
        tree = set(self.tree)
        for e in self.edges:
            graph.add_edge(e.source, e.target, weight=e.weight, tie=e.tie,
                           player=e.player, star=e.star, tree=e in tree)
        return graph


def _check_base(complex_: SituationComplex, i: int, base: Sequence[Optional[int]]) -> Tuple[Optional[int], ...]:
    base = list(base)
    if len(base) == complex_.n - 1:
        base.insert(i, None)
    if len(base) != complex_.n:
        raise InputError(Errors.E030.format(base=tuple(base), i=i))
    for k, (index, size) in enumerate(zip(base, complex_.m)):
        if k == i:
            if index is not None:
                raise InputError(Errors.E030.format(base=tuple(base), i=i))
        elif index is None or not 0 <= index < size:
            raise InputError(Errors.E030.format(base=tuple(base), i=i))
    return tuple(base)


def comparable_star(
    complex_: SituationComplex,
    i: int,
    base: Sequence[Optional[int]],
) -> ComparableStar:
    """Join every x_{i_k} in P_i with the fixed strategies X_î.

    base (Sequence[Optional[int]]): Strategy indices of the other players,
        either with None at position i or with position i omitted.
    """
    complex_.game.check_player(i)
    base = _check_base(complex_, i, base)
    points = []
    payoffs = []
    for k in range(complex_.m[i]):
        indices = list(base)
        indices[i] = k
        facet = complex_.facet_at(indices)
        if facet is None:
            continue
        points.append(DualPoint(facet.label, facet, complex_.barycenter(facet.simplex)))
        payoffs.append(facet.payoffs[i])
    face = None
    if complex_.n >= 2:
        face = Simplex(tuple(Vertex(j, k) for j, k in enumerate(base) if k is not None))
    return ComparableStar(i, base, tuple(points), tuple(payoffs), face, complex_.game, complex_.tol)


def all_stars(complex_: SituationComplex) -> List[ComparableStar]:
    """All comparable stars, by player and then by base in mixed-radix order."""
    stars = []
    for i in range(complex_.n):
        ranges = [range(mk) if k != i else [None] for k, mk in enumerate(complex_.m)]
        for base in itertools.product(*ranges):
            stars.append(comparable_star(complex_, i, base))
    return stars


def dual_flow(star: ComparableStar, sigma: int, beta: int) -> Optional[DualFlowEdge]:
    """The dual flow between the facets labeled sigma and beta of a star.
    Returns None when either facet is not in the star."""
    e_sigma = star.payoff(sigma)
    e_beta = star.payoff(beta)
    if e_sigma is None or e_beta is None or sigma == beta:
        return None
    difference = e_beta - e_sigma
    tie = abs(difference) <= star.tol
    if tie:
        source, target = min(sigma, beta), max(sigma, beta)
    elif difference > 0:
        source, target = sigma, beta
    else:
        source, target = beta, sigma
    return DualFlowEdge(source, target, abs(difference), tie, star.player, star.id)


def spanning_tree(labels: Sequence[int], edges: Sequence[DualFlowEdge]) -> Tuple[DualFlowEdge, ...]:
    """A maximum-weight spanning tree (forest) of the flow graph. Ties between
    equal weights are resolved by label order."""
    graph = nx.Graph()
    graph.add_nodes_from(sorted(labels))
    by_pair = {}
    for e in sorted(edges, key=lambda e: (min(e.source, e.target), max(e.source, e.target))):
        pair = (min(e.source, e.target), max(e.source, e.target))
        by_pair[pair] = e
        graph.add_edge(*pair, weight=e.weight)
    tree = nx.maximum_spanning_tree(graph, weight="weight", algorithm="kruskal")
    chosen = [by_pair[(min(u, v), max(u, v))] for u, v in tree.edges()]
    return tuple(sorted(chosen, key=_edge_key))


def _edge_key(e: DualFlowEdge) -> Tuple[int, int]:
    return (min(e.source, e.target), max(e.source, e.target))


def local_nerve(star: ComparableStar) -> Nerve:
    """The complete flow digraph of a star plus its marked spanning tree."""
    edges = []
    for a, b in itertools.combinations(star.labels, 2):
        edges.append(dual_flow(star, a, b))
    edges = tuple(sorted(edges, key=_edge_key))
    vertices = tuple(sorted(star.points, key=lambda p: p.label))
    return Nerve(
        kind="local",
        name=star.id,
        vertices=vertices,
        edges=edges,
        tree=spanning_tree(star.labels, edges),
        game=star.game,
        tol=star.tol,
    )


def local_nerves(complex_: SituationComplex, *, threads: int = 1) -> List[Nerve]:
    """The local nerve of every comparable star. Stars are independent, so a
    thread pool may build them; the output order is the star order."""
    stars = all_stars(complex_)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            nerves = list(pool.map(local_nerve, stars))
    else:
        nerves = [local_nerve(star) for star in stars]
    logger.debug("Built %d local nerves", len(nerves))
    return nerves


def global_nerve(nerves: Iterable[Nerve]) -> Nerve:
    """Glue local nerves along dual points with equal labels."""
    nerves = list(nerves)
    points: Dict[int, DualPoint] = {}
    edges = set()
    tree = set()
    for local in nerves:
        for point in local.vertices:
            seen = points.get(point.label)
            if seen is None:
                points[point.label] = point
            elif (
                seen.facet is not None
                and point.facet is not None
                and seen.facet.indices != point.facet.indices
            ):
                raise ConstructionError(Errors.E031.format(
                    label=point.label, a=seen.facet.indices, b=point.facet.indices))
        edges.update(local.edges)
        tree.update(local.tree)
    game = nerves[0].game if nerves else None
    tol = nerves[0].tol if nerves else TOLERANCE
    logger.debug("Glued %d local nerves into %d dual points", len(nerves), len(points))
    return Nerve(
        kind="global",
        name="global",
        vertices=tuple(points[label] for label in sorted(points)),
        edges=tuple(sorted(edges, key=lambda e: (_edge_key(e), e.player))),
        tree=tuple(sorted(tree, key=lambda e: (_edge_key(e), e.player))),
        game=game,
        tol=tol,
    )


def build_global_nerve(complex_: SituationComplex, *, threads: int = 1) -> Nerve:
    return global_nerve(local_nerves(complex_, threads=threads))


def traversal_order(nerve: Nerve) -> List[int]:
    """Breadth-first order over the undirected nerve, starting each component
    from its lowest unvisited label and visiting neighbors in label order."""
    graph = nerve.to_networkx().to_undirected()
    order = []
    for root in sorted(min(component) for component in nx.connected_components(graph)):
        order.append(root)
        order.extend(v for _, v in nx.bfs_edges(graph, root, sort_neighbors=sorted))
    return order


def reconstruct_complex(nerve: Nerve, *, order: Optional[Sequence[int]] = None) -> SituationComplex:
    """Embed the facet of every dual point of a global nerve, in traversal
    order, and rebuild the weighted complex from them."""
    if not nerve.vertices:
        raise DataError(Errors.E033)
    points = {v.label: v for v in nerve.vertices}
    if order is None:
        order = traversal_order(nerve)
    emitted = []
    for label in order:
        point = points[label]
        if point.facet is None:
            raise DataError(Errors.E032.format(label=label))
        emitted.append(point.facet)
    if nerve.game is None:
        raise DataError(Errors.E034)
    n = len(emitted[0].strategies)
    by_index: List[Dict[int, object]] = [{} for _ in range(n)]
    for facet in emitted:
        for v, x in zip(facet.simplex.vertices, facet.strategies):
            by_index[v.player][v.index] = x
    mixed_sets = []
    for i, strategies in enumerate(by_index):
        if sorted(strategies) != list(range(len(strategies))):
            raise DataError(Errors.E035.format(i=i, indices=sorted(strategies)))
        mixed_sets.append([strategies[k] for k in range(len(strategies))])
    return SituationComplex(nerve.game, mixed_sets, facets=emitted, tol=nerve.tol)


def _fmt(value: float) -> str:
    return format(value, ".12g")


def export_nerve_dot(nerve: Nerve) -> str:
    """Deterministic DOT text: dual points labeled with facet label and
    weight, flow edges with their weight, tie edges dashed and undirected,
    spanning tree edges bold."""
    lines = [f'digraph "{nerve.name}" {{']
    if nerve.vertices:
        lines.append("  node [shape=circle];")
    for v in nerve.vertices:
        weight = "?" if v.weight is None else _fmt(v.weight)
        lines.append(f'  {v.label} [label="{v.label}\\nf={weight}"];')
    tree = set(nerve.tree)
    for e in nerve.edges:
        attrs = [f'label="{_fmt(e.weight)}"', f'flow="{_fmt(e.weight)}"', f"player={e.player}"]
        if e.tie:
            attrs += ["style=dashed", "dir=none"]
        if e in tree:
            attrs.append("penwidth=2")
        lines.append(f"  {e.source} -> {e.target} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def nerve_to_dict(nerve: Nerve) -> dict:
    tree = set(nerve.tree)
    return {
        "kind": nerve.kind,
        "name": nerve.name,
        "vertices": [
            {
                "label": v.label,
                "weight": v.weight,
                "indices": list(v.facet.indices) if v.facet is not None else None,
                "barycenter": list(v.barycenter.weights) if v.barycenter is not None else None,
            }
            for v in nerve.vertices
        ],
        "edges": [
            {
                "source": e.source,
                "target": e.target,
                "weight": e.weight,
                "tie": e.tie,
                "player": e.player,
                "star": e.star,
                "tree": e in tree,
            }
            for e in nerve.edges
        ],
    }
