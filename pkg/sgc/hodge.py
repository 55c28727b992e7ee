"""Flow complex over dual points, its (co)boundary and Laplace operators, and
the orthogonal decomposition of a game flow into gradient, harmonic and curl
parts."""
import itertools
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
import scipy.sparse.linalg as spla

from .complex import SituationComplex, permutation_sign
from .errors import Errors, InputError, NumericalError
from .nerve import Nerve, build_global_nerve
from .util import logger, registry


# Bound for the post-hoc decomposition checks, relative to max(1, |w|).
DECOMPOSITION_TOLERANCE = 1e-8
# Flows with a smaller norm count as zero.
ZERO_FLOW = 1e-12


class FlowEdge(NamedTuple):
    """An edge [a, b] with a < b between facets of one star."""
    source: int
    target: int
    player: int
    star: str


class FlowComplex:
    """Vertices are facet labels, edges the pairs of facets sharing a
    comparable star and triangles the triples within one star. Every cell is
    oriented by ascending label."""

    def __init__(
        self,
        vertices: Sequence[int],
        edges: Sequence[FlowEdge],
        triangles: Sequence[Tuple[int, int, int]],
    ) -> None:
        self.vertices = tuple(sorted(vertices))
        self.edges = tuple(sorted(edges, key=lambda e: (e.source, e.target)))
        self.triangles = tuple(sorted(triangles))
        self._vertex_index = {v: k for k, v in enumerate(self.vertices)}
        self._edge_index: Dict[Tuple[int, int], int] = {}
        for k, e in enumerate(self.edges):
            if e.source >= e.target:
                raise InputError(Errors.E054.format(source=e.source, target=e.target))
            pair = (e.source, e.target)
            if pair in self._edge_index:
                raise InputError(Errors.E053.format(a=e.source, b=e.target))
            self._edge_index[pair] = k
        for a, b, c in self.triangles:
            for pair in ((a, b), (a, c), (b, c)):
                if pair not in self._edge_index:
                    raise InputError(Errors.E055.format(triangle=(a, b, c), pair=pair))

    @classmethod
    def from_nerve(cls, nerve: Nerve) -> "FlowComplex":
        members: Dict[str, set] = {}
        edges = []
        for e in nerve.edges:
            a, b = sorted((e.source, e.target))
            edges.append(FlowEdge(a, b, e.player, e.star))
            members.setdefault(e.star, set()).update((a, b))
        triangles = [
            triple
            for star in sorted(members)
            for triple in itertools.combinations(sorted(members[star]), 3)
        ]
        return cls(nerve.labels, edges, triangles)

    @property
    def shape(self) -> Tuple[int, int, int]:
        return (len(self.vertices), len(self.edges), len(self.triangles))

    def edge_index(self, a: int, b: int) -> Tuple[int, int]:
        """(position, sign) of the oriented edge [a, b]."""
        if a < b:
            return self._edge_index[(a, b)], 1
        return self._edge_index[(b, a)], -1

    def stars(self) -> Dict[str, List[int]]:
        """Edge positions grouped by comparable star."""
        out: Dict[str, List[int]] = {}
        for k, e in enumerate(self.edges):
            out.setdefault(e.star, []).append(k)
        return out

    def boundary_matrix(self, t: int) -> sparse.csr_matrix:
        """Signed incidence: t=1 maps edges to vertices, t=2 triangles to edges."""
        if t == 1:
            data, rows, cols = [], [], []
            for k, e in enumerate(self.edges):
                rows += [self._vertex_index[e.target], self._vertex_index[e.source]]
                cols += [k, k]
                data += [1.0, -1.0]
            shape = (len(self.vertices), len(self.edges))
        elif t == 2:
            data, rows, cols = [], [], []
            for k, (a, b, c) in enumerate(self.triangles):
                for pair, sign in (((b, c), 1.0), ((a, c), -1.0), ((a, b), 1.0)):
                    rows.append(self._edge_index[pair])
                    cols.append(k)
                    data.append(sign)
            shape = (len(self.edges), len(self.triangles))
        else:
            raise InputError(Errors.E050.format(allowed=(1, 2), t=t))
        return sparse.coo_matrix((data, (rows, cols)), shape=shape).tocsr()

    def coboundary(self, t: int) -> sparse.csr_matrix:
        """delta_t, the transpose of the boundary of dimension t + 1."""
        if t not in (0, 1):
            raise InputError(Errors.E050.format(allowed=(0, 1), t=t))
        return self.boundary_matrix(t + 1).T.tocsr()

    def laplacian(self, t: int) -> sparse.csr_matrix:
        if t == 0:
            d0 = self.coboundary(0)
            return (d0.T @ d0).tocsr()
        if t == 1:
            d0 = self.coboundary(0)
            d1 = self.coboundary(1)
            return (d0 @ d0.T + d1.T @ d1).tocsr()
        if t == 2:
            d1 = self.coboundary(1)
            return (d1 @ d1.T).tocsr()
        raise InputError(Errors.E050.format(allowed=(0, 1, 2), t=t))

    def components(self) -> np.ndarray:
        """Connected component id of every vertex."""
        if not self.vertices:
            return np.zeros(0, dtype=int)
        adjacency = abs(self.laplacian(0))
        _, labels = csgraph.connected_components(adjacency, directed=False)
        return labels

    def __repr__(self) -> str:
        return "FlowComplex(vertices={}, edges={}, triangles={})".format(*self.shape)


def build_flow_complex(nerve: Nerve) -> FlowComplex:
    return FlowComplex.from_nerve(nerve)


def boundary_matrix(flow_complex: FlowComplex, t: int) -> sparse.csr_matrix:
    return flow_complex.boundary_matrix(t)


def coboundary(flow_complex: FlowComplex, t: int) -> sparse.csr_matrix:
    return flow_complex.coboundary(t)


def laplacian(flow_complex: FlowComplex, t: int) -> sparse.csr_matrix:
    return flow_complex.laplacian(t)


@dataclass(frozen=True, eq=False)
class Cochain:
    """Values on the oriented t-cells of a flow complex, in cell order.
    Reading a cell in reversed orientation flips the sign."""
    dim: int
    values: np.ndarray
    flow_complex: FlowComplex

    def __post_init__(self) -> None:
        if self.dim not in (0, 1, 2):
            raise InputError(Errors.E050.format(allowed=(0, 1, 2), t=self.dim))
        values = np.array(self.values, dtype=float)
        expected = self.flow_complex.shape[self.dim]
        if values.shape != (expected,):
            raise InputError(Errors.E056.format(dim=self.dim, expected=expected, shape=values.shape))
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __getitem__(self, cell) -> float:
        if self.dim == 0:
            return float(self.values[self.flow_complex._vertex_index[cell]])
        if self.dim == 1:
            k, sign = self.flow_complex.edge_index(*cell)
            return sign * float(self.values[k])
        sign = permutation_sign(cell)
        k = self.flow_complex.triangles.index(tuple(sorted(cell)))
        return sign * float(self.values[k])

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def dot(self, other: "Cochain") -> float:
        return float(self.values @ other.values)


def game_flow(complex_: SituationComplex, flow_complex: Optional[FlowComplex] = None) -> Cochain:
    """w[a, b] = e_i(b) - e_i(a) for every edge, i the player of its star."""
    if flow_complex is None:
        flow_complex = build_flow_complex(build_global_nerve(complex_))
    values = np.zeros(len(flow_complex.edges))
    for k, e in enumerate(flow_complex.edges):
        a, b = complex_.facet(e.source), complex_.facet(e.target)
        differing = [i for i, (x, y) in enumerate(zip(a.indices, b.indices)) if x != y]
        if differing != [e.player]:
            raise InputError(Errors.E053.format(a=e.source, b=e.target))
        values[k] = b.payoffs[e.player] - a.payoffs[e.player]
    return Cochain(1, values, flow_complex)


class SolveResult(NamedTuple):
    solution: np.ndarray
    residual: float
    method: str


class LaplacianSolver:
    """Solves L x = b for a graph Laplacian L with a right-hand side that sums
    to zero on every connected component.

    One vertex per component is grounded to zero, which leaves a positive
    definite system. Up to `direct_limit` unknowns it is factorized with
    sparse LU, above that conjugate gradients is used. The solution is shifted
    to mean zero per component.
    """

    def __init__(self, direct_limit: int = 10000, rtol: float = 1e-10, maxiter: Optional[int] = None) -> None:
        self.direct_limit = direct_limit
        self.rtol = rtol
        self.maxiter = maxiter

    def solve(self, L: sparse.spmatrix, b: np.ndarray) -> SolveResult:
        L = sparse.csr_matrix(L)
        b = np.asarray(b, dtype=float)
        size = L.shape[0]
        x = np.zeros(size)
        if size == 0:
            return SolveResult(x, 0.0, "empty")
        _, components = csgraph.connected_components(abs(L), directed=False)
        grounded = {int(np.flatnonzero(components == c)[0]) for c in np.unique(components)}
        free = np.array([k for k in range(size) if k not in grounded], dtype=int)
        method = "none"
        if free.size:
            A = L[free][:, free].tocsc()
            rhs = b[free]
            if free.size <= self.direct_limit:
                x[free] = spla.splu(A).solve(rhs)
                method = "splu"
            else:
                # The grounded rows add to the full residual, so iterate past rtol.
                solution, info = spla.cg(A, rhs, rtol=self.rtol * 1e-2, maxiter=self.maxiter)
                if info > 0:
                    logger.warning("Conjugate gradients stopped after %d iterations", info)
                x[free] = solution
                method = "cg"
        for c in np.unique(components):
            members = components == c
            x[members] -= x[members].mean()
        scale = float(np.linalg.norm(b))
        residual = float(np.linalg.norm(L @ x - b)) / (scale if scale > 0 else 1.0)
        if residual > self.rtol:
            raise NumericalError(Errors.E051.format(residual=residual, rtol=self.rtol), residual=residual)
        return SolveResult(x, residual, method)


@registry.solvers("sgc.LaplacianSolver.v1")
def create_laplacian_solver(
    direct_limit: int = 10000,
    rtol: float = 1e-10,
    maxiter: Optional[int] = None,
) -> LaplacianSolver:
    return LaplacianSolver(direct_limit=direct_limit, rtol=rtol, maxiter=maxiter)


def potential_function(
    w: Cochain,
    *,
    solver: Optional[LaplacianSolver] = None,
) -> Tuple[Cochain, float]:
    """Least-squares Phi with delta_0 Phi closest to w, from the normal
    equations Delta_0 Phi = delta_0^T w. Returns Phi and |delta_0 Phi - w|."""
    solver = solver or LaplacianSolver()
    flow_complex = w.flow_complex
    d0 = flow_complex.coboundary(0)
    result = solver.solve(flow_complex.laplacian(0), d0.T @ w.values)
    phi = Cochain(0, result.solution, flow_complex)
    residual = float(np.linalg.norm(d0 @ phi.values - w.values))
    return phi, residual


def curl_projection(w: Cochain) -> np.ndarray:
    """Projection of w onto the image of delta_1^T. Triangles never cross
    stars, so every star is an independent dense least-squares block."""
    flow_complex = w.flow_complex
    out = np.zeros(len(flow_complex.edges))
    if not flow_complex.triangles:
        return out
    d1 = flow_complex.coboundary(1).tocsc()
    edge_star = {k: e.star for k, e in enumerate(flow_complex.edges)}
    triangle_star = [edge_star[flow_complex.edge_index(a, b)[0]] for a, b, _ in flow_complex.triangles]
    for star, edges in flow_complex.stars().items():
        triangles = [k for k, s in enumerate(triangle_star) if s == star]
        if not triangles:
            continue
        block = d1[triangles][:, edges].toarray().T
        y, *_ = np.linalg.lstsq(block, w.values[edges], rcond=None)
        out[edges] = block @ y
    return out


@dataclass(frozen=True, eq=False)
class FlowDecomposition:
    """w = g + h + c with g = delta_0 Phi."""
    flow: Cochain
    gradient: Cochain
    harmonic: Cochain
    curl: Cochain
    potential: Cochain
    potential_residual: float
    solve_residual: float

    def norms(self) -> Dict[str, float]:
        return {
            "flow": self.flow.norm(),
            "gradient": self.gradient.norm(),
            "harmonic": self.harmonic.norm(),
            "curl": self.curl.norm(),
        }

    def proof_labels(self) -> Dict[str, float]:
        """Norms under the alternate naming of the orthogonal decomposition:
        P_G the image of the triangle adjoint, H_G the harmonic part, N_G the
        image of delta_0."""
        return {
            "P_G": self.curl.norm(),
            "H_G": self.harmonic.norm(),
            "N_G": self.gradient.norm(),
        }

    def checks(self) -> Dict[str, float]:
        """Normalized values of the post-hoc invariants."""
        w = self.flow
        scale = max(1.0, w.norm())
        g, h, c = self.gradient, self.harmonic, self.curl
        laplace_h = w.flow_complex.laplacian(1) @ h.values
        return {
            "reconstruction": float(np.linalg.norm(g.values + h.values + c.values - w.values)) / scale,
            "gradient_harmonic": abs(g.dot(h)) / scale ** 2,
            "gradient_curl": abs(g.dot(c)) / scale ** 2,
            "harmonic_curl": abs(h.dot(c)) / scale ** 2,
            "laplacian_harmonic": float(np.linalg.norm(laplace_h)) / scale,
        }


def decompose(
    w: Cochain,
    *,
    solver: Optional[LaplacianSolver] = None,
    tol: float = DECOMPOSITION_TOLERANCE,
) -> FlowDecomposition:
    """Split w into g in im delta_0, c in im delta_1^T and the harmonic rest,
    then verify the decomposition invariants."""
    if w.dim != 1:
        raise InputError(Errors.E050.format(allowed=(1,), t=w.dim))
    solver = solver or LaplacianSolver()
    flow_complex = w.flow_complex
    d0 = flow_complex.coboundary(0)
    result = solver.solve(flow_complex.laplacian(0), d0.T @ w.values)
    phi = Cochain(0, result.solution, flow_complex)
    g = Cochain(1, d0 @ phi.values, flow_complex)
    c = Cochain(1, curl_projection(Cochain(1, w.values - g.values, flow_complex)), flow_complex)
    h = Cochain(1, w.values - g.values - c.values, flow_complex)
    decomposition = FlowDecomposition(
        flow=w,
        gradient=g,
        harmonic=h,
        curl=c,
        potential=phi,
        potential_residual=float(np.linalg.norm(g.values - w.values)),
        solve_residual=result.residual,
    )
    for check, value in decomposition.checks().items():
        if value > tol:
            raise NumericalError(Errors.E052.format(check=check, value=value, bound=tol), residual=value)
    logger.debug("Decomposed flow on %s: %s", flow_complex, decomposition.norms())
    return decomposition


class Classification(NamedTuple):
    kind: str
    norms: Dict[str, float]


def classify_decomposition(decomposition: FlowDecomposition, *, tol: float = DECOMPOSITION_TOLERANCE) -> Classification:
    norms = decomposition.norms()
    w = decomposition.flow
    bound = tol * max(1.0, norms["flow"])
    if norms["flow"] < ZERO_FLOW:
        kind = "nonstrategic"
    elif norms["harmonic"] + norms["curl"] < bound:
        kind = "potential"
    elif (
        norms["gradient"] + norms["curl"] < bound
        and float(np.linalg.norm(w.flow_complex.laplacian(1) @ w.values)) < bound
    ):
        kind = "harmonic"
    else:
        kind = "mixed"
    return Classification(kind, norms)


def classify(
    complex_: SituationComplex,
    *,
    solver: Optional[LaplacianSolver] = None,
    tol: float = DECOMPOSITION_TOLERANCE,
) -> Classification:
    """potential, harmonic, nonstrategic or mixed, with the component norms."""
    w = game_flow(complex_)
    return classify_decomposition(decompose(w, solver=solver, tol=tol), tol=tol)


def hodge_dimensions(flow_complex: FlowComplex) -> Dict[str, int]:
    """Dense-rank oracle: rank delta_0, dim ker Delta_1, rank delta_1^T and
    the edge count they must add up to."""
    edges = len(flow_complex.edges)

    def rank(matrix: sparse.spmatrix) -> int:
        dense = matrix.toarray()
        return int(np.linalg.matrix_rank(dense)) if dense.size else 0

    return {
        "gradient": rank(flow_complex.coboundary(0)),
        "harmonic": edges - rank(flow_complex.laplacian(1)),
        "curl": rank(flow_complex.coboundary(1).T),
        "edges": edges,
    }


def matrix_to_triplets(matrix: sparse.spmatrix) -> str:
    """Coordinate text export: a "rows cols nnz" header, then one
    "row col value" line per nonzero in row-major order."""
    coo = sparse.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    lines = [f"{coo.shape[0]} {coo.shape[1]} {coo.nnz}"]
    for k in order:
        lines.append(f"{coo.row[k]} {coo.col[k]} {format(float(coo.data[k]), '.17g')}")
    return "\n".join(lines) + "\n"


def decomposition_to_dict(decomposition: FlowDecomposition, classification: Classification) -> dict:
    flow_complex = decomposition.flow.flow_complex
    return {
        "classification": classification.kind,
        "norms": classification.norms,
        "proof_labels": decomposition.proof_labels(),
        "potential_residual": decomposition.potential_residual,
        "solve_residual": decomposition.solve_residual,
        "checks": decomposition.checks(),
        "flow_complex": {
            "vertices": len(flow_complex.vertices),
            "edges": len(flow_complex.edges),
            "triangles": len(flow_complex.triangles),
        },
        "potential": [
            {"label": label, "value": float(value)}
            for label, value in zip(flow_complex.vertices, decomposition.potential.values)
        ],
        "edges": [
            {
                "source": e.source,
                "target": e.target,
                "player": e.player,
                "flow": float(decomposition.flow.values[k]),
                "gradient": float(decomposition.gradient.values[k]),
                "harmonic": float(decomposition.harmonic.values[k]),
                "curl": float(decomposition.curl.values[k]),
            }
            for k, e in enumerate(flow_complex.edges)
        ],
    }
