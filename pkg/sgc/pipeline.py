"""Run configuration and the stages behind the sgc subcommands."""
import itertools
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Callable, Dict, List, Literal, Optional, Tuple

import numpy as np
import srsly
from confection import Config, ConfigValidationError
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .complex import SituationComplex, barycentric_subdivision, build_complex, comparable_player, complex_to_dict
from .covering import (
    CoveringComplex, best_response, build_covering, degree_table, deviation_neighborhood,
    is_best_response_by_degree, is_weak_maximum, nash_simplices, verify_covering,
)
from .errors import Errors, InputError, InvariantViolation, SGCError
from .game import Game, affine_transform, is_nash, pure_nash
from .hodge import (
    Classification, Cochain, FlowComplex, FlowDecomposition, LaplacianSolver, build_flow_complex,
    classify_decomposition, decompose, decomposition_to_dict, game_flow, hodge_dimensions,
    matrix_to_triplets,
)
from .io import GameDocument, mixed_sets, to_game, write_document
from .nerve import Nerve, export_nerve_dot, global_nerve, local_nerves, nerve_to_dict, reconstruct_complex
from .util import TOLERANCE, get_threads, load_config, logger, registry


FORMATS = ("json", "dot")
# Edge count up to which the dense-rank dimension check runs.
DIMENSION_CHECK_LIMIT = 200


class RunConfig(BaseModel):
    """Settings for one pipeline run. `overrides` names the fields set on
    the command line, which take precedence over document tolerances."""
    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    tolerance: float = Field(default=TOLERANCE, gt=0)
    solver_rtol: float = Field(default=1e-10, gt=0)
    decomposition_tolerance: float = Field(default=1e-8, gt=0)
    out: Path = Path("out")
    format: Literal["json", "dot"] = "json"
    # Accepted for a stable interface; every choice in the pipeline is deterministic.
    seed: int = 0
    threads: int = Field(default=1, ge=1)
    solver: Optional[LaplacianSolver] = None
    overrides: Tuple[str, ...] = ()

    @classmethod
    def create(cls, **values: Any) -> "RunConfig":
        if values.get("format") is not None and values["format"] not in FORMATS:
            raise InputError(Errors.E063.format(name=values["format"], available=", ".join(FORMATS)))
        try:
            return cls(**values)
        except ValidationError as e:
            detail = "; ".join(f"{'.'.join(str(x) for x in err['loc'])}: {err['msg']}" for err in e.errors())
            raise InputError(Errors.E065.format(detail=detail)) from None

    @classmethod
    def from_config(cls, config: Optional[Config] = None, **overrides: Any) -> "RunConfig":
        """Resolve a config (the packaged default if None) and apply
        overrides whose value is not None."""
        if config is None:
            config = load_config()
        try:
            resolved = registry.resolve(config)
        except ConfigValidationError as e:
            raise InputError(Errors.E065.format(detail=str(e))) from None
        values = {
            "tolerance": resolved["tolerances"]["payoff"],
            "solver_rtol": resolved["tolerances"]["solver"],
            "decomposition_tolerance": resolved["tolerances"]["decomposition"],
            "out": resolved["paths"]["out"],
            "format": resolved["output"]["format"],
            "seed": resolved["system"]["seed"],
            "threads": get_threads(resolved["system"]["threads"]),
            "solver": resolved["solver"],
        }
        given = {k: v for k, v in overrides.items() if v is not None}
        values.update(given)
        values["overrides"] = tuple(sorted(given))
        return cls.create(**values)

    def for_document(self, doc: GameDocument) -> "RunConfig":
        """Apply the document's tolerance overrides to fields the command line
        left alone."""
        if doc.tolerances is None:
            return self
        update = {}
        for name, value in (
            ("tolerance", doc.tolerances.payoff),
            ("solver_rtol", doc.tolerances.solver),
            ("decomposition_tolerance", doc.tolerances.decomposition),
        ):
            if value is not None and name not in self.overrides:
                update[name] = value
        return self.model_copy(update=update) if update else self

    def get_solver(self) -> LaplacianSolver:
        if self.solver is not None and "solver_rtol" not in self.overrides:
            return self.solver
        direct_limit = self.solver.direct_limit if self.solver is not None else 10000
        return LaplacianSolver(direct_limit=direct_limit, rtol=self.solver_rtol)


class Analysis:
    """Lazily computed artifacts of one game, shared by the stages."""

    def __init__(self, doc: GameDocument, config: RunConfig, game: Optional[Game] = None) -> None:
        self.doc = doc
        self.config = config
        self.game = game if game is not None else to_game(doc)

    @cached_property
    def complex(self) -> SituationComplex:
        return build_complex(self.game, mixed_sets(self.doc), tol=self.config.tolerance)

    @cached_property
    def local_nerves(self) -> List[Nerve]:
        return local_nerves(self.complex, threads=self.config.threads)

    @cached_property
    def global_nerve(self) -> Nerve:
        return global_nerve(self.local_nerves)

    @cached_property
    def flow_complex(self) -> FlowComplex:
        return build_flow_complex(self.global_nerve)

    @cached_property
    def flow(self) -> Cochain:
        return game_flow(self.complex, self.flow_complex)

    @cached_property
    def covering(self) -> CoveringComplex:
        return build_covering(self.complex)

    @cached_property
    def nash(self) -> Tuple[int, ...]:
        return tuple(f.label for f in nash_simplices(self.complex))

    @cached_property
    def decomposition(self) -> FlowDecomposition:
        return decompose(self.flow, solver=self.config.get_solver(), tol=self.config.decomposition_tolerance)

    @cached_property
    def classification(self) -> Classification:
        return classify_decomposition(self.decomposition, tol=self.config.decomposition_tolerance)

    def with_game(self, game: Game) -> "Analysis":
        return Analysis(self.doc, self.config, game=game)


@dataclass
class PipelineResult:
    subcommand: str
    files: List[Path] = field(default_factory=list)
    report: Dict[str, Any] = field(default_factory=dict)
    exit_code: int = 0


def _write_json(result: PipelineResult, path: Path, data: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    srsly.write_json(path, data)
    result.files.append(path)


def _write_text(result: PipelineResult, path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf8")
    result.files.append(path)


def _base_json(base) -> List[Optional[int]]:
    return [None if k is None else int(k) for k in base]


def stage_build(analysis: Analysis, out: Path, result: PipelineResult) -> None:
    data = complex_to_dict(analysis.complex)
    data["barycentric_subdivision"] = {"f_vector": list(barycentric_subdivision(analysis.complex).f_vector())}
    _write_json(result, out / "complex.json", data)
    result.report["facets"] = len(analysis.complex.facets)
    result.report["f_vector"] = list(analysis.complex.f_vector())


def stage_nerve(analysis: Analysis, out: Path, result: PipelineResult) -> None:
    for k, nerve in enumerate(analysis.local_nerves):
        _write_text(result, out / "nerves" / f"local_{k:03d}.dot", export_nerve_dot(nerve))
    _write_text(result, out / "nerves" / "global.dot", export_nerve_dot(analysis.global_nerve))
    if analysis.config.format == "json":
        _write_json(result, out / "nerve.json", {
            "local": [nerve_to_dict(nerve) for nerve in analysis.local_nerves],
            "global": nerve_to_dict(analysis.global_nerve),
        })
    result.report["local_nerves"] = len(analysis.local_nerves)
    result.report["global_vertices"] = len(analysis.global_nerve.vertices)
    result.report["global_edges"] = len(analysis.global_nerve.edges)


def stage_covering(analysis: Analysis, out: Path, result: PipelineResult) -> None:
    covering = analysis.covering
    report = verify_covering(covering, analysis.complex)
    _write_json(result, out / "covering.json", {
        "z": {str(i): list(z) for i, z in sorted(covering.z.items())},
        "a": [
            {"player": i, "strategy": j, "bases": [_base_json(b) for b in bases]}
            for (i, j), bases in sorted(covering.a.items())
        ],
        "sheets": {
            str(i): [{"cover": s.cover, "label": s.label, "payoff": s.payoff} for s in sheet]
            for i, sheet in sorted(covering.sheets.items())
        },
        "joins": [
            {"label": j.label, "covers": list(j.covers), "payoffs": list(j.payoffs), "weight": j.weight}
            for j in covering.joins
        ],
        "report": report.to_dict(),
    })
    result.report["covering_passed"] = report.passed


def stage_nash(analysis: Analysis, out: Path, result: PipelineResult) -> None:
    complex_ = analysis.complex
    game = analysis.game
    oracle = [f.label for f in complex_.facets if is_nash(game, f.profile, tol=complex_.tol)]
    nash = [complex_.facet(label) for label in analysis.nash]
    _write_json(result, out / "nash.json", {
        "nash": [
            {
                "label": f.label,
                "indices": list(f.indices),
                "strategies": [str(x) for x in f.strategies],
                "payoffs": list(f.payoffs),
            }
            for f in nash
        ],
        "oracle_agrees": oracle == list(analysis.nash),
        "pure_nash": [
            [game.strategies[i][j] for i, j in enumerate(s)] for s in pure_nash(game, tol=complex_.tol)
        ],
        "z": {str(i): list(z) for i, z in sorted(analysis.covering.z.items())},
        "degrees": [r._asdict() for r in degree_table(complex_)],
    })
    result.report["nash"] = [[str(x) for x in f.strategies] for f in nash]


def stage_decompose(analysis: Analysis, out: Path, result: PipelineResult) -> None:
    flow_complex = analysis.flow_complex
    data = decomposition_to_dict(analysis.decomposition, analysis.classification)
    if len(flow_complex.edges) <= DIMENSION_CHECK_LIMIT:
        data["dimensions"] = hodge_dimensions(flow_complex)
    _write_json(result, out / "decomposition.json", data)
    matrices = {
        "boundary_1": flow_complex.boundary_matrix(1),
        "boundary_2": flow_complex.boundary_matrix(2),
        "laplacian_0": flow_complex.laplacian(0),
        "laplacian_1": flow_complex.laplacian(1),
        "laplacian_2": flow_complex.laplacian(2),
    }
    for name, matrix in matrices.items():
        _write_text(result, out / "matrices" / f"{name}.txt", matrix_to_triplets(matrix))
    result.report["classification"] = analysis.classification.kind


def stage_export(analysis: Analysis, out: Path, result: PipelineResult) -> None:
    path = out / "game.json"
    write_document(analysis.doc, path)
    result.files.append(path)


# name -> check(analysis) returning (passed, detail)
CHECKS: Dict[str, Callable[[Analysis], Tuple[bool, str]]] = {}


def invariant(name: str):
    def register(func):
        CHECKS[name] = func
        return func
    return register


@invariant("boundary_squared")
def check_boundary_squared(analysis: Analysis) -> Tuple[bool, str]:
    worst = 0.0
    complex_ = analysis.complex
    for t in range(2, complex_.dim + 1):
        product = complex_.boundary_matrix(t - 1) @ complex_.boundary_matrix(t)
        worst = max(worst, abs(product).max() if product.nnz else 0.0)
    fc = analysis.flow_complex
    for product in (fc.boundary_matrix(1) @ fc.boundary_matrix(2), fc.coboundary(1) @ fc.coboundary(0)):
        worst = max(worst, abs(product).max() if product.nnz else 0.0)
    return worst == 0, f"max |dd| = {worst:.3e}"


@invariant("adjointness")
def check_adjointness(analysis: Analysis) -> Tuple[bool, str]:
    rng = np.random.default_rng(analysis.config.seed)
    fc = analysis.flow_complex
    worst = 0.0
    for t in (0, 1):
        delta = fc.coboundary(t)
        d = fc.boundary_matrix(t + 1)
        if 0 in delta.shape:
            continue
        for _ in range(100):
            f = rng.standard_normal(delta.shape[1])
            c = rng.standard_normal(delta.shape[0])
            left = float((delta @ f) @ c)
            right = float(f @ (d @ c))
            worst = max(worst, abs(left - right) / max(1.0, abs(left)))
    return worst < 1e-12, f"max deviation {worst:.3e}"


@invariant("laplacian_psd")
def check_laplacian_psd(analysis: Analysis) -> Tuple[bool, str]:
    fc = analysis.flow_complex
    for t in (0, 1, 2):
        L = fc.laplacian(t)
        if L.shape[0] == 0:
            continue
        asymmetry = abs(L - L.T).max() if (L - L.T).nnz else 0.0
        if asymmetry != 0:
            return False, f"Laplacian {t} is not symmetric ({asymmetry:.3e})"
        smallest = float(np.linalg.eigvalsh(L.toarray()).min())
        if smallest < -1e-10:
            return False, f"Laplacian {t} has eigenvalue {smallest:.3e}"
    return True, "symmetric positive semidefinite"


@invariant("barycenter_convex")
def check_barycenter_convex(analysis: Analysis) -> Tuple[bool, str]:
    complex_ = analysis.complex
    for faces in complex_.faces.values():
        for face in faces:
            if not complex_.barycenter(face).is_convex(TOLERANCE):
                return False, f"barycenter of {face} is not convex: {complex_.barycenter(face).weights}"
    return True, f"{sum(len(fs) for fs in complex_.faces.values())} faces"


@invariant("reconstruct_roundtrip")
def check_reconstruct_roundtrip(analysis: Analysis) -> Tuple[bool, str]:
    original = analysis.complex
    rebuilt = reconstruct_complex(analysis.global_nerve)

    def key(complex_: SituationComplex):
        return [(f.label, f.indices, f.payoffs) for f in complex_.facets]

    if rebuilt.m != original.m or key(rebuilt) != key(original):
        return False, "rebuilt facets differ from the original facets"
    if rebuilt.f_vector() != original.f_vector():
        return False, f"f-vector {rebuilt.f_vector()} != {original.f_vector()}"
    return True, f"{len(rebuilt.facets)} facets"


@invariant("nerve_adjacency")
def check_nerve_adjacency(analysis: Analysis) -> Tuple[bool, str]:
    complex_ = analysis.complex
    expected = {
        (a.label, b.label)
        for a, b in itertools.combinations(complex_.facets, 2)
        if comparable_player(a.indices, b.indices) is not None
    }
    graph = analysis.global_nerve.to_networkx().to_undirected()
    got = {(min(a, b), max(a, b)) for a, b in graph.edges()}
    stars = sum(int(np.prod([m for k, m in enumerate(complex_.m) if k != i])) for i in range(complex_.n))
    if got != expected:
        return False, f"{len(got ^ expected)} pairs differ from the face lattice"
    if len(analysis.local_nerves) != stars:
        return False, f"{len(analysis.local_nerves)} local nerves, expected {stars}"
    return True, f"{len(got)} edges, {stars} local nerves"


@invariant("covering")
def check_covering(analysis: Analysis) -> Tuple[bool, str]:
    report = verify_covering(analysis.covering, analysis.complex)
    failed = [c for c in report.conditions if not c.passed]
    if failed:
        return False, f"{failed[0].name}: {failed[0].witness}"
    return True, f"{len(analysis.covering.joins)} joins"


@invariant("nash_oracle")
def check_nash_oracle(analysis: Analysis) -> Tuple[bool, str]:
    complex_ = analysis.complex
    oracle = tuple(f.label for f in complex_.facets if is_nash(analysis.game, f.profile, tol=complex_.tol))
    if oracle != analysis.nash:
        return False, f"degree criterion {analysis.nash} != oracle {oracle}"
    for facet in complex_.facets:
        for i in range(complex_.n):
            base = tuple(None if k == i else x for k, x in enumerate(facet.indices))
            direct = facet in best_response(complex_, i, base)
            by_degree = is_best_response_by_degree(complex_, facet, i)
            by_payoff = is_weak_maximum(
                ("facet", facet.label), deviation_neighborhood(complex_, facet, i), complex_.tol)
            if not direct == by_degree == by_payoff:
                return False, f"best response of player {i} disagrees at facet {facet.label}"
    return True, f"{len(oracle)} equilibria"


@invariant("decomposition")
def check_decomposition(analysis: Analysis) -> Tuple[bool, str]:
    checks = analysis.decomposition.checks()
    worst = max(checks.values()) if checks else 0.0
    return worst <= analysis.config.decomposition_tolerance, f"max check {worst:.3e}"


@invariant("dimension_identity")
def check_dimension_identity(analysis: Analysis) -> Tuple[bool, str]:
    fc = analysis.flow_complex
    if len(fc.edges) > DIMENSION_CHECK_LIMIT:
        return True, f"skipped, {len(fc.edges)} edges"
    dims = hodge_dimensions(fc)
    total = dims["gradient"] + dims["harmonic"] + dims["curl"]
    return total == dims["edges"], f"{dims['gradient']} + {dims['harmonic']} + {dims['curl']} = {total}"


@invariant("gradient_orthogonality")
def check_gradient_orthogonality(analysis: Analysis) -> Tuple[bool, str]:
    w = analysis.flow
    bound = analysis.config.decomposition_tolerance * max(1.0, w.norm())
    divergence = float(np.linalg.norm(w.flow_complex.coboundary(0).T @ w.values))
    vanishes = analysis.decomposition.gradient.norm() < bound
    return vanishes == (divergence < bound), f"|g| vanishes: {vanishes}, |div w| = {divergence:.3e}"


def _directions(analysis: Analysis) -> List[Tuple[int, int, bool]]:
    return [(e.source, e.target, e.tie) for e in analysis.global_nerve.edges]


@invariant("shift_invariance")
def check_shift_invariance(analysis: Analysis) -> Tuple[bool, str]:
    scale = max(1.0, analysis.flow.norm())
    for i in range(analysis.game.n):
        shifted = analysis.with_game(affine_transform(analysis.game, i, shift=3.25))
        if not np.allclose(shifted.flow.values, analysis.flow.values, rtol=0, atol=1e-9 * scale):
            return False, f"shifting player {i} changed the flow"
        if _directions(shifted) != _directions(analysis):
            return False, f"shifting player {i} changed a nerve direction"
        if shifted.nash != analysis.nash:
            return False, f"shifting player {i} changed the Nash set"
    return True, "flows, directions and Nash set unchanged"


@invariant("scale_invariance")
def check_scale_invariance(analysis: Analysis) -> Tuple[bool, str]:
    for i in range(analysis.game.n):
        scaled = analysis.with_game(affine_transform(analysis.game, i, scale=2.5))
        if _directions(scaled) != _directions(analysis):
            return False, f"scaling player {i} changed a nerve direction"
        if scaled.nash != analysis.nash:
            return False, f"scaling player {i} changed the Nash set"
    return True, "directions and Nash set unchanged"


def run_checks(analysis: Analysis) -> Dict[str, Dict[str, Any]]:
    results = {}
    for name, check in CHECKS.items():
        try:
            passed, detail = check(analysis)
        except SGCError as e:
            passed, detail = False, str(e)
        results[name] = {"passed": bool(passed), "detail": detail}
        logger.debug("Check %s: %s (%s)", name, "passed" if passed else "FAILED", detail)
    return results


def stage_check(analysis: Analysis, out: Path, result: PipelineResult) -> None:
    for stage in (stage_build, stage_nerve, stage_covering, stage_nash, stage_decompose):
        stage(analysis, out, result)
    checks = run_checks(analysis)
    failed = [name for name, c in checks.items() if not c["passed"]]
    _write_json(result, out / "check.json", {"passed": not failed, "checks": checks})
    result.report["checks"] = checks
    if failed:
        raise InvariantViolation(failed)


STAGES: Dict[str, Callable[[Analysis, Path, PipelineResult], None]] = {
    "build": stage_build,
    "nerve": stage_nerve,
    "covering": stage_covering,
    "nash": stage_nash,
    "decompose": stage_decompose,
    "check": stage_check,
    "export": stage_export,
}


def run_pipeline(doc: GameDocument, config: RunConfig, subcommand: str) -> PipelineResult:
    """Run one subcommand and write its files below config.out. Every file is
    ordered by label, so identical inputs give byte-identical outputs."""
    if subcommand not in STAGES:
        raise InputError(Errors.E062.format(name=subcommand, available=", ".join(STAGES)))
    config = config.for_document(doc)
    if config.format == "dot" and subcommand != "nerve":
        raise InputError(Errors.E063.format(name="dot", available="json (dot is only written by 'nerve')"))
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    logger.info("Running '%s' on a %s game", subcommand, "x".join(str(l) for l in doc.shape))
    result = PipelineResult(subcommand)
    STAGES[subcommand](Analysis(doc, config), out, result)
    return result
