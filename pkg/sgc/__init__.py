from .game import Game, MixedStrategy, SituationProfile, delta, expected_payoff, is_nash, nash_oracle, uniform
from .complex import SituationComplex, Simplex, Vertex, build_complex
from .nerve import build_global_nerve, comparable_star, global_nerve, local_nerve, reconstruct_complex
from .covering import best_response, build_covering, compute_A, compute_Z, nash_simplices, verify_covering
from .hodge import FlowComplex, build_flow_complex, classify, decompose, game_flow, potential_function
from .io import GameDocument, parse_game
from .pipeline import RunConfig, run_pipeline
