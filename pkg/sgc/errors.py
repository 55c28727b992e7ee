from typing import Iterable, Optional


class ErrorsWithCodes(type):
    def __getattribute__(self, code):
        msg = super().__getattribute__(code)
        if code.startswith("__"):  # python system attributes like __class__
            return msg
        else:
            return "[{code}] {msg}".format(code=code, msg=msg)


class Errors(metaclass=ErrorsWithCodes):
    # strategic-game
    E001 = "A game needs at least one player, got {n}."
    E002 = "Player {i} has no pure strategies."
    E003 = ("Payoff tensor has shape {shape}, expected {expected} "
            "(one payoff per player for every pure profile).")
    E004 = ("Mixed strategy of player {i} has {got} weights, but the player "
            "has {expected} pure strategies.")
    E005 = "Mixed strategy of player {i} has a negative weight: {weights}."
    E006 = ("Mixed strategy of player {i} sums to {total}, which is not 1 "
            "within {tol}.")
    E007 = ("Situation profile has {got} components, but the game has {n} "
            "players.")
    E008 = "Component {k} of the situation profile belongs to player {i}."
    E009 = "Player index {i} is out of range for a {n} player game."
    E010 = "Pure profile {s} is not a valid profile of a game with {shape} strategies."
    E011 = "Pure strategy index {j} is out of range for player {i} ({l} strategies)."

    # situation-complex
    E020 = "Player {i} has an empty set of mixed strategies."
    E021 = "Got {got} mixed strategy sets for a {n} player game."
    E022 = "Chain coefficients must be attached to {dim}-simplices, got {simplex}."
    E023 = "Simplex {simplex} is not part of this complex."
    E024 = "Facet labels must be unique, label {label} appears more than once."

    # nerve-builder
    E030 = ("The strategy situation {base} is not formed from the mixed sets "
            "of the complex for player {i}.")
    E031 = ("Label collision while gluing nerves: label {label} is carried by "
            "the distinct facets {a} and {b}.")
    E032 = "Nerve vertex {label} has no facet payload."
    E033 = "Cannot reconstruct a complex from an empty nerve."
    E034 = "Cannot reconstruct a complex from a nerve without its game."
    E035 = ("Nerve facets use strategy indices {indices} for player {i}; "
            "they must cover 0..m_i-1.")

    # covering-nash
    E040 = "Pure strategy {j} of player {i} is not in Z_{i} = {z}."
    E041 = "{member} is not a member of neighborhood {id}."

    # hodge-decomposition
    E050 = "Boundary and coboundary maps exist only for t in {allowed}, got {t}."
    E051 = ("Linear solve did not converge: relative residual {residual:.3e} "
            "exceeds {rtol:.1e}.")
    E052 = ("Decomposition check '{check}' failed: {value:.3e} exceeds "
            "{bound:.1e}.")
    E053 = ("Facets {a} and {b} are comparable through more than one player.")
    E054 = "Flow edge {source} -> {target} is not oriented by ascending label."
    E055 = "Triangle {triangle} is missing its edge {pair}."
    E056 = "A {dim}-cochain needs {expected} values, got shape {shape}."

    # analyzer-cli
    E060 = "Could not parse {what}: {detail}"
    E061 = "Invalid game document: {detail}"
    E062 = "Unknown subcommand '{name}'. Available: {available}."
    E063 = "Unknown output format '{name}'. Available: {available}."
    E064 = "Invariant check failed: {names}."
    E065 = "Invalid run configuration: {detail}"


class SGCError(Exception):
    """Base class for errors raised by sgc. `exit_code` is what the CLI
    returns when the error escapes a subcommand."""
    exit_code = 1


class ParseError(SGCError):
    exit_code = 2

    def __init__(self, message: str, *, line: Optional[int] = None) -> None:
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.line = line


class InputError(SGCError, ValueError):
    exit_code = 3


class ConstructionError(InputError):
    pass


class DataError(InputError):
    pass


class NumericalError(SGCError, ArithmeticError):
    exit_code = 4

    def __init__(self, message: str, *, residual: Optional[float] = None) -> None:
        super().__init__(message)
        self.residual = residual


class InvariantViolation(SGCError, AssertionError):
    exit_code = 5

    def __init__(self, names: Iterable[str]) -> None:
        self.names = sorted(names)
        super().__init__(Errors.E064.format(names=", ".join(self.names)))
