"""Game documents: the native JSON format, the Gambit .nfg payoff format and
a seeded random corpus of documents."""
import re
from pathlib import Path
from typing import Callable, Iterator, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import srsly
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import Errors, InputError, ParseError
from .game import Game, MixedStrategy
from .util import TOLERANCE, ensure_path, logger, registry


SCHEMA_VERSION = 1


class MixedStrategyEntry(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    name: Optional[str] = None
    weights: List[float]


class Tolerances(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    payoff: Optional[float] = Field(default=None, gt=0)
    solver: Optional[float] = Field(default=None, gt=0)
    decomposition: Optional[float] = Field(default=None, gt=0)


class GameDocument(BaseModel):
    """A game with the finite mixed strategy sets to build its complex from.

    payoffs is the flat tensor: pure profiles in mixed-radix order with the
    first player most significant, n payoffs per profile. Without explicit
    mixed_strategies every player gets the delta distributions of its pure
    strategies.
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    schema_version: Literal[1] = SCHEMA_VERSION
    title: Optional[str] = None
    players: List[str]
    strategies: List[List[str]]
    payoffs: List[float]
    mixed_strategies: List[List[MixedStrategyEntry]] = Field(default_factory=list)
    tolerances: Optional[Tolerances] = None

    @model_validator(mode="before")
    @classmethod
    def default_mixed_strategies(cls, data):
        if isinstance(data, dict) and data.get("mixed_strategies") is None:
            strategies = data.get("strategies")
            if isinstance(strategies, list) and all(isinstance(s, list) for s in strategies):
                data = dict(data)
                data["mixed_strategies"] = [
                    [
                        {"name": str(name), "weights": [1.0 if k == j else 0.0 for k in range(len(names))]}
                        for j, name in enumerate(names)
                    ]
                    for names in strategies
                ]
        return data

    @model_validator(mode="after")
    def check_shapes(self) -> "GameDocument":
        n = len(self.strategies)
        if n < 1:
            raise ValueError("strategies: a game needs at least one player")
        if len(self.players) != n:
            raise ValueError(f"players: got {len(self.players)} names for {n} strategy lists")
        for i, names in enumerate(self.strategies):
            if not names:
                raise ValueError(f"strategies.{i}: player has no pure strategies")
        expected = n * int(np.prod([len(s) for s in self.strategies]))
        if len(self.payoffs) != expected:
            raise ValueError(f"payoffs: tensor length {len(self.payoffs)}, expected {expected}")
        if len(self.mixed_strategies) != n:
            raise ValueError(f"mixed_strategies: got {len(self.mixed_strategies)} lists for {n} players")
        for i, entries in enumerate(self.mixed_strategies):
            if not entries:
                raise ValueError(f"mixed_strategies.{i}: player has an empty mixed strategy set")
            for k, entry in enumerate(entries):
                where = f"mixed_strategies.{i}.{k}"
                if len(entry.weights) != len(self.strategies[i]):
                    raise ValueError(
                        f"{where}: {len(entry.weights)} weights for {len(self.strategies[i])} pure strategies")
                if any(w < 0 for w in entry.weights):
                    raise ValueError(f"{where}: negative weight")
                if abs(sum(entry.weights) - 1.0) > TOLERANCE:
                    raise ValueError(f"{where}: weights sum to {sum(entry.weights)}, not 1")
        return self

    @property
    def n(self) -> int:
        return len(self.strategies)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(len(s) for s in self.strategies)


def _validate(data: dict) -> GameDocument:
    try:
        return GameDocument.model_validate(data)
    except ValidationError as e:
        details = []
        for error in e.errors():
            loc = ".".join(str(x) for x in error["loc"])
            message = error["msg"].removeprefix("Value error, ")
            details.append(f"{loc}: {message}" if loc else message)
        raise InputError(Errors.E061.format(detail="; ".join(details))) from None


_TOKEN = re.compile(r'"((?:[^"\\]|\\.)*)"|([{}])|([^\s{}"]+)')


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    """(kind, value, line) triples, kind one of "string", "brace", "word"."""
    tokens = []
    line = 1
    pos = 0
    for match in _TOKEN.finditer(text):
        gap = text[pos:match.start()]
        if gap.strip():
            raise ParseError(Errors.E060.format(what="nfg", detail=f"unexpected {gap.strip()!r}"), line=line)
        line += gap.count("\n")
        string, brace, word = match.groups()
        if string is not None:
            tokens.append(("string", string.replace('\\"', '"'), line))
        elif brace is not None:
            tokens.append(("brace", brace, line))
        else:
            tokens.append(("word", word, line))
        line += match.group(0).count("\n")
        pos = match.end()
    if text[pos:].strip():
        raise ParseError(Errors.E060.format(what="nfg", detail="unterminated string"), line=line)
    return tokens


def _number(value: str, line: int) -> float:
    try:
        if "/" in value:
            numerator, denominator = value.split("/")
            return float(numerator) / float(denominator)
        return float(value)
    except (ValueError, ZeroDivisionError):
        raise ParseError(Errors.E060.format(what="nfg", detail=f"{value!r} is not a number"), line=line) from None


class _Tokens:
    def __init__(self, tokens: List[Tuple[str, str, int]]) -> None:
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Optional[Tuple[str, str, int]]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self, kind: str, value: Optional[str] = None) -> Tuple[str, str, int]:
        token = self.peek()
        if token is None:
            last = self.tokens[-1][2] if self.tokens else 1
            raise ParseError(Errors.E060.format(what="nfg", detail="unexpected end of input"), line=last)
        if token[0] != kind or (value is not None and token[1] != value):
            expected = value or kind
            raise ParseError(
                Errors.E060.format(what="nfg", detail=f"expected {expected}, got {token[1]!r}"), line=token[2])
        self.pos += 1
        return token

    def strings_in_braces(self) -> List[str]:
        self.next("brace", "{")
        out = []
        while self.peek() is not None and self.peek()[0] == "string":
            out.append(self.next("string")[1])
        self.next("brace", "}")
        return out


def parse_nfg(text: str) -> GameDocument:
    """Read the payoff-list variant of the Gambit .nfg format. Its payoff
    list runs with the first player's strategy varying fastest and is
    reordered to the native player-major order."""
    tokens = _Tokens(_tokenize(text))
    tokens.next("word", "NFG")
    version = tokens.next("word")
    if version[1] != "1":
        raise ParseError(Errors.E060.format(what="nfg", detail=f"unsupported version {version[1]}"), line=version[2])
    precision = tokens.next("word")
    if precision[1] not in ("R", "D"):
        raise ParseError(Errors.E060.format(what="nfg", detail="expected R or D"), line=precision[2])
    title = tokens.next("string")[1]
    players = tokens.strings_in_braces()
    n = len(players)
    tokens.next("brace", "{")
    strategies: List[List[str]] = []
    while tokens.peek() is not None and tokens.peek()[1] != "}":
        kind, value, line = tokens.peek()
        if kind == "brace":
            strategies.append(tokens.strings_in_braces())
        else:
            tokens.next("word")
            count = _number(value, line)
            if count != int(count) or count < 1:
                raise ParseError(Errors.E060.format(what="nfg", detail=f"bad strategy count {value}"), line=line)
            strategies.append([str(j + 1) for j in range(int(count))])
    tokens.next("brace", "}")
    if len(strategies) != n:
        raise InputError(Errors.E061.format(detail=f"strategies: {len(strategies)} lists for {n} players"))
    if tokens.peek() is not None and tokens.peek()[0] == "string":
        tokens.next("string")
    values = []
    while tokens.peek() is not None:
        kind, value, line = tokens.peek()
        if kind != "word":
            raise ParseError(
                Errors.E060.format(what="nfg", detail="outcome-variant .nfg files are not supported"), line=line)
        tokens.next("word")
        values.append(_number(value, line))
    shape = tuple(len(s) for s in strategies)
    expected = n * int(np.prod(shape))
    if len(values) != expected:
        raise InputError(Errors.E061.format(detail=f"payoffs: tensor length {len(values)}, expected {expected}"))
    gambit = np.asarray(values, dtype=float).reshape(tuple(reversed(shape)) + (n,))
    native = np.transpose(gambit, tuple(reversed(range(n))) + (n,))
    return _validate({
        "title": title or None,
        "players": players,
        "strategies": strategies,
        "payoffs": [float(x) for x in native.reshape(-1)],
    })


def parse_json(text: str) -> GameDocument:
    try:
        data = srsly.json_loads(text)
    except ValueError as e:
        raise ParseError(Errors.E060.format(what="json", detail=str(e))) from None
    if not isinstance(data, dict):
        raise ParseError(Errors.E060.format(what="json", detail="the top level must be an object"))
    return _validate(data)


def parse_game(source: Union[str, Path]) -> GameDocument:
    """Parse a game document from a path or from text. Text starting with
    NFG is read as Gambit .nfg, anything else as native JSON."""
    if isinstance(source, Path) or (
        isinstance(source, str) and "\n" not in source and source.strip().endswith((".json", ".nfg"))
    ):
        path = ensure_path(source)
        if not path.exists():
            raise ParseError(Errors.E060.format(what=str(path), detail="no such file"))
        text = path.read_text(encoding="utf8")
    else:
        text = source
    if text.lstrip().startswith("NFG"):
        doc = parse_nfg(text)
    else:
        doc = parse_json(text)
    logger.debug("Parsed game document with shape %s", doc.shape)
    return doc


def to_game(doc: GameDocument) -> Game:
    return Game.from_flat(doc.strategies, doc.payoffs, players=doc.players)


def mixed_sets(doc: GameDocument) -> List[List[MixedStrategy]]:
    return [
        [MixedStrategy(i, tuple(entry.weights), name=entry.name) for entry in entries]
        for i, entries in enumerate(doc.mixed_strategies)
    ]


def document_from_game(
    game: Game,
    strategies: Optional[Sequence[Sequence[MixedStrategy]]] = None,
    *,
    title: Optional[str] = None,
) -> GameDocument:
    data = {
        "title": title,
        "players": list(game.players),
        "strategies": [list(s) for s in game.strategies],
        "payoffs": game.to_flat(),
    }
    if strategies is not None:
        data["mixed_strategies"] = [
            [{"name": x.name, "weights": list(x.weights)} for x in xs] for xs in strategies
        ]
    return _validate(data)


def game_schema() -> dict:
    """JSON schema of the native game document."""
    return GameDocument.model_json_schema()


def export_document(doc: GameDocument) -> dict:
    """The document as native JSON data, omitting unset optional fields."""
    return doc.model_dump(mode="json", exclude_none=True)


def write_document(doc: GameDocument, path: Union[str, Path]) -> None:
    srsly.write_json(ensure_path(path), export_document(doc))


def random_document(
    rng: np.random.Generator,
    *,
    players: Sequence[int] = (2, 3),
    max_strategies: int = 3,
    max_mixed: int = 4,
    payoff_bound: float = 10.0,
) -> GameDocument:
    """A game with uniform payoffs in [-bound, bound] and, per player, its
    pure strategies plus random distributions up to `max_mixed` in total."""
    n = int(rng.choice(list(players)))
    shape = [int(rng.integers(2, max_strategies + 1)) for _ in range(n)]
    payoffs = rng.uniform(-payoff_bound, payoff_bound, size=n * int(np.prod(shape)))
    mixed = []
    for i, l in enumerate(shape):
        count = int(rng.integers(1, max_mixed + 1))
        entries = []
        for k in range(count):
            if k < l and rng.random() < 0.5:
                weights = np.zeros(l)
                weights[k] = 1.0
            else:
                weights = rng.dirichlet(np.ones(l))
            entries.append({"name": f"x{i}_{k}", "weights": [float(w) for w in weights]})
        mixed.append(entries)
    return _validate({
        "players": [str(i + 1) for i in range(n)],
        "strategies": [[f"s{j}" for j in range(l)] for l in shape],
        "payoffs": [float(x) for x in payoffs],
        "mixed_strategies": mixed,
    })


@registry.readers("sgc.RandomGameCorpus.v1")
def create_random_corpus(
    size: int = 500,
    seed: int = 0,
    players: List[int] = [2, 3],
    max_strategies: int = 3,
    max_mixed: int = 4,
    payoff_bound: float = 10.0,
) -> Callable[[], Iterator[GameDocument]]:
    """A seeded corpus: calling the returned reader yields the same `size`
    documents every time."""

    def read() -> Iterator[GameDocument]:
        rng = np.random.default_rng(seed)
        for _ in range(size):
            yield random_document(
                rng,
                players=players,
                max_strategies=max_strategies,
                max_mixed=max_mixed,
                payoff_bound=payoff_bound,
            )

    return read
