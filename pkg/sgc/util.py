import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

import catalogue
import confection
import srsly
from confection import Config, ConfigValidationError

from .errors import Errors, InputError, ParseError


logger = logging.getLogger("sgc")

# Absolute tolerance for payoff comparisons and distribution sums.
TOLERANCE = 1e-9

PACKAGE_DIR = Path(__file__).parent
DEFAULT_CONFIG_PATH = PACKAGE_DIR / "default.cfg"
GAMES_DIR = PACKAGE_DIR / "games"


class registry(confection.registry):
    solvers = catalogue.create("sgc", "solvers", entry_points=True)
    readers = catalogue.create("sgc", "readers", entry_points=True)
    misc = catalogue.create("sgc", "misc", entry_points=True)


def ensure_path(path: Any) -> Any:
    """Ensure string is converted to a Path.

    path (Any): Anything. If string, it's converted to Path.
    RETURNS: Path or original argument.
    """
    if isinstance(path, str):
        return Path(path)
    else:
        return path


def load_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Dict[str, Any] = {},
) -> Config:
    """Load a config file, falling back to the packaged default config.

    path (Optional[Union[str, Path]]): The config file to read.
    overrides (Dict[str, Any]): Dot-notation overrides, e.g.
        {"tolerances.payoff": 1e-6}.
    RETURNS (Config): The interpolated config.
    """
    config_path = ensure_path(path) if path is not None else DEFAULT_CONFIG_PATH
    if not config_path.exists():
        raise ParseError(Errors.E060.format(what=str(config_path), detail="no such file"))
    try:
        return Config().from_disk(config_path, overrides=overrides)
    except ConfigValidationError as e:
        raise InputError(Errors.E065.format(detail=str(e))) from None


def get_threads(default: int = 1) -> int:
    """The configured thread count `default`, capped by SGC_THREADS when set."""
    value = os.environ.get("SGC_THREADS")
    if value is None or not value.strip():
        return max(1, default)
    try:
        return max(1, min(default, int(value)))
    except ValueError:
        logger.warning("Ignoring non-integer SGC_THREADS=%r", value)
        return max(1, default)


@registry.misc("sgc.read_games_from_json.v1")
def create_games_from_json_reader(path: Path = GAMES_DIR) -> Dict[str, dict]:
    """Read every bundled game document in a directory, keyed by file stem."""
    games = {}
    for p in sorted(ensure_path(path).glob("*.json")):
        games[p.stem] = srsly.read_json(p)
    return games
