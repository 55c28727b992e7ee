"""The sgc command line: one subcommand per pipeline stage.

    sgc <subcommand> --game <path> [--out <dir>] [--tolerance <x>] [--format json|dot]
"""
import logging
from pathlib import Path
from typing import Optional

import typer
from wasabi import msg

from .errors import SGCError
from .io import parse_game
from .pipeline import RunConfig, run_pipeline
from .util import load_config, logger


app = typer.Typer(name="sgc", help="Simplicial analysis of finite strategic-form games.", add_completion=False)

COMMANDS = {
    "build": "Build the weighted situation complex and write complex.json.",
    "nerve": "Write the local and global nerves as DOT (and JSON).",
    "covering": "Build the covering complex and verify the covering conditions.",
    "nash": "Find the Nash equilibrium simplices through best responses.",
    "decompose": "Decompose the game flow into gradient, harmonic and curl parts.",
    "check": "Run every stage and the invariant suite; exit 5 on a violation.",
    "export": "Write the parsed game back as native JSON.",
}


def setup_logging(verbose: bool) -> None:
    if verbose:
        logging.basicConfig(format="%(asctime)s %(name)s %(levelname)s: %(message)s")
        logger.setLevel(logging.DEBUG)


def run(
    subcommand: str,
    game: Path,
    out: Optional[Path] = None,
    tolerance: Optional[float] = None,
    output_format: Optional[str] = None,
    config_path: Optional[Path] = None,
    verbose: bool = False,
) -> None:
    setup_logging(verbose)
    try:
        config = load_config(config_path) if config_path is not None else None
        run_config = RunConfig.from_config(config, tolerance=tolerance, out=out, format=output_format)
        doc = parse_game(game)
        result = run_pipeline(doc, run_config, subcommand)
    except SGCError as e:
        msg.fail(str(e))
        raise typer.Exit(code=e.exit_code)
    msg.good(f"{subcommand}: wrote {len(result.files)} file(s) to {run_config.for_document(doc).out}")
    for key, value in result.report.items():
        if key == "checks":
            for name, check in value.items():
                msg.text(f"  {name}: {check['detail']}")
        else:
            msg.info(f"{key}: {value}")


def _register(name: str, help: str) -> None:
    def command(
        game: Path = typer.Option(..., "--game", "-g", help="Game file, native JSON or Gambit .nfg"),
        out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
        tolerance: Optional[float] = typer.Option(None, "--tolerance", "-t", help="Payoff comparison tolerance"),
        output_format: Optional[str] = typer.Option(None, "--format", "-f", help="Report format: json or dot"),
        config_path: Optional[Path] = typer.Option(None, "--config", "-c", help="Config file (.cfg)"),
        verbose: bool = typer.Option(False, "--verbose", "-V", help="Log debug messages"),
    ) -> None:
        run(name, game, out, tolerance, output_format, config_path, verbose)

    command.__name__ = name
    app.command(name, help=help)(command)


for _name, _help in COMMANDS.items():
    _register(_name, _help)
