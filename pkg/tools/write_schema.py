"""Write the JSON schema of the native game document."""
from pathlib import Path

import srsly
import typer
from wasabi import msg

from sgc.io import game_schema


def main(output_loc: Path = typer.Argument(Path('docs/game.schema.json'), help='Where to write the schema')):
    srsly.write_json(output_loc, game_schema())
    msg.good(f'Wrote the game document schema to {output_loc}')


if __name__ == '__main__':
    typer.run(main)
