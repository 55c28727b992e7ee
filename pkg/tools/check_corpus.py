"""Run the invariant suite over the seeded random game corpus of a config."""
from collections import Counter
from pathlib import Path
from typing import Optional

import srsly
import typer
from tqdm import tqdm
from wasabi import msg

from sgc.errors import SGCError
from sgc.pipeline import Analysis, RunConfig, run_checks
from sgc.util import load_config, registry


def main(config_path: Optional[Path] = typer.Option(None, '--config', '-c', help='Config file, defaults to the packaged one'),
         size: Optional[int] = typer.Option(None, help='Number of games, overrides corpus.size'),
         seed: Optional[int] = typer.Option(None, help='Corpus seed, overrides system.seed'),
         output_loc: Optional[Path] = typer.Option(None, '--output', '-o', help='Write the failures as JSON here')):
    overrides = {}
    if size is not None:
        overrides['corpus.size'] = size
    if seed is not None:
        overrides['system.seed'] = seed
    try:
        config = load_config(config_path, overrides=overrides)
        run_config = RunConfig.from_config(config)
        read_corpus = registry.resolve(config)['corpus']
    except SGCError as e:
        msg.fail(str(e))
        raise typer.Exit(code=e.exit_code)

    total = config['corpus']['size']
    failures = []
    counts = Counter()
    for k, doc in enumerate(tqdm(read_corpus(), total=total)):
        checks = run_checks(Analysis(doc, run_config.for_document(doc)))
        failed = sorted(name for name, check in checks.items() if not check['passed'])
        counts.update(failed)
        if failed:
            failures.append({'game': k, 'shape': list(doc.shape),
                             'failed': {name: checks[name]['detail'] for name in failed}})

    if output_loc is not None:
        srsly.write_json(output_loc, {'games': total, 'failures': failures})
    if failures:
        msg.fail(f'{len(failures)} of {total} games violate an invariant')
        msg.table(sorted(counts.items()), header=('check', 'games'))
        raise typer.Exit(code=5)
    msg.good(f'All invariants hold on {total} games')


if __name__ == '__main__':
    typer.run(main)
