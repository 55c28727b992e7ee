from pathlib import Path

import pytest
import srsly
from sgc.errors import InputError, ParseError
from sgc.io import (
    GameDocument, create_random_corpus, document_from_game, export_document, game_schema, mixed_sets, parse_game,
    parse_json, parse_nfg, to_game, write_document,
)
from sgc.hodge import LaplacianSolver
from sgc.pipeline import RunConfig
from sgc.util import GAMES_DIR, get_threads, load_config, registry
from util import PRISONERS_DILEMMA, bundled, two_by_two, with_uniform


SCHEMA_PATH = Path(__file__).parent.parent / 'docs' / 'game.schema.json'


PD_NFG = """NFG 1 R "Prisoner's dilemma" { "1" "2" } { 2 2 }

3 3 5 0 0 5 1 1
"""

PD_NAMED_NFG = """NFG 1 R "" { "Row" "Column" }
{ { "C" "D" } { "C" "D" } }
""
3 3 5 0 0 5 1 1
"""

OUTCOME_NFG = """NFG 1 R "outcomes" { "1" "2" } { { "a" "b" } { "c" "d" } }
""
{
{ "" 1, 1 }
}
1
"""


def test_nfg_payoffs_are_reordered_to_native_order():
    doc = parse_nfg(PD_NFG)
    assert doc.title == "Prisoner's dilemma"
    assert doc.strategies == [['1', '2'], ['1', '2']]
    assert doc.payoffs == [float(x) for x in PRISONERS_DILEMMA]


def test_nfg_with_named_strategies():
    doc = parse_game(PD_NAMED_NFG)
    assert doc.title is None
    assert doc.players == ['Row', 'Column']
    assert doc.strategies == [['C', 'D'], ['C', 'D']]
    assert doc.payoffs == [float(x) for x in PRISONERS_DILEMMA]


def test_nfg_accepts_fractions():
    doc = parse_nfg('NFG 1 R "" { "1" } { 2 }\n1/2 3/4\n')
    assert doc.payoffs == [0.5, 0.75]


def test_nfg_with_wrong_payoff_count():
    text = 'NFG 1 R "x" { "1" "2" } { 2 2 }\n3 3 5 0 0 5 1\n'
    with pytest.raises(InputError) as excinfo:
        parse_nfg(text)
    assert 'expected 8' in str(excinfo.value)


def test_nfg_reports_the_line_of_a_bad_token():
    text = 'NFG 1 R "x" { "1" "2" } { 2 2 }\n\n3 3 5 abc 0 5 1 1\n'
    with pytest.raises(ParseError) as excinfo:
        parse_nfg(text)
    assert excinfo.value.line == 3
    assert 'line 3' in str(excinfo.value)


@pytest.mark.parametrize('text', [
    OUTCOME_NFG,
    'NFG 2 R "x" { "1" } { 2 }\n1 2\n',
    'NFG 1 R "x" { "1" } { 2\n',
    'EFG 2 R "x" { "1" } { 2 }\n1 2\n',
])
def test_unsupported_nfg(text):
    with pytest.raises(ParseError):
        parse_nfg(text)


@pytest.mark.parametrize('text', ['{"players": [', '[1, 2, 3]'])
def test_bad_json(text):
    with pytest.raises(ParseError):
        parse_json(text)


def test_missing_file():
    with pytest.raises(ParseError):
        parse_game(Path('does/not/exist.json'))
    with pytest.raises(ParseError):
        parse_game('does/not/exist.nfg')


@pytest.mark.parametrize('change,fragment', [
    ({'payoffs': [1, 2, 3]}, 'expected 8'),
    ({'players': ['1']}, 'players'),
    ({'mixed_strategies': [[{'weights': [0.5, 0.6]}], [{'weights': [1, 0]}]]}, 'mixed_strategies.0.0'),
    ({'mixed_strategies': [[{'weights': [1.5, -0.5]}], [{'weights': [1, 0]}]]}, 'negative'),
    ({'mixed_strategies': [[], [{'weights': [1, 0]}]]}, 'empty'),
    ({'schema_version': 2}, 'schema_version'),
    ({'colour': 'red'}, 'colour'),
])
def test_invalid_documents(change, fragment):
    data = export_document(bundled('prisoners_dilemma'))
    data.update(change)
    with pytest.raises(InputError) as excinfo:
        parse_json(srsly.json_dumps(data))
    assert fragment in str(excinfo.value)


def test_mixed_strategies_default_to_deltas():
    doc = bundled('prisoners_dilemma')
    assert [e.name for e in doc.mixed_strategies[0]] == ['C', 'D']
    assert [e.weights for e in doc.mixed_strategies[1]] == [[1.0, 0.0], [0.0, 1.0]]
    assert [str(x) for x in mixed_sets(doc)[0]] == ['C', 'D']


def test_export_and_parse_agree():
    doc = bundled('rock_paper_scissors')
    assert parse_json(srsly.json_dumps(export_document(doc))) == doc
    assert 'tolerances' not in export_document(doc)


def test_written_document_parses_back(tmp_path):
    doc = bundled('matching_pennies')
    path = tmp_path / 'game.json'
    write_document(doc, path)
    assert parse_game(path) == doc


def test_shipped_schema_matches_the_model():
    shipped = srsly.read_json(SCHEMA_PATH)
    schema = game_schema()
    assert list(shipped['properties']) == list(schema['properties']) == list(GameDocument.model_fields)
    assert sorted(shipped['required']) == sorted(schema['required']) == ['payoffs', 'players', 'strategies']
    assert sorted(shipped['$defs']) == sorted(schema['$defs']) == ['MixedStrategyEntry', 'Tolerances']
    for name, model in schema['$defs'].items():
        assert list(shipped['$defs'][name]['properties']) == list(model['properties'])
        assert shipped['$defs'][name].get('required', []) == model.get('required', [])
    assert shipped['additionalProperties'] is schema['additionalProperties'] is False


@pytest.mark.parametrize('path', sorted(GAMES_DIR.glob('*.json')), ids=lambda p: p.stem)
def test_bundled_games_follow_the_schema(path):
    schema = srsly.read_json(SCHEMA_PATH)
    data = srsly.read_json(path)
    assert set(schema['required']) <= set(data) <= set(schema['properties'])
    for entries in data.get('mixed_strategies') or []:
        for entry in entries:
            entry_schema = schema['$defs']['MixedStrategyEntry']
            assert set(entry_schema['required']) <= set(entry) <= set(entry_schema['properties'])
    assert parse_game(path).players == data['players']


def test_document_from_game():
    game = two_by_two(PRISONERS_DILEMMA, names=('C', 'D'))
    doc = document_from_game(game, with_uniform(game), title='pd')
    assert doc.shape == (2, 2)
    assert [e.name for e in doc.mixed_strategies[0]] == ['C', 'D', 'uniform']
    assert to_game(doc).to_flat() == game.to_flat()


def test_every_bundled_game_parses():
    read_games = registry.misc.get('sgc.read_games_from_json.v1')
    games = read_games()
    assert sorted(games) == sorted(p.stem for p in GAMES_DIR.glob('*.json'))
    assert len(games) >= 4
    for name, data in games.items():
        assert parse_json(srsly.json_dumps(data)) == parse_game(GAMES_DIR / f'{name}.json')


def test_random_corpus_is_deterministic():
    read = create_random_corpus(size=5, seed=1)
    first = list(read())
    assert len(first) == 5
    assert first == list(read())
    assert first != list(create_random_corpus(size=5, seed=2)())


def test_corpus_from_config():
    config = load_config(overrides={'corpus.size': 3, 'system.seed': 4})
    read = registry.resolve(config)['corpus']
    assert len(list(read())) == 3


def test_missing_config_file():
    with pytest.raises(ParseError):
        load_config('does/not/exist.cfg')


def test_run_config_defaults():
    config = RunConfig.from_config()
    assert config.tolerance == 1e-9
    assert config.decomposition_tolerance == 1e-8
    assert config.format == 'json'
    assert config.out == Path('out')
    assert config.overrides == ()
    assert isinstance(config.get_solver(), LaplacianSolver)
    assert config.get_solver().rtol == 1e-10


def test_run_config_overrides():
    config = RunConfig.from_config(tolerance=1e-6, out=None, solver_rtol=1e-7)
    assert config.tolerance == 1e-6
    assert config.out == Path('out')
    assert config.overrides == ('solver_rtol', 'tolerance')
    assert config.get_solver().rtol == 1e-7


def test_document_tolerances_yield_to_command_line():
    data = export_document(bundled('prisoners_dilemma'))
    data['tolerances'] = {'payoff': 1e-3, 'decomposition': 1e-6}
    doc = parse_json(srsly.json_dumps(data))
    assert RunConfig.from_config().for_document(doc).tolerance == 1e-3
    assert RunConfig.from_config().for_document(doc).decomposition_tolerance == 1e-6
    assert RunConfig.from_config(tolerance=1e-5).for_document(doc).tolerance == 1e-5


@pytest.mark.parametrize('env,default,expected', [
    (None, 4, 4),
    ('8', 2, 2),
    ('8', 16, 8),
    ('0', 4, 1),
    ('many', 3, 3),
])
def test_thread_count_is_capped_by_the_environment(monkeypatch, env, default, expected):
    if env is None:
        monkeypatch.delenv('SGC_THREADS', raising=False)
    else:
        monkeypatch.setenv('SGC_THREADS', env)
    assert get_threads(default) == expected


@pytest.mark.parametrize('overrides', [
    {'tolerance': -1.0},
    {'format': 'xml'},
    {'threads': 0},
])
def test_invalid_run_config(overrides):
    with pytest.raises(InputError):
        RunConfig.from_config(**overrides)
