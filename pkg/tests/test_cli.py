"""
Tests for the command-line front end
"""

import json

import pytest

from src.cli import (EXIT_CAP, EXIT_FAILED, EXIT_MODEL, EXIT_OK, EXIT_TIMEOUT, EXIT_USAGE, RunReport,
                     main, parse_objective, run)
from src.model_io import load_model


def _report(capsys) -> dict:
    return json.loads(capsys.readouterr().out)


@pytest.fixture
def fig1_file(tmp_path, capsys):
    path = tmp_path / "fig1.json"
    assert main(['gen', 'fig1', '-o', str(path)]) == EXIT_OK
    capsys.readouterr()
    return path


class TestSolve:
    def test_reach(self, fig1_file, capsys):
        assert main(['solve', '--model', str(fig1_file), '--objective', 'reach:target']) == EXIT_OK
        report = _report(capsys)
        assert report['winning'] == ['s5']
        assert report['trace'] == [['s3', 's4'], ['s2'], ['s1']]
        assert report['procedure'] == 'as_reach'
        assert report['oracle_calls']['force_calls'] > 0

    @pytest.mark.parametrize("flags", [[], ['--efficient']])
    def test_parity(self, fig1_file, capsys, flags):
        code = main(['solve', '--model', str(fig1_file), '--objective', 'parity'] + flags)
        assert code == EXIT_OK
        report = _report(capsys)
        assert report['winning'] == ['s1', 's5']
        assert ('policy_oracle_calls' in report) == bool(flags)

    def test_policy_file(self, fig1_file, tmp_path, capsys):
        policy = tmp_path / "out" / "policy.json"
        main(['solve', '--model', str(fig1_file), '--objective', 'parity', '--policy', str(policy)])
        assert json.loads(policy.read_text()) == _report(capsys)['policy']

    def test_float_mode(self, fig1_file, capsys):
        code = main(['solve', '--model', str(fig1_file), '--objective', 'reach:target', '--arith', 'float'])
        assert code == EXIT_OK
        report = _report(capsys)
        assert report['arith'] == 'float'
        assert report['winning'] == ['s5']

    def test_report_is_deterministic(self, fig1_file, capsys):
        argv = ['solve', '--model', str(fig1_file), '--objective', 'parity']
        main(argv)
        first = _report(capsys)
        main(argv)
        second = _report(capsys)
        first.pop('wall_time_ms')
        second.pop('wall_time_ms')
        assert first == second

    def test_timeout(self, fig1_file, capsys):
        code = main(['solve', '--model', str(fig1_file), '--objective', 'parity', '--timeout', '1e-9'])
        assert code == EXIT_TIMEOUT
        assert 'Timed out' in _report(capsys)['error']

    def test_batch(self, tmp_path, capsys):
        models = tmp_path / "models"
        main(['gen', 'fig1', '-o', str(models / "a.json")])
        main(['gen', 'chain', '--k', '4', '-o', str(models / "b.json")])
        capsys.readouterr()
        code = main(['solve', '--models-dir', str(models), '--objective', 'reach:target'])
        assert code == EXIT_OK
        report = _report(capsys)
        assert [r['model'] for r in report['records']] == ['a.json', 'b.json']
        assert all(r['status'] == 'ok' for r in report['records'])
        assert report['summary'][0]['count'] == 2
        assert report['summary'][0]['objective'] == 'reach:target'

    def test_batch_with_broken_model(self, tmp_path, capsys):
        models = tmp_path / "models"
        main(['gen', 'fig1', '-o', str(models / "a.json")])
        (models / "b.json").write_text("{}")
        capsys.readouterr()
        code = main(['solve', '--models-dir', str(models), '--objective', 'parity'])
        assert code == EXIT_MODEL
        statuses = [r['status'] for r in _report(capsys)['records']]
        assert statuses == ['ok', 'error']


class TestGenerate:
    def test_frozen_lake(self, tmp_path, capsys):
        path = tmp_path / "lake.json"
        code = main(['gen', 'frozenlake', '--n', '3', '--p', '2', '--rmax', '1/2', '--seed', '4', '-o', str(path)])
        assert code == EXIT_OK
        report = _report(capsys)
        assert report['output'] == str(path)
        assert report['states'] == len(load_model(path).live)

    def test_same_seed_same_bytes(self, tmp_path, capsys):
        argv = ['gen', 'frozenlake', '--n', '4', '--seed', '9', '--objective', 'parity']
        main(argv + ['-o', str(tmp_path / "a.json")])
        main(argv + ['-o', str(tmp_path / "b.json")])
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_invalid_generator_parameters(self, tmp_path, capsys):
        assert main(['gen', 'frozenlake', '--n', '1', '-o', str(tmp_path / "x.json")]) == EXIT_USAGE

    def test_summary_goes_to_stderr(self, tmp_path, capsys):
        main(['gen', 'chain', '--k', '2', '--summary', '-o', str(tmp_path / "c.json")])
        captured = capsys.readouterr()
        assert json.loads(captured.out)['states'] == 4
        assert 'states' in captured.err


class TestCheckAndVerify:
    @pytest.mark.parametrize("objective", ['reach:target', 'parity'])
    def test_check_agrees(self, fig1_file, capsys, objective):
        assert main(['check', '--model', str(fig1_file), '--objective', objective]) == EXIT_OK
        report = _report(capsys)
        assert report['agree'] is True
        assert report['differing'] == []
        assert report['reference_winning'] == report['winning']

    @pytest.mark.parametrize("objective", ['reach:target', 'parity'])
    def test_check_timeout(self, fig1_file, capsys, objective):
        code = main(['check', '--model', str(fig1_file), '--objective', objective, '--timeout', '1e-9'])
        assert code == EXIT_TIMEOUT
        assert 'Timed out' in _report(capsys)['error']

    def test_verify(self, fig1_file, tmp_path, capsys):
        good = tmp_path / "good.json"
        good.write_text(json.dumps({'s1': 'b', 's5': 'b'}))
        assert main(['verify', '--model', str(fig1_file), '--policy', str(good), '--objective', 'parity']) == EXIT_OK
        assert _report(capsys)['verified'] is True

        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({'s1': 'a'}))
        assert main(['verify', '--model', str(fig1_file), '--policy', str(bad), '--objective', 'parity']) == EXIT_FAILED
        assert _report(capsys)['verified'] is False

    def test_support_cap_from_environment(self, fig1_file, capsys, monkeypatch):
        monkeypatch.setenv('RMDPQ_SUPPORT_CAP', '1')
        assert main(['check', '--model', str(fig1_file), '--objective', 'parity']) == EXIT_CAP

    def test_support_cap_from_config_file(self, fig1_file, tmp_path, capsys):
        config = tmp_path / "config.yaml"
        config.write_text("solver:\n  support_cap: 1\n")
        code = main(['check', '--model', str(fig1_file), '--objective', 'parity', '--config', str(config)])
        assert code == EXIT_CAP


class TestIngest:
    def test_ingest_then_solve(self, tmp_path, capsys):
        tra = tmp_path / "m.tra"
        tra.write_text("0 go 1 1/2\n0 go 0 1/2\n1 stay 1 1\n")
        lab = tmp_path / "m.lab"
        lab.write_text("1: goal\n")
        out = tmp_path / "m.json"
        code = main(['ingest', '--tra', str(tra), '--lab', str(lab), '--family', 'l2',
                     '--radius', '1/10', '-o', str(out)])
        assert code == EXIT_OK
        capsys.readouterr()
        assert main(['solve', '--model', str(out), '--objective', 'reach:goal']) == EXIT_OK
        assert _report(capsys)['winning'] == ['0', '1']

    def test_unknown_family(self, tmp_path, capsys):
        tra = tmp_path / "m.tra"
        tra.write_text("0 a 0 1\n")
        code = main(['ingest', '--tra', str(tra), '--family', 'kl', '--radius', '0', '-o', str(tmp_path / "m.json")])
        assert code == EXIT_USAGE

    def test_malformed_file(self, tmp_path, capsys):
        tra = tmp_path / "m.tra"
        tra.write_text("0 a 0 0.9\n")
        code = main(['ingest', '--tra', str(tra), '--radius', '0', '-o', str(tmp_path / "m.json")])
        assert code == EXIT_MODEL


class TestErrors:
    @pytest.mark.parametrize("argv", [
        [],
        ['explode'],
        ['solve', '--model', 'x.json'],
        ['gen', 'fig1'],
        ['solve', '--model', 'x.json', '--objective', 'parity', '--arith', 'interval'],
    ])
    def test_usage(self, argv, capsys):
        assert main(argv) == EXIT_USAGE
        assert 'usage error' in _report(capsys)['error']

    def test_bad_objective(self, fig1_file, capsys):
        assert main(['solve', '--model', str(fig1_file), '--objective', 'safety']) == EXIT_USAGE

    def test_unknown_label(self, fig1_file, capsys):
        assert main(['solve', '--model', str(fig1_file), '--objective', 'reach:nowhere']) == EXIT_MODEL

    def test_missing_file(self, tmp_path, capsys):
        code = main(['solve', '--model', str(tmp_path / "absent.json"), '--objective', 'parity'])
        assert code == EXIT_MODEL

    def test_schema_error(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({'schema': 'rmdpq-1', 'states': []}))
        assert main(['solve', '--model', str(path), '--objective', 'parity']) == EXIT_MODEL

    def test_invalid_model(self, fig1_file, capsys):
        document = json.loads(fig1_file.read_text())
        document['transitions'][0]['center'] = ['1/2', '2/5']
        fig1_file.write_text(json.dumps(document))
        for command in ('solve', 'check'):
            assert main([command, '--model', str(fig1_file), '--objective', 'parity']) == EXIT_MODEL
            assert 'center not a distribution' in _report(capsys)['error']

    def test_run_returns_report(self, fig1_file, capsys):
        report, code = run(['solve', '--model', str(fig1_file), '--objective', 'reach:target'])
        assert isinstance(report, RunReport)
        assert code == EXIT_OK
        assert list(report.to_dict())[0] == 'command'

    def test_parse_objective(self, fig1_model):
        assert parse_objective('reach:target', fig1_model).target == fig1_model.label('target')
