import json

import numpy as np
from numpy.testing import assert_allclose
import pandas as pd
import pytest

from maxent_income import __version__
from maxent_income.cli import main
from maxent_income.income import buildGrid
from maxent_income.tests.datasets import mixtureSample

def writeJSON(path, document):
    path.write_text(json.dumps(document))
    return str(path)

def readCSV(path):
    with open(path) as f:
        header = json.loads(f.readline()[2:])
    return header, pd.read_csv(path, comment='#')

@pytest.fixture
def gridFile(tmp_path):
    grid = buildGrid(0, 5, 5, [1, 2, 3, 2, 1])
    return writeJSON(tmp_path / 'grid.json', grid.toDict())

def test_version(capsys):
    with pytest.raises(SystemExit) as e:
        main(['--version'])
    assert e.value.code == 0
    assert __version__ in capsys.readouterr().out

def test_count(tmp_path, capsys):
    grid = writeJSON(tmp_path / 'grid.json', {'levels': [0.5, 1.5], 'degeneracies': [1, 1]})
    occ = writeJSON(tmp_path / 'occ.json', {'counts': [2, 1]})
    assert main(['count', '--occupancy', occ, '--grid', grid, '--regime', 'monopolistic', '--oracle']) == 0
    document = json.loads(capsys.readouterr().out)
    assert document['kind'] == 'count'
    assert document['exact'] == '3'
    assert document['oracle'] == '3'
    assert_allclose(document['log_omega'], np.log(3))
    assert document['seed'] is None
    assert document['version'] == __version__

def test_count_negative(tmp_path, capsys):
    grid = writeJSON(tmp_path / 'grid.json', {'levels': [0.5, 1.5], 'degeneracies': [1, 1]})
    occ = writeJSON(tmp_path / 'occ.json', {'counts': [2, -1]})
    assert main(['count', '--occupancy', occ, '--grid', grid, '--regime', 'perfect']) == 1
    err = capsys.readouterr().err
    assert err.startswith('error:')
    assert len(err.strip().splitlines()) == 1

def test_missing_file(tmp_path, capsys):
    assert main(['count', '--occupancy', str(tmp_path / 'none.json'), '--grid', str(tmp_path / 'none.json'), '--regime', 'perfect']) == 1
    assert capsys.readouterr().err.startswith('error:')

def test_solve(tmp_path, gridFile):
    output = str(tmp_path / 'solution.json')
    assert main(['solve', '--grid', gridFile, '--n', '100', '--pi', '200', '--regime', 'monopolistic', '-o', output]) == 0
    with open(output) as f:
        document = json.load(f)
    assert document['kind'] == 'solution'
    assert document['config']['n'] == 100
    assert_allclose(np.sum(document['occupancy']), 100, rtol=1e-8)
    for key in ['alpha', 'beta', 'mu', 'temperature', 'condensate_fraction', 'grid']:
        assert key in document

    plotData = str(tmp_path / 'plot.csv')
    assert main(['emit-plot', '--artifact', output, '-o', plotData]) == 0
    header, data = readCSV(plotData)
    assert header['kind'] == 'plot_data'
    assert list(data.columns) == ['epsilon', 'occupancy']
    assert_allclose(data['epsilon'], [0.5, 1.5, 2.5, 3.5, 4.5])
    assert_allclose(data['occupancy'], document['occupancy'])

def test_solve_errors(gridFile, capsys):
    #Mean income at or above the infinite temperature mean
    assert main(['solve', '--grid', gridFile, '--n', '100', '--pi', '300', '--regime', 'monopolistic']) == 1
    assert 'error:' in capsys.readouterr().err

    assert main(['solve', '--grid', gridFile, '--n', '100', '--pi', '200', '--regime', 'monopolistic', '--tol', 'maxOuter=1']) == 1
    assert main(['solve', '--grid', gridFile, '--n', '100', '--pi', '200', '--regime', 'monopolistic', '--tol', 'unknown=1']) == 1
    with pytest.raises(SystemExit) as e:
        main(['solve', '--grid', gridFile, '--n', '100', '--pi', '200', '--regime', 'monopolistic', '--tol', 'maxOuter'])
    assert e.value.code == 2

def test_sample_needs_seed():
    with pytest.raises(SystemExit) as e:
        main(['sample', '--mode', 'discrete', '--n', '3', '--pi', '3', '--samples', '10'])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(['sample', '--mode', 'discrete', '--n', '3', '--pi', '3', '--samples', '10', '--seed', '-1'])
    assert e.value.code == 2

def test_sample_reproducible(capsys, monkeypatch):
    '''
    Same arguments and seed give byte-identical output, whatever the thread count
    '''
    argv = ['sample', '--mode', 'discrete', '--n', '3', '--pi', '3', '--samples', '100', '--streams', '4', '--seed', '5']
    assert main(argv) == 0
    first = capsys.readouterr().out
    assert main(argv) == 0
    assert capsys.readouterr().out == first

    monkeypatch.setenv('MAXENT_INCOME_THREADS', '3')
    assert main(argv) == 0
    assert capsys.readouterr().out == first

    lines = first.splitlines()
    assert lines[0].startswith('# ')
    assert json.loads(lines[0][2:])['seed'] == 5
    assert lines[1] == 'consumer_1,consumer_2,consumer_3'
    assert len(lines) == 102
    assert all(sum(float(v) for v in line.split(',')) == 3 for line in lines[2:])

def test_thread_variable(capsys, monkeypatch):
    monkeypatch.setenv('MAXENT_INCOME_THREADS', 'zero')
    assert main(['sample', '--mode', 'continuous', '--n', '2', '--pi', '1', '--samples', '10', '--seed', '1']) == 1
    assert 'MAXENT_INCOME_THREADS' in capsys.readouterr().err

def test_sample_histogram(tmp_path):
    grid = writeJSON(tmp_path / 'grid.json', {'levels': [0, 1, 2, 3], 'degeneracies': [1, 1, 1, 1]})
    histogram = str(tmp_path / 'histogram.json')
    draws = str(tmp_path / 'draws.csv')
    assert main(['sample', '--mode', 'discrete', '--n', '3', '--pi', '3', '--samples', '500', '--seed', '2',
                 '--grid', grid, '--histogram', histogram, '-o', draws]) == 0
    with open(histogram) as f:
        document = json.load(f)
    assert document['kind'] == 'histogram'
    assert document['total'] == 500
    header, data = readCSV(draws)
    assert header['kind'] == 'allocations'
    assert data.shape == (500, 3)

def test_oracle(tmp_path):
    grid = writeJSON(tmp_path / 'grid.json', {'levels': [0, 1, 2], 'degeneracies': [1, 1, 1]})
    output = str(tmp_path / 'oracle.json')
    assert main(['oracle', '--grid', grid, '--n', '2', '--pi', '2', '-o', output]) == 0
    with open(output) as f:
        document = json.load(f)
    assert document['total'] == 3
    assert document['most_probable'] == [{'occupancy': [1, 0, 1], 'count': 2}]

    plotData = str(tmp_path / 'plot.csv')
    assert main(['emit-plot', '--artifact', output, '-o', plotData]) == 0
    _, data = readCSV(plotData)
    assert list(data.columns) == ['occupancy_id', 'count', 'occupancy']
    assert sorted(data['count']) == [1, 2]

def test_pareto(tmp_path):
    incomes = str(tmp_path / 'incomes.csv')
    assert main(['pareto', 'generate', '--nodes', '5000', '--m', '2', '--seed', '1', '-o', incomes]) == 0
    header, data = readCSV(incomes)
    assert header['kind'] == 'incomes'
    assert len(data) == 5000
    assert np.amin(data['income']) >= 2

    output = str(tmp_path / 'tail.json')
    assert main(['pareto', 'fit', '--input', incomes, '-o', output]) == 0
    with open(output) as f:
        document = json.load(f)
    assert document['kind'] == 'tail_fit'
    assert document['gamma'] > 1
    assert document['gamma_below_one'] is False
    assert 'ks_band' not in document

    plotData = str(tmp_path / 'plot.csv')
    assert main(['emit-plot', '--artifact', output, '-o', plotData]) == 0
    _, data = readCSV(plotData)
    assert list(data.columns) == ['income', 'empirical_ccdf', 'tail_ccdf']

    with pytest.raises(SystemExit) as e:
        main(['pareto', 'fit', '--input', incomes, '--bootstrap', '10'])
    assert e.value.code == 2

def test_fit(tmp_path):
    incomes = tmp_path / 'incomes.csv'
    pd.DataFrame({'income': mixtureSample(5000, 3)}).to_csv(incomes, index=False)
    output = str(tmp_path / 'fit.json')
    curves = str(tmp_path / 'curves.csv')
    assert main(['fit', '--input', str(incomes), '--bootstrap', '0', '--plot-data', curves, '-o', output]) == 0
    with open(output) as f:
        document = json.load(f)
    assert document['kind'] == 'two_class_fit'
    assert document['fit']['body_kind'] == 'boltzmann'
    assert document['fit']['body_ks_band'] is None
    assert document['fit']['tail']['gamma_below_one'] is False

    plotData = str(tmp_path / 'plot.csv')
    assert main(['emit-plot', '--artifact', output, '-o', plotData]) == 0
    _, fromArtifact = readCSV(plotData)
    _, direct = readCSV(curves)
    assert list(fromArtifact.columns) == ['income', 'empirical_ccdf', 'body_ccdf', 'tail_ccdf']
    assert_allclose(fromArtifact['income'], direct['income'], rtol=0)

def test_fit_usage(tmp_path):
    incomes = tmp_path / 'incomes.csv'
    incomes.write_text('income\n1\n2\n')
    with pytest.raises(SystemExit) as e:
        main(['fit', '--input', str(incomes)])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(['fit', '--input', str(incomes), '--body', 'bose-einstein', '--bootstrap', '0'])
    assert e.value.code == 2
    assert main(['fit', '--input', str(incomes), '--bootstrap', '0']) == 1

def test_emit_plot_errors(tmp_path, capsys):
    artifact = writeJSON(tmp_path / 'count.json', {'kind': 'count'})
    assert main(['emit-plot', '--artifact', artifact]) == 1
    assert 'Unrecognized artifact kind' in capsys.readouterr().err

    artifact = writeJSON(tmp_path / 'solution.json', {'kind': 'solution'})
    assert main(['emit-plot', '--artifact', artifact]) == 1

    path = tmp_path / 'broken.json'
    path.write_text('{not json')
    assert main(['emit-plot', '--artifact', str(path)]) == 1
