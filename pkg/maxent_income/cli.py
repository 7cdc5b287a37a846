'''
Command line interface

    maxent-income count      ln(Omega) and exact Omega of an occupancy
    maxent-income solve      most probable occupancy for (grid, N, Pi, regime)
    maxent-income sample     uniform draws from the allocation ensemble
    maxent-income oracle     exhaustive macrostate tallies of a small ensemble
    maxent-income pareto     preferential attachment incomes and Pareto tail fits
    maxent-income fit        two-class (body + Pareto tail) fit of an income sample
    maxent-income emit-plot  flat CSV of plot series from a result artifact

Exit status is 0 on success, 1 for domain errors (infeasible problems, guards,
unreadable or malformed files) and 2 for usage errors
'''
import argparse
from contextlib import contextmanager
import json
from multiprocessing.pool import ThreadPool
import os
import sys
import warnings

import numpy as np
import pandas as pd

from maxent_income import __version__
from maxent_income.Errors import DomainError, MaxEntIncomeError
from maxent_income.income import EconomyParams, IncomeGrid, OccupancyVector
from maxent_income.statistics import Regime, MaxEntSolver, logOmega, omegaExact, oracleCount
from maxent_income.ensemble import EnsembleMode, EnsembleSpec, checkSeed, drawSamples, histogramRecords
from maxent_income.ensemble import macrostateHistogram, mostProbableMacrostate
from maxent_income.fitting import BodyKind, TailModel, TwoClassFit, calibrateTailKS, ccdfArrays, degreesToIncome
from maxent_income.fitting import fitPowerLaw, fitTwoClass, generatePreferentialAttachment, loadIncomeCSV, twoClassCurves

THREADS_VARIABLE = 'MAXENT_INCOME_THREADS'

FILE_SCHEMAS = '''file schemas:
  grid JSON        {"levels": [...], "degeneracies": [...], "bin_width": w (optional)}
  occupancy JSON   {"counts": [...]}
  income CSV       single column with header "income", lines starting with # are ignored

every artifact carries {"kind", "seed", "config", "version"}; CSV artifacts carry them
on a leading "# {...}" line

emit-plot columns:
  solution       epsilon, occupancy
  two_class_fit  income, empirical_ccdf, body_ccdf, tail_ccdf
  tail_fit       income, empirical_ccdf, tail_ccdf
  histogram      occupancy_id, count, occupancy

environment:
  MAXENT_INCOME_THREADS  number of worker threads (defaults to 1)
'''

def _seed(text):
    try:
        return checkSeed(int(text))
    except (ValueError, DomainError):
        raise argparse.ArgumentTypeError('seed must be an integer in [0, 2^64), got {}'.format(text))

def _setting(text):
    key, sep, value = text.partition('=')
    if not sep or not key:
        raise argparse.ArgumentTypeError('expected KEY=VALUE, got {}'.format(text))
    return key.strip(), value.strip()

def _jsonable(value):
    '''
    Replaces nan and inf by None so the document is strict JSON
    '''
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (float, np.floating)):
        return float(value) if np.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value

def _provenance(args):
    config = {k: v for k, v in vars(args).items() if k != 'func'}
    if config.get('tol') is not None:
        config['tol'] = dict(config['tol'])
    return {'seed': getattr(args, 'seed', None), 'config': config, 'version': __version__}

def _writeJSON(args, kind, document):
    document = dict(document)
    document['kind'] = kind
    document.update(_provenance(args))
    text = json.dumps(_jsonable(document), indent=2, sort_keys=True, allow_nan=False) + '\n'
    if args.output is None:
        sys.stdout.write(text)
    else:
        with open(args.output, 'w') as f:
            f.write(text)

def _writeCSV(args, kind, data, path = None):
    header = dict(_provenance(args), kind=kind)
    path = args.output if path is None else path
    f = sys.stdout if path is None else open(path, 'w', newline='')
    try:
        f.write('# ' + json.dumps(_jsonable(header), sort_keys=True) + '\n')
        data.to_csv(f, index=False, float_format='%.17g', lineterminator='\n')
    finally:
        if f is not sys.stdout:
            f.close()

@contextmanager
def _pool():
    '''
    ThreadPool sized by MAXENT_INCOME_THREADS, None for a single thread
    '''
    text = os.environ.get(THREADS_VARIABLE, '1')
    try:
        threads = int(text)
    except ValueError:
        raise DomainError('{} must be a positive integer, got "{}"'.format(THREADS_VARIABLE, text))
    if threads < 1:
        raise DomainError('{} must be a positive integer, got "{}"'.format(THREADS_VARIABLE, text))
    if threads == 1:
        yield None
    else:
        with ThreadPool(threads) as pool:
            yield pool

def runCount(args):
    occ = OccupancyVector.load(args.occupancy)
    grid = IncomeGrid.load(args.grid)
    regime = Regime.fromName(args.regime)
    document = {'regime': regime.name.lower(), 'log_omega': logOmega(occ, grid, regime), 'exact': None}
    if occ.isInteger:
        document['exact'] = str(omegaExact(occ, grid, regime).exactOmega)
    if args.oracle:
        document['oracle'] = str(oracleCount(occ, grid, regime))
    _writeJSON(args, 'count', document)

def runSolve(args):
    grid = IncomeGrid.load(args.grid)
    solver = MaxEntSolver(grid, Regime.fromName(args.regime))
    if args.tol:
        solver.setTolerances(**dict(args.tol))
    solution = solver.solve(EconomyParams(args.n, args.pi), verbose=args.verbose)
    document = solution.toDict()
    document['grid'] = grid.toDict()
    _writeJSON(args, 'solution', document)

def runSample(args):
    mode = EnsembleMode.SAMPLE_CONTINUOUS if args.mode == 'continuous' else EnsembleMode.SAMPLE_DISCRETE
    spec = EnsembleSpec(EconomyParams(args.n, args.pi, args.quantum), mode, args.samples, args.seed, args.streams)
    if args.histogram is not None and args.grid is None:
        raise DomainError('--histogram needs --grid')
    with _pool() as pool:
        draws = drawSamples(spec, pool)
    columns = ['consumer_{}'.format(i+1) for i in range(spec.params.nConsumers)]
    _writeCSV(args, 'allocations', pd.DataFrame(draws, columns=columns))
    if args.histogram is not None:
        grid = IncomeGrid.load(args.grid)
        with _pool() as pool:
            histogram = macrostateHistogram(spec, grid, pool)
        histArgs = argparse.Namespace(**dict(vars(args), output=args.histogram))
        _writeJSON(histArgs, 'histogram', {'mode': mode.name.lower(), 'total': int(sum(histogram.values())),
                                           'histogram': histogramRecords(histogram)})

def runOracle(args):
    mode = EnsembleMode.ENUMERATE_LABELED if args.labeling == 'labeled' else EnsembleMode.ENUMERATE_UNLABELED
    spec = EnsembleSpec(EconomyParams(args.n, args.pi, args.quantum), mode)
    grid = IncomeGrid.load(args.grid)
    histogram = macrostateHistogram(spec, grid)
    best = [{'occupancy': list(occ.key()), 'count': c} for occ, c in mostProbableMacrostate(spec, grid)]
    _writeJSON(args, 'histogram', {'mode': mode.name.lower(), 'total': int(sum(histogram.values())),
                                   'histogram': histogramRecords(histogram), 'most_probable': best})

def runParetoGenerate(args):
    graph = generatePreferentialAttachment(args.nodes, args.m, args.seed)
    _writeCSV(args, 'incomes', pd.DataFrame({'income': degreesToIncome(graph, args.scale)}))

def runParetoFit(args):
    sample = loadIncomeCSV(args.input)
    with _pool() as pool:
        model = fitPowerLaw(sample.values, xmin=args.xmin, minTail=args.min_tail, pool=pool)
        document = model.toDict()
        document['input'] = os.path.abspath(args.input)
        if args.bootstrap > 0:
            document['ks_band'] = calibrateTailKS(model, args.bootstrap, args.seed, pool=pool)
            document['weak_tail'] = bool(model.ks > document['ks_band'])
    _writeJSON(args, 'tail_fit', document)

def runFit(args):
    sample = loadIncomeCSV(args.input)
    bodyKind = BodyKind.fromName(args.body)
    grid = None if args.grid is None else IncomeGrid.load(args.grid)
    with _pool() as pool:
        fit = fitTwoClass(sample, bodyKind, grid, pool=pool, bootstrap=args.bootstrap, seed=0 if args.seed is None else args.seed)
    _writeJSON(args, 'two_class_fit', {'fit': fit.toDict(), 'input': os.path.abspath(args.input)})
    if args.plot_data is not None:
        _writeCSV(args, 'two_class_curves', twoClassCurves(fit, sample), args.plot_data)

def _plotData(document):
    kind = document.get('kind')
    if kind == 'solution':
        grid = IncomeGrid.fromDict(document['grid'])
        return pd.DataFrame({'epsilon': grid.levels, 'occupancy': np.array(document['occupancy'], dtype=np.float64)})
    if kind == 'two_class_fit':
        return twoClassCurves(TwoClassFit.fromDict(document['fit']), loadIncomeCSV(document['input']))
    if kind == 'tail_fit':
        model = TailModel.fromDict(document)
        x, ccdf = ccdfArrays(loadIncomeCSV(document['input']).values)
        tail = np.where(x >= model.xmin, model.ccdf(np.maximum(x, model.xmin)), np.nan)
        return pd.DataFrame({'income': x, 'empirical_ccdf': ccdf, 'tail_ccdf': tail})
    if kind == 'histogram':
        records = document['histogram']
        return pd.DataFrame({'occupancy_id': np.arange(len(records)), 'count': [r['count'] for r in records],
                             'occupancy': [' '.join(str(a) for a in r['occupancy']) for r in records]})
    raise DomainError('Unrecognized artifact kind "{}"'.format(kind))

def runEmitPlot(args):
    with open(args.artifact) as f:
        try:
            document = json.load(f)
        except json.JSONDecodeError as e:
            raise DomainError('{} is not a JSON artifact: {}'.format(args.artifact, e))
    if not isinstance(document, dict):
        raise DomainError('{} is not a result artifact'.format(args.artifact))
    try:
        data = _plotData(document)
    except KeyError as e:
        raise DomainError('Artifact {} is missing field {}'.format(args.artifact, e))
    _writeCSV(args, 'plot_data', data)

def buildParser():
    parser = argparse.ArgumentParser(prog='maxent-income', description='Statistical mechanics of income distributions',
                                     epilog=FILE_SCHEMAS, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument('--version', action='version', version='%(prog)s {}'.format(__version__))
    subparsers = parser.add_subparsers(dest='command', required=True)

    def addOutput(p):
        p.add_argument('-o', '--output', default=None, help='output path (defaults to standard output)')

    p = subparsers.add_parser('count', help='ln(Omega) of an occupancy')
    p.add_argument('--occupancy', required=True, help='occupancy JSON')
    p.add_argument('--grid', required=True, help='grid JSON')
    p.add_argument('--regime', required=True, choices=['perfect', 'monopolistic'])
    p.add_argument('--oracle', action='store_true', help='also count by explicit enumeration (N <= 12, sum(g) <= 12)')
    addOutput(p)
    p.set_defaults(func=runCount, stochastic=False)

    p = subparsers.add_parser('solve', help='most probable occupancy')
    p.add_argument('--grid', required=True, help='grid JSON')
    p.add_argument('--n', required=True, type=int, help='number of consumers')
    p.add_argument('--pi', required=True, type=float, help='total income')
    p.add_argument('--regime', required=True, choices=['perfect', 'monopolistic'])
    p.add_argument('--tol', action='append', type=_setting, default=None, metavar='KEY=VALUE',
                   help='solver setting override (constraintTol, innerTol, outerTol, maxOuter, maxInner, condensateOffset, betaRange)')
    p.add_argument('--verbose', action='store_true', help='print outer iterations')
    addOutput(p)
    p.set_defaults(func=runSolve, stochastic=False)

    p = subparsers.add_parser('sample', help='uniform draws of allocations (CSV, one row per allocation)')
    p.add_argument('--mode', required=True, choices=['continuous', 'discrete'])
    p.add_argument('--n', required=True, type=int, help='number of consumers')
    p.add_argument('--pi', required=True, type=float, help='total income')
    p.add_argument('--quantum', type=float, default=1.0, help='income quantum for discrete draws')
    p.add_argument('--samples', required=True, type=int, help='number of draws')
    p.add_argument('--streams', type=int, default=1, help='number of random sub-streams')
    p.add_argument('--seed', type=_seed, default=None)
    p.add_argument('--grid', default=None, help='grid JSON for the histogram')
    p.add_argument('--histogram', default=None, help='path for the macrostate histogram JSON')
    addOutput(p)
    p.set_defaults(func=runSample, stochastic=True)

    p = subparsers.add_parser('oracle', help='exhaustive macrostate tallies')
    p.add_argument('--grid', required=True, help='grid JSON')
    p.add_argument('--n', required=True, type=int, help='number of consumers')
    p.add_argument('--pi', required=True, type=float, help='total income')
    p.add_argument('--quantum', type=float, default=1.0, help='income quantum')
    p.add_argument('--labeling', choices=['labeled', 'unlabeled'], default='labeled')
    addOutput(p)
    p.set_defaults(func=runOracle, stochastic=False)

    pareto = subparsers.add_parser('pareto', help='Pareto tail generation and fitting')
    actions = pareto.add_subparsers(dest='action', required=True)
    p = actions.add_parser('generate', help='incomes proportional to preferential attachment degrees')
    p.add_argument('--nodes', required=True, type=int)
    p.add_argument('--m', required=True, type=int, help='edges per arriving node')
    p.add_argument('--scale', type=float, default=1.0, help='income per unit degree')
    p.add_argument('--seed', type=_seed, default=None)
    addOutput(p)
    p.set_defaults(func=runParetoGenerate, stochastic=True)
    p = actions.add_parser('fit', help='Hill estimate with KS selected xmin')
    p.add_argument('--input', required=True, help='income CSV')
    p.add_argument('--xmin', type=float, default=None, help='fixed tail threshold')
    p.add_argument('--min-tail', type=int, default=50)
    p.add_argument('--bootstrap', type=int, default=0, help='bootstrap resamples for the KS band (needs --seed)')
    p.add_argument('--seed', type=_seed, default=None)
    addOutput(p)
    p.set_defaults(func=runParetoFit, stochastic=False)

    p = subparsers.add_parser('fit', help='two-class fit of an income sample')
    p.add_argument('--input', required=True, help='income CSV')
    p.add_argument('--body', choices=['boltzmann', 'bose-einstein'], default='boltzmann')
    p.add_argument('--grid', default=None, help='grid JSON, required for the bose-einstein body')
    p.add_argument('--bootstrap', type=int, default=200, help='bootstrap resamples for the KS bands (needs --seed unless 0)')
    p.add_argument('--seed', type=_seed, default=None)
    p.add_argument('--plot-data', default=None, help='path for the CCDF plot data CSV')
    addOutput(p)
    p.set_defaults(func=runFit, stochastic=False)

    p = subparsers.add_parser('emit-plot', help='plot series CSV from a result artifact')
    p.add_argument('--artifact', required=True, help='result JSON from solve, fit, pareto fit, sample or oracle')
    addOutput(p)
    p.set_defaults(func=runEmitPlot, stochastic=False)
    return parser

def _showWarning(message, category, filename, lineno, file = None, line = None):
    sys.stderr.write('warning: {}\n'.format(message))

def main(argv = None):
    parser = buildParser()
    args = parser.parse_args(argv)
    needsSeed = args.stochastic or getattr(args, 'bootstrap', 0) > 0
    if needsSeed and args.seed is None:
        parser.error('--seed is required for {}'.format(args.command))
    if getattr(args, 'bootstrap', 0) < 0:
        parser.error('--bootstrap must be >= 0')
    if args.command == 'fit' and args.body == 'bose-einstein' and args.grid is None:
        parser.error('--grid is required for the bose-einstein body')

    with warnings.catch_warnings():
        warnings.showwarning = _showWarning
        try:
            args.func(args)
        except (MaxEntIncomeError, OSError, ValueError) as e:
            sys.stderr.write('error: {}\n'.format(' '.join(str(e).split())))
            return 1
    return 0
