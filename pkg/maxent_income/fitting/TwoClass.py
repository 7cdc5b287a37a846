'''
Two-class fit of income samples

The lower class (body) follows a Boltzmann (exponential) or Bose-Einstein occupancy and the
upper class (tail) follows a Pareto law. The crossover between them is chosen from a scan over
the 50th to 99th percentiles, minimizing the larger of the two KS distances

The Boltzmann body is fitted to the unbinned body by maximum likelihood of the truncated
exponential. The Bose-Einstein body is a level occupancy, so it is fitted by least squares
to the counts on a user supplied grid

All fits are carried out on incomes divided by a sample-derived scale (the body mean or the
bin width), so multiplying every income by a power of two rescales the fit exactly
'''
from dataclasses import dataclass
from enum import Enum
from typing import Optional
import warnings

import numpy as np
import pandas as pd
from scipy.optimize import least_squares
from scipy.stats import kstest

from maxent_income.Errors import ConvergenceError, DomainError
from maxent_income.ensemble.Random import spawnGenerators, generator
from maxent_income.fitting.ParetoTail import TailModel, ccdfArrays, fitPowerLaw, _paretoDraws
from maxent_income.solver import RootSolver, SolverType

#Minimum number of observations in the body and in the tail
MIN_BODY = 50
MIN_TAIL = 50
#Minimum number of populated bins for the Bose-Einstein body
MIN_BINS = 5
#Percentile scan for the crossover
CROSSOVER_PERCENTILES = np.linspace(50, 99, 199)
#Upper limit on T / mean(body) when the body is flatter than any exponential
MAX_REDUCED_TEMPERATURE = 1e6

class BodyKind(Enum):
    BOLTZMANN = 0
    BOSE_EINSTEIN = 1

    @classmethod
    def fromName(cls, name):
        '''
        Parses 'boltzmann' or 'bose-einstein'
        '''
        try:
            return cls[name.strip().upper().replace('-', '_')]
        except KeyError:
            raise DomainError('Unknown body kind "{}", expected "boltzmann" or "bose-einstein"'.format(name))

    @property
    def label(self):
        return self.name.lower().replace('_', '-')

@dataclass(frozen=True)
class IncomeSample:
    '''
    Parameters
    ----------
    values : array of float
        Positive incomes
    sourceLabel : str
    '''
    values: np.ndarray
    sourceLabel: str = ''

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).ravel()
        if len(values) == 0:
            raise DomainError('Income sample is empty')
        if np.any(~(values > 0)) or np.any(~np.isfinite(values)):
            bad = int(np.argmax(~(values > 0) | ~np.isfinite(values)))
            raise DomainError('Income {} = {} must be positive and finite'.format(bad, values[bad]))
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    def __len__(self):
        return len(self.values)

def _values(sample):
    if isinstance(sample, IncomeSample):
        return sample.values
    return IncomeSample(sample).values

def loadIncomeCSV(path):
    '''
    Reads a single "income" column (header required, lines starting with # are ignored)

    Parameters
    ----------
    path : str

    Returns
    -------
    IncomeSample
    '''
    try:
        data = pd.read_csv(path, comment='#', dtype=str, skip_blank_lines=True)
    except pd.errors.EmptyDataError:
        raise DomainError('Income file {} is empty'.format(path))
    if 'income' not in [c.strip() for c in data.columns]:
        raise DomainError('Income file {} needs an "income" header, found {}'.format(path, list(data.columns)))
    column = data[data.columns[[c.strip() for c in data.columns].index('income')]]
    if len(column) == 0:
        raise DomainError('Income file {} has no rows'.format(path))
    values = pd.to_numeric(column.str.strip(), errors='coerce')
    malformed = np.flatnonzero(values.isna().to_numpy())
    if len(malformed) > 0:
        raise DomainError('Malformed income at row(s) {} in {}'.format(', '.join(str(r+1) for r in malformed[:10]), path))
    values = values.to_numpy(dtype=np.float64)
    nonPositive = np.flatnonzero(~(values > 0))
    if len(nonPositive) > 0:
        raise DomainError('Non-positive income at row(s) {} in {}'.format(', '.join(str(r+1) for r in nonPositive[:10]), path))
    return IncomeSample(values, str(path))

def empiricalCCDF(sample):
    '''
    Fraction of the sample at or above each unique value

    Returns
    -------
    (x, ccdf) arrays over sorted unique values, ccdf[0] = 1
    '''
    return ccdfArrays(_values(sample))

@dataclass(frozen=True)
class BodyFit:
    '''
    Fitted lower class

    Parameters
    ----------
    kind : BodyKind
    temperature : float
    mu : float
        Bose-Einstein only (nan for Boltzmann)
    amplitude : float
        Least squares scale C of the Bose-Einstein counts (1 for Boltzmann)
    ks : float
    nBody : int
    upperCut : float
    boundary : bool
        True if the optimum lies on the edge of the search range
    edges : array (optional)
        Bose-Einstein only, bin edges used in the fit
    masses : array (optional)
        Bose-Einstein only, fitted fraction of the body in each bin
    '''
    kind: BodyKind
    temperature: float
    mu: float
    amplitude: float
    ks: float
    nBody: int
    upperCut: float
    boundary: bool = False
    edges: Optional[np.ndarray] = None
    masses: Optional[np.ndarray] = None

    def ccdf(self, x):
        '''
        Fraction of the body at or above x
        '''
        x = np.asarray(x, dtype=np.float64)
        if self.kind == BodyKind.BOLTZMANN:
            T, c = self.temperature, self.upperCut
            if np.isinf(c):
                return np.exp(-np.maximum(x, 0) / T)
            return np.clip((np.exp(-np.maximum(x, 0) / T) - np.exp(-c / T)) / -np.expm1(-c / T), 0, 1)
        atEdges = np.append(np.cumsum(self.masses[::-1])[::-1], 0)
        return np.interp(x, self.edges, atEdges, left=1, right=0)

    def draw(self, rng, n):
        '''
        n draws from the fitted body
        '''
        if self.kind == BodyKind.BOLTZMANN:
            u = rng.random(n)
            if np.isinf(self.upperCut):
                return -self.temperature * np.log1p(-u)
            return -self.temperature * np.log1p(u * np.expm1(-self.upperCut / self.temperature))
        counts = rng.multinomial(n, self.masses)
        bins = np.repeat(np.arange(len(counts)), counts)
        return rng.uniform(self.edges[bins], self.edges[bins+1])

def _truncatedExponentialKS(y, tau, cut):
    if np.isinf(cut):
        cdf = lambda x: -np.expm1(-x / tau)
    else:
        cdf = lambda x: np.expm1(-x / tau) / np.expm1(-cut / tau)
    return float(kstest(y, cdf).statistic)

def fitBoltzmannBody(sample, upperCut = np.inf, minBody = MIN_BODY):
    '''
    Maximum likelihood truncated exponential on (0, upperCut)

    T solves mean = T - c / (exp(c/T) - 1), found by bisection on ln(T) to 1e-10.
    For c -> infinity, T = mean. If mean >= c/2 no finite T exists, T is set to the
    search limit and the fit is flagged as a boundary solution

    Parameters
    ----------
    sample : IncomeSample or array
    upperCut : float (defaults to inf)
        Observations below upperCut form the body
    minBody : int (defaults to 50)

    Returns
    -------
    BodyFit
    '''
    values = _values(sample)
    body = values[values < upperCut]
    if len(body) < minBody:
        raise DomainError('Only {} observations below {}, need {}'.format(len(body), upperCut, minBody))
    if np.all(body == body[0]):
        raise DomainError('Degenerate body: every observation equals {}'.format(body[0]))

    scale = np.mean(body)
    y = body / scale
    cut = upperCut / scale
    boundary = False
    if np.isinf(cut):
        tau = 1.0
    elif cut <= 2:
        tau = MAX_REDUCED_TEMPERATURE
        boundary = True
        warnings.warn('Body is not decreasing below {}, temperature set to the search limit'.format(upperCut), UserWarning)
    else:
        def meanResidual(v):
            tau = np.exp(v)
            with np.errstate(over='ignore'):
                return tau - cut / np.expm1(cut / tau) - 1
        solver = RootSolver(SolverType.BISECTION, xtol=1e-10)
        a, b, _, _ = solver.bracket(meanResidual, 0, 0, np.log(MAX_REDUCED_TEMPERATURE), increasing=True, geometric=False)
        tau = np.exp(solver.solve(meanResidual, a, b))
    ks = _truncatedExponentialKS(y, tau, cut)
    return BodyFit(BodyKind.BOLTZMANN, float(tau * scale), np.nan, 1.0, ks, len(body), float(upperCut), boundary)

def fitBoseEinsteinBody(sample, grid, upperCut = np.inf, minBins = MIN_BINS):
    '''
    Least squares fit of binned counts to C * (g_k - 1) / (exp((eps_k - mu) / T) - 1)

    Only bins entirely below upperCut are used. C is solved in closed form for each (mu, T),
    and (ln(eps_1 - mu), ln(T)) are seeded from a log-spaced grid then refined by a
    trust region Gauss-Newton (scipy least_squares) to a step tolerance of 1e-8

    Parameters
    ----------
    sample : IncomeSample or array
    grid : IncomeGrid
        Uniform grid with bin edges
    upperCut : float (defaults to inf)
    minBins : int (defaults to 5)
        Minimum number of populated bins

    Returns
    -------
    BodyFit
    '''
    if grid.edges is None:
        raise DomainError('Bose-Einstein body fit needs a grid with bin edges')
    values = _values(sample)
    nUsed = int(np.sum(grid.edges[1:] <= upperCut))
    if nUsed < minBins:
        raise DomainError('Only {} bins lie below {}, need {}'.format(nUsed, upperCut, minBins))
    edges = grid.edges[:nUsed+1]
    levels = grid.levels[:nUsed]
    gm1 = grid.degeneracies[:nUsed].astype(np.float64) - 1
    if np.all(gm1 == 0):
        raise DomainError('Every body level has g_k = 1, the Bose-Einstein occupancy vanishes')

    body = values[values < upperCut]
    counts, _ = np.histogram(body, bins=edges)
    if np.count_nonzero(counts) < minBins:
        raise DomainError('Only {} populated bins below {}, need {}'.format(np.count_nonzero(counts), upperCut, minBins))
    y = counts.astype(np.float64)

    width = edges[1] - edges[0]
    e = (levels - levels[0]) / width
    def shape(p):
        d, t = np.exp(p)
        with np.errstate(over='ignore'):
            return gm1 / np.expm1((e + d) / t)
    def amplitude(s):
        ss = np.dot(s, s)
        return np.dot(s, y) / ss if ss > 0 else 0.0
    def residuals(p):
        s = shape(p)
        return amplitude(s) * s - y

    lower = np.log(1e-6)
    upper = np.log(1e4 * nUsed)
    seeds = [(np.sum(residuals(p)**2), tuple(p)) for p in
             ((np.log(d), np.log(t)) for d in np.logspace(-4, np.log10(100*nUsed), 26) for t in np.logspace(-2, np.log10(100*nUsed), 26))]
    x0 = np.array(min(seeds)[1])
    result = least_squares(residuals, x0, bounds=([lower, lower], [upper, upper]), method='trf', xtol=1e-8)
    if result.status <= 0:
        raise ConvergenceError('Bose-Einstein body fit did not converge: {}'.format(result.message), {'cost': float(result.cost)})
    boundary = bool(np.any(np.abs(result.x - lower) < 1e-6) or np.any(np.abs(result.x - upper) < 1e-6))
    if boundary:
        warnings.warn('Bose-Einstein body fit lies on the edge of the search range', UserWarning)

    d, t = np.exp(result.x)
    s = shape(result.x)
    C = amplitude(s)
    model = C * s
    ks = float(np.amax(np.abs(np.cumsum(y) / np.sum(y) - np.cumsum(model) / np.sum(model))))
    return BodyFit(BodyKind.BOSE_EINSTEIN, float(t * width), float(levels[0] - d * width), float(C), ks, int(np.sum(y)),
                   float(upperCut), boundary, edges.copy(), model / np.sum(model))

@dataclass(frozen=True)
class TwoClassFit:
    '''
    Body and tail of an income sample

    Parameters
    ----------
    body : BodyFit
    tail : TailModel
        Pareto tail with xmin at the crossover
    crossover : float
        Incomes below the crossover form the body
    bodyFraction : float
        Fraction of the sample below the crossover
    bodyKsBand : float (optional)
        95th percentile of the body KS distance under the fitted model (parametric bootstrap)
    tailKsBand : float (optional)
        Same for the tail
    '''
    body: BodyFit
    tail: TailModel
    crossover: float
    bodyFraction: float
    bodyKsBand: float = np.nan
    tailKsBand: float = np.nan

    @property
    def bodyKind(self):
        return self.body.kind

    @property
    def bodyTemperature(self):
        return self.body.temperature

    @property
    def bodyMu(self):
        return self.body.mu

    @property
    def bodyKs(self):
        return self.body.ks

    @property
    def tailKs(self):
        return self.tail.ks

    @property
    def weakBody(self):
        return bool(self.bodyKs > self.bodyKsBand)

    @property
    def weakTail(self):
        return bool(self.tailKs > self.tailKsBand)

    def toDict(self):
        nanToNone = lambda x: None if x is None or np.isnan(x) else float(x)
        return {
            'body_kind': self.bodyKind.label,
            'body_temperature': self.bodyTemperature,
            'body_mu': nanToNone(self.bodyMu),
            'body_amplitude': self.body.amplitude,
            'body_boundary': self.body.boundary,
            'n_body': self.body.nBody,
            'crossover': self.crossover,
            'body_fraction': self.bodyFraction,
            'body_ks': self.bodyKs,
            'tail_ks': self.tailKs,
            'body_ks_band': nanToNone(self.bodyKsBand),
            'tail_ks_band': nanToNone(self.tailKsBand),
            'weak_body': self.weakBody,
            'weak_tail': self.weakTail,
            'tail': self.tail.toDict(),
            'body_edges': None if self.body.edges is None else self.body.edges.tolist(),
            'body_masses': None if self.body.masses is None else self.body.masses.tolist(),
        }

    @classmethod
    def fromDict(cls, data):
        noneToNan = lambda x: np.nan if x is None else float(x)
        kind = BodyKind.fromName(data['body_kind'])
        edges = None if data.get('body_edges') is None else np.array(data['body_edges'], dtype=np.float64)
        masses = None if data.get('body_masses') is None else np.array(data['body_masses'], dtype=np.float64)
        body = BodyFit(kind, float(data['body_temperature']), noneToNan(data.get('body_mu')), float(data.get('body_amplitude', 1.0)),
                       float(data['body_ks']), int(data.get('n_body', 0)), float(data['crossover']), bool(data.get('body_boundary', False)), edges, masses)
        return cls(body, TailModel.fromDict(data['tail']), float(data['crossover']), float(data['body_fraction']),
                   noneToNan(data.get('body_ks_band')), noneToNan(data.get('tail_ks_band')))

def _fitBody(values, cut, bodyKind, grid):
    if bodyKind == BodyKind.BOLTZMANN:
        return fitBoltzmannBody(values, cut)
    return fitBoseEinsteinBody(values, grid, cut)

def _snapToEdges(candidates, grid):
    '''
    Moves each candidate down to the nearest bin edge above the first, so the binned body
    and the body fraction count the same incomes
    '''
    if grid.edges is None:
        raise DomainError('Bose-Einstein body fit needs a grid with bin edges')
    idx = np.clip(np.searchsorted(grid.edges, candidates, side='right') - 1, 1, len(grid.edges) - 1)
    return np.unique(grid.edges[idx])

def _fitCandidate(args):
    '''
    Body and tail fits at one crossover candidate, None if either precondition fails
    '''
    values, cut, bodyKind, grid = args
    if np.sum(values < cut) < MIN_BODY or np.sum(values >= cut) < MIN_TAIL:
        return None
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', UserWarning)
        try:
            return _fitBody(values, cut, bodyKind, grid), fitPowerLaw(values, xmin=cut, minTail=MIN_TAIL)
        except (DomainError, ConvergenceError):
            return None

def _drawTwoClass(fit, n, rng):
    nBody = rng.binomial(n, fit.bodyFraction)
    body = fit.body.draw(rng, nBody)
    tail = _paretoDraws(rng, fit.tail.gamma, fit.crossover, n - nBody)
    return rng.permutation(np.concatenate((body, tail)))

def _bootstrapCandidate(args):
    fit, n, grid, rng = args
    synthetic = _drawTwoClass(fit, n, rng)
    result = _fitCandidate((synthetic, fit.crossover, fit.bodyKind, grid))
    if result is None:
        return np.nan, np.nan
    return result[0].ks, result[1].ks

def sampleTwoClass(fit, n, seed):
    '''
    n draws from a fitted two-class model

    The body holds Binomial(n, bodyFraction) draws and the rest are Pareto draws above the crossover
    '''
    return _drawTwoClass(fit, int(n), generator(seed))

def fitTwoClass(sample, bodyKind = BodyKind.BOLTZMANN, grid = None, pool = None, bootstrap = 200, seed = 0):
    '''
    Scans crossover candidates and fits body and tail at each

    Candidates are 199 evenly spaced percentiles from the 50th to the 99th. At each, the body
    (incomes below) and the Pareto tail (incomes at or above, xmin = candidate) are fitted and the
    candidate minimizing max(body KS, tail KS) is selected, ties going to the larger crossover

    For the Bose-Einstein body each candidate is moved down to a bin edge of the grid and
    duplicates are dropped, so the crossover is always a bin edge

    Parameters
    ----------
    sample : IncomeSample or array
    bodyKind : BodyKind (defaults to BodyKind.BOLTZMANN)
    grid : IncomeGrid (optional)
        Required for the Bose-Einstein body
    pool : pool object (optional)
        Any object with a map method, used for the candidate scan and the bootstrap
    bootstrap : int (defaults to 200)
        Number of parametric bootstrap resamples for the KS bands, 0 to skip
    seed : int (defaults to 0)
        Seed for the bootstrap

    Returns
    -------
    TwoClassFit
    '''
    values = np.sort(_values(sample))
    if bodyKind == BodyKind.BOSE_EINSTEIN and grid is None:
        raise DomainError('Bose-Einstein body fit needs a grid')
    candidates = np.percentile(values, CROSSOVER_PERCENTILES)
    if bodyKind == BodyKind.BOSE_EINSTEIN:
        candidates = _snapToEdges(candidates, grid)
    args = [(values, c, bodyKind, grid) for c in candidates]
    results = list(map(_fitCandidate, args)) if pool is None else list(pool.map(_fitCandidate, args))

    scores = np.array([np.inf if r is None else max(r[0].ks, r[1].ks) for r in results])
    if np.all(np.isinf(scores)):
        raise DomainError('No crossover leaves {} body and {} tail observations with valid fits'.format(MIN_BODY, MIN_TAIL))
    best = int(np.flatnonzero(scores == np.amin(scores))[-1])
    body, tail = results[best]
    crossover = float(candidates[best])
    fit = TwoClassFit(body, tail, crossover, float(np.mean(values < crossover)))

    if body.boundary:
        warnings.warn('Body fit at the selected crossover lies on the edge of the search range', UserWarning)
    if bootstrap > 0:
        bootArgs = [(fit, len(values), grid, rng) for rng in spawnGenerators(seed, bootstrap)]
        kss = np.array(list(map(_bootstrapCandidate, bootArgs)) if pool is None else list(pool.map(_bootstrapCandidate, bootArgs)))
        if np.all(np.isnan(kss)):
            raise DomainError('No bootstrap resample could be refitted at the crossover {}'.format(crossover))
        fit = TwoClassFit(body, tail, crossover, fit.bodyFraction, float(np.nanquantile(kss[:,0], 0.95)), float(np.nanquantile(kss[:,1], 0.95)))
        if fit.weakBody:
            warnings.warn('Body KS distance {:.4f} exceeds the bootstrap band {:.4f}'.format(fit.bodyKs, fit.bodyKsBand), UserWarning)
        if fit.weakTail:
            warnings.warn('Tail KS distance {:.4f} exceeds the bootstrap band {:.4f}'.format(fit.tailKs, fit.tailKsBand), UserWarning)
    return fit

def twoClassCurves(fit, sample):
    '''
    Empirical and fitted CCDFs at each unique income

    Body and tail curves are fractions of the full sample; the body curve is defined below
    the crossover and the tail curve at or above it (nan elsewhere)

    Returns
    -------
    pandas.DataFrame with columns income, empirical_ccdf, body_ccdf, tail_ccdf
    '''
    x, ccdf = empiricalCCDF(sample)
    below = x < fit.crossover
    tailFraction = 1 - fit.bodyFraction
    body = np.where(below, tailFraction + fit.bodyFraction * fit.body.ccdf(x), np.nan)
    tail = np.where(below, np.nan, tailFraction * (np.maximum(x, fit.crossover) / fit.crossover)**(-fit.tail.gamma))
    return pd.DataFrame({'income': x, 'empirical_ccdf': ccdf, 'body_ccdf': body, 'tail_ccdf': tail})
