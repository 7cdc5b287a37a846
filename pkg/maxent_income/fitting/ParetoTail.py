'''
Pareto tail of the income distribution

Upper class incomes follow a density a(eps) ~ eps^(-gamma-1). The tail is generated by
preferential attachment (income proportional to the degree of a node in a scale-free network)
and fitted with the Hill estimator, choosing xmin by minimizing the Kolmogorov-Smirnov distance

Exponent convention: gamma is the CCDF exponent, the density exponent is gamma + 1
'''
from dataclasses import dataclass
import warnings

import networkx as nx
import numpy as np

from maxent_income.Errors import DomainError
from maxent_income.ensemble.Random import generator, spawnGenerators

#Minimum number of observations at or above xmin
MIN_TAIL = 50

@dataclass(frozen=True)
class TailModel:
    '''
    Fitted power law tail

    Parameters
    ----------
    gamma : float
        CCDF exponent, P(X >= x) = normalization * (x / xmin)^(-gamma) for x >= xmin
    xmin : float
        Tail threshold
    normalization : float
        Fraction of the sample at or above xmin
    ks : float (optional)
        Kolmogorov-Smirnov distance between the tail and the fitted law
    nTail : int (optional)
        Number of observations at or above xmin
    '''
    gamma: float
    xmin: float
    normalization: float = 1.0
    ks: float = np.nan
    nTail: int = 0

    def __post_init__(self):
        if not self.xmin > 0:
            raise DomainError('xmin must be positive, got {}'.format(self.xmin))
        if not self.gamma > 0:
            raise DomainError('gamma must be positive, got {}'.format(self.gamma))
        if not self.normalization > 0:
            raise DomainError('Normalization must be positive, got {}'.format(self.normalization))
        if self.gamma < 1:
            warnings.warn('Fitted gamma = {:.3f} is below 1, the tail has no finite mean'.format(self.gamma), UserWarning)

    @property
    def densityExponent(self):
        return self.gamma + 1

    def ccdf(self, x):
        '''
        Fraction of the full sample at or above x (x >= xmin)
        '''
        return self.normalization * (np.asarray(x, dtype=np.float64) / self.xmin)**(-self.gamma)

    def toDict(self):
        return {'gamma': self.gamma, 'density_exponent': self.densityExponent, 'xmin': self.xmin,
                'normalization': self.normalization, 'ks': self.ks, 'n_tail': self.nTail,
                #No finite mean below 1
                'gamma_below_one': bool(self.gamma < 1)}

    @classmethod
    def fromDict(cls, data):
        return cls(float(data['gamma']), float(data['xmin']), float(data.get('normalization', 1.0)),
                   np.nan if data.get('ks') is None else float(data['ks']), int(data.get('n_tail', 0)))

@dataclass(frozen=True)
class AttachmentGraph:
    '''
    Degree statistics of a preferential attachment network

    Parameters
    ----------
    degreeSequence : array of int
        Degree of each node, in order of arrival
    edges : int
        Number of edges
    m : int
        Edges added by each arriving node
    '''
    degreeSequence: np.ndarray
    edges: int
    m: int

    def __post_init__(self):
        degrees = np.array(self.degreeSequence, dtype=np.int64)
        if np.sum(degrees) != 2 * self.edges:
            raise DomainError('Degrees sum to {}, expected 2 * {} edges'.format(np.sum(degrees), self.edges))
        if np.amin(degrees) < self.m:
            bad = int(np.argmin(degrees))
            raise DomainError('Node {} has degree {} below m = {}'.format(bad, degrees[bad], self.m))
        degrees.setflags(write=False)
        object.__setattr__(self, 'degreeSequence', degrees)

    @property
    def nNodes(self):
        return len(self.degreeSequence)

def generatePreferentialAttachment(nNodes, m, seed):
    '''
    Barabasi-Albert growth from a complete graph on m+1 nodes

    Each arriving node connects to m distinct existing nodes with probability
    proportional to their degree

    Parameters
    ----------
    nNodes : int
        Final number of nodes, > m
    m : int
        Edges per arriving node, >= 1
    seed : int

    Returns
    -------
    AttachmentGraph
    '''
    if int(m) != m or m < 1:
        raise DomainError('m must be a positive integer, got {}'.format(m))
    if int(nNodes) != nNodes or nNodes <= m:
        raise DomainError('nNodes must be an integer larger than m = {}, got {}'.format(m, nNodes))
    graph = nx.barabasi_albert_graph(int(nNodes), int(m), seed=int(seed), initial_graph=nx.complete_graph(int(m) + 1))
    degrees = [d for _, d in sorted(graph.degree())]
    return AttachmentGraph(np.array(degrees), graph.number_of_edges(), int(m))

def degreesToIncome(graph, scale = 1):
    '''
    Incomes proportional to node degree, income_i = scale * degree_i
    '''
    if not scale > 0:
        raise DomainError('Income scale must be positive, got {}'.format(scale))
    return scale * graph.degreeSequence.astype(np.float64)

def samplePareto(gamma, xmin, n, seed):
    '''
    Inverse CDF sampling of P(X >= x) = (x / xmin)^(-gamma)

    Returns
    -------
    array of float
    '''
    if not gamma > 0 or not xmin > 0:
        raise DomainError('gamma and xmin must be positive, got {} and {}'.format(gamma, xmin))
    return _paretoDraws(generator(seed), gamma, xmin, n)

def _paretoDraws(rng, gamma, xmin, n):
    #1 - U lies in (0, 1]
    return xmin * (1 - rng.random(int(n)))**(-1 / gamma)

def ccdfArrays(values):
    '''
    Sorted unique values and the fraction of observations at or above each

    Returns
    -------
    (x, ccdf) arrays, ccdf[0] = 1
    '''
    values = np.sort(np.asarray(values, dtype=np.float64))
    x, first = np.unique(values, return_index=True)
    return x, 1 - first / len(values)

def ccdfSlope(sample, lower, upper):
    '''
    Slope of the log-log empirical CCDF between lower and upper

    For a tail with P(X >= x) ~ x^(-gamma), the slope is -gamma
    '''
    x, ccdf = ccdfArrays(sample)
    inside = (x >= lower) & (x <= upper)
    if np.sum(inside) < 2:
        raise DomainError('Fewer than two distinct values in [{}, {}]'.format(lower, upper))
    slope, _ = np.polyfit(np.log(x[inside]), np.log(ccdf[inside]), 1)
    return float(slope)

def _hill(tail, xmin):
    '''
    Hill estimate and KS distance for a sorted tail (all values >= xmin)

    Only ratios x / xmin enter, so both results are unchanged when the sample is rescaled
    '''
    nTail = len(tail)
    logSum = np.sum(np.log(tail / xmin))
    if logSum <= 0:
        return np.nan, np.inf
    gamma = nTail / logSum

    #KS over both sides of every step of the empirical CCDF
    first = np.flatnonzero(np.concatenate(([True], tail[1:] != tail[:-1])))
    u = tail[first]
    atOrAbove = 1 - first / nTail
    above = np.append(atOrAbove[1:], 0)
    model = (u / xmin)**(-gamma)
    ks = max(np.amax(np.abs(model - atOrAbove)), np.amax(np.abs(model - above)))
    return gamma, ks

def _scanCandidates(args):
    sortedValues, indices = args
    return [_hill(sortedValues[i:], sortedValues[i]) for i in indices]

def fitPowerLaw(sample, xmin = None, maxCandidates = 1000, minTail = MIN_TAIL, pool = None):
    '''
    Hill estimator with xmin selected by minimum KS distance

    For a given xmin, the density exponent is 1 + nTail / Sum(ln(x_i / xmin)) over x_i >= xmin,
    so gamma = nTail / Sum(ln(x_i / xmin))

    Parameters
    ----------
    sample : array of float
    xmin : float (optional)
        Fixed tail threshold. If None, xmin is scanned over the unique sample values that leave
        at least minTail observations in the tail, ties going to the smaller xmin
    maxCandidates : int (defaults to 1000)
        If more candidates exist, an evenly spaced subset (by rank) is scanned
    minTail : int (defaults to 50)
    pool : pool object (optional)
        Any object with a map method to scan candidates in parallel

    Returns
    -------
    TailModel
    '''
    values = np.sort(np.asarray(sample, dtype=np.float64).ravel())
    if np.any(~np.isfinite(values)):
        raise DomainError('Sample contains non-finite values')
    n = len(values)

    if xmin is not None:
        if not xmin > 0:
            raise DomainError('xmin must be positive, got {}'.format(xmin))
        tail = values[values >= xmin]
        if len(tail) < minTail:
            raise DomainError('Only {} observations at or above xmin = {}, need {}'.format(len(tail), xmin, minTail))
        gamma, ks = _hill(tail, xmin)
        if not np.isfinite(ks):
            raise DomainError('Degenerate tail: every observation equals xmin = {}'.format(xmin))
        return TailModel(float(gamma), float(xmin), len(tail) / n, float(ks), len(tail))

    positive = values[values > 0]
    if len(positive) < minTail:
        raise DomainError('Only {} positive observations, need {} in the tail'.format(len(positive), minTail))
    nonPositive = n - len(positive)

    #Start index of each unique value, keeping those with at least minTail points at or above
    _, starts = np.unique(positive, return_index=True)
    starts = starts[len(positive) - starts >= minTail]
    #A tail made of a single repeated value has no spread
    starts = starts[positive[starts] < positive[-1]]
    if len(starts) == 0:
        raise DomainError('Degenerate sample: no xmin leaves {} observations with any spread in the tail'.format(minTail))
    if len(starts) > maxCandidates:
        starts = starts[np.unique(np.round(np.linspace(0, len(starts) - 1, maxCandidates)).astype(int))]

    chunks = [(positive, block) for block in np.array_split(starts, min(len(starts), 16))]
    if pool is None:
        results = [r for chunk in map(_scanCandidates, chunks) for r in chunk]
    else:
        results = [r for chunk in pool.map(_scanCandidates, chunks) for r in chunk]

    gammas = np.array([r[0] for r in results])
    kss = np.array([r[1] for r in results])
    #argmin returns the first minimum, which is the smallest xmin
    best = int(np.argmin(kss))
    index = starts[best]
    nTail = len(positive) - index
    return TailModel(float(gammas[best]), float(positive[index]), nTail / (len(positive) + nonPositive), float(kss[best]), int(nTail))

def _bootstrapKS(args):
    gamma, xmin, nTail, rng = args
    return fitPowerLaw(_paretoDraws(rng, gamma, xmin, nTail), xmin=xmin, minTail=1).ks

def calibrateTailKS(model, bootstrap = 200, seed = 0, quantile = 0.95, pool = None):
    '''
    Parametric bootstrap of the KS distance for a Pareto tail of the model's size

    Samples of nTail points are drawn from the fitted law and refitted at the model's xmin

    Parameters
    ----------
    model : TailModel
    bootstrap : int (defaults to 200)
    seed : int (defaults to 0)
    quantile : float (defaults to 0.95)
    pool : pool object (optional)

    Returns
    -------
    float
        KS distance that a sample from the model exceeds with probability 1 - quantile
    '''
    if model.nTail < 1:
        raise DomainError('Tail model has no observations to calibrate against')
    args = [(model.gamma, model.xmin, model.nTail, rng) for rng in spawnGenerators(seed, bootstrap)]
    kss = list(map(_bootstrapKS, args)) if pool is None else list(pool.map(_bootstrapKS, args))
    return float(np.quantile(kss, quantile))
