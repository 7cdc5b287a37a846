'''
Number of equilibrium income allocations contained in a macrostate {a_k}

Perfect competition (indistinguishable consumers)
    Omega = prod_k (a_k + g_k - 1)! / (a_k! (g_k - 1)!)

Monopolistic competition (distinguishable consumers)
    Omega = N! / prod_k a_k! * prod_k g_k^a_k

Log-space is the primary representation. Exact integers are only computed on request
'''
from dataclasses import dataclass
from enum import Enum
import itertools
import math
from typing import Optional

import numpy as np
from scipy.special import gammaln, xlogy

from maxent_income.Errors import DomainError, GuardExceededError, PreconditionError
from maxent_income.income.IncomeModel import OccupancyVector

#Largest instance the enumeration oracle accepts
ORACLE_MAX_CONSUMERS = 12
ORACLE_MAX_SLOTS = 12

class Regime(Enum):
    '''
    Competition regime, the value is the indicator I in a_k = (g_k - I) / (e^(alpha + beta*eps_k) - I)
    '''
    MONOPOLISTIC = 0
    PERFECT = 1

    @classmethod
    def fromName(cls, name):
        '''
        Parses 'perfect' or 'monopolistic' (case insensitive)
        '''
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise DomainError('Unknown regime "{}", expected "perfect" or "monopolistic"'.format(name))

@dataclass(frozen=True)
class Multiplicity:
    '''
    Parameters
    ----------
    logOmega : float
        Natural log of Omega
    exactOmega : int (optional)
        Arbitrary precision Omega
    '''
    logOmega: float
    exactOmega: Optional[int] = None

def _counts(occ, grid):
    '''
    Counts as an array, checking length and sign
    '''
    counts = occ.counts if isinstance(occ, OccupancyVector) else np.asarray(occ)
    if len(counts) != grid.n:
        raise DomainError('Occupancy has {} levels, grid has {}'.format(len(counts), grid.n))
    if np.any(counts < 0):
        bad = int(np.argmax(counts < 0))
        raise DomainError('Occupancy a[{}] = {} is negative'.format(bad, counts[bad]))
    return counts

def _integerCounts(occ, grid):
    counts = _counts(occ, grid)
    if np.any(np.round(counts) != counts):
        raise DomainError('Exact counting needs integer occupancies, got {}'.format(list(counts)))
    return [int(a) for a in np.round(counts)]

def omegaExact(occ, grid, regime):
    '''
    Exact number of microstates in the macrostate

    Parameters
    ----------
    occ : OccupancyVector
        Integer occupancy
    grid : IncomeGrid
    regime : Regime

    Returns
    -------
    Multiplicity with exactOmega set
    '''
    counts = _integerCounts(occ, grid)
    degeneracies = [int(g) for g in grid.degeneracies]
    if regime == Regime.PERFECT:
        omega = 1
        for a, g in zip(counts, degeneracies):
            omega *= math.comb(a + g - 1, a)
    else:
        omega = math.factorial(sum(counts))
        for a, g in zip(counts, degeneracies):
            omega = omega // math.factorial(a)
        for a, g in zip(counts, degeneracies):
            omega *= g**a
    return Multiplicity(math.log(omega), omega)

def logOmega(occ, grid, regime):
    '''
    ln(Omega) through the log-gamma function, ln(m!) = lgamma(m+1)

    Valid for real-valued occupancies

    Parameters
    ----------
    occ : OccupancyVector or array
    grid : IncomeGrid
    regime : Regime

    Returns
    -------
    float
    '''
    a = np.asarray(_counts(occ, grid), dtype=np.float64)
    g = grid.degeneracies.astype(np.float64)
    if regime == Regime.PERFECT:
        return float(np.sum(gammaln(a + g) - gammaln(a + 1) - gammaln(g)))
    N = np.sum(a)
    return float(gammaln(N + 1) - np.sum(gammaln(a + 1)) + np.sum(a * np.log(g)))

def logOmegaStirling(occ, grid):
    '''
    Stirling form of ln(Omega) for perfect competition

    ln(Omega) = sum_k [(a_k+g_k-1) ln(a_k+g_k-1) - a_k ln(a_k) - g_k ln(g_k-1) + 1]

    This approximates logOmega for a_k >> 1, using 0*ln(0) = 0
    Levels with g_k = 1 are rejected since ln(g_k - 1) diverges there; use logOmega instead

    Note: for g_k >> 1, g_k - 1 ~ g_k, but g_k - 1 is kept as is

    Parameters
    ----------
    occ : OccupancyVector or array
    grid : IncomeGrid

    Returns
    -------
    float
    '''
    a = np.asarray(_counts(occ, grid), dtype=np.float64)
    g = grid.degeneracies.astype(np.float64)
    if np.any(g == 1):
        bad = int(np.argmax(g == 1))
        raise PreconditionError('Stirling form undefined for g[{}] = 1, use logOmega'.format(bad), level=bad)
    terms = xlogy(a + g - 1, a + g - 1) - xlogy(a, a) - g * np.log(g - 1) + 1
    return float(np.sum(terms))

def occupancyCompositions(nConsumers, nLevels):
    '''
    All integer occupancies of nLevels levels summing to nConsumers (stars and bars)

    Yields
    ------
    tuple of int
    '''
    for bars in itertools.combinations(range(nConsumers + nLevels - 1), nLevels - 1):
        bars = (-1,) + bars + (nConsumers + nLevels - 1,)
        yield tuple(bars[k+1] - bars[k] - 1 for k in range(nLevels))

def _labeledAssignments(counts, consumers):
    '''
    Every way of placing labeled consumers into levels with the given counts

    Yields tuples (consumers at level 1, consumers at level 2, ...)
    '''
    if len(counts) == 0:
        yield ()
        return
    for chosen in itertools.combinations(consumers, counts[0]):
        rest = [c for c in consumers if c not in chosen]
        for tail in _labeledAssignments(counts[1:], rest):
            yield (chosen,) + tail

def oracleCount(occ, grid, regime):
    '''
    Counts microstates by explicit enumeration

    Perfect competition enumerates multisets of consumers over the g_k industries at each level
    Monopolistic competition enumerates labeled consumer -> level assignments and, per level,
    the tuples of industry choices of the consumers at that level

    Only for small instances (N <= 12 and sum(g_k) <= 12); cost grows with Omega itself

    Parameters
    ----------
    occ : OccupancyVector
        Integer occupancy
    grid : IncomeGrid
    regime : Regime

    Returns
    -------
    int
    '''
    counts = _integerCounts(occ, grid)
    degeneracies = [int(g) for g in grid.degeneracies]
    N = sum(counts)
    slots = sum(degeneracies)
    if N > ORACLE_MAX_CONSUMERS or slots > ORACLE_MAX_SLOTS:
        raise GuardExceededError('Oracle limited to N <= {} and sum(g) <= {}, got N = {} and sum(g) = {}'.format(
            ORACLE_MAX_CONSUMERS, ORACLE_MAX_SLOTS, N, slots), size=max(N, slots), limit=ORACLE_MAX_CONSUMERS)

    if regime == Regime.PERFECT:
        total = 1
        for a, g in zip(counts, degeneracies):
            total *= sum(1 for _ in itertools.combinations_with_replacement(range(g), a))
        return total

    #Industry choices at a level do not depend on which consumers sit there
    slotChoices = 1
    for a, g in zip(counts, degeneracies):
        slotChoices *= sum(1 for _ in itertools.product(range(g), repeat=a))
    assignments = sum(1 for _ in _labeledAssignments(counts, list(range(N))))
    return assignments * slotChoices

def entropy(occ, grid, regime):
    '''
    Entropy of the macrostate, S = ln(Omega)
    '''
    return logOmega(occ, grid, regime)
