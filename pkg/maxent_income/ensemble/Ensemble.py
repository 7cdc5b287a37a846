'''
Uniform ensemble over equilibrium income allocations

Every allocation (R_1, ..., R_N) with R_i >= 0 and Sum(R_i) = Pi is equally likely. The ensemble
is realized either by enumeration (q = Pi/delta quanta shared among N consumers) or by sampling

Labeled enumeration treats consumers as distinguishable (one allocation per composition of q),
matching the counting of monopolistic competition. Unlabeled enumeration treats them as
indistinguishable (one allocation per partition of q into at most N parts), matching perfect competition
'''
from dataclasses import dataclass
from enum import Enum
import itertools
import math
from typing import Optional

import numpy as np

from maxent_income.Errors import DomainError, GuardExceededError
from maxent_income.income.IncomeModel import Allocation, EconomyParams, OccupancyVector, binIncomes
from maxent_income.ensemble.Random import checkSeed, spawnGenerators
from maxent_income.statistics.Multiplicity import occupancyCompositions

#Largest number of compositions that may be enumerated
ENUMERATION_LIMIT = int(1e7)
#Allocations binned at a time by macrostateHistogram
HISTOGRAM_CHUNK = 100000

class EnsembleMode(Enum):
    ENUMERATE_LABELED = 0
    ENUMERATE_UNLABELED = 1
    SAMPLE_CONTINUOUS = 2
    SAMPLE_DISCRETE = 3

    @property
    def isEnumeration(self):
        return self in (EnsembleMode.ENUMERATE_LABELED, EnsembleMode.ENUMERATE_UNLABELED)

    @property
    def isDiscrete(self):
        return self != EnsembleMode.SAMPLE_CONTINUOUS

def compositionCount(quanta, nConsumers):
    '''
    Number of ways to share quanta among nConsumers labeled consumers, C(q + N - 1, N - 1)
    '''
    return math.comb(quanta + nConsumers - 1, nConsumers - 1)

@dataclass(frozen=True)
class EnsembleSpec:
    '''
    Parameters
    ----------
    params : EconomyParams
    mode : EnsembleMode
    sampleCount : int (optional)
        Number of draws, required for sampling modes
    rngSeed : int (optional)
        Unsigned 64-bit seed, required for sampling modes
    streams : int (defaults to 1)
        Number of independent sub-streams the draws are divided among
    '''
    params: EconomyParams
    mode: EnsembleMode
    sampleCount: Optional[int] = None
    rngSeed: Optional[int] = None
    streams: int = 1

    def __post_init__(self):
        if not self.mode.isEnumeration:
            if self.sampleCount is None or int(self.sampleCount) != self.sampleCount or self.sampleCount < 1:
                raise DomainError('Sampling needs a positive sampleCount, got {}'.format(self.sampleCount))
            checkSeed(self.rngSeed)
            if int(self.streams) != self.streams or self.streams < 1:
                raise DomainError('Number of streams must be a positive integer, got {}'.format(self.streams))
        if self.mode.isDiscrete:
            self.params.quantaCount()

    @property
    def quanta(self):
        return self.params.quantaCount()

    def checkGuard(self):
        '''
        Raises GuardExceededError if the number of compositions exceeds ENUMERATION_LIMIT
        '''
        count = compositionCount(self.quanta, self.params.nConsumers)
        if count > ENUMERATION_LIMIT:
            raise GuardExceededError('Enumeration of {} compositions exceeds the limit of {}'.format(count, ENUMERATION_LIMIT), size=count, limit=ENUMERATION_LIMIT)
        return count

def _partitions(quanta, maxParts, maxPart):
    '''
    Partitions of quanta into at most maxParts parts no larger than maxPart, largest part first
    '''
    if quanta == 0:
        yield ()
        return
    if maxParts == 0:
        return
    for first in range(min(quanta, maxPart), 0, -1):
        for rest in _partitions(quanta - first, maxParts - 1, first):
            yield (first,) + rest

def _enumerateQuanta(spec):
    '''
    Quanta per consumer for every allocation in the enumeration
    '''
    spec.checkGuard()
    N, q = spec.params.nConsumers, spec.quanta
    if spec.mode == EnsembleMode.ENUMERATE_LABELED:
        yield from occupancyCompositions(q, N)
    elif spec.mode == EnsembleMode.ENUMERATE_UNLABELED:
        for partition in _partitions(q, N, q):
            yield partition + (0,) * (N - len(partition))
    else:
        raise DomainError('Enumeration needs an enumeration mode, got {}'.format(spec.mode.name))

def enumerateAllocations(spec):
    '''
    Every allocation of the ensemble exactly once

    Labeled mode yields compositions of q in lexicographic order
    Unlabeled mode yields partitions of q (non-increasing, padded with zeros) in reverse lexicographic order

    Parameters
    ----------
    spec : EnsembleSpec

    Yields
    ------
    Allocation
    '''
    for quanta in _enumerateQuanta(spec):
        yield Allocation.fromQuanta(quanta, spec.params.quantum)

def _drawBlock(mode, N, totalIncome, quanta, quantum, size, rng):
    if mode == EnsembleMode.SAMPLE_CONTINUOUS:
        #Normalized unit-rate exponentials are uniform on the simplex
        draws = rng.standard_exponential((size, N))
        return totalIncome * draws / np.sum(draws, axis=1)[:,np.newaxis]
    positions = quanta + N - 1
    samples = np.zeros((size, N))
    for i in range(size):
        bars = np.sort(rng.choice(positions, N - 1, replace=False))
        samples[i] = np.diff(np.concatenate(([-1], bars, [positions]))) - 1
    return samples * quantum

def _drawStream(args):
    '''
    Draws from one sub-stream, (mode, nConsumers, totalIncome, quanta, quantum, size, rng)
    '''
    return _drawBlock(*args)

def _streamArgs(spec):
    '''
    Arguments for each sub-stream of a sampling spec
    '''
    if spec.mode.isEnumeration:
        raise DomainError('Sampling needs a sampling mode, got {}'.format(spec.mode.name))
    generators = spawnGenerators(spec.rngSeed, spec.streams)
    sizes = [len(block) for block in np.array_split(np.arange(spec.sampleCount), spec.streams)]
    quanta = spec.quanta if spec.mode.isDiscrete else None
    return [(spec.mode, spec.params.nConsumers, spec.params.totalIncome, quanta, spec.params.quantum, size, rng) for size, rng in zip(sizes, generators)]

def drawSamples(spec, pool = None):
    '''
    Uniform draws from the ensemble as an array

    SAMPLE_CONTINUOUS draws from the flat simplex {R_i >= 0, Sum(R_i) = Pi}
    SAMPLE_DISCRETE draws compositions of q quanta uniformly, by choosing N-1 of the
        q + N - 1 stars-and-bars positions uniformly

    The draws are split into spec.streams blocks, each from its own sub-stream of spec.rngSeed

    Parameters
    ----------
    spec : EnsembleSpec
    pool : pool object (optional)
        Any object with a map method to draw the sub-streams in parallel
        The result does not depend on the pool

    Returns
    -------
    array of shape (sampleCount, N)
    '''
    args = _streamArgs(spec)
    if pool is None:
        blocks = list(map(_drawStream, args))
    else:
        blocks = list(pool.map(_drawStream, args))
    return np.concatenate(blocks, axis=0)

def sampleUniform(spec, pool = None):
    '''
    Uniform draws from the ensemble

    Yields
    ------
    Allocation
    '''
    for incomes in drawSamples(spec, pool):
        yield Allocation(incomes)

def _tally(incomes, grid, histogram):
    '''
    Adds the macrostates of a block of allocations to histogram (occupancy tuple -> count)
    '''
    indices = binIncomes(incomes, grid)
    occupancies = np.zeros((len(indices), grid.n), dtype=np.int64)
    np.add.at(occupancies, (np.repeat(np.arange(len(indices)), indices.shape[1]), indices.ravel()), 1)
    unique, counts = np.unique(occupancies, axis=0, return_counts=True)
    for occ, c in zip(unique, counts):
        key = tuple(int(v) for v in occ)
        histogram[key] = histogram.get(key, 0) + int(c)
    return histogram

def _tallyStream(args):
    '''
    Histogram of one sub-stream, drawn and binned HISTOGRAM_CHUNK allocations at a time

    Drawing in pieces from the same generator gives the same draws as a single block
    '''
    streamArgs, grid, chunk = args
    mode, N, totalIncome, quanta, quantum, size, rng = streamArgs
    histogram = {}
    for start in range(0, size, chunk):
        block = _drawBlock(mode, N, totalIncome, quanta, quantum, min(chunk, size - start), rng)
        _tally(block, grid, histogram)
    return histogram

def macrostateHistogram(spec, grid, pool = None):
    '''
    Number of allocations in the ensemble that fall into each macrostate

    Allocations are binned in blocks of HISTOGRAM_CHUNK so memory stays bounded
    by the block size and the number of distinct macrostates

    Parameters
    ----------
    spec : EnsembleSpec
    grid : IncomeGrid
        Must have bin edges covering [0, Pi]
    pool : pool object (optional)
        Used for sampling modes

    Returns
    -------
    dict
        OccupancyVector -> number of allocations, in lexicographic order of the occupancies
    '''
    histogram = {}
    if spec.mode.isEnumeration:
        quanta = _enumerateQuanta(spec)
        while True:
            block = list(itertools.islice(quanta, HISTOGRAM_CHUNK))
            if len(block) == 0:
                break
            incomes = np.array(block, dtype=np.float64).reshape(-1, spec.params.nConsumers) * spec.params.quantum
            _tally(incomes, grid, histogram)
    else:
        args = [(streamArgs, grid, HISTOGRAM_CHUNK) for streamArgs in _streamArgs(spec)]
        if pool is None:
            partials = list(map(_tallyStream, args))
        else:
            partials = list(pool.map(_tallyStream, args))
        for partial in partials:
            for key, c in partial.items():
                histogram[key] = histogram.get(key, 0) + c
    return {OccupancyVector(np.array(key, dtype=np.int64)): histogram[key] for key in sorted(histogram)}

def mostProbableMacrostate(spec, grid):
    '''
    Macrostate(s) containing the most allocations

    Parameters
    ----------
    spec : EnsembleSpec
        Must be an enumeration mode
    grid : IncomeGrid

    Returns
    -------
    list of (OccupancyVector, int)
        All tied macrostates with their count, in lexicographic order of the counts
    '''
    if not spec.mode.isEnumeration:
        raise DomainError('The most probable macrostate needs an enumeration mode, got {}'.format(spec.mode.name))
    histogram = macrostateHistogram(spec, grid)
    best = max(histogram.values())
    return sorted([(occ, c) for occ, c in histogram.items() if c == best], key=lambda item: item[0].key())

def histogramRecords(histogram):
    '''
    Histogram as a list of {"occupancy", "count"} records, by descending count then lexicographic occupancy
    '''
    items = sorted(histogram.items(), key=lambda item: (-item[1], item[0].key()))
    return [{'occupancy': list(occ.key()), 'count': c} for occ, c in items]
