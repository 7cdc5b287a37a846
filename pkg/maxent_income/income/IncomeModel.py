import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from maxent_income.Errors import DomainError

#Relative tolerance for Sum(R_i) == Pi on allocations
ALLOCATION_RTOL = 1e-12
#Relative tolerance for constraint checks on real-valued occupancies
OCCUPANCY_RTOL = 1e-10

def _readOnly(arr):
    arr.setflags(write=False)
    return arr

@dataclass(frozen=True)
class EconomyParams:
    '''
    Size of the economy

    Parameters
    ----------
    nConsumers : int
        Number of consumers (N)
    totalIncome : float
        Total income (Pi) shared by all consumers
    quantum : float (defaults to 1)
        Discrete income unit used for enumeration
    '''
    nConsumers: int
    totalIncome: float
    quantum: float = 1.0

    def __post_init__(self):
        if int(self.nConsumers) != self.nConsumers or self.nConsumers < 1:
            raise DomainError('nConsumers must be a positive integer, got {}'.format(self.nConsumers))
        if not self.totalIncome > 0:
            raise DomainError('totalIncome must be positive, got {}'.format(self.totalIncome))
        if not self.quantum > 0:
            raise DomainError('quantum must be positive, got {}'.format(self.quantum))
        object.__setattr__(self, 'nConsumers', int(self.nConsumers))
        object.__setattr__(self, 'totalIncome', float(self.totalIncome))
        object.__setattr__(self, 'quantum', float(self.quantum))

    @property
    def meanIncome(self):
        return self.totalIncome / self.nConsumers

    def quantaCount(self):
        '''
        Number of income quanta q = Pi / delta

        Raises DomainError if Pi is not an integer multiple of the quantum
        '''
        q = self.totalIncome / self.quantum
        qInt = int(round(q))
        if abs(q - qInt) > 1e-9 * max(1, q):
            raise DomainError('totalIncome {} is not an integer multiple of quantum {}'.format(self.totalIncome, self.quantum))
        return qInt

@dataclass(frozen=True, eq=False)
class IncomeGrid:
    '''
    Discrete income levels eps_1 < ... < eps_n with industry degeneracies g_k

    Parameters
    ----------
    levels : array of float
        Strictly increasing income levels, eps_1 >= 0
    degeneracies : array of int
        Number of industries at each level, all >= 1
    edges : array of float (optional)
        Bin edges (length n+1) when the grid is a uniform binning of an income range
        Required for binning allocations onto the grid
    '''
    levels: np.ndarray
    degeneracies: np.ndarray
    edges: Optional[np.ndarray] = None

    def __post_init__(self):
        levels = np.array(self.levels, dtype=np.float64).ravel()
        degeneracies = np.array(self.degeneracies).ravel()
        if len(levels) == 0:
            raise DomainError('Income grid needs at least one level')
        if len(degeneracies) != len(levels):
            raise DomainError('Expected {} degeneracies, got {}'.format(len(levels), len(degeneracies)))
        if np.any(np.round(degeneracies) != degeneracies) or np.any(degeneracies < 1):
            bad = int(np.argmax((np.round(degeneracies) != degeneracies) | (degeneracies < 1)))
            raise DomainError('Degeneracy g[{}] = {} must be an integer >= 1'.format(bad, degeneracies[bad]))
        if levels[0] < 0:
            raise DomainError('Lowest income level must be >= 0, got {}'.format(levels[0]))
        if np.any(np.diff(levels) <= 0):
            bad = int(np.argmax(np.diff(levels) <= 0)) + 1
            raise DomainError('Income levels must be strictly increasing (level {} = {})'.format(bad, levels[bad]))
        object.__setattr__(self, 'levels', _readOnly(levels))
        object.__setattr__(self, 'degeneracies', _readOnly(degeneracies.astype(np.int64)))
        if self.edges is not None:
            edges = np.array(self.edges, dtype=np.float64).ravel()
            if len(edges) != len(levels) + 1 or np.any(np.diff(edges) <= 0):
                raise DomainError('Bin edges must be increasing with length {}'.format(len(levels) + 1))
            object.__setattr__(self, 'edges', _readOnly(edges))

    @classmethod
    def fromLevels(cls, levels, degeneracies = None, binWidth = None):
        '''
        Creates grid from a list of levels

        If the levels are equally spaced (or binWidth is given), bin edges are placed
        halfway between levels so that each level is the center of its bin

        Parameters
        ----------
        levels : list of float
        degeneracies : list of int (optional)
            Defaults to g_k = 1
        binWidth : float (optional)
            Bin width, needed for single-level grids to be binnable
        '''
        levels = np.array(levels, dtype=np.float64).ravel()
        if degeneracies is None:
            degeneracies = np.ones(len(levels), dtype=np.int64)
        edges = None
        if binWidth is None and len(levels) > 1:
            spacing = np.diff(levels)
            if np.allclose(spacing, spacing[0], rtol=1e-9, atol=0):
                binWidth = spacing[0]
        if binWidth is not None and len(levels) > 0:
            if len(levels) > 1 and not np.allclose(np.diff(levels), binWidth, rtol=1e-9, atol=0):
                raise DomainError('Levels are not spaced by binWidth {}'.format(binWidth))
            edges = levels[0] - binWidth/2 + binWidth * np.arange(len(levels)+1)
        return cls(levels, degeneracies, edges)

    @property
    def n(self):
        return len(self.levels)

    @property
    def isUniform(self):
        return self.edges is not None

    @property
    def binWidth(self):
        '''
        Width of the bins (None if the grid has no edges)
        '''
        if self.edges is None:
            return None
        return (self.edges[-1] - self.edges[0]) / self.n

    @property
    def spacing(self):
        '''
        Characteristic level spacing - bin width if available, else the smallest gap between levels
        '''
        if self.edges is not None:
            return self.binWidth
        if self.n > 1:
            return float(np.amin(np.diff(self.levels)))
        return 1.0

    def subgrid(self, indices):
        '''
        Grid restricted to a contiguous range of levels
        '''
        indices = np.asarray(indices)
        edges = None
        if self.edges is not None:
            edges = self.edges[indices[0]:indices[-1]+2]
        return IncomeGrid(self.levels[indices], self.degeneracies[indices], edges)

    def toDict(self):
        data = {'levels': self.levels.tolist(), 'degeneracies': self.degeneracies.tolist()}
        if self.edges is not None:
            data['bin_width'] = self.binWidth
        return data

    @classmethod
    def fromDict(cls, data):
        if 'levels' not in data or 'degeneracies' not in data:
            raise DomainError('Grid document requires "levels" and "degeneracies"')
        return cls.fromLevels(data['levels'], data['degeneracies'], data.get('bin_width', None))

    def save(self, filename):
        with open(filename, 'w') as f:
            json.dump(self.toDict(), f)

    @classmethod
    def load(cls, filename):
        with open(filename) as f:
            return cls.fromDict(json.load(f))

@dataclass(frozen=True, eq=False)
class Allocation:
    '''
    Income of each consumer (R_1, ..., R_N)

    Parameters
    ----------
    incomes : array of float
        Non-negative incomes
    totalIncome : float (optional)
        If given, Sum(R_i) must equal totalIncome to a relative tolerance of 1e-12
    '''
    incomes: np.ndarray
    totalIncome: Optional[float] = None

    def __post_init__(self):
        incomes = np.array(self.incomes, dtype=np.float64).ravel()
        if len(incomes) == 0:
            raise DomainError('Allocation needs at least one consumer')
        if np.any(incomes < 0):
            bad = int(np.argmax(incomes < 0))
            raise DomainError('Income R[{}] = {} is negative'.format(bad, incomes[bad]))
        total = float(np.sum(incomes))
        if self.totalIncome is None:
            object.__setattr__(self, 'totalIncome', total)
        elif abs(total - self.totalIncome) > ALLOCATION_RTOL * self.totalIncome:
            raise DomainError('Allocation sums to {}, expected {}'.format(total, self.totalIncome))
        object.__setattr__(self, 'incomes', _readOnly(incomes))

    @classmethod
    def fromQuanta(cls, quanta, quantum = 1):
        '''
        Allocation from integer numbers of income quanta per consumer
        '''
        quanta = np.asarray(quanta)
        return cls(quanta * quantum, float(np.sum(quanta)) * quantum)

    @property
    def nConsumers(self):
        return len(self.incomes)

    def saveCSV(self, filename):
        pd.DataFrame({'income': self.incomes}).to_csv(filename, index=False, float_format='%.17g')

    @classmethod
    def loadCSV(cls, filename):
        data = pd.read_csv(filename, comment='#')
        if 'income' not in data.columns:
            raise DomainError('Allocation file {} needs an "income" column'.format(filename))
        return cls(data['income'].to_numpy(dtype=np.float64))

@dataclass(frozen=True, eq=False)
class OccupancyVector:
    '''
    Number of consumers a_k at each income level

    Counts are stored as integers when every entry is integral (exact counting mode)
    and as floats otherwise (most probable distributions)

    Parameters
    ----------
    counts : array of int or float
        Non-negative counts
    '''
    counts: np.ndarray

    def __post_init__(self):
        counts = np.array(self.counts).ravel()
        if counts.dtype.kind not in 'iuf':
            counts = counts.astype(np.float64)
        if np.any(counts < 0):
            bad = int(np.argmax(counts < 0))
            raise DomainError('Occupancy a[{}] = {} is negative'.format(bad, counts[bad]))
        if counts.dtype.kind in 'iu':
            counts = counts.astype(np.int64)
        else:
            counts = counts.astype(np.float64)
        object.__setattr__(self, 'counts', _readOnly(counts))

    @classmethod
    def integral(cls, counts):
        '''
        Integer occupancy, raising if any count is not a whole number
        '''
        counts = np.asarray(counts)
        if np.any(np.round(counts) != counts):
            raise DomainError('Occupancy counts must be integers for exact counting')
        return cls(np.round(counts).astype(np.int64))

    @property
    def isInteger(self):
        return self.counts.dtype.kind == 'i'

    @property
    def total(self):
        return self.counts.sum()

    def income(self, grid):
        '''
        Total income Sum(a_k * eps_k) when every consumer sits at its level
        '''
        return float(np.dot(self.counts, grid.levels))

    def incomeReconstruction(self, grid):
        '''
        Allocation with a_k consumers placed at the center of bin k

        Only defined for integer occupancies. The reconstructed total differs from the
        total of any allocation binned onto this occupancy by at most N * binWidth / 2
        '''
        if not self.isInteger:
            raise DomainError('Incomes can only be reconstructed from integer occupancies')
        return Allocation(np.repeat(grid.levels, self.counts))

    def key(self):
        '''
        Hashable form of the counts
        '''
        return tuple(self.counts.tolist())

    def __eq__(self, other):
        if not isinstance(other, OccupancyVector):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return 'OccupancyVector({})'.format(list(self.key()))

    def toDict(self):
        return {'counts': self.counts.tolist()}

    @classmethod
    def fromDict(cls, data):
        if 'counts' not in data:
            raise DomainError('Occupancy document requires "counts"')
        return cls(data['counts'])

    def save(self, filename):
        with open(filename, 'w') as f:
            json.dump(self.toDict(), f)

    @classmethod
    def load(cls, filename):
        with open(filename) as f:
            return cls.fromDict(json.load(f))

@dataclass(frozen=True)
class OccupancyReport:
    '''
    Residuals of the two side conditions Sum(a_k) = N and Sum(a_k*eps_k) = Pi

    Residuals are relative: (Sum(a_k) - N) / N and (Sum(a_k*eps_k) - Pi) / Pi
    '''
    countResidual: float
    incomeResidual: float
    countFeasible: bool
    incomeFeasible: bool

    @property
    def feasible(self):
        return self.countFeasible and self.incomeFeasible

def buildGrid(epsilonMin, epsilonMax, nLevels, degeneracies):
    '''
    Uniform binning of [epsilonMin, epsilonMax] with levels at bin centers

    Parameters
    ----------
    epsilonMin : float
        Lower edge, >= 0
    epsilonMax : float
        Upper edge, > epsilonMin
    nLevels : int
        Number of bins
    degeneracies : list of int
        Industry count for each level

    Returns
    -------
    IncomeGrid
    '''
    if epsilonMin < 0:
        raise DomainError('epsilonMin must be >= 0, got {}'.format(epsilonMin))
    if not epsilonMax > epsilonMin:
        raise DomainError('epsilonMax ({}) must be larger than epsilonMin ({})'.format(epsilonMax, epsilonMin))
    if int(nLevels) != nLevels or nLevels < 1:
        raise DomainError('nLevels must be a positive integer, got {}'.format(nLevels))
    if len(degeneracies) != nLevels:
        raise DomainError('Expected {} degeneracies, got {}'.format(nLevels, len(degeneracies)))
    edges = np.linspace(epsilonMin, epsilonMax, int(nLevels)+1)
    levels = 0.5 * (edges[:-1] + edges[1:])
    return IncomeGrid(levels, degeneracies, edges)

def binIncomes(incomes, grid):
    '''
    Bin index of each income

    Bins are half-open [left, right) with the last bin closed on the right

    Parameters
    ----------
    incomes : array of float
        Any shape
    grid : IncomeGrid
        Must have bin edges

    Returns
    -------
    array of int with the same shape as incomes
    '''
    if grid.edges is None:
        raise DomainError('Grid has no bin edges; build it with buildGrid or give a binWidth')
    incomes = np.asarray(incomes, dtype=np.float64)
    outside = (incomes < grid.edges[0]) | (incomes > grid.edges[-1])
    if np.any(outside):
        bad = np.unravel_index(np.argmax(outside), incomes.shape)
        badIndex = bad[-1] if len(bad) > 0 else 0
        raise DomainError('Income R[{}] = {} lies outside the grid range [{}, {}]'.format(badIndex, incomes[bad], grid.edges[0], grid.edges[-1]))
    indices = np.searchsorted(grid.edges, incomes, side='right') - 1
    return np.minimum(indices, grid.n - 1)

def binAllocation(alloc, grid):
    '''
    Maps an allocation to its macrostate

    Parameters
    ----------
    alloc : Allocation
    grid : IncomeGrid

    Returns
    -------
    OccupancyVector (integer counts, summing to N)
    '''
    indices = binIncomes(alloc.incomes, grid)
    return OccupancyVector(np.bincount(indices, minlength=grid.n).astype(np.int64))

def validateOccupancy(occ, params, grid, rtol = OCCUPANCY_RTOL):
    '''
    Checks Sum(a_k) = N and Sum(a_k*eps_k) = Pi

    The count constraint is exact for integer occupancies. Infeasibility is reported, not raised

    Parameters
    ----------
    occ : OccupancyVector
    params : EconomyParams
    grid : IncomeGrid
    rtol : float (defaults to 1e-10)

    Returns
    -------
    OccupancyReport
    '''
    if len(occ.counts) != grid.n:
        raise DomainError('Occupancy has {} levels, grid has {}'.format(len(occ.counts), grid.n))
    N = params.nConsumers
    countResidual = float(occ.total - N) / N
    incomeResidual = (occ.income(grid) - params.totalIncome) / params.totalIncome
    if occ.isInteger:
        countFeasible = int(occ.total) == N
    else:
        countFeasible = abs(countResidual) <= rtol
    return OccupancyReport(countResidual, incomeResidual, countFeasible, abs(incomeResidual) <= rtol)
