'''
Most probable income distribution under the constraints Sum(a_k) = N and Sum(a_k*eps_k) = Pi

Stationarity of ln(Omega) - alpha*Sum(a_k) - beta*Sum(a_k*eps_k) gives
    a_k = (g_k - I) / (exp(alpha + beta*eps_k) - I)
with I = 1 for perfect competition (Bose-Einstein) and I = 0 for monopolistic competition (Boltzmann)

Equivalently, a_k = (g_k - I) / (exp((eps_k - mu) / T) - I) with mu = -alpha/beta and T = 1/beta
'''
from dataclasses import dataclass, fields
import math
import time
import warnings

import numpy as np
from scipy.special import logsumexp

from maxent_income.Errors import ConvergenceError, DomainError, GuardExceededError, InfeasibleError, PreconditionError, SubCriticalError
from maxent_income.income.IncomeModel import EconomyParams, OccupancyVector
from maxent_income.solver import RootSolver, SolverType
from maxent_income.statistics.Multiplicity import Regime, logOmega, occupancyCompositions

#Largest number of integer occupancies scanned by enumerateFeasibleOccupancies
ENUMERATION_LIMIT = int(1e7)

#Upper limit on ln(s) for the inner search, exp(700) is still a finite float
_MAX_LOG_SHIFT = 700

@dataclass
class SolverSettings:
    '''
    Tolerances and iteration caps of the nested bisection

    Parameters
    ----------
    constraintTol : float (defaults to 1e-8)
        Relative tolerance on both constraints in the final solution
    innerTol : float (defaults to 1e-12)
        Bisection tolerance on the inner variable (alpha or its log-shift)
    outerTol : float (defaults to 1e-12)
        Bisection tolerance on ln(beta)
    maxOuter : int (defaults to 200)
    maxInner : int (defaults to 200)
    condensateOffset : float (defaults to 1e-9)
        When the ground level condenses, mu is pinned at eps_1 - condensateOffset*d_eps
    betaRange : float (defaults to 1e12)
        beta is searched in [1/betaRange, betaRange] / mean(eps)
    '''
    constraintTol: float = 1e-8
    innerTol: float = 1e-12
    outerTol: float = 1e-12
    maxOuter: int = 200
    maxInner: int = 200
    condensateOffset: float = 1e-9
    betaRange: float = 1e12

    def update(self, **kwargs):
        '''
        Sets settings by name, converting values to the type of the default
        '''
        names = {f.name: f.type for f in fields(self)}
        for key, value in kwargs.items():
            if key not in names:
                raise DomainError('Unknown solver setting "{}", expected one of {}'.format(key, sorted(names)))
            try:
                value = int(value) if names[key] in (int, 'int') else float(value)
            except (TypeError, ValueError):
                raise DomainError('Invalid value "{}" for solver setting "{}"'.format(value, key))
            if not value > 0:
                raise DomainError('Solver setting "{}" must be positive, got {}'.format(key, value))
            setattr(self, key, value)

@dataclass(frozen=True)
class EquilibriumSolution:
    '''
    Lagrange multipliers and the most probable occupancy

    Parameters
    ----------
    alpha : float
        Multiplier on Sum(a_k) = N
    beta : float
        Multiplier on Sum(a_k*eps_k) = Pi
    mu : float
        Marginal labor-capital return, -alpha/beta
    temperature : float
        Marginal technology scale, 1/beta
    regime : Regime
    occupancy : OccupancyVector
    condensateFraction : float
        Fraction of consumers at the lowest level in excess of what the
        excited levels can hold at this beta (perfect competition only)
    degenerate : bool
        True for the single-industry case where every consumer earns mu
    '''
    alpha: float
    beta: float
    mu: float
    temperature: float
    regime: Regime
    occupancy: OccupancyVector
    condensateFraction: float = 0.0
    degenerate: bool = False

    def toDict(self):
        return {
            'alpha': self.alpha,
            'beta': self.beta,
            'mu': self.mu,
            'temperature': self.temperature,
            'regime': self.regime.name.lower(),
            'occupancy': self.occupancy.counts.tolist(),
            'condensate_fraction': self.condensateFraction,
            'degenerate': self.degenerate,
        }

    @classmethod
    def fromDict(cls, data):
        beta = float(data['beta'])
        alpha = float(data['alpha'])
        return cls(alpha, beta, -alpha/beta, 1/beta, Regime.fromName(data['regime']),
                   OccupancyVector(np.array(data['occupancy'], dtype=np.float64)),
                   float(data.get('condensate_fraction', 0)), bool(data.get('degenerate', False)))

def _fromMultipliers(alpha, beta, regime, counts, condensateFraction = 0.0, degenerate = False):
    return EquilibriumSolution(float(alpha), float(beta), float(-alpha/beta), float(1/beta), regime,
                               OccupancyVector(np.asarray(counts, dtype=np.float64)), float(condensateFraction), degenerate)

def occupancyAt(alpha, beta, grid, regime):
    '''
    Evaluates a_k = (g_k - I) / (exp(alpha + beta*eps_k) - I)

    Parameters
    ----------
    alpha : float
    beta : float
    grid : IncomeGrid
    regime : Regime

    Returns
    -------
    OccupancyVector (real valued)

    Raises SubCriticalError for perfect competition if exp(alpha + beta*eps_k) <= 1 at any level
    '''
    x = alpha + beta * grid.levels
    g = grid.degeneracies.astype(np.float64)
    if regime == Regime.MONOPOLISTIC:
        return OccupancyVector(g * np.exp(-x))
    if np.any(x <= 0):
        bad = int(np.argmax(x <= 0))
        raise SubCriticalError('Sub-critical occupancy at level {}: alpha + beta*eps = {} <= 0 (mu >= eps)'.format(bad, x[bad]), level=bad)
    #g_k = 1 gives exactly 0
    return OccupancyVector((g - 1) / np.expm1(x))

def excitedCapacity(beta, grid):
    '''
    Number of consumers the levels above eps_1 hold when mu -> eps_1 from below

    Sum_{k>=2} (g_k - 1) / (exp(beta*(eps_k - eps_1)) - 1)
    '''
    shift = beta * (grid.levels[1:] - grid.levels[0])
    with np.errstate(over='ignore'):
        return float(np.sum((grid.degeneracies[1:] - 1) / np.expm1(shift)))

def condensateFraction(beta, grid, nConsumers, regime):
    '''
    Fraction of consumers at eps_1 beyond the saturated capacity of the excited levels

    Zero for monopolistic competition and for single level grids
    '''
    if regime != Regime.PERFECT or grid.n == 1:
        return 0.0
    return max(0.0, nConsumers - excitedCapacity(beta, grid)) / nConsumers

def detectDegenerateOccupancy(grid, regime, params):
    '''
    Single-industry case of perfect competition

    When every g_k = 1, the multiplicity is 1 for any occupancy and every consumer earns
    the same income mu = Pi/N. The occupancy puts all N consumers at the level closest to Pi/N
    (ties go to the lower level)

    Parameters
    ----------
    grid : IncomeGrid
    regime : Regime
    params : EconomyParams

    Returns
    -------
    OccupancyVector or None if the case does not apply
    '''
    if regime != Regime.PERFECT or np.any(grid.degeneracies != 1):
        return None
    mean = params.meanIncome
    distance = np.abs(grid.levels - mean)
    l = int(np.argmin(distance))
    if distance[l] > grid.spacing / 2:
        warnings.warn('Mean income {} is not representable on the grid, nearest level is {}'.format(mean, grid.levels[l]), UserWarning)
    counts = np.zeros(grid.n)
    counts[l] = params.nConsumers
    return OccupancyVector(counts)

class MaxEntSolver:
    '''
    Nested bisection for the Lagrange multipliers (alpha, beta)

    For a fixed beta, Sum(a_k) is strictly decreasing in alpha, so alpha is found first
        Monopolistic: closed form alpha = ln(Sum(g_k*exp(-beta*eps_k)) / N)
        Perfect: bisection on ln(s) with s = alpha + beta*eps_1 > 0
    The mean income is then strictly decreasing in beta, so ln(beta) is found by bracketed bisection
    on the income residual

    If the perfect regime cannot hold N consumers with mu < eps_1, mu is pinned just below eps_1
    and the remainder is placed at the lowest level (condensation)

    Parameters
    ----------
    grid : IncomeGrid
    regime : Regime (defaults to Regime.MONOPOLISTIC)
    settings : SolverSettings (optional)
    '''
    def __init__(self, grid, regime = Regime.MONOPOLISTIC, settings = None):
        self.grid = grid
        self.regime = regime
        self.settings = SolverSettings() if settings is None else settings
        self._gm1 = grid.degeneracies.astype(np.float64) - 1
        self._logg = np.log(grid.degeneracies.astype(np.float64))

    def setTolerances(self, **kwargs):
        '''
        Overrides solver settings by name (constraintTol, innerTol, outerTol, maxOuter, maxInner, condensateOffset, betaRange)
        '''
        self.settings.update(**kwargs)

    def printHeader(self, params):
        print('Solving {} competition: N = {}, Pi = {}, {} levels'.format(self.regime.name.lower(), params.nConsumers, params.totalIncome, self.grid.n))

    def printStatus(self, iteration, x, fx, simTimeElapsed):
        print('{}\t\tbeta = {:.6e}\tincome residual = {:.3e}\t{:.2f}'.format(iteration, np.exp(x), fx, simTimeElapsed))

    def _checkFeasible(self, params):
        mean = params.meanIncome
        tol = self.settings.constraintTol * mean
        if mean < self.grid.levels[0] - tol or mean > self.grid.levels[-1] + tol:
            raise InfeasibleError('Mean income {} lies outside the grid range [{}, {}]'.format(mean, self.grid.levels[0], self.grid.levels[-1]))
        if self.grid.n == 1 and abs(mean - self.grid.levels[0]) > tol:
            raise InfeasibleError('Mean income {} differs from the only level {}'.format(mean, self.grid.levels[0]))

    def innerSolve(self, beta, nConsumers):
        '''
        Solves Sum(a_k) = N for alpha at fixed beta

        Returns
        -------
        (alpha, counts, pinned)
        '''
        levels = self.grid.levels
        if self.regime == Regime.MONOPOLISTIC:
            logw = self._logg - beta * levels
            norm = logsumexp(logw)
            return norm - np.log(nConsumers), nConsumers * np.exp(logw - norm), False

        shift = beta * (levels - levels[0])
        def count(v):
            with np.errstate(over='ignore'):
                return np.sum(self._gm1 / np.expm1(np.exp(v) + shift)) - nConsumers

        sMin = beta * self.settings.condensateOffset * self.grid.spacing
        vMin = np.log(sMin)
        if count(vMin) <= 0:
            with np.errstate(over='ignore'):
                counts = self._gm1 / np.expm1(sMin + shift)
            counts[0] += nConsumers - np.sum(counts)
            return sMin - beta * levels[0], counts, True

        inner = RootSolver(SolverType.BISECTION, self.settings.innerTol, self.settings.maxInner)
        a, b, _, _ = inner.bracket(count, vMin, vMin, max(vMin, _MAX_LOG_SHIFT), increasing=False, geometric=False)
        s = np.exp(inner.solve(count, a, b))
        with np.errstate(over='ignore'):
            counts = self._gm1 / np.expm1(s + shift)
        return s - beta * levels[0], counts, False

    def _singleLevel(self, params):
        N = params.nConsumers
        beta = 1 / self.grid.spacing
        eps, g = self.grid.levels[0], self.grid.degeneracies[0]
        if self.regime == Regime.MONOPOLISTIC:
            alpha = np.log(g / N) - beta * eps
        else:
            alpha = np.log1p((g - 1) / N) - beta * eps
        return _fromMultipliers(alpha, beta, self.regime, [N])

    def _degenerate(self, occ):
        l = int(np.argmax(occ.counts))
        beta = 1 / self.grid.spacing
        mu = self.grid.levels[l]
        return EquilibriumSolution(float(-mu*beta), float(beta), float(mu), float(1/beta), self.regime, occ, 0.0, True)

    def solve(self, params, verbose = False, vIt = 10):
        '''
        Most probable occupancy for the given economy

        Parameters
        ----------
        params : EconomyParams
        verbose : bool (defaults to False)
            Prints the outer iteration if True
        vIt : int (defaults to 10)
            Number of outer evaluations between status outputs

        Returns
        -------
        EquilibriumSolution
        '''
        self._checkFeasible(params)
        degenerateOcc = detectDegenerateOccupancy(self.grid, self.regime, params)
        if degenerateOcc is not None:
            return self._degenerate(degenerateOcc)
        if self.grid.n == 1:
            return self._singleLevel(params)

        N, Pi = params.nConsumers, params.totalIncome
        levels = self.grid.levels
        scale = np.mean(levels)
        def incomeResidual(u):
            _, counts, _ = self.innerSolve(np.exp(u), N)
            return (np.dot(counts, levels) - Pi) / Pi

        if verbose:
            self.printHeader(params)
            start = time.time()
        outer = RootSolver(SolverType.BISECTION, self.settings.outerTol, self.settings.maxOuter)
        outer.setFunctions(printHeader=lambda: None, printStatus=self.printStatus)
        uLow = np.log(1 / (self.settings.betaRange * scale))
        uHigh = np.log(self.settings.betaRange / scale)
        try:
            a, b, _, _ = outer.bracket(incomeResidual, np.log(1 / scale), uLow, uHigh, increasing=False, geometric=False)
            u = outer.solve(incomeResidual, a, b, verbose, vIt)
        except DomainError:
            #Residual never changes sign, accept a limit if it satisfies the constraint
            rLow, rHigh = incomeResidual(uLow), incomeResidual(uHigh)
            if abs(rLow) <= self.settings.constraintTol:
                u = uLow
            elif abs(rHigh) <= self.settings.constraintTol:
                u = uHigh
            elif rLow < 0:
                raise InfeasibleError('Mean income {} exceeds the infinite temperature mean, a solution would need beta <= 0'.format(params.meanIncome))
            else:
                raise ConvergenceError('Income residual does not change sign for beta in the search range', {'income': rHigh})

        beta = np.exp(u)
        alpha, counts, pinned = self.innerSolve(beta, N)
        counts = np.maximum(counts, 0)
        residuals = {'count': (np.sum(counts) - N) / N, 'income': (np.dot(counts, levels) - Pi) / Pi}
        if any(abs(r) > self.settings.constraintTol for r in residuals.values()):
            raise ConvergenceError('Constraint residuals above {}: count = {:.3e}, income = {:.3e}'.format(
                self.settings.constraintTol, residuals['count'], residuals['income']), residuals)

        fraction = condensateFraction(beta, self.grid, N, self.regime)
        if verbose:
            print('Converged: beta = {:.6e}, alpha = {:.6e}, condensate fraction = {:.4f}{}\t{:.2f}'.format(
                beta, alpha, fraction, ' (mu pinned at eps_1)' if pinned else '', time.time() - start))
        return _fromMultipliers(alpha, beta, self.regime, counts, fraction)

def solve(params, grid, regime, verbose = False, **tolerances):
    '''
    Convenience wrapper around MaxEntSolver

    Parameters
    ----------
    params : EconomyParams
    grid : IncomeGrid
    regime : Regime
    verbose : bool (defaults to False)
    tolerances : keyword overrides of SolverSettings

    Returns
    -------
    EquilibriumSolution
    '''
    solver = MaxEntSolver(grid, regime)
    solver.setTolerances(**tolerances)
    return solver.solve(params, verbose=verbose)

def criticalIncome(params, grid, rtol = 0.01, settings = None):
    '''
    Total income at which the perfect competition solution starts to condense

    Below the critical income, condensateFraction > 0. The critical income is bracketed
    in the feasible range (N*eps_1, N*mean at infinite temperature) and bisected in ln(Pi)

    Parameters
    ----------
    params : EconomyParams
        Only nConsumers is used
    grid : IncomeGrid
    rtol : float (defaults to 0.01)
        Relative tolerance on the critical income
    settings : SolverSettings (optional)

    Returns
    -------
    float
    '''
    gm1 = grid.degeneracies - 1
    if grid.n == 1 or np.sum(gm1[1:]) == 0:
        raise DomainError('Condensation needs excited levels with g_k > 1')
    N = params.nConsumers
    solver = MaxEntSolver(grid, Regime.PERFECT, settings)
    hotMean = np.dot(gm1, grid.levels) / np.sum(gm1)
    def margin(logPi):
        solution = solver.solve(EconomyParams(N, np.exp(logPi)))
        return N - excitedCapacity(solution.beta, grid)

    low = np.log(N * (grid.levels[0] + 1e-3 * (hotMean - grid.levels[0])))
    high = np.log(N * (grid.levels[0] + (1 - 1e-3) * (hotMean - grid.levels[0])))
    if margin(low) <= 0:
        raise DomainError('No condensation in the feasible income range')
    if margin(high) > 0:
        raise DomainError('Condensed over the whole feasible income range')
    rootSolver = RootSolver(SolverType.BISECTION, np.log1p(rtol) / 2)
    return float(np.exp(rootSolver.solve(margin, low, high)))

def lagrangianGradient(solution, grid, step = 1e-5):
    '''
    Central finite difference gradient of ln(Omega) - alpha*Sum(a_k) - beta*Sum(a_k*eps_k)

    ln(Omega) uses the exact log-gamma form. The gradient vanishes (to O(1/a_k)) at the
    perfect competition solution. For monopolistic competition, the N! term shifts every
    component by digamma(N+1)

    Parameters
    ----------
    solution : EquilibriumSolution
    grid : IncomeGrid
    step : float (defaults to 1e-5)
        Relative step, h_k = step * a_k

    Returns
    -------
    array of float
    '''
    a = solution.occupancy.counts.astype(np.float64)
    def lagrangian(x):
        return logOmega(x, grid, solution.regime) - solution.alpha * np.sum(x) - solution.beta * np.dot(x, grid.levels)
    gradient = np.zeros(len(a))
    for k in range(len(a)):
        h = step * a[k] if a[k] > 0 else step
        up, down = a.copy(), a.copy()
        up[k] += h
        down[k] = max(down[k] - h, 0)
        gradient[k] = (lagrangian(up) - lagrangian(down)) / (up[k] - down[k])
    return gradient

def boltzmannLimitCheck(solution, grid):
    '''
    Largest relative deviation between Bose-Einstein and Boltzmann occupancies at the solution's (alpha, beta)

    Requires g_k >= 100 and g_k / a_k >= 100 at every level (sparse occupancy)

    Parameters
    ----------
    solution : EquilibriumSolution
        Perfect competition solution
    grid : IncomeGrid

    Returns
    -------
    float
    '''
    if solution.regime != Regime.PERFECT:
        raise PreconditionError('Boltzmann limit check needs a perfect competition solution')
    perfect = occupancyAt(solution.alpha, solution.beta, grid, Regime.PERFECT).counts
    g = grid.degeneracies
    for k in range(grid.n):
        if g[k] < 100 or perfect[k] * 100 > g[k]:
            raise PreconditionError('Occupancy is not sparse at level {}: g = {}, a = {}'.format(k, g[k], perfect[k]), level=k)
    monopolistic = occupancyAt(solution.alpha, solution.beta, grid, Regime.MONOPOLISTIC).counts
    return float(np.amax(np.abs(perfect - monopolistic) / monopolistic))

def enumerateFeasibleOccupancies(params, grid, rtol = 1e-9):
    '''
    Every integer occupancy with Sum(a_k) = N and Sum(a_k*eps_k) = Pi

    Yields
    ------
    OccupancyVector
    '''
    N, n = params.nConsumers, grid.n
    total = math.comb(N + n - 1, n - 1)
    if total > ENUMERATION_LIMIT:
        raise GuardExceededError('{} occupancies exceed the enumeration limit of {}'.format(total, ENUMERATION_LIMIT), size=total, limit=ENUMERATION_LIMIT)
    for counts in occupancyCompositions(N, n):
        if abs(np.dot(counts, grid.levels) - params.totalIncome) <= rtol * params.totalIncome:
            yield OccupancyVector(np.array(counts, dtype=np.int64))

def roundOccupancy(occ, params, grid):
    '''
    Feasible integer occupancy closest to occ in L1 distance (ties go to the lexicographically smallest)
    '''
    target = occ.counts.astype(np.float64)
    best, bestDistance = None, np.inf
    for candidate in enumerateFeasibleOccupancies(params, grid):
        distance = np.sum(np.abs(candidate.counts - target))
        if distance < bestDistance:
            best, bestDistance = candidate, distance
    if best is None:
        raise InfeasibleError('No integer occupancy satisfies N = {} and Pi = {} on this grid'.format(params.nConsumers, params.totalIncome))
    return best

def discreteArgmax(params, grid, regime):
    '''
    Exhaustive maximization of ln(Omega) over feasible integer occupancies

    Returns
    -------
    (list of OccupancyVector, float)
        All maximizers in lexicographic order and the maximal ln(Omega)
    '''
    best, bestValue = [], -np.inf
    for candidate in enumerateFeasibleOccupancies(params, grid):
        value = logOmega(candidate, grid, regime)
        if len(best) == 0 or value > bestValue + 1e-12 * abs(bestValue):
            best, bestValue = [candidate], value
        elif abs(value - bestValue) <= 1e-12 * abs(bestValue):
            best.append(candidate)
    if len(best) == 0:
        raise InfeasibleError('No integer occupancy satisfies N = {} and Pi = {} on this grid'.format(params.nConsumers, params.totalIncome))
    return best, bestValue
