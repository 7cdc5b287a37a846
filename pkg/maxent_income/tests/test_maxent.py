import numpy as np
from numpy.testing import assert_allclose
import pytest

from maxent_income.Errors import ConvergenceError, DomainError, InfeasibleError, PreconditionError, SubCriticalError
from maxent_income.income import EconomyParams, IncomeGrid, buildGrid, validateOccupancy
from maxent_income.statistics import Regime, MaxEntSolver, EquilibriumSolution, SolverSettings, solve, occupancyAt
from maxent_income.statistics import detectDegenerateOccupancy, boltzmannLimitCheck, criticalIncome, lagrangianGradient
from maxent_income.statistics import logOmega, roundOccupancy, discreteArgmax, enumerateFeasibleOccupancies
from maxent_income.tests.datasets import threeLevelGrid, integerGrid

def checkConservation(solution, params, grid, rtol = 1e-8):
    report = validateOccupancy(solution.occupancy, params, grid, rtol=rtol)
    assert report.feasible, (report.countResidual, report.incomeResidual)
    assert np.all(solution.occupancy.counts >= 0)
    assert solution.beta > 0
    assert_allclose(solution.temperature, 1 / solution.beta, rtol=1e-12)
    assert_allclose(solution.mu, -solution.alpha / solution.beta, rtol=1e-12)

def test_occupancy_at():
    grid = IncomeGrid.fromLevels([0.5])
    assert_allclose(occupancyAt(np.log(1 / 7), 0, grid, Regime.MONOPOLISTIC).counts, [7])

    grid = IncomeGrid.fromLevels([1, 2], [3, 3])
    assert_allclose(occupancyAt(0, np.log(2), grid, Regime.PERFECT).counts, [2, 2/3])

    #Single industry levels are empty under perfect competition
    grid = IncomeGrid.fromLevels([1, 2, 3])
    assert_allclose(occupancyAt(0.1, 1, grid, Regime.PERFECT).counts, [0, 0, 0])

def test_sub_critical():
    grid = IncomeGrid.fromLevels([1, 2], [3, 3])
    with pytest.raises(SubCriticalError) as e:
        occupancyAt(-1.5, 1, grid, Regime.PERFECT)
    assert e.value.level == 0

def test_symmetric_monopolistic():
    '''
    Mean income midway between two equivalent levels gives equal occupancy
    '''
    grid = IncomeGrid.fromLevels([0.5, 1.5])
    params = EconomyParams(2, 2)
    solution = solve(params, grid, Regime.MONOPOLISTIC)
    assert_allclose(solution.occupancy.counts, [1, 1], rtol=1e-6)
    assert np.isfinite(solution.beta)
    checkConservation(solution, params, grid)

def test_monopolistic_solve():
    grid = threeLevelGrid((1, 2, 3))
    params = EconomyParams(30, 40)
    solution = solve(params, grid, Regime.MONOPOLISTIC)
    checkConservation(solution, params, grid)
    assert np.all(solution.occupancy.counts > 0)
    assert not solution.degenerate
    assert solution.condensateFraction == 0
    assert_allclose(solution.occupancy.counts, occupancyAt(solution.alpha, solution.beta, grid, Regime.MONOPOLISTIC).counts, rtol=1e-12)

def test_perfect_solve():
    grid = threeLevelGrid((3, 3, 3))
    params = EconomyParams(30, 42)
    solution = solve(params, grid, Regime.PERFECT)
    checkConservation(solution, params, grid)
    assert solution.mu < grid.levels[0]
    assert solution.condensateFraction == 0

def test_comparative_statics():
    '''
    Raising total income at fixed N lowers beta
    '''
    grid = threeLevelGrid((1, 1, 1))
    betas = [solve(EconomyParams(30, pi), grid, Regime.MONOPOLISTIC).beta for pi in [20, 25, 30, 35, 40, 44]]
    assert np.all(np.diff(betas) < 0)

    grid = threeLevelGrid((3, 3, 3))
    betas = [solve(EconomyParams(30, pi), grid, Regime.PERFECT).beta for pi in [30, 34, 38, 42]]
    assert np.all(np.diff(betas) < 0)

def test_condensation():
    '''
    Low total income under perfect competition puts the excess at the lowest level
    '''
    grid = threeLevelGrid((3, 3, 3))
    params = EconomyParams(30, 20)
    solution = solve(params, grid, Regime.PERFECT)
    checkConservation(solution, params, grid)
    assert solution.condensateFraction > 0.5
    assert solution.mu < grid.levels[0]

def test_critical_income():
    grid = threeLevelGrid((3, 3, 3))
    critical = criticalIncome(EconomyParams(30, 1), grid)
    assert 20 < critical < 42
    assert solve(EconomyParams(30, 0.98 * critical), grid, Regime.PERFECT).condensateFraction > 0
    assert solve(EconomyParams(30, 1.02 * critical), grid, Regime.PERFECT).condensateFraction == 0

    #Condensate fraction decreases as income rises
    fractions = [solve(EconomyParams(30, pi), grid, Regime.PERFECT).condensateFraction for pi in np.linspace(18, 0.98 * critical, 6)]
    assert np.all(np.diff(fractions) < 0)

    with pytest.raises(DomainError):
        criticalIncome(EconomyParams(30, 1), threeLevelGrid((3, 1, 1)))

def test_mixed_single_industry():
    '''
    A single industry at the lowest level holds the condensate, mu pinned just below eps_1
    '''
    grid = threeLevelGrid((1, 3, 3))
    params = EconomyParams(30, 20)
    solution = solve(params, grid, Regime.PERFECT)
    checkConservation(solution, params, grid)
    assert solution.mu < grid.levels[0]
    assert_allclose(solution.mu, grid.levels[0] - 1e-9 * grid.spacing, atol=1e-12)
    assert solution.condensateFraction > 0
    assert_allclose(solution.occupancy.counts[0], solution.condensateFraction * 30, rtol=1e-6)

def test_degenerate_occupancy():
    grid = threeLevelGrid((1, 1, 1))
    params = EconomyParams(10, 15)
    occ = detectDegenerateOccupancy(grid, Regime.PERFECT, params)
    assert occ.key() == (0, 10, 0)

    solution = solve(params, grid, Regime.PERFECT)
    assert solution.degenerate
    assert_allclose(solution.occupancy.counts, [0, 10, 0])
    assert_allclose(solution.mu, 1.5)

    assert detectDegenerateOccupancy(threeLevelGrid((1, 2, 1)), Regime.PERFECT, params) is None
    assert detectDegenerateOccupancy(grid, Regime.MONOPOLISTIC, params) is None

    solution = solve(EconomyParams(4, 2), IncomeGrid.fromLevels([0.5]), Regime.PERFECT)
    assert_allclose(solution.occupancy.counts, [4])

def test_degenerate_snapping():
    '''
    Ties go to the lower level, off-grid means snap with a warning
    '''
    grid = threeLevelGrid((1, 1, 1))
    assert detectDegenerateOccupancy(grid, Regime.PERFECT, EconomyParams(10, 10)).key() == (10, 0, 0)

    grid = IncomeGrid.fromLevels([1, 2, 6])
    with pytest.warns(UserWarning):
        occ = detectDegenerateOccupancy(grid, Regime.PERFECT, EconomyParams(5, 20))
    assert occ.key() == (0, 5, 0)

def test_single_level():
    grid = IncomeGrid.fromLevels([2.0], [5], binWidth=1.0)
    for regime in Regime:
        solution = solve(EconomyParams(3, 6), grid, regime)
        assert_allclose(solution.occupancy.counts, [3])
        assert_allclose(occupancyAt(solution.alpha, solution.beta, grid, regime).counts, [3], rtol=1e-12)
    with pytest.raises(InfeasibleError):
        solve(EconomyParams(3, 7), grid, Regime.MONOPOLISTIC)

def test_infeasible():
    grid = threeLevelGrid((3, 3, 3))
    with pytest.raises(InfeasibleError):
        solve(EconomyParams(10, 30), grid, Regime.MONOPOLISTIC)
    with pytest.raises(InfeasibleError):
        solve(EconomyParams(10, 2), grid, Regime.PERFECT)

    #Above the infinite temperature mean, a solution would need beta <= 0
    with pytest.raises(InfeasibleError):
        solve(EconomyParams(10, 20), grid, Regime.PERFECT)

def test_iteration_cap():
    grid = threeLevelGrid((1, 2, 3))
    with pytest.raises(ConvergenceError):
        solve(EconomyParams(30, 40), grid, Regime.MONOPOLISTIC, maxOuter=1)

def test_settings():
    solver = MaxEntSolver(threeLevelGrid(), Regime.MONOPOLISTIC)
    solver.setTolerances(constraintTol='1e-6', maxOuter='50')
    assert solver.settings.constraintTol == 1e-6
    assert solver.settings.maxOuter == 50
    assert isinstance(solver.settings.maxOuter, int)
    with pytest.raises(DomainError):
        solver.setTolerances(unknown=1)
    with pytest.raises(DomainError):
        solver.setTolerances(innerTol=-1)
    assert SolverSettings().innerTol == 1e-12

def test_verbose(capsys):
    solver = MaxEntSolver(threeLevelGrid((1, 2, 3)), Regime.MONOPOLISTIC)
    solver.solve(EconomyParams(30, 40), verbose=True, vIt=5)
    output = capsys.readouterr().out
    assert 'monopolistic' in output
    assert 'Converged' in output

def test_solution_dict():
    grid = threeLevelGrid((3, 3, 3))
    solution = solve(EconomyParams(30, 20), grid, Regime.PERFECT)
    data = solution.toDict()
    for key in ['alpha', 'beta', 'mu', 'temperature', 'occupancy', 'condensate_fraction', 'degenerate']:
        assert key in data
    loaded = EquilibriumSolution.fromDict(data)
    assert loaded.regime == Regime.PERFECT
    assert_allclose(loaded.occupancy.counts, solution.occupancy.counts, rtol=0)
    assert_allclose(loaded.mu, solution.mu, rtol=1e-12)

def test_stationarity():
    '''
    The gradient of the Lagrangian vanishes at the perfect competition solution
    '''
    grid = IncomeGrid.fromLevels([1, 2, 3, 4], [200000]*4)
    params = EconomyParams(1000000, 2300000)
    solution = solve(params, grid, Regime.PERFECT)
    checkConservation(solution, params, grid)
    assert solution.condensateFraction == 0
    gradient = lagrangianGradient(solution, grid)
    assert np.all(np.abs(gradient) < 1e-4)

def test_stationarity_sweep():
    '''
    Sparse perfect competition economies on 3 to 5 levels
    '''
    rng = np.random.default_rng(31)
    for _ in range(20):
        n = int(rng.integers(3, 6))
        grid = IncomeGrid.fromLevels(np.arange(1, n+1), rng.integers(2000000, 5000001, n))
        N = int(rng.integers(500000, 1000001))
        hot = np.dot(grid.degeneracies - 1, grid.levels) / np.sum(grid.degeneracies - 1)
        mean = grid.levels[0] + rng.uniform(0.6, 0.9) * (hot - grid.levels[0])
        params = EconomyParams(N, N * mean)
        solution = solve(params, grid, Regime.PERFECT)
        assert solution.condensateFraction == 0
        assert np.all(np.abs(lagrangianGradient(solution, grid)) < 1e-4)

def test_boltzmann_limit():
    grid = threeLevelGrid((10000, 10000, 10000))
    solution = solve(EconomyParams(30, 44), grid, Regime.PERFECT)
    assert boltzmannLimitCheck(solution, grid) < 2e-3

    deviations = []
    for g in [1e4, 1e5, 1e6]:
        grid = threeLevelGrid((int(g),)*3)
        deviations.append(boltzmannLimitCheck(solve(EconomyParams(30, 44), grid, Regime.PERFECT), grid))
    assert np.all(np.diff(deviations) < 0)

def test_boltzmann_limit_dense():
    grid = threeLevelGrid((3, 3, 3))
    solution = solve(EconomyParams(30, 42), grid, Regime.PERFECT)
    with pytest.raises(PreconditionError) as e:
        boltzmannLimitCheck(solution, grid)
    assert e.value.level == 0

    with pytest.raises(PreconditionError):
        boltzmannLimitCheck(solve(EconomyParams(30, 42), grid, Regime.MONOPOLISTIC), grid)

def test_discrete_argmax():
    '''
    The best integer occupancy is at least as good as the rounded continuous solution,
    and the rounded solution is within 5%
    '''
    for degeneracies, N in [((1, 2, 3), 9), ((1, 1, 1), 10)]:
        grid = integerGrid(degeneracies)
        params = EconomyParams(N, N)
        solution = solve(params, grid, Regime.MONOPOLISTIC)
        rounded = roundOccupancy(solution.occupancy, params, grid)
        best, value = discreteArgmax(params, grid, Regime.MONOPOLISTIC)
        roundedValue = logOmega(rounded, grid, Regime.MONOPOLISTIC)
        assert value >= roundedValue
        assert (value - roundedValue) / value <= 0.05
        assert rounded in best

    grid = integerGrid((1, 2, 3))
    assert len(list(enumerateFeasibleOccupancies(EconomyParams(9, 9), grid))) == 5

def hotMean(grid, regime):
    '''
    Mean income as beta goes to 0
    '''
    weights = grid.degeneracies if regime == Regime.MONOPOLISTIC else grid.degeneracies - 1
    return np.dot(weights, grid.levels) / np.sum(weights)

def test_conservation_sweep():
    '''
    Both constraints hold on random grids with the mean income between the lowest level and the hot mean
    '''
    rng = np.random.default_rng(29)
    for _ in range(200):
        regime = Regime.MONOPOLISTIC if rng.random() < 0.5 else Regime.PERFECT
        n = int(rng.integers(2, 7))
        lowest = 1 if regime == Regime.MONOPOLISTIC else 2
        grid = buildGrid(0, rng.uniform(1, 100), n, list(rng.integers(lowest, 6, n)))
        N = int(rng.integers(1, 1001))
        mean = grid.levels[0] + rng.uniform(0.05, 0.95) * (hotMean(grid, regime) - grid.levels[0])
        params = EconomyParams(N, N * mean)
        checkConservation(solve(params, grid, regime), params, grid)

def test_discrete_argmax_sweep():
    rng = np.random.default_rng(37)
    for _ in range(50):
        n = int(rng.choice([3, 4]))
        grid = integerGrid(tuple(rng.integers(1, 4, n)))
        N = int(rng.integers(10, 26))
        Pi = max(1, int(round(rng.uniform(0.3, 0.8) * hotMean(grid, Regime.MONOPOLISTIC) * N)))
        params = EconomyParams(N, Pi)
        solution = solve(params, grid, Regime.MONOPOLISTIC)
        rounded = roundOccupancy(solution.occupancy, params, grid)
        _, value = discreteArgmax(params, grid, Regime.MONOPOLISTIC)
        roundedValue = logOmega(rounded, grid, Regime.MONOPOLISTIC)
        assert value >= roundedValue
        assert value - roundedValue <= 0.05 * value
