import matplotlib.pyplot as plt
import numpy as np

from maxent_income.statistics.MaxEnt import occupancyAt
from maxent_income.statistics.Multiplicity import Regime

def plotOccupancy(solution, grid, ax = None, plotBoltzmann = False, normalize = False, *args, **kwargs):
    '''
    Plots the most probable occupancy against income level

    Parameters
    ----------
    solution : EquilibriumSolution
    grid : IncomeGrid
    ax : matplotlib Axes object (optional)
    plotBoltzmann : bool (defaults to False)
        For perfect competition solutions, also plots the Boltzmann occupancy at the same (alpha, beta)
    normalize : bool (defaults to False)
        Plots a_k / N instead of a_k
    '''
    if ax is None:
        fig, ax = plt.subplots(1,1)

    counts = solution.occupancy.counts
    scale = 1 / np.sum(counts) if normalize else 1
    ax.plot(grid.levels, counts * scale, label=solution.regime.name.capitalize(), *args, **kwargs)
    if plotBoltzmann and solution.regime == Regime.PERFECT:
        boltzmann = occupancyAt(solution.alpha, solution.beta, grid, Regime.MONOPOLISTIC).counts
        ax.plot(grid.levels, boltzmann * scale, linestyle='--', label='Boltzmann limit')
        ax.legend()

    if solution.condensateFraction > 0:
        ax.set_title('Condensate fraction = {:.3f}'.format(solution.condensateFraction))
    ax.set_xlim([grid.levels[0], grid.levels[-1]])
    ax.set_xlabel('Income')
    ax.set_ylabel('Fraction of consumers' if normalize else 'Consumers')
    return ax

def plotHistogram(histogram, ax = None, top = None, *args, **kwargs):
    '''
    Bar plot of macrostate tallies, most frequent first

    Parameters
    ----------
    histogram : dict
        OccupancyVector -> count
    ax : matplotlib Axes object (optional)
    top : int (optional)
        Number of macrostates to show, all if None
    '''
    if ax is None:
        fig, ax = plt.subplots(1,1)

    items = sorted(histogram.items(), key=lambda item: (-item[1], item[0].key()))
    if top is not None:
        items = items[:top]
    ax.bar(np.arange(len(items)), [count for _, count in items], *args, **kwargs)
    ax.set_xticks(np.arange(len(items)))
    ax.set_xticklabels([str(list(occ.key())) for occ, _ in items], rotation=90)
    ax.set_xlabel('Occupancy')
    ax.set_ylabel('Allocations')
    return ax
