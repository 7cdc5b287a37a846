import matplotlib.pyplot as plt
import numpy as np

from maxent_income.fitting.ParetoTail import ccdfArrays
from maxent_income.fitting.TwoClass import twoClassCurves

def plotCCDF(sample, ax = None, *args, **kwargs):
    '''
    Log-log empirical CCDF of a sample

    Parameters
    ----------
    sample : IncomeSample or array
    ax : matplotlib Axes object (optional)
    '''
    if ax is None:
        fig, ax = plt.subplots(1,1)

    values = getattr(sample, 'values', sample)
    x, ccdf = ccdfArrays(values)
    ax.loglog(x, ccdf, *args, **kwargs)
    ax.set_xlabel('Income')
    ax.set_ylabel('Fraction at or above income')
    return ax

def plotTwoClass(fit, sample, ax = None):
    '''
    Empirical CCDF with the fitted body and tail

    Parameters
    ----------
    fit : TwoClassFit
    sample : IncomeSample or array
    ax : matplotlib Axes object (optional)
    '''
    if ax is None:
        fig, ax = plt.subplots(1,1)

    curves = twoClassCurves(fit, sample)
    ax.loglog(curves['income'], curves['empirical_ccdf'], marker='.', linestyle='', label='Data')
    ax.loglog(curves['income'], curves['body_ccdf'], label='{} body, T = {:.3g}'.format(fit.bodyKind.label.capitalize(), fit.bodyTemperature))
    ax.loglog(curves['income'], curves['tail_ccdf'], linestyle='--', label=r'Pareto tail, $\gamma$ = {:.3g}'.format(fit.tail.gamma))
    ax.axvline(fit.crossover, color='k', linestyle=':')
    ax.set_ylim([0.5 / len(curves), 1.5])
    ax.set_xlabel('Income')
    ax.set_ylabel('Fraction at or above income')
    ax.legend()
    return ax
