from enum import Enum
import time

import numpy as np
import scipy.optimize as sopt

from maxent_income.Errors import ConvergenceError, DomainError

class SolverType(Enum):
    BISECTION = 0
    BRENT = 1

class RootSolver:
    '''
    Bracketing root solver for monotone scalar functions

    A root is found in two steps
        1. bracket - expand an interval from a starting guess until f changes sign
        2. solve - shrink the bracket with the selected scheme until xtol is met

    Parameters
    ----------
    solverType : SolverType or function (defaults to SolverType.BISECTION)
        Scheme used to shrink the bracket
        A function must follow the scipy.optimize.bisect signature
    xtol : float (defaults to 1e-12)
        Absolute tolerance on the root
    maxIterations : int (defaults to 200)
        Maximum number of iterations when shrinking the bracket
    '''
    def __init__(self, solverType = SolverType.BISECTION, xtol = 1e-12, maxIterations = 200):
        self.xtol = xtol
        self.maxIterations = maxIterations
        self.setSolverType(solverType)
        self.setFunctions()

    def setSolverType(self, solverType):
        '''
        Parameters
        ----------
        solverType : SolverType or function
        '''
        if solverType == SolverType.BISECTION:
            self.iterator = sopt.bisect
        elif solverType == SolverType.BRENT:
            self.iterator = sopt.brentq
        else:
            self.iterator = solverType

    def setFunctions(self, printHeader = None, printStatus = None):
        '''
        Sets output functions used when verbose is True

        If any of these are not defined, then the default defined here is used
        '''
        self.printHeader = self.defaultPrintHeader if printHeader is None else printHeader
        self.printStatus = self.defaultPrintStatus if printStatus is None else printStatus

    def defaultPrintHeader(self):
        print('Evaluation\tx\t\tf(x)\t\tRun Time(s)')

    def defaultPrintStatus(self, iteration, x, fx, simTimeElapsed):
        print('{}\t\t{:.6e}\t{:.3e}\t{:.2f}'.format(iteration, x, fx, simTimeElapsed))

    def _wrap(self, f, verbose, vIt):
        '''
        Wraps f to print status every vIt evaluations
        '''
        if not verbose:
            return f
        state = {'n': 0, 'start': time.time()}
        def g(x):
            fx = f(x)
            if state['n'] % vIt == 0:
                self.printStatus(state['n'], x, fx, time.time() - state['start'])
            state['n'] += 1
            return fx
        self.printHeader()
        return g

    def bracket(self, f, x0, lower, upper, increasing, geometric = True, factor = 10):
        '''
        Expands from x0 until f changes sign

        Parameters
        ----------
        f : function
            Monotone function of a single variable
        x0 : float
            Starting guess, must lie in [lower, upper]
        lower, upper : float
            Search limits
        increasing : bool
            Whether f is increasing in x
        geometric : bool (defaults to True)
            If True, steps multiply x by factor (x must be positive)
            If False, steps are added to x and double after each expansion
        factor : float (defaults to 10)

        Returns
        -------
        (a, b, fa, fb) with a < b and f(a), f(b) of opposite sign (or one of them zero)
        '''
        x = min(max(x0, lower), upper)
        fx = f(x)
        if fx == 0:
            return x, x, fx, fx
        #Direction that moves f towards zero
        up = (fx < 0) == increasing
        step = factor if geometric else max(abs(x), 1.0)
        for i in range(self.maxIterations):
            if up:
                xNew = min(x * step, upper) if geometric else min(x + step, upper)
            else:
                xNew = max(x / step, lower) if geometric else max(x - step, lower)
            fNew = f(xNew)
            if np.sign(fNew) != np.sign(fx):
                if xNew < x:
                    return xNew, x, fNew, fx
                return x, xNew, fx, fNew
            if xNew == (upper if up else lower):
                raise DomainError('No sign change of f in [{:.3e}, {:.3e}]'.format(lower, upper))
            x, fx = xNew, fNew
            if not geometric:
                step *= 2
        raise ConvergenceError('Bracket not found within {} expansions'.format(self.maxIterations), {'f': fx})

    def solve(self, f, a, b, verbose = False, vIt = 10):
        '''
        Finds root of f in [a, b]

        Parameters
        ----------
        f : function
        a, b : float
            Bracket with f(a) and f(b) of opposite sign
        verbose : bool (defaults to False)
            Outputs status if true
        vIt : int (defaults to 10)
            Number of evaluations between status outputs

        Returns
        -------
        root : float
        '''
        if a == b:
            return a
        g = self._wrap(f, verbose, vIt)
        root, result = self.iterator(g, a, b, xtol=self.xtol, maxiter=self.maxIterations, full_output=True, disp=False)
        if not result.converged:
            raise ConvergenceError('Root solver did not converge after {} iterations'.format(result.iterations), {'x': root, 'f': f(root)})
        return root
