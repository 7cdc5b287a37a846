'''
Exceptions raised by maxent_income

DomainError covers invalid inputs and problems with no admissible answer
(infeasible mean income, enumeration guards, sub-critical Bose-Einstein
parameters). ConvergenceError is raised when an iterative solver runs out
of iterations; it carries the final residuals.
'''

class MaxEntIncomeError(Exception):
    pass

class DomainError(MaxEntIncomeError, ValueError):
    pass

class InfeasibleError(DomainError):
    pass

class GuardExceededError(DomainError):
    '''
    Instance is too large for exhaustive enumeration

    Parameters
    ----------
    size : int
        Computed size of the instance (number of items that would be enumerated)
    limit : int
        Maximum allowed size
    '''
    def __init__(self, message, size = None, limit = None):
        super().__init__(message)
        self.size = size
        self.limit = limit

class SubCriticalError(DomainError):
    '''
    Bose-Einstein occupancy requested with e^(alpha + beta*eps_k) <= 1

    Parameters
    ----------
    level : int
        Index of the first offending level
    '''
    def __init__(self, message, level = None):
        super().__init__(message)
        self.level = level

class PreconditionError(DomainError):
    def __init__(self, message, level = None):
        super().__init__(message)
        self.level = level

class ConvergenceError(MaxEntIncomeError, RuntimeError):
    '''
    Iteration cap reached before the tolerance was met

    Parameters
    ----------
    residuals : dict
        Final residuals, keyed by constraint name
    '''
    def __init__(self, message, residuals = None):
        super().__init__(message)
        self.residuals = {} if residuals is None else dict(residuals)
