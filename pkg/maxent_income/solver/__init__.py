from .Solver import RootSolver, SolverType
