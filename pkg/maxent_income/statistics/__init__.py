from .Multiplicity import Regime, Multiplicity, omegaExact, logOmega, logOmegaStirling, entropy, oracleCount, occupancyCompositions
from .MaxEnt import SolverSettings, EquilibriumSolution, MaxEntSolver, solve, occupancyAt, detectDegenerateOccupancy, boltzmannLimitCheck
from .MaxEnt import excitedCapacity, condensateFraction, criticalIncome, lagrangianGradient
from .MaxEnt import enumerateFeasibleOccupancies, roundOccupancy, discreteArgmax
