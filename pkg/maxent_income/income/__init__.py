from .IncomeModel import EconomyParams, IncomeGrid, Allocation, OccupancyVector, OccupancyReport
from .IncomeModel import buildGrid, binIncomes, binAllocation, validateOccupancy
