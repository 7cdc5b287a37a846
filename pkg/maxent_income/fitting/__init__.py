from .ParetoTail import TailModel, AttachmentGraph, generatePreferentialAttachment, degreesToIncome, fitPowerLaw
from .ParetoTail import samplePareto, ccdfArrays, ccdfSlope, calibrateTailKS
from .TwoClass import BodyKind, IncomeSample, BodyFit, TwoClassFit, loadIncomeCSV, empiricalCCDF
from .TwoClass import fitBoltzmannBody, fitBoseEinsteinBody, fitTwoClass, sampleTwoClass, twoClassCurves
