from .Random import spawnGenerators, generator, checkSeed
from .Ensemble import EnsembleMode, EnsembleSpec, compositionCount, enumerateAllocations, drawSamples, sampleUniform
from .Ensemble import macrostateHistogram, mostProbableMacrostate, histogramRecords
