'''
Seeded random streams

Every stochastic function takes an integer seed. Independent sub-streams are
derived from a seed with spawnGenerators, which splits numpy's SeedSequence
into child sequences, each driving its own PCG64 generator

The split is deterministic: stream i of seed s is the same for any pool or
number of workers. Changing the number of streams changes how draws are divided
among them, so the number of streams is part of the configuration
'''
import numpy as np

from maxent_income.Errors import DomainError

MAX_SEED = 2**64

def checkSeed(seed):
    '''
    Seeds must be unsigned 64-bit integers
    '''
    if seed is None or int(seed) != seed or seed < 0 or seed >= MAX_SEED:
        raise DomainError('Seed must be an integer in [0, 2^64), got {}'.format(seed))
    return int(seed)

def spawnGenerators(seed, streams = 1):
    '''
    Independent generators derived from a single seed

    Parameters
    ----------
    seed : int
    streams : int (defaults to 1)

    Returns
    -------
    list of numpy.random.Generator
    '''
    if int(streams) != streams or streams < 1:
        raise DomainError('Number of streams must be a positive integer, got {}'.format(streams))
    children = np.random.SeedSequence(checkSeed(seed)).spawn(int(streams))
    return [np.random.Generator(np.random.PCG64(child)) for child in children]

def generator(seed):
    '''
    Single generator for seed (stream 0 of spawnGenerators)
    '''
    return spawnGenerators(seed, 1)[0]
