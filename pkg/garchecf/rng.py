"""
Reproducible random streams.

Every generator is a Philox (counter-based) bit generator keyed by a
``SeedSequence(seed, spawn_key=(stream,))``, so stream ``k`` of a master
seed does not depend on which worker draws it or in which order.
"""

import numbers

import numpy as np

# pylint: disable=invalid-name


def check_seed(seed):
    # type: (int) -> int
    """
    Validate a master seed.
    :param seed: non-negative integer
    :return: the seed as a python int
    """
    if isinstance(seed, (bool, np.bool_)) or \
            not isinstance(seed, numbers.Integral) or seed < 0:
        raise ValueError('seed must be a non-negative integer, got {!r}'.format(seed))
    return int(seed)


def stream(seed, *key):
    # type: (int, int) -> np.random.Generator
    """
    Generator for sub-stream ``key`` of master ``seed``.
    :param seed: non-negative integer master seed
    :param key: integers identifying the stream, e.g. a replication index
    :return: numpy Generator
    """
    seed = check_seed(seed)
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def as_generator(seed):
    """
    Accept a seed or an existing Generator.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return stream(seed)

# vim: set et fenc=utf-8 ff=unix sts=0 sw=4 ts=4 :
