"""
Exceptions raised by garchecf.
"""

import numpy as np

# pylint: disable=missing-docstring


class GarchEcfError(Exception):
    """
    Base class of every garchecf error.
    """


class DensityUnavailable(GarchEcfError, NotImplementedError):
    pass


class QuadratureError(GarchEcfError, RuntimeError):
    """
    Numerical integration did not reach the requested accuracy.
    """

    def __init__(self, message, abserr=None):
        super(QuadratureError, self).__init__(
            '{:s} (abserr={!r})'.format(message, abserr))
        self.abserr = abserr


class NonStationary(GarchEcfError, ValueError):
    pass


class NonPositiveVolatility(GarchEcfError, RuntimeError):
    pass


class InsufficientData(GarchEcfError, ValueError):
    pass


class MomentUnavailable(GarchEcfError, KeyError):
    pass


class SpectralRadiusError(GarchEcfError, RuntimeError):
    pass


class SingularWeighting(GarchEcfError, np.linalg.LinAlgError):
    """
    Weighting matrix could not be factored, even after the ridge.
    """

    def __init__(self, message, condition=None):
        super(SingularWeighting, self).__init__(
            '{:s} (condition number {:.3e})'.format(
                message, np.inf if condition is None else condition))
        self.condition = condition


class NoConvergence(GarchEcfError, RuntimeError):
    pass


class BoundaryStall(GarchEcfError, RuntimeError):
    pass


class ConfigError(GarchEcfError, ValueError):
    pass


class StudyFailure(GarchEcfError, RuntimeError):
    pass

# vim: set et fenc=utf-8 ff=unix sts=0 sw=4 ts=4 :
