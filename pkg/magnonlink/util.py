import logging
from math import pi
from functools import wraps
from time import time
from contextlib import contextmanager

import numpy as np

# Full round-trip precision for every float written to disk
FLOAT_FORMAT = '%.17g'
TWO_PI = 2*pi

logger = logging.getLogger(__name__)


def logexceptions(fn):
    """Decorator that logs exceptions.

    Logs all exceptions / stack traces in the decorated function before
    reraising.
    """
    @wraps(fn)
    def logged_fn(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except Exception as e:
            logger.exception(
                "{} in {}.".format(e.__class__.__name__, fn.__name__))
            raise e
    return logged_fn


@contextmanager
def logtiming(description, level=logging.INFO):
    '''Log the start and the elapsed time of a block.'''
    starttime = time()
    logger.log(level, "Starting {}.".format(description))
    yield
    logger.log(level, "Finished {} in {:.2f} seconds.".format(
        description, time()-starttime))


def wrap_to_interval(theta, lo):
    '''Map angles into [lo, lo + 2pi).'''
    return lo + np.mod(np.asarray(theta) - lo, TWO_PI)


def angle_difference(theta1, theta2):
    '''Signed circular difference theta1 - theta2 in [-pi, pi).'''
    return np.mod(np.asarray(theta1) - theta2 + pi, TWO_PI) - pi


def write_frame(frame, path):
    '''Write a DataFrame as CSV with a header and full float precision.'''
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.debug("Wrote {} rows to {}.".format(len(frame), path))


def parse_floats(s):
    '''Parse a comma separated list of floats.'''
    try:
        return [float(item) for item in s.split(',') if item.strip()]
    except ValueError:
        raise ValueError("Expected comma separated numbers, got {!r}.".format(
            s))
