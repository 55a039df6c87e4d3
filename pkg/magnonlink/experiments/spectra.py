import logging

import numpy as np
import pandas as pd

from magnonlink.config import config
from magnonlink.util import FLOAT_FORMAT, write_frame

logger = logging.getLogger(__name__)


def default_linewidth(nu_c):
    '''Effective cavity linewidth nu_c / Q.'''
    return nu_c / config.getfloat("experiments", "quality_factor")


def lorentzian(nu, center, linewidth, height=1.):
    half = 0.5*linewidth
    return height*half**2 / ((np.asarray(nu) - center)**2 + half**2)


def spectra_map(sweep, nu_grid, linewidth=None):
    '''Emission map: one Lorentzian row per sweep point.

    Rows follow the sweep order, columns follow nu_grid. Each peak sits at
    the selected nu_s with height A^2 (1 when the amplitude is unknown).
    '''
    if linewidth is None:
        linewidth = default_linewidth(sweep.nu_c)
    if not linewidth > 0:
        raise ValueError("linewidth must be > 0.")
    nu_grid = np.asarray(nu_grid, dtype=float)
    centers = sweep.nu_s
    heights = np.array([
        point.selected.A**2 if np.isfinite(point.selected.A) else 1.
        for point in sweep.points])
    return lorentzian(nu_grid[np.newaxis, :], centers[:, np.newaxis],
                      linewidth, heights[:, np.newaxis])


def write_matrix(path, deltas, nu_grid, matrix):
    '''Matrix file: first column delta, one column per nu.'''
    frame = pd.DataFrame(matrix, columns=[FLOAT_FORMAT % nu
                                          for nu in nu_grid])
    frame.insert(0, 'delta', deltas)
    write_frame(frame, path)
