'''Recover couplings and damping from measured dispersion points.

The loss is the weighted sum of squared nu_s residuals. Points carrying
a sweep direction are predicted by continuation along that direction;
points without one take the stable steady state closest to the data.
Multi-start Nelder-Mead handles the piecewise-smooth loss.
'''
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from time import time

import numpy as np
import pandas as pd
from scipy.optimize import minimize
from tabulate import tabulate

from magnonlink.config import config, get_threads, presets
from magnonlink.model import CouplingSet
from magnonlink.simul.sync import solve_grid
from magnonlink.experiments.sweep import (
    follow_branches, NoSynchronizationError)
from magnonlink.util import logexceptions, write_frame

FIT_PARAMS = ('g', 'J', 'Gamma', 'alpha_eff', 'nu_c')
ALIASES = {'alpha': 'alpha_eff'}
COUPLINGS = ('g', 'J', 'Gamma')
HINTS = ('up', 'down', None)
DAMPING_BOUNDS = (1e-4, 1e3)
COUPLING_BOUNDS = (-1e3, 1e3)
NU_C_OFFSET_BOUNDS = (-1e3, 1e3)
PENALTY = 1e12
MIN_POINTS = 4
# Log-normal spread of the jittered starts, and nu_c offset spread (MHz)
JITTER_LOG_SCALE = 0.25
JITTER_NU_C = 1.

logger = logging.getLogger(__name__)


class DispersionData(object):
    '''Measured (delta, nu_s) points with optional sweep-direction hints.'''

    def __init__(self, deltas, nu_s, hints=None, weights=None):
        self.deltas = np.asarray(deltas, dtype=float)
        self.nu_s = np.asarray(nu_s, dtype=float)
        if hints is None:
            hints = [None]*len(self.deltas)
        self.hints = list(hints)
        if weights is None:
            weights = np.ones(len(self.deltas))
        self.weights = np.asarray(weights, dtype=float)

    def check(self):
        n = len(self.deltas)
        if not (len(self.nu_s) == len(self.hints) == len(self.weights) == n):
            raise ValueError("Dispersion columns must have equal lengths.")
        if n < MIN_POINTS:
            raise ValueError("Need at least {} points, got {}.".format(
                MIN_POINTS, n))
        if not (np.all(np.isfinite(self.deltas)) and
                np.all(np.isfinite(self.nu_s))):
            raise ValueError("Dispersion points must be finite.")
        if not np.all(np.isfinite(self.weights) & (self.weights > 0)):
            raise ValueError("Weights must be finite and > 0.")
        bad = set(self.hints) - set(HINTS)
        if bad:
            raise ValueError("Unknown branch hints: {}.".format(bad))

    @property
    def points(self):
        return list(zip(self.deltas, self.nu_s, self.hints))

    def to_frame(self):
        return pd.DataFrame({
            'delta_mhz': self.deltas,
            'nu_s_mhz': self.nu_s,
            'branch': [hint or 'none' for hint in self.hints],
            'weight': self.weights,
        }, columns=['delta_mhz', 'nu_s_mhz', 'branch', 'weight'])

    def write_csv(self, path):
        write_frame(self.to_frame(), path)

    def __len__(self):
        return len(self.deltas)


class FitResult(object):

    def __init__(self, params, rms_residual, iterations, converged,
                 loss=None, starts=1):
        self.params = params
        self.rms_residual = rms_residual
        self.iterations = iterations
        self.converged = converged
        self.loss = loss
        self.starts = starts

    def to_dict(self):
        return {
            'params': dict(self.params),
            'rms_residual': self.rms_residual,
            'iterations': self.iterations,
            'converged': self.converged,
            'loss': self.loss,
            'starts': self.starts,
        }

    def write_json(self, path):
        with open(path, 'w') as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)

    def __str__(self):
        table = sorted(self.params.items())
        table.extend([
            ("RMS residual (MHz)", self.rms_residual),
            ("Iterations", self.iterations),
            ("Converged", self.converged)])
        return tabulate(table)

    def __repr__(self):
        return "FitResult({})".format(self.to_dict())


def predict_nu_s(c, nu_c, data):
    '''Model nu_s at the data points.'''
    udeltas, inverse = np.unique(data.deltas, return_inverse=True)
    solutions = solve_grid(udeltas, c)
    pred = np.empty(len(data))
    hints = np.array([hint or 'none' for hint in data.hints])
    for direction in ('up', 'down'):
        idxs = np.flatnonzero(hints == direction)
        if not len(idxs):
            continue
        idxs = idxs[np.argsort(data.deltas[idxs], kind='stable')]
        if direction == 'down':
            idxs = idxs[::-1]
        selected, jumps = follow_branches(
            data.deltas[idxs], [solutions[inverse[i]] for i in idxs],
            direction)
        pred[idxs] = [nu_c + s.nu_s for s in selected]
    for i in np.flatnonzero(hints == 'none'):
        stable = [s for s in solutions[inverse[i]] if s.stable]
        if not stable:
            raise NoSynchronizationError(
                "no stable steady state at delta = {}.".format(
                    data.deltas[i]))
        pred[i] = min((nu_c + s.nu_s for s in stable),
                      key=lambda nu: abs(nu - data.nu_s[i]))
    return pred


class DispersionObjective(object):
    '''Weighted squared nu_s residuals as a function of the free values.

    x holds the free parameters in the order of names; nu_c enters as an
    offset from nu_c0. Out-of-bounds values are penalized.
    '''

    def __init__(self, data, names, template, nu_c0):
        self.data = data
        self.names = list(names)
        self.template = template
        self.nu_c0 = nu_c0

    def unpack(self, x):
        '''Returns (CouplingSet, nu_c) at x.'''
        values = dict(zip(self.names, x))
        couplings = {name: values[name] for name in COUPLINGS
                     if name in values}
        if 'alpha_eff' in values:
            couplings['alpha_eff'] = complex(
                values['alpha_eff'], self.template.alpha_eff.imag)
        c = self.template.replace(**couplings)
        return c, self.nu_c0 + values.get('nu_c', 0.)

    def excess(self, x):
        '''Total distance of x outside the parameter bounds.'''
        total = 0.
        for name, value in zip(self.names, x):
            if name == 'alpha_eff':
                lo, hi = DAMPING_BOUNDS
            elif name == 'nu_c':
                lo, hi = NU_C_OFFSET_BOUNDS
            else:
                lo, hi = COUPLING_BOUNDS
            total += max(lo - value, 0.) + max(value - hi, 0.)
        return total

    def residuals(self, x):
        c, nu_c = self.unpack(x)
        return predict_nu_s(c, nu_c, self.data) - self.data.nu_s

    def __call__(self, x):
        excess = self.excess(x)
        if excess > 0:
            return PENALTY*(1 + excess)
        try:
            residuals = self.residuals(x)
        except ValueError:
            return PENALTY
        return float(np.sum(self.data.weights*residuals**2))


def fit_dispersion(data, free, init=None, model=None, starts=None, seed=None,
                   maxiter=None, threads=None):
    '''Fit the free parameters to dispersion data.

    free is a subset of g, J, Gamma, alpha_eff (alias alpha) and nu_c.
    init maps parameter names to initial guesses; the remaining values
    come from the model CouplingSet. Start 0 is init itself, the others
    are jittered copies drawn from a seeded generator.
    '''
    if starts is None:
        starts = config.getint("fitting", "starts")
    if seed is None:
        seed = config.getint("fitting", "seed")
    if maxiter is None:
        maxiter = config.getint("fitting", "maxiter")
    if threads is None:
        threads = get_threads()
    data.check()
    if np.ptp(data.deltas) == 0:
        raise ValueError("Degenerate data: all points share one detuning.")
    names = _normalize_names(free)
    if not names:
        raise ValueError("No free parameters.")
    init = {ALIASES.get(key, key): value
            for key, value in (init or {}).items()}
    unknown = set(init) - set(FIT_PARAMS)
    if unknown:
        raise ValueError("Unknown parameters in init: {}.".format(
            sorted(unknown)))

    template = model if model is not None else CouplingSet()
    fixed = {name: init[name] for name in init
             if name not in names and name in COUPLINGS}
    if 'alpha_eff' in init and 'alpha_eff' not in names:
        fixed['alpha_eff'] = complex(init['alpha_eff'])
    template = template.replace(**fixed)
    nu_c0 = float(init.get('nu_c', presets['cavity']['nu_c']))

    x0 = []
    for name in names:
        if name == 'nu_c':
            x0.append(0.)
        elif name == 'alpha_eff':
            x0.append(float(np.real(init.get(name, template.alpha_re))))
        else:
            x0.append(float(init.get(name, getattr(template, name))))
    objective = DispersionObjective(data, names, template, nu_c0)
    if objective.excess(x0) > 0:
        raise ValueError("Initial guess outside the parameter bounds.")

    rng = np.random.default_rng(seed)
    xstarts = [np.array(x0)] + [_jitter(x0, names, rng)
                                for i in range(starts-1)]
    options = {
        'maxiter': maxiter,
        'xatol': config.getfloat("fitting", "xatol"),
        'fatol': config.getfloat("fitting", "fatol"),
    }

    starttime = time()
    logger.info("Fitting {} to {} points with {} starts.".format(
        ", ".join(names), len(data), starts))
    numworkers = min(threads, starts)
    if numworkers > 1:
        with ProcessPoolExecutor(max_workers=numworkers) as executor:
            results = list(executor.map(
                _run_start, [objective]*starts, xstarts, [options]*starts))
    else:
        results = [_run_start(objective, x, options) for x in xstarts]

    best = min(range(starts), key=lambda i: (results[i][1], i))
    xbest, loss, nit, success = results[best]
    c, nu_c = objective.unpack(xbest)
    params = {}
    for name in names:
        if name == 'nu_c':
            params[name] = nu_c
        elif name == 'alpha_eff':
            params[name] = c.alpha_re
        else:
            params[name] = getattr(c, name)
    rms = float(np.sqrt(loss / np.sum(data.weights)))
    logger.info("Fit finished in {:.2f} seconds: rms {:.3g} MHz, "
                "start {} of {}.".format(time()-starttime, rms, best,
                                         starts))
    return FitResult(params, rms, int(nit), bool(success), loss=float(loss),
                     starts=starts)


@logexceptions
def _run_start(objective, x0, options):
    options = dict(options)
    options['initial_simplex'] = _initial_simplex(x0, objective.names)
    res = minimize(objective, x0, method='Nelder-Mead', options=options)
    return res.x, float(res.fun), res.nit, res.success


def _initial_simplex(x0, names):
    simplex = [np.array(x0, dtype=float)]
    for i, name in enumerate(names):
        vertex = np.array(x0, dtype=float)
        if name == 'nu_c':
            vertex[i] += 0.5
        else:
            vertex[i] += 0.1*abs(x0[i]) if x0[i] != 0 else 0.5
        simplex.append(vertex)
    return np.array(simplex)


def _jitter(x0, names, rng):
    x = np.array(x0, dtype=float)
    for i, name in enumerate(names):
        if name == 'nu_c':
            x[i] += JITTER_NU_C*rng.normal()
        elif x[i] != 0:
            x[i] *= np.exp(JITTER_LOG_SCALE*rng.normal())
        else:
            x[i] = rng.normal()
    return x


def _normalize_names(free):
    names = []
    for name in free:
        name = ALIASES.get(name, name)
        if name not in FIT_PARAMS:
            raise ValueError("Cannot fit {!r}; choose from {}.".format(
                name, ", ".join(FIT_PARAMS)))
        if name not in names:
            names.append(name)
    # Fixed order so that results do not depend on set iteration order
    return [name for name in FIT_PARAMS if name in names]


def synthesize_dispersion(c, delta_grid, noise_mhz=0., seed=0, nu_c=None,
                          direction='both'):
    '''Branch-selected nu_s along sweeps, with Gaussian noise.'''
    if not noise_mhz >= 0:
        raise ValueError("noise_mhz must be >= 0.")
    if nu_c is None:
        nu_c = presets['cavity']['nu_c']
    directions = ['up', 'down'] if direction == 'both' else [direction]
    grid = np.sort(np.asarray(delta_grid, dtype=float))
    deltas, nu_s, hints = [], [], []
    for d in directions:
        order = grid if d == 'up' else grid[::-1]
        selected, jumps = follow_branches(order, solve_grid(order, c), d)
        deltas.extend(order)
        nu_s.extend(nu_c + s.nu_s for s in selected)
        hints.extend([d]*len(order))
    rng = np.random.default_rng(seed)
    noise = rng.normal(0., noise_mhz, len(nu_s))
    return DispersionData(deltas, np.array(nu_s) + noise, hints)


def load_dispersion_csv(path):
    '''Read delta_mhz, nu_s_mhz and optional branch / weight columns.'''
    frame = pd.read_csv(path)
    missing = {'delta_mhz', 'nu_s_mhz'} - set(frame.columns)
    if missing:
        raise ValueError("{} lacks columns {}.".format(path, sorted(missing)))
    hints = [None]*len(frame)
    if 'branch' in frame.columns:
        hints = []
        for value in frame['branch']:
            value = '' if pd.isna(value) else str(value).strip().lower()
            if value in ('', 'none'):
                hints.append(None)
            elif value in ('up', 'down'):
                hints.append(value)
            else:
                raise ValueError("Unknown branch value {!r} in {}.".format(
                    value, path))
    weights = frame['weight'] if 'weight' in frame.columns else None
    data = DispersionData(frame['delta_mhz'], frame['nu_s_mhz'], hints,
                          weights)
    data.check()
    return data
