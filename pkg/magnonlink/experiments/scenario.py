import json
import logging

import numpy as np

from magnonlink.config import config
from magnonlink.model import SystemParams, LinkSettings, coupling_from_link

SWEEP_DIRECTIONS = ('up', 'down', 'both')
PARAM_KEYS = SystemParams.ATTRS
LINK_KEYS = LinkSettings.ATTRS
GRID_KEYS = ['delta_min', 'delta_max', 'delta_step']
SCENARIO_KEYS = (['name', 'preset', 'sweep', 'delta_grid'] + PARAM_KEYS +
                 LINK_KEYS + GRID_KEYS)

logger = logging.getLogger(__name__)


class Scenario(object):
    '''A measurement protocol: the system, the link and the detuning grid.

    delta_grid is stored ascending; down sweeps traverse it in reverse.
    '''

    def __init__(self, name, params, link, delta_grid, sweep='both',
                 meta=None):
        self.name = name
        self.params = params
        self.link = link
        self.delta_grid = np.asarray(delta_grid, dtype=float)
        self.sweep = sweep
        self.meta = meta if meta is not None else {}

    def check(self):
        self.params.check()
        self.link.check()
        if self.sweep not in SWEEP_DIRECTIONS:
            raise ValueError("sweep must be one of {}.".format(
                SWEEP_DIRECTIONS))
        if not len(self.delta_grid):
            raise ValueError("delta_grid is empty.")
        if not np.all(np.isfinite(self.delta_grid)):
            raise ValueError("delta_grid must be finite.")
        if np.any(np.diff(self.delta_grid) <= 0):
            raise ValueError("delta_grid must be strictly increasing.")

    @property
    def coupling(self):
        return coupling_from_link(self.params, self.link)

    def with_link(self, link):
        return Scenario(self.name, self.params, link, self.delta_grid,
                        self.sweep, dict(self.meta))

    def grid(self, direction):
        '''The detuning grid in sweep order.'''
        if direction == 'up':
            return self.delta_grid
        if direction == 'down':
            return self.delta_grid[::-1]
        raise ValueError("direction must be 'up' or 'down'.")

    def to_dict(self):
        d = {'name': self.name, 'sweep': self.sweep,
             'delta_grid': self.delta_grid.tolist()}
        d.update(self.params.to_dict())
        d.update(self.link.to_dict())
        return d

    def __repr__(self):
        return "Scenario({}, {!r}, {!r}, {} grid points, sweep: {})".format(
            self.name, self.params, self.link, len(self.delta_grid),
            self.sweep)


def make_delta_grid(delta_min, delta_max, delta_step):
    '''Ascending grid from delta_min to delta_max (inclusive).'''
    if not delta_step > 0:
        raise ValueError("delta_step must be > 0.")
    if not delta_max > delta_min:
        raise ValueError("delta_max must be > delta_min.")
    n = int(round((delta_max - delta_min) / delta_step))
    return delta_min + delta_step*np.arange(n+1)


def default_delta_grid_bounds():
    return [config.getfloat("experiments", key) for key in GRID_KEYS]


def default_delta_grid():
    return make_delta_grid(*default_delta_grid_bounds())


def scenario_from_dict(d):
    '''Build a Scenario from the flat JSON schema.

    A "preset" key supplies every value not given explicitly. Unknown keys
    are rejected.
    '''
    unknown = sorted(set(d) - set(SCENARIO_KEYS))
    if unknown:
        raise ValueError("Unknown scenario keys: {}.".format(
            ", ".join(unknown)))
    if 'preset' in d:
        from magnonlink.experiments.presets import preset
        values = preset(d['preset']).to_dict()
        meta = {'preset': d['preset']}
    else:
        values = {}
        meta = {}
    if any(key in d for key in GRID_KEYS) or 'delta_grid' in d:
        values.pop('delta_grid', None)
    values.update(d)
    values.pop('preset', None)

    missing = [key for key in PARAM_KEYS + ['phi', 'sigma']
               if key not in values]
    if missing:
        raise ValueError("Missing scenario keys: {}.".format(
            ", ".join(missing)))
    params = SystemParams(**{key: _number(values, key)
                             for key in PARAM_KEYS})
    link = LinkSettings(**{key: _number(values, key) for key in LINK_KEYS
                           if key in values})
    if 'delta_grid' in values:
        if any(key in values for key in GRID_KEYS):
            raise ValueError("Give either delta_grid or "
                             "delta_min/delta_max/delta_step.")
        delta_grid = [float(x) for x in values['delta_grid']]
    elif any(key in values for key in GRID_KEYS):
        grid_defaults = dict(zip(GRID_KEYS, default_delta_grid_bounds()))
        grid_defaults.update({key: _number(values, key)
                              for key in GRID_KEYS if key in values})
        delta_grid = make_delta_grid(*[grid_defaults[key]
                                       for key in GRID_KEYS])
    else:
        delta_grid = default_delta_grid()
    sc = Scenario(values.get('name', 'scenario'), params, link, delta_grid,
                  sweep=values.get('sweep', 'both'), meta=meta)
    sc.check()
    return sc


def load_scenario(path):
    with open(path, 'r') as f:
        try:
            d = json.load(f)
        except ValueError as e:
            raise ValueError("Malformed scenario JSON in {}: {}".format(
                path, e))
    if not isinstance(d, dict):
        raise ValueError("Scenario JSON must be an object.")
    sc = scenario_from_dict(d)
    logger.info("Loaded scenario {} from {}.".format(sc.name, path))
    return sc


def save_scenario(sc, path):
    with open(path, 'w') as f:
        json.dump(sc.to_dict(), f, indent=2, sort_keys=True)


def _number(values, key):
    try:
        return float(values[key])
    except (TypeError, ValueError):
        raise ValueError("Scenario key {} must be a number, got {!r}.".format(
            key, values[key]))
