'''Measured parameter sets of the cavity/magnon configurations.

The quoted couplings are matched at sigma = 1 by back-solving the magnon
radiation rate gamma = coupling^2/kappa, and the intrinsic magnon damping
alpha so that Re(alpha_eff) equals the quoted effective damping.
'''
import logging
from math import cos

from tabulate import tabulate

from magnonlink.config import presets as PRESET_DATA
from magnonlink.model import SystemParams, LinkSettings
from magnonlink.experiments.scenario import Scenario, default_delta_grid

logger = logging.getLogger(__name__)


def list_presets():
    return sorted(PRESET_DATA['presets'])


def preset(name):
    '''Scenario with the measured values of a named configuration.'''
    try:
        entry = PRESET_DATA['presets'][name]
    except KeyError:
        raise ValueError("Unknown preset {!r}; choose from {}.".format(
            name, ", ".join(list_presets())))
    cavity = PRESET_DATA['cavity']
    kappa = cavity['kappa']
    phi = entry['phi']
    if entry['coupling'] == 'direct':
        gamma = 0.
    else:
        gamma = entry['magnitude']**2 / kappa
    alpha = entry['alpha_eff'] - gamma*cos(2*phi)
    params = SystemParams(
        nu_c=cavity['nu_c'],
        beta=cavity['beta'],
        N=cavity['gain_ratio']*cavity['beta'],
        eps=cavity['eps'],
        kappa=kappa,
        nu_m=cavity['nu_c'],
        alpha=alpha,
        gamma=gamma,
        g=entry['g'])
    meta = {
        'description': entry['description'],
        'quoted': entry['quoted'],
        'coupling': entry['coupling'],
        'gamma_backsolved': gamma,
        'alpha_backsolved': alpha,
        'gain_ratio': cavity['gain_ratio'],
    }
    sc = Scenario(name, params, LinkSettings(phi=phi, sigma=1.),
                  default_delta_grid(), sweep='both', meta=meta)
    sc.check()
    return sc


def presets_table():
    '''Rows of (name, coupling, quoted values, g, |J|, Gamma, Re alpha').'''
    table = []
    for name in list_presets():
        sc = preset(name)
        c = sc.coupling
        table.append((name, sc.meta['coupling'], sc.meta['quoted'], c.g,
                      abs(c.J), c.Gamma, c.alpha_re))
    return table


def format_presets():
    headers = ['Preset', 'Coupling', 'Quoted', 'g', '|J|', 'Gamma',
               "Re alpha'"]
    return tabulate(presets_table(), headers=headers, floatfmt='.4g')
