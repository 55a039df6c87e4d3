'''Physical parameters and the traveling-wave coupling algebra.

All frequency-like quantities are cyclic frequencies in MHz, phases are
in radians and cable lengths in meters.
'''
import logging
from math import sqrt, sin, cos, log10, isfinite

import numpy as np
from scipy.optimize import brentq
from tabulate import tabulate

from magnonlink.config import config

EPS_FLOOR = 1e-12
COOPERATIVITY_DEFINITION = "C = (g^2 + J^2 + Gamma^2) / Re(alpha')^2"
COUPLING_MODES = ('coherent', 'dissipative')
# Sigma resolution of the scan preceding the bracketed refinement
SIGMA_SCAN_POINTS = 1000
# |coupling - damping| (MHz) treated as the threshold itself
THRESHOLD_TOL = 1e-9

logger = logging.getLogger(__name__)


class SystemParams(object):
    '''Rates of the active cavity, the magnon and their direct coupling.'''

    ATTRS = ['nu_c', 'beta', 'N', 'eps', 'kappa', 'nu_m', 'alpha', 'gamma',
             'g']
    NONNEGATIVE = ['beta', 'N', 'eps', 'kappa', 'alpha', 'gamma']

    def __init__(self, nu_c, beta, N, eps, kappa, nu_m, alpha, gamma, g=0.):
        self.nu_c = float(nu_c)
        self.beta = float(beta)
        self.N = float(N)
        self.eps = float(eps)
        self.kappa = float(kappa)
        self.nu_m = float(nu_m)
        self.alpha = float(alpha)
        self.gamma = float(gamma)
        self.g = float(g)

    def check(self):
        for attr in self.ATTRS:
            if not isfinite(getattr(self, attr)):
                raise ValueError("{} must be finite.".format(attr))
        for attr in self.NONNEGATIVE:
            if getattr(self, attr) < 0:
                raise ValueError("{} must be >= 0.".format(attr))

    @property
    def self_oscillating(self):
        return self.N > self.beta

    @property
    def delta(self):
        '''Magnon-cavity detuning nu_m - nu_c.'''
        return self.nu_m - self.nu_c

    def at_detuning(self, delta):
        '''Copy with the magnon tuned to nu_c + delta.'''
        return self.replace(nu_m=self.nu_c + delta)

    def replace(self, **kwargs):
        d = self.to_dict()
        for key in kwargs:
            if key not in d:
                raise ValueError("Unknown parameter {}.".format(key))
        d.update(kwargs)
        return SystemParams(**d)

    def to_dict(self):
        return {attr: getattr(self, attr) for attr in self.ATTRS}

    def __eq__(self, other):
        return all([
            getattr(self, attr) == getattr(other, attr)
            for attr in self.ATTRS])

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return "SystemParams({})".format(", ".join(
            "{}: {}".format(attr, getattr(self, attr)) for attr in self.ATTRS))

    def __str__(self):
        return tabulate([(attr, getattr(self, attr)) for attr in self.ATTRS])


class LinkSettings(object):
    '''The traveling-wave channel between the cavity and the magnon.'''

    ATTRS = ['phi', 'sigma', 'atten_db_per_m', 'baseline_m']

    def __init__(self, phi=0., sigma=1., atten_db_per_m=None,
                 baseline_m=None):
        if atten_db_per_m is None:
            atten_db_per_m = config.getfloat("link", "atten_db_per_m")
        if baseline_m is None:
            baseline_m = config.getfloat("link", "baseline_m")
        self.phi = float(phi)
        self.sigma = float(sigma)
        self.atten_db_per_m = float(atten_db_per_m)
        self.baseline_m = float(baseline_m)

    def check(self):
        if not 0 <= self.sigma <= 1:
            raise ValueError("sigma must be in [0, 1], got {}.".format(
                self.sigma))
        if not isfinite(self.phi):
            raise ValueError("phi must be finite.")
        if not self.atten_db_per_m > 0:
            raise ValueError("atten_db_per_m must be > 0.")
        if not self.baseline_m >= 0:
            raise ValueError("baseline_m must be >= 0.")

    def with_sigma(self, sigma):
        return LinkSettings(self.phi, sigma, self.atten_db_per_m,
                            self.baseline_m)

    def with_phi(self, phi):
        return LinkSettings(phi, self.sigma, self.atten_db_per_m,
                            self.baseline_m)

    def to_dict(self):
        return {attr: getattr(self, attr) for attr in self.ATTRS}

    def __eq__(self, other):
        return all([
            getattr(self, attr) == getattr(other, attr)
            for attr in self.ATTRS])

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return ("LinkSettings{phi: %.4f, sigma: %.4f, atten_db_per_m: %.3f, "
                "baseline_m: %.2f}" % (self.phi, self.sigma,
                                       self.atten_db_per_m, self.baseline_m))


class CouplingSet(object):
    '''Effective couplings seen by the synchronization solver.

    alpha_eff is the complex effective magnon damping; only its real part
    enters the criteria and the solver, the imaginary part being a
    frequency pull absorbed into the calibration of nu_m.
    '''

    ATTRS = ['J', 'Gamma', 'alpha_eff', 'g']

    def __init__(self, J=0., Gamma=0., alpha_eff=1., g=0.):
        self.J = float(J)
        self.Gamma = float(Gamma)
        self.alpha_eff = complex(alpha_eff)
        self.g = float(g)

    @property
    def alpha_re(self):
        return self.alpha_eff.real

    @property
    def is_decoupled(self):
        return self.g == 0 and self.J == 0 and self.Gamma == 0

    def check(self):
        for attr in ['J', 'Gamma', 'g']:
            if not isfinite(getattr(self, attr)):
                raise ValueError("{} must be finite.".format(attr))
        if not (isfinite(self.alpha_eff.real) and
                isfinite(self.alpha_eff.imag)):
            raise ValueError("alpha_eff must be finite.")

    def replace(self, **kwargs):
        d = {attr: getattr(self, attr) for attr in self.ATTRS}
        for key in kwargs:
            if key not in d:
                raise ValueError("Unknown coupling {}.".format(key))
        d.update(kwargs)
        return CouplingSet(**d)

    def to_dict(self):
        return {
            'J': self.J,
            'Gamma': self.Gamma,
            'alpha_eff_re': self.alpha_eff.real,
            'alpha_eff_im': self.alpha_eff.imag,
            'g': self.g,
        }

    def __eq__(self, other):
        return all([
            getattr(self, attr) == getattr(other, attr)
            for attr in self.ATTRS])

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return ("CouplingSet{J: %.6g, Gamma: %.6g, alpha_eff: %.6g%+.6gj, "
                "g: %.6g}" % (self.J, self.Gamma, self.alpha_eff.real,
                              self.alpha_eff.imag, self.g))


class CouplingReport(object):
    '''Strong-coupling verdicts for a CouplingSet.'''

    def __init__(self, strong_coherent, strong_dissipative, strong_direct,
                 cooperativity, margin, floored):
        self.strong_coherent = strong_coherent
        self.strong_dissipative = strong_dissipative
        self.strong_direct = strong_direct
        self.cooperativity = cooperativity
        self.margin = margin
        self.floored = floored
        self.cooperativity_definition = COOPERATIVITY_DEFINITION

    @property
    def strong(self):
        return (self.strong_coherent or self.strong_dissipative or
                self.strong_direct)

    def to_dict(self):
        return {
            'strong_coherent': self.strong_coherent,
            'strong_dissipative': self.strong_dissipative,
            'strong_direct': self.strong_direct,
            'cooperativity': self.cooperativity,
            'cooperativity_definition': self.cooperativity_definition,
            'margin': self.margin,
            'floored': self.floored,
        }

    def __repr__(self):
        return ("CouplingReport{strong_coherent: %s, strong_dissipative: %s, "
                "cooperativity: %.4g, margin: %.4g}" % (
                    self.strong_coherent, self.strong_dissipative,
                    self.cooperativity, self.margin))


class DistanceEstimate(object):
    '''Longest cable run over which the coupling stays strong.

    path is 'threshold' when the transmission was given and 'bisection'
    when it was solved for. never_strong marks parameter sets for which
    no transmission in (0, 1] meets the criterion; length_m is then nan.
    '''

    def __init__(self, length_m, sigma, mode, path, never_strong=False):
        self.length_m = length_m
        self.sigma = sigma
        self.mode = mode
        self.path = path
        self.never_strong = never_strong

    def to_dict(self):
        return {
            'length_m': self.length_m,
            'sigma': self.sigma,
            'mode': self.mode,
            'path': self.path,
            'never_strong': self.never_strong,
        }

    def __str__(self):
        return tabulate([
            ("Mode", self.mode),
            ("Path", self.path),
            ("Sigma", self.sigma),
            ("Length (m)", self.length_m),
            ("Never strong", self.never_strong)])

    def __repr__(self):
        return "DistanceEstimate({})".format(self.to_dict())


def coupling_from_link(p, link):
    '''Effective couplings of a magnon radiating into the link.

    The indirect couplings pass the attenuator once and scale as sigma;
    the radiative back-action on the magnon makes a round trip and scales
    as sigma**2.
    '''
    p.check()
    link.check()
    s = link.sigma * sqrt(p.kappa*p.gamma)
    J = -s*sin(link.phi)
    Gamma = s*cos(link.phi)
    alpha_eff = p.alpha + link.sigma**2 * p.gamma * np.exp(2j*link.phi)
    return CouplingSet(J=J, Gamma=Gamma, alpha_eff=alpha_eff, g=p.g)


def strong_coupling_report(c):
    alpha = c.alpha_re
    floored = alpha < EPS_FLOOR
    denom = max(alpha, EPS_FLOOR)
    if floored:
        logger.warning("Re(alpha_eff) = {} floored to {} for the "
                       "cooperativity.".format(alpha, EPS_FLOOR))
    cooperativity = (c.J**2 + c.Gamma**2 + c.g**2) / denom**2
    margin = max(abs(c.J), abs(c.Gamma), abs(c.g)) - alpha
    return CouplingReport(
        strong_coherent=abs(c.J) > alpha,
        strong_dissipative=abs(c.Gamma) > alpha,
        strong_direct=abs(c.g) > alpha,
        cooperativity=cooperativity,
        margin=margin,
        floored=floored)


def equivalent_cable_length(sigma, link):
    '''Cable length whose attenuation equals an amplitude transmission.'''
    if sigma == 0:
        raise ValueError("sigma = 0: equivalent cable length is unbounded.")
    if not 0 < sigma <= 1:
        raise ValueError("sigma must be in (0, 1], got {}.".format(sigma))
    return link.baseline_m + (-20*log10(sigma)) / link.atten_db_per_m


def max_strong_coupling_distance(p, link, mode='coherent',
                                 sigma_threshold=None):
    '''Longest equivalent cable length keeping the coupling strong.

    With sigma_threshold, the length is read off at that transmission.
    Otherwise the smallest sigma in (0, 1] at which the coupling magnitude
    reaches Re(alpha_eff(sigma)) is located and converted to a length.
    '''
    if mode not in COUPLING_MODES:
        raise ValueError("mode must be one of {}.".format(COUPLING_MODES))
    p.check()
    link.check()
    if sigma_threshold is not None:
        length = equivalent_cable_length(sigma_threshold, link)
        return DistanceEstimate(length, sigma_threshold, mode, 'threshold')

    margin = _criterion_margin_fn(p, link, mode)
    sigmas = np.linspace(0, 1, SIGMA_SCAN_POINTS+1)[1:]
    margins = np.array([margin(sigma) for sigma in sigmas])
    strong_idxs = np.flatnonzero(margins >= -THRESHOLD_TOL)
    if not len(strong_idxs):
        logger.info("{} coupling is never strong for sigma in (0, 1].".format(
            mode))
        return DistanceEstimate(float("nan"), float("nan"), mode,
                                'bisection', never_strong=True)

    idx = strong_idxs[0]
    hi = sigmas[idx]
    lo = sigmas[idx-1] if idx > 0 else 0.
    if abs(margins[idx]) <= THRESHOLD_TOL:
        sigma_star = hi
    elif margin(lo) >= 0:
        # Strong down to sigma -> 0: the distance is unbounded.
        return DistanceEstimate(float("inf"), 0., mode, 'bisection')
    else:
        sigma_star = brentq(margin, lo, hi, xtol=1e-14)
    length = equivalent_cable_length(sigma_star, link)
    logger.debug("{} threshold sigma* = {:.6f}, length {:.3f} m.".format(
        mode, sigma_star, length))
    return DistanceEstimate(length, sigma_star, mode, 'bisection')


def _criterion_margin_fn(p, link, mode):
    '''Returns sigma -> |coupling(sigma)| - Re(alpha_eff(sigma)).'''
    def margin(sigma):
        c = coupling_from_link(p, link.with_sigma(sigma))
        coupling = abs(c.J) if mode == 'coherent' else abs(c.Gamma)
        return coupling - c.alpha_re
    return margin
