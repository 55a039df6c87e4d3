'''Steady-state synchronization of the gain-driven cavity with the magnon.

With the ansatz a = A exp(-i w t), m = M exp(-i(w t + theta)), the
relative phase theta fixes everything else:

    r(theta)     = [(g - Gamma) sin(theta) + J cos(theta)] / alpha
    Delta(theta) = (g cos(theta) - J sin(theta)) (r - 1/r)
                   + Gamma cos(theta) (r + 1/r)
    nu_s - nu_c  = r [(g + Gamma) cos(theta) - J sin(theta)]

where alpha = Re(alpha_eff). The steady states at a detuning Delta are
the roots of Delta(theta) = Delta on the interval where r > 0. Delta(theta)
runs from -inf to +inf across that interval; its local extrema are the
fold (jump) detunings.
'''
import logging
from math import pi, sqrt

import numpy as np
from scipy.optimize import brentq
from tabulate import tabulate

from magnonlink.config import config
from magnonlink.util import TWO_PI

logger = logging.getLogger(__name__)

BISECTION_ITERS = 52
# Interior points checked for r > 0 after choosing the arctan branch
SIGN_SCAN_POINTS = 16
# Margin (rad/us) below zero required of every non-zero linear mode
LINEAR_STABILITY_TOL = 1e-6


class DecoupledError(ValueError):
    '''No coupling at all: the amplitude ratio vanishes identically.'''
    pass


class SyncSolution(object):
    '''One steady state at a given detuning.

    nu_s is absolute when the solver was given SystemParams, otherwise it
    is the offset nu_s - nu_c. A and M are nan without SystemParams.
    branch indexes the monotone piece of Delta(theta) holding the root,
    counted from the low end of the admissible interval.

    stable is the slope rule dDelta/dtheta > 0, which decides saddle-node
    stability only. linearly_stable checks every mode of the full
    linearization, so it also catches oscillatory (Hopf) instability of
    slope-stable states; it is None without SystemParams.
    '''

    def __init__(self, theta, r, nu_s, A, M, stable, slope, branch=0,
                 linearly_stable=None):
        self.theta = theta
        self.r = r
        self.nu_s = nu_s
        self.A = A
        self.M = M
        self.stable = stable
        self.slope = slope
        self.branch = branch
        self.linearly_stable = linearly_stable

    @property
    def oscillatory_unstable(self):
        '''Slope-stable, but a linear mode grows.'''
        return self.stable and self.linearly_stable is False

    def to_dict(self):
        return {
            'theta': self.theta,
            'r': self.r,
            'nu_s': self.nu_s,
            'A': self.A,
            'M': self.M,
            'stable': self.stable,
            'slope': self.slope,
            'branch': self.branch,
            'linearly_stable': self.linearly_stable,
        }

    def __repr__(self):
        return ("SyncSolution{theta: %.6f, r: %.6f, nu_s: %.6f, A: %.4g, "
                "M: %.4g, stable: %s, linearly_stable: %s, branch: %d}" % (
                    self.theta, self.r, self.nu_s, self.A, self.M,
                    self.stable, self.linearly_stable, self.branch))


class FoldPoints(object):
    '''Jump detunings: delta_up ends the low branch, delta_down the high.'''

    def __init__(self, delta_down, delta_up, exists):
        self.delta_down = delta_down
        self.delta_up = delta_up
        self.exists = exists

    @property
    def width(self):
        return self.delta_up - self.delta_down if self.exists else 0.

    def to_dict(self):
        return {
            'delta_down': self.delta_down,
            'delta_up': self.delta_up,
            'exists': self.exists,
        }

    def __repr__(self):
        return "FoldPoints{delta_down: %s, delta_up: %s, exists: %s}" % (
            self.delta_down, self.delta_up, self.exists)

    def __str__(self):
        return tabulate([
            ("Delta_down (MHz)", self.delta_down),
            ("Delta_up (MHz)", self.delta_up),
            ("Bistable", self.exists)])


def theta_interval(c):
    '''The length-pi interval of theta on which r(theta) > 0.

    Starts from arctan(-J/(g - Gamma)) and moves down by pi if r is
    negative on the candidate. The lower end is reported in [-pi, pi).
    '''
    if c.is_decoupled:
        raise DecoupledError("decoupled: g = J = Gamma = 0.")
    u = c.g - c.Gamma
    if u == 0 and c.J == 0:
        raise DecoupledError("decoupled: g = Gamma and J = 0, r vanishes.")
    if u != 0:
        lo = np.arctan(-c.J/u)
    else:
        lo = pi/2 if -c.J > 0 else -pi/2
    if _numerator(lo + pi/2, c) < 0:
        lo -= pi
    lo = float(np.mod(lo + pi, 2*pi) - pi)
    hi = lo + pi

    interior = np.linspace(lo, hi, SIGN_SCAN_POINTS+2)[1:-1]
    assert np.all(_numerator(interior, c) > 0)
    return lo, hi


def amplitude_ratio(theta, c):
    return _numerator(theta, c) / c.alpha_re


def eq1a_residual(theta, c):
    '''Detuning Delta(theta) at which theta is a steady state.'''
    theta = np.asarray(theta, dtype=float)
    _check_alpha(c)
    if np.any(amplitude_ratio(theta, c) <= 0):
        raise ValueError("theta outside the admissible interval (r <= 0).")
    return _delta(theta, c)


def eq1a_slope(theta, c):
    '''Analytic dDelta/dtheta.'''
    _check_alpha(c)
    return _slope(np.asarray(theta, dtype=float), c)


def eq1b_offset(theta, c):
    '''nu_s - nu_c at relative phase theta.'''
    _check_alpha(c)
    theta = np.asarray(theta, dtype=float)
    r = amplitude_ratio(theta, c)
    return r*((c.g + c.Gamma)*np.cos(theta) - c.J*np.sin(theta))


def gain_balance(theta, c):
    '''Net gain N(1 - eps A^2) - beta needed to sustain the steady state.'''
    theta = np.asarray(theta, dtype=float)
    r = amplitude_ratio(theta, c)
    return r*((c.g + c.Gamma)*np.sin(theta) + c.J*np.cos(theta))


def solve_branches(delta, c, params=None):
    '''All steady states at detuning delta, ordered by theta.'''
    return solve_grid([delta], c, params=params)[0]


def dispersion_curve(delta_grid, c, params=None):
    '''Branch sets along a sorted detuning grid.'''
    delta_grid = list(delta_grid)
    if not delta_grid:
        return []
    if any(d1 > d2 for d1, d2 in zip(delta_grid, delta_grid[1:])):
        raise ValueError("delta_grid must be sorted.")
    return list(zip(delta_grid, solve_grid(delta_grid, c, params=params)))


def fold_points(c):
    '''Largest local maximum and smallest local minimum of Delta(theta).'''
    extrema = _DeltaScan(c).extrema
    maxima = [delta for theta, delta, is_max in extrema if is_max]
    minima = [delta for theta, delta, is_max in extrema if not is_max]
    if maxima and minima:
        delta_up, delta_down = max(maxima), min(minima)
        if delta_up - delta_down > config.getfloat("solver", "fold_tol"):
            return FoldPoints(delta_down, delta_up, True)
    return FoldPoints(float("nan"), float("nan"), False)


def solve_grid(deltas, c, params=None):
    '''Steady states for many detunings at once.

    Returns one theta-ordered list of SyncSolution per detuning. One
    dense scan of Delta(theta) splits the interval into monotone pieces
    at the refined extrema; each detuning is then located in every piece
    holding it and refined by vectorized bisection.
    '''
    deltas = np.asarray(deltas, dtype=float)
    if not np.all(np.isfinite(deltas)):
        raise ValueError("Detunings must be finite.")
    scan = _DeltaScan(c)

    delta_idxs, segment_idxs, lo_t, hi_t, signs = [], [], [], [], []
    for k, segment in enumerate(scan.segments):
        seg_theta, seg_delta, sign = segment
        # Monotone up to float noise; the running max makes it exact.
        ordered = np.maximum.accumulate(sign*seg_delta)
        targets = sign*deltas
        inside = np.flatnonzero(
            (targets >= ordered[0]) & (targets <= ordered[-1]))
        if not len(inside):
            continue
        cells = np.searchsorted(ordered, targets[inside], side='left')
        cells = np.clip(cells, 1, len(ordered)-1)
        delta_idxs.append(inside)
        segment_idxs.append(np.full(len(inside), k))
        lo_t.append(seg_theta[cells-1])
        hi_t.append(seg_theta[cells])
        signs.append(np.full(len(inside), sign))

    results = [[] for d in deltas]
    if not delta_idxs:
        return results
    delta_idxs = np.concatenate(delta_idxs)
    segment_idxs = np.concatenate(segment_idxs)
    lo_t, hi_t = np.concatenate(lo_t), np.concatenate(hi_t)
    signs = np.concatenate(signs)
    targets = deltas[delta_idxs]

    for i in range(BISECTION_ITERS):
        mid = 0.5*(lo_t + hi_t)
        below = signs*(_delta(mid, c) - targets) < 0
        lo_t = np.where(below, mid, lo_t)
        hi_t = np.where(below, hi_t, mid)
    thetas = 0.5*(lo_t + hi_t)

    r = amplitude_ratio(thetas, c)
    offsets = eq1b_offset(thetas, c)
    slopes = _slope(thetas, c)
    stable = slopes > 0
    nu_c = params.nu_c if params is not None else 0.
    A = cavity_amplitude(thetas, c, params)
    M = r*A
    sustained = ~(A <= 0)
    linear = None
    if params is not None:
        linear = np.zeros(len(thetas), dtype=bool)
        driven = np.flatnonzero(A > 0)
        if len(driven):
            jacs = linear_jacobians(thetas[driven], targets[driven],
                                    A[driven], c, params)
            linear[driven] = decaying_modes(np.linalg.eigvals(jacs))
    order = np.lexsort((thetas, delta_idxs))
    for i in order:
        sol = SyncSolution(
            theta=float(thetas[i]),
            r=float(r[i]),
            nu_s=nu_c + float(offsets[i]),
            A=float(A[i]),
            M=float(M[i]),
            stable=bool(stable[i] and sustained[i]),
            slope=float(slopes[i]),
            branch=int(segment_idxs[i]),
            linearly_stable=None if linear is None else bool(linear[i]))
        roots = results[delta_idxs[i]]
        # A detuning exactly at a fold is found on both adjacent pieces
        if roots and abs(roots[-1].theta - sol.theta) < 1e-12:
            continue
        roots.append(sol)
    return results


class _DeltaScan(object):
    '''Dense scan of Delta(theta) with refined extrema and monotone pieces.

    segments: list of (theta, Delta, sign) with sign = +1 on increasing
    pieces and -1 on decreasing ones; theta includes the piece endpoints.
    extrema: list of (theta, Delta, is_maximum).
    '''

    def __init__(self, c):
        _check_alpha(c)
        cells = config.getint("solver", "scan_cells")
        guard = config.getfloat("solver", "guard_band")
        theta_tol = config.getfloat("solver", "theta_tol")
        lo, hi = theta_interval(c)
        theta = np.linspace(lo+guard, hi-guard, cells+1)
        delta = _delta(theta, c)
        slope = _slope(theta, c)

        def slopefn(x):
            return float(_slope(np.array(x), c))

        self.extrema = []
        breaks = [0]
        extrema_theta = []
        for i in np.flatnonzero(np.sign(slope[:-1]) != np.sign(slope[1:])):
            if slope[i] == 0:
                x = theta[i]
            elif slope[i+1] == 0:
                continue
            else:
                x = brentq(slopefn, theta[i], theta[i+1], xtol=theta_tol)
            is_max = slope[i] > 0 or (slope[i] == 0 and slope[i+1] < 0)
            self.extrema.append((x, float(_delta(np.array(x), c)), is_max))
            extrema_theta.append(x)
            breaks.append(i+1)
        breaks.append(len(theta))
        logger.debug("Delta(theta) scan: {} extrema on ({:.6f}, {:.6f}).".
                     format(len(self.extrema), lo, hi))

        self.segments = []
        bounds = [theta[0]] + extrema_theta + [theta[-1]]
        for k in range(len(bounds)-1):
            inner = theta[breaks[k]:breaks[k+1]]
            inner = inner[(inner > bounds[k]) & (inner < bounds[k+1])]
            seg_theta = np.concatenate(([bounds[k]], inner, [bounds[k+1]]))
            seg_delta = _delta(seg_theta, c)
            sign = 1 if seg_delta[-1] >= seg_delta[0] else -1
            self.segments.append((seg_theta, seg_delta, sign))


def _numerator(theta, c):
    return (c.g - c.Gamma)*np.sin(theta) + c.J*np.cos(theta)


def _delta(theta, c):
    r = amplitude_ratio(theta, c)
    cos, sin = np.cos(theta), np.sin(theta)
    return ((c.g*cos - c.J*sin)*(r - 1/r) +
            c.Gamma*cos*(r + 1/r))


def _slope(theta, c):
    r = amplitude_ratio(theta, c)
    dr = ((c.g - c.Gamma)*np.cos(theta) - c.J*np.sin(theta)) / c.alpha_re
    cos, sin = np.cos(theta), np.sin(theta)
    p = c.g*cos - c.J*sin
    dp = -c.g*sin - c.J*cos
    return (dp*(r - 1/r) + p*dr*(1 + 1/r**2) -
            c.Gamma*sin*(r + 1/r) + c.Gamma*cos*dr*(1 - 1/r**2))


def cavity_amplitude(theta, c, params):
    '''Cavity amplitude A from the gain balance.

    nan without gain data, 0 where the gain cannot sustain the state.
    '''
    if params is None or params.N*params.eps == 0:
        return np.full(np.shape(theta), float("nan"))
    excess = params.N - params.beta - gain_balance(theta, c)
    A2 = excess / (params.N*params.eps)
    return np.sqrt(np.clip(A2, 0, None))


def linear_jacobians(thetas, deltas, A, c, params):
    '''Real 4x4 Jacobians of the equations of motion, one per steady state.

    Each is taken in the frame rotating at the state's nu_s, with state
    order (Re a, Im a, Re m, Im m) and the steady state at a = A,
    m = M exp(-i theta). Returns an array of shape (n, 4, 4).
    '''
    p = params
    thetas = np.asarray(thetas, dtype=float)
    A2 = np.asarray(A, dtype=float)**2
    w = eq1b_offset(thetas, c)
    laa = TWO_PI*((p.N*(1 - 2*p.eps*A2) - p.beta) + 1j*w)
    baa = TWO_PI*(-p.N*p.eps*A2)
    lam = TWO_PI*(-1j*complex(c.g + c.Gamma, -c.J))
    lma = TWO_PI*(-1j*complex(c.g - c.Gamma, c.J))
    lmm = TWO_PI*(-c.alpha_re + 1j*(w - np.asarray(deltas, dtype=float)))

    jacs = np.zeros((len(thetas), 4, 4))
    for row, col, z in [(0, 0, laa), (0, 2, lam), (2, 0, lma), (2, 2, lmm)]:
        z = np.broadcast_to(np.asarray(z, dtype=complex), len(thetas))
        jacs[:, row, col] = z.real
        jacs[:, row, col+1] = -z.imag
        jacs[:, row+1, col] = z.imag
        jacs[:, row+1, col+1] = z.real
    # Conjugate-linear part of the gain saturation
    jacs[:, 0, 0] += baa
    jacs[:, 1, 1] -= baa
    return jacs


def decaying_modes(eigs, tol=LINEAR_STABILITY_TOL):
    '''True per row where all eigenvalues but the zero mode have Re < -tol.

    eigs has shape (n, k); the zero mode of the phase symmetry is the
    eigenvalue of smallest modulus in each row.
    '''
    eigs = np.atleast_2d(eigs)
    rows = np.arange(len(eigs))
    real = eigs.real.copy()
    real[rows, np.argmin(np.abs(eigs), axis=1)] = -np.inf
    return np.all(real < -tol, axis=1)


def _check_alpha(c):
    if not c.alpha_re > 0:
        raise ValueError("Re(alpha_eff) must be > 0, got {}.".format(
            c.alpha_re))


def pure_coherent_fold(g, alpha):
    '''Closed-form |Delta_u| for g > alpha with J = Gamma = 0.'''
    if not g > alpha > 0:
        raise ValueError("Needs g > alpha > 0.")
    # cos(2 theta) sin^2(theta) = -alpha^2/g^2 with theta in (0, pi/2)
    s2 = (1 + sqrt(1 + 8*alpha**2/g**2)) / 4
    theta = np.arcsin(sqrt(s2))
    return abs(float((g**2/(2*alpha))*np.sin(2*theta) -
                     alpha/np.tan(theta)))
