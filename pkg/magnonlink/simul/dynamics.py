'''Time-domain equations of motion of the gain-driven cavity and the magnon.

In the frame rotating at nu_c, with rates in MHz and time in us:

    da/dt = 2pi {[N(1 - eps|a|^2) - beta] a - i(g + Gamma - iJ) m}
    dm/dt = 2pi {-i Delta m - alpha m - i(g - Gamma + iJ) a}

with alpha = Re(alpha_eff). Substituting the synchronized ansatz gives
back the steady-state relations solved in magnonlink.simul.sync.
'''
import logging
from math import sqrt

import numpy as np
import pandas as pd
from scipy.integrate import DOP853, RK45
from tabulate import tabulate

from magnonlink.config import config
from magnonlink.util import TWO_PI, wrap_to_interval, write_frame
from magnonlink.simul.sync import (
    eq1a_residual, amplitude_ratio, cavity_amplitude, linear_jacobians,
    decaying_modes, LINEAR_STABILITY_TOL)

METHODS = {'DOP853': DOP853, 'RK45': RK45}
# Stages evaluated per attempted step, and extra evaluations per call to
# dense_output()
STAGES = {'DOP853': (12, 3), 'RK45': (6, 0)}
DEFAULT_A0 = 1e-3
# Relative amplitude change between window halves tolerated at steady state
AMPLITUDE_RTOL = 1e-3
# Residual tolerance (MHz) when validating a steady state
CONSISTENCY_TOL = 1e-6

logger = logging.getLogger(__name__)


class IntegrationError(RuntimeError):
    '''The integrator failed or the trajectory blew up.'''
    pass


class TimeTrace(object):
    '''Sampled trajectory, in the frame rotating at nu_frame.'''

    def __init__(self, t, a, m, meta, nu_frame=0.):
        self.t = t
        self.a = a
        self.m = m
        self.meta = meta
        self.nu_frame = nu_frame

    def check(self):
        if len(self.t) < 2 or np.any(np.diff(self.t) <= 0):
            raise ValueError("t must be strictly increasing.")
        if not (np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.m))):
            raise ValueError("Amplitudes must be finite.")

    @property
    def duration(self):
        return self.t[-1] - self.t[0]

    def to_frame(self):
        return pd.DataFrame({
            't_us': self.t,
            're_a': self.a.real,
            'im_a': self.a.imag,
            're_m': self.m.real,
            'im_m': self.m.imag,
        }, columns=['t_us', 're_a', 'im_a', 're_m', 'im_m'])

    def write_csv(self, path):
        write_frame(self.to_frame(), path)

    def __len__(self):
        return len(self.t)

    def __repr__(self):
        return ("TimeTrace(n: {}, duration: {}, nu_frame: {}, meta: {})".
                format(len(self), self.duration, self.nu_frame, self.meta))


class SteadyEstimate(object):

    def __init__(self, nu_s, theta, A, M, converged, residual_drift):
        self.nu_s = nu_s
        self.theta = theta
        self.A = A
        self.M = M
        self.converged = converged
        self.residual_drift = residual_drift

    def to_dict(self):
        return {
            'nu_s': self.nu_s,
            'theta': self.theta,
            'A': self.A,
            'M': self.M,
            'converged': self.converged,
            'residual_drift': self.residual_drift,
        }

    def __str__(self):
        return tabulate([
            ("nu_s (MHz)", self.nu_s),
            ("theta (rad)", self.theta),
            ("|a|", self.A),
            ("|m|", self.M),
            ("Drift (MHz)", self.residual_drift),
            ("Converged", self.converged)])

    def __repr__(self):
        return "SteadyEstimate({})".format(self.to_dict())


def integrate(p, c, delta, a0=None, m0=None, duration=10., rtol=None,
              atol=None, method=None, sample_rate=None,
              seed_injection=False):
    '''Integrate the equations of motion at detuning delta.

    The gain and the cavity frequency come from p; the couplings and the
    magnon damping from c. Samples are taken from the dense output at
    sample_rate samples per us.
    '''
    if rtol is None:
        rtol = config.getfloat("dynamics", "rtol")
    if atol is None:
        atol = config.getfloat("dynamics", "atol")
    if method is None:
        method = config.get("dynamics", "method")
    if sample_rate is None:
        sample_rate = config.getfloat("dynamics", "sample_rate")
    if not (rtol > 0 and atol > 0):
        raise ValueError("rtol and atol must be > 0.")
    if method not in METHODS:
        raise ValueError("method must be one of {}.".format(sorted(METHODS)))
    if not duration > 0:
        raise ValueError("duration must be > 0.")
    p.check()
    c.check()
    if not p.self_oscillating:
        logger.warning("N = {} <= beta = {}: no self-oscillation, "
                       "amplitudes will decay.".format(p.N, p.beta))
    a0 = DEFAULT_A0 if a0 is None else a0
    m0 = 0. if m0 is None else m0

    fun = _make_rhs(p, c, delta, seed_injection)
    y0 = np.array([a0.real, a0.imag, m0.real, m0.imag], dtype=float)
    nsamples = int(round(duration*sample_rate)) + 1
    ts = np.linspace(0., duration, nsamples)
    ys = np.empty((nsamples, 4))
    ys[0] = y0
    idx = 1

    solver = METHODS[method](fun, 0., y0, duration, rtol=rtol, atol=atol)
    steps = 0
    dense_calls = 0
    while solver.status == 'running':
        message = solver.step()
        if solver.status == 'failed':
            raise IntegrationError(
                "{} failed at t = {:.6g} us (step {:.3g}): {}".format(
                    method, solver.t, solver.step_size or 0., message))
        steps += 1
        if not np.all(np.isfinite(solver.y)):
            raise IntegrationError(
                "Non-finite amplitudes at t = {:.6g} us.".format(solver.t))
        hi = np.searchsorted(ts, solver.t, side='right')
        if hi > idx:
            ys[idx:hi] = solver.dense_output()(ts[idx:hi]).T
            dense_calls += 1
            idx = hi

    stages, extra = STAGES[method]
    attempts = (solver.nfev - 2 - extra*dense_calls) // stages
    meta = {
        'method': method,
        'rtol': rtol,
        'atol': atol,
        'steps': steps,
        'rejected': max(attempts - steps, 0),
        'nfev': solver.nfev,
    }
    logger.debug("Integrated {} us at delta = {}: {}".format(
        duration, delta, meta))
    trace = TimeTrace(ts, ys[:, 0] + 1j*ys[:, 1], ys[:, 2] + 1j*ys[:, 3],
                      meta, nu_frame=p.nu_c)
    trace.check()
    return trace


def _make_rhs(p, c, delta, seed_injection):
    N, beta, eps = p.N, p.beta, p.eps
    k_am = -1j*complex(c.g + c.Gamma, -c.J)
    k_ma = -1j*complex(c.g - c.Gamma, c.J)
    magnon_diag = complex(-c.alpha_re, -delta)
    drive = -1j*N*sqrt(eps/2) if seed_injection else 0j

    def fun(t, y):
        a = complex(y[0], y[1])
        m = complex(y[2], y[3])
        da = TWO_PI*((N*(1 - eps*(a.real**2 + a.imag**2)) - beta)*a +
                     k_am*m + drive)
        dm = TWO_PI*(magnon_diag*m + k_ma*a)
        return np.array([da.real, da.imag, dm.real, dm.imag])
    return fun


def extract_steady_state(trace, window, theta_interval=None, drift_tol=None,
                         amplitude_floor=None):
    '''Steady-state frequency, phase and amplitudes over the final window.

    nu_s comes from a linear fit of the unwrapped phase of a, theta is the
    phase of mean(a conj(m)), mapped into theta_interval when given.
    '''
    if drift_tol is None:
        drift_tol = config.getfloat("dynamics", "drift_tol")
    if amplitude_floor is None:
        amplitude_floor = config.getfloat("dynamics", "amplitude_floor")
    if not window > 0:
        raise ValueError("window must be > 0.")
    if trace.duration < 2*window:
        raise ValueError("Trace of {} us is shorter than 2 x window.".format(
            trace.duration))
    mask = trace.t >= trace.t[-1] - window
    t, a, m = trace.t[mask], trace.a[mask], trace.m[mask]
    A, M = float(np.mean(np.abs(a))), float(np.mean(np.abs(m)))
    nan = float("nan")
    if not A > amplitude_floor:
        return SteadyEstimate(nan, nan, A, M, False, nan)

    half = len(t) // 2
    nu_s = _frame_frequency(t, a, trace.nu_frame)
    drift = abs(_frame_frequency(t[:half], a[:half], trace.nu_frame) -
                _frame_frequency(t[half:], a[half:], trace.nu_frame))
    A1, A2 = np.mean(np.abs(a[:half])), np.mean(np.abs(a[half:]))
    settled = abs(A1 - A2) <= AMPLITUDE_RTOL*A

    theta = nan
    if M > amplitude_floor:
        theta = float(np.angle(np.mean(a*np.conj(m))))
        if theta_interval is not None:
            theta = float(wrap_to_interval(theta, theta_interval[0]))
    converged = bool(drift < drift_tol and settled)
    return SteadyEstimate(nu_s, theta, A, M, converged, drift)


def _frame_frequency(t, a, nu_frame):
    phase = np.unwrap(np.angle(a))
    slope = np.polyfit(t, phase, 1)[0]
    return nu_frame - slope/TWO_PI


def jacobian(s, p, c, delta):
    '''4x4 real Jacobian in the frame rotating at nu_s.

    State order: (Re a, Im a, Re m, Im m) with the steady state at
    a = A, m = M exp(-i theta).
    '''
    p.check()
    r = float(amplitude_ratio(s.theta, c))
    residual = float(eq1a_residual(s.theta, c))
    scale = max(1., abs(delta))
    if (abs(residual - delta) > CONSISTENCY_TOL*scale or
            abs(r - s.r) > CONSISTENCY_TOL*max(1., r)):
        raise ValueError("Solution is not a steady state at delta = {}.".
                         format(delta))
    A = s.A if np.isfinite(s.A) else float(cavity_amplitude(s.theta, c, p))
    if not A > 0:
        raise ValueError("Steady state not sustained by the gain (A = 0).")
    return linear_jacobians([s.theta], [delta], [A], c, p)[0]


def jacobian_eigenvalues(s, p, c, delta):
    '''Eigenvalues (rad/us) of the linearization about a steady state.

    One eigenvalue is the rotational zero mode of the phase symmetry.
    '''
    return list(np.linalg.eigvals(jacobian(s, p, c, delta)))


def _nonzero_modes(eigs):
    eigs = np.asarray(eigs)
    zero_idx = int(np.argmin(np.abs(eigs)))
    return np.delete(eigs, zero_idx)


def is_linearly_stable(eigs, tol=LINEAR_STABILITY_TOL):
    '''All eigenvalues but the zero mode have Re < -tol.'''
    return bool(decaying_modes(np.asarray(eigs)[None, :], tol)[0])


def reduced_determinant_sign(eigs):
    '''Sign of the product of the non-zero eigenvalues.

    Negative on saddle-node stable states, positive past a fold.
    '''
    product = np.prod(_nonzero_modes(eigs))
    return int(np.sign(product.real))


def limit_cycle_amplitude(p):
    '''Uncoupled Van der Pol amplitude sqrt((N - beta)/(N eps)).'''
    if not p.self_oscillating:
        return 0.
    return sqrt((p.N - p.beta) / (p.N*p.eps))


def slowest_decay_rate(eigs):
    '''-max Re over the non-zero modes, in rad/us.'''
    return float(-np.max(_nonzero_modes(eigs).real))


def seed_near(s, perturbation=0.05, rng=None):
    '''Initial (a0, m0) close to a steady state.

    Both amplitudes are scaled and rotated by random factors of relative
    size perturbation.
    '''
    if rng is None:
        rng = np.random.default_rng(0)
    za, zm = (rng.uniform(-perturbation, perturbation, 2) +
              1j*rng.uniform(-perturbation, perturbation, 2))
    a0 = s.A*(1 + za)
    m0 = s.M*np.exp(-1j*s.theta)*(1 + zm)
    return complex(a0), complex(m0)
