'''Quasi-static detuning sweeps with history-dependent branch selection.'''
import logging

import numpy as np
import pandas as pd
from tabulate import tabulate

from magnonlink.model import (
    coupling_from_link, strong_coupling_report, equivalent_cable_length)
from magnonlink.simul.sync import (
    solve_grid, fold_points, FoldPoints, DecoupledError)
from magnonlink.util import logtiming, write_frame

logger = logging.getLogger(__name__)


class NoSynchronizationError(ValueError):
    '''No stable steady state to follow.'''
    pass


class SweepPoint(object):

    def __init__(self, delta, selected, branches):
        self.delta = delta
        self.selected = selected
        self.branches = branches

    def __repr__(self):
        return "SweepPoint(delta: {}, selected: {!r}, {} branches)".format(
            self.delta, self.selected, len(self.branches))


class SweepTrace(object):
    '''Points in sweep order and the detunings at which the state jumped.'''

    def __init__(self, points, jumps, direction, nu_c=0.):
        self.points = points
        self.jumps = jumps
        self.direction = direction
        self.nu_c = nu_c

    @property
    def deltas(self):
        return np.array([point.delta for point in self.points])

    @property
    def nu_s(self):
        return np.array([point.selected.nu_s for point in self.points])

    @property
    def theta(self):
        return np.array([point.selected.theta for point in self.points])

    @property
    def oscillatory_ranges(self):
        '''Detuning runs (low, high) where the followed state is
        slope-stable but linearly unstable.
        '''
        ranges = []
        run = []
        for point in self.points + [None]:
            if point is not None and point.selected.oscillatory_unstable:
                run.append(point.delta)
            elif run:
                ranges.append((min(run), max(run)))
                run = []
        return ranges

    def to_frame(self):
        rows = [(self.direction, point.delta, point.selected.nu_s,
                 point.selected.theta, point.selected.r, point.selected.A,
                 point.selected.stable, point.selected.linearly_stable,
                 point.selected.branch, len(point.branches))
                for point in self.points]
        return pd.DataFrame(rows, columns=[
            'direction', 'delta', 'nu_s', 'theta', 'r', 'A', 'stable',
            'linearly_stable', 'branch', 'branch_count'])

    def __len__(self):
        return len(self.points)

    def __str__(self):
        return tabulate([
            ("Direction", self.direction),
            ("Points", len(self)),
            ("Jumps (MHz)", ", ".join("{:.2f}".format(j)
                                      for j in self.jumps) or "none")])


def follow_branches(deltas, solutions, direction):
    '''Continuation along precomputed branch sets.

    deltas and solutions are in sweep order. The first point takes the
    lowest-theta stable root on an up sweep and the highest-theta one on
    a down sweep; afterwards the stable root nearest in theta to the
    previous selection is kept. A change of branch is a jump, recorded
    midway between the two grid points.

    Returns (selected, jumps).
    '''
    selected = []
    jumps = []
    prev = None
    prev_delta = None
    for delta, roots in zip(deltas, solutions):
        stable = [s for s in roots if s.stable]
        if not stable:
            raise NoSynchronizationError(
                "no synchronization: no stable steady state at "
                "delta = {} MHz.".format(delta))
        if prev is None:
            choice = stable[0] if direction == 'up' else stable[-1]
        else:
            choice = min(stable, key=lambda s: abs(s.theta - prev.theta))
            if choice.branch != prev.branch:
                jumps.append(0.5*(prev_delta + delta))
        selected.append(choice)
        prev, prev_delta = choice, delta
    return selected, jumps


def hysteresis_sweep(sc, direction=None):
    '''Sweep the detuning of sc in one direction.'''
    if direction is None:
        direction = sc.sweep if sc.sweep in ('up', 'down') else 'up'
    sc.check()
    deltas = sc.grid(direction)
    try:
        c = sc.coupling
        with logtiming("{} sweep of {}".format(direction, sc.name),
                       level=logging.DEBUG):
            solutions = solve_grid(deltas, c, params=sc.params)
    except DecoupledError as e:
        raise NoSynchronizationError("no synchronization: {}".format(e))
    selected, jumps = follow_branches(deltas, solutions, direction)
    points = [SweepPoint(float(delta), s, roots)
              for delta, s, roots in zip(deltas, selected, solutions)]
    if jumps:
        logger.info("{} sweep of {}: jumps at {} MHz.".format(
            direction, sc.name, ", ".join("{:.3f}".format(j) for j in jumps)))
    trace = SweepTrace(points, jumps, direction, nu_c=sc.params.nu_c)
    ranges = trace.oscillatory_ranges
    if ranges:
        logger.warning(
            "{} sweep of {}: followed state is oscillatory-unstable for "
            "delta in {} MHz.".format(direction, sc.name,
                                      format_ranges(ranges)))
    return trace


def format_ranges(ranges):
    return ", ".join("[{:.2f}, {:.2f}]".format(lo, hi) for lo, hi in ranges)


def hysteresis_loop(sc):
    '''(up, down) sweeps over the same grid.'''
    return hysteresis_sweep(sc, 'up'), hysteresis_sweep(sc, 'down')


def observed_folds(up, down):
    '''Jump detunings read off an up and a down sweep.'''
    if up.jumps and down.jumps:
        return FoldPoints(min(down.jumps), max(up.jumps), True)
    return FoldPoints(float("nan"), float("nan"), False)


def loop_frame(traces):
    return pd.concat([trace.to_frame() for trace in traces],
                     ignore_index=True)


def write_sweeps(traces, path):
    write_frame(loop_frame(traces), path)


class SigmaPoint(object):
    '''Couplings, verdicts and fold window at one transmission.'''

    def __init__(self, sigma, coupling, report, length_m, folds):
        self.sigma = sigma
        self.coupling = coupling
        self.report = report
        self.length_m = length_m
        self.folds = folds


def sigma_sweep(sc, sigma_grid):
    '''Derived couplings over a set of transmissions.'''
    rows = []
    for sigma in sigma_grid:
        link = sc.link.with_sigma(sigma)
        c = coupling_from_link(sc.params, link)
        try:
            length = equivalent_cable_length(sigma, link)
        except ValueError:
            length = float("inf")
        rows.append(SigmaPoint(sigma, c, strong_coupling_report(c), length,
                               _folds_or_none(c)))
    return rows


def phase_sweep(sc, phi_grid):
    '''Derived couplings as the phase shifter turns.

    Returns (phi, CouplingSet, CouplingReport, FoldPoints) rows.
    '''
    rows = []
    for phi in phi_grid:
        c = coupling_from_link(sc.params, sc.link.with_phi(phi))
        rows.append((phi, c, strong_coupling_report(c), _folds_or_none(c)))
    return rows


def _folds_or_none(c):
    if c.is_decoupled or not c.alpha_re > 0:
        return FoldPoints(float("nan"), float("nan"), False)
    try:
        return fold_points(c)
    except DecoupledError:
        return FoldPoints(float("nan"), float("nan"), False)


def sigma_frame(rows):
    return pd.DataFrame([
        (row.sigma, row.length_m, row.coupling.J, row.coupling.Gamma,
         row.coupling.alpha_re, row.coupling.alpha_eff.imag,
         row.report.strong_coherent, row.report.strong_dissipative,
         row.report.cooperativity, row.report.margin,
         row.folds.delta_down, row.folds.delta_up)
        for row in rows], columns=[
            'sigma', 'length_m', 'J', 'Gamma', 'alpha_eff_re',
            'alpha_eff_im', 'strong_coherent', 'strong_dissipative',
            'cooperativity', 'margin', 'delta_down', 'delta_up'])


def phase_frame(rows):
    return pd.DataFrame([
        (phi, c.J, c.Gamma, c.alpha_re, c.alpha_eff.imag,
         report.strong_coherent, report.strong_dissipative,
         folds.delta_down, folds.delta_up)
        for phi, c, report, folds in rows], columns=[
            'phi', 'J', 'Gamma', 'alpha_eff_re', 'alpha_eff_im',
            'strong_coherent', 'strong_dissipative', 'delta_down',
            'delta_up'])
