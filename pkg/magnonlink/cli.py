import os
import sys
import logging
import logging.handlers
from math import pi

import click
import numpy as np
import pandas as pd
from tabulate import tabulate

from magnonlink.config import pkgname, __version__, presets as PRESET_DATA
from magnonlink.experiments.presets import list_presets
from magnonlink.experiments.sweep import NoSynchronizationError
from magnonlink.simul.dynamics import IntegrationError
from magnonlink.util import parse_floats, write_frame

LOG_LEVELS = {
    levelname: getattr(logging, levelname)
    for levelname in ('DEBUG', 'INFO', 'WARNING', 'ERROR')
}
NUMERICAL_ERRORS = (IntegrationError, NoSynchronizationError, ArithmeticError)
logger = logging.getLogger(pkgname)


def configure_logger(loglevel='INFO', logfile=None):
    logger.setLevel(LOG_LEVELS[loglevel.upper()])
    logger.handlers = [
        handler for handler in logger.handlers
        if not isinstance(handler, logging.handlers.RotatingFileHandler)]
    if logfile is not None:
        formatter = logging.Formatter(
            '%(asctime)s:%(name)s [%(levelname)s] %(message)s')
        filehandler = logging.handlers.RotatingFileHandler(
            logfile, maxBytes=1000000, backupCount=1)
        filehandler.setFormatter(formatter)
        logger.addHandler(filehandler)


def _check_output(ctx, param, value):
    if value is None:
        return value
    parent = os.path.dirname(os.path.abspath(value))
    if not os.path.isdir(parent):
        raise click.BadParameter(
            "output directory {} does not exist.".format(parent))
    return value


def input_options(fn):
    fn = click.option('--scenario', type=click.Path(exists=True,
                                                    dir_okay=False),
                      default=None, help="JSON scenario file.")(fn)
    fn = click.option('--preset', type=click.Choice(list_presets()),
                      default=None, help="Named measured configuration.")(fn)
    return fn


def output_option(*names, **kwargs):
    kwargs.setdefault('help', "Output file.")
    return click.option(*names, type=click.Path(dir_okay=False),
                        default=None, callback=_check_output, **kwargs)


def load_input(preset, scenario):
    '''The scenario named by exactly one of --preset / --scenario.'''
    if (preset is None) == (scenario is None):
        raise click.UsageError("Give exactly one of --preset or --scenario.")
    if preset is not None:
        from magnonlink.experiments.presets import preset as get_preset
        return get_preset(preset)
    from magnonlink.experiments.scenario import load_scenario
    return load_scenario(scenario)


@click.group()
@click.option('--loglevel', type=click.Choice(sorted(LOG_LEVELS),
                                              case_sensitive=False),
              default='INFO', help="Logging level.")
@click.option('--logfile', type=click.Path(dir_okay=False), default=None,
              callback=_check_output, help="Also log to this file.")
@click.version_option(version=__version__, prog_name=pkgname)
def cli(loglevel, logfile):
    configure_logger(loglevel, logfile)


@cli.command()
def presets():
    '''List the measured configurations.'''
    from magnonlink.experiments.presets import format_presets
    click.echo(format_presets())
    click.echo("")
    click.echo("Cavity:")
    click.echo(tabulate(sorted(PRESET_DATA['cavity'].items())))


@cli.command()
@input_options
@output_option('--out')
def dispersion(preset, scenario, out):
    '''Steady states over the detuning grid.'''
    from magnonlink.simul.sync import dispersion_curve, fold_points
    sc = load_input(preset, scenario)
    c = sc.coupling
    curve = dispersion_curve(sc.delta_grid, c, params=sc.params)
    rows = []
    for delta, roots in curve:
        for s in roots:
            rows.append((delta, s.branch, s.theta, s.r, s.nu_s, s.A, s.M,
                         s.stable, s.linearly_stable, s.slope, len(roots)))
    if out is not None:
        write_frame(pd.DataFrame(rows, columns=[
            'delta', 'branch', 'theta', 'r', 'nu_s', 'A', 'M', 'stable',
            'linearly_stable', 'slope', 'branch_count']), out)
    folds = fold_points(c)
    click.echo("{}: {} detunings, {} steady states.".format(
        sc.name, len(curve), len(rows)))
    oscillatory = sum(s.oscillatory_unstable
                      for delta, roots in curve for s in roots)
    if oscillatory:
        click.echo("{} slope-stable states are oscillatory-unstable.".format(
            oscillatory))
    click.echo(_format_folds("Model folds", folds))


@cli.command()
@input_options
@click.option('--direction', type=click.Choice(['up', 'down', 'both']),
              default=None, help="Sweep direction (default from scenario).")
@output_option('--out')
@output_option('--map', 'mapfile', help="Spectra matrix file.")
@click.option('--linewidth', type=click.FLOAT, default=None,
              help="Peak linewidth in MHz (default nu_c/Q).")
@click.option('--nu-span', type=click.FLOAT, default=60.,
              help="Half width (MHz) of the map frequency axis.")
@click.option('--nu-step', type=click.FLOAT, default=0.05,
              help="Map frequency resolution (MHz).")
def sweep(preset, scenario, direction, out, mapfile, linewidth, nu_span,
          nu_step):
    '''Hysteresis sweep of the detuning.'''
    from magnonlink.experiments.sweep import (
        hysteresis_sweep, observed_folds, write_sweeps, format_ranges)
    from magnonlink.experiments.spectra import spectra_map, write_matrix
    from magnonlink.simul.sync import fold_points
    sc = load_input(preset, scenario)
    direction = direction or sc.sweep
    directions = ['up', 'down'] if direction == 'both' else [direction]
    traces = [hysteresis_sweep(sc, d) for d in directions]
    if out is not None:
        write_sweeps(traces, out)
    if mapfile is not None:
        if not nu_step > 0:
            raise click.BadParameter("--nu-step must be > 0.")
        nu_c = sc.params.nu_c
        n = int(round(2*nu_span / nu_step))
        nu_grid = nu_c - nu_span + nu_step*np.arange(n+1)
        deltas = np.concatenate([trace.deltas for trace in traces])
        matrix = np.vstack([spectra_map(trace, nu_grid, linewidth)
                            for trace in traces])
        write_matrix(mapfile, deltas, nu_grid, matrix)

    for trace in traces:
        click.echo("{} sweep: jumps at {}".format(
            trace.direction, ", ".join("{:.2f} MHz".format(j)
                                       for j in trace.jumps) or "none"))
        ranges = trace.oscillatory_ranges
        if ranges:
            click.echo("{} sweep: oscillatory-unstable at {} MHz".format(
                trace.direction, format_ranges(ranges)))
    if len(traces) == 2:
        click.echo(_format_folds("Observed folds",
                                 observed_folds(*traces)))
        click.echo(_format_folds("Model folds", fold_points(sc.coupling)))


@cli.command()
@input_options
@click.option('--delta', type=click.FLOAT, required=True,
              help="Detuning nu_m - nu_c in MHz.")
@click.option('--duration', type=click.FLOAT, default=10.,
              help="Integration time in us.")
@click.option('--window', type=click.FLOAT, default=2.,
              help="Final window (us) for the steady-state estimate.")
@click.option('--a0', type=click.FLOAT, default=None,
              help="Initial cavity amplitude.")
@click.option('--m0', type=click.FLOAT, default=None,
              help="Initial magnon amplitude.")
@click.option('--seed-injection', is_flag=True,
              help="Add the constant seed drive of the gain.")
@output_option('--out')
def timetrace(preset, scenario, delta, duration, window, a0, m0,
              seed_injection, out):
    '''Integrate the equations of motion at one detuning.'''
    from magnonlink.simul.dynamics import integrate, extract_steady_state
    from magnonlink.simul.sync import theta_interval
    sc = load_input(preset, scenario)
    c = sc.coupling
    trace = integrate(sc.params, c, delta, a0=a0, m0=m0, duration=duration,
                      seed_injection=seed_injection)
    if out is not None:
        trace.write_csv(out)
    interval = None if c.is_decoupled else theta_interval(c)
    estimate = extract_steady_state(trace, window, theta_interval=interval)
    click.echo(str(estimate))
    click.echo(tabulate(sorted(trace.meta.items())))


@cli.command()
@input_options
@click.option('--sigmas', type=click.STRING, default=None,
              help="Comma separated transmissions (default 1, 0.9, ..., 0).")
@output_option('--out')
def sigma(preset, scenario, sigmas, out):
    '''Couplings and criteria as the transmission is reduced.'''
    from magnonlink.experiments.sweep import sigma_sweep, sigma_frame
    sc = load_input(preset, scenario)
    grid = (parse_floats(sigmas) if sigmas is not None
            else np.linspace(1, 0, 11).tolist())
    rows = sigma_sweep(sc, grid)
    frame = sigma_frame(rows)
    if out is not None:
        write_frame(frame, out)
    click.echo(tabulate(
        frame[['sigma', 'length_m', 'J', 'Gamma', 'alpha_eff_re',
               'strong_coherent', 'strong_dissipative']].values.tolist(),
        headers=['sigma', 'L (m)', 'J', 'Gamma', "Re alpha'", 'Coherent',
                 'Dissipative'], floatfmt='.4g'))


@cli.command()
@input_options
@click.option('--phis', type=click.STRING, default=None,
              help="Comma separated phases in rad (default 13 in [0, pi]).")
@output_option('--out')
def phase(preset, scenario, phis, out):
    '''Couplings as the propagation phase is turned.'''
    from magnonlink.experiments.sweep import phase_sweep, phase_frame
    sc = load_input(preset, scenario)
    grid = (parse_floats(phis) if phis is not None
            else np.linspace(0, pi, 13).tolist())
    frame = phase_frame(phase_sweep(sc, grid))
    if out is not None:
        write_frame(frame, out)
    click.echo(tabulate(
        frame[['phi', 'J', 'Gamma', 'alpha_eff_re', 'strong_coherent',
               'strong_dissipative']].values.tolist(),
        headers=['phi', 'J', 'Gamma', "Re alpha'", 'Coherent',
                 'Dissipative'], floatfmt='.4g'))


@cli.command()
@input_options
@click.option('--mode', type=click.Choice(['coherent', 'dissipative']),
              default=None, help="Coupling kind (default from the phase).")
@click.option('--sigma', 'sigma_threshold', type=click.FLOAT, default=None,
              help="Read the length off at this transmission.")
def distance(preset, scenario, mode, sigma_threshold):
    '''Longest cable run keeping the coupling strong.'''
    from magnonlink.model import max_strong_coupling_distance
    sc = load_input(preset, scenario)
    if mode is None:
        phi = sc.link.phi
        if abs(np.sin(phi)) >= abs(np.cos(phi)):
            mode = 'coherent'
        else:
            mode = 'dissipative'
    est = max_strong_coupling_distance(sc.params, sc.link, mode=mode,
                                       sigma_threshold=sigma_threshold)
    if est.never_strong:
        click.echo("{} coupling of {} is never strong.".format(
            mode.capitalize(), sc.name))
    else:
        click.echo("Max strong {} coupling distance: {:.1f} m "
                   "(sigma = {:.4g}, {}).".format(
                       mode, est.length_m, est.sigma, est.path))


@cli.command()
@click.option('--data', 'datafile', type=click.Path(exists=True,
                                                    dir_okay=False),
              required=True, help="CSV with delta_mhz, nu_s_mhz[, branch].")
@click.option('--free', type=click.STRING, default='g,alpha_eff',
              help="Comma separated parameters to fit.")
@click.option('--init', 'inits', type=click.STRING, multiple=True,
              help="Initial guess as name=value (repeatable).")
@input_options
@click.option('--starts', type=click.INT, default=None,
              help="Number of simplex starts.")
@click.option('--seed', type=click.INT, default=None,
              help="Seed of the jittered starts.")
@output_option('--out', help="JSON fit report.")
def fit(datafile, free, inits, preset, scenario, starts, seed, out):
    '''Fit couplings and damping to dispersion data.'''
    from magnonlink.estimate.fitting import fit_dispersion, load_dispersion_csv
    guesses = {}
    for item in inits:
        name, sep, value = item.partition('=')
        if not sep:
            raise click.BadParameter(
                "expected name=value, got {!r}.".format(item),
                param_hint='--init')
        guesses[name.strip()] = float(value)
    data = load_dispersion_csv(datafile)
    init = {}
    model = None
    if preset is not None or scenario is not None:
        sc = load_input(preset, scenario)
        model = sc.coupling
        init['nu_c'] = sc.params.nu_c
    init.update(guesses)
    names = [name.strip() for name in free.split(',') if name.strip()]
    result = fit_dispersion(data, names, init=init, model=model,
                            starts=starts, seed=seed)
    if out is not None:
        result.write_json(out)
    click.echo(str(result))


def run(argv=None):
    '''Run the command line; returns the exit code.

    0 on success, 1 on usage or input errors, 2 on numerical failures.
    '''
    try:
        result = cli.main(args=argv, prog_name=pkgname,
                          standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return 1
    except click.ClickException as e:
        e.show()
        return 1
    except NUMERICAL_ERRORS as e:
        click.echo("Numerical failure: {}".format(e), err=True)
        return 2
    except (ValueError, OSError) as e:
        click.echo("Error: {}".format(e), err=True)
        return 1
    return result if isinstance(result, int) else 0


def main():
    sys.exit(run(sys.argv[1:]))
