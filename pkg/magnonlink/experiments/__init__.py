from magnonlink.experiments.scenario import Scenario, load_scenario
from magnonlink.experiments.presets import preset, list_presets
from magnonlink.experiments.sweep import (
    SweepTrace, NoSynchronizationError, hysteresis_sweep, hysteresis_loop,
    sigma_sweep, phase_sweep)
from magnonlink.experiments.spectra import spectra_map

__all__ = [
    'Scenario',
    'load_scenario',
    'preset',
    'list_presets',
    'SweepTrace',
    'NoSynchronizationError',
    'hysteresis_sweep',
    'hysteresis_loop',
    'sigma_sweep',
    'phase_sweep',
    'spectra_map'
]
