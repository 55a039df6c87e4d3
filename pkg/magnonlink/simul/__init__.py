from magnonlink.simul.sync import (
    SyncSolution, FoldPoints, DecoupledError, theta_interval, solve_branches,
    fold_points, dispersion_curve)
from magnonlink.simul.dynamics import (
    TimeTrace, SteadyEstimate, IntegrationError, integrate,
    extract_steady_state, jacobian_eigenvalues)

__all__ = [
    'SyncSolution',
    'FoldPoints',
    'DecoupledError',
    'theta_interval',
    'solve_branches',
    'fold_points',
    'dispersion_curve',
    'TimeTrace',
    'SteadyEstimate',
    'IntegrationError',
    'integrate',
    'extract_steady_state',
    'jacobian_eigenvalues'
]
