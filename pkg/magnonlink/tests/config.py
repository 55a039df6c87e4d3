import os
import shutil
import tempfile
from contextlib import contextmanager

import magnonlink.config
from magnonlink.model import CouplingSet, SystemParams


@contextmanager
def tmpdir_context():
    tmpdir = tempfile.mkdtemp(prefix='magnonlink_test_')
    try:
        yield tmpdir
    finally:
        shutil.rmtree(tmpdir)


def gain_params(nu_c=3820., beta=85.4, ratio=2., eps=1.):
    '''Active cavity of the measurements; magnon values are placeholders.'''
    return SystemParams(nu_c=nu_c, beta=beta, N=ratio*beta, eps=eps,
                        kappa=18.7, nu_m=nu_c, alpha=1.8, gamma=0., g=0.)


# Tests run against the packaged defaults, not a user config
magnonlink.config.read_default_config()

# Measured fits
COHERENT = CouplingSet(g=11., alpha_eff=1.8)
DISSIPATIVE = CouplingSet(Gamma=6.2, alpha_eff=3.)
REMOTE_COHERENT = CouplingSet(J=-7.1, alpha_eff=1.3)
REMOTE_DISSIPATIVE = CouplingSet(Gamma=7.4, alpha_eff=6.2)

testdatadir = os.path.join(os.path.abspath(os.path.dirname(__file__)), 'data')
