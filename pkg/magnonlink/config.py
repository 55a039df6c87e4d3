import os
import json
import configparser
from importlib import resources
from importlib.metadata import version, PackageNotFoundError

from appdirs import user_data_dir

pkgname = 'magnonlink'
try:
    __version__ = version(pkgname)
except PackageNotFoundError:
    __version__ = 'unknown'

presets = json.loads(
    resources.files(__package__).joinpath('presets.json').read_text())

THREADS_ENVVAR = "MAGNONLINK_THREADS"

# The data directory only holds the optional user config; it is not
# created here.
datadir = os.environ.get("MAGNONLINK_DATADIR")
if datadir is None:
    datadir = user_data_dir(pkgname)


def read_default_config():
    config.read_string(
        resources.files(__package__).joinpath('default.cfg').read_text())


def get_threads():
    '''Number of workers allowed for parallel sections.

    MAGNONLINK_THREADS takes precedence over the [app] threads option;
    a value <= 0 means one worker per core.
    '''
    threads = os.environ.get(THREADS_ENVVAR)
    if threads is None:
        threads = config.getint("app", "threads")
    else:
        try:
            threads = int(threads)
        except ValueError:
            raise ValueError("{} must be an integer, got {!r}.".format(
                THREADS_ENVVAR, threads))
    if threads <= 0:
        threads = os.cpu_count() or 1
    return threads


config = configparser.ConfigParser()
read_default_config()
configfilename = os.path.join(datadir, 'magnonlink.cfg')
config.read(configfilename)
