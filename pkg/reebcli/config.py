"""Run configuration of the command line tool.

Values come from three sources: defaults, an optional JSON configuration file
whose keys are the long flag names (dashes or underscores), and explicit
command line flags. Flags win over the file, the file wins over defaults. The
environment variable REEB_THREADS caps the number of workers.
"""

import json
import logging
import os

from reebcli.errors import ConfigError


logger = logging.getLogger(__name__)


# ------------------------------------------------------------------------------
#
# Constants
#
# ------------------------------------------------------------------------------

# Environment variable with the largest number of parallel workers
THREADS_VARIABLE = 'REEB_THREADS'

# Number of workers if the environment variable is not set
DEFAULT_THREADS = 1


# ------------------------------------------------------------------------------
#
# Configuration
#
# ------------------------------------------------------------------------------

def worker_count(environ=None):
    """Number of workers from REEB_THREADS.

    Parameters
    ----------
    environ : dict, optional
        Environment, defaults to os.environ

    Returns
    -------
    int
    """
    environ = environ if not environ is None else os.environ
    value = environ.get(THREADS_VARIABLE)
    if value is None or value.strip() == '':
        return DEFAULT_THREADS
    try:
        count = int(value)
    except ValueError:
        raise ConfigError('invalid ' + THREADS_VARIABLE + ': ' + str(value), variable=THREADS_VARIABLE)
    if count < 1:
        raise ConfigError('invalid ' + THREADS_VARIABLE + ': ' + str(value), variable=THREADS_VARIABLE)
    return count


def load_config(filename):
    """Read a JSON configuration file into a dictionary with keys in
    attribute form (dashes replaced by underscores).
    """
    try:
        with open(filename, 'r') as f:
            obj = json.load(f)
    except IOError as ex:
        raise ConfigError('cannot read configuration file ' + str(filename) + ': ' + str(ex), file=filename)
    except ValueError as ex:
        raise ConfigError('invalid configuration file ' + str(filename) + ': ' + str(ex), file=filename)
    if not isinstance(obj, dict):
        raise ConfigError('configuration file ' + str(filename) + ' is not a JSON object', file=filename)
    return dict([(key.lstrip('-').replace('-', '_'), value) for key, value in obj.items()])


class RunConfig(object):
    """Parameters of one command line run.

    Attributes are the argument values after merging defaults, the
    configuration file and explicit flags, plus the worker count.
    """
    def __init__(self, values, workers=DEFAULT_THREADS):
        self.__dict__.update(values)
        self.workers = workers

    def __repr__(self):
        return 'RunConfig(%r)' % self.to_dict()

    def get(self, key, default=None):
        return self.__dict__.get(key, default)

    def to_dict(self):
        return dict(self.__dict__)

    @staticmethod
    def resolve(args, defaults, environ=None):
        """Merge defaults, the configuration file named by args.config and
        the flags given on the command line. Flags that were not given parse
        to None.

        Parameters
        ----------
        args : argparse.Namespace
        defaults : dict
        environ : dict, optional

        Returns
        -------
        reebcli.config.RunConfig
        """
        flags = vars(args)
        values = dict(defaults)
        for key in flags:
            values.setdefault(key, None)
        filename = flags.get('config')
        if not filename is None:
            for key, value in load_config(filename).items():
                if not key in values:
                    logger.warning('ignoring unknown configuration key %s', key)
                    continue
                values[key] = value
        for key, value in flags.items():
            if not value is None:
                values[key] = value
        return RunConfig(values, workers=worker_count(environ))
