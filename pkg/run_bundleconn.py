import configparser
import os.path
import sys

from bundleconn.cli import build_parser, execute
from common.decorators import Log
from common.variables import (
    BUNDLECONN_CONFIG, DEFAULT_DATABASE_FILE, DEFAULT_DATABASE_PATH, DEFAULT_SEED, DEFAULT_TRIALS,
)
from db.run_history import RunHistory
from logs.bundleconn_log_config import LOGGER


@Log
def args_parser(default_trials):
    """Command line argument parser."""

    parser = build_parser(int(default_trials))
    return parser.parse_args(sys.argv[1:])


@Log
def config_load():
    """Parser of the configuration ini file."""

    config = configparser.ConfigParser()
    dir_path = os.path.dirname(os.path.realpath(__file__))
    config.read(os.path.join(dir_path, BUNDLECONN_CONFIG))

    # A missing or broken file falls back to the defaults.
    if 'SETTINGS' in config:
        return config
    else:
        config.add_section('SETTINGS')
        config.set('SETTINGS', 'Default_trials', str(DEFAULT_TRIALS))
        config.set('SETTINGS', 'Default_seed', str(DEFAULT_SEED))
        config.set('SETTINGS', 'Database_path', DEFAULT_DATABASE_PATH)
        config.set('SETTINGS', 'Database_file', DEFAULT_DATABASE_FILE)
        config.set('SETTINGS', 'Keep_history', 'no')
        return config


def database_location(settings):
    """History database file; a relative Database_path is taken from the script directory."""

    dir_path = os.path.dirname(os.path.realpath(__file__))
    return os.path.join(
        dir_path,
        settings.get('Database_path', DEFAULT_DATABASE_PATH),
        settings.get('Database_file', DEFAULT_DATABASE_FILE),
    )


@Log
def main():
    """Main function."""

    config = config_load()
    settings = config['SETTINGS']

    namespace = args_parser(settings.get('Default_trials', str(DEFAULT_TRIALS)))
    history = None
    if settings.getboolean('Keep_history', fallback=False):
        history = RunHistory(database_location(settings))

    try:
        code = execute(namespace, {'default_seed': settings.getint('Default_seed', fallback=DEFAULT_SEED)}, history)
    finally:
        if history is not None:
            history.close()
    LOGGER.debug(f'Exit code {code}.')
    sys.exit(code)


if __name__ == '__main__':
    main()
