import logging.handlers
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), '..'))
from common.variables import DEFAULT_LOG_NAME, ENCODING, LOG_LEVEL_ENV_VAR, LOGGING_LVL

PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), f'{DEFAULT_LOG_NAME}.log')

FORMATTER = logging.Formatter(
    '{asctime} :: {levelname:8s} :: {name} :: {message}',
    style='{',
    datefmt='%Y-%m-%d %H:%M:%S',
)


def setup_logging(path=PATH, level=None):
    """
    Attaches a daily rotating file handler and a stderr handler for errors
    to the package logger. Calling it again only updates the level.
    The level comes from the argument, then BUNDLECONN_LOG_LEVEL, then LOGGING_LVL.
    """

    logger = logging.getLogger(DEFAULT_LOG_NAME)
    if level is None:
        level = os.environ.get(LOG_LEVEL_ENV_VAR, '').upper() or LOGGING_LVL
    logger.setLevel(level)
    if logger.handlers:
        return logger

    file_handler = logging.handlers.TimedRotatingFileHandler(path, encoding=ENCODING, when='D', backupCount=7)
    file_handler.setFormatter(FORMATTER)
    logger.addHandler(file_handler)

    stream_handler = logging.StreamHandler(sys.stderr)
    stream_handler.setFormatter(FORMATTER)
    stream_handler.setLevel(logging.ERROR)
    logger.addHandler(stream_handler)
    return logger


LOGGER = setup_logging()
