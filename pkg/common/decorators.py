import functools
import inspect
import logging

from common.errors import BundleConnError
from common.variables import DEFAULT_LOG_NAME, MAX_LOGGED_ARGUMENT


def _short(value):
    text = repr(value)
    if len(text) > MAX_LOGGED_ARGUMENT:
        return f'{text[:MAX_LOGGED_ARGUMENT]}...'
    return text


class Log:
    """
    Decorator logging every call of the wrapped function: its name, the
    abbreviated arguments and the code object it was called from.
    Project errors raised by the call are logged before propagating.
    """

    def __init__(self, func):
        functools.update_wrapper(self, func)
        self.func = func

    def __call__(self, *args, **kwargs):
        caller = inspect.currentframe().f_back.f_code.co_name

        logger = logging.getLogger(DEFAULT_LOG_NAME)
        shown = ', '.join([_short(arg) for arg in args] + [f'{key}={_short(val)}' for key, val in kwargs.items()])
        logger.info(f'"{caller}()" called "{self.func.__name__}({shown})".')

        try:
            return self.func(*args, **kwargs)
        except BundleConnError as error:
            logger.error(f'"{self.func.__name__}()" failed: {error}')
            raise
