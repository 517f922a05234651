import logging

from common.errors import SceneError
from common.variables import DEFAULT_LOG_NAME

LOGGER = logging.getLogger(DEFAULT_LOG_NAME)


class Dimension:
    """
    A handle to a manifold or fiber dimension. Allows only integers >= 1.
    Trying to set an invalid dimension raises SceneError.
    """

    def __set__(self, instance, value):
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            LOGGER.error(f'Dimension "{self.name}" must be an integer >= 1, got {value!r}.')
            raise SceneError(f'invalid dimension {self.name}={value!r}')

        instance.__dict__[self.name] = value

    def __set_name__(self, owner, name):
        self.name = name


class Order:
    """
    A handle to a truncation order. Allows only integers >= 0.
    """

    def __set__(self, instance, value):
        if isinstance(value, bool) or not isinstance(value, int) or value < 0:
            LOGGER.error(f'Truncation order "{self.name}" must be an integer >= 0, got {value!r}.')
            raise SceneError(f'invalid order {self.name}={value!r}')

        instance.__dict__[self.name] = value

    def __set_name__(self, owner, name):
        self.name = name
