import logging
import os
import sys
import unittest

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), '..'))
from common.decorators import Log
from common.errors import SceneError
from common.variables import DEFAULT_LOG_NAME
from logs.bundleconn_log_config import LOGGER, setup_logging


class TestLogConfig(unittest.TestCase):
    def tearDown(self):
        setup_logging(level=logging.DEBUG)

    def test_setup_logging_ok(self):
        handlers = list(LOGGER.handlers)
        logger = setup_logging(level='WARNING')
        self.assertIs(logger, logging.getLogger(DEFAULT_LOG_NAME))
        self.assertEqual(logger.handlers, handlers)
        self.assertEqual(logger.level, logging.WARNING)

    def test_stream_handler_level(self):
        levels = sorted(handler.level for handler in LOGGER.handlers)
        self.assertEqual(levels, [logging.NOTSET, logging.ERROR])


@Log
def _halve(value):
    if value % 2:
        raise SceneError(f'odd value {value}')
    return value // 2


class TestLogDecorator(unittest.TestCase):
    def test_log_ok(self):
        with self.assertLogs(DEFAULT_LOG_NAME, level='INFO') as logs:
            self.assertEqual(_halve(4), 2)
        self.assertIn('_halve(4)', logs.output[0])
        self.assertEqual(_halve.__name__, '_halve')

    def test_log_err(self):
        with self.assertLogs(DEFAULT_LOG_NAME, level='ERROR') as logs:
            self.assertRaises(SceneError, _halve, 3)
        self.assertIn('odd value 3', logs.output[0])


if __name__ == '__main__':
    unittest.main()
