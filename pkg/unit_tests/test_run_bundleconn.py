import configparser
import os
import sys
import tempfile
import unittest

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), '..')
sys.path.insert(0, ROOT)
from common.variables import DEFAULT_DATABASE_FILE, DEFAULT_DATABASE_PATH
from run_bundleconn import database_location


class TestDatabaseLocation(unittest.TestCase):

    def setUp(self):
        config = configparser.ConfigParser()
        config.add_section('SETTINGS')
        config.set('SETTINGS', 'Database_path', 'db')
        config.set('SETTINGS', 'Database_file', 'history.db3')
        self.settings = config['SETTINGS']
        self.cwd = os.getcwd()

    def tearDown(self):
        os.chdir(self.cwd)

    def test_relative_path_ok(self):
        expected = os.path.join(os.path.realpath(ROOT), 'db', 'history.db3')
        with tempfile.TemporaryDirectory() as directory:
            os.chdir(directory)
            self.assertEqual(database_location(self.settings), expected)

    def test_absolute_path_ok(self):
        with tempfile.TemporaryDirectory() as directory:
            self.settings['Database_path'] = directory
            self.assertEqual(database_location(self.settings), os.path.join(directory, 'history.db3'))

    def test_defaults_ok(self):
        location = database_location({})
        self.assertEqual(os.path.basename(location), DEFAULT_DATABASE_FILE)
        self.assertEqual(os.path.basename(os.path.dirname(location)), DEFAULT_DATABASE_PATH)
        self.assertTrue(os.path.isabs(location))


if __name__ == '__main__':
    unittest.main()
