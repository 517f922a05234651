import json
import os
import sys
import tempfile
import unittest

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), '..'))
from bundleconn.cli import build_parser, cmd_curvature, cmd_induce, cmd_weights, execute, resolve_seed
from bundleconn.natural import Params14
from bundleconn.scene import Scene
from common.errors import SceneError
from common.variables import (
    EXIT_INPUT_ERROR, EXIT_OK, EXIT_ORDER_EXHAUSTED, PASSED, RESULTS, SCENE_DIGEST, SCHEMA, SEED, SEED_ENV_VAR,
    SUMMARY,
)
from db.run_history import RunHistory


class TestCommands(unittest.TestCase):

    def setUp(self):
        self.scene = Scene.random(3, 2, 1, 3)

    def test_curvature_ok(self):
        report = cmd_curvature(self.scene, 3)
        self.assertEqual(report[SCHEMA], 1)
        self.assertEqual(report[SCENE_DIGEST], self.scene.digest())
        self.assertTrue(report[SUMMARY][PASSED])
        self.assertEqual(report[RESULTS]['R_K']['signature'], ['FIBER_DOWN', 'FIBER_UP', 'BASE_DOWN', 'BASE_DOWN'])
        self.assertEqual(len(report[RESULTS]['jets']['R_K']), 1)

    def test_flat_curvature_ok(self):
        report = cmd_curvature(Scene.flat(2, 1, 3))
        values = report[RESULTS]['values']
        self.assertEqual(values['R_K'], [[[['0/1'] * 2] * 2]])
        self.assertEqual(values['torsion'], [[['0/1'] * 2] * 2] * 2)
        table = cmd_induce(Scene.flat(2, 1, 3), 'd')[RESULTS]['table']
        self.assertEqual(json.dumps(table['components']).count('coeff'), 0)

    def test_induce_ok(self):
        for target in ('d', 'gamma'):
            report = cmd_induce(self.scene, target)
            self.assertEqual(report[RESULTS]['target'], target)
        self.scene.params14 = Params14(e2=1)
        table = cmd_induce(self.scene, 'gamma-tilde')[RESULTS]['table']
        self.assertEqual(table['space']['kind'], 'J1E')

    def test_induce_err(self):
        with self.assertRaises(SceneError):
            cmd_induce(self.scene, 'd-tilde')
        with self.assertRaises(SceneError):
            cmd_induce(self.scene, 'unknown')

    def test_weights_ok(self):
        report = cmd_weights(2, 2, -2)
        self.assertEqual(report[RESULTS]['count'], 6)
        self.assertIsNone(report[SCENE_DIGEST])


class TestExecute(unittest.TestCase):

    def setUp(self):
        os.environ.pop(SEED_ENV_VAR, None)
        self.directory = tempfile.TemporaryDirectory()
        self.out = os.path.join(self.directory.name, 'report.json')
        self.scene_path = os.path.join(self.directory.name, 'scene.json')
        with open(self.scene_path, 'w', encoding='utf-8') as file:
            json.dump(Scene.random(3, 2, 1, 3).to_record(), file)
        self.parser = build_parser(1)

    def tearDown(self):
        self.directory.cleanup()

    def run_cli(self, *args, history=None):
        namespace = self.parser.parse_args(list(args) + ['--out', self.out])
        return execute(namespace, {'default_seed': 5}, history)

    def read_report(self):
        with open(self.out, encoding='utf-8') as file:
            return json.load(file)

    def test_weights_ok(self):
        self.assertEqual(self.run_cli('weights', '--rhs', '-1'), EXIT_OK)
        report = self.read_report()
        self.assertEqual(report[RESULTS]['count'], 2)
        self.assertEqual(report[SEED], 5)

    def test_verify_ok(self):
        self.assertEqual(self.run_cli('verify', '--suite', 'chi', '--seed', '11'), EXIT_OK)
        report = self.read_report()
        self.assertEqual(report[SEED], 11)
        self.assertEqual(report[RESULTS]['suites'][0]['suite'], 'chi')

    def test_scene_seed_ok(self):
        self.assertEqual(self.run_cli('curvature', '--scene', self.scene_path), EXIT_OK)
        self.assertEqual(self.read_report()[SEED], 3)

    def test_byte_identical_ok(self):
        self.assertEqual(self.run_cli('induce', '--scene', self.scene_path, '--target', 'gamma'), EXIT_OK)
        with open(self.out, encoding='utf-8') as file:
            first = file.read()
        self.run_cli('induce', '--scene', self.scene_path, '--target', 'gamma')
        with open(self.out, encoding='utf-8') as file:
            self.assertEqual(file.read(), first)

    def test_input_err(self):
        self.assertEqual(self.run_cli('curvature'), EXIT_INPUT_ERROR)
        self.assertEqual(self.run_cli('induce', '--scene', self.scene_path, '--target', 'd-tilde'), EXIT_INPUT_ERROR)
        self.assertEqual(self.run_cli('verify', '--trials', '0'), EXIT_INPUT_ERROR)
        self.assertEqual(self.run_cli(), EXIT_INPUT_ERROR)
        self.assertEqual(self.run_cli('weights', '--list-history'), EXIT_INPUT_ERROR)

    def test_malformed_point_err(self):
        record = Scene.random(3, 2, 1, 3).to_record()
        record['point'] = 5
        with open(self.scene_path, 'w', encoding='utf-8') as file:
            json.dump(record, file)
        self.assertEqual(self.run_cli('curvature', '--scene', self.scene_path), EXIT_INPUT_ERROR)

    def test_order_exhausted_err(self):
        record = Scene.random(3, 2, 1, 3).to_record()
        record['order'] = 1
        with open(self.scene_path, 'w', encoding='utf-8') as file:
            json.dump(record, file)
        self.assertEqual(self.run_cli('curvature', '--scene', self.scene_path), EXIT_ORDER_EXHAUSTED)

    def test_history_ok(self):
        history = RunHistory(os.path.join(self.directory.name, 'history.db3'))
        try:
            self.run_cli('weights', history=history)
            self.run_cli('verify', '--suite', 'weights', history=history)
            rows = history.reports()
            self.assertEqual([row[1] for row in rows], ['weights', 'verify'])
            self.assertEqual(rows[1][2], 'weights')
            self.assertEqual(self.run_cli('verify', '--list-history', history=history), EXIT_OK)
        finally:
            history.close()


class TestSeed(unittest.TestCase):

    def test_resolve_ok(self):
        self.assertEqual(resolve_seed(4, {SEED_ENV_VAR: '9'}), 4)
        self.assertEqual(resolve_seed(None, {SEED_ENV_VAR: '9'}), 9)
        self.assertIsNone(resolve_seed(None, {}))

    def test_resolve_err(self):
        with self.assertRaises(SceneError):
            resolve_seed(None, {SEED_ENV_VAR: 'nine'})


if __name__ == '__main__':
    unittest.main()
