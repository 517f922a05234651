import json
import os
import sys
import tempfile
import unittest
from fractions import Fraction

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), '..'))
from bundleconn.natural import Params15
from bundleconn.scene import Scene
from common.errors import OrderExhaustedError, SceneError


class TestScene(unittest.TestCase):

    def setUp(self):
        self.scene = Scene.random(7, 2, 1, 3)
        self.scene.params15 = Params15(a1='1/2', h2=1)
        self.record = self.scene.to_record()

    def test_record_ok(self):
        restored = Scene.from_record(json.loads(json.dumps(self.record)))
        self.assertEqual(restored.L, self.scene.L)
        self.assertEqual(restored.K, self.scene.K)
        self.assertEqual(restored.params15, self.scene.params15)
        self.assertIsNone(restored.params14)
        self.assertEqual(restored.seed, 7)
        self.assertEqual(restored.digest(), self.scene.digest())

    def test_missing_key_err(self):
        del self.record['k']
        with self.assertRaises(SceneError):
            Scene.from_record(self.record)

    def test_bad_dimension_err(self):
        self.record['m'] = 0
        with self.assertRaises(SceneError):
            Scene.from_record(self.record)
        self.record['m'] = '2'
        with self.assertRaises(SceneError):
            Scene.from_record(self.record)

    def test_inconsistent_dims_err(self):
        self.record['n'] = 2
        with self.assertRaises(SceneError):
            Scene.from_record(self.record)

    def test_order_exceeds_records_err(self):
        self.record['order'] = 5
        with self.assertRaises(SceneError):
            Scene.from_record(self.record)

    def test_lower_order_ok(self):
        self.record['order'] = 1
        scene = Scene.from_record(self.record)
        self.assertEqual(scene.L.order, 1)
        with self.assertRaises(OrderExhaustedError):
            scene.require_order(2, 'test')

    def test_float_err(self):
        self.record['point'] = [0.5, 0]
        with self.assertRaises(SceneError):
            Scene.from_record(self.record)

    def test_scene_point_err(self):
        for point in (5, '0/1', {'x': 0}, [[0], 0], [None, 0]):
            self.record['point'] = point
            with self.assertRaises(SceneError):
                Scene.from_record(self.record)
        self.record['point'] = ['0/1']
        with self.assertRaises(SceneError):
            Scene.from_record(self.record)

    def test_recentered_ok(self):
        self.record['point'] = ['1/2', '-1']
        scene = Scene.from_record(self.record)
        L, _ = scene.recentered()
        self.assertEqual(L.coeffs[0, 1, 0].evaluate([0, 0]), scene.L.coeffs[0, 1, 0].evaluate([Fraction(1, 2), -1]))

    def test_load_ok(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'scene.json')
            with open(path, 'w', encoding='utf-8') as file:
                json.dump(self.record, file)
            self.assertEqual(Scene.load(path).digest(), self.scene.digest())

    def test_load_err(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'scene.json')
            with self.assertRaises(SceneError):
                Scene.load(path)
            with open(path, 'w', encoding='utf-8') as file:
                file.write('{"m": 2,')
            with self.assertRaises(SceneError):
                Scene.load(path)

    def test_flat_ok(self):
        scene = Scene.flat(2, 2, 2)
        self.assertTrue(scene.L.is_zero())
        self.assertTrue(scene.K.is_zero())
        self.assertEqual(scene.point, [0, 0])


if __name__ == '__main__':
    unittest.main()
