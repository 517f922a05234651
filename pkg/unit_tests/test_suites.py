import unittest
import sys
import os

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), '..'))
from bundleconn.scene import Scene
from bundleconn.suites import (
    EXPECTED_RANKS, GENERATED_ONLY, SUITE_RUNNERS, passed, run_suite, suite_calculus, suite_naturality,
    suite_rank, suite_weights,
)
from common.variables import FAILURES, PASSES, SUITE, SUITES


class TestSuites(unittest.TestCase):
    seed = 20240101

    def assert_clean(self, report):
        self.assertEqual(report[FAILURES], [], report[SUITE])
        self.assertGreater(report[PASSES], 0)

    def test_registry_ok(self):
        self.assertEqual(set(SUITE_RUNNERS) | {'all'}, set(SUITES))

    def test_single_trial_suites_ok(self):
        for name in ('prop21', 'chi', 'kernel', 'affine', 'geometric'):
            reports = run_suite(name, self.seed, 1)
            self.assertEqual(len(reports), 1)
            self.assert_clean(reports[0])

    def test_calculus_ok(self):
        self.assert_clean(suite_calculus(self.seed, 2))

    def test_weights_ok(self):
        report = suite_weights(self.seed)
        self.assert_clean(report)
        self.assertEqual(len(report['results']['solutions']['-2']), 6)

    def test_rank_ok(self):
        report = suite_rank(self.seed)
        self.assert_clean(report)
        self.assertEqual(report['results']['ranks'], EXPECTED_RANKS)

    def test_naturality_ok(self):
        report = suite_naturality(self.seed, 1)
        self.assert_clean(report)
        self.assertEqual(report[PASSES], 6)

    def test_mutated_naturality_err(self):
        report = suite_naturality(self.seed, 1, constructors=['phi15', 'induce_Gamma'], mutate=True)
        self.assertEqual(report[PASSES], 0)
        self.assertEqual(len(report[FAILURES]), 2)
        self.assertFalse(passed([report]))

    def test_scene_suites_ok(self):
        scene = Scene.random(3, 2, 1, 3)
        for report in run_suite('naturality', self.seed, 1, scene) + run_suite('calculus', self.seed, 1, scene):
            self.assert_clean(report)

    def test_all_with_scene_skips_generated_ok(self):
        scene = Scene.random(5, 2, 1, 3)
        names = [report[SUITE] for report in run_suite('all', self.seed, 1, scene)]
        self.assertTrue(all(name not in names for name in GENERATED_ONLY))
        self.assertIn('naturality', names)

    def test_reproducible_ok(self):
        first = run_suite('chi', 99, 2)
        second = run_suite('chi', 99, 2)
        self.assertEqual(first, second)


if __name__ == '__main__':
    unittest.main()
