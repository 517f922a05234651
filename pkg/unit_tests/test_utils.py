import unittest
import sys
import os
from fractions import Fraction

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), '..'))
from common.errors import SceneError
from common.utils import (
    canonical_json, digest, format_rational, matrix_inverse, matrix_nullspace, matrix_rank, parse_rational,
    solve_exact,
)


class TestRationals(unittest.TestCase):

    def test_parse_ok(self):
        self.assertEqual(parse_rational('3/6'), Fraction(1, 2))
        self.assertEqual(parse_rational('-4'), Fraction(-4))
        self.assertEqual(parse_rational(7), Fraction(7))

    def test_parse_err(self):
        for value in (0.5, '0.5', '1e3', '1/0', 'abc', True, None, [1]):
            with self.assertRaises(SceneError):
                parse_rational(value)

    def test_format_ok(self):
        self.assertEqual(format_rational(Fraction(-2, 4)), '-1/2')
        self.assertEqual(format_rational(3), '3/1')


class TestCanonicalJson(unittest.TestCase):

    def test_sorted_ok(self):
        self.assertEqual(canonical_json({'b': 1, 'a': [2]}), canonical_json({'a': [2], 'b': 1}))
        self.assertTrue(canonical_json({}).endswith('\n'))

    def test_digest_ok(self):
        self.assertEqual(digest({'m': 2, 'n': 1}), digest({'n': 1, 'm': 2}))
        self.assertNotEqual(digest({'m': 2}), digest({'m': 3}))
        self.assertEqual(len(digest({})), 64)


class TestExactLinearAlgebra(unittest.TestCase):

    def test_inverse_ok(self):
        inverse = matrix_inverse([[2, 1], [1, 1]])
        self.assertEqual(inverse, [[1, -1], [-1, 2]])

    def test_inverse_err(self):
        with self.assertRaises(ZeroDivisionError):
            matrix_inverse([[1, 2], [2, 4]])

    def test_rank_and_nullspace_ok(self):
        rows = [[1, 0, -1], [0, 1, -1]]
        self.assertEqual(matrix_rank(rows), 2)
        self.assertEqual(matrix_rank([]), 0)
        self.assertEqual(matrix_nullspace(rows), [[1, 1, 1]])

    def test_solve_ok(self):
        self.assertEqual(solve_exact([[1, 1], [1, -1], [2, 0]], [3, 1, 4]), [2, 1])

    def test_solve_err(self):
        with self.assertRaises(ValueError):
            solve_exact([[1, 1], [2, 2]], [1, 2])


if __name__ == '__main__':
    unittest.main()
