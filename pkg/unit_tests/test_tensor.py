import unittest
import sys
import os
from fractions import Fraction

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), '..'))
from bundleconn.jetcalc import JetPoly
from bundleconn.tensor import (
    BD, BU, FD, FU, TD, TU, Space, SpaceKind, TensorField, contract, first_mismatch, kronecker, lift, liouville,
    permute, restrict, sym_antisym, tensor_product, to_total, values_record,
)
from common.errors import SceneError, SignatureError


class TestSpace(unittest.TestCase):

    def test_num_vars_ok(self):
        self.assertEqual(Space(SpaceKind.M, 2, 3).num_vars, 2)
        self.assertEqual(Space(SpaceKind.E, 2, 3).num_vars, 5)
        self.assertEqual(Space(SpaceKind.J1E, 2, 3).num_vars, 11)

    def test_jet_var_ok(self):
        space = Space(SpaceKind.J1E, 2, 3)
        self.assertEqual(space.jet_var(0, 0), 5)
        self.assertEqual(space.jet_var(2, 1), 10)
        self.assertEqual(len(space.jet_vars()), 6)

    def test_jet_var_err(self):
        with self.assertRaises(SignatureError):
            Space(SpaceKind.E, 2, 3).jet_var(0, 0)
        with self.assertRaises(SignatureError):
            Space(SpaceKind.M, 2, 3).fiber_vars()

    def test_dimension_err(self):
        with self.assertRaises(SceneError):
            Space(SpaceKind.M, 0, 1)
        with self.assertRaises(SceneError):
            Space(SpaceKind.M, 2, '1')


class TestTensorField(unittest.TestCase):

    def setUp(self):
        self.base = Space(SpaceKind.M, 2, 1)
        self.total = Space(SpaceKind.E, 2, 1)
        x0, x1 = JetPoly.identity(2, 3)
        self.vector = TensorField(self.base, (BU,), [x0, x1 * x1])
        self.form = TensorField.constant(self.base, (BD,), [1, Fraction(1, 2)], 3)

    def test_shape_err(self):
        with self.assertRaises(SignatureError):
            TensorField(self.base, (BU, BD), [JetPoly.zero(2, 3)] * 2)
        with self.assertRaises(SignatureError):
            TensorField(self.base, (BU,), [JetPoly.zero(3, 3)] * 2)

    def test_common_order_ok(self):
        mixed = TensorField(self.base, (BU,), [JetPoly.zero(2, 1), JetPoly.zero(2, 4)])
        self.assertEqual(mixed.order, 1)

    def test_contract_ok(self):
        pairing = contract(tensor_product(self.vector, self.form), 0, 1)
        self.assertEqual(pairing.signature, ())
        self.assertEqual(pairing.evaluate([2, 2])[()], 4)

    def test_contract_err(self):
        with self.assertRaises(SignatureError):
            contract(tensor_product(self.vector, self.vector), 0, 1)
        with self.assertRaises(SignatureError):
            contract(tensor_product(self.vector, self.form), 0, 3)

    def test_add_err(self):
        with self.assertRaises(SignatureError):
            self.vector + self.form

    def test_sym_antisym_ok(self):
        matrix = TensorField.constant(self.base, (BD, BD), [[1, 2], [0, 3]], 2)
        sym = sym_antisym(matrix, (0, 1), 'sym')
        antisym = sym_antisym(matrix, (0, 1), 'antisym')
        self.assertEqual(sym + antisym, matrix)
        self.assertEqual(sym[0, 1], 1)
        self.assertEqual(antisym[1, 0], -1)
        with self.assertRaises(SignatureError):
            sym_antisym(tensor_product(self.vector, self.form), (0, 1), 'sym')

    def test_permute_ok(self):
        matrix = TensorField.constant(self.base, (BU, BD), [[1, 2], [0, 3]], 2)
        transposed = permute(matrix, (1, 0))
        self.assertEqual(transposed.signature, (BD, BU))
        self.assertEqual(transposed[1, 0], 2)

    def test_kronecker_ok(self):
        delta = kronecker(self.base, 'base', 2)
        self.assertEqual(contract(delta, 0, 1).evaluate([0, 0])[()], 2)

    def test_lift_and_total_ok(self):
        lifted = lift(self.vector, self.total)
        self.assertEqual(lifted.space, self.total)
        self.assertEqual(lifted[1].evaluate([0, 3, 7]), 9)
        total = to_total(lifted, 0)
        self.assertEqual(total.shape, (3,))
        self.assertTrue(total[2].is_zero())
        self.assertEqual(restrict(total, 0, 'base'), lifted)

    def test_lift_err(self):
        with self.assertRaises(SignatureError):
            lift(self.vector, Space(SpaceKind.E, 3, 1))
        with self.assertRaises(SignatureError):
            to_total(self.vector, 0)

    def test_liouville_ok(self):
        field = liouville(self.total, 2)
        self.assertEqual(field.signature, (FU,))
        self.assertEqual(field[0].evaluate([1, 1, 5]), 5)
        with self.assertRaises(SignatureError):
            liouville(self.base, 2)

    def test_first_mismatch_ok(self):
        self.assertIsNone(first_mismatch([1, 2], [1, 2]))
        self.assertEqual(first_mismatch([1, 2], [1, 3]), ((1,), 2, 3))

    def test_records_ok(self):
        self.assertEqual(values_record(self.form.evaluate([0, 0])), ['1/1', '1/2'])
        record = self.vector.to_record()
        self.assertEqual(record['signature'], ['BASE_UP'])
        self.assertEqual(record['space'], {'kind': 'M', 'm': 2, 'n': 1})
        self.assertEqual(record['components'][0], [{'exponents': [1, 0], 'coeff': '1/1'}])
        self.assertEqual(record['components'][1], [{'exponents': [0, 2], 'coeff': '1/1'}])

    def test_nested_records_ok(self):
        values = np.array([Fraction(1), Fraction(2)], dtype=object)
        self.assertEqual(values_record(values), ['1/1', '2/1'])
        record = TensorField.zeros(self.total, (TU, FD), 1).to_record()
        self.assertEqual(record['components'], [[[]], [[]], [[]]])
        self.assertEqual(values_record(np.array(Fraction(3, 4), dtype=object)), '3/4')

    def test_total_slots_ok(self):
        field = TensorField.zeros(self.total, (TU, TD, FD), 1)
        self.assertEqual(field.shape, (3, 3, 1))


if __name__ == '__main__':
    unittest.main()
