import random
import unittest
import sys
import os

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), '..'))
from bundleconn.connections import (
    ClassicalConnection, GeneralLinearConnection, base_space, bianchi_defect, covariant_differential,
    curvature_jets, curvature_K, curvature_Lambda, ricci_residual_section, ricci_residual_vector,
    tensor_product_connection, torsion_split, torsion_trace,
)
from bundleconn.jetcalc import JetPoly, random_poly
from bundleconn.tensor import BD, BU, FD, FU, TensorField
from common.errors import OrderExhaustedError, SceneError, SignatureError


class TestConnections(unittest.TestCase):

    def setUp(self):
        self.rng = random.Random(11)
        self.space = base_space(2, 2)

    def random_field(self, signature, order=3):
        return TensorField.from_function(
            self.space, signature, order, lambda index: random_poly(self.rng, 2, order, 2)
        )

    def test_abelian_curvature_ok(self):
        space = base_space(2, 1)
        x0, x1 = JetPoly.identity(2, 3)
        K = GeneralLinearConnection.from_function(space, 3, lambda index: x1 if index == (0, 0, 0) else 0)
        curvature = curvature_K(K)
        self.assertEqual(curvature.signature, (FD, FU, BD, BD))
        self.assertEqual(curvature[0, 0, 0, 1], 1)
        self.assertEqual(curvature[0, 0, 1, 0], -1)
        self.assertEqual(curvature[0, 0, 0, 0], 0)

    def test_curvature_order_err(self):
        K = GeneralLinearConnection.zero(self.space, 0)
        with self.assertRaises(OrderExhaustedError):
            curvature_K(K)

    def test_torsion_split_ok(self):
        L = ClassicalConnection.random(self.rng, self.space, 3, 2)
        sym, torsion = torsion_split(L)
        self.assertTrue(sym.is_symmetric())
        self.assertEqual(sym + torsion, L)
        self.assertEqual(torsion_trace(torsion).signature, (BD,))

    def test_symmetric_flag_err(self):
        x0, x1 = JetPoly.identity(2, 2)
        with self.assertRaises(SceneError):
            ClassicalConnection.from_function(
                self.space, 2, lambda index: x0 if index == (0, 0, 1) else 0, symmetric=True
            )

    def test_record_ok(self):
        L = ClassicalConnection.random(self.rng, self.space, 2, 2, symmetric=True)
        K = GeneralLinearConnection.random(self.rng, self.space, 2, 2)
        self.assertEqual(ClassicalConnection.from_record(self.space, L.to_record()), L)
        self.assertEqual(GeneralLinearConnection.from_record(self.space, K.to_record()), K)

    def test_record_err(self):
        with self.assertRaises(SceneError):
            GeneralLinearConnection.from_record(self.space, {'order': 2, 'coeffs': [[]]})
        with self.assertRaises(SceneError):
            ClassicalConnection.from_record(self.space, {'coeffs': []})

    def test_flat_differential_ok(self):
        field = TensorField.constant(self.space, (BU,), [1, 2], 2)
        self.assertTrue(covariant_differential(field).is_zero())

    def test_differential_err(self):
        with self.assertRaises(OrderExhaustedError):
            covariant_differential(TensorField.constant(self.space, (BU,), [1, 2], 0))

    def test_ricci_section_ok(self):
        L = ClassicalConnection.random(self.rng, self.space, 3, 2, symmetric=True)
        K = GeneralLinearConnection.random(self.rng, self.space, 3, 2)
        self.assertTrue(ricci_residual_section(K, L, self.random_field((FU,))).is_zero())

    def test_ricci_vector_ok(self):
        L = ClassicalConnection.random(self.rng, self.space, 3, 2, symmetric=True)
        self.assertTrue(ricci_residual_vector(L, self.random_field((BU,))).is_zero())

    def test_bianchi_ok(self):
        L = ClassicalConnection.random(self.rng, self.space, 3, 2, symmetric=True)
        self.assertTrue(bianchi_defect(L).is_zero())

    def test_leibniz_ok(self):
        L = ClassicalConnection.random(self.rng, self.space, 3, 2)
        K = GeneralLinearConnection.random(self.rng, self.space, 3, 2)
        s = self.random_field((FU,))
        omega = self.random_field((FD,))
        pairing = TensorField.from_function(
            self.space, (), 3, lambda index: sum((s[i] * omega[i] for i in range(2)), JetPoly.zero(2, 3))
        )
        lhs = covariant_differential(pairing, K, L)
        ds, domega = covariant_differential(s, K, L), covariant_differential(omega, K, L)
        for nu in range(2):
            rhs = sum((ds[i, nu] * omega[i] + s[i] * domega[i, nu] for i in range(2)), JetPoly.zero(2, 2))
            self.assertEqual(lhs[nu], rhs)

    def test_curvature_jets_ok(self):
        L = ClassicalConnection.random(self.rng, self.space, 3, 2, symmetric=True)
        K = GeneralLinearConnection.random(self.rng, self.space, 3, 2)
        jets_lambda, jets_k = curvature_jets(K, L, 1)
        self.assertEqual(len(jets_lambda), 2)
        self.assertEqual(jets_k[1].signature, (FD, FU, BD, BD, BD))
        self.assertEqual(jets_lambda[0], curvature_Lambda(L))

    def test_curvature_jets_err(self):
        L = ClassicalConnection.random(self.rng, self.space, 3, 2)
        K = GeneralLinearConnection.random(self.rng, self.space, 3, 2)
        with self.assertRaises(SceneError):
            curvature_jets(K, L, 1)
        with self.assertRaises(OrderExhaustedError):
            curvature_jets(K, torsion_split(L).sym, 3)

    def test_product_connection_ok(self):
        L = ClassicalConnection.random(self.rng, self.space, 2, 1)
        K = GeneralLinearConnection.random(self.rng, self.space, 2, 1)
        product = tensor_product_connection(K, L, 1, 0, 0, 1)
        self.assertEqual(product.signature, (FU, BD))
        self.assertEqual(product.block(1)[0, 1, 0], -L.coeffs[1, 0, 0])
        with self.assertRaises(SignatureError):
            tensor_product_connection(K, L, -1, 0, 0, 0)


if __name__ == '__main__':
    unittest.main()
