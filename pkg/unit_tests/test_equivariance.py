import random
import unittest
import sys
import os
from fractions import Fraction

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), '..'))
from bundleconn.equivariance import (
    NATURAL_OPERATORS, GroupElement11, MorphismJet, action_2_1_to_2_8, action_J1E, family_rank,
    random_inputs, stabilized_rank, transform_classical, transform_linear, transform_tensor,
    transform_values, verify_naturality, weight_solutions,
)
from bundleconn.jetcalc import JetPoly
from bundleconn.natural import total_space
from bundleconn.tensor import BD, FD, FU, TD, TU, TensorField
from common.errors import JetError, SceneError


class TestGroupElement(unittest.TestCase):

    def setUp(self):
        self.rng = random.Random(23)

    def test_inverse_ok(self):
        g = GroupElement11.random(self.rng, 2, 2)
        self.assertEqual(g.compose(g.inverse()), GroupElement11.identity(2, 2))
        self.assertEqual(g.inverse().compose(g), GroupElement11.identity(2, 2))

    def test_singular_err(self):
        with self.assertRaises(JetError):
            GroupElement11([[1, 2], [2, 4]], np.zeros((2, 2, 1), dtype=int), [[1]])

    def test_total_jacobian_ok(self):
        g = GroupElement11.random(self.rng, 2, 1)
        jacobian, inverse = g.total_jacobian([Fraction(3, 2)])
        product = np.dot(jacobian, inverse)
        self.assertTrue(all(product[i, j] == int(i == j) for i, j in np.ndindex(3, 3)))

    def test_action_matches_total_slots_ok(self):
        g = GroupElement11.random(self.rng, 2, 2)
        y = [Fraction(1, 2), Fraction(-2)]
        values = np.empty((4, 4, 4), dtype=object)
        for index in np.ndindex(4, 4, 4):
            values[index] = Fraction(self.rng.randint(-4, 4), self.rng.randint(1, 3))
        by_blocks = action_2_1_to_2_8(g, values, y)
        by_slots = transform_values(values, (TD, TU, TD), g, y)
        self.assertTrue(all(by_blocks[index] == by_slots[index] for index in np.ndindex(4, 4, 4)))

    def test_action_homothety_ok(self):
        m, n, c = 2, 2, Fraction(3)
        g = GroupElement11(
            [[c * int(i == j) for j in range(n)] for i in range(n)],
            [[[0] * m for _ in range(n)] for _ in range(n)],
            [[int(lam == mu) for mu in range(m)] for lam in range(m)],
        )
        values = np.empty((m + n,) * 3, dtype=object)
        for index in np.ndindex(*values.shape):
            values[index] = Fraction(self.rng.randint(-4, 4), self.rng.randint(1, 3))
        scaled = action_2_1_to_2_8(g, values, [Fraction(1, 2), Fraction(-2)])
        for first, up, second in np.ndindex(*values.shape):
            weight = int(up >= m) - int(first >= m) - int(second >= m)
            self.assertEqual(scaled[first, up, second], values[first, up, second] * c ** weight)
        # Φ_j^λ_k
        self.assertEqual(scaled[m, 0, m + 1], values[m, 0, m + 1] / c ** 2)

    def test_action_composition_ok(self):
        g, h = GroupElement11.random(self.rng, 2, 2), GroupElement11.random(self.rng, 2, 2)
        signature = (FU, BD, FD)
        values = np.empty((2, 2, 2), dtype=object)
        for index in np.ndindex(2, 2, 2):
            values[index] = Fraction(self.rng.randint(-4, 4), self.rng.randint(1, 3))
        at_once = transform_values(values, signature, g.compose(h))
        in_steps = transform_values(transform_values(values, signature, h), signature, g)
        self.assertTrue(all(at_once[index] == in_steps[index] for index in np.ndindex(2, 2, 2)))

    def test_action_J1E_ok(self):
        g = GroupElement11.identity(2, 1)
        ybar, ylambar = action_J1E(g, [2], [[1, 3]])
        self.assertEqual(list(ybar), [2])
        self.assertEqual(list(ylambar.flat), [1, 3])


class TestMorphismJet(unittest.TestCase):

    def setUp(self):
        self.rng = random.Random(29)

    def test_validation_err(self):
        x0, x1 = JetPoly.identity(2, 3)
        fiber = [[JetPoly.constant(2, 3, 1)]]
        with self.assertRaises(JetError):
            MorphismJet([0, 0], [x0 + 1, x1], fiber)
        with self.assertRaises(JetError):
            MorphismJet([0, 0], [x0, x0], fiber)
        with self.assertRaises(JetError):
            MorphismJet([0, 0], [x0, x1], [[JetPoly.zero(2, 3)]])
        with self.assertRaises(JetError):
            MorphismJet([0, 0], JetPoly.identity(2, 1), [[JetPoly.constant(2, 1, 1)]])

    def test_inverse_ok(self):
        phi = MorphismJet.random(self.rng, 2, 2, 3)
        identity = phi.inverse().compose(phi)
        self.assertEqual(identity.base_jet, JetPoly.identity(2, identity.order))
        for i, j in np.ndindex(2, 2):
            self.assertEqual(identity.fiber_jet[i, j], int(i == j))

    def test_group_element_homomorphism_ok(self):
        phi = MorphismJet.random(self.rng, 2, 2, 3)
        psi = MorphismJet.random(self.rng, 2, 2, 3, center=[0, 0])
        composed = psi.compose(phi)
        self.assertEqual(composed.group_element(), psi.group_element().compose(phi.group_element()))

    def test_compose_err(self):
        phi = MorphismJet.random(self.rng, 2, 2, 3, center=[1, 0])
        with self.assertRaises(JetError):
            phi.compose(MorphismJet.identity(2, 2, 3))

    def test_identity_transforms_ok(self):
        L, K = random_inputs(self.rng, 2, 2, 3)
        phi = MorphismJet.identity(2, 2, 4)
        self.assertEqual(transform_classical(L, phi), L)
        self.assertEqual(transform_linear(K, phi), K)

    def test_transform_tensor_ok(self):
        space = total_space(random_inputs(self.rng, 2, 1, 2)[0].space)
        field = TensorField.from_function(space, (TU,), 2, lambda index: Fraction(index[0] + 1))
        phi = MorphismJet.identity(2, 1, 3, center=[1, 1])
        values = transform_tensor(field, phi)
        self.assertEqual(list(values), [1, 2, 3])
        with self.assertRaises(JetError):
            transform_tensor(field, phi, [0, 0, 0])


class TestNaturality(unittest.TestCase):

    def test_naturality_ok(self):
        for constructor in NATURAL_OPERATORS:
            report = verify_naturality(constructor, 1, 41)
            self.assertEqual(report['failures'], [], constructor)
            self.assertEqual(report['passes'], 1)

    def test_mutated_err(self):
        report = verify_naturality('induce_D', 1, 41, mutate=True)
        self.assertEqual(report['passes'], 0)
        self.assertEqual(len(report['failures']), 1)

    def test_unknown_constructor_err(self):
        with self.assertRaises(SceneError):
            verify_naturality('induce_X', 1, 41)


class TestRanksAndWeights(unittest.TestCase):

    def test_family_rank_ok(self):
        self.assertEqual(family_rank([[1, 2], [2, 4], [0, 1]]), 2)
        with self.assertRaises(SceneError):
            family_rank([])

    def test_stabilized_rank_ok(self):
        def draw(rng):
            return [[Fraction(rng.randint(1, 9))], [Fraction(rng.randint(1, 9))]]

        rank, draws = stabilized_rank(draw, random.Random(1))
        self.assertEqual(rank, 2)
        self.assertGreaterEqual(draws, 3)

    def test_weights_ok(self):
        self.assertEqual(len(weight_solutions(2, 2, -1)), 2)
        self.assertEqual(len(weight_solutions(2, 2, -2)), 6)
        self.assertEqual(weight_solutions(2, 2, 0), [{}])
        self.assertIn({'c': 1}, weight_solutions(2, 2, -1))
        self.assertEqual(weight_solutions(2, 2, -1), [{'a0': 1}, {'c': 1}])
        self.assertEqual(
            weight_solutions(2, 2, -2),
            [{'a0': 2}, {'a0': 1, 'c': 1}, {'a1': 1}, {'b0': 1}, {'c': 2}, {'d0': 1}],
        )

    def test_weights_err(self):
        with self.assertRaises(SceneError):
            weight_solutions(2, 2, 1)
        with self.assertRaises(SceneError):
            weight_solutions(-1, 2, -1)


if __name__ == '__main__':
    unittest.main()
