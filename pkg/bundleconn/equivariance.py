"""
Fiber-linear bundle morphisms as jets at a point and the transformation laws
they induce on connections and natural tensor fields.

A morphism (x, y) -> (f(x), a(x) y) is stored by its jets in the coordinates
u = x - center, normalized so that the image point is the origin of the target
coordinates. Its 1-jet data (a^i_j, a^i_{jλ}, a^λ_μ) form a
:class:`GroupElement11`, which acts on the standard fibers of the bundles of
(1,2) tensors and of the jet bundle J1E.

Naturality of a construction is checked pointwise: compute it from (Λ, K) and
transform the value, then compute it from the transformed (Λ, K) at the image
point, and compare exactly.
"""

import logging
import random
from fractions import Fraction

import numpy as np

from bundleconn.connections import ClassicalConnection, GeneralLinearConnection, base_space
from bundleconn.jetcalc import (
    JetPoly, compose, derivative_at_origin, invert_jet, invert_matrix_jet, linear_part, random_poly,
    random_rational,
)
from bundleconn.natural import (
    ClassicalConnectionOnE, Params14, Params15, chi_tilde_map, induce_D, induce_D_tilde, induce_Gamma,
    induce_Gamma_tilde, phi14, phi14_basis, phi15, phi15_basis, random_point,
)
from bundleconn.tensor import SpaceKind, first_mismatch
from common.descriptor import Order
from common.errors import JetError, SceneError, SignatureError
from common.utils import format_rational, matrix_inverse, matrix_rank
from common.variables import (
    DEFAULT_LOG_NAME, FAILURES, MAX_MORPHISM_DEGREE, MAX_POLY_DEGREE, MAX_RANK_DRAWS, PASSES, RANK_DRAWS,
    SEED, SUITE, TRIALS,
)

LOGGER = logging.getLogger(DEFAULT_LOG_NAME)

# Order of the random coefficient jets of naturality trials and of rank draws.
NATURALITY_ORDER = 3
RANK_ORDER = 2


def _fractions(values, shape):
    array = np.empty(shape, dtype=object)
    source = np.asarray(values, dtype=object)
    if source.shape != shape:
        raise SceneError(f'array of shape {source.shape}, expected {shape}')
    for index in np.ndindex(*shape):
        array[index] = Fraction(source[index])
    return array


def _zeros(shape):
    return np.full(shape, Fraction(0), dtype=object)


def _invert(matrix, what):
    try:
        return np.array(matrix_inverse(matrix.tolist()), dtype=object)
    except ZeroDivisionError:
        LOGGER.error(f'The {what} part of a group element is singular: {matrix.tolist()}.')
        raise JetError(f'singular {what} matrix')


class GroupElement11:
    """
    Element (a^i_j, a^i_{jλ}, a^λ_μ) of the first-order jet group of
    fiber-linear morphisms, with exact inverses ã = a^-1 and b̃ = b^-1.
    """

    def __init__(self, a, a1, b):
        a = np.asarray(a, dtype=object)
        b = np.asarray(b, dtype=object)
        n, m = a.shape[0], b.shape[0]
        self.a = _fractions(a, (n, n))
        self.a1 = _fractions(a1, (n, n, m))
        self.b = _fractions(b, (m, m))
        self.a_inv = _invert(self.a, 'fiber')
        self.b_inv = _invert(self.b, 'base')

    @property
    def m(self):
        return self.b.shape[0]

    @property
    def n(self):
        return self.a.shape[0]

    @classmethod
    def identity(cls, m, n):
        a = [[int(i == j) for j in range(n)] for i in range(n)]
        b = [[int(lam == mu) for mu in range(m)] for lam in range(m)]
        return cls(a, _zeros((n, n, m)), b)

    @classmethod
    def random(cls, rng, m, n):
        while True:
            a = [[random_rational(rng) for _ in range(n)] for _ in range(n)]
            b = [[random_rational(rng) for _ in range(m)] for _ in range(m)]
            a1 = [[[random_rational(rng) for _ in range(m)] for _ in range(n)] for _ in range(n)]
            try:
                return cls(a, a1, b)
            except JetError:
                LOGGER.debug('Singular random group element, drawing again.')

    def a1_inv(self):
        """ã^s_{pμ} = -ã^s_r a^r_{qσ} ã^q_p b̃^σ_μ: the derivative part of the inverse."""

        # [r, q, σ] -> [s, q, σ] -> [s, σ, p] -> [s, p, μ]
        step = np.tensordot(self.a_inv, self.a1, axes=([1], [0]))
        step = np.tensordot(step, self.a_inv, axes=([1], [0]))
        step = np.tensordot(step, self.b_inv, axes=([1], [0]))
        return -step

    def inverse(self):
        return GroupElement11(self.a_inv, self.a1_inv(), self.b_inv)

    def compose(self, other):
        """self · other: acting by ``other`` first, then by ``self``."""

        if (self.m, self.n) != (other.m, other.n):
            raise SignatureError(f'cannot compose group elements of dimensions {(self.m, self.n)} and {(other.m, other.n)}')
        # h.a1[i, k, σ] g.b[σ, λ] g.a[k, j] + h.a[i, k] g.a1[k, j, λ]
        first = np.tensordot(self.a1, other.b, axes=([2], [0]))
        first = np.transpose(np.tensordot(first, other.a, axes=([1], [0])), (0, 2, 1))
        second = np.tensordot(self.a, other.a1, axes=([1], [0]))
        return GroupElement11(np.dot(self.a, other.a), first + second, np.dot(self.b, other.b))

    def total_jacobian(self, y):
        """
        The Jacobian of (x, y) -> (f(x), a(x) y) at a point with fiber coordinates y,
        and its inverse, as (m+n)×(m+n) matrices with rows indexed by the target.
        """

        m, n = self.m, self.n
        y = [Fraction(value) for value in y]
        if len(y) != n:
            raise SignatureError(f'fiber point of length {len(y)} for n={n}')
        mixed = np.tensordot(self.a1, np.array(y, dtype=object), axes=([1], [0]))
        jacobian = _zeros((m + n, m + n))
        jacobian[:m, :m] = self.b
        jacobian[m:, :m] = mixed
        jacobian[m:, m:] = self.a
        inverse = _zeros((m + n, m + n))
        inverse[:m, :m] = self.b_inv
        inverse[m:, :m] = -np.dot(np.dot(self.a_inv, mixed), self.b_inv)
        inverse[m:, m:] = self.a_inv
        return jacobian, inverse

    def __eq__(self, other):
        if not isinstance(other, GroupElement11):
            return NotImplemented
        return (
            self.a.shape == other.a.shape and self.b.shape == other.b.shape
            and all(np.array_equal(x, y) for x, y in ((self.a, other.a), (self.a1, other.a1), (self.b, other.b)))
        )

    __hash__ = None

    def __repr__(self):
        return f'GroupElement11(m={self.m}, n={self.n})'


class MorphismJet:
    """
    Jet at ``center`` of a local fiber-linear morphism (x, y) -> (f(x), a(x) y).
    ``base_jet`` holds the m components of f in u = x - center, without constant
    terms; ``fiber_jet`` is the n×n matrix of jets a^i_j(u).
    """

    order = Order()

    def __init__(self, center, base_jet, fiber_jet):
        base_jet = list(base_jet)
        fiber_jet = np.asarray(fiber_jet, dtype=object)
        m = len(base_jet)
        if m == 0 or fiber_jet.ndim != 2 or fiber_jet.shape[0] != fiber_jet.shape[1]:
            raise JetError(f'malformed morphism jet: {m} base components, fiber matrix of shape {fiber_jet.shape}')
        if len(center) != m:
            raise JetError(f'center of length {len(center)} for {m} base variables')
        for jet in list(base_jet) + list(fiber_jet.flat):
            if not isinstance(jet, JetPoly) or jet.num_vars != m:
                raise JetError(f'morphism component {jet!r} is not a jet in {m} variables')
        if any(jet.constant_term() for jet in base_jet):
            raise JetError('the base jet of a morphism must be centered')

        order = min(jet.order for jet in base_jet + list(fiber_jet.flat))
        if order < 2:
            LOGGER.error(f'A morphism jet of order {order} cannot transform connections.')
            raise JetError(f'morphism jets need order >= 2, got {order}')
        if _is_singular(linear_part(base_jet)):
            LOGGER.error('The base jet of a morphism has a singular linear part.')
            raise JetError('singular base linear part')
        if _is_singular([[jet.constant_term() for jet in row] for row in fiber_jet]):
            LOGGER.error('The fiber jet of a morphism has a singular constant part.')
            raise JetError('singular fiber constant part')

        self.center = [Fraction(value) for value in center]
        self.base_jet = base_jet
        self.fiber_jet = fiber_jet
        self.order = order

    @property
    def m(self):
        return len(self.base_jet)

    @property
    def n(self):
        return self.fiber_jet.shape[0]

    @classmethod
    def identity(cls, m, n, order, center=None):
        center = center if center is not None else [0] * m
        fiber = np.empty((n, n), dtype=object)
        for i, j in np.ndindex(n, n):
            fiber[i, j] = JetPoly.constant(m, order, int(i == j))
        return cls(center, JetPoly.identity(m, order), fiber)

    @classmethod
    def random(cls, rng, m, n, order, degree=MAX_MORPHISM_DEGREE, center=None):
        """Random morphism with polynomial components of degree <= ``degree``."""

        if center is None:
            center = [random_rational(rng) for _ in range(m)]
        while True:
            base = [random_poly(rng, m, order, degree, centered=True) for _ in range(m)]
            fiber = np.empty((n, n), dtype=object)
            for i, j in np.ndindex(n, n):
                fiber[i, j] = random_poly(rng, m, order, degree)
            try:
                return cls(center, base, fiber)
            except JetError:
                LOGGER.debug('Singular random morphism, drawing again.')

    def jacobian(self):
        """J[λ, α] = ∂_α f^λ as a matrix of jets."""

        jacobian = np.empty((self.m, self.m), dtype=object)
        for lam, alpha in np.ndindex(self.m, self.m):
            jacobian[lam, alpha] = self.base_jet[lam].partial(alpha)
        return jacobian

    def base_hessian(self):
        """H[λ, α, β] = ∂_α∂_β f^λ at the center."""

        hessian = _zeros((self.m,) * 3)
        for lam, alpha, beta in np.ndindex(self.m, self.m, self.m):
            hessian[lam, alpha, beta] = derivative_at_origin(self.base_jet[lam], (alpha, beta))
        return hessian

    def fiber_derivatives(self):
        """(∂_λ a^i_j, ∂_λ∂_μ a^i_j) at the center, shapes (n, n, m) and (n, n, m, m)."""

        m, n = self.m, self.n
        first, second = _zeros((n, n, m)), _zeros((n, n, m, m))
        for i, j, lam in np.ndindex(n, n, m):
            first[i, j, lam] = derivative_at_origin(self.fiber_jet[i, j], (lam,))
            for mu in range(m):
                second[i, j, lam, mu] = derivative_at_origin(self.fiber_jet[i, j], (lam, mu))
        return first, second

    def group_element(self):
        """The 1-jet data (a^i_j, a^i_{jλ}, a^λ_μ) at the center."""

        a = [[jet.constant_term() for jet in row] for row in self.fiber_jet]
        return GroupElement11(a, self.fiber_derivatives()[0], linear_part(self.base_jet))

    def inverse_base(self):
        return invert_jet(self.base_jet)

    def compose(self, other):
        """
        self ∘ other. The image point of ``other`` is the origin of its target
        coordinates, so ``self`` must be centered there.
        """

        if any(self.center):
            raise JetError('the outer morphism of a composition must be centered at the origin')
        if (self.m, self.n) != (other.m, other.n):
            raise JetError(f'cannot compose morphisms of dimensions {(self.m, self.n)} and {(other.m, other.n)}')
        base = [compose(jet, other.base_jet) for jet in self.base_jet]
        outer = np.empty((self.n, self.n), dtype=object)
        for i, j in np.ndindex(self.n, self.n):
            outer[i, j] = compose(self.fiber_jet[i, j], other.base_jet)
        return MorphismJet(other.center, base, np.dot(outer, other.fiber_jet))

    def inverse(self):
        """The inverse morphism, centered at the image point (the origin)."""

        base = self.inverse_base()
        gauge = invert_matrix_jet(self.fiber_jet)
        fiber = np.empty((self.n, self.n), dtype=object)
        for i, j in np.ndindex(self.n, self.n):
            fiber[i, j] = compose(gauge[i, j], base)
        return MorphismJet([0] * self.m, base, fiber)

    def __repr__(self):
        return f'MorphismJet(center={[str(c) for c in self.center]}, m={self.m}, n={self.n}, order={self.order})'


def _is_singular(rows):
    try:
        matrix_inverse(rows)
    except ZeroDivisionError:
        return True
    return False


# Transformation of connection coefficients

def _pushed(jets, inverse_base):
    result = np.empty(jets.shape, dtype=object)
    for index in np.ndindex(*jets.shape):
        result[index] = compose(jets[index], inverse_base)
    return result


def transform_classical(L, phi):
    """
    Λ' = J Λ J̃ J̃ + ∂∂f J̃ J̃ in the target coordinates of φ:
        Λ'^λ_{μν} = ∂_α f^λ Λ^α_{γβ} J̃^γ_μ J̃^β_ν + ∂_α∂_β f^λ J̃^α_μ J̃^β_ν,
    the right-hand side composed with f^-1.
    """

    if L.m != phi.m:
        raise SignatureError(f'morphism on a base of dimension {phi.m} applied to a connection with m={L.m}')
    coeffs = L.recentered(phi.center).coeffs
    jacobian = phi.jacobian()
    inverse = invert_matrix_jet(jacobian)
    hessian = np.empty((phi.m,) * 3, dtype=object)
    for lam, alpha, beta in np.ndindex(phi.m, phi.m, phi.m):
        hessian[lam, alpha, beta] = jacobian[lam, alpha].partial(beta)

    # [α, γ, β] -> [α, β, μ] -> [α, μ, ν] -> [λ, μ, ν]
    homogeneous = np.tensordot(coeffs, inverse, axes=([1], [0]))
    homogeneous = np.tensordot(homogeneous, inverse, axes=([1], [0]))
    homogeneous = np.tensordot(jacobian, homogeneous, axes=([1], [0]))
    # [λ, α, β] -> [λ, β, μ] -> [λ, μ, ν]
    inhomogeneous = np.tensordot(hessian, inverse, axes=([1], [0]))
    inhomogeneous = np.tensordot(inhomogeneous, inverse, axes=([1], [0]))

    result = _pushed(homogeneous + inhomogeneous, phi.inverse_base())
    return ClassicalConnection(L.space, result, symmetric=L.symmetric)


def transform_linear(K, phi):
    """
    K'^i_{kν} = (a^i_j K^j_{lβ} ã^l_k + ∂_β a^i_j ã^j_k) J̃^β_ν composed with f^-1,
    so that ∇'(a s) = a ∇s pulled back along f.
    """

    if (K.m, K.n) != (phi.m, phi.n):
        raise SignatureError(f'morphism of dimensions {(phi.m, phi.n)} applied to a connection of {(K.m, K.n)}')
    coeffs = K.recentered(phi.center).coeffs
    gauge = phi.fiber_jet
    gauge_inverse = invert_matrix_jet(gauge)
    base_inverse = invert_matrix_jet(phi.jacobian())
    derivative = np.empty((phi.n, phi.n, phi.m), dtype=object)
    for i, j, beta in np.ndindex(phi.n, phi.n, phi.m):
        derivative[i, j, beta] = gauge[i, j].partial(beta)

    # [j, l, β] -> [j, β, k] -> [i, β, k]
    conjugated = np.tensordot(gauge, np.tensordot(coeffs, gauge_inverse, axes=([1], [0])), axes=([1], [0]))
    inhomogeneous = np.tensordot(derivative, gauge_inverse, axes=([1], [0]))
    # [i, β, k] -> [i, k, ν]
    result = np.tensordot(conjugated + inhomogeneous, base_inverse, axes=([1], [0]))
    return GeneralLinearConnection(K.space, _pushed(result, phi.inverse_base()))


# Pointwise transformation of values

def _slot_matrix(slot, g, y):
    if slot.family == 'base':
        forward, backward = g.b, g.b_inv
    elif slot.family == 'fiber':
        forward, backward = g.a, g.a_inv
    else:
        if y is None:
            raise SignatureError('total-space slots need the fiber coordinates of the point')
        forward, backward = g.total_jacobian(y)
    return forward if slot.variance == 'up' else np.transpose(backward)


def transform_values(values, signature, g, y=None):
    """
    Values of a tensor at a point carried to the image point by the group element g:
    Up slots are hit by the Jacobian (b, a or the total Jacobian at fiber point y),
    Down slots by the transposed inverse.
    """

    values = np.asarray(values, dtype=object)
    if values.ndim != len(signature):
        raise SignatureError(f'{values.ndim}-slot values with a signature of {len(signature)} slots')
    for k, slot in enumerate(signature):
        matrix = _slot_matrix(slot, g, y)
        values = np.moveaxis(np.tensordot(matrix, values, axes=([1], [k])), 0, k)
    return values


def transform_tensor(t, phi, point=None):
    """
    Values at the image point of the field t pushed forward by φ.
    ``point`` lies over the center of φ; by default the fiber coordinates are zero.
    """

    m = t.space.m
    if point is None:
        point = list(phi.center) + [Fraction(0)] * (t.space.num_vars - m)
    point = [Fraction(value) for value in point]
    if point[:m] != phi.center:
        raise JetError(f'point {point[:m]} does not lie over the center {phi.center}')
    y = point[m:m + t.space.n] if t.space.kind is not SpaceKind.M else None
    return transform_values(t.evaluate(point), t.signature, phi.group_element(), y)


def total_hessian(phi, y):
    """
    Second derivatives H[A, B, C] = ∂_B∂_C of the target coordinate A of
    (x, y) -> (f(x), a(x) y) at the point over the center with fiber coordinates y.
    """

    m, n = phi.m, phi.n
    y = [Fraction(value) for value in y]
    first, second = phi.fiber_derivatives()
    hessian = _zeros((m + n,) * 3)
    hessian[:m, :m, :m] = phi.base_hessian()
    for i, alpha, beta in np.ndindex(n, m, m):
        hessian[m + i, alpha, beta] = sum((second[i, p, alpha, beta] * y[p] for p in range(n)), Fraction(0))
    for i, alpha, k in np.ndindex(n, m, n):
        hessian[m + i, alpha, m + k] = first[i, k, alpha]
        hessian[m + i, m + k, alpha] = first[i, k, alpha]
    return hessian


def transform_connection_on_E(values, phi, y):
    """
    D'[B', A', C'] = 𝒥 D 𝒥̃ 𝒥̃ + ∂∂Φ^{A'}_{BC} 𝒥̃^B_{B'} 𝒥̃^C_{C'} for the values D[B, A, C]
    of a classical connection on E at the point (center, y).
    """

    g = phi.group_element()
    _, inverse = g.total_jacobian(y)
    homogeneous = transform_values(values, ClassicalConnectionOnE.SIGNATURE, g, y)
    # [A', B, C] -> [A', C, B'] -> [A', B', C']
    inhomogeneous = np.tensordot(total_hessian(phi, y), inverse, axes=([1], [0]))
    inhomogeneous = np.tensordot(inhomogeneous, inverse, axes=([1], [0]))
    return homogeneous + np.transpose(inhomogeneous, (1, 0, 2))


def transform_gamma(values, phi, y, ylam):
    """
    Γ'_{A'}^i_λ = 𝒥̃^A_{A'} (∂_A ȳ^i_λ + a^i_j Γ_A^j_μ b̃^μ_λ) for the values Γ[A, j, μ]
    of a connection on J1E -> E at the point (center, y, y_λ), where
    ȳ^i_λ = (∂_ρ a^i_p y^p + a^i_p y^p_ρ) J̃^ρ_λ is the prolonged fiber coordinate.
    """

    m, n = phi.m, phi.n
    y = [Fraction(value) for value in y]
    ylam = np.asarray([[Fraction(value) for value in row] for row in ylam], dtype=object)
    g = phi.group_element()
    _, inverse = g.total_jacobian(y)
    first, second = phi.fiber_derivatives()
    hessian = phi.base_hessian()
    b_inv = g.b_inv

    # ∂_σ J̃^ρ_λ = -J̃^ρ_α ∂_β∂_σ f^α J̃^β_λ, stored as [σ, ρ, λ]
    d_inverse = _zeros((m, m, m))
    for sigma, rho, lam in np.ndindex(m, m, m):
        d_inverse[sigma, rho, lam] = -sum(
            (b_inv[rho, alpha] * hessian[alpha, beta, sigma] * b_inv[beta, lam]
             for alpha in range(m) for beta in range(m)),
            Fraction(0),
        )
    # (∂_ρ a^i_p y^p + a^i_p y^p_ρ), stored as [i, ρ]
    prolonged = np.tensordot(first, np.array(y, dtype=object), axes=([1], [0])) + np.dot(g.a, ylam)

    derivative = _zeros((m + n, n, m))
    for sigma, i, lam in np.ndindex(m, n, m):
        value = Fraction(0)
        for rho in range(m):
            inner = sum((second[i, p, sigma, rho] * y[p] + first[i, p, sigma] * ylam[p, rho] for p in range(n)),
                        Fraction(0))
            value += inner * b_inv[rho, lam] + prolonged[i, rho] * d_inverse[sigma, rho, lam]
        derivative[sigma, i, lam] = value
    for k, i, lam in np.ndindex(n, n, m):
        derivative[m + k, i, lam] = sum((first[i, k, rho] * b_inv[rho, lam] for rho in range(m)), Fraction(0))

    # [A, j, μ] -> [A, μ, i] -> [A, i, λ]
    rotated = np.tensordot(np.asarray(values, dtype=object), g.a, axes=([1], [1]))
    rotated = np.tensordot(rotated, b_inv, axes=([1], [0]))
    return np.tensordot(inverse, derivative + rotated, axes=([0], [0]))


# The group action on standard fibers

def _block_term(phi_values, up, up_source, first, first_source, second, second_source):
    """
    Σ up[ī, r] Φ[s, r, t] first[s, j̄] second[t, k̄] over the source index ranges,
    returned with the layout [j̄, ī, k̄].
    """

    block = phi_values[np.ix_(first_source, up_source, second_source)]
    # [s, r, t] -> [j̄, r, t] -> [j̄, t, ī] -> [j̄, ī, k̄]
    step = np.tensordot(first, block, axes=([0], [0]))
    step = np.tensordot(step, up, axes=([1], [1]))
    return np.tensordot(step, second, axes=([1], [0]))


def action_2_1_to_2_8(g, phi_values, y):
    """
    Action of g on a value Φ_B^A_C of a (1,2) tensor on E at a point with fiber
    coordinates y, block by block. Index letters i, j, k are fiber indices and
    λ, μ, ν base indices; Y^i_ρ = a^i_{pρ} y^p and X^t_ν = ã^t_{pν} a^p_k y^k.
    """

    m, n = g.m, g.n
    phi_values = np.asarray(phi_values, dtype=object)
    if phi_values.shape != (m + n,) * 3:
        raise SignatureError(f'(1,2) value of shape {phi_values.shape}, expected {(m + n,) * 3}')
    y = np.array([Fraction(value) for value in y], dtype=object)
    base, fiber = list(range(m)), list(range(m, m + n))

    a, a_inv, b, b_inv = g.a, g.a_inv, g.b, g.b_inv
    Y = np.tensordot(g.a1, y, axes=([1], [0]))
    X = np.tensordot(g.a1_inv(), np.dot(a, y), axes=([1], [0]))

    def term(up, up_source, first, first_source, second, second_source):
        return _block_term(phi_values, up, up_source, first, first_source, second, second_source)

    result = _zeros((m + n,) * 3)
    # Φ_j^i_k
    result[np.ix_(fiber, fiber, fiber)] = (
        term(a, fiber, a_inv, fiber, a_inv, fiber)
        + term(Y, base, a_inv, fiber, a_inv, fiber)
    )
    # Φ_j^i_ν
    result[np.ix_(fiber, fiber, base)] = (
        term(a, fiber, a_inv, fiber, b_inv, base)
        + term(a, fiber, a_inv, fiber, X, fiber)
        + term(Y, base, a_inv, fiber, X, fiber)
        + term(Y, base, a_inv, fiber, b_inv, base)
    )
    # Φ_μ^i_k
    result[np.ix_(base, fiber, fiber)] = (
        term(a, fiber, b_inv, base, a_inv, fiber)
        + term(a, fiber, X, fiber, a_inv, fiber)
        + term(Y, base, X, fiber, a_inv, fiber)
        + term(Y, base, b_inv, base, a_inv, fiber)
    )
    # Φ_μ^i_ν
    result[np.ix_(base, fiber, base)] = (
        term(a, fiber, b_inv, base, b_inv, base)
        + term(a, fiber, X, fiber, b_inv, base)
        + term(a, fiber, b_inv, base, X, fiber)
        + term(a, fiber, X, fiber, X, fiber)
        + term(Y, base, X, fiber, X, fiber)
        + term(Y, base, b_inv, base, X, fiber)
        + term(Y, base, X, fiber, b_inv, base)
        + term(Y, base, b_inv, base, b_inv, base)
    )
    # Φ_j^λ_k
    result[np.ix_(fiber, base, fiber)] = term(b, base, a_inv, fiber, a_inv, fiber)
    # Φ_j^λ_ν
    result[np.ix_(fiber, base, base)] = (
        term(b, base, a_inv, fiber, b_inv, base)
        + term(b, base, a_inv, fiber, X, fiber)
    )
    # Φ_μ^λ_k
    result[np.ix_(base, base, fiber)] = (
        term(b, base, b_inv, base, a_inv, fiber)
        + term(b, base, X, fiber, a_inv, fiber)
    )
    # Φ_μ^λ_ν
    result[np.ix_(base, base, base)] = (
        term(b, base, b_inv, base, b_inv, base)
        + term(b, base, X, fiber, b_inv, base)
        + term(b, base, b_inv, base, X, fiber)
        + term(b, base, X, fiber, X, fiber)
    )
    return result


def action_J1E(g, y, ylam):
    """ȳ^i = a^i_p y^p, ȳ^i_λ = (a^i_p y^p_ρ + a^i_{pρ} y^p) ã^ρ_λ."""

    y = np.array([Fraction(value) for value in y], dtype=object)
    ylam = np.asarray([[Fraction(value) for value in row] for row in ylam], dtype=object)
    if y.shape != (g.n,) or ylam.shape != (g.n, g.m):
        raise SignatureError(f'jet point of shapes {y.shape}, {ylam.shape} for m={g.m}, n={g.n}')
    prolonged = np.dot(g.a, ylam) + np.tensordot(g.a1, y, axes=([1], [0]))
    return np.dot(g.a, y), np.dot(prolonged, g.b_inv)


# Naturality

NATURAL_OPERATORS = {
    'induce_D': (lambda L, K, p15, p14: induce_D(L, K).table, 'connection_on_E', SpaceKind.E),
    'phi15': (lambda L, K, p15, p14: phi15(L, K, p15), 'tensor', SpaceKind.E),
    'induce_D_tilde': (lambda L, K, p15, p14: induce_D_tilde(L, K, p15).table, 'connection_on_E', SpaceKind.E),
    'induce_Gamma': (lambda L, K, p15, p14: induce_Gamma(L, K).table, 'connection_on_J1E', SpaceKind.J1E),
    'phi14': (lambda L, K, p15, p14: phi14(L, K, p14), 'tensor', SpaceKind.J1E),
    'induce_Gamma_tilde': (
        lambda L, K, p15, p14: induce_Gamma_tilde(L, K, p14).table, 'connection_on_J1E', SpaceKind.J1E,
    ),
}


def _split_point(space, point):
    m, n = space.m, space.n
    y = point[m:m + n]
    if space.kind is not SpaceKind.J1E:
        return y, None
    return y, [[point[space.jet_var(i, lam)] for lam in range(m)] for i in range(n)]


def _mutated(values, space):
    values = values.copy()
    # a fiber value slot when the table has a total one
    index = (0, space.m, 0) if values.shape[1] == space.m + space.n else (0, 0, 0)
    values[index] = values[index] + 1
    return values


def naturality_defect(constructor, L, K, p15, p14, phi, point, mutate=False):
    """
    Compares compute-then-transform with transform-then-compute for one morphism.
    ``point`` holds coordinates over the center of φ with the base part dropped to zero,
    i.e. (0, y) on E or (0, y, y_λ) on J1E.
    :return: None or (index, lhs, rhs) at the first differing component.
    """

    try:
        build, kind, _ = NATURAL_OPERATORS[constructor]
    except KeyError:
        raise SceneError(f'unknown natural operator {constructor!r}')

    field = build(L.recentered(phi.center), K.recentered(phi.center), p15, p14)
    space = field.space
    values = field.evaluate(point)
    if mutate:
        values = _mutated(values, space)
    y, ylam = _split_point(space, point)
    g = phi.group_element()
    if kind == 'connection_on_E':
        expected = transform_connection_on_E(values, phi, y)
    elif kind == 'connection_on_J1E':
        expected = transform_gamma(values, phi, y, ylam)
    else:
        expected = transform_values(values, field.signature, g, y)

    image = build(transform_classical(L, phi), transform_linear(K, phi), p15, p14)
    if ylam is None:
        image_point = [Fraction(0)] * space.m + list(np.dot(g.a, np.array(y, dtype=object)))
    else:
        ybar, ylambar = action_J1E(g, y, ylam)
        image_point = [Fraction(0)] * space.m + list(ybar) + list(ylambar.flat)
    actual = image.evaluate(image_point)
    if mutate:
        actual = _mutated(actual, space)
    return first_mismatch(expected, actual)


def random_inputs(rng, m, n, order, degree=MAX_POLY_DEGREE, symmetric=False):
    """A random classical connection and general linear connection with polynomial coefficients."""

    space = base_space(m, n)
    L = ClassicalConnection.random(rng, space, order, degree, symmetric=symmetric)
    K = GeneralLinearConnection.random(rng, space, order, degree)
    return L, K


def random_params(rng, cls):
    return cls.from_vector([random_rational(rng) for _ in cls.FIELDS])


def trial_rng(seed, trial):
    return random.Random(f'{seed}/{trial}')


def verify_naturality(constructor, trials, seed, mutate=False, m=2, n=2, order=NATURALITY_ORDER):
    """
    Runs ``trials`` independent naturality trials of a named constructor.
    :return: report {suite, constructor, seed, trials, passes, failures}.
    """

    if constructor not in NATURAL_OPERATORS:
        raise SceneError(f'unknown natural operator {constructor!r}')
    LOGGER.info(f'Naturality of {constructor}: {trials} trials, seed {seed}, m={m}, n={n}.')
    passes, failures = 0, []
    for trial in range(trials):
        rng = trial_rng(seed, trial)
        L, K = random_inputs(rng, m, n, order)
        p15, p14 = random_params(rng, Params15), random_params(rng, Params14)
        phi = MorphismJet.random(rng, m, n, order + 1)
        point = random_point(rng, base_space(m, n).over(NATURAL_OPERATORS[constructor][2]))
        mismatch = naturality_defect(constructor, L, K, p15, p14, phi, point, mutate)
        if mismatch is None:
            passes += 1
            LOGGER.debug(f'Naturality trial {trial} of {constructor} passed.')
            continue
        index, lhs, rhs = mismatch
        LOGGER.debug(f'Naturality trial {trial} of {constructor} failed at {index}.')
        failures.append({
            'trial': trial,
            'component_index': [int(k) for k in index],
            'lhs': format_rational(lhs),
            'rhs': format_rational(rhs),
        })
    return {
        SUITE: 'naturality',
        'constructor': constructor,
        SEED: seed,
        TRIALS: trials,
        PASSES: passes,
        FAILURES: failures,
    }


# Ranks of the natural families

def family_rank(evaluations):
    """
    Exact rank of the stacked evaluations, one row of flattened values per basis element.
    :raises SceneError: for an empty basis.
    """

    rows = [list(row) for row in evaluations]
    if not rows:
        raise SceneError('family rank of an empty basis')
    return matrix_rank(rows)


def stabilized_rank(draw, rng, draws=RANK_DRAWS, max_draws=MAX_RANK_DRAWS):
    """
    Rank of the rows accumulated over independent draws; after ``draws`` draws
    more are added while the last draw still raised the rank.
    :param draw: rng -> list of per-basis-element value lists.
    :return: (rank, number of draws used).
    """

    rows, ranks = None, []
    for count in range(1, max_draws + 1):
        sample = draw(rng)
        rows = sample if rows is None else [row + extra for row, extra in zip(rows, sample)]
        ranks.append(family_rank(rows))
        if count >= max(draws, 2):
            if ranks[-1] == ranks[-2]:
                return ranks[-1], count
            LOGGER.warning(f'Rank rose from {ranks[-2]} to {ranks[-1]} at draw {count}, drawing again.')
    return ranks[-1], max_draws


def basis_draw(basis, m, n, symmetric=False, order=RANK_ORDER):
    """A draw function evaluating ``basis(L, K)`` on random inputs at a random point over the origin."""

    def draw(rng):
        L, K = random_inputs(rng, m, n, order, symmetric=symmetric)
        fields = basis(L, K)
        point = random_point(rng, fields[0].space)
        return [list(field.evaluate(point).flat) for field in fields]

    return draw


def chi_tilde_phi15_basis(L, K):
    return [chi_tilde_map(field) for field in phi15_basis(L, K)]


RANK_BASES = {
    'phi15': phi15_basis,
    'phi14': phi14_basis,
    'chi_phi15': chi_tilde_phi15_basis,
}


def basis_rank(name, rng, m, n, symmetric=False):
    """(rank, draws) of a named family basis on random inputs."""

    try:
        basis = RANK_BASES[name]
    except KeyError:
        raise SceneError(f'unknown family basis {name!r}')
    return stabilized_rank(basis_draw(basis, m, n, symmetric), rng)


# The homogeneity equation

def weight_variables(s, r):
    """Unknowns of the homogeneity equation with their weights, in a fixed order."""

    return (
        [(f'a{i}', i + 1) for i in range(s + 1)]
        + [(f'b{j}', j + 2) for j in range(s)]
        + [('c', 1)]
        + [(f'd{k}', k + 2) for k in range(r)]
    )


def weight_solutions(s, r, rhs):
    """
    All non-negative integer solutions of
        rhs = -Σ(i+1) a_i - Σ(j+2) b_j - c - Σ(k+2) d_k,
    each as a mapping of its nonzero unknowns.
    """

    for name, value in (('s', s), ('r', r)):
        if isinstance(value, bool) or not isinstance(value, int) or value < 0:
            raise SceneError(f'{name} must be a non-negative integer, got {value!r}')
    if isinstance(rhs, bool) or not isinstance(rhs, int) or rhs > 0:
        raise SceneError(f'rhs must be a non-positive integer, got {rhs!r}')

    variables = weight_variables(s, r)
    solutions = []

    def search(position, remaining, chosen):
        if remaining == 0:
            solutions.append(dict(chosen))
            return
        if position == len(variables):
            return
        name, weight = variables[position]
        for exponent in range(remaining // weight, -1, -1):
            if exponent:
                chosen.append((name, exponent))
            search(position + 1, remaining - exponent * weight, chosen)
            if exponent:
                chosen.pop()

    search(0, -rhs, [])
    return solutions
