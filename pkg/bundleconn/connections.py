"""
General linear connections K on E, classical connections Λ on M and the
calculus they induce on tensor fields over the base.

Sign conventions:
    ∇_ν s^i = ∂_ν s^i - K^i_{jν} s^j,      ∇_ν X^λ = ∂_ν X^λ - Λ^λ_{μν} X^μ,
and dual slots follow by the Leibniz rule. The covariant differential appends
the derivative slot last, so (∇_μ∇_ν s)^i is the component [i, ν, μ] of ∇∇s.
"""

import logging
from fractions import Fraction

import numpy as np

from bundleconn.jetcalc import JetPoly, random_poly, translate, truncate
from bundleconn.tensor import BD, BU, FD, FU, Space, SpaceKind, TensorField, apply
from common.errors import OrderExhaustedError, SceneError, SignatureError
from common.variables import DEFAULT_LOG_NAME

LOGGER = logging.getLogger(DEFAULT_LOG_NAME)


def _jet_array(shape, num_vars, order, function):
    coeffs = np.empty(shape, dtype=object)
    for index in np.ndindex(*shape):
        value = function(index)
        coeffs[index] = value if isinstance(value, JetPoly) else JetPoly.constant(num_vars, order, value)
    return coeffs


def _nested_records(coeffs):
    if coeffs.ndim == 1:
        return [entry.to_records() for entry in coeffs]
    return [_nested_records(coeffs[i]) for i in range(coeffs.shape[0])]


def _coeffs_from_records(records, shape, num_vars, order):
    try:
        array = np.empty(shape, dtype=object)
        for index in np.ndindex(*shape):
            entry = records
            for k in index:
                entry = entry[k]
            array[index] = JetPoly.from_records(num_vars, order, entry)
    except (IndexError, KeyError, TypeError):
        raise SceneError(f'coefficient table does not have shape {shape}')
    return array


class _Connection:
    """Shared storage of a table of coefficient jets over the base."""

    def __init__(self, space, coeffs, shape):
        if space.kind is not SpaceKind.M:
            raise SignatureError(f'connection coefficients live on the base, not on {space}')
        coeffs = np.asarray(coeffs, dtype=object)
        if coeffs.shape != shape:
            raise SceneError(f'coefficient table of shape {coeffs.shape}, expected {shape}')
        for entry in coeffs.flat:
            if not isinstance(entry, JetPoly) or entry.num_vars != space.m:
                raise SceneError(f'coefficient {entry!r} is not a jet in {space.m} base variables')
        order = min(entry.order for entry in coeffs.flat)
        self.space = space
        self.coeffs = apply(coeffs, lambda entry: truncate(entry, order))

    @property
    def m(self):
        return self.space.m

    @property
    def n(self):
        return self.space.n

    @property
    def order(self):
        return min(entry.order for entry in self.coeffs.flat)

    def _rebuilt(self, coeffs):
        raise NotImplementedError

    def recentered(self, point):
        """Coefficient jets re-expanded around the base point: u = x - point."""

        return self._rebuilt(apply(self.coeffs, lambda entry: translate(entry, point)))

    def truncated(self, order):
        return self._rebuilt(apply(self.coeffs, lambda entry: truncate(entry, order)))

    def is_zero(self):
        return all(entry.is_zero() for entry in self.coeffs.flat)

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return other.space == self.space and all(a == b for a, b in zip(self.coeffs.flat, other.coeffs.flat))

    __hash__ = None


class GeneralLinearConnection(_Connection):
    """
    Coefficients K[i, j, λ] = K^i_{jλ}: value i, argument j, form λ.
    """

    def __init__(self, space, coeffs):
        super().__init__(space, coeffs, (space.n, space.n, space.m))

    @classmethod
    def from_function(cls, space, order, function):
        return cls(space, _jet_array((space.n, space.n, space.m), space.m, order, function))

    @classmethod
    def zero(cls, space, order):
        return cls.from_function(space, order, lambda index: 0)

    @classmethod
    def random(cls, rng, space, order, degree):
        return cls.from_function(space, order, lambda index: random_poly(rng, space.m, order, degree))

    @classmethod
    def from_record(cls, space, record):
        try:
            order = int(record['order'])
            coeffs = record['coeffs']
        except (KeyError, TypeError, ValueError):
            raise SceneError('linear connection record needs "order" and "coeffs"')
        return cls(space, _coeffs_from_records(coeffs, (space.n, space.n, space.m), space.m, order))

    def to_record(self):
        return {
            'dims': {'m': self.m, 'n': self.n},
            'order': self.order,
            'coeffs': _nested_records(self.coeffs),
        }

    def _rebuilt(self, coeffs):
        return GeneralLinearConnection(self.space, coeffs)


class ClassicalConnection(_Connection):
    """
    Coefficients L[λ, μ, ν] = Λ^λ_{μν}: value λ, argument μ, form ν.
    A connection flagged symmetric must be exactly symmetric in (μ, ν).
    """

    def __init__(self, space, coeffs, symmetric=False):
        super().__init__(space, coeffs, (space.m, space.m, space.m))
        if symmetric and not self.is_symmetric():
            LOGGER.error('A classical connection flagged symmetric has torsion.')
            raise SceneError('connection flagged symmetric is not symmetric')
        self.symmetric = bool(symmetric)

    @classmethod
    def from_function(cls, space, order, function, symmetric=False):
        return cls(space, _jet_array((space.m,) * 3, space.m, order, function), symmetric)

    @classmethod
    def zero(cls, space, order):
        return cls.from_function(space, order, lambda index: 0, symmetric=True)

    @classmethod
    def random(cls, rng, space, order, degree, symmetric=False):
        coeffs = _jet_array((space.m,) * 3, space.m, order, lambda index: random_poly(rng, space.m, order, degree))
        if symmetric:
            for lam, mu, nu in np.ndindex(space.m, space.m, space.m):
                if nu < mu:
                    coeffs[lam, mu, nu] = coeffs[lam, nu, mu]
        return cls(space, coeffs, symmetric)

    @classmethod
    def from_record(cls, space, record):
        try:
            order = int(record['order'])
            coeffs = record['coeffs']
            symmetric = bool(record.get('symmetric', False))
        except (KeyError, TypeError, ValueError, AttributeError):
            raise SceneError('classical connection record needs "order" and "coeffs"')
        return cls(space, _coeffs_from_records(coeffs, (space.m,) * 3, space.m, order), symmetric)

    def to_record(self):
        return {
            'dims': {'m': self.m, 'n': self.n},
            'order': self.order,
            'coeffs': _nested_records(self.coeffs),
            'symmetric': self.symmetric,
        }

    def is_symmetric(self):
        return all(
            self.coeffs[lam, mu, nu] == self.coeffs[lam, nu, mu]
            for lam, mu, nu in np.ndindex(self.m, self.m, self.m)
        )

    def _rebuilt(self, coeffs):
        return ClassicalConnection(self.space, coeffs, self.symmetric)

    def __add__(self, tensor):
        """Λ + T for a (BaseDown, BaseUp, BaseDown) tensor T[μ, λ, ν] = T^λ_{μν}."""

        if tensor.signature != (BD, BU, BD):
            raise SignatureError(f'cannot add a {tensor.signature} tensor to a classical connection')
        return ClassicalConnection(
            self.space, np.transpose(tensor.components, (1, 0, 2)) + self.coeffs
        )


class TorsionSplit:
    """Result of splitting Λ into its symmetric part and its torsion."""

    def __init__(self, sym, torsion):
        self.sym = sym
        self.torsion = torsion

    def __iter__(self):
        return iter((self.sym, self.torsion))


def torsion_split(L):
    """
    Λ = Λ̃ + T with Λ̃ the symmetrization and T^λ_{μν} = ½(Λ^λ_{μν} - Λ^λ_{νμ}).
    The torsion is stored with slots (BaseDown μ, BaseUp λ, BaseDown ν).
    """

    half = Fraction(1, 2)
    sym = ClassicalConnection.from_function(
        L.space, L.order, lambda index: (L.coeffs[index] + L.coeffs[index[0], index[2], index[1]]) * half,
        symmetric=True,
    )
    torsion = TensorField.from_function(
        L.space, (BD, BU, BD), L.order,
        lambda index: (L.coeffs[index[1], index[0], index[2]] - L.coeffs[index[1], index[2], index[0]]) * half,
    )
    return TorsionSplit(sym, torsion)


def torsion_trace(torsion):
    """T̂_ν = T^ρ_{ρν}."""

    return TensorField.from_function(
        torsion.space, (BD,), torsion.order,
        lambda index: sum((torsion[rho, rho, index[0]] for rho in range(torsion.space.m)),
                          JetPoly.zero(torsion.space.num_vars, torsion.order)),
    )


def curvature_K(K):
    """
    R^i_{jμν} = ∂_ν K^i_{jμ} - ∂_μ K^i_{jν} + K^i_{pμ} K^p_{jν} - K^i_{pν} K^p_{jμ},
    slots (FiberDown j, FiberUp i, BaseDown μ, BaseDown ν), so that
    (∇_μ∇_ν - ∇_ν∇_μ) s^i = R^i_{jμν} s^j for a symmetric base connection.
    """

    if K.order < 1:
        raise OrderExhaustedError('curvature needs coefficient jets of order >= 1')
    k, n = K.coeffs, K.n

    def component(index):
        j, i, mu, nu = index
        value = k[i, j, mu].partial(nu) - k[i, j, nu].partial(mu)
        for p in range(n):
            value = value + k[i, p, mu] * k[p, j, nu] - k[i, p, nu] * k[p, j, mu]
        return value

    return TensorField.from_function(K.space, (FD, FU, BD, BD), K.order - 1, component)


def curvature_Lambda(L):
    """
    R^λ_{ρμν} = ∂_ν Λ^λ_{ρμ} - ∂_μ Λ^λ_{ρν} + Λ^λ_{σμ} Λ^σ_{ρν} - Λ^λ_{σν} Λ^σ_{ρμ},
    slots (BaseDown ρ, BaseUp λ, BaseDown μ, BaseDown ν).
    """

    if L.order < 1:
        raise OrderExhaustedError('curvature needs coefficient jets of order >= 1')
    c, m = L.coeffs, L.m

    def component(index):
        rho, lam, mu, nu = index
        value = c[lam, rho, mu].partial(nu) - c[lam, rho, nu].partial(mu)
        for sigma in range(m):
            value = value + c[lam, sigma, mu] * c[sigma, rho, nu] - c[lam, sigma, nu] * c[sigma, rho, mu]
        return value

    return TensorField.from_function(L.space, (BD, BU, BD, BD), L.order - 1, component)


class ProductConnection:
    """
    Coefficients of K^p_q ⊗ Λ^r_s, one block C[a, b, ν] per slot of a section,
    acting as ∇_ν Φ = ∂_ν Φ - Σ_slots C[a, b, ν] Φ[..b..] on the slot.
    """

    def __init__(self, signature, blocks):
        self.signature = tuple(signature)
        self.blocks = list(blocks)

    def block(self, slot):
        return self.blocks[slot]


def slot_block(slot, K, L):
    """Correction block of one slot: K or Λ on value slots, minus the transpose on dual slots."""

    if slot.family == 'total':
        raise SignatureError('total-space slots have no tensor-product connection over the base')
    coeffs = K.coeffs if slot.family == 'fiber' else L.coeffs
    if slot.variance == 'up':
        return coeffs
    return -np.transpose(coeffs, (1, 0, 2))


def tensor_product_connection(K, L, p, q, r, s):
    """Blocks for sections with slots FiberUp^p, FiberDown^q, BaseUp^r, BaseDown^s."""

    if min(p, q, r, s) < 0:
        raise SignatureError(f'negative tensor type ({p}, {q}, {r}, {s})')
    signature = (FU,) * p + (FD,) * q + (BU,) * r + (BD,) * s
    return ProductConnection(signature, [slot_block(slot, K, L) for slot in signature])


def _flat_defaults(space, order, K, L):
    if K is None:
        K = GeneralLinearConnection.zero(space, order)
    if L is None:
        L = ClassicalConnection.zero(space, order)
    return K, L


def covariant_differential(phi, K=None, L=None):
    """
    ∇^(Λ,K) Φ for a field Φ over M built from base and fiber slots.
    A missing connection is taken to be flat. The derivative slot is appended last.
    """

    if phi.space.kind is not SpaceKind.M:
        raise SignatureError(f'covariant differential needs a field over M, got {phi.space}')
    if phi.order < 1:
        raise OrderExhaustedError('covariant differential of a field of order 0')
    K, L = _flat_defaults(phi.space, phi.order, K, L)
    m = phi.space.m
    blocks = [slot_block(slot, K, L) for slot in phi.signature]
    shape = phi.shape + (m,)
    components = np.empty(shape, dtype=object)
    for nu in range(m):
        derivative = apply(phi.components, lambda entry: entry.partial(nu))
        for k, block in enumerate(blocks):
            correction = np.tensordot(block[:, :, nu], phi.components, axes=([1], [k]))
            derivative = derivative - np.moveaxis(correction, 0, k)
        components[(Ellipsis, nu)] = derivative
    return TensorField(phi.space, phi.signature + (BD,), components)


def iterated_covariant_differential(phi, K, L, k):
    """[Φ, ∇Φ, ..., ∇^k Φ]."""

    if phi.order < k:
        raise OrderExhaustedError(f'{k} covariant differentials need order >= {k}, got {phi.order}')
    result = [phi]
    for _ in range(k):
        result.append(covariant_differential(result[-1], K, L))
    return result


def curvature_jets(K, L, i):
    """
    Iterated covariant differentials of R[Λ] and R[K] up to order i,
    with respect to a symmetric classical connection.
    """

    if not L.is_symmetric():
        LOGGER.error('Curvature jets are defined for symmetric classical connections only.')
        raise SceneError('curvature jets need a symmetric classical connection')
    if min(K.order, L.order) < i + 1:
        raise OrderExhaustedError(f'curvature jets up to {i} need order >= {i + 1}')
    return (
        iterated_covariant_differential(curvature_Lambda(L), K, L, i),
        iterated_covariant_differential(curvature_K(K), K, L, i),
    )


def bianchi_defect(L):
    """
    Cyclic sum of ∇R[Λ] over its three form slots, taken with Λ itself.
    Slots (BaseDown ρ, BaseUp λ, BaseDown μ, BaseDown ν, BaseDown σ).
    """

    nabla = covariant_differential(curvature_Lambda(L), None, L).components
    cyclic = nabla + np.transpose(nabla, (0, 1, 3, 4, 2)) + np.transpose(nabla, (0, 1, 4, 2, 3))
    return TensorField(L.space, (BD, BU, BD, BD, BD), cyclic)


def ricci_residual_section(K, L, section):
    """(∇_μ∇_ν - ∇_ν∇_μ) s^i - R^i_{jμν} s^j for a section s (FiberUp field over M)."""

    second = covariant_differential(covariant_differential(section, K, L), K, L).components
    commutator = np.transpose(second, (0, 2, 1)) - second
    curvature = curvature_K(K).components
    applied = np.tensordot(section.components, curvature, axes=([0], [0]))
    return TensorField(section.space, (FU, BD, BD), commutator - applied)


def ricci_residual_vector(L, field):
    """(∇_μ∇_ν - ∇_ν∇_μ) X^λ - R^λ_{ρμν} X^ρ for a vector field X on a symmetric connection."""

    second = covariant_differential(covariant_differential(field, None, L), None, L).components
    commutator = np.transpose(second, (0, 2, 1)) - second
    curvature = curvature_Lambda(L).components
    applied = np.tensordot(field.components, curvature, axes=([0], [0]))
    return TensorField(field.space, (BU, BD, BD), commutator - applied)


def base_space(m, n):
    return Space(SpaceKind.M, m, n)
