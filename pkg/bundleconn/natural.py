"""
Natural objects induced by a general linear connection K and a classical
connection Λ: the classical connection D(Λ,K) on the total space E, its
15-parameter deformation family, the connection Γ(Λ,K) on J1E and its
14-parameter family, together with the geometric building blocks.

Storage:
    ClassicalConnectionOnE  D[B, A, C] = D_B^A_C  (argument B, value A, form C)
    ConnectionOnJ1E         G[A, i, λ] = Γ_A^i_λ
Both tables are kept as TensorFields with signatures (TD, TU, TD) and (TD, FU, BD).
"""

import logging
from fractions import Fraction

import numpy as np

from bundleconn.connections import (
    covariant_differential, curvature_K, curvature_Lambda, torsion_split, torsion_trace,
)
from bundleconn.jetcalc import JetPoly, degree_in, embed, random_rational, second_difference
from bundleconn.tensor import (
    BD, BU, FU, TD, TU, SpaceKind, TensorField, contract, lift, permute, tensor_product, to_total,
)
from common.errors import OrderExhaustedError, SceneError, SignatureError
from common.utils import format_rational, parse_rational, solve_exact
from common.variables import DEFAULT_LOG_NAME, FIBER_DEGREE_SLACK

LOGGER = logging.getLogger(DEFAULT_LOG_NAME)


# Spaces and coordinates

def total_space(space):
    return space.over(SpaceKind.E)


def jet_space(space):
    return space.over(SpaceKind.J1E)


def lifted_order(order):
    return order + FIBER_DEGREE_SLACK


def lift_jet(p, space):
    """A base (or total-space) jet regarded as a function on a larger space."""

    return embed(p, space.num_vars, lifted_order(p.order))


def fiber_coordinate(space, i, order):
    return JetPoly.variable(space.num_vars, order, space.m + i)


def jet_coordinate(space, i, lam, order):
    return JetPoly.variable(space.num_vars, order, space.jet_var(i, lam))


def _k_times_y(K, space):
    """KY[i][λ] = K^i_{jλ} y^j as jets on E or J1E."""

    order = lifted_order(K.order)
    y = [fiber_coordinate(space, j, order) for j in range(K.n)]
    zero = JetPoly.zero(space.num_vars, order)
    return [
        [sum((lift_jet(K.coeffs[i, j, lam], space) * y[j] for j in range(K.n)), zero) for lam in range(K.m)]
        for i in range(K.n)
    ]


def random_point(rng, space):
    """A point over the origin of the base with random fiber and jet coordinates."""

    return [Fraction(0)] * space.m + [random_rational(rng) for _ in range(space.num_vars - space.m)]


# Coefficient tables

class ClassicalConnectionOnE:
    """A classical connection on E stored as D[B, A, C] = D_B^A_C."""

    SIGNATURE = (TD, TU, TD)

    def __init__(self, table):
        if table.space.kind is not SpaceKind.E or table.signature != self.SIGNATURE:
            raise SignatureError(f'not a coefficient table of a classical connection on E: {table}')
        self.table = table

    @property
    def space(self):
        return self.table.space

    @property
    def coeffs(self):
        return self.table.components

    @property
    def order(self):
        return self.table.order

    def __add__(self, phi):
        """D + Φ for a (TD, TU, TD) tensor field Φ on E."""

        return ClassicalConnectionOnE(self.table + phi)

    def __sub__(self, other):
        if isinstance(other, ClassicalConnectionOnE):
            return self.table - other.table
        return ClassicalConnectionOnE(self.table - other)

    def __eq__(self, other):
        if not isinstance(other, ClassicalConnectionOnE):
            return NotImplemented
        return self.table == other.table

    __hash__ = None

    def evaluate(self, point):
        return self.table.evaluate(point)

    def is_zero(self):
        return self.table.is_zero()

    def to_record(self):
        return self.table.to_record()


class ConnectionOnJ1E:
    """A connection on J1E → E stored by its coefficients G[A, i, λ] = Γ_A^i_λ."""

    SIGNATURE = (TD, FU, BD)

    def __init__(self, table):
        if table.space.kind is not SpaceKind.J1E or table.signature != self.SIGNATURE:
            raise SignatureError(f'not a coefficient table of a connection on J1E: {table}')
        self.table = table

    @property
    def space(self):
        return self.table.space

    @property
    def coeffs(self):
        return self.table.components

    @property
    def order(self):
        return self.table.order

    def __add__(self, phi):
        return ConnectionOnJ1E(self.table + phi)

    def __sub__(self, other):
        if isinstance(other, ConnectionOnJ1E):
            return self.table - other.table
        return ConnectionOnJ1E(self.table - other)

    def __eq__(self, other):
        if not isinstance(other, ConnectionOnJ1E):
            return NotImplemented
        return self.table == other.table

    __hash__ = None

    def evaluate(self, point):
        return self.table.evaluate(point)

    def is_zero(self):
        return self.table.is_zero()

    def to_record(self):
        return self.table.to_record()


# Parameters

class _Params:
    FIELDS = ()

    def __init__(self, **values):
        unknown = set(values) - set(self.FIELDS)
        if unknown:
            raise SceneError(f'unknown parameters {sorted(unknown)} for {type(self).__name__}')
        self.values = {name: parse_rational(values.get(name, 0)) for name in self.FIELDS}

    def __getattr__(self, name):
        values = self.__dict__.get('values', {})
        if name in values:
            return values[name]
        raise AttributeError(name)

    @classmethod
    def from_vector(cls, vector):
        if len(vector) != len(cls.FIELDS):
            raise SceneError(f'{cls.__name__} needs {len(cls.FIELDS)} values, got {len(vector)}')
        return cls(**dict(zip(cls.FIELDS, (Fraction(v) for v in vector))))

    @classmethod
    def basis(cls, k):
        return cls.from_vector([int(j == k) for j in range(len(cls.FIELDS))])

    @classmethod
    def from_record(cls, record):
        if not isinstance(record, dict):
            raise SceneError(f'{cls.__name__} must be a mapping of named rationals')
        return cls(**record)

    def vector(self):
        return [self.values[name] for name in self.FIELDS]

    def to_record(self):
        return {name: format_rational(value) for name, value in self.values.items()}

    def __add__(self, other):
        return type(self).from_vector([a + b for a, b in zip(self.vector(), other.vector())])

    def __sub__(self, other):
        return type(self).from_vector([a - b for a, b in zip(self.vector(), other.vector())])

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self.values == other.values

    __hash__ = None

    def __repr__(self):
        nonzero = ', '.join(f'{k}={v}' for k, v in self.values.items() if v)
        return f'{type(self).__name__}({nonzero})'


G_FIELDS = ('b1', 'b2', 'b3', 'c1', 'c2', 'c3', 'd1', 'd2', 'e1')


class Params15(_Params):
    """Coefficients of the 15-parameter family of tensor fields added to D(Λ,K)."""

    FIELDS = ('a1', 'a2', 'a3') + G_FIELDS + ('e2', 'h1', 'h2')


class Params14(_Params):
    """Coefficients of the 14-parameter family of tensor fields added to Γ(Λ,K)."""

    FIELDS = ('a1', 'a2', 'a3') + G_FIELDS + ('e2', 'h1')


# Solved once on generic torsionful inputs (m = 3, n = 2) and frozen;
# rows are Params14 fields, columns Params15 fields.
PARAMS15_TO_14 = [
    # a1 a2 a3 b1 b2 b3 c1 c2 c3 d1 d2 e1 e2 h1 h2
    [-1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, -1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, -1],
    [0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0],
]


def params15_to_14(p):
    """The parameters p' with Γ̃(Λ,K; p') = χ(D̃(Λ,K; p))."""

    vector = p.vector()
    return Params14.from_vector([sum(Fraction(c) * v for c, v in zip(row, vector)) for row in PARAMS15_TO_14])


# D(Λ,K)

def _require_order(order, needed, what):
    if order < needed:
        raise OrderExhaustedError(f'{what} needs coefficient jets of order >= {needed}, got {order}')


def induce_D(L, K):
    """
    The classical connection D(Λ,K) on E:
        D_μ^λ_ν = Λ^λ_{μν},
        D_μ^i_ν = (∂_ν K^i_{pμ} - K^i_{rν} K^r_{pμ} + K^i_{pρ} Λ^ρ_{μν}) y^p,
        D_μ^i_k = K^i_{kμ},   D_j^i_ν = K^i_{jν},
    all other blocks zero.
    """

    _require_order(min(L.order, K.order), 1, 'D(Λ,K)')
    m, n = K.m, K.n
    space = total_space(K.space)
    k, c = K.coeffs, L.coeffs
    zero_base = JetPoly.zero(m, K.order)

    # y-coefficients of the mixed block, computed on the base
    mixed = np.empty((m, n, m, n), dtype=object)
    for mu, i, nu, p in np.ndindex(m, n, m, n):
        value = k[i, p, mu].partial(nu)
        value = value - sum((k[i, r, nu] * k[r, p, mu] for r in range(n)), zero_base)
        value = value + sum((k[i, p, rho] * c[rho, mu, nu] for rho in range(m)), zero_base)
        mixed[mu, i, nu, p] = value

    order = lifted_order(min(L.order, K.order) - 1)
    y = [fiber_coordinate(space, p, order) for p in range(n)]
    zero = JetPoly.zero(space.num_vars, order)

    def component(index):
        b, a, cc = index
        if b < m and a < m and cc < m:
            return lift_jet(c[a, b, cc], space)
        if b < m and a >= m and cc < m:
            return sum((lift_jet(mixed[b, a - m, cc, p], space) * y[p] for p in range(n)), zero)
        if b < m and a >= m and cc >= m:
            return lift_jet(k[a - m, cc - m, b], space)
        if b >= m and a >= m and cc < m:
            return lift_jet(k[a - m, b - m, cc], space)
        return zero

    return ClassicalConnectionOnE(TensorField.from_function(space, ClassicalConnectionOnE.SIGNATURE, order, component))


# Lifts, projections and covariant derivatives on E

def horizontal_lift_map(K):
    """h^K as a (BD ρ, TU A) field on E: h(∂_ρ) = ∂_ρ + K^i_{jρ} y^j ∂_i."""

    space = total_space(K.space)
    ky = _k_times_y(K, space)
    m = K.m

    def component(index):
        rho, a = index
        if a < m:
            return int(a == rho)
        return ky[a - m][rho]

    return TensorField.from_function(space, (BD, TU), lifted_order(K.order), component)


def horizontal_lift(K, field):
    """h^K(X) for a BaseUp vector field X over M: components (X^λ, K^i_{jλ} y^j X^λ)."""

    if field.signature != (BU,) or field.space.kind is not SpaceKind.M:
        raise SignatureError(f'horizontal lift needs a vector field on M, got {field}')
    lifted = lift(field, total_space(field.space))
    return contract(tensor_product(lifted, horizontal_lift_map(K)), 0, 1)


def vertical_lift(section):
    """s^V for a FiberUp section s over M: components (0, s^i)."""

    if section.signature != (FU,) or section.space.kind is not SpaceKind.M:
        raise SignatureError(f'vertical lift needs a section of E over M, got {section}')
    return to_total(lift(section, total_space(section.space)), 0)


def vertical_projection(K):
    """ν_K = (d^i - K^i_{jλ} y^j d^λ) ⊗ ∂_i, a (TD, FU) field on E."""

    space = total_space(K.space)
    ky = _k_times_y(K, space)
    m = K.m

    def component(index):
        a, i = index
        if a < m:
            return -ky[i][a]
        return int(a - m == i)

    return TensorField.from_function(space, (TD, FU), lifted_order(K.order), component)


def covariant_derivative_on_E(D, W, Z):
    """(∇^D_W Z)^A = W^C (∂_C Z^A - D_B^A_C Z^B) for vector fields W, Z on E."""

    for field in (W, Z):
        if field.signature != (TU,) or field.space != D.space:
            raise SignatureError(f'covariant derivative on E needs total vector fields, got {field}')
    size = D.space.m + D.space.n
    zero = JetPoly.zero(D.space.num_vars, min(D.order, Z.order - 1, W.order))

    def component(index):
        a = index[0]
        value = zero
        for cc in range(size):
            inner = Z[a].partial(cc) - sum((D.coeffs[b, a, cc] * Z[b] for b in range(size)), zero)
            value = value + W[cc] * inner
        return value

    return TensorField.from_function(D.space, (TU,), zero.order, component)


def directional(nabla, field):
    """Σ_ν ∇Φ[..., ν] X^ν: the derivative along a vector field X."""

    return contract(tensor_product(nabla, field), nabla.rank, nabla.rank - 1)


def prop21_residuals(L, K, X, Y, s, sigma):
    """
    The four defining identities of D(Λ,K), each returned as a field that must vanish:
    ∇_{hX} hY - h(∇_X Y), ∇_{hX} s^V - (∇_X s)^V, ∇_{s^V} hX, ∇_{s^V} σ^V.
    """

    D = induce_D(L, K)
    hx, hy = horizontal_lift(K, X), horizontal_lift(K, Y)
    sv, sigmav = vertical_lift(s), vertical_lift(sigma)
    nabla_xy = directional(covariant_differential(Y, K, L), X)
    nabla_xs = directional(covariant_differential(s, K, L), X)
    return [
        covariant_derivative_on_E(D, hx, hy) - horizontal_lift(K, nabla_xy),
        covariant_derivative_on_E(D, hx, sv) - vertical_lift(nabla_xs),
        covariant_derivative_on_E(D, sv, hx),
        covariant_derivative_on_E(D, sv, sigmav),
    ]


# Building blocks over the base

def S_of(L, a1, a2, a3):
    """S(Λ) = a1 T + a2 I⊗T̂ + a3 T̂⊗I, slots (BD μ, BU λ, BD ν)."""

    torsion = torsion_split(L).torsion
    trace = torsion_trace(torsion)

    def component(index):
        mu, lam, nu = index
        value = torsion[index] * Fraction(a1)
        if lam == mu:
            value = value + trace[nu] * Fraction(a2)
        if lam == nu:
            value = value + trace[mu] * Fraction(a3)
        return value

    return TensorField.from_function(L.space, (BD, BU, BD), torsion.order, component)


def g_basis(L, K):
    """The nine (0,2) fields of the G family, keyed by parameter name, slots (BD μ, BD ν)."""

    split = torsion_split(L)
    torsion = split.torsion
    trace = torsion_trace(torsion)
    nabla_trace = covariant_differential(trace, None, split.sym)
    nabla_torsion = covariant_differential(torsion, None, split.sym)
    curvature_sym = curvature_Lambda(split.sym)

    return {
        # T̂_μ T̂_ν
        'b1': tensor_product(trace, trace),
        # T^ρ_{σμ} T^σ_{ρν}
        'b2': contract(contract(tensor_product(torsion, torsion), 1, 3), 2, 0),
        # T̂_σ T^σ_{μν}
        'b3': contract(tensor_product(trace, torsion), 2, 0),
        # ∇̃_ν T̂_μ and its conjugate
        'c1': nabla_trace,
        'c2': permute(nabla_trace, (1, 0)),
        # ∇̃_ρ T^ρ_{μν}
        'c3': contract(nabla_torsion, 1, 3),
        # R̃^ρ_{ρμν}, R̃^ρ_{μρν}
        'd1': contract(curvature_sym, 1, 0),
        'd2': contract(curvature_sym, 1, 2),
        # R^p_{pμν}
        'e1': contract(curvature_K(K), 1, 0),
    }


def G_of(L, K, b1=0, b2=0, b3=0, c1=0, c2=0, c3=0, d1=0, d2=0, e1=0):
    """The 9-parameter family of (0,2) fields on M."""

    _require_order(min(L.order, K.order), 1, 'G(Λ,K)')
    coefficients = dict(b1=b1, b2=b2, b3=b3, c1=c1, c2=c2, c3=c3, d1=d1, d2=d2, e1=e1)
    basis = g_basis(L, K)
    result = None
    for name in G_FIELDS:
        term = basis[name] * Fraction(coefficients[name])
        result = term if result is None else result + term
    return result


class _BaseData:
    """Base-level ingredients shared by both families, lifted to a space over M."""

    def __init__(self, L, K, space):
        _require_order(min(L.order, K.order), 1, 'the natural families')
        self.m, self.n = K.m, K.n
        self.space = space
        torsion = torsion_split(L).torsion
        self.torsion = lift(torsion, space)
        self.trace = lift(torsion_trace(torsion), space)
        self.g = {name: lift(field, space) for name, field in g_basis(L, K).items()}
        self.curvature = lift(curvature_K(K), space)
        self.order = min(
            [self.torsion.order, self.curvature.order] + [field.order for field in self.g.values()]
        )
        self.zero = JetPoly.zero(space.num_vars, self.order)
        self.y = [fiber_coordinate(space, i, self.order) for i in range(self.n)]
        self.ky = _k_times_y(K, space)
        # R^i_{jμν} y^j
        self.curvature_y = np.empty((self.n, self.m, self.m), dtype=object)
        for i, mu, nu in np.ndindex(self.n, self.m, self.m):
            self.curvature_y[i, mu, nu] = sum(
                (self.curvature[j, i, mu, nu] * self.y[j] for j in range(self.n)), self.zero
            )


def _field_on_E(data, base_block=None, fiber_block=None, vertical_block=None, fiber_form_block=None):
    """
    Assembles a (TD, TU, TD) field on E from its nonzero blocks:
    base_block(μ, λ, ν), fiber_block(μ, i, ν), vertical_block(j, i, ν), fiber_form_block(μ, i, k).
    """

    m = data.m

    def component(index):
        b, a, c = index
        block, arguments = None, None
        if b < m and a < m and c < m:
            block, arguments = base_block, (b, a, c)
        elif b < m and a >= m and c < m:
            block, arguments = fiber_block, (b, a - m, c)
        elif b >= m and a >= m and c < m:
            block, arguments = vertical_block, (b - m, a - m, c)
        elif b < m and a >= m and c >= m:
            block, arguments = fiber_form_block, (b, a - m, c - m)
        if block is None:
            return data.zero
        return block(*arguments)

    return TensorField.from_function(data.space, (TD, TU, TD), data.order, component)


def phi15_basis(L, K):
    """
    The 15 tensor fields Φ_k on E, one per Params15 field, whose combinations
    are the natural (1,2) fields added to D(Λ,K). Blocks:
        d^μ⊗∂_λ⊗d^ν : a1 T^λ_{μν} + a2 δ^λ_μ T̂_ν + a3 δ^λ_ν T̂_μ
        d^μ⊗∂_i⊗d^ν : y^i G_{μν} + e2 R^i_{jμν} y^j + (a3 - h2) T̂_μ K^i_{jν} y^j
                      + (a2 - h1) T̂_ν K^i_{jμ} y^j + a1 T^ρ_{μν} K^i_{jρ} y^j
        d^j⊗∂_i⊗d^ν : h1 δ^i_j T̂_ν
        d^μ⊗∂_i⊗d^k : h2 δ^i_k T̂_μ
    """

    data = _BaseData(L, K, total_space(K.space))
    T, That, ky, y = data.torsion, data.trace, data.ky, data.y
    m = data.m

    def torsion_ky(mu, i, nu):
        return sum((T[mu, rho, nu] * ky[i][rho] for rho in range(m)), data.zero)

    basis = {
        'a1': _field_on_E(data, base_block=lambda mu, lam, nu: T[mu, lam, nu], fiber_block=torsion_ky),
        'a2': _field_on_E(
            data,
            base_block=lambda mu, lam, nu: That[nu] if lam == mu else data.zero,
            fiber_block=lambda mu, i, nu: That[nu] * ky[i][mu],
        ),
        'a3': _field_on_E(
            data,
            base_block=lambda mu, lam, nu: That[mu] if lam == nu else data.zero,
            fiber_block=lambda mu, i, nu: That[mu] * ky[i][nu],
        ),
        'e2': _field_on_E(data, fiber_block=lambda mu, i, nu: data.curvature_y[i, mu, nu]),
        'h1': _field_on_E(
            data,
            fiber_block=lambda mu, i, nu: -(That[nu] * ky[i][mu]),
            vertical_block=lambda j, i, nu: That[nu] if i == j else data.zero,
        ),
        'h2': _field_on_E(
            data,
            fiber_block=lambda mu, i, nu: -(That[mu] * ky[i][nu]),
            fiber_form_block=lambda mu, i, k: That[mu] if i == k else data.zero,
        ),
    }
    for name in G_FIELDS:
        g = data.g[name]
        basis[name] = _field_on_E(data, fiber_block=lambda mu, i, nu, g=g: y[i] * g[mu, nu])
    return [basis[name] for name in Params15.FIELDS]


def _combine(basis, params):
    result = None
    for field, coefficient in zip(basis, params.vector()):
        term = field * coefficient
        result = term if result is None else result + term
    return result


def phi15(L, K, p):
    """The natural (1,2) field Φ(Λ,K) on E with parameters p, slots (TD, TU, TD)."""

    return _combine(phi15_basis(L, K), p)


def induce_D_tilde(L, K, p):
    """D̃(Λ,K) = D(Λ,K) + Φ(Λ,K)."""

    return induce_D(L, K) + phi15(L, K, p)


# Geometric assembly of the 15-parameter family

def horizontal_lift_tensor(K, S):
    """h^K(S) for a (BD, BU, BD) field S on M: forms pulled back, vector slot lifted by h^K."""

    lifted = lift(S, total_space(S.space))
    # slots [μ, ν, A] after contracting the vector slot with h^K
    moved = contract(tensor_product(lifted, horizontal_lift_map(K)), 1, 3)
    return to_total(to_total(permute(moved, (0, 2, 1)), 0), 2)


def liouville_on_E(space, order):
    """The Liouville field y^i ∂_i as a total vector field on E."""

    return TensorField.from_function(
        space, (TU,), order, lambda index: fiber_coordinate(space, index[0] - space.m, order) if index[0] >= space.m else 0
    )


def curvature_on_liouville(K):
    """R[K](L): the (TD, TU, TD) field R^i_{jμν} y^j d^μ⊗∂_i⊗d^ν on E."""

    space = total_space(K.space)
    curvature = lift(curvature_K(K), space)
    y = TensorField.from_function(space, (FU,), curvature.order, lambda index: fiber_coordinate(space, index[0], curvature.order))
    # slots [i, μ, ν]
    applied = contract(tensor_product(y, curvature), 0, 1)
    return to_total(to_total(to_total(permute(applied, (1, 0, 2)), 0), 1), 2)


def geometric_phi15(L, K, p):
    """h^K(S) + L⊗G + e2 R[K](L) + h1 ν_K⊗T̂ + h2 T̂⊗ν_K, assembled by tensor operations."""

    space = total_space(K.space)
    S = S_of(L, p.a1, p.a2, p.a3)
    G = G_of(L, K, **{name: p.values[name] for name in G_FIELDS})
    trace = to_total(lift(torsion_trace(torsion_split(L).torsion), space), 0)
    nu_k = to_total(vertical_projection(K), 1)
    forms = to_total(to_total(lift(G, space), 0), 1)
    liouville = liouville_on_E(space, forms.order)

    pieces = [
        horizontal_lift_tensor(K, S),
        permute(tensor_product(liouville, forms), (1, 0, 2)),
        curvature_on_liouville(K) * p.e2,
        tensor_product(nu_k, trace) * p.h1,
        permute(tensor_product(trace, nu_k), (0, 2, 1)) * p.h2,
    ]
    result = pieces[0]
    for piece in pieces[1:]:
        result = result + piece
    return result


# χ and the connections on J1E

def contact_maps(space, order):
    """
    The contact maps on J1E: д = d^λ⊗(∂_λ + y^i_λ ∂_i) with slots (BD λ, TU A)
    and θ = (d^i - y^i_λ d^λ)⊗∂_i with slots (TD A, FU i).
    """

    jets = jet_space(space)
    m = space.m

    def g_component(index):
        lam, a = index
        if a < m:
            return int(a == lam)
        return jet_coordinate(jets, a - m, lam, order)

    def theta_component(index):
        a, i = index
        if a < m:
            return -jet_coordinate(jets, i, a, order)
        return int(a - m == i)

    return (
        TensorField.from_function(jets, (BD, TU), order, g_component),
        TensorField.from_function(jets, (TD, FU), order, theta_component),
    )


def chi_tilde_map(phi):
    """
    χ̃ = id ⊗ θ ⊗ д on a (TD, TU, TD) field on E: the value slot is projected
    by θ and the second form slot is restricted along д, giving a (TD, FU, BD) field on J1E.
    """

    if phi.signature != (TD, TU, TD) or phi.space.kind is not SpaceKind.E:
        raise SignatureError(f'χ̃ acts on (TD, TU, TD) fields on E, got {phi}')
    jets = jet_space(phi.space)
    lifted = lift(phi, jets)
    g, theta = contact_maps(phi.space, lifted.order)
    # [A, B, C] ⊗ [B', i] -> [A, C, i]
    projected = contract(tensor_product(lifted, theta), 1, 3)
    # [A, C, i] ⊗ [λ, C'] -> [A, i, λ]
    return contract(tensor_product(projected, g), 1, 4)


def chi(D):
    """
    Γ_A^i_λ = D_A^i_j y^j_λ + D_A^i_λ - y^i_μ (D_A^μ_j y^j_λ + D_A^μ_λ).
    """

    space = D.space
    m, n = space.m, space.n
    jets = jet_space(space)
    table = lift(D.table, jets)
    d = table.components
    order = table.order
    ylam = [[jet_coordinate(jets, i, lam, order) for lam in range(m)] for i in range(n)]
    zero = JetPoly.zero(jets.num_vars, order)

    def component(index):
        a, i, lam = index
        value = sum((d[a, m + i, m + j] * ylam[j][lam] for j in range(n)), zero) + d[a, m + i, lam]
        for mu in range(m):
            inner = sum((d[a, mu, m + j] * ylam[j][lam] for j in range(n)), zero) + d[a, mu, lam]
            value = value - ylam[i][mu] * inner
        return value

    return ConnectionOnJ1E(TensorField.from_function(jets, ConnectionOnJ1E.SIGNATURE, order, component))


def induce_Gamma(L, K):
    """
    Γ(Λ,K) = χ(D(Λ,K)):
        Γ_μ^i_λ = K^i_{jμ} y^j_λ + (∂_λ K^i_{jμ} - K^i_{pλ} K^p_{jμ} + K^i_{jρ} Λ^ρ_{μλ}) y^j - y^i_ρ Λ^ρ_{μλ},
        Γ_j^i_λ = K^i_{jλ}.
    """

    _require_order(min(L.order, K.order), 1, 'Γ(Λ,K)')
    m, n = K.m, K.n
    jets = jet_space(K.space)
    k, c = K.coeffs, L.coeffs
    zero_base = JetPoly.zero(m, K.order)
    order = lifted_order(min(L.order, K.order) - 1)
    y = [fiber_coordinate(jets, j, order) for j in range(n)]
    ylam = [[jet_coordinate(jets, i, lam, order) for lam in range(m)] for i in range(n)]
    zero = JetPoly.zero(jets.num_vars, order)

    def component(index):
        a, i, lam = index
        if a >= m:
            return lift_jet(k[i, a - m, lam], jets)
        mu = a
        value = zero
        for j in range(n):
            coefficient = k[i, j, mu].partial(lam)
            coefficient = coefficient - sum((k[i, p, lam] * k[p, j, mu] for p in range(n)), zero_base)
            coefficient = coefficient + sum((k[i, j, rho] * c[rho, mu, lam] for rho in range(m)), zero_base)
            value = value + lift_jet(k[i, j, mu], jets) * ylam[j][lam] + lift_jet(coefficient, jets) * y[j]
        for rho in range(m):
            value = value - ylam[i][rho] * lift_jet(c[rho, mu, lam], jets)
        return value

    return ConnectionOnJ1E(TensorField.from_function(jets, ConnectionOnJ1E.SIGNATURE, order, component))


def _field_on_J1E(data, base_block=None, vertical_block=None):
    """A (TD, FU, BD) field on J1E from base_block(λ, i, μ) and vertical_block(j, i, μ)."""

    m = data.m

    def component(index):
        a, i, mu = index
        if a < m:
            return base_block(a, i, mu) if base_block else data.zero
        return vertical_block(a - m, i, mu) if vertical_block else data.zero

    return TensorField.from_function(data.space, ConnectionOnJ1E.SIGNATURE, data.order, component)


def phi14_basis(L, K):
    """
    The 14 fields φ_k on J1E, one per Params14 field, with slots (TD A, FU i, BD μ):
        d^λ⊗d^μ⊗∂_i : (a1 T^ρ_{λμ} + a2 T̂_μ δ^ρ_λ + a3 T^σ_{λσ} δ^ρ_μ) y^i_ρ + y^i G_{λμ}
                      - (a3 T^σ_{λσ} K^i_{jμ} + (a2 + h1) T̂_μ K^i_{jλ} + a1 T^ρ_{λμ} K^i_{jρ}) y^j
                      + e2 R^i_{jλμ} y^j
        d^j⊗d^μ⊗∂_i : h1 δ^i_j T̂_μ
    """

    jets = jet_space(K.space)
    data = _BaseData(L, K, jets)
    T, That, ky, y = data.torsion, data.trace, data.ky, data.y
    m = data.m
    # y^i_ρ - K^i_{jρ} y^j
    contact = [
        [jet_coordinate(jets, i, rho, data.order) - ky[i][rho] for rho in range(m)] for i in range(data.n)
    ]
    # T^σ_{λσ}
    twisted_trace = [sum((T[lam, sigma, sigma] for sigma in range(m)), data.zero) for lam in range(m)]

    basis = {
        'a1': _field_on_J1E(
            data, base_block=lambda lam, i, mu: sum((T[lam, rho, mu] * contact[i][rho] for rho in range(m)), data.zero)
        ),
        'a2': _field_on_J1E(data, base_block=lambda lam, i, mu: That[mu] * contact[i][lam]),
        'a3': _field_on_J1E(data, base_block=lambda lam, i, mu: twisted_trace[lam] * contact[i][mu]),
        'e2': _field_on_J1E(data, base_block=lambda lam, i, mu: data.curvature_y[i, lam, mu]),
        'h1': _field_on_J1E(
            data,
            base_block=lambda lam, i, mu: -(That[mu] * ky[i][lam]),
            vertical_block=lambda j, i, mu: That[mu] if i == j else data.zero,
        ),
    }
    for name in G_FIELDS:
        g = data.g[name]
        basis[name] = _field_on_J1E(data, base_block=lambda lam, i, mu, g=g: y[i] * g[lam, mu])
    return [basis[name] for name in Params14.FIELDS]


def phi14(L, K, p):
    """The natural field φ(Λ,K) on J1E with parameters p, slots (TD, FU, BD)."""

    return _combine(phi14_basis(L, K), p)


def induce_Gamma_tilde(L, K, p):
    """Γ̃(Λ,K) = Γ(Λ,K) + φ(Λ,K)."""

    return induce_Gamma(L, K) + phi14(L, K, p)


def geometric_phi14(L, K, p):
    """
    θ∘h^K(S) + L⊗G + e2 R[K](L) + h1 ν_K⊗T̂ read through χ̃, with
    S = -a1 T - a2 I⊗T̂ + a3 T̂⊗I.
    """

    space = total_space(K.space)
    S = S_of(L, -p.a1, -p.a2, p.a3)
    G = G_of(L, K, **{name: p.values[name] for name in G_FIELDS})
    trace = to_total(lift(torsion_trace(torsion_split(L).torsion), space), 0)
    nu_k = to_total(vertical_projection(K), 1)
    forms = to_total(to_total(lift(G, space), 0), 1)
    liouville = liouville_on_E(space, forms.order)

    pieces = [
        chi_tilde_map(horizontal_lift_tensor(K, S)),
        chi_tilde_map(permute(tensor_product(liouville, forms), (1, 0, 2))),
        chi_tilde_map(curvature_on_liouville(K)) * p.e2,
        chi_tilde_map(tensor_product(nu_k, trace)) * p.h1,
    ]
    result = pieces[0]
    for piece in pieces[1:]:
        result = result + piece
    return result


def trace_lift_identity_sides(L, K):
    """
    The two sides of χ̃(h^K(T̂⊗I)) = -χ̃(T̂⊗ν_K), as (TD, FU, BD) fields on J1E.
    """

    space = total_space(K.space)
    trace = to_total(lift(torsion_trace(torsion_split(L).torsion), space), 0)
    nu_k = to_total(vertical_projection(K), 1)
    lhs = chi_tilde_map(horizontal_lift_tensor(K, S_of(L, 0, 0, 1)))
    rhs = -chi_tilde_map(permute(tensor_product(trace, nu_k), (0, 2, 1)))
    return lhs, rhs


def evaluation_matrix(fields, points):
    """
    Columns are the fields, rows the flattened component values at the points.
    """

    columns = []
    for field in fields:
        column = []
        for point in points:
            column.extend(field.evaluate(point).flat)
        columns.append(column)
    return [list(row) for row in zip(*columns)]


def derive_params15_to_14(L, K, points):
    """
    Solves χ̃(Φ_k) = Σ_l M[l][k] φ_l for the matrix M from generic inputs.
    :raises ValueError: when the inputs are too degenerate to fix M uniquely.
    """

    targets = evaluation_matrix([chi_tilde_map(field) for field in phi15_basis(L, K)], points)
    system = evaluation_matrix(phi14_basis(L, K), points)
    columns = [solve_exact(system, [row[k] for row in targets]) for k in range(len(Params15.FIELDS))]
    return [[columns[k][l] for k in range(len(Params15.FIELDS))] for l in range(len(Params14.FIELDS))]


# Affineness in the jet coordinates

def jet_degree(gamma):
    """Highest degree of the coefficients of a connection on J1E in the y^i_λ."""

    variables = gamma.space.jet_vars()
    return max(degree_in(entry, variables) for entry in gamma.coeffs.flat)


def affineness_defects(gamma, point, step=1):
    """
    Nonzero second differences of the coefficients of a connection on J1E along
    the jet coordinates at a point, as (component index, variable, value) triples.
    """

    defects = []
    for index in np.ndindex(*gamma.coeffs.shape):
        entry = gamma.coeffs[index]
        for var in gamma.space.jet_vars():
            value = second_difference(entry, var, point, step)
            if value:
                defects.append((tuple(int(k) for k in index), var, value))
    return defects
