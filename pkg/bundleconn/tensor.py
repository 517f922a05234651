"""
Dense tensor fields over the base M, the total space E or the jet space J1E.

Coordinates are packed base first: on E the variables are (x^λ, y^i), on J1E
they are (x^λ, y^i, y^i_λ) with y^i_λ at position m + n + i*m + λ.
A total index A < m is the base index λ = A, A >= m is the fiber index A - m.
"""

import enum
import logging
from fractions import Fraction

import numpy as np

from bundleconn.jetcalc import JetPoly, embed, truncate
from common.descriptor import Dimension
from common.errors import SignatureError
from common.utils import format_rational
from common.variables import DEFAULT_LOG_NAME, FIBER_DEGREE_SLACK

LOGGER = logging.getLogger(DEFAULT_LOG_NAME)


class SpaceKind(enum.Enum):
    M = 'M'
    E = 'E'
    J1E = 'J1E'


class Space:
    """Coordinate domain of a field: M, E or J1E over an m-dimensional base with n-dimensional fibers."""

    m = Dimension()
    n = Dimension()

    def __init__(self, kind, m, n):
        self.kind = SpaceKind(kind)
        self.m = m
        self.n = n

    @property
    def num_vars(self):
        if self.kind is SpaceKind.M:
            return self.m
        if self.kind is SpaceKind.E:
            return self.m + self.n
        return self.m + self.n + self.n * self.m

    def base_vars(self):
        return range(self.m)

    def fiber_vars(self):
        if self.kind is SpaceKind.M:
            raise SignatureError('the base space has no fiber coordinates')
        return range(self.m, self.m + self.n)

    def jet_var(self, i, lam):
        if self.kind is not SpaceKind.J1E:
            raise SignatureError('jet coordinates y^i_λ live on J1E only')
        return self.m + self.n + i * self.m + lam

    def jet_vars(self):
        return [self.jet_var(i, lam) for i in range(self.n) for lam in range(self.m)]

    def over(self, kind):
        """The space of the same dimensions with another kind."""

        return Space(kind, self.m, self.n)

    def slot_dim(self, slot):
        return {'base': self.m, 'fiber': self.n, 'total': self.m + self.n}[slot.family]

    def to_record(self):
        return {'kind': self.kind.value, 'm': self.m, 'n': self.n}

    def __eq__(self, other):
        if not isinstance(other, Space):
            return NotImplemented
        return (self.kind, self.m, self.n) == (other.kind, other.m, other.n)

    def __hash__(self):
        return hash((self.kind, self.m, self.n))

    def __repr__(self):
        return f'Space({self.kind.value}, m={self.m}, n={self.n})'


class SlotKind(enum.Enum):
    BASE_UP = ('base', 'up')
    BASE_DOWN = ('base', 'down')
    FIBER_UP = ('fiber', 'up')
    FIBER_DOWN = ('fiber', 'down')
    TOTAL_UP = ('total', 'up')
    TOTAL_DOWN = ('total', 'down')

    @property
    def family(self):
        return self.value[0]

    @property
    def variance(self):
        return self.value[1]

    @property
    def dual(self):
        return SlotKind((self.family, 'down' if self.variance == 'up' else 'up'))


BU, BD = SlotKind.BASE_UP, SlotKind.BASE_DOWN
FU, FD = SlotKind.FIBER_UP, SlotKind.FIBER_DOWN
TU, TD = SlotKind.TOTAL_UP, SlotKind.TOTAL_DOWN


class TensorField:
    """
    Component array of JetPolys with a slot signature.
    All components share the variable count of the space and a common order.
    """

    def __init__(self, space, signature, components):
        self.space = space
        self.signature = tuple(SlotKind(slot) for slot in signature)
        components = np.asarray(components, dtype=object)
        expected = tuple(space.slot_dim(slot) for slot in self.signature)
        if components.shape != expected:
            raise SignatureError(f'component shape {components.shape} does not match signature shape {expected}')
        if components.size == 0:
            raise SignatureError('empty component array')
        for entry in components.flat:
            if not isinstance(entry, JetPoly) or entry.num_vars != space.num_vars:
                raise SignatureError(f'component {entry!r} is not a jet over {space}')
        order = min(entry.order for entry in components.flat)
        self.components = np.empty(expected, dtype=object)
        for index in np.ndindex(*expected):
            self.components[index] = truncate(components[index], order)

    @classmethod
    def from_function(cls, space, signature, order, function):
        """Builds a field from ``function(index)`` returning a JetPoly or a rational."""

        signature = tuple(SlotKind(slot) for slot in signature)
        shape = tuple(space.slot_dim(slot) for slot in signature)
        components = np.empty(shape, dtype=object)
        for index in np.ndindex(*shape):
            value = function(index)
            if not isinstance(value, JetPoly):
                value = JetPoly.constant(space.num_vars, order, value)
            components[index] = value
        return cls(space, signature, components)

    @classmethod
    def zeros(cls, space, signature, order):
        return cls.from_function(space, signature, order, lambda index: 0)

    @classmethod
    def constant(cls, space, signature, values, order):
        values = np.asarray(values, dtype=object)
        return cls.from_function(space, signature, order, lambda index: Fraction(values[index]))

    @property
    def order(self):
        return min(entry.order for entry in self.components.flat)

    @property
    def shape(self):
        return self.components.shape

    @property
    def rank(self):
        return len(self.signature)

    def __getitem__(self, index):
        return self.components[index]

    def evaluate(self, point):
        """Component values at a point, as an object array of Fractions."""

        values = np.empty(self.shape, dtype=object)
        for index in np.ndindex(*self.shape):
            values[index] = self.components[index].evaluate(point)
        return values

    def map(self, function):
        return TensorField(self.space, self.signature, apply(self.components, function))

    def _check_compatible(self, other):
        if not isinstance(other, TensorField):
            raise SignatureError(f'cannot combine a tensor field with {type(other).__name__}')
        if other.space != self.space or other.signature != self.signature:
            raise SignatureError(
                f'incompatible fields: {self.space} {self.signature} and {other.space} {other.signature}'
            )

    def __add__(self, other):
        self._check_compatible(other)
        return TensorField(self.space, self.signature, self.components + other.components)

    def __sub__(self, other):
        self._check_compatible(other)
        return TensorField(self.space, self.signature, self.components - other.components)

    def __neg__(self):
        return TensorField(self.space, self.signature, -self.components)

    def __mul__(self, factor):
        if isinstance(factor, TensorField):
            return NotImplemented
        return TensorField(self.space, self.signature, self.components * factor)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, TensorField):
            return NotImplemented
        if other.space != self.space or other.signature != self.signature:
            return False
        return all(a == b for a, b in zip(self.components.flat, other.components.flat))

    __hash__ = None

    def is_zero(self):
        return all(entry.is_zero() for entry in self.components.flat)

    def to_record(self):
        return {
            'space': self.space.to_record(),
            'signature': [slot.name for slot in self.signature],
            'order': self.order,
            'components': _nested(self.components, lambda entry: entry.to_records()),
        }

    def __repr__(self):
        return f'TensorField({self.space}, {[slot.name for slot in self.signature]}, order={self.order})'


def apply(components, function):
    """Entrywise map over an object array, keeping its shape (0-d included)."""

    components = np.asarray(components, dtype=object)
    result = np.empty(components.shape, dtype=object)
    for index in np.ndindex(*components.shape):
        result[index] = function(components[index])
    return result


def _nested(array, convert):
    # indexing a 1-d object array yields the entry itself, not a 0-d array
    if not isinstance(array, np.ndarray):
        return convert(array)
    if array.ndim == 0:
        return convert(array[()])
    return [_nested(array[i], convert) for i in range(array.shape[0])]


def values_record(values):
    """Nested "num/den" strings of an evaluated component array."""

    return _nested(np.asarray(values, dtype=object), format_rational)


def first_mismatch(lhs, rhs):
    """
    First index where two component arrays differ, with both entries,
    or None when they agree everywhere.
    """

    lhs = np.asarray(lhs, dtype=object)
    rhs = np.asarray(rhs, dtype=object)
    if lhs.shape != rhs.shape:
        raise SignatureError(f'cannot compare shapes {lhs.shape} and {rhs.shape}')
    for index in np.ndindex(*lhs.shape):
        if lhs[index] != rhs[index]:
            return index, lhs[index], rhs[index]
    return None


def tensor_product(a, b):
    """Field with concatenated signature and product components."""

    if a.space != b.space:
        raise SignatureError(f'tensor product over different spaces {a.space} and {b.space}')
    return TensorField(a.space, a.signature + b.signature, np.multiply.outer(a.components, b.components))


def contract(t, up_slot, down_slot):
    """Sums over a pair of slots of the same family and opposite variance."""

    try:
        up, down = t.signature[up_slot], t.signature[down_slot]
    except IndexError:
        raise SignatureError(f'slots ({up_slot}, {down_slot}) out of range for rank {t.rank}')
    if up_slot == down_slot or up.family != down.family or {up.variance, down.variance} != {'up', 'down'}:
        raise SignatureError(f'cannot contract slot {up.name} with slot {down.name}')
    signature = tuple(slot for k, slot in enumerate(t.signature) if k not in (up_slot, down_slot))
    components = np.trace(t.components, axis1=up_slot, axis2=down_slot)
    return TensorField(t.space, signature, np.asarray(components, dtype=object))


def sym_antisym(t, slots, mode):
    """½(t ± t with the two slots swapped); mode is 'sym' or 'antisym'."""

    first, second = slots
    if t.signature[first] != t.signature[second]:
        raise SignatureError(f'cannot symmetrize {t.signature[first].name} with {t.signature[second].name}')
    swapped = np.swapaxes(t.components, first, second)
    if mode == 'sym':
        components = t.components + swapped
    elif mode == 'antisym':
        components = t.components - swapped
    else:
        raise SignatureError(f'unknown symmetrization mode {mode!r}')
    return TensorField(t.space, t.signature, components * Fraction(1, 2))


def permute(t, order):
    """Reorders slots: slot k of the result is slot order[k] of ``t``."""

    if sorted(order) != list(range(t.rank)):
        raise SignatureError(f'{order} is not a permutation of {t.rank} slots')
    return TensorField(t.space, tuple(t.signature[k] for k in order), np.transpose(t.components, order))


def kronecker(space, family, order):
    """Identity tensor δ with an Up and a Down slot of the family."""

    up = SlotKind((family, 'up'))
    return TensorField.from_function(space, (up, up.dual), order, lambda index: int(index[0] == index[1]))


def coordinate(space, var, order):
    return JetPoly.variable(space.num_vars, order, var)


def liouville(space, order):
    """The vertical vector field y^i ∂_i on E."""

    if space.kind is not SpaceKind.E:
        raise SignatureError(f'the Liouville field lives on E, not on {space.kind.value}')
    return TensorField.from_function(space, (FU,), order, lambda index: coordinate(space, space.m + index[0], order))


def lift(t, space):
    """
    Regards a field over M (or E) as a field over E (or J1E).
    The order is raised so that products with fiber coordinates keep every base term.
    """

    if (space.m, space.n) != (t.space.m, t.space.n):
        raise SignatureError(f'cannot lift {t.space} to {space}')
    if space.kind == t.space.kind:
        return t
    if space.num_vars < t.space.num_vars:
        raise SignatureError(f'cannot lift {t.space} down to {space}')
    slack = FIBER_DEGREE_SLACK
    return TensorField(
        space,
        t.signature,
        apply(t.components, lambda entry: embed(entry, space.num_vars, entry.order + slack)),
    )


def to_total(t, slot):
    """
    Regards a base or fiber slot as a total-space slot, the missing
    components being zero: base index λ becomes A = λ, fiber index i becomes A = m + i.
    """

    kind = t.signature[slot]
    if kind.family == 'total':
        return t
    if t.space.kind is SpaceKind.M:
        raise SignatureError('total-space slots need a field over E or J1E')
    offset = 0 if kind.family == 'base' else t.space.m
    total = SlotKind(('total', kind.variance))
    signature = t.signature[:slot] + (total,) + t.signature[slot + 1:]
    shape = tuple(t.space.slot_dim(s) for s in signature)
    zero = JetPoly.zero(t.space.num_vars, t.order)
    components = np.full(shape, zero, dtype=object)
    for index in np.ndindex(*t.shape):
        shifted = index[:slot] + (index[slot] + offset,) + index[slot + 1:]
        components[shifted] = t.components[index]
    return TensorField(t.space, signature, components)


def restrict(t, slot, family):
    """The base or fiber part of a total-space slot."""

    kind = t.signature[slot]
    if kind.family != 'total' or family not in ('base', 'fiber'):
        raise SignatureError(f'cannot restrict slot {kind.name} to {family}')
    m = t.space.m
    indices = range(m) if family == 'base' else range(m, m + t.space.n)
    signature = t.signature[:slot] + (SlotKind((family, kind.variance)),) + t.signature[slot + 1:]
    return TensorField(t.space, signature, np.take(t.components, list(indices), axis=slot))
