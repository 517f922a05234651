"""
Exact arithmetic on truncated multivariate Taylor expansions (jets).

A :class:`JetPoly` is a polynomial in ``num_vars`` variables with rational
coefficients, truncated at total degree ``order``. Terms of higher degree
are unknown rather than zero, so binary operations truncate to the lower
order of their operands and a partial derivative lowers the order by one.
"""

import logging
from fractions import Fraction
from math import comb, factorial

import numpy as np

from common.errors import JetError, OrderExhaustedError
from common.utils import format_rational, matrix_inverse, parse_rational
from common.variables import DEFAULT_LOG_NAME, MAX_DENOMINATOR, MAX_NUMERATOR

LOGGER = logging.getLogger(DEFAULT_LOG_NAME)


def graded_lex_key(exponents):
    """Sort key of the graded lexicographic term order."""

    return sum(exponents), tuple(-e for e in exponents)


class JetPoly:
    """
    Truncated polynomial over the rationals.
    Instances are immutable: every operation returns a new jet.
    """

    __slots__ = ('num_vars', 'order', 'terms')

    def __init__(self, num_vars, order, terms=None):
        if num_vars < 0 or order < 0:
            raise JetError(f'invalid jet shape: num_vars={num_vars}, order={order}')
        normalized = {}
        for exponents, coeff in (terms or {}).items():
            exponents = tuple(exponents)
            if len(exponents) != num_vars:
                raise JetError(f'multi-index {exponents} does not match {num_vars} variables')
            if sum(exponents) > order:
                continue
            coeff = Fraction(coeff)
            if coeff:
                normalized[exponents] = coeff
        object.__setattr__(self, 'num_vars', num_vars)
        object.__setattr__(self, 'order', order)
        object.__setattr__(self, 'terms', normalized)

    def __setattr__(self, key, value):
        raise AttributeError('JetPoly is immutable')

    # Constructors

    @classmethod
    def zero(cls, num_vars, order):
        return cls(num_vars, order)

    @classmethod
    def constant(cls, num_vars, order, value):
        return cls(num_vars, order, {(0,) * num_vars: value})

    @classmethod
    def variable(cls, num_vars, order, index, shift=0):
        """The coordinate function x_index (plus an optional constant shift)."""

        if not 0 <= index < num_vars:
            raise JetError(f'variable index {index} out of range for {num_vars} variables')
        exponents = [0] * num_vars
        exponents[index] = 1
        return cls(num_vars, order, {tuple(exponents): 1, (0,) * num_vars: shift})

    @classmethod
    def identity(cls, num_vars, order):
        """The identity jet: the list of all coordinate functions."""

        return [cls.variable(num_vars, order, i) for i in range(num_vars)]

    @classmethod
    def from_records(cls, num_vars, order, records):
        """
        Builds a jet from serialized records {exponents: [...], coeff: "num/den"}.
        :raises JetError: for malformed records.
        """

        terms = {}
        for record in records:
            try:
                exponents = tuple(int(e) for e in record['exponents'])
                coeff = parse_rational(record['coeff'])
            except (KeyError, TypeError, ValueError):
                raise JetError(f'malformed jet record {record!r}')
            if any(e < 0 for e in exponents):
                raise JetError(f'negative exponent in {record!r}')
            terms[exponents] = terms.get(exponents, 0) + coeff
        return cls(num_vars, order, terms)

    def to_records(self):
        return [
            {'exponents': list(exponents), 'coeff': format_rational(self.terms[exponents])}
            for exponents in sorted(self.terms, key=graded_lex_key)
        ]

    # Inspection

    def is_zero(self):
        return not self.terms

    def coefficient(self, exponents):
        return self.terms.get(tuple(exponents), Fraction(0))

    def constant_term(self):
        return self.coefficient((0,) * self.num_vars)

    def degree(self):
        return max((sum(e) for e in self.terms), default=0)

    # Arithmetic

    def _coerce(self, other):
        if isinstance(other, JetPoly):
            if other.num_vars != self.num_vars:
                raise JetError(f'variable-count mismatch: {self.num_vars} != {other.num_vars}')
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return JetPoly.constant(self.num_vars, self.order, other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms = dict(self.terms)
        for exponents, coeff in other.terms.items():
            terms[exponents] = terms.get(exponents, 0) + coeff
        return JetPoly(self.num_vars, min(self.order, other.order), terms)

    __radd__ = __add__

    def __neg__(self):
        return JetPoly(self.num_vars, self.order, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.scale(other)
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        order = min(self.order, other.order)
        terms = {}
        for e1, c1 in self.terms.items():
            d1 = sum(e1)
            for e2, c2 in other.terms.items():
                if d1 + sum(e2) > order:
                    continue
                key = tuple(a + b for a, b in zip(e1, e2))
                terms[key] = terms.get(key, 0) + c1 * c2
        return JetPoly(self.num_vars, order, terms)

    __rmul__ = __mul__

    def scale(self, factor):
        factor = Fraction(factor)
        return JetPoly(self.num_vars, self.order, {e: c * factor for e, c in self.terms.items()})

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.scale(Fraction(1) / Fraction(other))
        return NotImplemented

    def __pow__(self, exponent):
        if not isinstance(exponent, int) or exponent < 0:
            return NotImplemented
        result = JetPoly.constant(self.num_vars, self.order, 1)
        for _ in range(exponent):
            result = result * self
        return result

    def __eq__(self, other):
        if isinstance(other, JetPoly):
            return self.num_vars == other.num_vars and self.terms == other.terms
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.terms == JetPoly.constant(self.num_vars, self.order, other).terms
        return NotImplemented

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __hash__(self):
        return hash((self.num_vars, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return f'JetPoly(0; order={self.order})'
        parts = []
        for exponents in sorted(self.terms, key=graded_lex_key):
            monomial = '*'.join(
                f'x{i}' if e == 1 else f'x{i}^{e}' for i, e in enumerate(exponents) if e
            )
            coeff = self.terms[exponents]
            parts.append(f'{coeff}*{monomial}' if monomial else str(coeff))
        return f'JetPoly({" + ".join(parts)}; order={self.order})'

    # Calculus

    def partial(self, var):
        """
        Formal partial derivative with respect to variable ``var``.
        :raises JetError: variable out of range.
        :raises OrderExhaustedError: order 0 jet.
        """

        if not 0 <= var < self.num_vars:
            raise JetError(f'variable {var} out of range for {self.num_vars} variables')
        if self.order < 1:
            raise OrderExhaustedError('cannot differentiate a jet of order 0')
        terms = {}
        for exponents, coeff in self.terms.items():
            power = exponents[var]
            if power:
                lowered = list(exponents)
                lowered[var] -= 1
                terms[tuple(lowered)] = coeff * power
        return JetPoly(self.num_vars, self.order - 1, terms)

    def evaluate(self, point):
        """Exact rational value at the point."""

        if len(point) != self.num_vars:
            raise JetError(f'point of length {len(point)} for {self.num_vars} variables')
        point = [Fraction(v) for v in point]
        total = Fraction(0)
        for exponents, coeff in self.terms.items():
            value = coeff
            for base, power in zip(point, exponents):
                if power:
                    value *= base ** power
            total += value
        return total


def add(a, b):
    return a + b


def mul(a, b):
    return a * b


def partial(p, var):
    return p.partial(var)


def evaluate(p, point):
    return p.evaluate(point)


def truncate(p, order):
    """The same jet with its order lowered to ``order`` (never raised)."""

    return JetPoly(p.num_vars, min(order, p.order), p.terms)


def embed(p, num_vars, order=None):
    """
    Regards ``p`` as a function of ``num_vars`` >= p.num_vars variables,
    the original variables coming first. The order may be raised for
    products with the new variables.
    """

    if num_vars < p.num_vars:
        raise JetError(f'cannot embed {p.num_vars} variables into {num_vars}')
    padding = (0,) * (num_vars - p.num_vars)
    order = p.order if order is None else order
    return JetPoly(num_vars, order, {e + padding: c for e, c in p.terms.items()})


def degree_in(p, variables):
    """Highest total degree of ``p`` in the given group of variables."""

    variables = tuple(variables)
    return max((sum(e[v] for v in variables) for e in p.terms), default=0)


def second_difference(p, var, point, step=1):
    """p(pt + 2h e_var) - 2 p(pt + h e_var) + p(pt); zero for p affine in var."""

    step = Fraction(step)
    shifted = [list(point), list(point), list(point)]
    shifted[1][var] += step
    shifted[2][var] += 2 * step
    return p.evaluate(shifted[2]) - 2 * p.evaluate(shifted[1]) + p.evaluate(shifted[0])


def _check_inners(inners, arity):
    if len(inners) != arity:
        raise JetError(f'composition arity mismatch: {len(inners)} inner jets for {arity} variables')
    if not inners:
        raise JetError('composition needs at least one inner jet')
    num_vars = inners[0].num_vars
    for inner in inners:
        if inner.num_vars != num_vars:
            raise JetError('inner jets must share the number of variables')
        if inner.constant_term():
            raise JetError('inner jet with nonzero constant term: re-center before composing')
    return num_vars, min(inner.order for inner in inners)


def compose(outer, inners):
    """
    Substitutes the centered jets ``inners`` into ``outer``.
    The result is truncated at the common order of all operands.
    """

    num_vars, order = _check_inners(inners, outer.num_vars)
    order = min(order, outer.order)
    inners = [truncate(inner, order) for inner in inners]
    powers = [[JetPoly.constant(num_vars, order, 1)] for _ in inners]
    result = JetPoly.zero(num_vars, order)
    for exponents, coeff in outer.terms.items():
        monomial = JetPoly.constant(num_vars, order, coeff)
        for k, power in enumerate(exponents):
            while len(powers[k]) <= power:
                powers[k].append(powers[k][-1] * inners[k])
            if power:
                monomial = monomial * powers[k][power]
        result = result + monomial
    return result


def compose_all(outers, inners):
    return [compose(outer, inners) for outer in outers]


def linear_part(jets):
    """Matrix of first-order coefficients: rows are jets, columns variables."""

    num_vars = jets[0].num_vars
    units = [tuple(int(i == j) for i in range(num_vars)) for j in range(num_vars)]
    return [[jet.coefficient(unit) for unit in units] for jet in jets]


def invert_jet(f):
    """
    Inverse of a centered square system of jets.
    Iterates g <- A^-1 (id - N(g)), where A is the linear part of ``f``
    and N its nonlinear remainder; each pass fixes one more degree.
    :raises JetError: singular linear part or non-square system.
    """

    num_vars, order = _check_inners(f, len(f))
    if num_vars != len(f):
        raise JetError(f'non-square system: {len(f)} jets in {num_vars} variables')
    matrix = linear_part(f)
    try:
        inverse = matrix_inverse(matrix)
    except ZeroDivisionError:
        LOGGER.error(f'Cannot invert a jet with singular linear part {matrix}.')
        raise JetError('singular linear part')

    identity = JetPoly.identity(num_vars, order)
    nonlinear = [
        jet - sum((identity[j].scale(matrix[i][j]) for j in range(num_vars)), JetPoly.zero(num_vars, order))
        for i, jet in enumerate(f)
    ]

    def apply_inverse(vector):
        return [
            sum((vector[j].scale(inverse[i][j]) for j in range(num_vars)), JetPoly.zero(num_vars, order))
            for i in range(num_vars)
        ]

    g = apply_inverse(identity)
    for _ in range(order):
        g = apply_inverse([identity[i] - compose(nonlinear[i], g) for i in range(num_vars)])
    return g


def invert_matrix_jet(rows):
    """
    Inverse of a square matrix of jets with invertible constant part,
    by the Neumann series around the constant part.
    :param rows: nested sequence (or 2d object array) of JetPoly.
    :return: 2d object array of JetPoly.
    """

    matrix = np.asarray(rows, dtype=object)
    size = matrix.shape[0]
    if matrix.shape != (size, size):
        raise JetError(f'non-square jet matrix of shape {matrix.shape}')
    sample = matrix[0, 0]
    num_vars = sample.num_vars
    order = min(entry.order for entry in matrix.flat)
    constant = [[entry.constant_term() for entry in row] for row in matrix]
    try:
        inverse = matrix_inverse(constant)
    except ZeroDivisionError:
        LOGGER.error(f'Cannot invert a jet matrix with singular constant part {constant}.')
        raise JetError('singular constant part')

    base_inverse = np.empty((size, size), dtype=object)
    for i in range(size):
        for j in range(size):
            base_inverse[i, j] = JetPoly.constant(num_vars, order, inverse[i][j])
    remainder = np.empty((size, size), dtype=object)
    for i in range(size):
        for j in range(size):
            remainder[i, j] = truncate(matrix[i, j] - constant[i][j], order)

    # M^-1 = sum_k (-M0^-1 N)^k M0^-1, N has no constant term
    step = -np.dot(base_inverse, remainder)
    term = base_inverse
    result = base_inverse
    for _ in range(order):
        term = np.dot(step, term)
        result = result + term
    return result


def translate(p, shift):
    """
    Taylor shift: the jet of u -> p(shift + u), exact for the stored polynomial.
    """

    if len(shift) != p.num_vars:
        raise JetError(f'shift of length {len(shift)} for {p.num_vars} variables')
    shift = [Fraction(s) for s in shift]
    terms = {}
    for exponents, coeff in p.terms.items():
        # expand prod_k (s_k + u_k)^e_k
        partial_terms = {(): coeff}
        for s, e in zip(shift, exponents):
            expanded = {}
            for prefix, value in partial_terms.items():
                for k in range(e + 1):
                    factor = comb(e, k) * s ** (e - k)
                    if factor:
                        key = prefix + (k,)
                        expanded[key] = expanded.get(key, 0) + value * factor
            partial_terms = expanded
        for key, value in partial_terms.items():
            terms[key] = terms.get(key, 0) + value
    return JetPoly(p.num_vars, p.order, terms)


def random_rational(rng):
    """Small random rational: |numerator| <= MAX_NUMERATOR, denominator <= MAX_DENOMINATOR."""

    return Fraction(rng.randint(-MAX_NUMERATOR, MAX_NUMERATOR), rng.randint(1, MAX_DENOMINATOR))


def random_poly(rng, num_vars, order, degree, centered=False):
    """Random jet with every monomial of degree <= ``degree`` drawn independently."""

    terms = {}
    for exponents in np.ndindex(*([degree + 1] * num_vars)):
        total = sum(exponents)
        if total > degree or (centered and total == 0):
            continue
        terms[tuple(int(e) for e in exponents)] = random_rational(rng)
    return JetPoly(num_vars, order, terms)


def derivative_at_origin(p, variables):
    """
    Value at the origin of the partial derivative of ``p`` along the listed
    variables (repetitions allowed), read off the Taylor coefficients.
    """

    exponents = [0] * p.num_vars
    for var in variables:
        exponents[var] += 1
    if sum(exponents) > p.order:
        raise OrderExhaustedError(f'derivative of degree {sum(exponents)} of a jet of order {p.order}')
    factor = 1
    for e in exponents:
        factor *= factorial(e)
    return p.coefficient(exponents) * factor
