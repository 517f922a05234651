import hashlib
import json
from fractions import Fraction

import sympy

from common.errors import SceneError
from common.variables import ENCODING


def parse_rational(value):
    """
    Converts a scene value into an exact Fraction.
    Accepts integers and "num/den" or "num" strings; floats are rejected.
    :param value: int or str.
    :return: Fraction.
    """

    if isinstance(value, bool) or isinstance(value, float):
        raise SceneError(f'rational expected, got {value!r}')
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            if '.' in value or 'e' in value.lower():
                raise ValueError(value)
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise SceneError(f'malformed rational {value!r}')
    raise SceneError(f'rational expected, got {value!r}')


def format_rational(value):
    """Formats a Fraction as the "num/den" string used in scenes and reports."""

    value = Fraction(value)
    return f'{value.numerator}/{value.denominator}'


def to_sympy(value):
    """Fraction -> sympy.Rational."""

    value = Fraction(value)
    return sympy.Rational(value.numerator, value.denominator)


def from_sympy(value):
    """sympy.Rational (or Integer) -> Fraction."""

    value = sympy.nsimplify(value)
    if not value.is_Rational:
        raise ValueError(f'not a rational number: {value}')
    return Fraction(int(value.p), int(value.q))


def rational_matrix(rows):
    """Builds a sympy Matrix from nested sequences of Fractions."""

    return sympy.Matrix([[to_sympy(entry) for entry in row] for row in rows])


def matrix_inverse(rows):
    """
    Exact inverse of a square rational matrix.
    :param rows: nested sequences of Fractions.
    :return: list of lists of Fractions.
    :raises ZeroDivisionError: for a singular matrix.
    """

    matrix = rational_matrix(rows)
    if matrix.det() == 0:
        raise ZeroDivisionError('singular matrix')
    inverse = matrix.inv()
    return [[from_sympy(inverse[i, j]) for j in range(inverse.cols)] for i in range(inverse.rows)]


def matrix_rank(rows):
    """Exact rank of a rational matrix given as rows of Fractions."""

    if not rows:
        return 0
    return rational_matrix(rows).rank()


def matrix_nullspace(rows):
    """Basis of the right kernel of a rational matrix as lists of Fractions."""

    return [[from_sympy(entry) for entry in vector] for vector in rational_matrix(rows).nullspace()]


def canonical_json(data):
    """
    Deterministic JSON text: sorted keys, fixed indentation.
    Identical data always produces byte-identical output.
    """

    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + '\n'


def digest(data):
    """SHA-256 digest of the canonical JSON form of the data."""

    return hashlib.sha256(canonical_json(data).encode(ENCODING)).hexdigest()


def solve_exact(rows, rhs):
    """
    Unique exact solution x of rows · x = rhs.
    :param rows: nested sequences of Fractions.
    :param rhs: sequence of Fractions.
    :return: list of Fractions.
    :raises ValueError: for an inconsistent or underdetermined system.
    """

    matrix = rational_matrix(rows)
    column = sympy.Matrix([to_sympy(value) for value in rhs])
    solution, free = matrix.gauss_jordan_solve(column)
    if free.rows:
        raise ValueError(f'underdetermined system: {free.rows} free parameters')
    return [from_sympy(entry) for entry in solution]
