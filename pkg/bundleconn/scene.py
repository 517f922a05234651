"""
Scene files: the JSON input of every command.

    {
        "m": 2, "n": 1, "order": 3, "point": ["0/1", "0/1"],
        "lambda": {"order": 3, "symmetric": false, "coeffs": [[[<jet records>]]]},
        "k": {"order": 3, "coeffs": [[[<jet records>]]]},
        "params15": {"a1": "1/2", ...}, "params14": {...}, "jets": 1, "seed": 7
    }

A jet record is a list of {"exponents": [...], "coeff": "num/den"} terms.
Rationals are always strings or integers; floats are rejected.
"""

import json
import logging
import random
from fractions import Fraction

from bundleconn.connections import ClassicalConnection, GeneralLinearConnection, base_space
from bundleconn.equivariance import random_inputs
from bundleconn.natural import Params14, Params15
from common.descriptor import Dimension, Order
from common.errors import BundleConnError, OrderExhaustedError, SceneError
from common.utils import digest, format_rational, parse_rational
from common.variables import (
    DEFAULT_LOG_NAME, ENCODING, MAX_POLY_DEGREE, SCENE_JETS, SCENE_K, SCENE_LAMBDA, SCENE_M, SCENE_N,
    SCENE_ORDER, SCENE_PARAMS14, SCENE_PARAMS15, SCENE_POINT, SCENE_SEED,
)

LOGGER = logging.getLogger(DEFAULT_LOG_NAME)


class Scene:
    """Dimensions, truncation order, evaluation point, connections and optional parameters."""

    m = Dimension()
    n = Dimension()
    order = Order()
    jets = Order()

    def __init__(self, m, n, order, L, K, point=None, params15=None, params14=None, jets=0, seed=None):
        self.m = m
        self.n = n
        self.order = order
        self.jets = jets
        for name, connection in (('lambda', L), ('k', K)):
            if (connection.m, connection.n) != (m, n):
                LOGGER.error(f'Scene record "{name}" has dimensions {(connection.m, connection.n)}, expected {(m, n)}.')
                raise SceneError(f'inconsistent dimensions in "{name}"')
        self.L = L
        self.K = K
        self.point = [Fraction(0)] * m if point is None else [parse_rational(value) for value in point]
        if len(self.point) != m:
            raise SceneError(f'point of length {len(self.point)} for m={m}')
        self.params15 = params15
        self.params14 = params14
        self.seed = seed

    @classmethod
    def from_record(cls, record):
        """
        Validates and builds a scene from parsed JSON.
        :raises SceneError: for any malformed or inconsistent entry.
        """

        if not isinstance(record, dict):
            raise SceneError('a scene must be a JSON object')
        try:
            m, n, order = record[SCENE_M], record[SCENE_N], record[SCENE_ORDER]
            lambda_record, k_record = record[SCENE_LAMBDA], record[SCENE_K]
        except KeyError as missing:
            LOGGER.error(f'Scene without the required key {missing}.')
            raise SceneError(f'missing scene key {missing}')
        for name, value in ((SCENE_M, m), (SCENE_N, n), (SCENE_ORDER, order)):
            if isinstance(value, bool) or not isinstance(value, int):
                raise SceneError(f'"{name}" must be an integer, got {value!r}')
        seed = record.get(SCENE_SEED)
        if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
            raise SceneError(f'"{SCENE_SEED}" must be an integer, got {seed!r}')
        point = record.get(SCENE_POINT)
        if point is not None and not isinstance(point, list):
            LOGGER.error(f'Scene "{SCENE_POINT}" must be a list of rationals, got {point!r}.')
            raise SceneError(f'"{SCENE_POINT}" must be a list, got {point!r}')

        for name, connection_record in ((SCENE_LAMBDA, lambda_record), (SCENE_K, k_record)):
            dims = connection_record.get('dims') if isinstance(connection_record, dict) else None
            if dims is not None and dims != {'m': m, 'n': n}:
                LOGGER.error(f'Scene record "{name}" declares dimensions {dims}, the scene has m={m}, n={n}.')
                raise SceneError(f'inconsistent dimensions in "{name}"')

        space = base_space(m, n)
        try:
            L = ClassicalConnection.from_record(space, lambda_record)
            K = GeneralLinearConnection.from_record(space, k_record)
        except BundleConnError as error:
            raise SceneError(f'invalid connection record: {error}')
        if min(L.order, K.order) < order:
            raise SceneError(f'scene order {order} exceeds the order of its connection records')
        params15 = record.get(SCENE_PARAMS15)
        params14 = record.get(SCENE_PARAMS14)
        return cls(
            m, n, order, L.truncated(order), K.truncated(order),
            point=point,
            params15=Params15.from_record(params15) if params15 is not None else None,
            params14=Params14.from_record(params14) if params14 is not None else None,
            jets=record.get(SCENE_JETS, 0),
            seed=seed,
        )

    @classmethod
    def load(cls, path):
        try:
            with open(path, encoding=ENCODING) as file:
                record = json.load(file)
        except OSError as error:
            LOGGER.error(f'Cannot read the scene file {path}: {error}.')
            raise SceneError(f'cannot read scene file {path}')
        except json.JSONDecodeError as error:
            LOGGER.error(f'The scene file {path} is not valid JSON: {error}.')
            raise SceneError(f'malformed JSON in {path}')
        return cls.from_record(record)

    @classmethod
    def flat(cls, m, n, order):
        space = base_space(m, n)
        return cls(m, n, order, ClassicalConnection.zero(space, order), GeneralLinearConnection.zero(space, order))

    @classmethod
    def random(cls, seed, m, n, order, symmetric=False):
        rng = random.Random(seed)
        L, K = random_inputs(rng, m, n, order, min(MAX_POLY_DEGREE, order), symmetric)
        return cls(m, n, order, L, K, seed=seed)

    def to_record(self):
        record = {
            SCENE_M: self.m,
            SCENE_N: self.n,
            SCENE_ORDER: self.order,
            SCENE_POINT: [format_rational(value) for value in self.point],
            SCENE_LAMBDA: self.L.to_record(),
            SCENE_K: self.K.to_record(),
            SCENE_JETS: self.jets,
        }
        if self.params15 is not None:
            record[SCENE_PARAMS15] = self.params15.to_record()
        if self.params14 is not None:
            record[SCENE_PARAMS14] = self.params14.to_record()
        if self.seed is not None:
            record[SCENE_SEED] = self.seed
        return record

    def digest(self):
        return digest(self.to_record())

    def require_order(self, needed, what):
        if self.order < needed:
            LOGGER.error(f'{what} needs truncation order >= {needed}, the scene has {self.order}.')
            raise OrderExhaustedError(f'{what} needs order >= {needed}, got {self.order}')

    def recentered(self):
        """(Λ, K) re-expanded around the scene point."""

        return self.L.recentered(self.point), self.K.recentered(self.point)

    def __repr__(self):
        return f'Scene(m={self.m}, n={self.n}, order={self.order})'
