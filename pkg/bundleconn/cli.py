"""
Command dispatch and report emission.

Every command returns a report
    {"schema": 1, "command", "scene_digest", "seed", "results", "summary": {"passed", ...}}
written as canonical JSON, so identical inputs give byte-identical output.
Exit codes: 0 pass, 1 verification failure, 2 input error, 3 insufficient truncation order.
"""

import argparse
import logging
import os
import sys

from tabulate import tabulate

from bundleconn.connections import (
    bianchi_defect, curvature_jets, curvature_K, curvature_Lambda, torsion_split,
)
from bundleconn.equivariance import weight_solutions
from bundleconn.natural import induce_D, induce_D_tilde, induce_Gamma, induce_Gamma_tilde
from bundleconn.scene import Scene
from bundleconn.suites import passed, run_suite
from bundleconn.tensor import values_record
from common.decorators import Log
from common.errors import JetError, OrderExhaustedError, SceneError, SignatureError
from common.utils import canonical_json
from common.variables import (
    COMMAND, COMMANDS, DEFAULT_LOG_NAME, DEFAULT_SEED, DEFAULT_TRIALS, ENCODING, EXIT_INPUT_ERROR, EXIT_OK,
    EXIT_ORDER_EXHAUSTED, EXIT_VERIFICATION_FAILED, FAILURES, PASSED, PASSES, RESULTS, SCENE_DIGEST, SCHEMA,
    SCHEMA_VERSION, SEED, SEED_ENV_VAR, SUITE, SUITES, SUMMARY, TARGETS,
)

LOGGER = logging.getLogger(DEFAULT_LOG_NAME)

DEFAULT_WEIGHT_S = 2
DEFAULT_WEIGHT_R = 2
DEFAULT_WEIGHT_RHS = -1


def build_report(command, scene, seed, results, ok, **summary):
    return {
        SCHEMA: SCHEMA_VERSION,
        COMMAND: command,
        SCENE_DIGEST: scene.digest() if scene is not None else None,
        SEED: seed,
        RESULTS: results,
        SUMMARY: dict(summary, **{PASSED: bool(ok)}),
    }


@Log
def cmd_curvature(scene, seed=None):
    """R[K], R[Λ̃], the torsion and the curvature jets ∇^i R up to the scene's "jets", around the scene point."""

    scene.require_order(max(2, scene.jets + 1), 'the curvature command')
    L, K = scene.recentered()
    split = torsion_split(L)
    r_k, r_lambda = curvature_K(K), curvature_Lambda(split.sym)
    jets_lambda, jets_k = curvature_jets(K, split.sym, scene.jets)
    origin = [0] * scene.m
    bianchi_ok = bianchi_defect(split.sym).is_zero()
    results = {
        'R_K': r_k.to_record(),
        'R_Lambda_sym': r_lambda.to_record(),
        'torsion': split.torsion.to_record(),
        'values': {
            'R_K': values_record(r_k.evaluate(origin)),
            'R_Lambda_sym': values_record(r_lambda.evaluate(origin)),
            'torsion': values_record(split.torsion.evaluate(origin)),
        },
        'jets': {
            'R_Lambda_sym': [field.to_record() for field in jets_lambda],
            'R_K': [field.to_record() for field in jets_k],
        },
        'bianchi_defect_zero': bianchi_ok,
    }
    return build_report('curvature', scene, seed, results, bianchi_ok)


def induced_table(scene, target):
    """The coefficient table of the requested connection, computed around the scene point."""

    if target not in TARGETS:
        raise SceneError(f'unknown target {target!r}, expected one of {", ".join(TARGETS)}')
    scene.require_order(1, f'target {target}')
    L, K = scene.recentered()
    if target == 'd':
        return induce_D(L, K).table
    if target == 'gamma':
        return induce_Gamma(L, K).table
    if target == 'd-tilde':
        if scene.params15 is None:
            LOGGER.error('Target d-tilde needs "params15" in the scene.')
            raise SceneError('target d-tilde needs params15')
        return induce_D_tilde(L, K, scene.params15).table
    if scene.params14 is None:
        LOGGER.error('Target gamma-tilde needs "params14" in the scene.')
        raise SceneError('target gamma-tilde needs params14')
    return induce_Gamma_tilde(L, K, scene.params14).table


@Log
def cmd_induce(scene, target, seed=None):
    table = induced_table(scene, target)
    results = {'target': target, 'table': table.to_record()}
    return build_report('induce', scene, seed, results, True)


@Log
def cmd_verify(scene, suite, trials, seed):
    if suite not in SUITES:
        raise SceneError(f'unknown suite {suite!r}, expected one of {", ".join(SUITES)}')
    if isinstance(trials, bool) or not isinstance(trials, int) or trials < 1:
        raise SceneError(f'trials must be a positive integer, got {trials!r}')
    if scene is not None:
        scene.require_order(2, 'verification')
    reports = run_suite(suite, seed, trials, scene)
    return build_report(
        'verify', scene, seed, {'suites': reports}, passed(reports),
        passes=sum(report[PASSES] for report in reports),
        failures=sum(len(report[FAILURES]) for report in reports),
    )


@Log
def cmd_weights(s, r, rhs, seed=None):
    solutions = weight_solutions(s, r, rhs)
    results = {'s': s, 'r': r, 'rhs': rhs, 'count': len(solutions), 'solutions': solutions}
    return build_report('weights', None, seed, results, True)


def summary_table(report):
    """Human-readable summary of a report."""

    if report[COMMAND] == 'verify':
        rows = [
            [item[SUITE], item[PASSES], len(item[FAILURES]), 'ok' if not item[FAILURES] else 'FAILED']
            for item in report[RESULTS]['suites']
        ]
        headers = ['suite', 'passes', 'failures', 'status']
    else:
        rows = [[report[COMMAND], report[SEED], 'ok' if report[SUMMARY][PASSED] else 'FAILED']]
        headers = ['command', 'seed', 'status']
    return tabulate(rows, headers=headers, tablefmt='fancy_grid', stralign='center')


def history_table(rows):
    return tabulate(
        [list(row) for row in rows],
        headers=['id', 'command', 'suite', 'seed', 'passed', 'run time'],
        tablefmt='fancy_grid',
        stralign='center',
    )


def build_parser(default_trials=DEFAULT_TRIALS):
    parser = argparse.ArgumentParser(
        prog='bundleconn', description='Natural connections on vector bundles and their jet prolongations.'
    )
    parser.add_argument('command', nargs='?', choices=COMMANDS)
    parser.add_argument('--scene', default=None, help='scene JSON file')
    parser.add_argument('--target', default='d', choices=TARGETS)
    parser.add_argument('--suite', default='all', choices=SUITES)
    parser.add_argument('--trials', default=default_trials, type=int)
    parser.add_argument('--seed', default=None, type=int)
    parser.add_argument('--out', default=None, help='report file, standard output when missing')
    parser.add_argument('--s', default=DEFAULT_WEIGHT_S, type=int)
    parser.add_argument('--r', default=DEFAULT_WEIGHT_R, type=int)
    parser.add_argument('--rhs', default=DEFAULT_WEIGHT_RHS, type=int)
    parser.add_argument('--list-history', action='store_true')
    return parser


def resolve_seed(flag, environ=None):
    """The seed flag, then the BUNDLECONN_SEED variable; None when neither is set."""

    if flag is not None:
        return flag
    environ = os.environ if environ is None else environ
    value = environ.get(SEED_ENV_VAR)
    if value is None:
        return None
    try:
        return int(value)
    except ValueError:
        LOGGER.error(f'{SEED_ENV_VAR}={value!r} is not an integer.')
        raise SceneError(f'{SEED_ENV_VAR} must be an integer')


def dispatch(namespace, seed, default_seed=DEFAULT_SEED):
    """Runs one command; a missing seed falls back to the scene's seed, then to the default."""

    scene = Scene.load(namespace.scene) if namespace.scene else None
    if seed is None:
        seed = scene.seed if scene is not None and scene.seed is not None else int(default_seed)
    command = namespace.command
    if command == 'weights':
        return cmd_weights(namespace.s, namespace.r, namespace.rhs, seed)
    if command == 'verify':
        return cmd_verify(scene, namespace.suite, namespace.trials, seed)
    if scene is None:
        raise SceneError(f'command {command} needs --scene')
    if command == 'curvature':
        return cmd_curvature(scene, seed)
    return cmd_induce(scene, namespace.target, seed)


def emit(text, path=None):
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, 'w', encoding=ENCODING) as file:
        file.write(text)


def execute(namespace, settings=None, history=None):
    """
    Runs a parsed command line and returns the exit code.
    :param settings: the SETTINGS section of the configuration (or a dict).
    :param history: optional RunHistory storing every report.
    """

    settings = settings or {}
    if namespace.list_history:
        if history is None:
            LOGGER.error('The run history is disabled in the configuration.')
            return EXIT_INPUT_ERROR
        print(history_table(history.reports(namespace.command)))
        return EXIT_OK
    if namespace.command is None:
        LOGGER.error('No command given.')
        return EXIT_INPUT_ERROR

    try:
        seed = resolve_seed(namespace.seed)
        report = dispatch(namespace, seed, settings.get('default_seed', DEFAULT_SEED))
    except OrderExhaustedError as error:
        LOGGER.error(f'Insufficient truncation order: {error}')
        print(f'error: {error}', file=sys.stderr)
        return EXIT_ORDER_EXHAUSTED
    except (SceneError, JetError, SignatureError) as error:
        LOGGER.error(f'Input error: {error}')
        print(f'error: {error}', file=sys.stderr)
        return EXIT_INPUT_ERROR

    emit(canonical_json(report), namespace.out)
    print(summary_table(report), file=sys.stderr)
    if history is not None:
        history.add_report(report, namespace.suite if namespace.command == 'verify' else None)
    ok = report[SUMMARY][PASSED]
    LOGGER.info(f'Command {namespace.command} finished, passed={ok}.')
    return EXIT_OK if ok else EXIT_VERIFICATION_FAILED
