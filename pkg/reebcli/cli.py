"""Reeb bypass toolkit - Command Line Interface - Runs the numerical checks of
the library and writes machine readable reports.

Every command prints a JSON document to standard output and a one line
summary to standard error. With --out DIR the tables and certificates are
written to files in DIR as well. Exit codes are 0 (all checks pass), 1 (a
check or certificate failed) and 2 (usage or configuration error).
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from reebcli.chord_diagrams import ArcSpec, Rejection, attach_bypass, check_C4_C5
from reebcli.chord_diagrams import enumerate_diagrams, load_diagram, parallel_diagram, region_census
from reebcli.config import RunConfig
from reebcli.cz_index import mu_tilde
from reebcli.errors import BoundaryError, ConfigError, ReebError
from reebcli.homology_ranks import attach_sequence, block_identity_check, c5_torus_ranks
from reebcli.homology_ranks import parallel_torus_ranks
import reebcli.horseshoe as hs
from reebcli.model_geometry import THREE_COMPONENTS, closed_orbits, default_model, load_model
from reebcli.model_geometry import volume_grid_check
from reebcli.reeb_flow import DEFAULT_GRID_N, FlowSettings, TransverseChord
from reebcli.reeb_flow import bypass_arc, chord_linearization
from reebcli.reeb_flow import chords_to_dict, find_chords, monodromy
from reebcli.symbolic_orbits import block_with_generator, chord_data, composition_family
from reebcli.symbolic_orbits import compositions_up_to_cyclic, enumerate_orbits, euler_characteristic
from reebcli.symbolic_orbits import homotopy_classes, orbits_to_dict, write_orbits_csv


logger = logging.getLogger(__name__)


# ------------------------------------------------------------------------------
#
# Constants
#
# ------------------------------------------------------------------------------

"""Exit codes."""
EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

"""Command defaults."""
COMMON_DEFAULTS = {'out': None, 'seed': 0, 'verbose': False, 'config': None}

FLOW_DEFAULTS = {
    'model': None,
    'chords': False,
    'K': 20.0,
    'config_name': THREE_COMPONENTS,
    'grid': 20,
    'chord_grid': DEFAULT_GRID_N,
    'trace_tol': 1e-3
}

ORBIT_DEFAULTS = {
    'chords': None,
    'from_flow': False,
    'composition_classes': None,
    'K': 10.0,
    'tau': 0.0,
    'euler': False,
    'model': 'alpha_b',
    'config_name': THREE_COMPONENTS,
    'chord_grid': DEFAULT_GRID_N
}

DIAGRAM_DEFAULTS = {
    'n': None,
    'parallel': None,
    'diagram': None,
    'arc': None,
    'positions': None,
    'strict': False,
    'base_sign': 1
}

HORSESHOE_DEFAULTS = {
    'synthetic': False,
    'map': None,
    'bypass_map': None,
    'role': 'manifold',
    'lam': hs.DEFAULT_LAMBDA,
    'nu': hs.DEFAULT_NU,
    'tau': hs.DEFAULT_TAU,
    'A': hs.DEFAULT_A,
    'eta': hs.DEFAULT_ETA,
    'mu': hs.DEFAULT_MU,
    'periods': list(hs.DEFAULT_PERIODS),
    'warp': 0.0,
    'K': 5.99,
    'sample_n': hs.DEFAULT_SAMPLE_N,
    'grid_n': hs.DEFAULT_GRID_N,
    'seeds': 0,
    'stability': None,
    'trials': 10
}

DEFAULTS = {
    'flow-validate': FLOW_DEFAULTS,
    'orbits': ORBIT_DEFAULTS,
    'diagram': DIAGRAM_DEFAULTS,
    'horseshoe': HORSESHOE_DEFAULTS
}

# Distance below the boundary value suggested for an action bound K that
# equals the action of a word
BOUNDARY_SHIFT = 1e-6


# ------------------------------------------------------------------------------
#
# Argument parser
#
# ------------------------------------------------------------------------------

def _int_list(value):
    try:
        return [int(v) for v in value.split(',')]
    except ValueError:
        raise argparse.ArgumentTypeError('invalid integer list: ' + str(value))


def _float_list(value):
    try:
        return [float(v) for v in value.split(',')]
    except ValueError:
        raise argparse.ArgumentTypeError('invalid number list: ' + str(value))


def _pair(value):
    values = _int_list(value)
    if len(values) != 2:
        raise argparse.ArgumentTypeError('invalid pair: ' + str(value))
    return values


def build_parser():
    """Argument parser of the reeb-bypass command. Flags that are not given
    parse to None so that configuration files can supply them.

    Returns
    -------
    argparse.ArgumentParser
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='JSON configuration file')
    common.add_argument('--out', help='output directory for tables and certificates')
    common.add_argument('--seed', type=int, help='seed of randomized routines')
    common.add_argument('--verbose', action='store_true', default=None, help='debug logging')

    parser = argparse.ArgumentParser(
        prog='reeb-bypass',
        description='Reeb dynamics of contact bypass attachments'
    )
    commands = parser.add_subparsers(dest='command')
    commands.required = True

    flow = commands.add_parser('flow-validate', parents=[common], help='validate an explicit contact model')
    flow.add_argument('--model', help='model name or model JSON file')
    flow.add_argument('--chords', action='store_true', default=None, help='detect Reeb chords of the attaching arc')
    flow.add_argument('--K', type=float, help='bound on chord periods')
    flow.add_argument('--config-name', dest='config_name', help='bypass configuration')
    flow.add_argument('--grid', type=int, help='contact volume grid size')
    flow.add_argument(
        '--chord-grid',
        dest='chord_grid',
        type=int,
        help='initial shooting samples per arc strand, doubled until the chord count is stable'
    )
    flow.add_argument('--trace-tol', dest='trace_tol', type=float, help='relative monodromy trace tolerance')

    orbits = commands.add_parser('orbits', parents=[common], help='enumerate orbits as cyclic words')
    source = orbits.add_mutually_exclusive_group()
    source.add_argument('--chords', help='chord JSON file with muTilde entries')
    source.add_argument('--from-flow', dest='from_flow', action='store_true', default=None)
    source.add_argument('--composition-classes', dest='composition_classes', type=int)
    orbits.add_argument('--K', type=float, help='action bound')
    orbits.add_argument('--tau', type=float, help='period tolerance of a chord passage')
    orbits.add_argument('--euler', action='store_true', default=None, help='Euler characteristics per class')
    orbits.add_argument('--model', help='model for --from-flow')
    orbits.add_argument('--config-name', dest='config_name', help='bypass configuration for --from-flow')
    orbits.add_argument('--chord-grid', dest='chord_grid', type=int)

    diagram = commands.add_parser('diagram', help='chord diagram calculus')
    actions = diagram.add_subparsers(dest='action')
    actions.required = True
    for name in ['enumerate', 'attach', 'census', 'check', 'ranks']:
        sub = actions.add_parser(name, parents=[common])
        sub.add_argument('--n', type=int, help='number of chords')
        sub.add_argument('--parallel', type=int, help='parallel diagram with N chords')
        sub.add_argument('--diagram', help='diagram JSON file')
        sub.add_argument('--arc', type=_pair, help='numbers I,J of the chords crossed by the arc')
        sub.add_argument('--positions', type=_int_list, help='attachment positions on the parallel diagram')
        sub.add_argument('--strict', action='store_true', default=None, help='fail on rejected attachments')
        sub.add_argument('--base-sign', dest='base_sign', type=int, choices=[-1, 1])

    horseshoe = commands.add_parser('horseshoe', help='section maps and fixed points')
    actions = horseshoe.add_subparsers(dest='action')
    actions.required = True
    for name in ['verify', 'orbits']:
        sub = actions.add_parser(name, parents=[common])
        sub.add_argument('--synthetic', action='store_true', default=None, help='synthetic map pair')
        sub.add_argument('--map', help='section map JSON file')
        sub.add_argument('--bypass-map', dest='bypass_map', help='bypass section map JSON file')
        sub.add_argument('--role', choices=['bypass', 'manifold'], help='role of the map of --map')
        sub.add_argument('--lambda', dest='lam', type=float)
        sub.add_argument('--nu', type=float)
        sub.add_argument('--tau', type=float)
        sub.add_argument('--A', type=float)
        sub.add_argument('--eta', type=float)
        sub.add_argument('--mu', type=float)
        sub.add_argument('--periods', type=_float_list)
        sub.add_argument('--warp', type=float)
        sub.add_argument('--K', type=float, help='action bound')
        sub.add_argument('--sample-n', dest='sample_n', type=int)
        sub.add_argument('--grid-n', dest='grid_n', type=int)
        sub.add_argument('--seeds', type=int, help='additional random seeds per fixed point')
        sub.add_argument('--stability', type=float, help='relative perturbation size')
        sub.add_argument('--trials', type=int)
    return parser


# ------------------------------------------------------------------------------
#
# Commands
#
# ------------------------------------------------------------------------------

class ReebCmdLine(object):
    def __init__(self, config):
        """Initialize the command with the resolved run configuration.

        Parameters
        ----------
        config : reebcli.config.RunConfig
        """
        self.config = config
        if not config.out is None:
            if not os.path.isdir(config.out):
                os.makedirs(config.out)

    def eval(self):
        """Run the configured command.

        Returns
        -------
        (dict, int, string)
            Report, exit status and summary line
        """
        command = self.config.command
        if command == 'flow-validate':
            return self.flow_validate()
        elif command == 'orbits':
            return self.orbits()
        elif command == 'diagram':
            return self.diagram()
        elif command == 'horseshoe':
            return self.horseshoe()
        raise ConfigError('unknown command: ' + str(command))

    def path(self, name):
        """Output file name or None if no output directory is configured."""
        if self.config.out is None:
            return None
        return os.path.join(self.config.out, name)

    def write_json(self, name, obj):
        filename = self.path(name)
        if not filename is None:
            with open(filename, 'w') as f:
                json.dump(obj, f, indent=2, sort_keys=True)

    def settings(self, **kwargs):
        return FlowSettings(workers=self.config.workers, **kwargs)

    def model(self):
        name = self.config.model
        if name is None:
            raise ConfigError('missing model')
        if os.path.isfile(name):
            return load_model(name)
        return default_model(name)

    def detect_chords(self, model, K):
        """Chords of the bypass arc with their indices."""
        settings = self.settings()
        arc = bypass_arc(self.config.config_name)
        chords = find_chords(
            model, arc, K, grid_n=self.config.chord_grid, settings=settings, stabilize=True
        )
        mu = dict()
        for c in chords:
            mu[c.label] = mu_tilde(chord_linearization(model, c, settings=settings))
        return chords, mu

    # --------------------------------------------------------------------------
    # flow-validate
    # --------------------------------------------------------------------------

    def flow_validate(self):
        config = self.config
        model = self.model()
        passed = True
        volume, point = volume_grid_check(model, n=config.grid)
        report = {
            'model': model.variant,
            'volume': {'min': float(volume), 'point': list(point), 'pass': bool(volume > 0)}
        }
        passed = passed and volume > 0
        orbits = []
        for orbit in closed_orbits(model):
            entry = orbit.to_dict()
            trace = float(np.trace(monodromy(model, orbit, settings=self.settings()).endpoint))
            entry['trace'] = trace
            if not orbit.expected_trace is None:
                error = abs(trace - orbit.expected_trace) / abs(orbit.expected_trace)
                entry['trace_error'] = error
                entry['pass'] = bool(error < config.trace_tol)
                passed = passed and entry['pass']
            orbits.append(entry)
        report['orbits'] = orbits
        if config.chords:
            chords, mu = self.detect_chords(model, config.K)
            report['chords'] = [dict(c.to_dict(), mu_tilde=mu[c.label]) for c in chords]
            doc = chords_to_dict(chords)
            doc['muTilde'] = mu
            self.write_json('chords.json', doc)
        report['passed'] = passed
        self.write_json('flow_report.json', report)
        summary = '%s: min volume %.3g, %d closed orbits, %s' % (
            model.variant, volume, len(orbits), 'pass' if passed else 'FAIL'
        )
        return report, EXIT_PASS if passed else EXIT_FAIL, summary

    # --------------------------------------------------------------------------
    # orbits
    # --------------------------------------------------------------------------

    def load_chord_document(self, filename):
        with open(filename, 'r') as f:
            obj = json.load(f)
        chords = [TransverseChord.from_dict(c) for c in obj.get('chords', [])]
        return chord_data(chords, obj.get('muTilde', dict()))

    def euler_report(self, records):
        return dict([
            (str(h), euler_characteristic(block_with_generator(records, h)))
            for h in homotopy_classes(records)
        ])

    def orbits(self):
        config = self.config
        if not config.composition_classes is None:
            L = config.composition_classes
            counts = dict([(str(l), len(compositions_up_to_cyclic(l))) for l in range(1, L + 1)])
            report = {'compositionClasses': counts}
            if config.euler:
                records = enumerate_orbits(composition_family(L), L + 0.5)
                report['euler'] = self.euler_report(records)
            self.write_json('composition_classes.json', report)
            summary = 'cyclic compositions up to %d: %s' % (L, ', '.join([str(counts[str(l)]) for l in range(1, L + 1)]))
            return report, EXIT_PASS, summary
        if not config.chords is None:
            data = self.load_chord_document(config.chords)
        elif config.from_flow:
            chords, mu = self.detect_chords(self.model(), config.K)
            data = chord_data(chords, mu)
        else:
            raise ConfigError('orbits requires --chords, --from-flow or --composition-classes')
        try:
            records = enumerate_orbits(data, config.K, tau=config.tau)
        except BoundaryError as ex:
            ex.details['suggested_K'] = config.K - BOUNDARY_SHIFT
            raise
        report = orbits_to_dict(records)
        status = EXIT_PASS
        if config.euler:
            report['euler'] = self.euler_report(records)
            if any([chi != 0 for chi in report['euler'].values()]):
                status = EXIT_FAIL
        if not config.out is None:
            write_orbits_csv(records, self.path('orbits.csv'))
        self.write_json('orbits.json', report)
        summary = '%d orbits with action < %g' % (len(records), config.K)
        return report, status, summary

    # --------------------------------------------------------------------------
    # diagram
    # --------------------------------------------------------------------------

    def input_diagram(self):
        config = self.config
        if not config.parallel is None:
            return parallel_diagram(config.parallel, base_sign=config.base_sign)
        if not config.diagram is None:
            return load_diagram(config.diagram)
        raise ConfigError('missing diagram: use --parallel N or --diagram FILE')

    def diagram(self):
        config = self.config
        action = config.action
        status = EXIT_PASS
        if action == 'enumerate':
            if config.n is None:
                raise ConfigError('missing number of chords: use --n N')
            diagrams = enumerate_diagrams(config.n, base_sign=config.base_sign)
            report = {'n': config.n, 'count': len(diagrams), 'diagrams': [d.to_dict() for d in diagrams]}
            summary = '%d diagrams with %d chords' % (len(diagrams), config.n)
        elif action == 'attach':
            d = self.input_diagram()
            if config.arc is None:
                raise ConfigError('missing arc: use --arc I,J')
            arc = ArcSpec.across_chords(d, config.arc[0], config.arc[1])
            result = attach_bypass(d, arc)
            if isinstance(result, Rejection):
                report = result.to_dict()
                status = EXIT_FAIL if config.strict else EXIT_PASS
                summary = 'attachment rejected: ' + result.reason
            else:
                report = {
                    'arc': arc.to_dict(),
                    'diagram': result.to_dict(),
                    'boundary_components': {
                        'before': d.boundary_components,
                        'after': result.boundary_components
                    }
                }
                summary = 'attached bypass, %d chords and %d boundary components left' % (
                    result.n, result.boundary_components
                )
        elif action == 'census':
            d = self.input_diagram()
            census = region_census(d)
            report = census.to_dict()
            report['bigons'] = census.bigons()
            summary = '%d regions, %d bigons' % (len(census.regions), census.bigons())
        elif action == 'check':
            result = check_C4_C5(self.input_diagram())
            report = result.to_dict()
            status = EXIT_PASS if result.passed else EXIT_FAIL
            summary = 'partition condition ' + ('holds' if result.passed else 'fails: ' + result.reason)
        elif action == 'ranks':
            if not config.positions is None:
                if config.parallel is None:
                    raise ConfigError('attachment positions require --parallel N')
                d = attach_sequence(config.parallel, config.positions, base_sign=config.base_sign)
                ranks = c5_torus_ranks(d)
                identity = block_identity_check(d)
                report = ranks.to_dict()
                report['identity'] = identity.to_dict()
                status = EXIT_PASS if identity.passed else EXIT_FAIL
            elif not config.parallel is None:
                ranks = parallel_torus_ranks(config.parallel)
                report = ranks.to_dict()
            else:
                ranks = c5_torus_ranks(self.input_diagram())
                report = ranks.to_dict()
            summary = 'n+ = %d, n- = %d' % (ranks.n_plus, ranks.n_minus)
        else:
            raise ConfigError('unknown diagram command: ' + str(action))
        self.write_json('diagram_' + action + '.json', report)
        return report, status, summary

    # --------------------------------------------------------------------------
    # horseshoe
    # --------------------------------------------------------------------------

    def synthetic_parameters(self):
        config = self.config
        return hs.SyntheticParameters(
            lam=config.lam,
            nu=config.nu,
            tau=config.tau,
            A=config.A,
            eta=config.eta,
            mu=config.mu,
            periods=config.periods,
            warp=config.warp
        )

    def horseshoe(self):
        config = self.config
        params = self.synthetic_parameters()
        if config.action == 'verify':
            if config.map is None:
                certificates = hs.certify_synthetic(params, sample_n=config.sample_n, workers=config.workers)
            else:
                section_map = hs.load_map_model(config.map)
                lam = section_map.lam if not section_map.lam is None else params.lam
                if config.role == 'bypass':
                    certificates = [
                        hs.verify_hyperbolic_bypass(section_map, lam, config.sample_n, config.workers),
                        hs.verify_dominated(section_map, (params.nu, params.tau, params.A, params.eta), config.sample_n, config.workers)
                    ]
                else:
                    certificates = [
                        hs.verify_k_hyperbolic(section_map, lam, config.sample_n, config.workers),
                        hs.verify_dominated(section_map, (params.mu, params.nu, params.tau), config.sample_n, config.workers)
                    ]
            for cert in certificates:
                self.write_json('certificate_' + cert.kind + '.json', cert.to_dict())
            report = {'certificates': [cert.to_dict() for cert in certificates]}
            passed = all([cert.passed for cert in certificates])
            if not config.stability is None:
                stability = hs.stability_check(
                    params, eps=config.stability, trials=config.trials, seed=config.seed, workers=config.workers
                )
                report['stability'] = stability.to_dict()
                passed = passed and stability.passed
            report['passed'] = passed
            failed = [cert.kind + '.' + c for cert in certificates for c in cert.failed]
            summary = 'certification ' + ('passed' if passed else 'FAILED: ' + ', '.join(failed))
            return report, EXIT_PASS if passed else EXIT_FAIL, summary
        elif config.action == 'orbits':
            if config.map is None:
                phi, psi = hs.synthetic_models(params)
            else:
                if config.bypass_map is None:
                    raise ConfigError('imported manifold map requires --bypass-map')
                phi = hs.load_map_model(config.bypass_map)
                psi = hs.load_map_model(config.map)
            try:
                points = hs.fixed_point_table(
                    phi,
                    psi,
                    config.K,
                    cones=(params.A, params.nu),
                    grid_n=config.grid_n,
                    seeds=config.seeds,
                    seed=config.seed,
                    workers=config.workers
                )
            except BoundaryError as ex:
                ex.details['suggested_K'] = config.K - BOUNDARY_SHIFT
                raise
            if not config.out is None:
                hs.write_fixed_points_csv(points, self.path('fixed_points.csv'))
            report = hs.fixed_points_to_dict(points)
            self.write_json('fixed_points.json', report)
            outside = [fp for fp in points if not fp.in_window]
            summary = '%d fixed points, %d outside of their period window' % (len(points), len(outside))
            return report, EXIT_FAIL if outside else EXIT_PASS, summary
        raise ConfigError('unknown horseshoe command: ' + str(config.action))


# ------------------------------------------------------------------------------
#
# Entry point
#
# ------------------------------------------------------------------------------

def _error(ex, stream):
    stream.write(json.dumps({'error': ex.to_dict()}, sort_keys=True) + '\n')


def main(argv=None, stdout=None, stderr=None, environ=None):
    """Run the command line tool.

    Returns
    -------
    int
        Exit status
    """
    stdout = stdout if not stdout is None else sys.stdout
    stderr = stderr if not stderr is None else sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as ex:
        return ex.code
    try:
        defaults = dict(COMMON_DEFAULTS)
        defaults.update(DEFAULTS[args.command])
        config = RunConfig.resolve(args, defaults, environ=environ)
    except ConfigError as ex:
        _error(ex, stderr)
        return EXIT_USAGE
    logging.basicConfig(
        stream=stderr,
        level=logging.DEBUG if config.verbose else logging.WARNING,
        format='%(levelname)s %(name)s: %(message)s'
    )
    try:
        report, status, summary = ReebCmdLine(config).eval()
    except (BoundaryError, ValueError) as ex:
        if not isinstance(ex, ReebError):
            ex = ConfigError(str(ex))
        _error(ex, stderr)
        return EXIT_USAGE
    except ReebError as ex:
        _error(ex, stderr)
        return EXIT_FAIL
    except IOError as ex:
        _error(ConfigError(str(ex)), stderr)
        return EXIT_USAGE
    stdout.write(json.dumps(report, indent=2, sort_keys=True) + '\n')
    stderr.write(summary + '\n')
    return status


if __name__ == '__main__':
    sys.exit(main())
