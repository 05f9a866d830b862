import csv
import json
import math
import os
import shutil
import tempfile
import unittest

import numpy as np

from reebcli.errors import HypothesisError, ParameterError, PreconditionError
from reebcli.horseshoe import CONE_IMAGES, DRIFT, FIBRE_CONES, Q_CONTAINMENT, RECTANGLE
from reebcli.horseshoe import RETURN_TIME, STRIP_DRIFT, VERTICAL_STRETCH
from reebcli.horseshoe import Cone, Rect, SectionMapModel, SyntheticParameters
from reebcli.horseshoe import affine_branch, certify_synthetic, compose_word_map
from reebcli.horseshoe import fixed_point_table, fixed_points_to_dict, load_map_model
from reebcli.horseshoe import q_lambda_escape, stability_check, synthetic_bypass_map
from reebcli.horseshoe import synthetic_models, unique_fixed_point, verify_dominated
from reebcli.horseshoe import verify_hyperbolic_bypass, verify_k_hyperbolic
from reebcli.horseshoe import write_fixed_points_csv
from reebcli.model_geometry import Z_MAX
from reebcli.symbolic_orbits import canonical_rotation


LAMBDA = 0.3


def affine_pair(stretch):
    """Bypass and manifold branches whose composite is
    (x, z) -> (0.5 + (x - 0.5) / stretch, 0.5 + stretch (z - 0.5)).
    """
    phi = affine_branch(
        'phi_a',
        RECTANGLE,
        Rect.axis_aligned(0.3, 0.7, 0.4, 0.6),
        [[0.0, stretch], [1.0, 0.0]],
        [0.5 - 0.5 * stretch, 0.0]
    )
    psi = affine_branch(
        'a',
        RECTANGLE,
        Rect.axis_aligned(0.5 - 0.1 * stretch, 0.5 + 0.1 * stretch, 0.3, 0.7),
        [[0.0, 1.0 / stretch], [1.0, 0.0]],
        [0.5 - 0.5 / stretch, 0.0],
        period=1.0,
        return_time=1.0
    )
    return SectionMapModel([phi], name='phi'), SectionMapModel([psi], name='psi')


def swap_branch(sigma, stretching):
    """Branch (x, z) -> (c + z / sigma, d + sigma x) if stretching, else
    (c + sigma z, d + x / sigma).
    """
    if stretching:
        matrix = [[0.0, 1.0 / sigma], [sigma, 0.0]]
    else:
        matrix = [[0.0, sigma], [1.0 / sigma, 0.0]]
    return SectionMapModel([
        affine_branch(
            'a',
            RECTANGLE,
            Rect.axis_aligned(0.4, 0.6, -0.05, 0.05),
            matrix,
            [0.5, -2.5],
            period=2.0,
            return_time=2.0
        )
    ])


class TestHorseshoe(unittest.TestCase):

    def setUp(self):
        """Synthetic bypass and manifold maps with default constants."""
        self.params = SyntheticParameters()
        self.phi, self.psi = synthetic_models(self.params)
        self.tmp_dir = tempfile.mkdtemp()

    def tearDown(self):
        """Remove the scratch directory."""
        shutil.rmtree(self.tmp_dir)

    def test_synthetic_certificates(self):
        """Synthetic maps pass their own certificates."""
        certs = certify_synthetic(self.params, sample_n=16)
        self.assertEqual(len(certs), 4)
        for cert in certs:
            self.assertTrue(cert.passed, msg=cert.kind + ' ' + str(cert.failed))
            for margin in cert.conditions.values():
                self.assertTrue(margin is None or margin > 0)
        self.assertEqual(len(self.phi.branches_of(DRIFT)), 3)
        self.assertEqual(len(self.phi.branches_of(RECTANGLE)), 4)
        self.assertEqual(self.psi.letters, ['a', 'b'])

    def test_synthetic_parameters(self):
        """Infeasible constants raise ParameterError."""
        with self.assertRaises(ParameterError):
            synthetic_bypass_map(eta=2.0)
        with self.assertRaises(ParameterError):
            synthetic_bypass_map(A=0.1, nu=0.2)
        with self.assertRaises(ParameterError):
            synthetic_bypass_map(lam=0.5)
        with self.assertRaises(ParameterError):
            certify_synthetic(SyntheticParameters(eta=2.0))
        with self.assertRaises(ParameterError):
            synthetic_models(SyntheticParameters(periods=(1.0, 1.3, 1.7)))

    def test_vertical_segments(self):
        """Bypass branches map vertical segments to curves with tangents in
        the horizontal cone.
        """
        branch = self.phi.branch('phi_00')
        cone = Cone.horizontal(self.params.nu)
        for p in branch.domain.grid(8):
            self.assertTrue(cone.contains(np.dot(branch.jacobian(p), [0.0, 1.0])))

    def test_k_hyperbolic_from_document(self):
        """One fibre reversing branch between rectangles of R_lambda."""
        doc = {
            'name': 'single',
            'lambda': LAMBDA,
            'branches': [{
                'label': 'a',
                'kind': RECTANGLE,
                'domain': {'box': [0.4, 1.1, -0.05, 0.05]},
                'matrix': [[0.0, 7.0], [-1.0 / 7.0, 0.0]],
                'offset': [2.35, 0.75 / 7.0],
                'period': 2.0,
                'return_time': 2.0
            }]
        }
        filename = os.path.join(self.tmp_dir, 'map.json')
        with open(filename, 'w') as f:
            json.dump(doc, f)
        section_map = load_map_model(filename)
        cert = verify_k_hyperbolic(section_map, LAMBDA, sample_n=8)
        self.assertTrue(cert.passed, msg=str(cert.failed))
        self.assertTrue(cert.conditions[Q_CONTAINMENT] is None)
        filename = os.path.join(self.tmp_dir, 'certificate.json')
        cert.write_json(filename)
        with open(filename, 'r') as f:
            obj = json.load(f)
        self.assertTrue(obj['passed'])
        self.assertTrue(obj['conditions'][STRIP_DRIFT]['pass'])

    def test_strip_jump(self):
        """A drift branch moving points to another strip fails."""
        branch = affine_branch(
            'psi0_0',
            DRIFT,
            Rect.axis_aligned(-0.1, 0.1, -0.05, 0.05),
            np.identity(2),
            [math.pi, 0.01],
            strip=0
        )
        cert = verify_k_hyperbolic(SectionMapModel([branch], lam=LAMBDA), LAMBDA, sample_n=8)
        self.assertFalse(cert.passed)
        self.assertEqual(cert.failed, [STRIP_DRIFT])
        self.assertTrue(cert.holds(Q_CONTAINMENT))

    def test_invalid_maps(self):
        """Invalid map models and verification arguments."""
        rect = Rect.axis_aligned(0.4, 0.6, -0.05, 0.05)
        a = affine_branch('a', RECTANGLE, rect, np.identity(2), [0.0, 0.0])
        b = affine_branch('b', RECTANGLE, Rect.axis_aligned(0.5, 0.7, -0.05, 0.05), np.identity(2), [0.0, 0.0])
        with self.assertRaises(ValueError):
            SectionMapModel([a, b])
        with self.assertRaises(ValueError):
            SectionMapModel([a, a])
        with self.assertRaises(ValueError):
            affine_branch('c', RECTANGLE, rect, [[1.0, 2.0], [2.0, 4.0]], [0.0, 0.0])
        with self.assertRaises(ParameterError):
            verify_k_hyperbolic(self.psi, math.pi / 8.0)
        with self.assertRaises(ValueError):
            verify_hyperbolic_bypass(self.phi, LAMBDA, sample_n=1)
        with self.assertRaises(ValueError):
            verify_dominated(self.phi, (0.1, 0.2))

    def test_dominated_affine(self):
        """Cone images of affine hyperbolic branches."""
        cert = verify_dominated(swap_branch(5.0, True), (0.3, 0.3, 1.0), sample_n=8)
        self.assertTrue(cert.passed, msg=str(cert.failed))
        cert = verify_dominated(swap_branch(1.01, False), (0.3, 0.3, 1.0), sample_n=8)
        self.assertEqual(cert.failed, [CONE_IMAGES])
        self.assertTrue(cert.holds(FIBRE_CONES))
        # Constant return time equal to the chord period
        for tau in [1e-3, 1.0]:
            cert = verify_dominated(swap_branch(5.0, True), (0.3, 0.3, tau), sample_n=4)
            self.assertTrue(cert.holds(RETURN_TIME))

    def test_affine_fixed_point(self):
        """Hyperbolic affine composite with fixed point (0.5, 0.5)."""
        phi, psi = affine_pair(3.0)
        F = compose_word_map(phi, psi, ['a'])
        self.assertEqual(F.itinerary, ['phi_a', 'a'])
        self.assertTrue(np.allclose(F.evaluate((0.6, 0.45)), (0.5 + 0.1 / 3.0, 0.35)))
        fp = unique_fixed_point(F, grid_n=8, seeds=20)
        self.assertAlmostEqual(fp.point.x, 0.5, places=9)
        self.assertAlmostEqual(fp.point.z, 0.5, places=9)
        self.assertTrue(fp.certificate.passed)
        phi, psi = affine_pair(1.5)
        F = compose_word_map(phi, psi, ['a'])
        with self.assertRaises(HypothesisError) as cm:
            unique_fixed_point(F, grid_n=8)
        self.assertTrue(VERTICAL_STRETCH in cm.exception.message)
        with self.assertRaises(ParameterError):
            unique_fixed_point(F, expansion=2.0)

    def test_composite_maps(self):
        """Bypass branches between consecutive letters."""
        self.assertEqual(compose_word_map(self.phi, self.psi, 'a').itinerary, ['phi_00', 'a'])
        F = compose_word_map(self.phi, self.psi, 'ab')
        self.assertEqual(F.itinerary, ['phi_10', 'a', 'phi_01', 'b'])
        self.assertFalse(F.is_empty())
        F = compose_word_map(self.phi, self.psi, canonical_rotation(['b', 'b']))
        self.assertEqual(F.itinerary, ['phi_11', 'b', 'phi_11', 'b'])
        # Empty word is the identity on R_lambda
        F = compose_word_map(self.phi, self.psi, [])
        p = (math.pi / 4.0, 0.05)
        self.assertTrue(np.allclose(F.evaluate(p), p))
        with self.assertRaises(PreconditionError):
            F.evaluate((0.0, 0.0))
        with self.assertRaises(PreconditionError):
            unique_fixed_point(F)
        with self.assertRaises(ValueError):
            compose_word_map(self.phi, self.psi, ['c'])
        with self.assertRaises(ValueError):
            compose_word_map(self.phi, self.psi, ['psi0_0'])

    def test_synthetic_fixed_point(self):
        """Fixed point of the word a is unique and found from random seeds."""
        F = compose_word_map(self.phi, self.psi, 'a')
        fp = unique_fixed_point(F, grid_n=8, seeds=100, seed=3)
        self.assertTrue(F.contains(fp.point))
        self.assertTrue(np.allclose(F.evaluate(fp.point), fp.point, atol=1e-9))
        T = self.psi.branch('a').period
        self.assertTrue(T - 9.0 * self.params.tau <= fp.period <= T + 9.0 * self.params.tau)

    def test_rotations(self):
        """Rotated words have fixed points on the same orbit."""
        ab = unique_fixed_point(compose_word_map(self.phi, self.psi, 'ab'), grid_n=8)
        ba = unique_fixed_point(compose_word_map(self.phi, self.psi, 'ba'), grid_n=8)
        self.assertTrue(np.allclose(ba.orbit[0], ab.orbit[2], atol=1e-9))
        self.assertTrue(np.allclose(ab.orbit[0], ba.orbit[2], atol=1e-9))
        self.assertAlmostEqual(ab.period, ba.period, places=9)

    def test_fixed_point_table(self):
        """One fixed point per cyclic word, distinct for primitive words."""
        points = fixed_point_table(self.phi, self.psi, 3.5, grid_n=6)
        words = [' '.join(fp.word) for fp in points]
        self.assertEqual(sorted(words), sorted(['a', 'b', 'a a', 'a b', 'b b', 'a a a', 'a a b']))
        for fp in points:
            self.assertTrue(fp.in_window)
            self.assertEqual(fp.cz, len(fp.word))
        primitive = [fp for fp in points if canonical_rotation(fp.word).is_primitive]
        for i, p in enumerate(primitive):
            for q in primitive[i + 1:]:
                self.assertTrue(np.max(np.abs(np.array(p.point) - np.array(q.point))) > 1e-6)
        # Multiple covers share the fixed point of their root
        by_word = dict([(' '.join(fp.word), fp) for fp in points])
        self.assertTrue(np.allclose(by_word['a a'].point, by_word['a'].point, atol=1e-9))
        filename = os.path.join(self.tmp_dir, 'fixed_points.csv')
        write_fixed_points_csv(points, filename)
        with open(filename, 'r', newline='') as f:
            rows = list(csv.DictReader(f))
        self.assertEqual(len(rows), len(points))
        self.assertEqual(sorted(rows[0].keys()), sorted(['word', 'x', 'z', 'period', 'cz_index']))
        self.assertEqual(len(fixed_points_to_dict(points)['fixedPoints']), len(points))

    def test_escape(self):
        """Drift iterates of random points of Q_lambda leave monotonically."""
        rng = np.random.default_rng(5)
        half = 0.5 * LAMBDA * 0.99
        for i in range(1000):
            k = int(rng.integers(0, 3))
            p = (k * math.pi + rng.uniform(-half, half), rng.uniform(-0.99, 0.99) * Z_MAX)
            report = q_lambda_escape(self.phi, self.psi, p)
            self.assertTrue(report.monotone, msg=str(report.violations))
            self.assertFalse(report.exit_iteration is None)
            self.assertEqual(report.strip, k)
        report = q_lambda_escape(self.phi, self.psi, (math.pi, 0.01))
        self.assertEqual(report.scheme, 'backward')
        self.assertTrue(np.all(np.diff(report.heights) > 0))
        self.assertTrue(len(report.heights) > 1)
        report = q_lambda_escape(self.phi, self.psi, (0.0, -0.01))
        self.assertTrue(np.all(np.diff(report.heights) < 0))
        with self.assertRaises(PreconditionError):
            q_lambda_escape(self.phi, self.psi, (math.pi / 4.0, 0.0))

    def test_stability(self):
        """Small perturbations of the construction keep the certificates."""
        report = stability_check(eps=0.01, trials=3, sample_n=8)
        self.assertTrue(report.passed, msg=str(report.failures))
        self.assertEqual(report.to_dict()['trials'], 3)
        with self.assertRaises(ParameterError):
            stability_check(eps=-1.0)

    def test_chord_return_map(self):
        """Return map near the chords has one branch per chord with return
        times close to the chord periods.
        """
        from reebcli.horseshoe import chord_return_map
        from reebcli.model_geometry import default_model
        from reebcli.reeb_flow import FlowSettings, bypass_arc, find_chords
        model = default_model('alpha_b')
        settings = FlowSettings()
        chords = find_chords(
            model, bypass_arc(), 2.0 * math.pi * 2.5, grid_n=64, settings=settings, stabilize=False
        )
        section_map = chord_return_map(model, chords, settings=settings)
        self.assertEqual(len(section_map.letters), len(chords))
        for chord, branch in zip(chords, section_map.branches):
            t = branch.time((chord.start.x, chord.start.z))
            self.assertTrue(abs(t - chord.period) < 1e-6 * chord.period)


if __name__ == '__main__':
    unittest.main()
