import math
import os
import shutil
import tempfile
import unittest

import numpy as np

from reebcli.cz_index import mu_tilde
from reebcli.errors import DomainError
from reebcli.model_geometry import OVERTWISTED, TRIVIAL
from reebcli.model_geometry import closed_orbits, d_alpha, default_model, evaluate_form
from reebcli.model_geometry import reeb_field
from reebcli.reeb_flow import PLANE_Y, Escape, FlowSettings, Section
from reebcli.reeb_flow import bypass_arc, chord_linearization, contact_frame
from reebcli.reeb_flow import find_chords, first_return, integrate, linearized_flow
from reebcli.reeb_flow import load_chords, monodromy, write_chords_json


"""Shooting samples per arc strand of the chord searches (single pass)."""
CHORD_GRID = 64


class TestReebFlow(unittest.TestCase):

    def setUp(self):
        """Standard and perturbed models with default settings."""
        self.standard = default_model('standard')
        self.alpha_p = default_model('alpha_p')
        self.settings = FlowSettings()
        self.tmp_dir = tempfile.mkdtemp()

    def tearDown(self):
        """Remove the scratch directory."""
        shutil.rmtree(self.tmp_dir)

    def test_settings(self):
        """Invalid settings raise ValueError."""
        with self.assertRaises(ValueError):
            FlowSettings(abs_tol=0)
        with self.assertRaises(ValueError):
            FlowSettings(min_step=1.0, max_step=0.5)
        settings = self.settings.copy(max_time=3.0)
        self.assertEqual(settings.max_time, 3.0)
        self.assertEqual(settings.abs_tol, self.settings.abs_tol)

    def test_integrate_straight_lines(self):
        """The standard flow moves along lines of slope cot(x)."""
        traj = integrate(self.standard, (math.pi / 2.0, -0.5, 0.0), 1.0, self.settings)
        self.assertTrue(np.allclose(traj.end, (math.pi / 2.0, 0.5, 0.0)))
        self.assertFalse(traj.is_escape)
        traj = integrate(self.standard, (3.0 * math.pi / 4.0, -0.5, 0.0), 5.0, self.settings)
        self.assertEqual(traj.exit_face, 'y_max')
        self.assertAlmostEqual(traj.end.y, 1.0, places=8)
        self.assertAlmostEqual(traj.end.z, -1.5, places=8)
        with self.assertRaises(DomainError):
            integrate(self.standard, (0.0, 2.0, 0.0), 1.0)

    def test_closed_orbit(self):
        """x = y = 0 is a closed orbit of period 2 pi of the perturbed flow."""
        traj = integrate(self.alpha_p, (0.0, 0.0, 0.0), 2.0 * math.pi, self.settings)
        self.assertTrue(np.allclose(traj.end, (0.0, 0.0, 2.0 * math.pi)))

    def test_invariants_along_trajectories(self):
        """alpha(R) = 1 along trajectories and the flow is reversible."""
        p0 = np.array([0.1, 0.2, 0.0])
        traj = integrate(self.alpha_p, p0, 2.0, self.settings)
        self.assertFalse(traj.is_escape)
        for p in traj.points:
            value = np.dot(evaluate_form(self.alpha_p, p), reeb_field(self.alpha_p, p))
            self.assertAlmostEqual(value, 1.0, places=7)
        back = integrate(self.alpha_p, traj.end, -2.0, self.settings)
        self.assertTrue(np.max(np.abs(back.points[-1] - p0)) < 1e-8)

    def test_first_return(self):
        """First returns and escapes of the standard flow."""
        section = Section(PLANE_Y, 1.0)
        p, period = first_return(self.standard, (math.pi / 2.0, 0.0, 0.0), section, self.settings)
        self.assertTrue(np.allclose(p, (math.pi / 2.0, 1.0, 0.0)))
        self.assertAlmostEqual(period, 1.0)
        result = first_return(self.standard, (math.pi / 4.0, 0.9, 0.0), Section(PLANE_Y, 0.0), self.settings)
        self.assertTrue(isinstance(result, Escape))
        self.assertEqual(result.face, 'y_max')
        # Backward flow reaches the section y = 0
        p, period = first_return(
            self.standard, (math.pi / 2.0, 0.5, 0.0), Section(PLANE_Y, 0.0), self.settings,
            backward=True
        )
        self.assertAlmostEqual(p.y, 0.0)
        self.assertAlmostEqual(period, 0.5)

    def test_contact_frame(self):
        """Contact frame spans ker(alpha) with d alpha(e1, e2) = 1."""
        for p in [(0.0, 0.0, 0.0), (0.3, 0.5, 1.0), (-0.6, -0.8, 2.0)]:
            e1, e2 = contact_frame(self.alpha_p, p)
            form = evaluate_form(self.alpha_p, p)
            self.assertAlmostEqual(np.dot(form, e1), 0.0)
            self.assertAlmostEqual(np.dot(form, e2), 0.0)
            self.assertAlmostEqual(d_alpha(self.alpha_p, p, e1, e2), 1.0)

    def test_linearized_flow(self):
        """Linearized flow starts at the identity and is a shear for the
        standard form.
        """
        path = linearized_flow(self.alpha_p, (0.0, 0.0, 0.0), 0.0, settings=self.settings)
        self.assertTrue(np.allclose(path.endpoint, np.identity(2)))
        path = linearized_flow(self.standard, (math.pi / 3.0, -0.5, 0.0), 1.0, settings=self.settings)
        self.assertTrue(np.allclose(path.matrices[0], np.identity(2)))
        self.assertAlmostEqual(np.trace(path.endpoint), 2.0, places=6)

    def test_monodromy_trace(self):
        """Return map of Gamma_0 x {0} is hyperbolic with the predicted trace."""
        orbit = closed_orbits(self.alpha_p)[0]
        path = monodromy(self.alpha_p, orbit, self.settings)
        trace = np.trace(path.endpoint)
        self.assertTrue(trace > 2)
        self.assertTrue(abs(trace - orbit.expected_trace) / orbit.expected_trace < 1e-3)

    def test_chord_documents(self):
        """Chord lists are restored from their JSON documents."""
        self.assertEqual(load_chords(self.write_chords([])), [])

    def write_chords(self, chords):
        filename = os.path.join(self.tmp_dir, 'chords.json')
        write_chords_json(chords, filename)
        return filename

    def test_find_chords_invalid(self):
        """Invalid chord search parameters raise ValueError."""
        model = default_model('alpha_b')
        with self.assertRaises(ValueError):
            find_chords(model, bypass_arc(), -1.0)
        with self.assertRaises(ValueError):
            find_chords(model, bypass_arc(), 10.0, grid_n=1)
        with self.assertRaises(ValueError):
            bypass_arc('unknown')

    def alpha_b_chords(self, K):
        """Chords of the three component bypass arc with period below K."""
        model = default_model('alpha_b')
        return find_chords(model, bypass_arc(), K, grid_n=CHORD_GRID, settings=self.settings, stabilize=False)

    def test_find_chords_without_returns(self):
        """Arcs of the standard model have no chords; the grid refinement
        stops once the empty count repeats.
        """
        self.assertEqual(find_chords(self.standard, bypass_arc(), 10.0, grid_n=8), [])

    def test_chord_census(self):
        """One chord per winding class, each with index one."""
        model = default_model('alpha_b')
        chords = self.alpha_b_chords(2.0 * math.pi * 5.5)
        windings = [c.winding for c in chords]
        self.assertEqual(windings, list(range(1, len(chords) + 1)))
        self.assertTrue(len(chords) >= 5)
        for chord in chords:
            self.assertTrue(chord.transversality_margin > 0)
            self.assertEqual(mu_tilde(chord_linearization(model, chord, self.settings)), 1)
        copy = load_chords(self.write_chords(chords))
        self.assertEqual([c.label for c in copy], [c.label for c in chords])

    def test_bypass_configurations(self):
        """Trivial and overtwisted bypasses add the chords d_k."""
        K = 2.0 * math.pi * 2.5
        for configuration in [TRIVIAL, OVERTWISTED]:
            model = default_model('alpha_b', configuration=configuration)
            chords = find_chords(
                model, bypass_arc(configuration), K, grid_n=CHORD_GRID, settings=self.settings, stabilize=False
            )
            d_chords = [c for c in chords if c.label.startswith('d')]
            self.assertTrue(len(d_chords) > 0)
            for chord in d_chords:
                self.assertAlmostEqual(chord.end.z % (2.0 * math.pi), 1.0, places=6)
                if chord.winding > 0:
                    self.assertEqual(
                        mu_tilde(chord_linearization(model, chord, self.settings)), 0
                    )
            if configuration == OVERTWISTED:
                self.assertTrue(0 in [c.winding for c in d_chords])

    def test_chord_symmetry(self):
        """Shooting backward from the end of a chord finds its start."""
        model = default_model('alpha_b')
        section = Section(PLANE_Y, model.box.y_surface, orientation=-1)
        chords = self.alpha_b_chords(2.0 * math.pi * 3.5)
        self.assertTrue(len(chords) > 0)
        for chord in chords:
            start, period = first_return(model, chord.end, section, settings=self.settings, backward=True)
            self.assertTrue(abs(period - chord.period) < 1e-6, msg=chord.label)
            self.assertTrue(np.allclose(start, chord.start, atol=1e-6), msg=chord.label)

    def test_arc_image_monotone(self):
        """Near a chord start the flowed arc is an x-monotone graph
        transverse to the arc.
        """
        model = default_model('alpha_b')
        y = model.box.y_surface
        section = Section(PLANE_Y, y, orientation=1)
        chord = self.alpha_b_chords(2.0 * math.pi * 1.5)[0]
        settings = self.settings.copy(max_time=2.0 * chord.period)
        points = []
        for ds in np.linspace(-1e-5, 1e-5, 5):
            p, _ = first_return(model, (chord.start.x + ds, y, chord.start.z), section, settings=settings)
            points.append(p)
        dx = np.diff([p.x for p in points])
        self.assertTrue(np.all(dx > 0) or np.all(dx < 0))
        h = 1e-6
        p_plus, _ = first_return(model, (chord.start.x + h, y, chord.start.z), section, settings=settings)
        p_minus, _ = first_return(model, (chord.start.x - h, y, chord.start.z), section, settings=settings)
        dz = p_plus.z - p_minus.z
        margin = abs(dz) / math.hypot(p_plus.x - p_minus.x, dz)
        self.assertTrue(chord.transversality_margin > 0)
        self.assertAlmostEqual(margin, chord.transversality_margin, places=3)


if __name__ == '__main__':
    unittest.main()
