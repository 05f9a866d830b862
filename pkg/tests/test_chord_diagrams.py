import itertools
import math
import os
import shutil
import tempfile
import unittest

from reebcli.chord_diagrams import OVERTWISTED, ArcSpec, ChordDiagram, Rejection
from reebcli.chord_diagrams import attach_bypass, check_C4_C5, enumerate_diagrams
from reebcli.chord_diagrams import interval_sign, is_parallel, load_diagram, parallel_diagram
from reebcli.chord_diagrams import region_census, save_diagram


def crossing_free(pairs):
    for (a, b), (c, d) in itertools.combinations(pairs, 2):
        if (a < c < b < d) or (c < a < d < b):
            return False
    return True


def all_matchings(points):
    if len(points) == 0:
        yield []
        return
    first = points[0]
    for k in range(1, len(points)):
        rest = points[1:k] + points[k + 1:]
        for m in all_matchings(rest):
            yield [(first, points[k])] + m


def brute_force_count(n):
    """Perfect matchings of 2n points without crossing chords."""
    return len([m for m in all_matchings(list(range(2 * n))) if crossing_free(m)])


def catalan(n):
    return math.factorial(2 * n) // (math.factorial(n + 1) * math.factorial(n))


"""Diagram without a boundary partition: four chords cutting off four
bigons around a common region.
"""
SQUARE = [(0, 1), (2, 3), (4, 5), (6, 7)]


class TestChordDiagrams(unittest.TestCase):

    def setUp(self):
        """Parallel diagram with three chords."""
        self.parallel = parallel_diagram(3)
        self.tmp_dir = tempfile.mkdtemp()

    def tearDown(self):
        """Remove the scratch directory."""
        shutil.rmtree(self.tmp_dir)

    def test_invalid_diagrams(self):
        """Crossing chords and reused points are rejected."""
        with self.assertRaises(ValueError):
            ChordDiagram([(0, 2), (1, 3)])
        with self.assertRaises(ValueError):
            ChordDiagram([(0, 1), (1, 2)])
        with self.assertRaises(ValueError):
            ChordDiagram([(0, 1)], base_sign=0)
        with self.assertRaises(ValueError):
            parallel_diagram(0)

    def test_enumeration(self):
        """Diagram counts are Catalan numbers."""
        self.assertEqual(len(enumerate_diagrams(1)), 1)
        self.assertEqual(len(enumerate_diagrams(3)), 5)
        self.assertEqual(len(enumerate_diagrams(4)), 14)
        for n in range(1, 9):
            diagrams = enumerate_diagrams(n)
            self.assertEqual(len(diagrams), catalan(n))
            self.assertEqual(len(set(diagrams)), len(diagrams))
        for n in range(1, 6):
            self.assertEqual(brute_force_count(n), catalan(n))
        with self.assertRaises(ValueError):
            enumerate_diagrams(11)

    def test_attach_parallel(self):
        """Attachments on parallel diagrams give parallel diagrams."""
        for n in range(2, 8):
            d = parallel_diagram(n)
            result = attach_bypass(d, ArcSpec.across_chords(d, 1, 2))
            self.assertTrue(isinstance(result, ChordDiagram))
            self.assertEqual(result.n, n - 1)
            self.assertTrue(is_parallel(result))

    def test_attach_boundary_components(self):
        """Attachments join two longitudinal boundary curves."""
        for n in range(2, 8):
            d = parallel_diagram(n)
            self.assertEqual(d.boundary_components, 2 * n)
            result = attach_bypass(d, ArcSpec.across_chords(d, 1, 2))
            self.assertEqual(result.boundary_components, 2 * (n - 1))
            self.assertEqual(result.to_dict()['boundary_components'], 2 * (n - 1))
        rejection = attach_bypass(self.parallel, ArcSpec(2, 3))
        self.assertEqual(rejection.diagram.boundary_components, 6)
        with self.assertRaises(ValueError):
            ChordDiagram([(0, 1)], boundary_components=4)

    def test_attach_three_components(self):
        """Attaching across the middle chords of four parallel chords leaves
        three chords parallel to the boundary.
        """
        d = parallel_diagram(4)
        result = attach_bypass(d, ArcSpec.across_chords(d, 2, 3))
        self.assertEqual(result.n, 3)
        self.assertEqual(region_census(result, witness=()).bigons(), 3)

    def test_attach_rejection(self):
        """An arc meeting both ends of one chord closes a curve."""
        result = attach_bypass(self.parallel, ArcSpec(2, 3))
        self.assertTrue(isinstance(result, Rejection))
        self.assertEqual(result.reason, OVERTWISTED)
        with self.assertRaises(ValueError):
            attach_bypass(self.parallel, ArcSpec(0, 2))
        with self.assertRaises(ValueError):
            ArcSpec.across_chords(self.parallel, 1, 1)

    def test_attach_all(self):
        """Attachments give non-crossing diagrams with one chord less."""
        for d in enumerate_diagrams(5):
            for p in range(10):
                result = attach_bypass(d, ArcSpec(p, (p + 1) % 10))
                if isinstance(result, Rejection):
                    self.assertEqual(d.match[p], (p + 1) % 10)
                else:
                    self.assertEqual(result.n, 4)

    def test_census_parallel(self):
        """Regions of the parallel diagram alternate in sign."""
        census = region_census(self.parallel)
        self.assertEqual([r.sign for r in census.regions], [1, -1, 1, -1])
        self.assertEqual(census.chi_plus, 2)
        self.assertEqual(census.chi_minus, 2)
        self.assertEqual(census.bigons(), 2)
        self.assertEqual(census.bigons(sign=1, extremal=True), 1)
        self.assertEqual(census.bigons(sign=-1, extremal=True), 1)
        self.assertTrue(census.regions[0].is_bigon)
        self.assertTrue(census.regions[-1].is_bigon)

    def test_census_small(self):
        """Regions of diagrams with one and two chords."""
        census = region_census(parallel_diagram(1))
        self.assertEqual(len(census.regions), 2)
        self.assertEqual(census.bigons(extremal=True), 2)
        census = region_census(ChordDiagram([(0, 3), (1, 2)]))
        self.assertEqual([r.sign for r in census.regions], [1, -1, 1])
        self.assertEqual(census.bigons(), 2)

    def test_census_invariants(self):
        """Region counts and sign alternation across every chord."""
        for n in range(1, 7):
            for d in enumerate_diagrams(n):
                census = region_census(d, witness=())
                self.assertEqual(len(census.regions), n + 1)
                self.assertEqual(census.chi_plus + census.chi_minus, n + 1)
                m = 2 * n
                for a, b in d.chords:
                    self.assertEqual(interval_sign(d, a), -interval_sign(d, (a - 1) % m))
        census = region_census(parallel_diagram(3, base_sign=-1))
        self.assertEqual([r.sign for r in census.regions], [-1, 1, -1, 1])

    def test_census_marked_interval(self):
        """Moving the marked interval within its region keeps the census."""
        def summary(census):
            return (
                census.chi_plus,
                census.chi_minus,
                census.bigons(sign=1),
                census.bigons(sign=-1),
                sorted([(r.sign, len(r.intervals)) for r in census.regions])
            )
        for n in range(1, 6):
            m = 2 * n
            for d in enumerate_diagrams(n):
                census = region_census(d, witness=())
                marked = [r for r in census.regions if m - 1 in r.intervals][0]
                for i in marked.intervals:
                    moved = d.rotate((m - 1 - i) % m)
                    self.assertEqual(
                        summary(region_census(moved, witness=())),
                        summary(census),
                        msg=str((d, i))
                    )

    def test_partition_condition(self):
        """Parallel diagrams pass, the square diagram fails."""
        for n in range(1, 9):
            result = check_C4_C5(parallel_diagram(n))
            self.assertTrue(result.passed)
        nested = ChordDiagram([(0, 7), (1, 2), (3, 6), (4, 5)])
        self.assertTrue(check_C4_C5(nested).passed)
        result = check_C4_C5(ChordDiagram(SQUARE))
        self.assertFalse(result.passed)
        self.assertFalse(result.reason is None)
        self.assertFalse(check_C4_C5(ChordDiagram([])).passed)

    def test_rotation(self):
        """Rotated parallel diagrams stay parallel but differ rel boundary."""
        d = self.parallel.rotate(1)
        self.assertTrue(is_parallel(d))
        self.assertNotEqual(d, self.parallel)
        self.assertEqual(d.rotate(5), self.parallel)
        self.assertFalse(is_parallel(ChordDiagram(SQUARE)))

    def test_documents(self):
        """Diagrams are restored from their JSON documents."""
        filename = os.path.join(self.tmp_dir, 'diagram.json')
        d = ChordDiagram(SQUARE, base_sign=-1)
        save_diagram(d, filename)
        self.assertEqual(load_diagram(filename), d)
        with self.assertRaises(ValueError):
            ChordDiagram.from_dict({'n': 3, 'matching': [[0, 1]]})


if __name__ == '__main__':
    unittest.main()
