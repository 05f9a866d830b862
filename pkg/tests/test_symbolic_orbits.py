import csv
import itertools
import json
import os
import shutil
import tempfile
import unittest

from reebcli.errors import BoundaryError
from reebcli.reeb_flow import TransverseChord
from reebcli.symbolic_orbits import ChordDatum, block_with_generator, canonical_rotation
from reebcli.symbolic_orbits import chord_data, composition_family, compositions_up_to_cyclic
from reebcli.symbolic_orbits import enumerate_orbits, euler_characteristic, graded_block
from reebcli.symbolic_orbits import homotopy_classes, orbit_record, write_orbits_csv
from reebcli.symbolic_orbits import write_orbits_json


"""Cyclic compositions of l = 1, ..., 8."""
NECKLACE_COUNTS = [1, 2, 3, 5, 7, 13, 19, 35]


def brute_force_compositions(l):
    """Compositions of l from all subsets of cut points, identified up to
    rotation by their set of rotations.
    """
    classes = set()
    for cuts in itertools.product([False, True], repeat=l - 1):
        parts = []
        size = 1
        for cut in cuts:
            if cut:
                parts.append(size)
                size = 1
            else:
                size += 1
        parts.append(size)
        rotations = [tuple(parts[i:] + parts[:i]) for i in range(len(parts))]
        classes.add(frozenset(rotations))
    return classes


class TestSymbolicOrbits(unittest.TestCase):

    def setUp(self):
        """Single unit chord and a scratch directory."""
        self.unit = [ChordDatum('a', 1.0, 1, homotopy_weight=1)]
        self.tmp_dir = tempfile.mkdtemp()

    def tearDown(self):
        """Remove the scratch directory."""
        shutil.rmtree(self.tmp_dir)

    def class_records(self, l):
        records = enumerate_orbits(composition_family(l), l + 0.5)
        return [r for r in records if r.homotopy == l]

    def test_canonical_rotation(self):
        """Minimal rotation, primitive root and multiplicity."""
        word = canonical_rotation(['b', 'a', 'a'])
        self.assertEqual(word.letters, ('a', 'a', 'b'))
        self.assertTrue(word.is_primitive)
        word = canonical_rotation(['a', 'b', 'a', 'b'])
        self.assertEqual(word.letters, ('a', 'b', 'a', 'b'))
        self.assertEqual(word.root, ('a', 'b'))
        self.assertEqual(word.multiplicity, 2)
        word = canonical_rotation(['a'])
        self.assertEqual(word.multiplicity, 1)
        self.assertEqual(canonical_rotation('bca'), canonical_rotation('cab'))
        with self.assertRaises(ValueError):
            canonical_rotation([])

    def test_compositions(self):
        """Cyclic compositions against the brute-force oracle."""
        self.assertEqual(compositions_up_to_cyclic(1), [(1,)])
        self.assertEqual(
            compositions_up_to_cyclic(4),
            [(4,), (1, 3), (2, 2), (1, 1, 2), (1, 1, 1, 1)]
        )
        for l, count in enumerate(NECKLACE_COUNTS, 1):
            classes = compositions_up_to_cyclic(l)
            self.assertEqual(len(classes), count)
            self.assertEqual(len(brute_force_compositions(l)), count)
            for c in classes:
                self.assertEqual(sum(c), l)
        with self.assertRaises(ValueError):
            compositions_up_to_cyclic(0)

    def test_single_chord(self):
        """A unit chord yields one orbit per power."""
        records = enumerate_orbits(self.unit, 3.5)
        self.assertEqual([str(r.word) for r in records], ['a', 'a a', 'a a a'])
        for n in range(1, 8):
            self.assertEqual(len(enumerate_orbits(self.unit, n + 0.5)), n)

    def test_boundary(self):
        """K equal to a word action is rejected."""
        with self.assertRaises(BoundaryError):
            enumerate_orbits(self.unit, 3.0)
        with self.assertRaises(ValueError):
            enumerate_orbits(self.unit + self.unit, 2.5)

    def test_composition_classes(self):
        """Orbit classes of winding l are the cyclic compositions of l with
        degree equal to the number of parts.
        """
        for l, count in enumerate(NECKLACE_COUNTS, 1):
            records = self.class_records(l)
            self.assertEqual(len(records), count)
            for r in records:
                self.assertEqual(r.cz, len(r.word))
                self.assertEqual(r.parity == 'even', r.cz % 2 == 0)
                self.assertAlmostEqual(r.action, float(l))
        two = [c for c in composition_family(4) if c.label in ['c1', 'c2']]
        records = [r for r in enumerate_orbits(two, 4.2) if r.homotopy == 4]
        self.assertEqual(len(records), 3)

    def test_rotation_invariance(self):
        """Action, degree and homotopy are invariants of the cyclic class."""
        chords = dict([(c.label, c) for c in composition_family(3)])
        a = orbit_record(canonical_rotation(['c1', 'c2', 'c3']), chords, tau=0.1)
        b = orbit_record(canonical_rotation(['c3', 'c1', 'c2']), chords, tau=0.1)
        self.assertEqual(a.word, b.word)
        self.assertEqual((a.action, a.cz, a.homotopy, a.good), (b.action, b.cz, b.homotopy, b.good))
        self.assertAlmostEqual(a.period_window[0], 6.0 - 9 * 3 * 0.1)
        self.assertAlmostEqual(a.period_window[1], 6.0 + 9 * 3 * 0.1)

    def test_graded_blocks(self):
        """Double covers of odd orbits are bad and drop out of the block."""
        self.assertEqual(graded_block(self.class_records(3), 3), {1: 1, 2: 1, 3: 1})
        self.assertEqual(graded_block(self.class_records(2), 2), {1: 1, 2: 0})
        self.assertEqual(graded_block(self.class_records(2), 2, include_bad=True), {1: 1, 2: 1})
        self.assertEqual(graded_block([], 1), dict())
        records = enumerate_orbits(composition_family(3), 3.5)
        self.assertEqual(homotopy_classes(records), [1, 2, 3])

    def test_euler_characteristic(self):
        """Blocks with the bypass generator have Euler characteristic zero."""
        self.assertEqual(euler_characteristic(block_with_generator(self.class_records(1), 1)), 0)
        for l in range(1, 9):
            block = block_with_generator(self.class_records(l), l)
            self.assertEqual(euler_characteristic(block), 0)

    def test_chord_data(self):
        """Chord alphabet from detected chords and their indices."""
        chord = TransverseChord((0.1, 1.0, 0.0), (0.2, 1.0, 6.28), 6.3, 1, 0.5, 'c1')
        data = chord_data([chord], {'c1': 1})
        self.assertEqual(data[0].period, 6.3)
        self.assertEqual(data[0].homotopy_weight, 1)
        with self.assertRaises(ValueError):
            chord_data([chord], dict())
        with self.assertRaises(ValueError):
            ChordDatum('x', 0.0, 1)

    def test_orbit_tables(self):
        """Orbit tables as CSV and JSON."""
        records = enumerate_orbits(composition_family(3), 3.5)
        csv_file = os.path.join(self.tmp_dir, 'orbits.csv')
        json_file = os.path.join(self.tmp_dir, 'orbits.json')
        write_orbits_csv(records, csv_file)
        write_orbits_json(records, json_file)
        with open(csv_file, 'r', newline='') as f:
            rows = list(csv.DictReader(f))
        self.assertEqual(len(rows), len(records))
        self.assertEqual(rows[0]['word'], 'c1')
        with open(json_file, 'r') as f:
            obj = json.load(f)
        self.assertEqual(len(obj['orbits']), len(records))


if __name__ == '__main__':
    unittest.main()
