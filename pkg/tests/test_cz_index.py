import math
import os
import shutil
import tempfile
import unittest

import numpy as np
from scipy.optimize import brentq

from reebcli.cz_index import IMAGE, POLAR, SymplecticPath
from reebcli.cz_index import angle_localized_index, classify, cone_hyperbolic
from reebcli.cz_index import conley_zehnder, is_good, mu_tilde, rotation_angle
from reebcli.cz_index import word_index, OrbitParity
from reebcli.errors import DegeneracyError, PreconditionError, ResolutionError


J = np.array([[0.0, -1.0], [1.0, 0.0]])


def rotation(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


class RotationShearPath(object):
    """Path t -> R(omega t) exp(t H) with H symmetric and traceless."""
    def __init__(self, omega, a, b):
        self.omega = omega
        self.H = np.array([[a, b], [b, -a]])
        self.h = math.sqrt(a * a + b * b)

    def __call__(self, t):
        if self.h == 0:
            E = np.identity(2)
        else:
            E = math.cosh(self.h * t) * np.identity(2) + math.sinh(self.h * t) / self.h * self.H
        return np.dot(rotation(self.omega * t), E)

    def trace(self, t):
        return 2.0 * np.cos(self.omega * t) * np.cosh(self.h * t)

    def generator(self, t):
        """Symmetric S(t) with dM/dt = J S M."""
        R = rotation(self.omega * t)
        return self.omega * np.identity(2) - np.dot(J, np.dot(R, np.dot(self.H, R.T)))


def signature(S):
    w = np.linalg.eigvalsh(S)
    return int(np.sum(w > 0) - np.sum(w < 0))


def crossings(path, n, t0):
    times = np.linspace(t0, 1.0, n)
    g = path.trace(times) - 2.0
    return [(times[i], times[i + 1]) for i in range(n - 1) if g[i] * g[i + 1] < 0]


def crossing_oracle(path):
    """Index as the signed count of crossings with the eigenvalue-one locus,
    half of the signature at t = 0. None if the path is not generic enough.
    """
    S0 = path.generator(0.0)
    if abs(np.linalg.det(S0)) < 0.5:
        return None
    coarse = crossings(path, 2001, 0.01)
    if len(coarse) != len(crossings(path, 8001, 0.01)):
        return None
    total = signature(S0) // 2
    for lo, hi in coarse:
        t = brentq(lambda s: path.trace(s) - 2.0, lo, hi, xtol=1e-13)
        _, sv, Vt = np.linalg.svd(path(t) - np.identity(2))
        v = Vt[-1]
        form = float(np.dot(v, np.dot(path.generator(t), v)))
        if abs(form) < 1e-3:
            return None
        total += 1 if form > 0 else -1
    return total


class TestConleyZehnder(unittest.TestCase):

    def setUp(self):
        """Random generator and a scratch directory."""
        self.rng = np.random.RandomState(7)
        self.tmp_dir = tempfile.mkdtemp()

    def tearDown(self):
        """Remove the scratch directory."""
        shutil.rmtree(self.tmp_dir)

    def random_path(self):
        omega = self.rng.uniform(-8.0, 8.0)
        a, b = self.rng.uniform(-2.0, 2.0, size=2)
        path = RotationShearPath(omega, a, b)
        if abs(np.trace(path(1.0)) - 2.0) < 1e-3:
            return None, None
        return path, SymplecticPath.from_function(path, 1.0, 501)

    def test_rotation_angles(self):
        """Angle variants on rotation, hyperbolic and shear paths."""
        path = SymplecticPath.from_function(lambda t: rotation(t * math.pi / 3.0), 1.0, 50)
        self.assertAlmostEqual(rotation_angle(path, POLAR)[-1], math.pi / 3.0)
        self.assertAlmostEqual(rotation_angle(path, IMAGE)[-1], math.pi / 3.0)
        path = SymplecticPath.from_function(
            lambda t: np.diag([math.exp(t), math.exp(-t)]), 1.0, 50
        )
        self.assertTrue(np.allclose(rotation_angle(path, POLAR), 0.0))
        path = SymplecticPath.from_function(lambda t: np.array([[1.0, 0.0], [t, 1.0]]), 1.0, 50)
        self.assertAlmostEqual(rotation_angle(path, IMAGE)[-1], math.pi / 4.0)

    def test_coarse_sampling(self):
        """Angle jumps of more than pi/2 between samples are rejected."""
        path = SymplecticPath.from_matrices([np.identity(2), rotation(2.0)])
        with self.assertRaises(ResolutionError):
            rotation_angle(path)

    def test_invalid_paths(self):
        """Non-symplectic samples and wrong start points are rejected."""
        with self.assertRaises(ValueError):
            SymplecticPath.from_matrices([np.identity(2), 2.0 * np.identity(2)])
        with self.assertRaises(ValueError):
            SymplecticPath.from_matrices([rotation(0.5), rotation(0.6)])

    def test_simple_indices(self):
        """Index of rotation and hyperbolic paths."""
        eps = 0.05
        path = SymplecticPath.from_function(lambda t: rotation(math.pi * t * (1 + eps)), 1.0, 100)
        self.assertEqual(conley_zehnder(path), 1)
        a = math.log(2.0)
        path = SymplecticPath.from_function(
            lambda t: np.diag([math.exp(a * t), math.exp(-a * t)]), 1.0, 100
        )
        self.assertEqual(conley_zehnder(path), 0)
        path = SymplecticPath.from_function(lambda t: rotation(1.5 * math.pi * t), 1.0, 100)
        self.assertEqual(conley_zehnder(path), 1)
        path = SymplecticPath.from_function(lambda t: rotation(2.5 * math.pi * t), 1.0, 100)
        self.assertEqual(conley_zehnder(path), 3)

    def test_degenerate_endpoint(self):
        """Endpoints with eigenvalue one have no index."""
        path = SymplecticPath.from_function(lambda t: rotation(2.0 * math.pi * t), 1.0, 100)
        with self.assertRaises(DegeneracyError):
            conley_zehnder(path)

    def test_crossing_oracle(self):
        """Index and crossing count agree on random rotation-shear paths."""
        checked = 0
        for i in range(1000):
            path, samples = self.random_path()
            if path is None:
                continue
            expected = crossing_oracle(path)
            if expected is None:
                continue
            mu = conley_zehnder(samples)
            self.assertEqual(mu, expected)
            # Parity of the index is the parity of the endpoint
            self.assertEqual(mu % 2 == 1, not classify(samples.endpoint).is_even)
            checked += 1
        self.assertTrue(checked > 500)

    def test_angle_localization(self):
        """Index read from the image angle agrees where it is localized."""
        checked = 0
        for i in range(500):
            path, samples = self.random_path()
            if path is None:
                continue
            try:
                index = angle_localized_index(samples)
            except (PreconditionError, DegeneracyError):
                continue
            self.assertEqual(index, conley_zehnder(samples))
            checked += 1
        self.assertTrue(checked > 0)

    def test_cone_criterion(self):
        """Cone hypotheses certify hyperbolicity with the sign of <e1, Me1>."""
        for i in range(500):
            s = self.rng.choice([-1.0, 1.0]) * self.rng.uniform(3.0, 10.0)
            delta = self.rng.uniform(-0.04, 0.04)
            u = self.rng.uniform(-0.25, 0.25) * math.tan(0.3) / abs(s)
            d = (1.0 + u * s * delta) / s
            M = np.array([[s, u], [s * delta, d]])
            sign = cone_hyperbolic(M, np.array([0.0, 1.0]))
            self.assertEqual(sign, 1 if s > 0 else -1)
            parity = classify(M)
            self.assertTrue(parity.is_hyperbolic)
            self.assertEqual(parity.sign, sign)

    def test_mu_tilde(self):
        """Chord index from the image angle, including the boundary case."""
        path = SymplecticPath.from_function(lambda t: rotation(1.2 * math.pi * t), 1.0, 100)
        self.assertEqual(mu_tilde(path), 1)
        self.assertEqual(mu_tilde(path, 0.5), 0)
        path = SymplecticPath.from_matrices([np.identity(2)] * 5)
        with self.assertLogs('reebcli.cz_index', level='WARNING'):
            self.assertEqual(mu_tilde(path), 0)
        path = SymplecticPath.from_function(lambda t: rotation(math.pi * t), 1.0, 100)
        with self.assertLogs('reebcli.cz_index', level='WARNING'):
            self.assertEqual(mu_tilde(path), 1)
        with self.assertRaises(PreconditionError):
            mu_tilde(path, 2.0)

    def test_classify(self):
        """Parity classes of hyperbolic and elliptic matrices."""
        parity = classify(np.diag([3.0, 1.0 / 3.0]))
        self.assertTrue(parity.is_even and parity.is_hyperbolic)
        parity = classify(np.diag([-2.0, -0.5]))
        self.assertFalse(parity.is_even)
        self.assertTrue(parity.is_hyperbolic)
        parity = classify(rotation(math.pi / 3.0))
        self.assertFalse(parity.is_even)
        self.assertFalse(parity.is_hyperbolic)
        with self.assertRaises(DegeneracyError):
            classify(np.array([[1.0, 1.0], [0.0, 1.0]]))
        self.assertEqual(OrbitParity.from_dict(parity.to_dict()), parity)

    def test_good_iterates(self):
        """Only even iterates of negative hyperbolic orbits are bad."""
        negative = classify(np.diag([-2.0, -0.5]))
        positive = classify(np.diag([2.0, 0.5]))
        self.assertFalse(is_good(negative, 2))
        self.assertTrue(is_good(negative, 3))
        for m in range(1, 6):
            self.assertTrue(is_good(positive, m))
        with self.assertRaises(ValueError):
            is_good(positive, 0)

    def test_word_index(self):
        """Word index is the sum of chord indices."""
        mu = {'c1': 1, 'c2': 1, 'd1': 0}
        self.assertEqual(word_index(['c1', 'c1', 'c2'], mu), 3)
        self.assertEqual(word_index([], mu), 0)
        self.assertEqual(word_index(['d1', 'c1'], mu), 1)
        self.assertEqual(
            word_index(['c1', 'd1', 'c2'], mu),
            word_index(['c2', 'c1', 'd1'], mu)
        )
        with self.assertRaises(ValueError):
            word_index(['x'], mu)

    def test_csv(self):
        """Paths survive a CSV file."""
        path = SymplecticPath.from_function(lambda t: rotation(t), 1.0, 10)
        filename = os.path.join(self.tmp_dir, 'path.csv')
        path.write_csv(filename)
        copy = SymplecticPath.read_csv(filename)
        self.assertTrue(np.allclose(copy.matrices, path.matrices))


if __name__ == '__main__':
    unittest.main()
