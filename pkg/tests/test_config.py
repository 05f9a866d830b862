import argparse
import json
import os
import shutil
import tempfile
import unittest

from reebcli.config import RunConfig, load_config, worker_count
from reebcli.errors import BoundaryError, ConfigError, ParameterError, ReebError


class TestConfig(unittest.TestCase):

    def setUp(self):
        """Scratch directory for configuration files."""
        self.tmp_dir = tempfile.mkdtemp()

    def tearDown(self):
        """Remove the scratch directory."""
        shutil.rmtree(self.tmp_dir)

    def write(self, name, text):
        filename = os.path.join(self.tmp_dir, name)
        with open(filename, 'w') as f:
            f.write(text)
        return filename

    def test_worker_count(self):
        """Worker count from the environment."""
        self.assertEqual(worker_count(dict()), 1)
        self.assertEqual(worker_count({'REEB_THREADS': ''}), 1)
        self.assertEqual(worker_count({'REEB_THREADS': '4'}), 4)
        for value in ['0', '-2', 'four']:
            with self.assertRaises(ConfigError):
                worker_count({'REEB_THREADS': value})

    def test_load_config(self):
        """Keys are converted to attribute names."""
        filename = self.write('config.json', json.dumps({'--sample-n': 8, 'grid_n': 4, 'K': 2.5}))
        self.assertEqual(load_config(filename), {'sample_n': 8, 'grid_n': 4, 'K': 2.5})
        with self.assertRaises(ConfigError):
            load_config(self.write('list.json', '[1, 2]'))
        with self.assertRaises(ConfigError):
            load_config(self.write('broken.json', '{"K": '))
        with self.assertRaises(ConfigError):
            load_config(os.path.join(self.tmp_dir, 'missing.json'))

    def test_resolve(self):
        """Flags override the file, the file overrides defaults."""
        filename = self.write('config.json', json.dumps({'K': 4.5, 'tau': 0.1, 'unknown': 1}))
        args = argparse.Namespace(command='orbits', config=filename, K=None, tau=0.2, seed=None)
        config = RunConfig.resolve(args, {'K': 10.0, 'tau': 0.0, 'seed': 0, 'euler': False}, environ=dict())
        self.assertEqual(config.K, 4.5)
        self.assertEqual(config.tau, 0.2)
        self.assertEqual(config.seed, 0)
        self.assertFalse(config.euler)
        self.assertEqual(config.command, 'orbits')
        self.assertEqual(config.workers, 1)
        self.assertTrue(config.get('unknown') is None)
        args = argparse.Namespace(command='orbits', config=None, K=None)
        config = RunConfig.resolve(args, {'K': 10.0}, environ={'REEB_THREADS': '3'})
        self.assertEqual(config.K, 10.0)
        self.assertEqual(config.workers, 3)

    def test_error_records(self):
        """Errors serialize with type, message and optional details."""
        ex = ParameterError('eta too large', eta=2.0)
        self.assertEqual(ex.to_dict(), {'type': 'ParameterError', 'message': 'eta too large', 'details': {'eta': 2.0}})
        self.assertTrue(isinstance(ex, ValueError))
        self.assertEqual(str(ex), 'eta too large')
        ex = BoundaryError('boundary')
        self.assertEqual(ex.to_dict(), {'type': 'BoundaryError', 'message': 'boundary'})
        self.assertTrue(isinstance(ex, ReebError))
        self.assertFalse(isinstance(ex, ValueError))


if __name__ == '__main__':
    unittest.main()
