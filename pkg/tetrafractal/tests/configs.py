import numpy as np
from tetrafractal import configs
from unittest import TestCase

class TestConfigs(TestCase):
  def test_enumerate(self):
    all_configs = configs.enumerate_all()
    self.assertEqual(len(all_configs), 256)
    self.assertEqual(len(set(all_configs)), 256)
    self.assertEqual(sum(all(s == configs.CCW for s in c.spins) for c in all_configs), 16)

  def test_filter(self):
    r = configs.filter_equilibrium(configs.enumerate_all())
    self.assertEqual(r.n_after_torque, 32)
    self.assertEqual(r.n_after_force, 28)
    for s in r.survivors:
      self.assertTrue(len(set(s.config.spins)) == 1) # one spin class
      self.assertTrue(len(set(s.config.directions)) == 2) # mixed directions
      self.assertLess(np.linalg.norm(configs.net_torque(s.config)), 1e-12)
      up = s.attitude @ s.net_force # the net thrust points up at the equilibrium attitude
      self.assertTrue(np.allclose(up[:2], 0., atol=1e-12))
      self.assertGreater(up[2], 0)
      self.assertAlmostEqual(np.linalg.det(s.attitude), 1.)

  def test_classes(self):
    survivors = configs.filter_equilibrium(configs.enumerate_all()).survivors
    classes = configs.reduce_symmetry(survivors)
    self.assertEqual([ c.label for c in classes ], [ "A", "B", "C" ])
    self.assertEqual([ c.outward_count for c in classes ], [ 3, 1, 2 ])
    self.assertEqual([ c.class_size for c in classes ], [ 4, 4, 6 ])
    expected = [ 2., 2., 4 / np.sqrt(3) ]
    for c, e in zip(classes, expected):
      self.assertAlmostEqual(c.lift_factor, e, places=12)
      self.assertEqual(len(c.members), c.class_size)
    cw_classes = configs.reduce_symmetry(survivors, spin=configs.CW)
    self.assertEqual([ c.class_size for c in cw_classes ], [ 4, 4, 6 ])
    mirrored = sorted(configs.mirror(m) for m in classes[0].members)
    self.assertEqual(mirrored, cw_classes[0].members) # mirroring maps the spin classes onto each other

  def test_rotations(self):
    rotations = configs.tetrahedral_rotations()
    self.assertEqual(len(rotations), 12)
    for perm, R in rotations:
      self.assertTrue(np.allclose(R.T @ R, np.eye(3), atol=1e-12))
      for i in range(4):
        self.assertTrue(np.allclose(R @ configs.VERTEX_DIRS[i], configs.VERTEX_DIRS[perm[i]], atol=1e-12))

  def test_rotation_invariance(self):
    config = configs.PropConfig((1, 1, -1, 1), (1, 1, 1, 1))
    for perm, R in configs.tetrahedral_rotations():
      rotated = configs._rotate(config, perm)
      self.assertTrue(np.allclose(configs.net_force(rotated), R @ configs.net_force(config), atol=1e-12))
      self.assertAlmostEqual(configs.lift_factor(rotated), configs.lift_factor(config), places=12)

  def test_converse_probe(self):
    r = configs.probe_converse(10, seed=876)
    self.assertEqual(r.n_samples, 2560)
    self.assertEqual(r.counterexamples, 0)
    unequal = np.array([ 1., 1.2, 1., 1. ])
    self.assertGreater(np.linalg.norm(configs.net_torque(configs.PropConfig((1,) * 4, (1,) * 4), unequal)), 1e-3)
