import numpy as np
from scipy.spatial.distance import pdist
from tetrafractal import geometry
from unittest import TestCase

PROTOTYPE_EDGE = 0.24455

class TestGeometry(TestCase):
  def test_tetrahedron(self):
    geom = geometry.make_tetrahedron(1.)
    self.assertAlmostEqual(geom.circumradius, 0.6123724357, places=10)
    p = geom.vertex_dirs
    self.assertTrue(np.allclose(np.linalg.norm(p, axis=1), 1., atol=1e-12))
    self.assertTrue(np.allclose(np.sum(p, axis=0), 0., atol=1e-12))
    for i in range(4):
      for j in range(i+1, 4):
        self.assertAlmostEqual(p[i] @ p[j], -1/3, places=12)
    self.assertTrue(np.allclose(p[3], [ 0., 0., 1. ])) # apex on +z
    self.assertTrue(np.allclose((p[1] - p[0])[1:], 0.)) # base edge parallel to x
    self.assertAlmostEqual(
      geometry.make_tetrahedron(PROTOTYPE_EDGE).circumradius,
      np.sqrt(3 / 8) * PROTOTYPE_EDGE,
      places = 12
    )
    self.assertAlmostEqual( # edges of the scaled tetrahedron
      np.linalg.norm(geom.circumradius * (p[0] - p[2])),
      1.,
      places = 12
    )
    for edge_length in [ 0., -1. ]:
      with self.assertRaises(ValueError):
        geometry.make_tetrahedron(edge_length)

  def test_generate_assembly(self):
    geom = geometry.make_tetrahedron(PROTOTYPE_EDGE)
    r = geom.circumradius
    asm = geometry.generate_assembly(geom, 0)
    self.assertEqual(asm.module_poses.shape, (1, 3))
    self.assertTrue(np.all(asm.module_poses == 0))
    self.assertEqual(len(asm.rotor_positions), 4)
    asm = geometry.generate_assembly(geom, 1)
    self.assertTrue(np.allclose(asm.module_poses, r * geom.vertex_dirs))
    self.assertEqual(np.sum(asm.rotor_spins), 0) # 8 CW and 8 CCW
    asm = geometry.generate_assembly(geom, 2)
    self.assertEqual(len(asm.module_poses), 16)
    self.assertEqual(len(asm.rotor_positions), 64)
    self.assertAlmostEqual(np.min(pdist(asm.module_poses)), geom.edge_length, places=12)
    for n in range(5):
      asm = geometry.generate_assembly(geom, n)
      self.assertLess(np.max(np.abs(np.mean(asm.module_poses, axis=0))), 1e-10 * 2**n * r)

  def test_structural_recursion(self):
    geom = geometry.make_tetrahedron(PROTOTYPE_EDGE)
    for n in range(4):
      child = geometry.generate_assembly(geom, n).module_poses
      parent = geometry.generate_assembly(geom, n+1).module_poses
      expected = np.concatenate([ child + 2**n * geom.circumradius * p_i for p_i in geom.vertex_dirs ])
      self.assertTrue(np.allclose(parent, expected, rtol=0, atol=1e-12))

  def test_bounding_tetrahedron(self):
    geom = geometry.make_tetrahedron(PROTOTYPE_EDGE)
    for n in range(4):
      vertices = geometry.module_vertices(geometry.generate_assembly(geom, n)).reshape(-1, 3)
      self.assertAlmostEqual( # the outermost vertex lies at 2**n R p_4
        np.max(vertices[:, 2]),
        2**n * geom.circumradius,
        places = 12
      )
      self.assertAlmostEqual(
        np.max(vertices[:, 0]) - np.min(vertices[:, 0]), # the base edge
        2**n * geom.edge_length,
        places = 12
      )

  def test_max_depth(self):
    geom = geometry.make_tetrahedron(1.)
    with self.assertRaises(geometry.ResourceLimitError):
      geometry.generate_assembly(geom, 11)
    with self.assertRaises(ValueError): # a ResourceLimitError is a ValueError
      geometry.generate_assembly(geom, 3, max_depth=2)
    with self.assertRaises(ValueError):
      geometry.generate_assembly(geom, -1)

  def test_disk_ratio(self):
    geom = geometry.make_tetrahedron(PROTOTYPE_EDGE)
    ratios = []
    for n in range(1, 6):
      r = geometry.rotor_disk_report(geometry.generate_assembly(geom, n))
      self.assertAlmostEqual(r.ratio, np.pi / (3 * np.sqrt(3)), places=9)
      self.assertAlmostEqual(r.ratio, 0.604600, places=6)
      self.assertFalse(r.overlap_found)
      self.assertEqual(r.n_rotors, 4**(n+1))
      self.assertGreaterEqual(r.min_center_distance, 2 * geometry.rotor_radius(PROTOTYPE_EDGE) - 1e-12)
      self.assertAlmostEqual(r.hex_packing_bound, 1.2092, places=4)
      ratios.append(r.ratio)
    self.assertLess(np.ptp(ratios), 1e-12) # depth-invariant

  def test_overlap_detection(self):
    geom = geometry.make_tetrahedron(PROTOTYPE_EDGE)
    asm = geometry.generate_assembly(geom, 1)
    too_large = geometry.FractalAssembly(
      asm.depth,
      asm.module_poses,
      asm.rotor_positions,
      asm.rotor_spins,
      1.1 * asm.rotor_radius,
      geometry = geom
    )
    self.assertTrue(geometry.rotor_disk_report(too_large).overlap_found)

  def test_dimensions(self):
    dims = geometry.derive_dimensions(PROTOTYPE_EDGE)
    self.assertAlmostEqual(dims.h, 0.19967, places=5)
    self.assertAlmostEqual(dims.R, 0.14975, places=4)
    self.assertAlmostEqual(dims.R, geometry.make_tetrahedron(PROTOTYPE_EDGE).circumradius, places=12)
    self.assertTrue(dims.phi_is_advisory)
    self.assertTrue(0 < dims.phi < np.pi / 2)
    dims = geometry.derive_dimensions(1.)
    self.assertAlmostEqual(dims.x, 0.57735, places=5)
    self.assertAlmostEqual(dims.d, 0.28868, places=5)
    with self.assertRaises(ValueError):
      geometry.derive_dimensions(0.)
