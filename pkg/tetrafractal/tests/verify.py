from tetrafractal import verify
from unittest import TestCase

class TestVerify(TestCase):
  def assertPasses(self, check):
    name, passed, detail = check
    self.assertIsInstance(name, str)
    self.assertIsInstance(detail, str)
    self.assertTrue(passed, f"{name}: {detail}")

  def test_geometry_checks(self):
    self.assertPasses(verify.check_disk_ratio())
    self.assertPasses(verify.check_dimensions())

  def test_inertia_check(self):
    self.assertPasses(verify.check_inertia(876))
    self.assertPasses(verify.check_inertia(1))

  def test_truss_counts(self):
    self.assertPasses(verify.check_truss_counts())

  def test_linearization(self):
    self.assertPasses(verify.check_linearization())

  def test_configs(self):
    self.assertPasses(verify.check_configs())
