import io
import json
import numpy as np
import os
import tempfile
from contextlib import redirect_stderr, redirect_stdout
from tetrafractal import cli, export
from unittest import TestCase
from unittest.mock import patch

def _run(argv):
  stdout, stderr = io.StringIO(), io.StringIO()
  with redirect_stdout(stdout), redirect_stderr(stderr):
    code = cli.dispatch(argv)
  return code, stdout.getvalue(), stderr.getvalue()

class TestCli(TestCase):
  def setUp(self):
    self.tmp = tempfile.TemporaryDirectory()

  def tearDown(self):
    self.tmp.cleanup()

  def _json(self, argv, schema):
    path = os.path.join(self.tmp.name, f"{schema}.json")
    code, stdout, _ = _run(argv + [ "--out", path ])
    self.assertEqual(code, cli.EXIT_OK)
    self.assertIn(f"Wrote {path}", stdout)
    with open(path) as f:
      document = json.load(f)
    self.assertEqual(export.check_schema(document, schema), [])
    return document

  def test_geometry(self):
    document = self._json([ "geometry", "--depth", "2" ], "geometry")
    self.assertEqual(document["n_modules"], 16)
    self.assertEqual(document["n_rotors"], 64)
    self.assertAlmostEqual(document["ratio"], np.pi / (3 * np.sqrt(3)))
    self.assertFalse(document["overlap_found"])
    code, stdout, _ = _run([ "geometry" ]) # stdout by default
    self.assertEqual(code, cli.EXIT_OK)
    self.assertEqual(json.loads(stdout)["depth"], 1)

  def test_inertia(self):
    document = self._json([ "inertia", "--n", "3" ], "inertia")
    self.assertAlmostEqual(document["mass"], 64 * 0.74)
    self.assertLess(document["check"]["recursion_vs_closed_form_error"], 1e-9)
    path = os.path.join(self.tmp.name, "J.json")
    with open(path, "w") as f:
      json.dump((1e-3 * np.eye(3)).tolist(), f)
    document = self._json([ "inertia", "--n", "1", "--inertia", path ], "inertia")
    self.assertEqual(document["inertia"]["shape"], [ 3, 3 ])

  def test_linearize(self):
    document = self._json([ "linearize" ], "linearize")
    self.assertEqual(document["A"]["shape"], [ 12, 12 ])
    self.assertLess(document["finite_difference_error"], 1e-6)
    params = os.path.join(self.tmp.name, "params.json")
    with open(params, "w") as f:
      json.dump({ "m": 1.0 }, f)
    document = self._json([ "linearize", "--params", params ], "linearize")
    self.assertEqual(document["params"]["m"], 1.0)

  def test_assembly_maps(self):
    document = self._json([ "assembly-maps", "--n", "2" ], "assembly-maps")
    self.assertEqual(document["Mb"]["shape"], [ 3, 64 ])
    self.assertEqual(document["Q"]["shape"], [ 3, 16 ])
    self.assertLess(document["closed_form_error"], 1e-9)

  def test_truss(self):
    document = self._json([ "truss", "--n", "1", "--scenario", "top", "--payload", "2" ], "truss")
    self.assertEqual(document["n_members"], 24)
    self.assertEqual(document["n_flagged"], 0)
    self.assertEqual(document["displacement_bound"], 1e-6)
    self.assertEqual(document["displacement_bound_met"], document["max_displacement"] < 1e-6)
    path = os.path.join(self.tmp.name, "members.csv")
    code, _, _ = _run([ "truss", "--n", "1", "--scenario", "rest", "--out", path ])
    self.assertEqual(code, cli.EXIT_OK)
    with open(path) as f:
      lines = f.read().splitlines()
    self.assertEqual(lines[0], ",".join(cli.truss.MEMBER_COLUMNS))
    self.assertEqual(len(lines), 25)
    code, stdout, stderr = _run([ "truss", "--n", "2", "--sweep", "0:30:10" ])
    self.assertEqual(code, cli.EXIT_OK)
    self.assertEqual(len(stdout.splitlines()), 5) # header and 4 payloads
    self.assertIn("thrust ceiling", stderr)

  def test_faults(self):
    document = self._json([ "faults", "--max-card", "2", "--no-sweep" ], "faults")
    self.assertIsNone(document["minimum"])
    self.assertEqual(document["lower_bound"], 3)
    self.assertNotIn("sensitivity", document)
    self.assertEqual(document["layout"]["orientations"], [ 0, 2, 1, 0 ])
    self.assertEqual(document["n_symmetries"], 1)
    document = self._json([ "faults", "--max-card", "1", "--bounds", "inf" ], "faults")
    self.assertEqual(document["bounds"]["ub"], "inf")
    self.assertEqual(len(document["sensitivity"]), 6)

  def test_configs(self):
    document = self._json([ "configs" ], "configs")
    self.assertEqual(document["counts"]["after_torque"], 32)
    self.assertEqual(document["counts"]["per_spin_class"], 14)
    self.assertEqual([ c["class_size"] for c in document["classes"] ], [ 4, 4, 6 ])

  def test_sim(self):
    document = self._json([ "sim", "--perturb", "p=0.5", "--t", "3" ], "sim")
    self.assertTrue(document["stable"])
    self.assertLess(document["settling_time"], 3)
    path = os.path.join(self.tmp.name, "trajectory.csv")
    code, _, _ = _run([ "sim", "--perturb", "q=0.2", "--t", "0.1", "--out", path ])
    self.assertEqual(code, cli.EXIT_OK)
    with open(path) as f:
      lines = f.read().splitlines()
    self.assertEqual(len(lines), 52) # header and 51 time steps
    self.assertTrue(lines[0].startswith("t,x,y,z,phi"))

  def test_verify_all(self):
    results = [ ("good", True, "fine"), ("bad", False, "broken") ]
    path = os.path.join(self.tmp.name, "verify-all.json")
    with patch("tetrafractal.cli.run_checks", return_value=results):
      code, stdout, _ = _run([ "verify-all", "--out", path ])
    self.assertEqual(code, cli.EXIT_FAILED)
    self.assertIn("FAIL", stdout)
    with open(path) as f:
      document = json.load(f)
    self.assertEqual(export.check_schema(document, "verify-all"), [])
    self.assertFalse(document["passed"])
    with patch("tetrafractal.cli.run_checks", return_value=results[:1]):
      code, _, _ = _run([ "verify-all" ])
    self.assertEqual(code, cli.EXIT_OK)

  def test_errors(self):
    self.assertEqual(_run([])[0], cli.EXIT_USAGE)
    self.assertEqual(_run([ "fly" ])[0], cli.EXIT_USAGE)
    self.assertEqual(_run([ "geometry", "--depth", "two" ])[0], cli.EXIT_USAGE)
    self.assertEqual(_run([ "--version" ])[0], cli.EXIT_OK)
    self.assertEqual(_run([ "geometry", "--edge", "-1" ])[0], cli.EXIT_INVALID)
    self.assertEqual(_run([ "geometry", "--depth", "11" ])[0], cli.EXIT_INVALID)
    self.assertEqual(_run([ "geometry", "--out", os.path.join(self.tmp.name, "report.txt") ])[0], cli.EXIT_INVALID)
    self.assertEqual(_run([ "linearize", "--params", os.path.join(self.tmp.name, "missing.json") ])[0], cli.EXIT_INVALID)
    self.assertEqual(_run([ "sim", "--perturb", "p=fast" ])[0], cli.EXIT_INVALID)
    self.assertEqual(_run([ "sim", "--perturb", "phi=1.0" ])[0], cli.EXIT_INVALID)
    self.assertEqual(_run([ "truss", "--scenario", "rest", "--payload", "5" ])[0], cli.EXIT_INVALID)
    self.assertEqual(_run([ "truss", "--sweep", "0:30" ])[0], cli.EXIT_INVALID)
    code, _, stderr = _run([ "inertia", "--mass", "-1" ])
    self.assertEqual(code, cli.EXIT_INVALID)
    self.assertIn("tetrafractal: error:", stderr)
    params = os.path.join(self.tmp.name, "params.json")
    with open(params, "w") as f:
      f.write("{ \"m\": }")
    code, _, stderr = _run([ "linearize", "--params", params ])
    self.assertEqual(code, cli.EXIT_INVALID)
    self.assertIn(f"{params}:1:", stderr)
    matrix = os.path.join(self.tmp.name, "J.json")
    with open(matrix, "w") as f:
      json.dump({ "data": [ 1., 0., 0., 0., 1., 0., 0., 0., 1. ] }, f)
    code, _, stderr = _run([ "inertia", "--inertia", matrix ])
    self.assertEqual(code, cli.EXIT_INVALID)
    self.assertIn("missing shape", stderr)
