import json
import jsonschema
import numpy as np
import os
import tempfile
from tetrafractal import export
from unittest import TestCase

class TestExport(TestCase):
  def test_plain(self):
    document = json.loads(export.to_json({
      "matrix": np.arange(6.).reshape(2, 3),
      "vector": np.array([ 1, 2 ]),
      "flag": np.bool_(True),
      "bad": float("inf"),
      3: np.float64(0.5),
    }))
    self.assertEqual(document["matrix"], { "shape": [ 2, 3 ], "data": [ 0., 1., 2., 3., 4., 5. ] })
    self.assertEqual(document["vector"], [ 1, 2 ])
    self.assertIs(document["flag"], True)
    self.assertEqual(document["bad"], "inf")
    self.assertEqual(document["3"], 0.5)

  def test_deterministic(self):
    a = export.to_json({ "b": 1, "a": [ 1., 2. ] })
    self.assertEqual(a, export.to_json({ "a": [ 1., 2. ], "b": 1 }))
    self.assertTrue(a.endswith("}\n"))

  def test_csv(self):
    text = export.to_csv(np.array([[ 1., 2.5 ], [ 3., 4. ]]), [ "a", "b" ])
    self.assertEqual(text.splitlines(), [ "a,b", "1,2.5", "3,4" ])

  def test_to_file(self):
    with tempfile.TemporaryDirectory() as tmp:
      path = os.path.join(tmp, "nested", "report.json")
      export.to_file(path, "{}\n")
      self.assertTrue(os.path.exists(path))
      with self.assertRaises(ValueError):
        export.to_file(os.path.join(tmp, "report.txt"), "")
    with tempfile.TemporaryDirectory() as tmp:
      os.makedirs(os.path.join(tmp, "taken.json"))
      with self.assertRaises(export.ExportException):
        export.to_file(os.path.join(tmp, "taken.json"), "{}")

  def test_schema(self):
    self.assertEqual(export.check_schema({ "checks": [], "passed": True, "seed": 1 }, "verify-all"), [])
    problems = export.check_schema({ "checks": [], "passed": 1 }, "verify-all")
    self.assertEqual(len(problems), 2) # missing seed, passed is no boolean
    problems = export.check_schema({ "checks": [], "passed": True, "seed": True }, "verify-all")
    self.assertEqual(len(problems), 1)
    self.assertTrue(problems[0].startswith("seed: "))
    sim = { "stable": True, "reason": None, "settling_time": None, "duration": 1, "final_state": [ 0. ] * 11 + [ "nan" ] }
    self.assertEqual(export.check_schema(sim, "sim"), [])
    self.assertEqual(len(export.check_schema(sim | { "final_state": [] }, "sim")), 1)
    self.assertEqual(len(export.check_schema(sim | { "final_state": [ "oops" ] * 12 }, "sim")), 12)
    with self.assertRaises(jsonschema.ValidationError):
      export.validate(sim | { "stable": "yes" }, "sim")

  def test_nested_schema(self):
    checks = [ { "name": "a", "passed": True, "detail": "" }, { "name": "b", "passed": "no", "detail": "" } ]
    problems = export.check_schema({ "checks": checks, "passed": False, "seed": 1 }, "verify-all")
    self.assertEqual(len(problems), 1)
    self.assertTrue(problems[0].startswith("checks/1/passed: "))
    document = json.loads(export.to_json({
      "counts": { "all": 256, "after_torque": 32, "after_force": 32, "per_spin_class": 14, "classes": 3 },
      "classes": [],
      "converse_probe": { "n_samples": 1, "counterexamples": 0 },
    }))
    self.assertEqual(export.check_schema(document, "configs"), [])
    document["counts"]["all"] = -1
    document["converse_probe"].pop("counterexamples")
    self.assertEqual(len(export.check_schema(document, "configs")), 2)
    inertia = json.loads(export.to_json({ "n": 0, "mass": 1., "inertia": np.eye(3), "check": { "recursion_vs_closed_form_error": 0. } }))
    self.assertEqual(export.check_schema(inertia, "inertia"), [])
    inertia["inertia"].pop("shape")
    self.assertEqual(len(export.check_schema(inertia, "inertia")), 1)
