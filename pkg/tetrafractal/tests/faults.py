import numpy as np
import os
from itertools import combinations
from tetrafractal import faults
from unittest import TestCase
from unittest.mock import patch

def _problem(**kwargs):
  return faults.build_allocation(faults.rotor_layout(), 3.1, **kwargs)

def _feasible(problem, failed):
  return faults.solve_allocation(faults.with_failures(problem, failed)).feasible

def _projected_gradient(A, b, lb, ub, n_iter=50000):
  """Accelerated projected gradient descent on |A x - b|**2 within the box [lb, ub]."""
  step = 1 / np.linalg.norm(A, 2)**2
  x = y = np.full(A.shape[1], (lb + ub) / 2)
  t = 1.
  for _ in range(n_iter):
    x_next = np.clip(y - step * A.T @ (A @ y - b), lb, ub)
    t_next = (1 + np.sqrt(1 + 4 * t**2)) / 2
    y = x_next + (t - 1) / t_next * (x_next - x)
    x, t = x_next, t_next
  return x

class TestFaults(TestCase):
  def test_layout(self):
    layout = faults.rotor_layout()
    self.assertEqual(len(layout.spins), 16)
    self.assertEqual(np.sum(layout.spins), 0)
    self.assertAlmostEqual(np.mean(layout.r_x), 0.)
    self.assertAlmostEqual(np.mean(layout.r_y), 0.)
    k, b = faults.lift_drag_constants()
    self.assertAlmostEqual(k / 1e-5, 1., places=1)
    self.assertAlmostEqual(b / 1.6e-7, 1., places=1)
    self.assertEqual(len(faults.layout_symmetries(layout)), 1) # the turned modules break the mirror symmetry
    uniform = faults.rotor_layout(options={ "module_orientations": (0, 0, 0, 0) })
    self.assertEqual(len(faults.layout_symmetries(uniform)), 2) # the identity and the reflection that swaps p_1 and p_3
    with self.assertRaises(ValueError):
      faults.rotor_layout(options={ "module_orientations": (0, 3, 0, 0) })

  def test_module_spins(self):
    np.testing.assert_array_equal(faults.module_spins((0, 0, 0, 0)), np.tile([ 1, -1, 1, -1 ], 4))
    spins = faults.module_spins((0, 2, 1, 0))
    np.testing.assert_array_equal(spins[4:8], [ 1, 1, -1, -1 ])
    np.testing.assert_array_equal(spins[8:12], [ -1, 1, 1, -1 ])
    for m in range(4): # each Tetracopter keeps two rotors of each spin
      self.assertEqual(np.sum(spins[4*m:4*m+4]), 0)

  def test_allocation(self):
    problem = _problem()
    self.assertEqual(problem.D.shape, (4, 16))
    self.assertAlmostEqual(problem.B_target[3], 3.1 * 9.81)
    r = faults.solve_allocation(problem)
    self.assertTrue(r.feasible)
    self.assertLess(r.scaled_residual, 1e-10)
    self.assertTrue(np.all(r.F >= problem.lb) and np.all(r.F <= problem.ub))
    r = faults.solve_allocation(faults.with_failures(problem, [ 0, 5 ]))
    self.assertTrue(r.feasible)
    self.assertEqual(r.F[0], 0.)
    self.assertEqual(r.F[5], 0.)
    r = faults.solve_allocation(faults.with_failures(problem, range(16)))
    self.assertFalse(r.feasible)
    with self.assertRaises(ValueError):
      _problem(lb=1., ub=0.)

  def test_fixed_speeds(self):
    problem = _problem()
    share = problem.B_target[3] / np.sum(problem.D[3])
    r = faults.solve_allocation(_problem(lb=share, ub=share)) # the uniform hover is an exact solution
    self.assertTrue(r.feasible)
    self.assertTrue(np.all(r.F == share))

  def test_bounds(self):
    layout = faults.rotor_layout()
    lb, ub = faults.default_bounds(layout)
    self.assertEqual(lb, 0.)
    hover = 0.74 * 9.81 / (4 * layout.k)
    self.assertAlmostEqual(ub / hover, 1.94 / 0.75**2)

  def test_projected_gradient_oracle(self):
    rng = np.random.RandomState(876)
    for _ in range(5):
      D = rng.normal(size=(4, 16))
      D[3] = rng.uniform(0.5, 1.5, size=16)
      B = np.concatenate((rng.normal(size=3), [ rng.uniform(5., 10.) ]))
      lb, ub = 0., rng.uniform(0.5, 2.)
      problem = faults.FaultProblem(D, B, (), lb, ub)
      r = faults.solve_allocation(problem)
      row_scale = 1 / np.linalg.norm(D, axis=1) # the solver equilibrates rows
      A, b = row_scale[:, np.newaxis] * D, row_scale * B
      x = _projected_gradient(A, b, lb, ub)
      residual = np.linalg.norm(A @ r.F - b)
      oracle = np.linalg.norm(A @ x - b)
      self.assertLess(residual, oracle + 1e-9)
      self.assertLess(oracle - residual, 1e-3)
      gradient = A.T @ (A @ r.F - b) # first-order optimality of the solution
      fixed_point = np.clip(r.F - gradient / np.linalg.norm(A, 2)**2, lb, ub)
      self.assertLess(np.max(np.abs(fixed_point - r.F)), 1e-8 * ub)

  def test_min_failures(self):
    problem = _problem()
    r = faults.min_failures(problem, 4, threads=1)
    self.assertIsNone(r.cardinality)
    self.assertEqual(r.lower_bound, 5)
    for c in range(5):
      self.assertEqual(r.counts[c], (len(list(combinations(range(16), c))), 0))
    r = faults.min_failures(problem, 8, threads=2)
    self.assertEqual(r.cardinality, 5)
    self.assertEqual(len(r.witness), 5)
    self.assertFalse(_feasible(problem, r.witness))
    self.assertEqual(r.witness, (0, 1, 2, 3, 4)) # all of p_1 and one rotor of p_2
    self.assertEqual(sorted(r.counts), [ 0, 1, 2, 3, 4, 5 ])
    with self.assertRaises(ValueError):
      faults.min_failures(problem, 17)

  def test_uniform_orientations(self):
    uniform = faults.rotor_layout(options={ "module_orientations": (0, 0, 0, 0) })
    problem = faults.build_allocation(uniform, 3.1)
    r = faults.min_failures(problem, 8, threads=2)
    self.assertEqual(r.cardinality, 4)
    self.assertEqual(r.witness, (4, 5, 6, 7)) # the whole Tetracopter at p_2
    self.assertEqual(r.counts[4][1], 1)
    pruned = faults.min_failures(problem, 8, symmetries=faults.layout_symmetries(uniform))
    self.assertEqual(pruned.cardinality, 4)
    self.assertEqual(pruned.witness, r.witness)
    self.assertLess(sum(pruned.counts[1]), 16)

  def test_all_triples_feasible(self):
    problem = _problem()
    for failed in combinations(range(16), 3):
      self.assertTrue(_feasible(problem, failed), failed)

  def test_heavier_assembly(self):
    layout = faults.rotor_layout()
    light = faults.min_failures(faults.build_allocation(layout, 3.1), 8)
    heavy = faults.min_failures(faults.build_allocation(layout, 6.2), 8)
    self.assertLessEqual(heavy.cardinality, light.cardinality)

  def test_monotonicity(self):
    problem = _problem()
    witness = faults.min_failures(problem, 8).witness
    for extra in set(range(16)) - set(witness): # supersets of an infeasible set stay infeasible
      self.assertFalse(_feasible(problem, witness + (extra,)))
    rng = np.random.RandomState(0)
    for _ in range(20): # subsets of a feasible set stay feasible
      failed = tuple(rng.choice(16, size=6, replace=False))
      if _feasible(problem, failed):
        for subset in combinations(failed, 5):
          self.assertTrue(_feasible(problem, subset))

  def test_symmetry_equivariance(self):
    layout = faults.rotor_layout()
    problem = faults.build_allocation(layout, 3.1)
    perms = faults.layout_symmetries(layout)
    self.assertTrue(np.all(perms[0] == np.arange(16)))
    rng = np.random.RandomState(1)
    for _ in range(20):
      failed = tuple(rng.choice(16, size=5, replace=False))
      expected = _feasible(problem, failed)
      for perm in perms:
        self.assertEqual(_feasible(problem, tuple(perm[list(failed)])), expected)

  def test_bound_sensitivity(self):
    layout = faults.rotor_layout()
    rows = faults.bound_sensitivity(layout, 3.1, 3, multipliers=[ 1.0, None, np.inf ], threads=1)
    self.assertEqual([ m for m, _, _ in rows ], [ 1.0, None, np.inf ])
    self.assertEqual(rows[0][2].cardinality, 1) # rotors at the hover share cannot compensate any failure
    self.assertEqual(rows[1][1], faults.default_bounds(layout)[1])
    self.assertIsNone(rows[2][2].cardinality)

  def test_threads(self):
    with patch.dict(os.environ, { "TETRAFRACTAL_THREADS": "3" }):
      self.assertEqual(faults.n_threads(), 3)
    for value in [ "0", "many" ]:
      with patch.dict(os.environ, { "TETRAFRACTAL_THREADS": value }):
        with self.assertRaises(ValueError):
          faults.n_threads()
    with patch.dict(os.environ, {}, clear=True):
      self.assertEqual(faults.n_threads(), 1)
