"""
Acceptance checks of all analyses, run by ``tetrafractal verify-all``.

Each check returns ``(name, passed, detail)``.
"""

import numpy as np
import warnings

from . import assembly_dynamics, configs, dynamics, faults, geometry, inertia, sim, truss
from .defaults import CLI, FAULTS, GEOMETRY, TRUSS

def check_disk_ratio():
    geom = geometry.make_tetrahedron(GEOMETRY["edge_length"])
    target = np.pi / (3 * np.sqrt(3))
    errors, overlaps = [], []
    for n in range(1, 7):
        r = geometry.rotor_disk_report(geometry.generate_assembly(geom, n))
        errors.append(abs(r.ratio - target))
        overlaps.append(r.overlap_found)
    passed = max(errors) < 1e-9 and not any(overlaps)
    return "disk_ratio", passed, f"max |ratio - pi/(3 sqrt 3)| = {max(errors):.2e}, overlaps at depths {[ n for n, o in zip(range(1, 7), overlaps) if o ]}"

def check_dimensions():
    a = GEOMETRY["edge_length"]
    dims = geometry.derive_dimensions(a)
    r = geometry.make_tetrahedron(a).circumradius
    passed = abs(dims.R - r) < 1e-12 and abs(dims.h - 0.19967) < 1e-5
    return "dimensions", passed, f"h = {dims.h:.5f} m, R - r = {dims.R - r:.1e}"

def check_inertia(seed):
    rng = np.random.RandomState(seed)
    r = geometry.make_tetrahedron(GEOMETRY["edge_length"]).circumradius
    worst = 0.
    for _ in range(100):
        body0 = inertia.random_body(rng)
        for n in range(11):
            closed = inertia.assembly_body(body0, r, n).inertia
            recursive = inertia.recursive_body(body0, r, n).inertia
            worst = max(worst, np.linalg.norm(closed - recursive) / np.linalg.norm(recursive))
    return "inertia_closed_form", worst < 1e-9, f"max relative error {worst:.2e} over 100 random bodies, n <= 10"

def check_truss_counts():
    geom = geometry.make_tetrahedron(GEOMETRY["edge_length"])
    wrong = []
    for n in range(6):
        t = truss.build_truss(geom, n)
        if t.n_members != 6 * 4**n or t.n_joints != 2 * (4**n + 1) or t.determinacy != 0:
            wrong.append(n)
    return "truss_counts", not wrong, f"mismatching depths {wrong}"

def check_truss_scenarios():
    payloads = np.arange(0., 30.5, 1.)
    problems = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for kind in [ "top", "bottom3" ]:
            s = truss.payload_sweep(kind, 2, payloads)
            if np.any(np.diff(s.max_compression) < -1e-9):
                problems.append(f"{kind} compression not monotone")
            solution, summary, t = truss.scenario(kind, 2, 30.)
            if solution.equilibrium_residual > 1e-8:
                problems.append(f"{kind} residual {solution.equilibrium_residual:.1e}")
            if np.any(truss.buckling_check(t, solution).flagged):
                problems.append(f"{kind} flags members at 30 kg")
    _, rest, _ = truss.scenario("rest", 2, 0.)
    if not rest.displacement_bound_met:
        problems.append(f"rest displacement {rest.max_displacement:.1e} m exceeds {TRUSS['displacement_bound']:.0e} m")
    return "truss_scenarios", not problems, "; ".join(problems) or f"rest displacement {rest.max_displacement:.1e} m"

def check_linearization():
    p = dynamics.TetracopterParams.from_dict({})
    model = dynamics.linearize(p)
    A_fd, B_fd, _ = dynamics.finite_difference_jacobians(p)
    error = max(
        np.max(np.abs(model.A - A_fd)) / np.max(np.abs(model.A)),
        np.max(np.abs(model.B - B_fd)) / np.max(np.abs(model.B)),
    )
    i = dynamics.STATE_NAMES.index
    gravity = abs(model.A[i("u"), i("theta")] - p.g) + abs(model.A[i("v"), i("phi")] + p.g)
    return "linearization", error < 1e-6 and gravity < 1e-12, f"finite difference error {error:.1e}"

def check_assembly_maps():
    p = dynamics.TetracopterParams.from_dict({})
    geom = geometry.make_tetrahedron(p.a)
    M0 = assembly_dynamics.elementary_maps(dynamics.linearize(p), p, geom=geom)
    maps = assembly_dynamics.assembly_sequence(M0, geom, 5)
    worst = 0.
    for n in range(5):
        closed = assembly_dynamics.closed_form_maps(M0, geom, n)
        for k in [ "Ma", "Mb", "Mc" ]:
            M = getattr(maps[n], k)
            worst = max(worst, np.max(np.abs(getattr(closed, k) - M)) / np.max(np.abs(M)))
    growth = assembly_dynamics.growth_report(maps, body0=inertia.RigidBodyParams(p.m, p.I_q), r=geom.circumradius)
    tau = growth.time_constant_ratio[-1]
    passed = worst < 1e-9 and growth.ratio_b_converged and abs(tau - 2) < 0.2
    return "assembly_maps", passed, f"closed form error {worst:.1e}, Mb ratio {growth.ratio_b[-1]:.3f}, time constant ratio {tau:.3f}"

def check_faults():
    layout = faults.rotor_layout()
    problem = faults.build_allocation(layout, FAULTS["mass"])
    r = faults.min_failures(problem, 5, symmetries=faults.layout_symmetries(layout))
    return "fault_tolerance", r.cardinality == 5, f"minimum {r.cardinality}, witness {r.witness}"

def check_configs():
    all_configs = configs.enumerate_all()
    filtered = configs.filter_equilibrium(all_configs)
    classes = configs.reduce_symmetry(filtered.survivors)
    counts = (len(all_configs), filtered.n_after_torque, filtered.n_after_force // 2, len(classes))
    lift = sorted(c.lift_factor for c in classes)
    lift_error = np.max(np.abs(np.array(lift) - sorted([ 2., 2., 4 / np.sqrt(3) ])))
    passed = counts == (256, 32, 14, 3) and lift_error < 1e-12
    return "configurations", passed, f"counts {counts}, lift factor error {lift_error:.1e}"

def check_sim():
    p = dynamics.TetracopterParams.from_dict({})
    r = sim.hover_trial({ "p": 0.5 }, params=p)
    eigenvalues = sim.rate_loop_eigenvalues(dynamics.linearize(p))
    x0 = dynamics.state_vector(dynamics.trim_state())
    direction = np.zeros(12)
    direction[[3, 6, 9, 10]] = [ 0.5, 0.5, 1., 0.5 ] # phi, u, p, q
    ratio = sim.linear_nonlinear_gap(p, x0 + 0.1 * direction) / sim.linear_nonlinear_gap(p, x0 + 0.05 * direction)
    passed = (
        r.settling_time is not None and r.settling_time < 5
        and np.all(eigenvalues.real < 0)
        and 3.5 < ratio < 4.5
    )
    return "simulation", passed, f"settling time {r.settling_time} s, max eigenvalue real part {np.max(eigenvalues.real):.2f}, gap ratio {ratio:.2f}"

def run_checks(seed=CLI["seed"]):
    """Run all acceptance checks and return a list of ``(name, passed, detail)``."""
    return [
        check_disk_ratio(),
        check_dimensions(),
        check_inertia(seed),
        check_truss_counts(),
        check_truss_scenarios(),
        check_linearization(),
        check_assembly_maps(),
        check_faults(),
        check_configs(),
        check_sim(),
    ]
