"""
A module for the motor fault tolerance of the 16-rotor 1-assembly.

The hover equilibrium is reachable with a set of failed rotors if the bounded linear system ``D @ F = [0, 0, 0, W]`` has a solution, where ``F`` are the squared rotor speeds and the rows of ``D`` are the roll moment, the pitch moment, the yaw moment, and the thrust.
"""

import numpy as np
import os
from concurrent.futures import ThreadPoolExecutor
from itertools import combinations
from scipy._lib._bunch import _make_tuple_bunch
from scipy.optimize import lsq_linear
from scipy.spatial import cKDTree

from .defaults import CLI, FAULTS, GEOMETRY
from .geometry import ELEMENTARY_SPINS, generate_assembly, make_tetrahedron

RotorLayout = _make_tuple_bunch(
    "RotorLayout",
    ["r_x", "r_y", "spins", "k", "b"]
)

FaultProblem = _make_tuple_bunch(
    "FaultProblem",
    ["D", "B_target", "failed", "lb", "ub"]
)

FaultSolution = _make_tuple_bunch(
    "FaultSolution",
    ["F", "residual", "feasible"],
    ["scaled_residual", "optimality"]
)

MinFailures = _make_tuple_bunch(
    "MinFailures",
    ["cardinality", "witness"],
    ["counts", "lower_bound"]
)

def lift_drag_constants(options=dict()):
    """Lift constant ``k = rho A C_L r**2 / 2`` and yaw-torque constant ``b = rho A C_D r**3 / 2`` of one propeller."""
    options = FAULTS | options
    r = options["prop_radius"]
    area = np.pi * r**2
    q = options["air_density"] * area / 2
    return q * options["lift_coefficient"] * r**2, q * options["drag_coefficient"] * r**3

def module_spins(orientations):
    """Rotor spins of the 1-assembly when each Tetracopter is turned about its vertical axis.

    A turn by ``o * 120`` degrees maps the frame onto itself and moves the rotor of base slot ``j`` to slot ``j - o`` (mod 3); the apex rotor stays.

    Args:
        orientations: One turn ``o`` in {0, 1, 2} per module.
    """
    orientations = tuple(orientations)
    if len(orientations) != 4 or any(o not in (0, 1, 2) for o in orientations):
        raise ValueError(f"orientations must be four turns in {{0, 1, 2}}, got {orientations}")
    return np.concatenate([
        np.append(np.roll(ELEMENTARY_SPINS[:3], -o), ELEMENTARY_SPINS[3])
        for o in orientations
    ])

def rotor_layout(geom=None, *, options=dict()):
    """Horizontal rotor offsets and spins of four Tetracopters, assembled by the generative rule.

    With identical orientations, one whole base module can fail while the remaining rotors of its spin group cannot carry half of the weight; ``FAULTS["module_orientations"]`` turns the modules to spread the spins.

    Returns:
        layout: A ``RotorLayout`` with properties ``r_x`` and ``r_y`` (offsets [m] from the center of the 1-assembly), ``spins`` (+1 or -1), ``k``, and ``b``.
    """
    options = FAULTS | options
    if geom is None:
        geom = make_tetrahedron(GEOMETRY["edge_length"])
    asm = generate_assembly(geom, 1)
    k, b = lift_drag_constants(options)
    return RotorLayout(
        asm.rotor_positions[:, 0],
        asm.rotor_positions[:, 1],
        module_spins(options["module_orientations"]).astype(float),
        k,
        b
    )

def default_bounds(layout, *, options=dict()):
    """Bounds on the squared rotor speeds: zero and the full-throttle ceiling of a single Tetracopter.

    At hover, a Tetracopter spins its rotors at ``m g / (4 k)``. Its thrust-to-weight ratio at partial throttle scales with the squared throttle.
    """
    options = FAULTS | options
    hover = options["module_mass"] * options["g"] / (4 * layout.k)
    return 0., hover * options["thrust_to_weight"] / options["throttle"]**2

def build_allocation(layout, m1, *, g=None, lb=None, ub=None, failed=()):
    """Build the allocation problem of a layout.

    Args:
        layout: A ``RotorLayout``.
        m1: The mass of the assembly [kg]; the thrust row targets its weight ``m1 * g``.
        g (optional): Defaults to ``defaults.FAULTS["g"]``.
        lb, ub (optional): Bounds on the squared rotor speeds. Default to ``default_bounds(layout)``.
        failed (optional): Indices of failed rotors. Defaults to none.

    Returns:
        problem: A ``FaultProblem`` with properties ``D`` (4x16), ``B_target``, ``failed``, ``lb``, and ``ub``.
    """
    if g is None:
        g = FAULTS["g"]
    default_lb, default_ub = default_bounds(layout)
    lb = default_lb if lb is None else lb
    ub = default_ub if ub is None else ub
    if not 0 <= lb <= ub:
        raise ValueError(f"bounds must satisfy 0 <= lb <= ub, got lb={lb}, ub={ub}")
    D = np.array([
        layout.k * layout.r_y, # roll moment L
        -layout.k * layout.r_x, # pitch moment M
        layout.b * layout.spins, # yaw moment N
        layout.k * np.ones(len(layout.spins)), # thrust Z
    ])
    return FaultProblem(D, np.array([ 0., 0., 0., m1 * g ]), tuple(sorted(failed)), lb, ub)

def with_failures(problem, failed):
    return FaultProblem(problem.D, problem.B_target, tuple(sorted(failed)), problem.lb, problem.ub)

def solve_allocation(problem, *, tolerance=None):
    """Solve the bounded least-squares problem with failed rotors held at zero.

    Rows of ``D`` are equilibrated before the active-set solve (``scipy.optimize.lsq_linear`` with ``method="bvls"``), which leaves the set of exact solutions unchanged.

    Returns:
        solution: A ``FaultSolution`` with properties ``F``, ``residual`` (``|D F - B|``), and ``feasible``. The additional properties ``scaled_residual`` (on the equilibrated rows, relative to ``|B|``) and ``optimality`` (the first-order optimality of the solve) are available by name.
    """
    if tolerance is None:
        tolerance = FAULTS["tolerance"]
    n = problem.D.shape[1]
    active = np.setdiff1d(np.arange(n), problem.failed)
    F = np.zeros(n)
    row_scale = 1 / np.linalg.norm(problem.D, axis=1)
    B = row_scale * problem.B_target
    optimality = 0.
    if len(active) > 0 and problem.ub <= problem.lb:
        F[active] = problem.lb # lsq_linear requires lb < ub
    elif len(active) > 0:
        column_scale = problem.B_target[3] / np.sum(problem.D[3]) # hover share of one rotor
        A = row_scale[:, np.newaxis] * problem.D[:, active] * column_scale
        r = lsq_linear(
            A,
            B,
            bounds = (problem.lb / column_scale, problem.ub / column_scale),
            method = "bvls",
            tol = 1e-12
        )
        F[active] = np.clip(r.x * column_scale, problem.lb, problem.ub)
        optimality = r.optimality
    scaled_residual = np.linalg.norm(row_scale * (problem.D @ F) - B) / np.linalg.norm(B)
    return FaultSolution(
        F,
        np.linalg.norm(problem.D @ F - problem.B_target),
        bool(scaled_residual < tolerance),
        scaled_residual = scaled_residual,
        optimality = optimality
    )

def n_threads():
    """Worker count of the fault search, from the environment variable ``TETRAFRACTAL_THREADS``."""
    value = os.environ.get(CLI["threads_variable"], "1")
    try:
        n = int(value)
    except ValueError:
        raise ValueError(f"{CLI['threads_variable']} must be a positive integer, got {value!r}")
    if n < 1:
        raise ValueError(f"{CLI['threads_variable']} must be a positive integer, got {value!r}")
    return n

def _is_canonical(failed, symmetries):
    return all(failed <= tuple(sorted(perm[i] for i in failed)) for perm in symmetries)

def min_failures(problem, max_card, *, threads=None, symmetries=()):
    """Exhaustively search for the smallest set of failed rotors that makes hovering infeasible.

    Cardinalities are searched in ascending order and, within one cardinality, all sets are solved in lexicographic order; the search stops after the first cardinality with an infeasible set. With ``symmetries``, only the lexicographically smallest set of each equivalence class is solved; the witness is the same, since the first infeasible set is always the smallest of its class.

    Args:
        problem: A ``FaultProblem`` without failures.
        max_card: The largest cardinality to search, at most 16.
        threads (optional): The number of worker threads. Defaults to ``n_threads()``.
        symmetries (optional): Rotor permutations from ``layout_symmetries``. Defaults to none.

    Returns:
        r: A ``MinFailures`` with properties ``cardinality`` (None if no infeasible set was found) and ``witness`` (the first infeasible set). The additional properties ``counts`` (a dict from each searched cardinality to ``(n_feasible, n_infeasible)``, counting solved sets only) and ``lower_bound`` (``max_card + 1`` if no infeasible set was found) are available by name.
    """
    n = problem.D.shape[1]
    if not 0 <= max_card <= n:
        raise ValueError(f"max_card must be in [0, {n}], got {max_card}")
    if threads is None:
        threads = n_threads()
    counts = {}
    with ThreadPoolExecutor(max_workers=threads) as executor:
        for c in range(max_card + 1):
            sets = [ s for s in combinations(range(n), c) if _is_canonical(s, symmetries) ]
            feasible = list(executor.map(
                lambda failed: solve_allocation(with_failures(problem, failed)).feasible,
                sets
            ))
            counts[c] = (sum(feasible), len(feasible) - sum(feasible))
            if not all(feasible):
                witness = sets[feasible.index(False)]
                return MinFailures(c, witness, counts=counts, lower_bound=c)
    return MinFailures(None, None, counts=counts, lower_bound=max_card + 1)

def layout_symmetries(layout, *, tolerance=None):
    """Rotor permutations induced by planar rotations and reflections that map the layout onto itself.

    A map qualifies if it preserves all spins or reverses all of them; the yaw target is zero, so both leave feasibility unchanged.

    Returns:
        perms: A list of index arrays ``perm`` with ``perm[i]`` being the image of rotor ``i``; the identity comes first.
    """
    if tolerance is None:
        tolerance = GEOMETRY["coincidence_tolerance"]
    points = np.column_stack((layout.r_x, layout.r_y))
    scale = np.max(np.linalg.norm(points, axis=1))
    tree = cKDTree(points)
    transforms = []
    for k in range(6):
        angle = k * np.pi / 3
        c, s = np.cos(angle), np.sin(angle)
        transforms.append(np.array([[c, -s], [s, c]])) # rotation
        c2, s2 = np.cos(angle / 2), np.sin(angle / 2)
        transforms.append(np.array([[c2**2 - s2**2, 2*c2*s2], [2*c2*s2, s2**2 - c2**2]])) # reflection
    perms = []
    for T in transforms:
        distance, perm = tree.query(points @ T.T)
        if np.max(distance) > tolerance * scale or len(set(perm)) != len(perm):
            continue
        spins = layout.spins[perm]
        if np.all(spins == layout.spins) or np.all(spins == -layout.spins):
            perms.append(perm)
    return perms

def bound_sensitivity(layout, m1, max_card, *, multipliers=None, g=None, threads=None, symmetries=()):
    """Repeat ``min_failures`` for upper bounds that are multiples of the hover share ``m1 g / (16 k)``.

    A multiplier of None stands for ``default_bounds``.

    Returns:
        rows: A list of ``(multiplier, ub, MinFailures)`` tuples.
    """
    if multipliers is None:
        multipliers = FAULTS["bound_sweep"]
    if g is None:
        g = FAULTS["g"]
    share = m1 * g / (len(layout.spins) * layout.k)
    rows = []
    for multiplier in multipliers:
        ub = default_bounds(layout)[1] if multiplier is None else multiplier * share
        problem = build_allocation(layout, m1, g=g, ub=ub)
        rows.append((multiplier, ub, min_failures(problem, max_card, threads=threads, symmetries=symmetries)))
    return rows
