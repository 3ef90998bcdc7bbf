"""
A module for the propeller configurations of a tetrahedral module with one propeller on each face.

Face ``i`` lies opposite to vertex ``i`` and has the outward normal ``-p_i``. A propeller with outward thrust pushes the module along ``-p_i``, one with inward thrust along ``p_i``. Each propeller also exerts a reaction torque along the face normal, signed by its spin. All thrust lines pass through the face centers, so that thrust forces have no moment about the center.
"""

import networkx as nx
import numpy as np
from itertools import permutations, product
from scipy._lib._bunch import _make_tuple_bunch
from scipy.spatial.transform import Rotation

from .geometry import VERTEX_DIRS

OUTWARD, INWARD = 1, -1
CCW, CW = 1, -1
CLASS_LABELS = { 3: "A", 1: "B", 2: "C" } # by the number of outward propellers

PropConfig = _make_tuple_bunch(
    "PropConfig",
    ["directions", "spins"]
)

Survivor = _make_tuple_bunch(
    "Survivor",
    ["config", "net_force", "attitude"]
)

FilterResult = _make_tuple_bunch(
    "FilterResult",
    ["survivors"],
    ["n_after_torque", "n_after_force"]
)

ConfigClass = _make_tuple_bunch(
    "ConfigClass",
    ["representative", "class_size", "outward_count", "lift_factor"],
    ["label", "members", "attitude"]
)

ProbeResult = _make_tuple_bunch(
    "ProbeResult",
    ["n_samples", "counterexamples"]
)

def enumerate_all():
    """All 256 configurations: 4 faces, each with an inward or outward thrust and a CCW or CW spin."""
    return [
        PropConfig(directions, spins)
        for directions in product((OUTWARD, INWARD), repeat=4)
        for spins in product((CCW, CW), repeat=4)
    ]

def net_force(config, speeds=np.ones(4)):
    """Net thrust force, in units of the thrust of one propeller at unit speed."""
    return np.sum([
        s**2 * d * (-p) for d, s, p in zip(config.directions, speeds, VERTEX_DIRS)
    ], axis=0)

def net_torque(config, speeds=np.ones(4), *, kappa=1.0):
    """Net torque about the center; ``kappa`` is the ratio of reaction torque to thrust."""
    face_centers = -VERTEX_DIRS / 3 # inradius of a unit-circumradius tetrahedron
    thrust_moment = np.sum([
        np.cross(c, s**2 * d * (-p))
        for c, d, s, p in zip(face_centers, config.directions, speeds, VERTEX_DIRS)
    ], axis=0)
    reaction = np.sum([
        kappa * spin * s**2 * (-p)
        for spin, s, p in zip(config.spins, speeds, VERTEX_DIRS)
    ], axis=0)
    return thrust_moment + reaction

def equilibrium_attitude(force):
    """The rotation (body to inertial) that turns ``force`` upward, against gravity."""
    f = np.asarray(force, dtype=float) / np.linalg.norm(force)
    axis = np.cross(f, [ 0., 0., 1. ])
    sin_angle = np.linalg.norm(axis)
    angle = np.arctan2(sin_angle, f[2])
    if sin_angle < 1e-12:
        axis = np.array([ 1., 0., 0. ]) # f is vertical; any horizontal axis
        sin_angle = 1.
    return Rotation.from_rotvec(axis / sin_angle * angle).as_matrix()

def filter_equilibrium(configs, *, tolerance=1e-12, kappa=1.0):
    """Keep configurations with zero torque and non-zero force at equal speeds.

    Returns:
        r: A ``FilterResult`` with property ``survivors`` (a list of ``Survivor`` with properties ``config``, ``net_force``, and ``attitude``). The counts ``n_after_torque`` and ``n_after_force`` are available by name.
    """
    balanced = [ c for c in configs if np.linalg.norm(net_torque(c, kappa=kappa)) < tolerance ]
    survivors = [
        Survivor(c, f, equilibrium_attitude(f))
        for c in balanced
        for f in [ net_force(c) ]
        if np.linalg.norm(f) > tolerance
    ]
    return FilterResult(survivors, n_after_torque=len(balanced), n_after_force=len(survivors))

def tetrahedral_rotations():
    """The 12 proper rotations of the tetrahedron.

    Returns:
        rotations: A list of ``(perm, R)`` with ``R @ p_i = p_{perm[i]}``.
    """
    rotations = []
    for perm in permutations(range(4)):
        R = 3/4 * np.sum([ np.outer(VERTEX_DIRS[perm[i]], VERTEX_DIRS[i]) for i in range(4) ], axis=0)
        if np.linalg.det(R) > 0:
            rotations.append((perm, R))
    return rotations

def _rotate(config, perm):
    directions = [ 0 ] * 4
    spins = [ 0 ] * 4
    for i in range(4):
        directions[perm[i]] = config.directions[i]
        spins[perm[i]] = config.spins[i]
    return PropConfig(tuple(directions), tuple(spins))

def lift_factor(config):
    """Vertical thrust at the equilibrium attitude, in units of the thrust of one propeller."""
    f = net_force(config)
    return (equilibrium_attitude(f) @ f)[2]

def reduce_symmetry(survivors, *, spin=CCW):
    """Group the survivors of one spin class into orbits of the rotation group.

    Returns:
        classes: A list of ``ConfigClass``, sorted by label, with properties ``representative``, ``class_size``, ``outward_count``, and ``lift_factor``. The properties ``label`` ("A", "B", or "C"), ``members``, and ``attitude`` are available by name.
    """
    configs = [ s.config for s in survivors if all(x == spin for x in s.config.spins) ]
    graph = nx.Graph()
    graph.add_nodes_from(configs)
    for c in configs:
        for perm, _ in tetrahedral_rotations():
            graph.add_edge(c, _rotate(c, perm))
    classes = []
    for component in nx.connected_components(graph):
        members = sorted(component)
        representative = members[0]
        outward_count = sum(d == OUTWARD for d in representative.directions)
        classes.append(ConfigClass(
            representative,
            len(members),
            outward_count,
            lift_factor(representative),
            label = CLASS_LABELS.get(outward_count, "?"),
            members = members,
            attitude = equilibrium_attitude(net_force(representative))
        ))
    return sorted(classes, key=lambda c: c.label)

def mirror(config):
    """Reverse all spins."""
    return PropConfig(config.directions, tuple(-s for s in config.spins))

def probe_converse(n_samples=100, *, seed=0, tolerance=1e-9, kappa=1.0):
    """Count configurations with zero net torque at random unequal speeds.

    Returns:
        r: A ``ProbeResult`` with properties ``n_samples`` (configurations times speed samples) and ``counterexamples``.
    """
    rng = np.random.RandomState(seed)
    configs = enumerate_all()
    counterexamples = 0
    for _ in range(n_samples):
        speeds = rng.uniform(0.5, 1.5, size=4)
        for c in configs:
            if np.linalg.norm(net_torque(c, speeds, kappa=kappa)) < tolerance:
                counterexamples += 1
    return ProbeResult(n_samples * len(configs), counterexamples)
