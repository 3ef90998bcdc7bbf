"""
A module for the linearized force and moment maps of n-assemblies.

The maps of an n-assembly relate the ``4**(n+1)`` rotor speed deltas to the total thrust (``Ma``), the moment of the differential thrust (``Mb``), and the rotor reaction torques (``Mc``); ``Md`` relates the body rates to the gyroscopic rotor torques. Columns are ordered child-major, like the modules of ``geometry.generate_assembly``. Only a uniform trim, where all rotors spin at the same speed ``u0``, is supported.
"""

import numpy as np
from scipy._lib._bunch import _make_tuple_bunch

from .dynamics import ROTOR_SIGNS
from .geometry import elementary_rotors, make_tetrahedron
from .inertia import assembly_body

class UnsupportedTrimError(NotImplementedError):
    def __init__(self, u0):
        super().__init__(f"Only a uniform trim is supported, got rotor speeds {u0}")

AssemblyLinearMaps = _make_tuple_bunch(
    "AssemblyLinearMaps",
    ["n", "Ma", "Mb", "Mc", "Md", "u0"]
)

GrowthReport = _make_tuple_bunch(
    "GrowthReport",
    ["n", "norm_a", "norm_b", "ratio_a", "ratio_b"],
    ["time_constant", "time_constant_ratio", "ratio_b_converged"]
)

def cross_matrix(v):
    """The skew-symmetric matrix ``[v]_x`` with ``[v]_x @ w = cross(v, w)``."""
    x, y, z = v
    return np.array([
        [0., -z, y],
        [z, 0., -x],
        [-y, x, 0.],
    ])

def _uniform_u0(u0):
    u0 = np.atleast_1d(np.asarray(u0, dtype=float))
    if np.ptp(u0) > 0:
        raise UnsupportedTrimError(u0)
    return float(u0[0])

def elementary_maps(model, p, *, geom=None, u0=None):
    """The maps of the elementary module, taken from its linear model.

    ``Ma`` and ``Mc`` are the thrust and yaw-torque sensitivities of the model. ``Mb`` is the moment of each rotor's thrust about the module center, ``r_j x Ma[:, j]`` with the rotor centers ``r_j`` of ``geometry.elementary_rotors``, so that it shares its frame with the offsets of ``recurse_maps``.

    Args:
        model: A ``dynamics.LinearModel``.
        p: The ``dynamics.TetracopterParams`` that ``model`` was linearized with.
        geom (optional): A ``geometry.TetrahedronGeometry``. Defaults to the edge length ``p.a``.
        u0 (optional): The trim rotor speeds, a scalar or 4 equal values. Defaults to ``model.omega0``; other speeds scale ``Ma``, ``Mb``, and ``Mc``, which are linear in the trim speed.

    Returns:
        maps: An ``AssemblyLinearMaps`` with ``n = 0``.
    """
    if geom is None:
        geom = make_tetrahedron(p.a)
    u0 = _uniform_u0(model.omega0 if u0 is None else u0)
    scale = u0 / model.omega0
    Ma = scale * p.m * model.B[6:9, :]
    Mb = np.cross(elementary_rotors(geom), Ma.T).T
    Mc = scale * p.I_q @ model.B[9:12, :]
    Mc[0:2, :] = 0 # the rotor reaction torques act about the yaw axis only
    Md = p.I_r * np.sum(ROTOR_SIGNS * u0) * np.array([
        [0., 1., 0.],
        [-1., 0., 0.],
        [0., 0., 0.],
    ])
    return AssemblyLinearMaps(0, Ma, Mb, Mc, Md, u0)

def recurse_maps(child, geom):
    """Combine four identical n-assemblies into the maps of the (n+1)-assembly.

    Args:
        child: The ``AssemblyLinearMaps`` of the n-assembly.
        geom: The ``geometry.TetrahedronGeometry`` of the elementary module.

    Returns:
        maps: The ``AssemblyLinearMaps`` of the (n+1)-assembly.
    """
    u0 = _uniform_u0(child.u0)
    shift = 2**child.n * geom.circumradius
    Mb = np.hstack([
        shift * cross_matrix(p_i) @ child.Ma + child.Mb
        for p_i in geom.vertex_dirs
    ])
    return AssemblyLinearMaps(
        child.n + 1,
        np.tile(child.Ma, 4),
        Mb,
        np.tile(child.Mc, 4),
        4 * child.Md, # all children share the body rates
        u0
    )

def q_matrix(Ma0, geom):
    """The ``3 x 16`` matrix ``[[p_1]_x Ma0 | ... | [p_4]_x Ma0]``."""
    return np.hstack([ cross_matrix(p_i) @ Ma0 for p_i in geom.vertex_dirs ])

def selection_matrix(n, k):
    """Selector ``1_{4**(n-1-k)}^T (x) I_4 (x) 1_{4**k}^T (x) I_4`` of the child index at level k."""
    if not 0 <= k < n:
        raise ValueError(f"k must be in [0, {n}), got {k}")
    return np.kron(
        np.kron(np.ones((1, 4**(n-1-k))), np.eye(4)),
        np.kron(np.ones((1, 4**k)), np.eye(4))
    )

def closed_form_maps(M0, geom, n):
    """The maps of the n-assembly, evaluated without recursion.

    ``Mb_n = 1_{4**n}^T (x) Mb_0 + r Q sum_k 2**k S_k``, where ``S_k`` is the ``selection_matrix(n, k)``.
    """
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    u0 = _uniform_u0(M0.u0)
    ones = np.ones((1, 4**n))
    Mb = np.kron(ones, M0.Mb)
    if n > 0:
        Q = q_matrix(M0.Ma, geom)
        Mb = Mb + geom.circumradius * Q @ np.sum([
            2**k * selection_matrix(n, k) for k in range(n)
        ], axis=0)
    return AssemblyLinearMaps(
        n,
        np.kron(ones, M0.Ma),
        Mb,
        np.kron(ones, M0.Mc),
        4**n * M0.Md,
        u0
    )

def assembly_sequence(M0, geom, n_max):
    """Maps for n = 0..n_max, by recursion."""
    maps = [ M0 ]
    for _ in range(n_max):
        maps.append(recurse_maps(maps[-1], geom))
    return maps

def moment_consistency(child, geom, i, delta):
    """Moment of the parent when only child ``i`` receives the control ``delta``.

    Returns:
        (predicted, expected): The parent's ``Mb`` applied to the padded control and ``p_i^{n+1} x (Ma delta) + Mb delta`` of the child.
    """
    parent = recurse_maps(child, geom)
    width = child.Ma.shape[1]
    u = np.zeros(4 * width)
    u[i*width:(i+1)*width] = delta
    offset = 2**child.n * geom.circumradius * geom.vertex_dirs[i]
    expected = np.cross(offset, child.Ma @ delta) + child.Mb @ delta
    return parent.Mb @ u, expected

def growth_report(maps, *, body0=None, r=None, tolerance=0.05):
    """Induced infinity norms of ``Ma`` and ``Mb`` and their consecutive ratios.

    Args:
        maps: A list of ``AssemblyLinearMaps`` for n = 0..N, with N >= 2.
        body0 (optional): The ``inertia.RigidBodyParams`` of the elementary module. If given, together with ``r``, the report includes ``|J_n| / |Mb_n|``.
        r (optional): The circumradius of the elementary module.
        tolerance (optional): The relative tolerance for ``ratio_b_converged``. Defaults to 0.05.

    Returns:
        report: A ``GrowthReport`` with properties ``n``, ``norm_a``, ``norm_b``, ``ratio_a``, and ``ratio_b``. The additional properties ``time_constant``, ``time_constant_ratio``, and ``ratio_b_converged`` (whether the last ``ratio_b`` is within ``tolerance`` of 8) are available by name.
    """
    if len(maps) < 3:
        raise ValueError("growth_report requires maps for at least n = 0, 1, 2")
    n = np.array([ M.n for M in maps ])
    norm_a = np.array([ np.linalg.norm(M.Ma, np.inf) for M in maps ])
    norm_b = np.array([ np.linalg.norm(M.Mb, np.inf) for M in maps ])
    time_constant = None
    time_constant_ratio = None
    if body0 is not None and r is not None:
        time_constant = np.array([
            np.linalg.norm(assembly_body(body0, r, n_k).inertia, np.inf) / norm_b[i]
            for i, n_k in enumerate(n)
        ])
        time_constant_ratio = time_constant[1:] / time_constant[:-1]
    ratio_b = norm_b[1:] / norm_b[:-1]
    return GrowthReport(
        n,
        norm_a,
        norm_b,
        norm_a[1:] / norm_a[:-1],
        ratio_b,
        time_constant = time_constant,
        time_constant_ratio = time_constant_ratio,
        ratio_b_converged = bool(abs(ratio_b[-1] - 8) < tolerance * 8)
    )
