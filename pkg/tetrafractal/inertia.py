"""
A module for the mass and the inertia tensor of n-assemblies.

The centers of mass of all assemblies are assumed to lie at the centers of their bounding tetrahedra.
"""

import numpy as np
from scipy._lib._bunch import _make_tuple_bunch

from .geometry import VERTEX_DIRS

MAX_MASS_DEPTH = 30 # 4**30 is still exact in double precision

RigidBodyParams = _make_tuple_bunch(
    "RigidBodyParams",
    ["mass", "inertia"]
)

GrowthSequence = _make_tuple_bunch(
    "GrowthSequence",
    ["n", "normalized_norm", "limit"]
)

def check_body(body, *, rtol=1e-12):
    """Raise a ``ValueError`` if ``body`` is not a physically valid rigid body."""
    J = np.asarray(body.inertia, dtype=float)
    if J.shape != (3, 3):
        raise ValueError(f"inertia must be 3x3, got shape {J.shape}")
    if not body.mass > 0:
        raise ValueError(f"mass must be positive, got {body.mass}")
    scale = max(np.max(np.abs(J)), np.finfo(float).tiny)
    if np.max(np.abs(J - J.T)) > rtol * scale:
        raise ValueError("inertia must be symmetric")
    moments = np.linalg.eigvalsh(J)
    if np.min(moments) < -1e-10 * scale:
        raise ValueError(f"inertia must be positive semi-definite, got principal moments {moments}")
    for i in range(3): # J_xx <= J_yy + J_zz, cyclic
        if moments[i] > moments[(i+1) % 3] + moments[(i+2) % 3] + 1e-10 * scale:
            raise ValueError(f"principal moments {moments} violate the triangle inequality")
    return body

def parallel_axis(mass, inertia, d):
    """Inertia about the origin of a body whose center of mass is at ``d``."""
    d = np.asarray(d, dtype=float)
    return inertia + mass * (d @ d * np.eye(3) - np.outer(d, d))

def point_mass_inertia(masses, positions):
    """Inertia of point masses about the origin.

    Args:
        masses: A scalar or an array of masses [kg].
        positions: An ``(k, 3)`` array of positions [m].

    Returns:
        J: The ``(3, 3)`` inertia tensor [kg m^2].
    """
    positions = np.atleast_2d(positions)
    masses = np.broadcast_to(masses, len(positions))
    J = np.zeros((3, 3))
    for m_k, x_k in zip(masses, positions):
        J = parallel_axis(m_k, J, x_k)
    return J

def compose_step(body, n, r, *, vertex_dirs=VERTEX_DIRS):
    """Compose four n-assemblies into the (n+1)-assembly with the parallel axis theorem.

    Args:
        body: The ``RigidBodyParams`` of the n-assembly.
        n: The depth of ``body``.
        r: The circumradius of the elementary module [m].
        vertex_dirs (optional): The four unit vectors along which the children are translated.

    Returns:
        body: The ``RigidBodyParams`` of the (n+1)-assembly.
    """
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    J = np.zeros((3, 3))
    for p_i in vertex_dirs:
        J += parallel_axis(body.mass, np.asarray(body.inertia), 2**n * r * p_i)
    return RigidBodyParams(4 * body.mass, J)

def closed_form(body0, r, n):
    """The (n+1)-assembly, evaluated without recursion.

    ``J_{n+1} = (2/9) 16**(n+1) m r**2 I + 4**(n+1) (J - (2/9) m r**2 I)``, where ``m`` and ``J`` belong to the elementary module ``body0``.
    """
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    m = body0.mass
    c = 2/9 * m * r**2 * np.eye(3)
    J = 16.0**(n+1) * c + 4.0**(n+1) * (np.asarray(body0.inertia) - c)
    return RigidBodyParams(assembly_mass(m, n+1), J)

def assembly_mass(m, n):
    """Mass ``4**n * m`` of the n-assembly."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if n > MAX_MASS_DEPTH:
        raise ValueError(f"n must not exceed {MAX_MASS_DEPTH}, got {n}")
    return 4**n * m

def assembly_body(body0, r, n):
    """The n-assembly (not the (n+1)-assembly) built from the elementary module ``body0``."""
    if n == 0:
        return RigidBodyParams(body0.mass, np.asarray(body0.inertia, dtype=float))
    return closed_form(body0, r, n-1)

def recursive_body(body0, r, n):
    """The n-assembly, by n applications of ``compose_step``."""
    body = RigidBodyParams(body0.mass, np.asarray(body0.inertia, dtype=float))
    for k in range(n):
        body = compose_step(body, k, r)
    return body

def growth_sequence(body0, r, n_max):
    """Spectral norms ``|J_n| / 16**n`` for n = 0..n_max, which converge to ``(2/9) m r**2``."""
    n = np.arange(n_max + 1)
    normalized_norm = np.array([
        np.linalg.norm(assembly_body(body0, r, n_k).inertia, 2) / 16.0**n_k
        for n_k in n
    ])
    return GrowthSequence(n, normalized_norm, 2/9 * body0.mass * r**2)

def random_body(rng, n_points=6):
    """A physically valid random body: point masses at random positions around their center of mass."""
    masses = rng.uniform(0.1, 1., size=n_points)
    positions = rng.normal(size=(n_points, 3))
    positions -= masses @ positions / np.sum(masses)
    return RigidBodyParams(np.sum(masses), point_mass_inertia(masses, positions))
