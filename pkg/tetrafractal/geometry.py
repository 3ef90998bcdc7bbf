"""
A module for the geometry of regular tetrahedra and their fractal assemblies.

An n-assembly consists of four (n-1)-assemblies, translated by ``2**(n-1) * r * p_i`` along the four vertex directions ``p_i`` of a regular tetrahedron with circumradius ``r``. The 0-assembly is the elementary module, a Tetracopter which carries one rotor in each of its four half-size sub-tetrahedra.
"""

import numpy as np
from scipy._lib._bunch import _make_tuple_bunch
from scipy.spatial import ConvexHull, cKDTree

from .defaults import GEOMETRY

class ResourceLimitError(ValueError):
    def __init__(self, n, max_depth):
        super().__init__(f"Depth {n} exceeds the maximum depth {max_depth}")
        self.n = n
        self.max_depth = max_depth

# canonical orientation: apex on +z, base in the plane z = -1/3, edge p_1 p_2 parallel to x
VERTEX_DIRS = np.array([
    [-np.sqrt(6)/3, -np.sqrt(2)/3, -1/3],
    [np.sqrt(6)/3, -np.sqrt(2)/3, -1/3],
    [0., 2*np.sqrt(2)/3, -1/3],
    [0., 0., 1.],
])

ELEMENTARY_SPINS = np.array([1, -1, 1, -1]) # +1 = counter-clockwise, seen from above

TetrahedronGeometry = _make_tuple_bunch(
    "TetrahedronGeometry",
    ["edge_length", "vertex_dirs", "circumradius"]
)

FractalAssembly = _make_tuple_bunch(
    "FractalAssembly",
    ["depth", "module_poses", "rotor_positions", "rotor_spins", "rotor_radius"],
    ["geometry"]
)

DiskReport = _make_tuple_bunch(
    "DiskReport",
    ["total_disk_area", "base_area", "ratio", "overlap_found"],
    ["n_rotors", "min_center_distance", "hex_packing_bound"]
)

TetraDimensions = _make_tuple_bunch(
    "TetraDimensions",
    ["a", "x", "d", "h", "R", "phi"],
    ["r_in", "phi_is_advisory"]
)

def make_tetrahedron(edge_length):
    """Create the canonical regular tetrahedron with a given edge length.

    Args:
        edge_length: The edge length [m], must be positive.

    Returns:
        geom: A ``TetrahedronGeometry`` with properties ``edge_length``, ``vertex_dirs`` (a ``(4, 3)`` array of unit vectors from the center to the vertices), and ``circumradius``.
    """
    if not edge_length > 0:
        raise ValueError(f"edge_length must be positive, got {edge_length}")
    return TetrahedronGeometry(
        float(edge_length),
        VERTEX_DIRS.copy(),
        np.sqrt(3/2) * edge_length / 2
    )

def rotor_radius(edge_length):
    """Radius of the rotor disks: the inradius of a sub-tetrahedron's base triangle."""
    return edge_length / (4 * np.sqrt(3))

def elementary_rotors(geom):
    """Rotor centers of the elementary module, relative to its center."""
    return geom.circumradius / 2 * geom.vertex_dirs

def generate_assembly(geom, n, *, max_depth=None):
    """Generate the n-assembly by the recursive generative rule.

    Modules are ordered child-major: the first quarter of ``module_poses`` belongs to the child that is translated along ``p_1``, and so on. Within each module, the four rotors follow the order of the vertex directions.

    Args:
        geom: A ``TetrahedronGeometry``.
        n: The depth of the assembly, a non-negative integer.
        max_depth (optional): The maximum depth. Defaults to ``GEOMETRY["max_depth"]``.

    Returns:
        asm: A ``FractalAssembly`` with ``4**n`` module poses and ``4**(n+1)`` rotors.
    """
    if max_depth is None:
        max_depth = GEOMETRY["max_depth"]
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if n > max_depth:
        raise ResourceLimitError(n, max_depth)
    poses = np.zeros((1, 3))
    for k in range(n):
        shifts = 2**k * geom.circumradius * geom.vertex_dirs
        poses = np.concatenate([ poses + s for s in shifts ])
    rotors = (poses[:, np.newaxis, :] + elementary_rotors(geom)).reshape(-1, 3)
    return FractalAssembly(
        n,
        poses,
        rotors,
        np.tile(ELEMENTARY_SPINS, len(poses)),
        rotor_radius(geom.edge_length),
        geometry = geom
    )

def module_vertices(asm):
    """Return the ``(4**n, 4, 3)`` array of elementary tetrahedron vertices."""
    geom = asm.geometry
    return asm.module_poses[:, np.newaxis, :] + geom.circumradius * geom.vertex_dirs

def rotor_disk_report(asm, *, tolerance=None):
    """Project all rotor disks onto the horizontal plane and compare their area with the base.

    Args:
        asm: A ``FractalAssembly``.
        tolerance (optional): The relative slack on the touching distance ``2 * rotor_radius``. Defaults to ``GEOMETRY["overlap_tolerance"]``.

    Returns:
        r: A ``DiskReport`` with properties ``total_disk_area``, ``base_area``, ``ratio``, and ``overlap_found``. The additional properties ``n_rotors``, ``min_center_distance``, and ``hex_packing_bound`` are available by name.
    """
    if tolerance is None:
        tolerance = GEOMETRY["overlap_tolerance"]
    centers = asm.rotor_positions[:, :2]
    n_rotors = len(centers)
    total_disk_area = n_rotors * np.pi * asm.rotor_radius**2
    base_area = ConvexHull(module_vertices(asm).reshape(-1, 3)[:, :2]).volume # 2D volume = area
    tree = cKDTree(centers)
    pairs = tree.query_pairs(2 * asm.rotor_radius * (1 - tolerance))
    if n_rotors > 1:
        min_center_distance = np.min(tree.query(centers, k=2)[0][:, 1])
    else:
        min_center_distance = np.inf
    return DiskReport(
        total_disk_area,
        base_area,
        total_disk_area / base_area,
        len(pairs) > 0,
        n_rotors = n_rotors,
        min_center_distance = min_center_distance,
        hex_packing_bound = 2 * np.pi / (3 * np.sqrt(3))
    )

def derive_dimensions(a):
    """Characteristic dimensions of a regular tetrahedron with edge ``a``.

    ``x`` is the distance from a face centroid to a vertex of that face, ``d`` the face inradius, ``h`` the height, and ``R`` the circumradius. The angle ``phi = arctan(r_in / x)`` uses the inradius ``r_in = R / 3`` of the tetrahedron; it is advisory because the symbol is ambiguous in the published formulas.
    """
    if not a > 0:
        raise ValueError(f"a must be positive, got {a}")
    R = np.sqrt(6) / 4 * a
    x = np.sqrt(3) / 3 * a
    r_in = R / 3
    return TetraDimensions(
        a,
        x,
        np.sqrt(3) / 6 * a,
        np.sqrt(6) / 3 * a,
        R,
        np.arctan(r_in / x),
        r_in = r_in,
        phi_is_advisory = True
    )
