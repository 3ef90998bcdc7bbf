"""
A module for the pin-jointed truss model of n-assemblies.

Every edge of every elementary tetrahedron is an axial member; vertices that are shared by two modules become a single joint. Forces are solved with the direct stiffness method. Positive axial forces are tensions.
"""

import networkx as nx
import numpy as np
import warnings
from itertools import combinations
from scipy import linalg, sparse
from scipy._lib._bunch import _make_tuple_bunch
from scipy.sparse.linalg import MatrixRankWarning, spsolve
from scipy.spatial import cKDTree

from .defaults import GEOMETRY, TRUSS
from .geometry import generate_assembly, make_tetrahedron, module_vertices
from .inertia import assembly_mass

SCENARIOS = [ "rest", "top", "bottom3" ]
MEMBER_COLUMNS = [ "member_id", "node_i", "node_j", "length_m", "axial_N", "P_cr_N", "margin_N" ]

class MechanismError(ValueError):
    def __init__(self, mode):
        super().__init__("The constrained stiffness matrix is singular; the truss is a mechanism")
        self.mode = mode

TrussSolution = _make_tuple_bunch(
    "TrussSolution",
    ["displacements", "axial_forces", "reactions"],
    ["equilibrium_residual", "method"]
)

ScenarioSummary = _make_tuple_bunch(
    "ScenarioSummary",
    ["kind", "n", "payload", "payload_ratio", "max_compression", "max_tension", "max_displacement"],
    ["thrust_exceeded", "reaction_ratio", "calibrated", "displacement_bound_met"]
)

BucklingResult = _make_tuple_bunch(
    "BucklingResult",
    ["critical_load", "margin", "flagged"]
)

PayloadSweep = _make_tuple_bunch(
    "PayloadSweep",
    ["payload", "max_compression", "max_tension"],
    ["thrust_exceeded"]
)

class Truss():
    """A pin-jointed space truss.

    Args:
        nodes: An ``(j, 3)`` array of joint coordinates [m].
        members: An ``(m, 2)`` array of joint indices.
        E: The Young's modulus [Pa].
        area: The cross-section area [m^2].
        I_section: The second moment of area [m^4].
        supports (optional): A list of ``(node, axes)`` pairs, where ``axes`` are indices into x, y, z.
        loads (optional): An ``(j, 3)`` array of nodal forces [N]. Defaults to zero.
    """
    def __init__(self, nodes, members, *, E, area, I_section, supports=[], loads=None):
        self.nodes = np.asarray(nodes, dtype=float)
        self.members = np.asarray(members, dtype=int).reshape(-1, 2)
        self.E = E
        self.area = area
        self.I_section = I_section
        self.supports = [ (int(i), tuple(axes)) for (i, axes) in supports ]
        self.loads = np.zeros_like(self.nodes) if loads is None else np.asarray(loads, dtype=float)
        self.corners = None # indices of the joints at 2**n R p_i, set by build_truss
        self.module_nodes = None # (4**n, 4) joint indices of every module, set by build_truss
        if len(set(map(tuple, np.sort(self.members, axis=1)))) != len(self.members):
            raise ValueError("Members must not be duplicated")
        if np.any(self.lengths <= 0):
            raise ValueError("All members must have a positive length")

    @property
    def n_joints(self):
        return len(self.nodes)

    @property
    def n_members(self):
        return len(self.members)

    @property
    def determinacy(self):
        """``m + 6 - 3j``, which is zero for an internally statically determinate truss."""
        return self.n_members + 6 - 3 * self.n_joints

    @property
    def lengths(self):
        return np.linalg.norm(self.nodes[self.members[:, 1]] - self.nodes[self.members[:, 0]], axis=1)

    @property
    def directions(self):
        """Unit vectors from the first to the second joint of each member."""
        d = self.nodes[self.members[:, 1]] - self.nodes[self.members[:, 0]]
        return d / np.linalg.norm(d, axis=1)[:, np.newaxis]

    def with_loads(self, loads, supports=None):
        """A copy of this truss with other loads (and supports)."""
        truss = Truss(
            self.nodes,
            self.members,
            E = self.E,
            area = self.area,
            I_section = self.I_section,
            supports = self.supports if supports is None else supports,
            loads = loads
        )
        truss.corners = self.corners
        truss.module_nodes = self.module_nodes
        return truss

def section_properties(outer_diameter, wall_thickness=None):
    """Area and second moment of area of a circular tube, or of a solid rod if ``wall_thickness`` is None."""
    inner_diameter = 0.
    if wall_thickness is not None:
        if not 0 < wall_thickness <= outer_diameter / 2:
            raise ValueError(f"wall_thickness must be in (0, {outer_diameter / 2}], got {wall_thickness}")
        inner_diameter = outer_diameter - 2 * wall_thickness
    area = np.pi / 4 * (outer_diameter**2 - inner_diameter**2)
    I_section = np.pi / 64 * (outer_diameter**4 - inner_diameter**4)
    return area, I_section

def critical_load(E, I_section, length, K):
    """Euler buckling load ``pi**2 E I / (K L)**2``."""
    return np.pi**2 * E * I_section / (K * np.asarray(length))**2

def calibrated_modulus(target_load, length, I_section, K):
    """The Young's modulus for which ``critical_load`` equals ``target_load``."""
    return target_load * (K * length)**2 / (np.pi**2 * I_section)

def default_supports(nodes, corners):
    """A statically determinate restraint of six DOF on the three bottom corners.

    Corner A is pinned in x, y, and z; corner B is fixed in z and in the horizontal axis that is most perpendicular to AB; corner C is fixed in z.
    """
    a, b, c = corners[:3]
    ab = nodes[b] - nodes[a]
    horizontal = int(np.argmin(np.abs(ab[:2])))
    return [ (a, (0, 1, 2)), (b, (horizontal, 2)), (c, (2,)) ]

def build_truss(geom, n, *, options=dict()):
    """Represent the n-assembly as a truss.

    Args:
        geom: A ``geometry.TetrahedronGeometry``.
        n: The depth of the assembly.
        options (optional): Overrides of ``defaults.TRUSS`` and of ``defaults.GEOMETRY["coincidence_tolerance"]``.

    Returns:
        truss: A ``Truss`` with ``6 * 4**n`` members, ``2 * (4**n + 1)`` joints, a calibrated section, the default supports, and zero loads.
    """
    options = TRUSS | { "coincidence_tolerance": GEOMETRY["coincidence_tolerance"] } | options
    asm = generate_assembly(geom, n)
    vertices = module_vertices(asm).reshape(-1, 3)

    # merge coincident vertices into joints
    graph = nx.Graph()
    graph.add_nodes_from(range(len(vertices)))
    graph.add_edges_from(cKDTree(vertices).query_pairs(options["coincidence_tolerance"] * geom.edge_length))
    components = sorted(nx.connected_components(graph), key=min)
    joint_of = np.empty(len(vertices), dtype=int)
    for j, component in enumerate(components):
        joint_of[list(component)] = j
    nodes = np.array([ vertices[min(component)] for component in components ])
    module_nodes = joint_of.reshape(-1, 4)
    members = sorted({
        tuple(sorted((int(module[i]), int(module[k]))))
        for module in module_nodes
        for (i, k) in combinations(range(4), 2)
    })
    if not nx.is_connected(nx.Graph(members)):
        raise ValueError("The truss is not connected")

    area, I_section = section_properties(options["outer_diameter"], options["wall_thickness"])
    E = calibrated_modulus(options["critical_load"], geom.edge_length, I_section, options["length_factor"])
    corner_points = 2**n * geom.circumradius * geom.vertex_dirs
    corners = [ int(np.argmin(np.linalg.norm(nodes - c, axis=1))) for c in corner_points ]
    truss = Truss(
        nodes,
        members,
        E = E,
        area = area,
        I_section = I_section,
        supports = default_supports(nodes, corners)
    )
    truss.corners = corners
    truss.module_nodes = module_nodes
    return truss

def stiffness_matrix(truss):
    """Global stiffness matrix in CSC format, assembled from ``EA/L`` direction-cosine blocks."""
    rows, cols, vals = [], [], []
    for (i, j), L, c in zip(truss.members, truss.lengths, truss.directions):
        k = truss.E * truss.area / L * np.outer(c, c)
        for (a, b, sign) in [ (i, i, 1), (i, j, -1), (j, i, -1), (j, j, 1) ]:
            r, s = np.meshgrid(3*a + np.arange(3), 3*b + np.arange(3), indexing="ij")
            rows.append(r.ravel())
            cols.append(s.ravel())
            vals.append(sign * k.ravel())
    n_dof = 3 * truss.n_joints
    return sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape = (n_dof, n_dof)
    ).tocsc()

def _fixed_dofs(truss):
    return sorted({ 3*i + axis for (i, axes) in truss.supports for axis in axes })

def _mechanism(K_ff, free, n_dof):
    """A ``MechanismError`` carrying the eigenvector of the smallest stiffness."""
    eigenvalues, eigenvectors = linalg.eigh(K_ff)
    mode = np.zeros(n_dof)
    mode[free] = eigenvectors[:, np.argmin(np.abs(eigenvalues))]
    return MechanismError(mode.reshape(-1, 3))

def solve(truss, *, method=None, dense_dof_limit=None):
    """Solve a truss with the direct stiffness method.

    Args:
        truss: A ``Truss`` with supports and loads.
        method (optional): "dense" (Cholesky factorization) or "sparse". Defaults to "dense" up to ``dense_dof_limit`` free DOF, and to "sparse" beyond.
        dense_dof_limit (optional): Defaults to ``defaults.TRUSS["dense_dof_limit"]``.

    Returns:
        solution: A ``TrussSolution`` with properties ``displacements`` (``(j, 3)``), ``axial_forces`` (``(m,)``), and ``reactions`` (``(j, 3)``, zero at free joints). The additional properties ``equilibrium_residual`` (the largest nodal force imbalance, relative to the largest load) and ``method`` are available by name.
    """
    if dense_dof_limit is None:
        dense_dof_limit = TRUSS["dense_dof_limit"]
    K = stiffness_matrix(truss)
    F = truss.loads.ravel()
    fixed = _fixed_dofs(truss)
    free = np.setdiff1d(np.arange(len(F)), fixed)
    if method is None:
        method = "dense" if len(free) <= dense_dof_limit else "sparse"
    K_ff = K[free, :][:, free]
    u = np.zeros(len(F))
    if method == "dense":
        K_ff = K_ff.toarray()
        try:
            c, lower = linalg.cho_factor(K_ff)
            if np.min(np.diag(c))**2 < 1e-10 * np.max(np.diag(K_ff)):
                raise linalg.LinAlgError("nearly singular")
        except linalg.LinAlgError:
            raise _mechanism(K_ff, free, len(F))
        u[free] = linalg.cho_solve((c, lower), F[free])
    elif method == "sparse":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", MatrixRankWarning)
            u[free] = spsolve(K_ff, F[free])
    else:
        raise ValueError("method must be either \"dense\" or \"sparse\"")

    reactions = K @ u - F
    reactions[free] = 0.
    reactions = reactions.reshape(-1, 3)
    displacements = u.reshape(-1, 3)
    axial_forces = truss.E * truss.area / truss.lengths * np.sum(
        (displacements[truss.members[:, 1]] - displacements[truss.members[:, 0]]) * truss.directions,
        axis = 1
    )
    scale = max(np.max(np.abs(truss.loads)), 1e-300)
    residual = _equilibrium_residual(truss, axial_forces, reactions) / scale
    if not np.isfinite(residual) or residual > 1e-6:
        raise _mechanism(K_ff.toarray() if sparse.issparse(K_ff) else K_ff, free, len(F))
    return TrussSolution(
        displacements,
        axial_forces,
        reactions,
        equilibrium_residual = residual,
        method = method
    )

def _equilibrium_residual(truss, axial_forces, reactions):
    """Largest nodal imbalance of member forces, loads, and reactions."""
    internal = np.zeros_like(truss.nodes)
    tension = axial_forces[:, np.newaxis] * truss.directions # pulls the first joint toward the second
    np.add.at(internal, truss.members[:, 0], tension)
    np.add.at(internal, truss.members[:, 1], -tension)
    return np.max(np.abs(internal + truss.loads + reactions))

def scenario_loads(truss, kind, n, payload, *, module_mass=None, g=9.81):
    """Nodal loads of a scenario; module weight and thrust are lumped equally on the 4 vertices of each module.

    Hover scenarios balance the weight of the assembly and of the payload with a uniform thrust per module, so that their loads are self-equilibrated.
    """
    if module_mass is None:
        module_mass = TRUSS["module_mass"]
    if kind not in SCENARIOS:
        raise ValueError(f"kind must be one of {SCENARIOS}, got {kind!r}")
    if payload < 0:
        raise ValueError(f"payload must be non-negative, got {payload}")
    if kind == "rest" and payload > 0:
        raise ValueError("The rest scenario does not carry a payload")
    loads = np.zeros_like(truss.nodes)
    per_vertex = module_mass * g / 4
    if kind != "rest":
        per_vertex -= (assembly_mass(module_mass, n) + payload) * g / 4**n / 4 # thrust
    for module in truss.module_nodes:
        np.add.at(loads[:, 2], module, -per_vertex)
    if kind == "top":
        loads[truss.corners[3], 2] -= payload * g
    elif kind == "bottom3":
        for c in truss.corners[:3]:
            loads[c, 2] -= payload * g / 3
    return loads

def scenario(kind, n, payload, *, geom=None, options=dict(), method=None):
    """Solve one of the load scenarios "rest", "top", or "bottom3".

    Args:
        kind: "rest" (self-weight on the supports), "top" (hovering with a payload at the apex), or "bottom3" (hovering with a payload split over the three bottom corners).
        n: The depth of the assembly.
        payload: The payload mass [kg].
        geom (optional): A ``geometry.TetrahedronGeometry``. Defaults to the prototype edge length.
        options (optional): Overrides of ``defaults.TRUSS``.
        method (optional): See ``solve``.

    Returns:
        (solution, summary, truss): The ``TrussSolution``, a ``ScenarioSummary``, and the loaded ``Truss``. The summary flags ``displacement_bound_met`` if all nodal displacements stay below ``options["displacement_bound"]``.
    """
    if geom is None:
        geom = make_tetrahedron(GEOMETRY["edge_length"])
    options = TRUSS | options
    truss = build_truss(geom, n, options=options)
    truss = truss.with_loads(scenario_loads(truss, kind, n, payload, module_mass=options["module_mass"]))
    mass = assembly_mass(options["module_mass"], n)
    thrust_exceeded = kind != "rest" and mass + payload > options["thrust_to_weight"] * mass
    if thrust_exceeded:
        warnings.warn(
            f"Hovering {payload} kg requires more than the thrust ceiling of the {n}-assembly",
            RuntimeWarning
        )
    solution = solve(truss, method=method)
    total_load = np.sum(np.abs(truss.loads))
    max_displacement = np.max(np.linalg.norm(solution.displacements, axis=1))
    summary = ScenarioSummary(
        kind,
        n,
        payload,
        payload / mass,
        max(0., -np.min(solution.axial_forces)),
        max(0., np.max(solution.axial_forces)),
        max_displacement,
        thrust_exceeded = thrust_exceeded,
        reaction_ratio = np.sum(np.abs(solution.reactions)) / total_load if total_load > 0 else 0.,
        calibrated = True, # the section reproduces a given critical load, it does not predict one
        displacement_bound_met = bool(max_displacement < options["displacement_bound"])
    )
    return solution, summary, truss

def buckling_check(truss, solution, K=None):
    """Euler buckling margins of all members.

    Returns:
        r: A ``BucklingResult`` with properties ``critical_load`` and ``margin`` (``P_cr - compression``) per member, and ``flagged`` (a boolean mask of members with a non-positive margin).
    """
    if K is None:
        K = TRUSS["length_factor"]
    if not truss.I_section > 0:
        raise ValueError("I_section must be positive")
    P_cr = critical_load(truss.E, truss.I_section, truss.lengths, K)
    margin = P_cr - np.maximum(-solution.axial_forces, 0.)
    return BucklingResult(P_cr, margin, margin <= 0)

def payload_sweep(kind, n, payloads, *, geom=None, options=dict()):
    """Maximum compression and tension for each payload; warns once if the thrust ceiling is exceeded."""
    max_compression, max_tension, thrust_exceeded = [], [], []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for payload in payloads:
            _, summary, _ = scenario(kind, n, payload, geom=geom, options=options)
            max_compression.append(summary.max_compression)
            max_tension.append(summary.max_tension)
            thrust_exceeded.append(summary.thrust_exceeded)
    if any(thrust_exceeded):
        warnings.warn(
            f"Payloads from {np.asarray(payloads)[thrust_exceeded][0]} kg exceed the thrust ceiling",
            RuntimeWarning
        )
    return PayloadSweep(
        np.asarray(payloads, dtype=float),
        np.array(max_compression),
        np.array(max_tension),
        thrust_exceeded = np.array(thrust_exceeded)
    )

def member_table(truss, solution, buckling):
    """Rows with the columns ``MEMBER_COLUMNS``, ready for CSV export."""
    return np.column_stack([
        np.arange(truss.n_members),
        truss.members,
        truss.lengths,
        solution.axial_forces,
        buckling.critical_load,
        buckling.margin,
    ])
