"""tetrafractal: Tetracopters and their fractal assemblies, from geometry to hover control."""

__version__ = "0.1.0-dev"

from .geometry import make_tetrahedron, generate_assembly, rotor_disk_report, derive_dimensions
from .inertia import RigidBodyParams, assembly_body, assembly_mass
from .dynamics import TetracopterParams, linearize
from .truss import build_truss, scenario
from .faults import build_allocation, min_failures, rotor_layout
from .configs import enumerate_all, filter_equilibrium, reduce_symmetry
from .sim import hover_trial
