from .geometry import TestGeometry
from .inertia import TestInertia
from .dynamics import TestDynamics
from .assembly_dynamics import TestAssemblyDynamics
from .truss import TestTruss
from .faults import TestFaults
from .configs import TestConfigs
from .sim import TestSim
from .export import TestExport
from .cli import TestCli
from .verify import TestVerify
