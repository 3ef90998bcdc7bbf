"""Physical and numerical defaults.

Every analysis reads its defaults from the dicts below and merges user overrides
on top of them, e.g. ``TRUSS | {"length_factor": 1.0}``. Values marked
*prototype* are measured on the flight-tested Tetracopter; values marked
*assumed* are not published and were chosen to be physically plausible; values
marked *calibrated* are derived so that a published figure is reproduced.
"""

import numpy as np

GEOMETRY = {
    "edge_length": 0.24455, # [m] prototype frame edge a
    "max_depth": 10, # 4**10 modules, bounds memory
    "coincidence_tolerance": 1e-9, # relative to the edge length, merges shared vertices
    "overlap_tolerance": 1e-9, # relative slack on 2*rotor_radius before disks count as overlapping
}

TETRACOPTER = {
    "m": 0.740, # [kg] prototype mass
    "a": 0.24455, # [m] prototype frame edge
    # [kg m^2] four lumped submodules of mass m/4 at half the circumradius: (2/3) m (r/2)^2 I_3
    "I_q": (2.7657e-3 * np.eye(3)).tolist(),
    "I_r": 3.0e-6, # [kg m^2] rotor axial inertia, assumed (5 inch propeller + bell)
    "k_T": 1.0e-5, # [N s^2] thrust coefficient, assumed
    "k_D": 1.6e-7, # [N m s^2] rotor drag-torque coefficient, assumed
    "k_F": 1.0e-6, # [N m s] rotor friction coefficient, assumed
    "k_x": 0.05, "k_y": 0.05, "k_z": 0.05, # [N s^2/m^2] body drag, assumed
    "k_p": 1.0e-3, "k_q": 1.0e-3, "k_r": 1.0e-3, # [N m s^2] rotational drag, assumed
    "g": 9.81, # [m/s^2]
    "thrust_derating": 1.0, # multiplies k_T, e.g. 0.56 for a 44% frame blockage loss
}

TRUSS = {
    "module_mass": 0.740, # [kg] one Tetracopter
    "outer_diameter": 5e-3, # [m] prototype carbon tube
    "wall_thickness": 1e-3, # [m] assumed
    "critical_load": 659.0, # [N] published buckling load of an elementary member
    "length_factor": 2.0, # K used for the published buckling load
    "thrust_to_weight": 1.94 / 0.75**2, # full-throttle thrust ceiling from 1.94 at 75% throttle
    "dense_dof_limit": 390, # above this many free DOF, use the sparse solver
    "displacement_bound": 1e-6, # [m] largest nodal displacement accepted as negligible
}

FAULTS = {
    "mass": 3.1, # [kg] 16-rotor assembly
    "module_mass": 0.740, # [kg] one Tetracopter, for the rotor speed ceiling
    "thrust_to_weight": 1.94, # prototype, at 75% throttle
    "throttle": 0.75,
    "lift_coefficient": 0.32, # C_L, assumed; gives k close to TETRACOPTER["k_T"]
    "drag_coefficient": 0.08, # C_D, assumed; gives b close to TETRACOPTER["k_D"]
    "prop_radius": 0.0635, # [m] 5 inch propeller
    "air_density": 1.225, # [kg/m^3] standard atmosphere
    "g": 9.81,
    "tolerance": 1e-6, # feasibility: residual < tolerance * |B|
    "bound_sweep": [1.5, 2.0, 2.5, 3.0, None, float("inf")], # multiples of the hover share; None keeps the calibrated ceiling
    "module_orientations": (0, 2, 1, 0), # yaw turns of each Tetracopter by 120 degrees; uniform turns let one whole module fail
}

# Rate gains place both poles of each axis near s = -4 on the linearized plant
# (p_dot = commanded angular acceleration): s^2 (1 + kd) + kp s + ki.
PID_GAINS = {
    "kp": [8.0, 8.0, 8.0],
    "ki": [16.0, 16.0, 16.0],
    "kd": [0.02, 0.02, 0.02],
    "integrator_limit": 1.0, # [rad] bound on the integrated rate error
    "output_limit": 150.0, # [rad/s] bound on each axis' rotor speed deltas
}

SIMULATION = {
    "dt": 0.002, # [s]
    "duration": 10.0, # [s]
    "settle_threshold": 0.01, # [rad/s]
    "divergence_angle": np.pi / 3, # [rad] runs tilting further are reported unstable
    "max_perturbation_angle": 0.2, # [rad]
    "max_perturbation_rate": 1.0, # [rad/s]
}

CLI = {
    "seed": 876, # randomized checks of verify-all
    "threads_variable": "TETRAFRACTAL_THREADS",
}
