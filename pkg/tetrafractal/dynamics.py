"""
A module for the Newton-Euler dynamics of the elementary Tetracopter.

The body frame has its z axis along the apex rotor 4. Rotor 2 lies on the +x axis and rotors 1 and 3 lie at negative x, with rotor 3 on the +y side. Attitude is represented by Z-Y-X Euler angles ``eta = [phi, theta, psi]``.
"""

import json
import numpy as np
from scipy import linalg
from scipy._lib._bunch import _make_tuple_bunch

from .defaults import TETRACOPTER
from .inertia import RigidBodyParams, check_body

STATE_NAMES = [ "x", "y", "z", "phi", "theta", "psi", "u", "v", "w", "p", "q", "r" ]
INPUT_NAMES = [ "domega_1", "domega_2", "domega_3", "domega_4" ]
ROTOR_SIGNS = np.array([ (-1)**j for j in range(1, 5) ]) # (-1)^j, j = 1..4

class SingularityError(ValueError):
    def __init__(self, theta, margin):
        super().__init__(f"Pitch angle {theta} is within {margin} of the gimbal singularity")
        self.theta = theta

RigidState = _make_tuple_bunch(
    "RigidState",
    ["xi", "eta", "v_body", "omega_body"]
)

RotorCommand = _make_tuple_bunch(
    "RotorCommand",
    ["omega", "omega_dot"]
)

LinearModel = _make_tuple_bunch(
    "LinearModel",
    ["A", "B", "omega0"],
    ["E", "state_names", "input_names"]
)

class TetracopterParams():
    """Physical constants of the elementary Tetracopter.

    Args:
        m: The mass [kg].
        I_q: The ``(3, 3)`` inertia tensor [kg m^2].
        I_r: The axial inertia of each rotor [kg m^2].
        a: The frame edge length [m].
        k_T: The thrust coefficient [N s^2].
        k_D: The rotor drag-torque coefficient [N m s^2].
        k_F: The rotor friction coefficient [N m s].
        k_x, k_y, k_z: The body drag coefficients [N s^2 / m^2].
        k_p, k_q, k_r: The rotational drag coefficients [N m s^2].
        g: The gravitational acceleration [m / s^2].
        thrust_derating: A factor on ``k_T`` that models, e.g., thrust losses from frame blockage.
    """
    FIELDS = list(TETRACOPTER.keys())
    def __init__(self, **kwargs):
        unknown = sorted(set(kwargs) - set(self.FIELDS))
        if len(unknown) > 0:
            raise ValueError(f"Unknown parameters: {', '.join(unknown)}")
        missing = [ k for k in self.FIELDS if k not in kwargs ]
        if len(missing) > 0:
            raise ValueError(f"Missing parameters: {', '.join(missing)}")
        for k in self.FIELDS:
            if k == "I_q":
                value = np.array(kwargs[k], dtype=float)
                if value.shape != (3, 3):
                    raise ValueError(f"I_q must have shape (3, 3), got {value.shape}")
            else:
                try:
                    value = float(kwargs[k])
                except (TypeError, ValueError):
                    raise ValueError(f"{k} must be a number, got {kwargs[k]!r}")
                if value < 0:
                    raise ValueError(f"{k} must be non-negative, got {value}")
            setattr(self, k, value)
        if not self.m > 0:
            raise ValueError(f"m must be positive, got {self.m}")
        if not self.thrust_derating > 0:
            raise ValueError(f"thrust_derating must be positive, got {self.thrust_derating}")
        try:
            check_body(RigidBodyParams(self.m, self.I_q), rtol=1e-9)
        except ValueError as e:
            raise ValueError(f"I_q: {e}")

    @classmethod
    def from_dict(cls, d, *, defaults=TETRACOPTER):
        """Create parameters from a dict, filling in missing fields from ``defaults``."""
        return cls(**(dict(defaults) | dict(d)))

    @classmethod
    def from_file(cls, path, *, defaults=TETRACOPTER):
        """Read parameters from a JSON file; syntax errors report their line and column."""
        with open(path) as f:
            try:
                d = json.load(f)
            except json.JSONDecodeError as e:
                raise ValueError(f"{path}:{e.lineno}:{e.colno}: {e.msg}")
        if not isinstance(d, dict):
            raise ValueError(f"{path}: expected a JSON object")
        return cls.from_dict(d, defaults=defaults)

    def to_dict(self):
        return { k: (self.I_q.tolist() if k == "I_q" else getattr(self, k)) for k in self.FIELDS }

    @property
    def k_T_eff(self):
        return self.k_T * self.thrust_derating

def rotation_matrix(eta):
    """Z-Y-X rotation matrix from the body frame to the inertial frame."""
    phi, theta, psi = eta
    c_phi, s_phi = np.cos(phi), np.sin(phi)
    c_theta, s_theta = np.cos(theta), np.sin(theta)
    c_psi, s_psi = np.cos(psi), np.sin(psi)
    return np.array([
        [c_psi*c_theta, c_psi*s_theta*s_phi - s_psi*c_phi, c_psi*s_theta*c_phi + s_psi*s_phi],
        [s_psi*c_theta, s_psi*s_theta*s_phi + c_psi*c_phi, s_psi*s_theta*c_phi - c_psi*s_phi],
        [-s_theta, c_theta*s_phi, c_theta*c_phi],
    ])

def body_rate_transform(eta, *, margin=1e-6):
    """The matrix ``S`` with ``Omega = S @ eta_dot``; ``det(S) = cos(theta)``."""
    phi, theta, _ = eta
    if abs(theta) >= np.pi/2 - margin:
        raise SingularityError(theta, margin)
    return np.array([
        [1., 0., -np.sin(theta)],
        [0., np.cos(phi), np.cos(theta)*np.sin(phi)],
        [0., -np.sin(phi), np.cos(theta)*np.cos(phi)],
    ])

def _drag(v, signed):
    v = np.asarray(v, dtype=float)
    return v * np.abs(v) if signed else v**2

def thrust_torque(omega, p):
    """Moment of the differential thrust; rotor 4 sits on the z axis and has no lever arm."""
    w2 = np.asarray(omega, dtype=float)**2
    return p.a * p.k_T_eff * np.array([
        (w2[2] - w2[0]) / 4,
        ((w2[0] + w2[2]) / 2 - w2[1]) / (2 * np.sqrt(3)),
        0.
    ])

def rotor_torques(omega, omega_dot, omega_body, p):
    """Sum of the gyroscopic and reaction torques of the four rotors."""
    omega = np.asarray(omega, dtype=float)
    omega_dot = np.asarray(omega_dot, dtype=float)
    P, Q, _ = omega_body
    return np.sum([
        s_j * np.array([
            p.I_r * w_j * Q,
            -p.I_r * w_j * P,
            p.I_r * wd_j + p.k_D * w_j**2 + p.k_F * w_j
        ])
        for s_j, w_j, wd_j in zip(ROTOR_SIGNS, omega, omega_dot)
    ], axis=0)

def derivative(state, cmd, p, *, signed_drag=True):
    """Time derivative of a ``RigidState`` under a ``RotorCommand``.

    Args:
        state: The current ``RigidState``.
        cmd: The ``RotorCommand`` with rotor speeds ``omega`` and accelerations ``omega_dot``.
        p: The ``TetracopterParams``.
        signed_drag (optional): Whether drag terms use ``v * |v|`` (True) or ``v**2`` (False). Defaults to True.

    Returns:
        d: A ``RigidState`` of derivatives ``(xi_dot, eta_dot, v_body_dot, omega_body_dot)``.
    """
    eta = np.asarray(state.eta, dtype=float)
    V = np.asarray(state.v_body, dtype=float)
    Omega = np.asarray(state.omega_body, dtype=float)
    omega = np.asarray(cmd.omega, dtype=float)
    if np.any(omega < 0):
        raise ValueError(f"rotor speeds must be non-negative, got {omega}")
    R = rotation_matrix(eta)
    S = body_rate_transform(eta)
    thrust = np.array([ 0., 0., p.k_T_eff * np.sum(omega**2) ])
    drag_force = np.array([ p.k_x, p.k_y, p.k_z ]) * _drag(V, signed_drag)
    V_dot = -np.cross(Omega, V) + R.T @ np.array([ 0., 0., -p.g ]) + (thrust - drag_force) / p.m
    drag_torque = -np.array([ p.k_p, p.k_q, p.k_r ]) * _drag(Omega, signed_drag)
    moments = (
        rotor_torques(omega, cmd.omega_dot, Omega, p)
        + thrust_torque(omega, p)
        + drag_torque
        - np.cross(Omega, p.I_q @ Omega)
    )
    return RigidState(
        R @ V,
        linalg.solve(S, Omega),
        V_dot,
        linalg.solve(p.I_q, moments, assume_a="sym")
    )

def hover_speed(p):
    """Trim rotor speed ``omega0 = sqrt(m g / (4 k_T))``."""
    if not p.k_T_eff > 0:
        raise ValueError("k_T must be positive for a hover trim to exist")
    return np.sqrt(p.m * p.g / (4 * p.k_T_eff))

def trim_state():
    return RigidState(np.zeros(3), np.zeros(3), np.zeros(3), np.zeros(3))

def trim_command(p):
    return RotorCommand(np.full(4, hover_speed(p)), np.zeros(4))

def state_vector(state):
    """Flatten a ``RigidState`` in the order of ``STATE_NAMES``."""
    return np.concatenate([ np.asarray(s, dtype=float) for s in state ])

def from_vector(x):
    x = np.asarray(x, dtype=float)
    return RigidState(x[0:3], x[3:6], x[6:9], x[9:12])

def vector_field(x, omega, p, *, omega_dot=None, signed_drag=True):
    """``derivative`` on flat 12-vectors."""
    if omega_dot is None:
        omega_dot = np.zeros(4)
    return state_vector(derivative(
        from_vector(x),
        RotorCommand(omega, omega_dot),
        p,
        signed_drag = signed_drag
    ))

def linearize(p):
    """Linearize the dynamics about hover.

    The rotor acceleration term ``I_r * domega_dot`` is not part of ``B``; its sensitivity is returned separately as the extra property ``E``.

    Args:
        p: The ``TetracopterParams``.

    Returns:
        model: A ``LinearModel`` with ``A`` (12x12), ``B`` (12x4), and ``omega0``, plus ``E`` (12x4), ``state_names``, and ``input_names``.
    """
    omega0 = hover_speed(p)
    A = np.zeros((12, 12))
    A[0:3, 6:9] = np.eye(3) # xi_dot = V
    A[3:6, 9:12] = np.eye(3) # eta_dot = Omega
    A[6, 4] = p.g # u_dot = g theta
    A[7, 3] = -p.g # v_dot = -g phi
    B = np.zeros((12, 4))
    B[8, :] = 2 * p.k_T_eff * omega0 / p.m
    k = p.a * p.k_T_eff * omega0
    moments = np.array([
        k / 2 * np.array([ -1., 0., 1., 0. ]),
        k * np.array([ 1 / (2*np.sqrt(3)), -1 / np.sqrt(3), 1 / (2*np.sqrt(3)), 0. ]),
        ROTOR_SIGNS * (2 * p.k_D * omega0 + p.k_F),
    ])
    B[9:12, :] = linalg.solve(p.I_q, moments, assume_a="sym")
    E = np.zeros((12, 4))
    E[9:12, :] = linalg.solve(p.I_q, np.outer([ 0., 0., 1. ], ROTOR_SIGNS * p.I_r), assume_a="sym")
    return LinearModel(
        A,
        B,
        omega0,
        E = E,
        state_names = STATE_NAMES,
        input_names = INPUT_NAMES
    )

def finite_difference_jacobians(p, *, step=1e-6, signed_drag=True):
    """Central finite differences of the full model at hover, including the rotor acceleration input.

    Returns:
        (A, B, E): Jacobians with respect to the state, the rotor speeds, and the rotor accelerations.
    """
    x0 = state_vector(trim_state())
    omega0 = trim_command(p).omega
    def f(x, omega, omega_dot):
        return vector_field(x, omega, p, omega_dot=omega_dot, signed_drag=signed_drag)
    def jacobian(g, z0):
        J = np.zeros((12, len(z0)))
        for i in range(len(z0)):
            dz = np.zeros(len(z0))
            dz[i] = step * max(1., abs(z0[i]))
            J[:, i] = (g(z0 + dz) - g(z0 - dz)) / (2 * dz[i])
        return J
    A = jacobian(lambda x: f(x, omega0, np.zeros(4)), x0)
    B = jacobian(lambda w: f(x0, w, np.zeros(4)), omega0)
    E = jacobian(lambda wd: f(x0, omega0, wd), np.zeros(4))
    return A, B, E
