"""
A module for hover simulations of the elementary Tetracopter under an attitude-rate PID controller.

The controller only stabilizes the body rates: it neither holds the attitude nor the altitude.
"""

import numpy as np
from scipy import linalg
from scipy._lib._bunch import _make_tuple_bunch

from .defaults import PID_GAINS, SIMULATION
from .dynamics import (
    RotorCommand,
    SingularityError,
    STATE_NAMES,
    TetracopterParams,
    from_vector,
    hover_speed,
    linearize,
    state_vector,
    trim_state,
    vector_field,
)

SimResult = _make_tuple_bunch(
    "SimResult",
    ["t", "states", "commands"],
    ["settling_time", "stable", "reason"]
)

def check_gains(gains):
    """Merge ``gains`` into ``defaults.PID_GAINS`` and validate them."""
    gains = PID_GAINS | gains
    for k in [ "kp", "ki", "kd" ]:
        value = np.broadcast_to(np.asarray(gains[k], dtype=float), 3)
        if np.any(value < 0):
            raise ValueError(f"{k} must be non-negative, got {gains[k]}")
        gains[k] = value
    for k in [ "integrator_limit", "output_limit" ]:
        if not gains[k] > 0:
            raise ValueError(f"{k} must be positive, got {gains[k]}")
    return gains

def _rk4(f, x, dt):
    k1 = f(x)
    k2 = f(x + dt/2 * k1)
    k3 = f(x + dt/2 * k2)
    k4 = f(x + dt * k3)
    return x + dt/6 * (k1 + 2*k2 + 2*k3 + k4)

def step_rk4(state, cmd, params, dt, *, signed_drag=True):
    """Advance a ``RigidState`` by one classical Runge-Kutta step, holding ``cmd`` constant."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    x = _rk4(
        lambda x: vector_field(x, cmd.omega, params, omega_dot=cmd.omega_dot, signed_drag=signed_drag),
        state_vector(state),
        dt
    )
    return from_vector(x)

class Mixer():
    """Map thrust and angular accelerations to rotor speed deltas by inverting the linear model.

    Args:
        model: A ``dynamics.LinearModel``.
    """
    def __init__(self, model):
        self.G = model.B[8:12, :] # rows w, p, q, r
        self.G_inv = np.linalg.pinv(self.G)

    def __call__(self, w_dot, omega_dot_body):
        """Rotor speed deltas for a vertical acceleration ``w_dot`` and body angular accelerations."""
        return self.G_inv @ np.concatenate(([ w_dot ], omega_dot_body))

    def moment_columns(self):
        """The ``(4, 3)`` rotor speed deltas per unit angular acceleration about each axis."""
        return self.G_inv[:, 1:4]

class RatePid():
    """A PID controller on the body rates whose outputs are angular accelerations.

    Each axis' contribution to the rotor speed deltas is clamped to ``output_limit``; while an axis is clamped, its integrator is halted.

    Args:
        mixer: A ``Mixer``.
        gains (optional): Overrides of ``defaults.PID_GAINS``.
        dt (optional): The control period [s]. Defaults to ``defaults.SIMULATION["dt"]``.
    """
    def __init__(self, mixer, gains=dict(), dt=None):
        self.mixer = mixer
        self.gains = check_gains(gains)
        self.dt = SIMULATION["dt"] if dt is None else dt
        self.integral = np.zeros(3)
        self.previous_error = None

    def __call__(self, omega_body, setpoint=np.zeros(3)):
        g = self.gains
        error = np.asarray(setpoint, dtype=float) - np.asarray(omega_body, dtype=float)
        if self.previous_error is None:
            derivative = np.zeros(3)
        else:
            derivative = (error - self.previous_error) / self.dt
        self.previous_error = error
        integral = np.clip(self.integral + error * self.dt, -g["integrator_limit"], g["integrator_limit"])
        u = g["kp"] * error + g["ki"] * integral + g["kd"] * derivative
        columns = self.mixer.moment_columns()
        peak = np.max(np.abs(columns), axis=0) * np.abs(u) # largest rotor delta per axis
        clamped = peak > g["output_limit"]
        integral[clamped] = self.integral[clamped] # anti-windup
        u = g["kp"] * error + g["ki"] * integral + g["kd"] * derivative
        scale = np.ones(3)
        peak = np.max(np.abs(columns), axis=0) * np.abs(u)
        scale[clamped] = g["output_limit"] / np.maximum(peak[clamped], 1e-300)
        self.integral = integral
        return columns @ (np.minimum(scale, 1.) * u)

def rate_pid(omega_body, setpoint, gains, dt, *, model):
    """Rotor speed deltas of a fresh ``RatePid`` (empty integrator) for one step."""
    return RatePid(Mixer(model), gains, dt)(omega_body, setpoint)

def rate_loop_eigenvalues(model, gains=dict()):
    """Eigenvalues of the linearized rate loop, with states ``[p, q, r]`` and their integrated errors.

    Positions, velocities, and angles are pure integrators of the rates and are not stabilized by a rate-only controller.
    """
    gains = check_gains(gains)
    H = model.B[9:12, :] @ Mixer(model).moment_columns() # realized per commanded angular acceleration
    Kp, Ki, Kd = np.diag(gains["kp"]), np.diag(gains["ki"]), np.diag(gains["kd"])
    M = linalg.solve(np.eye(3) + H @ Kd, H)
    A_cl = np.block([
        [ -M @ Kp + model.A[9:12, 9:12], M @ Ki ],
        [ -np.eye(3), np.zeros((3, 3)) ],
    ])
    return linalg.eigvals(A_cl)

def simulate(x0, controller, params, *, dt=None, duration=None, options=dict()):
    """Integrate the closed loop with a fixed step.

    Args:
        x0: The initial state vector, ordered like ``dynamics.STATE_NAMES``.
        controller: A callable ``(t, x) -> omega`` that returns the four rotor speeds.
        params: The ``dynamics.TetracopterParams``.
        dt (optional): Defaults to ``defaults.SIMULATION["dt"]``.
        duration (optional): Defaults to ``defaults.SIMULATION["duration"]``.
        options (optional): Overrides of ``defaults.SIMULATION``.

    Returns:
        r: A ``SimResult`` with properties ``t``, ``states`` (``(len(t), 12)``), and ``commands`` (``(len(t), 4)``). The properties ``settling_time`` (the time from which ``|Omega|`` stays below the threshold, or None), ``stable``, and ``reason`` (why an unstable run ended) are available by name.
    """
    options = SIMULATION | options
    dt = options["dt"] if dt is None else dt
    duration = options["duration"] if duration is None else duration
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    n_steps = int(round(duration / dt))
    t = [ 0. ]
    states = [ np.asarray(x0, dtype=float) ]
    commands = []
    stable, reason = True, None
    for k in range(n_steps):
        x = states[-1]
        omega = np.maximum(controller(t[-1], x), 0.)
        commands.append(omega)
        try:
            x = _rk4(lambda x: vector_field(x, omega, params), x, dt)
        except SingularityError as e:
            stable, reason = False, str(e)
            break
        t.append((k+1) * dt)
        states.append(x)
        if not np.all(np.isfinite(x)) or np.max(np.abs(x[3:5])) > options["divergence_angle"]:
            stable, reason = False, f"attitude diverged at t = {t[-1]:.3f} s"
            break
    states = np.array(states)
    commands.append(commands[-1] if len(commands) else np.zeros(4))
    rates = np.linalg.norm(states[:, 9:12], axis=1)
    above = np.flatnonzero(rates >= options["settle_threshold"])
    if not stable or (len(above) > 0 and above[-1] == len(rates) - 1):
        settling_time = None
    else:
        settling_time = 0. if len(above) == 0 else t[above[-1] + 1]
    return SimResult(
        np.array(t),
        states,
        np.array(commands[:len(t)]),
        settling_time = settling_time,
        stable = stable,
        reason = reason
    )

def perturbed_state(perturbation, *, options=dict()):
    """A state vector at trim with entries of ``perturbation``, a dict keyed by ``dynamics.STATE_NAMES``."""
    options = SIMULATION | options
    x0 = state_vector(trim_state())
    for k, v in perturbation.items():
        if k not in STATE_NAMES:
            raise ValueError(f"Unknown state {k!r}, expected one of {STATE_NAMES}")
        x0[STATE_NAMES.index(k)] = v
    if np.max(np.abs(x0[3:6])) > options["max_perturbation_angle"]:
        raise ValueError(f"Angles must not exceed {options['max_perturbation_angle']} rad")
    if np.max(np.abs(x0[9:12])) > options["max_perturbation_rate"]:
        raise ValueError(f"Rates must not exceed {options['max_perturbation_rate']} rad/s")
    return x0

def hover_trial(perturbation, gains=dict(), duration=None, *, params=None, dt=None, options=dict()):
    """Simulate the rate-stabilized Tetracopter from a perturbed hover.

    Args:
        perturbation: A dict of initial state deviations, e.g. ``{"p": 0.5}``.
        gains (optional): Overrides of ``defaults.PID_GAINS``.
        duration (optional): Defaults to ``defaults.SIMULATION["duration"]``.
        params (optional): The ``dynamics.TetracopterParams``. Defaults to the prototype.
        dt (optional): Defaults to ``defaults.SIMULATION["dt"]``.
        options (optional): Overrides of ``defaults.SIMULATION``.

    Returns:
        r: A ``SimResult``; see ``simulate``.
    """
    if params is None:
        params = TetracopterParams.from_dict({})
    options = SIMULATION | options
    dt = options["dt"] if dt is None else dt
    x0 = perturbed_state(perturbation, options=options)
    omega0 = hover_speed(params)
    pid = RatePid(Mixer(linearize(params)), gains, dt)
    def controller(t, x):
        return omega0 + pid(x[9:12])
    return simulate(x0, controller, params, dt=dt, duration=duration, options=options)

def linear_response(model, x0, t):
    """States ``expm(A t) @ x0`` of the open-loop linear model at the times ``t``."""
    return np.array([ linalg.expm(model.A * t_k) @ np.asarray(x0, dtype=float) for t_k in t ])

def linear_nonlinear_gap(params, x0, *, duration=1.0, dt=None):
    """Largest deviation between the open-loop nonlinear and linear trajectories from ``x0`` at trim speeds."""
    dt = SIMULATION["dt"] if dt is None else dt
    omega0 = hover_speed(params)
    r = simulate(x0, lambda t, x: np.full(4, omega0), params, dt=dt, duration=duration, options={ "divergence_angle": np.pi/2 })
    x_lin = linear_response(linearize(params), x0, r.t)
    return np.max(np.abs(r.states - x_lin))
