"""Quarter-model longitudinal dynamics of a tram.

A single lumped wheel (inertia J_wh) is driven by a notch-commanded,
power-limited motor torque with a first-order lag, and couples to the
car body (mass M) through a creep-dependent wheel/rail adhesion force.
Propulsion resistance and track slope act on the body.  States are the
wheel angular speed, the body speed, the traveled distance, and the
lagged motor torque; integration is fixed-step classical RK4.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import NumericalDivergenceError, ParameterError

GRAVITY = 9.81  # m/s^2

# The creep law makes the wheel equation stiff (eigenvalue ~ -1e3 1/s on dry
# rail), so the fixed-step integrator refuses steps beyond this.
MAX_STEP_DT = 0.01  # s

NOTCH_MIN = -7
NOTCH_MAX = 7

RESISTANCE_FORMS = ("identified", "eq8a", "eq8b", "eq8c")


@dataclass(frozen=True)
class ResistanceCoeffs:
    """Propulsion-resistance law selector and coefficients.

    ``identified`` evaluates A0*M + B*v + C*v^2 with the coefficients stored
    here (C is pinned to zero for this form).  The ``eq8a``/``eq8b``/``eq8c``
    forms are literature baselines for heavier rail vehicles with built-in
    constants; they ignore A0/B/C.
    """

    A0: float = 0.0147  # N per kg of vehicle mass
    B: float = 125.83   # N*s/m
    C: float = 0.0      # N*s^2/m^2
    form_id: str = "identified"

    def __post_init__(self):
        form = self.form_id.lower()
        if form not in RESISTANCE_FORMS:
            raise ParameterError(
                f"unknown resistance form {self.form_id!r}; "
                f"expected one of {RESISTANCE_FORMS}"
            )
        object.__setattr__(self, "form_id", form)
        if form == "identified" and self.C != 0.0:
            raise ParameterError("the identified resistance form requires C = 0")


@dataclass(frozen=True)
class AdhesionParams:
    """Creep-curve coefficients mu(v_s) = c_a*exp(-a_a*v_s) - d_a*exp(-b_a*v_s)."""

    a_a: float  # s/m
    b_a: float  # s/m
    c_a: float  # -
    d_a: float  # -
    label: str = ""

    def __post_init__(self):
        if self.a_a <= 0.0 or self.b_a <= 0.0:
            raise ParameterError("adhesion exponents a_a, b_a must be positive")


DRY = AdhesionParams(0.54, 1.2, 1.0, 1.0, label="dry")
WET = AdhesionParams(0.05, 0.5, 0.08, 0.08, label="wet")

ADHESION_SETS = {"dry": DRY, "wet": WET}


@dataclass(frozen=True)
class TramParams:
    """Static vehicle constants.  Defaults describe the studied tram at the
    17 t test weight; override fields via dataclasses.replace or the config
    loader."""

    curb_mass: float = 16500.0        # kg
    payload_mass: float = 500.0       # kg
    wheel_radius: float = 0.325       # m
    wheel_mass: float = 195.0         # kg
    wheel_inertia: float | None = None  # kg*m^2, 0.5*m_w*r^2 when omitted
    power_limit: float = 176e3        # W (4 motors x 44 kW)
    traction_gain_accel: float = 1449.0  # N*m per notch, p >= 0
    traction_gain_brake: float = 1176.0  # N*m per notch, p < 0
    torque_lag_rate: float = 3.0      # 1/s
    gravity: float = GRAVITY          # m/s^2
    resistance: ResistanceCoeffs = field(default_factory=ResistanceCoeffs)

    def __post_init__(self):
        if self.wheel_inertia is None:
            # homogeneous-disk approximation of the wheel
            object.__setattr__(
                self, "wheel_inertia", 0.5 * self.wheel_mass * self.wheel_radius**2
            )
        positive = {
            "curb_mass": self.curb_mass,
            "wheel_radius": self.wheel_radius,
            "wheel_mass": self.wheel_mass,
            "wheel_inertia": self.wheel_inertia,
            "power_limit": self.power_limit,
            "traction_gain_accel": self.traction_gain_accel,
            "traction_gain_brake": self.traction_gain_brake,
            "torque_lag_rate": self.torque_lag_rate,
            "gravity": self.gravity,
        }
        for name, value in positive.items():
            if not value > 0.0:
                raise ParameterError(f"{name} must be strictly positive, got {value}")
        if self.payload_mass < 0.0:
            raise ParameterError("payload_mass must be non-negative")

    @property
    def total_mass(self) -> float:
        """Curb weight plus payload, kg."""
        return self.curb_mass + self.payload_mass


def with_total_mass(params: TramParams, total_mass: float) -> TramParams:
    """Return a copy of ``params`` whose curb+payload equals ``total_mass``."""
    payload = total_mass - params.curb_mass
    if payload < 0.0:
        raise ParameterError(
            f"total mass {total_mass} kg is below the curb weight "
            f"{params.curb_mass} kg"
        )
    return replace(params, payload_mass=payload)


@dataclass(frozen=True)
class DynState:
    """Continuous simulation state."""

    omega_wh: float  # wheel angular speed, rad/s
    v_t: float       # tram longitudinal speed, m/s
    x: float         # traveled distance, m
    T_mot: float     # lagged motor torque, N*m


def initial_state(v0: float, params: TramParams, x0: float = 0.0) -> DynState:
    """Steady-rolling initial condition: zero creep, zero motor torque."""
    if v0 < 0.0:
        raise ParameterError("initial speed must be non-negative")
    return DynState(omega_wh=v0 / params.wheel_radius, v_t=v0, x=x0, T_mot=0.0)


class NotchSchedule:
    """Piecewise-constant notch command, a sorted list of (start_time, notch)."""

    def __init__(self, entries: Sequence[tuple[float, int]]):
        entries = [(float(t), int(p)) for t, p in entries]
        if not entries:
            raise ParameterError("schedule must contain at least one entry")
        if entries[0][0] != 0.0:
            raise ParameterError("schedule must start at t = 0")
        for (t0, _), (t1, _) in zip(entries, entries[1:]):
            if t1 <= t0:
                raise ParameterError("schedule times must be strictly increasing")
        for t, p in entries:
            if not NOTCH_MIN <= p <= NOTCH_MAX:
                raise ParameterError(f"notch {p} at t={t} outside [-7, 7]")
        self.entries = entries
        self._times = np.array([t for t, _ in entries])
        self._notches = np.array([p for _, p in entries])

    def notch_at(self, t: float) -> int:
        """Notch active at time t (last entry whose start time is <= t)."""
        idx = int(np.searchsorted(self._times, t, side="right")) - 1
        return int(self._notches[max(idx, 0)])

    @classmethod
    def constant(cls, p: int) -> "NotchSchedule":
        return cls([(0.0, p)])


def commanded_torque(p: int, omega_wh: float, params: TramParams) -> float:
    """Notch-proportional motor torque with the traction power cap.

    For p >= 0 the linear demand gain*p applies until demand times wheel
    speed reaches the power limit, after which the torque follows
    P_max/omega.  Braking torque (p < 0) is not power-limited.
    """
    if not NOTCH_MIN <= p <= NOTCH_MAX:
        raise ParameterError(f"notch {p} outside [{NOTCH_MIN}, {NOTCH_MAX}]")
    if int(p) != p:
        raise ParameterError(f"notch must be an integer, got {p}")
    if p < 0:
        return params.traction_gain_brake * p
    demand = params.traction_gain_accel * p
    if omega_wh > 0.0 and demand * omega_wh >= params.power_limit:
        return params.power_limit / omega_wh
    return demand


def torque_lag_step(T_mot: float, T_cmd: float, dt: float, rate: float) -> float:
    """Exact update of the first-order torque lag dT/dt = rate*(T_cmd - T)."""
    if dt <= 0.0:
        raise ParameterError("dt must be positive")
    return T_cmd + (T_mot - T_cmd) * math.exp(-rate * dt)


def _exp(z: float) -> float:
    # math.exp raises OverflowError near 709.8; saturate to inf so the
    # integrator can report divergence instead.
    return math.exp(z) if z < 709.0 else math.inf


def adhesion_coefficient(v_s: float, adh: AdhesionParams) -> float:
    """Creep-dependent adhesion coefficient, evaluated exactly (no clamping).

    v_s is the creep speed r*omega - v_t; it is negative under braking.
    The law is an extrapolation for large negative creep, where its
    magnitude exceeds any physical friction level.
    """
    return adh.c_a * _exp(-adh.a_a * v_s) - adh.d_a * _exp(-adh.b_a * v_s)


def peak_adhesion(adh: AdhesionParams) -> tuple[float, float]:
    """Creep speed and value of the driving-side (v_s > 0) adhesion maximum."""
    v_star = math.log(adh.b_a * adh.d_a / (adh.a_a * adh.c_a)) / (adh.b_a - adh.a_a)
    return v_star, adhesion_coefficient(v_star, adh)


def propulsion_resistance(v_t: float, mass: float, coeffs: ResistanceCoeffs) -> float:
    """Resistance magnitude (N) at speed v_t >= 0 for the selected form."""
    if v_t < 0.0:
        raise ParameterError("propulsion_resistance expects v_t >= 0")
    form = coeffs.form_id
    if form == "identified":
        return coeffs.A0 * mass + coeffs.B * v_t + coeffs.C * v_t * v_t
    if form == "eq8a":
        return 0.0147 * mass + 2.18e-6 * mass * v_t * v_t
    if form == "eq8b":
        return 520.0 + 0.0065 * mass + 3.6 * v_t + 3.8880 * v_t * v_t
    if form == "eq8c":
        return 1.839 * math.sqrt(mass) + 0.0036 * mass * v_t + 4.329 * v_t * v_t
    raise ParameterError(f"unknown resistance form {form!r}")


def slope_force(theta: float, mass: float, gravity: float = GRAVITY) -> float:
    """Grade force M*g*sin(theta); positive on ascent, negative on descent."""
    return mass * gravity * math.sin(theta)


def _signed_resistance(
    v_t: float, mass: float, coeffs: ResistanceCoeffs, other_force: float
) -> float:
    """Resistance with sign opposing motion.

    At rest the constant term acts as static resistance: it cancels the net
    of the other forces up to its magnitude, so resistance alone can never
    reverse the motion.
    """
    if v_t > 0.0:
        return propulsion_resistance(v_t, mass, coeffs)
    if v_t < 0.0:
        return -propulsion_resistance(-v_t, mass, coeffs)
    cap = propulsion_resistance(0.0, mass, coeffs)
    return min(max(other_force, -cap), cap)


def _derivatives(
    omega_wh: float,
    v_t: float,
    T_mot: float,
    theta: float,
    params: TramParams,
    adh: AdhesionParams,
) -> tuple[float, float]:
    """(d omega/dt, d v/dt) of the quarter model at the given point."""
    mass = params.total_mass
    v_s = params.wheel_radius * omega_wh - v_t
    f_ad = adhesion_coefficient(v_s, adh) * mass * params.gravity
    f_s = slope_force(theta, mass, params.gravity)
    f_r = _signed_resistance(v_t, mass, params.resistance, f_ad - f_s)
    domega = (T_mot - params.wheel_radius * f_ad) / params.wheel_inertia
    dv = (f_ad - f_r - f_s) / mass
    return domega, dv


def force_balance(
    state: DynState,
    p: int,
    theta: float,
    params: TramParams,
    adh: AdhesionParams,
) -> tuple[float, float]:
    """Instantaneous (d omega/dt, d v/dt) for the given state and slope.

    The notch is accepted for interface symmetry with step(); it influences
    the balance only through the lagged torque already held in the state.
    """
    del p
    return _derivatives(state.omega_wh, state.v_t, state.T_mot, theta, params, adh)


def step(
    state: DynState,
    p: int,
    theta: float,
    params: TramParams,
    adh: AdhesionParams,
    dt: float,
) -> DynState:
    """One classical RK4 step of (omega, v, x).

    The notch command is frozen at the step start and the torque lag is
    advanced along the exact exponential; the RK4 stages see the lagged
    torque at their own substep times.
    """
    if not 0.0 < dt <= MAX_STEP_DT:
        raise ParameterError(
            f"dt must be in (0, {MAX_STEP_DT}] s for the stiff creep dynamics"
        )
    t_cmd = commanded_torque(p, state.omega_wh, params)
    decay_half = math.exp(-params.torque_lag_rate * dt / 2.0)
    T0 = state.T_mot
    T_half = t_cmd + (T0 - t_cmd) * decay_half
    T_full = t_cmd + (T0 - t_cmd) * decay_half * decay_half

    w0, v0 = state.omega_wh, state.v_t
    k1w, k1v = _derivatives(w0, v0, T0, theta, params, adh)
    k2w, k2v = _derivatives(
        w0 + 0.5 * dt * k1w, v0 + 0.5 * dt * k1v, T_half, theta, params, adh
    )
    k3w, k3v = _derivatives(
        w0 + 0.5 * dt * k2w, v0 + 0.5 * dt * k2v, T_half, theta, params, adh
    )
    k4w, k4v = _derivatives(w0 + dt * k3w, v0 + dt * k3v, T_full, theta, params, adh)

    new_w = w0 + dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
    new_v = v0 + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    # stage derivatives of x are the stage speeds
    new_x = state.x + dt / 6.0 * (
        v0
        + 2.0 * (v0 + 0.5 * dt * k1v)
        + 2.0 * (v0 + 0.5 * dt * k2v)
        + (v0 + dt * k3v)
    )

    for name, value in (
        ("omega_wh", new_w),
        ("v_t", new_v),
        ("x", new_x),
        ("T_mot", T_full),
    ):
        if not math.isfinite(value):
            raise NumericalDivergenceError(name)
    return DynState(omega_wh=new_w, v_t=new_v, x=new_x, T_mot=T_full)


ThetaProfile = Callable[[float], float]


def _as_theta_profile(theta: float | ThetaProfile) -> ThetaProfile:
    if callable(theta):
        return theta
    value = float(theta)
    return lambda _x: value


@dataclass
class Trajectory:
    """Uniformly sampled simulation output (SI units)."""

    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    omega: np.ndarray
    T_mot: np.ndarray
    accel: np.ndarray
    stopped: bool = False  # True when braking stopped the tram before t_end

    CSV_HEADER = ("t", "x", "v", "omega", "T_mot", "accel")

    @property
    def distance(self) -> float:
        return float(self.x[-1] - self.x[0])

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(self.CSV_HEADER)
            for row in zip(self.t, self.x, self.v, self.omega, self.T_mot, self.accel):
                writer.writerow([f"{value:.10g}" for value in row])


def simulate(
    initial: DynState,
    schedule: NotchSchedule,
    theta_profile: float | ThetaProfile,
    params: TramParams,
    adh: AdhesionParams,
    dt: float = 1e-3,
    t_end: float = 60.0,
) -> Trajectory:
    """Integrate the quarter model under a notch schedule.

    The slope is looked up from ``theta_profile`` at the current traveled
    distance before every step.  When the speed crosses zero under an idle
    or braking notch the state is clamped to rest and integration ends
    early (stop detected at the dt sampling resolution).
    """
    if t_end <= 0.0:
        raise ParameterError("t_end must be positive")
    theta_of = _as_theta_profile(theta_profile)
    n_steps = int(round(t_end / dt))

    ts = [0.0]
    states = [initial]
    theta0 = theta_of(initial.x)
    accels = [
        _derivatives(
            initial.omega_wh, initial.v_t, initial.T_mot, theta0, params, adh
        )[1]
    ]
    stopped = False

    state = initial
    for k in range(1, n_steps + 1):
        t_prev = (k - 1) * dt
        p = schedule.notch_at(t_prev)
        theta = theta_of(state.x)
        prev_v, prev_x = state.v_t, state.x
        state = step(state, p, theta, params, adh, dt)
        if p <= 0 and prev_v > 0.0 and state.v_t <= 0.0:
            # the crossing step integrates a slightly negative tail speed;
            # the stopping point cannot lie behind the previous sample
            state = replace(
                state, v_t=0.0, omega_wh=0.0, x=max(state.x, prev_x)
            )
            stopped = True
        ts.append(k * dt)
        states.append(state)
        theta_new = theta_of(state.x)
        accels.append(
            _derivatives(
                state.omega_wh, state.v_t, state.T_mot, theta_new, params, adh
            )[1]
        )
        if stopped:
            break

    return Trajectory(
        t=np.array(ts),
        x=np.array([s.x for s in states]),
        v=np.array([s.v_t for s in states]),
        omega=np.array([s.omega_wh for s in states]),
        T_mot=np.array([s.T_mot for s in states]),
        accel=np.array(accels),
        stopped=stopped,
    )
