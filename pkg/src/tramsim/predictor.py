"""Braking-distance prediction.

The model-based route forward-simulates the quarter model from the
current speed with a constant braking notch until the tram stops and
reports the traveled distance; the kinematic route is the constant-
deceleration closed form d = v^2 / (2 a).  A comparison generator
evaluates both over a speed grid for a batch of scenarios.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import (
    AdhesionParams,
    DRY,
    NotchSchedule,
    ResistanceCoeffs,
    Trajectory,
    TramParams,
    initial_state,
    simulate,
    with_total_mass,
)
from .errors import NonStoppingError, ParameterError
from .track import TrackMap, slope_at


@dataclass(frozen=True)
class BrakeQuery:
    """One braking scenario: initial speed, notch and the physical
    conditions under which the stop is simulated.

    The slope source is either the constant ``theta`` or, when ``track``
    is given, the map slope re-evaluated along the simulated chainage
    starting from ``chainage`` (held at the boundary values beyond the
    mapped extent).
    """

    v0: float
    notch: int = -7
    mass: float = 17000.0
    adhesion: AdhesionParams = DRY
    theta: float = 0.0
    track: TrackMap | None = None
    chainage: float = 0.0
    dt: float = 1e-3
    t_end: float = 300.0
    resistance: ResistanceCoeffs | None = None
    params: TramParams = field(default_factory=TramParams)
    label: str = ""

    def __post_init__(self):
        if self.v0 < 0.0:
            raise ParameterError("v0 must be non-negative")
        if not -7 <= self.notch <= 0:
            raise ParameterError("braking queries need a notch in [-7, 0]")

    def effective_params(self) -> TramParams:
        params = with_total_mass(self.params, self.mass)
        if self.resistance is not None:
            params = replace(params, resistance=self.resistance)
        return params

    def theta_profile(self):
        if self.track is None:
            return self.theta
        track, x0 = self.track, self.chainage

        def theta_of(x_rel: float) -> float:
            x = min(max(x0 + x_rel, 0.0), track.total_length)
            return slope_at(x, track)

        return theta_of


@dataclass(frozen=True)
class BrakeResult:
    braking_distance: float  # m
    stop_time: float         # s
    trajectory: Trajectory | None = None


def predict_kinematic(v: float, a_dec: float) -> float:
    """Constant-deceleration braking distance 0.5 v^2 / a_dec."""
    if a_dec <= 0.0:
        raise ParameterError("a_dec must be strictly positive")
    if v < 0.0:
        raise ParameterError("v must be non-negative")
    return 0.5 * v * v / a_dec


def predict_model(q: BrakeQuery, keep_trajectory: bool = False) -> BrakeResult:
    """Braking distance by forward simulation until the tram stops.

    Starts from steady rolling (zero creep, zero motor torque) at q.v0 and
    holds q.notch.  Raises NonStoppingError when the tram is still moving
    at q.t_end, which flags descent/notch combinations that cannot stop.
    """
    if q.v0 == 0.0:
        return BrakeResult(0.0, 0.0, None)

    params = q.effective_params()
    traj = simulate(
        initial_state(q.v0, params),
        NotchSchedule.constant(q.notch),
        q.theta_profile(),
        params,
        q.adhesion,
        dt=q.dt,
        t_end=q.t_end,
    )
    if not traj.stopped:
        raise NonStoppingError(q.t_end, float(traj.v[-1]))
    return BrakeResult(
        braking_distance=traj.distance,
        stop_time=float(traj.t[-1]),
        trajectory=traj if keep_trajectory else None,
    )


@dataclass
class ComparisonTable:
    """Per-speed braking distances: one kinematic column plus one column
    per simulated scenario."""

    speeds: np.ndarray
    kinematic: np.ndarray
    model: np.ndarray  # shape (n_scenarios, n_speeds)
    labels: list[str]

    def header(self) -> list[str]:
        return ["v0", "kinematic"] + self.labels

    def rows(self):
        for j, v0 in enumerate(self.speeds):
            yield [float(v0), float(self.kinematic[j])] + [
                float(self.model[i, j]) for i in range(self.model.shape[0])
            ]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(self.header())
            for row in self.rows():
                writer.writerow([f"{value:.10g}" for value in row])


def compare_methods(
    speeds,
    scenarios: list[BrakeQuery],
    a_dec: float,
) -> ComparisonTable:
    """Evaluate model-based distances per scenario over a speed grid,
    alongside the single kinematic baseline curve."""
    speeds = np.asarray(list(speeds), dtype=float)
    if speeds.size == 0:
        raise ParameterError("speed grid must be non-empty")
    if np.any(np.diff(speeds) <= 0.0):
        raise ParameterError("speed grid must be strictly ascending")
    if not scenarios:
        raise ParameterError("at least one scenario is required")

    kinematic = np.array([predict_kinematic(v, a_dec) for v in speeds])
    model = np.zeros((len(scenarios), speeds.size))
    labels = []
    for i, scenario in enumerate(scenarios):
        labels.append(scenario.label or f"sim{i + 1}")
        for j, v0 in enumerate(speeds):
            query = BrakeQuery(
                v0=float(v0),
                notch=scenario.notch,
                mass=scenario.mass,
                adhesion=scenario.adhesion,
                theta=scenario.theta,
                track=scenario.track,
                chainage=scenario.chainage,
                dt=scenario.dt,
                t_end=scenario.t_end,
                resistance=scenario.resistance,
                params=scenario.params,
            )
            model[i, j] = predict_model(query).braking_distance
    return ComparisonTable(
        speeds=speeds, kinematic=kinematic, model=model, labels=labels
    )
