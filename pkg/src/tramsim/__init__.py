"""Tram longitudinal dynamics, braking-distance prediction, GNSS/IMU/map
state estimation, and grey-box coefficient identification."""

from .dynamics import (
    ADHESION_SETS,
    DRY,
    WET,
    AdhesionParams,
    DynState,
    NotchSchedule,
    ResistanceCoeffs,
    Trajectory,
    TramParams,
    adhesion_coefficient,
    commanded_torque,
    force_balance,
    initial_state,
    propulsion_resistance,
    simulate,
    step,
    torque_lag_step,
    with_total_mass,
)
from .estimator import (
    EstimatorState,
    Measurement,
    NoiseConfig,
    kf_predict,
    kf_update,
    lowpass_accel,
    run_estimator,
)
from .ident import (
    CoastdownSegment,
    FitResult,
    extract_coastdowns,
    fit_resistance,
    fit_traction_gains,
)
from .predictor import (
    BrakeQuery,
    BrakeResult,
    compare_methods,
    predict_kinematic,
    predict_model,
)
from .track import TrackMap, load_track, point_at, project_to_track, save_track, slope_at

__all__ = [
    "ADHESION_SETS",
    "DRY",
    "WET",
    "AdhesionParams",
    "BrakeQuery",
    "BrakeResult",
    "CoastdownSegment",
    "DynState",
    "EstimatorState",
    "FitResult",
    "Measurement",
    "NoiseConfig",
    "NotchSchedule",
    "ResistanceCoeffs",
    "TrackMap",
    "Trajectory",
    "TramParams",
    "adhesion_coefficient",
    "commanded_torque",
    "compare_methods",
    "extract_coastdowns",
    "fit_resistance",
    "fit_traction_gains",
    "force_balance",
    "initial_state",
    "kf_predict",
    "kf_update",
    "load_track",
    "lowpass_accel",
    "point_at",
    "predict_kinematic",
    "predict_model",
    "project_to_track",
    "propulsion_resistance",
    "run_estimator",
    "save_track",
    "simulate",
    "slope_at",
    "step",
    "torque_lag_step",
    "with_total_mass",
]

__version__ = "0.1.0"
