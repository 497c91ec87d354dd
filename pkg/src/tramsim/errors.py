"""Exception types shared across the package."""


class TramSimError(Exception):
    """Base class for all errors raised by tramsim."""


class ParameterError(TramSimError, ValueError):
    """An argument or parameter set violates its documented range."""


class ConfigError(TramSimError):
    """A configuration file or option combination is invalid."""


class NumericalDivergenceError(TramSimError):
    """Integration produced a non-finite quantity."""

    def __init__(self, quantity: str, t: float | None = None):
        self.quantity = quantity
        self.t = t
        where = f" at t={t:.6g} s" if t is not None else ""
        super().__init__(f"simulation diverged: {quantity} became non-finite{where}")


class OffTrackError(TramSimError):
    """A GNSS fix projects farther from the track than the acceptance gate."""

    def __init__(self, lateral_offset: float, gate: float):
        self.lateral_offset = lateral_offset
        self.gate = gate
        super().__init__(
            f"fix is {lateral_offset:.2f} m off the track (gate {gate:.2f} m)"
        )


class TrackRangeError(TramSimError, ValueError):
    """A chainage query lies outside the mapped track."""


class TrackParseError(TramSimError):
    """A track file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class TelemetryParseError(TramSimError):
    """A telemetry file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class IdentifiabilityError(TramSimError):
    """The identification data cannot determine the requested coefficients."""


class PlateauError(TramSimError):
    """No quasi-steady acceleration plateau found in a traction run."""


class NonStoppingError(TramSimError):
    """The queried notch/slope combination does not bring the tram to rest."""

    def __init__(self, t_end: float, v_end: float):
        self.t_end = t_end
        self.v_end = v_end
        super().__init__(
            f"tram still moving at {v_end:.3f} m/s after {t_end:.1f} s; "
            "the selected notch cannot stop it on this slope"
        )
