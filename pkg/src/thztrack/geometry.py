"""Target kinematics and sine-space angular geometry seen from a fixed base station.

All angular quantities that cross module boundaries are expressed as the sine
of the angle from the array broadside, i.e. values in [-1, 1]. Conversion from
Cartesian poses happens here and nowhere else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

Point = tuple[float, float]


@dataclass(frozen=True)
class SensedState:
    """Exact target state acquired at the start of a sensing period.

    Parameters
    ----------
    position : (x, y) in metres
    velocity : (vx, vy) in metres per second
    epoch : seconds since simulation start at which the state was sensed
    """

    position: Point
    velocity: Point
    epoch: float = 0.0

    def __post_init__(self):
        values = (*self.position, *self.velocity, self.epoch)
        if not all(math.isfinite(v) for v in values):
            raise ValueError("sensed state fields must be finite")

    @property
    def speed(self) -> float:
        return math.hypot(self.velocity[0], self.velocity[1])


@dataclass(frozen=True)
class TargetPose:
    """Predicted target position at elapsed time ``elapsed`` within a period."""

    position: Point
    elapsed: float

    def __post_init__(self):
        if not (math.isfinite(self.elapsed) and self.elapsed >= 0.0):
            raise ValueError("elapsed time must be finite and non-negative")


@dataclass(frozen=True)
class BsGeometry:
    """Base-station placement: array centre and unit broadside direction."""

    origin: Point = (0.0, 0.0)
    boresight: Point = (1.0, 0.0)

    def __post_init__(self):
        norm = math.hypot(self.boresight[0], self.boresight[1])
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"boresight must be a unit vector, got norm {norm!r}")

    @property
    def lateral(self) -> Point:
        """Unit vector perpendicular to boresight (90 degrees counter-clockwise)."""
        bx, by = self.boresight
        return (-by, bx)


@dataclass(frozen=True)
class AngularInterval:
    """Sine-space beam coverage: centre ``theta_m`` and half-width ``delta``."""

    theta_m: float
    delta: float

    def __post_init__(self):
        if not (math.isfinite(self.theta_m) and math.isfinite(self.delta)):
            raise ValueError("interval parameters must be finite")
        if self.delta < 0.0:
            raise ValueError(f"half-width must be non-negative, got {self.delta!r}")
        if not (-1.0 < self.theta_m < 1.0):
            raise ValueError(f"beam centre must lie in (-1, 1), got {self.theta_m!r}")
        if self.theta_m - self.delta < -1.0 or self.theta_m + self.delta > 1.0:
            raise ValueError("interval extends outside the sine-space domain [-1, 1]")

    @property
    def lo(self) -> float:
        return self.theta_m - self.delta

    @property
    def hi(self) -> float:
        return self.theta_m + self.delta


class MotionModel:
    """Kinematic law used to extrapolate a sensed state forward in time."""

    def displace(self, state: SensedState, t: float) -> Point:
        raise NotImplementedError


class UniformRectilinearMotion(MotionModel):
    """Constant-velocity straight-line motion: p(t) = p0 + v0 * t."""

    def displace(self, state: SensedState, t: float) -> Point:
        return (
            state.position[0] + state.velocity[0] * t,
            state.position[1] + state.velocity[1] * t,
        )


_URM = UniformRectilinearMotion()


def predict_pose(
    state: SensedState,
    t: float,
    tau: float,
    model: MotionModel | None = None,
) -> TargetPose:
    """Extrapolate the sensed state by ``t`` seconds within a period of length ``tau``.

    Prediction is exact under the motion model; no sensing or prediction noise
    is injected. Raises ValueError when ``t`` falls outside [0, tau].
    """
    if tau <= 0.0:
        raise ValueError(f"sensing period must be positive, got {tau!r}")
    if t < 0.0 or t > tau * (1.0 + 1e-12):
        raise ValueError(f"elapsed time {t!r} outside the sensing period [0, {tau!r}]")
    model = model or _URM
    return TargetPose(position=model.displace(state, t), elapsed=t)


def pose_to_direction(pose: TargetPose, geom: BsGeometry) -> tuple[float, float]:
    """Convert a Cartesian pose into (signed sine of boresight angle, distance).

    The sine is positive towards the geometry's lateral direction. For a target
    at lateral offset x on a line at perpendicular distance D this reduces to
    sin = x / sqrt(x^2 + D^2) and distance = sqrt(x^2 + D^2).
    """
    rx = pose.position[0] - geom.origin[0]
    ry = pose.position[1] - geom.origin[1]
    distance = math.hypot(rx, ry)
    if distance <= 0.0:
        raise ValueError("target position coincides with the base station origin")
    bx, by = geom.boresight
    sin_dir = (bx * ry - by * rx) / distance
    return max(-1.0, min(1.0, sin_dir)), distance


def path_to_interval(
    state: SensedState,
    tau: float,
    geom: BsGeometry,
    model: MotionModel | None = None,
) -> AngularInterval:
    """Sine-space interval swept by the predicted path over one sensing period.

    The centre is the midpoint of the endpoint sines and the half-width their
    absolute half-difference, so motion in either angular direction is covered.
    """
    sin0, _ = pose_to_direction(predict_pose(state, 0.0, tau, model), geom)
    sin1, _ = pose_to_direction(predict_pose(state, tau, tau, model), geom)
    return AngularInterval(
        theta_m=0.5 * (sin0 + sin1),
        delta=0.5 * abs(sin1 - sin0),
    )


def point_at_direction(geom: BsGeometry, sin_dir: float, distance: float) -> Point:
    """World position at a given signed sine direction and range from the BS."""
    if not -1.0 <= sin_dir <= 1.0:
        raise ValueError(f"sine direction must lie in [-1, 1], got {sin_dir!r}")
    if distance <= 0.0:
        raise ValueError(f"distance must be positive, got {distance!r}")
    cos_dir = math.sqrt(max(0.0, 1.0 - sin_dir * sin_dir))
    bx, by = geom.boresight
    px, py = geom.lateral
    return (
        geom.origin[0] + distance * (cos_dir * bx + sin_dir * px),
        geom.origin[1] + distance * (cos_dir * by + sin_dir * py),
    )
