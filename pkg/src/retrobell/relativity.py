"""Worldlines and elapsed proper time for the two wings.

Speeds are fractions of c (natural units, c = 1) and proper time along a
worldline with speed profile v(t) over coordinate time [0, T] is
integral of sqrt(1 - v(t)^2) dt. Two scenarios are supported: a rocket
round trip against an Earth laboratory at rest, and two inertial travellers
on a cylindrical flat spacetime whose worldlines rejoin after one
circumnavigation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

from scipy.integrate import quad

_QUAD_ABS_TOL = 1e-12  # comfortably inside the 1e-10 contract


@dataclass(frozen=True)
class Worldline:
    """Piecewise-smooth speed profile v(t) in [0, 1) over t in [0, duration].

    ``breakpoints`` are the piece boundaries (including the endpoints);
    the profile must be smooth inside each piece.
    """

    duration: float
    speed: Callable[[float], float]
    breakpoints: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.duration <= 0.0:
            raise ValueError("worldline duration must be positive")
        bps = tuple(sorted(set(self.breakpoints) | {0.0, self.duration}))
        if bps[0] < 0.0 or bps[-1] > self.duration:
            raise ValueError("breakpoints must lie within [0, duration]")
        object.__setattr__(self, "breakpoints", bps)


def at_rest(duration: float) -> Worldline:
    """Worldline of a laboratory that never moves."""
    return Worldline(duration, lambda t: 0.0, (0.0, duration))


def constant_speed(v: float, duration: float) -> Worldline:
    """Inertial worldline at fixed speed v."""
    if not 0.0 <= v < 1.0:
        raise ValueError("speed must lie in [0, 1)")
    return Worldline(duration, lambda t: v, (0.0, duration))


def make_round_trip(v_max: float, ramp: float, cruise: float) -> Worldline:
    """Symmetric trapezoidal speed profile: ramp up, cruise, ramp down.

    With ramp = 0 this degenerates to a constant-speed profile.
    """
    if not 0.0 < v_max < 1.0:
        raise ValueError("cruise speed must lie in (0, 1)")
    if ramp < 0.0 or cruise < 0.0:
        raise ValueError("ramp and cruise durations cannot be negative")
    total = 2.0 * ramp + cruise
    if total == 0.0:
        raise ValueError("profile must have nonzero duration")

    def speed(t: float) -> float:
        if ramp > 0.0 and t < ramp:
            return v_max * t / ramp
        if t <= ramp + cruise:
            return v_max
        return v_max * max(0.0, (total - t)) / ramp

    return Worldline(total, speed, (0.0, ramp, ramp + cruise, total))


@dataclass(frozen=True)
class RocketRoundTrip:
    """Earth laboratory at rest; rocket departs and returns over the same T."""

    earth: Worldline
    rocket: Worldline

    def __post_init__(self) -> None:
        if self.earth.duration != self.rocket.duration:
            raise ValueError("both wings must share the coordinate-time interval")

    @classmethod
    def of(cls, rocket: Worldline) -> "RocketRoundTrip":
        return cls(at_rest(rocket.duration), rocket)


@dataclass(frozen=True)
class Cylinder:
    """Flat cylindrical spacetime: traveller loops once around at speed v."""

    circumference: float
    speed: float

    def __post_init__(self) -> None:
        if self.circumference <= 0.0:
            raise ValueError("circumference must be positive")
        if not 0.0 < self.speed < 1.0:
            raise ValueError("traveller speed must lie in (0, 1)")


Scenario = Union[RocketRoundTrip, Cylinder]


@dataclass(frozen=True)
class ProperTimes:
    """Elapsed proper times of the two wings between the shared endpoints."""

    delta_tau_e: float
    delta_tau_r: float

    def __post_init__(self) -> None:
        if not 0.0 < self.delta_tau_r <= self.delta_tau_e:
            raise ValueError(
                "proper times must satisfy 0 < delta_tau_r <= delta_tau_e"
            )

    @property
    def ratio(self) -> float:
        return self.delta_tau_r / self.delta_tau_e


def proper_time(w: Worldline) -> float:
    """Elapsed proper time along a worldline, to absolute accuracy 1e-10.

    Adaptive quadrature is applied piecewise between the profile breakpoints,
    so piecewise-constant profiles integrate exactly. Speeds at or above c
    are rejected wherever the quadrature samples them.
    """

    def integrand(t: float) -> float:
        v = w.speed(t)
        if not 0.0 <= v < 1.0:
            raise ValueError(f"speed {v} at t={t} outside [0, 1)")
        return math.sqrt(1.0 - v * v)

    total = 0.0
    for a, b in zip(w.breakpoints[:-1], w.breakpoints[1:]):
        if b > a:
            val, _ = quad(integrand, a, b, epsabs=_QUAD_ABS_TOL, limit=200)
            total += val
    return total


def scenario_proper_times(s: Scenario) -> ProperTimes:
    """Proper-time pair (earth, rocket) for a scenario."""
    if isinstance(s, Cylinder):
        t = s.circumference / s.speed
        return ProperTimes(t, t * math.sqrt(1.0 - s.speed**2))
    return ProperTimes(proper_time(s.earth), proper_time(s.rocket))
