"""Fast named invariant checks behind the `validate` CLI command.

Each check is small enough to run in seconds; together they cover the
closed-form/spectral oracle pair, guided-transport equivariance (routed
through the public guidance functions so an injected error is caught), and
the exact proper-time results.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.special import ndtr, ndtri

from . import dynamics
from .dynamics import GridState, grid_evolve
from .packets import (
    FULL_VON_NEUMANN,
    ROCKET,
    TRANSLATION_ONLY,
    GaussianPacket,
    OnticState,
    density,
    evolve_packet,
)
from .relativity import Cylinder, constant_speed, proper_time, scenario_proper_times
from .spin import Direction, correlation_exact, singlet_coefficients
from .stats import ks_statistic

Check = tuple[str, bool, str]


def _check_proper_time_constant() -> Check:
    value = proper_time(constant_speed(0.6, 10.0))
    err = abs(value - 8.0)
    return "proper_time_constant_profile", err < 1e-9, f"|tau - 8| = {err:.2e}"


def _check_proper_time_cylinder() -> Check:
    pt = scenario_proper_times(Cylinder(6.0, 0.6))
    ok = pt.delta_tau_e == 10.0 and abs(pt.delta_tau_r - 8.0) < 1e-12
    return (
        "proper_time_cylinder",
        ok,
        f"(tau_e, tau_r) = ({pt.delta_tau_e}, {pt.delta_tau_r})",
    )


def _check_singlet_curve() -> Check:
    worst = 0.0
    for k in range(9):
        theta = k * math.pi / 8.0
        d = singlet_coefficients(Direction(0.0), Direction(theta))
        worst = max(worst, abs(sum(d.weights().values()) - 1.0))
        worst = max(
            worst, abs(correlation_exact(Direction(0.0), Direction(theta)) + math.cos(theta))
        )
    return "singlet_correlation_curve", worst < 1e-12, f"max defect = {worst:.2e}"


def _check_oracle_equivalence() -> Check:
    packet = GaussianPacket()
    state = GridState.from_packet(packet)
    worst = 0.0
    for tau in (1.0, 2.5, 5.0):
        evolved = grid_evolve(state, 1, 1.0, tau, packet.mass)
        closed = density(evolve_packet(packet, 1, 1.0, tau, FULL_VON_NEUMANN), evolved.x)
        worst = max(worst, float(np.max(np.abs(evolved.density() - closed))))
    return "oracle_equivalence", worst < 1e-8, f"max pointwise error = {worst:.2e}"


def _check_equivariance() -> Check:
    n, tau, dt = 400, 1.0, 0.02
    threshold = 1.63 / math.sqrt(n)
    rng = np.random.Generator(np.random.PCG64(1905))
    worst = 0.0
    for mode in (TRANSLATION_ONLY, FULL_VON_NEUMANN):
        packet = GaussianPacket()
        state = OnticState(packet, 1, Direction(0.0), ROCKET)
        x0 = packet.sigma0 * ndtri(rng.random(n))
        finals = np.array(
            [
                dynamics.integrate_trajectory(state, x, 1.0, tau, dt, mode).final
                for x in x0
            ]
        )
        target = evolve_packet(packet, 1, 1.0, tau, mode)
        cdf: Callable = lambda x: ndtr((x - target.center) / target.sigma)
        worst = max(worst, ks_statistic(finals, cdf))
    return (
        "equivariance_guided_transport",
        worst < threshold,
        f"max KS = {worst:.4f} (limit {threshold:.4f})",
    )


ALL_CHECKS = (
    _check_proper_time_constant,
    _check_proper_time_cylinder,
    _check_singlet_curve,
    _check_oracle_equivalence,
    _check_equivariance,
)


def run_all() -> list[Check]:
    results = []
    for check in ALL_CHECKS:
        try:
            results.append(check())
        except Exception as exc:  # a crash is a failure with the check's name
            name = check.__name__.removeprefix("_check_")
            results.append((name, False, f"raised {type(exc).__name__}: {exc}"))
    return results
