"""Closed-form evolution of one-dimensional Gaussian ontic wavepackets.

Each wing carries a single spatial coordinate along its measurement axis.
A packet prepared as

    chi(x, 0) = (2 pi s0^2)^(-1/4) exp(-(x - c)^2 / (4 s0^2) + i p0 (x - c))

has position density R^2 = N(c, s0^2). Under the wing-local Hamiltonian
p^2/2m + i g p acting on the spin eigenstate with label i, the momentum-space
solution is exact and gives, in the packet's own proper time tau:

    translation_only   c -> c + i g tau, width frozen (kinetic term dropped)
    full_von_neumann   c -> c + (p0/m + i g) tau,
                       width s0 -> s0 sqrt(1 + (tau / (2 m s0^2))^2)
    impulsive_kick     momentum boost i*dp at tau = 0, then free flight:
                       c -> c + (p0 + i dp) tau / m with free spreading

The phase gradient of the evolving packet is

    dS/dx = p + t_s (x - c_t) / (4 m s0^2 s_t^2)

where p is the packet's plane-wave momentum (p0, boosted by the kick in
impulsive mode), t_s the time spent under kinetic spreading and s_t the
current width. Widths do not compose, so a packet stores its preparation
width s0 together with (tau, spread_tau) and derives the current width;
this makes repeated evolution exactly associative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .spin import Direction, SpinLabel, check_spin

ROCKET = "rocket"
EARTH = "earth"
WINGS = (ROCKET, EARTH)

_TRANSLATION = "translation_only"
_VON_NEUMANN = "full_von_neumann"
_IMPULSIVE = "impulsive_kick"


@dataclass(frozen=True)
class EvolutionMode:
    """How a wing's measurement interaction drives the packet."""

    kind: str
    kick: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in (_TRANSLATION, _VON_NEUMANN, _IMPULSIVE):
            raise ValueError(f"unknown evolution mode {self.kind!r}")
        if not math.isfinite(self.kick):
            raise ValueError("kick magnitude must be finite")
        if self.kind == _IMPULSIVE and self.kick <= 0.0:
            raise ValueError("impulsive_kick requires kick > 0")

    @property
    def spreads(self) -> bool:
        """Whether the kinetic term acts (packet width grows)."""
        return self.kind != _TRANSLATION

    @classmethod
    def translation_only(cls) -> "EvolutionMode":
        return cls(_TRANSLATION)

    @classmethod
    def full_von_neumann(cls) -> "EvolutionMode":
        return cls(_VON_NEUMANN)

    @classmethod
    def impulsive_kick(cls, kick: float) -> "EvolutionMode":
        return cls(_IMPULSIVE, kick)


TRANSLATION_ONLY = EvolutionMode.translation_only()
FULL_VON_NEUMANN = EvolutionMode.full_von_neumann()


@dataclass(frozen=True)
class GaussianPacket:
    """Gaussian wavepacket state of one particle on one wing.

    sigma0 is the standard deviation of the position density R^2 at
    preparation; the current width is the derived ``sigma``. ``disp`` tracks
    the accumulated interaction displacement (signed by the spin label) and
    ``spread_tau`` the proper time spent under kinetic spreading.
    """

    center: float = 0.0
    sigma0: float = 1.0
    p0: float = 0.0
    mass: float = 1.0
    tau: float = 0.0
    disp: float = 0.0
    spread_tau: float = 0.0

    def __post_init__(self) -> None:
        if self.sigma0 <= 0.0:
            raise ValueError("packet width must be positive")
        if self.mass <= 0.0:
            raise ValueError("packet mass must be positive")
        if self.tau < 0.0 or self.spread_tau < 0.0:
            raise ValueError("elapsed proper time cannot be negative")

    @property
    def sigma(self) -> float:
        """Current standard deviation of the position density."""
        u = self.spread_tau / (2.0 * self.mass * self.sigma0**2)
        return self.sigma0 * math.sqrt(1.0 + u * u)


@dataclass(frozen=True)
class OnticState:
    """One particle's hidden-variable wave part: packet + definite spin."""

    packet: GaussianPacket
    spin: SpinLabel
    axis: Direction
    wing: str

    def __post_init__(self) -> None:
        check_spin(self.spin)
        if self.wing not in WINGS:
            raise ValueError(f"wing must be one of {WINGS}, got {self.wing!r}")


def evolve_packet(
    p: GaussianPacket, i: SpinLabel, g: float, tau: float, mode: EvolutionMode
) -> GaussianPacket:
    """Advance a packet by proper time tau under its wing's interaction."""
    check_spin(i)
    if tau < 0.0:
        raise ValueError("cannot evolve by negative proper time")
    if tau == 0.0:
        return p
    if mode.kind == _TRANSLATION:
        shift = i * g * tau
        return replace(p, center=p.center + shift, tau=p.tau + tau, disp=p.disp + shift)
    if mode.kind == _VON_NEUMANN:
        return replace(
            p,
            center=p.center + (p.p0 / p.mass + i * g) * tau,
            tau=p.tau + tau,
            disp=p.disp + i * g * tau,
            spread_tau=p.spread_tau + tau,
        )
    # Impulsive kick: boost once at tau = 0, free flight afterwards.
    momentum = p.p0 + i * mode.kick if p.tau == 0.0 else p.p0
    return replace(
        p,
        center=p.center + momentum / p.mass * tau,
        p0=momentum,
        tau=p.tau + tau,
        disp=p.disp + i * mode.kick / p.mass * tau,
        spread_tau=p.spread_tau + tau,
    )


def density(p: GaussianPacket, x) -> np.ndarray | float:
    """Position density R^2(x) — a normal pdf at the current center/width."""
    s = p.sigma
    z = (np.asarray(x, dtype=float) - p.center) / s
    out = np.exp(-0.5 * z * z) / (s * math.sqrt(2.0 * math.pi))
    return float(out) if np.isscalar(x) else out


def initial_amplitude(p: GaussianPacket, x: np.ndarray) -> np.ndarray:
    """Complex amplitude chi(x, 0) of an unevolved packet."""
    if p.tau != 0.0:
        raise ValueError("initial amplitude is defined for an unevolved packet")
    xr = np.asarray(x, dtype=float) - p.center
    norm = (2.0 * math.pi * p.sigma0**2) ** -0.25
    return norm * np.exp(-(xr**2) / (4.0 * p.sigma0**2) + 1j * p.p0 * xr)


def phase_gradient(
    p: GaussianPacket, i: SpinLabel, g: float, x, mode: EvolutionMode
) -> np.ndarray | float:
    """Spatial phase gradient dS/dx of the evolving packet, in closed form.

    The evolved packet determines the gradient on its own: the plane-wave
    momentum is stored in p0 (already boosted for a kicked packet) and the
    chirp term vanishes when spread_tau = 0 (rigid transport).
    """
    check_spin(i)
    if p.spread_tau == 0.0:
        grad = np.full_like(np.asarray(x, dtype=float), p.p0)
    else:
        gain = p.spread_tau / (4.0 * p.mass * p.sigma0**2 * p.sigma**2)
        grad = p.p0 + gain * (np.asarray(x, dtype=float) - p.center)
    return float(grad) if np.isscalar(x) else grad


def packet_overlap(a: GaussianPacket, b: GaussianPacket) -> float:
    """Bhattacharyya coefficient of two packet densities, in [0, 1].

    Closed form for Gaussians:
    sqrt(2 sa sb / (sa^2 + sb^2)) * exp(-(ca - cb)^2 / (4 (sa^2 + sb^2))).
    """
    sa, sb = a.sigma, b.sigma
    ssum = sa * sa + sb * sb
    pref = math.sqrt(2.0 * sa * sb / ssum)
    return pref * math.exp(-((a.center - b.center) ** 2) / (4.0 * ssum))
