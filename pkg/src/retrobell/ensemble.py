"""Ensemble core: spin-pair sampling, per-wing proper-time dynamics, readout.

Each trial prepares both particles in definite eigenstates of their wing's
future measurement axis, with joint probabilities given by the squared
singlet coefficients. Positions are drawn from the initial packet densities,
transported by the guidance dynamics in each wing's own proper time, and
read out against the midpoint of the two evolved eigenpackets. The
multi-time epistemic state appears only as statistical bookkeeping
(weights times displaced densities), never as a guiding field.

Determinism contract: trial k consumes exactly the four uniforms
[4k, 4k+4) of a PCG64 stream seeded with the master seed (positions via
inverse CDF), so results are byte-identical for any chunking or worker
count. The first uniform alone fixes the rocket spin against the exact
marginal 1/2, which keeps every rocket-wing quantity bit-independent of
earth-wing inputs.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from multiprocessing import get_context
from typing import Optional

import numpy as np
from scipy.special import ndtri

from .dynamics import transport_positions
from .packets import (
    EARTH,
    ROCKET,
    TRANSLATION_ONLY,
    EvolutionMode,
    GaussianPacket,
    density,
    evolve_packet,
    packet_overlap,
)
from .relativity import Cylinder, ProperTimes, Scenario, scenario_proper_times
from .spin import Direction, SingletDecomposition, SpinLabel, Z_AXIS, singlet_coefficients


@dataclass(frozen=True)
class WingParams:
    """Initial packet parameters of one wing (and optional kick override)."""

    sigma0: float = 1.0
    p0: float = 0.0
    mass: float = 1.0
    kick: Optional[float] = None

    def packet(self) -> GaussianPacket:
        return GaussianPacket(center=0.0, sigma0=self.sigma0, p0=self.p0, mass=self.mass)


def _default_scenario() -> Scenario:
    return Cylinder(6.0, 0.6)


@dataclass(frozen=True)
class ExperimentConfig:
    """Full configuration of one Bell-experiment run."""

    r: Direction = Z_AXIS
    e: Direction = Z_AXIS
    g: float = 1.0
    mode: EvolutionMode = TRANSLATION_ONLY
    rocket: WingParams = field(default_factory=WingParams)
    earth: WingParams = field(default_factory=WingParams)
    scenario: Scenario = field(default_factory=_default_scenario)
    trials: int = 10_000
    seed: int = 0
    overlap_threshold: float = 0.1

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trial count must be at least 1")
        if not 0.0 < self.overlap_threshold < 1.0:
            raise ValueError("overlap threshold must lie in (0, 1)")
        if not math.isfinite(self.g):
            raise ValueError("coupling must be finite")

    def wing_params(self, wing: str) -> WingParams:
        return self.rocket if wing == ROCKET else self.earth

    def wing_mode(self, wing: str) -> EvolutionMode:
        p = self.wing_params(wing)
        if self.mode.kind == "impulsive_kick" and p.kick is not None:
            return EvolutionMode.impulsive_kick(p.kick)
        return self.mode

    def wing_axis(self, wing: str) -> Direction:
        return self.r if wing == ROCKET else self.e


@dataclass(slots=True)
class TrialRecord:
    """One entangled pair: sampled spins, positions, outcomes, failures."""

    index: int
    i1: SpinLabel
    i2: SpinLabel
    x_r0: float
    x_e0: float
    x_rf: float
    x_ef: float
    o_r: Optional[SpinLabel]
    o_e: Optional[SpinLabel]
    fail_r: bool
    fail_e: bool


@dataclass(eq=False)
class EnsembleResult:
    """Aggregated trial data of one run."""

    config: ExperimentConfig
    tau_r: float
    tau_e: float
    records: list[TrialRecord]
    spins: dict[str, np.ndarray]
    initial_positions: dict[str, np.ndarray]
    final_positions: dict[str, np.ndarray]
    outcomes: dict[str, Optional[np.ndarray]]
    overlap: dict[str, float]
    counts: dict[tuple[SpinLabel, SpinLabel], int]

    @property
    def trials(self) -> int:
        return len(self.spins[ROCKET])

    def failed(self, wing: str) -> bool:
        return self.outcomes[wing] is None

    def plate_samples(self, wing: str) -> np.ndarray:
        """Final positions recorded on a wing's plate (non-failed trials)."""
        if self.failed(wing):
            return np.empty(0)
        return self.final_positions[wing]


def sample_joint_spins(
    d: SingletDecomposition, rng: np.random.Generator
) -> tuple[SpinLabel, SpinLabel]:
    """Draw a spin pair with the decomposition's ensemble weights.

    Consumes exactly two uniforms: the first fixes i1 against its exact
    marginal 1/2 (implied by the decomposition invariants), the second
    fixes i2 conditionally. Equivalent to a categorical draw over the four
    weights.
    """
    u = rng.random(2)
    return _spins_from_uniforms(d, float(u[0]), float(u[1]))


def _spins_from_uniforms(
    d: SingletDecomposition, u1: float, u2: float
) -> tuple[SpinLabel, SpinLabel]:
    i1 = 1 if u1 < 0.5 else -1
    i2 = 1 if u2 < 2.0 * d.weight(i1, 1) else -1
    return i1, i2


def sample_initial_position(p: GaussianPacket, rng: np.random.Generator) -> float:
    """Draw one position from the packet density (inverse-CDF transform)."""
    return _position_from_uniform(p, float(rng.random()))


def _position_from_uniform(p: GaussianPacket, u: float) -> float:
    return p.center + p.sigma * float(ndtri(u))


def readout(
    x_final: float,
    plus: GaussianPacket,
    minus: GaussianPacket,
    threshold: float,
) -> tuple[Optional[SpinLabel], bool]:
    """Assign an outcome from the plate position, or flag resolution failure.

    Fails when the two evolved eigenpackets overlap too strongly
    (Bhattacharyya coefficient above the threshold); otherwise the outcome
    is the side of the midpoint between the packet centers, ties to +1.
    """
    if packet_overlap(plus, minus) > threshold:
        return None, True
    mid = 0.5 * (plus.center + minus.center)
    orient = 1.0 if plus.center >= minus.center else -1.0
    return (1 if (x_final - mid) * orient >= 0.0 else -1), False


def _eigenpackets(
    cfg: ExperimentConfig, wing: str, tau: float
) -> tuple[GaussianPacket, GaussianPacket, float]:
    base = cfg.wing_params(wing).packet()
    mode = cfg.wing_mode(wing)
    plus = evolve_packet(base, 1, cfg.g, tau, mode)
    minus = evolve_packet(base, -1, cfg.g, tau, mode)
    return plus, minus, packet_overlap(plus, minus)


def run_trial(
    cfg: ExperimentConfig,
    delta_tau: ProperTimes,
    trial_index: int,
    rng: Optional[np.random.Generator] = None,
) -> TrialRecord:
    """Run one entangled pair through sampling, dynamics, and readout.

    With the default rng the trial consumes its addressed uniform block, so
    the record matches the corresponding row of a full run bit for bit.
    """
    if rng is None:
        rng = trial_rng(cfg.seed, trial_index)
    u = rng.random(4)
    decomp = singlet_coefficients(cfg.r, cfg.e)
    i1, i2 = _spins_from_uniforms(decomp, float(u[0]), float(u[1]))
    tau_r, tau_e = delta_tau.delta_tau_r, delta_tau.delta_tau_e

    wings: dict[str, tuple] = {}
    for wing, spin, u_pos, tau in (
        (ROCKET, i1, float(u[2]), tau_r),
        (EARTH, i2, float(u[3]), tau_e),
    ):
        packet = cfg.wing_params(wing).packet()
        mode = cfg.wing_mode(wing)
        x0 = _position_from_uniform(packet, u_pos)
        xf = float(
            transport_positions(
                packet, np.array([spin]), np.array([x0]), cfg.g, tau, _TRIAL_DT, mode
            )[0]
        )
        plus, minus, _ = _eigenpackets(cfg, wing, tau)
        outcome, failed = readout(xf, plus, minus, cfg.overlap_threshold)
        wings[wing] = (x0, xf, outcome, failed)

    return TrialRecord(
        index=trial_index,
        i1=i1,
        i2=i2,
        x_r0=wings[ROCKET][0],
        x_e0=wings[EARTH][0],
        x_rf=wings[ROCKET][1],
        x_ef=wings[EARTH][1],
        o_r=wings[ROCKET][2],
        o_e=wings[EARTH][2],
        fail_r=wings[ROCKET][3],
        fail_e=wings[EARTH][3],
    )


_TRIAL_DT = 1e-3  # default guidance integration step
_UNIFORMS_PER_TRIAL = 4


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    """Generator positioned at the uniform block of one trial."""
    bg = np.random.PCG64(seed)
    bg.advance(_UNIFORMS_PER_TRIAL * trial_index)
    return np.random.Generator(bg)


def _run_chunk(
    cfg: ExperimentConfig, tau_r: float, tau_e: float, start: int, stop: int, dt: float
) -> dict[str, np.ndarray]:
    rng = trial_rng(cfg.seed, start)
    u = rng.random((stop - start, _UNIFORMS_PER_TRIAL))
    decomp = singlet_coefficients(cfg.r, cfg.e)
    i1 = np.where(u[:, 0] < 0.5, 1, -1)
    cond = np.where(i1 == 1, 2.0 * decomp.weight(1, 1), 2.0 * decomp.weight(-1, 1))
    i2 = np.where(u[:, 1] < cond, 1, -1)

    out: dict[str, np.ndarray] = {"i1": i1, "i2": i2}
    for wing, spins, u_pos, tau in (
        (ROCKET, i1, u[:, 2], tau_r),
        (EARTH, i2, u[:, 3], tau_e),
    ):
        packet = cfg.wing_params(wing).packet()
        x0 = packet.center + packet.sigma * ndtri(u_pos)
        xf = transport_positions(
            packet, spins, x0, cfg.g, tau, dt, cfg.wing_mode(wing)
        )
        out[f"x0_{wing}"] = x0
        out[f"xf_{wing}"] = xf
    return out


def _chunk_bounds(n: int, workers: int) -> list[tuple[int, int]]:
    size = -(-n // workers)
    return [(a, min(a + size, n)) for a in range(0, n, size)]


def run_experiment(
    cfg: ExperimentConfig,
    *,
    dt: float = _TRIAL_DT,
    workers: int = 1,
    keep_every: int = 1,
) -> EnsembleResult:
    """Run the configured scenario: N trials with per-trial substreams."""
    pt = scenario_proper_times(cfg.scenario)
    return run_experiment_at(
        cfg, pt.delta_tau_r, pt.delta_tau_e, dt=dt, workers=workers, keep_every=keep_every
    )


def run_experiment_at(
    cfg: ExperimentConfig,
    tau_r: float,
    tau_e: float,
    *,
    dt: float = _TRIAL_DT,
    workers: int = 1,
    keep_every: int = 1,
) -> EnsembleResult:
    """Run N trials at an arbitrary proper-time pair (tau_r, tau_e).

    The pair need not correspond to any common hypersurface of a scenario.
    """
    if tau_r < 0.0 or tau_e < 0.0:
        raise ValueError("proper times cannot be negative")
    if workers < 1:
        raise ValueError("worker count must be at least 1")
    if keep_every < 1:
        raise ValueError("record thinning factor must be at least 1")

    n = cfg.trials
    bounds = _chunk_bounds(n, workers) if workers > 1 else [(0, n)]
    if workers > 1 and len(bounds) > 1:
        with ProcessPoolExecutor(
            max_workers=workers, mp_context=get_context("spawn")
        ) as pool:
            parts = list(
                pool.map(
                    _run_chunk,
                    [cfg] * len(bounds),
                    [tau_r] * len(bounds),
                    [tau_e] * len(bounds),
                    [a for a, _ in bounds],
                    [b for _, b in bounds],
                    [dt] * len(bounds),
                )
            )
        cols = {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}
    else:
        cols = _run_chunk(cfg, tau_r, tau_e, 0, n, dt)

    spins = {ROCKET: cols["i1"], EARTH: cols["i2"]}
    x0 = {w: cols[f"x0_{w}"] for w in (ROCKET, EARTH)}
    xf = {w: cols[f"xf_{w}"] for w in (ROCKET, EARTH)}

    outcomes: dict[str, Optional[np.ndarray]] = {}
    overlap: dict[str, float] = {}
    for wing, tau in ((ROCKET, tau_r), (EARTH, tau_e)):
        plus, minus, ov = _eigenpackets(cfg, wing, tau)
        overlap[wing] = ov
        if ov > cfg.overlap_threshold:
            outcomes[wing] = None
        else:
            mid = 0.5 * (plus.center + minus.center)
            orient = 1.0 if plus.center >= minus.center else -1.0
            outcomes[wing] = np.where((xf[wing] - mid) * orient >= 0.0, 1, -1)

    counts: dict[tuple[SpinLabel, SpinLabel], int] = {}
    if outcomes[ROCKET] is not None and outcomes[EARTH] is not None:
        for a in (1, -1):
            for b in (1, -1):
                counts[(a, b)] = int(
                    np.sum((outcomes[ROCKET] == a) & (outcomes[EARTH] == b))
                )

    records = _build_records(cols, outcomes, keep_every)
    return EnsembleResult(
        config=cfg,
        tau_r=tau_r,
        tau_e=tau_e,
        records=records,
        spins=spins,
        initial_positions=x0,
        final_positions=xf,
        outcomes=outcomes,
        overlap=overlap,
        counts=counts,
    )


def _build_records(
    cols: dict[str, np.ndarray],
    outcomes: dict[str, Optional[np.ndarray]],
    keep_every: int,
) -> list[TrialRecord]:
    fail_r = outcomes[ROCKET] is None
    fail_e = outcomes[EARTH] is None
    o_r = outcomes[ROCKET]
    o_e = outcomes[EARTH]
    records = []
    for k in range(0, len(cols["i1"]), keep_every):
        records.append(
            TrialRecord(
                index=k,
                i1=int(cols["i1"][k]),
                i2=int(cols["i2"][k]),
                x_r0=float(cols["x0_rocket"][k]),
                x_e0=float(cols["x0_earth"][k]),
                x_rf=float(cols["xf_rocket"][k]),
                x_ef=float(cols["xf_earth"][k]),
                o_r=None if fail_r else int(o_r[k]),
                o_e=None if fail_e else int(o_e[k]),
                fail_r=fail_r,
                fail_e=fail_e,
            )
        )
    return records


def epistemic_density(
    cfg: ExperimentConfig, tau_r: float, tau_e: float, x_r, x_e
):
    """Joint position density implied by the multi-time epistemic state.

    Sum over spin pairs of weight(i1, i2) times the two displaced one-wing
    packet densities, evaluated at any proper-time pair.
    """
    if tau_r < 0.0 or tau_e < 0.0:
        raise ValueError("proper times cannot be negative")
    decomp = singlet_coefficients(cfg.r, cfg.e)
    rho_r = {
        i: density(evolve_packet(cfg.rocket.packet(), i, cfg.g, tau_r, cfg.wing_mode(ROCKET)), x_r)
        for i in (1, -1)
    }
    rho_e = {
        i: density(evolve_packet(cfg.earth.packet(), i, cfg.g, tau_e, cfg.wing_mode(EARTH)), x_e)
        for i in (1, -1)
    }
    total = sum(
        decomp.weight(i1, i2) * rho_r[i1] * rho_e[i2]
        for i1 in (1, -1)
        for i2 in (1, -1)
    )
    return total


def wing_marginal_mixture(
    cfg: ExperimentConfig, wing: str, tau: float
) -> list[tuple[float, GaussianPacket]]:
    """Bump weights and evolved packets of one wing's epistemic marginal."""
    decomp = singlet_coefficients(cfg.r, cfg.e)
    base = cfg.wing_params(wing).packet()
    mode = cfg.wing_mode(wing)
    out = []
    for i in (1, -1):
        if wing == ROCKET:
            w = decomp.weight(i, 1) + decomp.weight(i, -1)
        else:
            w = decomp.weight(1, i) + decomp.weight(-1, i)
        out.append((w, evolve_packet(base, i, cfg.g, tau, mode)))
    return out
