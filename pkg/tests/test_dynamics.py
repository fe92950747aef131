import math

import numpy as np
import pytest
from scipy.special import ndtr, ndtri

from retrobell.dynamics import (
    GridState,
    grid_evolve,
    guidance_velocity,
    integrate_trajectory,
    transport_positions,
)
from retrobell.packets import (
    EvolutionMode,
    FULL_VON_NEUMANN,
    GaussianPacket,
    OnticState,
    ROCKET,
    TRANSLATION_ONLY,
    density,
    evolve_packet,
)
from retrobell.spin import Z_AXIS
from retrobell.stats import ks_statistic

KICK = EvolutionMode.impulsive_kick(1.5)
ALL_MODES = (TRANSLATION_ONLY, FULL_VON_NEUMANN, KICK)


def state(packet=None, spin=1):
    return OnticState(packet or GaussianPacket(), spin, Z_AXIS, ROCKET)


def test_guidance_translation_constant_velocity():
    for x in (-3.0, 0.0, 4.2):
        assert guidance_velocity(state(spin=1), x, 1.0, TRANSLATION_ONLY) == 1.0
        assert guidance_velocity(state(spin=-1), x, 1.0, TRANSLATION_ONLY) == -1.0


def _contour_velocity(tau: float, x_probe: float, g: float) -> tuple[float, float]:
    """Oracle: displacement rate of the probability contour through x_probe.

    Tracks the quantile of the spectrally evolved density passing through
    the nearest grid node at time tau and differences its position at
    tau +/- delta.
    """
    p0 = GaussianPacket()
    base = GridState.from_packet(p0)
    delta = 0.05

    def quantile_position(at_tau: float, q: float) -> float:
        evolved = grid_evolve(base, 1, g, at_tau, p0.mass)
        cdf = np.cumsum(evolved.density()) * evolved.dx
        return float(np.interp(q, cdf, evolved.x))

    mid = grid_evolve(base, 1, g, tau, p0.mass)
    cdf_mid = np.cumsum(mid.density()) * mid.dx
    q = float(np.interp(x_probe, mid.x, cdf_mid))
    x_node = quantile_position(tau, q)
    v = (quantile_position(tau + delta, q) - quantile_position(tau - delta, q)) / (
        2.0 * delta
    )
    return x_node, v


def test_guidance_von_neumann_matches_contour_velocity_oracle():
    tau, g = 1.0, 1.0
    packet = evolve_packet(GaussianPacket(), 1, g, tau, FULL_VON_NEUMANN)
    for offset in (-1.2, 0.6, 1.5):
        x_node, v_oracle = _contour_velocity(tau, packet.center + offset, g)
        v = guidance_velocity(
            OnticState(packet, 1, Z_AXIS, ROCKET), x_node, g, FULL_VON_NEUMANN
        )
        assert v == pytest.approx(v_oracle, abs=5e-3)


def test_trajectory_translation_mode_is_exact():
    tr = integrate_trajectory(state(), 0.0, 1.0, 2.0, 1e-3, TRANSLATION_ONLY)
    assert tr.final == pytest.approx(2.0, abs=1e-12)
    assert tr.taus[-1] == 2.0


def test_trajectory_zero_span():
    tr = integrate_trajectory(state(), 0.4, 1.0, 0.0, 1e-3, FULL_VON_NEUMANN)
    assert tr.taus.tolist() == [0.0]
    assert tr.positions.tolist() == [0.4]


def test_trajectory_rejects_oversized_step():
    with pytest.raises(ValueError):
        integrate_trajectory(state(), 0.0, 1.0, 0.5, 0.6, TRANSLATION_ONLY)


def _closed_form_final(p: GaussianPacket, spin, x0, g, tau, mode) -> float:
    """Exact guided trajectory endpoint (drift plus width scaling)."""
    evolved = evolve_packet(p, spin, g, tau, mode)
    return evolved.center + (x0 - p.center) * evolved.sigma / p.sigma


def test_trajectory_against_fine_reference_integration():
    x0 = 1.0  # one initial width off-center
    coarse = integrate_trajectory(state(), x0, 1.0, 2.0, 1e-2, FULL_VON_NEUMANN)
    fine = integrate_trajectory(state(), x0, 1.0, 2.0, 1e-4, FULL_VON_NEUMANN)
    assert coarse.final == pytest.approx(fine.final, abs=1e-9)


def test_trajectory_step_halving_convergence_order():
    x0, tau = 1.3, 2.0
    exact = _closed_form_final(GaussianPacket(), 1, x0, 1.0, tau, FULL_VON_NEUMANN)
    errors = []
    for dt in (0.2, 0.1, 0.05):
        got = integrate_trajectory(state(), x0, 1.0, tau, dt, FULL_VON_NEUMANN).final
        errors.append(abs(got - exact))
    orders = [math.log2(errors[k] / errors[k + 1]) for k in range(2)]
    assert min(orders) >= 3.7


@pytest.mark.parametrize("mode", ALL_MODES)
def test_transport_matches_per_sample_integration(mode):
    rng = np.random.default_rng(5)
    packet = GaussianPacket(center=0.1, sigma0=0.9, mass=1.2)
    x0 = packet.center + packet.sigma0 * rng.standard_normal(40)
    spins = rng.choice([1, -1], 40)
    batched = transport_positions(packet, spins, x0, 0.8, 1.7, 1e-3, mode)
    direct = np.array(
        [
            integrate_trajectory(
                OnticState(packet, int(s), Z_AXIS, ROCKET), x, 0.8, 1.7, 1e-3, mode
            ).final
            for s, x in zip(spins, x0)
        ]
    )
    np.testing.assert_allclose(batched, direct, atol=1e-10)


@pytest.mark.parametrize("mode", ALL_MODES)
def test_equivariance_of_guided_transport(mode):
    # sampled initial positions, transported, must match the evolved density
    n, tau = 20_000, 2.0
    packet = GaussianPacket()
    u = np.random.Generator(np.random.PCG64(2024)).random(n)
    x0 = packet.sigma0 * ndtri(u)
    finals = transport_positions(packet, np.ones(n, dtype=int), x0, 1.0, tau, 1e-3, mode)
    target = evolve_packet(packet, 1, 1.0, tau, mode)
    stat = ks_statistic(finals, lambda x: ndtr((x - target.center) / target.sigma))
    assert stat < 1.63 / math.sqrt(n)


def test_grid_zero_time_is_identity():
    base = GridState.from_packet(GaussianPacket())
    assert grid_evolve(base, 1, 1.0, 0.0, 1.0) is base


def test_grid_free_gaussian_matches_closed_form_spreading():
    p0 = GaussianPacket()
    evolved = grid_evolve(GridState.from_packet(p0), 1, 0.0, 2.0, 1.0)
    closed = density(evolve_packet(p0, 1, 0.0, 2.0, FULL_VON_NEUMANN), evolved.x)
    assert float(np.max(np.abs(evolved.density() - closed))) < 1e-8


def test_grid_spin_mirror_symmetry():
    base = GridState.from_packet(GaussianPacket())
    up = grid_evolve(base, 1, 1.0, 1.5, 1.0)
    down = grid_evolve(base, -1, 1.0, 1.5, 1.0)
    # density of the spin-down state is the parity mirror of spin-up
    flipped = np.concatenate(([down.density()[0]], down.density()[:0:-1]))
    np.testing.assert_allclose(up.density(), flipped, atol=1e-12)


def test_grid_norm_conserved_per_step():
    current = GridState.from_packet(GaussianPacket())
    for _ in range(5):
        current = grid_evolve(current, 1, 1.0, 1.0, 1.0)
        assert abs(current.norm - 1.0) < 1e-12


def test_grid_oracle_equivalence_over_tau_grid():
    p0 = GaussianPacket()
    base = GridState.from_packet(p0)
    worst = 0.0
    for tau in np.linspace(0.0, 5.0, 11):
        evolved = grid_evolve(base, 1, 1.0, float(tau), p0.mass)
        closed = density(evolve_packet(p0, 1, 1.0, float(tau), FULL_VON_NEUMANN), evolved.x)
        worst = max(worst, float(np.max(np.abs(evolved.density() - closed))))
    assert worst < 1e-8


def test_grid_aliasing_guard():
    base = GridState.from_packet(GaussianPacket())
    with pytest.raises(ValueError, match="drift"):
        grid_evolve(base, 1, 1.0, 25.0, 1.0)


def test_grid_validation():
    with pytest.raises(ValueError, match="power of two"):
        GridState.from_packet(GaussianPacket(), n=1000)
    with pytest.raises(ValueError, match="norm"):
        GridState(-40.0, 40.0, np.full(4096, 1e-3, dtype=complex))
    good = GridState.from_packet(GaussianPacket())
    leaky = good.psi.copy()
    leaky[0] = 1e-6  # negligible norm defect, visible edge amplitude
    with pytest.raises(ValueError, match="edge"):
        GridState(good.x_min, good.x_max, leaky)
    with pytest.raises(ValueError, match="norm"):
        GridState.from_packet(GaussianPacket(center=-39.0))
