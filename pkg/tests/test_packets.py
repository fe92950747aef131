import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.integrate import quad

from retrobell.dynamics import GridState, grid_evolve
from retrobell.packets import (
    EvolutionMode,
    FULL_VON_NEUMANN,
    GaussianPacket,
    TRANSLATION_ONLY,
    density,
    evolve_packet,
    packet_overlap,
    phase_gradient,
)

KICK = EvolutionMode.impulsive_kick(1.5)
ALL_MODES = (TRANSLATION_ONLY, FULL_VON_NEUMANN, KICK)


def test_translation_displaces_center_by_spin_coupling_time():
    p = evolve_packet(GaussianPacket(), 1, 1.0, 2.0, TRANSLATION_ONLY)
    assert p.center == 2.0
    assert p.sigma == 1.0
    assert p.disp == 2.0


@pytest.mark.parametrize("mode", ALL_MODES)
def test_zero_time_evolution_is_identity(mode):
    p = GaussianPacket(center=0.3, sigma0=0.8, p0=0.2)
    assert evolve_packet(p, -1, 1.0, 0.0, mode) == p


def test_negative_time_rejected():
    with pytest.raises(ValueError):
        evolve_packet(GaussianPacket(), 1, 1.0, -0.5, TRANSLATION_ONLY)


def test_von_neumann_width_growth():
    p = evolve_packet(GaussianPacket(), 1, 1.0, 2.0, FULL_VON_NEUMANN)
    assert p.sigma == pytest.approx(math.sqrt(2.0), abs=1e-15)
    assert p.center == pytest.approx(2.0)


def test_von_neumann_density_matches_spectral_evolver_pointwise():
    p0 = GaussianPacket()
    grid = grid_evolve(GridState.from_packet(p0), 1, 1.0, 2.0, p0.mass)
    closed = density(evolve_packet(p0, 1, 1.0, 2.0, FULL_VON_NEUMANN), grid.x)
    assert float(np.max(np.abs(grid.density() - closed))) < 1e-8


def test_impulsive_kick_center_and_momentum():
    p = evolve_packet(GaussianPacket(p0=0.2), 1, 1.0, 2.0, KICK)
    assert p.center == pytest.approx((0.2 + 1.5) * 2.0)
    assert p.p0 == pytest.approx(1.7)
    # kick applies once: further evolution must not boost again
    q = evolve_packet(p, 1, 1.0, 1.0, KICK)
    assert q.p0 == pytest.approx(1.7)


def test_density_peak_value():
    p = GaussianPacket(center=0.4, sigma0=0.7)
    assert density(p, 0.4) == pytest.approx(1.0 / (0.7 * math.sqrt(2 * math.pi)))


def test_density_normalization_by_quadrature():
    p = evolve_packet(GaussianPacket(sigma0=1.3), -1, 0.8, 1.7, FULL_VON_NEUMANN)
    total, _ = quad(lambda x: density(p, x), p.center - 8 * p.sigma, p.center + 8 * p.sigma)
    assert total == pytest.approx(1.0, abs=1e-9)


def test_density_shape_ratio_one_sigma():
    p = GaussianPacket(sigma0=0.9)
    assert density(p, p.center + p.sigma) / density(p, p.center) == pytest.approx(
        math.exp(-0.5)
    )


def test_phase_gradient_translation_real_packet():
    p = evolve_packet(GaussianPacket(), 1, 1.0, 1.5, TRANSLATION_ONLY)
    assert phase_gradient(p, 1, 1.0, 0.7, TRANSLATION_ONLY) == 0.0


@pytest.mark.parametrize("mode", ALL_MODES)
def test_phase_gradient_initially_plane_wave(mode):
    p = GaussianPacket(p0=0.35)
    for x in (-1.0, 0.0, 2.5):
        assert phase_gradient(p, 1, 1.0, x, mode) == pytest.approx(0.35)


def _grid_phase_gradient(grid: GridState, x_at: float) -> tuple[float, float]:
    """Finite-difference oracle for dS/dx at the grid node nearest x_at."""
    phase = np.unwrap(np.angle(grid.psi))
    k = int(round((x_at - grid.x_min) / grid.dx))
    fd = float((phase[k + 1] - phase[k - 1]) / (2.0 * grid.dx))
    return float(grid.x[k]), fd


def test_phase_gradient_against_finite_difference_of_evolved_phase():
    p0 = GaussianPacket()
    tau = 1.0
    grid = grid_evolve(GridState.from_packet(p0), 1, 1.0, tau, p0.mass)
    evolved = evolve_packet(p0, 1, 1.0, tau, FULL_VON_NEUMANN)
    x_node, fd = _grid_phase_gradient(grid, evolved.center + 1.0)
    ours = phase_gradient(evolved, 1, 1.0, x_node, FULL_VON_NEUMANN)
    # the phase is quadratic in x, so the central difference is exact
    assert ours == pytest.approx(fd, abs=1e-6)


def test_overlap_identical_packets_is_one():
    p = GaussianPacket(sigma0=1.2)
    assert packet_overlap(p, p) == pytest.approx(1.0, abs=1e-15)


def test_overlap_two_sigma_apart():
    a = GaussianPacket(center=0.0)
    b = GaussianPacket(center=2.0)
    assert packet_overlap(a, b) == pytest.approx(0.6065306597126334, abs=1e-12)


def test_overlap_far_separated():
    a = GaussianPacket(center=0.0)
    b = GaussianPacket(center=20.0)
    assert packet_overlap(a, b) < 1e-10


def test_overlap_matches_quadrature_for_unequal_widths():
    a = replace(GaussianPacket(center=-0.3), sigma0=0.8)
    b = evolve_packet(GaussianPacket(center=0.9), 1, 0.5, 1.2, FULL_VON_NEUMANN)
    oracle, _ = quad(
        lambda x: math.sqrt(density(a, x) * density(b, x)), -15.0, 20.0
    )
    assert packet_overlap(a, b) == pytest.approx(oracle, abs=1e-9)


@pytest.mark.parametrize("mode", ALL_MODES)
def test_evolution_composes_exactly(mode):
    p0 = GaussianPacket(center=0.2, sigma0=1.1, p0=0.15, mass=1.3)
    for t1, t2 in [(0.7, 1.3), (0.0, 2.0), (2.5, 0.0), (0.41, 0.09)]:
        stepped = evolve_packet(evolve_packet(p0, -1, 0.9, t1, mode), -1, 0.9, t2, mode)
        direct = evolve_packet(p0, -1, 0.9, t1 + t2, mode)
        for field in ("center", "sigma0", "p0", "mass", "tau", "disp", "spread_tau"):
            assert getattr(stepped, field) == pytest.approx(
                getattr(direct, field), abs=1e-12
            )


@pytest.mark.parametrize("mode", [TRANSLATION_ONLY, KICK])
def test_spin_mirror_symmetry_of_densities(mode):
    p0 = GaussianPacket()  # symmetric about 0, p0 = 0
    up = evolve_packet(p0, 1, 1.0, 1.4, mode)
    down = evolve_packet(p0, -1, 1.0, 1.4, mode)
    xs = np.linspace(-6.0, 6.0, 301)
    np.testing.assert_allclose(density(up, xs), density(down, -xs), atol=1e-14)


def test_separation_law_exact():
    p0 = GaussianPacket(mass=1.7)
    for tau in (0.5, 2.0, 7.5):
        up = evolve_packet(p0, 1, 1.2, tau, TRANSLATION_ONLY)
        down = evolve_packet(p0, -1, 1.2, tau, TRANSLATION_ONLY)
        assert up.center - down.center == pytest.approx(2 * 1.2 * tau, abs=1e-12)
        up = evolve_packet(p0, 1, 0.0, tau, KICK)
        down = evolve_packet(p0, -1, 0.0, tau, KICK)
        assert up.center - down.center == pytest.approx(2 * 1.5 * tau / 1.7, abs=1e-12)


def test_packet_validation():
    with pytest.raises(ValueError):
        GaussianPacket(sigma0=0.0)
    with pytest.raises(ValueError):
        GaussianPacket(mass=-1.0)
    with pytest.raises(ValueError):
        EvolutionMode.impulsive_kick(0.0)
    with pytest.raises(ValueError):
        EvolutionMode("nonsense")
