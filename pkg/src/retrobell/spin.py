"""Spin-1/2 eigenbasis algebra and the singlet decomposition.

Measurement axes are unit vectors given by polar angles. Eigenspinors follow
the Bloch-sphere convention

    |+>_n = (cos(t/2), e^{i f} sin(t/2))
    |->_n = (-e^{-i f} sin(t/2), cos(t/2))

for an axis with polar angle t and azimuth f. All derived weights are
invariant under the (arbitrary) eigenspinor phases.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SpinLabel = int  # +1 or -1

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

# Singlet state in the joint z-basis (|++>, |+->, |-+>, |-->).
SINGLET = np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / math.sqrt(2.0)


def check_spin(i: SpinLabel) -> SpinLabel:
    """Validate a spin label; exactly +1 and -1 are admitted."""
    if i not in (1, -1):
        raise ValueError(f"spin label must be +1 or -1, got {i!r}")
    return i


@dataclass(frozen=True)
class Direction:
    """Measurement axis as polar angle theta in [0, pi], azimuth phi.

    The azimuth is reduced modulo 2*pi; the corresponding Cartesian vector is
    unit-norm by construction.
    """

    theta: float
    phi: float = 0.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.theta) or not math.isfinite(self.phi):
            raise ValueError("direction angles must be finite")
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"polar angle must lie in [0, pi], got {self.theta}")
        object.__setattr__(self, "phi", self.phi % (2.0 * math.pi))

    @property
    def unit_vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array(
            [st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)]
        )

    def pauli_projection(self) -> np.ndarray:
        """The 2x2 matrix sigma . n for this axis."""
        nx, ny, nz = self.unit_vector
        return nx * SIGMA_X + ny * SIGMA_Y + nz * SIGMA_Z


Z_AXIS = Direction(0.0, 0.0)
X_AXIS = Direction(math.pi / 2.0, 0.0)


def angle_between(a: Direction, b: Direction) -> float:
    """Angle in [0, pi] between two measurement axes."""
    c = float(np.dot(a.unit_vector, b.unit_vector))
    return math.acos(min(1.0, max(-1.0, c)))


def eigenspinor(n: Direction, i: SpinLabel) -> np.ndarray:
    """Normalized eigenvector of sigma . n with eigenvalue i."""
    check_spin(i)
    half = 0.5 * n.theta
    if i == 1:
        return np.array([math.cos(half), math.sin(half) * np.exp(1j * n.phi)])
    return np.array([-math.sin(half) * np.exp(-1j * n.phi), math.cos(half)])


@dataclass(frozen=True, eq=False)
class SingletDecomposition:
    """Coefficients of the singlet state in a joint product eigenbasis.

    ``coefficients[a, b]`` is the amplitude on |i1>_r |i2>_e with the index
    map +1 -> 0, -1 -> 1. Squared magnitudes are the spin-pair ensemble
    weights; they sum to one and obey w(+,+) = w(-,-), w(+,-) = w(-,+).
    """

    coefficients: np.ndarray

    def coefficient(self, i1: SpinLabel, i2: SpinLabel) -> complex:
        return complex(self.coefficients[_idx(i1), _idx(i2)])

    def weight(self, i1: SpinLabel, i2: SpinLabel) -> float:
        return float(abs(self.coefficient(i1, i2)) ** 2)

    def weights(self) -> dict[tuple[SpinLabel, SpinLabel], float]:
        return {
            (i1, i2): self.weight(i1, i2) for i1 in (1, -1) for i2 in (1, -1)
        }


def _idx(i: SpinLabel) -> int:
    check_spin(i)
    return 0 if i == 1 else 1


def singlet_coefficients(r: Direction, e: Direction) -> SingletDecomposition:
    """Expand the singlet over the joint (r-axis, e-axis) eigenbasis."""
    c = np.empty((2, 2), dtype=complex)
    for i1 in (1, -1):
        s1 = eigenspinor(r, i1)
        for i2 in (1, -1):
            s2 = eigenspinor(e, i2)
            c[_idx(i1), _idx(i2)] = np.vdot(np.kron(s1, s2), SINGLET)
    return SingletDecomposition(c)


def correlation_exact(r: Direction, e: Direction) -> float:
    """Exact joint-outcome correlation sum_{i1,i2} i1 i2 w(i1,i2) = -cos(angle)."""
    d = singlet_coefficients(r, e)
    return float(sum(i1 * i2 * d.weight(i1, i2) for i1 in (1, -1) for i2 in (1, -1)))
