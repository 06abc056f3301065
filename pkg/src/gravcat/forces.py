"""Newtonian forces between the cat-state sphere and the probe."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CONSTANTS

__all__ = [
    "point_force",
    "density_force",
    "MatterDensity1D",
    "net_force_on_probe",
    "self_energy",
]


def point_force(M: float, m: float, L: float, D: float, G: float = CONSTANTS.G) -> float:
    """Horizontal force magnitude f0 = G M m L / (2 D^3) on a probe at distance D."""
    if not D > 0:
        raise ValueError(f"probe distance D must be > 0 (got {D!r})")
    if L < 0:
        raise ValueError(f"cat separation L must be >= 0 (got {L!r})")
    return G * M * m * L / (2.0 * D ** 3)


def density_force(rho: float, m: float, L: float, a: float, R: float,
                  G: float = CONSTANTS.G) -> float:
    """f0 written through the sphere density: (2 pi / 3) G rho m L / (1 + a/R)^3."""
    if not R > 0:
        raise ValueError(f"sphere radius R must be > 0 (got {R!r})")
    if a < 0:
        raise ValueError(f"surface gap a must be >= 0 (got {a!r})")
    if math.isinf(a):
        return 0.0
    return 2.0 * math.pi / 3.0 * G * rho * m * L / (1.0 + a / R) ** 3


def self_energy(M: float, L: float, G: float = CONSTANTS.G) -> float:
    """Gravitational self-energy estimate -G M^2 / (4 L) of a cat of separation L."""
    if not L > 0:
        raise ValueError(f"cat separation L must be > 0 (got {L!r})")
    return -G * M * M / (4.0 * L)


@dataclass(frozen=True, eq=False)
class MatterDensity1D:
    """Linear mass density (kg/m) on a uniform grid, transverse directions integrated out."""

    grid_min: float
    dx: float
    values: np.ndarray

    def __post_init__(self):
        if not self.dx > 0:
            raise ValueError("dx must be > 0")
        if np.any(self.values < 0):
            raise ValueError("mass density must be non-negative")

    @property
    def x(self) -> np.ndarray:
        return self.grid_min + self.dx * np.arange(self.values.size)

    @property
    def grid_max(self) -> float:
        return self.grid_min + self.dx * (self.values.size - 1)

    def total_mass(self) -> float:
        return float(np.trapezoid(self.values, dx=self.dx))

    @classmethod
    def from_wavefunction(cls, x: np.ndarray, psi: np.ndarray, mass: float) -> "MatterDensity1D":
        """m |psi|^2 on the grid ``x``."""
        return cls(float(x[0]), float(x[1] - x[0]), mass * np.abs(psi) ** 2)

    @classmethod
    def gaussian_cat(cls, mass: float, sigma: float, L: float, grid_min: float, grid_max: float,
                     n: int, weights: tuple[float, float] = (0.5, 0.5)) -> "MatterDensity1D":
        """Incoherent mixture of two Gaussians of std ``sigma`` at +-L/2, scaled to ``mass``.

        ``weights`` are the masses at (+L/2, -L/2) as fractions of ``mass``.
        """
        x = np.linspace(grid_min, grid_max, n)
        g = lambda c: np.exp(-(x - c) ** 2 / (2 * sigma ** 2)) / math.sqrt(2 * math.pi * sigma ** 2)
        values = mass * (weights[0] * g(0.5 * L) + weights[1] * g(-0.5 * L))
        return cls(grid_min, float(x[1] - x[0]), values)


def net_force_on_probe(density: MatterDensity1D, probe_x: float, probe_y: float, probe_mass: float,
                       G: float = CONSTANTS.G) -> float:
    """Horizontal force on a probe at (probe_x, probe_y) from a 1-D mass distribution.

    Positive means the probe is pulled towards +x.  The probe must lie at
    least one grid cell away from the support of the density.
    """
    x = density.x
    support = density.values > 0
    if support.any():
        lo, hi = x[support][0], x[support][-1]
        dist = math.hypot(max(lo - probe_x, probe_x - hi, 0.0), probe_y)
        if dist < density.dx:
            raise ValueError("probe lies inside the support of the mass density")
    dxp = probe_x - x
    kernel = dxp / (dxp * dxp + probe_y * probe_y) ** 1.5
    return -G * probe_mass * float(np.trapezoid(density.values * kernel, dx=density.dx))
