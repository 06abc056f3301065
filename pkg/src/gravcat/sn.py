"""Spherically symmetric Schrödinger-Newton evolution.

The radial function ``u(r) = r psi(r)`` lives on ``r_j = j dr`` (j = 1..n) with
``u = 0`` at the origin and at the outer wall ``(n + 1) dr``.  The kinetic
step is exact in the type-I sine basis; the self-potential is recomputed from
the density at every step (Strang splitting, kinetic / potential / kinetic).

Internally everything runs in units of length ``ell`` (the per-axis width of
the initial packet) and time ``m ell^2 / hbar``.  In those units the only
parameter left is the coupling ``K = G m^3 ell / hbar^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.fft as sfft

from .core import CONSTANTS, NumericalInstabilityError, PhysicalConstants

__all__ = [
    "RadialState",
    "WidthSeries",
    "SNBudget",
    "MassBracket",
    "make_radial_gaussian",
    "shell_potential",
    "kernel_potential",
    "sphere_pair_potential",
    "sn_energy",
    "sn_evolve_radial",
    "sn_stable_dt",
    "collapse_indicator",
    "detect_critical_mass",
    "free_width",
]

NORM_TOL = 1e-6
EDGE_TOL = 1e-4
MAX_PHASE = 0.1


@dataclass(frozen=True, eq=False)
class RadialState:
    """Radial wavefunction ``u = r psi`` on ``r = dr, 2dr, ..., n dr`` (SI)."""

    dr: float
    u: np.ndarray
    mass: float

    @property
    def n(self) -> int:
        return self.u.size

    @property
    def r(self) -> np.ndarray:
        return self.dr * np.arange(1, self.n + 1)

    @property
    def r_max(self) -> float:
        return self.dr * (self.n + 1)

    def norm(self) -> float:
        return 4.0 * math.pi * float(np.sum(np.abs(self.u) ** 2)) * self.dr

    def width(self) -> float:
        """RMS radius <r^2>^(1/2)."""
        return math.sqrt(4.0 * math.pi * float(np.sum(self.r ** 2 * np.abs(self.u) ** 2)) * self.dr)

    def psi(self) -> np.ndarray:
        return self.u / self.r


@dataclass(frozen=True, eq=False)
class WidthSeries:
    times: np.ndarray
    widths: np.ndarray
    energies: np.ndarray


def make_radial_gaussian(sigma: float, mass: float, r_max: float, n: int = 1024) -> RadialState:
    """Gaussian ``psi ~ exp(-r^2 / 4 sigma^2)``: per-axis position std ``sigma``."""
    if sigma <= 0 or r_max <= 0 or mass <= 0:
        raise ValueError("sigma, r_max and mass must be positive")
    if r_max < 10 * sigma:
        raise ValueError(f"r_max={r_max!r} must be at least 10x the packet width {sigma!r}")
    dr = r_max / (n + 1)
    r = dr * np.arange(1, n + 1)
    u = (r * np.exp(-r ** 2 / (4 * sigma ** 2))).astype(complex)
    u /= math.sqrt(4 * math.pi * np.sum(np.abs(u) ** 2) * dr)
    return RadialState(dr, u, mass)


def free_width(sigma0: float, mass: float, t, hbar: float = CONSTANTS.hbar):
    """Per-axis std of a freely spreading Gaussian: sigma0 sqrt(1 + (hbar t / 2 m sigma0^2)^2)."""
    t = np.asarray(t, dtype=float)
    return sigma0 * np.sqrt(1.0 + (hbar * t / (2 * mass * sigma0 ** 2)) ** 2)


# ------------------------------------------------------------ potentials

def shell_potential(r: np.ndarray, u: np.ndarray, dr: float) -> np.ndarray:
    """Potential per unit (G m^2) of a normalised density, by shell integrals.

    Returns ``-[(1/r) int_0^r |psi|^2 4 pi r'^2 dr' + int_r^rmax |psi|^2 4 pi r' dr']``.
    """
    w = 4.0 * math.pi * np.abs(u) ** 2 * dr
    inner = np.cumsum(w)
    outer = np.cumsum((w / r)[::-1])[::-1]
    outer = np.append(outer[1:], 0.0)
    return -(inner / r + outer)


def _sphere_Q(s: np.ndarray, b: float) -> np.ndarray:
    # antiderivative of s * k(s) for the mutual potential k of two uniform spheres of radius b
    s = np.asarray(s, dtype=float)
    x = np.minimum(s, 2 * b)
    q = (0.6 * x ** 2 - x ** 4 / (8 * b ** 2) + 3 * x ** 5 / (80 * b ** 3)
         - x ** 7 / (1120 * b ** 5)) / b
    return q + np.maximum(s - 2 * b, 0.0)


def sphere_pair_potential(d, radius: float) -> np.ndarray:
    """Mutual potential of two uniform spheres at separation ``d``, per unit G m^2."""
    d = np.asarray(d, dtype=float)
    x = d / radius
    inside = -(6 / 5 - 0.5 * x ** 2 + 3 / 16 * x ** 3 - x ** 5 / 160) / radius
    with np.errstate(divide="ignore"):
        outside = -1.0 / d
    return np.where(d < 2 * radius, inside, outside)


def kernel_matrix(r: np.ndarray, dr: float, sphere_radius: Optional[float] = None) -> np.ndarray:
    """Dense operator mapping ``|u|^2`` to the potential per unit G m^2.

    Uses ``Phi(r) = -(2 pi / r) int |u'|^2 / r' [Q(r + r') - Q(|r - r'|)] dr'``
    where ``Q`` integrates ``s k(s)``; ``k = 1/s`` for point masses.
    """
    ri, rj = r[:, None], r[None, :]
    if sphere_radius is None:
        dq = (ri + rj) - np.abs(ri - rj)
    else:
        dq = _sphere_Q(ri + rj, sphere_radius) - _sphere_Q(np.abs(ri - rj), sphere_radius)
    return -(2 * math.pi / ri) * dq / rj * dr


def kernel_potential(r, u, dr, sphere_radius=None) -> np.ndarray:
    return kernel_matrix(r, dr, sphere_radius) @ (np.abs(u) ** 2)


# ------------------------------------------------------------ stepping

class _Stepper:
    """Strang stepper in scaled units (length ell, time m ell^2 / hbar)."""

    def __init__(self, n: int, dr: float, coupling: float, sphere_radius: Optional[float]):
        self.n, self.dr, self.coupling = n, dr, coupling
        self.r = dr * np.arange(1, n + 1)
        self.k2 = (math.pi * np.arange(1, n + 1) / ((n + 1) * dr)) ** 2
        self.matrix = None
        if sphere_radius is not None and coupling != 0.0:
            self.matrix = kernel_matrix(self.r, dr, sphere_radius)
        self._dt = None

    def potential(self, u: np.ndarray) -> np.ndarray:
        if self.coupling == 0.0:
            return np.zeros(self.n)
        if self.matrix is None:
            return self.coupling * shell_potential(self.r, u, self.dr)
        return self.coupling * (self.matrix @ (np.abs(u) ** 2))

    def _kick(self, dt):
        if dt != self._dt:
            self._half = np.exp(-0.25j * self.k2 * dt)
            self._dt = dt
        return self._half

    def step(self, u: np.ndarray, dt: float) -> tuple[np.ndarray, float]:
        half = self._kick(dt)
        u = sfft.idst(half * sfft.dst(u, type=1, norm="ortho"), type=1, norm="ortho")
        v = self.potential(u)
        phase = float(np.max(np.abs(v))) * dt
        u = u * np.exp(-1j * v * dt)
        u = sfft.idst(half * sfft.dst(u, type=1, norm="ortho"), type=1, norm="ortho")
        return u, phase

    def norm(self, u):
        return 4 * math.pi * float(np.sum(np.abs(u) ** 2)) * self.dr

    def width(self, u):
        return math.sqrt(4 * math.pi * float(np.sum(self.r ** 2 * np.abs(u) ** 2)) * self.dr)

    def edge_probability(self, u):
        tail = self.r > 0.9 * (self.n + 1) * self.dr
        return 4 * math.pi * float(np.sum(np.abs(u[tail]) ** 2)) * self.dr

    def energy(self, u):
        uh = sfft.dst(u, type=1, norm="ortho")
        kinetic = 4 * math.pi * 0.5 * float(np.sum(self.k2 * np.abs(uh) ** 2)) * self.dr
        w = 4 * math.pi * np.abs(u) ** 2 * self.dr
        return kinetic + 0.5 * float(np.sum(w * self.potential(u)))


def sn_energy(state: RadialState, G_eff: Optional[float] = None,
              sphere_radius: Optional[float] = None,
              constants: PhysicalConstants = CONSTANTS) -> float:
    """Semiclassical energy functional (kinetic + half the self-energy), in joules."""
    G = constants.G if G_eff is None else G_eff
    ell, T, K = _scales(state, G, constants)
    st = _Stepper(state.n, state.dr / ell, K, None if sphere_radius is None else sphere_radius / ell)
    u = state.u * math.sqrt(ell)
    return st.energy(u) * constants.hbar / T


def _scales(state: RadialState, G: float, constants: PhysicalConstants):
    ell = state.width() / math.sqrt(3.0)
    T = state.mass * ell ** 2 / constants.hbar
    K = G * state.mass ** 3 * ell / constants.hbar ** 2
    return ell, T, K


def sn_stable_dt(state: RadialState, G_eff: Optional[float] = None,
                 sphere_radius: Optional[float] = None,
                 constants: PhysicalConstants = CONSTANTS) -> float:
    """Largest dt (s) keeping the potential phase per step below 0.1 rad, capped at 0.01 m ell^2/hbar."""
    G = constants.G if G_eff is None else G_eff
    ell, T, K = _scales(state, G, constants)
    st = _Stepper(state.n, state.dr / ell, K, None if sphere_radius is None else sphere_radius / ell)
    vmax = float(np.max(np.abs(st.potential(state.u * math.sqrt(ell)))))
    dt = 0.01 if vmax == 0 else min(0.01, 0.5 * MAX_PHASE / vmax)
    return dt * T


def sn_evolve_radial(state: RadialState, G_eff: Optional[float], dt: float, n_steps: int,
                     sphere_radius: Optional[float] = None, record_every: int = 1,
                     constants: PhysicalConstants = CONSTANTS):
    """Evolve under the Schrödinger-Newton equation.

    ``G_eff=None`` uses Newton's constant; ``G_eff=0`` is free evolution.
    ``sphere_radius`` switches the point-mass self-potential for the mutual
    potential of a homogeneous sphere (centre-of-mass equation).

    Returns the final state and a :class:`WidthSeries` of RMS radius and
    energy.  Raises :class:`NumericalInstabilityError` when the norm drifts by
    more than 1e-6, when more than 1e-4 of the probability reaches the outer
    tenth of the box, or when a step exceeds 0.1 rad of potential phase.
    """
    G = constants.G if G_eff is None else G_eff
    ell, T, K = _scales(state, G, constants)
    b = None if sphere_radius is None else sphere_radius / ell
    st = _Stepper(state.n, state.dr / ell, K, b)
    u = state.u * math.sqrt(ell)
    h = dt / T
    n0 = st.norm(u)
    times, widths, energies = [0.0], [st.width(u) * ell], [st.energy(u)]
    for i in range(1, n_steps + 1):
        u, phase = st.step(u, h)
        if phase > MAX_PHASE:
            raise NumericalInstabilityError(
                f"potential phase {phase:.3g} rad per step exceeds {MAX_PHASE}; reduce dt")
        if i % record_every == 0 or i == n_steps:
            if abs(st.norm(u) - n0) > NORM_TOL:
                raise NumericalInstabilityError(f"norm drift {abs(st.norm(u) - n0):.3g} at step {i}")
            if st.edge_probability(u) > EDGE_TOL:
                raise NumericalInstabilityError(
                    "probability reached the outer wall; enlarge r_max")
            times.append(i * dt)
            widths.append(st.width(u) * ell)
            energies.append(st.energy(u))
    energies = np.asarray(energies) * constants.hbar / T
    out = RadialState(state.dr, u / math.sqrt(ell), state.mass)
    return out, WidthSeries(np.asarray(times), np.asarray(widths), energies)


# ------------------------------------------------------------ critical mass

@dataclass(frozen=True)
class SNBudget:
    """Resolution and horizon of one collapse test, in scaled units."""

    n: int = 1024
    r_max: float = 32.0
    horizon: float = 1.0
    dt: float = 0.01


@dataclass(frozen=True)
class MassBracket:
    lo: float
    hi: float
    evaluations: int

    @property
    def midpoint(self) -> float:
        return math.sqrt(self.lo * self.hi)


def collapse_indicator(coupling: float, budget: SNBudget = SNBudget(),
                       sphere_radius: Optional[float] = None) -> float:
    """Mean d(width)/dt over the final quarter of a run, scaled units.

    ``coupling`` is ``K = G m^3 ell / hbar^2``; ``sphere_radius`` is in units of
    the packet width.  Negative means the packet is contracting.

    For strong coupling the run is shortened to ``2 / sqrt(K)`` so that the
    test sees the first infall rather than the breathing that follows it.
    """
    n = budget.n
    dr = budget.r_max / (n + 1)
    r = dr * np.arange(1, n + 1)
    u = (r * np.exp(-r ** 2 / 4)).astype(complex)
    u /= math.sqrt(4 * math.pi * np.sum(np.abs(u) ** 2) * dr)
    st = _Stepper(n, dr, coupling, sphere_radius)
    horizon = budget.horizon if coupling <= 0 else min(budget.horizon, 2 / math.sqrt(coupling))
    t, times, widths = 0.0, [0.0], [st.width(u)]
    while t < horizon - 1e-12:
        vmax = float(np.max(np.abs(st.potential(u))))
        h = min(budget.dt, 0.5 * MAX_PHASE / vmax if vmax else budget.dt, horizon - t)
        u, _ = st.step(u, h)
        t += h
        times.append(t)
        widths.append(st.width(u))
    times, widths = np.asarray(times), np.asarray(widths)
    q = times >= 0.75 * horizon
    slope = np.gradient(widths, times)
    return float(np.trapezoid(slope[q], times[q]) / (times[q][-1] - times[q][0]))


def detect_critical_mass(sigma0: float, mass_lo: float, mass_hi: float,
                         budget: SNBudget = SNBudget(), sphere_radius: Optional[float] = None,
                         G_eff: Optional[float] = None, max_ratio: float = 1.25,
                         constants: PhysicalConstants = CONSTANTS) -> Optional[MassBracket]:
    """Bracket the mass at which an initially Gaussian packet starts to contract.

    Bisection (geometric) on the sign of :func:`collapse_indicator`.  Returns
    ``None`` when even ``mass_hi`` does not collapse (e.g. ``G_eff = 0``).
    """
    if not 0 < mass_lo < mass_hi:
        raise ValueError("need 0 < mass_lo < mass_hi")
    if max_ratio > 2:
        raise ValueError("max_ratio must be <= 2")
    G = constants.G if G_eff is None else G_eff
    b = None if sphere_radius is None else sphere_radius / sigma0
    evaluations = 0

    def collapses(m):
        nonlocal evaluations
        evaluations += 1
        K = G * m ** 3 * sigma0 / constants.hbar ** 2
        return collapse_indicator(K, budget, b) < 0

    if not collapses(mass_hi):
        return None
    lo, hi = mass_lo, mass_hi
    if collapses(lo):
        raise ValueError(f"mass_lo={mass_lo!r} already collapses; lower it")
    while hi / lo > max_ratio:
        mid = math.sqrt(lo * hi)
        if collapses(mid):
            hi = mid
        else:
            lo = mid
    return MassBracket(lo, hi, evaluations)
