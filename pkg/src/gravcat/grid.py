"""One-dimensional grid wavefunctions: cat states, GRW hits and Poisson timing.

The grid trajectory keeps the full wavefunction of the sphere's centre of
mass along the axis joining the two minima, evolves it in a double well by
split-step Fourier, applies spontaneous localisations at Poisson times and
reads the probe force off the instantaneous mass density ``M |psi|^2``.

Binary state layout (little-endian): ``int64 n, float64 dx, float64 x0,
float64 mass`` followed by ``n`` pairs ``float64 re, float64 im``.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.signal import fftconvolve

from .core import CONSTANTS, CollapseParams, ExperimentProtocol, PhysicalConstants, TheoryId
from .forces import MatterDensity1D, net_force_on_probe
from .rates import rate_report
from .two_site import SEMICLASSICAL, ForceRecord, trajectory_rng

__all__ = [
    "WaveState1D",
    "CollapseEvent",
    "make_cat_state",
    "grw_hit",
    "collapse_center_density",
    "sample_collapse_center",
    "poisson_next_event",
    "double_well",
    "grid_trajectory",
    "write_state",
    "read_state",
]

_HEADER = struct.Struct("<qddd")


@dataclass(frozen=True, eq=False)
class WaveState1D:
    x0: float
    dx: float
    psi: np.ndarray
    mass: float

    @property
    def n(self) -> int:
        return self.psi.size

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n)

    @property
    def x_max(self) -> float:
        return self.x0 + self.dx * (self.n - 1)

    def probability(self) -> np.ndarray:
        return np.abs(self.psi) ** 2

    def norm(self) -> float:
        return float(np.sum(self.probability()) * self.dx)

    def mean(self) -> float:
        return float(np.sum(self.x * self.probability()) * self.dx / self.norm())

    def width(self) -> float:
        """Position standard deviation."""
        P = self.probability()
        mu = self.mean()
        return math.sqrt(float(np.sum((self.x - mu) ** 2 * P) * self.dx / self.norm()))

    def density(self) -> MatterDensity1D:
        return MatterDensity1D(self.x0, self.dx, self.mass * self.probability() / self.norm())

    def with_psi(self, psi: np.ndarray) -> "WaveState1D":
        return WaveState1D(self.x0, self.dx, psi, self.mass)


@dataclass(frozen=True)
class CollapseEvent:
    time: float
    center: float
    pre_width: float
    post_width: float


def _check_power_of_two(n: int):
    if n < 2 or n & (n - 1):
        raise ValueError(f"grid size n={n} must be a power of two")


def make_cat_state(sigma: float, L: float, x0: float, dx: float, n: int, mass: float = 1.0,
                   weights: tuple[float, float] = (1.0, 1.0)) -> WaveState1D:
    """Normalised superposition of Gaussians (std ``sigma`` of |psi|^2) at +-L/2.

    ``weights`` are the amplitude weights of the (+L/2, -L/2) components;
    ``L = 0`` gives a single Gaussian.  Overlap is kept in the normalisation.
    """
    _check_power_of_two(n)
    if not sigma > 0 or L < 0:
        raise ValueError("need sigma > 0 and L >= 0")
    span = dx * (n - 1)
    if span < L + 10 * sigma:
        raise ValueError(f"grid span {span!r} m must be at least L + 10 sigma = {L + 10 * sigma!r} m")
    x = x0 + dx * np.arange(n)
    g = lambda c: np.exp(-(x - c) ** 2 / (4 * sigma ** 2))
    psi = (weights[0] * g(0.5 * L) + weights[1] * g(-0.5 * L)).astype(complex)
    psi /= math.sqrt(np.sum(np.abs(psi) ** 2) * dx)
    return WaveState1D(x0, dx, psi, mass)


def centered_grid(L: float, sigma: float, n: int, margin: float = 24.0) -> tuple[float, float]:
    """(x0, dx) of a grid symmetric about 0 spanning L + margin * sigma."""
    span = L + margin * sigma
    dx = span / (n - 1)
    return -0.5 * span, dx


# ------------------------------------------------------------ hits

def grw_hit(state: WaveState1D, X: float, sigma_grw: float) -> WaveState1D:
    """Multiply by the square root of a normalised Gaussian centred at X and renormalise."""
    if not state.x0 - 10 * sigma_grw <= X <= state.x_max + 10 * sigma_grw:
        raise ValueError(f"hit centre {X!r} lies outside the grid")
    logw = -((state.x - X) ** 2) / (4 * sigma_grw ** 2)
    P = state.probability()
    live = P > 0
    if not live.any():
        raise ValueError("state has zero norm")
    logw -= logw[live].max()
    psi = state.psi * np.exp(logw)
    norm = math.sqrt(np.sum(np.abs(psi) ** 2) * state.dx)
    if norm == 0:
        raise ValueError("hit annihilates the state numerically")
    return state.with_psi(psi / norm)


def collapse_center_density(state: WaveState1D, sigma_grw: float) -> tuple[np.ndarray, np.ndarray]:
    """Centre density rho(X) = int g(x - X) |psi(x)|^2 dx, tabulated.

    The table covers the state's grid extended by 8 sigma on each side.  Its
    spacing is sigma/20, or the state's own dx when that is finer (then the
    convolution is done by FFT).
    """
    P = state.probability() / state.norm()
    x, dx = state.x, state.dx
    coef = 1.0 / math.sqrt(2 * math.pi * sigma_grw ** 2)
    h = sigma_grw / 20.0
    if h <= dx:
        pad = int(math.ceil(8 * sigma_grw / dx))
        off = dx * np.arange(-pad, pad + 1)
        kernel = coef * np.exp(-off * off / (2 * sigma_grw ** 2))
        rho = np.maximum(fftconvolve(P, kernel) * dx, 0.0)
        X = state.x0 - pad * dx + dx * np.arange(rho.size)
        return X, rho
    lo, hi = x[0] - 8 * sigma_grw, x[-1] + 8 * sigma_grw
    m = int(math.ceil((hi - lo) / h)) + 1
    X = lo + h * np.arange(m)
    rho = np.empty(m)
    block = max(1, 4_000_000 // x.size)
    for i in range(0, m, block):
        d = X[i:i + block, None] - x[None, :]
        rho[i:i + block] = coef * np.exp(-d * d / (2 * sigma_grw ** 2)) @ P * dx
    return X, rho


def sample_collapse_center(state: WaveState1D, sigma_grw: float, rng: np.random.Generator,
                           size: Optional[int] = None):
    """Draw hit centres from rho(X) by inverting the tabulated CDF."""
    X, rho = collapse_center_density(state, sigma_grw)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (rho[1:] + rho[:-1]) * np.diff(X))])
    total = cdf[-1]
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"collapse-centre density integrates to {total!r}, not 1")
    cdf /= total
    u = rng.random(size)
    # cdf may be flat in empty regions; pick the first X where it reaches u
    return np.interp(u, cdf, X) if size is not None else float(np.interp(u, cdf, X))


def poisson_next_event(rate: float, rng: np.random.Generator) -> float:
    """Exponential waiting time; ``math.inf`` when the rate is zero."""
    if rate <= 0:
        return math.inf
    return float(rng.exponential(1.0 / rate))


# ------------------------------------------------------------ dynamics

def double_well(x: np.ndarray, L: float, depth: float, width: float) -> np.ndarray:
    """Two inverted Gaussians of depth ``depth`` and std ``width`` at +-L/2."""
    return -depth * (np.exp(-(x - 0.5 * L) ** 2 / (2 * width ** 2))
                     + np.exp(-(x + 0.5 * L) ** 2 / (2 * width ** 2)))


def matched_well(mass: float, sigma: float, L: float,
                 hbar: float = CONSTANTS.hbar) -> tuple[float, float]:
    """(depth, width) of wells whose harmonic ground state has position std ``sigma``."""
    w = L / 4.0
    omega = hbar / (2 * mass * sigma * sigma)
    return mass * omega * omega * w * w, w


class _SplitStep:
    def __init__(self, state: WaveState1D, V: np.ndarray, dt: float, hbar: float):
        k = 2 * math.pi * np.fft.fftfreq(state.n, state.dx)
        self.kin = np.exp(-0.5j * hbar * k * k * dt / (2 * state.mass))
        self.pot = np.exp(-1j * V * dt / hbar)

    def __call__(self, psi):
        psi = np.fft.ifft(self.kin * np.fft.fft(psi))
        psi = self.pot * psi
        return np.fft.ifft(self.kin * np.fft.fft(psi))


def _hit_width(theory: TheoryId, report, params: CollapseParams) -> float:
    if report.collapse_width is not None:
        return report.collapse_width
    return params.sigma_grw


def grid_trajectory(theory: TheoryId, p: ExperimentProtocol, horizon: float, dt: float, seed: int,
                    n: int = 2048, index: int = 0,
                    forced_hits: Sequence[tuple[float, Optional[float]]] = (),
                    spontaneous: bool = True,
                    well: Optional[tuple[float, float]] = None,
                    params: CollapseParams = CollapseParams(),
                    constants: PhysicalConstants = CONSTANTS
                    ) -> tuple[ForceRecord, list[CollapseEvent]]:
    """Grid-level force record for a semiclassical theory (or NH).

    Localisations are Gaussian hits of the theory's collapse width, never
    narrower than the component width or two grid cells, at Poisson times of
    the theory's rate.  Spontaneous hits on a state that is already a single
    packet are logged but leave it unchanged, and at most one is applied per
    output step.  ``forced_hits`` adds hits at given times, with a given
    centre or a Born-sampled one when the centre is ``None``.  ``well``
    overrides the matched (depth, width).
    """
    theory = TheoryId(theory)
    if theory not in SEMICLASSICAL and theory is not TheoryId.NH:
        raise ValueError(f"{theory.value} has no grid-level matter density; use the two-site engine")
    report = rate_report(theory, p, params, constants)
    f0, L, sigma = report.f0, p.cat_separation_L, p.component_width
    rng = trajectory_rng(seed, index)
    x0, dx = centered_grid(L, sigma, n)
    state = make_cat_state(sigma, L, x0, dx, n, p.sphere_mass)
    depth, width = well if well is not None else matched_well(p.sphere_mass, sigma, L, constants.hbar)
    # resolve the well's harmonic period; the kinetic factor itself is exact
    omega = math.sqrt(depth / (p.sphere_mass * width * width)) if depth > 0 else 0.0
    n_sub = max(1, int(math.ceil(omega * dt / 0.1)))
    stepper = _SplitStep(state, double_well(state.x, L, depth, width), dt / n_sub, constants.hbar)
    n_out = int(round(horizon / dt))
    times = dt * np.arange(n_out + 1)
    y = p.probe_offset_y

    def force(s):
        # record axis points from the + minimum to the - minimum
        return -net_force_on_probe(s.density(), 0.0, y, p.probe_mass, constants.G) + 0.0

    if theory is TheoryId.NH:
        return ForceRecord(times, np.zeros_like(times), theory, seed, [], f0), []

    # never squeeze below the prepared component: sharper kicks only heat the packet
    hit_sigma = max(_hit_width(theory, report, params), sigma, 2 * dx)
    rate = report.intrinsic_rate if spontaneous else 0.0
    events, record_events = [], []

    def hit(s, t, X=None):
        if X is None and s.width() < 2 * sigma:
            # already a single packet; the hit would only re-localise (and heat) it
            events.append(CollapseEvent(t, s.mean(), s.width(), s.width()))
            record_events.append((t, "hit"))
            return s
        X = sample_collapse_center(s, hit_sigma, rng) if X is None else X
        new = grw_hit(s, X, hit_sigma)
        events.append(CollapseEvent(t, X, s.width(), new.width()))
        record_events.append((t, "hit"))
        return new

    if spontaneous and rate > 0 and p.slit_arrival_time > 0:
        if rng.random() < -math.expm1(-rate * p.slit_arrival_time):
            state = hit(state, 0.0)

    pending = sorted(forced_hits, key=lambda h: h[0])
    next_t = poisson_next_event(rate, rng)
    forces = np.empty_like(times)
    forces[0] = force(state)
    for i in range(1, n_out + 1):
        t1 = times[i]
        psi = state.psi
        for _ in range(n_sub):
            psi = stepper(psi)
        state = state.with_psi(psi)
        while True:
            t_forced = pending[0][0] if pending else math.inf
            t_next = min(next_t, t_forced)
            if t_next > t1:
                break
            if t_forced <= next_t:
                _, X = pending.pop(0)
                state = hit(state, t_forced, X)
            else:
                state = hit(state, next_t)
                next_t += poisson_next_event(rate, rng)
                if next_t <= t1:
                    # further hits this step only re-localise the same packet
                    next_t = max(t1 + poisson_next_event(rate, rng), math.nextafter(t1, math.inf))
        forces[i] = force(state)
    return ForceRecord(times, forces, theory, seed, record_events, f0), events


# ------------------------------------------------------------ binary dump

def write_state(path, state: WaveState1D) -> None:
    buf = np.empty(2 * state.n, dtype="<f8")
    buf[0::2] = state.psi.real
    buf[1::2] = state.psi.imag
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(state.n, state.dx, state.x0, state.mass))
        fh.write(buf.tobytes())


def read_state(path) -> WaveState1D:
    data = Path(path).read_bytes()
    n, dx, x0, mass = _HEADER.unpack_from(data)
    buf = np.frombuffer(data, dtype="<f8", offset=_HEADER.size, count=2 * n)
    return WaveState1D(x0, dx, buf[0::2] + 1j * buf[1::2], mass)
