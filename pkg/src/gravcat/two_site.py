"""Two-site (double-well) reduction of the sphere's centre of mass.

The sphere is either at the ``+`` minimum or at the ``-`` minimum.  A probe
on the perpendicular bisector feels ``-f0`` when the sphere is at ``+`` and
``+f0`` when it is at ``-``.  The tunnelling Hamiltonian is ``hbar nu sigma_1``
with ``nu`` an angular frequency.

Each trajectory draws from its own stream ``default_rng([seed, index])`` so
ensembles are reproducible however they are split across workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import CONSTANTS, CollapseParams, ExperimentProtocol, PhysicalConstants, TheoryId
from .rates import ZERO_FAMILY, rate_report

__all__ = [
    "TwoSiteState",
    "TwoSiteDensityMatrix",
    "ForceRecord",
    "telegraph_analytic_mean",
    "telegraph_analytic_corr",
    "telegraph_sample",
    "evolve_unitary",
    "grw_jump_two_site",
    "dephasing_step",
    "csl_diffusive_step",
    "csl_diffusive_populations",
    "run_two_site_trajectory",
    "run_two_site_ensemble",
    "trajectory_rng",
    "EnsembleStats",
    "ensemble_statistics",
    "SEMICLASSICAL",
    "JUMP_THEORIES",
]

EVENT_KINDS = ("jump", "hit", "tunnel", "flash")

SEMICLASSICAL = frozenset({
    TheoryId.GRW_mN, TheoryId.CSL_mN, TheoryId.DP_mN, TheoryId.TD_CSL, TheoryId.TD_DP,
    TheoryId.K_mN, TheoryId.KafriEtAl, TheoryId.BeraEtAl, TheoryId.AdlerTD,
})
JUMP_THEORIES = frozenset({TheoryId.CQT_Newton, TheoryId.GRW_fN} | ZERO_FAMILY)
_TD = frozenset({TheoryId.TD_CSL, TheoryId.TD_DP})
_DIFFUSIVE = frozenset({TheoryId.CSL_mN, TheoryId.TD_CSL, TheoryId.AdlerTD})

# Above this many collapse times per output step, diffusive collapse is
# replaced by an instantaneous Born projection.
_DIFFUSIVE_CAP = 200.0


def trajectory_rng(seed: int, index: int = 0) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(index)])


# ------------------------------------------------------------ states

@dataclass(frozen=True)
class TwoSiteState:
    c_plus: complex
    c_minus: complex

    @classmethod
    def plus(cls) -> "TwoSiteState":
        return cls(1.0 + 0j, 0j)

    @classmethod
    def minus(cls) -> "TwoSiteState":
        return cls(0j, 1.0 + 0j)

    @classmethod
    def cat(cls) -> "TwoSiteState":
        s = 1.0 / math.sqrt(2.0)
        return cls(complex(s), complex(s))

    @property
    def p_plus(self) -> float:
        return abs(self.c_plus) ** 2

    @property
    def p_minus(self) -> float:
        return abs(self.c_minus) ** 2

    def norm(self) -> float:
        return self.p_plus + self.p_minus

    def sigma3(self) -> float:
        return self.p_plus - self.p_minus

    def normalized(self) -> "TwoSiteState":
        n = math.sqrt(self.norm())
        return TwoSiteState(self.c_plus / n, self.c_minus / n)


@dataclass(frozen=True, eq=False)
class TwoSiteDensityMatrix:
    """2x2 density matrix in the basis (|+>, |->)."""

    matrix: np.ndarray

    @classmethod
    def from_state(cls, s: TwoSiteState) -> "TwoSiteDensityMatrix":
        v = np.array([s.c_plus, s.c_minus])
        return cls(np.outer(v, v.conj()))

    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def is_valid(self, tol: float = 1e-10) -> bool:
        m = self.matrix
        herm = np.allclose(m, m.conj().T, atol=tol)
        return herm and abs(self.trace() - 1) < tol and np.linalg.eigvalsh(m).min() >= -1e-12


@dataclass(eq=False)
class ForceRecord:
    """Probe force sampled on a uniform time grid, plus the events behind it."""

    times: np.ndarray
    forces: np.ndarray
    theory: TheoryId
    seed: int
    events: list = field(default_factory=list)
    f0: float = 1.0

    def event_times(self, kind: Optional[str] = None) -> list[float]:
        return [t for t, k in self.events if kind is None or k == kind]


# ------------------------------------------------------------ telegraph

def telegraph_analytic_mean(f0: float, Gamma: float, t):
    """Mean force -f0 exp(-Gamma t) for a sphere starting at the + minimum."""
    return -f0 * np.exp(-Gamma * np.asarray(t, dtype=float))


def telegraph_analytic_corr(f0: float, Gamma: float, t, t2):
    return f0 * f0 * np.exp(-Gamma * np.abs(np.asarray(t2, dtype=float) - np.asarray(t, dtype=float)))


def _time_grid(horizon: float, dt: float) -> np.ndarray:
    if not dt > 0 or not horizon >= dt:
        raise ValueError(f"need dt > 0 and horizon >= dt (got dt={dt!r}, horizon={horizon!r})")
    n = int(round(horizon / dt))
    return dt * np.arange(n + 1)


def _telegraph_on_grid(f0, Gamma, times, rng, start=-1.0):
    """Exact flip times at rate Gamma/2, read off on ``times``."""
    horizon = times[-1]
    flips = []
    if Gamma > 0:
        t = rng.exponential(2.0 / Gamma)
        while t <= horizon:
            flips.append(t)
            t += rng.exponential(2.0 / Gamma)
    counts = np.searchsorted(np.asarray(flips), times, side="right")
    forces = start * f0 * np.where(counts % 2 == 0, 1.0, -1.0)
    return forces + 0.0, [(t, "jump") for t in flips]


def telegraph_sample(f0: float, Gamma: float, horizon: float, dt: float, seed: int,
                     index: int = 0, theory: TheoryId = TheoryId.CQT_Newton) -> ForceRecord:
    """Telegraph force record starting at -f0 with flip rate Gamma/2 per state."""
    if Gamma < 0:
        raise ValueError("Gamma must be >= 0")
    if dt * Gamma >= 0.1:
        raise ValueError(f"dt*Gamma = {dt * Gamma:.3g} must be < 0.1 to resolve the jumps")
    times = _time_grid(horizon, dt)
    forces, events = _telegraph_on_grid(f0, Gamma, times, trajectory_rng(seed, index))
    return ForceRecord(times, forces, TheoryId(theory), seed, events, f0)


# ------------------------------------------------------------ elementary steps

def evolve_unitary(state: TwoSiteState, nu: float, dt: float) -> TwoSiteState:
    """exp(-i nu sigma_1 dt) applied to the state."""
    c, s = math.cos(nu * dt), math.sin(nu * dt)
    return TwoSiteState(c * state.c_plus - 1j * s * state.c_minus,
                        c * state.c_minus - 1j * s * state.c_plus)


def grw_jump_two_site(state: TwoSiteState, rng: np.random.Generator) -> tuple[TwoSiteState, str]:
    """Born-rule localisation onto one of the two minima."""
    if rng.random() < state.p_plus / state.norm():
        return TwoSiteState.plus(), "+"
    return TwoSiteState.minus(), "-"


def dephasing_step(rho: TwoSiteDensityMatrix, Lambda: float, dt: float) -> TwoSiteDensityMatrix:
    """Damp the coherences by exp(-Lambda dt); populations untouched."""
    m = rho.matrix.copy()
    d = math.exp(-Lambda * dt)
    m[0, 1] *= d
    m[1, 0] *= d
    return TwoSiteDensityMatrix(m)


def _csl_update(cp, cm, Gamma, dt, dW):
    s = np.abs(cp) ** 2 - np.abs(cm) ** 2
    ap, am = 1.0 - s, -1.0 - s
    g = math.sqrt(Gamma) / 2.0
    cp = cp * (1.0 - Gamma / 8.0 * ap * ap * dt + g * ap * dW)
    cm = cm * (1.0 - Gamma / 8.0 * am * am * dt + g * am * dW)
    n = np.sqrt(np.abs(cp) ** 2 + np.abs(cm) ** 2)
    return cp / n, cm / n


def csl_diffusive_step(state: TwoSiteState, Gamma_cm: float, dt: float,
                       rng: np.random.Generator) -> TwoSiteState:
    """One Itô step of the norm-preserving CSL unravelling in the site basis."""
    if Gamma_cm * dt >= 0.1:
        raise ValueError(f"Gamma*dt = {Gamma_cm * dt:.3g} must be < 0.1")
    if Gamma_cm == 0:
        return state
    dW = rng.normal(0.0, math.sqrt(dt))
    cp, cm = _csl_update(state.c_plus, state.c_minus, Gamma_cm, dt, dW)
    return TwoSiteState(complex(cp), complex(cm))


def csl_diffusive_populations(p_plus0: float, Gamma: float, t_final: float, dt: float,
                              n_traj: int, seed: int, record_at: Sequence[float] = ()) -> dict:
    """Vectorised ensemble of diffusive CSL trajectories from a real initial state.

    Returns ``{"t": [...], "p_plus": array (len(t), n_traj)}`` at ``record_at``
    plus the final time.  Trajectory ``i`` uses ``trajectory_rng(seed, i)``.
    """
    if Gamma * dt >= 0.1:
        raise ValueError(f"Gamma*dt = {Gamma * dt:.3g} must be < 0.1")
    n_steps = int(round(t_final / dt))
    marks = sorted({int(round(t / dt)) for t in record_at if 0 <= t <= t_final} | {n_steps})
    rngs = [trajectory_rng(seed, i) for i in range(n_traj)]
    cp = np.full(n_traj, math.sqrt(p_plus0), dtype=complex)
    cm = np.full(n_traj, math.sqrt(1.0 - p_plus0), dtype=complex)
    out_t, out_p = [], []
    if marks and marks[0] == 0:
        out_t.append(0.0)
        out_p.append(np.abs(cp) ** 2)
    chunk, step = 512, 0
    while step < n_steps:
        m = min(chunk, n_steps - step)
        dW = np.stack([g.normal(0.0, math.sqrt(dt), m) for g in rngs], axis=1)
        for k in range(m):
            cp, cm = _csl_update(cp, cm, Gamma, dt, dW[k])
            step += 1
            if step in marks:
                out_t.append(step * dt)
                out_p.append(np.abs(cp) ** 2)
    return {"t": np.asarray(out_t), "p_plus": np.asarray(out_p)}


# ------------------------------------------------------------ full trajectories

def _zeno_rate(nu: float, dephasing: float) -> float:
    """Incoherent hopping rate 2 nu^2 / Gamma_d between strongly monitored minima."""
    return 2.0 * nu * nu / dephasing if dephasing > 0 else 0.0


def run_two_site_trajectory(theory: TheoryId, p: ExperimentProtocol, horizon: float, dt: float,
                            seed: int, index: int = 0,
                            params: CollapseParams = CollapseParams(),
                            constants: PhysicalConstants = CONSTANTS) -> ForceRecord:
    """One probe-force record for ``theory`` applied to protocol ``p``.

    Time zero is the moment the cat state is formed; a collapse that already
    happened before it (during ``p.slit_arrival_time``) appears as a ``hit``
    event at t = 0 with the sphere in one minimum from the start.
    """
    theory = TheoryId(theory)
    report = rate_report(theory, p, params, constants)
    f0 = report.f0
    times = _time_grid(horizon, dt)
    rng = trajectory_rng(seed, index)

    def record(forces, events):
        return ForceRecord(times, np.asarray(forces, dtype=float) + 0.0, theory, seed, events, f0)

    if theory is TheoryId.NH:
        return record(np.zeros_like(times), [])

    if theory is TheoryId.CQT_Newton or theory in ZERO_FAMILY:
        rate = report.effective_cm_rate
        if rate * dt >= 0.1:
            raise ValueError(f"dt*rate = {rate * dt:.3g} must be < 0.1 to resolve the jumps")
        if theory in ZERO_FAMILY and rate == 0:
            return record(np.zeros_like(times), [])
        forces, events = _telegraph_on_grid(f0, rate, times, rng)
        return record(forces, events)

    if theory is TheoryId.GRW_fN:
        return _flash_trajectory(report, p, times, rng, record)

    return _semiclassical_trajectory(theory, report, p, times, rng, record)


def _flash_trajectory(report, p, times, rng, record):
    forces = np.zeros_like(times)
    events = []
    rate, dt = report.intrinsic_rate, times[1] - times[0]
    state = TwoSiteState.cat()
    t = rng.exponential(1.0 / rate) if rate > 0 else math.inf
    t_prev = 0.0
    while t <= times[-1]:
        state = evolve_unitary(state, p.tunneling_rate_nu, t - t_prev)
        t_prev = t
        if report.collapse_effective_on_cat:
            state, outcome = grw_jump_two_site(state, rng)
        else:
            outcome = "+" if rng.random() < 0.5 else "-"
        i = int(round(t / dt))
        forces[i] = -report.f0 if outcome == "+" else report.f0
        events.append((t, "flash"))
        t += rng.exponential(1.0 / rate)
    return record(forces, events)


def _semiclassical_trajectory(theory, report, p, times, rng, record):
    f0, dt = report.f0, times[1] - times[0]
    rate = report.intrinsic_rate
    effective = report.collapse_effective_on_cat
    nu = p.tunneling_rate_nu
    events = []
    localized = False
    state = TwoSiteState.cat()

    if effective and rate > 0 and p.slit_arrival_time > 0:
        if rng.random() < -math.expm1(-rate * p.slit_arrival_time):
            state, _ = grw_jump_two_site(state, rng)
            localized = True
            events.append((0.0, "hit"))

    if theory in _TD:
        dephasing = rate / 2.0 if theory is TheoryId.TD_CSL else rate
        hop = _zeno_rate(nu, dephasing)
    else:
        hop = 0.0

    diffusive = theory in _DIFFUSIVE and effective and rate * dt <= _DIFFUSIVE_CAP
    next_event = math.inf
    if effective and rate > 0 and not localized and not diffusive:
        next_event = rng.exponential(1.0 / rate)
    if not effective and rate > 0 and theory not in _DIFFUSIVE:
        next_event = rng.exponential(1.0 / rate)  # width-ineffective hits still happen
    next_hop = rng.exponential(1.0 / hop) if hop > 0 else math.inf
    substep = min(dt, 0.05 / rate) if diffusive and rate > 0 else dt
    n_sub = max(1, int(math.ceil(dt / substep)))

    forces = np.empty_like(times)
    forces[0] = -f0 * state.sigma3()
    for i in range(1, times.size):
        t1 = times[i]
        if not localized:
            state = evolve_unitary(state, nu, dt)
            if diffusive:
                h = dt / n_sub
                for _ in range(n_sub):
                    state = TwoSiteState(*map(complex, _csl_update(
                        state.c_plus, state.c_minus, rate, h, rng.normal(0.0, math.sqrt(h)))))
                if min(state.p_plus, state.p_minus) < 1e-12:
                    state = TwoSiteState.plus() if state.p_plus > 0.5 else TwoSiteState.minus()
                    localized = True
                    events.append((t1, "hit"))
        while next_event <= t1:
            events.append((next_event, "hit"))
            if effective and not localized:
                state, _ = grw_jump_two_site(state, rng)
                localized = True
                next_event = math.inf
            else:
                next_event += rng.exponential(1.0 / rate)
        while localized and next_hop <= t1:
            events.append((next_hop, "tunnel"))
            state = TwoSiteState(state.c_minus, state.c_plus)
            next_hop += rng.exponential(1.0 / hop)
        forces[i] = -f0 * state.sigma3()
    return record(forces, events)


def _trajectory_task(args):
    return run_two_site_trajectory(*args)


def run_two_site_ensemble(theory: TheoryId, p: ExperimentProtocol, n_traj: int, horizon: float,
                          dt: float, seed: int, params: CollapseParams = CollapseParams(),
                          constants: PhysicalConstants = CONSTANTS,
                          workers: int = 1) -> list[ForceRecord]:
    """Independent trajectories ``0..n_traj-1``, returned in index order."""
    tasks = [(theory, p, horizon, dt, seed, i, params, constants) for i in range(n_traj)]
    if workers > 1 and n_traj > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_trajectory_task, tasks, chunksize=max(1, n_traj // (4 * workers))))
    return [_trajectory_task(t) for t in tasks]


# ------------------------------------------------------------ statistics

@dataclass(frozen=True, eq=False)
class EnsembleStats:
    times: np.ndarray
    mean: np.ndarray
    mean_stderr: np.ndarray
    lags: np.ndarray
    corr: np.ndarray
    corr_stderr: np.ndarray
    n_traj: int


def ensemble_statistics(records: Sequence[ForceRecord], max_lag_steps: Optional[int] = None,
                        lag_steps: Optional[Sequence[int]] = None) -> EnsembleStats:
    """Ensemble mean force and time-averaged two-time correlation.

    The correlation at lag ``k`` is ``F(t) F(t + k dt)`` averaged over all
    start times inside each record, then over records; its standard error
    comes from the spread of the per-record averages.
    """
    F = np.stack([r.forces for r in records])
    n, m = F.shape
    times = records[0].times
    mean = F.mean(axis=0)
    se = F.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros(m)
    if lag_steps is None:
        kmax = m // 2 if max_lag_steps is None else min(max_lag_steps, m - 1)
        lag_steps = np.arange(kmax + 1)
    lag_steps = np.asarray(lag_steps, dtype=int)
    per = np.stack([(F[:, : m - k] * F[:, k:]).mean(axis=1) for k in lag_steps], axis=1)
    corr = per.mean(axis=0)
    cse = per.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros(len(lag_steps))
    dt = times[1] - times[0]
    return EnsembleStats(times, mean, se, lag_steps * dt, corr, cse, n)
