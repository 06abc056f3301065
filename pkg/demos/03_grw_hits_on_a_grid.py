"""
A collapse hit on a cat state, resolved on a grid
=================================================

A GRW hit multiplies the wavefunction by a Gaussian of width sigma_GRW
centred at a random point X, drawn from int g(x - X) |psi(x)|^2 dx.  When
sigma_GRW is far larger than L (the 1 pm cat) the hit does nothing; when L
is far larger (the 500 nm cat) it picks one minimum and the probe force
jumps from zero to f0.
"""
import numpy as np

from gravcat import TheoryId, preset_protocol
from gravcat.grid import centered_grid, grid_trajectory, grw_hit, make_cat_state, sample_collapse_center

rng = np.random.default_rng(0)
sigma_grw = 1e-7

for L in (1e-12, 5e-7):
    sigma = L / 20
    x0, dx = centered_grid(L, sigma, 4096)
    cat = make_cat_state(sigma, L, x0, dx, 4096)
    X = sample_collapse_center(cat, max(sigma_grw, sigma), rng)
    after = grw_hit(cat, X, sigma_grw)
    print(f"L = {L:.0e} m: width {cat.width():.2e} m -> {after.width():.2e} m, "
          f"<x> {cat.mean():+.1e} -> {after.mean():+.1e} m")

# %%
# The probe force around a forced hit in the Pino geometry
p = preset_protocol("Pino").replace(slit_arrival_time=0.0)
rec, events = grid_trajectory(TheoryId.GRW_mN, p, horizon=0.1, dt=1e-3, seed=3,
                              forced_hits=[(0.05, None)], spontaneous=False)
for t in (0.0, 0.049, 0.051, 0.1):
    i = int(round(t / 1e-3))
    print(f"t = {t:5.3f} s   F = {rec.forces[i] / rec.f0:+.4f} f0")
print("hit at", events[0].time, "s, centre", f"{events[0].center:+.2e} m")
