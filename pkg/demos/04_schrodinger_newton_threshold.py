"""
Self-gravity of a single packet: spreading or contracting?
==========================================================

Under the Schrödinger-Newton equation a Gaussian packet feels its own
gravitational potential.  Light packets spread as a free particle does;
above a critical mass (~5e9 amu for a 0.5 um packet) the packet starts to
contract.  In units of the packet width and m sigma^2 / hbar the only
parameter is K = G m^3 sigma / hbar^2, so the critical mass scales as
sigma^(-1/3).
"""
from gravcat.core import CONSTANTS
from gravcat.sn import (SNBudget, detect_critical_mass, free_width, make_radial_gaussian,
                        sn_evolve_radial, sn_stable_dt)

amu, hbar = CONSTANTS.amu, CONSTANTS.hbar
sigma = 0.5e-6

for m_amu in (1e9, 1e10):
    m = m_amu * amu
    s = make_radial_gaussian(sigma, m, 32 * sigma)
    T = m * sigma ** 2 / hbar
    dt = min(sn_stable_dt(s), 0.005 * T)
    n = int(0.5 * T / dt)
    _, w = sn_evolve_radial(s, None, dt, n, record_every=n)
    free = 3 ** 0.5 * free_width(sigma, m, w.times[-1])
    print(f"m = {m_amu:.0e} amu: RMS radius {w.widths[0]:.4e} -> {w.widths[-1]:.4e} m "
          f"(free spreading: {free:.4e} m)")

# %%
# Bracket the threshold, for a point-mass packet and for a homogeneous sphere of radius 1 um
b = detect_critical_mass(sigma, 1e9 * amu, 5e10 * amu, SNBudget())
print(f"point packet, 0.5 um:  [{b.lo / amu:.2e}, {b.hi / amu:.2e}] amu")
b = detect_critical_mass(sigma, 1e9 * amu, 5e10 * amu, SNBudget(), sphere_radius=1e-6)
print(f"sphere R = 1 um:       [{b.lo / amu:.2e}, {b.hi / amu:.2e}] amu")
