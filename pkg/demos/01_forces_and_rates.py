"""
How strong is the pull of a cat-state sphere, and how fast do collapse models act?
===================================================================================

A sphere of mass M sits in a superposition of two minima a distance L
apart.  A probe of mass m at distance D from both minima feels a horizontal
force f0 = G M m L / (2 D^3) when the sphere is found in one minimum, and
none at all from the symmetric, uncollapsed mass density.
"""
from gravcat import TheoryId, preset_protocol, rate_report
from gravcat.forces import MatterDensity1D, density_force, net_force_on_probe, point_force
from gravcat.core import TANTALUM_DENSITY

p = preset_protocol("RomeroIsart")
f0 = point_force(p.sphere_mass, p.probe_mass, p.cat_separation_L, p.probe_distance_D)
print(f"RomeroIsart: f0 = {f0:.2e} N")

# A ten times larger cat, a tantalum sphere of 5 um radius, 1 um gap
print(f"enhanced:    f0 = {density_force(TANTALUM_DENSITY, 4e-12, 1e-11, 1e-6, 5e-6):.2e} N")

# The same number from a gridded matter density: all mass in +L/2, then half in each minimum
half = 0.5 * p.cat_separation_L + 10 * p.component_width
for weights in [(1.0, 0.0), (0.5, 0.5)]:
    rho = MatterDensity1D.gaussian_cat(p.sphere_mass, p.component_width, p.cat_separation_L,
                                       -half, half, 4097, weights)
    F = net_force_on_probe(rho, 0.0, p.probe_offset_y, p.probe_mass)
    print(f"weights {weights}: F = {F / f0:+.6f} f0")

# %%
# Collapse rates per theory, for both protocols
for name in ("RomeroIsart", "Pino"):
    p = preset_protocol(name)
    print(f"\n{name}: {p.sphere_nucleons():.2e} nucleons, L = {p.cat_separation_L:.1e} m")
    for t in (TheoryId.GRW_mN, TheoryId.CSL_mN, TheoryId.DP_mN, TheoryId.K_mN, TheoryId.GRW0):
        r = rate_report(t, p)
        width = "-" if r.collapse_width is None else f"{r.collapse_width:.1e} m"
        print(f"  {t.value:8s} rate {r.intrinsic_rate:9.3e} 1/s  width {width:>9s}  "
              f"acts on cat: {r.collapse_effective_on_cat}")
