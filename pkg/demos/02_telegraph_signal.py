"""
The telegraph signal of a projectively measured cat
===================================================

If the probe's gravitational coupling acts as a measurement, the sphere is
repeatedly localised while tunnelling tries to delocalise it.  The probe
then sees a random telegraph force: +-f0 with switches at rate Gamma/2.
Its ensemble mean decays as -f0 exp(-Gamma t) and its autocorrelation as
f0^2 exp(-Gamma |t - t'|).
"""
import numpy as np

from gravcat import TheoryId, preset_protocol, run_two_site_ensemble, ensemble_statistics
from gravcat.rates import cqt_decay_rate

p = preset_protocol("RomeroIsart")
gamma = cqt_decay_rate(p.tunneling_rate_nu, p.probe_resolution_tau)
print(f"Gamma = nu^2 tau / 2 = {gamma:g} 1/s")

records = run_two_site_ensemble(TheoryId.CQT_Newton, p, 4000, horizon=0.3, dt=1e-3, seed=1)
f0 = records[0].f0
stats = ensemble_statistics(records, lag_steps=np.arange(0, 200, 25))

print("\n   t [s]   mean/f0   exact")
for i in range(0, 301, 50):
    t = stats.times[i]
    print(f"  {t:6.3f}  {stats.mean[i] / f0:+.4f}  {-np.exp(-gamma * t):+.4f}")

print("\n  lag [s]   corr/f0^2   exact")
for lag, c in zip(stats.lags, stats.corr):
    print(f"  {lag:6.3f}   {c / f0 ** 2:.4f}     {np.exp(-gamma * lag):.4f}")

# %%
# One record, shown as its switching times
r = records[0]
print("\nfirst record switches at", [round(t, 4) for t in r.event_times("jump")][:8], "...")
