"""
Which signal does each theory predict?
======================================

The classifier combines collapse rate, collapse width, coherence time and
probe resolution into one of six signal classes.  A short simulation of
each cell checks that the simulated records look like the predicted class.
"""
from gravcat import TheoryId, preset_protocol, run_scenario

print(f"{'theory':12s} {'RomeroIsart':34s} {'Pino':34s}")
for t in TheoryId:
    cells = []
    for name in ("RomeroIsart", "Pino"):
        r = run_scenario(t, preset_protocol(name), n_traj=100, seed=0)
        mark = "" if r.consistent else " (!)"
        cells.append(f"{r.verdict.signal_class.value}{mark}")
    print(f"{t.value:12s} {cells[0]:34s} {cells[1]:34s}")

# %%
# Why: the rationale codes behind one cell
r = run_scenario(TheoryId.CSL_mN, preset_protocol("Pino"), n_traj=0)
print("\nCSL_mN / Pino:", ", ".join(r.verdict.rationale_codes))
print("branch probabilities:", r.verdict.branch_probabilities)
