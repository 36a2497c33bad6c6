"""Resonance positions do not depend on the initial state.

Random states supported on the lowest Fock levels give dispersive lineshapes,
so peaks come from the matched detector. Slow: five full scans.
"""

from spinboson import DriveSpec, ModelParams
from spinboson.experiments import initial_state_robustness

scans = initial_state_robustness(ModelParams(g=0.2, drive=DriveSpec.photon(0.0)), n_seeds=5)
for seed, scan in scans.items():
    print(f"seed {seed:>20d}: " + ", ".join(f"m={p.m} at {p.position:.2f}" for p in scan.peaks))
