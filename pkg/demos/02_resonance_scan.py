"""The drive-amplitude resonance.

Scans the long-time mean M of <sigma_z> over the photon drive amplitude.
Peaks sit at Omega_m = m/(4g) with height -exp(-2 g^2) J_m(m). An atom drive
of the same size gives nothing. Takes about a minute on one core.
"""

import math

import numpy as np

from spinboson import DriveSpec, ModelParams
from spinboson.analytic import bessel_j
from spinboson.experiments import amplitude_scan, default_grid

g = 0.2
photon = amplitude_scan(ModelParams(g=g, drive=DriveSpec.photon(0.0)))
print("photon drive peaks:")
for p in photon.peaks:
    expected = -math.exp(-2 * g * g) * bessel_j(p.m, p.m)
    print(f"  m={p.m}  Omega={p.position:.2f}  M={p.height:.5f}  expected {expected:.5f}")
print(f"  degraded: {photon.degraded}")

atom = amplitude_scan(ModelParams(g=g, drive=DriveSpec.atom(0.0)), grid=default_grid(min_amplitude=0.1, step=0.1))
print(f"atom drive: max|M| = {np.max(np.abs(atom.means)):.1e}, peaks = {atom.peaks}")
