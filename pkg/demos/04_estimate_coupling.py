"""Reading the coupling off two resonance heights.

The ratio of peak means at orders m and m+i fixes exp(-2 g^2), so g follows
from two numbers. First from quoted measurements, then from a simulated scan.
"""

from spinboson import DriveSpec, ModelParams
from spinboson.analytic import estimate_coupling
from spinboson.experiments import coupling_estimation_experiment

print(f"from M_1=-0.41, M_2=-0.33: g = {estimate_coupling(-0.41, -0.33, 1, 1):.4f}")

for g in (0.2, 0.1):
    est = coupling_estimation_experiment(ModelParams(g=g, drive=DriveSpec.photon(0.0)))
    print(f"g={g}: M_1={est.mean_m:.5f}  M_2={est.mean_mi:.5f}  "
          f"estimate {est.g_estimated:.5f}  error {100 * est.relative_error:.2f}%")
