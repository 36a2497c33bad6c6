"""Switching the drive on slowly washes out the resonance.

Each resonance amplitude is reached by a linear ramp of rise time Tc. Slow
ramps let the system follow adiabatically and the mean drops towards zero.
"""

from spinboson import DriveSpec, ModelParams
from spinboson.experiments import risetime_scan

scan = risetime_scan(ModelParams(g=0.2, drive=DriveSpec.photon(0.0)), m_list=(1, 2), tc_grid=(0.0, 5.0, 20.0, 50.0))
print("   Tc  " + "  ".join(f"{'M_' + str(m):>7s}" for m in scan.means))
for k, tc in enumerate(scan.tc_grid):
    print(f"{tc:5.1f}  " + "  ".join(f"{scan.means[m][k]: .4f}" for m in scan.means))
