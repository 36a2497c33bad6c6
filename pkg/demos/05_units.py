"""What the dimensionless window means on a flux-qubit circuit.

Converts the averaging window and decay time to nanoseconds and checks the
rounded reference values. Disagreements are printed, not smoothed over.
"""

from spinboson.cli.units import FLUX_QUBIT_PRESET, convert_units

pre = FLUX_QUBIT_PRESET
report = convert_units(pre["omega_ghz"], pre["g_mhz"], pre["kappa_mhz"], quoted=pre["quoted"])
print(f"T_L  = {report['t_l_ns']:.3f} ns")
print(f"t_D  = {report['t_d_ns']:.2f} ns")
print(f"g/w  = {report['g_over_omega']:.4f}")
for c in report["comparisons"]:
    verdict = "agrees with" if c["agrees"] else "DISAGREES with"
    print(f"  {c['quantity']}: {c['computed']:.4g} {verdict} quoted {c['quoted']}")
