"""Conversion of dimensionless results to the flux-qubit circuit-QED platform.

Frequencies are given as ordinary frequencies ``f`` with angular frequency
``2 pi f``. Reference values quoted for that platform are compared against
the arithmetic here; agreement means equality to the quoted number of
digits.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from decimal import Decimal

from ..errors import ValidationError
from ..model import DEFAULT_T_END

#: Platform numbers (frequencies divided by 2 pi) and the rounded values
#: quoted for it, as strings to keep their precision.
FLUX_QUBIT_PRESET = {
    "omega_ghz": 2.782,
    "g_mhz": 314.0,
    "kappa_mhz": 2.5,
    "quoted": {"t_l_ns": "11", "t_d_ns": "64", "g_over_omega": "0.11"},
}


@dataclass(frozen=True)
class Comparison:
    quantity: str
    computed: float
    quoted: str
    agrees: bool


def _agrees(value: float, quoted: str) -> bool:
    exp = Decimal(quoted).as_tuple().exponent
    half_ulp = 0.5 * 10.0**exp
    return abs(value - float(quoted)) <= half_ulp + 1e-12


def convert_units(omega_ghz: float, g_mhz: float | None = None, kappa_mhz: float | None = None,
                  t_l: float = DEFAULT_T_END, quoted: dict | None = None) -> dict:
    """Physical timescales for photon frequency ``omega = 2 pi * omega_ghz`` GHz.

    Returns a report with ``T_L`` in ns, ``t_D = 1/kappa`` in ns, ``g/omega``
    and a comparison against ``quoted`` reference values (discrepancies are
    kept, not hidden).
    """
    if not omega_ghz > 0:
        raise ValidationError(["photon frequency must be positive"])
    omega = 2 * math.pi * omega_ghz  # rad/ns
    report = {
        "omega_ghz": omega_ghz,
        "omega_rad_per_ns": omega,
        "t_l_omega_units": t_l,
        "t_l_ns": t_l / omega,
    }
    if g_mhz is not None:
        report["g_mhz"] = g_mhz
        report["g_over_omega"] = g_mhz / (1000.0 * omega_ghz)
    if kappa_mhz is not None:
        if not kappa_mhz > 0:
            raise ValidationError(["kappa must be positive"])
        kappa = 2 * math.pi * kappa_mhz * 1e-3  # rad/ns
        report["kappa_mhz"] = kappa_mhz
        report["t_d_ns"] = 1.0 / kappa
        report["t_l_over_t_d"] = report["t_l_ns"] / report["t_d_ns"]
    comps = []
    for key, ref in (quoted or {}).items():
        if key in report:
            comps.append(asdict(Comparison(key, report[key], ref, _agrees(report[key], ref))))
    report["comparisons"] = comps
    return report
