"""Closed-form results for the exactly solvable ``epsilon = 0`` case.

For a photon drive ``sigma_x`` is conserved and the two sectors
``sigma_x = s`` evolve under ``omega a^dag a + c_s (a^dag + a)`` with
``c_s = s g + Omega_p``. The polaron states are coherent states, so
everything reduces to coherent-state overlaps. These functions are the
oracle counterpart of :mod:`spinboson.evolve`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InconsistentMeasurementError, UnsupportedRegimeError
from .model import DriveKind, ModelParams

BESSEL_MAX_ORDER = 60
BESSEL_MAX_ARG = 60.0
_SERIES_SWITCH = 12.0
RESONANCE_RTOL = 1e-9


@dataclass(frozen=True)
class ClosedFormParams:
    """Parameters of ``-prefactor * cos(eta t - xi sin(omega t))``."""

    eta: float
    xi: float
    prefactor: float
    c_plus: float
    c_minus: float


def _require(params: ModelParams, kind: DriveKind) -> None:
    if params.epsilon != 0:
        raise UnsupportedRegimeError("closed forms need epsilon = 0 (the model is not integrable otherwise)")
    if params.drive.kind is not kind and not (kind is DriveKind.PHOTON and params.drive.kind is DriveKind.NONE):
        raise UnsupportedRegimeError(f"closed form requires a {kind.value} drive, got {params.drive.kind.value}")


def closed_form_params(params: ModelParams) -> ClosedFormParams:
    _require(params, DriveKind.PHOTON)
    g, w, om = params.g, params.omega, params.drive.amplitude
    return ClosedFormParams(
        eta=4 * g * om / w,
        xi=4 * g * om / w**2,
        prefactor=math.exp(-2 * g * g / w**2),
        c_plus=g + om,
        c_minus=-g + om,
    )


def coherent_trajectory(params: ModelParams, s: int, t):
    """Coherent label and global phase of the ``sigma_x = s`` branch.

    ``z(t) = -c_s/omega + (Omega_p/omega) exp(-i omega t)`` and
    ``phase(t) = (c_s^2/omega) t - (Omega_p c_s/omega^2) sin(omega t)``,
    so the branch state is ``exp(i phase) |z(t)> (x) |s>``.
    """
    _require(params, DriveKind.PHOTON)
    if s not in (1, -1):
        raise ValueError("subspace must be +1 or -1")
    w, om = params.omega, params.drive.amplitude
    c = s * params.g + om
    t = np.asarray(t, dtype=float)
    z = -c / w + (om / w) * np.exp(-1j * w * t)
    phase = (c * c / w) * t - (om * c / w**2) * np.sin(w * t)
    return z, phase


def coherent_overlap(alpha, beta):
    """``<alpha|beta>`` for (untruncated) coherent states."""
    alpha = np.asarray(alpha)
    beta = np.asarray(beta)
    return np.exp(-0.5 * (abs(alpha) ** 2 + abs(beta) ** 2) + np.conj(alpha) * beta)


def sigma_z_from_trajectories(params: ModelParams, t):
    """``<sigma_z(t)>`` assembled from the two branch trajectories.

    With ``|psi> = (|phi+> - |phi->)/sqrt(2)`` and ``<+|sigma_z|-> = 1`` the
    signal is ``-Re <phi+|phi->``.
    """
    zp, php = coherent_trajectory(params, 1, t)
    zm, phm = coherent_trajectory(params, -1, t)
    amp = np.exp(1j * (phm - php)) * coherent_overlap(zp, zm)
    return -amp.real


def closed_sigma_z_photon(params: ModelParams, t):
    cf = closed_form_params(params)
    t = np.asarray(t, dtype=float)
    return -cf.prefactor * np.cos(cf.eta * t - cf.xi * np.sin(params.omega * t))


def closed_sigma_z_atom(params: ModelParams, t):
    """``-exp(-2 g^2/omega^2) cos(2 Omega_a t)`` for an atom drive at eps=0."""
    _require(params, DriveKind.ATOM)
    t = np.asarray(t, dtype=float)
    pref = math.exp(-2 * params.g**2 / params.omega**2)
    return -pref * np.cos(2 * params.drive.amplitude * t)


# -- Bessel functions -----------------------------------------------------------

def _bessel_series(m: int, x: float) -> float:
    h = 0.5 * x
    term = 1.0
    for k in range(1, m + 1):
        term *= h / k
    lead = term
    terms = [term]
    q = h * h
    k = 0
    while True:
        term *= -q / ((k + 1) * (k + 1 + m))
        k += 1
        terms.append(term)
        if k > h and abs(term) <= 1e-17 * abs(lead):
            break
    return math.fsum(terms)


def _bessel_miller(m: int, x: float) -> float:
    # Backward recurrence from an even start order, normalised with
    # J0 + 2 sum_k J_2k = 1.
    top = max(m, int(x))
    start = 2 * ((top + 20 + int(math.sqrt(40 * top))) // 2)
    j_next, j = 0.0, 1e-30
    norm = 0.0
    result = 0.0
    for k in range(start, 0, -1):
        j_next, j = j, (2 * k / x) * j - j_next  # j is now J_{k-1}
        if abs(j) > 1e250:
            j *= 1e-250
            j_next *= 1e-250
            norm *= 1e-250
            result *= 1e-250
        order = k - 1
        if order == m:
            result = j
        if order > 0 and order % 2 == 0:
            norm += 2 * j
    norm += j
    return result / norm


def bessel_j(m: int, x: float) -> float:
    """Bessel function of the first kind ``J_m(x)`` for integer ``0 <= m <= 60``, ``0 <= x <= 60``.

    Ascending series for ``x <= 12``, Miller backward recurrence above.
    Absolute error below 1e-12 on the whole domain.
    """
    if int(m) != m or not 0 <= m <= BESSEL_MAX_ORDER:
        raise DomainError(f"order must be an integer in [0, {BESSEL_MAX_ORDER}], got {m!r}")
    if not 0 <= x <= BESSEL_MAX_ARG:
        raise DomainError(f"argument must lie in [0, {BESSEL_MAX_ARG}], got {x!r}")
    m = int(m)
    x = float(x)
    if x == 0.0:
        return 1.0 if m == 0 else 0.0
    if x <= _SERIES_SWITCH:
        return _bessel_series(m, x)
    return _bessel_miller(m, x)


# -- resonance ------------------------------------------------------------------

def resonance_positions(g: float, m_max: int, omega: float = 1.0) -> list[float]:
    """Drive amplitudes ``m omega^2 / (4 g)`` for ``m = 1..m_max``."""
    if g <= 0:
        warnings.warn("g = 0: no resonances", RuntimeWarning, stacklevel=2)
        return []
    return [m * omega**2 / (4 * g) for m in range(1, m_max + 1)]


def resonance_order(params: ModelParams, rtol: float = RESONANCE_RTOL) -> int | None:
    """Integer ``m`` with ``Omega_p = m omega^2/(4g)`` within ``rtol``, else None."""
    ratio = 4 * params.g * params.drive.amplitude / params.omega**2
    if ratio == 0:
        return 0
    m = round(ratio)
    if m >= 1 and abs(ratio - m) <= rtol * max(1.0, m):
        return int(m)
    return None


def mean_value_resonant(params: ModelParams) -> float:
    """Infinite-time mean of ``<sigma_z>``: ``-exp(-2g^2/omega^2) J_m(m)`` on resonance, else 0."""
    cf = closed_form_params(params)
    m = resonance_order(params)
    if m is None:
        return 0.0
    return -cf.prefactor * bessel_j(m, m)


def finite_time_mean_closed(params: ModelParams, t_l: float, panel: float = 0.25, order: int = 24) -> float:
    """``(1/T_L) * int_0^T_L <sigma_z(t)> dt`` of the closed form.

    Composite Gauss-Legendre on panels of length ``<= panel``; the integrand
    is entire, so the default rule is accurate far below 1e-10.
    """
    if not t_l > 0:
        raise ValueError("T_L must be positive")
    cf = closed_form_params(params)
    rate = max(1.0, cf.eta + cf.xi)
    n_panels = max(1, math.ceil(t_l * rate / panel))
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, t_l, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = mid[:, None] + half[:, None] * x[None, :]
    vals = closed_sigma_z_photon(params, nodes)
    return float(np.sum(half[:, None] * w[None, :] * vals) / t_l)


def energy_gap(m: int, g: float, omega_p: float, omega: float = 1.0) -> float:
    """``E+ - E- = omega m - 4 Omega_p g / omega``."""
    if int(m) != m or m < 1:
        raise DomainError("m must be an integer ≥ 1")
    return omega * m - 4 * omega_p * g / omega


def rabi_period(g: float, omega_p: float, omega: float = 1.0) -> float:
    """``pi omega / (2 g Omega_p)``; ``inf`` when there is no oscillation."""
    if g <= 0 or omega_p <= 0:
        return math.inf
    return math.pi * omega / (2 * g * omega_p)


def peak_difference(m: int, i: int) -> float:
    """``J_{m+i}(m+i) - J_m(m)``."""
    return bessel_j(m + i, m + i) - bessel_j(m, m)


def estimate_coupling(m_m: float, m_mi: float, m: int, i: int) -> float:
    """Recover ``g/omega`` from the long-time means at resonances ``m`` and ``m+i``.

    ``r = (M_m - M_{m+i}) / (J_{m+i}(m+i) - J_m(m))`` equals
    ``exp(-2 g^2/omega^2)``, hence ``g/omega = sqrt(-ln(r)/2)``.
    """
    if int(m) != m or m < 1 or int(i) != i or i < 1:
        raise DomainError("m and i must be integers ≥ 1")
    r = (m_m - m_mi) / peak_difference(int(m), int(i))
    if not 0 < r <= 1:
        raise InconsistentMeasurementError(
            f"ratio {r:.6g} outside (0, 1]; means M_m={m_m!r}, M_m+i={m_mi!r} incompatible with the model"
        )
    return math.sqrt(-0.5 * math.log(r))
