"""Numerical propagation of the driven spin-boson model in the truncated space.

Constant drives use the exact eigendecomposition propagator. Ramped drives
use the midpoint exponential rule: each step ``[t, t+dt]`` applies
``exp(-i H(Omega(t + dt/2)) dt)``, and once the ramp has saturated the
remaining evolution switches to the exact propagator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Union

import numpy as np
import scipy.sparse as sp

from . import fock
from .errors import NumericalError, ValidationError
from .fock import StateVector
from .model import (
    ModelParams,
    NumericsConfig,
    effective_amplitude,
    params_to_dict,
    require_valid,
    resolve_truncation,
)

InitialState = Union[StateVector, Callable[[int], StateVector]]

_CHUNK = 2048
_NEGLIGIBLE = 1e-15


@dataclass(frozen=True)
class TimeSeries:
    t: np.ndarray
    sigma_z: np.ndarray
    sigma_x: np.ndarray
    norm: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return self.t.size


@dataclass(frozen=True)
class PropagatorBundle:
    """Eigen-decomposition of a constant Hamiltonian, ``H = V diag(E) V^dag``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @classmethod
    def from_operator(cls, op: fock.OperatorMatrix) -> "PropagatorBundle":
        try:
            evals, evecs = np.linalg.eigh(op.entries)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"diagonalization failed for dim {op.dim}: {exc}") from exc
        return cls(evals, evecs)

    @classmethod
    def for_params(cls, params: ModelParams, drive_value: float, n_max: int) -> "PropagatorBundle":
        try:
            return cls.from_operator(fock.build_hamiltonian(params, drive_value, n_max))
        except NumericalError as exc:
            raise NumericalError(f"{exc} (params={params}, drive={drive_value}, n_max={n_max})") from exc

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def propagate(self, state: StateVector, t: float) -> StateVector:
        """``exp(-i H t) |state>``; negative ``t`` runs backwards."""
        v = self.eigenvectors
        c = v.conj().T @ state.amplitudes
        return StateVector(v @ (np.exp(-1j * self.eigenvalues * t) * c))

    def states(self, psi0: np.ndarray, times: np.ndarray) -> np.ndarray:
        """Columns ``exp(-i H t_k) psi0``."""
        v = self.eigenvectors
        c = v.conj().T @ psi0
        return v @ (np.exp(-1j * np.outer(self.eigenvalues, times)) * c[:, None])

    def observables(self, psi0: np.ndarray, times: np.ndarray):
        """``(sigma_z, sigma_x, norm)`` at each time, evaluated in chunks."""
        v = self.eigenvectors
        c = v.conj().T @ psi0
        keep = np.abs(c) > _NEGLIGIBLE * np.abs(c).max()
        v, c, e = v[:, keep], c[keep], self.eigenvalues[keep]
        real_basis = not np.iscomplexobj(v)
        sz = np.empty(times.size)
        sx = np.empty(times.size)
        nrm = np.empty(times.size)
        cr, ci = c.real[:, None], c.imag[:, None]
        for lo in range(0, times.size, _CHUNK):
            tt = times[lo : lo + _CHUNK]
            if real_basis:
                # contiguous real factors keep both products on BLAS
                ph = np.outer(e, tt)
                cs, sn = np.cos(ph), np.sin(ph)
                re, im = v @ (cr * cs + ci * sn), v @ (ci * cs - cr * sn)
            else:
                psi = v @ (np.exp(-1j * np.outer(e, tt)) * c[:, None])
                re, im = psi.real, psi.imag
            sz[lo : lo + tt.size], sx[lo : lo + tt.size], nrm[lo : lo + tt.size] = _spin_moments(re, im)
        return sz, sx, nrm


def _spin_moments(re: np.ndarray, im: np.ndarray):
    """Spin expectations of column states given real and imaginary parts."""
    prob = re * re + im * im
    up, down = prob[0::2], prob[1::2]
    total = up.sum(axis=0) + down.sum(axis=0)
    sz = up.sum(axis=0) - down.sum(axis=0)
    sx = 2.0 * (re[0::2] * re[1::2] + im[0::2] * im[1::2]).sum(axis=0)
    return sz, sx, np.sqrt(total)


def sample_times(cfg: NumericsConfig) -> tuple[np.ndarray, float]:
    """Uniform step grid ending exactly at ``t_end`` and the effective step."""
    n = max(1, math.ceil(cfg.t_end / cfg.dt - 1e-9))
    return np.linspace(0.0, cfg.t_end, n + 1), cfg.t_end / n


def _resolve_initial(initial: InitialState, n_max: int | None = None) -> StateVector:
    if isinstance(initial, StateVector):
        if n_max is None or n_max == initial.n_max:
            return initial
        return initial.padded(n_max)
    if n_max is None:
        raise ValueError("a state factory needs an explicit n_max")
    return initial(n_max)


def _metadata(params, cfg, n_max, dt_eff, method):
    meta = params_to_dict(params, cfg)
    meta["run"] = {"n_max": n_max, "dt_effective": dt_eff, "propagator": method}
    return meta


def _check_inputs(params, initial, cfg):
    require_valid(params, cfg)
    if not initial.spin:
        raise ValidationError(["initial state must live on the full Fock (x) spin space"])
    if abs(initial.norm - 1.0) > 1e-10:
        raise ValidationError([f"initial state norm {initial.norm!r} differs from 1"])


def evolve_constant(params: ModelParams, initial: StateVector, cfg: NumericsConfig) -> TimeSeries:
    """Exact propagation for an instantaneously switched drive.

    The Fock cutoff is that of ``initial``.
    """
    _check_inputs(params, initial, cfg)
    if params.drive.ramp.rise_time > 0:
        raise ValidationError(["evolve_constant requires rise time 0; use evolve_ramped"])
    t, dt_eff = sample_times(cfg)
    t = t[:: cfg.sample_stride]
    bundle = PropagatorBundle.for_params(params, params.drive.amplitude, initial.n_max)
    sz, sx, nrm = bundle.observables(initial.amplitudes, t)
    return TimeSeries(t, sz, sx, nrm, _metadata(params, cfg, initial.n_max, dt_eff, "eigendecomposition"))


class _StepExponential:
    """``exp(-i (H0 + w B) dt) psi`` for banded real-symmetric ``H0`` and ``B``.

    Taylor series summed to machine precision on sub-steps with
    ``||H h||_1 <= 0.5``, so each step is the exact exponential to roundoff.
    """

    def __init__(self, h0: np.ndarray, b: np.ndarray):
        self.h0 = sp.csr_matrix(h0)
        self.b = sp.csr_matrix(b)
        self.h0_norm = np.abs(h0).sum(axis=0).max()
        self.b_norm = np.abs(b).sum(axis=0).max()

    def __call__(self, psi: np.ndarray, w: float, dt: float) -> np.ndarray:
        h = self.h0 + w * self.b
        bound = (self.h0_norm + abs(w) * self.b_norm) * dt
        n_sub = max(1, math.ceil(bound / 0.5))
        h_step = dt / n_sub
        for _ in range(n_sub):
            term = psi
            out = psi.copy()
            for j in range(1, 60):
                term = (-1j * h_step / j) * (h @ term)
                out += term
                if np.abs(term).max() < 1e-18:
                    break
            psi = out
        return psi


def evolve_ramped(params: ModelParams, initial: StateVector, cfg: NumericsConfig) -> TimeSeries:
    """Propagation through the linear switch-on ramp, then exactly at full drive."""
    _check_inputs(params, initial, cfg)
    tc = params.drive.ramp.rise_time
    if not tc > 0:
        raise ValidationError(["evolve_ramped requires a positive rise time"])
    n_max = initial.n_max
    t, dt_eff = sample_times(cfg)
    h0 = fock.build_hamiltonian(params, 0.0, n_max).entries
    b = fock.build_hamiltonian(params, 1.0, n_max).entries - h0
    step = _StepExponential(h0, b)

    keep = np.zeros(t.size, dtype=bool)
    keep[:: cfg.sample_stride] = True
    sz = np.empty(t.size)
    sx = np.empty(t.size)
    nrm = np.empty(t.size)

    psi = np.array(initial.amplitudes)
    k = 0
    while True:
        if keep[k]:
            sz[k], sx[k], nrm[k] = (v[0] for v in _spin_moments(psi.real[:, None], psi.imag[:, None]))
        if k == t.size - 1 or t[k] >= tc:
            break
        mid = 0.5 * (t[k] + t[k + 1])
        psi = step(psi, effective_amplitude(params.drive, mid), t[k + 1] - t[k])
        k += 1

    if k < t.size - 1:
        bundle = PropagatorBundle.for_params(params, params.drive.amplitude, n_max)
        rest = np.flatnonzero(keep[k + 1 :]) + k + 1
        sz[rest], sx[rest], nrm[rest] = bundle.observables(psi, t[rest] - t[k])

    meta = _metadata(params, cfg, n_max, dt_eff, "midpoint-exponential+eigendecomposition")
    meta["run"]["ramp_steps"] = k
    return TimeSeries(t[keep], sz[keep], sx[keep], nrm[keep], meta)


def evolve(params: ModelParams, initial: StateVector, cfg: NumericsConfig) -> TimeSeries:
    """Dispatch to the constant or ramped propagator."""
    if params.drive.ramp.rise_time > 0 and params.drive.amplitude > 0:
        return evolve_ramped(params, initial, cfg)
    if params.drive.ramp.rise_time > 0:
        params = params.with_drive(type(params.drive)(params.drive.kind, 0.0))
    return evolve_constant(params, initial, cfg)


def mean_over_time(series: TimeSeries, t_l: float | None = None, values: np.ndarray | None = None) -> float:
    """Trapezoidal time average ``(1/T_L) int_0^T_L <sigma_z> dt``.

    ``values`` selects another sampled observable on the same grid.
    """
    t = series.t
    y = series.sigma_z if values is None else np.asarray(values)
    if t_l is None:
        t_l = float(t[-1])
    if not t_l > 0:
        raise ValueError("T_L must be positive")
    if t_l > t[-1] * (1 + 1e-12):
        raise ValueError(f"T_L={t_l} exceeds the series range (last sample {t[-1]})")
    n = int(np.searchsorted(t, t_l * (1 - 1e-12), side="right"))
    n = min(n, t.size)
    total = np.trapezoid(y[:n], t[:n])
    if n < t.size and t_l > t[n - 1]:
        # partial last interval, linear interpolation
        frac = (t_l - t[n - 1]) / (t[n] - t[n - 1])
        y_end = y[n - 1] + frac * (y[n] - y[n - 1])
        total += 0.5 * (y[n - 1] + y_end) * (t_l - t[n - 1])
    return float(total / t_l)


def time_average_exact(params: ModelParams, initial: StateVector, t_l: float) -> float:
    """Exact ``(1/T_L) int_0^T_L <sigma_z> dt`` in the eigenbasis (no quadrature).

    Constant drive only; used to cross-check :func:`mean_over_time`.
    """
    bundle = PropagatorBundle.for_params(params, params.drive.amplitude, initial.n_max)
    v = bundle.eigenvectors
    c = v.conj().T @ initial.amplitudes
    sign = np.tile([1.0, -1.0], v.shape[0] // 2)
    s = v.conj().T @ (sign[:, None] * v)
    de = bundle.eigenvalues[:, None] - bundle.eigenvalues[None, :]
    x = de * t_l
    small = np.abs(x) < 1e-8
    avg = np.where(small, 1.0 + 0.5j * x, (np.exp(1j * x) - 1.0) / (1j * np.where(small, 1.0, x)))
    return float(np.real(np.conj(c) @ (s * avg) @ c))


@dataclass(frozen=True)
class ConvergenceReport:
    max_deviation: float
    passed: bool
    n_max: int
    n_max_check: int
    tolerance: float


def convergence_check(params: ModelParams, initial: InitialState, cfg: NumericsConfig,
                      tolerance: float = 1e-8, n_max: int | None = None) -> ConvergenceReport:
    """Compare the ``sigma_z`` series at cutoff ``n_max`` and ``2 n_max``.

    ``initial`` is a state (zero-padded for the larger cutoff) or a factory
    ``n_max -> StateVector`` rebuilt at each cutoff.
    """
    if n_max is None:
        if isinstance(initial, StateVector):
            n_max = initial.n_max
        else:
            n_max = resolve_truncation(params, cfg)
    base = evolve(params, _resolve_initial(initial, n_max), cfg)
    wide = evolve(params, _resolve_initial(initial, 2 * n_max), cfg)
    dev = float(np.max(np.abs(base.sigma_z - wide.sigma_z)))
    return ConvergenceReport(dev, dev <= tolerance, n_max, 2 * n_max, tolerance)


@dataclass(frozen=True)
class StepAuditReport:
    max_deviation: float
    passed: bool
    dt: float
    suggested_dt: float
    tolerance: float


def step_size_audit(params: ModelParams, initial: StateVector, cfg: NumericsConfig,
                    tolerance: float = 1e-7) -> StepAuditReport:
    """Halve ``dt`` for a ramped run and compare ``sigma_z`` on the common samples.

    For a failing audit ``suggested_dt`` is the second-order extrapolation of
    the largest step meeting ``tolerance``.
    """
    coarse = evolve_ramped(params, initial, cfg)
    # halve the effective step so every coarse sample is also a fine one
    half = 0.5 * coarse.metadata["run"]["dt_effective"]
    fine = evolve_ramped(params, initial, replace(cfg, dt=half, sample_stride=2 * cfg.sample_stride))
    n = min(coarse.t.size, fine.t.size)
    if not np.allclose(coarse.t[:n], fine.t[:n], rtol=0, atol=1e-9):
        raise NumericalError("step audit grids do not align")
    dev = float(np.max(np.abs(coarse.sigma_z[:n] - fine.sigma_z[:n])))
    dt = coarse.metadata["run"]["dt_effective"]
    if dev <= tolerance:
        suggested = dt
    else:
        # error of the coarse run ~ (4/3) dev ~ C dt^2
        suggested = 0.9 * dt * math.sqrt(tolerance / dev)
    return StepAuditReport(dev, dev <= tolerance, dt, suggested, tolerance)
