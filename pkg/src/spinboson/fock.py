"""Operators and states on the truncated Fock (x) spin space.

Basis convention: full-space index ``2*N + s`` with ``N = 0..n_max`` the
photon number and ``s = 0`` for spin up (sigma_z = +1), ``s = 1`` for spin
down. A full-space operator is therefore ``np.kron(boson_op, spin_op)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, TruncationError
from .model import DriveKind, ModelParams

SPIN_UP = np.array([1.0, 0.0])
SPIN_DOWN = np.array([0.0, 1.0])
#: sigma_x eigenstates |+>, |->
PLUS = np.array([1.0, 1.0]) / math.sqrt(2.0)
MINUS = np.array([1.0, -1.0]) / math.sqrt(2.0)


class DegenerateGroundStateWarning(UserWarning):
    """Numerical ground state is degenerate; fell back to the polaron state."""


@dataclass(frozen=True)
class OperatorMatrix:
    entries: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        arr = np.array(self.entries)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"operator must be square, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)
        if self.hermitian and not np.array_equal(arr, arr.conj().T):
            raise ValueError("hermitian flag set on a non-Hermitian matrix")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            return OperatorMatrix(self.entries @ other.entries)
        if isinstance(other, StateVector):
            return StateVector(self.entries @ other.amplitudes, other.spin)
        return NotImplemented

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.entries.conj().T, self.hermitian)


@dataclass(frozen=True)
class StateVector:
    """Amplitudes on the full space (``spin=True``) or the boson mode alone."""

    amplitudes: np.ndarray
    spin: bool = True

    def __post_init__(self):
        arr = np.array(self.amplitudes, dtype=complex)
        if arr.ndim != 1:
            raise ValueError("state amplitudes must be one-dimensional")
        if self.spin and arr.size % 2:
            raise ValueError("full-space state must have even dimension")
        arr.setflags(write=False)
        object.__setattr__(self, "amplitudes", arr)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def n_max(self) -> int:
        return self.dim // 2 - 1 if self.spin else self.dim - 1

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        return StateVector(self.amplitudes / self.norm, self.spin)

    def padded(self, n_max: int) -> "StateVector":
        """Embed into a larger cutoff by zero-filling the new levels."""
        per_level = 2 if self.spin else 1
        new = np.zeros(per_level * (n_max + 1), dtype=complex)
        if new.size < self.dim:
            raise ValueError("padded() cannot shrink a state")
        new[: self.dim] = self.amplitudes
        return StateVector(new, self.spin)


def _check_cutoff(n_max: int) -> None:
    if int(n_max) != n_max or n_max < 1:
        raise DomainError(f"n_max must be an integer ≥ 1, got {n_max!r}")


# -- ladder and spin operators -----------------------------------------------

def annihilation(n_max: int) -> OperatorMatrix:
    _check_cutoff(n_max)
    return OperatorMatrix(np.diag(np.sqrt(np.arange(1.0, n_max + 1)), 1))


def creation(n_max: int) -> OperatorMatrix:
    _check_cutoff(n_max)
    return OperatorMatrix(np.diag(np.sqrt(np.arange(1.0, n_max + 1)), -1))


def number(n_max: int) -> OperatorMatrix:
    _check_cutoff(n_max)
    return OperatorMatrix(np.diag(np.arange(n_max + 1.0)), hermitian=True)


def quadrature(n_max: int) -> OperatorMatrix:
    """``a + a^dag``."""
    off = np.diag(np.sqrt(np.arange(1.0, n_max + 1)), 1)
    return OperatorMatrix(off + off.T, hermitian=True)


sigma_x = OperatorMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]), hermitian=True)
sigma_z = OperatorMatrix(np.array([[1.0, 0.0], [0.0, -1.0]]), hermitian=True)
sigma_plus = OperatorMatrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
sigma_minus = OperatorMatrix(np.array([[0.0, 0.0], [1.0, 0.0]]))
spin_identity = OperatorMatrix(np.eye(2), hermitian=True)


def on_full(boson_op: OperatorMatrix | None, spin_op: OperatorMatrix | None, n_max: int) -> OperatorMatrix:
    """Tensor a boson operator with a spin operator; ``None`` means identity."""
    b = np.eye(n_max + 1) if boson_op is None else boson_op.entries
    s = np.eye(2) if spin_op is None else spin_op.entries
    herm = (boson_op is None or boson_op.hermitian) and (spin_op is None or spin_op.hermitian)
    return OperatorMatrix(np.kron(b, s), hermitian=herm)


def sigma_z_full(n_max: int) -> OperatorMatrix:
    return on_full(None, sigma_z, n_max)


def sigma_x_full(n_max: int) -> OperatorMatrix:
    return on_full(None, sigma_x, n_max)


# -- displacement and coherent states ------------------------------------------

def displacement(z: complex, n_max: int) -> OperatorMatrix:
    """``exp(z a^dag - z* a)`` on the truncated mode.

    The anti-Hermitian generator is written as ``-i K`` with Hermitian
    ``K = i (z a^dag - z* a)`` and exponentiated through ``eigh(K)``.
    """
    _check_cutoff(n_max)
    a = annihilation(n_max).entries
    k = 1j * (z * a.T - np.conj(z) * a)
    lam, w = np.linalg.eigh(k)
    return OperatorMatrix((w * np.exp(-1j * lam)) @ w.conj().T)


def coherent_state(z: complex, n_max: int) -> StateVector:
    """Truncated, renormalised coherent state ``|z>`` of the boson mode."""
    _check_cutoff(n_max)
    r = abs(z)
    if n_max < r * r + 8 * r:
        raise TruncationError(
            f"n_max={n_max} inadequate for coherent label |z|={r:.4g}; need ≥ {r * r + 8 * r:.1f}"
        )
    amp = np.empty(n_max + 1, dtype=complex)
    amp[0] = math.exp(-0.5 * r * r)
    for n in range(1, n_max + 1):
        amp[n] = amp[n - 1] * z / math.sqrt(n)
    return StateVector(amp / np.linalg.norm(amp), spin=False)


def fock_state(n: int, n_max: int, spin_vec=None) -> StateVector:
    """``|n>`` on the mode, or ``|n> (x) spin_vec`` when a spin vector is given."""
    if not 0 <= n <= n_max:
        raise DomainError(f"Fock level {n} outside 0..{n_max}")
    amp = np.zeros(n_max + 1, dtype=complex)
    amp[n] = 1.0
    if spin_vec is None:
        return StateVector(amp, spin=False)
    return product_state(StateVector(amp, spin=False), spin_vec)


def product_state(boson: StateVector, spin_vec) -> StateVector:
    return StateVector(np.kron(boson.amplitudes, np.asarray(spin_vec, dtype=complex)))


# -- Hamiltonian and initial states ----------------------------------------------

def build_hamiltonian(params: ModelParams, drive_value: float, n_max: int) -> OperatorMatrix:
    """Full driven spin-boson Hamiltonian at instantaneous amplitude ``drive_value``.

    ``omega a^dag a + eps/2 sigma_z + g sigma_x (a^dag + a)`` plus either
    ``drive_value (a^dag + a)`` (photon drive) or ``drive_value sigma_x``
    (atom drive). Real symmetric in this basis.
    """
    _check_cutoff(n_max)
    nb = np.arange(n_max + 1.0)
    x = quadrature(n_max).entries
    h = params.omega * np.kron(np.diag(nb), np.eye(2))
    h = h + 0.5 * params.epsilon * np.kron(np.eye(n_max + 1), sigma_z.entries)
    h = h + params.g * np.kron(x, sigma_x.entries)
    kind = params.drive.kind
    if kind is DriveKind.PHOTON:
        h = h + drive_value * np.kron(x, np.eye(2))
    elif kind is DriveKind.ATOM:
        h = h + drive_value * np.kron(np.eye(n_max + 1), sigma_x.entries)
    return OperatorMatrix(h, hermitian=True)


def polaron_ground_pair(params: ModelParams, n_max: int) -> tuple[StateVector, StateVector]:
    """``|G+-(0)> = D(-+ g/omega)|0> (x) |+->``, the undriven ground doublet at eps=0."""
    d = params.g / params.omega
    g_plus = product_state(coherent_state(-d, n_max), PLUS)
    g_minus = product_state(coherent_state(d, n_max), MINUS)
    return g_plus, g_minus


def polaron_superposition(params: ModelParams, n_max: int) -> StateVector:
    g_plus, g_minus = polaron_ground_pair(params, n_max)
    return StateVector((g_plus.amplitudes - g_minus.amplitudes) / math.sqrt(2.0))


def default_initial_state(params: ModelParams, n_max: int, ground_state: bool = False) -> StateVector:
    """Initial state for a run.

    Returns ``(|G+> - |G->)/sqrt(2)``. With ``ground_state=True`` and
    ``epsilon != 0`` the lowest eigenvector of the undriven Hamiltonian is
    returned instead; a degenerate spectrum falls back to the polaron
    superposition with a :class:`DegenerateGroundStateWarning`.
    """
    if not ground_state:
        return polaron_superposition(params, n_max)
    h = build_hamiltonian(params, 0.0, n_max).entries
    evals, evecs = np.linalg.eigh(h)
    if evals[1] - evals[0] < 1e-8:
        warnings.warn(
            f"undriven ground state degenerate (gap {evals[1] - evals[0]:.2e}); using polaron superposition",
            DegenerateGroundStateWarning,
            stacklevel=2,
        )
        return polaron_superposition(params, n_max)
    return StateVector(evecs[:, 0])


# -- inner products ----------------------------------------------------------

def overlap(s1: StateVector, s2: StateVector) -> complex:
    """``<s1|s2>``."""
    if s1.dim != s2.dim:
        raise ValueError(f"dimension mismatch: {s1.dim} vs {s2.dim}")
    return complex(np.vdot(s1.amplitudes, s2.amplitudes))


def expectation(op: OperatorMatrix, state: StateVector) -> float:
    if op.dim != state.dim:
        raise ValueError(f"dimension mismatch: operator {op.dim} vs state {state.dim}")
    if not op.hermitian:
        raise ValueError("expectation() requires a Hermitian operator")
    val = np.vdot(state.amplitudes, op.entries @ state.amplitudes)
    # quadratic form of a Hermitian matrix; residue is roundoff only
    assert abs(val.imag) <= 1e-12 * max(1.0, abs(val.real)), val
    return float(val.real)
