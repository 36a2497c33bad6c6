import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinboson import analytic
from spinboson.errors import ValidationError
from spinboson.experiments import (
    amplitude_scan,
    coupling_estimation_experiment,
    default_grid,
    derive_seed,
    detect_peaks,
    dynamics_experiment,
    make_initial,
    lineshape_kernels,
    random_initial_state,
    resonance_windows,
    risetime_scan,
)
from spinboson.fock import MINUS, PLUS
from spinboson.model import DriveSpec, ModelParams, NumericsConfig

P08 = math.exp(-0.08)


# -- peak detection ---------------------------------------------------------------------

def test_detect_synthetic_spikes():
    grid = np.linspace(1.0, 4.0, 31)
    vals = np.full(31, 0.01)
    vals[[10, 20]] = [-0.4, -0.3]
    peaks = detect_peaks(vals, grid, g=0.2)
    assert [p.position for p in peaks] == [grid[10], grid[20]]
    assert [p.height for p in peaks] == [-0.4, -0.3]


def test_detect_monotone_ramp_is_empty():
    grid = np.linspace(0.5, 4.0, 50)
    assert detect_peaks(np.linspace(0.0, -0.5, 50), grid, g=0.2) == []


def test_detect_roundoff_signal_is_empty():
    rng = np.random.default_rng(0)
    grid = default_grid(4.0, 0.01, 0.1)
    assert detect_peaks(1e-15 * rng.normal(size=grid.size), grid, g=0.2) == []


def test_detect_ignores_undriven_limit():
    grid = default_grid(2.0)
    vals = np.zeros(grid.size)
    vals[1] = -0.9  # order 0
    vals[125] = -0.1
    peaks = detect_peaks(vals, grid, g=0.2)
    assert [(p.position, p.m) for p in peaks] == [(1.25, 1)]


def test_detect_needs_three_points():
    with pytest.raises(ValueError):
        detect_peaks([0.1, 0.2], [1.0, 2.0], g=0.2)


def _dispersive_line(phase, grid, centre=1.25, g=0.2, t_l=50 * math.pi):
    re, im = lineshape_kernels(4 * g * (grid - centre) * t_l)
    return np.real(0.1 * np.exp(1j * phase) * (re + 1j * im))


def test_lineshape_kernels_limit():
    re, im = lineshape_kernels(np.array([0.0, 1e-13, 2 * math.pi]))
    assert re.tolist()[:2] == [1.0, 1.0] and im.tolist()[:2] == [0.0, 0.0]
    assert abs(re[2]) < 1e-15 and abs(im[2]) < 1e-15


@pytest.mark.parametrize("phase", np.linspace(0, 2 * math.pi, 24, endpoint=False))
def test_matched_detector_centres_dispersive_line(phase):
    grid = default_grid(1.6, 0.01, 0.9)
    vals = _dispersive_line(phase, grid)
    found = detect_peaks(vals, grid, 0.2, threshold=0.1, detector="matched")
    assert [p.position for p in found] == [1.25]


def test_magnitude_detector_misses_dispersive_centre():
    grid = default_grid(1.6, 0.01, 0.9)
    vals = _dispersive_line(0.5 * math.pi, grid)
    assert 1.25 not in [p.position for p in detect_peaks(vals, grid, 0.2)]


def test_matched_detector_one_peak_per_order():
    grid = default_grid(4.0)
    vals = sum(_dispersive_line(ph, grid, c) for ph, c in [(0.3, 1.25), (2.0, 2.5), (4.0, 3.75)])
    found = detect_peaks(vals, grid, 0.2, threshold=0.1, detector="matched")
    assert [(p.position, p.m) for p in found] == [(1.25, 1), (2.5, 2), (3.75, 3)]


def test_unknown_detector():
    with pytest.raises(ValueError):
        detect_peaks([0.0, 1.0, 0.0], [1.0, 1.25, 1.5], 0.2, detector="wavelet")


@settings(max_examples=50)
@given(pos=st.lists(st.integers(5, 390), min_size=1, max_size=4, unique=True),
       scale=st.floats(1e-2, 1.0))
def test_detected_peaks_lie_on_grid_with_order(pos, scale):
    grid = default_grid()
    vals = np.zeros(grid.size)
    vals[pos] = -scale
    for p in detect_peaks(vals, grid, 0.2, threshold=0.0):
        assert p.position in grid
        assert p.m == round(0.8 * p.position)
        assert abs(0.8 * p.position - p.m) <= 0.5


# -- random initial states ----------------------------------------------------------------

def test_random_state_deterministic():
    a = random_initial_state(42, n_max=20)
    b = random_initial_state(42, n_max=20)
    assert np.array_equal(a.amplitudes, b.amplitudes)
    assert not np.array_equal(a.amplitudes, random_initial_state(43, n_max=20).amplitudes)


def test_random_state_norm_and_support():
    s = random_initial_state(7, n_max=20)
    assert abs(s.norm - 1) <= 1e-12
    assert np.all(s.amplitudes[12:] == 0)
    assert np.all(np.abs(s.amplitudes[:12]) > 0)


def test_random_state_sigma_x_components():
    s = random_initial_state(3)
    amp = s.amplitudes.reshape(-1, 2)
    c_plus, c_minus = amp @ PLUS, amp @ MINUS
    rng = np.random.default_rng(3)
    mag, ph = rng.random((6, 2)), rng.random((6, 2))
    ref = mag * np.exp(2j * np.pi * ph)
    ref /= np.linalg.norm(ref)
    assert np.allclose(c_plus, ref[:, 0], atol=1e-14)
    assert np.allclose(c_minus, ref[:, 1], atol=1e-14)


def test_random_state_cutoff_too_small():
    with pytest.raises(ValidationError):
        random_initial_state(1, n_cut=5, n_max=4)


def test_seed_derivation():
    a = derive_seed(0, "random-initial-state", 0)
    assert a == derive_seed(0, "random-initial-state", 0)
    assert len({a, derive_seed(0, "random-initial-state", 1), derive_seed(1, "random-initial-state", 0),
                derive_seed(0, "other", 0)}) == 4


def test_make_initial_selector():
    p = ModelParams(0.2, 0.0, DriveSpec.photon(1.0))
    with pytest.raises(ValidationError):
        make_initial(p, 30, "thermal")


# -- scans ------------------------------------------------------------------------------------

def test_default_grid_exact_lattice():
    grid = default_grid()
    assert grid.size == 401 and grid[125] == 1.25 and grid[375] == 3.75


def test_dynamics_experiment_metadata():
    s = dynamics_experiment(ModelParams(0.2, 0.0, DriveSpec.photon(1.25)), NumericsConfig(dt=0.01, t_end=10.0))
    assert s.metadata["experiment"]["name"] == "dynamics"
    assert s.sigma_z[0] == pytest.approx(-P08, abs=1e-12)


def test_small_scan_peak_and_metadata():
    p = ModelParams(0.2, 0.0, DriveSpec.photon(0.0))
    scan = amplitude_scan(p, default_grid(1.35, 0.01, 1.15))
    assert scan.peak_positions == [1.25] and scan.peaks[0].m == 1
    assert scan.peaks[0].height == pytest.approx(-0.40622, abs=2e-3)
    assert not scan.degraded
    assert scan.metadata["experiment"]["threshold"] == 0.25
    assert [a for a, _ in scan.metadata["experiment"]["convergence"]] == [1.15, 1.35]


def test_scan_order_independent_of_jobs():
    p = ModelParams(0.2, 0.0, DriveSpec.photon(0.0))
    grid = default_grid(1.3, 0.01, 1.2)
    cfg = NumericsConfig(dt=0.05, t_end=20.0)
    serial = amplitude_scan(p, grid, 20.0, cfg=cfg, verify="none")
    pooled = amplitude_scan(p, grid, 20.0, cfg=cfg, verify="none", jobs=2)
    assert np.array_equal(serial.means, pooled.means)


def test_scan_flags_degraded_points():
    p = ModelParams(0.2, 0.0, DriveSpec.photon(0.0))
    cfg = NumericsConfig(n_max=4, dt=0.05, t_end=20.0)
    scan = amplitude_scan(p, [3.7, 3.75, 3.8], 20.0, cfg=cfg)
    assert scan.degraded and scan.failed_points == [3.7, 3.8]


def test_scan_rejects_bad_grid():
    p = ModelParams(0.2, 0.0, DriveSpec.photon(0.0))
    with pytest.raises(ValidationError):
        amplitude_scan(p, [1.0, 0.9])


def test_midpoint_suppression_small_grid():
    p = ModelParams(0.2, 0.0, DriveSpec.photon(0.0))
    scan = amplitude_scan(p, [1.25, 1.875, 2.5], verify="none")
    near = scan.means[[0, 2]]
    assert abs(scan.means[1]) <= 0.1 * np.min(np.abs(near))


@pytest.mark.slow
def test_scaling_law_weaker_coupling():
    p = ModelParams(0.1, 0.0, DriveSpec.photon(0.0))
    grid = np.union1d(resonance_windows(0.1, (1, 2)), resonance_windows(0.2, (1, 3)))
    scan = amplitude_scan(p, grid, verify="none")
    assert scan.peak_positions == pytest.approx([2.5, 5.0], abs=0.01)
    for peak in scan.peaks:
        assert abs(analytic.energy_gap(peak.m, 0.1, peak.position)) <= 0.01 * 4 * 0.1


def test_gap_correspondence_at_peaks():
    p = ModelParams(0.2, 0.0, DriveSpec.photon(0.0))
    scan = amplitude_scan(p, resonance_windows(0.2, (1, 2), half_width=4), verify="none")
    assert [pk.m for pk in scan.peaks] == [1, 2]
    for pk in scan.peaks:
        assert abs(analytic.energy_gap(pk.m, 0.2, pk.position)) <= 0.01 * 4 * 0.2


def test_resonance_windows_grid():
    grid = resonance_windows(0.2, (1, 2), half_width=2)
    assert grid.tolist() == [1.23, 1.24, 1.25, 1.26, 1.27, 2.48, 2.49, 2.5, 2.51, 2.52]


# -- rise time --------------------------------------------------------------------------------

def test_risetime_tiny_ramp_matches_unramped_peak():
    p = ModelParams(0.2, 0.0, DriveSpec.photon(0.0))
    scan = risetime_scan(p, (1,), (0.0, 1e-3), cfg=NumericsConfig(dt=1e-3))
    a, b = scan.magnitudes[1]
    assert abs(a - b) <= 1e-4
    assert scan.means[1][0] == pytest.approx(-P08 * analytic.bessel_j(1, 1), abs=2e-4)


def test_risetime_long_ramp_weakens_resonance():
    p = ModelParams(0.2, 0.0, DriveSpec.photon(0.0))
    cfg = NumericsConfig(dt=1e-2)
    first = risetime_scan(p, (1,), (0.0, 10.0), cfg=cfg)
    second = risetime_scan(p, (1,), (0.0, 10.0), cfg=cfg)
    mags = first.magnitudes[1]
    assert mags[1] < mags[0]
    assert np.array_equal(first.means[1], second.means[1])


def test_risetime_needs_coupling():
    with pytest.raises(ValidationError):
        risetime_scan(ModelParams(0.0, 0.0, DriveSpec.photon(0.0)), (1,), (0.0,))


# -- coupling estimation ----------------------------------------------------------------------

def test_coupling_estimation_roundtrip_small():
    est = coupling_estimation_experiment(ModelParams(0.2, 0.0, DriveSpec.photon(0.0)))
    assert not est.failed
    assert est.relative_error <= 0.01


def test_coupling_estimation_atom_drive_fails():
    p = ModelParams(0.2, 0.0, DriveSpec.atom(0.0))
    est = coupling_estimation_experiment(p, grid=default_grid(2.6, 0.05, 0.1))
    assert est.failed and est.g_estimated is None and "no peak" in est.reason
