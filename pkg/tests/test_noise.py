import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import signal

from beatlock.noise import (DriftProfile, JitterProfile, NoiseSpec, RepRateTrajectory,
                            generate_trajectory, sample_fractional_noise, tooth_frequency)

from oracles import white_noise_variance

QUIET = JitterProfile()


# --- trajectories -----------------------------------------------------------------

def test_one_hz_per_minute_gives_ten_hz_in_ten_minutes():
    traj = generate_trajectory(DriftProfile(slope=1 / 60), QUIET, 600.0, 1.0, seed=0)
    assert traj.t[-1] == 600.0
    assert traj.nu_rep[-1] - traj.nu_rep[0] == pytest.approx(10.0, abs=1e-6)


def test_all_zero_profile_is_constant():
    traj = generate_trajectory(DriftProfile(nu_rep0=80.6e6, slope=0.0), QUIET, 10.0, 0.5, seed=3)
    assert np.all(traj.nu_rep == 80.6e6)
    assert traj.t.size == 21


def test_temperature_component_is_sinusoidal():
    drift = DriftProfile(slope=0.0, temp_amplitude=2.0, temp_period=100.0)
    traj = generate_trajectory(drift, QUIET, 100.0, 25.0, seed=0)
    np.testing.assert_allclose(traj.nu_rep - drift.nu_rep0, [0, 2, 0, -2, 0], atol=1e-6)


def test_random_walk_variance_grows_linearly():
    d = 0.3
    drift = DriftProfile(slope=0.0, random_walk_density=d)
    ends = np.array([generate_trajectory(drift, QUIET, 50.0, 1.0, seed=s).nu_rep
                     for s in range(10_000)])
    var = (ends - drift.nu_rep0).var(axis=0)
    t = np.arange(51.0)
    slope = np.polyfit(t, var, 1)[0]
    assert slope == pytest.approx(d ** 2, rel=0.10)


def test_jitter_psd_is_white_within_band():
    h, band = 0.5, 1e3
    dt = 1 / (2 * band)
    traj = generate_trajectory(DriftProfile(slope=0.0), JitterProfile(h, band), 200.0, dt, seed=9)
    f, p = signal.welch(traj.nu_rep - traj.nu_rep.mean(), fs=1 / dt, nperseg=1024)
    sel = (f > 10) & (f < 0.8 * band)
    assert 10 * np.log10(p[sel].mean()) == pytest.approx(10 * math.log10(h ** 2), abs=0.5)


def test_dt_too_coarse_for_jitter_raises_aliasing_error():
    with pytest.raises(ValueError, match="aliases"):
        generate_trajectory(DriftProfile(), JitterProfile(0.1, 10e3), 1.0, 1e-4, seed=0)
    # without jitter the bandwidth is irrelevant
    generate_trajectory(DriftProfile(), JitterProfile(0.0, 10e3), 3600.0, 120.0, seed=0)


@pytest.mark.parametrize("duration,dt", [(1.0, 0.0), (0.5, 1.0)])
def test_trajectory_preconditions(duration, dt):
    with pytest.raises(ValueError):
        generate_trajectory(DriftProfile(), QUIET, duration, dt, seed=0)


def test_trajectory_determinism():
    drift = DriftProfile(random_walk_density=0.1, temp_amplitude=1.0)
    jitter = JitterProfile(0.05, 100.0)
    a = generate_trajectory(drift, jitter, 2.0, 1e-3, seed=11)
    b = generate_trajectory(drift, jitter, 2.0, 1e-3, seed=11)
    c = generate_trajectory(drift, jitter, 2.0, 1e-3, seed=12)
    assert a.nu_rep.tobytes() == b.nu_rep.tobytes()
    assert not np.array_equal(a.nu_rep, c.nu_rep)


def test_trajectory_invariants():
    with pytest.raises(ValueError, match="increasing"):
        RepRateTrajectory([0.0, 0.0], [1.0, 1.0])
    with pytest.raises(ValueError, match="uniform"):
        RepRateTrajectory([0.0, 1.0, 3.0], [1.0, 1.0, 1.0])
    with pytest.raises(ValueError, match="positive"):
        RepRateTrajectory([0.0, 1.0], [1.0, -1.0])
    traj = RepRateTrajectory.constant(80e6, 1.0, 0.5)
    with pytest.raises(ValueError):
        traj.nu_rep[0] = 1.0


@pytest.mark.parametrize("kwargs", [
    dict(temp_amplitude=1.0, temp_period=0.0),
    dict(random_walk_density=-1.0),
    dict(slope=math.inf),
    dict(nu_rep0=0.0),
])
def test_drift_profile_invariants(kwargs):
    with pytest.raises(ValueError):
        DriftProfile(**kwargs)


@pytest.mark.parametrize("kwargs", [dict(white_freq_density=-1.0), dict(bandwidth=0.0)])
def test_jitter_profile_invariants(kwargs):
    with pytest.raises(ValueError):
        JitterProfile(**kwargs)


# --- tooth_frequency --------------------------------------------------------------

def test_tooth_157_drifts_157_hz_per_minute():
    traj = generate_trajectory(DriftProfile(slope=1 / 60), QUIET, 60.0, 1.0, seed=0)
    tooth = tooth_frequency(traj, 157)
    assert tooth[-1] - tooth[0] == pytest.approx(157.0, abs=1e-4)


def test_tooth_one_is_identity_and_constant_trajectory_scales():
    traj = generate_trajectory(DriftProfile(temp_amplitude=3.0), QUIET, 100.0, 1.0, seed=0)
    assert np.array_equal(tooth_frequency(traj, 1), traj.nu_rep)
    const = RepRateTrajectory.constant(80.6e6, 10.0, 1.0)
    assert np.all(tooth_frequency(const, 157) == 157 * 80.6e6)
    with pytest.raises(ValueError):
        tooth_frequency(traj, 0)


@settings(max_examples=50)
@given(st.integers(1, 500), st.integers(1, 500), st.integers(0, 2 ** 32))
def test_tooth_frequency_linearity(m, k, seed):
    drift = DriftProfile(slope=0.3, random_walk_density=0.2)
    traj = generate_trajectory(drift, JitterProfile(0.01, 10.0), 5.0, 0.05, seed)
    lhs = tooth_frequency(traj, m + k)
    rhs = tooth_frequency(traj, m) + tooth_frequency(traj, k)
    np.testing.assert_allclose(lhs, rhs, rtol=4e-16 * 4, atol=0)


# --- fractional noise -------------------------------------------------------------

def test_flat_noise_variance_matches_nyquist_integral():
    x = sample_fractional_noise(NoiseSpec(-120.0), 1.0, 1e6, seed=1).samples
    assert x.size == 1_000_000
    assert x.var() == pytest.approx(white_noise_variance(-120.0, 1e6), rel=0.05)
    assert abs(x.mean()) < 5 * math.sqrt(x.var() / x.size)


def test_pll_shaped_variance_matches_integrated_psd():
    spec = NoiseSpec(-90.0, "pll_shaped", 1e3, -120.0)
    fs = 100e3
    x = sample_fractional_noise(spec, 20.0, fs, seed=2).samples
    expected = 1e-9 * 1e3 + 1e-12 * (fs / 2 - 1e3)
    assert x.var() == pytest.approx(expected, rel=0.05)


def test_disabled_noise_is_all_zero():
    out = sample_fractional_noise(NoiseSpec(), 0.01, 1e6, seed=1)
    assert out.samples.size == 10_000
    assert not np.any(out.samples)


def test_positive_alpha_is_flagged_not_rejected():
    out = sample_fractional_noise(NoiseSpec(3.0), 0.001, 1e6, seed=1)
    assert out.warnings and "alpha_db_per_hz" in out.warnings[0]
    assert not sample_fractional_noise(NoiseSpec(-3.0), 0.001, 1e6, seed=1).warnings


def test_pll_shaped_requires_sample_rate_above_twice_loop_bandwidth():
    with pytest.raises(ValueError, match="loop bandwidth"):
        sample_fractional_noise(NoiseSpec(-90.0, "pll_shaped", 1e3, -120.0), 1.0, 2e3, seed=0)


def test_pll_shaped_step_of_thirty_db():
    spec = NoiseSpec(-90.0, "pll_shaped", 1e3, -120.0)
    fs = 100e3
    x = sample_fractional_noise(spec, 10.0, fs, seed=3).samples
    f, p = signal.welch(x, fs=fs, nperseg=8192)
    inband = 10 * np.log10(p[(f > 100) & (f < 500)].mean())
    outband = 10 * np.log10(p[(f > 2e3) & (f < fs / 4)].mean())
    assert inband - outband == pytest.approx(30.0, abs=1.0)


@settings(max_examples=10, deadline=None)
@given(st.floats(-140.0, -60.0), st.sampled_from([1e4, 1e5, 1e6]), st.integers(0, 2 ** 32))
def test_flat_psd_fidelity_across_band(alpha, fs, seed):
    nperseg = 2048
    x = sample_fractional_noise(NoiseSpec(alpha), 200 * nperseg / fs, fs, seed).samples
    f, p = signal.welch(x, fs=fs, nperseg=nperseg)
    sel = (f >= fs / 1000) & (f <= fs / 4)
    level = 10 * np.log10(p[sel])
    assert np.all(np.abs(level - alpha) <= 2.0)


def test_noise_seed_determinism():
    spec = NoiseSpec(-100.0)
    a = sample_fractional_noise(spec, 0.01, 1e6, seed=5).samples
    b = sample_fractional_noise(spec, 0.01, 1e6, seed=5).samples
    assert a.tobytes() == b.tobytes()


# --- NoiseSpec ---------------------------------------------------------------------

def test_noise_spec_psd_shape():
    spec = NoiseSpec(-90.0, "pll_shaped", 1e3, -120.0)
    np.testing.assert_allclose(spec.psd_db([10.0, 999.0, 1e3, 1e5]), [-90, -90, -120, -120])
    assert NoiseSpec(-100.0).psd_db(5.0) == pytest.approx(-100.0)
    assert not NoiseSpec().enabled


@pytest.mark.parametrize("spec", [
    NoiseSpec(),
    NoiseSpec(-115.0),
    NoiseSpec(-90.0, "pll_shaped", 1e3, -120.0),
])
def test_noise_spec_dict_round_trip(spec):
    d = spec.to_dict()
    assert set(d) == {"alpha_db_per_hz", "shape", "loop_bandwidth_hz", "floor_db_per_hz"}
    assert NoiseSpec.from_dict(d) == spec


@pytest.mark.parametrize("kwargs", [
    dict(alpha_db_per_hz=math.nan),
    dict(alpha_db_per_hz=-90.0, shape="pink"),
    dict(alpha_db_per_hz=-90.0, shape="pll_shaped", loop_bandwidth=0.0, out_of_band_floor=-120.0),
    dict(alpha_db_per_hz=-90.0, shape="pll_shaped", loop_bandwidth=1e3),
])
def test_noise_spec_invariants(kwargs):
    with pytest.raises(ValueError):
        NoiseSpec(**kwargs)
