"""Acceptance criteria, one test per criterion, at the contract tolerances.

Each test records a PASS/FAIL line (shown in the terminal summary under
"acceptance criteria") before asserting.
"""

import json
import math
import time

import numpy as np
import pytest

from beatlock.comb import (CombSpec, periodogram, rf_line_spectrum, synthesize_time_domain,
                           welch_spectrum)
from beatlock.lock import BeatNote, LockConfig, effective_beat, error_signal, required_nu_m2
from beatlock.noise import (DriftProfile, JitterProfile, NoiseSpec, RepRateTrajectory,
                            generate_trajectory, sample_fractional_noise, tooth_frequency)
from beatlock.qubit import (QubitSpec, Sideband, error_probability_mc, evolve, max_step,
                            raman_scan)
from beatlock.ramsey import RamseyConfig, calibrate_jitter, run_ramsey
from beatlock.scenario import bundled_scenarios, load_scenario, run_scenario

import oracles

pytestmark = pytest.mark.slow

N = 157
NU_REP = 80.6e6
NU_LO = 12.438e9
NU_AB = 12.642819e9
ROUND_OFF = 4 * np.spacing(NU_AB)  # a few ulp at the 12.6 GHz beat


def test_1_lock_invariance(acceptance):
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    nu_m2 = required_nu_m2(NU_AB, NU_LO)
    worst_locked = worst_unlocked = 0.0
    for case in range(100):
        drift = DriftProfile(NU_REP, rng.uniform(-2, 2), rng.uniform(0, 20), rng.uniform(1, 10),
                             rng.uniform(0, 5))
        jitter = JitterProfile(rng.uniform(0, 5), 1e3)
        traj = generate_trajectory(drift, jitter, 2.0, 5e-4, seed=case)
        cfg = LockConfig(mode=("direct", "pll")[case % 2])
        locked = error_signal(traj, cfg)
        beat = effective_beat(traj, locked, nu_m2, N)
        worst_locked = max(worst_locked, float(np.max(np.abs(beat.freq - (NU_LO + nu_m2)))))
        free = effective_beat(traj, locked.frozen_at_start(), nu_m2, N)
        dev = (free.freq - free.freq[0]) - N * (traj.nu_rep - traj.nu_rep[0])
        worst_unlocked = max(worst_unlocked, float(np.max(np.abs(dev))))
    elapsed = time.perf_counter() - start
    ok = worst_locked <= ROUND_OFF and worst_unlocked <= ROUND_OFF and elapsed < 10
    acceptance(1, "lock invariance", ok,
               f"max locked |nu_sb - (nu_LO+nu_M2)| = {worst_locked:.2e} Hz, unlocked deviation "
               f"vs n*dnu_rep off by {worst_unlocked:.2e} Hz (limit {ROUND_OFF:.1e}), "
               f"{elapsed:.2f} s")
    assert ok


def test_2_frequency_algebra(acceptance):
    traj = RepRateTrajectory.constant(NU_REP, 1.0, 1.0)
    drive = error_signal(traj, LockConfig(n=N, nu_LO=NU_LO))
    nu_m2 = required_nu_m2(NU_AB, NU_LO)
    beat = effective_beat(traj, drive, nu_m2, N)
    ok = (bool(np.all(drive.freq == 216.2e6)) and nu_m2 == 204.819e6
          and bool(np.all(beat.freq == NU_AB)) and NU_LO + nu_m2 == NU_AB)
    acceptance(2, "frequency algebra", ok,
               f"beat {float(drive.freq[0])!r} Hz, nu_M2 {nu_m2!r} Hz, "
               f"carrier {float(beat.freq[0])!r} Hz")
    assert ok


def test_3_error_law(acceptance):
    start = time.perf_counter()
    trials = 1000
    base = error_probability_mc(-115.0, 600e3, 1e-3, trials, seed=31)
    law = oracles.error_law(-115.0, 600e3, 1e-3)
    rel = base.epsilon / law - 1
    low_alpha = error_probability_mc(-125.0, 600e3, 1e-3, trials, seed=32)
    short = error_probability_mc(-115.0, 600e3, 1e-4, trials, seed=33)
    slow = error_probability_mc(-115.0, 60e3, 1e-3, trials, seed=34)
    ratios = {
        "alpha (x10)": (base.epsilon / low_alpha.epsilon, 10.0),
        "T (x10)": (base.epsilon / short.epsilon, 10.0),
        "Omega0 (x10)": (base.epsilon / slow.epsilon, 100.0),
    }
    elapsed = time.perf_counter() - start
    scaling_ok = all(abs(got / want - 1) <= 0.25 for got, want in ratios.values())
    ok = abs(rel) <= 0.25 and scaling_ok and elapsed < 300
    detail = ", ".join(f"{k} ratio {got:.2f} (want {want:.0f})" for k, (got, want) in ratios.items())
    acceptance(3, "error law", ok,
               f"eps = {base.epsilon:.4%} +/- {base.stderr:.4%} vs law {law:.4%} "
               f"({rel:+.1%}); {detail}; {elapsed:.1f} s")
    assert ok


def test_4_raman_background_and_peaks(acceptance):
    qubit = QubitSpec(NU_AB, 12.5e3, (Sideband(-5e6, 0.1), Sideband(5e6, 0.1)))
    pulse = 40e-6
    traj = RepRateTrajectory.constant(NU_REP, pulse + 1e-6, 1e-6)
    quiet = error_signal(traj, LockConfig(mode="direct", error_noise=NoiseSpec()))
    direct = error_signal(traj, LockConfig(mode="direct", error_noise=NoiseSpec(-90.0)))
    pll = error_signal(traj, LockConfig(mode="pll", loop_bandwidth=1e3, oscillator_floor=-120.0,
                                        error_noise=NoiseSpec(-90.0)))
    carrier = required_nu_m2(NU_AB, NU_LO)
    far = np.array([196.0e6, 196.5e6, 213.0e6, 213.5e6])
    trials = 40
    bg = {name: raman_scan(qubit, drive, far, pulse, trials, seed=41, traj=traj, n=N)
          for name, drive in (("noiseless", quiet), ("direct", direct), ("pll", pll))}
    direct_mean, pll_mean = bg["direct"].p_b.mean(), bg["pll"].p_b.mean()
    excess = bg["pll"].p_b - bg["noiseless"].p_b
    z = excess / bg["pll"].stderr
    background_ok = direct_mean > 5 * pll_mean and bool(np.all(np.abs(z) <= 3))

    step = 5e3
    centres = {"carrier": carrier, "-5 MHz": carrier - 5e6, "+5 MHz": carrier + 5e6}
    grid = np.concatenate([c + np.arange(-6, 7) * step for c in centres.values()])
    scan = raman_scan(qubit, quiet, grid, pulse, 1, seed=42, traj=traj, n=N)
    offsets = {k: scan.peak_near(c, 6 * step) - c for k, c in centres.items()}
    peaks_ok = all(abs(v) <= step for v in offsets.values())

    ok = background_ok and peaks_ok
    acceptance(4, "Raman background and peaks", ok,
               f"far background direct {direct_mean:.3e}, pll {pll_mean:.3e} "
               f"(ratio {direct_mean / pll_mean:.1f}), noiseless {bg['noiseless'].p_b.mean():.3e}; "
               f"pll-noiseless z-scores {np.array2string(z, precision=2)}; "
               f"peak offsets {offsets} Hz (step {step:.0f} Hz)")
    assert ok


def test_5_pll_noise_shaping(acceptance, tmp_path):
    spec = NoiseSpec(-90.0, "pll_shaped", 1e3, -120.0)
    fs = 100e3
    x = sample_fractional_noise(spec, 10.0, fs, seed=51).samples
    freqs, power, enbw = welch_spectrum(x, fs, rbw=20.0, window="hann")
    psd = power / enbw
    inband = 10 * np.log10(psd[(freqs >= 100) & (freqs <= 500)].mean())
    outband = 10 * np.log10(psd[(freqs >= 2e3) & (freqs <= fs / 4)].mean())
    step = inband - outband
    run_scenario(load_scenario("fig4a", output_dir=tmp_path))
    artifact = json.loads((tmp_path / "noise_step.json").read_text())
    ok = abs(step - 30) <= 3 and abs(artifact["pll_step_db"] - 30) <= 3
    acceptance(5, "PLL noise shaping", ok,
               f"in-band {inband:.2f} dB/Hz, out-of-band {outband:.2f} dB/Hz, step {step:.2f} dB; "
               f"fig4a artifact step {artifact['pll_step_db']:.2f} dB")
    assert ok


def test_6_ramsey_contrast(acceptance):
    start = time.perf_counter()
    qubit = QubitSpec(NU_AB, 12.5e3)
    lock = LockConfig(n=N, nu_LO=NU_LO, oscillator_floor=-120.0)
    drift = DriftProfile(NU_REP, 1 / 60)
    cal = calibrate_jitter(3e-3, N, (0.005, 0.5), seed=61, qubit=qubit, lock=lock, drift=drift)
    unlocked = cal.tau
    locked = run_ramsey(qubit, lock, drift, cal.jitter,
                        RamseyConfig(tuple(np.linspace(0.0, 1.0, 11)), 100, lock_engaged=True),
                        seed=62)
    # an unresolved decay is reported as inf; the data-supported lower bound is used instead
    locked_tau = locked.tau if locked.decay_resolved else locked.tau_lower_bound
    elapsed = time.perf_counter() - start
    ok = 1.5e-3 <= unlocked <= 6e-3 and locked_tau >= 100 * unlocked and elapsed < 300
    acceptance(6, "Ramsey contrast", ok,
               f"calibrated density {cal.jitter.white_freq_density:.4f} Hz/rtHz in "
               f"{cal.iterations} steps, tau unlocked {unlocked * 1e3:.2f} ms, tau locked "
               f"{locked_tau:.3g} s (ratio {locked_tau / unlocked:.3g}), {elapsed:.1f} s")
    assert ok


def _oracle_spec(rng):
    nu_rep = rng.uniform(20e6, 100e6)
    nu_m2 = rng.uniform(100e6, 250e6)
    split = rng.uniform(0.1, 0.4) * nu_rep * rng.choice([-1, 1])
    return CombSpec(nu_rep, int(rng.integers(1, 9)), rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0),
                    nu_m2 + split, nu_m2)


def test_7_oracle_equivalence(acceptance):
    rng = np.random.default_rng(7)
    worst_bins, worst_db, mismatched = 0.0, 0.0, 0
    for case in range(20):
        spec = _oracle_spec(rng)
        fs = 8 * (spec.m_max + 1) * spec.nu_rep0
        rbw = spec.nu_rep0 / 100
        x = synthesize_time_domain(spec, 8 / rbw, fs, seed=case)
        td = periodogram(x, fs, rbw)
        bin_hz = fs / math.ceil(fs / rbw)
        lo, hi = spec.nu_rep0 / 2, (spec.m_max + 0.5) * spec.nu_rep0
        ref = rf_line_spectrum(spec)
        sel = (td.freqs > lo) & (td.freqs < hi)
        got_f, got_p = td.freqs[sel], td.powers[sel] - td.powers[sel].max()
        want_f, want_p = ref.freqs, ref.powers - ref.powers.max()
        if got_f.size != want_f.size:
            mismatched += 1
            continue
        worst_bins = max(worst_bins, float(np.max(np.abs(got_f - want_f)) / bin_hz))
        worst_db = max(worst_db, float(np.max(np.abs(got_p - want_p))))
    comb_ok = mismatched == 0 and worst_bins <= 1 and worst_db <= 1

    worst_rabi = 0.0
    for _ in range(100):
        omega0 = rng.uniform(1e3, 1e6)
        det = rng.uniform(-20, 20) * omega0
        t = rng.uniform(0, 5) / omega0
        q = QubitSpec(NU_AB, omega0)
        p = evolve(q, BeatNote.constant(NU_AB + det), t, max_step(omega0, abs(det)), seed=0).p_b
        worst_rabi = max(worst_rabi, abs(p - oracles.rabi_excitation(omega0, det, t)))
    ok = comb_ok and worst_rabi <= 1e-6
    acceptance(7, "oracle equivalence", ok,
               f"20 comb specs: {mismatched} line-set mismatches, worst position "
               f"{worst_bins:.2f} bin, worst power {worst_db:.3f} dB; 100 Rabi cases: worst "
               f"|dp_b| {worst_rabi:.1e}")
    assert ok


def test_8_drift_arithmetic(acceptance, tmp_path):
    traj = generate_trajectory(DriftProfile(NU_REP, 1 / 60), JitterProfile(), 3600.0, 60.0, seed=0)
    per_min = np.diff(tooth_frequency(traj, N))
    rate_err = float(np.max(np.abs(per_min - 157.0)))
    run_scenario(load_scenario("fig3", output_dir=tmp_path))
    summary = json.loads((tmp_path / "lock_summary.json").read_text())
    ok = rate_err <= ROUND_OFF and summary["tooth_drift_hz_per_min"] == 157.0 \
        and summary["rep_rate_drift_hz_per_min"] == 1.0
    acceptance(8, "drift arithmetic", ok,
               f"tooth 157 steps of {per_min.mean():.9f} Hz/min (max error {rate_err:.1e} Hz); "
               f"fig3 summary {summary['rep_rate_drift_hz_per_min']} -> "
               f"{summary['tooth_drift_hz_per_min']} Hz/min")
    assert ok


def test_9_reproducibility(acceptance, tmp_path):
    start = time.perf_counter()
    differing = []
    for name in bundled_scenarios():
        outputs = []
        for run in ("a", "b"):
            out = tmp_path / name / run
            manifest = run_scenario(load_scenario(name, output_dir=out))
            outputs.append({a: (out / a).read_bytes() for a in manifest.artifacts})
        if outputs[0] != outputs[1] or not outputs[0]:
            differing.append(name)
        # the manifest differs only in wall-clock time
        m = [json.loads((tmp_path / name / r / "manifest.json").read_text()) for r in "ab"]
        for d in m:
            d.pop("wall_clock_s")
        if m[0] != m[1]:
            differing.append(f"{name}/manifest")
    elapsed = time.perf_counter() - start
    ok = not differing
    acceptance(9, "reproducibility", ok,
               f"{len(bundled_scenarios())} bundled scenarios run twice, differing: "
               f"{differing or 'none'} ({elapsed:.1f} s)")
    assert ok
