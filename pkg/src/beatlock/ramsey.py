"""Ramsey measurement of beat-note coherence, lock engaged or disengaged.

Each trial draws a repetition-rate trajectory, builds the AOM1 drive (tracking
``n*nu_rep(t) - nu_LO`` when locked, parked at the value set by the nominal
repetition rate when not), and
runs pi/2 -- free evolution -- pi/2 for every delay and every analysis phase.
Fringe contrast is the amplitude of a sinusoid fitted across the analysis
phases; the contrast-versus-delay curve is fitted to ``exp(-T/tau)``.
"""

from dataclasses import dataclass
import math
import warnings

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit

from ._seeding import derive_seed, rng_for
from .comb import MAX_SAMPLES, SampleBudgetError
from .lock import DriveTone, LockConfig, effective_beat, error_signal, required_nu_m2
from .noise import (DriftProfile, JitterProfile, db_to_linear, generate_trajectory,
                    shaped_gaussian_noise)
from .qubit import QubitSpec, apply, step_elements

PHASE_POINTS = 8


@dataclass(frozen=True)
class RamseyConfig:
    delays: tuple
    trials_per_delay: int = 100
    lock_engaged: bool = True
    analysis: str = "fit_exponential"

    def problems(self):
        out = []
        d = np.asarray(self.delays, dtype=float)
        if d.size == 0:
            out.append("at least one delay is required")
        elif np.any(d < 0) or np.any(np.diff(d) <= 0):
            out.append("delays must be >= 0 and strictly increasing")
        if int(self.trials_per_delay) != self.trials_per_delay or self.trials_per_delay < 1:
            out.append("trials_per_delay must be an integer >= 1")
        if self.analysis != "fit_exponential":
            out.append(f"unknown analysis {self.analysis!r}")
        return out

    def __post_init__(self):
        object.__setattr__(self, "delays", tuple(float(x) for x in self.delays))
        problems = self.problems()
        if problems:
            raise ValueError("invalid RamseyConfig: " + "; ".join(problems))


@dataclass(frozen=True, eq=False)
class CoherenceResult:
    delays: np.ndarray
    contrast: np.ndarray
    stderr: np.ndarray
    tau: float  # inf when no decay is resolved, nan when the fit failed
    fit_error: float
    lock_engaged: bool
    note: str = ""
    tau_lower_bound: float = 0.0

    @property
    def decay_resolved(self):
        return math.isfinite(self.tau)

    def to_csv(self, path):
        with open(path, "w", newline="") as f:
            f.write("delay_s,contrast,stderr\n")
            for row in zip(self.delays.tolist(), self.contrast.tolist(), self.stderr.tolist()):
                f.write("{!r},{!r},{!r}\n".format(*row))

    def summary(self):
        return {
            "tau_s": _json_float(self.tau),
            "fit_error_s": _json_float(self.fit_error),
            "lock_engaged": self.lock_engaged,
            "tau_lower_bound_s": _json_float(self.tau_lower_bound),
            "note": self.note,
        }


def _json_float(x):
    # JSON has no inf/nan; keep them readable and round-trippable as strings.
    return x if math.isfinite(x) else str(x)


def _fringe_design(points):
    phases = 2 * np.pi * np.arange(points) / points
    design = np.column_stack([np.ones(points), np.cos(phases), np.sin(phases)])
    return phases, np.linalg.pinv(design)


def _trial_fringes(qubit, lock, drift, jitter, delays, pulse, nu_m2, lock_engaged, seed,
                   max_samples):
    """Complex fringe amplitude (c1 + i c2) for every delay of one trial."""
    dt = 1.0 / (2.0 * jitter.bandwidth)
    span = 2 * pulse + delays[-1]
    if span / dt > max_samples:
        raise SampleBudgetError(
            f"{span / dt:.0f} trajectory samples per trial exceed the budget of {max_samples}")
    traj = generate_trajectory(drift, jitter, max(span, dt), dt, seed)
    drive = error_signal(traj, lock)
    if not lock_engaged:
        # AOM1 parked where the nominal rate puts the beat on resonance; an
        # instantaneous sample would carry the full-bandwidth jitter as a static offset.
        drive = DriveTone(drive.t, np.full(drive.t.shape, lock.n * drift.nu_rep0 - lock.nu_LO),
                          drive.phase0, drive.noise)
    beat = effective_beat(traj, drive, nu_m2, lock.n)
    detuning = beat.freq - qubit.nu_ab

    # Piecewise-constant detuning integrated exactly on the trajectory grid.
    cum = np.concatenate([[0.0], np.cumsum(detuning) * dt])
    grid = np.arange(cum.size) * dt
    start, stops = pulse, pulse + delays
    phase = 2 * np.pi * (np.interp(stops, grid, cum) - np.interp(start, grid, cum))

    # Oscillator floor as white phase noise on AOM1 (dBc/Hz -> S_phi = 2 L).
    s_phi = 2.0 * float(db_to_linear(lock.oscillator_floor))
    if s_phi > 0:
        phi_n = shaped_gaussian_noise(lambda f: np.full(f.shape, s_phi), traj.t.size, 1.0 / dt,
                                      rng_for(seed, "ramsey", "oscillator_phase"))
        phase += np.interp(stops, traj.t, phi_n) - np.interp(start, traj.t, phi_n)

    om = 2 * np.pi * qubit.omega0
    det1 = 2 * np.pi * np.interp(pulse / 2, traj.t, detuning)
    det2 = 2 * np.pi * np.interp(stops + pulse / 2, traj.t, detuning)
    first = step_elements(om, det1, pulse)
    state = apply(first, (1.0 + 0j, 0j))
    free = (np.exp(0.5j * phase), np.zeros_like(phase, dtype=complex))
    state = apply(free, state)
    phases, pinv = _fringe_design(PHASE_POINTS)
    second = step_elements(om, det2[:, None], pulse, phases[None, :])
    ca, cb = apply(second, (state[0][:, None], state[1][:, None]))
    p_b = np.abs(cb) ** 2  # (delays, phases)
    coeffs = p_b @ pinv.T
    return coeffs[:, 1] + 1j * coeffs[:, 2]


def _exp_decay(t, rate):
    return np.exp(-rate * t)


def run_ramsey(qubit, lock, drift, jitter, cfg, seed, max_samples=MAX_SAMPLES):
    """Fringe contrast versus delay and the fitted 1/e coherence time."""
    if qubit.omega0 <= 0:
        raise ValueError("Ramsey pulses need omega0 > 0")
    delays = np.asarray(cfg.delays, dtype=float)
    pulse = 1.0 / (4.0 * qubit.omega0)
    positive = delays[delays > 0]
    if positive.size and pulse > 0.1 * positive.min():
        raise ValueError(
            f"pi/2 pulse ({pulse} s) is not short compared to the shortest delay ({positive.min()} s)")
    nu_m2 = required_nu_m2(qubit.nu_ab, lock.nu_LO)
    n = cfg.trials_per_delay
    z = np.array([
        _trial_fringes(qubit, lock, drift, jitter, delays, pulse, nu_m2, cfg.lock_engaged,
                       derive_seed(seed, "ramsey", j), max_samples)
        for j in range(n)
    ])  # (trials, delays)
    mean = z.mean(axis=0)
    contrast = 2 * np.abs(mean)
    unit = np.where(np.abs(mean) > 0, mean / np.where(np.abs(mean) > 0, np.abs(mean), 1), 1)
    proj = 2 * np.real(z * np.conj(unit))
    stderr = proj.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros(delays.size)
    contrast = np.clip(contrast, 0.0, 1.0)
    tau, tau_err, note = _fit_tau(delays, contrast, stderr)
    bound = _tau_lower_bound(delays, contrast, stderr) if not math.isfinite(tau) else tau
    return CoherenceResult(delays, contrast, stderr, tau, tau_err, cfg.lock_engaged, note, bound)


def _fit_tau(delays, contrast, stderr):
    sigma = np.maximum(stderr, 1e-9)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", OptimizeWarning)
            guess = 1.0 / max(delays[-1], 1e-12)
            popt, pcov = curve_fit(_exp_decay, delays, contrast, p0=[guess], sigma=sigma,
                                   absolute_sigma=True, bounds=(0.0, np.inf))
    except (RuntimeError, ValueError) as exc:
        return math.nan, math.nan, f"fit did not converge: {exc}"
    rate = float(popt[0])
    rate_err = float(np.sqrt(pcov[0, 0])) if np.isfinite(pcov[0, 0]) else math.inf
    if rate <= 0 or rate <= 2 * rate_err:
        return math.inf, math.inf, "no decay resolved"
    return 1.0 / rate, rate_err / rate ** 2, ""


def _tau_lower_bound(delays, contrast, stderr):
    """Smallest tau compatible (3 sigma) with the contrast at the longest delay."""
    low = contrast[-1] - 3 * stderr[-1]
    if delays[-1] <= 0:
        return 0.0
    if low >= 1.0:
        return math.inf
    if low <= 0.0:
        return 0.0
    return float(-delays[-1] / math.log(low))


def analytic_tau(white_freq_density, n):
    """1/e Ramsey time for white frequency noise on tooth ``n``.

    Phase variance after T is ``2 pi^2 (n h)^2 T``; contrast
    ``exp(-var/2)`` reaches 1/e at ``T = 1 / (pi n h)^2``.
    """
    if white_freq_density <= 0:
        return math.inf
    return 1.0 / (math.pi * n * white_freq_density) ** 2


@dataclass(frozen=True)
class JitterCalibration:
    jitter: JitterProfile
    tau: float
    iterations: int


class CalibrationError(RuntimeError):
    pass


def calibration_delays(target_tau, points=12):
    return tuple(np.linspace(0.0, 3.0 * target_tau, points))


def calibrate_jitter(target_tau, n, search_bounds, seed, *, qubit=None, lock=None, drift=None,
                     bandwidth=10e3, trials=200, tolerance=0.1, max_iter=60):
    """Find the white-frequency jitter density that gives ``target_tau`` unlocked.

    Bisects ``white_freq_density`` geometrically inside ``search_bounds``.
    All evaluations share one seed, so tau is a smooth decreasing function
    of the density and the bisection is well-defined.
    """
    qubit = qubit or QubitSpec()
    lock = lock or LockConfig(n=n)
    if lock.n != n:
        raise ValueError("lock.n must match n")
    drift = drift or DriftProfile(slope=0.0)
    cfg = RamseyConfig(calibration_delays(target_tau), trials, lock_engaged=False)

    def tau_at(h):
        res = run_ramsey(qubit, lock, drift, JitterProfile(h, bandwidth), cfg, seed)
        return res.tau

    lo, hi = (float(b) for b in search_bounds)
    if not 0 < lo < hi:
        raise ValueError("search_bounds must satisfy 0 < low < high")
    tau_lo, tau_hi = tau_at(lo), tau_at(hi)
    if not (tau_lo > target_tau > tau_hi):
        raise CalibrationError(
            f"bounds do not bracket tau={target_tau} s: tau({lo})={tau_lo} s, tau({hi})={tau_hi} s")
    for it in range(1, max_iter + 1):
        mid = math.sqrt(lo * hi)
        tau_mid = tau_at(mid)
        if math.isfinite(tau_mid) and abs(tau_mid - target_tau) <= tolerance * target_tau:
            return JitterCalibration(JitterProfile(mid, bandwidth), tau_mid, it)
        if not math.isfinite(tau_mid) or tau_mid > target_tau:
            lo = mid
        else:
            hi = mid
    raise CalibrationError(f"no density within {tolerance:.0%} of target after {max_iter} steps")
