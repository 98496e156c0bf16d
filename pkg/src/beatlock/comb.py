"""Rf spectrum of two recombined, frequency-shifted copies of one pulse train.

A fast photodiode sees the intensity ``|E1 + E2|**2``.  Each arm alone gives
teeth at ``m * nu_rep``; the cross term ``E1 E2*`` multiplies the pulse-train
intensity by ``cos(2 pi dnu t)`` and so adds a pair of lines at
``m * nu_rep +/- |dnu|`` around every tooth, with ``dnu = nu_M1 - nu_M2``.

The optical carrier is dropped; only rf beat structure is modeled.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import signal

from ._seeding import rng_for

MAX_RF_FREQUENCY = 100e9
MAX_SAMPLES = 2 ** 24
DEFAULT_RBW = 110.0


class SampleBudgetError(ValueError):
    pass


class InsufficientSamplesError(ValueError):
    pass


@dataclass(frozen=True)
class CombSpec:
    nu_rep0: float
    m_max: int
    power_arm1: float = 1.0
    power_arm2: float = 1.0
    nu_M1: float = 0.0
    nu_M2: float = 0.0
    # rms duration of the Gaussian intensity envelope; None picks
    # 1 / (2 pi m_max nu_rep0), i.e. tooth m_max sits ~4.3 dB under tooth 0.
    pulse_width: float | None = None

    def problems(self):
        out = []
        if not self.nu_rep0 > 0:
            out.append(f"nu_rep0 must be > 0 (got {self.nu_rep0})")
        if int(self.m_max) != self.m_max or self.m_max < 1:
            out.append(f"m_max must be an integer >= 1 (got {self.m_max})")
        if self.power_arm1 < 0 or self.power_arm2 < 0:
            out.append("arm powers must be >= 0")
        if self.nu_rep0 > 0 and not abs(self.nu_M1 - self.nu_M2) < self.nu_rep0 / 2:
            out.append("|nu_M1 - nu_M2| must be < nu_rep0/2 so sidebands stay between teeth")
        if self.pulse_width is not None and not self.pulse_width > 0:
            out.append("pulse_width must be > 0")
        return out

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ValueError("invalid CombSpec: " + "; ".join(problems))

    @property
    def delta_nu_m(self):
        return abs(self.nu_M1 - self.nu_M2)

    @property
    def sigma(self):
        if self.pulse_width is not None:
            return self.pulse_width
        return 1.0 / (2 * math.pi * self.m_max * self.nu_rep0)

    def harmonic_envelope(self, m):
        """Relative amplitude of intensity harmonic ``m`` for the Gaussian pulse."""
        x = 2 * math.pi * np.asarray(m, dtype=float) * self.nu_rep0 * self.sigma
        return np.exp(-0.5 * x ** 2)


@dataclass(frozen=True)
class SpectralLine:
    freq: float
    power: float  # dB relative to the strongest line


@dataclass(frozen=True)
class RfSpectrum:
    lines: tuple
    noise_floor: float  # dB/Hz relative to the strongest line
    rbw: float

    def __post_init__(self):
        freqs = [ln.freq for ln in self.lines]
        if freqs != sorted(freqs):
            raise ValueError("spectral lines must be sorted by frequency")
        if any(f < 0 for f in freqs):
            raise ValueError("spectral line frequencies must be >= 0")
        if len(freqs) > 1 and min(np.diff(freqs)) < self.rbw:
            raise ValueError("two spectral lines are closer than the resolution bandwidth")

    @property
    def freqs(self):
        return np.array([ln.freq for ln in self.lines])

    @property
    def powers(self):
        return np.array([ln.power for ln in self.lines])

    def to_csv(self, path):
        with open(path, "w", newline="") as f:
            f.write(f"# rbw_hz={self.rbw!r},noise_floor_db_per_hz={self.noise_floor!r}\n")
            f.write("freq_hz,power_db\n")
            for ln in self.lines:
                f.write(f"{ln.freq!r},{ln.power!r}\n")


def rf_line_spectrum(spec, include_arm1=True, include_arm2=True, rbw=DEFAULT_RBW,
                     max_frequency=MAX_RF_FREQUENCY):
    """Analytic line list seen by the photodiode.

    Teeth at ``m * nu_rep0`` (m = 1..m_max) have amplitude proportional to
    the summed arm powers; with both arms, sidebands at ``m*nu_rep0 +/- |dnu|``
    carry ``sqrt(P1 * P2)`` instead.  The baseband beat at ``|dnu|`` (the
    m = 0 pair) is left out together with DC.
    """
    if not (include_arm1 or include_arm2):
        raise ValueError("at least one arm must be included")
    if spec.m_max * spec.nu_rep0 >= max_frequency:
        raise ValueError(
            f"m_max * nu_rep0 = {spec.m_max * spec.nu_rep0} Hz exceeds max frequency {max_frequency} Hz")
    both = include_arm1 and include_arm2
    if both and spec.delta_nu_m == 0:
        raise ValueError("nu_M1 == nu_M2 with both arms: sidebands collapse onto the teeth; "
                         "perturb one AOM shift")
    p1 = spec.power_arm1 if include_arm1 else 0.0
    p2 = spec.power_arm2 if include_arm2 else 0.0

    m = np.arange(1, spec.m_max + 1)
    env = spec.harmonic_envelope(m)
    entries = [(mi * spec.nu_rep0, (p1 + p2) * e) for mi, e in zip(m, env)]
    if both:
        dnu = spec.delta_nu_m
        cross = math.sqrt(p1 * p2)
        for mi, e in zip(m, env):
            entries.append((mi * spec.nu_rep0 - dnu, cross * e))
            entries.append((mi * spec.nu_rep0 + dnu, cross * e))
    entries = [(f, a) for f, a in entries if a > 0]
    if not entries:
        raise ValueError("all included arms have zero power")
    entries.sort()
    top = max(a for _, a in entries)
    lines = tuple(SpectralLine(float(f), float(20 * math.log10(a / top))) for f, a in entries)
    return RfSpectrum(lines, -math.inf, rbw)


def synthesize_time_domain(spec, duration, sample_rate, seed, include_arm1=True,
                           include_arm2=True, detector_noise=0.0, max_samples=MAX_SAMPLES):
    """Photodiode intensity samples of the recombined pulse trains.

    Each arm is the same Gaussian pulse train times its AOM phase ramp
    ``exp(i (2 pi nu_M t + phi))``.  The seed fixes the pulse timing offset,
    the two drive phases, and optional white detector noise (rms, in units of
    the peak single-arm intensity).
    """
    nyquist_need = 2 * (spec.m_max * spec.nu_rep0 + spec.delta_nu_m)
    if not sample_rate > nyquist_need:
        raise ValueError(f"sample_rate must exceed {nyquist_need} Hz")
    n = int(round(duration * sample_rate))
    if n > max_samples:
        raise SampleBudgetError(f"{n} samples requested, budget is {max_samples}")
    if n <= 0:
        return np.zeros(0)
    rng = rng_for(seed, "comb", "synthesize")
    period = 1.0 / spec.nu_rep0
    t0 = rng.uniform(0.0, period)
    phi1, phi2 = rng.uniform(0.0, 2 * math.pi, size=2)

    t = np.arange(n) / sample_rate
    tau = t - t0
    tau -= np.round(tau / period) * period
    sigma = spec.sigma
    envelope = np.zeros(n)
    for k in (-2, -1, 0, 1, 2):
        envelope += np.exp(-((tau + k * period) ** 2) / (4 * sigma ** 2))

    field = np.zeros(n, dtype=complex)
    if include_arm1:
        field += math.sqrt(spec.power_arm1) * np.exp(1j * (2 * math.pi * spec.nu_M1 * t + phi1))
    if include_arm2:
        field += math.sqrt(spec.power_arm2) * np.exp(1j * (2 * math.pi * spec.nu_M2 * t + phi2))
    intensity = np.abs(envelope * field) ** 2
    if detector_noise > 0:
        intensity += rng.normal(0.0, detector_noise, n)
    return intensity


def welch_spectrum(samples, sample_rate, rbw, window="flattop"):
    """Welch-averaged power per bin (``scaling='spectrum'``) and the window ENBW.

    Returns ``(freqs, power, enbw_hz)``; ``power / enbw_hz`` is the PSD.
    """
    samples = np.asarray(samples, dtype=float)
    nperseg = int(math.ceil(sample_rate / rbw))
    if samples.size < nperseg:
        raise InsufficientSamplesError(
            f"rbw={rbw} Hz needs at least {nperseg / sample_rate:.6g} s of data "
            f"({nperseg} samples), got {samples.size}")
    freqs, power = signal.welch(samples, fs=sample_rate, window=window, nperseg=nperseg,
                                scaling="spectrum", detrend="constant")
    w = signal.get_window(window, nperseg)
    enbw = sample_rate * np.sum(w ** 2) / np.sum(w) ** 2
    return freqs, power, enbw


def periodogram(samples, sample_rate, rbw, window="flattop", threshold_db=20.0,
                dynamic_range_db=80.0, guard_bins=8):
    """Estimate a line spectrum from time samples.

    Lines are local maxima at least ``threshold_db`` above the per-bin noise
    and within ``dynamic_range_db`` of the strongest peak.  The floor is the
    mean PSD over bins farther than ``guard_bins`` from every line and from DC.
    """
    freqs, power, enbw = welch_spectrum(samples, sample_rate, rbw, window)
    usable = np.ones(freqs.size, dtype=bool)
    usable[:guard_bins] = False

    floor_bin = np.median(power[usable]) if usable.any() else 0.0
    peaks = np.array([], dtype=int)
    for _ in range(2):
        peaks = _find_lines(power, usable, floor_bin, threshold_db, dynamic_range_db, guard_bins)
        free = usable.copy()
        for p in peaks:
            free[max(p - guard_bins, 0):p + guard_bins + 1] = False
        if free.any():
            floor_bin = float(np.mean(power[free]))

    if peaks.size == 0:
        raise ValueError("no spectral lines found")
    top = power[peaks].max()
    lines = tuple(SpectralLine(float(freqs[p]), float(10 * math.log10(power[p] / top)))
                  for p in peaks)
    with np.errstate(divide="ignore"):
        floor_db = float(10 * np.log10(floor_bin / enbw / top)) if floor_bin > 0 else -math.inf
    return RfSpectrum(lines, floor_db, rbw)


def _find_lines(power, usable, floor_bin, threshold_db, dynamic_range_db, guard_bins):
    inner = np.zeros(power.size, dtype=bool)
    inner[1:-1] = (power[1:-1] >= power[:-2]) & (power[1:-1] > power[2:])
    cand = np.flatnonzero(inner & usable)
    if cand.size == 0:
        return cand
    level = power[cand].max() * 10 ** (-dynamic_range_db / 10)
    cand = cand[(power[cand] >= level) & (power[cand] >= floor_bin * 10 ** (threshold_db / 10))]
    # Keep the strongest peak inside each window mainlobe.
    kept = []
    for idx in cand[np.argsort(-power[cand], kind="stable")]:
        if all(abs(idx - k) > guard_bins for k in kept):
            kept.append(idx)
    return np.array(sorted(kept), dtype=int)
