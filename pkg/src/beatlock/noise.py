"""Repetition-rate trajectories and fractional noise processes.

Everything here is a pure function of its arguments and an integer seed.
Stochastic pieces are built by shaping a Gaussian white sequence in the
frequency domain, so the expected periodogram equals the requested one-sided
PSD bin by bin.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from ._seeding import rng_for

FLAT = "flat"
PLL_SHAPED = "pll_shaped"
NOISE_SHAPES = (FLAT, PLL_SHAPED)

DEFAULT_NU_REP = 80.6e6
# 1 Hz per minute at the repetition rate.
DEFAULT_DRIFT_SLOPE = 1.0 / 60.0


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(x, dtype=float))


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _raise_if(problems, what):
    if problems:
        raise ValueError(f"invalid {what}: " + "; ".join(problems))


@dataclass(frozen=True)
class DriftProfile:
    """Slow, deterministic-plus-random-walk motion of the repetition rate."""

    nu_rep0: float = DEFAULT_NU_REP
    slope: float = DEFAULT_DRIFT_SLOPE  # Hz/s
    temp_amplitude: float = 0.0  # Hz
    temp_period: float = 1800.0  # s
    random_walk_density: float = 0.0  # Hz/sqrt(s)

    def problems(self):
        out = []
        values = (self.nu_rep0, self.slope, self.temp_amplitude,
                  self.temp_period, self.random_walk_density)
        if not all(math.isfinite(v) for v in values):
            out.append("all drift magnitudes must be finite")
        if not self.nu_rep0 > 0:
            out.append(f"nu_rep0 must be > 0 (got {self.nu_rep0})")
        if self.temp_amplitude != 0 and not self.temp_period > 0:
            out.append("temp_period must be > 0 when temp_amplitude != 0")
        if self.random_walk_density < 0:
            out.append("random_walk_density must be >= 0")
        return out

    def __post_init__(self):
        _raise_if(self.problems(), "DriftProfile")


@dataclass(frozen=True)
class JitterProfile:
    """Fast white frequency noise on the repetition rate, band-limited."""

    white_freq_density: float = 0.0  # Hz/sqrt(Hz), one-sided
    bandwidth: float = 10e3  # Hz

    def problems(self):
        out = []
        if not (math.isfinite(self.white_freq_density) and self.white_freq_density >= 0):
            out.append("white_freq_density must be finite and >= 0")
        if not (math.isfinite(self.bandwidth) and self.bandwidth > 0):
            out.append("jitter bandwidth must be > 0")
        return out

    def __post_init__(self):
        _raise_if(self.problems(), "JitterProfile")


@dataclass(frozen=True)
class NoiseSpec:
    """One-sided fractional power noise PSD.

    ``flat``: ``alpha_db_per_hz`` at every frequency.
    ``pll_shaped``: ``alpha_db_per_hz`` below ``loop_bandwidth`` and
    ``out_of_band_floor`` above it (the PLL oscillator takes over).
    ``alpha_db_per_hz = -inf`` disables the noise.
    """

    alpha_db_per_hz: float = -math.inf
    shape: str = FLAT
    loop_bandwidth: float | None = None
    out_of_band_floor: float | None = None

    def problems(self):
        out = []
        if math.isnan(self.alpha_db_per_hz) or self.alpha_db_per_hz == math.inf:
            out.append("alpha_db_per_hz must be a number or -inf")
        if self.shape not in NOISE_SHAPES:
            out.append(f"unknown noise shape {self.shape!r} (expected one of {NOISE_SHAPES})")
        if self.shape == PLL_SHAPED:
            if self.loop_bandwidth is None or not self.loop_bandwidth > 0:
                out.append("pll_shaped noise needs loop_bandwidth > 0")
            if self.out_of_band_floor is None or math.isnan(self.out_of_band_floor):
                out.append("pll_shaped noise needs out_of_band_floor")
        return out

    def __post_init__(self):
        _raise_if(self.problems(), "NoiseSpec")

    @property
    def enabled(self):
        if self.shape == PLL_SHAPED:
            return self.alpha_db_per_hz > -math.inf or self.out_of_band_floor > -math.inf
        return self.alpha_db_per_hz > -math.inf

    def psd(self, freqs):
        """Linear one-sided PSD (1/Hz) evaluated at ``freqs``."""
        freqs = np.asarray(freqs, dtype=float)
        level = np.full(freqs.shape, float(db_to_linear(self.alpha_db_per_hz)))
        if self.shape == PLL_SHAPED:
            level = np.where(freqs < self.loop_bandwidth, level,
                             float(db_to_linear(self.out_of_band_floor)))
        return level

    def psd_db(self, freqs):
        return linear_to_db(self.psd(freqs))

    def with_pll(self, loop_bandwidth, floor_db_per_hz):
        return NoiseSpec(self.alpha_db_per_hz, PLL_SHAPED, loop_bandwidth, floor_db_per_hz)

    def to_dict(self):
        return {
            "alpha_db_per_hz": self.alpha_db_per_hz,
            "shape": self.shape,
            "loop_bandwidth_hz": self.loop_bandwidth,
            "floor_db_per_hz": self.out_of_band_floor,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            alpha_db_per_hz=float(d.get("alpha_db_per_hz", -math.inf)),
            shape=d.get("shape", FLAT),
            loop_bandwidth=d.get("loop_bandwidth_hz"),
            out_of_band_floor=d.get("floor_db_per_hz"),
        )


NO_NOISE = NoiseSpec()


@dataclass(frozen=True, eq=False)
class RepRateTrajectory:
    t: np.ndarray
    nu_rep: np.ndarray
    seed: int = 0

    def __post_init__(self):
        t = _frozen(self.t)
        nu = _frozen(self.nu_rep)
        if t.ndim != 1 or t.shape != nu.shape or t.size == 0:
            raise ValueError("trajectory needs matching, non-empty 1-D t and nu_rep")
        if t.size > 1:
            steps = np.diff(t)
            if np.any(steps <= 0):
                raise ValueError("trajectory times must be strictly increasing")
            if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
                raise ValueError("trajectory times must be uniformly spaced")
        if np.any(nu <= 0):
            raise ValueError("repetition rate must stay positive")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "nu_rep", nu)

    @property
    def dt(self):
        return float(self.t[1] - self.t[0]) if self.t.size > 1 else 0.0

    @classmethod
    def constant(cls, nu_rep0, duration, dt):
        n = _sample_count(duration, dt)
        return cls(np.arange(n) * dt, np.full(n, float(nu_rep0)))


@dataclass(frozen=True, eq=False)
class FractionalNoise:
    samples: np.ndarray
    sample_rate: float
    warnings: tuple = field(default_factory=tuple)


def _sample_count(duration, dt):
    return int(math.floor(duration / dt + 1e-9)) + 1


def shaped_gaussian_noise(psd, n, sample_rate, rng):
    """Zero-mean Gaussian sequence whose one-sided PSD is ``psd(f)`` (1/Hz).

    A unit white sequence has a flat one-sided PSD of ``2/fs``, so each
    positive-frequency bin is scaled by ``sqrt(psd(f) * fs / 2)``.
    """
    if n == 0:
        return np.zeros(0)
    white = rng.standard_normal(n)
    spectrum = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n, d=1.0 / sample_rate)
    gain = np.sqrt(np.asarray(psd(freqs), dtype=float) * sample_rate / 2.0)
    return np.fft.irfft(spectrum * gain, n=n)


def sample_fractional_noise(spec, duration, sample_rate, seed):
    """Draw a realization of the fractional noise described by ``spec``.

    Returns a :class:`FractionalNoise`; a positive ``alpha_db_per_hz`` is
    allowed but noted in ``warnings``.
    """
    if sample_rate <= 0:
        raise ValueError("sample_rate must be > 0")
    if spec.shape == PLL_SHAPED and not sample_rate > 2 * spec.loop_bandwidth:
        raise ValueError(
            f"sample_rate {sample_rate} Hz cannot represent a {spec.loop_bandwidth} Hz loop bandwidth"
        )
    warnings = []
    if spec.alpha_db_per_hz > 0:
        warnings.append(
            f"alpha_db_per_hz={spec.alpha_db_per_hz} > 0: fractional noise exceeds the signal"
        )
    n = max(int(round(duration * sample_rate)), 0)
    if not spec.enabled:
        return FractionalNoise(np.zeros(n), sample_rate, tuple(warnings))
    x = shaped_gaussian_noise(spec.psd, n, sample_rate, rng_for(seed, "fractional_noise"))
    return FractionalNoise(x, sample_rate, tuple(warnings))


def generate_trajectory(drift, jitter, duration, dt, seed):
    """Sample nu_rep(t) on ``t = 0, dt, ..., <= duration``."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    if duration < dt:
        raise ValueError(f"duration {duration} s is shorter than one step ({dt} s)")
    if jitter.white_freq_density > 0 and dt > 1.0 / (2.0 * jitter.bandwidth) * (1 + 1e-9):
        raise ValueError(
            f"dt={dt} s aliases the {jitter.bandwidth} Hz jitter bandwidth; "
            f"need dt <= {1.0 / (2.0 * jitter.bandwidth)} s"
        )
    n = _sample_count(duration, dt)
    t = np.arange(n) * dt
    nu = np.full(n, drift.nu_rep0) + drift.slope * t
    if drift.temp_amplitude:
        nu += drift.temp_amplitude * np.sin(2 * np.pi * t / drift.temp_period)
    if drift.random_walk_density > 0:
        steps = rng_for(seed, "random_walk").normal(
            0.0, drift.random_walk_density * math.sqrt(dt), n - 1)
        nu[1:] += np.cumsum(steps)
    if jitter.white_freq_density > 0:
        h2 = jitter.white_freq_density ** 2
        band = jitter.bandwidth
        nu += shaped_gaussian_noise(
            lambda f: np.where(f <= band, h2, 0.0), n, 1.0 / dt, rng_for(seed, "jitter"))
    return RepRateTrajectory(t, nu, seed)


def tooth_frequency(traj, m):
    """Frequency series of rf tooth ``m`` (Hz)."""
    if m < 1:
        raise ValueError("tooth index must be >= 1")
    return m * traj.nu_rep
