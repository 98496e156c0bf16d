"""Frequency/PSD-level model of the beat-note lock electronics.

Photodiode -> band-pass on tooth n -> mix with the LO -> low-pass keeps the
difference ``n*nu_rep(t) - nu_LO`` -> (optionally a PLL) -> AOM1.  Driving
AOM1 at that difference makes the Raman beat ``n*nu_rep - |nu_M1 - nu_M2|``
collapse to ``nu_LO + nu_M2`` for every repetition-rate trajectory.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .noise import NoiseSpec, NO_NOISE, _frozen

DIRECT = "direct"
PLL = "pll"
LOCK_MODES = (DIRECT, PLL)


class LockLossError(RuntimeError):
    def __init__(self, index, time, freq, band):
        self.index = index
        self.time = time
        super().__init__(
            f"beat note left the low-pass band {band} at sample {index} "
            f"(t={time!r} s, f={freq!r} Hz)")


class AlignmentError(ValueError):
    pass


@dataclass(frozen=True)
class LockConfig:
    n: int = 157
    nu_LO: float = 12.438e9
    bpf_center: float = 12.655e9
    bpf_width: float = 40e6
    lpf_cutoff: float = 250e6
    mode: str = PLL
    loop_bandwidth: float = 1e3
    oscillator_floor: float = -120.0
    error_noise: NoiseSpec = field(default_factory=lambda: NoiseSpec(-90.0))

    def problems(self, nu_rep0=None):
        """Invariant violations; tooth-placement checks need ``nu_rep0``."""
        out = []
        if int(self.n) != self.n or self.n < 1:
            out.append(f"n must be an integer >= 1 (got {self.n})")
        if self.mode not in LOCK_MODES:
            out.append(f"mode must be one of {LOCK_MODES} (got {self.mode!r})")
        if self.mode == PLL and not self.loop_bandwidth > 0:
            out.append("pll mode needs loop_bandwidth > 0")
        if not self.lpf_cutoff > 0:
            out.append("lpf_cutoff must be > 0")
        if not self.bpf_width > 0:
            out.append("bpf_width must be > 0")
        if nu_rep0 is not None and not out:
            tooth = self.n * nu_rep0
            if not self.nu_LO < tooth:
                out.append(f"nu_LO={self.nu_LO} must lie below n*nu_rep0={tooth}")
            if not self.passes(tooth):
                out.append(f"band-pass {self.bpf_center}+/-{self.bpf_width / 2} misses tooth n")
            if self.passes(tooth - nu_rep0) or self.passes(tooth + nu_rep0):
                out.append("band-pass does not reject the neighbouring teeth n+/-1")
            if not self.lpf_cutoff < tooth + self.nu_LO:
                out.append("lpf_cutoff must reject the sum-frequency mixing product")
            if not tooth - self.nu_LO <= self.lpf_cutoff:
                out.append(f"beat note {tooth - self.nu_LO} Hz is above lpf_cutoff")
        return out

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ValueError("invalid LockConfig: " + "; ".join(problems))

    def passes(self, freq):
        return abs(freq - self.bpf_center) <= self.bpf_width / 2

    def output_noise(self):
        if self.mode == DIRECT:
            return self.error_noise
        return self.error_noise.with_pll(self.loop_bandwidth, self.oscillator_floor)


@dataclass(frozen=True, eq=False)
class DriveTone:
    t: np.ndarray
    freq: np.ndarray
    phase0: float = 0.0
    noise: NoiseSpec = NO_NOISE

    def __post_init__(self):
        t, f = _frozen(self.t), _frozen(self.freq)
        if t.shape != f.shape:
            raise ValueError("drive tone needs one frequency per sample time")
        if np.any(f <= 0):
            raise ValueError("drive tone frequency must stay positive")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "freq", f)

    def frozen_at_start(self):
        """The same tone with its frequency held at the t=0 value (lock disengaged)."""
        return DriveTone(self.t, np.full(self.freq.shape, self.freq[0]), self.phase0, self.noise)

    def to_csv(self, path):
        _series_csv(path, self.t, self.freq)


@dataclass(frozen=True, eq=False)
class BeatNote:
    t: np.ndarray
    freq: np.ndarray
    noise: NoiseSpec = NO_NOISE

    def __post_init__(self):
        t, f = _frozen(self.t), _frozen(self.freq)
        if t.shape != f.shape:
            raise ValueError("beat note needs one frequency per sample time")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "freq", f)

    @classmethod
    def constant(cls, freq, noise=NO_NOISE):
        return cls(np.array([0.0]), np.array([float(freq)]), noise)

    def to_csv(self, path):
        _series_csv(path, self.t, self.freq)


def _series_csv(path, t, freq):
    with open(path, "w", newline="") as f:
        f.write("t_s,freq_hz\n")
        for ti, fi in zip(t.tolist(), freq.tolist()):
            f.write(f"{ti!r},{fi!r}\n")


def error_signal(traj, cfg):
    """AOM1 drive produced by the lock electronics for trajectory ``traj``.

    The frequency always follows ``n*nu_rep(t) - nu_LO``; a PLL only swaps
    the out-of-band noise for the oscillator floor.
    """
    tooth = cfg.n * traj.nu_rep
    if np.any(tooth <= cfg.nu_LO):
        raise ValueError("n*nu_rep(t) must stay above nu_LO")
    outside = np.flatnonzero(np.abs(tooth - cfg.bpf_center) > cfg.bpf_width / 2)
    if outside.size:
        i = int(outside[0])
        raise LockLossError(i, float(traj.t[i]), float(tooth[i]),
                            (cfg.bpf_center - cfg.bpf_width / 2, cfg.bpf_center + cfg.bpf_width / 2))
    beat = tooth - cfg.nu_LO
    lost = np.flatnonzero(beat > cfg.lpf_cutoff)
    if lost.size:
        i = int(lost[0])
        raise LockLossError(i, float(traj.t[i]), float(beat[i]), (0.0, cfg.lpf_cutoff))
    return DriveTone(traj.t, beat, 0.0, cfg.output_noise())


def _check_alignment(traj, drive1):
    if drive1.t.shape != traj.t.shape or not np.array_equal(drive1.t, traj.t):
        raise AlignmentError("drive tone and repetition-rate trajectory use different sample times")


def effective_beat(traj, drive1, nu_M2, n):
    """Beat ``n*nu_rep(t) - |nu_M1(t) - nu_M2|`` that drives the qubit."""
    _check_alignment(traj, drive1)
    tooth = n * traj.nu_rep
    if np.any(tooth <= drive1.freq):
        raise ValueError("n*nu_rep(t) must exceed the AOM1 drive frequency")
    return BeatNote(traj.t, tooth - np.abs(drive1.freq - nu_M2), drive1.noise)


def residual_at_tooth(traj, drive1, nu_M2, m, n):
    """Drift of the beat formed at tooth ``m`` relative to its t=0 value."""
    _check_alignment(traj, drive1)
    if np.any(n * traj.nu_rep <= drive1.freq):
        raise ValueError("n*nu_rep(t) must exceed the AOM1 drive frequency")
    offset = np.abs(drive1.freq - nu_M2)
    # Differences first: keeps round-off at the scale of the drift, not of m*nu_rep.
    return m * (traj.nu_rep - traj.nu_rep[0]) - (offset - offset[0])


def required_nu_m2(nu_ab, nu_LO):
    """AOM2 frequency that puts the locked beat on the qubit resonance."""
    return nu_ab - nu_LO
