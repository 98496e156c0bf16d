"""Effective two-level qubit driven by the Raman beat note.

The excited state of the Lambda system is taken as adiabatically eliminated.
In the rotating frame the Hamiltonian of one resonance channel is

    H(t) = 1/2 * [Omega(t) (cos(phi) sx + sin(phi) sy) - delta(t) sz]

with ``delta = 2 pi (nu_sb - nu_res)`` and ``Omega = 2 pi omega0 s (1 + x(t))``
where ``x`` is the fractional noise realization carried by the beat and ``s``
the channel strength (1 for the carrier).  Coefficients are held constant
over each step and the exact SU(2) exponential of every step is used, so
the propagator is unitary to round-off.  Motional sidebands are independent
channels whose excitation probabilities are summed and clamped at 1.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from ._seeding import derive_seed
from .lock import BeatNote, effective_beat
from .noise import NoiseSpec, sample_fractional_noise, db_to_linear

STEPS_PER_PERIOD = 50


class ResolutionError(ValueError):
    pass


@dataclass(frozen=True)
class Sideband:
    offset: float  # Hz, added to nu_ab
    strength: float  # Rabi frequency relative to the carrier


@dataclass(frozen=True)
class QubitSpec:
    nu_ab: float = 12.642819e9
    omega0: float = 12.5e3
    sidebands: tuple = ()
    init_state: str = "a"

    def problems(self):
        out = []
        if not self.nu_ab > 0:
            out.append("nu_ab must be > 0")
        if not (math.isfinite(self.omega0) and self.omega0 >= 0):
            out.append("omega0 must be finite and >= 0")
        for sb in self.sidebands:
            if not 0 <= sb.strength <= 1:
                out.append(f"sideband strength {sb.strength} outside [0, 1]")
        if self.init_state not in ("a", "b"):
            out.append(f"init_state must be 'a' or 'b' (got {self.init_state!r})")
        return out

    def __post_init__(self):
        object.__setattr__(self, "sidebands", tuple(self.sidebands))
        problems = self.problems()
        if problems:
            raise ValueError("invalid QubitSpec: " + "; ".join(problems))

    def channels(self):
        """(resonance frequency Hz, relative strength) for carrier and sidebands."""
        return [(self.nu_ab, 1.0)] + [(self.nu_ab + sb.offset, sb.strength) for sb in self.sidebands]


@dataclass(frozen=True, eq=False)
class EvolutionResult:
    p_b: float
    trajectory: tuple | None = None  # (t, p_b) arrays when recorded
    seed: int = 0
    amplitudes: tuple = (1.0 + 0j, 0j)  # final carrier-channel (c_a, c_b)
    norm_error: float = 0.0

    def to_csv(self, path):
        if self.trajectory is None:
            raise ValueError("evolution was run without recording a trajectory")
        with open(path, "w", newline="") as f:
            f.write("t_s,p_b\n")
            for t, p in zip(*(x.tolist() for x in self.trajectory)):
                f.write(f"{t!r},{p!r}\n")


# --- SU(2) kernel -----------------------------------------------------------
# A step U = [[a, -conj(b)], [b, conj(a)]] is stored as the pair (a, b).

def step_elements(omega, delta, dt, phase=0.0):
    """SU(2) pair for constant ``omega``, ``delta`` (rad/s) over ``dt`` seconds."""
    omega = np.asarray(omega, dtype=float)
    delta = np.asarray(delta, dtype=float)
    rate = np.hypot(omega, delta)
    theta = 0.5 * rate * dt
    # sin(theta)/rate without dividing by zero.
    s_over_r = 0.5 * dt * np.sinc(theta / np.pi)
    a = np.cos(theta) + 1j * delta * s_over_r
    b = -1j * omega * s_over_r * np.exp(1j * np.asarray(phase))
    return a, b


def compose(later, earlier):
    """Product ``U_later @ U_earlier`` of SU(2) pairs."""
    a1, b1 = later
    a2, b2 = earlier
    return a1 * a2 - np.conj(b1) * b2, b1 * a2 + np.conj(a1) * b2


def chain_product(a, b):
    """Ordered product ``U_N ... U_1`` along the last axis, by pairwise reduction."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape[-1] == 0:
        return np.ones(a.shape[:-1], complex), np.zeros(a.shape[:-1], complex)
    while a.shape[-1] > 1:
        if a.shape[-1] % 2:
            pad = [(0, 0)] * (a.ndim - 1) + [(0, 1)]
            a = np.pad(a, pad, constant_values=1.0)
            b = np.pad(b, pad, constant_values=0.0)
        a, b = compose((a[..., 1::2], b[..., 1::2]), (a[..., 0::2], b[..., 0::2]))
    return a[..., 0], b[..., 0]


def prefix_products(a, b):
    """All partial products ``U_k ... U_1`` along the last axis (Hillis-Steele scan)."""
    a = np.array(a, dtype=complex)
    b = np.array(b, dtype=complex)
    k = 1
    n = a.shape[-1]
    while k < n:
        na, nb = compose((a[..., k:], b[..., k:]), (a[..., :-k], b[..., :-k]))
        a[..., k:], b[..., k:] = na, nb
        k *= 2
    return a, b


def apply(u, state):
    a, b = u
    ca, cb = state
    return a * ca - np.conj(b) * cb, b * ca + np.conj(a) * cb


# --- evolution ----------------------------------------------------------------

def max_step(omega0, max_detuning_hz):
    """Largest step allowed for the given Rabi frequency and detuning (both Hz)."""
    rate = max(omega0, max_detuning_hz)
    return math.inf if rate == 0 else 1.0 / (STEPS_PER_PERIOD * rate)


def _initial(init_state):
    return (1.0 + 0j, 0j) if init_state == "a" else (0j, 1.0 + 0j)


def evolve(qubit, beat, pulse_duration, dt, seed, record=False, clamp=True):
    """Drive ``qubit`` with ``beat`` for ``pulse_duration`` seconds.

    ``dt`` is an upper bound on the step; the pulse is cut into
    ``ceil(pulse_duration / dt)`` equal steps.  Noise on the Rabi frequency
    is drawn from ``beat.noise`` at the step rate using ``seed``.
    """
    if pulse_duration < 0:
        raise ValueError("pulse_duration must be >= 0")
    if not dt > 0:
        raise ValueError("dt must be > 0")
    init = _initial(qubit.init_state)
    if pulse_duration == 0:
        p0 = abs(init[1]) ** 2
        traj = (np.zeros(1), np.array([p0])) if record else None
        return EvolutionResult(p0, traj, seed, init)

    nsteps = max(1, int(math.ceil(pulse_duration / dt - 1e-9)))
    step = pulse_duration / nsteps
    mid = (np.arange(nsteps) + 0.5) * step
    nu_sb = np.interp(mid, beat.t, beat.freq)

    channels = qubit.channels()
    res = np.array([c[0] for c in channels])
    strength = np.array([c[1] for c in channels])
    detuning_hz = nu_sb[None, :] - res[:, None]
    worst = float(np.max(np.abs(detuning_hz)))
    if dt > max_step(qubit.omega0, worst) * (1 + 1e-9):
        raise ResolutionError(
            f"dt={dt} s too coarse: need dt <= {max_step(qubit.omega0, worst)} s "
            f"(omega0={qubit.omega0} Hz, max |detuning|={worst} Hz)")

    if beat.noise.enabled:
        x = sample_fractional_noise(beat.noise, nsteps * step, 1.0 / step, seed).samples
    else:
        x = np.zeros(nsteps)
    omega = 2 * np.pi * qubit.omega0 * strength[:, None] * (1.0 + x[None, :])
    ua, ub = step_elements(omega, 2 * np.pi * detuning_hz, step)

    if record:
        pa, pb = prefix_products(ua, ub)
        ca, cb = apply((pa, pb), init)
        fa, fb = ca[:, -1], cb[:, -1]
        norm_error = float(np.max(np.abs(np.abs(ca) ** 2 + np.abs(cb) ** 2 - 1)))
    else:
        fa, fb = apply(chain_product(ua, ub), init)
        norm_error = float(np.max(np.abs(np.abs(fa) ** 2 + np.abs(fb) ** 2 - 1)))

    def excitation(ca_, cb_):
        # Transfer out of the initial state, per channel.
        return np.abs(cb_) ** 2 if qubit.init_state == "a" else np.abs(ca_) ** 2

    def to_pb(exc):
        total = np.sum(exc, axis=0)
        if clamp:
            total = np.minimum(total, 1.0)
        return total if qubit.init_state == "a" else 1.0 - total

    p_b = float(to_pb(excitation(fa, fb)))
    traj = None
    if record:
        t = np.concatenate([[0.0], (np.arange(nsteps) + 1) * step])
        p_series = np.concatenate([[abs(init[1]) ** 2], to_pb(excitation(ca, cb))])
        traj = (t, p_series)
    return EvolutionResult(p_b, traj, seed, (complex(fa[0]), complex(fb[0])), norm_error)


def rabi_probability(omega0, detuning, t):
    """Closed-form transfer |a> -> |b> for constant drive (both in Hz, cycles)."""
    om = 2 * np.pi * np.asarray(omega0, dtype=float)
    de = 2 * np.pi * np.asarray(detuning, dtype=float)
    gen = np.hypot(om, de)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(gen > 0, om ** 2 / np.where(gen > 0, gen, 1) ** 2, 0.0)
    return ratio * np.sin(gen * np.asarray(t) / 2) ** 2


# --- Raman scan ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ScanResult:
    nu_m2: np.ndarray
    p_b: np.ndarray
    stderr: np.ndarray
    trials: int

    def to_csv(self, path):
        with open(path, "w", newline="") as f:
            f.write("nu_m2_hz,p_b,stderr\n")
            for row in zip(self.nu_m2.tolist(), self.p_b.tolist(), self.stderr.tolist()):
                f.write("{!r},{!r},{!r}\n".format(*row))

    def peak_near(self, nu_m2, window):
        """Scan frequency of the largest p_b within +/- window of ``nu_m2``."""
        sel = np.flatnonzero(np.abs(self.nu_m2 - nu_m2) <= window)
        if sel.size == 0:
            raise ValueError(f"no scan points within {window} Hz of {nu_m2} Hz")
        return float(self.nu_m2[sel[np.argmax(self.p_b[sel])]])


def raman_scan(qubit, lock_output, nu_M2_range, pulse_duration, trials, seed, *, traj, n,
               dt=None):
    """Mean excitation versus AOM2 frequency.

    For every ``nu_M2`` the beat note is rebuilt through
    :func:`beatlock.lock.effective_beat` from ``traj`` and the AOM1 drive
    ``lock_output``, and :func:`evolve` is averaged over ``trials`` noise
    realizations (a single deterministic run when the drive is noiseless).
    ``dt`` defaults to the coarsest step the resolution rule allows at each
    scan point.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    nu_M2_range = np.asarray(nu_M2_range, dtype=float)
    means = np.empty(nu_M2_range.size)
    errs = np.zeros(nu_M2_range.size)
    for i, nu_m2 in enumerate(nu_M2_range):
        beat = effective_beat(traj, lock_output, nu_m2, n)
        step = dt
        if step is None:
            worst = max(float(np.max(np.abs(beat.freq - r))) for r, _ in qubit.channels())
            step = max_step(qubit.omega0, worst)
        k = trials if beat.noise.enabled else 1
        vals = np.array([
            evolve(qubit, beat, pulse_duration, step, derive_seed(seed, "raman_scan", i, j)).p_b
            for j in range(k)
        ])
        means[i] = vals.mean()
        if k > 1:
            errs[i] = vals.std(ddof=1) / math.sqrt(k)
    return ScanResult(nu_M2_range, means, errs, trials)


# --- error law ---------------------------------------------------------------

@dataclass(frozen=True)
class ErrorEstimate:
    epsilon: float
    stderr: float
    trials: int
    predicted: float


def predicted_error(alpha_db_per_hz, omega0, total_time):
    """Leading-order infidelity (pi^2/2) * alpha * omega0^2 * T."""
    return float(np.pi ** 2 / 2 * db_to_linear(alpha_db_per_hz) * omega0 ** 2 * total_time)


def error_probability_mc(alpha_db_per_hz, omega0, total_time, trials, seed, dt=None):
    """Monte-Carlo infidelity of a resonant drive with flat Rabi noise.

    Each trial evolves |a> for ``total_time`` with fractional noise
    ``alpha_db_per_hz`` on the Rabi frequency and is compared with the
    noiseless final state: ``eps = 1 - |<psi_0|psi>|^2``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    qubit = QubitSpec(nu_ab=1.0, omega0=omega0)
    step = dt if dt is not None else max_step(omega0, 0.0)
    ideal = evolve(qubit, _resonant(qubit, NoiseSpec()), total_time, step, 0).amplitudes
    beat = _resonant(qubit, NoiseSpec(alpha_db_per_hz))
    eps = np.empty(trials)
    for j in range(trials):
        ca, cb = evolve(qubit, beat, total_time, step,
                        derive_seed(seed, "error_mc", j)).amplitudes
        overlap = np.conj(ideal[0]) * ca + np.conj(ideal[1]) * cb
        eps[j] = 1.0 - abs(overlap) ** 2
    stderr = float(eps.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return ErrorEstimate(float(eps.mean()), stderr, trials,
                         predicted_error(alpha_db_per_hz, omega0, total_time))


def _resonant(qubit, noise):
    return BeatNote.constant(qubit.nu_ab, noise)


def rabi_noise_density(omega0, noise):
    """Fractional Rabi-frequency noise PSD produced by one noisy arm.

    The Rabi frequency is the product of the two arm fields and only one arm
    carries the noise, so the absolute density is ``omega0 * sqrt(alpha)`` and
    the fractional PSD equals the arm's ``alpha`` (flat or PLL-shaped).
    Returned as a :class:`NoiseSpec`; use ``.psd_db(f)`` for dB/Hz values and
    :func:`rabi_noise_amplitude` for Hz/sqrt(Hz).
    """
    if omega0 < 0:
        raise ValueError("omega0 must be >= 0")
    if omega0 == 0:
        return NoiseSpec()
    return noise


def rabi_noise_amplitude(omega0, noise, freqs):
    """Absolute Rabi-frequency noise density ``omega0 * sqrt(alpha(f))`` in Hz/sqrt(Hz)."""
    return omega0 * np.sqrt(rabi_noise_density(omega0, noise).psd(freqs))
