"""Scenario files: parse, validate everything up front, dispatch, write artifacts.

A scenario is a YAML mapping::

    name: fig2
    seed: 1
    output_dir: out/fig2
    comb:   {nu_rep0: 80.0e6, m_max: 3, nu_M1: 210.0e6, nu_M2: 200.0e6}
    drift:  {...}      # DriftProfile fields
    jitter: {...}      # JitterProfile fields
    lock:   {...}      # LockConfig fields, error_noise as a NoiseSpec mapping
    qubit:  {...}      # QubitSpec fields, sidebands as [{offset, strength}]
    experiment: {type: spectrum, ...}

Only ``name``, ``seed`` and ``experiment.type`` are required; every other
section falls back to the defaults of its dataclass.  Validation collects all
problems before raising, so one run reports every bad field at once.
"""

from dataclasses import MISSING, dataclass, fields
import hashlib
import json
import math
from importlib import resources
from pathlib import Path
import platform
import re
import time

import numpy as np
import scipy
import yaml

from . import __version__
from ._seeding import derive_seed
from .comb import CombSpec, periodogram, rf_line_spectrum, synthesize_time_domain, welch_spectrum
from .lock import LockConfig, effective_beat, error_signal, residual_at_tooth, required_nu_m2
from .noise import (DriftProfile, JitterProfile, NoiseSpec, generate_trajectory,
                    sample_fractional_noise, tooth_frequency)
from .qubit import QubitSpec, Sideband, error_probability_mc, raman_scan
from .ramsey import RamseyConfig, run_ramsey

EXPERIMENTS = ("spectrum", "lock_demo", "raman_scan", "error_sweep", "ramsey")
SUFFIX = ".scenario"
_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.-]*$")


class ScenarioError(ValueError):
    """Raised with every validation problem found in a scenario."""

    def __init__(self, problems, source=None):
        self.problems = list(problems)
        where = f"{source}: " if source else ""
        super().__init__(where + "; ".join(self.problems))


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    output_dir: Path
    comb: CombSpec
    drift: DriftProfile
    jitter: JitterProfile
    lock: LockConfig
    qubit: QubitSpec
    experiment: str
    params: dict
    raw: dict

    def digest(self):
        """SHA-256 of the canonical scenario content; the output location is not part of it."""
        content = {k: v for k, v in self.raw.items() if k != "output_dir"}
        canon = json.dumps(content, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


@dataclass
class RunManifest:
    scenario: str
    scenario_hash: str
    artifacts: list
    versions: dict
    wall_clock_s: float
    status: str = "ok"
    error: str = ""

    def write(self, path):
        payload = {
            "scenario": self.scenario,
            "scenario_hash": self.scenario_hash,
            "artifacts": self.artifacts,
            "versions": self.versions,
            "wall_clock_s": self.wall_clock_s,
            "status": self.status,
            "error": self.error,
        }
        Path(path).write_text(json.dumps(payload, indent=2) + "\n")


# --- experiment parameter schemas -------------------------------------------------
# name -> (kind, default); _REQ marks a required parameter.

_REQ = object()

PARAM_SCHEMAS = {
    "spectrum": {
        "source": ("str", "comb"),
        "include_arm1": ("bool", True),
        "include_arm2": ("bool", True),
        "rbw": ("float", 110.0),
        "time_domain": ("bool", False),
        "sample_rate": ("float", None),
        "duration": ("float", None),
        "td_rbw": ("float", None),
    },
    "lock_demo": {
        "duration": ("float", _REQ),
        "dt": ("float", _REQ),
        "nu_M2": ("float", None),
        "teeth": ("intlist", []),
    },
    "raman_scan": {
        "pulse_duration": ("float", 40e-6),
        "trials": ("int", 40),
        "scan": ("ranges", _REQ),
        "compare_modes": ("bool", True),
        "far_points": ("floatlist", []),
    },
    "error_sweep": {
        "alphas_db_per_hz": ("floatlist", _REQ),
        "omega0": ("float", 600e3),
        "total_time": ("float", 1e-3),
        "trials": ("int", 1000),
    },
    "ramsey": {
        "delays": ("delays", _REQ),
        "trials_per_delay": ("int", 100),
        "lock_engaged": ("bool", True),
        "analysis": ("str", "fit_exponential"),
    },
}


def _coerce(kind, value, where, problems):
    try:
        if kind == "float":
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        if kind == "int":
            if isinstance(value, bool) or int(value) != value:
                raise TypeError
            return int(value)
        if kind == "bool":
            if not isinstance(value, bool):
                raise TypeError
            return value
        if kind == "str":
            if not isinstance(value, str):
                raise TypeError
            return value
        if kind == "floatlist":
            return [float(v) for v in value]
        if kind == "intlist":
            return [int(v) for v in value]
        if kind == "ranges":
            return _scan_points(value)
        if kind == "delays":
            if isinstance(value, dict):
                return list(np.linspace(float(value["start"]), float(value["stop"]),
                                        int(value["num"])))
            return [float(v) for v in value]
    except (TypeError, ValueError, KeyError):
        problems.append(f"{where}: expected {kind}, got {value!r}")
        return None
    raise AssertionError(kind)


def _scan_points(value):
    """Union of ``{start, stop, step}`` ranges and explicit lists, sorted and deduplicated."""
    items = value if isinstance(value, list) else [value]
    pts = []
    for item in items:
        if isinstance(item, dict):
            start, stop, step = float(item["start"]), float(item["stop"]), float(item["step"])
            if step <= 0 or stop < start:
                raise ValueError
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            pts.extend(start + step * np.arange(count))
        else:
            pts.append(float(item))
    return sorted(set(round(p, 6) for p in pts))


def _section(cls, data, where, problems, convert=None, required=()):
    """Build dataclass ``cls`` from a mapping, appending problems instead of raising."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        problems.append(f"{where}: expected a mapping")
        return None
    known = {f.name for f in fields(cls)}
    kwargs = {}
    before = len(problems)
    for key in data:
        if key not in known:
            problems.append(f"{where}.{key}: unknown field")
    for key in required:
        if key not in data:
            problems.append(f"{where}.{key}: missing required field")
    for key, value in data.items():
        if key not in known:
            continue
        conv = (convert or {}).get(key, "float")
        kwargs[key] = value if conv is None else _coerce(conv, value, f"{where}.{key}", problems)
    if len(problems) > before:
        return None
    try:
        obj = _construct_unchecked(cls, kwargs)
    except TypeError as exc:
        problems.append(f"{where}: {exc}")
        return None
    issues = obj.problems()
    if issues:
        problems.extend(f"{where}: {msg}" for msg in issues)
        return None
    return cls(**kwargs)


def _construct_unchecked(cls, kwargs):
    """Instance with fields set but ``__post_init__`` skipped, for ``problems()``."""
    obj = object.__new__(cls)
    for f in fields(cls):
        if f.name in kwargs:
            value = kwargs[f.name]
        elif f.default is not MISSING:
            value = f.default
        elif f.default_factory is not MISSING:
            value = f.default_factory()
        else:
            raise TypeError(f"missing required field {f.name!r}")
        object.__setattr__(obj, f.name, value)
    return obj


def parse_scenario(raw, source=None):
    """Validate a scenario mapping; raise :class:`ScenarioError` listing every problem."""
    problems = []
    if not isinstance(raw, dict):
        raise ScenarioError(["scenario must be a mapping"], source)
    allowed = {"name", "seed", "output_dir", "description", "comb", "drift", "jitter", "lock",
               "qubit", "experiment"}
    for key in raw:
        if key not in allowed:
            problems.append(f"{key}: unknown field")
    name = raw.get("name")
    if name is None:
        problems.append("name: missing required field")
    elif not isinstance(name, str) or not _NAME_RE.match(name):
        problems.append(f"name: {name!r} is not a non-empty filesystem-safe identifier")
    seed = raw.get("seed")
    if seed is None:
        problems.append("seed: missing required field")
    elif isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        problems.append(f"seed: expected a non-negative integer, got {seed!r}")
    output_dir = raw.get("output_dir", f"out/{name}")

    comb = _section(CombSpec, raw.get("comb", {"nu_rep0": 80.6e6, "m_max": 3}), "comb", problems,
                    convert={"m_max": "int"}, required=("nu_rep0", "m_max"))
    drift = _section(DriftProfile, raw.get("drift"), "drift", problems)
    jitter = _section(JitterProfile, raw.get("jitter"), "jitter", problems)

    lock_raw = dict(raw.get("lock") or {}) if isinstance(raw.get("lock") or {}, dict) else None
    lock = None
    if lock_raw is None:
        problems.append("lock: expected a mapping")
    else:
        noise_raw = lock_raw.pop("error_noise", None)
        noise = _noise_section(noise_raw, "lock.error_noise", problems) if noise_raw is not None \
            else NoiseSpec(-90.0)
        lock = _section(LockConfig, lock_raw, "lock", problems,
                        convert={"n": "int", "mode": "str"})
        if lock is not None and noise is not None:
            lock = LockConfig(**{**{f.name: getattr(lock, f.name) for f in fields(LockConfig)},
                                 "error_noise": noise})
            nu_rep0 = drift.nu_rep0 if drift is not None else None
            problems.extend(f"lock: {msg}" for msg in lock.problems(nu_rep0))

    qubit = _qubit_section(raw.get("qubit"), problems)

    exp = raw.get("experiment")
    experiment, params = None, {}
    if not isinstance(exp, dict) or "type" not in exp:
        problems.append("experiment.type: missing required field")
    elif exp["type"] not in EXPERIMENTS:
        problems.append(f"experiment.type: {exp['type']!r} not one of {EXPERIMENTS}")
    else:
        experiment = exp["type"]
        params = _experiment_params(experiment, exp, problems)
        if not problems:
            _cross_checks(experiment, params, comb, drift, lock, qubit, problems)

    if problems:
        raise ScenarioError(problems, source)
    return Scenario(name, seed, Path(output_dir), comb, drift, jitter, lock, qubit, experiment,
                    params, raw)


def _noise_section(data, where, problems):
    if not isinstance(data, dict):
        problems.append(f"{where}: expected a mapping")
        return None
    known = {"alpha_db_per_hz", "shape", "loop_bandwidth_hz", "floor_db_per_hz"}
    bad = [k for k in data if k not in known]
    problems.extend(f"{where}.{k}: unknown field" for k in bad)
    if bad:
        return None
    try:
        spec = NoiseSpec.from_dict({k: _yaml_float(v) for k, v in data.items()})
    except (TypeError, ValueError) as exc:
        problems.append(f"{where}: {exc}")
        return None
    return spec


def _yaml_float(v):
    if isinstance(v, str) and v.strip().lower() in ("-inf", "-.inf"):
        return -math.inf
    return v


def _qubit_section(data, problems):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        problems.append("qubit: expected a mapping")
        return None
    data = dict(data)
    sidebands = []
    for i, sb in enumerate(data.pop("sidebands", []) or []):
        if not isinstance(sb, dict) or set(sb) != {"offset", "strength"}:
            problems.append(f"qubit.sidebands[{i}]: expected {{offset, strength}}")
            continue
        try:
            sidebands.append(Sideband(float(sb["offset"]), float(sb["strength"])))
        except (TypeError, ValueError):
            problems.append(f"qubit.sidebands[{i}]: offset and strength must be numbers")
    q = _section(QubitSpec, data, "qubit", problems, convert={"init_state": "str"})
    if q is None:
        return None
    q = QubitSpec(q.nu_ab, q.omega0, (), q.init_state)
    trial = _construct_unchecked(QubitSpec, {"nu_ab": q.nu_ab, "omega0": q.omega0,
                                             "sidebands": tuple(sidebands),
                                             "init_state": q.init_state})
    issues = trial.problems()
    if issues:
        problems.extend(f"qubit: {m}" for m in issues)
        return None
    return QubitSpec(q.nu_ab, q.omega0, tuple(sidebands), q.init_state)


def _experiment_params(kind, exp, problems):
    schema = PARAM_SCHEMAS[kind]
    out = {}
    for key in exp:
        if key != "type" and key not in schema:
            problems.append(f"experiment.{key}: unknown parameter for {kind}")
    for key, (conv, default) in schema.items():
        if key in exp:
            out[key] = _coerce(conv, exp[key], f"experiment.{key}", problems)
        elif default is _REQ:
            problems.append(f"experiment.{key}: missing required field")
        else:
            out[key] = default
    return out


def _cross_checks(kind, p, comb, drift, lock, qubit, problems):
    if kind == "spectrum":
        if p["source"] not in ("comb", "error_signal"):
            problems.append("experiment.source: must be 'comb' or 'error_signal'")
        if p["rbw"] <= 0:
            problems.append("experiment.rbw: must be > 0")
        needs_td = p["time_domain"] or p["source"] == "error_signal"
        for key in ("sample_rate", "duration", "td_rbw"):
            if needs_td and p[key] is None:
                problems.append(f"experiment.{key}: required for time-domain spectra")
        if p["source"] == "comb" and not (p["include_arm1"] or p["include_arm2"]):
            problems.append("experiment: at least one arm must be included")
        if (p["source"] == "comb" and p["include_arm1"] and p["include_arm2"]
                and comb is not None and comb.delta_nu_m == 0):
            problems.append("comb: nu_M1 == nu_M2 with both arms is degenerate")
    elif kind == "lock_demo":
        if p["dt"] <= 0 or p["duration"] < p["dt"]:
            problems.append("experiment: need dt > 0 and duration >= dt")
        if any(m < 1 for m in p["teeth"]):
            problems.append("experiment.teeth: tooth indices must be >= 1")
    elif kind == "raman_scan":
        if p["trials"] < 1:
            problems.append("experiment.trials: must be >= 1")
        if p["pulse_duration"] < 0:
            problems.append("experiment.pulse_duration: must be >= 0")
        if lock is not None and drift is not None and p["scan"]:
            drive0 = lock.n * drift.nu_rep0 - lock.nu_LO
            if max(p["scan"]) >= drive0:
                problems.append(f"experiment.scan: nu_M2 must stay below the AOM1 drive ({drive0} Hz)")
    elif kind == "error_sweep":
        if p["trials"] < 1:
            problems.append("experiment.trials: must be >= 1")
        if p["omega0"] <= 0 or p["total_time"] <= 0:
            problems.append("experiment: omega0 and total_time must be > 0")
    elif kind == "ramsey":
        try:
            RamseyConfig(tuple(p["delays"]), p["trials_per_delay"], p["lock_engaged"],
                         p["analysis"])
        except ValueError as exc:
            problems.append(f"experiment: {exc}")
        if qubit is not None and qubit.omega0 <= 0:
            problems.append("qubit.omega0: Ramsey pulses need omega0 > 0")


# --- loading ------------------------------------------------------------------------

def bundled_scenarios():
    root = resources.files("beatlock") / "scenarios"
    return sorted(p.name[: -len(SUFFIX)] for p in root.iterdir() if p.name.endswith(SUFFIX))


def _resolve(path_or_name):
    p = Path(path_or_name)
    if p.exists():
        return p.read_text(), str(p)
    name = p.name[: -len(SUFFIX)] if p.name.endswith(SUFFIX) else p.name
    res = resources.files("beatlock") / "scenarios" / (name + SUFFIX)
    if res.is_file():
        return res.read_text(), f"{name}{SUFFIX} (bundled)"
    raise FileNotFoundError(f"no scenario file or bundled scenario named {path_or_name!r}")


def load_scenario(path, seed=None, output_dir=None):
    """Read and validate a scenario file (or a bundled scenario name)."""
    text, source = _resolve(path)
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}: " if mark else ""
        raise ScenarioError([f"parse error: {where}{getattr(exc, 'problem', exc)}"], source) from exc
    if isinstance(raw, dict):
        raw = dict(raw)
        if seed is not None:
            raw["seed"] = seed
        if output_dir is not None:
            raw["output_dir"] = str(output_dir)
    return parse_scenario(raw, source)


# --- running ------------------------------------------------------------------------

def _fmt(x):
    return repr(float(x))


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path, payload):
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def run_scenario(s):
    """Run the scenario's experiment and write its artifacts plus ``manifest.json``."""
    out = Path(s.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    start = time.perf_counter()
    status, error = "ok", ""
    try:
        runner = _RUNNERS[s.experiment]
        runner(s, out, written, derive_seed(s.seed, s.experiment))
    except Exception as exc:  # recorded, then re-raised for the CLI exit code
        status, error = "error", f"{type(exc).__name__}: {exc}"
        raise
    finally:
        manifest = RunManifest(
            scenario=s.name,
            scenario_hash=s.digest(),
            artifacts=[p.name for p in written if p.exists() and p.stat().st_size > 0],
            versions={"beatlock": __version__, "numpy": np.__version__,
                      "scipy": scipy.__version__, "python": platform.python_version()},
            wall_clock_s=round(time.perf_counter() - start, 3),
            status=status,
            error=error,
        )
        manifest.write(out / "manifest.json")
    return manifest


def _run_spectrum(s, out, written, seed):
    p = s.params
    if p["source"] == "comb":
        spec = rf_line_spectrum(s.comb, p["include_arm1"], p["include_arm2"], rbw=p["rbw"])
        path = out / "spectrum.csv"
        spec.to_csv(path)
        written.append(path)
        if p["time_domain"]:
            x = synthesize_time_domain(s.comb, p["duration"], p["sample_rate"], seed,
                                       p["include_arm1"], p["include_arm2"])
            td = periodogram(x, p["sample_rate"], p["td_rbw"])
            path = out / "spectrum_time_domain.csv"
            td.to_csv(path)
            written.append(path)
        return
    # Error-signal noise at the two monitoring points: direct (MP1) and after the PLL (MP2).
    direct = s.lock.error_noise
    pll = direct.with_pll(s.lock.loop_bandwidth, s.lock.oscillator_floor)
    summary = {}
    for label, noise in (("mp1_direct", direct), ("mp2_pll", pll)):
        x = sample_fractional_noise(noise, p["duration"], p["sample_rate"],
                                    derive_seed(seed, label)).samples
        freqs, power, enbw = welch_spectrum(x, p["sample_rate"], p["td_rbw"], window="hann")
        with np.errstate(divide="ignore"):
            psd_db = 10 * np.log10(power / enbw)
        path = out / f"{label}_psd.csv"
        _write_rows(path, ["freq_hz", "psd_db_per_hz"], zip(freqs[1:], psd_db[1:]))
        written.append(path)
        summary[label] = _band_levels(freqs, power / enbw, s.lock.loop_bandwidth, p["sample_rate"])
    summary["pll_step_db"] = summary["mp2_pll"]["in_band_db"] - summary["mp2_pll"]["out_of_band_db"]
    summary["floor_reduction_db"] = (summary["mp1_direct"]["out_of_band_db"]
                                     - summary["mp2_pll"]["out_of_band_db"])
    path = out / "noise_step.json"
    _write_json(path, summary)
    written.append(path)


def _band_levels(freqs, psd, loop_bandwidth, sample_rate):
    """Mean PSD (dB/Hz) well inside and well outside the PLL loop bandwidth."""
    inb = (freqs >= loop_bandwidth / 10) & (freqs <= loop_bandwidth / 2)
    outb = (freqs >= 2 * loop_bandwidth) & (freqs <= sample_rate / 4)
    return {"in_band_db": float(10 * np.log10(np.mean(psd[inb]))),
            "out_of_band_db": float(10 * np.log10(np.mean(psd[outb])))}


def _run_lock_demo(s, out, written, seed):
    p = s.params
    traj = generate_trajectory(s.drift, s.jitter, p["duration"], p["dt"], derive_seed(seed, "traj"))
    n = s.lock.n
    nu_m2 = p["nu_M2"] if p["nu_M2"] is not None else required_nu_m2(s.qubit.nu_ab, s.lock.nu_LO)
    locked = error_signal(traj, s.lock)
    unlocked = locked.frozen_at_start()
    beat_l = effective_beat(traj, locked, nu_m2, n)
    beat_u = effective_beat(traj, unlocked, nu_m2, n)

    path = out / "trajectory.csv"
    _write_rows(path, ["t_s", "nu_rep_hz"], zip(traj.t, traj.nu_rep))
    written.append(path)
    path = out / f"tooth_{n}.csv"
    _write_rows(path, ["t_s", "freq_hz"], zip(traj.t, tooth_frequency(traj, n)))
    written.append(path)
    for name, series in (("drive_locked", locked), ("beat_locked", beat_l),
                         ("beat_unlocked", beat_u)):
        path = out / f"{name}.csv"
        series.to_csv(path)
        written.append(path)
    teeth = sorted(set(p["teeth"]) | {n})
    cols = [residual_at_tooth(traj, locked, nu_m2, m, n) for m in teeth]
    path = out / "residuals.csv"
    _write_rows(path, ["t_s"] + [f"m{m}_hz" for m in teeth], zip(traj.t, *cols))
    written.append(path)

    span_min = (traj.t[-1] - traj.t[0]) / 60.0
    summary = {
        "n": n,
        "lock_point_hz": s.lock.nu_LO + nu_m2,
        "beat_note_t0_hz": float(locked.freq[0]),
        "rep_rate_drift_hz_per_min": float((traj.nu_rep[-1] - traj.nu_rep[0]) / span_min),
        "tooth_drift_hz_per_min": float(
            (tooth_frequency(traj, n)[-1] - tooth_frequency(traj, n)[0]) / span_min),
        "locked_max_deviation_hz": float(np.max(np.abs(beat_l.freq - (s.lock.nu_LO + nu_m2)))),
        "unlocked_max_deviation_hz": float(np.max(np.abs(beat_u.freq - beat_u.freq[0]))),
    }
    path = out / "lock_summary.json"
    _write_json(path, summary)
    written.append(path)


def _run_raman(s, out, written, seed):
    p = s.params
    traj = generate_trajectory(s.drift, JitterProfile(0.0, s.jitter.bandwidth),
                               p["pulse_duration"] + 1e-6, 1e-6, derive_seed(seed, "traj"))
    modes = {}
    if p["compare_modes"]:
        modes["noiseless"] = LockConfig(**{**_lock_kwargs(s.lock), "mode": "direct",
                                           "error_noise": NoiseSpec()})
        modes["direct"] = LockConfig(**{**_lock_kwargs(s.lock), "mode": "direct"})
        modes["pll"] = LockConfig(**{**_lock_kwargs(s.lock), "mode": "pll"})
    else:
        modes[s.lock.mode] = s.lock
    summary = {"carrier_nu_m2_hz": required_nu_m2(s.qubit.nu_ab, s.lock.nu_LO)}
    scans = {}
    for label, cfg in modes.items():
        drive = error_signal(traj, cfg)
        scan = raman_scan(s.qubit, drive, p["scan"], p["pulse_duration"], p["trials"],
                          derive_seed(seed, label), traj=traj, n=cfg.n)
        scans[label] = scan
        path = out / f"raman_{label}.csv"
        scan.to_csv(path)
        written.append(path)
    carrier = summary["carrier_nu_m2_hz"]
    ref = scans.get("noiseless") or next(iter(scans.values()))
    step = float(np.min(np.diff(ref.nu_m2))) if ref.nu_m2.size > 1 else 0.0
    peaks = {"carrier": ref.peak_near(carrier, 10 * step + 1.0)}
    for sb in s.qubit.sidebands:
        peaks[f"sideband_{sb.offset:+.0f}"] = ref.peak_near(carrier + sb.offset, 10 * step + 1.0)
    summary["peaks_nu_m2_hz"] = peaks
    if p["far_points"]:
        far = np.isin(np.round(ref.nu_m2, 6), np.round(p["far_points"], 6))
        summary["far_background"] = {k: float(v.p_b[far].mean()) for k, v in scans.items()}
    path = out / "raman_summary.json"
    _write_json(path, summary)
    written.append(path)


def _lock_kwargs(lock):
    return {f.name: getattr(lock, f.name) for f in fields(LockConfig)}


def _run_error_sweep(s, out, written, seed):
    p = s.params
    rows = []
    for alpha in p["alphas_db_per_hz"]:
        est = error_probability_mc(alpha, p["omega0"], p["total_time"], p["trials"],
                                   derive_seed(seed, "alpha", repr(alpha)))
        rows.append((alpha, est.epsilon, est.stderr, est.predicted))
    path = out / "error_sweep.csv"
    _write_rows(path, ["alpha_db_per_hz", "epsilon", "stderr", "predicted"], rows)
    written.append(path)


def _run_ramsey(s, out, written, seed):
    p = s.params
    cfg = RamseyConfig(tuple(p["delays"]), p["trials_per_delay"], p["lock_engaged"], p["analysis"])
    res = run_ramsey(s.qubit, s.lock, s.drift, s.jitter, cfg, seed)
    path = out / "ramsey.csv"
    res.to_csv(path)
    written.append(path)
    path = out / "ramsey.json"
    _write_json(path, res.summary())
    written.append(path)


_RUNNERS = {
    "spectrum": _run_spectrum,
    "lock_demo": _run_lock_demo,
    "raman_scan": _run_raman,
    "error_sweep": _run_error_sweep,
    "ramsey": _run_ramsey,
}
