"""YAML experiment configuration.

Frequencies in the file are plain Hz and are converted to rad/s here, once.
Example::

    targets:
      - {gamma_n_hz_per_tesla: 10.7084e6, b0_tesla: 0.1, a_x_hz: 2.0e4, a_z_hz: 0.0}
      - {omega_av_hz: 2.0e6, a_perp_hz: 2.0e5}
    sequence: {builtin: xy8, rabi_hz: 20.0e6, global_phase_rad: 0.0}
    scan: {abscissa: period, k: 2, rel_width: 0.02, points: 401, n_p: 60}
    method: all
    output: {dir: out, stem: trace}
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .errors import ConfigError, NVDDError
from .pulses import BUILTINS, Pulse, PulseSequence, SequenceFamily
from .spin_model import SpinTarget, dip_period, from_hz, make_target, reduced_target

METHODS = ("exact", "analytic", "floquet", "all")


def _number(d: dict, key: str, default=None, required=True) -> Optional[float]:
    if key not in d or d[key] is None:
        if required and default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        value = float(d[key])
    except (TypeError, ValueError):
        raise ConfigError(f"{key!r} must be a number, got {d[key]!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{key!r} must be finite")
    return value


def _check_keys(d: dict, allowed, where: str):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be a mapping")
    unknown = set(d) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")


_TARGET_KEYS = (
    "gamma_n_hz_per_tesla", "b0_tesla", "a_x_hz", "a_z_hz",
    "omega_av_hz", "a_perp_hz", "a_par_hz", "label",
)


def parse_target(d: dict) -> SpinTarget:
    _check_keys(d, _TARGET_KEYS, "target")
    label = str(d.get("label", ""))
    if "omega_av_hz" in d:
        if "gamma_n_hz_per_tesla" in d:
            raise ConfigError("give either omega_av_hz/a_perp_hz or the Zeeman parameters, not both")
        return reduced_target(
            from_hz(_number(d, "omega_av_hz")),
            from_hz(_number(d, "a_perp_hz")),
            from_hz(_number(d, "a_par_hz", 0.0)),
            label=label,
        )
    return make_target(
        from_hz(_number(d, "gamma_n_hz_per_tesla")),
        _number(d, "b0_tesla"),
        from_hz(_number(d, "a_x_hz", 0.0)),
        from_hz(_number(d, "a_z_hz", 0.0)),
        label=label,
    )


@dataclass(frozen=True)
class SequenceSpec:
    """Either a builtin family (rebuilt per period) or an explicit one-period pulse list."""

    builtin: Optional[str] = None
    rabi: float = 0.0
    global_phase: float = 0.0
    t_p: Optional[float] = None
    tau: Optional[float] = None
    pulses: tuple = ()
    period: Optional[float] = None

    def family(self) -> SequenceFamily:
        if self.builtin is None:
            raise ConfigError("period scans and harmonic analysis need a builtin sequence")
        return SequenceFamily(self.builtin, self.rabi, self.global_phase, self.t_p)

    def fixed(self, period: Optional[float] = None) -> PulseSequence:
        if self.builtin is None:
            return PulseSequence(self.period, self.pulses, self.global_phase, name="custom")
        fam = self.family()
        if period is None:
            if self.tau is None:
                raise ConfigError("sequence.tau_s (or a scan period) is required here")
            period = self.tau * fam.n_pulses
        return fam.at(period)

    def as_dict(self) -> dict:
        return {
            "builtin": self.builtin,
            "rabi_rad_s": self.rabi,
            "global_phase_rad": self.global_phase,
            "t_p_s": self.t_p,
            "tau_s": self.tau,
            "period_s": self.period,
            "pulses": [
                {"center_s": p.center, "phase_rad": p.phase, "rabi_rad_s": p.rabi, "t_p_s": p.duration}
                for p in self.pulses
            ],
        }


def parse_sequence(d: dict) -> SequenceSpec:
    _check_keys(d, ("builtin", "tau_s", "rabi_hz", "global_phase_rad", "t_p_s", "pulses", "period_s"), "sequence")
    phi_g = _number(d, "global_phase_rad", 0.0)
    if "pulses" in d:
        if "builtin" in d:
            raise ConfigError("give either sequence.builtin or sequence.pulses, not both")
        pulses = []
        for p in d["pulses"]:
            _check_keys(p, ("center_s", "phase_rad", "rabi_hz", "t_p_s"), "sequence.pulses[]")
            rabi = from_hz(_number(p, "rabi_hz", 0.0))
            t_p = _number(p, "t_p_s", None, required=False)
            if t_p is None:
                t_p = math.pi / rabi if rabi > 0 else 0.0
            pulses.append(Pulse(_number(p, "center_s"), _number(p, "phase_rad", 0.0), rabi, t_p))
        spec = SequenceSpec(None, 0.0, phi_g, pulses=tuple(pulses), period=_number(d, "period_s"))
        spec.fixed()  # validate now
        return spec
    name = str(d.get("builtin", "")).lower()
    if name not in BUILTINS:
        raise ConfigError(f"sequence.builtin must be one of {sorted(BUILTINS)}, got {d.get('builtin')!r}")
    rabi = from_hz(_number(d, "rabi_hz"))
    if rabi <= 0:
        raise ConfigError("sequence.rabi_hz must be positive")
    return SequenceSpec(
        builtin=name,
        rabi=rabi,
        global_phase=phi_g,
        t_p=_number(d, "t_p_s", None, required=False),
        tau=_number(d, "tau_s", None, required=False),
    )


@dataclass(frozen=True)
class ScanSpec:
    abscissa: str
    values: np.ndarray
    n_p: Optional[int] = None
    k: Optional[int] = None
    period: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "abscissa": self.abscissa,
            "first": float(self.values[0]),
            "last": float(self.values[-1]),
            "points": int(len(self.values)),
            "n_p": self.n_p,
            "k": self.k,
            "period_s": self.period,
        }


def _int(d, key, default=None, required=True):
    v = _number(d, key, default, required)
    if v is None:
        return None
    if v != int(v):
        raise ConfigError(f"{key!r} must be an integer")
    return int(v)


def parse_scan(d: dict, first_target: SpinTarget) -> ScanSpec:
    _check_keys(
        d,
        ("abscissa", "start_s", "stop_s", "points", "n_p", "k", "rel_width", "period_s",
         "n_start", "n_stop", "n_step", "start_rad", "stop_rad"),
        "scan",
    )
    abscissa = d.get("abscissa", "period")
    k = _int(d, "k", None, required=False)
    if k is not None and k < 1:
        raise ConfigError("scan.k must be >= 1")
    T_dip = dip_period(first_target, k) if k is not None else None
    period = _number(d, "period_s", None, required=False)
    if abscissa == "period":
        points = _int(d, "points", 201)
        if "start_s" in d or "stop_s" in d:
            values = np.linspace(_number(d, "start_s"), _number(d, "stop_s"), points)
        elif T_dip is not None:
            rel = _number(d, "rel_width", 0.02)
            values = np.linspace(T_dip * (1 - rel), T_dip * (1 + rel), points)
        else:
            raise ConfigError("period scan needs start_s/stop_s or k")
        if np.any(values <= 0):
            raise ConfigError("scan periods must be positive")
        n_p = _int(d, "n_p")
    elif abscissa == "pulse_count":
        n0, n1 = _int(d, "n_start", 0), _int(d, "n_stop")
        step = _int(d, "n_step", 1)
        if n0 < 0 or n1 < n0 or step < 1:
            raise ConfigError("need 0 <= n_start <= n_stop and n_step >= 1")
        values = np.arange(n0, n1 + 1, step)
        n_p = None
        if k is None:
            raise ConfigError("pulse_count scans are pinned at T_dip^k; give scan.k")
        period = T_dip
    elif abscissa == "global_phase":
        values = np.linspace(_number(d, "start_rad", -math.pi / 2), _number(d, "stop_rad", math.pi / 2), _int(d, "points", 181))
        n_p = _int(d, "n_p")
        if period is None:
            if T_dip is None:
                raise ConfigError("global_phase scans need period_s or k")
            period = T_dip
    else:
        raise ConfigError(f"scan.abscissa must be period, pulse_count or global_phase, got {abscissa!r}")
    if n_p is not None and n_p < 1:
        raise ConfigError("scan.n_p must be >= 1")
    return ScanSpec(abscissa, values, n_p, k, period)


@dataclass(frozen=True)
class ExperimentConfig:
    targets: tuple
    sequence: SequenceSpec
    scan: Optional[ScanSpec]
    method: str = "exact"
    include_A_par: bool = False
    output_dir: str = "out"
    stem: str = "trace"
    raw: dict = field(default_factory=dict, compare=False)

    def as_dict(self) -> dict:
        return {
            "targets": [t.as_dict() for t in self.targets],
            "sequence": self.sequence.as_dict(),
            "scan": None if self.scan is None else self.scan.as_dict(),
            "method": self.method,
            "include_A_par": self.include_A_par,
            "source": self.raw,
        }


def parse_config(d: dict) -> ExperimentConfig:
    """Validate a config mapping; every error is a :class:`ConfigError`."""
    _check_keys(d, ("targets", "target", "sequence", "scan", "method", "include_a_par", "output"), "config")
    try:
        raw_targets = d.get("targets", [d["target"]] if "target" in d else None)
        if not raw_targets:
            raise ConfigError("config needs at least one target")
        targets = tuple(parse_target(t) for t in raw_targets)
        if "sequence" not in d:
            raise ConfigError("config needs a sequence")
        sequence = parse_sequence(d["sequence"])
        scan = parse_scan(d["scan"], targets[0]) if "scan" in d else None
    except ConfigError:
        raise
    except NVDDError as exc:
        raise ConfigError(str(exc)) from exc
    method = str(d.get("method", "exact"))
    if method not in METHODS:
        raise ConfigError(f"method must be one of {METHODS}, got {method!r}")
    if method != "exact" and (scan is None or scan.k is None):
        raise ConfigError(f"method {method!r} needs scan.k (the analysed harmonic)")
    if scan is not None and scan.abscissa == "period" and sequence.builtin is None:
        raise ConfigError("period scans need a builtin sequence (explicit pulse lists have a fixed period)")
    out = d.get("output", {}) or {}
    _check_keys(out, ("dir", "stem"), "output")
    return ExperimentConfig(
        targets=targets,
        sequence=sequence,
        scan=scan,
        method=method,
        include_A_par=bool(d.get("include_a_par", False)),
        output_dir=str(out.get("dir", "out")),
        stem=str(out.get("stem", "trace")),
        raw=d,
    )


def load_config(path) -> ExperimentConfig:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must contain a mapping")
    return parse_config(data)
