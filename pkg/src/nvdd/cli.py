"""Command-line driver: ``nvdd <subcommand>``.

Exit codes: 0 success, 2 invalid input or configuration, 3 a preset check failed.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from ._parallel import default_threads
from .analytic_coherence import dip_model, mimic_analysis
from .config import ExperimentConfig, parse_config
from .errors import ConfigError, NVDDError
from .floquet import crossing_gap, quasienergy_scan
from .output import dumps, with_version, write_json, write_table
from .presets import PRESETS, write_preset
from .pulses import SequenceFamily, modulation_spectrum
from .runner import METHOD_TAGS, run_experiment
from .spin_model import dip_period, from_hz

log = logging.getLogger("nvdd")

EXIT_OK, EXIT_INVALID, EXIT_CHECK_FAILED = 0, 2, 3

# inline flag -> (config section, key)
_INLINE = {
    "omega_av_hz": ("target", "omega_av_hz"),
    "a_perp_hz": ("target", "a_perp_hz"),
    "a_par_hz": ("target", "a_par_hz"),
    "gamma_n_hz_per_tesla": ("target", "gamma_n_hz_per_tesla"),
    "b0_tesla": ("target", "b0_tesla"),
    "a_x_hz": ("target", "a_x_hz"),
    "a_z_hz": ("target", "a_z_hz"),
    "sequence": ("sequence", "builtin"),
    "rabi_hz": ("sequence", "rabi_hz"),
    "global_phase_rad": ("sequence", "global_phase_rad"),
    "t_p_s": ("sequence", "t_p_s"),
    "tau_s": ("sequence", "tau_s"),
    "abscissa": ("scan", "abscissa"),
    "k": ("scan", "k"),
    "n_p": ("scan", "n_p"),
    "start_s": ("scan", "start_s"),
    "stop_s": ("scan", "stop_s"),
    "points": ("scan", "points"),
    "rel_width": ("scan", "rel_width"),
    "period_s": ("scan", "period_s"),
    "n_start": ("scan", "n_start"),
    "n_stop": ("scan", "n_stop"),
    "start_rad": ("scan", "start_rad"),
    "stop_rad": ("scan", "stop_rad"),
}


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--out", default=None, help="output directory (default: ./out or the config's output.dir)")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: CPU count)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _add_inline(p: argparse.ArgumentParser, scan: bool = True):
    p.add_argument("--config", help="YAML experiment config; inline flags override its entries")
    g = p.add_argument_group("target (plain Hz)")
    for name in ("omega_av_hz", "a_perp_hz", "a_par_hz", "gamma_n_hz_per_tesla", "b0_tesla", "a_x_hz", "a_z_hz"):
        g.add_argument("--" + name.replace("_", "-"), dest=name, type=float)
    g = p.add_argument_group("sequence")
    g.add_argument("--sequence", choices=("xy8", "cpmg8", "xy4"))
    for name in ("rabi_hz", "global_phase_rad", "t_p_s", "tau_s"):
        g.add_argument("--" + name.replace("_", "-"), dest=name, type=float)
    if scan:
        g = p.add_argument_group("scan")
        g.add_argument("--abscissa", choices=("period", "pulse_count", "global_phase"))
        for name in ("k", "n_p", "points", "n_start", "n_stop"):
            g.add_argument("--" + name.replace("_", "-"), dest=name, type=int)
        for name in ("start_s", "stop_s", "rel_width", "period_s", "start_rad", "stop_rad"):
            g.add_argument("--" + name.replace("_", "-"), dest=name, type=float)


def _config_dict(args, with_scan: bool = True) -> dict:
    data = {}
    if getattr(args, "config", None):
        try:
            data = yaml.safe_load(Path(args.config).read_text()) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot load config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must contain a mapping")
    for attr, (section, key) in _INLINE.items():
        value = getattr(args, attr, None)
        if value is None or (section == "scan" and not with_scan):
            continue
        if section == "target":
            if "targets" in data:
                if len(data["targets"]) != 1:
                    raise ConfigError("inline target flags need a single-target config")
                data["target"] = data.pop("targets")[0]
            data.setdefault("target", {})[key] = value
        else:
            data.setdefault(section, {})[key] = value
    return data


def _load(args, need_scan=True) -> ExperimentConfig:
    cfg = parse_config(_config_dict(args, with_scan=need_scan))
    if need_scan and cfg.scan is None:
        raise ConfigError("a scan section (or inline scan flags) is required")
    return cfg


def _threads(args) -> int:
    return default_threads() if args.threads is None else max(1, args.threads)


def _out(args, cfg: ExperimentConfig = None) -> Path:
    if args.out is not None:
        return Path(args.out)
    return Path(cfg.output_dir if cfg is not None else "out")


def _emit(path):
    print(path)


# --------------------------------------------------------------------------- subcommands


def cmd_trace(args) -> int:
    cfg = _load(args)
    if args.method:
        cfg = ExperimentConfig(cfg.targets, cfg.sequence, cfg.scan, args.method, cfg.include_A_par,
                               cfg.output_dir, cfg.stem, cfg.raw)
    if cfg.method == "all":
        raise ConfigError("trace writes one method per file; use 'run' for method: all")
    columns = run_experiment(cfg, _threads(args))
    meta = {"config": cfg.as_dict(), "method": METHOD_TAGS[cfg.method], "grid": cfg.scan.as_dict()}
    _emit(write_table(_out(args, cfg) / cfg.stem, columns, meta, args.format))
    _emit(write_json(_out(args, cfg) / (cfg.stem + "_meta"), with_version(meta)))
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _load(args)
    columns = run_experiment(cfg, _threads(args))
    _emit(write_table(_out(args, cfg) / cfg.stem, columns, {"config": cfg.as_dict()}, args.format))
    return EXIT_OK


def cmd_floquet_scan(args) -> int:
    cfg = _load(args)
    if cfg.scan.abscissa != "period":
        raise ConfigError("floquet-scan needs a period scan")
    if len(cfg.targets) != 1:
        raise ConfigError("floquet-scan takes a single target")
    spec = quasienergy_scan(cfg.targets[0], cfg.sequence.family(), cfg.scan.values,
                            args.truncation, cfg.include_A_par, _threads(args))
    q = spec.tracked() if args.tracked else spec.quasienergies
    cols = {"T_s": spec.periods, **{f"quasienergy_{j + 1}": q[:, j] for j in range(q.shape[1])}}
    meta = {"config": cfg.as_dict(), "tracked": args.tracked, "truncation": args.truncation}
    _emit(write_table(_out(args, cfg) / "floquet_scan", cols, meta, args.format))
    return EXIT_OK


def cmd_gap(args) -> int:
    cfg = _load(args, need_scan=False)
    target, family = cfg.targets[0], cfg.sequence.family()
    gaps = [crossing_gap(target, family, k, args.truncation, cfg.include_A_par) for k in args.harmonics]
    cols = {
        "k": [g.k for g in gaps],
        "T_dip_s": [g.T_dip for g in gaps],
        "gap_rad_s": [g.gap for g in gaps],
        "predicted_gap_rad_s": [g.predicted_gap for g in gaps],
        "kind": [g.kind for g in gaps],
        "coincidence": [g.coincidence for g in gaps],
    }
    _emit(write_table(_out(args, cfg) / "gaps", cols, {"config": cfg.as_dict()}, args.format))
    return EXIT_OK


def cmd_modspec(args) -> int:
    data = _config_dict(args, with_scan=False)
    data.setdefault("target", {"omega_av_hz": 1.0, "a_perp_hz": 0.0})
    cfg = parse_config(data)
    if args.period_s is not None:
        seq = cfg.sequence.fixed(args.period_s)
    elif args.k is not None:
        seq = cfg.sequence.fixed(dip_period(cfg.targets[0], args.k))
    else:
        seq = cfg.sequence.fixed()
    spec = modulation_spectrum(seq, args.k_max)
    keep = spec.k >= 0
    cols = {
        "k": spec.k[keep],
        "re_fz": spec.fz[keep].real,
        "im_fz": spec.fz[keep].imag,
        "abs_fperp": spec.fperp_abs[keep],
        "phi_perp_rad": spec.fperp_phase[keep],
    }
    meta = {"sequence": cfg.sequence.as_dict(), "period_s": seq.period, "parseval": spec.parseval}
    _emit(write_table(_out(args, cfg) / "modspec", cols, meta, args.format))
    return EXIT_OK


def cmd_dip(args) -> int:
    data = _config_dict(args)
    cfg = parse_config(data)
    scan = data.get("scan", {})
    if args.k is None or args.n_p is None:
        raise ConfigError("dip needs --k and --n-p")
    target = cfg.targets[0]
    model = dip_model(target, cfg.sequence.family(), args.k, args.kind)
    if "start_s" in scan or "stop_s" in scan:
        Ts = cfg.scan.values
    else:
        Ts = np.linspace(model.T_dip - model.W_T, model.T_dip + model.W_T, args.points or 401)
    L = model.coherence(Ts, args.n_p)
    meta = {"target": target.as_dict(), "sequence": cfg.sequence.as_dict(), "n_p": args.n_p, "dip": model.as_dict()}
    _emit(write_table(_out(args, cfg) / f"dip_{model.kind}_k{args.k}", {"T_s": Ts, "L": L, "valid": model.valid(Ts)}, meta, args.format))
    return EXIT_OK


def cmd_suppress(args) -> int:
    primary, mimic = args.isotope_pair
    family = SequenceFamily(args.sequence, from_hz(args.rabi_hz))
    result = mimic_analysis(primary, mimic, args.b0_tesla, family, args.tolerance)
    record = with_version({**result.as_dict(), "b0_tesla": args.b0_tesla, "sequence": family.as_dict()})
    print(dumps(record, indent=1))
    if args.out_file:
        _emit(write_json(args.out_file, record))
    return EXIT_OK


def _preset_runner(name):
    def run(args) -> int:
        result = PRESETS[name](threads=_threads(args))
        for path in write_preset(result, _out(args), args.format):
            _emit(path)
        for check in result.checks:
            print(check.line())
        print(f"{name}: {'all checks passed' if result.passed else 'CHECK FAILURE'}")
        return EXIT_OK if result.passed else EXIT_CHECK_FAILED
    return run


# --------------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nvdd", description="Finite-pulse dynamical decoupling of NV-nuclear spin systems.")
    parser.add_argument("--version", action="version", version=f"nvdd {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trace", help="coherence trace for one method (CSV + JSON metadata)")
    _add_inline(p)
    _add_common(p)
    p.add_argument("--method", choices=("exact", "analytic", "floquet"))
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("run", help="execute a config file (method may be 'all')")
    _add_inline(p)
    _add_common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("floquet-scan", help="quasienergies versus period")
    _add_inline(p)
    _add_common(p)
    p.add_argument("--truncation", type=int, default=None)
    p.add_argument("--tracked", action="store_true", help="continuous level curves instead of folded values")
    p.set_defaults(func=cmd_floquet_scan)

    p = sub.add_parser("gap", help="avoided-crossing gaps at the given harmonics")
    _add_inline(p, scan=False)
    _add_common(p)
    p.add_argument("--harmonics", type=int, nargs="+", required=True)
    p.add_argument("--truncation", type=int, default=None)
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("modspec", help="Fourier coefficients of the modulation functions")
    _add_inline(p, scan=False)
    _add_common(p)
    p.add_argument("--k-max", type=int, default=24)
    p.add_argument("--period-s", type=float)
    p.add_argument("--k", type=int, help="evaluate at T_dip^k of the given target")
    p.set_defaults(func=cmd_modspec)

    p = sub.add_parser("dip", help="closed-form expected or spurious dip")
    _add_inline(p)
    _add_common(p)
    p.add_argument("--kind", choices=("expected", "spurious"), default=None)
    p.set_defaults(func=cmd_dip)

    p = sub.add_parser("suppress", help="isotope mimic analysis and suppressing global phase")
    p.add_argument("--isotope-pair", nargs=2, metavar=("PRIMARY", "MIMIC"), required=True)
    p.add_argument("--b0-tesla", type=float, default=0.1)
    p.add_argument("--sequence", choices=("xy8", "cpmg8", "xy4"), default="xy8")
    p.add_argument("--rabi-hz", type=float, default=20e6)
    p.add_argument("--tolerance", type=float, default=0.02)
    p.add_argument("--out-file", help="also write the record to this JSON file")
    p.set_defaults(func=cmd_suppress)

    for name in PRESETS:
        p = sub.add_parser(f"preset-{name}", help=f"reproduce {name} with checks")
        _add_common(p)
        p.set_defaults(func=_preset_runner(name))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except NVDDError as exc:
        print(f"nvdd: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
