"""Command-line front end.

Subcommands: reflection-sweep, saturation, sidebands, emission, fit,
calibrate. Exit codes: 0 success, 1 fatal error, 2 success with flagged
sweep cells, 3 poor fit.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, calibration, config as cfgmod, output
from .config import RunConfig, build_model, grid, load_config, pump_frequency_hz
from .dressed import dressed_spectrum, idealized_sideband_count, sideband_catalog
from .emission import emission_spectrum
from .errors import ConfigError, DegenerateCircle, EngineError, NoMinimum, PoorFit
from .fitting import ReflectionTrace, fit_circle
from .model import PumpConfig
from .sweep import reflection_sweep, saturation_sweep

TWO_PI = 2.0 * math.pi

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_FLAGGED = 2
EXIT_POOR_FIT = 3

# dBm cannot express zero power; at or below this label the drive is off
PUMP_OFF_DBM = -300.0

log = logging.getLogger("mirroratom")


def _common_metadata(cfg: RunConfig, command: str) -> dict:
    return {
        "tool": f"mirroratom {__version__}",
        "command": command,
        "config_sha256": cfg.sha256(),
        "cross_mode": cfg.get("engine", "cross_mode"),
    }


def _echo_config(cfg: RunConfig, outdir: Path, command: str):
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / f"{command}.resolved.cfg").write_text(cfg.canonical_text())


def _prepare(args, command):
    cfg = load_config(args.config, overrides=args.set or [])
    if args.cross_mode:
        cfg.set("engine", "cross_mode", args.cross_mode)
    if args.workers is not None:
        cfg.set("engine", "workers", str(args.workers))
    if args.output_dir:
        cfg.set("output", "directory", args.output_dir)
    cfg.require(command)
    model = build_model(cfg)
    outdir = Path(cfg.get("output", "directory"))
    _echo_config(cfg, outdir, command)
    return cfg, model, outdir


def _workers(cfg) -> int | None:
    w = cfg.get("engine", "workers")
    return None if w in (None, 0) else w


def _drive_amp(power_dbm, freq_hz, model, offset_db) -> float:
    if power_dbm <= PUMP_OFF_DBM:
        return 0.0
    return calibration.drive_amplitude(
        power_dbm, TWO_PI * freq_hz, model.rates.relax10, offset_db
    )


def _pump_from_config(cfg, model) -> PumpConfig:
    freq_hz = pump_frequency_hz(cfg, model)
    amp = _drive_amp(
        cfg.get("pump", "power_dbm"), freq_hz, model, cfg.get("pump", "line_offset_db")
    )
    return PumpConfig(
        omega_pump=TWO_PI * freq_hz,
        amp_pump=amp,
        n_photon=cfg.get("pump", "photon_order"),
    )


def _probe_axis(cfg):
    s = cfg.values["sweep"]
    axis = grid(s["probe_start_ghz"], s["probe_stop_ghz"], s["probe_step_mhz"] * 1e-3)
    return axis * 1e9


def cmd_reflection_sweep(args) -> int:
    cfg, model, outdir = _prepare(args, "reflection-sweep")
    s = cfg.values["sweep"]
    powers = grid(s["pump_power_start_dbm"], s["pump_power_stop_dbm"], s["pump_power_step_db"])
    freqs = _probe_axis(cfg)
    result = reflection_sweep(
        model,
        pump_freq_hz=pump_frequency_hz(cfg, model),
        pump_powers_dbm=powers,
        probe_freqs_hz=freqs,
        method=s["method"],
        probe_power_dbm=cfg.get("probe", "power_dbm"),
        pump_offset_db=cfg.get("pump", "line_offset_db"),
        probe_offset_db=cfg.get("probe", "line_offset_db"),
        n_photon=cfg.get("pump", "photon_order"),
        cutoff=s["harmonic_cutoff"],
        cross_mode=cfg.get("engine", "cross_mode"),
        workers=_workers(cfg),
    )
    meta = _common_metadata(cfg, "reflection-sweep") | {
        "pump_freq_hz": format(result.metadata["pump_freq_hz"], ".16e"),
        "method": result.metadata["method"],
    }
    output.write_csv(
        outdir / "reflection_sweep.csv",
        ["omega_p_hz", "p_pump_dbm", "r_mag", "r_re", "r_im", "flag"],
        output.sweep_rows(result),
        meta,
    )
    if cfg.get("output", "heatmap"):
        (outdir / "reflection_sweep.preview.txt").write_text(output.ascii_heatmap(result))
    if result.flagged:
        log.warning("sweep finished with flagged cells")
        return EXIT_FLAGGED
    return EXIT_OK


def cmd_saturation(args) -> int:
    cfg, model, outdir = _prepare(args, "saturation")
    s = cfg.values["sweep"]
    powers = grid(s["probe_power_start_dbm"], s["probe_power_stop_dbm"], s["probe_power_step_db"])
    freqs = _probe_axis(cfg)
    result = saturation_sweep(
        model,
        pump=_pump_from_config(cfg, model),
        probe_powers_dbm=powers,
        probe_freqs_hz=freqs,
        probe_offset_db=cfg.get("probe", "line_offset_db"),
        cutoff=s["harmonic_cutoff"],
        cross_mode=cfg.get("engine", "cross_mode"),
        workers=_workers(cfg),
    )
    meta = _common_metadata(cfg, "saturation") | {
        "pump_freq_hz": format(result.metadata["pump_freq_hz"], ".16e"),
    }
    output.write_csv(
        outdir / "saturation.csv",
        ["omega_p_hz", "p_probe_dbm", "r_mag", "r_re", "r_im", "flag"],
        output.sweep_rows(result),
        meta,
    )
    if cfg.get("output", "heatmap"):
        (outdir / "saturation.preview.txt").write_text(output.ascii_heatmap(result))
    return EXIT_FLAGGED if result.flagged else EXIT_OK


def cmd_sidebands(args) -> int:
    cfg, model, outdir = _prepare(args, "sidebands")
    sb = cfg.values["sidebands"]
    window = None
    if sb["window_start_ghz"] is not None and sb["window_stop_ghz"] is not None:
        window = (sb["window_start_ghz"] * 1e9, sb["window_stop_ghz"] * 1e9)
    freq_hz = pump_frequency_hz(cfg, model)
    order = cfg.get("pump", "photon_order")
    cross = cfg.get("engine", "cross_mode")
    meta = _common_metadata(cfg, "sidebands")
    for power in sb["pump_powers_dbm"]:
        amp = _drive_amp(power, freq_hz, model, cfg.get("pump", "line_offset_db"))
        pump = PumpConfig(omega_pump=TWO_PI * freq_hz, amp_pump=amp, n_photon=order)
        catalog = sideband_catalog(model, pump, cross_mode=cross, window_hz=window)
        ideal = idealized_sideband_count(order) if order >= 1 else -1
        rows = [
            (e.i, e.j, e.freq_hz, e.classification, e.strength, e.r_mag, e.inversion, ideal)
            for e in catalog.entries
        ]
        name = f"sidebands_{power:.2f}dBm.csv"
        output.write_csv(
            outdir / name,
            ["i", "j", "omega_p_hz", "classification", "strength", "r_mag",
             "inversion", "idealized_count"],
            rows,
            meta | {"pump_power_dbm": power, "entries": len(catalog)},
        )
        spec = catalog.spectrum
        output.write_csv(
            outdir / name.replace("sidebands_", "dressed_levels_"),
            ["label", "energy_rad_per_s"],
            [(k, spec.energies[k]) for k in range(model.dim)],
            meta | {"pump_power_dbm": power},
        )
    return EXIT_OK


def cmd_emission(args) -> int:
    cfg, model, outdir = _prepare(args, "emission")
    em = cfg.values["emission"]
    freq_hz = pump_frequency_hz(cfg, model)
    center = em["center_ghz"] * 1e9 if em["center_ghz"] is not None else freq_hz
    half = em["span_mhz"] * 1e6 / 2.0
    step = em["step_mhz"] * 1e6
    freqs = np.arange(center - half, center + half + step / 2.0, step)
    cross = cfg.get("engine", "cross_mode")
    meta = _common_metadata(cfg, "emission")
    for power in em["pump_powers_dbm"]:
        amp = _drive_amp(power, freq_hz, model, cfg.get("pump", "line_offset_db"))
        pump = PumpConfig(
            omega_pump=TWO_PI * freq_hz, amp_pump=amp,
            n_photon=cfg.get("pump", "photon_order"),
        )
        spectrum = emission_spectrum(model, pump, freqs, cross_mode=cross)
        name = f"emission_{power:.2f}dBm.csv"
        output.write_csv(
            outdir / name,
            ["freq_hz", "density_per_hz"],
            zip(spectrum.freq_hz, spectrum.density),
            meta | {"pump_power_dbm": power},
        )
    return EXIT_OK


def cmd_fit(args) -> int:
    trace = ReflectionTrace.from_csv(args.trace)
    try:
        report = fit_circle(trace)
    except (DegenerateCircle, PoorFit, NoMinimum) as exc:
        print(f"fit failed: {exc}", file=sys.stderr)
        return EXIT_POOR_FIT
    for key, val in report.as_rows():
        print(f"{key} = {val:.10g}")
    if args.output_dir:
        outdir = Path(args.output_dir)
        output.write_csv(
            outdir / "fit_report.csv",
            [k for k, _ in report.as_rows()],
            [tuple(v for _, v in report.as_rows())],
            {"tool": f"mirroratom {__version__}", "trace": Path(args.trace).name},
        )
    return EXIT_OK


def cmd_calibrate(args) -> int:
    carrier = TWO_PI * args.carrier_ghz * 1e9
    relax = TWO_PI * args.relax_mhz * 1e6
    if args.dbm is not None:
        power_dbm = args.dbm - (args.attenuation_db or 0.0)
        watts = calibration.dbm_to_watts(power_dbm)
        rabi = calibration.power_to_rabi(watts, carrier, relax)
        print(f"power_at_sample_dbm = {power_dbm:.6f}")
        print(f"power_w = {watts:.10e}")
        print(f"rabi_mhz = {rabi / TWO_PI / 1e6:.10g}")
    else:
        rabi = TWO_PI * args.rabi_mhz * 1e6
        watts = calibration.rabi_to_power(rabi, carrier, relax)
        print(f"power_w = {watts:.10e}")
        print(f"power_dbm = {calibration.watts_to_dbm(watts):.6f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mirroratom",
        description="pump-probe simulator for an artificial atom at the end of a waveguide",
    )
    parser.add_argument("--version", action="version", version=f"mirroratom {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_command(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", help="run configuration file")
        p.add_argument("--output-dir", help="override [output] directory")
        p.add_argument("--workers", type=int, help="override [engine] workers")
        p.add_argument("--cross-mode", choices=["geometric", "arithmetic"],
                       help="override [engine] cross_mode")
        p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                       help="override any configuration key")
        p.set_defaults(fn=fn)
        return p

    add_config_command("reflection-sweep", cmd_reflection_sweep,
                       "reflection over (pump power, probe frequency)")
    add_config_command("saturation", cmd_saturation,
                       "reflection over (probe power, probe frequency)")
    add_config_command("sidebands", cmd_sidebands,
                       "dressed-state sideband catalogs per pump power")
    add_config_command("emission", cmd_emission,
                       "incoherent emission spectra per pump power")

    pf = sub.add_parser("fit", help="extract parameters from a reflection trace")
    pf.add_argument("trace", help="CSV with (freq_hz, re, im) or (freq_hz, mag_db, phase_deg)")
    pf.add_argument("--output-dir", help="also write fit_report.csv here")
    pf.set_defaults(fn=cmd_fit)

    pc = sub.add_parser("calibrate", help="pure power/amplitude conversions")
    group = pc.add_mutually_exclusive_group(required=True)
    group.add_argument("--dbm", type=float, help="power to convert")
    group.add_argument("--rabi-mhz", type=float, help="drive amplitude to convert")
    pc.add_argument("--carrier-ghz", type=float, required=True)
    pc.add_argument("--relax-mhz", type=float, required=True,
                    help="ground-transition relaxation rate / 2pi")
    pc.add_argument("--attenuation-db", type=float, default=0.0,
                    help="line attenuation from generator to sample")
    pc.set_defaults(fn=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_FATAL
    except (EngineError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
