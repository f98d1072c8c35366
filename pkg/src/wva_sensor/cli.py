"""Command-line entry point: ``wva-sensor {simulate,spectrum,sweep,design,classical}``."""
from __future__ import annotations

import argparse
import io
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import design, instrument, spectrum
from .config import RunConfig
from .errors import ConfigError, DegeneratePostselection, FitDegenerate, RegimeViolation, ShiftRegimeExceeded
from .sagnac import phase_from_velocity

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3
EXIT_IO = 4
EXIT_REGIME = 5

SIG_DIGITS = 12


class CliError(Exception):
    def __init__(self, code, message):
        self.code = code
        super().__init__(message)


def sig(x):
    """Round to 12 significant digits; non-finite values become None (JSON null)."""
    if x is None:
        return None
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.{SIG_DIGITS}g}")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {out}: {exc.strerror}") from exc


def _parse_override(item: str):
    key, sep, raw = item.partition("=")
    if not sep:
        raise ConfigError(item, "override must look like key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def load_run_config(args) -> RunConfig:
    base = RunConfig.load(args.config).to_dict() if args.config else RunConfig().to_dict()
    for item in args.set or []:
        key, value = _parse_override(item)
        if key not in base:
            raise ConfigError(key, "unknown configuration key")
        base[key] = value
    return RunConfig.from_dict(base)


# --- subcommands -----------------------------------------------------------


def cmd_simulate(rc: RunConfig, args) -> str:
    cfg = rc.sensor()
    point = design.simulate_point(cfg, args.velocity)
    k0 = design.small_signal_k(cfg) if cfg.beta > 0 else math.inf
    report = {
        "velocity_mps": sig(args.velocity),
        "beta_rad": sig(cfg.beta),
        "phi_rad": sig(point.phi),
        "a_w_re": sig(point.weak.a_w.real),
        "a_w_im": sig(point.weak.a_w.imag),
        "p_postselect": sig(point.weak.p_postselect),
        "delta_lambda0_nm": sig(point.shift.delta_lambda0),
        "k0_nm_per_mps": sig(k0),
        "config": rc.to_dict(),
    }
    if args.format == "csv":
        keys = [k for k in report if k != "config"]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(keys)
        w.writerow(["" if report[k] is None else repr(report[k]) for k in keys])
        return buf.getvalue()
    return _dump(report)


def _spectrum_center(s):
    try:
        return spectrum.fit_center(s)
    except FitDegenerate:
        return None


def cmd_spectrum(rc: RunConfig, args) -> str:
    if args.out is None:
        raise CliError(EXIT_CONFIG, "--out: spectrum needs an output directory")
    cfg = rc.sensor()
    point = design.simulate_point(cfg, args.velocity)
    probe = cfg.probe
    model = rc.spectrometer()

    def postselected(grid):
        s = spectrum.postselected_spectrum(probe, point.weak, grid, rc.tilt_convention)
        return spectrum.apply_symmetric_dispersion(s, rc.dispersion_nm)

    grid = probe.default_grid(rc.grid_points)
    initial = spectrum.initial_spectrum(probe, grid)
    post = postselected(grid)
    # binning needs a grid finer than the spectrometer resolution
    fine = postselected(probe.default_grid(step=model.resolution / 4))
    binned = instrument.bin_spectrum(fine, model, np.random.default_rng(rc.seed))

    out = Path(args.out)
    files = {name: out / f"{name}.csv" for name in ("initial", "postselected", "binned")}
    texts = {"initial": initial.to_csv(), "postselected": post.to_csv(), "binned": binned.to_csv()}
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, path in files.items():
            path.write_text(texts[name], encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write spectra to {out}: {exc.strerror}") from exc

    centers = {}
    for name, s in (("initial", initial), ("postselected", post), ("binned", binned)):
        est = _spectrum_center(s)
        centers[name] = {
            "center_nm": sig(est.center) if est else None,
            "delta_lambda0_nm": sig(est.delta_lambda0) if est else None,
            "fit_residual": sig(est.fit_residual) if est else None,
        }
    report = {
        "velocity_mps": sig(args.velocity),
        "phi_rad": sig(point.phi),
        "analytic_delta_lambda0_nm": sig(point.shift.delta_lambda0),
        "p_postselect": sig(point.weak.p_postselect),
        "centers": centers,
        "detected": centers["binned"]["center_nm"] is not None,
        "files": {k: str(v) for k, v in files.items()},
        "config": rc.to_dict(),
    }
    return _dump(report)


def _sweep_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(design.SWEEP_CSV_HEADER)
    for r in results:
        for row in r.csv_rows():
            w.writerow([repr(float(x)) for x in row])
    return buf.getvalue()


def cmd_sweep(rc: RunConfig, args) -> str:
    cfg = rc.sensor()
    betas = args.betas or sorted(design.PAPER_TABLE1, reverse=True)
    strict = not args.lenient
    try:
        if args.velocities:
            results = design.sweep_beta_velocity(cfg, betas, args.velocities, strict=strict)
        else:
            results = []
            for b in betas:
                vs = design.small_signal_velocities(cfg, b)
                results += design.sweep_beta_velocity(cfg, [b], vs, strict=strict)
    except RegimeViolation:
        raise
    except ValueError as exc:
        raise CliError(EXIT_CONFIG, f"sweep: {exc}") from exc

    summary = {
        "results": [
            {
                "beta_rad": sig(r.beta),
                "fitted_k_nm_per_mps": sig(r.fitted_k),
                "k0_nm_per_mps": sig(r.k0),
                "slope_nm_per_mps": sig(r.slope),
                "p_postselect": sig(r.p_postselect),
                "linear_fit_residual": sig(r.linear_fit_residual),
                "n_points": len(r.velocities),
                "excluded_velocities_mps": [sig(v) for v in r.excluded],
            }
            for r in results
        ],
        "table1": [
            {k: (sig(v) if isinstance(v, float) else v) for k, v in row.items()}
            for row in design.table1_comparison(results)
        ],
        "config": rc.to_dict(),
    }
    if args.out is not None:
        if args.format == "json":
            full = dict(summary, sweeps=[
                {k: ([sig(x) for x in v] if isinstance(v, list) else sig(v)) for k, v in r.to_dict().items()}
                for r in results
            ])
            _emit(_dump(full), args.out)
        else:
            _emit(_sweep_csv(results), args.out)
    return _dump(summary)


def cmd_design(rc: RunConfig, args) -> str:
    rec = design.recommend_design(rc.constraints(), rc.sensor(), margin=rc.design_margin)
    ccfg, readout = rc.classical()
    v_classical = instrument.classical_velocity_limit(ccfg, readout)
    improvement = v_classical / rec.predicted_vmin if rec.feasible else None
    report = {
        "recommendation": {k: (sig(v) if isinstance(v, float) else v) for k, v in rec.to_dict().items()},
        "classical_baseline": {
            "velocity_limit_mps": sig(v_classical),
            "phase_resolution_rad": sig(readout.phase_resolution),
            "nl_m": sig(ccfg.nl),
            "lambda0_nm": sig(rc.classical_lambda0_nm),
        },
        "improvement_factor": sig(improvement),
        "orders_of_magnitude": sig(math.log10(improvement)) if improvement else None,
        "config": rc.to_dict(),
    }
    return _dump(report)


def cmd_classical(rc: RunConfig, args) -> str:
    ccfg, readout = rc.classical()
    v_min = instrument.classical_velocity_limit(ccfg, readout)
    a = readout.amplitude
    i_top = instrument.classical_intensity(a, 0.0)
    i_res = instrument.classical_intensity(a, readout.phase_resolution)
    report = {
        "velocity_limit_mps": sig(v_min),
        "phase_resolution_rad": sig(readout.phase_resolution),
        "phase_at_limit_rad": sig(phase_from_velocity(ccfg, v_min)),
        "nl_m": sig(ccfg.nl),
        "lambda0_nm": sig(rc.classical_lambda0_nm),
        "intensity_at_zero_phase": sig(i_top),
        "intensity_at_phase_resolution": sig(i_res),
        "config": rc.to_dict(),
    }
    return _dump(report)


COMMANDS = {
    "simulate": cmd_simulate,
    "spectrum": cmd_spectrum,
    "sweep": cmd_sweep,
    "design": cmd_design,
    "classical": cmd_classical,
}
# report goes to --out for these; spectrum and sweep manage --out themselves
_OUT_IS_REPORT = {"simulate", "design", "classical"}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration (flat, unit-suffixed keys)")
    common.add_argument("--out", help="output file (directory for 'spectrum')")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a configuration key; repeatable")

    ap = argparse.ArgumentParser(prog="wva-sensor", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="one velocity through the full chain")
    p.add_argument("-v", "--velocity", type=float, default=0.0, help="m/s")

    p = sub.add_parser("spectrum", parents=[common], help="write initial/postselected/binned spectra")
    p.add_argument("-v", "--velocity", type=float, default=0.0, help="m/s")

    p = sub.add_parser("sweep", parents=[common], help="shift vs velocity for several betas")
    p.add_argument("--betas", type=float, nargs="+")
    p.add_argument("--velocities", type=float, nargs="+",
                   help="m/s; default is a small-signal grid per beta")
    p.add_argument("--lenient", action="store_true",
                   help="drop out-of-regime points with a warning instead of failing")

    sub.add_parser("design", parents=[common], help="recommend beta and fiber length")
    sub.add_parser("classical", parents=[common], help="intensity-readout FOG baseline")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    fmt_default = "csv" if args.command == "sweep" else "json"
    args.format = args.format or fmt_default
    if args.format == "csv" and args.command not in ("simulate", "sweep"):
        print(f"error: --format csv is not available for '{args.command}'", file=sys.stderr)
        return EXIT_CONFIG
    try:
        rc = load_run_config(args)
        text = COMMANDS[args.command](rc, args)
        _emit(text, args.out if args.command in _OUT_IS_REPORT else None)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegeneratePostselection as exc:
        print(f"degenerate post-selection: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except RegimeViolation as exc:
        print(f"regime violation: {exc}", file=sys.stderr)
        for b, v in exc.pairs:
            print(f"  beta_rad={b!r} velocity_mps={v!r}", file=sys.stderr)
        return EXIT_REGIME
    except ShiftRegimeExceeded as exc:
        print(f"regime violation: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
