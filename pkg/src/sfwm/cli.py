"""Command-line front end.

Exit codes: 0 success, 2 usage or configuration problem, 3 numerical
failure. The machine-readable error name goes to standard error.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .analytic import eit_group_delay, gaussian_envelope, propagate_pulse
from .config import SWEEP_VARIABLES, RunConfig, build_run_config, header_lines, load_config
from .errors import ConfigError, InvalidArgument, SfwmError
from .observables import build_wavepacket, calibrate_delta_d, counts_model, simulate, summarize
from .selfcheck import run_selfcheck

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 2, 3

RATE_COLUMNS = (
    "r_s", "r_as", "r_b", "r_p_spectral", "r_p_area", "r_sb", "cs_factor",
    "bandwidth_mhz", "brightness", "r_p_stokes", "t0_ns",
)


def write_csv(path: Path, values: dict, title: str, columns, rows) -> Path:
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.size == 0:
        rows = rows.reshape(0, len(columns))
    lines = header_lines(values, title) + [",".join(columns)]
    body = [",".join("%.9g" % x for x in row) for row in rows]
    path.write_text("\n".join(lines + body) + "\n")
    return path


def _window(tau_s: np.ndarray, lo_ns: float, hi_ns: float) -> np.ndarray:
    if not lo_ns < hi_ns:
        raise ConfigError("tau window: min must be below max")
    t_ns = tau_s * 1e9
    return (t_ns >= lo_ns) & (t_ns <= hi_ns)


def cmd_wavepacket(cfg: RunConfig, out: Path) -> int:
    sim = simulate(cfg.system, cfg.grid)
    wave = build_wavepacket(sim)
    sel = _window(wave.tau_s, cfg.get("tau.min_ns"), cfg.get("tau.max_ns"))
    cols = ("tau_ns", "g2_cross", "r_c_per_s", "g2_ss", "g2_asas")
    data = np.column_stack([wave.tau_s * 1e9, wave.g2_cross, wave.r_c_si, wave.g2_ss, wave.g2_asas])[sel]
    write_csv(out / "wavepacket.csv", cfg.values, "biphoton wavepacket", cols, data)
    summary = summarize(sim, wave)
    write_csv(out / "rates.csv", cfg.values, "scalar observables (rates in s^-1)", RATE_COLUMNS,
              [[summary[c] for c in RATE_COLUMNS]])
    for c in RATE_COLUMNS:
        print(f"{c} = {summary[c]:.6g}")
    return EXIT_OK


def _sweep_params(cfg: RunConfig):
    name = str(cfg.get("sweep.variable"))
    if name not in SWEEP_VARIABLES:
        raise ConfigError(f"sweep.variable must be one of {sorted(set(SWEEP_VARIABLES.values()))}", key="sweep.variable")
    field = SWEEP_VARIABLES[name]
    values = cfg.get("sweep.values")
    if not values:
        raise ConfigError("sweep.values is empty", key="sweep.values")
    paired = {}
    for key, target in (("sweep.paired_omega_c_gamma", "omega_c"), ("sweep.paired_delta_d_gamma", "delta_d")):
        seq = cfg.get(key)
        if seq:
            if len(seq) != len(values) or target == field:
                raise ConfigError(f"{key} must list one value per sweep point and differ from the swept variable", key=key)
            paired[target] = seq
    points = []
    for i, v in enumerate(values):
        change = {field: v}
        change.update({k: seq[i] for k, seq in paired.items()})
        points.append(cfg.system.with_(**change))
    return field, list(paired), points


def _sweep_point(args):
    params, grid = args
    try:
        sim = simulate(params, grid)
        wave = build_wavepacket(sim)
        summary = summarize(sim, wave)
        return summary, None, (wave.tau_s, wave.g2_cross, wave.r_c_si)
    except SfwmError as exc:
        return None, exc.name, None


def cmd_sweep(cfg: RunConfig, out: Path) -> int:
    field, paired, points = _sweep_params(cfg)
    jobs = [(p, cfg.grid) for p in points]
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(_sweep_point, jobs))
    else:
        results = [_sweep_point(j) for j in jobs]
    cols = (field, *paired, *RATE_COLUMNS, "ok")
    rows, failures = [], []
    for i, (p, (summary, err, wave)) in enumerate(zip(points, results)):
        lead = [abs(getattr(p, f)) if f in ("omega_d", "omega_c") else getattr(p, f) for f in (field, *paired)]
        if err is None:
            rows.append(lead + [summary[c] for c in RATE_COLUMNS] + [1])
        else:
            rows.append(lead + [math.nan] * len(RATE_COLUMNS) + [0])
            failures.append(f"point {i}: {err}")
        if cfg.get("sweep.write_wavepackets") and wave is not None:
            tau_s, g2, rc = wave
            sel = _window(tau_s, cfg.get("tau.min_ns"), cfg.get("tau.max_ns"))
            write_csv(out / f"wavepacket_{i:03d}.csv", cfg.values, f"sweep point {i}: {field} = {lead[0]!r}",
                      ("tau_ns", "g2_cross", "r_c_per_s"), np.column_stack([tau_s * 1e9, g2, rc])[sel])
    write_csv(out / "sweep.csv", cfg.values, f"sweep over {field}", cols, rows)
    for line in failures:
        print(line, file=sys.stderr)
    return EXIT_NUMERICAL if failures else EXIT_OK


def cmd_calibrate(cfg: RunConfig, out: Path) -> int:
    ods, wcs = cfg.get("calibrate.od"), cfg.get("calibrate.omega_c_gamma")
    if not ods:
        raise ConfigError("calibrate.od is empty", key="calibrate.od")
    if len(wcs) != len(ods):
        raise ConfigError("calibrate.omega_c_gamma needs one value per optical depth", key="calibrate.omega_c_gamma")
    target = cfg.get("calibrate.target_r_b_per_s")
    bracket = (cfg.get("calibrate.delta_d_min_gamma"), cfg.get("calibrate.delta_d_max_gamma"))
    wd = cfg.get("calibrate.omega_d_gamma")
    rows, failures = [], []
    for od, wc in zip(ods, wcs):
        try:
            dd = calibrate_delta_d(od, wc, wd, target, base=cfg.system, grid=cfg.grid, bracket=bracket)
            rows.append([od, wc, dd, 1])
            print(f"od = {od:g}: delta_d = {dd:.6g} Gamma")
        except SfwmError as exc:
            rows.append([od, wc, math.nan, 0])
            failures.append(f"od = {od:g}: {exc.name}")
    write_csv(out / "calibration.csv", cfg.values, f"drive detuning for R_B = {target:g} s^-1",
              ("od", "omega_c_gamma", "delta_d_gamma", "ok"), rows)
    for line in failures:
        print(line, file=sys.stderr)
    return EXIT_NUMERICAL if failures else EXIT_OK


def cmd_eit_pulse(cfg: RunConfig, out: Path) -> int:
    p = cfg.system
    gs = p.gamma_si
    span, npts = cfg.get("pulse.delay_span_gamma"), cfg.get("pulse.delay_points")
    if not span > 0 or npts < 3:
        raise ConfigError("pulse.delay_span_gamma must be positive and pulse.delay_points >= 3")
    w = p.delta_c + np.linspace(-span, span, npts)
    delay = eit_group_delay(p, w, step=1e-4, wavelength=cfg.get("pulse.wavelength_nm") * 1e-9)
    write_csv(out / "eit_delay.csv", cfg.values, "anti-Stokes group delay",
              ("omega_gamma", "detuning_mhz", "tau_eit_ns"),
              np.column_stack([w, w * gs / (2 * math.pi) / 1e6, delay / gs * 1e9]))
    lo, hi, n = cfg.get("pulse.window_min_ns"), cfg.get("pulse.window_max_ns"), cfg.get("pulse.n_samples")
    if not lo < hi or n < 16:
        raise ConfigError("pulse window must have min < max and at least 16 samples")
    t_ns = np.linspace(lo, hi, n, endpoint=False)
    t = t_ns * 1e-9 * gs
    width = cfg.get("pulse.width_e2_ns") * 1e-9 * gs
    carrier = cfg.get("pulse.carrier_gamma")
    res = propagate_pulse(p, t, gaussian_envelope(t, width), carrier)
    write_csv(out / "eit_pulse.csv", cfg.values, "slow-light pulse", ("t_ns", "intensity_in", "intensity_out"),
              np.column_stack([t_ns, res.intensity_in, res.intensity_out]))
    print(f"peak delay = {res.peak_delay / gs * 1e9:.6g} ns")
    return EXIT_OK


def cmd_counts(cfg: RunConfig, out: Path) -> int:
    cfg.detection.validate()
    sim = simulate(cfg.system, cfg.grid)
    wave = build_wavepacket(sim)
    window = (cfg.get("counts.window_min_ns") * 1e-9, cfg.get("counts.window_max_ns") * 1e-9)
    if not window[0] < window[1]:
        raise ConfigError("counts window: min must be below max")
    hist = counts_model(wave.tau_s, wave.r_c_si, sim.rates, cfg.detection, window, seed=cfg.seed)
    write_csv(out / "counts.csv", cfg.values, "coincidence histogram", ("tau_ns", "n_expected", "n_sampled"),
              np.column_stack([hist.bin_start_s * 1e9, hist.expected, hist.sampled]))
    print(f"p_s = {hist.p_s:.6g}")
    return EXIT_OK


def cmd_selfcheck(cfg: RunConfig, out: Path) -> int:
    checks = run_selfcheck()
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_NUMERICAL


COMMANDS = {
    "wavepacket": (cmd_wavepacket, "wavepacket.csv and rates.csv for one parameter set"),
    "sweep": (cmd_sweep, "scalar observables over a list of parameter values"),
    "calibrate": (cmd_calibrate, "drive detuning that holds the generation rate fixed"),
    "eit-pulse": (cmd_eit_pulse, "group delay curve and a slow-light pulse"),
    "counts": (cmd_counts, "expected and Poisson-sampled coincidence histogram"),
    "selfcheck": (cmd_selfcheck, "run the internal invariant checks"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sfwm", description="Biphoton source simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", help="key = value configuration file")
        cmd.add_argument("--out", default=".", help="output directory (default: current)")
        cmd.add_argument("--seed", type=int, help="random seed (overrides run.seed)")
        cmd.add_argument("--threads", type=int, help="worker processes for sweeps (overrides run.threads)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = COMMANDS[args.command][0]
    try:
        values = load_config(args.config)
        if args.seed is not None:
            values["run.seed"] = args.seed
        if args.threads is not None:
            values["run.threads"] = args.threads
        if values["run.threads"] < 1:
            raise InvalidArgument("threads must be >= 1")
        cfg = build_run_config(values)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return handler(cfg, out)
    except SfwmError as exc:
        print(exc.name, file=sys.stderr)
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE if exc.kind == "usage" else EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
