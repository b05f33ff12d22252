"""Command-line front end.

Exit codes: 0 success, 1 configuration error, 2 domain error (inputs
outside the physical model), 3 numerical failure.

Randomness: the top-level seed (config ``seed``, overridden by ``--seed``)
is expanded per task as ``SeedSequence(seed, spawn_key=(task_id,))`` with
task ids listed in ``TASK_IDS``; the first 64-bit word of that sequence
seeds the task.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    ConfigError,
    RunConfig,
    build_fiber,
    build_filter,
    build_pump,
    build_rate_model,
    load_config,
)
from .counts import (
    CountRates,
    forward_count_model,
    herald_probability_per_pulse,
    heralding_efficiency,
    overall_detection_efficiency,
    poisson_interval,
)
from .dispersion import gvm_classify
from .errors import DomainError, NumericalError
from .export import write_jsa_binary, write_jsa_csv, write_json, write_table
from .hom import dip_fwhm, hom_scan, simulate_fourfold_scan
from .jsa import Arm, build_jsa, default_grid, heralded_density_matrix, marginal_spectrum, schmidt
from .phasematch import calibrate_delta_n, solve_central
from .tuning import (
    birefringence_sensitivity,
    filter_tradeoff_curve,
    optimize_pump_bandwidth,
    pressure_scan,
    pump_tuning_curve,
)

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_NUMERICAL = 0, 1, 2, 3
TASK_IDS = {"hom": 1, "rates": 2}
ROUNDTRIP_TOL_NM = 0.5


def task_seed(seed: int, task: str) -> int:
    ss = np.random.SeedSequence(seed, spawn_key=(TASK_IDS[task],))
    return int(ss.generate_state(1, np.uint64)[0])


class Outputs:
    """Tracks files written by a command so a failed run leaves nothing behind."""

    def __init__(self, directory: Path, fmt: str):
        self.dir = directory
        self.fmt = fmt
        self.written: list[Path] = []

    def path(self, name: str) -> Path:
        p = self.dir / name
        self.written.append(p)
        return p

    def table(self, stem: str, header, rows) -> Path:
        return write_table(self.path(f"{stem}.{self.fmt}"), header, rows, self.fmt)

    def json(self, name: str, obj) -> Path:
        return write_json(self.path(name), obj)

    def cleanup(self):
        for p in self.written:
            p.unlink(missing_ok=True)


def _source(cfg: RunConfig):
    fiber = build_fiber(cfg.fiber)
    pump = build_pump(cfg.require("pump"))
    g = cfg.grid
    grid = default_grid(fiber, pump, g.n_signal, g.n_idler, g.span_factor)
    sol = solve_central(fiber, pump.center_nm)
    flt = build_filter(cfg.herald_filter, sol.lambda_s) if cfg.herald_filter else None
    return fiber, pump, grid, sol, flt


def cmd_calibrate(cfg: RunConfig, out: Outputs, seed: int) -> str:
    cal = cfg.fiber.calibration
    if cal is None:
        raise ConfigError("missing config key: fiber.calibration")
    fiber = build_fiber(cfg.fiber)
    dn = calibrate_delta_n(cal.pump_nm, cal.signal_nm, cal.idler_nm, fiber.base)
    sol = solve_central(fiber, cal.pump_nm)
    dev = max(abs(sol.lambda_s - cal.signal_nm), abs(sol.lambda_i - cal.idler_nm))
    gvm = gvm_classify(fiber, cal.pump_nm * 1e-3, sol.lambda_s * 1e-3, sol.lambda_i * 1e-3)
    out.json(
        "calibration.json",
        {
            "delta_n": dn,
            "lambda_p_nm": sol.lambda_p,
            "lambda_s_nm": sol.lambda_s,
            "lambda_i_nm": sol.lambda_i,
            "residual_delta_k_rad_per_m": sol.residual_delta_k,
            "roundtrip_deviation_nm": dev,
            "gvm_regime": gvm.regime.value,
            "group_velocity_m_per_s": {"pump": gvm.v_pump, "signal": gvm.v_signal, "idler": gvm.v_idler},
        },
    )
    if dev > ROUNDTRIP_TOL_NM:
        raise DomainError(f"round trip misses the calibration triple by {dev:.3f} nm")
    return (
        f"delta_n={dn:.6e} lambda_s={sol.lambda_s:.3f} lambda_i={sol.lambda_i:.3f} "
        f"roundtrip_nm={dev:.3f} gvm={gvm.regime.value}"
    )


def cmd_jsa(cfg: RunConfig, out: Outputs, seed: int) -> str:
    fiber, pump, grid, sol, _ = _source(cfg)
    jsa = build_jsa(fiber, pump, grid)
    write_jsa_binary(jsa, out.path("jsa.bin"))
    if out.fmt == "csv":
        write_jsa_csv(jsa, out.path("jsa.csv"))
    widths = {}
    for arm in Arm:
        m = marginal_spectrum(jsa, arm)
        widths[arm.value] = m.fwhm_nm
        out.table(
            f"marginal_{arm.value}",
            ["omega_rad_per_s", "wavelength_nm", "density_per_rad_per_s"],
            zip(m.omega, m.wavelength_nm, m.intensity),
        )
    purity = schmidt(jsa).purity
    out.json("jsa_summary.json", {"purity": purity, "marginal_fwhm_nm": widths, "grid_shape": list(grid.shape)})
    return f"purity={purity:.4f} fwhm_signal_nm={widths['signal']:.4f} fwhm_idler_nm={widths['idler']:.4f}"


def cmd_purity(cfg: RunConfig, out: Outputs, seed: int) -> str:
    fiber, pump, grid, sol, flt = _source(cfg)
    jsa = build_jsa(fiber, pump, grid)
    sd = schmidt(jsa)
    out.table("schmidt", ["k", "probability"], enumerate(sd.schmidt_probabilities[:50]))
    record = {"purity": sd.purity, "schmidt_number": sd.schmidt_number}
    line = f"purity={sd.purity:.4f}"
    if flt is not None:
        state = heralded_density_matrix(jsa, flt)
        record.update(
            filtered_purity=state.purity,
            herald_probability=state.herald_probability,
            filter={"center_nm": flt.center_nm, "fwhm_nm": flt.fwhm_nm, "peak_transmission": flt.peak_transmission},
        )
        line += f" filtered_purity={state.purity:.4f} herald_probability={state.herald_probability:.4f}"
    out.json("purity.json", record)
    return line


def cmd_hom(cfg: RunConfig, out: Outputs, seed: int) -> str:
    h = cfg.require("hom")
    fiber_b, pump, grid, sol, flt = _source(cfg)
    fiber_a = fiber_b.with_delta_n(fiber_b.delta_n + h.delta_n_offset)
    rho_b = heralded_density_matrix(build_jsa(fiber_b, pump, grid), flt)
    rho_a = heralded_density_matrix(build_jsa(fiber_a, pump, grid), flt)
    delays = np.linspace(h.delay_min_ps, h.delay_max_ps, h.n_delays) * 1e-12
    scan = hom_scan(rho_a, rho_b, delays)
    four = simulate_fourfold_scan(rho_a, rho_b, delays, h.baseline_counts, h.background_counts, task_seed(seed, "hom"))
    out.table(
        "hom_scan",
        ["delay_ps", "probability", "expected_counts", "sampled_counts"],
        zip(delays * 1e12, scan.coincidence_probability, four.expected_counts, four.sampled_counts.tolist()),
    )
    width = dip_fwhm(scan) * 1e12
    measured_floor = h.background_counts / h.baseline_counts
    edge = np.argsort(np.abs(delays))[-max(2, round(0.1 * delays.size)) :]
    plateau = float(np.mean(four.expected_counts[edge]))
    vis_bg = (plateau - float(np.min(four.expected_counts))) / plateau
    out.json(
        "hom.json",
        {
            "visibility": scan.visibility,
            "visibility_with_background": vis_bg,
            "dip_fwhm_ps": width,
            "purity_a": rho_a.purity,
            "purity_b": rho_b.purity,
            "background_counts": h.background_counts,
            "background_visibility_floor": measured_floor,
            "seed": four.seed,
        },
    )
    return f"visibility={scan.visibility:.4f} with_background={vis_bg:.4f} dip_fwhm_ps={width:.3f}"


def cmd_rates(cfg: RunConfig, out: Outputs, seed: int) -> str:
    r = cfg.require("rates")
    rates = CountRates(r.signal_hz, r.idler_hz, r.coincidence_hz)
    eta_h = heralding_efficiency(rates, r.detector_efficiency)
    overall = overall_detection_efficiency(rates)
    p_h = herald_probability_per_pulse(eta_h, r.signal_hz, r.rep_rate_hz)
    record = {"eta_h": eta_h, "overall_efficiency": overall, "herald_probability_per_pulse": p_h}
    line = f"eta_h={eta_h:.3f} overall={overall:.3f} P_h={p_h:.1e}"
    if r.monte_carlo is not None:
        model, chain = build_rate_model(r)
        mc_seed = task_seed(seed, "rates")
        res = forward_count_model(model, chain, r.monte_carlo.duration_s, mc_seed, r.monte_carlo.idler_split)
        cnt = asdict(res.counts)
        ci = {k: poisson_interval(v, res.duration) for k, v in cnt.items() if k != "pulses"}
        record["monte_carlo"] = {
            "mean_pairs_per_pulse": model.mean_pairs_per_pulse,
            "statistics": model.statistics.value,
            "chain": asdict(chain),
            "duration_s": res.duration,
            "seed": mc_seed,
            "counts": cnt,
            "rates_hz_with_1sigma": ci,
            "expected_counts": res.expected_counts(),
            "first_order_rates_hz": asdict(res.first_order),
            "g2": res.g2,
        }
        line += f" g2={res.g2:.4f}" if res.g2 is not None else " g2=nan"
    out.json("rates.json", record)
    return line


def cmd_tune(cfg: RunConfig, out: Outputs, seed: int) -> str:
    t = cfg.require("tune")
    fiber, pump, grid, sol, flt = _source(cfg)
    curve = pump_tuning_curve(fiber, (t.pump_min_nm, t.pump_max_nm), t.steps)
    out.table("tuning_curve", ["lambda_p_nm", "lambda_s_nm", "lambda_i_nm"], curve.rows.tolist())
    sens = birefringence_sensitivity(fiber, pump.center_nm)
    offsets = np.linspace(-0.5, 0.5, t.pressure_points) * t.pressure_shift_nm / sens
    ps = pressure_scan(fiber, fiber, offsets, pump, flt, grid)
    out.table(
        "pressure_scan",
        ["delta_n_offset", "lambda_i_nm", "visibility"],
        zip(ps.offsets, ps.idler_nm, ps.visibility),
    )
    trade = filter_tradeoff_curve(fiber, pump, t.filter_widths_nm, grid=grid)
    out.table("filter_tradeoff", ["filter_fwhm_nm", "purity", "herald_probability"], trade.tolist())
    best = float(ps.offsets[int(np.argmax(ps.visibility))])
    out.json(
        "tune.json",
        {
            "sensitivity_nm_per_unit_delta_n": sens,
            "pressure_total_shift_nm": ps.total_shift_nm,
            "best_offset": best,
            "failed_pump_nm": list(curve.failed),
        },
    )
    return f"sensitivity_nm={sens:.4e} shift_nm={ps.total_shift_nm:.3f} best_offset={best:.3e}"


def cmd_optimize(cfg: RunConfig, out: Outputs, seed: int) -> str:
    o = cfg.require("optimize")
    fiber = build_fiber(cfg.fiber)
    pump_spec = cfg.require("pump")
    pump = build_pump(pump_spec)
    res = optimize_pump_bandwidth(
        fiber,
        pump.center_nm,
        tuple(o.bounds_nm),
        o.tolerance_nm,
        pump.shape,
        cfg.grid.n_signal,
        cfg.grid.span_factor,
    )
    out.json(
        "optimize.json",
        {
            "optimal_fwhm_nm": res.optimal_fwhm,
            "purity": res.purity,
            "brackets_nm": [list(b) for b in res.brackets],
            "evaluations": [[k, v] for k, v in res.evaluations.items()],
        },
    )
    return f"optimal_fwhm_nm={res.optimal_fwhm:.4f} purity={res.purity:.4f}"


COMMANDS = {
    "calibrate": cmd_calibrate,
    "jsa": cmd_jsa,
    "purity": cmd_purity,
    "hom": cmd_hom,
    "rates": cmd_rates,
    "tune": cmd_tune,
    "optimize": cmd_optimize,
}

HELP = {
    "calibrate": "fit delta_n to a (pump, signal, idler) triple and re-solve it",
    "jsa": "export the joint spectral amplitude and its marginals",
    "purity": "Schmidt purity, optionally behind the herald filter",
    "hom": "two-source HOM dip and synthetic fourfold counts",
    "rates": "heralding efficiency, P_h and an optional Monte Carlo g2 run",
    "tune": "pump tuning curve, birefringence scan and filter trade-off",
    "optimize": "pump bandwidth maximizing unfiltered purity",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run configuration")
    common.add_argument("--out", default=".", help="output directory (created if missing)")
    common.add_argument("--seed", type=int, default=None, help="override the config seed (u64)")
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="table format")
    common.add_argument("-v", "--verbose", action="store_true")
    ap = argparse.ArgumentParser(prog="heraldkit", description="Fiber heralded single-photon source toolkit")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=HELP[name])
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    out = Outputs(Path(args.out), args.format)
    try:
        cfg = load_config(args.config)
        seed = cfg.seed if args.seed is None else args.seed
        if not 0 <= seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed}")
        out.dir.mkdir(parents=True, exist_ok=True)
        summary = COMMANDS[args.command](cfg, out, seed)
    except ConfigError as exc:
        out.cleanup()
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        out.cleanup()
        print(f"domain error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericalError as exc:
        out.cleanup()
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except BaseException:
        out.cleanup()
        raise
    print(summary)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
