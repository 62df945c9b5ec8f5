"""Command-line interface.

Subcommands: simulate, ode, equilibria, phase-sweep, validate.
Exit codes: 0 success, 1 validation-suite failure, 2 usage/config error.

Flags override config-file values; every output file gets a sidecar
``<output>.config.json`` echoing the effective configuration, and ``--plot``
renders a figure next to the data file.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import fileio
from .master import build_generator, stationary, stationary_nullspace
from .meanfield import OdeConfig, integrate
from .model import ModelParams, PopulationSizes
from .phase import find_equilibria, j12_critical, j12_tangency_critical, phase_region, sweep
from .simulate import SimConfig, ensemble, make_grid, simulate
from .validation import detailed_balance_gap, lln_experiment, mc_vs_master

_MODEL_KEYS = ("alpha", "j11", "j12", "j22", "h1", "h2")
_MODEL_DEFAULTS = {"alpha": 0.5, "j11": 0.0, "j12": 0.0, "j22": 0.0, "h1": 0.0, "h2": 0.0}
_RUN_DEFAULTS = {"lambda_plus": 0.5, "t_end": 10.0, "seed": 0, "trials": 1}


def _pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    return float(parts[0]), float(parts[1])


def _triple(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}")
    return float(parts[0]), float(parts[1]), float(parts[2])


def _range_spec(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"range must be lo:hi:n, got {text!r}")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 1:
        raise argparse.ArgumentTypeError("range count must be >= 1")
    return np.linspace(lo, hi, n)


def _add_model_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON config file; flags override its values")
    for key in _MODEL_KEYS:
        sub.add_argument(f"--{key}", type=float)
    sub.add_argument("--j", type=_triple, metavar="J11,J12,J22", help="shorthand for the three couplings")
    sub.add_argument("--h", type=_pair, metavar="H1,H2", help="shorthand for the two fields")


def _effective(args, extra_keys=()) -> dict:
    """Merge defaults, config file, and flags (flags win)."""
    cfg = dict(_MODEL_DEFAULTS)
    cfg.update({k: v for k, v in _RUN_DEFAULTS.items() if k in extra_keys})
    if getattr(args, "config", None):
        cfg.update(fileio.load_config(args.config))
    if getattr(args, "j", None) is not None:
        cfg["j11"], cfg["j12"], cfg["j22"] = args.j
    if getattr(args, "h", None) is not None:
        cfg["h1"], cfg["h2"] = args.h
    for key in (*_MODEL_KEYS, *extra_keys):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _model(cfg: dict) -> ModelParams:
    return ModelParams(
        alpha=cfg["alpha"], j11=cfg["j11"], j12=cfg["j12"], j22=cfg["j22"],
        h1=cfg["h1"], h2=cfg["h2"],
    )


def _split_n(n: int, alpha: float) -> PopulationSizes:
    if n < 2:
        raise ValueError("n must be at least 2")
    n1 = min(n - 1, max(1, round(alpha * n)))
    return PopulationSizes(n1=n1, n2=n - n1)


def _cmd_simulate(args) -> int:
    cfg = _effective(args, extra_keys=("n", "lambda_plus", "t_end", "dt", "seed", "trials"))
    if "n" not in cfg or cfg["n"] is None:
        raise ValueError("simulate requires the total particle count n")
    p = _model(cfg)
    sizes = _split_n(int(cfg["n"]), p.alpha)
    trials = int(cfg["trials"])
    dt = cfg.get("dt")
    t0 = time.perf_counter()
    if trials == 1:
        sim_cfg = SimConfig(
            params=p, sizes=sizes, t_end=cfg["t_end"], lambda_plus=cfg["lambda_plus"],
            seed=int(cfg["seed"]),
            record_mode="grid" if dt else "events", dt=dt,
        )
        traj = simulate(sim_cfg)
        wall = time.perf_counter() - t0
        if args.format == "json":
            fileio.write_json(args.output, {
                "t": traj.times.tolist(),
                "m1": traj.m[:, 0].tolist(),
                "m2": traj.m[:, 1].tolist(),
            })
        else:
            fileio.write_trajectory_csv(args.output, traj.times, traj.m)
        jumps = traj.jump_count
        if args.plot:
            from . import plots
            plots.plot_trajectory(f"{args.output}.png", traj.times, traj.m, title="trajectory")
    else:
        if not dt:
            dt = cfg["t_end"] / 200.0
            cfg["dt"] = dt
        sim_cfg = SimConfig(
            params=p, sizes=sizes, t_end=cfg["t_end"], lambda_plus=cfg["lambda_plus"],
            seed=int(cfg["seed"]), record_mode="grid", dt=dt,
        )
        grid = make_grid(cfg["t_end"], dt)
        stats = ensemble(sim_cfg, trials, grid)
        wall = time.perf_counter() - t0
        if args.format == "json":
            fileio.write_json(args.output, {
                "t": stats.times.tolist(),
                "mean_m1": stats.mean[:, 0].tolist(),
                "mean_m2": stats.mean[:, 1].tolist(),
                "var_m1": stats.var[:, 0].tolist(),
                "var_m2": stats.var[:, 1].tolist(),
                "trials": stats.trials,
            })
        else:
            fileio.write_ensemble_csv(args.output, stats)
        jumps = stats.total_jumps
        if args.plot:
            from . import plots
            plots.plot_ensemble(f"{args.output}.png", stats, title=f"ensemble ({trials} trials)")
    fileio.write_sidecar(args.output, cfg)
    rate = jumps / wall if wall > 0 else float("inf")
    print(f"jumps={jumps} wall={wall:.3f}s events_per_sec={rate:.3g}")
    return 0


def _cmd_ode(args) -> int:
    cfg = _effective(args, extra_keys=("t_end", "dt"))
    p = _model(cfg)
    dt = cfg.get("dt") or 1e-3
    cfg["dt"] = dt
    cfg["m0"] = list(args.m0)
    ode_cfg = OdeConfig(m0=args.m0, t_end=cfg["t_end"], dt=dt)
    times, states = integrate(ode_cfg, p)
    if args.format == "json":
        fileio.write_json(args.output, {
            "t": times.tolist(), "m1": states[:, 0].tolist(), "m2": states[:, 1].tolist(),
        })
    else:
        fileio.write_trajectory_csv(args.output, times, states)
    fileio.write_sidecar(args.output, cfg)
    if args.plot:
        from . import plots
        plots.plot_trajectory(f"{args.output}.png", times, states, title="mean-field trajectory")
    print(f"steps={len(times) - 1} t_final={times[-1]:.6g}")
    return 0


def _cmd_equilibria(args) -> int:
    cfg = _effective(args)
    p = _model(cfg)
    if p.h1 != 0.0 or p.h2 != 0.0:
        raise ValueError("phase analysis requires zero field")
    points = find_equilibria(p)
    region = phase_region(p)
    try:
        jc = j12_critical(p)
    except ValueError:
        jc = None
    jt = None
    if region.label.startswith("C"):
        jt = j12_tangency_critical(p)
    payload = {
        "region": region.label,
        "expected_count": region.expected_count,
        "boundary": region.boundary,
        "j12_critical": jc,
        "j12_tangency_critical": jt,
        "equilibria": fileio.equilibria_to_json(points),
    }
    fileio.write_json(args.output, payload)
    fileio.write_sidecar(args.output, cfg)
    if args.plot:
        from . import plots
        plots.plot_equilibria(f"{args.output}.png", p, points, title=f"region {region.label}")
    print(f"region={region.label} equilibria={len(points)}")
    return 0


def _cmd_phase_sweep(args) -> int:
    rows = sweep(args.aj11_range, args.j12_range, args.bj22, alpha=args.alpha)
    fileio.write_sweep_csv(args.output, rows)
    fileio.write_sidecar(args.output, {
        "alpha": args.alpha,
        "bj22": args.bj22,
        "aj11_range": [float(args.aj11_range[0]), float(args.aj11_range[-1]), len(args.aj11_range)],
        "j12_range": [float(args.j12_range[0]), float(args.j12_range[-1]), len(args.j12_range)],
    })
    if args.plot:
        from . import plots
        plots.plot_sweep(f"{args.output}.png", rows, title=f"(1-a)j22 = {args.bj22:g}")
    bad = sum(1 for r in rows if r.region == "error")
    print(f"cells={len(rows)} errors={bad}")
    return 0


def _run_suites(names: list[str], seed: int) -> dict:
    report: dict = {"suites": {}}
    rng = np.random.default_rng(seed)

    if "balance" in names:
        worst = 0.0
        sizes = PopulationSizes(4, 4)
        for _ in range(100):
            p = ModelParams(
                alpha=float(rng.uniform(0.15, 0.85)),
                j11=float(rng.uniform(0.0, 3.0)), j12=float(rng.uniform(-3.0, 3.0)),
                j22=float(rng.uniform(0.0, 3.0)),
                h1=float(rng.uniform(-1.0, 1.0)), h2=float(rng.uniform(-1.0, 1.0)),
            )
            worst = max(worst, detailed_balance_gap(sizes, p))
        report["suites"]["balance"] = {"passed": worst < 1e-12, "max_rel_err": worst}

    if "gibbs" in names:
        worst_tv = 0.0
        worst_res = 0.0
        sizes = PopulationSizes(3, 3)
        for _ in range(20):
            p = ModelParams(
                alpha=float(rng.uniform(0.15, 0.85)),
                j11=float(rng.uniform(0.0, 3.0)), j12=float(rng.uniform(-3.0, 3.0)),
                j22=float(rng.uniform(0.0, 3.0)),
                h1=float(rng.uniform(-1.0, 1.0)), h2=float(rng.uniform(-1.0, 1.0)),
            )
            gen = build_generator(sizes, p)
            pi = stationary(gen)
            pi_null = stationary_nullspace(gen)
            worst_tv = max(worst_tv, 0.5 * float(np.abs(pi - pi_null).sum()))
            worst_res = max(worst_res, float(np.abs(pi @ gen.matrix).max()))
        report["suites"]["gibbs"] = {
            "passed": worst_tv < 1e-10 and worst_res < 1e-9,
            "max_tv": worst_tv,
            "max_residual": worst_res,
        }

    if "master" in names:
        sizes = PopulationSizes(3, 3)
        cases = {
            "ferro": ModelParams(0.5, 1.0, 1.0, 1.0),
            "antiferro": ModelParams(0.5, 1.0, -1.0, 1.0),
            "with_fields": ModelParams(0.6, 1.5, 0.7, 0.8, h1=0.3, h2=-0.2),
        }
        tvs = {
            name: mc_vs_master(p, sizes, t=1.0, trials=50_000, seed=seed, lambda_plus=0.5)
            for name, p in cases.items()
        }
        report["suites"]["master"] = {
            "passed": all(tv < 0.02 for tv in tvs.values()),
            "tv": tvs,
        }

    if "lln" in names:
        p = ModelParams(0.5, 1.0, 0.5, 1.0)
        rep = lln_experiment(
            p, lambda_plus=0.75, n_list=[100, 400, 1600], t_end=1.0, trials=100, seed=seed
        )
        medians = [r.median_sup_dev for r in rep.rows]
        report["suites"]["lln"] = {
            "passed": all(a > b for a, b in zip(medians, medians[1:])),
            "median_sup_dev": medians,
        }

    report["passed"] = all(s["passed"] for s in report["suites"].values())
    return report


def _cmd_validate(args) -> int:
    names = ["balance", "gibbs", "master", "lln"] if args.suite == "all" else [args.suite]
    report = _run_suites(names, args.seed)
    fileio.write_json(args.output, report)
    for name, suite in report["suites"].items():
        print(f"{name}: {'PASS' if suite['passed'] else 'FAIL'}")
    return 0 if report["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bicw",
        description="Two-population mean-field Ising model: simulation and phase analysis",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser("simulate", help="stochastic trajectory or ensemble")
    _add_model_flags(sim)
    sim.add_argument("--n", type=int, help="total particle count")
    sim.add_argument("--lambda-plus", dest="lambda_plus", type=float)
    sim.add_argument("--t-end", dest="t_end", type=float)
    sim.add_argument("--dt", "--grid-dt", dest="dt", type=float, help="recording grid spacing")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--trials", type=int)
    sim.add_argument("--output", default="trajectory.csv")
    sim.add_argument("--format", choices=("csv", "json"), default="csv")
    sim.add_argument("--plot", action="store_true")
    sim.set_defaults(func=_cmd_simulate)

    ode = subs.add_parser("ode", help="mean-field trajectory")
    _add_model_flags(ode)
    ode.add_argument("--m0", type=_pair, required=True, metavar="M1,M2")
    ode.add_argument("--t-end", dest="t_end", type=float)
    ode.add_argument("--dt", dest="dt", type=float)
    ode.add_argument("--output", default="ode.csv")
    ode.add_argument("--format", choices=("csv", "json"), default="csv")
    ode.add_argument("--plot", action="store_true")
    ode.set_defaults(func=_cmd_ode)

    eq = subs.add_parser("equilibria", help="equilibria and stability at zero field")
    _add_model_flags(eq)
    eq.add_argument("--output", default="equilibria.json")
    eq.add_argument("--plot", action="store_true")
    eq.set_defaults(func=_cmd_equilibria)

    ps = subs.add_parser("phase-sweep", help="region map over (alpha*j11, j12)")
    ps.add_argument(
        "--aj11-range", "--ajll-range", dest="aj11_range", type=_range_spec,
        required=True, metavar="LO:HI:N",
    )
    ps.add_argument("--j12-range", dest="j12_range", type=_range_spec, required=True, metavar="LO:HI:N")
    ps.add_argument("--bj22", type=float, required=True, help="fixed (1-alpha)*j22")
    ps.add_argument("--alpha", type=float, default=0.5)
    ps.add_argument("--output", default="sweep.csv")
    ps.add_argument("--plot", action="store_true")
    ps.set_defaults(func=_cmd_phase_sweep)

    val = subs.add_parser("validate", help="run consistency suites")
    val.add_argument("suite", choices=("balance", "gibbs", "master", "lln", "all"))
    val.add_argument("--seed", type=int, default=0)
    val.add_argument("--output", default="validate_report.json")
    val.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
